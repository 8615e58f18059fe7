//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::process::ExitCode;
use std::time::Instant;

use concirc_core::catalog::{get_builtin, random_perturbed_flat, BUILTIN_NAMES};
use concirc_core::chart::{MetricChart, Point, Sampler};
use concirc_core::expr::{differentiate, evaluate, evaluate_dual, Expr};
use concirc_core::geometry::CurvatureBundle;
use concirc_core::identities::{
    check_action_routes, check_walker, per_point_values, random_riemann_like, walker_lemma_kernel, ActionRoute,
};
use concirc_core::recurrence::{
    check_proj_einstein_chain, check_recurrence, classify, fit_recurrence_form, verify_theorem, RecurrenceError, Target,
    Verdict,
};
use concirc_core::tensor::{Symmetry, TensorField};

type Outcome = Result<String, String>;

const SEED: u64 = 42;
const RANDOM_METRICS: usize = 50;

fn setup(chart: MetricChart, count: usize, seed: u64) -> Result<(CurvatureBundle, Vec<Point>), String> {
    let points = chart
        .sample_points(count, &mut Sampler::new(seed))
        .map_err(|e| format!("{}: {e}", chart.name()))?;
    let bundle = CurvatureBundle::new(chart).map_err(|e| e.to_string())?;
    Ok((bundle, points))
}

fn builtin(name: &str, count: usize) -> Result<(CurvatureBundle, Vec<Point>), String> {
    setup(get_builtin(name).ok_or(format!("missing builtin {name}"))?.chart, count, SEED)
}

fn random_charts() -> Vec<MetricChart> {
    let mut s = Sampler::new(SEED);
    (0..RANDOM_METRICS)
        .map(|k| random_perturbed_flat(&mut s, &format!("random_{k}")))
        .collect()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn walker_identity() -> Outcome {
    let mut charts: Vec<MetricChart> = BUILTIN_NAMES.iter().map(|n| get_builtin(n).unwrap().chart).collect();
    charts.extend(random_charts());
    let total = charts.len();
    let mut worst = 0.0f64;
    for chart in charts {
        let (b, pts) = setup(chart, 20, SEED)?;
        let r = check_walker(&b, &pts, 1e-8, ActionRoute::SecondDerivative).map_err(|e| e.to_string())?;
        for p in &r.points {
            worst = worst.max(p.residual / (1.0 + p.scale));
        }
        ensure(r.passed(), || format!("{}: residual {:.3e}", b.chart().name(), r.max_residual()))?;
    }
    Ok(format!("{total} charts x 20 points, worst relative residual {worst:.2e}"))
}

fn derivative_oracle() -> Outcome {
    let mut pool: Vec<(MetricChart, Vec<Expr>)> = Vec::new();
    for name in BUILTIN_NAMES {
        let chart = get_builtin(name).unwrap().chart;
        let b = CurvatureBundle::new(chart.clone()).map_err(|e| e.to_string())?;
        let mut exprs: Vec<Expr> = chart.metric_components().to_vec();
        exprs.extend(b.christoffel_components().iter().cloned());
        exprs.push(b.scalar_curvature().clone());
        exprs.retain(|e| e.as_number().is_none());
        if !exprs.is_empty() {
            pool.push((chart, exprs));
        }
    }
    let mut s = Sampler::new(SEED);
    let mut worst = 0.0f64;
    let mut done = 0;
    let mut nonzero = 0;
    while done < 1000 {
        let (chart, exprs) = &pool[s.index(pool.len())];
        let e = &exprs[s.index(exprs.len())];
        let point = &chart.sample_points(1, &mut s).map_err(|e| e.to_string())?[0];
        let coords = chart.coordinates();
        let dir = &coords[s.index(coords.len())];
        let at: Vec<(&str, f64)> = coords.iter().map(String::as_str).zip(point.0.iter().copied()).collect();
        let dual = evaluate_dual(e, at.as_slice(), dir).map_err(|err| format!("{e}: {err}"))?;
        let symbolic = evaluate(&differentiate(e, dir), at.as_slice()).map_err(|err| format!("{e}: {err}"))?;
        let rel = (symbolic - dual.deriv).abs() / (1.0 + dual.deriv.abs());
        worst = worst.max(rel);
        nonzero += usize::from(dual.deriv != 0.0);
        ensure(rel <= 1e-12, || format!("d/d{dir} {e}: {symbolic} vs {}", dual.deriv))?;
        done += 1;
    }
    Ok(format!("1000 samples ({nonzero} with nonzero derivative), worst relative difference {worst:.2e}"))
}

fn constant_curvature() -> Outcome {
    let mut msg = Vec::new();
    for (name, expected, r_tol) in [("sphere_3", 6.0, 1e-9), ("sphere_2", 2.0, 1e-10)] {
        let (b, pts) = builtin(name, 20)?;
        let scalar = TensorField::new(b.dim(), 0, vec![b.scalar_curvature().clone()], Symmetry::None).unwrap();
        let mut worst_r = 0.0f64;
        let mut worst_c = 0.0f64;
        per_point_values(&b, &[&scalar, b.concircular(), b.riemann()], &pts, |_, v| {
            worst_r = worst_r.max((v[0].data[0] - expected).abs());
            worst_c = worst_c.max(v[1].max_abs() / (1.0 + v[2].max_abs()));
        })
        .map_err(|e| e.to_string())?;
        ensure(worst_r <= r_tol, || format!("{name}: |r - {expected}| = {worst_r:.3e}"))?;
        ensure(worst_c <= 1e-9, || format!("{name}: max|C| = {worst_c:.3e}"))?;
        msg.push(format!("{name} |r-{expected}| {worst_r:.1e} |C| {worst_c:.1e}"));
    }
    Ok(msg.join("; "))
}

fn surface_power_log_scalar() -> Outcome {
    let (b, pts) = builtin("surface_power", 20)?;
    let r = b.scalar_curvature().clone();
    let dr = b.gradient(&r);
    let lambda = dr.map(|c| c.div(&r));
    let report = check_recurrence(&b, Target::Riemann, &lambda, &pts, 1e-8).map_err(|e| e.to_string())?;
    ensure(report.passed(), || format!("residual {:.3e}", report.max_residual()))?;
    Ok(format!("{} points, max residual {:.2e}", report.points.len(), report.max_residual()))
}

fn theorem_instance() -> Outcome {
    let (b, pts) = builtin("ppwave_recurrent", 20)?;
    let fit = fit_recurrence_form(&b, Target::Concircular, &pts).map_err(|e| e.to_string())?;
    ensure(fit.passed(1e-8), || format!("C fit residual {:.3e}", fit.max_residual()))?;
    let t = verify_theorem(&b, &pts, 1e-8).map_err(|e| e.to_string())?;
    ensure(t.skipped.is_empty(), || format!("{} points skipped", t.skipped.len()))?;
    let worst = |f: fn(&concirc_core::recurrence::TheoremPoint) -> f64| t.points.iter().map(f).fold(0.0, f64::max);
    let (mu, rec, closure, semi) = (
        worst(|p| p.mu_norm),
        worst(|p| p.recurrence),
        worst(|p| p.closure),
        worst(|p| p.semisymmetry),
    );
    ensure(mu <= 1e-10, || format!("|mu| {mu:.3e}"))?;
    ensure(rec <= 1e-8, || format!("R recurrence {rec:.3e}"))?;
    ensure(closure <= 1e-10, || format!("d lambda {closure:.3e}"))?;
    ensure(semi <= 1e-8, || format!("semisymmetry {semi:.3e}"))?;
    ensure(t.passed(), || "theorem report failed".into())?;
    Ok(format!(
        "fit {:.1e}, |mu| {mu:.1e}, recurrence {rec:.1e}, d lambda {closure:.1e}, semisymmetry {semi:.1e}",
        fit.max_residual()
    ))
}

fn walker_lemma() -> Outcome {
    let mut s = Sampler::new(SEED);
    let mut min_ratio = f64::INFINITY;
    for n in 3..=5 {
        for k in 0..100 {
            let b = random_riemann_like(n, &mut s);
            let kernel = walker_lemma_kernel(&b).map_err(|e| format!("dim {n} sample {k}: {e:?}"))?;
            ensure(kernel.dimension == 0, || format!("dim {n} sample {k}: kernel dimension {}", kernel.dimension))?;
            let sv = &kernel.singular_values;
            min_ratio = min_ratio.min(sv[sv.len() - 1] / sv[0]);
        }
    }
    Ok(format!("300 tensors, smallest sigma_min/sigma_max {min_ratio:.2e}"))
}

fn einstein_chain() -> Outcome {
    let mut worst_p = 0.0f64;
    for name in ["flat_euclidean_3", "minkowski_4", "sphere_3"] {
        let (b, pts) = builtin(name, 20)?;
        for c in check_proj_einstein_chain(&b, &pts).map_err(|e| e.to_string())? {
            worst_p = worst_p.max(c.projective);
            ensure(c.projective <= 1e-9, || format!("{name}: |P| {:.3e}", c.projective))?;
            ensure(c.hypothesis_holds(1e-9) && c.implication_holds(1e-9), || {
                format!("{name}: einstein {:.3e} concircular {:.3e}", c.einstein, c.concircular)
            })?;
        }
    }
    for name in ["sphere_2", "hyperbolic_2"] {
        let (b, pts) = builtin(name, 2)?;
        ensure(matches!(check_proj_einstein_chain(&b, &pts), Err(RecurrenceError::DimensionTwo)), || {
            format!("{name}: chain should be rejected in dimension 2")
        })?;
    }
    let (b, pts) = builtin("ppwave_recurrent", 20)?;
    let mut min_ratio = f64::INFINITY;
    for c in check_proj_einstein_chain(&b, &pts).map_err(|e| e.to_string())? {
        min_ratio = min_ratio.min(c.projective / c.scale);
        ensure(c.projective > 0.1 * c.scale, || format!("ppwave: |P| {:.3e} scale {:.3e}", c.projective, c.scale))?;
    }
    Ok(format!("constant curvature |P| <= {worst_p:.1e}; ppwave min |P|/scale {min_ratio:.2}"))
}

fn action_routes() -> Outcome {
    let mut worst = 0.0f64;
    for name in BUILTIN_NAMES {
        let (b, pts) = builtin(name, 20)?;
        let r = check_action_routes(&b, b.riemann(), &pts, 1e-8).map_err(|e| e.to_string())?;
        for p in &r.points {
            worst = worst.max(p.residual / (1.0 + p.scale));
        }
        ensure(r.passed(), || format!("{name}: {:.3e}", r.max_residual()))?;
    }
    Ok(format!("8 charts, worst relative difference {worst:.2e}"))
}

fn negative_control() -> Outcome {
    let (b, pts) = builtin("perturbed_flat", 20)?;
    let c = classify(&b, &pts, 1e-8).map_err(|e| e.to_string())?;
    ensure(c.verdict == Verdict::Generic, || format!("classified {}", c.verdict))?;
    for target in [Target::Riemann, Target::Concircular] {
        let fit = match fit_recurrence_form(&b, target, &pts) {
            Ok(f) => f,
            Err(RecurrenceError::HypothesisFailure { .. }) => continue,
            Err(e) => return Err(e.to_string()),
        };
        ensure(!fit.passed(1e-8), || format!("fit {} passes", target.name()))?;
        let clear = fit.points.iter().filter(|p| p.raw_residual > 1e-3 * p.magnitude).count();
        ensure(10 * clear >= 9 * pts.len(), || {
            format!("fit {}: only {clear}/{} points clearly non-recurrent", target.name(), pts.len())
        })?;
    }
    let mut runs = 0;
    let mut charts: Vec<MetricChart> = BUILTIN_NAMES.iter().map(|n| get_builtin(n).unwrap().chart).collect();
    charts.extend(random_charts());
    for chart in charts {
        let (b, pts) = setup(chart, 20, SEED)?;
        let c = classify(&b, &pts, 1e-8).map_err(|e| e.to_string())?;
        ensure(!c.is_violation(), || format!("{}: concircularly recurrent without recurrent", b.chart().name()))?;
        runs += 1;
    }
    Ok(format!("generic, no fit passes, no violation over {runs} classifications"))
}

fn run_cli(args: &[&str]) -> Result<(i32, Vec<u8>), String> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = concirc::run_with(std::iter::once("concirc").chain(args.iter().copied()), &mut out, &mut err);
    if code == 2 {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&err)));
    }
    Ok((code, out))
}

fn determinism() -> Outcome {
    let commands: [&[&str]; 5] = [
        &["check", "--builtin", "sphere_3", "--identity", "walker", "--seed", "7"],
        &["compute", "--builtin", "surface_power", "--samples", "5"],
        &["fit", "--builtin", "ppwave_recurrent", "--target", "C"],
        &["classify", "--builtin", "perturbed_flat"],
        &["verify-theorem", "--builtin", "ppwave_recurrent", "--seed", "3"],
    ];
    for args in commands {
        let first = run_cli(args)?;
        let second = run_cli(args)?;
        ensure(first == second, || format!("{args:?}: outputs differ"))?;
    }
    let a = run_cli(&["check", "--builtin", "sphere_2", "--identity", "bianchi2", "--seed", "1"])?;
    let b = run_cli(&["check", "--builtin", "sphere_2", "--identity", "bianchi2", "--seed", "2"])?;
    ensure(a.1 != b.1, || "different seeds gave identical reports".into())?;
    Ok(format!("{} commands byte-identical across runs", commands.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("walker identity on catalog and random metrics", walker_identity),
        ("symbolic vs dual derivatives", derivative_oracle),
        ("constant curvature spheres", constant_curvature),
        ("surface_power recurrent with d ln|r|", surface_power_log_scalar),
        ("theorem instance on ppwave_recurrent", theorem_instance),
        ("walker lemma kernel is trivial", walker_lemma),
        ("projective to einstein chain", einstein_chain),
        ("curvature action routes agree", action_routes),
        ("negative control", negative_control),
        ("deterministic reports", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] AC{} {name}: {detail} ({secs:.1}s)", k + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] AC{} {name}: {detail} ({secs:.1}s)", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
