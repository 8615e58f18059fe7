use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use concirc_core::catalog::{get_builtin, BUILTIN_NAMES};
use concirc_core::chart::{MetricChart, Point, Sampler};
use concirc_core::geometry::CurvatureBundle;
use concirc_core::identities::{check_bianchi, check_semisymmetry, check_walker, per_point_values, ActionRoute, Bianchi, IdentityReport};
use concirc_core::recurrence::{
    classify, compute_mu, fit_recurrence_form, verify_theorem, Classification, RecurrenceError, Target,
    DEFAULT_TOLERANCE,
};
use concirc_core::tensor::{symmetry_residual, Symmetry, TensorField};

use crate::metric_file::load_metric_spec;
use crate::report::{Check, CurvatureData, Labelled, PointEntry, Report, Summary, EVIDENCE_SCOPE};

#[derive(Debug, Parser)]
#[command(name = "concirc", version, about = "Curvature identities and recurrence checks for metrics in coordinates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Curvature components at sample points or at --point.
    Compute {
        #[command(flatten)]
        common: Common,
        /// Evaluation point, e.g. "x=1.0,y=2.0".
        #[arg(long)]
        point: Option<String>,
    },
    /// Residual of one curvature identity.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        identity: Identity,
    },
    /// Fit a recurrence form to R or C.
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = ["R", "C"])]
        target: String,
    },
    /// Classify the chart.
    Classify {
        #[command(flatten)]
        common: Common,
    },
    /// Check the conclusions of the theorem wherever C is recurrent.
    VerifyTheorem {
        #[command(flatten)]
        common: Common,
    },
    /// List the builtin metrics.
    ListBuiltins {
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Identity {
    Walker,
    Bianchi1,
    Bianchi2,
    Semisym,
}

#[derive(Debug, Args)]
struct Common {
    /// Builtin metric name (see list-builtins).
    #[arg(long, required_unless_present = "metric", conflicts_with = "metric")]
    builtin: Option<String>,
    /// Metric specification file (JSON).
    #[arg(long)]
    metric: Option<PathBuf>,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, env = "CONCIRC_TOL", default_value_t = DEFAULT_TOLERANCE, value_parser = positive)]
    tol: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct Output {
    /// Write the JSON report to PATH instead of stdout.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Human-readable report on stdout.
    #[arg(long, conflicts_with = "json")]
    text: bool,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("expected a positive number, got '{s}'")),
    }
}

/// Runs the command line `args` (program name first) and returns the
/// exit code: 0 when every check passed or was skipped, 1 when a check
/// failed, 2 on input or usage errors.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let (result, output) = match cli.command {
        Command::ListBuiltins { output } => {
            return match emit(&list_builtins(output.text), &output, stdout) {
                Ok(()) => 0,
                Err(msg) => fail(stderr, &msg),
            };
        }
        Command::Compute { common, point } => (Session::open(&common, "compute").and_then(|s| s.compute(point.as_deref())), common.output),
        Command::Check { common, identity } => (Session::open(&common, "check").and_then(|s| s.check(identity)), common.output),
        Command::Fit { common, target } => {
            let target = Target::from_name(&target).expect("clap restricts the target");
            (Session::open(&common, "fit").and_then(|s| s.fit(target)), common.output)
        }
        Command::Classify { common } => (Session::open(&common, "classify").and_then(|s| s.classify()), common.output),
        Command::VerifyTheorem { common } => {
            (Session::open(&common, "verify-theorem").and_then(|s| s.verify()), common.output)
        }
    };
    let report = match result {
        Ok(r) => r,
        Err(msg) => return fail(stderr, &msg),
    };
    let text = if output.text { report.to_text() } else { report.to_json() };
    match emit(&text, &output, stdout) {
        Ok(()) if report.summary.all_pass => 0,
        Ok(()) => 1,
        Err(msg) => fail(stderr, &msg),
    }
}

fn fail(stderr: &mut dyn Write, msg: &str) -> i32 {
    let _ = writeln!(stderr, "error: {msg}");
    2
}

fn emit(text: &str, output: &Output, stdout: &mut dyn Write) -> Result<(), String> {
    match &output.json {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    }
}

fn list_builtins(text: bool) -> String {
    let entries: Vec<_> = BUILTIN_NAMES.iter().map(|n| get_builtin(n).expect("listed names resolve")).collect();
    if text {
        let mut out = String::new();
        for e in &entries {
            out.push_str(&format!("{:<18} dim {}  {:<20} {}\n", e.chart.name(), e.chart.dim(), e.expected.name(), e.note));
        }
        return out;
    }
    let list: Vec<serde_json::Value> = entries
        .iter()
        .map(|e| {
            serde_json::json!({
                "name": e.chart.name(),
                "dim": e.chart.dim(),
                "coordinates": e.chart.coordinates(),
                "expected": e.expected.name(),
                "note": e.note,
            })
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&list).expect("plain values serialize");
    s.push('\n');
    s
}

struct Session {
    bundle: CurvatureBundle,
    points: Vec<Point>,
    seed: u64,
    tol: f64,
    command: &'static str,
}

impl Session {
    fn open(common: &Common, command: &'static str) -> Result<Session, String> {
        let chart: MetricChart = match (&common.builtin, &common.metric) {
            (Some(name), _) => match get_builtin(name) {
                Some(e) => e.chart,
                None => return Err(format!("unknown builtin '{name}'; known: {}", BUILTIN_NAMES.join(", "))),
            },
            (None, Some(path)) => load_metric_spec(path).map_err(|e| e.to_string())?,
            (None, None) => return Err("one of --builtin or --metric is required".into()),
        };
        let mut sampler = Sampler::new(common.seed);
        let points = chart
            .sample_points(common.samples as usize, &mut sampler)
            .map_err(|e| format!("{}: {e}", chart.name()))?;
        let bundle = CurvatureBundle::new(chart).map_err(|e| e.to_string())?;
        Ok(Session {
            bundle,
            points,
            seed: common.seed,
            tol: common.tol,
            command,
        })
    }

    fn chart(&self) -> &MetricChart {
        self.bundle.chart()
    }

    fn report(&self, points: Vec<PointEntry>, classification: &Classification) -> Report {
        Report {
            metric: self.chart().name().to_string(),
            dim: self.chart().dim(),
            seed: self.seed,
            tolerance: self.tol,
            command: self.command.to_string(),
            evidence_scope: EVIDENCE_SCOPE,
            points,
            global_checks: vec![Check {
                name: "no_concircular_without_recurrent".into(),
                residual: if classification.is_violation() { 1.0 } else { 0.0 },
                scale: 0.0,
                pass: !classification.is_violation(),
            }],
            classification: classification.verdict.name().to_string(),
            note: None,
            summary: Summary { all_pass: true, skipped: 0 },
        }
    }

    fn classification(&self, points: &[Point]) -> Result<Classification, String> {
        classify(&self.bundle, points, self.tol).map_err(|e| e.to_string())
    }

    fn scalar_values(&self, points: &[Point]) -> Result<Vec<f64>, String> {
        let scalar = scalar_field(&self.bundle);
        let mut out = Vec::with_capacity(points.len());
        per_point_values(&self.bundle, &[&scalar], points, |_, v| out.push(v[0].data[0])).map_err(|e| e.to_string())?;
        Ok(out)
    }

    fn entry(&self, p: &Point, scalar: f64, checks: Vec<Check>) -> PointEntry {
        PointEntry {
            coords: Labelled(self.chart().labelled(p)),
            scalar_curvature: scalar,
            checks,
            lambda: None,
            mu_norm: None,
            curvature: None,
        }
    }

    fn labelled_form(&self, values: &[f64]) -> Labelled {
        Labelled(self.chart().coordinates().iter().cloned().zip(values.iter().copied()).collect())
    }

    fn compute(self, point: Option<&str>) -> Result<Report, String> {
        let points = match point {
            Some(text) => vec![parse_point(text, self.chart())?],
            None => self.points.clone(),
        };
        let b = &self.bundle;
        let n = b.dim();
        let gamma = TensorField::new(n, 3, b.christoffel_components().to_vec(), Symmetry::None).map_err(|e| e.to_string())?;
        let inverse = TensorField::new(n, 2, b.inverse_metric().to_vec(), Symmetry::Symmetric2).map_err(|e| e.to_string())?;
        let scalar = scalar_field(b);
        let tensors = [&gamma, b.riemann(), b.ricci(), b.concircular(), &scalar, &inverse, b.model()];
        let mut entries = Vec::with_capacity(points.len());
        let factor = 1.0 / (n * (n - 1)) as f64;
        per_point_values(b, &tensors, &points, |p, v| {
            let (riemann, ricci, conc, r, ginv, model) = (&v[1], &v[2], &v[3], v[4].data[0], &v[5], &v[6]);
            let scale = riemann.max_abs();
            let trace: f64 = ricci.data.iter().zip(&ginv.data).map(|(s, g)| s * g).sum();
            let definition = riemann
                .data
                .iter()
                .zip(&model.data)
                .zip(&conc.data)
                .fold(0.0f64, |m, ((rv, gv), cv)| m.max((rv - r * factor * gv - cv).abs()));
            let check = |name: &str, residual: f64, scale: f64, tol: f64| Check {
                name: name.into(),
                residual,
                scale,
                pass: residual <= tol * (1.0 + scale),
            };
            let checks = vec![
                check("riemann_symmetry", symmetry_residual(riemann, Symmetry::RiemannLike), scale, self.tol),
                check("ricci_symmetry", symmetry_residual(ricci, Symmetry::Symmetric2), ricci.max_abs(), self.tol),
                check("scalar_trace", (trace - r).abs(), r.abs(), self.tol),
                check("concircular_definition", definition, scale, self.tol),
            ];
            let mut e = self.entry(p, r, checks);
            e.curvature = Some(CurvatureData {
                christoffel: v[0].data.clone(),
                riemann: riemann.data.clone(),
                ricci: ricci.data.clone(),
                concircular: conc.data.clone(),
            });
            entries.push(e);
        })
        .map_err(|e| e.to_string())?;
        let classification = self.classification(&points)?;
        let mut report = self.report(entries, &classification);
        report.finish(0);
        Ok(report)
    }

    fn check(self, identity: Identity) -> Result<Report, String> {
        let b = &self.bundle;
        let result: IdentityReport = match identity {
            Identity::Walker => check_walker(b, &self.points, self.tol, ActionRoute::SecondDerivative),
            Identity::Bianchi1 => check_bianchi(b, Bianchi::First, &self.points, self.tol),
            Identity::Bianchi2 => check_bianchi(b, Bianchi::Second, &self.points, self.tol),
            Identity::Semisym => check_semisymmetry(b, &self.points, self.tol, ActionRoute::Derivation),
        }
        .map_err(|e| e.to_string())?;
        let scalars = self.scalar_values(&self.points)?;
        let entries = result
            .points
            .iter()
            .zip(scalars)
            .map(|(r, s)| {
                self.entry(
                    &r.point,
                    s,
                    vec![Check {
                        name: result.identity.clone(),
                        residual: r.residual,
                        scale: r.scale,
                        pass: r.pass,
                    }],
                )
            })
            .collect();
        let classification = self.classification(&self.points)?;
        let mut report = self.report(entries, &classification);
        report.finish(0);
        Ok(report)
    }

    fn fit(self, target: Target) -> Result<Report, String> {
        let b = &self.bundle;
        let scalars = self.scalar_values(&self.points)?;
        let classification = self.classification(&self.points)?;
        let fit = match fit_recurrence_form(b, target, &self.points) {
            Ok(fit) => fit,
            Err(e @ RecurrenceError::HypothesisFailure { .. }) => {
                let entries = self.points.iter().zip(&scalars).map(|(p, s)| self.entry(p, *s, vec![])).collect();
                let mut report = self.report(entries, &classification);
                report.note = Some(e.to_string());
                report.finish(self.points.len());
                return Ok(report);
            }
            Err(e) => return Err(e.to_string()),
        };
        let mu_values = match target {
            Target::Concircular => {
                let mu = compute_mu(b, &fit.lambda).map_err(|e| e.to_string())?.mu;
                let admitted: Vec<Point> = fit.points.iter().map(|p| p.point.clone()).collect();
                let mut values = Vec::new();
                per_point_values(b, &[&mu], &admitted, |_, v| values.push(v[0].max_abs())).map_err(|e| e.to_string())?;
                Some(values)
            }
            Target::Riemann => None,
        };
        let name = format!("fit_{}", target.name());
        let mut fitted = fit.points.iter().enumerate();
        let mut entries = Vec::with_capacity(self.points.len());
        let mut next = fitted.next();
        for (p, s) in self.points.iter().zip(&scalars) {
            match next {
                Some((k, f)) if f.point == *p => {
                    let check = Check {
                        name: name.clone(),
                        residual: f.raw_residual,
                        scale: f.magnitude,
                        pass: f.residual() <= self.tol,
                    };
                    let mut e = self.entry(p, *s, vec![check]);
                    e.lambda = Some(self.labelled_form(&f.lambda));
                    e.mu_norm = mu_values.as_ref().map(|m| m[k]);
                    entries.push(e);
                    next = fitted.next();
                }
                _ => entries.push(self.entry(p, *s, vec![])),
            }
        }
        let mut report = self.report(entries, &classification);
        report.finish(fit.excluded.len());
        Ok(report)
    }

    fn classify(self) -> Result<Report, String> {
        let scalars = self.scalar_values(&self.points)?;
        let classification = self.classification(&self.points)?;
        let entries = self.points.iter().zip(&scalars).map(|(p, s)| self.entry(p, *s, vec![])).collect();
        let mut report = self.report(entries, &classification);
        let evidence: Vec<String> = classification.evidence.iter().map(|(k, v)| format!("{k}={v:.6e}")).collect();
        report.note = Some(format!("evidence: {}", evidence.join(", ")));
        report.finish(0);
        Ok(report)
    }

    fn verify(self) -> Result<Report, String> {
        let scalars = self.scalar_values(&self.points)?;
        let classification = self.classification(&self.points)?;
        let theorem = verify_theorem(&self.bundle, &self.points, self.tol).map_err(|e| e.to_string())?;
        let tol = self.tol;
        let mut entries = Vec::with_capacity(self.points.len());
        for (p, s) in self.points.iter().zip(&scalars) {
            match theorem.points.iter().find(|t| t.point == *p) {
                Some(t) => {
                    let check = |name: &str, residual: f64| Check {
                        name: name.into(),
                        residual,
                        scale: 0.0,
                        pass: residual <= tol,
                    };
                    let checks = vec![
                        check("mu_vanishes", t.mu_norm),
                        check("recurrence_same_form", t.recurrence),
                        check("lambda_closed", t.closure),
                        check("semisymmetry", t.semisymmetry),
                    ];
                    let mut e = self.entry(p, *s, checks);
                    e.lambda = Some(self.labelled_form(&t.lambda));
                    e.mu_norm = Some(t.mu_norm);
                    entries.push(e);
                }
                None => entries.push(self.entry(p, *s, vec![])),
            }
        }
        let mut report = self.report(entries, &classification);
        if theorem.points.is_empty() {
            report.note = Some("hypothesis not met at any sample point (C vanishes or is not recurrent); all points skipped".into());
        }
        report.finish(theorem.skipped.len());
        Ok(report)
    }
}

fn scalar_field(b: &CurvatureBundle) -> TensorField {
    TensorField::new(b.dim(), 0, vec![b.scalar_curvature().clone()], Symmetry::None).expect("a scalar has one component")
}

fn parse_point(text: &str, chart: &MetricChart) -> Result<Point, String> {
    let mut values: Vec<Option<f64>> = vec![None; chart.dim()];
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| format!("--point: expected name=value, got '{part}'"))?;
        let k = chart
            .coordinates()
            .iter()
            .position(|c| c == name.trim())
            .ok_or_else(|| format!("--point: '{}' is not a coordinate of {}", name.trim(), chart.name()))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| format!("--point: '{}' is not a number", value.trim()))?;
        if values[k].replace(v).is_some() {
            return Err(format!("--point: '{}' is given twice", name.trim()));
        }
    }
    let missing: Vec<&str> = chart
        .coordinates()
        .iter()
        .zip(&values)
        .filter(|(_, v)| v.is_none())
        .map(|(c, _)| c.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(format!("--point: missing {}", missing.join(", ")));
    }
    Ok(Point(values.into_iter().map(|v| v.expect("checked above")).collect()))
}
