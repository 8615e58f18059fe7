use concirc_core::catalog::{get_builtin, random_perturbed_flat, BUILTIN_NAMES};
use concirc_core::chart::{MetricChart, Point, Sampler};
use concirc_core::geometry::CurvatureBundle;
use concirc_core::identities::{check_action_routes, check_bianchi, check_walker, ActionRoute, Bianchi};
use concirc_core::recurrence::classify;
use concirc_core::tensor::{symmetry_residual, Symmetry, TensorField, TensorTape};

fn setup(chart: MetricChart, count: usize) -> (CurvatureBundle, Vec<Point>) {
    let points = chart.sample_points(count, &mut Sampler::new(42)).unwrap();
    (CurvatureBundle::new(chart).unwrap(), points)
}

fn max_over(b: &CurvatureBundle, t: &TensorField, points: &[Point]) -> f64 {
    let tape = TensorTape::compile(b.chart().coordinates(), &[t]).unwrap();
    points
        .iter()
        .map(|p| tape.eval(p.as_slice()).unwrap()[0].max_abs())
        .fold(0.0, f64::max)
}

#[test]
fn connection_is_metric_and_curvature_is_algebraic() {
    for name in BUILTIN_NAMES {
        let (b, pts) = setup(get_builtin(name).unwrap().chart, 8);
        assert!(max_over(&b, &b.covariant_derivative(b.metric(), 1).unwrap(), &pts) <= 1e-10, "{name}");
        assert!(max_over(&b, &b.covariant_derivative(b.model(), 1).unwrap(), &pts) <= 1e-10, "{name}");
        assert!(max_over(&b, &b.curvature_action(b.model()).unwrap(), &pts) <= 1e-10, "{name}");
        let tape = TensorTape::compile(b.chart().coordinates(), &[b.riemann(), b.ricci()]).unwrap();
        for p in &pts {
            let v = tape.eval(p.as_slice()).unwrap();
            assert!(symmetry_residual(&v[0], Symmetry::RiemannLike) <= 1e-9 * (1.0 + v[0].max_abs()), "{name}");
            assert!(symmetry_residual(&v[1], Symmetry::Symmetric2) <= 1e-10 * (1.0 + v[1].max_abs()), "{name}");
        }
        assert!(check_bianchi(&b, Bianchi::First, &pts, 1e-9).unwrap().passed(), "{name}");
        assert!(check_bianchi(&b, Bianchi::Second, &pts, 1e-8).unwrap().passed(), "{name}");
        assert!(check_action_routes(&b, b.riemann(), &pts, 1e-8).unwrap().passed(), "{name}");
    }
}

#[test]
fn catalog_verdicts_are_reproduced() {
    for name in BUILTIN_NAMES {
        let entry = get_builtin(name).unwrap();
        let (b, pts) = setup(entry.chart, 20);
        let c = classify(&b, &pts, 1e-8).unwrap();
        assert_eq!(c.verdict, entry.expected, "{name}: {:?}", c.evidence);
    }
}

#[test]
fn walker_identity_on_random_metrics() {
    let mut s = Sampler::new(2024);
    for k in 0..5 {
        let chart = random_perturbed_flat(&mut s, &format!("random_{k}"));
        let (b, pts) = setup(chart, 5);
        let r = check_walker(&b, &pts, 1e-8, ActionRoute::SecondDerivative).unwrap();
        assert!(r.passed(), "random_{k}: {}", r.max_residual());
    }
}
