use super::*;
use crate::catalog::get_builtin;
use crate::chart::Sampler;

fn bundle(name: &str) -> (CurvatureBundle, Vec<Point>) {
    let chart = get_builtin(name).unwrap().chart;
    let points = chart.sample_points(5, &mut Sampler::new(42)).unwrap();
    (CurvatureBundle::new(chart).unwrap(), points)
}

#[test]
fn walker_identity_holds_on_both_routes() {
    for (name, tol) in [("flat_euclidean_3", 0.0), ("sphere_3", 1e-9), ("ppwave_recurrent", 1e-8), ("surface_power", 1e-8)] {
        let (b, pts) = bundle(name);
        for route in [ActionRoute::Derivation, ActionRoute::SecondDerivative] {
            let r = check_walker(&b, &pts, 1e-8, route).unwrap();
            assert!(r.passed(), "{name} {route:?}");
            assert!(r.max_residual() <= tol * (1.0 + r.max_scale()), "{name}: {}", r.max_residual());
            assert_eq!(r.points.len(), 5);
        }
    }
}

#[test]
fn bianchi_identities() {
    let (flat, pts) = bundle("flat_euclidean_3");
    for kind in [Bianchi::First, Bianchi::Second] {
        assert_eq!(check_bianchi(&flat, kind, &pts, 1e-8).unwrap().max_residual(), 0.0);
    }
    let (s2, pts) = bundle("sphere_2");
    assert!(check_bianchi(&s2, Bianchi::First, &pts, 1e-10).unwrap().passed());
    let (surface, pts) = bundle("surface_power");
    assert!(check_bianchi(&surface, Bianchi::Second, &pts, 1e-8).unwrap().passed());
    let (pert, pts) = bundle("perturbed_flat");
    assert!(check_bianchi(&pert, Bianchi::Second, &pts, 1e-8).unwrap().passed());
}

#[test]
fn semisymmetry_is_a_verdict() {
    for name in ["flat_euclidean_3", "sphere_3", "ppwave_recurrent"] {
        let (b, pts) = bundle(name);
        assert!(check_semisymmetry(&b, &pts, 1e-8, ActionRoute::Derivation).unwrap().passed(), "{name}");
    }
    let (b, pts) = bundle("perturbed_flat");
    assert!(!check_semisymmetry(&b, &pts, 1e-8, ActionRoute::Derivation).unwrap().passed());
}

#[test]
fn semisymmetry_routes_agree_on_sphere() {
    let (b, pts) = bundle("sphere_3");
    let a = check_semisymmetry(&b, &pts, 1e-9, ActionRoute::Derivation).unwrap();
    let c = check_semisymmetry(&b, &pts, 1e-9, ActionRoute::SecondDerivative).unwrap();
    for (x, y) in a.points.iter().zip(&c.points) {
        assert!((x.residual - y.residual).abs() <= 1e-9);
    }
    assert!(check_action_routes(&b, b.riemann(), &pts, 1e-8).unwrap().passed());
}

#[test]
fn report_pass_rule() {
    let mut r = IdentityReport::new("x", "c", 1e-8);
    let p = Point(vec![0.0]);
    r.record(&p, 1.5e-8, 1.0);
    r.record(&p, 2.5e-8, 1.0);
    assert_eq!(r.points.iter().map(|q| q.pass).collect::<Vec<_>>(), vec![true, false]);
    assert!(!r.passed());
    assert_eq!(r.max_residual(), 2.5e-8);
}

#[test]
fn walker_lemma_on_geometric_tensors() {
    let (flat, pts) = bundle("flat_euclidean_3");
    let g = flat.model().evaluate(flat.chart().coordinates(), pts[0].as_slice()).unwrap();
    assert_eq!(walker_lemma_kernel(&g).unwrap().dimension, 0);
    let (s3, pts) = bundle("sphere_3");
    let r = s3.riemann().evaluate(s3.chart().coordinates(), pts[0].as_slice()).unwrap();
    let k = walker_lemma_kernel(&r).unwrap();
    assert_eq!(k.dimension, 0);
    assert_eq!(k.singular_values.len(), 3);
    let zero = NumTensor::zeros(3, 4);
    assert!(matches!(walker_lemma_kernel(&zero), Err(LemmaError::ZeroTensor { .. })));
}

#[test]
fn walker_lemma_rejects_unpaired_tensors() {
    let mut t = NumTensor::zeros(3, 4);
    t.data[flat_index(3, &[0, 1, 0, 1])] = 1.0;
    assert!(matches!(walker_lemma_kernel(&t), Err(LemmaError::NotPaired { .. })));
    assert_eq!(walker_lemma_kernel(&NumTensor::zeros(3, 2)), Err(LemmaError::Shape));
}

#[test]
fn random_algebraic_curvature_tensors() {
    let mut s = Sampler::new(9);
    for n in [3, 4, 5] {
        for _ in 0..5 {
            let b = random_riemann_like(n, &mut s);
            assert!(is_riemann_like(&b));
            assert_eq!(walker_lemma_kernel(&b).unwrap().dimension, 0);
        }
    }
}

#[test]
fn singular_values_match_reference_svd() {
    let mut s = Sampler::new(1);
    let b = random_riemann_like(4, &mut s);
    let k = walker_lemma_kernel(&b).unwrap();
    // rebuild the map densely and hand it to nalgebra
    let n = 4;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |c| (a, c))).collect();
    let mut m = nalgebra::DMatrix::<f64>::zeros(n.pow(6), pairs.len());
    for (col, &(a, c)) in pairs.iter().enumerate() {
        let d = |u: usize, v: usize| {
            if (u, v) == (a, c) {
                1.0
            } else if (u, v) == (c, a) {
                -1.0
            } else {
                0.0
            }
        };
        for_each_index(n, 6, |i| {
            let (u, v, w, x, y, z) = (i[0], i[1], i[2], i[3], i[4], i[5]);
            m[(flat_index(n, i), col)] =
                d(u, v) * b.get(&[w, x, y, z]) + d(w, x) * b.get(&[y, z, u, v]) + d(y, z) * b.get(&[u, v, w, x]);
        });
    }
    let mut reference: Vec<f64> = m.singular_values().iter().copied().collect();
    reference.sort_by(|a, b| b.total_cmp(a));
    for (a, e) in k.singular_values.iter().zip(&reference) {
        assert!((a - e).abs() <= 1e-12 * reference[0]);
    }
}
