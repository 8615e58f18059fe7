//! Builtin metric charts with their expected classification.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::chart::{MetricChart, Sampler};
use crate::recurrence::Verdict;

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub chart: MetricChart,
    pub expected: Verdict,
    /// Constant scalar curvature, when there is one.
    pub scalar_curvature: Option<f64>,
    /// Expected recurrence form, one expression per coordinate.
    pub recurrence_form: Option<Vec<&'static str>>,
    pub note: &'static str,
}

pub const BUILTIN_NAMES: [&str; 8] = [
    "flat_euclidean_3",
    "minkowski_4",
    "sphere_2",
    "sphere_3",
    "hyperbolic_2",
    "surface_power",
    "ppwave_recurrent",
    "perturbed_flat",
];


pub fn get_builtin(name: &str) -> Option<CatalogEntry> {
    let entry = |chart, expected, scalar_curvature, recurrence_form, note| CatalogEntry {
        chart,
        expected,
        scalar_curvature,
        recurrence_form,
        note,
    };
    let chart = |coords: &[&str], metric: &[&[&str]], domain: &[(f64, f64)], excl: &[&str]| {
        MetricChart::from_strings(name, coords, metric, domain, excl).expect("builtin charts are well formed")
    };
    Some(match name {
        "flat_euclidean_3" => entry(
            chart(
                &["x", "y", "z"],
                &[&["1", "0", "0"], &["0", "1", "0"], &["0", "0", "1"]],
                &[(-1.0, 1.0); 3],
                &[],
            ),
            Verdict::Flat,
            Some(0.0),
            Some(alloc::vec!["0", "0", "0"]),
            "constant metric; every curvature object vanishes",
        ),
        "minkowski_4" => entry(
            chart(
                &["t", "x", "y", "z"],
                &[&["-1", "0", "0", "0"], &["0", "1", "0", "0"], &["0", "0", "1", "0"], &["0", "0", "0", "1"]],
                &[(-1.0, 1.0); 4],
                &[],
            ),
            Verdict::Flat,
            Some(0.0),
            None,
            "constant Lorentzian metric",
        ),
        "sphere_2" => entry(
            chart(
                &["theta", "phi"],
                &[&["1", "0"], &["0", "sin(theta)^2"]],
                &[(0.2, 2.9), (0.0, core::f64::consts::TAU)],
                &["sin(theta)"],
            ),
            Verdict::ConstantCurvature,
            Some(2.0),
            None,
            "unit round sphere, K = 1, r = n(n-1)K",
        ),
        "sphere_3" => entry(
            chart(
                &["chi", "theta", "phi"],
                &[
                    &["1", "0", "0"],
                    &["0", "sin(chi)^2", "0"],
                    &["0", "0", "sin(chi)^2*sin(theta)^2"],
                ],
                &[(0.2, 2.9), (0.2, 2.9), (0.0, core::f64::consts::TAU)],
                &["sin(chi)", "sin(theta)"],
            ),
            Verdict::ConstantCurvature,
            Some(6.0),
            Some(alloc::vec!["0", "0", "0"]),
            "unit round 3-sphere, K = 1, r = n(n-1)K",
        ),
        "hyperbolic_2" => entry(
            chart(
                &["x", "y"],
                &[&["1/y^2", "0"], &["0", "1/y^2"]],
                &[(-1.0, 1.0), (0.5, 2.0)],
                &[],
            ),
            Verdict::ConstantCurvature,
            Some(-2.0),
            None,
            "upper half-plane, K = -1",
        ),
        "surface_power" => entry(
            chart(&["x", "y"], &[&["1", "0"], &["0", "x^4"]], &[(0.5, 3.0), (-1.0, 1.0)], &[]),
            Verdict::Recurrent,
            None,
            Some(alloc::vec!["-2/x", "0"]),
            "warped surface dx^2 + f^2 dy^2 with f = x^2: K = -f''/f = -2/x^2, r = -4/x^2, recurrence form d ln|r|",
        ),
        "ppwave_recurrent" => entry(
            chart(
                &["u", "v", "x", "y"],
                &[
                    &["exp(u)*(x^2 - y^2)", "1", "0", "0"],
                    &["1", "0", "0", "0"],
                    &["0", "0", "1", "0"],
                    &["0", "0", "0", "1"],
                ],
                &[(-1.0, 1.0); 4],
                &[],
            ),
            Verdict::Recurrent,
            Some(0.0),
            Some(alloc::vec!["1", "0", "0", "0"]),
            "plane-fronted wave with H = a(u)(x^2 - y^2), a = e^u: Ricci-flat, recurrence form (a'/a) du",
        ),
        "perturbed_flat" => entry(
            chart(
                &["x", "y", "z"],
                &[
                    &["1 + 0.01*exp(-(x^2 + y^2 + z^2))", "0.01*exp(-((x - 0.3)^2 + y^2))", "0"],
                    &["0.01*exp(-((x - 0.3)^2 + y^2))", "1 + 0.01*exp(-(y^2 + (z + 0.2)^2))", "0.01*exp(-(x^2 + (y - 0.4)^2))"],
                    &["0", "0.01*exp(-(x^2 + (y - 0.4)^2))", "1 + 0.01*exp(-((x + 0.1)^2 + z^2))"],
                ],
                &[(-1.0, 1.0); 3],
                &[],
            ),
            Verdict::Generic,
            None,
            None,
            "flat metric plus Gaussian bumps of amplitude 0.01; negative control",
        ),
        _ => return None,
    })
}

/// A 3-dimensional flat metric plus a Gaussian bump of amplitude at most
/// 0.01 in each independent component, with centres and widths drawn from
/// `sampler`. Coefficients are rounded to three decimals so the chart is
/// exactly representable.
pub fn random_perturbed_flat(sampler: &mut Sampler, label: &str) -> MetricChart {
    let coords = ["x", "y", "z"];
    let mut milli = |lo: f64, hi: f64| libm::round(sampler.uniform(lo, hi) * 1000.0) as i64;
    let mut bump = |diagonal: bool| {
        let amp = milli(-10.0e-3, 10.0e-3);
        let width = milli(0.5, 2.0);
        let terms: Vec<String> = coords
            .iter()
            .map(|c| format!("({c} - {})^2", signed_milli(milli(-0.5, 0.5))))
            .collect();
        let bump = format!("{}*exp(-{}*({}))", signed_milli(amp), signed_milli(width), terms.join(" + "));
        if diagonal {
            format!("1 + {bump}")
        } else {
            bump
        }
    };
    let mut entries = [[String::new(), String::new(), String::new()], [String::new(), String::new(), String::new()], [String::new(), String::new(), String::new()]];
    for i in 0..3 {
        for j in i..3 {
            let e = bump(i == j);
            entries[j][i] = e.clone();
            entries[i][j] = e;
        }
    }
    let rows: Vec<Vec<&str>> = entries.iter().map(|r| r.iter().map(String::as_str).collect()).collect();
    let rows: Vec<&[&str]> = rows.iter().map(Vec::as_slice).collect();
    MetricChart::from_strings(label, &coords, &rows, &[(-1.0, 1.0); 3], &[]).expect("generated charts are well formed")
}

fn signed_milli(v: i64) -> String {
    // parenthesised so that a negative value binds as one factor
    let text = format!("{}.{:03}", v.unsigned_abs() / 1000, v.unsigned_abs() % 1000);
    if v < 0 {
        format!("(-{text})")
    } else {
        text
    }
}
