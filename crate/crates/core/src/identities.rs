//! Residual checks for curvature identities, and the Walker lemma as a
//! kernel computation.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::chart::{Point, Sampler};
use crate::expr::EvalError;
use crate::geometry::{CurvatureBundle, GeometryError};
use crate::linalg::svd_columns;
use crate::tensor::{flat_index, for_each_index, NumTensor, Symmetry, TensorField, TensorTape};

/// Relative singular-value threshold below which a direction counts as
/// part of the kernel.
pub const KERNEL_THRESHOLD: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum IdentityError {
    Geometry(GeometryError),
    Evaluation { point: Vec<(String, f64)>, error: EvalError },
}

impl From<GeometryError> for IdentityError {
    fn from(e: GeometryError) -> Self {
        IdentityError::Geometry(e)
    }
}

impl fmt::Display for IdentityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdentityError::Geometry(e) => write!(f, "{e}"),
            IdentityError::Evaluation { point, error } => {
                let at: Vec<String> = point.iter().map(|(n, v)| alloc::format!("{n}={v}")).collect();
                write!(f, "at {}: {error}", at.join(","))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointResidual {
    pub point: Point,
    pub residual: f64,
    pub scale: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    pub identity: String,
    pub chart: String,
    pub tolerance: f64,
    pub points: Vec<PointResidual>,
}

impl IdentityReport {
    pub fn new(identity: &str, chart: &str, tolerance: f64) -> Self {
        IdentityReport {
            identity: identity.to_string(),
            chart: chart.to_string(),
            tolerance,
            points: Vec::new(),
        }
    }

    /// Records one point; passes iff `residual ≤ tol·(1 + scale)`.
    pub fn record(&mut self, point: &Point, residual: f64, scale: f64) {
        let pass = residual <= self.tolerance * (1.0 + scale);
        self.points.push(PointResidual {
            point: point.clone(),
            residual,
            scale,
            pass,
        });
    }

    pub fn passed(&self) -> bool {
        self.points.iter().all(|p| p.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.points.iter().fold(0.0, |m, p| m.max(p.residual))
    }

    pub fn max_scale(&self) -> f64 {
        self.points.iter().fold(0.0, |m, p| m.max(p.scale))
    }
}

/// Which construction of `ℛ(U,V)·T` a check uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionRoute {
    /// The derivation rule on the curvature operator.
    Derivation,
    /// Antisymmetrized second covariant derivatives.
    SecondDerivative,
}

pub(crate) fn action(bundle: &CurvatureBundle, t: &TensorField, route: ActionRoute) -> Result<TensorField, GeometryError> {
    match route {
        ActionRoute::Derivation => bundle.curvature_action(t),
        ActionRoute::SecondDerivative => bundle.curvature_action_via_second_derivative(t),
    }
}

/// Compiles `tensors` once and calls `f` with their values at each point.
pub fn per_point_values(
    bundle: &CurvatureBundle,
    tensors: &[&TensorField],
    points: &[Point],
    mut f: impl FnMut(&Point, &[NumTensor]),
) -> Result<(), IdentityError> {
    let chart = bundle.chart();
    let tape = TensorTape::compile(chart.coordinates(), tensors).map_err(|error| IdentityError::Evaluation {
        point: Vec::new(),
        error,
    })?;
    for p in points {
        let values = tape.eval(p.as_slice()).map_err(|error| IdentityError::Evaluation {
            point: chart.labelled(p),
            error,
        })?;
        f(p, &values);
    }
    Ok(())
}

/// `(ℛ(U,V)R)(W,X,Y,Z) + (ℛ(W,X)R)(Y,Z,U,V) + (ℛ(Y,Z)R)(U,V,W,X)` over all
/// coordinate index tuples; scale is the largest action component.
pub fn check_walker(
    bundle: &CurvatureBundle,
    points: &[Point],
    tolerance: f64,
    route: ActionRoute,
) -> Result<IdentityReport, IdentityError> {
    let acted = action(bundle, bundle.riemann(), route)?;
    let mut report = IdentityReport::new("walker", bundle.chart().name(), tolerance);
    let n = bundle.dim();
    per_point_values(bundle, &[&acted], points, |p, v| {
        let a = &v[0];
        let mut worst: f64 = 0.0;
        for_each_index(n, 6, |i| {
            let (u, vv, w, x, y, z) = (i[0], i[1], i[2], i[3], i[4], i[5]);
            let s = a.get(i) + a.get(&[w, x, y, z, u, vv]) + a.get(&[y, z, u, vv, w, x]);
            worst = worst.max(libm::fabs(s));
        });
        report.record(p, worst, a.max_abs());
    })?;
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bianchi {
    /// Cyclic sum of `R` over its first three slots.
    First,
    /// Cyclic sum of `∇R` over the derivative slot and the first pair.
    Second,
}

pub fn check_bianchi(
    bundle: &CurvatureBundle,
    kind: Bianchi,
    points: &[Point],
    tolerance: f64,
) -> Result<IdentityReport, IdentityError> {
    let n = bundle.dim();
    match kind {
        Bianchi::First => {
            let mut report = IdentityReport::new("bianchi1", bundle.chart().name(), tolerance);
            per_point_values(bundle, &[bundle.riemann()], points, |p, v| {
                let r = &v[0];
                let mut worst: f64 = 0.0;
                for_each_index(n, 4, |i| {
                    let (w, x, y, z) = (i[0], i[1], i[2], i[3]);
                    let s = r.get(i) + r.get(&[x, y, w, z]) + r.get(&[y, w, x, z]);
                    worst = worst.max(libm::fabs(s));
                });
                report.record(p, worst, r.max_abs());
            })?;
            Ok(report)
        }
        Bianchi::Second => {
            let dr = bundle.covariant_derivative(bundle.riemann(), 1)?;
            let mut report = IdentityReport::new("bianchi2", bundle.chart().name(), tolerance);
            per_point_values(bundle, &[&dr], points, |p, v| {
                let d = &v[0];
                let mut worst: f64 = 0.0;
                for_each_index(n, 5, |i| {
                    let (a, w, x, y, z) = (i[0], i[1], i[2], i[3], i[4]);
                    let s = d.get(i) + d.get(&[w, x, a, y, z]) + d.get(&[x, a, w, y, z]);
                    worst = worst.max(libm::fabs(s));
                });
                report.record(p, worst, d.max_abs());
            })?;
            Ok(report)
        }
    }
}

/// Largest `|(ℛ(U,V)R)(W,X,Y,Z)|`, scaled by the largest `|R|`. Not an
/// identity: it passes only on semisymmetric charts.
pub fn check_semisymmetry(
    bundle: &CurvatureBundle,
    points: &[Point],
    tolerance: f64,
    route: ActionRoute,
) -> Result<IdentityReport, IdentityError> {
    let acted = action(bundle, bundle.riemann(), route)?;
    let mut report = IdentityReport::new("semisymmetry", bundle.chart().name(), tolerance);
    per_point_values(bundle, &[&acted, bundle.riemann()], points, |p, v| {
        report.record(p, v[0].max_abs(), v[1].max_abs());
    })?;
    Ok(report)
}

/// Difference between the two constructions of `ℛ(U,V)·T`.
pub fn check_action_routes(
    bundle: &CurvatureBundle,
    t: &TensorField,
    points: &[Point],
    tolerance: f64,
) -> Result<IdentityReport, IdentityError> {
    let direct = bundle.curvature_action(t)?;
    let second = bundle.curvature_action_via_second_derivative(t)?;
    let mut report = IdentityReport::new("ricci_identity", bundle.chart().name(), tolerance);
    per_point_values(bundle, &[&direct, &second], points, |p, v| {
        report.record(p, v[0].max_abs_diff(&v[1]), v[0].max_abs().max(v[1].max_abs()));
    })?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub enum LemmaError {
    /// The tensor vanishes, so the lemma's hypothesis fails.
    ZeroTensor { max_abs: f64 },
    /// Not antisymmetric within its two index pairs.
    NotPaired { residual: f64 },
    Shape,
}

impl fmt::Display for LemmaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LemmaError::ZeroTensor { max_abs } => {
                write!(f, "tensor vanishes (max |component| = {max_abs:e}); the lemma needs a nonzero tensor")
            }
            LemmaError::NotPaired { residual } => {
                write!(f, "tensor is not antisymmetric in its index pairs (residual {residual:e})")
            }
            LemmaError::Shape => write!(f, "expected a rank-4 tensor"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    pub dimension: usize,
    /// Kernel basis as antisymmetric `n×n` arrays, row-major.
    pub basis: Vec<Vec<f64>>,
    /// Singular values of the map, descending.
    pub singular_values: Vec<f64>,
}

/// Kernel of `d ↦ d(U,V)B(W,X,Y,Z) + d(W,X)B(Y,Z,U,V) + d(Y,Z)B(U,V,W,X)`
/// on antisymmetric 2-index arrays `d`.
pub fn walker_lemma_kernel(b: &NumTensor) -> Result<Kernel, LemmaError> {
    if b.rank != 4 {
        return Err(LemmaError::Shape);
    }
    let n = b.dim;
    let max_abs = b.max_abs();
    if max_abs <= 1e-10 {
        return Err(LemmaError::ZeroTensor { max_abs });
    }
    let mut paired: f64 = 0.0;
    for_each_index(n, 4, |i| {
        let (w, x, y, z) = (i[0], i[1], i[2], i[3]);
        paired = paired.max(libm::fabs(b.get(i) + b.get(&[x, w, y, z])));
        paired = paired.max(libm::fabs(b.get(i) + b.get(&[w, x, z, y])));
    });
    if paired > 1e-10 * (1.0 + max_abs) {
        return Err(LemmaError::NotPaired { residual: paired });
    }

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |c| (a, c))).collect();
    let columns: Vec<Vec<f64>> = pairs
        .iter()
        .map(|&(a, c)| {
            let d = |u: usize, v: usize| {
                if (u, v) == (a, c) {
                    1.0
                } else if (u, v) == (c, a) {
                    -1.0
                } else {
                    0.0
                }
            };
            let mut col = vec![0.0; n.pow(6)];
            for_each_index(n, 6, |i| {
                let (u, v, w, x, y, z) = (i[0], i[1], i[2], i[3], i[4], i[5]);
                col[flat_index(n, i)] =
                    d(u, v) * b.get(&[w, x, y, z]) + d(w, x) * b.get(&[y, z, u, v]) + d(y, z) * b.get(&[u, v, w, x]);
            });
            col
        })
        .collect();
    let svd = svd_columns(columns);
    let top = svd.singular_values.first().copied().unwrap_or(0.0);
    let mut basis = Vec::new();
    for (s, v) in svd.singular_values.iter().zip(&svd.right_vectors) {
        if *s <= KERNEL_THRESHOLD * top {
            let mut d = vec![0.0; n * n];
            for (&(a, c), coef) in pairs.iter().zip(v) {
                d[a * n + c] = *coef;
                d[c * n + a] = -*coef;
            }
            basis.push(d);
        }
    }
    Ok(Kernel {
        dimension: basis.len(),
        basis,
        singular_values: svd.singular_values,
    })
}

/// A random algebraic curvature tensor: a symmetric form on 2-vectors with
/// entries uniform in `[-1, 1]`, minus its totally antisymmetric part so that
/// the first Bianchi identity holds.
pub fn random_riemann_like(n: usize, sampler: &mut Sampler) -> NumTensor {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |c| (a, c))).collect();
    let m = pairs.len();
    let mut form = vec![0.0; m * m];
    for p in 0..m {
        for q in p..m {
            let v = sampler.uniform(-1.0, 1.0);
            form[p * m + q] = v;
            form[q * m + p] = v;
        }
    }
    let pair_index = |a: usize, c: usize| -> Option<(usize, f64)> {
        if a == c {
            return None;
        }
        let (lo, hi, sign) = if a < c { (a, c, 1.0) } else { (c, a, -1.0) };
        pairs.iter().position(|&p| p == (lo, hi)).map(|k| (k, sign))
    };
    let mut raw = NumTensor::zeros(n, 4);
    for_each_index(n, 4, |i| {
        if let (Some((p, s1)), Some((q, s2))) = (pair_index(i[0], i[1]), pair_index(i[2], i[3])) {
            raw.data[flat_index(n, i)] = s1 * s2 * form[p * m + q];
        }
    });
    let mut out = NumTensor::zeros(n, 4);
    for_each_index(n, 4, |i| {
        let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
        let alt = (raw.get(i) + raw.get(&[a, c, d, b]) + raw.get(&[a, d, b, c])) / 3.0;
        out.data[flat_index(n, i)] = raw.get(i) - alt;
    });
    out
}

/// Whether a numeric tensor satisfies the riemann-like symmetries to
/// `1e-10` relative.
pub fn is_riemann_like(t: &NumTensor) -> bool {
    crate::tensor::symmetry_residual(t, Symmetry::RiemannLike) <= 1e-10 * (1.0 + t.max_abs())
}

#[cfg(test)]
mod tests;
