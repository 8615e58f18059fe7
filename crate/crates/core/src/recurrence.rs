//! Recurrence forms, their fits and the classification of charts.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::chart::Point;
use crate::expr::Expr;
use crate::geometry::{wedge, CurvatureBundle, GeometryError};
use crate::identities::{per_point_values, IdentityError, IdentityReport};
use crate::tensor::{flat_index, for_each_index, NumTensor, Symmetry, TensorField};

/// A target counts as nonzero at a point when its largest component
/// exceeds this fraction of `max(largest over the chart, 1)`.
pub const ZERO_THRESHOLD: f64 = 1e-8;

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Riemann,
    Concircular,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Riemann => "R",
            Target::Concircular => "C",
        }
    }

    pub fn from_name(s: &str) -> Option<Target> {
        match s {
            "R" => Some(Target::Riemann),
            "C" => Some(Target::Concircular),
            _ => None,
        }
    }

    fn tensor(self, bundle: &CurvatureBundle) -> &TensorField {
        match self {
            Target::Riemann => bundle.riemann(),
            Target::Concircular => bundle.concircular(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    Flat,
    ConstantCurvature,
    LocallySymmetric,
    Recurrent,
    ConcircularlyRecurrent,
    Generic,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Flat => "flat",
            Verdict::ConstantCurvature => "constant-curvature",
            Verdict::LocallySymmetric => "locally-symmetric",
            Verdict::Recurrent => "recurrent",
            Verdict::ConcircularlyRecurrent => "concircularly-recurrent",
            Verdict::Generic => "generic",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RecurrenceError {
    /// Every sample point had a vanishing target.
    HypothesisFailure { target: &'static str, points: usize },
    /// The step needs `n ≥ 3`.
    DimensionTwo,
    Identity(IdentityError),
}

impl From<IdentityError> for RecurrenceError {
    fn from(e: IdentityError) -> Self {
        RecurrenceError::Identity(e)
    }
}

impl From<GeometryError> for RecurrenceError {
    fn from(e: GeometryError) -> Self {
        RecurrenceError::Identity(IdentityError::Geometry(e))
    }
}

impl fmt::Display for RecurrenceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecurrenceError::HypothesisFailure { target, points } => {
                write!(f, "{target} vanishes at all {points} sample points; no recurrence form can be fitted")
            }
            RecurrenceError::DimensionTwo => write!(f, "the projective/Einstein chain needs dimension at least 3"),
            RecurrenceError::Identity(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitPoint {
    pub point: Point,
    pub lambda: Vec<f64>,
    /// `max|∇T − λ⊗T|`.
    pub raw_residual: f64,
    /// `max|T|`.
    pub magnitude: f64,
}

impl FitPoint {
    /// `max|∇T − λ⊗T| / (1 + max|T|)`.
    pub fn residual(&self) -> f64 {
        self.raw_residual / (1.0 + self.magnitude)
    }
}

#[derive(Clone, Debug)]
pub struct RecurrenceFit {
    pub target: Target,
    /// `λ_a = ⟨∇_a T, T⟩ / ⟨T, T⟩`, symbolic.
    pub lambda: TensorField,
    pub points: Vec<FitPoint>,
    /// Points where the target is below the zero threshold.
    pub excluded: Vec<Point>,
}

impl RecurrenceFit {
    pub fn max_residual(&self) -> f64 {
        self.points.iter().fold(0.0, |m, p| m.max(p.residual()))
    }

    pub fn passed(&self, tolerance: f64) -> bool {
        self.points.iter().all(|p| p.residual() <= tolerance)
    }

    pub fn report(&self, chart: &str, tolerance: f64) -> IdentityReport {
        let mut r = IdentityReport::new(&alloc::format!("fit_{}", self.target.name()), chart, tolerance);
        for p in &self.points {
            r.record(&p.point, p.raw_residual, p.magnitude);
        }
        r
    }
}

/// Componentwise Euclidean projection of `∇T` onto `T`.
pub fn recurrence_form(bundle: &CurvatureBundle, t: &TensorField) -> Result<TensorField, GeometryError> {
    let n = bundle.dim();
    let grad = bundle.covariant_derivative(t, 1)?;
    let count = t.components().len();
    let norm = Expr::sum(t.components().iter().map(|c| c.mul(c)));
    Ok(TensorField::from_fn(n, 1, Symmetry::None, |idx| {
        let a = idx[0];
        let dot = Expr::sum((0..count).map(|i| grad.components()[a * count + i].mul(&t.components()[i])));
        dot.div(&norm)
    }))
}

pub fn fit_recurrence_form(
    bundle: &CurvatureBundle,
    target: Target,
    points: &[Point],
) -> Result<RecurrenceFit, RecurrenceError> {
    let t = target.tensor(bundle);
    let grad = bundle.covariant_derivative(t, 1)?;
    let lambda = recurrence_form(bundle, t)?;
    let mut values = Vec::with_capacity(points.len());
    per_point_values(bundle, &[t, &grad], points, |_, v| values.push((v[0].clone(), v[1].clone())))?;
    let chart_max = values.iter().fold(0.0f64, |m, (t, _)| m.max(t.max_abs()));
    let threshold = ZERO_THRESHOLD * chart_max.max(1.0);

    let mut admitted = Vec::new();
    let mut excluded = Vec::new();
    for (p, v) in points.iter().zip(values) {
        if v.0.max_abs() > threshold {
            admitted.push((p.clone(), v));
        } else {
            excluded.push(p.clone());
        }
    }
    if admitted.is_empty() {
        return Err(RecurrenceError::HypothesisFailure {
            target: target.name(),
            points: points.len(),
        });
    }
    let admitted_points: Vec<Point> = admitted.iter().map(|(p, _)| p.clone()).collect();
    let mut lambdas = Vec::with_capacity(admitted.len());
    per_point_values(bundle, &[&lambda], &admitted_points, |_, v| lambdas.push(v[0].data.clone()))?;
    let fitted = admitted
        .into_iter()
        .zip(lambdas)
        .map(|((point, (tv, gv)), lam)| FitPoint {
            raw_residual: recurrence_residual(&gv, &tv, &lam, None),
            magnitude: tv.max_abs(),
            point,
            lambda: lam,
        })
        .collect();
    Ok(RecurrenceFit {
        target,
        lambda,
        points: fitted,
        excluded,
    })
}

/// Numeric least-squares `λ` with `∇T ≈ λ⊗T`, for values at one point.
pub fn project_recurrence(grad: &NumTensor, t: &NumTensor) -> Vec<f64> {
    let count = t.data.len();
    let norm: f64 = t.data.iter().map(|v| v * v).sum();
    (0..grad.data.len() / count)
        .map(|a| {
            let dot: f64 = (0..count).map(|i| grad.data[a * count + i] * t.data[i]).sum();
            dot / norm
        })
        .collect()
}

/// `max|∇T − λ⊗T − μ⊗G|` with `μ⊗G` omitted when `extra` is `None`.
fn recurrence_residual(grad: &NumTensor, t: &NumTensor, lambda: &[f64], extra: Option<(&[f64], &NumTensor)>) -> f64 {
    let count = t.data.len();
    let mut worst: f64 = 0.0;
    for (a, lam) in lambda.iter().enumerate() {
        for i in 0..count {
            let mut r = grad.data[a * count + i] - lam * t.data[i];
            if let Some((mu, g)) = extra {
                r -= mu[a] * g.data[i];
            }
            worst = worst.max(libm::fabs(r));
        }
    }
    worst
}

/// Residual of `∇T = λ⊗T` for a given symbolic `λ`, recorded as
/// `max|∇T − λ⊗T|` with scale `max|T|`.
pub fn check_recurrence(
    bundle: &CurvatureBundle,
    target: Target,
    lambda: &TensorField,
    points: &[Point],
    tolerance: f64,
) -> Result<IdentityReport, RecurrenceError> {
    let t = target.tensor(bundle);
    let grad = bundle.covariant_derivative(t, 1)?;
    let mut report = IdentityReport::new(&alloc::format!("recurrence_{}", target.name()), bundle.chart().name(), tolerance);
    per_point_values(bundle, &[t, &grad, lambda], points, |p, v| {
        report.record(p, recurrence_residual(&v[1], &v[0], &v[2].data, None), v[0].max_abs());
    })?;
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct MuForm {
    pub mu: TensorField,
    pub scalar: Expr,
    pub scalar_differential: TensorField,
}

/// `μ = (dr − r·λ) / (n(n−1))`.
pub fn compute_mu(bundle: &CurvatureBundle, lambda: &TensorField) -> Result<MuForm, GeometryError> {
    let n = bundle.dim();
    lambda.expect_dim(n)?;
    lambda.expect_rank(1)?;
    let r = bundle.scalar_curvature().clone();
    let dr = bundle.gradient(&r);
    let denom = Expr::int((n * (n - 1)) as i64);
    let mu = TensorField::from_fn(n, 1, Symmetry::None, |idx| {
        dr.get(idx).sub(&r.mul(lambda.get(idx))).div(&denom)
    });
    Ok(MuForm {
        mu,
        scalar: r,
        scalar_differential: dr,
    })
}

/// Residual of `∇R = λ⊗R + μ⊗G`, as `max|∇R − λ⊗R − μ⊗G|` with scale `max|R|`.
pub fn check_extended_recurrence(
    bundle: &CurvatureBundle,
    lambda: &TensorField,
    mu: &TensorField,
    points: &[Point],
    tolerance: f64,
) -> Result<IdentityReport, RecurrenceError> {
    let grad = bundle.covariant_derivative(bundle.riemann(), 1)?;
    let mut report = IdentityReport::new("extended_recurrence", bundle.chart().name(), tolerance);
    per_point_values(bundle, &[bundle.riemann(), &grad, bundle.model(), lambda, mu], points, |p, v| {
        let raw = recurrence_residual(&v[1], &v[0], &v[3].data, Some((&v[4].data, &v[2])));
        report.record(p, raw, v[0].max_abs());
    })?;
    Ok(report)
}

/// `max|dλ|`, scaled by `max|λ|`.
pub fn check_lambda_closed(
    bundle: &CurvatureBundle,
    lambda: &TensorField,
    points: &[Point],
    tolerance: f64,
) -> Result<IdentityReport, RecurrenceError> {
    let d = bundle.exterior_derivative(lambda)?;
    let mut report = IdentityReport::new("lambda_closed", bundle.chart().name(), tolerance);
    per_point_values(bundle, &[&d, lambda], points, |p, v| report.record(p, v[0].max_abs(), v[1].max_abs()))?;
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct MuStructure {
    /// `max|dμ + μ∧λ|`, scaled by `max|μ|`.
    pub closure: IdentityReport,
    /// `max|(ℛ(U,V)R)(W,X,Y,Z) − 2(dμ + μ∧λ)(U,V)G(W,X,Y,Z)|`, scaled by
    /// the largest action component.
    pub curvature_link: IdentityReport,
}

pub fn check_mu_structure(
    bundle: &CurvatureBundle,
    lambda: &TensorField,
    mu: &TensorField,
    points: &[Point],
    tolerance: f64,
) -> Result<MuStructure, RecurrenceError> {
    let n = bundle.dim();
    let dmu = bundle.exterior_derivative(mu)?;
    let w = wedge(mu, lambda)?;
    let form = TensorField::from_fn(n, 2, Symmetry::Antisymmetric2, |idx| dmu.get(idx).add(w.get(idx)));
    let acted = bundle.curvature_action(bundle.riemann())?;
    let chart = bundle.chart().name();
    let mut closure = IdentityReport::new("mu_closure", chart, tolerance);
    let mut link = IdentityReport::new("curvature_link", chart, tolerance);
    per_point_values(bundle, &[&form, mu, &acted, bundle.model()], points, |p, v| {
        let (f, m, a, g) = (&v[0], &v[1], &v[2], &v[3]);
        closure.record(p, f.max_abs(), m.max_abs());
        let count = g.data.len();
        let mut worst: f64 = 0.0;
        for_each_index(n, 2, |uv| {
            let fuv = 2.0 * f.get(uv);
            let base = flat_index(n, uv) * count;
            for i in 0..count {
                worst = worst.max(libm::fabs(a.data[base + i] - fuv * g.data[i]));
            }
        });
        link.record(p, worst, a.max_abs());
    })?;
    Ok(MuStructure {
        closure,
        curvature_link: link,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainPoint {
    pub point: Point,
    /// `max|P|` with `P = (n−1)R(U,X,Y,Z) + g(U,Y)S(X,Z) − g(U,Z)S(X,Y)`.
    pub projective: f64,
    /// `max|S − (r/n)g|`.
    pub einstein: f64,
    /// `max|C|`.
    pub concircular: f64,
    /// `max|tr_{X,Z} P + n(S − (r/n)g)|`; zero up to round-off.
    pub contraction: f64,
    /// `max|R|`.
    pub scale: f64,
}

impl ChainPoint {
    fn within(&self, v: f64, tolerance: f64) -> bool {
        v <= tolerance * (1.0 + self.scale)
    }

    pub fn hypothesis_holds(&self, tolerance: f64) -> bool {
        self.within(self.projective, tolerance)
    }

    /// The hypothesis failing, or both consequences holding.
    pub fn implication_holds(&self, tolerance: f64) -> bool {
        !self.hypothesis_holds(tolerance)
            || (self.within(self.einstein, tolerance) && self.within(self.concircular, tolerance))
    }
}

pub fn check_proj_einstein_chain(bundle: &CurvatureBundle, points: &[Point]) -> Result<Vec<ChainPoint>, RecurrenceError> {
    let n = bundle.dim();
    if n == 2 {
        return Err(RecurrenceError::DimensionTwo);
    }
    let inverse = TensorField::new(n, 2, bundle.inverse_metric().to_vec(), Symmetry::Symmetric2)
        .map_err(GeometryError::from)?;
    let scalar = TensorField::new(n, 0, vec![bundle.scalar_curvature().clone()], Symmetry::None)
        .map_err(GeometryError::from)?;
    let mut out = Vec::with_capacity(points.len());
    let tensors = [bundle.riemann(), bundle.ricci(), bundle.metric(), &inverse, &scalar, bundle.concircular()];
    per_point_values(bundle, &tensors, points, |p, v| {
        let (r, s, g, ginv, scalar, c) = (&v[0], &v[1], &v[2], &v[3], v[4].data[0], &v[5]);
        let nf = n as f64;
        let mut proj = NumTensor::zeros(n, 4);
        for_each_index(n, 4, |i| {
            let (u, x, y, z) = (i[0], i[1], i[2], i[3]);
            proj.data[flat_index(n, i)] =
                (nf - 1.0) * r.get(i) + g.get(&[u, y]) * s.get(&[x, z]) - g.get(&[u, z]) * s.get(&[x, y]);
        });
        let mut einstein: f64 = 0.0;
        let mut contraction: f64 = 0.0;
        for_each_index(n, 2, |uy| {
            let (u, y) = (uy[0], uy[1]);
            let traceless = s.get(uy) - scalar / nf * g.get(uy);
            einstein = einstein.max(libm::fabs(traceless));
            let mut trace = 0.0;
            for x in 0..n {
                for z in 0..n {
                    trace += ginv.get(&[x, z]) * proj.get(&[u, x, y, z]);
                }
            }
            contraction = contraction.max(libm::fabs(trace + nf * traceless));
        });
        out.push(ChainPoint {
            point: p.clone(),
            projective: proj.max_abs(),
            einstein,
            concircular: c.max_abs(),
            contraction,
            scale: r.max_abs(),
        });
    })?;
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub verdict: Verdict,
    /// Named residuals backing the verdict, in the order computed.
    pub evidence: Vec<(String, f64)>,
}

impl Classification {
    /// A chart found concircularly recurrent but not recurrent contradicts
    /// the theorem; the run must be reported as failed.
    pub fn is_violation(&self) -> bool {
        self.verdict == Verdict::ConcircularlyRecurrent
    }
}

/// First match wins: flat, constant-curvature, locally-symmetric,
/// recurrent, concircularly-recurrent, generic.
pub fn classify(bundle: &CurvatureBundle, points: &[Point], tolerance: f64) -> Result<Classification, RecurrenceError> {
    let n = bundle.dim();
    let mut evidence = Vec::new();
    let done = |verdict, evidence| Ok(Classification { verdict, evidence });

    let grad_r = bundle.covariant_derivative(bundle.riemann(), 1)?;
    let scalar = TensorField::new(n, 0, vec![bundle.scalar_curvature().clone()], Symmetry::None)
        .map_err(GeometryError::from)?;
    let dscalar = bundle.gradient(bundle.scalar_curvature());
    let mut riemann = 0.0f64;
    let (mut conc, mut dr, mut grad) = (0.0f64, 0.0f64, 0.0f64);
    per_point_values(
        bundle,
        &[bundle.riemann(), bundle.concircular(), &grad_r, &scalar, &dscalar],
        points,
        |_, v| {
            let rmax = v[0].max_abs();
            riemann = riemann.max(rmax);
            conc = conc.max(v[1].max_abs() / (1.0 + rmax));
            grad = grad.max(v[2].max_abs() / (1.0 + rmax));
            dr = dr.max(v[4].max_abs() / (1.0 + libm::fabs(v[3].data[0])));
        },
    )?;
    evidence.push(("max_riemann".to_string(), riemann));
    if riemann <= tolerance {
        return done(Verdict::Flat, evidence);
    }
    if n >= 3 {
        evidence.push(("max_concircular".to_string(), conc));
        if conc <= tolerance {
            return done(Verdict::ConstantCurvature, evidence);
        }
    } else {
        evidence.push(("max_scalar_gradient".to_string(), dr));
        if dr <= tolerance {
            return done(Verdict::ConstantCurvature, evidence);
        }
    }
    evidence.push(("max_nabla_riemann".to_string(), grad));
    if grad <= tolerance {
        return done(Verdict::LocallySymmetric, evidence);
    }
    for (target, verdict) in [(Target::Riemann, Verdict::Recurrent), (Target::Concircular, Verdict::ConcircularlyRecurrent)] {
        match fit_recurrence_form(bundle, target, points) {
            Ok(fit) => {
                evidence.push((alloc::format!("fit_{}_residual", target.name()), fit.max_residual()));
                evidence.push((alloc::format!("fit_{}_excluded", target.name()), fit.excluded.len() as f64));
                if fit.excluded.is_empty() && fit.passed(tolerance) {
                    return done(verdict, evidence);
                }
            }
            Err(RecurrenceError::HypothesisFailure { .. }) => {
                evidence.push((alloc::format!("fit_{}_excluded", target.name()), points.len() as f64));
            }
            Err(e) => return Err(e),
        }
    }
    done(Verdict::Generic, evidence)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheoremPoint {
    pub point: Point,
    pub lambda: Vec<f64>,
    /// `max|μ_a|` with `μ` built from the concircular recurrence form.
    pub mu_norm: f64,
    /// `max|∇R − λ⊗R| / (1 + max|R|)` with the same `λ`.
    pub recurrence: f64,
    /// `max|dλ|`.
    pub closure: f64,
    /// `max|ℛ(U,V)·R| / (1 + max|R|)`.
    pub semisymmetry: f64,
    pub scalar_curvature: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct TheoremReport {
    pub chart: String,
    pub tolerance: f64,
    pub points: Vec<TheoremPoint>,
    /// Points where the hypothesis (nonzero `C` with a passing fit) fails.
    pub skipped: Vec<Point>,
    pub lambda: Option<TensorField>,
    pub mu: Option<TensorField>,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.points.iter().all(|p| p.pass)
    }
}

/// At every point where `C` is nonzero and `∇C = λ⊗C` fits, checks that
/// `μ` vanishes, that `∇R = λ⊗R` with the same `λ`, that `dλ = 0` and that
/// the chart is semisymmetric there.
pub fn verify_theorem(bundle: &CurvatureBundle, points: &[Point], tolerance: f64) -> Result<TheoremReport, RecurrenceError> {
    let mut report = TheoremReport {
        chart: bundle.chart().name().to_string(),
        tolerance,
        points: Vec::new(),
        skipped: Vec::new(),
        lambda: None,
        mu: None,
    };
    let fit = match fit_recurrence_form(bundle, Target::Concircular, points) {
        Ok(fit) => fit,
        Err(RecurrenceError::HypothesisFailure { .. }) => {
            report.skipped = points.to_vec();
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    report.skipped = fit.excluded.clone();
    let held: Vec<Point> = fit
        .points
        .iter()
        .filter(|p| p.residual() <= tolerance)
        .map(|p| p.point.clone())
        .collect();
    report.skipped.extend(fit.points.iter().filter(|p| p.residual() > tolerance).map(|p| p.point.clone()));
    if held.is_empty() {
        return Ok(report);
    }
    let lambda = fit.lambda;
    let mu = compute_mu(bundle, &lambda)?.mu;
    let grad = bundle.covariant_derivative(bundle.riemann(), 1)?;
    let dlambda = bundle.exterior_derivative(&lambda)?;
    let acted = bundle.curvature_action(bundle.riemann())?;
    let scalar = TensorField::new(bundle.dim(), 0, vec![bundle.scalar_curvature().clone()], Symmetry::None)
        .map_err(GeometryError::from)?;
    let tensors = [bundle.riemann(), &grad, &lambda, &mu, &dlambda, &acted, &scalar];
    per_point_values(bundle, &tensors, &held, |p, v| {
        let scale = 1.0 + v[0].max_abs();
        let recurrence = recurrence_residual(&v[1], &v[0], &v[2].data, None) / scale;
        let mu_norm = v[3].max_abs();
        let closure = v[4].max_abs();
        let semisymmetry = v[5].max_abs() / scale;
        report.points.push(TheoremPoint {
            point: p.clone(),
            lambda: v[2].data.clone(),
            mu_norm,
            recurrence,
            closure,
            semisymmetry,
            scalar_curvature: v[6].data[0],
            pass: [mu_norm, recurrence, closure, semisymmetry].iter().all(|r| *r <= tolerance),
        });
    })?;
    report.lambda = Some(lambda);
    report.mu = Some(mu);
    Ok(report)
}
