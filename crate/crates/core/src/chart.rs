//! Metric charts, sample points and the seeded sampler.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{parse, simplify, EvalError, Expr, ParseError, Tape};
use crate::linalg::determinant;

/// Points closer than this to an exclusion locus (`|expr| <` value) are
/// rejected by the samplers.
pub const EXCLUSION_MARGIN: f64 = 1e-3;
/// Smallest admissible `|det g|` at a sample point.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;
/// Number of seeded points checked for nondegeneracy when validating a chart.
pub const VALIDATION_SAMPLES: usize = 20;
pub const VALIDATION_SEED: u64 = 42;

/// The single random source for sampling and random test data. Every
/// random quantity in a run is drawn from one `Sampler` seeded once.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn index(&mut self, len: usize) -> usize {
        self.rng.gen_range(0..len)
    }
}

/// Coordinate values, in the owning chart's coordinate order.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ChartError {
    DimensionTooSmall(usize),
    Shape(String),
    Parse { entry: String, error: ParseError },
    UndeclaredVariable { entry: String, name: String },
    Asymmetric { row: usize, col: usize },
    BadInterval { coordinate: String },
    Degenerate { point: Vec<(String, f64)>, det: f64 },
    Evaluation { point: Vec<(String, f64)>, error: EvalError },
    SamplingExhausted { wanted: usize, found: usize },
}

impl fmt::Display for ChartError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let point_text = |p: &[(String, f64)]| {
            p.iter()
                .map(|(n, v)| alloc::format!("{n}={v}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        match self {
            ChartError::DimensionTooSmall(n) => write!(f, "dimension {n} is below 2"),
            ChartError::Shape(msg) => write!(f, "malformed chart: {msg}"),
            ChartError::Parse { entry, error } => write!(f, "in {entry}: {error}"),
            ChartError::UndeclaredVariable { entry, name } => {
                write!(f, "in {entry}: '{name}' is not a coordinate")
            }
            ChartError::Asymmetric { row, col } => {
                write!(f, "metric is not symmetric: g[{row}][{col}] differs from g[{col}][{row}]")
            }
            ChartError::BadInterval { coordinate } => {
                write!(f, "domain interval for '{coordinate}' is empty or not finite")
            }
            ChartError::Degenerate { point, det } => {
                write!(f, "metric is degenerate at {} (det = {det:e})", point_text(point))
            }
            ChartError::Evaluation { point, error } => {
                write!(f, "metric cannot be evaluated at {}: {error}", point_text(point))
            }
            ChartError::SamplingExhausted { wanted, found } => {
                write!(f, "found only {found} admissible sample points of {wanted}")
            }
        }
    }
}

/// A coordinate chart with a symbolic metric.
#[derive(Clone, Debug)]
pub struct MetricChart {
    name: String,
    coordinates: Vec<String>,
    /// Row-major `n×n`.
    metric: Vec<Expr>,
    domain: Vec<(f64, f64)>,
    exclusions: Vec<Expr>,
}

impl MetricChart {
    /// Builds and validates a chart: shape, declared variables, structural
    /// symmetry (after simplification) and domain intervals. Nondegeneracy
    /// is checked separately by [`MetricChart::validate_nondegenerate`].
    pub fn new(
        name: &str,
        coordinates: Vec<String>,
        metric: Vec<Vec<Expr>>,
        domain: Vec<(f64, f64)>,
        exclusions: Vec<Expr>,
    ) -> Result<Self, ChartError> {
        let n = coordinates.len();
        if n < 2 {
            return Err(ChartError::DimensionTooSmall(n));
        }
        if metric.len() != n || metric.iter().any(|row| row.len() != n) {
            return Err(ChartError::Shape(alloc::format!("metric must be {n}x{n}")));
        }
        if domain.len() != n {
            return Err(ChartError::Shape(alloc::format!("domain must have {n} intervals")));
        }
        for (c, (lo, hi)) in coordinates.iter().zip(&domain) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(ChartError::BadInterval { coordinate: c.clone() });
            }
        }
        let check_vars = |entry: String, e: &Expr| -> Result<(), ChartError> {
            match e.variables().into_iter().find(|v| !coordinates.contains(v)) {
                Some(name) => Err(ChartError::UndeclaredVariable { entry, name }),
                None => Ok(()),
            }
        };
        for (i, row) in metric.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                check_vars(alloc::format!("g[{i}][{j}]"), e)?;
            }
        }
        for (k, e) in exclusions.iter().enumerate() {
            check_vars(alloc::format!("exclusions[{k}]"), e)?;
        }
        let mut flat = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let s = simplify(&metric[i][j]);
                if j < i && s != flat[j * n + i] {
                    return Err(ChartError::Asymmetric { row: j, col: i });
                }
                flat.push(s);
            }
        }
        Ok(MetricChart {
            name: name.to_string(),
            coordinates,
            metric: flat,
            domain,
            exclusions,
        })
    }

    /// Parses metric entries and exclusions from expression strings.
    pub fn from_strings(
        name: &str,
        coordinates: &[&str],
        metric: &[&[&str]],
        domain: &[(f64, f64)],
        exclusions: &[&str],
    ) -> Result<Self, ChartError> {
        let coords: Vec<String> = coordinates.iter().map(|c| c.to_string()).collect();
        let parse_entry = |entry: String, text: &str| {
            parse(text, &coords).map_err(|error| ChartError::Parse { entry, error })
        };
        let mut rows = Vec::with_capacity(metric.len());
        for (i, row) in metric.iter().enumerate() {
            let mut parsed = Vec::with_capacity(row.len());
            for (j, text) in row.iter().enumerate() {
                parsed.push(parse_entry(alloc::format!("g[{i}][{j}]"), text)?);
            }
            rows.push(parsed);
        }
        let mut excl = Vec::with_capacity(exclusions.len());
        for (k, text) in exclusions.iter().enumerate() {
            excl.push(parse_entry(alloc::format!("exclusions[{k}]"), text)?);
        }
        MetricChart::new(name, coords.clone(), rows, domain.to_vec(), excl)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.coordinates.len()
    }

    pub fn coordinates(&self) -> &[String] {
        &self.coordinates
    }

    pub fn metric(&self, i: usize, j: usize) -> &Expr {
        &self.metric[i * self.dim() + j]
    }

    pub fn metric_components(&self) -> &[Expr] {
        &self.metric
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn exclusions(&self) -> &[Expr] {
        &self.exclusions
    }

    pub fn labelled(&self, point: &Point) -> Vec<(String, f64)> {
        self.coordinates.iter().cloned().zip(point.0.iter().copied()).collect()
    }

    fn draw(&self, sampler: &mut Sampler, exclusions: &Tape) -> Option<Point> {
        let p = Point(self.domain.iter().map(|(lo, hi)| sampler.uniform(*lo, *hi)).collect());
        match exclusions.eval(&p.0) {
            Ok(vals) if vals.iter().all(|v| libm::fabs(*v) >= EXCLUSION_MARGIN) => Some(p),
            _ => None,
        }
    }

    fn compile_guards(&self) -> Result<(Tape, Tape), ChartError> {
        let compile = |exprs: &[Expr]| {
            Tape::compile(&self.coordinates, exprs).map_err(|error| ChartError::Evaluation {
                point: Vec::new(),
                error,
            })
        };
        Ok((compile(&self.exclusions)?, compile(&self.metric)?))
    }

    /// Draws `count` points uniformly from the domain box, rejecting points
    /// near exclusion loci, points where the metric cannot be evaluated and
    /// points where it is numerically degenerate. The same seed always
    /// yields the same points.
    pub fn sample_points(&self, count: usize, sampler: &mut Sampler) -> Result<Vec<Point>, ChartError> {
        let (exclusions, metric) = self.compile_guards()?;
        let n = self.dim();
        let mut points = Vec::with_capacity(count);
        let mut attempts = 0;
        while points.len() < count && attempts < 1000 * count.max(1) {
            attempts += 1;
            let Some(p) = self.draw(sampler, &exclusions) else {
                continue;
            };
            if let Ok(g) = metric.eval(&p.0) {
                if libm::fabs(determinant(n, &g)) > DEGENERACY_THRESHOLD {
                    points.push(p);
                }
            }
        }
        if points.len() < count {
            return Err(ChartError::SamplingExhausted {
                wanted: count,
                found: points.len(),
            });
        }
        Ok(points)
    }

    /// Checks `|det g| > 1e-12` at [`VALIDATION_SAMPLES`] seeded points drawn
    /// from the domain (exclusion loci avoided); the first failure names
    /// its witness point.
    pub fn validate_nondegenerate(&self) -> Result<(), ChartError> {
        let (exclusions, metric) = self.compile_guards()?;
        let mut sampler = Sampler::new(VALIDATION_SEED);
        let mut checked = 0;
        let mut attempts = 0;
        while checked < VALIDATION_SAMPLES && attempts < 1000 * VALIDATION_SAMPLES {
            attempts += 1;
            let Some(p) = self.draw(&mut sampler, &exclusions) else {
                continue;
            };
            checked += 1;
            let g = metric.eval(&p.0).map_err(|error| ChartError::Evaluation {
                point: self.labelled(&p),
                error,
            })?;
            let det = determinant(self.dim(), &g);
            if libm::fabs(det) <= DEGENERACY_THRESHOLD {
                return Err(ChartError::Degenerate {
                    point: self.labelled(&p),
                    det,
                });
            }
        }
        if checked < VALIDATION_SAMPLES {
            return Err(ChartError::SamplingExhausted {
                wanted: VALIDATION_SAMPLES,
                found: checked,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sphere() -> MetricChart {
        MetricChart::from_strings(
            "s2",
            &["theta", "phi"],
            &[&["1", "0"], &["0", "sin(theta)^2"]],
            &[(0.0, 3.1), (0.0, 6.2)],
            &["sin(theta)"],
        )
        .unwrap()
    }

    #[test]
    fn sampling_is_seeded_and_avoids_exclusions() {
        let chart = sphere();
        let a = chart.sample_points(50, &mut Sampler::new(7)).unwrap();
        let b = chart.sample_points(50, &mut Sampler::new(7)).unwrap();
        assert_eq!(a, b);
        for p in &a {
            assert!(libm::sin(p.0[0]).abs() >= EXCLUSION_MARGIN);
            assert!((0.0..3.1).contains(&p.0[0]));
        }
        assert_ne!(a, chart.sample_points(50, &mut Sampler::new(8)).unwrap());
    }

    #[test]
    fn asymmetric_metric_is_rejected() {
        let err = MetricChart::from_strings("bad", &["x", "y"], &[&["1", "x"], &["y", "1"]], &[(0.0, 1.0); 2], &[])
            .unwrap_err();
        assert_eq!(err, ChartError::Asymmetric { row: 0, col: 1 });
        // equal after simplification is accepted
        assert!(MetricChart::from_strings("ok", &["x", "y"], &[&["1", "x + 0"], &["1*x", "1"]], &[(0.0, 1.0); 2], &[]).is_ok());
    }

    #[test]
    fn degenerate_metric_names_a_witness() {
        let chart =
            MetricChart::from_strings("flat", &["x", "y"], &[&["1", "1"], &["1", "1"]], &[(0.0, 1.0); 2], &[]).unwrap();
        match chart.validate_nondegenerate() {
            Err(ChartError::Degenerate { point, det }) => {
                assert_eq!(point.len(), 2);
                assert_eq!(det, 0.0);
            }
            other => panic!("expected degeneracy error, got {other:?}"),
        }
        assert!(sphere().validate_nondegenerate().is_ok());
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            MetricChart::from_strings("one", &["x"], &[&["1"]], &[(0.0, 1.0)], &[]).unwrap_err(),
            ChartError::DimensionTooSmall(1)
        );
        assert!(matches!(
            MetricChart::from_strings("q", &["x", "y"], &[&["1", "0"], &["0", "q"]], &[(0.0, 1.0); 2], &[]),
            Err(ChartError::Parse { .. })
        ));
        assert!(matches!(
            MetricChart::new("v", vec!["x".into(), "y".into()], vec![vec![Expr::one(), Expr::zero()], vec![Expr::zero(), Expr::var("z")]], vec![(0.0, 1.0); 2], vec![]),
            Err(ChartError::UndeclaredVariable { .. })
        ));
        assert!(matches!(
            MetricChart::from_strings("d", &["x", "y"], &[&["1", "0"], &["0", "1"]], &[(1.0, 0.0), (0.0, 1.0)], &[]),
            Err(ChartError::BadInterval { .. })
        ));
    }
}
