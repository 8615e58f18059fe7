//! JSON metric specifications.
//!
//! ```json
//! {"name": "sphere_2", "dim": 2, "coordinates": ["theta", "phi"],
//!  "metric": [["1", "0"], ["0", "sin(theta)^2"]],
//!  "domain": {"theta": [0.2, 2.9], "phi": [0, 6.28]},
//!  "exclusions": ["sin(theta)"]}
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use concirc_core::chart::{ChartError, MetricChart};
use concirc_core::expr::{parse, Expr, ParseError};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricSpec {
    name: String,
    dim: usize,
    coordinates: Vec<String>,
    metric: Vec<Vec<String>>,
    domain: BTreeMap<String, [f64; 2]>,
    #[serde(default)]
    exclusions: Vec<String>,
}

#[derive(Debug)]
pub enum LoadError {
    Io { path: PathBuf, error: std::io::Error },
    Json { path: PathBuf, line: usize, column: usize, message: String },
    Expression { path: PathBuf, entry: String, error: ParseError },
    Schema { path: PathBuf, message: String },
    Chart { path: PathBuf, error: ChartError },
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Io { path, error } => write!(f, "{}: {error}", path.display()),
            LoadError::Json { path, line, column, message } => {
                write!(f, "{}:{line}:{column}: {message}", path.display())
            }
            LoadError::Expression { path, entry, error } => write!(f, "{}: {entry}: {error}", path.display()),
            LoadError::Schema { path, message } => write!(f, "{}: {message}", path.display()),
            LoadError::Chart { path, error } => write!(f, "{}: {error}", path.display()),
        }
    }
}

impl std::error::Error for LoadError {}

/// Reads, parses and validates a metric file, including the
/// nondegeneracy check at seeded sample points.
pub fn load_metric_spec(path: &Path) -> Result<MetricChart, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|error| LoadError::Io {
        path: path.to_path_buf(),
        error,
    })?;
    parse_metric_spec(&text, path)
}

pub fn parse_metric_spec(text: &str, path: &Path) -> Result<MetricChart, LoadError> {
    let path_buf = || path.to_path_buf();
    let spec: MetricSpec = serde_json::from_str(text).map_err(|e| LoadError::Json {
        path: path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let schema = |message: String| LoadError::Schema {
        path: path_buf(),
        message,
    };
    let n = spec.dim;
    if spec.coordinates.len() != n {
        return Err(schema(format!("dim is {n} but {} coordinates are listed", spec.coordinates.len())));
    }
    if spec.metric.len() != n || spec.metric.iter().any(|row| row.len() != n) {
        return Err(schema(format!("metric must be a {n}x{n} array")));
    }
    if let Some(extra) = spec.domain.keys().find(|k| !spec.coordinates.contains(k)) {
        return Err(schema(format!("domain names '{extra}', which is not a coordinate")));
    }
    let mut domain = Vec::with_capacity(n);
    for c in &spec.coordinates {
        let Some([lo, hi]) = spec.domain.get(c) else {
            return Err(schema(format!("domain has no interval for coordinate '{c}'")));
        };
        domain.push((*lo, *hi));
    }
    let parse_entry = |entry: String, text: &str| -> Result<Expr, LoadError> {
        parse(text, &spec.coordinates).map_err(|error| LoadError::Expression {
            path: path_buf(),
            entry,
            error,
        })
    };
    let mut metric = Vec::with_capacity(n);
    for (i, row) in spec.metric.iter().enumerate() {
        let mut parsed = Vec::with_capacity(n);
        for (j, text) in row.iter().enumerate() {
            parsed.push(parse_entry(format!("metric[{i}][{j}]"), text)?);
        }
        metric.push(parsed);
    }
    let exclusions = spec
        .exclusions
        .iter()
        .enumerate()
        .map(|(k, text)| parse_entry(format!("exclusions[{k}]"), text))
        .collect::<Result<Vec<_>, _>>()?;
    let chart_error = |error| LoadError::Chart {
        path: path_buf(),
        error,
    };
    let chart = MetricChart::new(&spec.name, spec.coordinates.clone(), metric, domain, exclusions).map_err(chart_error)?;
    chart.validate_nondegenerate().map_err(chart_error)?;
    Ok(chart)
}
