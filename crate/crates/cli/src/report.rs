//! Report structure and its JSON and text renderings.

use std::fmt::Write as _;
use std::io;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

pub const EVIDENCE_SCOPE: &str = "per-point: residuals are evaluated at the sampled points only; \
global statements such as nowhere-vanishing curvature are not certified";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub metric: String,
    pub dim: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub command: String,
    pub evidence_scope: &'static str,
    pub points: Vec<PointEntry>,
    pub global_checks: Vec<Check>,
    pub classification: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub summary: Summary,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointEntry {
    pub coords: Labelled,
    pub scalar_curvature: f64,
    pub checks: Vec<Check>,
    pub lambda: Option<Labelled>,
    pub mu_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curvature: Option<CurvatureData>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub scale: f64,
    pub pass: bool,
}

/// Components flattened row-major in the index order noted per field.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureData {
    /// `[k][i][j]` for `Γ^k_ij`.
    pub christoffel: Vec<f64>,
    /// `[w][x][y][z]` for `R(∂w,∂x,∂y,∂z)`.
    pub riemann: Vec<f64>,
    pub ricci: Vec<f64>,
    pub concircular: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub all_pass: bool,
    pub skipped: usize,
}

/// Name/value pairs serialized as a JSON object in their given order.
#[derive(Clone, Debug, PartialEq)]
pub struct Labelled(pub Vec<(String, f64)>);

impl Serialize for Labelled {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.points
            .iter()
            .flat_map(|p| &p.checks)
            .chain(&self.global_checks)
            .all(|c| c.pass)
    }

    pub fn finish(&mut self, skipped: usize) {
        self.summary = Summary {
            all_pass: self.all_pass(),
            skipped,
        };
    }

    pub fn to_json(&self) -> String {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, Precise(PrettyFormatter::new()));
        self.serialize(&mut ser).expect("reports always serialize");
        out.push(b'\n');
        String::from_utf8(out).expect("JSON output is UTF-8")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "metric {} (dim {}), {}", self.metric, self.dim, self.command);
        let _ = writeln!(s, "seed {}  tolerance {:e}", self.seed, self.tolerance);
        let _ = writeln!(s, "classification: {}", self.classification);
        if let Some(note) = &self.note {
            let _ = writeln!(s, "note: {note}");
        }
        for (k, p) in self.points.iter().enumerate() {
            let coords: Vec<String> = p.coords.0.iter().map(|(n, v)| format!("{n}={v:.6}")).collect();
            let _ = writeln!(s, "point {}: {}  r={:.10e}", k + 1, coords.join(" "), p.scalar_curvature);
            if let Some(lambda) = &p.lambda {
                let parts: Vec<String> = lambda.0.iter().map(|(n, v)| format!("{n}:{v:.10e}")).collect();
                let _ = writeln!(s, "  lambda {}", parts.join(" "));
            }
            if let Some(mu) = p.mu_norm {
                let _ = writeln!(s, "  |mu| {mu:.6e}");
            }
            for c in &p.checks {
                write_check(&mut s, c);
            }
        }
        if !self.global_checks.is_empty() {
            let _ = writeln!(s, "global:");
            for c in &self.global_checks {
                write_check(&mut s, c);
            }
        }
        let _ = writeln!(
            s,
            "summary: {} ({} skipped)",
            if self.summary.all_pass { "all pass" } else { "FAILED" },
            self.summary.skipped
        );
        s
    }
}

fn write_check(s: &mut String, c: &Check) {
    let _ = writeln!(
        s,
        "  {:<24} residual {:.6e}  scale {:.6e}  {}",
        c.name,
        c.residual,
        c.scale,
        if c.pass { "pass" } else { "FAIL" }
    );
}

/// Pretty JSON with every float written to 17 significant digits;
/// non-finite values become `null`.
struct Precise<'a>(PrettyFormatter<'a>);

impl Formatter for Precise<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report {
            metric: "m".into(),
            dim: 2,
            seed: 42,
            tolerance: 1e-8,
            command: "check".into(),
            evidence_scope: EVIDENCE_SCOPE,
            points: vec![PointEntry {
                coords: Labelled(vec![("y".into(), 0.1), ("x".into(), -2.0)]),
                scalar_curvature: 1.0 / 3.0,
                checks: vec![Check {
                    name: "walker".into(),
                    residual: f64::NAN,
                    scale: 0.0,
                    pass: false,
                }],
                lambda: None,
                mu_norm: None,
                curvature: None,
            }],
            global_checks: vec![],
            classification: "generic".into(),
            note: None,
            summary: Summary { all_pass: true, skipped: 0 },
        };
        r.finish(1);
        r
    }

    #[test]
    fn floats_keep_seventeen_digits() {
        let json = sample().to_json();
        assert!(json.contains("\"scalar_curvature\": 3.3333333333333331e-1"), "{json}");
        assert!(json.contains("\"tolerance\": 1.0000000000000000e-8"));
        assert!(json.contains("\"residual\": null"));
        let back: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(back["points"][0]["scalar_curvature"].as_f64(), Some(1.0 / 3.0));
    }

    #[test]
    fn coordinate_order_is_preserved() {
        let json = sample().to_json();
        assert!(json.find("\"y\"").unwrap() < json.find("\"x\"").unwrap());
    }

    #[test]
    fn summary_reflects_checks() {
        let r = sample();
        assert_eq!(r.summary, Summary { all_pass: false, skipped: 1 });
        assert!(r.to_text().contains("FAILED (1 skipped)"));
    }
}
