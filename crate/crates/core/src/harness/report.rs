use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `lhs ≥ rhs`.
    Geq,
    /// `lhs ≤ rhs`.
    Leq,
    /// `lhs ≈ rhs`; the margin is `−|lhs − rhs|`.
    Eq,
}

impl Direction {
    pub fn symbol(self) -> &'static str {
        match self {
            Direction::Geq => ">=",
            Direction::Leq => "<=",
            Direction::Eq => "~=",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Metadata {
    pub models: Vec<String>,
    pub n: Option<usize>,
    pub lambda: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// Nodes per segment of the finest grid involved.
    pub mesh_nodes: Option<usize>,
    /// Set when the check compares values under different energy normalizations.
    pub normalization_audit: bool,
    /// True for inequalities about suprema instantiated at one conformal class.
    pub class_instance: bool,
    pub notes: Vec<String>,
}

impl Metadata {
    pub fn model(name: impl Into<String>, n: usize) -> Self {
        Self { models: vec![name.into()], n: Some(n), ..Default::default() }
    }

    pub fn models(names: &[&str], n: usize) -> Self {
        Self { models: names.iter().map(|s| s.to_string()).collect(), n: Some(n), ..Default::default() }
    }

    pub fn weights(mut self, a: f64, b: f64) -> Self {
        self.a = Some(a);
        self.b = Some(b);
        self
    }

    pub fn lambda(mut self, l: f64) -> Self {
        self.lambda = Some(l);
        self.a = Some(l);
        self.b = Some(1.0 - l);
        self
    }

    pub fn mesh(mut self, nodes: usize) -> Self {
        self.mesh_nodes = Some(nodes);
        self
    }

    pub fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub direction: Direction,
    pub margin: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub anchor: String,
    pub metadata: Metadata,
    /// Wall time of the check that produced this report (CSV only).
    #[serde(skip)]
    pub runtime_ms: f64,
}

/// Default tolerance: `max(10⁻⁶, 1%·|rhs|)`.
pub fn default_tolerance(rhs: f64) -> f64 {
    (0.01 * rhs.abs()).max(1e-6)
}

impl InequalityReport {
    /// Builds a report; the verdict is inconclusive if `converged` is false
    /// or a side is not finite.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        lhs: f64,
        rhs: f64,
        direction: Direction,
        tolerance: f64,
        anchor: impl Into<String>,
        metadata: Metadata,
        converged: bool,
    ) -> Self {
        let margin = match direction {
            Direction::Geq => lhs - rhs,
            Direction::Leq => rhs - lhs,
            Direction::Eq => -(lhs - rhs).abs(),
        };
        let verdict = if !converged || !margin.is_finite() {
            Verdict::Inconclusive
        } else if margin >= -tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self {
            name: name.into(),
            lhs,
            rhs,
            direction,
            margin,
            tolerance,
            verdict,
            anchor: anchor.into(),
            metadata,
            runtime_ms: 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Columns `x, Y, residual` for plotting.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepTable {
    pub name: String,
    pub x_label: String,
    pub rows: Vec<(f64, f64, f64)>,
}

impl SweepTable {
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("x\tY\tresidual\n");
        for (x, y, r) in &self.rows {
            let _ = writeln!(s, "{x}\t{y}\t{r:e}");
        }
        s
    }
}

pub const CSV_HEADER: &str = "check,model,n,lambda,a,b,mesh,lhs,rhs,margin,verdict,runtime_ms";

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One CSV row per report. Cells that do not apply are empty; non-finite
/// values only appear on inconclusive rows.
pub fn to_csv(reports: &[InequalityReport]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in reports {
        let m = &r.metadata;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{:.3}",
            csv_field(&r.name),
            csv_field(&m.models.join("|")),
            opt(m.n),
            opt(m.lambda),
            opt(m.a),
            opt(m.b),
            opt(m.mesh_nodes),
            r.lhs,
            r.rhs,
            r.margin,
            r.verdict.as_str(),
            r.runtime_ms
        );
    }
    s
}

pub fn to_json(reports: &[InequalityReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

/// Writes `report.json`, `results.csv` and one `<name>.tsv` per table.
pub fn write_outputs(dir: &Path, reports: &[InequalityReport], tables: &[SweepTable]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), to_json(reports))?;
    std::fs::write(dir.join("results.csv"), to_csv(reports))?;
    for t in tables {
        std::fs::write(dir.join(format!("{}.tsv", t.name)), t.to_tsv())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts() {
        let m = Metadata::default();
        let r = InequalityReport::new("x", 1.0, 1.005, Direction::Geq, 0.01, "", m.clone(), true);
        assert_eq!(r.verdict, Verdict::Pass);
        let r = InequalityReport::new("x", 1.0, 1.5, Direction::Geq, 0.01, "", m.clone(), true);
        assert_eq!(r.verdict, Verdict::Fail);
        let r = InequalityReport::new("x", 1.0, 0.5, Direction::Leq, 0.01, "", m.clone(), true);
        assert_eq!(r.verdict, Verdict::Fail);
        let r = InequalityReport::new("x", 1.0, 0.5, Direction::Geq, 0.01, "", m.clone(), false);
        assert_eq!(r.verdict, Verdict::Inconclusive);
        let r = InequalityReport::new("x", f64::NAN, 0.5, Direction::Eq, 0.01, "", m, true);
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn csv_shape() {
        let m = Metadata::model("hemisphere", 3).lambda(0.5).mesh(257);
        let r = InequalityReport::new("c", 2.0, 1.0, Direction::Geq, 0.01, "anchor", m, true);
        let csv = to_csv(&[r]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1].split(',').count(), 12);
        assert!(lines[1].starts_with("c,hemisphere,3,0.5,0.5,0.5,257,2,1,1,pass,"));
        assert_eq!(default_tolerance(1e-9), 1e-6);
    }
}
