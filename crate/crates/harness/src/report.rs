//! Ratio reports and their JSON / CSV serialisation.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, TheoremId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    /// `RHS = 0`: never divided.
    Skip,
    /// `LHS > 0` with `RHS = 0`, or a non-finite quantity.
    Violation,
}

/// One bank instance, optionally at one sweep value `x` (a height σ or λ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRow {
    pub id: usize,
    pub label: String,
    pub x: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: Option<f64>,
    pub status: Status,
    /// Index of the maximising ball of the left-hand side, when it is a sup over balls.
    pub argmax_ball: Option<usize>,
}

impl InstanceRow {
    pub fn new(id: usize, label: &str, x: Option<f64>, lhs: f64, rhs: f64, argmax_ball: Option<usize>) -> Self {
        let (ratio, status) = classify(lhs, rhs);
        Self { id, label: label.to_string(), x, lhs, rhs, ratio, status, argmax_ball }
    }
}

/// `(ratio, status)` for a left/right pair.
pub fn classify(lhs: f64, rhs: f64) -> (Option<f64>, Status) {
    if !lhs.is_finite() || !rhs.is_finite() {
        (None, Status::Violation)
    } else if rhs > 0.0 {
        (Some(lhs / rhs), Status::Ok)
    } else if lhs > 0.0 {
        (None, Status::Violation)
    } else {
        (None, Status::Skip)
    }
}

/// Aggregate over the bank at one value of a trend axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub axis: String,
    pub x: f64,
    pub max_ratio: f64,
    pub max_lhs: f64,
    pub argmax_instance: Option<usize>,
    /// Exploratory rows are reported but never asserted.
    #[serde(default)]
    pub exploratory: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, value: Option<f64>, tolerance: Option<f64>, detail: impl Into<String>) -> Self {
        Self { name: name.to_string(), passed, value, tolerance, detail: detail.into() }
    }

    /// `value < tolerance`.
    pub fn below(name: &str, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self::new(name, value < tolerance, Some(value), Some(tolerance), detail)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub rows: usize,
    pub skipped: usize,
    pub violations: usize,
    pub max_ratio: Option<f64>,
    pub min_ratio: Option<f64>,
    pub mean_ratio: Option<f64>,
    pub argmax_instance: Option<usize>,
}

impl Summary {
    pub fn of(rows: &[InstanceRow]) -> Self {
        let ratios: Vec<(usize, f64)> = rows.iter().filter_map(|r| r.ratio.map(|q| (r.id, q))).collect();
        let mut argmax = None;
        let mut max: Option<f64> = None;
        for &(id, q) in &ratios {
            if max.is_none_or(|m| q > m) {
                max = Some(q);
                argmax = Some(id);
            }
        }
        Self {
            rows: rows.len(),
            skipped: rows.iter().filter(|r| r.status == Status::Skip).count(),
            violations: rows.iter().filter(|r| r.status == Status::Violation).count(),
            max_ratio: max,
            min_ratio: ratios.iter().map(|r| r.1).reduce(f64::min),
            mean_ratio: (!ratios.is_empty()).then(|| ratios.iter().map(|r| r.1).sum::<f64>() / ratios.len() as f64),
            argmax_instance: argmax,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub theorem: TheoremId,
    pub config: ExperimentConfig,
    /// Largest measured constant: max ratio over the rows, or over the trend
    /// rows for the endpoint theorems.
    pub measured_constant: Option<f64>,
    pub rows: Vec<InstanceRow>,
    pub trends: Vec<TrendRow>,
    pub summary: Summary,
    pub checks: Vec<Check>,
}

impl RatioReport {
    pub fn empty(config: ExperimentConfig) -> Self {
        Self {
            theorem: config.theorem,
            config,
            measured_constant: None,
            rows: Vec::new(),
            trends: Vec::new(),
            summary: Summary::default(),
            checks: Vec::new(),
        }
    }

    /// Whether every check passed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialise")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn instances_csv(&self) -> String {
        let mut s = String::from("id,label,x,lhs,rhs,ratio,status,argmax_ball\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{:e},{:e},{},{},{}",
                r.id,
                r.label,
                opt(r.x),
                r.lhs,
                r.rhs,
                opt(r.ratio),
                status_str(r.status),
                r.argmax_ball.map(|b| b.to_string()).unwrap_or_default()
            );
        }
        s
    }

    /// One block per trend axis: `axis,x,max_ratio,max_lhs`.
    pub fn plot_csv(&self) -> String {
        let mut s = String::from("axis,x,max_ratio,max_lhs,exploratory\n");
        for t in &self.trends {
            let _ = writeln!(s, "{},{:e},{:e},{:e},{}", t.axis, t.x, t.max_ratio, t.max_lhs, t.exploratory);
        }
        s
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:e}")).unwrap_or_default()
}

fn status_str(s: Status) -> &'static str {
    match s {
        Status::Ok => "ok",
        Status::Skip => "skip",
        Status::Violation => "violation",
    }
}

/// Writes `summary.json`, `instances.csv` and `plot.csv` into `dir`.
pub fn emit_report(r: &RatioReport, dir: impl AsRef<Path>) -> std::io::Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    fs::write(dir.join("summary.json"), r.to_json() + "\n")?;
    fs::write(dir.join("instances.csv"), r.instances_csv())?;
    fs::write(dir.join("plot.csv"), r.plot_csv())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ExperimentConfig {
        ExperimentConfig::new(TheoremId::Strong, 1, 64)
    }

    #[test]
    fn classification() {
        assert_eq!(classify(1.0, 2.0), (Some(0.5), Status::Ok));
        assert_eq!(classify(0.0, 0.0), (None, Status::Skip));
        assert_eq!(classify(1.0, 0.0), (None, Status::Violation));
        assert_eq!(classify(f64::NAN, 1.0).1, Status::Violation);
    }

    #[test]
    fn empty_report_is_valid_json() {
        let r = RatioReport::empty(cfg());
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["rows"].as_array().unwrap().len(), 0);
        assert!(r.passed());
    }

    #[test]
    fn one_row_csv() {
        let mut r = RatioReport::empty(cfg());
        r.rows.push(InstanceRow::new(0, "bump", None, 1.5, 3.0, Some(4)));
        let csv = r.instances_csv();
        assert_eq!(csv.lines().count(), 2);
        assert_eq!(csv.lines().nth(1).unwrap(), "0,bump,,1.5e0,3e0,5e-1,ok,4");
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut r = RatioReport::empty(cfg());
        r.rows.push(InstanceRow::new(3, "step", Some(0.1), 0.1 + 0.2, 1.0 / 3.0, None));
        r.rows.push(InstanceRow::new(4, "zero", None, 0.0, 0.0, None));
        r.trends.push(TrendRow { axis: "grid-N".into(), x: 256.0, max_ratio: std::f64::consts::PI, max_lhs: 1e-300, argmax_instance: Some(3), exploratory: false });
        r.summary = Summary::of(&r.rows);
        r.checks.push(Check::below("drift", 0.01, 0.15, "x"));
        let back = RatioReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), r.to_json());
    }

    #[test]
    fn emit_writes_three_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = RatioReport::empty(cfg());
        r.rows.push(InstanceRow::new(0, "bump", None, 1.0, 2.0, None));
        emit_report(&r, dir.path()).unwrap();
        for f in ["summary.json", "instances.csv", "plot.csv"] {
            assert!(dir.path().join(f).exists());
        }
        let text = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
        assert_eq!(RatioReport::from_json(&text).unwrap(), r);
    }

    #[test]
    fn summary_statistics() {
        let rows = vec![
            InstanceRow::new(0, "a", None, 1.0, 2.0, None),
            InstanceRow::new(1, "b", None, 3.0, 2.0, None),
            InstanceRow::new(2, "c", None, 0.0, 0.0, None),
        ];
        let s = Summary::of(&rows);
        assert_eq!((s.rows, s.skipped, s.violations), (3, 1, 0));
        assert_eq!(s.max_ratio, Some(1.5));
        assert_eq!(s.min_ratio, Some(0.5));
        assert_eq!(s.mean_ratio, Some(1.0));
        assert_eq!(s.argmax_instance, Some(1));
    }
}
