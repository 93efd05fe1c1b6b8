//! One-parameter sweeps: a report row block per axis value.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sqfn_core::GrowthFunction;

use crate::config::{ConfigError, ExperimentConfig, SweepSpec, TheoremId, WeightSpec};
use crate::report::{Check, RatioReport, Summary, TrendRow};
use crate::theorems::{decreased, run_theorem_check, HEIGHT_DRIFT_TOL, STABILITY_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    GridN,
    FamilySize,
    /// Height σ of the endpoint theorems.
    Sigma,
    /// Level λ of theorem B (an alias of `sigma` for the endpoint theorems).
    Lambda,
    /// `θ(ξ) = ξ^κ` (keeps `γ` of a power-log growth function).
    Kappa,
    /// Exponent `a` of a power weight `|x - c|^a`.
    WeightExponent,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 6] = [
        SweepAxis::GridN,
        SweepAxis::FamilySize,
        SweepAxis::Sigma,
        SweepAxis::Lambda,
        SweepAxis::Kappa,
        SweepAxis::WeightExponent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::GridN => "grid-N",
            SweepAxis::FamilySize => "family-size",
            SweepAxis::Sigma => "sigma",
            SweepAxis::Lambda => "lambda",
            SweepAxis::Kappa => "kappa",
            SweepAxis::WeightExponent => "weight-exponent",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        SweepAxis::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| ConfigError::Invalid(format!("unknown sweep axis {s:?}")))
    }
}

fn whole(v: f64, what: &str) -> Result<usize, ConfigError> {
    if v >= 1.0 && v.fract() == 0.0 && v < 1e9 {
        Ok(v as usize)
    } else {
        Err(ConfigError::Invalid(format!("{what} must be a positive integer, got {v}")))
    }
}

/// `cfg` with the axis set to `v`; refinement passes are switched off.
pub fn at_value(cfg: &ExperimentConfig, axis: SweepAxis, v: f64) -> Result<ExperimentConfig, ConfigError> {
    let mut c = cfg.clone();
    c.refine = false;
    match axis {
        SweepAxis::GridN => c.grid.per_axis = whole(v, "grid-N")?,
        SweepAxis::FamilySize => c.family_size = whole(v, "family-size")?,
        SweepAxis::Sigma | SweepAxis::Lambda => {
            let ok = cfg.theorem.is_sigma_swept() || cfg.theorem == TheoremId::ArbitraryWeight;
            if !ok {
                return Err(ConfigError::Invalid(format!("theorem {} has no height to sweep", cfg.theorem)));
            }
            c.sweep = SweepSpec { lo: v, hi: v, count: 1 };
        }
        SweepAxis::Kappa => {
            c.theta = match cfg.theta {
                GrowthFunction::PowerLog { gamma, .. } => GrowthFunction::PowerLog { kappa: v, gamma },
                _ => GrowthFunction::Power { kappa: v },
            }
        }
        SweepAxis::WeightExponent => {
            c.weight = match &cfg.weight {
                WeightSpec::Power { center, .. } => WeightSpec::Power { a: v, center: center.clone() },
                _ => WeightSpec::Power { a: v, center: Vec::new() },
            }
        }
    }
    c.validate()?;
    Ok(c)
}

/// Runs `cfg` at each value in turn. Every value is validated before any
/// compute starts.
pub fn sweep(cfg: &ExperimentConfig, axis: SweepAxis, values: &[f64]) -> Result<RatioReport, ConfigError> {
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(ConfigError::Invalid("sweep values must be a nonempty list of finite numbers".into()));
    }
    let configs = values.iter().map(|&v| at_value(cfg, axis, v)).collect::<Result<Vec<_>, _>>()?;
    let mut out = RatioReport::empty(cfg.clone());
    let mut runs = Vec::with_capacity(values.len());
    for (c, &v) in configs.iter().zip(values) {
        let r = run_theorem_check(c)?;
        for chk in &r.checks {
            let mut chk = chk.clone();
            chk.name = format!("{}@{axis}={v}", chk.name);
            out.checks.push(chk);
        }
        for row in &r.rows {
            let mut row = row.clone();
            if row.x.is_none() {
                row.x = Some(v);
            }
            out.rows.push(row);
        }
        out.trends.push(TrendRow {
            axis: axis.to_string(),
            x: v,
            max_ratio: r.measured_constant.unwrap_or(0.0),
            max_lhs: r.rows.iter().map(|r| r.lhs).fold(0.0, f64::max),
            argmax_instance: r.summary.argmax_instance,
            exploratory: false,
        });
        runs.push(r);
    }
    let increasing = values.windows(2).all(|w| w[0] < w[1]);
    match axis {
        SweepAxis::FamilySize if increasing => {
            let decreases: usize = runs
                .windows(2)
                .map(|w| w[0].rows.iter().zip(&w[1].rows).filter(|(a, b)| decreased(a.lhs, b.lhs)).count())
                .sum();
            out.checks.push(Check::new(
                "lhs-nondecreasing",
                decreases == 0,
                Some(decreases as f64),
                Some(0.0),
                "row-to-row LHS decreases as the kernel family grows",
            ));
        }
        SweepAxis::GridN if runs.len() > 1 => {
            let drift = out
                .trends
                .windows(2)
                .map(|w| if w[0].max_ratio > 0.0 { (w[1].max_ratio / w[0].max_ratio - 1.0).abs() } else { 0.0 })
                .fold(0.0, f64::max);
            out.checks.push(Check::below("grid-drift", drift, STABILITY_TOL, "largest step-to-step change of the measured constant"));
        }
        SweepAxis::Sigma | SweepAxis::Lambda if runs.len() > 1 => {
            let qs: Vec<f64> = out.trends.iter().map(|t| t.max_ratio).collect();
            let hi = qs.iter().copied().fold(0.0, f64::max);
            let lo = qs.iter().copied().fold(f64::INFINITY, f64::min);
            let drift = if hi == 0.0 { 0.0 } else if lo > 0.0 { hi / lo - 1.0 } else { f64::INFINITY };
            out.checks.push(Check::below(&format!("{axis}-drift"), drift, HEIGHT_DRIFT_TOL, "max/min - 1 across the sweep"));
        }
        _ => {}
    }
    out.measured_constant = out.trends.iter().map(|t| t.max_ratio).reduce(f64::max);
    out.summary = Summary::of(&out.rows);
    Ok(out)
}
