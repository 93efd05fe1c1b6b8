//! Experiment configuration and hypothesis validation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sqfn_core::{Grid, GridFunction, GrowthFunction, Weight};

/// Theorem selector, keyed by the identifiers accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoremId {
    /// Strong type on `M^{p,θ}(w)`, `w ∈ A_p`.
    #[serde(rename = "1")]
    Strong,
    /// Weak type `M^{1,θ}(w) → WM^{1,θ}(w)`, `w ∈ A_1`.
    #[serde(rename = "2")]
    Weak,
    /// Commutator, strong type on `M^{p,θ}(w)`.
    #[serde(rename = "3")]
    CommutatorStrong,
    /// Commutator, `L log L` endpoint into weak `L^1_w`.
    #[serde(rename = "4")]
    CommutatorEndpoint,
    /// Commutator, `L log L` endpoint on the Morrey scale.
    #[serde(rename = "5")]
    CommutatorMorreyEndpoint,
    /// Commutator on `L^p_w`.
    #[serde(rename = "4.1")]
    CommutatorLebesgue,
    /// Weak `L^1_w` bound for arbitrary weights with `M(w)` on the right.
    #[serde(rename = "B")]
    ArbitraryWeight,
}

impl TheoremId {
    pub const ALL: [TheoremId; 7] = [
        TheoremId::Strong,
        TheoremId::Weak,
        TheoremId::CommutatorStrong,
        TheoremId::CommutatorEndpoint,
        TheoremId::CommutatorMorreyEndpoint,
        TheoremId::CommutatorLebesgue,
        TheoremId::ArbitraryWeight,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::Strong => "1",
            TheoremId::Weak => "2",
            TheoremId::CommutatorStrong => "3",
            TheoremId::CommutatorEndpoint => "4",
            TheoremId::CommutatorMorreyEndpoint => "5",
            TheoremId::CommutatorLebesgue => "4.1",
            TheoremId::ArbitraryWeight => "B",
        }
    }

    pub fn uses_commutator(self) -> bool {
        matches!(
            self,
            TheoremId::CommutatorStrong
                | TheoremId::CommutatorEndpoint
                | TheoremId::CommutatorMorreyEndpoint
                | TheoremId::CommutatorLebesgue
        )
    }

    /// Endpoint theorems measured per height σ rather than as a single norm ratio.
    pub fn is_sigma_swept(self) -> bool {
        matches!(self, TheoremId::CommutatorEndpoint | TheoremId::CommutatorMorreyEndpoint)
    }

    fn default_p(self) -> f64 {
        match self {
            TheoremId::Strong | TheoremId::CommutatorStrong | TheoremId::CommutatorLebesgue => 2.0,
            _ => 1.0,
        }
    }

    fn weight_class(self) -> WeightClass {
        match self {
            TheoremId::Strong | TheoremId::CommutatorStrong | TheoremId::CommutatorLebesgue => WeightClass::Ap,
            TheoremId::Weak | TheoremId::CommutatorEndpoint | TheoremId::CommutatorMorreyEndpoint => WeightClass::A1,
            TheoremId::ArbitraryWeight => WeightClass::Any,
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| ConfigError::Invalid(format!("unknown theorem id {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum WeightClass {
    Ap,
    A1,
    Any,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config: {0}")]
    Invalid(String),
    #[error("hypothesis violated for theorem {theorem}: {detail}")]
    Hypothesis { theorem: TheoremId, detail: String },
    #[error(transparent)]
    Core(#[from] sqfn_core::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "one_usize")]
    pub dim: usize,
    pub per_axis: usize,
    #[serde(default = "one_f64")]
    pub half_extent: f64,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid, ConfigError> {
        Ok(Grid::new(self.dim, self.half_extent, self.per_axis)?)
    }
}

/// Weight bank entry, e.g. `{"kind":"power","a":0.5,"center":[0]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightSpec {
    Power {
        a: f64,
        #[serde(default)]
        center: Vec<f64>,
    },
    Constant {
        c: f64,
    },
    Step {
        levels: Vec<f64>,
        breaks: Vec<f64>,
    },
}

impl WeightSpec {
    pub fn build(&self, grid: &Grid) -> Result<Weight, ConfigError> {
        Ok(match self {
            WeightSpec::Power { a, center } => Weight::power(*a, point(center)?, *grid)?,
            WeightSpec::Constant { c } => Weight::constant(*grid, *c)?,
            WeightSpec::Step { levels, breaks } => Weight::step(levels, breaks, *grid)?,
        })
    }

    fn check(&self, class: WeightClass, p: f64, dim: usize) -> Result<(), String> {
        let n = dim as f64;
        match self {
            WeightSpec::Power { a, .. } => {
                if !(*a > -n) {
                    return Err(format!("|x|^{a} is not locally integrable in dimension {dim}"));
                }
                match class {
                    WeightClass::Ap if !(*a < n * (p - 1.0)) => {
                        Err(format!("|x|^{a} is not in A_{p}: need -{n} < a < {}", n * (p - 1.0)))
                    }
                    WeightClass::A1 if *a > 0.0 => Err(format!("|x|^{a} is not in A_1: need -{n} < a <= 0")),
                    _ => Ok(()),
                }
            }
            WeightSpec::Constant { c } if !(*c > 0.0 && c.is_finite()) => Err(format!("constant weight {c} must be positive")),
            WeightSpec::Step { levels, .. } if levels.iter().any(|l| !(*l > 0.0 && l.is_finite())) => {
                Err("step weight levels must be positive".into())
            }
            _ => Ok(()),
        }
    }
}

/// BMO symbol bank entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SymbolSpec {
    /// `log |x - center|`.
    LogAbs {
        #[serde(default)]
        center: Vec<f64>,
    },
    /// Piecewise constant along the first axis.
    Step {
        #[serde(default = "default_step_levels")]
        levels: Vec<f64>,
        #[serde(default = "default_step_breaks")]
        breaks: Vec<f64>,
    },
    Constant {
        #[serde(default = "one_f64")]
        c: f64,
    },
}

impl SymbolSpec {
    pub fn build(&self, grid: &Grid) -> Result<GridFunction, ConfigError> {
        Ok(match self {
            SymbolSpec::LogAbs { center } => {
                let c = point(center)?;
                GridFunction::from_fn(*grid, |p| grid.distance(p, c).ln())?
            }
            SymbolSpec::Step { levels, breaks } => {
                if levels.len() != breaks.len() + 1 || breaks.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(ConfigError::Invalid("step symbol needs increasing breaks and one more level".into()));
                }
                GridFunction::from_fn(*grid, |p| levels[breaks.iter().take_while(|&&b| p[0] >= b).count()])?
            }
            SymbolSpec::Constant { c } => GridFunction::constant(*grid, *c),
        })
    }
}

/// Heights for the endpoint theorems: `count` log-spaced values on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        sqfn_core::scalar::log_spaced(self.lo, self.hi, self.count)
    }
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self { lo: 0.01, hi: 10.0, count: 7 }
    }
}

/// One experiment. Every field but `theorem` and `grid` has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub theorem: TheoremId,
    #[serde(default = "one_f64")]
    pub alpha: f64,
    /// Defaults to 2 for the strong-type theorems and 1 for the others.
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default = "default_components")]
    pub components: usize,
    pub grid: GridSpec,
    #[serde(default = "default_weight")]
    pub weight: WeightSpec,
    #[serde(default = "default_theta")]
    pub theta: GrowthFunction,
    #[serde(default)]
    pub symbol: Option<SymbolSpec>,
    /// Size of the admissible kernel family (`C_α` stand-in).
    #[serde(default = "default_family")]
    pub family_size: usize,
    /// Number of radii in the ball family.
    #[serde(default = "default_radii")]
    pub ball_radii: usize,
    #[serde(default = "default_levels")]
    pub cone_levels: usize,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default)]
    pub seed: u64,
    /// Also run at `2N` and at twice the family size.
    #[serde(default = "yes")]
    pub refine: bool,
    /// Adds unasserted rows with the `M^{1,θ}(w)` right-hand side for theorem 5.
    #[serde(default)]
    pub exploratory: bool,
    #[serde(default)]
    pub out: Option<String>,
}

impl ExperimentConfig {
    /// A config with every default filled in.
    pub fn new(theorem: TheoremId, dim: usize, per_axis: usize) -> Self {
        Self {
            theorem,
            alpha: 1.0,
            p: None,
            components: default_components(),
            grid: GridSpec { dim, per_axis, half_extent: 1.0 },
            weight: default_weight(),
            theta: default_theta(),
            symbol: None,
            family_size: default_family(),
            ball_radii: default_radii(),
            cone_levels: default_levels(),
            sweep: SweepSpec::default(),
            instances: default_instances(),
            seed: 0,
            refine: true,
            exploratory: false,
            out: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn p(&self) -> f64 {
        self.p.unwrap_or_else(|| self.theorem.default_p())
    }

    /// Symbol used by the commutator theorems (`log |x|` unless configured).
    pub fn symbol(&self) -> SymbolSpec {
        self.symbol.clone().unwrap_or(SymbolSpec::LogAbs { center: Vec::new() })
    }

    /// Checks parameter ranges and the hypotheses of the selected theorem.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let hyp = |detail: String| ConfigError::Hypothesis { theorem: self.theorem, detail };
        let p = self.p();
        let dim = self.grid.dim;
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(hyp(format!("alpha = {} outside (0, 1]", self.alpha)));
        }
        match self.theorem.weight_class() {
            WeightClass::Ap if !(p > 1.0 && p.is_finite()) => return Err(hyp(format!("requires 1 < p < inf, got p = {p}"))),
            WeightClass::A1 | WeightClass::Any if p != 1.0 => return Err(hyp(format!("requires p = 1, got p = {p}"))),
            _ => {}
        }
        self.weight.check(self.theorem.weight_class(), p, dim).map_err(hyp)?;
        self.theta.validate().map_err(|e| hyp(e.to_string()))?;
        if let GrowthFunction::Radial { lambda, dim: d } = self.theta {
            if d != dim || lambda >= dim as f64 {
                return Err(hyp(format!("radial growth needs dim = {dim} and D(Θ) = 2^λ < 2^n, got λ = {lambda}")));
            }
        }
        if self.components == 0 {
            return Err(ConfigError::Invalid("components must be at least 1".into()));
        }
        if self.family_size == 0 {
            return Err(ConfigError::Invalid("family_size must be at least 1".into()));
        }
        if self.ball_radii == 0 {
            return Err(ConfigError::Invalid("ball_radii must be at least 1".into()));
        }
        if self.cone_levels < 8 {
            return Err(ConfigError::Invalid("cone_levels must be at least 8".into()));
        }
        if !(1..=crate::bank::BANK_SIZE).contains(&self.instances) {
            return Err(ConfigError::Invalid(format!("instances must lie in 1..={}", crate::bank::BANK_SIZE)));
        }
        let s = self.sweep;
        if !(s.lo > 0.0 && s.hi >= s.lo && s.hi.is_finite() && s.count >= 1) {
            return Err(ConfigError::Invalid("sweep needs 0 < lo <= hi and count >= 1".into()));
        }
        if self.grid.per_axis < 32 || !self.grid.per_axis.is_power_of_two() {
            return Err(ConfigError::Invalid("grid.per_axis must be a power of two >= 32".into()));
        }
        self.grid.build()?;
        Ok(())
    }
}

fn point(c: &[f64]) -> Result<[f64; 2], ConfigError> {
    match c {
        [] => Ok([0.0, 0.0]),
        [x] => Ok([*x, 0.0]),
        [x, y] => Ok([*x, *y]),
        _ => Err(ConfigError::Invalid("center must have at most two coordinates".into())),
    }
}

fn one_usize() -> usize {
    1
}
fn one_f64() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn default_components() -> usize {
    8
}
fn default_family() -> usize {
    8
}
fn default_radii() -> usize {
    6
}
fn default_levels() -> usize {
    16
}
fn default_instances() -> usize {
    crate::bank::BANK_SIZE
}
fn default_weight() -> WeightSpec {
    WeightSpec::Constant { c: 1.0 }
}
fn default_theta() -> GrowthFunction {
    GrowthFunction::ConstantOne
}
fn default_step_levels() -> Vec<f64> {
    vec![0.0, 1.0]
}
fn default_step_breaks() -> Vec<f64> {
    vec![0.0]
}
