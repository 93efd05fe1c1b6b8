//! Ready-made configurations: a desk-scale preset per theorem and the
//! corollary presets, which pin `θ` and/or `w` on top of a theorem preset.

use serde::{Deserialize, Serialize};
use sqfn_core::GrowthFunction;

use crate::config::{ConfigError, ExperimentConfig, SymbolSpec, TheoremId, WeightSpec};

/// Desk-scale preset for `theorem` on a 1-D grid of `N = 256` cells.
///
/// Strong-type statements use `p = 2`, `w = |x|^{1/2}`, `θ(ξ) = ξ^{0.3}`; the
/// `p = 1` statements use the `A_1` weight `|x|^{-1/2}`; theorem B uses the
/// non-`A_p` weight `|x|^{3/2}`. Commutators use `b = log |x|`.
pub fn theorem_preset(theorem: TheoremId) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(theorem, 1, 256);
    c.theta = GrowthFunction::Power { kappa: 0.3 };
    c.weight = match theorem {
        TheoremId::Strong | TheoremId::CommutatorStrong | TheoremId::CommutatorLebesgue => {
            WeightSpec::Power { a: 0.5, center: vec![0.0] }
        }
        TheoremId::ArbitraryWeight => WeightSpec::Power { a: 1.5, center: vec![0.0] },
        _ => WeightSpec::Power { a: -0.5, center: vec![0.0] },
    };
    if theorem.uses_commutator() {
        c.symbol = Some(SymbolSpec::LogAbs { center: vec![0.0] });
    }
    if theorem.is_sigma_swept() || theorem == TheoremId::ArbitraryWeight {
        c.refine = false;
    }
    c
}

/// How a corollary specialises its theorem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Specialisation {
    /// `θ(ξ) = ξ^κ`, weight kept: the weighted Morrey space `L^{p,κ}(w)`.
    WeightedMorrey { kappa: f64 },
    /// `w ≡ 1`, growth function kept: the unweighted `M^{p,θ}`.
    Unweighted,
    /// `w ≡ 1`, `θ(|B(x,r)|) = r^λ`: the Morrey space `L^{p,Θ}` with `Θ(r) = r^λ`.
    Radial { lambda: f64 },
}

/// A corollary: one of the Morrey-scale theorems (1, 2, 3, 5) with a
/// specialisation applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corollary {
    pub theorem: TheoremId,
    pub specialisation: Specialisation,
}

impl Corollary {
    /// The twelve corollaries at representative parameters: `κ = 0.3`,
    /// `θ(ξ) = ξ^{0.3}(1 + log⁺ ξ)` for the unweighted case, `λ = n/2`.
    pub fn all(dim: usize) -> Vec<Corollary> {
        let specs = [
            Specialisation::WeightedMorrey { kappa: 0.3 },
            Specialisation::Unweighted,
            Specialisation::Radial { lambda: 0.5 * dim as f64 },
        ];
        let theorems = [TheoremId::Strong, TheoremId::Weak, TheoremId::CommutatorStrong, TheoremId::CommutatorMorreyEndpoint];
        specs
            .iter()
            .flat_map(|&s| theorems.iter().map(move |&t| Corollary { theorem: t, specialisation: s }))
            .collect()
    }

    pub fn name(&self) -> String {
        let s = match self.specialisation {
            Specialisation::WeightedMorrey { .. } => "weighted-morrey",
            Specialisation::Unweighted => "unweighted",
            Specialisation::Radial { .. } => "radial-morrey",
        };
        format!("{s}/{}", self.theorem)
    }

    /// `base` with the theorem set and `θ`, `w` pinned.
    pub fn apply(&self, base: &ExperimentConfig) -> Result<ExperimentConfig, ConfigError> {
        if !matches!(
            self.theorem,
            TheoremId::Strong | TheoremId::Weak | TheoremId::CommutatorStrong | TheoremId::CommutatorMorreyEndpoint
        ) {
            return Err(ConfigError::Invalid(format!("theorem {} has no Morrey-scale corollary", self.theorem)));
        }
        let mut c = base.clone();
        c.theorem = self.theorem;
        match self.specialisation {
            Specialisation::WeightedMorrey { kappa } => c.theta = GrowthFunction::Power { kappa },
            Specialisation::Unweighted => {
                c.weight = WeightSpec::Constant { c: 1.0 };
                if base.theta == GrowthFunction::ConstantOne {
                    c.theta = GrowthFunction::PowerLog { kappa: 0.3, gamma: 1.0 };
                }
            }
            Specialisation::Radial { lambda } => {
                c.weight = WeightSpec::Constant { c: 1.0 };
                c.theta = GrowthFunction::Radial { lambda, dim: base.grid.dim };
            }
        }
        if self.theorem.uses_commutator() && c.symbol.is_none() {
            c.symbol = Some(SymbolSpec::LogAbs { center: Vec::new() });
        }
        c.validate()?;
        Ok(c)
    }

    /// The corollary's configuration built on its theorem's desk preset.
    pub fn preset(&self) -> Result<ExperimentConfig, ConfigError> {
        self.apply(&theorem_preset(self.theorem))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theorems::run_theorem_check;

    #[test]
    fn theorem_presets_validate() {
        for t in TheoremId::ALL {
            theorem_preset(t).validate().unwrap();
        }
    }

    #[test]
    fn twelve_corollaries_validate() {
        let all = Corollary::all(1);
        assert_eq!(all.len(), 12);
        for c in &all {
            c.preset().unwrap();
        }
        let bad = Corollary { theorem: TheoremId::CommutatorLebesgue, specialisation: Specialisation::Unweighted };
        assert!(bad.preset().is_err());
    }

    #[test]
    fn preset_path_matches_general_path() {
        let mut base = theorem_preset(TheoremId::Strong);
        base.grid.per_axis = 64;
        base.components = 2;
        base.family_size = 2;
        base.instances = 3;
        base.refine = false;
        let cor = Corollary { theorem: TheoremId::Strong, specialisation: Specialisation::Radial { lambda: 0.5 } };
        let via_preset = run_theorem_check(&cor.apply(&base).unwrap()).unwrap();
        let mut general = base.clone();
        general.weight = WeightSpec::Constant { c: 1.0 };
        general.theta = GrowthFunction::Radial { lambda: 0.5, dim: 1 };
        let via_general = run_theorem_check(&general).unwrap();
        assert_eq!(via_preset.to_json(), via_general.to_json());
    }
}
