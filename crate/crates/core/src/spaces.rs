//! Morrey-type norms `M^{p,θ}(w)`, their weak and `L log L` variants, weighted
//! Lebesgue norms, and growth-function diagnostics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{sum_over, BallFamily, FamilySup, GridFunction};
use crate::scalar::{log_plus, Real};
use crate::weights::Weight;

/// A growth function `θ : (0, ∞) → (0, ∞)` applied to measures `w(B)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GrowthFunction {
    /// `θ ≡ 1`.
    ConstantOne,
    /// `θ(ξ) = ξ^κ`.
    Power { kappa: f64 },
    /// `θ(ξ) = ξ^κ (1 + log⁺ ξ)^γ`.
    PowerLog { kappa: f64, gamma: f64 },
    /// `θ(ξ) = Θ(ξ^{1/n} / 2)` with `Θ(r) = r^λ`, i.e. `θ(|B(x,r)|) = Θ(r)` when
    /// `|B| = (2r)^n`.
    Radial { lambda: f64, dim: usize },
}

impl GrowthFunction {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::NotGrowthFunction(m));
        match *self {
            Self::ConstantOne => Ok(()),
            Self::Power { kappa } | Self::PowerLog { kappa, .. } if !(0.0..1.0).contains(&kappa) => {
                bad(format!("κ = {kappa} outside [0, 1)"))
            }
            Self::PowerLog { gamma, .. } if !(gamma >= 0.0) => bad(format!("γ = {gamma} is negative")),
            Self::Radial { lambda, dim } if !(lambda >= 0.0) || !(dim == 1 || dim == 2) => {
                bad(format!("radial Θ needs λ >= 0 and n in {{1, 2}}, got λ = {lambda}, n = {dim}"))
            }
            _ => Ok(()),
        }
    }

    pub fn eval<T: Real>(&self, xi: T) -> T {
        match *self {
            Self::ConstantOne => T::one(),
            Self::Power { kappa } => xi.powf(T::lit(kappa)),
            Self::PowerLog { kappa, gamma } => xi.powf(T::lit(kappa)) * (T::one() + log_plus(xi)).powf(T::lit(gamma)),
            Self::Radial { lambda, dim } => {
                let r = xi.powf(T::one() / T::of(dim)) / T::lit(2.0);
                r.powf(T::lit(lambda))
            }
        }
    }
}

/// `max_{ξ' < ξ} [θ(ξ)/ξ^κ] [(ξ')^κ/θ(ξ')]` over ladder pairs.
pub fn dkappa_constant<T: Real>(theta: &GrowthFunction, kappa: T, ladder: &[T]) -> Result<T> {
    if ladder.len() < 16 {
        return Err(Error::InvalidLadder(format!("{} points, need at least 16", ladder.len())));
    }
    if !(ladder[0] > T::zero()) || ladder.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidLadder("ladder must be positive and strictly increasing".into()));
    }
    if ladder[ladder.len() - 1] / ladder[0] < T::lit(1e6) * (T::one() - T::lit(1e-12)) {
        return Err(Error::InvalidLadder("ladder spans fewer than 6 decades".into()));
    }
    let values: Vec<T> = ladder.iter().map(|&x| theta.eval(x)).collect();
    if values.iter().any(|&v| !(v > T::zero()) || !v.is_finite()) {
        return Err(Error::NotGrowthFunction("θ not positive on the ladder".into()));
    }
    if values.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::NotGrowthFunction("θ decreasing on the ladder".into()));
    }
    let mut running_min = T::infinity();
    let mut best = T::neg_infinity();
    for (&x, &v) in ladder.iter().zip(&values) {
        let q = v / x.powf(kappa);
        if running_min.is_finite() {
            best = best.max(q / running_min);
        }
        running_min = running_min.min(q);
    }
    Ok(best)
}

fn check_inputs<T: Real>(f: &GridFunction<T>, w: &Weight<T>, family: &BallFamily<T>) -> Result<()> {
    if f.grid() != w.grid() || f.grid() != family.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

fn reduce<T: Real>(terms: &[T]) -> FamilySup<T> {
    FamilySup::of(terms).expect("ball families are nonempty")
}

/// Per-ball `[(1/θ(w(B))) ∫_B |f|^p w]^{1/p}`.
pub fn morrey_terms<T: Real>(
    f: &GridFunction<T>,
    p: T,
    theta: &GrowthFunction,
    w: &Weight<T>,
    family: &BallFamily<T>,
) -> Result<Vec<T>> {
    if !(p >= T::one()) {
        return Err(Error::InvalidParameter(format!("Morrey exponent p = {p} < 1")));
    }
    check_inputs(f, w, family)?;
    theta.validate()?;
    let h = f.grid().cell_measure();
    let weighted: Vec<T> = if p == T::one() {
        f.values().iter().zip(w.values()).map(|(&v, &wv)| v.abs() * wv).collect()
    } else {
        f.values().iter().zip(w.values()).map(|(&v, &wv)| v.abs().powf(p) * wv).collect()
    };
    Ok(family
        .members()
        .par_iter()
        .map(|b| {
            let wb = sum_over(w.values(), b.cells()) * h;
            let inner = sum_over(&weighted, b.cells()) * h / theta.eval(wb);
            if p == T::one() {
                inner
            } else {
                inner.powf(T::one() / p)
            }
        })
        .collect())
}

/// `‖f‖_{M^{p,θ}(w)}` over the family, with the maximising ball.
pub fn morrey_norm<T: Real>(
    f: &GridFunction<T>,
    p: T,
    theta: &GrowthFunction,
    w: &Weight<T>,
    family: &BallFamily<T>,
) -> Result<FamilySup<T>> {
    Ok(reduce(&morrey_terms(f, p, theta, w, family)?))
}

/// Per-ball `sup_{σ>0} σ w({x ∈ B : |f(x)| > σ}) / θ(w(B))`, evaluated exactly
/// over the distinct values of `|f|` on `B`.
pub fn weak_morrey_terms<T: Real>(
    f: &GridFunction<T>,
    theta: &GrowthFunction,
    w: &Weight<T>,
    family: &BallFamily<T>,
) -> Result<Vec<T>> {
    check_inputs(f, w, family)?;
    theta.validate()?;
    let h = f.grid().cell_measure();
    Ok(family
        .members()
        .par_iter()
        .map(|b| {
            let mut pairs: Vec<(T, T)> = b.cells().iter().map(|i| (f.values()[i].abs(), w.values()[i])).collect();
            pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("grid functions are finite"));
            let wb = sum_over(w.values(), b.cells()) * h;
            // as σ increases to v, w(|f| > σ) tends to w(|f| >= v)
            let mut mass = T::zero();
            let mut best = T::zero();
            let mut k = 0;
            while k < pairs.len() {
                let v = pairs[k].0;
                while k < pairs.len() && pairs[k].0 == v {
                    mass = mass + pairs[k].1;
                    k += 1;
                }
                if v > T::zero() {
                    best = best.max(v * mass * h);
                }
            }
            best / theta.eval(wb)
        })
        .collect())
}

pub fn weak_morrey_norm<T: Real>(
    f: &GridFunction<T>,
    theta: &GrowthFunction,
    w: &Weight<T>,
    family: &BallFamily<T>,
) -> Result<FamilySup<T>> {
    Ok(reduce(&weak_morrey_terms(f, theta, w, family)?))
}

/// Per-ball `[Φ(w(B)/θ(w(B))) / w(B)] ∫_B |f| w` with `Φ(t) = t(1 + log⁺ t)`.
///
/// Evaluated as `(1 + log⁺ t)` times the `p = 1` Morrey term, so each term
/// dominates the corresponding [`morrey_terms`] entry in floating point too.
pub fn llogl_morrey_terms<T: Real>(
    f: &GridFunction<T>,
    theta: &GrowthFunction,
    w: &Weight<T>,
    family: &BallFamily<T>,
) -> Result<Vec<T>> {
    let base = morrey_terms(f, T::one(), theta, w, family)?;
    let h = f.grid().cell_measure();
    Ok(family
        .members()
        .par_iter()
        .zip(base)
        .map(|(b, m)| {
            let wb = sum_over(w.values(), b.cells()) * h;
            (T::one() + log_plus(wb / theta.eval(wb))) * m
        })
        .collect())
}

pub fn llogl_morrey_norm<T: Real>(
    f: &GridFunction<T>,
    theta: &GrowthFunction,
    w: &Weight<T>,
    family: &BallFamily<T>,
) -> Result<FamilySup<T>> {
    Ok(reduce(&llogl_morrey_terms(f, theta, w, family)?))
}

/// `(∫ |f|^p w)^{1/p}` over the whole grid.
pub fn lp_norm<T: Real>(f: &GridFunction<T>, p: T, w: &Weight<T>) -> Result<T> {
    if !(p >= T::one()) {
        return Err(Error::InvalidParameter(format!("Lebesgue exponent p = {p} < 1")));
    }
    if f.grid() != w.grid() {
        return Err(Error::GridMismatch);
    }
    let h = f.grid().cell_measure();
    let acc: T = f.values().iter().zip(w.values()).map(|(&v, &wv)| v.abs().powf(p) * wv).sum();
    Ok((acc * h).powf(T::one() / p))
}

/// Weak `L^1_w` norm `sup_σ σ w({|f| > σ})` over the whole grid.
pub fn weak_l1_norm<T: Real>(f: &GridFunction<T>, w: &Weight<T>) -> Result<T> {
    if f.grid() != w.grid() {
        return Err(Error::GridMismatch);
    }
    let mut pairs: Vec<(T, T)> = f.values().iter().map(|v| v.abs()).zip(w.values().iter().copied()).collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("grid functions are finite"));
    let h = f.grid().cell_measure();
    let (mut mass, mut best, mut k) = (T::zero(), T::zero(), 0);
    while k < pairs.len() {
        let v = pairs[k].0;
        while k < pairs.len() && pairs[k].0 == v {
            mass = mass + pairs[k].1;
            k += 1;
        }
        if v > T::zero() {
            best = best.max(v * mass * h);
        }
    }
    Ok(best)
}
