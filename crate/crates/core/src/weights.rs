//! Weights: Muckenhoupt and reverse Hölder characteristics over a ball family,
//! the `A_∞` exponent fit, doubling and growth diagnostics, dual weights and the
//! Hardy–Littlewood maximal function.
//!
//! Every characteristic is a finite-family, finite-grid number. Class
//! membership is read off from how these numbers behave under refinement.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{sum_over, BallFamily, FamilySup, Grid, GridFunction, Point, Region};
use crate::scalar::Real;

/// A strictly positive weight on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight<T> {
    w: GridFunction<T>,
}

impl<T: Real> Weight<T> {
    pub fn new(w: GridFunction<T>) -> Result<Self> {
        if let Some(i) = w.values().iter().position(|&v| !(v > T::zero())) {
            return Err(Error::NonPositiveWeight(i));
        }
        Ok(Self { w })
    }

    pub fn constant(grid: Grid<T>, c: T) -> Result<Self> {
        Self::new(GridFunction::constant(grid, c))
    }

    /// `|x - x_0|^a`. Fails if a sample is zero or not finite, which happens
    /// only when `x_0` is a cell centre.
    pub fn power(a: T, center: Point<T>, grid: Grid<T>) -> Result<Self> {
        let values: Vec<T> = (0..grid.cell_count()).map(|i| grid.distance(grid.center(i), center).powf(a)).collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Self::new(GridFunction::new(grid, values)?)
    }

    /// Piecewise constant along axis 0: `levels[k]` on `[breaks[k-1], breaks[k])`.
    pub fn step(levels: &[T], breaks: &[T], grid: Grid<T>) -> Result<Self> {
        if levels.len() != breaks.len() + 1 {
            return Err(Error::InvalidParameter("step weight needs one more level than breaks".into()));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("step breaks must increase".into()));
        }
        let f = GridFunction::from_fn(grid, |p| levels[breaks.iter().take_while(|&&b| p[0] >= b).count()])?;
        Self::new(f)
    }

    pub fn function(&self) -> &GridFunction<T> {
        &self.w
    }

    pub fn values(&self) -> &[T] {
        self.w.values()
    }

    pub fn grid(&self) -> &Grid<T> {
        self.w.grid()
    }

    /// `w(B)` for every member of `family`, in member order.
    pub fn ball_measures(&self, family: &BallFamily<T>) -> Vec<T> {
        let h = self.grid().cell_measure();
        family.members().par_iter().map(|b| sum_over(self.values(), b.cells()) * h).collect()
    }
}

/// `w(E) = ∫_E w`.
pub fn weighted_measure<T: Real>(w: &Weight<T>, region: &Region<T>) -> Result<T> {
    crate::grid::integrate(w.function(), region)
}

fn mean_over<T: Real>(values: &[T], region: &Region<T>) -> T {
    sum_over(values, region.cells()) / T::of(region.cell_count())
}

fn per_ball<T: Real>(family: &BallFamily<T>, f: impl Fn(&Region<T>) -> T + Sync + Send) -> Vec<T> {
    family.members().par_iter().map(f).collect()
}

fn sup_of<T: Real>(terms: Vec<T>) -> FamilySup<T> {
    FamilySup::of(&terms).expect("ball families are nonempty")
}

/// Per-ball `A_p` products `(avg_B w)^{1/p} (avg_B w^{-p'/p})^{1/p'}`.
pub fn ap_terms<T: Real>(w: &Weight<T>, p: T, family: &BallFamily<T>) -> Result<Vec<T>> {
    if !(p > T::one()) {
        return Err(Error::InvalidParameter(format!("A_p needs p > 1, got {p}")));
    }
    let dual_exp = -(T::one() / (p - T::one()));
    let dual: Vec<T> = w.values().iter().map(|&v| v.powf(dual_exp)).collect();
    let p_dual = p / (p - T::one());
    Ok(per_ball(family, |b| {
        mean_over(w.values(), b).powf(T::one() / p) * mean_over(&dual, b).powf(T::one() / p_dual)
    }))
}

pub fn ap_characteristic<T: Real>(w: &Weight<T>, p: T, family: &BallFamily<T>) -> Result<FamilySup<T>> {
    Ok(sup_of(ap_terms(w, p, family)?))
}

/// `sup_B avg_B w / min_B w`; the essential infimum of a simple function is the
/// minimum over its cells.
pub fn a1_characteristic<T: Real>(w: &Weight<T>, family: &BallFamily<T>) -> FamilySup<T> {
    sup_of(per_ball(family, |b| {
        let min = b.cells().iter().map(|i| w.values()[i]).fold(T::infinity(), T::min);
        mean_over(w.values(), b) / min
    }))
}

/// `sup_B (avg_B w^r)^{1/r} / avg_B w`.
pub fn reverse_holder_characteristic<T: Real>(w: &Weight<T>, r: T, family: &BallFamily<T>) -> Result<FamilySup<T>> {
    if !(r > T::one()) {
        return Err(Error::InvalidParameter(format!("reverse Hölder needs r > 1, got {r}")));
    }
    let pow: Vec<T> = w.values().iter().map(|&v| v.powf(r)).collect();
    Ok(sup_of(per_ball(family, |b| mean_over(&pow, b).powf(T::one() / r) / mean_over(w.values(), b))))
}

/// Result of fitting `w(E)/w(B) <= C (|E|/|B|)^δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AInftyFit<T> {
    /// Largest ladder exponent whose constant stays within the cap; zero if none does.
    pub delta: T,
    pub constant: T,
}

/// Cap on the fitted `A_∞` constant used by [`ainfty_delta`].
pub const AINFTY_CONSTANT_CAP: f64 = 2.0;

/// The exponent ladder `0.05, 0.10, ..., 1.00`.
pub fn delta_ladder<T: Real>() -> Vec<T> {
    (1..=20).map(|k| T::of(k) / T::lit(20.0)).collect()
}

/// [`ainfty_delta_capped`] with [`AINFTY_CONSTANT_CAP`].
pub fn ainfty_delta<T: Real>(w: &Weight<T>, family: &BallFamily<T>, subsets_per_ball: usize) -> Result<AInftyFit<T>> {
    ainfty_delta_capped(w, family, subsets_per_ball, T::lit(AINFTY_CONSTANT_CAP))
}

/// Fits the `A_∞` comparison on nested cell prefixes of each ball.
///
/// For each ball the subsets are the first `k` cells in index order, with `k`
/// log-spaced from one cell to the whole ball. For every ladder exponent `δ`
/// the constant `C(δ)` is the largest sampled ratio; `C` grows with `δ`, and the
/// fit reports the largest `δ` with `C(δ) <= cap`.
pub fn ainfty_delta_capped<T: Real>(
    w: &Weight<T>,
    family: &BallFamily<T>,
    subsets_per_ball: usize,
    cap: T,
) -> Result<AInftyFit<T>> {
    if subsets_per_ball < 4 {
        return Err(Error::InvalidParameter("need at least 4 subsets per ball".into()));
    }
    // (|E|/|B|, w(E)/w(B)) pairs
    let pairs: Vec<(T, T)> = family
        .members()
        .par_iter()
        .flat_map_iter(|b| {
            let cells: Vec<usize> = b.cells().iter().collect();
            let total = cells.len();
            let mut prefix = Vec::with_capacity(total + 1);
            let mut acc = T::zero();
            prefix.push(acc);
            for &i in &cells {
                acc = acc + w.values()[i];
                prefix.push(acc);
            }
            let mut sizes: Vec<usize> = crate::scalar::log_spaced(T::one(), T::of(total), subsets_per_ball)
                .into_iter()
                .map(|k| k.round().to_usize().unwrap_or(1).clamp(1, total))
                .collect();
            sizes.dedup();
            sizes.into_iter().map(move |k| (T::of(k) / T::of(total), prefix[k] / prefix[total])).collect::<Vec<_>>()
        })
        .collect();
    let constant_at = |delta: T| pairs.iter().map(|&(m, r)| r / m.powf(delta)).fold(T::zero(), T::max);
    let mut fit = AInftyFit { delta: T::zero(), constant: constant_at(T::zero()) };
    for delta in delta_ladder::<T>() {
        let c = constant_at(delta);
        if c <= cap {
            fit = AInftyFit { delta, constant: c };
        } else {
            break;
        }
    }
    Ok(fit)
}

/// `μ = w^{-p'/p} = w^{-1/(p-1)}`.
pub fn dual_weight<T: Real>(w: &Weight<T>, p: T) -> Result<Weight<T>> {
    if !(p > T::one()) {
        return Err(Error::InvalidParameter(format!("dual weight needs p > 1, got {p}")));
    }
    let e = -(T::one() / (p - T::one()));
    Weight::new(w.function().map(|v| v.powf(e))?)
}

/// `M(w)(x) = max { avg_B w : B in family, x in B }`.
pub fn hl_maximal<T: Real>(w: &Weight<T>, family: &BallFamily<T>) -> Result<GridFunction<T>> {
    maximal_function(w.function(), family)
}

/// Hardy–Littlewood maximal function of `|f|` over the family.
pub fn maximal_function<T: Real>(f: &GridFunction<T>, family: &BallFamily<T>) -> Result<GridFunction<T>> {
    let abs = f.abs();
    let averages = per_ball(family, |b| mean_over(abs.values(), b));
    let mut out = vec![T::neg_infinity(); f.grid().cell_count()];
    for (b, &avg) in family.members().iter().zip(&averages) {
        for i in b.cells().iter() {
            if avg > out[i] {
                out[i] = avg;
            }
        }
    }
    if let Some(i) = out.iter().position(|v| *v == T::neg_infinity()) {
        return Err(Error::UncoveredDomain(i));
    }
    GridFunction::new(*f.grid(), out)
}

/// `max w(2B)/w(B)` over members whose double stays inside the domain; `None`
/// when no member qualifies.
pub fn doubling_constant<T: Real>(w: &Weight<T>, family: &BallFamily<T>) -> Option<FamilySup<T>> {
    let grid = *w.grid();
    let two = T::lit(2.0);
    let terms = per_ball(family, |b| {
        if !grid.box_inside(b.center(), b.size() * two) {
            return T::neg_infinity();
        }
        let big = b.dilate(&grid, two);
        sum_over(w.values(), big.cells()) / sum_over(w.values(), b.cells())
    });
    FamilySup::of(&terms).filter(|s| s.value.is_finite())
}

/// `w(2^j B)` compared with `w(B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthRatio<T> {
    pub j: u32,
    /// `w(2^j B) / (2^{jn} w(B))`.
    pub nominal: T,
    /// `w(2^j B) / ((|2^j B| / |B|) w(B))`, normalised by the resolved measures.
    pub resolved: T,
}

/// Growth ratios for `j = 1..=j_max`, stopping once `2^j B` leaves the domain.
pub fn growth_ratios<T: Real>(w: &Weight<T>, ball: &Region<T>, j_max: u32) -> Vec<GrowthRatio<T>> {
    let grid = *w.grid();
    let base = sum_over(w.values(), ball.cells());
    let mut out = Vec::new();
    for j in 1..=j_max {
        let lambda = T::lit(2.0).powi(j as i32);
        if !grid.box_inside(ball.center(), ball.size() * lambda) {
            break;
        }
        let big = ball.dilate(&grid, lambda);
        let mass = sum_over(w.values(), big.cells());
        let nominal = mass / (lambda.powi(grid.dim() as i32) * base);
        let resolved = mass / ((T::of(big.cell_count()) / T::of(ball.cell_count())) * base);
        out.push(GrowthRatio { j, nominal, resolved });
    }
    out
}
