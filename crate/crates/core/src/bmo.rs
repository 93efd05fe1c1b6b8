//! Ball averages, mean oscillation and BMO norms over a finite ball family,
//! with the John–Nirenberg and telescoping diagnostics.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{sum_over, BallFamily, FamilySup, GridFunction, Region};
use crate::orlicz::{luxemburg_of_samples, YoungFunction};
use crate::scalar::Real;
use crate::weights::Weight;

/// `b_B = (1/|B|) ∫_B b`.
pub fn ball_average<T: Real>(b: &GridFunction<T>, region: &Region<T>) -> Result<T> {
    if region.cells().is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(average(b.values(), region))
}

fn average<T: Real>(values: &[T], region: &Region<T>) -> T {
    sum_over(values, region.cells()) / T::of(region.cell_count())
}

/// `(1/|B|) ∫_B |b - m|`.
pub fn mean_deviation<T: Real>(b: &GridFunction<T>, region: &Region<T>, m: T) -> Result<T> {
    if region.cells().is_empty() {
        return Err(Error::EmptyRegion);
    }
    let acc: T = region.cells().iter().map(|i| (b.values()[i] - m).abs()).sum();
    Ok(acc / T::of(region.cell_count()))
}

/// `(1/|B|) ∫_B |b - b_B|`.
pub fn mean_oscillation<T: Real>(b: &GridFunction<T>, region: &Region<T>) -> Result<T> {
    if region.cells().is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(oscillation(b.values(), region))
}

/// Evaluated as `Σ |n b_i - S| / n²` so that no rounded average enters: on
/// integer-valued data the result is exact and shift-invariant.
fn oscillation<T: Real>(values: &[T], region: &Region<T>) -> T {
    let n = T::of(region.cell_count());
    let total = sum_over(values, region.cells());
    let acc: T = region.cells().iter().map(|i| (n * values[i] - total).abs()).sum();
    acc / (n * n)
}

/// Lower median of `b` over the cells of `region`.
pub fn ball_median<T: Real>(b: &GridFunction<T>, region: &Region<T>) -> Result<T> {
    if region.cells().is_empty() {
        return Err(Error::EmptyRegion);
    }
    let mut v: Vec<T> = region.cells().iter().map(|i| b.values()[i]).collect();
    v.sort_by(|a, b| a.partial_cmp(b).expect("grid functions are finite"));
    Ok(v[(v.len() - 1) / 2])
}

/// Per-ball mean oscillations, in member order.
pub fn oscillation_terms<T: Real>(b: &GridFunction<T>, family: &BallFamily<T>) -> Result<Vec<T>> {
    if b.grid() != family.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(family
        .members()
        .par_iter()
        .map(|ball| oscillation(b.values(), ball))
        .collect())
}

/// `‖b‖_* = sup_{B ∈ F} (1/|B|) ∫_B |b - b_B|`.
pub fn bmo_norm<T: Real>(b: &GridFunction<T>, family: &BallFamily<T>) -> Result<FamilySup<T>> {
    let terms = oscillation_terms(b, family)?;
    Ok(FamilySup::of(&terms).expect("ball families are nonempty"))
}

/// A symbol with its per-ball averages and BMO norm for one family.
#[derive(Debug, Clone, PartialEq)]
pub struct BmoFunction<T> {
    b: GridFunction<T>,
    averages: Vec<T>,
    norm: FamilySup<T>,
}

impl<T: Real> BmoFunction<T> {
    pub fn new(b: GridFunction<T>, family: &BallFamily<T>) -> Result<Self> {
        let norm = bmo_norm(&b, family)?;
        let averages = family.members().iter().map(|ball| average(b.values(), ball)).collect();
        Ok(Self { b, averages, norm })
    }

    pub fn function(&self) -> &GridFunction<T> {
        &self.b
    }

    /// `b_B` for each family member.
    pub fn averages(&self) -> &[T] {
        &self.averages
    }

    pub fn norm(&self) -> FamilySup<T> {
        self.norm
    }
}

/// `max_B ‖b - b_B‖_{exp L(w),B} / ‖b‖_*` over the family.
pub fn jn_exp_norm_check<T: Real>(b: &GridFunction<T>, family: &BallFamily<T>, w: &Weight<T>) -> Result<FamilySup<T>> {
    if w.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let star = bmo_norm(b, family)?.value;
    if star == T::zero() {
        return Err(Error::BmoNormZero);
    }
    let terms: Vec<T> = family
        .members()
        .par_iter()
        .map(|ball| {
            let avg = average(b.values(), ball);
            let dev: Vec<T> = ball.cells().iter().map(|i| b.values()[i] - avg).collect();
            let ws: Vec<T> = ball.cells().iter().map(|i| w.values()[i]).collect();
            luxemburg_of_samples(dev, Some(ws), YoungFunction::ExpComplement).map(|n| n / star)
        })
        .collect::<Result<_>>()?;
    Ok(FamilySup::of(&terms).expect("ball families are nonempty"))
}

/// `max_{1<=l<=l_max} |b_{2^{l+1}B} - b_B| / ((l+1) ‖b‖_*)`, with `‖b‖_*` taken over
/// `family`. A constant symbol reports 0.
pub fn telescoping_check<T: Real>(b: &GridFunction<T>, ball: &Region<T>, l_max: u32, family: &BallFamily<T>) -> Result<T> {
    let grid = *b.grid();
    let top = T::lit(2.0).powi(l_max as i32 + 1);
    if !grid.box_inside(ball.center(), ball.size() * top) {
        return Err(Error::DilateOutsideDomain);
    }
    let base = ball_average(b, ball)?;
    let star = bmo_norm(b, family)?.value;
    if star == T::zero() {
        return Ok(T::zero());
    }
    let mut worst = T::zero();
    for l in 1..=l_max {
        let big = ball.dilate(&grid, T::lit(2.0).powi(l as i32 + 1));
        let ratio = (average(b.values(), &big) - base).abs() / (T::of(l as usize + 1) * star);
        worst = worst.max(ratio);
    }
    Ok(worst)
}
