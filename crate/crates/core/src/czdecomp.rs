//! Vector-valued Calderón–Zygmund decomposition at height `σ` over the dyadic
//! tree of a grid.
//!
//! Cube averages of `‖f⃗‖_{ℓ²}` come from a sum pyramid: every parent sum is the
//! floating-point sum of its children in a fixed order and every cube holds a
//! power-of-two number of cells, so averages divide exactly and
//! `child average <= 2^n · parent average` holds bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CellSet, Grid, GridFunction, Region, RegionKind, VectorGridFunction};
use crate::scalar::Real;

/// Pointwise `‖f⃗(x)‖_{ℓ²}`.
fn l2_values<T: Real>(fs: &VectorGridFunction<T>) -> Vec<T> {
    fs.l2_norm().into_values()
}

/// `sums[k][q]`: sum of `values` over the dyadic cube `q` (row-major index) at level `k`.
struct Pyramid<T> {
    sums: Vec<Vec<T>>,
    dim: usize,
}

impl<T: Real> Pyramid<T> {
    fn new(grid: &Grid<T>, values: &[T]) -> Self {
        let top = grid.max_level();
        let dim = grid.dim();
        let mut sums = vec![Vec::new(); top + 1];
        sums[top] = values.to_vec();
        for k in (0..top).rev() {
            let count = 1usize << k;
            let child = &sums[k + 1];
            let level: Vec<T> = if dim == 1 {
                (0..count).map(|a| child[2 * a] + child[2 * a + 1]).collect()
            } else {
                let cc = 2 * count;
                (0..count * count)
                    .map(|q| {
                        let (a, b) = (q / count, q % count);
                        let at = |da: usize, db: usize| child[(2 * a + da) * cc + 2 * b + db];
                        (at(0, 0) + at(0, 1)) + (at(1, 0) + at(1, 1))
                    })
                    .collect()
            };
            sums[k] = level;
        }
        Self { sums, dim }
    }

    fn flat(&self, level: usize, index: [usize; 2]) -> usize {
        if self.dim == 1 {
            index[0]
        } else {
            index[0] * (1usize << level) + index[1]
        }
    }

    fn sum(&self, level: usize, index: [usize; 2]) -> T {
        self.sums[level][self.flat(level, index)]
    }

    fn cells_at(&self, top: usize, level: usize) -> T {
        T::of(1usize << (self.dim * (top - level)))
    }
}

/// One selected cube `Q_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CzCube<T> {
    pub region: Region<T>,
    pub level: usize,
    pub index: [usize; 2],
    /// `(1/|Q|) ∫_Q ‖f⃗‖_{ℓ²}` from the pyramid.
    pub l2_average: T,
    /// Parent's `ℓ²` average (`<= σ`); the root's own average for the root.
    pub parent_average: T,
    /// Per-component averages `(1/|Q|) ∫_Q f_j`.
    pub component_averages: Vec<T>,
}

/// `f⃗ = g⃗ + Σ_i h⃗_i` at height `σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CzDecomposition<T> {
    pub sigma: T,
    pub max_level: usize,
    pub cubes: Vec<CzCube<T>>,
    pub good: VectorGridFunction<T>,
    /// `bad[i][j]`: values of `h_{ij}` on the cells of `Q_i`, in cell order.
    bad: Vec<Vec<Vec<T>>>,
    pub exceptional: CellSet,
    root_sum: T,
}

impl<T: Real> CzDecomposition<T> {
    /// `h_{ij}` as a grid function (zero off `Q_i`).
    pub fn bad_part(&self, cube: usize, component: usize) -> GridFunction<T> {
        let grid = *self.good.grid();
        let mut v = vec![T::zero(); grid.cell_count()];
        for (c, &val) in self.cubes[cube].region.cells().iter().zip(&self.bad[cube][component]) {
            v[c] = val;
        }
        GridFunction::new(grid, v).expect("finite")
    }

    /// `|E| = Σ |Q_i|`.
    pub fn exceptional_measure(&self) -> T {
        T::of(self.exceptional.len()) * self.good.grid().cell_measure()
    }

    /// `∫ ‖f⃗‖_{ℓ²}` from the pyramid root.
    pub fn total_mass(&self) -> T {
        self.root_sum * self.good.grid().cell_measure()
    }

    pub fn summary(&self) -> CzSummary {
        let h = self.good.grid().cell_measure();
        CzSummary {
            sigma: self.sigma.to_f64_lossy(),
            cube_count: self.cubes.len(),
            exceptional_measure: self.exceptional_measure().to_f64_lossy(),
            total_mass: self.total_mass().to_f64_lossy(),
            cubes: self
                .cubes
                .iter()
                .map(|c| CubeSummary {
                    level: c.level,
                    index: c.index,
                    measure: (T::of(c.region.cell_count()) * h).to_f64_lossy(),
                    l2_average: c.l2_average.to_f64_lossy(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeSummary {
    pub level: usize,
    pub index: [usize; 2],
    pub measure: f64,
    pub l2_average: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CzSummary {
    pub sigma: f64,
    pub cube_count: usize,
    pub exceptional_measure: f64,
    pub total_mass: f64,
    pub cubes: Vec<CubeSummary>,
}

fn children(dim: usize, index: [usize; 2]) -> Vec<[usize; 2]> {
    let [a, b] = index;
    if dim == 1 {
        vec![[2 * a, 0], [2 * a + 1, 0]]
    } else {
        vec![[2 * a, 2 * b], [2 * a, 2 * b + 1], [2 * a + 1, 2 * b], [2 * a + 1, 2 * b + 1]]
    }
}

/// Stopping-time walk: a cube is selected the first time its `ℓ²` average exceeds `σ`;
/// unselected cubes are split until `max_level`.
pub fn cz_decompose<T: Real>(fs: &VectorGridFunction<T>, sigma: T, max_level: usize) -> Result<CzDecomposition<T>> {
    if !(sigma > T::zero()) {
        return Err(Error::NonPositiveHeight);
    }
    let grid = *fs.grid();
    let top = grid.max_level();
    if max_level > top {
        return Err(Error::LevelOutOfRange { level: max_level, max: top });
    }
    let pyramid = Pyramid::new(&grid, &l2_values(fs));
    let root_sum = pyramid.sum(0, [0, 0]);
    let avg = |level: usize, index: [usize; 2]| pyramid.sum(level, index) / pyramid.cells_at(top, level);
    let root = avg(0, [0, 0]);
    if root > sigma {
        return Err(Error::HeightBelowRootAverage { average: root.to_f64_lossy(), height: sigma.to_f64_lossy() });
    }
    let mut selected = Vec::new();
    let mut stack = vec![(0usize, [0usize, 0usize])];
    while let Some((level, index)) = stack.pop() {
        if level == max_level {
            continue;
        }
        let parent = avg(level, index);
        // reversed so that the stack pops children in row-major order
        for child in children(grid.dim(), index).into_iter().rev() {
            let a = avg(level + 1, child);
            if a > sigma {
                selected.push((level + 1, child, a, parent));
            } else {
                stack.push((level + 1, child));
            }
        }
    }
    selected.sort_by_key(|&(level, index, _, _)| (level, index));

    let mut good: Vec<Vec<T>> = fs.components().iter().map(|f| f.values().to_vec()).collect();
    let mut cubes = Vec::with_capacity(selected.len());
    let mut bad = Vec::with_capacity(selected.len());
    let mut exceptional = Vec::new();
    for (level, index, l2_average, parent_average) in selected {
        let region = Region::dyadic(&grid, level, index)?;
        let count = T::of(region.cell_count());
        let mut component_averages = Vec::with_capacity(fs.len());
        let mut h_parts = Vec::with_capacity(fs.len());
        for (j, f) in fs.components().iter().enumerate() {
            let c = region.cells().iter().map(|i| f.values()[i]).sum::<T>() / count;
            h_parts.push(region.cells().iter().map(|i| f.values()[i] - c).collect());
            for i in region.cells().iter() {
                good[j][i] = c;
            }
            component_averages.push(c);
        }
        exceptional.extend(region.cells().runs().iter().copied());
        bad.push(h_parts);
        cubes.push(CzCube { region, level, index, l2_average, parent_average, component_averages });
    }
    let good = VectorGridFunction::new(good.into_iter().map(|v| GridFunction::new(grid, v)).collect::<Result<_>>()?)?;
    Ok(CzDecomposition {
        sigma,
        max_level,
        cubes,
        good,
        bad,
        exceptional: CellSet::from_runs(exceptional),
        root_sum,
    })
}

/// A failed check in [`cz_verify`]; `cube`/`component` are indices when applicable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CzFailure {
    pub check: String,
    pub cube: Option<usize>,
    pub component: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CzReport {
    pub cubes: usize,
    pub max_reconstruction_error: f64,
    pub max_cancellation_error: f64,
    /// Largest `‖g⃗‖ / avg‖f⃗‖` on the cubes.
    pub max_jensen_ratio: f64,
    /// Cells off `E` at the finest level that were checked against `σ`.
    pub resolved_cells_checked: usize,
    pub failures: Vec<CzFailure>,
}

impl CzReport {
    pub fn passes(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Relative rounding slack for the Jensen bound: the two sides are computed along
/// different summation paths.
fn jensen_slack<T: Real>(components: usize) -> T {
    T::of(4 * components + 8) * T::epsilon()
}

/// Checks reconstruction, cancellation, the cube bounds, the off-`E` bound and
/// the `L¹` mass bound.
pub fn cz_verify<T: Real>(d: &CzDecomposition<T>, fs: &VectorGridFunction<T>) -> CzReport {
    let grid = *fs.grid();
    let h = grid.cell_measure();
    let mut failures = Vec::new();
    let mut fail = |check: &str, cube: Option<usize>, component: Option<usize>, detail: String| {
        failures.push(CzFailure { check: check.into(), cube, component, detail })
    };
    let bound = T::lit(2.0).powi(grid.dim() as i32) * d.sigma;

    // (a) f = g + Σ h
    let mut recon = vec![Vec::new(); fs.len()];
    for (j, g) in d.good.components().iter().enumerate() {
        recon[j] = g.values().to_vec();
        for (i, cube) in d.cubes.iter().enumerate() {
            for (c, &v) in cube.region.cells().iter().zip(&d.bad[i][j]) {
                recon[j][c] = recon[j][c] + v;
            }
        }
    }
    let mut max_recon = 0.0f64;
    for (j, f) in fs.components().iter().enumerate() {
        for (a, b) in f.values().iter().zip(&recon[j]) {
            max_recon = max_recon.max((*a - *b).abs().to_f64_lossy());
        }
    }
    if max_recon > 1e-12 {
        fail("reconstruction", None, None, format!("max error {max_recon:e}"));
    }

    let mut max_cancel = 0.0f64;
    let mut max_jensen = 0.0f64;
    for (i, cube) in d.cubes.iter().enumerate() {
        // (b) ∫_Q h_ij = 0
        for j in 0..fs.len() {
            let integral = (d.bad[i][j].iter().copied().sum::<T>() * h).abs().to_f64_lossy();
            max_cancel = max_cancel.max(integral);
            if integral > 1e-12 {
                fail("cancellation", Some(i), Some(j), format!("∫h = {integral:e}"));
            }
            // (e) ‖h_ij‖_1 <= 2 ∫_Q |f_j|
            let mass: T = d.bad[i][j].iter().map(|v| v.abs()).sum();
            let cap: T = cube.region.cells().iter().map(|c| fs.components()[j].values()[c].abs()).sum();
            if !(mass <= T::lit(2.0) * cap) {
                fail("mass", Some(i), Some(j), format!("{mass} > 2·{cap}"));
            }
        }
        // (c) ‖g(x)‖ <= avg ‖f‖ <= 2^n σ, and σ < avg ‖f‖
        let g_norm = cube.component_averages.iter().map(|&c| c * c).sum::<T>().sqrt();
        max_jensen = max_jensen.max((g_norm / cube.l2_average).to_f64_lossy());
        if !(g_norm <= cube.l2_average * (T::one() + jensen_slack::<T>(fs.len()))) {
            fail("jensen", Some(i), None, format!("‖g‖ = {g_norm} > {}", cube.l2_average));
        }
        if !(cube.l2_average <= bound) || !(cube.l2_average > d.sigma) || !(cube.parent_average <= d.sigma) {
            fail("stopping-bounds", Some(i), None, format!("avg {} vs σ {}", cube.l2_average, d.sigma));
        }
        if !matches!(cube.region.kind(), RegionKind::DyadicCube { .. }) {
            fail("stopping-bounds", Some(i), None, "not a dyadic cube".into());
        }
    }
    for (i, a) in d.cubes.iter().enumerate() {
        for b in &d.cubes[i + 1..] {
            if !a.region.cells().is_disjoint(b.region.cells()) {
                fail("disjoint", Some(i), None, "overlapping cubes".into());
            }
        }
    }

    // (d) off E at single-cell resolution
    let mut resolved = 0;
    if d.max_level == grid.max_level() {
        let norms = d.good.l2_norm();
        for (c, &v) in norms.values().iter().enumerate() {
            if !d.exceptional.contains(c) {
                resolved += 1;
                if !(v <= d.sigma) {
                    fail("off-exceptional", None, None, format!("cell {c}: ‖g‖ = {v} > σ"));
                }
            }
        }
    }
    CzReport {
        cubes: d.cubes.len(),
        max_reconstruction_error: max_recon,
        max_cancellation_error: max_cancel,
        max_jensen_ratio: max_jensen,
        resolved_cells_checked: resolved,
        failures,
    }
}
