//! Uniform cell-centred grids on `[-L, L]^n`, regions resolved on them, and
//! midpoint quadrature.
//!
//! Cells are indexed row-major: in two dimensions cell `(i0, i1)` has flat
//! index `i0 * N + i1`, where axis 0 is the row. Functions are taken to vanish
//! outside the domain.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A point in the plane. One-dimensional grids only use coordinate 0.
pub type Point<T> = [T; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    dim: usize,
    half_extent: T,
    per_axis: usize,
}

impl<T: Real> Grid<T> {
    pub fn new(dim: usize, half_extent: T, per_axis: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{1, 2}}")));
        }
        if per_axis < 8 || !per_axis.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis {per_axis} must be a power of two >= 8"
            )));
        }
        if !(half_extent > T::zero()) || !half_extent.is_finite() {
            return Err(Error::InvalidGrid(format!("half extent {half_extent} must be positive")));
        }
        Ok(Self { dim, half_extent, per_axis })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_extent(&self) -> T {
        self.half_extent
    }

    pub fn per_axis(&self) -> usize {
        self.per_axis
    }

    /// Cell width `2L / N`.
    pub fn spacing(&self) -> T {
        T::lit(2.0) * self.half_extent / T::of(self.per_axis)
    }

    /// `h^n`.
    pub fn cell_measure(&self) -> T {
        self.spacing().powi(self.dim as i32)
    }

    pub fn cell_count(&self) -> usize {
        self.per_axis.pow(self.dim as u32)
    }

    /// `log2 N`, the finest dyadic level.
    pub fn max_level(&self) -> usize {
        self.per_axis.trailing_zeros() as usize
    }

    pub fn domain_measure(&self) -> T {
        (T::lit(2.0) * self.half_extent).powi(self.dim as i32)
    }

    /// Coordinate of the centre of cell `i` along one axis.
    #[inline]
    pub fn axis_coord(&self, i: usize) -> T {
        -self.half_extent + (T::of(i) + T::lit(0.5)) * self.spacing()
    }

    /// Splits a flat index into per-axis indices.
    #[inline]
    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.per_axis, idx % self.per_axis]
        }
    }

    #[inline]
    pub fn flat_index(&self, mi: [usize; 2]) -> usize {
        if self.dim == 1 {
            mi[0]
        } else {
            mi[0] * self.per_axis + mi[1]
        }
    }

    #[inline]
    pub fn center(&self, idx: usize) -> Point<T> {
        let mi = self.multi_index(idx);
        if self.dim == 1 {
            [self.axis_coord(mi[0]), T::zero()]
        } else {
            [self.axis_coord(mi[0]), self.axis_coord(mi[1])]
        }
    }

    #[inline]
    pub fn norm(&self, p: Point<T>) -> T {
        if self.dim == 1 {
            p[0].abs()
        } else {
            p[0].hypot(p[1])
        }
    }

    #[inline]
    pub fn distance(&self, a: Point<T>, b: Point<T>) -> T {
        self.norm([a[0] - b[0], a[1] - b[1]])
    }

    /// Index of the cell containing coordinate `x` along one axis, clamped to the domain.
    pub fn axis_cell_of(&self, x: T) -> usize {
        let raw = ((x + self.half_extent) / self.spacing()).floor();
        let max = T::of(self.per_axis - 1);
        raw.max(T::zero()).min(max).to_usize().unwrap_or(0)
    }

    /// Whether the closed box `center ± size` lies inside `[-L, L]^n`.
    pub fn box_inside(&self, center: Point<T>, size: T) -> bool {
        let slack = self.spacing() * T::lit(1e-9);
        (0..self.dim).all(|a| {
            center[a] - size >= -self.half_extent - slack && center[a] + size <= self.half_extent + slack
        })
    }
}

/// A set of cell indices stored as sorted, disjoint, half-open runs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CellSet {
    runs: Vec<(usize, usize)>,
}

impl CellSet {
    /// Builds from runs in any order; overlapping and adjacent runs are merged.
    pub fn from_runs(mut runs: Vec<(usize, usize)>) -> Self {
        runs.retain(|r| r.0 < r.1);
        runs.sort_unstable();
        let mut merged: Vec<(usize, usize)> = Vec::with_capacity(runs.len());
        for (a, b) in runs {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Self { runs: merged }
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        Self::from_runs(indices.into_iter().map(|i| (i, i + 1)).collect())
    }

    pub fn runs(&self) -> &[(usize, usize)] {
        &self.runs
    }

    pub fn len(&self) -> usize {
        self.runs.iter().map(|r| r.1 - r.0).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Cell indices in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.runs.iter().flat_map(|&(a, b)| a..b)
    }

    pub fn contains(&self, idx: usize) -> bool {
        match self.runs.binary_search_by(|r| r.0.cmp(&idx)) {
            Ok(_) => true,
            Err(0) => false,
            Err(k) => idx < self.runs[k - 1].1,
        }
    }

    pub fn is_disjoint(&self, other: &CellSet) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.runs.len() && j < other.runs.len() {
            let (a, b) = (self.runs[i], other.runs[j]);
            if a.1 <= b.0 {
                i += 1;
            } else if b.1 <= a.0 {
                j += 1;
            } else {
                return false;
            }
        }
        true
    }

    pub fn is_subset(&self, other: &CellSet) -> bool {
        self.runs.iter().all(|&(a, b)| {
            other.runs.iter().any(|&(c, d)| c <= a && b <= d)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionKind {
    /// Open Euclidean ball `|x - c| < r`.
    Ball,
    /// Open axis-parallel cube `max_a |x_a - c_a| < half side`.
    Cube,
    /// Dyadic cube of the grid's tree; `index` is its per-axis position at `level`.
    DyadicCube { level: usize, index: [usize; 2] },
    IndexSet,
}

/// A region of the domain together with its resolved cell set.
///
/// `size` is the radius for balls and the half side for cubes.
#[derive(Debug, Clone, PartialEq)]
pub struct Region<T> {
    kind: RegionKind,
    center: Point<T>,
    size: T,
    cells: CellSet,
}

impl<T: Real> Region<T> {
    pub fn ball(grid: &Grid<T>, center: Point<T>, radius: T) -> Self {
        let cells = resolve(grid, center, radius, |d: [T; 2]| {
            if grid.dim() == 1 {
                d[0].abs() < radius
            } else {
                d[0] * d[0] + d[1] * d[1] < radius * radius
            }
        });
        Self { kind: RegionKind::Ball, center, size: radius, cells }
    }

    pub fn cube(grid: &Grid<T>, center: Point<T>, half_side: T) -> Self {
        let cells = resolve(grid, center, half_side, |d: [T; 2]| {
            d[0].abs() < half_side && (grid.dim() == 1 || d[1].abs() < half_side)
        });
        Self { kind: RegionKind::Cube, center, size: half_side, cells }
    }

    /// The dyadic cube at `level` with per-axis position `index`.
    pub fn dyadic(grid: &Grid<T>, level: usize, index: [usize; 2]) -> Result<Self> {
        let max = grid.max_level();
        if level > max {
            return Err(Error::LevelOutOfRange { level, max });
        }
        let count = 1usize << level;
        let side = grid.per_axis() >> level;
        if index[0] >= count || (grid.dim() == 2 && index[1] >= count) {
            return Err(Error::InvalidParameter(format!("dyadic index {index:?} out of range")));
        }
        let n = grid.per_axis();
        let runs = if grid.dim() == 1 {
            vec![(index[0] * side, (index[0] + 1) * side)]
        } else {
            (index[0] * side..(index[0] + 1) * side)
                .map(|row| (row * n + index[1] * side, row * n + (index[1] + 1) * side))
                .collect()
        };
        let half = grid.half_extent() / T::of(count);
        let coord = |k: usize| -grid.half_extent() + (T::lit(2.0) * T::of(k) + T::one()) * half;
        let center = if grid.dim() == 1 {
            [coord(index[0]), T::zero()]
        } else {
            [coord(index[0]), coord(index[1])]
        };
        Ok(Self {
            kind: RegionKind::DyadicCube { level, index },
            center,
            size: half,
            cells: CellSet::from_runs(runs),
        })
    }

    pub fn index_set(center: Point<T>, size: T, cells: CellSet) -> Self {
        Self { kind: RegionKind::IndexSet, center, size, cells }
    }

    /// Every cell of the grid.
    pub fn whole_domain(grid: &Grid<T>) -> Self {
        Self::index_set([T::zero(); 2], grid.half_extent(), CellSet::from_runs(vec![(0, grid.cell_count())]))
    }

    pub fn kind(&self) -> RegionKind {
        self.kind
    }

    pub fn center(&self) -> Point<T> {
        self.center
    }

    pub fn size(&self) -> T {
        self.size
    }

    pub fn cells(&self) -> &CellSet {
        &self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Lebesgue measure of the resolved cells.
    pub fn measure(&self, grid: &Grid<T>) -> T {
        T::of(self.cells.len()) * grid.cell_measure()
    }

    /// `λ`-dilate with the same centre. Dyadic cubes and index sets dilate as cubes.
    pub fn dilate(&self, grid: &Grid<T>, lambda: T) -> Self {
        match self.kind {
            RegionKind::Ball => Self::ball(grid, self.center, self.size * lambda),
            _ => Self::cube(grid, self.center, self.size * lambda),
        }
    }

    /// Whether the geometric region lies inside the domain.
    pub fn inside_domain(&self, grid: &Grid<T>) -> bool {
        grid.box_inside(self.center, self.size)
    }
}

fn resolve<T: Real>(grid: &Grid<T>, center: Point<T>, size: T, inside: impl Fn([T; 2]) -> bool) -> CellSet {
    let n = grid.per_axis();
    let lo0 = grid.axis_cell_of(center[0] - size);
    let hi0 = grid.axis_cell_of(center[0] + size);
    let mut runs = Vec::new();
    if grid.dim() == 1 {
        let cells = (lo0..=hi0).filter(|&i| inside([grid.axis_coord(i) - center[0], T::zero()]));
        let v: Vec<usize> = cells.collect();
        if let (Some(&a), Some(&b)) = (v.first(), v.last()) {
            runs.push((a, b + 1));
        }
    } else {
        let lo1 = grid.axis_cell_of(center[1] - size);
        let hi1 = grid.axis_cell_of(center[1] + size);
        for i0 in lo0..=hi0 {
            let d0 = grid.axis_coord(i0) - center[0];
            let row: Vec<usize> = (lo1..=hi1).filter(|&i1| inside([d0, grid.axis_coord(i1) - center[1]])).collect();
            if let (Some(&a), Some(&b)) = (row.first(), row.last()) {
                runs.push((i0 * n + a, i0 * n + b + 1));
            }
        }
    }
    CellSet::from_runs(runs)
}

/// The `2^{n level}` dyadic cubes at `level`, in row-major order of their index.
pub fn dyadic_cubes<T: Real>(grid: &Grid<T>, level: usize) -> Result<Vec<Region<T>>> {
    let max = grid.max_level();
    if level > max {
        return Err(Error::LevelOutOfRange { level, max });
    }
    let count = 1usize << level;
    let mut out = Vec::with_capacity(count.pow(grid.dim() as u32));
    if grid.dim() == 1 {
        for a in 0..count {
            out.push(Region::dyadic(grid, level, [a, 0])?);
        }
    } else {
        for a in 0..count {
            for b in 0..count {
                out.push(Region::dyadic(grid, level, [a, b])?);
            }
        }
    }
    Ok(out)
}

/// Geometry used for the members of a [`BallFamily`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BallShape {
    #[default]
    Ball,
    Cube,
}

/// Generation policy for a [`BallFamily`].
///
/// Centres are the cell centres whose per-axis index is congruent to `N/2`
/// modulo `stride`; a stride dividing another therefore yields a superset of
/// centres.
#[derive(Debug, Clone, PartialEq)]
pub struct BallPolicy<T> {
    pub stride: usize,
    pub radii: Vec<T>,
    pub shape: BallShape,
}

impl<T: Real> BallPolicy<T> {
    pub fn new(stride: usize, radii: Vec<T>) -> Self {
        Self { stride, radii, shape: BallShape::Ball }
    }

    pub fn with_shape(mut self, shape: BallShape) -> Self {
        self.shape = shape;
        self
    }

    /// Radii `(k + 1/2) h` for `k = 1, 2, 4, ...` up to `L`: every resolved ball
    /// centred at a cell centre then has measure exactly `(2r)^n` when it lies
    /// inside the domain (for cubes; for 1-D balls too).
    pub fn cell_aligned_radii(grid: &Grid<T>, count: usize) -> Vec<T> {
        let h = grid.spacing();
        let mut out = Vec::new();
        let mut k = 1usize;
        while out.len() < count {
            let r = (T::of(k) + T::lit(0.5)) * h;
            if r > grid.half_extent() {
                break;
            }
            out.push(r);
            k *= 2;
        }
        out
    }
}

/// Finite family of balls standing in for "all balls".
///
/// Members are ordered by radius, then centre index, so the first maximiser of
/// any per-ball quantity is the smallest-radius, lexicographically-first ball.
#[derive(Debug, Clone, PartialEq)]
pub struct BallFamily<T> {
    grid: Grid<T>,
    members: Vec<Region<T>>,
}

impl<T: Real> BallFamily<T> {
    pub fn generate(grid: &Grid<T>, policy: &BallPolicy<T>) -> Result<Self> {
        let n = grid.per_axis();
        if policy.stride == 0 || policy.stride > n {
            return Err(Error::InvalidPolicy(format!("stride {} outside 1..={n}", policy.stride)));
        }
        if policy.radii.is_empty() {
            return Err(Error::InvalidPolicy("radius bounds empty".into()));
        }
        let h = grid.spacing();
        let mut radii = policy.radii.clone();
        if radii.iter().any(|&r| !(r > h) || r > grid.half_extent() || !r.is_finite()) {
            return Err(Error::InvalidPolicy("radii must lie in (h, L]".into()));
        }
        radii.sort_by(|a, b| a.partial_cmp(b).expect("finite radii"));
        radii.dedup();
        let axis: Vec<usize> = (0..n).filter(|i| i % policy.stride == (n / 2) % policy.stride).collect();
        let centers: Vec<Point<T>> = if grid.dim() == 1 {
            axis.iter().map(|&i| [grid.axis_coord(i), T::zero()]).collect()
        } else {
            axis.iter()
                .flat_map(|&a| axis.iter().map(move |&b| (a, b)))
                .map(|(a, b)| [grid.axis_coord(a), grid.axis_coord(b)])
                .collect()
        };
        let mut members = Vec::with_capacity(radii.len() * centers.len());
        for &r in &radii {
            for &c in &centers {
                members.push(match policy.shape {
                    BallShape::Ball => Region::ball(grid, c, r),
                    BallShape::Cube => Region::cube(grid, c, r),
                });
            }
        }
        Ok(Self { grid: *grid, members })
    }

    /// A family from explicit regions. Empty regions are rejected.
    pub fn from_regions(grid: &Grid<T>, members: Vec<Region<T>>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidPolicy("empty family".into()));
        }
        if members.iter().any(|m| m.cells().is_empty()) {
            return Err(Error::EmptyRegion);
        }
        Ok(Self { grid: *grid, members })
    }

    /// Appends a region (for instance [`Region::whole_domain`]).
    pub fn with_region(mut self, region: Region<T>) -> Result<Self> {
        if region.cells().is_empty() {
            return Err(Error::EmptyRegion);
        }
        self.members.push(region);
        Ok(self)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn members(&self) -> &[Region<T>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Whether every member of `self` also occurs in `other`.
    pub fn is_subfamily_of(&self, other: &BallFamily<T>) -> bool {
        self.members.iter().all(|m| {
            other.members.iter().any(|o| o.kind == m.kind && o.center == m.center && o.size == m.size)
        })
    }
}

/// Supremum of a per-ball quantity over a family, with the first maximiser.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FamilySup<T> {
    pub value: T,
    /// Index into [`BallFamily::members`].
    pub ball: usize,
}

impl<T: Real> FamilySup<T> {
    /// Reduces per-ball terms; `None` for an empty list.
    pub fn of(terms: &[T]) -> Option<Self> {
        crate::scalar::first_max(terms.iter().copied()).map(|(ball, value)| Self { value, ball })
    }
}

/// Real samples on a [`Grid`]; always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    pub fn new(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.cell_count(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid<T>, f: impl Fn(Point<T>) -> T) -> Result<Self> {
        let values = (0..grid.cell_count()).map(|i| f(grid.center(i))).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self { grid, values: vec![T::zero(); grid.cell_count()] }
    }

    pub fn constant(grid: Grid<T>, c: T) -> Self {
        Self { grid, values: vec![c; grid.cell_count()] }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Self::new(self.grid, self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: T) -> Result<Self> {
        self.map(|v| c * v)
    }

    pub fn abs(&self) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v.abs()).collect() }
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Shift by whole cells along axis 0; vacated cells become zero.
    pub fn shift_cells(&self, by: isize) -> Self {
        let n = self.grid.per_axis() as isize;
        let mut values = vec![T::zero(); self.values.len()];
        for (idx, slot) in values.iter_mut().enumerate() {
            let mut mi = self.grid.multi_index(idx);
            let src = mi[0] as isize - by;
            if (0..n).contains(&src) {
                mi[0] = src as usize;
                *slot = self.values[self.grid.flat_index(mi)];
            }
        }
        Self { grid: self.grid, values }
    }

    /// Serialises as a header line `n,N,L` followed by one value per line.
    pub fn to_csv_string(&self) -> String {
        let mut s = String::with_capacity(self.values.len() * 24);
        let _ = writeln!(s, "{},{},{}", self.grid.dim(), self.grid.per_axis(), self.grid.half_extent());
        for v in &self.values {
            let _ = writeln!(s, "{v}");
        }
        s
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Csv("missing header".into()))?;
        let parts: Vec<&str> = header.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Csv(format!("header must be n,N,L, got {header:?}")));
        }
        let dim: usize = parts[0].parse().map_err(|_| Error::Csv(format!("bad n {:?}", parts[0])))?;
        let per_axis: usize = parts[1].parse().map_err(|_| Error::Csv(format!("bad N {:?}", parts[1])))?;
        let half: T = parts[2].parse().map_err(|_| Error::Csv(format!("bad L {:?}", parts[2])))?;
        let grid = Grid::new(dim, half, per_axis)?;
        let values = lines
            .enumerate()
            .map(|(i, l)| l.parse::<T>().map_err(|_| Error::Csv(format!("bad value on data line {}: {l:?}", i + 1))))
            .collect::<Result<Vec<T>>>()?;
        Self::new(grid, values)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> io::Result<()> {
        std::fs::write(path, self.to_csv_string())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Csv(e.to_string()))?;
        Self::from_csv_str(&text)
    }
}

/// `J` grid functions on one grid; the truncation of `(f_1, f_2, ...)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorGridFunction<T> {
    grid: Grid<T>,
    components: Vec<GridFunction<T>>,
}

impl<T: Real> VectorGridFunction<T> {
    pub fn new(components: Vec<GridFunction<T>>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidParameter("a vector function needs at least one component".into()))?;
        let grid = *first.grid();
        if components.iter().any(|c| *c.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, components })
    }

    pub fn scalar(f: GridFunction<T>) -> Self {
        Self { grid: *f.grid(), components: vec![f] }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn components(&self) -> &[GridFunction<T>] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn push(&mut self, f: GridFunction<T>) -> Result<()> {
        if *f.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        self.components.push(f);
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::InvalidParameter("component counts differ".into()));
        }
        let comps = self.components.iter().zip(&other.components).map(|(a, b)| a.add(b)).collect::<Result<_>>()?;
        Self::new(comps)
    }

    pub fn scale(&self, c: T) -> Result<Self> {
        Self::new(self.components.iter().map(|f| f.scale(c)).collect::<Result<_>>()?)
    }

    /// Pointwise `‖f(x)‖_{ℓ²}`.
    pub fn l2_norm(&self) -> GridFunction<T> {
        let values = (0..self.grid.cell_count())
            .map(|i| self.components.iter().map(|f| f.values[i] * f.values[i]).sum::<T>().sqrt())
            .collect();
        GridFunction { grid: self.grid, values }
    }
}

/// `∫_E f dx` by the midpoint rule: `h^n Σ_{cells in E} f`.
pub fn integrate<T: Real>(f: &GridFunction<T>, region: &Region<T>) -> Result<T> {
    if region.cells().is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(sum_over(f.values(), region.cells()) * f.grid().cell_measure())
}

/// Plain sum of `values` over a cell set, in ascending cell order.
pub(crate) fn sum_over<T: Real>(values: &[T], cells: &CellSet) -> T {
    let mut acc = T::zero();
    for &(a, b) in cells.runs() {
        for v in &values[a..b] {
            acc = acc + *v;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(n: usize) -> Grid<f64> {
        Grid::new(1, 1.0, n).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::<f64>::new(3, 1.0, 64).is_err());
        assert!(Grid::<f64>::new(1, 1.0, 4).is_err());
        assert!(Grid::<f64>::new(1, 1.0, 96).is_err());
        assert!(Grid::<f64>::new(1, -1.0, 64).is_err());
        let g = Grid::<f64>::new(2, 1.0, 16).unwrap();
        assert_eq!(g.cell_count(), 256);
        assert_eq!(g.spacing(), 0.125);
    }

    #[test]
    fn integrate_unit_on_ball() {
        let g = grid1(128);
        let one = GridFunction::constant(g, 1.0);
        let b = Region::ball(&g, [g.axis_coord(64), 0.0], 0.5);
        let v = integrate(&one, &b).unwrap();
        assert!((v - 1.0).abs() <= g.spacing(), "{v}");
        let zero = GridFunction::zeros(g);
        assert_eq!(integrate(&zero, &b).unwrap(), 0.0);
    }

    #[test]
    fn integrate_half_indicator_by_enumeration() {
        let g = grid1(256);
        let c = [g.axis_coord(100), 0.0];
        let b = Region::ball(&g, c, 0.3);
        let f = GridFunction::from_fn(g, |p| if p[0] > c[0] { 1.0 } else { 0.0 }).unwrap();
        let right = b.cells().iter().filter(|&i| g.center(i)[0] > c[0]).count();
        let v = integrate(&f, &b).unwrap();
        assert!((v - right as f64 * g.spacing()).abs() < 1e-14);
        assert!((v - b.measure(&g) / 2.0).abs() <= g.spacing());
    }

    #[test]
    fn empty_region_errors() {
        let g = grid1(64);
        let f = GridFunction::constant(g, 1.0);
        let empty = Region::index_set([0.0; 2], 0.0, CellSet::default());
        assert_eq!(integrate(&f, &empty), Err(Error::EmptyRegion));
    }

    #[test]
    fn dyadic_levels() {
        let g = grid1(64);
        let l0 = dyadic_cubes(&g, 0).unwrap();
        assert_eq!(l0.len(), 1);
        assert_eq!(l0[0].cell_count(), 64);
        let l1 = dyadic_cubes(&g, 1).unwrap();
        assert_eq!(l1[0].cells().runs(), &[(0, 32)]);
        assert_eq!(l1[1].cells().runs(), &[(32, 64)]);
        assert!((l1[0].center()[0] + 0.5).abs() < 1e-15);
        assert!(dyadic_cubes(&g, 7).is_err());
    }

    #[test]
    fn dyadic_tiling_and_refinement_2d() {
        let g = Grid::<f64>::new(2, 1.0, 16).unwrap();
        for level in 0..=g.max_level() {
            let cubes = dyadic_cubes(&g, level).unwrap();
            assert_eq!(cubes.len(), 1 << (2 * level));
            let mut seen = vec![0u8; g.cell_count()];
            for c in &cubes {
                for i in c.cells().iter() {
                    seen[i] += 1;
                }
            }
            assert!(seen.iter().all(|&s| s == 1), "level {level}");
            if level > 0 {
                let parents = dyadic_cubes(&g, level - 1).unwrap();
                for c in &cubes {
                    let n = parents.iter().filter(|p| c.cells().is_subset(p.cells())).count();
                    assert_eq!(n, 1);
                }
            }
        }
    }

    #[test]
    fn family_sizes_and_nesting() {
        let g = grid1(256);
        let single = BallFamily::generate(&g, &BallPolicy::new(256, vec![0.5])).unwrap();
        assert_eq!(single.len(), 1);
        let radii = crate::scalar::log_spaced(4.0 * g.spacing(), 1.0, 6);
        let fam = BallFamily::generate(&g, &BallPolicy::new(8, radii.clone())).unwrap();
        assert_eq!(fam.len(), (256 / 8) * 6);
        let finer = BallFamily::generate(&g, &BallPolicy::new(4, crate::scalar::log_spaced(4.0 * g.spacing(), 1.0, 11)))
            .unwrap();
        assert!(fam.is_subfamily_of(&finer));
        assert!(!finer.is_subfamily_of(&fam));
        assert!(BallFamily::generate(&g, &BallPolicy::new(8, vec![])).is_err());
        assert!(BallFamily::generate(&g, &BallPolicy::new(8, vec![g.spacing() / 2.0])).is_err());
    }

    #[test]
    fn cell_aligned_cube_measure() {
        let g = Grid::<f64>::new(2, 1.0, 32).unwrap();
        let radii = BallPolicy::cell_aligned_radii(&g, 4);
        let fam = BallFamily::generate(&g, &BallPolicy::new(4, radii).with_shape(BallShape::Cube)).unwrap();
        for m in fam.members().iter().filter(|m| m.inside_domain(&g)) {
            let expect = (2.0 * m.size()).powi(2);
            assert!((m.measure(&g) - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn dilation_keeps_center() {
        let g = grid1(128);
        let b = Region::ball(&g, [g.axis_coord(70), 0.0], 0.1);
        let d = b.dilate(&g, 2.0);
        assert_eq!(d.center(), b.center());
        assert_eq!(d.size(), 0.2);
        assert!(b.cells().is_subset(d.cells()));
    }

    #[test]
    fn csv_parse_errors() {
        assert!(GridFunction::<f64>::from_csv_str("").is_err());
        assert!(GridFunction::<f64>::from_csv_str("1,8\n").is_err());
        assert!(GridFunction::<f64>::from_csv_str("1,8,1\n1\n2\n").is_err());
        let ok = "1,8,1\n0\n1\n2\n3\n4\n5\n6\n7\n";
        let f = GridFunction::<f64>::from_csv_str(ok).unwrap();
        assert_eq!(f.values()[7], 7.0);
    }

    #[test]
    fn l2_norm_pointwise() {
        let g = grid1(8);
        let a = GridFunction::constant(g, 3.0);
        let b = GridFunction::constant(g, 4.0);
        let v = VectorGridFunction::new(vec![a, b]).unwrap();
        assert!(v.l2_norm().values().iter().all(|&x| x == 5.0));
    }
}
