//! A finite verified surrogate for the admissible class `C_α`, its dilated
//! kernels, the cone quadrature, and the (vector-valued) intrinsic square
//! function together with its BMO commutator.
//!
//! Every member is `φ = s (ψ_1 - λ ψ_2)` for two bumps `ψ = (1 - |x - c|/r)^β_+`
//! supported in the unit ball. On each grid and scale the dilated kernel is
//! sampled from the closed form at cell centres and `λ` is re-solved so that the
//! discrete kernel has zero sum.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, Point, VectorGridFunction};
use crate::scalar::{log_spaced, Real};

/// `(1 - |x - c|/r)^β_+`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump<T> {
    pub center: Point<T>,
    pub radius: T,
    pub beta: i32,
}

impl<T: Real> Bump<T> {
    fn eval(&self, dim: usize, x: Point<T>) -> T {
        let mut d2 = T::zero();
        for k in 0..dim {
            let d = x[k] - self.center[k];
            d2 = d2 + d * d;
        }
        let u = T::one() - d2.sqrt() / self.radius;
        if u > T::zero() {
            u.powi(self.beta)
        } else {
            T::zero()
        }
    }

    /// `|c| + r`, the farthest reach of the support from the origin.
    pub fn reach(&self, dim: usize) -> T {
        let mut c2 = T::zero();
        for k in 0..dim {
            c2 = c2 + self.center[k] * self.center[k];
        }
        c2.sqrt() + self.radius
    }
}

/// Outcome of checking the three `C_α` constraints on a sampled profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityRecord<T> {
    /// `max |x|` over cells where the profile is nonzero (0 for the zero profile).
    pub support_radius: T,
    /// `Σ φ h^n`.
    pub mean: T,
    /// `max |φ(x) - φ(x')| / |x - x'|^α` over sample pairs.
    pub seminorm: T,
}

impl<T: Real> AdmissibilityRecord<T> {
    pub fn support_ok(&self) -> bool {
        self.support_radius <= T::one()
    }

    pub fn mean_ok(&self) -> bool {
        self.mean.abs() <= T::lit(1e-12)
    }

    pub fn seminorm_ok(&self) -> bool {
        self.seminorm <= T::one() + T::lit(1e-9)
    }

    pub fn passes(&self) -> bool {
        self.support_ok() && self.mean_ok() && self.seminorm_ok()
    }
}

/// Discrete Hölder-`α` seminorm over all pairs with at least one nonzero sample.
pub fn holder_seminorm<T: Real>(profile: &GridFunction<T>, alpha: T) -> T {
    let grid = *profile.grid();
    let v = profile.values();
    let support: Vec<usize> = (0..v.len()).filter(|&i| v[i] != T::zero()).collect();
    support
        .par_iter()
        .map(|&i| {
            let xi = grid.center(i);
            let mut best = T::zero();
            for j in 0..v.len() {
                if j == i {
                    continue;
                }
                let q = (v[i] - v[j]).abs() / grid.distance(xi, grid.center(j)).powf(alpha);
                best = best.max(q);
            }
            best
        })
        .reduce(T::zero, T::max)
}

/// Checks support, discrete mean and Hölder seminorm of a sampled profile.
pub fn verify_admissible<T: Real>(profile: &GridFunction<T>, alpha: T) -> AdmissibilityRecord<T> {
    let grid = *profile.grid();
    let v = profile.values();
    let support_radius = (0..v.len())
        .filter(|&i| v[i] != T::zero())
        .map(|i| grid.norm(grid.center(i)))
        .fold(T::zero(), T::max);
    let mean = v.iter().copied().sum::<T>() * grid.cell_measure();
    AdmissibilityRecord { support_radius, mean, seminorm: holder_seminorm(profile, alpha) }
}

/// One member `φ = s (ψ_1 - λ ψ_2)` of the family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleMember<T> {
    pub bumps: [Bump<T>; 2],
    /// Cancellation coefficient on the reference grid.
    pub lambda: T,
    /// Normalisation `1 / max(1, seminorm)`.
    pub scale: T,
    pub record: AdmissibilityRecord<T>,
    dim: usize,
}

impl<T: Real> AdmissibleMember<T> {
    /// Closed-form `φ(x)` with the reference-grid `λ`.
    pub fn eval(&self, x: Point<T>) -> T {
        self.scale * (self.bumps[0].eval(self.dim, x) - self.lambda * self.bumps[1].eval(self.dim, x))
    }

    /// The unnormalised profile `ψ_1 - λ ψ_2` sampled on `grid`.
    pub fn sample_unscaled(&self, grid: &Grid<T>) -> GridFunction<T> {
        GridFunction::from_fn(*grid, |x| self.bumps[0].eval(self.dim, x) - self.lambda * self.bumps[1].eval(self.dim, x))
            .expect("bumps are finite")
    }

    /// `φ` sampled on `grid`.
    pub fn sample(&self, grid: &Grid<T>) -> GridFunction<T> {
        GridFunction::from_fn(*grid, |x| self.eval(x)).expect("bumps are finite")
    }

    /// `t^{-n} φ((k h + shift)/t) h^n` for offsets `k` with `|k h + shift| < t`,
    /// with `λ` re-solved on these samples.
    pub fn kernel(&self, grid: &Grid<T>, t: T, shift: Point<T>) -> DilatedKernel<T> {
        let h = grid.spacing();
        let reach = (t / h).ceil().to_f64_lossy() as isize + 1;
        let span = |k: usize| if k < self.dim { -reach..=reach } else { 0..=0 };
        let mut offsets = Vec::new();
        let mut parts = Vec::new();
        for k0 in span(0) {
            for k1 in span(1) {
                let x = [
                    (T::lit(k0 as f64) * h + shift[0]) / t,
                    (T::lit(k1 as f64) * h + shift[1]) / t,
                ];
                let (a, b) = (self.bumps[0].eval(self.dim, x), self.bumps[1].eval(self.dim, x));
                if a != T::zero() || b != T::zero() {
                    offsets.push([k0, k1]);
                    parts.push((a, b));
                }
            }
        }
        let (s1, s2) = parts.iter().fold((T::zero(), T::zero()), |acc, p| (acc.0 + p.0, acc.1 + p.1));
        if s1 == T::zero() || s2 == T::zero() {
            // a bump falls between samples at this scale: the kernel is unresolved
            return DilatedKernel { offsets: Vec::new(), values: Vec::new() };
        }
        let lambda = s1 / s2;
        let norm = self.scale * grid.cell_measure() / t.powi(grid.dim() as i32);
        let values = parts.iter().map(|&(a, b)| norm * (a - lambda * b)).collect();
        DilatedKernel { offsets, values }
    }
}

/// A dilated member sampled as a stencil of cell offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct DilatedKernel<T> {
    pub offsets: Vec<[isize; 2]>,
    pub values: Vec<T>,
}

impl<T: Real> DilatedKernel<T> {
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> T {
        self.values.iter().copied().sum()
    }
}

/// A finite, prefix-stable family of verified `C_α` members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleFamily<T> {
    pub alpha: T,
    dim: usize,
    members: Vec<AdmissibleMember<T>>,
}

fn radical_inverse(mut k: usize, base: usize) -> f64 {
    let (mut inv, mut out) = (1.0 / base as f64, 0.0);
    while k > 0 {
        out += (k % base) as f64 * inv;
        k /= base;
        inv /= base as f64;
    }
    out
}

/// The `k`-th candidate pair of bumps in the deterministic generation order.
fn candidate<T: Real>(k: usize, dim: usize) -> [Bump<T>; 2] {
    let lit = T::lit;
    let bump = |c0: f64, c1: f64, r: f64, beta: i32| Bump { center: [lit(c0), lit(c1)], radius: lit(r), beta };
    match k {
        0 => [bump(-0.5, 0.0, 0.45, 1), bump(0.5, 0.0, 0.45, 1)],
        1 => [bump(0.0, 0.0, 0.35, 2), bump(0.0, 0.0, 0.9, 2)],
        _ => {
            let u: Vec<f64> = [2, 3, 5, 7, 11, 13].iter().map(|&b| radical_inverse(k, b)).collect();
            let place = |rho: f64, angle: f64| -> (f64, f64) {
                if dim == 1 {
                    (if angle < 0.5 { -rho } else { rho }, 0.0)
                } else {
                    let a = std::f64::consts::TAU * angle;
                    (rho * a.cos(), rho * a.sin())
                }
            };
            let (rho1, rho2) = (0.6 * u[0], 0.6 * u[3]);
            let (c1, c2) = (place(rho1, u[1]), place(rho2, u[4]));
            let r1 = 0.3 + (0.97 - rho1 - 0.3) * u[2];
            let r2 = 0.3 + (0.97 - rho2 - 0.3) * u[5];
            let b1 = 1 + (k % 3) as i32;
            let b2 = 1 + ((k / 3) % 3) as i32;
            [bump(c1.0, c1.1, r1, b1), bump(c2.0, c2.1, r2, b2)]
        }
    }
}

impl<T: Real> AdmissibleFamily<T> {
    /// Reference grid on which `λ`, `s` and the verification record are computed.
    pub fn reference_grid(dim: usize) -> Grid<T> {
        let n = if dim == 1 { 512 } else { 64 };
        Grid::new(dim, T::lit(2.0), n).expect("valid reference grid")
    }

    /// The first `size` nondegenerate candidates for `grid`'s dimension.
    pub fn build(alpha: T, size: usize, grid: &Grid<T>) -> Result<Self> {
        if !(alpha > T::zero() && alpha <= T::one()) {
            return Err(Error::InvalidParameter(format!("α = {alpha} outside (0, 1]")));
        }
        if size == 0 {
            return Err(Error::InvalidParameter("family size must be at least 1".into()));
        }
        let dim = grid.dim();
        let reference = Self::reference_grid(dim);
        let mut members = Vec::with_capacity(size);
        for k in 0..(16 * size + 16) {
            if members.len() == size {
                break;
            }
            let bumps = candidate::<T>(k, dim);
            let s1: T = GridFunction::from_fn(reference, |x| bumps[0].eval(dim, x)).expect("finite").values().iter().copied().sum();
            let s2: T = GridFunction::from_fn(reference, |x| bumps[1].eval(dim, x)).expect("finite").values().iter().copied().sum();
            if s1 == T::zero() || s2 == T::zero() {
                continue;
            }
            let mut m = AdmissibleMember {
                bumps,
                lambda: s1 / s2,
                scale: T::one(),
                record: AdmissibilityRecord { support_radius: T::zero(), mean: T::zero(), seminorm: T::zero() },
                dim,
            };
            let raw = holder_seminorm(&m.sample_unscaled(&reference), alpha);
            if raw == T::zero() {
                continue;
            }
            m.scale = T::one() / raw.max(T::one());
            m.record = verify_admissible(&m.sample(&reference), alpha);
            members.push(m);
        }
        if members.is_empty() {
            return Err(Error::AllCandidatesDegenerate);
        }
        Ok(Self { alpha, dim, members })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn members(&self) -> &[AdmissibleMember<T>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// The first `k` members.
    pub fn prefix(&self, k: usize) -> Self {
        Self { alpha: self.alpha, dim: self.dim, members: self.members[..k.min(self.len())].to_vec() }
    }

    /// Whether every member passes its verification record.
    pub fn verified(&self) -> bool {
        self.members.iter().all(|m| m.record.passes())
    }
}

/// Node data for one `t`-level of the cone.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeLevel<T> {
    pub t: T,
    /// Offset spacing in cells.
    pub step: usize,
    /// `y - x` in cells, all with `|y - x| < t`.
    pub offsets: Vec<[isize; 2]>,
    /// `(step·h)^n · Δ(log t) / t^n`: trapezoid weight in `log t` times the `dy` cell.
    pub node_weight: T,
}

/// Quadrature for `∬_{|x-y|<t} (·) dy dt / t^{n+1}` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeQuadrature<T> {
    grid: Grid<T>,
    levels: Vec<ConeLevel<T>>,
}

impl<T: Real> ConeQuadrature<T> {
    /// `count` log-spaced levels on `[t_min, t_max]`; needs `2h <= t_min < t_max <= L`
    /// and `count >= 8`.
    pub fn new(grid: &Grid<T>, t_min: T, t_max: T, count: usize) -> Result<Self> {
        let h = grid.spacing();
        let slack = T::one() - T::lit(1e-12);
        if !(t_min >= T::lit(2.0) * h * slack) {
            return Err(Error::QuadratureIncompatible(format!("t_min = {t_min} below 2h = {}", T::lit(2.0) * h)));
        }
        if !(t_max <= grid.half_extent() / slack) || !(t_max > t_min) {
            return Err(Error::QuadratureIncompatible(format!("t_max = {t_max} must lie in (t_min, L]")));
        }
        if count < 8 {
            return Err(Error::QuadratureIncompatible(format!("{count} levels, need at least 8")));
        }
        let ts = log_spaced(t_min, t_max, count);
        let dlog = (t_max / t_min).ln() / T::of(count - 1);
        let dim = grid.dim();
        let levels = ts
            .iter()
            .enumerate()
            .map(|(l, &t)| {
                let trap = if l == 0 || l == count - 1 { dlog / T::lit(2.0) } else { dlog };
                let step = ((t / (T::lit(4.0) * h)).floor().to_f64_lossy() as usize).max(1);
                let reach = (t / (h * T::of(step))).ceil().to_f64_lossy() as isize;
                let span = |k: usize| if k < dim { -reach..=reach } else { 0..=0 };
                let mut offsets = Vec::new();
                for a in span(0) {
                    for b in span(1) {
                        let (o0, o1) = (a * step as isize, b * step as isize);
                        let r2 = T::lit((o0 * o0 + o1 * o1) as f64) * h * h;
                        if r2 < t * t {
                            offsets.push([o0, o1]);
                        }
                    }
                }
                let cell = (T::of(step) * h).powi(dim as i32);
                ConeLevel { t, step, offsets, node_weight: cell * trap / t.powi(dim as i32) }
            })
            .collect();
        Ok(Self { grid: *grid, levels })
    }

    /// 16 levels on `[2h, L/2]`.
    pub fn default_for(grid: &Grid<T>) -> Result<Self> {
        Self::new(grid, T::lit(2.0) * grid.spacing(), grid.half_extent() / T::lit(2.0), 16)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn levels(&self) -> &[ConeLevel<T>] {
        &self.levels
    }

    pub fn t_max(&self) -> T {
        self.levels.last().expect("at least 8 levels").t
    }

    /// Cells by which the evaluation lattice extends past the domain.
    fn pad(&self) -> usize {
        (self.t_max() / self.grid.spacing()).ceil().to_f64_lossy() as usize + 1
    }
}

/// Cell-centred lattice `[-pad, N + pad)^n` on which convolutions are evaluated.
#[derive(Debug, Clone, Copy)]
struct Extended {
    dim: usize,
    n: isize,
    pad: isize,
}

impl Extended {
    fn side(&self) -> isize {
        self.n + 2 * self.pad
    }

    fn len(&self) -> usize {
        (self.side() as usize).pow(self.dim as u32)
    }

    /// Cell coordinates (may lie outside the domain) of extended index `e`.
    fn coords(&self, e: usize) -> [isize; 2] {
        let s = self.side() as usize;
        if self.dim == 1 {
            [e as isize - self.pad, 0]
        } else {
            [(e / s) as isize - self.pad, (e % s) as isize - self.pad]
        }
    }

    fn index(&self, c: [isize; 2]) -> usize {
        let (a, b) = (c[0] + self.pad, c[1] + self.pad);
        if self.dim == 1 {
            a as usize
        } else {
            (a * self.side() + b) as usize
        }
    }

    fn domain_index(&self, c: [isize; 2]) -> Option<usize> {
        let inside = |v: isize| (0..self.n).contains(&v);
        if !inside(c[0]) || (self.dim == 2 && !inside(c[1])) {
            return None;
        }
        Some(if self.dim == 1 { c[0] as usize } else { (c[0] * self.n + c[1]) as usize })
    }
}

/// `(φ_t * f)(y)` at every extended lattice point `y`, with `f` zero off the domain.
fn convolve<T: Real>(f: &[T], ext: Extended, kernel: &DilatedKernel<T>) -> Vec<T> {
    (0..ext.len())
        .into_par_iter()
        .map(|e| {
            let y = ext.coords(e);
            let mut acc = T::zero();
            for (k, &v) in kernel.offsets.iter().zip(&kernel.values) {
                if let Some(z) = ext.domain_index([y[0] - k[0], y[1] - k[1]]) {
                    acc = acc + v * f[z];
                }
            }
            acc
        })
        .collect()
}

fn check_compat<T: Real>(grid: &Grid<T>, family: &AdmissibleFamily<T>, cone: &ConeQuadrature<T>) -> Result<Extended> {
    if cone.grid() != grid {
        return Err(Error::QuadratureIncompatible("cone quadrature built for a different grid".into()));
    }
    if family.dim() != grid.dim() {
        return Err(Error::QuadratureIncompatible(format!(
            "family built for n = {}, grid has n = {}",
            family.dim(),
            grid.dim()
        )));
    }
    Ok(Extended { dim: grid.dim(), n: grid.per_axis() as isize, pad: cone.pad() as isize })
}

/// `A_α(f)(y, t) = max_φ |φ_t * f(y)|` over the family, at any point `y`.
pub fn a_alpha<T: Real>(f: &GridFunction<T>, y: Point<T>, t: T, family: &AdmissibleFamily<T>) -> T {
    let grid = *f.grid();
    let h = grid.spacing();
    let dim = grid.dim();
    // nearest lattice cell and the sub-cell shift of y from it
    let mut cell = [0isize; 2];
    let mut shift = [T::zero(); 2];
    for k in 0..dim {
        let u = (y[k] + grid.half_extent()) / h - T::lit(0.5);
        let i = u.round();
        cell[k] = i.to_f64_lossy() as isize;
        shift[k] = (u - i) * h;
    }
    let ext = Extended { dim, n: grid.per_axis() as isize, pad: 0 };
    family
        .members()
        .iter()
        .map(|m| {
            let kernel = m.kernel(&grid, t, shift);
            let mut acc = T::zero();
            for (k, &v) in kernel.offsets.iter().zip(&kernel.values) {
                if let Some(z) = ext.domain_index([cell[0] - k[0], cell[1] - k[1]]) {
                    acc = acc + v * f.values()[z];
                }
            }
            acc.abs()
        })
        .fold(T::zero(), T::max)
}

/// Kernels for every `(member, level)`, level-major.
fn kernels<T: Real>(grid: &Grid<T>, family: &AdmissibleFamily<T>, cone: &ConeQuadrature<T>) -> Vec<Vec<DilatedKernel<T>>> {
    cone.levels()
        .par_iter()
        .map(|lv| family.members().iter().map(|m| m.kernel(grid, lv.t, [T::zero(); 2])).collect())
        .collect()
}

/// Sums `node_weight · Σ_offsets g(level, x + offset)` over levels for one cell `x`.
fn cone_sum<T: Real>(cone: &ConeQuadrature<T>, ext: Extended, x: [isize; 2], g: impl Fn(usize, usize) -> T) -> T {
    let mut total = T::zero();
    for (l, lv) in cone.levels().iter().enumerate() {
        let mut acc = T::zero();
        for o in &lv.offsets {
            acc = acc + g(l, ext.index([x[0] + o[0], x[1] + o[1]]));
        }
        total = total + lv.node_weight * acc;
    }
    total
}

fn domain_cell<T: Real>(grid: &Grid<T>, i: usize) -> [isize; 2] {
    let mi = grid.multi_index(i);
    [mi[0] as isize, mi[1] as isize]
}

/// `S_α(f⃗)(x) = (Σ_j ∬_{Γ(x)} A_α(f_j)(y,t)² dy dt / t^{n+1})^{1/2}`.
pub fn vector_intrinsic_square<T: Real>(
    fs: &VectorGridFunction<T>,
    family: &AdmissibleFamily<T>,
    cone: &ConeQuadrature<T>,
) -> Result<GridFunction<T>> {
    let grid = *fs.grid();
    let ext = check_compat(&grid, family, cone)?;
    let ks = kernels(&grid, family, cone);
    // a2[j][l][e] = A_α(f_j)(y_e, t_l)²
    let a2: Vec<Vec<Vec<T>>> = fs
        .components()
        .iter()
        .map(|f| {
            ks.par_iter()
                .map(|level| {
                    let mut best = vec![T::zero(); ext.len()];
                    for k in level.iter().filter(|k| !k.is_empty()) {
                        for (b, c) in best.iter_mut().zip(convolve(f.values(), ext, k)) {
                            *b = b.max(c.abs());
                        }
                    }
                    best.into_iter().map(|a| a * a).collect()
                })
                .collect()
        })
        .collect();
    let out: Vec<T> = (0..grid.cell_count())
        .into_par_iter()
        .map(|i| {
            let x = domain_cell(&grid, i);
            a2.iter().map(|per_level| cone_sum(cone, ext, x, |l, e| per_level[l][e])).sum::<T>().sqrt()
        })
        .collect();
    GridFunction::new(grid, out)
}

/// Scalar `S_α(f)`.
pub fn intrinsic_square<T: Real>(f: &GridFunction<T>, family: &AdmissibleFamily<T>, cone: &ConeQuadrature<T>) -> Result<GridFunction<T>> {
    vector_intrinsic_square(&VectorGridFunction::scalar(f.clone()), family, cone)
}

/// `[b, S_α](f⃗)(x)`: per `(y, t)` the sup over the family of
/// `|b(x) (φ_t * f_j)(y) - (φ_t * (b f_j))(y)|`, then the cone and `ℓ²` sums.
pub fn vector_commutator_square<T: Real>(
    b: &GridFunction<T>,
    fs: &VectorGridFunction<T>,
    family: &AdmissibleFamily<T>,
    cone: &ConeQuadrature<T>,
) -> Result<GridFunction<T>> {
    let grid = *fs.grid();
    if b.grid() != &grid {
        return Err(Error::GridMismatch);
    }
    let ext = check_compat(&grid, family, cone)?;
    let ks = kernels(&grid, family, cone);
    // stacks[j][l][m] = (φ_t * f_j, φ_t * (b f_j)) over the extended lattice
    type Stack<T> = Vec<(Vec<T>, Vec<T>)>;
    let stacks: Vec<Vec<Stack<T>>> = fs
        .components()
        .iter()
        .map(|f| {
            let bf: Vec<T> = f.values().iter().zip(b.values()).map(|(&v, &bv)| v * bv).collect();
            ks.par_iter()
                .map(|level| {
                    level
                        .iter()
                        .filter(|k| !k.is_empty())
                        .map(|k| (convolve(f.values(), ext, k), convolve(&bf, ext, k)))
                        .collect()
                })
                .collect()
        })
        .collect();
    let out: Vec<T> = (0..grid.cell_count())
        .into_par_iter()
        .map(|i| {
            let x = domain_cell(&grid, i);
            let bx = b.values()[i];
            stacks
                .iter()
                .map(|per_level| {
                    cone_sum(cone, ext, x, |l, e| {
                        let a = per_level[l].iter().map(|(c1, c2)| (bx * c1[e] - c2[e]).abs()).fold(T::zero(), T::max);
                        a * a
                    })
                })
                .sum::<T>()
                .sqrt()
        })
        .collect();
    GridFunction::new(grid, out)
}

pub fn commutator_square<T: Real>(
    b: &GridFunction<T>,
    f: &GridFunction<T>,
    family: &AdmissibleFamily<T>,
    cone: &ConeQuadrature<T>,
) -> Result<GridFunction<T>> {
    vector_commutator_square(b, &VectorGridFunction::scalar(f.clone()), family, cone)
}
