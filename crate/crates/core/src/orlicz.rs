//! Young functions, Luxemburg norms over a ball (plain or weighted), the
//! equivalent infimal norm, and generalized Hölder ratios.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, Region};
use crate::scalar::{log_plus, Real};
use crate::weights::Weight;

/// Relative width at which Luxemburg bisection stops.
pub const LUXEMBURG_RTOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum YoungFunction {
    /// `Φ(t) = t (1 + log⁺ t)`.
    Llogl,
    /// `Φ̄(t) = e^t - 1`, normalised so `Φ̄(0) = 0`.
    ExpComplement,
}

impl YoungFunction {
    /// `Φ(t)` for `t >= 0`.
    pub fn eval<T: Real>(self, t: T) -> Result<T> {
        if t < T::zero() || t.is_nan() {
            return Err(Error::NegativeArgument(t.to_f64_lossy()));
        }
        Ok(self.phi(t))
    }

    #[inline]
    pub(crate) fn phi<T: Real>(self, t: T) -> T {
        match self {
            Self::Llogl => t * (T::one() + log_plus(t)),
            Self::ExpComplement => t.exp_m1(),
        }
    }

    /// `Φ^{-1}(u)` for `u >= 0`.
    pub fn inverse<T: Real>(self, u: T) -> Result<T> {
        if u < T::zero() || u.is_nan() {
            return Err(Error::NegativeArgument(u.to_f64_lossy()));
        }
        Ok(match self {
            Self::ExpComplement => u.ln_1p(),
            Self::Llogl if u <= T::one() => u,
            Self::Llogl => {
                // Newton on t + t ln t = u from the right of the root; the map is
                // convex there, so iterates decrease monotonically.
                let mut t = u;
                for _ in 0..100 {
                    let next = t - (t * (T::one() + t.ln()) - u) / (T::lit(2.0) + t.ln());
                    if !(next < t) {
                        break;
                    }
                    t = next.max(T::one());
                }
                t
            }
        })
    }

    /// Spot-checks the Young function axioms on `ladder` (sorted, nonnegative).
    pub fn check_on_ladder<T: Real>(self, ladder: &[T]) -> bool {
        if self.phi(T::zero()) != T::zero() {
            return false;
        }
        let vals: Vec<T> = ladder.iter().map(|&t| self.phi(t)).collect();
        let increasing = vals.windows(2).all(|w| w[1] > w[0]);
        let convex = ladder.windows(3).zip(vals.windows(3)).all(|(t, v)| {
            // slope of the left chord does not exceed slope of the right chord
            let left = (v[1] - v[0]) / (t[1] - t[0]);
            let right = (v[2] - v[1]) / (t[2] - t[1]);
            left <= right * (T::one() + T::lit(1e-12))
        });
        increasing && convex && vals.iter().all(|v| v.is_finite() && *v >= T::zero())
    }
}

/// Restriction of `|f|` (and optionally `w`) to a ball, as Orlicz data.
struct BallSample<T> {
    values: Vec<T>,
    weights: Option<Vec<T>>,
    total: T,
}

impl<T: Real> BallSample<T> {
    fn new(f: &GridFunction<T>, region: &Region<T>, w: Option<&Weight<T>>) -> Result<Self> {
        if region.cells().is_empty() {
            return Err(Error::EmptyRegion);
        }
        if let Some(w) = w {
            if w.grid() != f.grid() {
                return Err(Error::GridMismatch);
            }
        }
        let values: Vec<T> = region.cells().iter().map(|i| f.values()[i].abs()).collect();
        let weights: Option<Vec<T>> = w.map(|w| region.cells().iter().map(|i| w.values()[i]).collect());
        let total = match &weights {
            Some(ws) => ws.iter().copied().sum(),
            None => T::of(values.len()),
        };
        Ok(Self { values, weights, total })
    }

    fn max(&self) -> T {
        self.values.iter().copied().fold(T::zero(), T::max)
    }

    /// `(1/w(B)) ∫_B Φ(|f|/σ) w`.
    fn modular(&self, y: YoungFunction, sigma: T) -> T {
        let acc = match &self.weights {
            Some(ws) => self.values.iter().zip(ws).map(|(&a, &w)| y.phi(a / sigma) * w).sum::<T>(),
            None => self.values.iter().map(|&a| y.phi(a / sigma)).sum::<T>(),
        };
        acc / self.total
    }

    fn mean_product(&self, other: &[T]) -> T {
        let acc = match &self.weights {
            Some(ws) => self.values.iter().zip(other).zip(ws).map(|((&a, &b), &w)| a * b * w).sum::<T>(),
            None => self.values.iter().zip(other).map(|(&a, &b)| a * b).sum::<T>(),
        };
        acc / self.total
    }
}

/// Constraint evaluations recorded during a Luxemburg solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LuxemburgSolve<T> {
    pub norm: T,
    /// `(σ, modular(σ))` in evaluation order.
    pub trace: Vec<(T, T)>,
}

/// `inf { σ > 0 : (1/w(B)) ∫_B Φ(|f|/σ) w <= 1 }`, with `w` absent meaning Lebesgue measure.
pub fn luxemburg_norm<T: Real>(
    f: &GridFunction<T>,
    region: &Region<T>,
    y: YoungFunction,
    w: Option<&Weight<T>>,
) -> Result<T> {
    luxemburg_solve(f, region, y, w).map(|s| s.norm)
}

/// [`luxemburg_norm`] together with its bisection trace.
pub fn luxemburg_solve<T: Real>(
    f: &GridFunction<T>,
    region: &Region<T>,
    y: YoungFunction,
    w: Option<&Weight<T>>,
) -> Result<LuxemburgSolve<T>> {
    let sample = BallSample::new(f, region, w)?;
    solve(&sample, y)
}

/// Luxemburg norm of already-restricted data; `weights` parallels `values`.
pub(crate) fn luxemburg_of_samples<T: Real>(values: Vec<T>, weights: Option<Vec<T>>, y: YoungFunction) -> Result<T> {
    if values.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let values: Vec<T> = values.into_iter().map(T::abs).collect();
    let total = match &weights {
        Some(ws) => ws.iter().copied().sum(),
        None => T::of(values.len()),
    };
    solve(&BallSample { values, weights, total }, y).map(|s| s.norm)
}

fn solve<T: Real>(sample: &BallSample<T>, y: YoungFunction) -> Result<LuxemburgSolve<T>> {
    let top = sample.max();
    let mut trace = Vec::new();
    if top == T::zero() {
        return Ok(LuxemburgSolve { norm: T::zero(), trace });
    }
    let mut eval = |s: T| {
        let v = sample.modular(y, s);
        trace.push((s, v));
        v
    };
    let (floor, ceiling) = (top * T::lit(1e-12), top * T::lit(1e12));
    let two = T::lit(2.0);
    let mut hi = top * two;
    while eval(hi) > T::one() {
        hi = hi * two;
        if hi > ceiling {
            return Err(Error::BracketExhausted);
        }
    }
    let mut lo = hi / two;
    while eval(lo) <= T::one() {
        hi = lo;
        lo = lo / two;
        if lo < floor {
            return Err(Error::BracketExhausted);
        }
    }
    let tol = T::lit(LUXEMBURG_RTOL);
    while hi / lo - T::one() > tol {
        let mid = (lo * hi).sqrt();
        if eval(mid) <= T::one() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(LuxemburgSolve { norm: hi, trace })
}

/// The Luxemburg norm next to `inf_η { η + η (1/w(B)) ∫_B Φ(|f|/η) w }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivBracket<T> {
    pub luxemburg: T,
    pub infimum: T,
    /// Minimising `η`.
    pub eta: T,
}

impl<T: Real> EquivBracket<T> {
    /// `infimum / luxemburg`; lies in `[1, 2]` up to solver tolerance.
    pub fn ratio(&self) -> T {
        if self.luxemburg == T::zero() {
            T::one()
        } else {
            self.infimum / self.luxemburg
        }
    }
}

/// Minimises `η ↦ η (1 + modular(η))` (convex in `η`) by golden-section search in
/// `log η` over `[10^{-6} ‖f‖, 2 ‖f‖]`.
pub fn equiv_norm_bracket<T: Real>(
    f: &GridFunction<T>,
    region: &Region<T>,
    y: YoungFunction,
    w: Option<&Weight<T>>,
) -> Result<EquivBracket<T>> {
    let sample = BallSample::new(f, region, w)?;
    let lux = solve(&sample, y)?.norm;
    if lux == T::zero() {
        return Ok(EquivBracket { luxemburg: T::zero(), infimum: T::zero(), eta: T::zero() });
    }
    let g = |log_eta: T| {
        let eta = log_eta.exp();
        eta * (T::one() + sample.modular(y, eta))
    };
    let (mut a, mut b) = ((lux * T::lit(1e-6)).ln(), (lux * T::lit(2.0)).ln());
    let inv_phi = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..200 {
        if (b - a).abs() < T::lit(1e-13) {
            break;
        }
        if gc <= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
    }
    let candidates = [(gc, c), (gd, d), (g(a), a), (g(b), b)];
    let (infimum, at) = candidates.into_iter().fold((T::infinity(), a), |best, cand| if cand.0 < best.0 { cand } else { best });
    if !infimum.is_finite() {
        return Err(Error::BracketExhausted);
    }
    Ok(EquivBracket { luxemburg: lux, infimum, eta: at.exp() })
}

/// `[(1/w(B)) ∫_B |f g| w] / [‖f‖_{L log L(w),B} ‖g‖_{exp L(w),B}]`.
pub fn gen_holder_constant<T: Real>(
    f: &GridFunction<T>,
    g: &GridFunction<T>,
    region: &Region<T>,
    w: Option<&Weight<T>>,
) -> Result<T> {
    let fs = BallSample::new(f, region, w)?;
    let gs = BallSample::new(g, region, w)?;
    let denom = solve(&fs, YoungFunction::Llogl)?.norm * solve(&gs, YoungFunction::ExpComplement)?.norm;
    if !(denom > T::zero()) {
        return Err(Error::DegenerateHolder);
    }
    Ok(fs.mean_product(&gs.values) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (Grid<f64>, Region<f64>) {
        let g = Grid::<f64>::new(1, 1.0, 256).unwrap();
        let b = Region::ball(&g, [g.axis_coord(128), 0.0], 0.5);
        (g, b)
    }

    fn random_step(g: Grid<f64>, rng: &mut ChaCha8Rng, pieces: usize) -> GridFunction<f64> {
        let mut breaks: Vec<f64> = (0..pieces - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let levels: Vec<f64> = (0..pieces).map(|_| rng.gen_range(-4.0..4.0)).collect();
        GridFunction::from_fn(g, |p| levels[breaks.iter().take_while(|&&b| p[0] >= b).count()]).unwrap()
    }

    #[test]
    fn phi_values() {
        let e = std::f64::consts::E;
        assert_eq!(YoungFunction::Llogl.eval(1.0).unwrap(), 1.0);
        assert!((YoungFunction::Llogl.eval(e).unwrap() - 2.0 * e).abs() < 1e-15);
        assert!((YoungFunction::ExpComplement.eval(2f64.ln()).unwrap() - 1.0).abs() < 1e-15);
        assert!(YoungFunction::Llogl.eval(-1.0).is_err());
        assert!(YoungFunction::ExpComplement.inverse(-1.0).is_err());
    }

    #[test]
    fn inverses_round_trip() {
        for y in [YoungFunction::Llogl, YoungFunction::ExpComplement] {
            for u in [0.0_f64, 0.3, 1.0, 2.5, 40.0, 1e6] {
                let t = y.inverse(u).unwrap();
                assert!((y.phi(t) - u).abs() <= 1e-12 * u.max(1.0), "{y:?} {u} {t}");
            }
        }
    }

    #[test]
    fn young_axioms_on_ladder() {
        let ladder: Vec<f64> = (0..200).map(|k| k as f64 * 0.05).collect();
        assert!(YoungFunction::Llogl.check_on_ladder(&ladder));
        assert!(YoungFunction::ExpComplement.check_on_ladder(&ladder));
    }

    #[test]
    fn constant_and_zero_norms() {
        let (g, b) = setup();
        let c = GridFunction::constant(g, 3.0);
        let n = luxemburg_norm(&c, &b, YoungFunction::Llogl, None).unwrap();
        assert!((n - 3.0).abs() < 3.0 * 2e-8);
        let z = GridFunction::zeros(g);
        assert_eq!(luxemburg_norm(&z, &b, YoungFunction::Llogl, None).unwrap(), 0.0);
        let e = luxemburg_norm(&GridFunction::constant(g, 1.0), &b, YoungFunction::ExpComplement, None).unwrap();
        assert!((e - 1.0 / std::f64::consts::LN_2).abs() < 2e-8);
    }

    /// Nested dense scan: 4096 log-spaced σ, then zoom on the feasibility boundary.
    fn scan_oracle(sample: &BallSample<f64>, y: YoungFunction) -> f64 {
        let top = sample.max();
        let (mut lo, mut hi) = (top * 1e-6, top * 4.0);
        for _ in 0..4 {
            let ladder = crate::scalar::log_spaced(lo, hi, 4096);
            let k = ladder.iter().position(|&s| sample.modular(y, s) <= 1.0).unwrap();
            lo = ladder[k.saturating_sub(1)];
            hi = ladder[k];
        }
        hi
    }

    #[test]
    fn bisection_matches_dense_scan() {
        let g = Grid::<f64>::new(1, 1.0, 256).unwrap();
        let b = Region::ball(&g, [0.0, 0.0], 0.8);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = Weight::power(0.5, [0.0, 0.0], g).unwrap();
        for _ in 0..10 {
            let (lo, hi) = (rng.gen_range(0.1..5.0), rng.gen_range(0.1..5.0));
            let cut = rng.gen_range(-0.7..0.7);
            let f = GridFunction::from_fn(g, |p| if p[0] < cut { lo } else { hi }).unwrap();
            for y in [YoungFunction::Llogl, YoungFunction::ExpComplement] {
                for ww in [None, Some(&w)] {
                    let sample = BallSample::new(&f, &b, ww).unwrap();
                    let n = luxemburg_norm(&f, &b, y, ww).unwrap();
                    let o = scan_oracle(&sample, y);
                    assert!((n - o).abs() <= 1e-5 * o, "{n} {o}");
                }
            }
        }
    }

    #[test]
    fn trace_is_monotone() {
        let (g, b) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = random_step(g, &mut rng, 5);
        for y in [YoungFunction::Llogl, YoungFunction::ExpComplement] {
            let mut t = luxemburg_solve(&f, &b, y, None).unwrap().trace;
            t.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            for w in t.windows(2) {
                assert!(w[1].1 <= w[0].1);
            }
        }
    }

    #[test]
    fn homogeneity_and_monotonicity() {
        let (g, b) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = Weight::power(-0.5, [0.0, 0.0], g).unwrap();
        for _ in 0..20 {
            let f = random_step(g, &mut rng, 4);
            let bigger = f.map(|v| v.abs() + 0.5).unwrap();
            for y in [YoungFunction::Llogl, YoungFunction::ExpComplement] {
                for ww in [None, Some(&w)] {
                    let a = luxemburg_norm(&f, &b, y, ww).unwrap();
                    let s = luxemburg_norm(&f.scale(-3.5).unwrap(), &b, y, ww).unwrap();
                    assert!((s - 3.5 * a).abs() <= 3e-8 * s);
                    assert!(luxemburg_norm(&bigger, &b, y, ww).unwrap() >= a * (1.0 - 2e-8));
                }
            }
        }
    }

    #[test]
    fn equivalent_norm_brackets() {
        let (g, b) = setup();
        let c = GridFunction::constant(g, 2.0);
        let br = equiv_norm_bracket(&c, &b, YoungFunction::Llogl, None).unwrap();
        assert!(br.infimum >= 2.0 * (1.0 - 1e-8) && br.infimum <= 4.0 * (1.0 + 1e-8));
        let z = equiv_norm_bracket(&GridFunction::zeros(g), &b, YoungFunction::Llogl, None).unwrap();
        assert_eq!(z.infimum, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let f = random_step(g, &mut rng, 6);
            for y in [YoungFunction::Llogl, YoungFunction::ExpComplement] {
                let br = equiv_norm_bracket(&f, &b, y, None).unwrap();
                // golden section against a dense scan of the same objective
                let sample = BallSample::new(&f, &b, None).unwrap();
                let scan = (0..4096)
                    .map(|k| br.luxemburg * 1e-3 * (2000f64).powf(k as f64 / 4095.0))
                    .map(|eta| eta * (1.0 + sample.modular(y, eta)))
                    .fold(f64::INFINITY, f64::min);
                assert!(br.infimum <= scan * (1.0 + 1e-12));
                assert!(br.ratio() >= 1.0 - 1e-7 && br.ratio() <= 2.0 + 1e-7, "{}", br.ratio());
            }
        }
    }

    #[test]
    fn holder_constant_cases() {
        let (g, b) = setup();
        let one = GridFunction::constant(g, 1.0);
        let r = gen_holder_constant(&one, &one, &b, None).unwrap();
        assert!((r - std::f64::consts::LN_2).abs() < 1e-7, "{r}");
        assert_eq!(gen_holder_constant(&GridFunction::zeros(g), &one, &b, None), Err(Error::DegenerateHolder));
    }

    #[test]
    fn holder_constant_bounded_by_two() {
        let (g, b) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let f = random_step(g, &mut rng, 5);
            let h = random_step(g, &mut rng, 5);
            let r = gen_holder_constant(&f, &h, &b, None).unwrap();
            assert!(r <= 2.0, "{r}");
        }
    }
}
