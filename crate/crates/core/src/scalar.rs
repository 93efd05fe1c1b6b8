//! Scalar abstraction shared by every module.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the numerics are written against.
///
/// Implemented for `f32` and `f64`. The tolerances quoted throughout the
/// crate (1e-12 and friends) assume `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + FromStr + Send + Sync + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    /// Converts a count or index.
    #[inline]
    fn of(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `max(log t, 0)`.
#[inline]
pub fn log_plus<T: Real>(t: T) -> T {
    if t > T::one() {
        t.ln()
    } else {
        T::zero()
    }
}

/// `count` points log-spaced from `lo` to `hi` inclusive.
///
/// Computed as `exp(ln lo + (i / (count - 1)) (ln hi - ln lo))`, so a ladder with
/// `2 count - 1` points contains this one bit-for-bit.
pub fn log_spaced<T: Real>(lo: T, hi: T, count: usize) -> Vec<T> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let last = T::of(count - 1);
            (0..count)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == count - 1 {
                        hi
                    } else {
                        (a + (T::of(i) / last) * (b - a)).exp()
                    }
                })
                .collect()
        }
    }
}

/// Index and value of the first strict maximum.
///
/// Earlier entries win ties, which is how argmax reports stay deterministic.
pub fn first_max<T: Real>(values: impl IntoIterator<Item = T>) -> Option<(usize, T)> {
    let mut best: Option<(usize, T)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best
}
