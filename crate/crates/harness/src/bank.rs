//! Deterministic test bank.
//!
//! Every instance is defined in physical coordinates `u = x / L`, so the same
//! instance refines consistently under `N → 2N`. Breakpoints and spike edges
//! sit on multiples of `1/64` and component shifts are whole multiples of
//! `1/64`, so steps keep their shape at every grid size used by the harness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sqfn_core::{Grid, GridFunction, VectorGridFunction};

pub const BANK_SIZE: usize = 12;

const LABELS: [&str; BANK_SIZE] = [
    "bump",
    "dilated-bump",
    "narrow-bump",
    "two-scale-oscillation",
    "step",
    "staircase",
    "spike-train",
    "near-singularity",
    "near-boundary",
    "bump-plus-step",
    "gaussian",
    "signed-haar",
];

/// One bank entry: a vector input `f⃗ = (f_1, …, f_J)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: usize,
    pub label: &'static str,
    pub fs: VectorGridFunction,
}

impl Instance {
    pub fn l2_norm(&self) -> GridFunction {
        self.fs.l2_norm()
    }
}

fn tent(u: f64, c: f64, r: f64) -> f64 {
    (1.0 - (u - c).abs() / r).max(0.0)
}

fn indicator(u: f64, a: f64, b: f64) -> f64 {
    if u >= a && u < b {
        1.0
    } else {
        0.0
    }
}

/// First-axis profile of instance `id` at `u = x / L`.
fn profile(id: usize, u: f64) -> f64 {
    match id {
        0 => tent(u, -0.2, 0.25),
        1 => tent(u, 0.1, 0.6),
        2 => tent(u, 0.3, 0.06),
        3 => {
            let osc = (2.0 * std::f64::consts::PI * 2.0 * u).sin() + 0.5 * (2.0 * std::f64::consts::PI * 11.0 * u).sin();
            osc * (1.0 - u * u / 0.64).max(0.0)
        }
        4 => indicator(u, -0.5, 0.25),
        5 => {
            let breaks = [-0.625, -0.1875, 0.15625, 0.5, 0.75];
            let levels = [1.0, -2.0, 0.5, 3.0];
            (0..4).map(|k| levels[k] * indicator(u, breaks[k], breaks[k + 1])).sum()
        }
        6 => [-0.625, -0.3125, 0.0, 0.3125, 0.625]
            .iter()
            .map(|&c| 4.0 * indicator(u, c - 3.0 / 64.0, c + 3.0 / 64.0))
            .sum(),
        7 => tent(u, 0.03, 0.05),
        8 => tent(u, 0.85, 0.12),
        9 => tent(u, -0.4, 0.3) + 0.5 * indicator(u, 0.09375, 0.59375),
        10 => (-(u / 0.15).powi(2)).exp(),
        11 => indicator(u, -0.5, 0.0) - indicator(u, 0.0, 0.5),
        _ => unreachable!("bank index checked by caller"),
    }
}

/// Second-axis window used in two dimensions.
fn window(id: usize, v: f64) -> f64 {
    match id {
        7 => tent(v, 0.03, 0.05),
        8 => tent(v, 0.85, 0.12),
        _ => tent(v, 0.0, 0.7),
    }
}

fn component_rng(seed: u64, id: usize, j: usize) -> ChaCha8Rng {
    let stream = ((id as u64) << 32) | j as u64;
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ stream)
}

/// Instance `id` with `components` entries. Component 0 is the unperturbed
/// profile; the others carry a seeded amplitude in `[0.5, 1.5]`, a random sign
/// and a shift of up to three sixty-fourths of `L`.
pub fn instance(id: usize, grid: &Grid, components: usize, seed: u64) -> sqfn_core::Result<Instance> {
    if id >= BANK_SIZE {
        return Err(sqfn_core::Error::InvalidParameter(format!("bank has {BANK_SIZE} instances, asked for {id}")));
    }
    let l = grid.half_extent();
    let two_d = grid.dim() == 2;
    let fs = (0..components)
        .map(|j| {
            let (amp, shift) = if j == 0 {
                (1.0, 0.0)
            } else {
                let mut rng = component_rng(seed, id, j);
                let amp: f64 = rng.gen_range(0.5..1.5);
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let shift = rng.gen_range(-3i32..=3) as f64 / 64.0;
                (sign * amp, shift)
            };
            GridFunction::from_fn(*grid, |p| {
                let y = if two_d { window(id, p[1] / l) } else { 1.0 };
                amp * profile(id, p[0] / l - shift) * y
            })
        })
        .collect::<sqfn_core::Result<Vec<_>>>()?;
    Ok(Instance { id, label: LABELS[id], fs: VectorGridFunction::new(fs)? })
}

/// The first `count` instances.
pub fn bank(grid: &Grid, components: usize, count: usize, seed: u64) -> sqfn_core::Result<Vec<Instance>> {
    (0..count.min(BANK_SIZE)).map(|id| instance(id, grid, components, seed)).collect()
}
