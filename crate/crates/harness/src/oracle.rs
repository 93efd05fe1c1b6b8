//! Brute-force oracle suites behind `sqfn oracle`.
//!
//! Each suite recomputes a library quantity by a slow, independent route (dense
//! scans, explicit loops, closed forms) and reports the worst disagreement.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sqfn_core::czdecomp::{cz_decompose, cz_verify};
use sqfn_core::operators::{vector_commutator_square, vector_intrinsic_square};
use sqfn_core::orlicz::{gen_holder_constant, luxemburg_norm};
use sqfn_core::spaces::{llogl_morrey_terms, morrey_norm, morrey_terms};
use sqfn_core::weights::ap_characteristic;
use sqfn_core::{
    AdmissibleFamily, BallFamily, BallPolicy, ConeQuadrature, Grid, GridFunction, GrowthFunction, Region, VectorGridFunction,
    Weight, YoungFunction,
};

use crate::bank;
use crate::config::ConfigError;
use crate::theorems::harness_balls;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Luxemburg,
    Holder,
    Cz,
    Operators,
    Reductions,
    Ap,
    All,
}

impl Suite {
    pub const EACH: [Suite; 6] = [Suite::Luxemburg, Suite::Holder, Suite::Cz, Suite::Operators, Suite::Reductions, Suite::Ap];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Luxemburg => "luxemburg",
            Suite::Holder => "holder",
            Suite::Cz => "cz",
            Suite::Operators => "operators",
            Suite::Reductions => "reductions",
            Suite::Ap => "ap",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.as_str() == s)
            .ok_or_else(|| ConfigError::Invalid(format!("unknown oracle suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub suite: Suite,
    pub name: String,
    pub cases: usize,
    /// Worst disagreement (or worst measured value, for bounds).
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl OracleResult {
    fn at_most(suite: Suite, name: &str, cases: usize, worst: f64, tolerance: f64) -> Self {
        Self { suite, name: name.into(), cases, worst, tolerance, passed: worst <= tolerance }
    }
}

/// Runs one suite (or all of them).
pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<OracleResult>, ConfigError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(match suite {
        Suite::All => {
            let mut out = Vec::new();
            for s in Suite::EACH {
                out.extend(run_suite(s, seed)?);
            }
            out
        }
        Suite::Luxemburg => luxemburg(&mut rng, 200)?,
        Suite::Holder => holder(&mut rng, 1000)?,
        Suite::Cz => cz(&mut rng)?,
        Suite::Operators => operators(&mut rng)?,
        Suite::Reductions => reductions()?,
        Suite::Ap => ap()?,
    })
}

fn random_step(rng: &mut ChaCha8Rng, g: Grid, lo: f64, hi: f64) -> GridFunction {
    let pieces = rng.gen_range(1..=8usize);
    let mut cuts: Vec<usize> = (0..pieces - 1).map(|_| rng.gen_range(1..g.per_axis())).collect();
    cuts.sort_unstable();
    let levels: Vec<f64> = (0..pieces).map(|_| rng.gen_range(lo..hi)).collect();
    let vals = (0..g.cell_count()).map(|i| levels[cuts.iter().filter(|&&c| c <= i).count()]).collect();
    GridFunction::new(g, vals).expect("finite")
}

fn young(y: YoungFunction, t: f64) -> f64 {
    match y {
        YoungFunction::Llogl => t * (1.0 + t.ln().max(0.0)),
        YoungFunction::ExpComplement => t.exp_m1(),
    }
}

/// Luxemburg norm by a nested dense scan of `log σ`.
pub fn luxemburg_scan(values: &[f64], weights: &[f64], y: YoungFunction) -> f64 {
    let total: f64 = weights.iter().sum();
    let m = |s: f64| values.iter().zip(weights).map(|(&v, &w)| young(y, v.abs() / s) * w).sum::<f64>() / total;
    let peak = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if peak == 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = ((peak * 1e-6).ln(), (peak * 1e6).ln());
    for _ in 0..4 {
        let pts: Vec<f64> = (0..=4096).map(|k| lo + (hi - lo) * k as f64 / 4096.0).collect();
        let k = pts.iter().rposition(|&p| m(p.exp()) > 1.0).unwrap_or(0);
        lo = pts[k];
        hi = pts[(k + 1).min(4096)];
    }
    hi.exp()
}

fn luxemburg(rng: &mut ChaCha8Rng, cases: usize) -> Result<Vec<OracleResult>, ConfigError> {
    let g = Grid::new(1, 1.0, 64)?;
    let region = Region::whole_domain(&g);
    let mut worst = 0.0f64;
    for k in 0..cases {
        let f = random_step(rng, g, 0.0, 5.0);
        let weighted = k % 2 == 1;
        let w = Weight::new(random_step(rng, g, 0.5, 3.0))?;
        for y in [YoungFunction::Llogl, YoungFunction::ExpComplement] {
            let got = luxemburg_norm(&f, &region, y, weighted.then_some(&w))?;
            let ws: Vec<f64> = if weighted { w.values().to_vec() } else { vec![1.0; g.cell_count()] };
            let want = luxemburg_scan(f.values(), &ws, y);
            if want > 0.0 {
                worst = worst.max((got - want).abs() / want);
            }
        }
    }
    Ok(vec![OracleResult::at_most(Suite::Luxemburg, "bisection-vs-dense-scan", 2 * cases, worst, 1e-5)])
}

fn holder(rng: &mut ChaCha8Rng, pairs: usize) -> Result<Vec<OracleResult>, ConfigError> {
    let g = Grid::new(1, 1.0, 64)?;
    let region = Region::whole_domain(&g);
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let f = random_step(rng, g, 0.0, 10.0);
        let h = random_step(rng, g, 0.0, 10.0);
        if f.max_abs() == 0.0 || h.max_abs() == 0.0 {
            continue;
        }
        worst = worst.max(gen_holder_constant(&f, &h, &region, None)?);
    }
    Ok(vec![OracleResult::at_most(Suite::Holder, "generalised-holder-constant", pairs, worst, 2.0)])
}

fn cz(rng: &mut ChaCha8Rng) -> Result<Vec<OracleResult>, ConfigError> {
    let g = Grid::new(1, 1.0, 4096)?;
    let fs = VectorGridFunction::new((0..8).map(|_| random_step(rng, g, -4.0, 4.0)).collect())?;
    let norm = fs.l2_norm();
    let h = g.cell_measure();
    let mass: f64 = norm.values().iter().sum::<f64>() * h;
    let root = mass / g.domain_measure();
    let start = Instant::now();
    let mut failures = 0usize;
    let mut worst_recon = 0.0f64;
    let mut worst_cheb = 0.0f64;
    let mut nested = true;
    let mut prev: Option<sqfn_core::grid::CellSet> = None;
    for sigma in sqfn_core::scalar::log_spaced(root * 1.01, norm.max_abs() * 0.99, 5) {
        let d = cz_decompose(&fs, sigma, g.max_level())?;
        let rep = cz_verify(&d, &fs);
        failures += rep.failures.len();
        worst_recon = worst_recon.max(rep.max_reconstruction_error).max(rep.max_cancellation_error);
        worst_cheb = worst_cheb.max(d.exceptional_measure() - mass / sigma);
        if let Some(p) = &prev {
            nested &= d.exceptional.is_subset(p);
        }
        prev = Some(d.exceptional.clone());
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(vec![
        OracleResult::at_most(Suite::Cz, "structural-failures", 5, failures as f64, 0.0),
        OracleResult::at_most(Suite::Cz, "reconstruction-and-cancellation", 5, worst_recon, 1e-12),
        OracleResult::at_most(Suite::Cz, "chebyshev-excess", 5, worst_cheb.max(0.0), 1e-13 * mass),
        OracleResult::at_most(Suite::Cz, "exceptional-sets-nested", 4, if nested { 0.0 } else { 1.0 }, 0.0),
        OracleResult::at_most(Suite::Cz, "runtime-seconds", 5, secs, 1.0),
    ])
}

/// `S_α` (or `[b, S_α]` with `b`) by explicit loops over cone nodes, kernel
/// taps and family members.
pub fn naive_square(b: Option<&GridFunction>, f: &GridFunction, fam: &AdmissibleFamily, cone: &ConeQuadrature) -> Vec<f64> {
    let g = *f.grid();
    let n = g.per_axis() as isize;
    (0..g.cell_count())
        .map(|i| {
            let mut total = 0.0;
            for lv in cone.levels() {
                let ks: Vec<_> = fam.members().iter().map(|m| m.kernel(&g, lv.t, [0.0; 2])).collect();
                for o in &lv.offsets {
                    let y = i as isize + o[0];
                    let mut best = 0.0f64;
                    for k in &ks {
                        let mut acc = 0.0;
                        for (off, v) in k.offsets.iter().zip(&k.values) {
                            let z = y - off[0];
                            if (0..n).contains(&z) {
                                let z = z as usize;
                                acc += v * b.map_or(1.0, |b| b.values()[i] - b.values()[z]) * f.values()[z];
                            }
                        }
                        best = best.max(acc.abs());
                    }
                    total += lv.node_weight * best * best;
                }
            }
            total.sqrt()
        })
        .collect()
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / scale).fold(0.0, f64::max)
}

fn operators(rng: &mut ChaCha8Rng) -> Result<Vec<OracleResult>, ConfigError> {
    let g = Grid::new(1, 1.0, 64)?;
    let fam = AdmissibleFamily::build(1.0, 4, &g)?;
    let cone = ConeQuadrature::default_for(&g)?;
    let b = GridFunction::from_fn(g, |p| p[0].abs().ln())?;
    let (mut naive, mut homog, mut sub, mut kill) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..10 {
        let f = random_step(rng, g, -3.0, 3.0);
        let k = random_step(rng, g, -3.0, 3.0);
        let sq = |f: &GridFunction| vector_intrinsic_square(&VectorGridFunction::scalar(f.clone()), &fam, &cone);
        let sf = sq(&f)?;
        naive = naive.max(max_rel(sf.values(), &naive_square(None, &f, &fam, &cone)));
        let cf = vector_commutator_square(&b, &VectorGridFunction::scalar(f.clone()), &fam, &cone)?;
        naive = naive.max(max_rel(cf.values(), &naive_square(Some(&b), &f, &fam, &cone)));
        let c = rng.gen_range(-5.0..5.0);
        let scaled = sq(&f.scale(c)?)?;
        let expect: Vec<f64> = sf.values().iter().map(|v| c.abs() * v).collect();
        homog = homog.max(max_rel(scaled.values(), &expect));
        let sk = sq(&k)?;
        let sum = sq(&f.add(&k)?)?;
        let peak = sf.max_abs() + sk.max_abs();
        for ((s, a), bb) in sum.values().iter().zip(sf.values()).zip(sk.values()) {
            sub = sub.max((s - a - bb) / peak);
        }
        let constant = GridFunction::constant(g, rng.gen_range(-3.0..3.0));
        let ck = vector_commutator_square(&constant, &VectorGridFunction::scalar(f.clone()), &fam, &cone)?;
        kill = kill.max(ck.max_abs());
    }
    Ok(vec![
        OracleResult::at_most(Suite::Operators, "naive-loop-agreement", 20, naive, 1e-12),
        OracleResult::at_most(Suite::Operators, "homogeneity", 10, homog, 1e-12),
        OracleResult::at_most(Suite::Operators, "sublinearity-slack", 10, sub.max(0.0), 1e-12),
        OracleResult::at_most(Suite::Operators, "constant-symbol-commutator", 10, kill, 1e-12),
    ])
}

fn reductions() -> Result<Vec<OracleResult>, ConfigError> {
    let g = Grid::new(1, 1.0, 256)?;
    let fam = harness_balls(&g, 6)?;
    let w = Weight::power(0.5, [0.0, 0.0], g)?;
    let h = g.cell_measure();
    let insts = bank::bank(&g, 4, bank::BANK_SIZE, 0)?;
    let (mut lp, mut kap, mut bridge, mut dom) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let aligned = BallFamily::from_regions(
        &g,
        BallFamily::generate(&g, &BallPolicy::new(4, BallPolicy::cell_aligned_radii(&g, 8)))?
            .members()
            .iter()
            .filter(|b| b.inside_domain(&g))
            .cloned()
            .collect(),
    )?;
    let one = Weight::constant(g, 1.0)?;
    for inst in &insts {
        let f = inst.l2_norm();
        let p = 2.0;
        let direct = (f.values().iter().zip(w.values()).map(|(v, w)| v * v * w).sum::<f64>() * h).sqrt();
        let m = morrey_norm(&f, p, &GrowthFunction::ConstantOne, &w, &fam)?.value;
        lp = lp.max((m - direct).abs() / direct);

        let kappa = 0.4;
        let want = fam
            .members()
            .iter()
            .map(|b| {
                let wb: f64 = b.cells().iter().map(|i| w.values()[i]).sum::<f64>() * h;
                let mass: f64 = b.cells().iter().map(|i| f.values()[i].powi(2) * w.values()[i]).sum::<f64>() * h;
                (mass / wb.powf(kappa)).sqrt()
            })
            .fold(0.0, f64::max);
        let got = morrey_norm(&f, p, &GrowthFunction::Power { kappa }, &w, &fam)?.value;
        kap = kap.max((got - want).abs() / want);

        let lambda = 0.5;
        let want = aligned
            .members()
            .iter()
            .map(|b| {
                let mass: f64 = b.cells().iter().map(|i| f.values()[i].powi(2)).sum::<f64>() * h;
                (mass / b.size().powf(lambda)).sqrt()
            })
            .fold(0.0, f64::max);
        let got = morrey_norm(&f, p, &GrowthFunction::Radial { lambda, dim: 1 }, &one, &aligned)?.value;
        if want > 0.0 {
            bridge = bridge.max((got - want).abs() / want);
        }

        let theta = GrowthFunction::Power { kappa: 0.3 };
        let base = morrey_terms(&f, 1.0, &theta, &w, &fam)?;
        let ll = llogl_morrey_terms(&f, &theta, &w, &fam)?;
        dom += base.iter().zip(&ll).filter(|(b, l)| l < b).count() as f64;
    }
    let n = insts.len();
    Ok(vec![
        OracleResult::at_most(Suite::Reductions, "theta-one-is-weighted-lebesgue", n, lp, 1e-12),
        OracleResult::at_most(Suite::Reductions, "power-theta-is-weighted-morrey", n, kap, 1e-12),
        OracleResult::at_most(Suite::Reductions, "radial-theta-is-classical-morrey", n, bridge, 1e-12),
        OracleResult::at_most(Suite::Reductions, "llogl-dominates-p1-per-ball", n, dom, 0.0),
    ])
}

/// Ball family for the `A_p` sanity checks: cell-aligned radii, so small
/// balls near a singularity appear as the grid refines.
pub fn ap_family(g: &Grid) -> Result<BallFamily, ConfigError> {
    let stride = (g.per_axis() / 64).max(1);
    Ok(BallFamily::generate(g, &BallPolicy::new(stride, BallPolicy::cell_aligned_radii(g, 16)))?)
}

fn ap_char(a: f64, p: f64, n: usize) -> Result<f64, ConfigError> {
    let g = Grid::new(1, 1.0, n)?;
    let w = if a == 0.0 { Weight::constant(g, 1.0)? } else { Weight::power(a, [0.0, 0.0], g)? };
    Ok(ap_characteristic(&w, p, &ap_family(&g)?)?.value)
}

fn ap() -> Result<Vec<OracleResult>, ConfigError> {
    let mut off = 0.0f64;
    for p in [1.5, 2.0, 4.0] {
        off = off.max((ap_char(0.0, p, 256)? - 1.0).abs());
    }
    let stable = (ap_char(0.5, 2.0, 1024)? / ap_char(0.5, 2.0, 512)? - 1.0).abs();
    let growth = ap_char(1.5, 2.0, 1024)? / ap_char(1.5, 2.0, 256)?;
    Ok(vec![
        OracleResult::at_most(Suite::Ap, "constant-weight-characteristic-minus-one", 3, off, 0.0),
        OracleResult::at_most(Suite::Ap, "sqrt-weight-refinement-drift", 1, stable, 0.05),
        OracleResult {
            suite: Suite::Ap,
            name: "power-1.5-growth-256-to-1024".into(),
            cases: 1,
            worst: growth,
            tolerance: 2.0,
            passed: growth >= 2.0,
        },
    ])
}
