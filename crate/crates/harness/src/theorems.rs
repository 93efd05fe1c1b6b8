//! Left/right-hand side evaluation for each theorem and the stability checks.
//!
//! Endpoint theorems (4, 5) and the arbitrary-weight bound (B) are statements
//! for every height σ (or λ). Their constant is measured at each height as the
//! largest ratio over the bank augmented by amplitude copies `a·f⃗`, with `a` on
//! a fixed ladder of `2^{k/8}` chosen once per instance; the operators are
//! positively homogeneous, so the copies are evaluated by scaling the computed
//! output.

use rayon::prelude::*;
use sqfn_core::bmo::bmo_norm;
use sqfn_core::operators::{vector_commutator_square, vector_intrinsic_square};
use sqfn_core::spaces::{lp_norm, llogl_morrey_norm, morrey_norm, weak_l1_norm, weak_morrey_norm};
use sqfn_core::weights::{a1_characteristic, ap_characteristic, hl_maximal};
use sqfn_core::{
    AdmissibleFamily, BallFamily, BallPolicy, ConeQuadrature, Grid, GridFunction, GrowthFunction, Region, Weight, YoungFunction,
};

use crate::bank::{self, Instance};
use crate::config::{ConfigError, ExperimentConfig, TheoremId};
use crate::report::{classify, Check, InstanceRow, RatioReport, Status, Summary, TrendRow};

/// Tolerance on the drift of the measured constant under `N → 2N` and under
/// doubling the kernel family.
pub const STABILITY_TOL: f64 = 0.15;
/// Tolerance on `max/min - 1` of the measured constant across heights.
pub const HEIGHT_DRIFT_TOL: f64 = 0.20;

const LADDER_PER_OCTAVE: f64 = 8.0;
/// Heights below `LADDER_FLOOR · max` of the output are not probed.
const LADDER_FLOOR: f64 = 1e-4;

/// Grids, weight, families and quadrature shared by the bank at one resolution.
#[derive(Debug, Clone)]
pub struct Setup {
    pub grid: Grid,
    pub weight: Weight,
    pub theta: GrowthFunction,
    pub p: f64,
    pub balls: BallFamily,
    pub kernels: AdmissibleFamily,
    pub cone: ConeQuadrature,
    pub symbol: Option<GridFunction>,
    /// `M(w)` over [`maximal_family`], for theorem B.
    pub maximal_weight: Option<GridFunction>,
}

/// Ball family used for every Morrey-type sup: centres every `N/32` cells
/// (`N/16` in 2-D) and radii `L, L/2, …` above `1.5 h`, so the physical
/// family is the same at every resolution, plus the whole domain.
pub fn harness_balls(grid: &Grid, radii: usize) -> Result<BallFamily, ConfigError> {
    let n = grid.per_axis();
    let stride = (n / if grid.dim() == 1 { 32 } else { 16 }).max(1);
    let h = grid.spacing();
    let rs: Vec<f64> = (0..radii)
        .map(|k| grid.half_extent() / f64::from(1u32 << k.min(31)))
        .filter(|&r| r > 1.5 * h)
        .collect();
    if rs.is_empty() {
        return Err(ConfigError::Invalid("no ball radius above 1.5 h".into()));
    }
    Ok(BallFamily::generate(grid, &BallPolicy::new(stride, rs))?.with_region(Region::whole_domain(grid))?)
}

/// Dense family for the maximal function: every cell centre, cell-aligned radii.
pub fn maximal_family(grid: &Grid) -> Result<BallFamily, ConfigError> {
    Ok(BallFamily::generate(grid, &BallPolicy::new(1, BallPolicy::cell_aligned_radii(grid, 64)))?)
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig, per_axis: usize, family_size: usize) -> Result<Self, ConfigError> {
        let grid = Grid::new(cfg.grid.dim, cfg.grid.half_extent, per_axis)?;
        let weight = cfg.weight.build(&grid)?;
        let kernels = AdmissibleFamily::build(cfg.alpha, family_size, &grid)?;
        let t_min = 2.0 * grid.spacing();
        let cone = ConeQuadrature::new(&grid, t_min, grid.half_extent() / 2.0, cfg.cone_levels)?;
        let symbol = if cfg.theorem.uses_commutator() { Some(cfg.symbol().build(&grid)?) } else { None };
        let maximal_weight = if cfg.theorem == TheoremId::ArbitraryWeight {
            Some(hl_maximal(&weight, &maximal_family(&grid)?)?)
        } else {
            None
        };
        Ok(Self {
            grid,
            weight,
            theta: cfg.theta,
            p: cfg.p(),
            balls: harness_balls(&grid, cfg.ball_radii)?,
            kernels,
            cone,
            symbol,
            maximal_weight,
        })
    }

    /// `S_α(f⃗)` or `[b, S_α](f⃗)` as the theorem requires.
    pub fn operator(&self, inst: &Instance) -> Result<GridFunction, ConfigError> {
        Ok(match &self.symbol {
            Some(b) => vector_commutator_square(b, &inst.fs, &self.kernels, &self.cone)?,
            None => vector_intrinsic_square(&inst.fs, &self.kernels, &self.cone)?,
        })
    }
}

/// Values sorted descending with prefix sums of `w · cell measure`, so the
/// weighted measure of `{v > s}` is a binary search.
#[derive(Debug, Clone)]
struct Exceedance {
    values: Vec<f64>,
    mass: Vec<f64>,
}

impl Exceedance {
    fn new(pairs: impl Iterator<Item = (f64, f64)>, cell: f64) -> Self {
        let mut pairs: Vec<(f64, f64)> = pairs.collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut mass = Vec::with_capacity(pairs.len() + 1);
        let mut acc = 0.0;
        mass.push(0.0);
        for &(_, w) in &pairs {
            acc += w;
            mass.push(acc * cell);
        }
        Self { values: pairs.into_iter().map(|p| p.0).collect(), mass }
    }

    /// `w({v > s})`.
    fn above(&self, s: f64) -> f64 {
        self.mass[self.values.partition_point(|&v| v > s)]
    }
}

fn phi_of(f: &GridFunction, s: f64) -> GridFunction {
    let y = YoungFunction::Llogl;
    f.map(|v| y.eval(v / s).expect("norms are nonnegative")).expect("finite")
}

/// Per-instance data for the height-swept statements.
struct LevelProbe<'a> {
    setup: &'a Setup,
    norm: GridFunction,
    whole: Exceedance,
    per_ball: Vec<(Exceedance, f64)>,
    peak: f64,
    /// `∫ ‖f⃗‖ M(w)` for theorem B.
    maximal_mass: f64,
}

impl<'a> LevelProbe<'a> {
    fn new(setup: &'a Setup, theorem: TheoremId, out: &GridFunction, norm: GridFunction) -> Self {
        let cell = setup.grid.cell_measure();
        let w = setup.weight.values();
        let whole = Exceedance::new(out.values().iter().copied().zip(w.iter().copied()), cell);
        let per_ball = if theorem == TheoremId::CommutatorMorreyEndpoint {
            setup
                .balls
                .members()
                .iter()
                .map(|b| {
                    let e = Exceedance::new(b.cells().iter().map(|i| (out.values()[i], w[i])), cell);
                    let wb = b.cells().iter().map(|i| w[i]).sum::<f64>() * cell;
                    (e, setup.theta.eval(wb))
                })
                .collect()
        } else {
            Vec::new()
        };
        let maximal_mass = setup
            .maximal_weight
            .as_ref()
            .map(|m| norm.values().iter().zip(m.values()).map(|(f, m)| f * m).sum::<f64>() * cell)
            .unwrap_or(0.0);
        Self { setup, norm, whole, per_ball, peak: out.max_abs(), maximal_mass }
    }

    /// `(LHS, RHS, argmax ball)` for the input scaled by `a` at height `s`.
    fn sides(&self, theorem: TheoremId, a: f64, s: f64, exploratory: bool) -> (f64, f64, Option<usize>) {
        let level = s / a;
        match theorem {
            TheoremId::CommutatorEndpoint => {
                let lhs = self.whole.above(level);
                let rhs = if lhs > 0.0 || a == 1.0 { self.whole_phi_mass(a, s) } else { 0.0 };
                (lhs, rhs, None)
            }
            TheoremId::CommutatorMorreyEndpoint => {
                let (mut best, mut arg) = (0.0, None);
                for (k, (e, th)) in self.per_ball.iter().enumerate() {
                    let v = e.above(level) / th;
                    if v > best {
                        best = v;
                        arg = Some(k);
                    }
                }
                if best == 0.0 && a != 1.0 {
                    return (0.0, 0.0, None);
                }
                let phi = phi_of(&self.norm.scale(a).expect("finite"), s);
                let rhs = if exploratory {
                    morrey_norm(&phi, 1.0, &self.setup.theta, &self.setup.weight, &self.setup.balls)
                } else {
                    llogl_morrey_norm(&phi, &self.setup.theta, &self.setup.weight, &self.setup.balls)
                }
                .expect("compatible inputs")
                .value;
                (best, rhs, arg)
            }
            TheoremId::ArbitraryWeight => (s * self.whole.above(level), a * self.maximal_mass, None),
            _ => unreachable!("ratio theorems are not height-swept"),
        }
    }

    fn whole_phi_mass(&self, a: f64, s: f64) -> f64 {
        let y = YoungFunction::Llogl;
        let w = self.setup.weight.values();
        self.norm.values().iter().zip(w).map(|(&f, &wv)| y.eval(a * f / s).expect("nonnegative") * wv).sum::<f64>()
            * self.setup.grid.cell_measure()
    }

    fn ladder(&self, lo: f64, hi: f64) -> Vec<f64> {
        if !(self.peak > 0.0) {
            return Vec::new();
        }
        let k0 = (LADDER_PER_OCTAVE * (lo / self.peak).log2()).floor() as i64;
        let k1 = (LADDER_PER_OCTAVE * (hi / (LADDER_FLOOR * self.peak)).log2()).ceil() as i64;
        (k0..=k1).map(|k| (k as f64 / LADDER_PER_OCTAVE).exp2()).collect()
    }
}

/// Largest ratio over the amplitude ladder at height `s`: `(ratio, lhs, violation)`.
fn ladder_max(probe: &LevelProbe<'_>, theorem: TheoremId, ladder: &[f64], s: f64, exploratory: bool) -> (f64, f64, bool) {
    let (mut best, mut lhs_max, mut bad) = (0.0f64, 0.0f64, false);
    for &a in ladder {
        let (lhs, rhs, _) = probe.sides(theorem, a, s, exploratory);
        match classify(lhs, rhs) {
            (Some(q), _) => {
                if q > best {
                    best = q;
                }
            }
            (None, Status::Violation) => bad = true,
            _ => {}
        }
        lhs_max = lhs_max.max(lhs);
    }
    (best, lhs_max, bad)
}

/// Output of one pass over the bank at fixed `(N, family size)`.
#[derive(Debug, Clone)]
pub struct BankRun {
    pub rows: Vec<InstanceRow>,
    pub trends: Vec<TrendRow>,
    /// Measured constant: max row ratio, or max trend ratio for height sweeps.
    pub constant: f64,
    pub ladder_violations: usize,
}

/// Evaluates the whole bank once.
pub fn run_bank(cfg: &ExperimentConfig, per_axis: usize, family_size: usize) -> Result<BankRun, ConfigError> {
    let setup = Setup::new(cfg, per_axis, family_size)?;
    let insts = bank::bank(&setup.grid, cfg.components, cfg.instances, cfg.seed)?;
    let outs: Vec<GridFunction> = insts.par_iter().map(|i| setup.operator(i)).collect::<Result<_, _>>()?;
    let theorem = cfg.theorem;
    if !(theorem.is_sigma_swept() || theorem == TheoremId::ArbitraryWeight) {
        let rows = insts
            .iter()
            .zip(&outs)
            .map(|(inst, out)| ratio_row(&setup, theorem, inst, out))
            .collect::<Result<Vec<_>, _>>()?;
        let constant = Summary::of(&rows).max_ratio.unwrap_or(0.0);
        return Ok(BankRun { rows, trends: Vec::new(), constant, ladder_violations: 0 });
    }

    let heights = cfg.sweep.values();
    let axis = if theorem == TheoremId::ArbitraryWeight { "lambda" } else { "sigma" };
    let probes: Vec<LevelProbe<'_>> =
        insts.iter().zip(&outs).map(|(inst, out)| LevelProbe::new(&setup, theorem, out, inst.l2_norm())).collect();
    let mut rows = Vec::new();
    if theorem == TheoremId::ArbitraryWeight {
        for (inst, (out, probe)) in insts.iter().zip(outs.iter().zip(&probes)) {
            let lhs = weak_l1_norm(out, &setup.weight)?;
            rows.push(InstanceRow::new(inst.id, inst.label, None, lhs, probe.maximal_mass, None));
        }
    }
    for &s in &heights {
        for (inst, probe) in insts.iter().zip(&probes) {
            let (lhs, rhs, arg) = probe.sides(theorem, 1.0, s, false);
            rows.push(InstanceRow::new(inst.id, inst.label, Some(s), lhs, rhs, arg));
        }
    }
    let ladders: Vec<Vec<f64>> = probes.iter().map(|p| p.ladder(heights[0], heights[heights.len() - 1])).collect();
    let mut trends = Vec::new();
    let mut violations = 0;
    let mut passes = vec![false];
    if cfg.exploratory && theorem == TheoremId::CommutatorMorreyEndpoint {
        passes.push(true);
    }
    for exploratory in passes {
        for &s in &heights {
            let per: Vec<(f64, f64, bool)> = probes
                .par_iter()
                .zip(&ladders)
                .map(|(p, l)| ladder_max(p, theorem, l, s, exploratory))
                .collect();
            let mut best = (0.0, 0.0, None);
            for (k, &(q, lhs, bad)) in per.iter().enumerate() {
                if bad && !exploratory {
                    violations += 1;
                }
                if q > best.0 {
                    best.0 = q;
                    best.2 = Some(insts[k].id);
                }
                best.1 = f64::max(best.1, lhs);
            }
            trends.push(TrendRow {
                axis: if exploratory { format!("exploratory-{axis}") } else { axis.to_string() },
                x: s,
                max_ratio: best.0,
                max_lhs: best.1,
                argmax_instance: best.2,
                exploratory,
            });
        }
    }
    let mut constant = trends.iter().filter(|t| !t.exploratory).map(|t| t.max_ratio).fold(0.0, f64::max);
    if theorem == TheoremId::ArbitraryWeight {
        constant = constant.max(Summary::of(&rows[..insts.len()]).max_ratio.unwrap_or(0.0));
    }
    Ok(BankRun { rows, trends, constant, ladder_violations: violations })
}

fn ratio_row(setup: &Setup, theorem: TheoremId, inst: &Instance, out: &GridFunction) -> Result<InstanceRow, ConfigError> {
    let norm = inst.l2_norm();
    let (w, th, fam, p) = (&setup.weight, &setup.theta, &setup.balls, setup.p);
    let (lhs, rhs, arg) = match theorem {
        TheoremId::Strong | TheoremId::CommutatorStrong => {
            let l = morrey_norm(out, p, th, w, fam)?;
            (l.value, morrey_norm(&norm, p, th, w, fam)?.value, Some(l.ball))
        }
        TheoremId::Weak => {
            let l = weak_morrey_norm(out, th, w, fam)?;
            (l.value, morrey_norm(&norm, 1.0, th, w, fam)?.value, Some(l.ball))
        }
        TheoremId::CommutatorLebesgue => (lp_norm(out, p, w)?, lp_norm(&norm, p, w)?, None),
        _ => unreachable!("height-swept theorems use LevelProbe"),
    };
    Ok(InstanceRow::new(inst.id, inst.label, None, lhs, rhs, arg))
}

/// Monotonicity holds exactly pointwise, but weak-type sides accumulate weights
/// in value order, so a reordering can cost a few ulps.
pub(crate) fn decreased(before: f64, after: f64) -> bool {
    after < before * (1.0 - 1e-12)
}

fn rel_drift(base: f64, other: f64) -> f64 {
    if base == other {
        0.0
    } else if base > 0.0 {
        (other / base - 1.0).abs()
    } else {
        f64::INFINITY
    }
}

/// Runs the bank for `cfg`, plus the refinement and family-doubling passes when
/// `cfg.refine` is set, and assembles the report with its checks.
pub fn run_theorem_check(cfg: &ExperimentConfig) -> Result<RatioReport, ConfigError> {
    cfg.validate()?;
    let n = cfg.grid.per_axis;
    let base = run_bank(cfg, n, cfg.family_size)?;
    let mut report = RatioReport::empty(cfg.clone());
    let mut checks = hypothesis_checks(cfg)?;

    let bad_rows = base.rows.iter().filter(|r| r.status == Status::Violation).count() + base.ladder_violations;
    checks.push(Check::new(
        "finite-ratios",
        bad_rows == 0,
        Some(bad_rows as f64),
        Some(0.0),
        "instances with LHS > 0 and RHS = 0 or non-finite sides",
    ));
    let swept_axis = match cfg.theorem {
        TheoremId::CommutatorEndpoint | TheoremId::CommutatorMorreyEndpoint => Some("sigma"),
        TheoremId::ArbitraryWeight => Some("lambda"),
        _ => None,
    };
    if let Some(axis) = swept_axis {
        let qs: Vec<f64> = base.trends.iter().filter(|t| t.axis == axis).map(|t| t.max_ratio).collect();
        let (lo, hi) = (qs.iter().copied().fold(f64::INFINITY, f64::min), qs.iter().copied().fold(0.0, f64::max));
        let drift = if hi == 0.0 { 0.0 } else if lo > 0.0 { hi / lo - 1.0 } else { f64::INFINITY };
        checks.push(Check::below(
            &format!("{axis}-drift"),
            drift,
            HEIGHT_DRIFT_TOL,
            format!("max/min - 1 of the measured constant over {} heights", qs.len()),
        ));
    }
    report.rows = base.rows.clone();
    report.trends = base.trends.clone();

    if cfg.refine {
        let fine = run_bank(cfg, 2 * n, cfg.family_size)?;
        let wide = run_bank(cfg, n, 2 * cfg.family_size)?;
        let trend = |axis: &str, x: usize, r: &BankRun| TrendRow {
            axis: axis.into(),
            x: x as f64,
            max_ratio: r.constant,
            max_lhs: r.rows.iter().map(|r| r.lhs).fold(0.0, f64::max),
            argmax_instance: Summary::of(&r.rows).argmax_instance,
            exploratory: false,
        };
        report.trends.push(trend("grid-N", n, &base));
        report.trends.push(trend("grid-N", 2 * n, &fine));
        report.trends.push(trend("family-size", cfg.family_size, &base));
        report.trends.push(trend("family-size", 2 * cfg.family_size, &wide));
        checks.push(Check::below(
            "refinement-drift",
            rel_drift(base.constant, fine.constant),
            STABILITY_TOL,
            format!("measured constant {:.6e} at N = {n}, {:.6e} at N = {}", base.constant, fine.constant, 2 * n),
        ));
        checks.push(Check::below(
            "family-drift",
            rel_drift(base.constant, wide.constant),
            STABILITY_TOL,
            format!(
                "measured constant {:.6e} with {} kernels, {:.6e} with {}",
                base.constant,
                cfg.family_size,
                wide.constant,
                2 * cfg.family_size
            ),
        ));
        let decreases = base.rows.iter().zip(&wide.rows).filter(|(a, b)| decreased(a.lhs, b.lhs)).count();
        checks.push(Check::new(
            "family-monotone",
            decreases == 0,
            Some(decreases as f64),
            Some(0.0),
            "rows whose LHS decreased when the kernel family doubled",
        ));
    }
    report.measured_constant = Some(base.constant);
    report.summary = Summary::of(&report.rows);
    report.checks = checks;
    Ok(report)
}

/// Informational measurements of the hypotheses (weight class, symbol in BMO).
fn hypothesis_checks(cfg: &ExperimentConfig) -> Result<Vec<Check>, ConfigError> {
    let grid = cfg.grid.build()?;
    let w = cfg.weight.build(&grid)?;
    let fam = harness_balls(&grid, cfg.ball_radii)?;
    let p = cfg.p();
    let mut out = Vec::new();
    let (name, value) = match cfg.theorem {
        TheoremId::Strong | TheoremId::CommutatorStrong | TheoremId::CommutatorLebesgue => {
            ("weight-ap", ap_characteristic(&w, p, &fam)?.value)
        }
        TheoremId::ArbitraryWeight => ("weight-positive", w.values().iter().copied().fold(f64::INFINITY, f64::min)),
        _ => ("weight-a1", a1_characteristic(&w, &fam).value),
    };
    out.push(Check::new(name, value.is_finite() && value > 0.0, Some(value), None, "measured over the ball family"));
    if cfg.theorem.uses_commutator() {
        let b = cfg.symbol().build(&grid)?;
        let v = bmo_norm(&b, &fam)?.value;
        out.push(Check::new("symbol-bmo", v.is_finite(), Some(v), None, "‖b‖_* over the ball family"));
    }
    Ok(out)
}
