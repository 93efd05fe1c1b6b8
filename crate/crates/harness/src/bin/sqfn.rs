use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use sqfn_core::bmo::bmo_norm;
use sqfn_core::czdecomp::{cz_decompose, cz_verify};
use sqfn_core::operators::{vector_commutator_square, vector_intrinsic_square};
use sqfn_core::orlicz::luxemburg_norm;
use sqfn_core::spaces::{llogl_morrey_norm, lp_norm, morrey_norm, weak_l1_norm, weak_morrey_norm};
use sqfn_core::{AdmissibleFamily, ConeQuadrature, GridFunction, GrowthFunction, Region, VectorGridFunction, YoungFunction};
use sqfn_harness::config::WeightSpec;
use sqfn_harness::oracle::{run_suite, Suite};
use sqfn_harness::presets::{theorem_preset, Corollary};
use sqfn_harness::sweep::{sweep, SweepAxis};
use sqfn_harness::theorems::harness_balls;
use sqfn_harness::{emit_report, run_theorem_check, ExperimentConfig, RatioReport, TheoremId};

#[derive(Parser)]
#[command(name = "sqfn", version, about = "Intrinsic square function experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one theorem check over the test bank.
    Verify {
        #[arg(long)]
        theorem: String,
        /// JSON experiment config; the theorem's desk preset when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Apply a corollary specialisation, e.g. `weighted-morrey` or `radial-morrey`.
        #[arg(long)]
        corollary: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a theorem check at each value of one parameter.
    Sweep {
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<f64>,
        #[arg(long, default_value = "1")]
        theorem: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate one operator or norm on grid CSV input.
    Compute {
        #[arg(long, value_enum)]
        op: Op,
        /// Grid CSV file; repeat for the components of a vector input.
        #[arg(long, required = true)]
        input: Vec<PathBuf>,
        /// Symbol `b` for the commutator, or the function for `--norm bmo`.
        #[arg(long)]
        symbol: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 8)]
        family_size: usize,
        #[arg(long, default_value_t = 16)]
        cone_levels: usize,
        /// Height for `czd`.
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, value_enum, default_value = "morrey")]
        norm: NormKind,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Growth function as JSON, e.g. `{"kind":"power","kappa":0.3}`.
        #[arg(long)]
        theta: Option<String>,
        /// Weight as JSON, e.g. `{"kind":"power","a":0.5}`.
        #[arg(long)]
        weight: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a brute-force oracle suite.
    Oracle {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Op {
    Square,
    Commutator,
    Czd,
    Norm,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormKind {
    Morrey,
    WeakMorrey,
    LloglMorrey,
    Lp,
    WeakL1,
    Bmo,
    Luxemburg,
}

fn load_config(theorem: TheoremId, path: Option<&Path>) -> Result<ExperimentConfig> {
    let cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let mut cfg: ExperimentConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
            cfg.theorem = theorem;
            cfg
        }
        None => theorem_preset(theorem),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn print_report(r: &RatioReport) {
    println!(
        "theorem {}: {} rows, {} skipped, measured constant {}",
        r.theorem,
        r.summary.rows,
        r.summary.skipped,
        r.measured_constant.map(|c| format!("{c:.6e}")).unwrap_or_else(|| "-".into())
    );
    for c in &r.checks {
        let value = c.value.map(|v| format!("{v:.4e}")).unwrap_or_default();
        println!("  [{}] {} {} {}", if c.passed { "pass" } else { "FAIL" }, c.name, value, c.detail);
    }
}

fn finish(r: &RatioReport, out: &Path) -> Result<bool> {
    emit_report(r, out).with_context(|| format!("writing report to {}", out.display()))?;
    print_report(r);
    Ok(r.passed())
}

fn vector_input(paths: &[PathBuf]) -> Result<VectorGridFunction> {
    let fs = paths
        .iter()
        .map(|p| GridFunction::read_csv(p).with_context(|| format!("reading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    Ok(VectorGridFunction::new(fs)?)
}

#[allow(clippy::too_many_arguments)]
fn compute(
    op: Op,
    input: &[PathBuf],
    symbol: Option<&Path>,
    alpha: f64,
    family_size: usize,
    cone_levels: usize,
    sigma: Option<f64>,
    norm: NormKind,
    p: f64,
    theta: Option<&str>,
    weight: Option<&str>,
    out: &Path,
) -> Result<bool> {
    let fs = vector_input(input)?;
    let grid = *fs.grid();
    let read_symbol = || -> Result<GridFunction> {
        let path = symbol.context("--symbol is required")?;
        let b = GridFunction::read_csv(path).with_context(|| format!("reading {}", path.display()))?;
        if b.grid() != &grid {
            bail!("symbol grid differs from input grid");
        }
        Ok(b)
    };
    match op {
        Op::Square | Op::Commutator => {
            let fam = AdmissibleFamily::build(alpha, family_size, &grid)?;
            let cone = ConeQuadrature::new(&grid, 2.0 * grid.spacing(), grid.half_extent() / 2.0, cone_levels)?;
            let s = match op {
                Op::Square => vector_intrinsic_square(&fs, &fam, &cone)?,
                _ => vector_commutator_square(&read_symbol()?, &fs, &fam, &cone)?,
            };
            s.write_csv(out).with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {} ({} cells, max {:.6e})", out.display(), grid.cell_count(), s.max_abs());
            Ok(true)
        }
        Op::Czd => {
            let sigma = sigma.context("--sigma is required for czd")?;
            let d = cz_decompose(&fs, sigma, grid.max_level())?;
            let rep = cz_verify(&d, &fs);
            let doc = serde_json::json!({ "decomposition": d.summary(), "verification": {
                "passes": rep.passes(),
                "max_reconstruction_error": rep.max_reconstruction_error,
                "max_cancellation_error": rep.max_cancellation_error,
                "max_jensen_ratio": rep.max_jensen_ratio,
                "failures": rep.failures.len(),
            }});
            fs::write(out, serde_json::to_string_pretty(&doc)? + "\n")?;
            println!("{} cubes, exceptional measure {:.6e}, checks {}", d.cubes.len(), d.exceptional_measure(), if rep.passes() { "pass" } else { "FAIL" });
            Ok(rep.passes())
        }
        Op::Norm => {
            if fs.len() != 1 && matches!(norm, NormKind::Bmo) {
                bail!("bmo takes a single input");
            }
            let f = fs.l2_norm();
            let theta: GrowthFunction = match theta {
                Some(t) => serde_json::from_str(t).context("parsing --theta")?,
                None => GrowthFunction::ConstantOne,
            };
            let wspec: WeightSpec = match weight {
                Some(w) => serde_json::from_str(w).context("parsing --weight")?,
                None => WeightSpec::Constant { c: 1.0 },
            };
            let w = wspec.build(&grid)?;
            let balls = harness_balls(&grid, 6)?;
            let (value, ball) = match norm {
                NormKind::Morrey => {
                    let s = morrey_norm(&f, p, &theta, &w, &balls)?;
                    (s.value, Some(s.ball))
                }
                NormKind::WeakMorrey => {
                    let s = weak_morrey_norm(&f, &theta, &w, &balls)?;
                    (s.value, Some(s.ball))
                }
                NormKind::LloglMorrey => {
                    let s = llogl_morrey_norm(&f, &theta, &w, &balls)?;
                    (s.value, Some(s.ball))
                }
                NormKind::Lp => (lp_norm(&f, p, &w)?, None),
                NormKind::WeakL1 => (weak_l1_norm(&f, &w)?, None),
                NormKind::Bmo => {
                    let s = bmo_norm(&fs.components()[0], &balls)?;
                    (s.value, Some(s.ball))
                }
                NormKind::Luxemburg => (luxemburg_norm(&f, &Region::whole_domain(&grid), YoungFunction::Llogl, Some(&w))?, None),
            };
            let doc = serde_json::json!({ "value": value, "ball": ball });
            fs::write(out, serde_json::to_string_pretty(&doc)? + "\n")?;
            println!("{value:.12e}");
            Ok(true)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Verify { theorem, config, corollary, out } => {
            let theorem: TheoremId = theorem.parse()?;
            let mut cfg = load_config(theorem, config.as_deref())?;
            if let Some(name) = corollary {
                let c = Corollary::all(cfg.grid.dim)
                    .into_iter()
                    .find(|c| c.theorem == theorem && c.name().split('/').next() == Some(name.as_str()))
                    .with_context(|| format!("no corollary {name:?} for theorem {theorem}"))?;
                cfg = c.apply(&cfg)?;
            }
            finish(&run_theorem_check(&cfg)?, &out)
        }
        Command::Sweep { axis, values, theorem, config, out } => {
            let axis: SweepAxis = axis.parse()?;
            let cfg = load_config(theorem.parse()?, config.as_deref())?;
            finish(&sweep(&cfg, axis, &values)?, &out)
        }
        Command::Compute { op, input, symbol, alpha, family_size, cone_levels, sigma, norm, p, theta, weight, out } => compute(
            op,
            &input,
            symbol.as_deref(),
            alpha,
            family_size,
            cone_levels,
            sigma,
            norm,
            p,
            theta.as_deref(),
            weight.as_deref(),
            &out,
        ),
        Command::Oracle { suite, seed, out } => {
            let suite: Suite = suite.parse()?;
            let results = run_suite(suite, seed)?;
            for r in &results {
                println!(
                    "[{}] {}/{}: worst {:.3e} (tolerance {:.1e}, {} cases)",
                    if r.passed { "pass" } else { "FAIL" },
                    r.suite,
                    r.name,
                    r.worst,
                    r.tolerance,
                    r.cases
                );
            }
            if let Some(dir) = out {
                fs::create_dir_all(&dir)?;
                fs::write(dir.join("oracle.json"), serde_json::to_string_pretty(&results)? + "\n")?;
            }
            Ok(results.iter().all(|r| r.passed))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
