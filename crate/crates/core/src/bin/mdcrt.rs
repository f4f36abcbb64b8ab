use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mdcrt::config::{ExperimentConfig, FSpec, Reconstructor};
use mdcrt::crt::{crt_solve, gcld, lcrm_many, Congruence};
use mdcrt::drange;
use mdcrt::lattice::ModReducer;
use mdcrt::linalg::{hnf, parse_matrix_list, snf, IntMatrix, IntVector};
use mdcrt::multistage::{build_plan, final_region, multistage_reconstruct};
use mdcrt::numeric::{fmt_rational, sqrt_rational_f64};
use mdcrt::robust::{build_instance, robust_reconstruct};
use mdcrt::simkit::{self, run_sweep, SweepSummary};
use mdcrt::svp_search::{self, search_max_svp, search_range};
use mdcrt::Error;

#[derive(Parser)]
#[command(
    name = "mdcrt",
    version,
    about = "Exact multidimensional CRT over integer matrix moduli"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hermite normal form `m = h u`
    Hnf { matrix: String },
    /// Smith normal form `u m v = lambda`
    Snf { matrix: String },
    /// Greatest common left divisor, HNF-normalized
    Gcld { a: String, b: String },
    /// Least common right multiple of one or more matrices, HNF-normalized
    Lcrm {
        #[arg(required = true)]
        matrices: Vec<String>,
    },
    /// Error-free CRT from a config with `remainder` lines or an explicit `f`
    Crt { config: PathBuf },
    /// Single-stage robust reconstruction
    Robust(RunArgs),
    /// Multi-stage robust reconstruction
    Multistage(RunArgs),
    /// Maximum shortest-vector search over `[[1,0],[i,p]]`
    SvpSearch(SvpArgs),
    /// Dynamic-range table
    Drange {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 2)]
        dim: u32,
    },
    /// Monte-Carlo sweep for every reconstructor named in the config
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        sweep: SweepArgs,
        /// Run only this reconstructor
        #[arg(long)]
        reconstructor: Option<Reconstructor>,
    },
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Run a tau sweep instead of a single reconstruction
    #[arg(long)]
    sweep: bool,
    #[command(flatten)]
    opts: SweepArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also emit per-trial rows
    #[arg(long)]
    raw: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SvpArgs {
    #[arg(long, conflicts_with_all = ["range", "full"])]
    prime: Option<u64>,
    /// Every prime in `[a, b)`
    #[arg(long, num_args = 2, value_names = ["A", "B"], conflicts_with = "full")]
    range: Option<Vec<u64>>,
    /// Every prime below 100000
    #[arg(long)]
    full: bool,
    #[arg(long)]
    jobs: Option<usize>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Inconsistent => 3,
        Error::CapExceeded { .. } | Error::DimensionUnsupported(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn io_err(e: io::Error) -> Error {
    Error::InvalidArgument(e.to_string())
}

fn open_output(path: Option<&Path>) -> mdcrt::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(io_err)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cmd: Command) -> mdcrt::Result<()> {
    match cmd {
        Command::Hnf { matrix } => {
            let d = hnf(&IntMatrix::parse(&matrix)?)?;
            println!("h = {}", d.h);
            println!("u = {}", d.u);
        }
        Command::Snf { matrix } => {
            let d = snf(&IntMatrix::parse(&matrix)?);
            println!("lambda = {}", d.lambda);
            println!("u = {}", d.u);
            println!("v = {}", d.v);
        }
        Command::Gcld { a, b } => {
            println!("{}", gcld(&IntMatrix::parse(&a)?, &IntMatrix::parse(&b)?)?);
        }
        Command::Lcrm { matrices } => {
            let ms = matrices
                .iter()
                .map(|s| parse_matrix_list(s))
                .collect::<mdcrt::Result<Vec<_>>>()?
                .concat();
            println!("{}", lcrm_many(&ms)?);
        }
        Command::Crt { config } => cmd_crt(&ExperimentConfig::load(&config)?)?,
        Command::Robust(args) => cmd_reconstruct(args, Reconstructor::Single)?,
        Command::Multistage(args) => cmd_reconstruct(args, Reconstructor::Multistage)?,
        Command::SvpSearch(args) => cmd_svp(args)?,
        Command::Drange { q, dim } => {
            println!("{}", drange::TABLE_HEADER);
            println!("{}", drange::table_row(q, dim));
        }
        Command::Simulate {
            config,
            sweep,
            reconstructor,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let kinds = match reconstructor {
                Some(r) => vec![r],
                None => cfg.effective_reconstructors(),
            };
            sweep_and_write(cfg, &kinds, &sweep)?;
        }
    }
    Ok(())
}

/// Remainders from `remainder` lines, else from an explicit `f`.
fn remainders_for(cfg: &ExperimentConfig) -> mdcrt::Result<Vec<IntVector>> {
    if !cfg.remainders.is_empty() {
        if cfg.remainders.len() != cfg.moduli.len() {
            return Err(Error::ConfigInvalid(format!(
                "{} remainders for {} moduli",
                cfg.remainders.len(),
                cfg.moduli.len()
            )));
        }
        return Ok(cfg.remainders.clone());
    }
    match &cfg.f_spec {
        FSpec::Explicit(f) => cfg
            .moduli
            .iter()
            .map(|m| Ok(ModReducer::new(m)?.remainder(f)))
            .collect(),
        _ => Err(Error::ConfigInvalid(
            "single-shot runs need `remainder` lines or an explicit `f`".into(),
        )),
    }
}

fn cmd_crt(cfg: &ExperimentConfig) -> mdcrt::Result<()> {
    let rs = remainders_for(cfg)?;
    let cs = cfg
        .moduli
        .iter()
        .zip(rs)
        .map(|(m, r)| Congruence::new(m.clone(), r))
        .collect::<mdcrt::Result<Vec<_>>>()?;
    let sol = crt_solve(&cs)?;
    println!("value = {}", sol.value);
    println!("lcrm = {}", sol.lcrm);
    Ok(())
}

fn cmd_reconstruct(args: RunArgs, kind: Reconstructor) -> mdcrt::Result<()> {
    let cfg = ExperimentConfig::load(&args.config)?;
    if args.sweep {
        return sweep_and_write(cfg, &[kind], &args.opts);
    }
    let rs = remainders_for(&cfg)?;
    let mut out = open_output(args.opts.out.as_deref())?;
    let (output, region) = match kind {
        Reconstructor::Single => {
            let inst = build_instance(&cfg.moduli)?;
            writeln!(out, "anchor = {}", inst.anchor()).map_err(io_err)?;
            writeln!(out, "tau_bound_sq = {}", fmt_rational(inst.tau_bound_sq()))
                .map_err(io_err)?;
            writeln!(
                out,
                "tau_bound_f = {:.6}",
                sqrt_rational_f64(inst.tau_bound_sq())
            )
            .map_err(io_err)?;
            writeln!(out, "lcrm = {}", inst.lcrm()).map_err(io_err)?;
            (robust_reconstruct(&inst, &rs)?, inst.region().clone())
        }
        Reconstructor::Multistage => {
            let plan = build_plan(&cfg.moduli, &cfg.grouping)?;
            for (s, groups) in plan.stages().iter().enumerate() {
                for (g, grp) in groups.iter().enumerate() {
                    writeln!(
                        out,
                        "stage {} group {} members = {:?} lcrm = {} delta_sq = {} delta_f = {:.6}",
                        s + 1,
                        g,
                        grp.members,
                        grp.designated_lcrm,
                        grp.delta_sq,
                        grp.delta_sq.sqrt_f64()
                    )
                    .map_err(io_err)?;
                }
            }
            writeln!(out, "final_anchor = {}", plan.final_anchor()).map_err(io_err)?;
            writeln!(out, "delta_final_sq = {}", plan.delta_final_sq()).map_err(io_err)?;
            for b in plan.per_group_bounds() {
                writeln!(
                    out,
                    "group {} tau_max_sq = {} tau_max_f = {:.6}",
                    b.group,
                    b.tau_max_sq,
                    b.tau_max_sq.sqrt_f64()
                )
                .map_err(io_err)?;
            }
            let overall = plan.overall_bound_sq();
            writeln!(out, "tau_bound_sq = {overall}").map_err(io_err)?;
            writeln!(out, "tau_bound_f = {:.6}", overall.sqrt_f64()).map_err(io_err)?;
            (multistage_reconstruct(&plan, &rs)?, final_region(&plan)?)
        }
    };
    writeln!(out, "region_cardinality = {}", region.cardinality()).map_err(io_err)?;
    writeln!(out, "region_shifts = {}", region.shift_count()).map_err(io_err)?;
    writeln!(out, "estimate = {}", output.estimate).map_err(io_err)?;
    let folds: Vec<String> = output.folds.iter().map(ToString::to_string).collect();
    writeln!(out, "folds = {}", folds.join(" ")).map_err(io_err)?;
    out.flush().map_err(io_err)
}

fn sweep_and_write(
    mut cfg: ExperimentConfig,
    kinds: &[Reconstructor],
    opts: &SweepArgs,
) -> mdcrt::Result<()> {
    if let Some(t) = opts.trials {
        cfg.trials = t;
    }
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    let jobs = opts.jobs.or(cfg.jobs);
    let path = opts
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from));
    let summaries = kinds
        .iter()
        .map(|&k| run_sweep(&cfg, k, jobs, opts.raw))
        .collect::<mdcrt::Result<Vec<SweepSummary>>>()?;
    for s in &summaries {
        if let Some(f) = &s.f_fixed {
            eprintln!("{}: f = {f}", s.reconstructor);
        }
    }
    let mut out = open_output(path.as_deref())?;
    writeln!(out, "{}", simkit::CSV_HEADER).map_err(io_err)?;
    for s in &summaries {
        for row in s.csv_rows() {
            writeln!(out, "{row}").map_err(io_err)?;
        }
    }
    if opts.raw {
        writeln!(out, "{}", simkit::RAW_CSV_HEADER).map_err(io_err)?;
        for s in &summaries {
            for row in s.raw_csv_rows() {
                writeln!(out, "{row}").map_err(io_err)?;
            }
        }
    }
    out.flush().map_err(io_err)
}

fn cmd_svp(args: SvpArgs) -> mdcrt::Result<()> {
    let results = if let Some(p) = args.prime {
        vec![search_max_svp(p)?]
    } else {
        let (lo, hi) = match (&args.range, args.full) {
            (Some(r), _) => (r[0], r[1]),
            (None, true) => (2, 100_000),
            (None, false) => {
                return Err(Error::InvalidArgument(
                    "give --prime, --range A B or --full".into(),
                ))
            }
        };
        match args.jobs {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidArgument(e.to_string()))?
                .install(|| search_range(lo, hi))?,
            None => search_range(lo, hi)?,
        }
    };
    let mut out = io::stdout().lock();
    writeln!(out, "{}", svp_search::CSV_HEADER).map_err(io_err)?;
    for r in &results {
        writeln!(out, "{}", r.csv_row()).map_err(io_err)?;
    }
    Ok(())
}
