use std::io::Write;
use std::path::PathBuf;

use altrecon::seed::derive_seed;
use altrecon::{adls_solve_traced, ale_solve_traced, als_solve_traced, LinearStructure, Stage, TraceEvent};
use altrecon_bench::config::{default_algos, Algo, SweepConfig};
use altrecon_bench::report::{aggregate, emit_csv, write_summary};
use altrecon_bench::sweep::{child_seed, make_instance};
use altrecon_bench::{run_sweep, BenchError};
use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bench", about = "Monte-Carlo benchmark for alternating low-rank matrix reconstruction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep over sampling fraction and SMNR and write one CSV row per trial and algorithm.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated sampling fractions m/(n1 n2).
        #[arg(long, value_delimiter = ',')]
        xi: Option<Vec<f64>>,
        /// Comma-separated SMNR values in dB ("inf" for noiseless).
        #[arg(long, value_delimiter = ',')]
        smnr: Option<Vec<f64>>,
        /// Monte-Carlo trials per grid point.
        #[arg(long)]
        trials: Option<usize>,
        /// Comma-separated algorithms: als, als-hankel, ale, adls, adls-unstructured.
        #[arg(long, value_delimiter = ',')]
        algos: Option<Vec<Algo>>,
        /// Also write the aggregated summary table here.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Run one algorithm on one instance and emit its per-iteration trace as CSV.
    Trace {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "adls")]
        algo: Algo,
        /// Sampling fraction.
        #[arg(long)]
        xi: Option<f64>,
        /// SMNR in dB.
        #[arg(long)]
        smnr: Option<f64>,
        /// Trial index used to derive the instance seed.
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Flat TOML config; keys match the sweep configuration field names.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Target rows.
    #[arg(long)]
    n1: Option<usize>,
    /// Target columns.
    #[arg(long)]
    n2: Option<usize>,
    /// Target rank r.
    #[arg(long)]
    rank: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Hankel problem family (true) or unstructured low-rank (false).
    #[arg(long)]
    structured: Option<bool>,
    /// Structure weight for Hankel ADLS.
    #[arg(long)]
    mu: Option<f64>,
    /// Structure weight for unstructured ADLS.
    #[arg(long)]
    mu_unstructured: Option<f64>,
    /// Output path (stdout for trace when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn load(&self) -> Result<SweepConfig> {
        let mut cfg = match &self.config {
            Some(p) => SweepConfig::from_file(p)?,
            None => SweepConfig::default(),
        };
        if let Some(v) = self.n1 {
            cfg.n1 = v;
        }
        if let Some(v) = self.n2 {
            cfg.n2 = v;
        }
        if let Some(v) = self.rank {
            cfg.r = v;
        }
        if let Some(v) = self.seed {
            cfg.master_seed = v;
        }
        if let Some(v) = self.structured {
            if v != cfg.structured {
                cfg.algos = default_algos(v);
            }
            cfg.structured = v;
        }
        if let Some(v) = self.mu {
            cfg.solver_opts.mu = v;
        }
        if let Some(v) = self.mu_unstructured {
            cfg.mu_unstructured = v;
        }
        if let Some(v) = &self.out {
            cfg.output_path = v.clone();
        }
        Ok(cfg)
    }
}

fn stage_name(stage: Stage) -> &'static str {
    match stage {
        Stage::Init => "init",
        Stage::RightHalf => "right",
        Stage::LeftHalf => "left",
        Stage::Outer => "outer",
    }
}

fn trace(cfg: &SweepConfig, algo: Algo, xi: f64, smnr: f64, trial: usize, out: Option<&PathBuf>) -> Result<()> {
    let m = cfg.measurements(xi);
    let seed = child_seed(cfg.master_seed, 0, 0, trial);
    let inst = make_instance(cfg.n1, cfg.n2, cfg.r, m, smnr, cfg.structured, seed)?;
    let (n1, n2) = (cfg.n1, cfg.n2);
    let hankel = LinearStructure::hankel(n1, n2);
    let opts = &cfg.solver_opts;
    let mut events: Vec<TraceEvent> = Vec::new();
    let mut sink = |e: &TraceEvent| events.push(*e);
    let model = &inst.model;
    let est = match algo {
        Algo::Als => als_solve_traced(model, cfg.r, None, opts, derive_seed(seed, &[4]), &mut sink),
        Algo::AlsHankel => als_solve_traced(model, cfg.r, Some(&hankel), opts, derive_seed(seed, &[4]), &mut sink),
        Algo::Ale => ale_solve_traced(model, cfg.r, &hankel, opts, &mut sink),
        Algo::Adls => adls_solve_traced(model, cfg.r, &hankel, opts, &mut sink),
        Algo::AdlsUnstructured => {
            let opts = altrecon::SolverOptions { mu: cfg.mu_unstructured, ..opts.clone() };
            adls_solve_traced(model, cfg.r, &LinearStructure::unstructured(n1, n2), &opts, &mut sink)
        }
    }?;

    let mut w: Box<dyn Write> = match out {
        Some(p) => Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    writeln!(w, "iteration,stage,objective,primal_right,primal_left,stop_statistic")?;
    for e in &events {
        writeln!(
            w,
            "{},{},{:e},{:e},{:e},{:e}",
            e.iteration,
            stage_name(e.stage),
            e.objective,
            e.primal_right,
            e.primal_left,
            e.stop_statistic
        )?;
    }
    let srer = altrecon::srer_db(&inst.x, &est.x_hat)?;
    eprintln!(
        "{algo}: {} iterations, converged={}, srer={srer:.2} dB, residual={:.4e}",
        est.iterations, est.converged, est.final_residual
    );
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { common, xi, smnr, trials, algos, summary } => {
            let mut cfg = common.load()?;
            if let Some(v) = xi {
                cfg.xi_grid = v;
            }
            if let Some(v) = smnr {
                cfg.smnr_grid_db = v;
            }
            if let Some(v) = trials {
                cfg.trials = v;
            }
            if let Some(v) = algos {
                cfg.algos = v;
            }
            cfg.validate()?;
            let records = run_sweep(&cfg);
            emit_csv(&records, &cfg.output_path)?;
            let rows = aggregate(&records);
            match summary {
                Some(p) => {
                    let f = std::fs::File::create(&p).map_err(|e| BenchError::Io(format!("{}: {e}", p.display())))?;
                    write_summary(&rows, f)?;
                }
                None => write_summary(&rows, std::io::stdout().lock())?,
            }
            eprintln!("wrote {} records to {}", records.len(), cfg.output_path.display());
        }
        Command::Trace { common, algo, xi, smnr, trial } => {
            let cfg = common.load()?;
            cfg.validate()?;
            let xi = xi.unwrap_or(cfg.xi_grid[0]);
            let smnr = smnr.unwrap_or(cfg.smnr_grid_db[0]);
            if let Err(e) = trace(&cfg, algo, xi, smnr, trial, common.out.as_ref()) {
                // a reader such as `head` closing the pipe early is not a failure
                let closed = e.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe);
                if !closed {
                    return Err(e);
                }
            }
        }
    }
    Ok(())
}
