//! Monte-Carlo sweep over sampling fraction and SMNR.
//!
//! Every grid point and trial index gets a child seed
//! `derive_seed(master_seed, [xi_index, smnr_index, trial])` (SplitMix64 fold).
//! From it one problem instance is drawn and handed, unchanged, to every
//! requested estimator.

use std::collections::hash_map::DefaultHasher;
use std::hash::Hasher;
use std::time::Instant;

use altrecon::linalg::vectorize;
use altrecon::metrics::ratio_db;
use altrecon::probgen::{add_noise, gen_hankel_lowrank, gen_lowrank};
use altrecon::seed::derive_seed;
use altrecon::sensing::make_gaussian_operator;
use altrecon::{adls_solve, ale_solve, als_solve, Estimate, LinearStructure, Matrix, MeasurementModel, SolverOptions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Algo, SweepConfig};

/// Sub-seed tags for the pieces of one instance.
const TAG_TARGET: u64 = 1;
const TAG_OPERATOR: u64 = 2;
const TAG_NOISE: u64 = 3;
const TAG_SOLVER: u64 = 4;

/// One estimator run on one problem instance. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub algo: String,
    pub n1: usize,
    pub n2: usize,
    pub r: usize,
    pub m: usize,
    pub xi: f64,
    pub smnr_db: f64,
    pub trial: usize,
    pub seed: u64,
    pub srer_db: f64,
    pub iterations: usize,
    pub runtime_ms: f64,
    pub converged: bool,
    /// `||X||_F^2`; not written to CSV.
    #[serde(skip)]
    pub signal_energy: f64,
    /// `||X - X_hat||_F^2`; not written to CSV.
    #[serde(skip)]
    pub error_energy: f64,
}

/// A generated problem: ground truth plus the measurement model handed to the solvers.
#[derive(Debug, Clone)]
pub struct Instance {
    pub x: Matrix,
    pub model: MeasurementModel,
    pub sigma: f64,
    pub seed: u64,
}

impl Instance {
    /// Hash of the bits of `(X, abar, ybar)`.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for part in [self.x.as_slice(), self.model.abar().as_slice(), self.model.ybar().as_slice()] {
            h.write_usize(part.len());
            for v in part {
                h.write_u64(v.to_bits());
            }
        }
        h.finish()
    }
}

pub fn child_seed(master_seed: u64, xi_index: usize, smnr_index: usize, trial: usize) -> u64 {
    derive_seed(master_seed, &[xi_index as u64, smnr_index as u64, trial as u64])
}

/// Draws the instance for one grid point and trial.
///
/// The noise is white with a single variance, so whitening would only divide
/// `A` and `y` by `sigma`. That leaves every least-squares solution unchanged
/// but rescales the data term against the ADLS structure weight by `1/sigma^2`,
/// tying a good `mu` to the noise level. The model is therefore built from the
/// raw `(A, y)` and `sigma` is kept alongside it.
pub fn make_instance(
    n1: usize,
    n2: usize,
    r: usize,
    m: usize,
    smnr_db: f64,
    structured: bool,
    seed: u64,
) -> altrecon::Result<Instance> {
    let x = if structured {
        gen_hankel_lowrank(n1, n2, r, derive_seed(seed, &[TAG_TARGET]))?.0
    } else {
        gen_lowrank(n1, n2, r, derive_seed(seed, &[TAG_TARGET]))?
    };
    let a = make_gaussian_operator(m, n1, n2, derive_seed(seed, &[TAG_OPERATOR]));
    let clean = &a * vectorize(&x);
    let (y, sigma) = add_noise(&clean, &x, smnr_db, derive_seed(seed, &[TAG_NOISE]))?;
    let model = MeasurementModel::new(a, y, n1, n2)?;
    Ok(Instance { x, model, sigma, seed })
}

/// Runs one estimator on a model. `mu_unstructured` replaces `opts.mu` for
/// `adls-unstructured`.
pub fn run_algo(
    algo: Algo,
    model: &MeasurementModel,
    r: usize,
    opts: &SolverOptions,
    mu_unstructured: f64,
    seed: u64,
) -> altrecon::Result<Estimate> {
    let (n1, n2) = (model.n1(), model.n2());
    let hankel = LinearStructure::hankel(n1, n2);
    match algo {
        Algo::Als => als_solve(model, r, None, opts, derive_seed(seed, &[TAG_SOLVER])),
        Algo::AlsHankel => als_solve(model, r, Some(&hankel), opts, derive_seed(seed, &[TAG_SOLVER])),
        Algo::Ale => ale_solve(model, r, &hankel, opts),
        Algo::Adls => adls_solve(model, r, &hankel, opts),
        Algo::AdlsUnstructured => {
            let opts = SolverOptions { mu: mu_unstructured, ..opts.clone() };
            adls_solve(model, r, &LinearStructure::unstructured(n1, n2), &opts)
        }
    }
}

/// Grid coordinates of one unit of work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TrialKey {
    pub xi_index: usize,
    pub smnr_index: usize,
    pub trial: usize,
}

/// Runs every algorithm on the instance at `key`. Each record is paired with
/// the fingerprint of the instance that algorithm received.
pub fn run_trial(cfg: &SweepConfig, key: TrialKey) -> Vec<(TrialRecord, u64)> {
    let xi = cfg.xi_grid[key.xi_index];
    let smnr_db = cfg.smnr_grid_db[key.smnr_index];
    let m = cfg.measurements(xi);
    let seed = child_seed(cfg.master_seed, key.xi_index, key.smnr_index, key.trial);
    let base = TrialRecord {
        algo: String::new(),
        n1: cfg.n1,
        n2: cfg.n2,
        r: cfg.r,
        m,
        xi,
        smnr_db,
        trial: key.trial,
        seed,
        srer_db: 0.0,
        iterations: 0,
        runtime_ms: 0.0,
        converged: false,
        signal_energy: 0.0,
        error_energy: 0.0,
    };
    let instance = match make_instance(cfg.n1, cfg.n2, cfg.r, m, smnr_db, cfg.structured, seed) {
        Ok(inst) => inst,
        Err(e) => {
            log::warn!("instance generation failed at {key:?}: {e}");
            return cfg
                .algos
                .iter()
                .map(|a| (TrialRecord { algo: a.name().to_string(), ..base.clone() }, 0))
                .collect();
        }
    };
    let signal = instance.x.norm_squared();
    cfg.algos
        .iter()
        .map(|&algo| {
            let fingerprint = instance.fingerprint();
            let started = Instant::now();
            let outcome = run_algo(algo, &instance.model, cfg.r, &cfg.solver_opts, cfg.mu_unstructured, seed);
            let runtime_ms = started.elapsed().as_secs_f64() * 1e3;
            let (error, iterations, converged) = match outcome {
                Ok(est) if est.x_hat.iter().all(|v| v.is_finite()) => {
                    ((&instance.x - &est.x_hat).norm_squared(), est.iterations, est.converged)
                }
                Ok(est) => (signal, est.iterations, false),
                Err(e) => {
                    log::warn!("{algo} failed at {key:?}: {e}");
                    (signal, 0, false)
                }
            };
            let record = TrialRecord {
                algo: algo.name().to_string(),
                srer_db: ratio_db(signal, error),
                iterations,
                runtime_ms,
                converged,
                signal_energy: signal,
                error_energy: error,
                ..base.clone()
            };
            (record, fingerprint)
        })
        .collect()
}

fn keys(cfg: &SweepConfig) -> Vec<TrialKey> {
    let mut keys = Vec::with_capacity(cfg.xi_grid.len() * cfg.smnr_grid_db.len() * cfg.trials);
    for xi_index in 0..cfg.xi_grid.len() {
        for smnr_index in 0..cfg.smnr_grid_db.len() {
            for trial in 0..cfg.trials {
                keys.push(TrialKey { xi_index, smnr_index, trial });
            }
        }
    }
    keys
}

/// Like [`run_sweep`], keeping each record's instance fingerprint.
pub fn run_sweep_with_fingerprints(cfg: &SweepConfig) -> Vec<(TrialRecord, u64)> {
    let algo_rank = |name: &str| cfg.algos.iter().position(|a| a.name() == name).unwrap_or(usize::MAX);
    let mut out: Vec<(TrialKey, (TrialRecord, u64))> = keys(cfg)
        .into_par_iter()
        .flat_map_iter(|key| run_trial(cfg, key).into_iter().map(move |rec| (key, rec)))
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| algo_rank(&a.1 .0.algo).cmp(&algo_rank(&b.1 .0.algo))));
    out.into_iter().map(|(_, rec)| rec).collect()
}

/// Runs the full grid. Output order is (xi, smnr, trial, algo) regardless of scheduling.
pub fn run_sweep(cfg: &SweepConfig) -> Vec<TrialRecord> {
    run_sweep_with_fingerprints(cfg).into_iter().map(|(r, _)| r).collect()
}
