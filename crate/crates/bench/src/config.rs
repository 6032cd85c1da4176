use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use altrecon::SolverOptions;
use serde::Deserialize;

use crate::BenchError;

/// Estimators the harness knows how to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algo {
    /// Plain alternating least squares.
    Als,
    /// Alternating least squares with Hankel lift-and-project.
    AlsHankel,
    /// Alternating linear estimator with the Hankel structure.
    Ale,
    /// Alternating direction least squares with the Hankel structure.
    Adls,
    /// Alternating direction least squares without structure.
    AdlsUnstructured,
}

impl Algo {
    pub const ALL: [Algo; 5] = [Algo::Als, Algo::AlsHankel, Algo::Ale, Algo::Adls, Algo::AdlsUnstructured];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Als => "als",
            Algo::AlsHankel => "als-hankel",
            Algo::Ale => "ale",
            Algo::Adls => "adls",
            Algo::AdlsUnstructured => "adls-unstructured",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| BenchError::Config(format!("unknown algorithm '{s}'")))
    }
}

impl<'de> Deserialize<'de> for Algo {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Hankel ADLS structure weight used by the harness. Measured on the 20x20,
/// rank-2 family: small weights leave ADLS behind ALE, 20 and up overtake it.
pub const DEFAULT_MU: f64 = 50.0;
/// Unstructured ADLS weight used by the harness.
pub const DEFAULT_MU_UNSTRUCTURED: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n1: usize,
    pub n2: usize,
    pub r: usize,
    pub xi_grid: Vec<f64>,
    pub smnr_grid_db: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub algos: Vec<Algo>,
    /// Options for every estimator. `solver_opts.mu` is the structure weight of
    /// Hankel ADLS.
    pub solver_opts: SolverOptions,
    /// Structure weight for `adls-unstructured`. With the identity projection the
    /// weight only damps the step toward the previous product, so it wants to be
    /// much smaller than the Hankel weight.
    pub mu_unstructured: f64,
    /// Hankel problem family when set, unstructured low-rank otherwise.
    pub structured: bool,
    pub output_path: PathBuf,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n1: 20,
            n2: 20,
            r: 2,
            xi_grid: vec![0.1, 0.2, 0.3, 0.4, 0.5],
            smnr_grid_db: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0],
            trials: 100,
            master_seed: 2014,
            algos: default_algos(true),
            solver_opts: SolverOptions { mu: DEFAULT_MU, ..SolverOptions::default() },
            mu_unstructured: DEFAULT_MU_UNSTRUCTURED,
            structured: true,
            output_path: PathBuf::from("results.csv"),
        }
    }
}

/// The estimators compared on each problem family by default.
pub fn default_algos(structured: bool) -> Vec<Algo> {
    if structured {
        vec![Algo::Als, Algo::AlsHankel, Algo::Ale, Algo::Adls]
    } else {
        vec![Algo::Als, Algo::AdlsUnstructured]
    }
}

impl SweepConfig {
    /// Measurement count for a sampling fraction.
    pub fn measurements(&self, xi: f64) -> usize {
        (xi * (self.n1 * self.n2) as f64).round() as usize
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: String| Err(BenchError::Config(msg));
        if self.n1 == 0 || self.n2 == 0 {
            return bad(format!("dimensions {}x{}", self.n1, self.n2));
        }
        if self.r == 0 || self.r > self.n1.min(self.n2) {
            return bad(format!("rank {} for a {}x{} target", self.r, self.n1, self.n2));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.xi_grid.is_empty() || self.smnr_grid_db.is_empty() || self.algos.is_empty() {
            return bad("xi_grid, smnr_grid_db and algos must be non-empty".into());
        }
        for &xi in &self.xi_grid {
            if !(xi > 0.0 && xi <= 1.0) || self.measurements(xi) == 0 {
                return bad(format!("sampling fraction {xi} gives no measurements"));
            }
        }
        for &s in &self.smnr_grid_db {
            if s.is_nan() || s == f64::NEG_INFINITY {
                return bad(format!("smnr {s}"));
            }
        }
        if !(self.mu_unstructured >= 0.0) {
            return bad(format!("mu_unstructured {}", self.mu_unstructured));
        }
        self.solver_opts.validate().map_err(|e| BenchError::Config(e.to_string()))
    }

    /// Applies the keys present in a config file on top of `self`.
    pub fn merge_file(mut self, raw: RawConfig) -> Self {
        macro_rules! take {
            ($($field:ident),*) => { $( if let Some(v) = raw.$field { self.$field = v; } )* };
        }
        take!(n1, n2, r, xi_grid, smnr_grid_db, trials, master_seed, mu_unstructured, structured, output_path);
        match raw.algos {
            Some(a) => self.algos = a,
            None if raw.structured.is_some() => self.algos = default_algos(self.structured),
            None => {}
        }
        let o = &mut self.solver_opts;
        macro_rules! take_opt {
            ($($field:ident),*) => { $( if let Some(v) = raw.$field { o.$field = v; } )* };
        }
        take_opt!(epsilon, k_max, lambda, lambda_prime, mu, inner_tol_primal, inner_tol_dual, inner_max);
        self
    }

    pub fn from_file(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::Io(format!("{}: {e}", path.display())))?;
        let raw: RawConfig = toml::from_str(&text).map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
        Ok(SweepConfig::default().merge_file(raw))
    }
}

/// Flat key-value form of [`SweepConfig`]; solver options sit at top level.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub n1: Option<usize>,
    pub n2: Option<usize>,
    pub r: Option<usize>,
    pub xi_grid: Option<Vec<f64>>,
    pub smnr_grid_db: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub master_seed: Option<u64>,
    pub algos: Option<Vec<Algo>>,
    pub mu_unstructured: Option<f64>,
    pub structured: Option<bool>,
    pub output_path: Option<PathBuf>,
    pub epsilon: Option<f64>,
    pub k_max: Option<usize>,
    pub lambda: Option<f64>,
    pub lambda_prime: Option<f64>,
    pub mu: Option<f64>,
    pub inner_tol_primal: Option<f64>,
    pub inner_tol_dual: Option<f64>,
    pub inner_max: Option<usize>,
}
