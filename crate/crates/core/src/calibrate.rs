//! Calibration of the thresholding constants on null benchmarks.
//!
//! `κ` is calibrated on the operator of the uniform law on SO(3) (every block
//! of degree `l ≥ 1` is zero), so any block kept by `T_op` is pure noise.
//! `τ_sig` and `τ_op` are calibrated on the uniform density, whose needlet
//! coefficients vanish at every level, so any surviving coefficient is noise.
//!
//! Each calibration runs independent seeded draws. The per-run functions are
//! public so that callers can spread runs over threads and aggregate with
//! [`KappaCalibration::from_runs`] / [`TauCalibration::from_runs`].

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::estimators::signal_threshold;
use crate::needlets::{level_band, needlet_analyze, NeedletFrame};
use crate::operators::{BlockOperator, NoisyOperator};
use crate::simulate::{derive_seed, Scenario, TargetDensity};
use crate::{Error, Result};

/// Highest degree counted by the `κ` benchmark.
pub const KAPPA_MAX_DEGREE: usize = 10;
/// Highest needlet level counted by the `τ` benchmarks.
pub const TAU_MAX_LEVEL: usize = 3;

const KAPPA_STREAM: u64 = 0x4b;
const TAU_SIG_STREAM: u64 = 0x5a;
const TAU_OP_STREAM: u64 = 0x5b;

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty calibration grid".into()));
    }
    if grid.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidParameter("grid values must be finite and non-negative".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("grid must be strictly ascending".into()));
    }
    Ok(())
}

fn check_runs(n_runs: usize) -> Result<()> {
    if n_runs == 0 {
        return Err(Error::InvalidParameter("need at least one run".into()));
    }
    Ok(())
}

fn rounded_mean(total: usize, n: usize) -> usize {
    (total as f64 / n as f64).round() as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct KappaCalibration {
    pub delta: f64,
    pub grid: Vec<f64>,
    /// Average number of kept blocks `1 ≤ l ≤ 10` per grid value.
    pub mean_counts: Vec<f64>,
    /// `mean_counts` rounded to the nearest integer.
    pub counts: Vec<usize>,
    /// Smallest grid value with a zero rounded count, or the grid maximum.
    pub kappa: f64,
    /// No grid value reached zero.
    pub exhausted: bool,
}

impl KappaCalibration {
    /// Aggregates per-run counts, as returned by [`kappa_run`].
    pub fn from_runs(delta: f64, grid: &[f64], runs: &[Vec<usize>]) -> Result<Self> {
        check_grid(grid)?;
        check_runs(runs.len())?;
        if runs.iter().any(|r| r.len() != grid.len()) {
            return Err(Error::DimensionMismatch("run counts do not match the grid".into()));
        }
        let totals: Vec<usize> = (0..grid.len()).map(|i| runs.iter().map(|r| r[i]).sum()).collect();
        let n = runs.len();
        let counts: Vec<usize> = totals.iter().map(|&t| rounded_mean(t, n)).collect();
        let hit = counts.iter().position(|&c| c == 0);
        Ok(Self {
            delta,
            grid: grid.to_vec(),
            mean_counts: totals.iter().map(|&t| t as f64 / n as f64).collect(),
            counts,
            kappa: grid[hit.unwrap_or(grid.len() - 1)],
            exhausted: hit.is_none(),
        })
    }
}

/// Seed of run `run` of the `κ` benchmark.
pub fn kappa_seed(master: u64, run: usize) -> u64 {
    derive_seed(master, KAPPA_STREAM, run as u64)
}

/// Kept blocks `1 ≤ l ≤ 10` of `T_op(0 + δB)` for each grid value, one draw.
pub fn kappa_run(delta: f64, grid: &[f64], seed: u64) -> Result<Vec<usize>> {
    check_grid(grid)?;
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("δ = {delta} must be positive")));
    }
    let null = BlockOperator::uniform_law(KAPPA_MAX_DEGREE);
    let noisy = NoisyOperator::new(&null, delta, seed).materialize();
    // Level 3 puts the threshold degree at 16, past the benchmark range.
    Ok(grid
        .iter()
        .map(|&kappa| crate::operators::t_op(&noisy, delta, kappa, 3).kept_count_in(1, KAPPA_MAX_DEGREE))
        .collect())
}

/// Smallest `κ` in `grid` whose average kept count over `n_runs` draws rounds to zero.
pub fn calibrate_kappa(delta: f64, n_runs: usize, grid: &[f64], seed: u64) -> Result<KappaCalibration> {
    check_runs(n_runs)?;
    let runs = (0..n_runs)
        .map(|r| kappa_run(delta, grid, kappa_seed(seed, r)))
        .collect::<Result<Vec<_>>>()?;
    KappaCalibration::from_runs(delta, grid, &runs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TauKind {
    Sig,
    Op,
}

impl TauKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TauKind::Sig => "sig",
            TauKind::Op => "op",
        }
    }

    /// Benchmark noise `(ε, δ)`: signal noise dominates for `τ_sig`,
    /// operator noise for `τ_op`.
    pub fn default_noise(self) -> (f64, f64) {
        match self {
            TauKind::Sig => (1e-3, 1e-4),
            TauKind::Op => (1e-4, 1e-3),
        }
    }

    fn stream(self) -> u64 {
        match self {
            TauKind::Sig => TAU_SIG_STREAM,
            TauKind::Op => TAU_OP_STREAM,
        }
    }

    /// `(τ_sig, τ_op)` with the calibrated constant at `tau`, the other at zero.
    fn constants(self, tau: f64) -> (f64, f64) {
        match self {
            TauKind::Sig => (tau, 0.0),
            TauKind::Op => (0.0, tau),
        }
    }
}

impl core::str::FromStr for TauKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sig" => Ok(TauKind::Sig),
            "op" => Ok(TauKind::Op),
            other => Err(Error::InvalidParameter(alloc::format!("unknown τ kind `{other}`"))),
        }
    }
}

/// Shared state of the `τ` benchmark: the uniform density seen through a
/// Rosenthal operator, and a needlet frame up to level 3.
#[derive(Debug, Clone)]
pub struct TauBenchmark {
    kind: TauKind,
    eps: f64,
    delta: f64,
    kappa: f64,
    scenario: Scenario,
    frame: NeedletFrame,
}

impl TauBenchmark {
    pub fn new(kind: TauKind, eps: f64, delta: f64, kappa: f64) -> Result<Self> {
        if !(eps > 0.0 && delta > 0.0 && kappa >= 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "τ benchmark needs ε, δ > 0 and κ ≥ 0 (ε = {eps}, δ = {delta}, κ = {kappa})"
            )));
        }
        let lmax = level_band(TAU_MAX_LEVEL).1;
        Ok(Self {
            kind,
            eps,
            delta,
            kappa,
            scenario: Scenario::rosenthal(TargetDensity::Uniform, PI, 1.0, lmax)?,
            frame: NeedletFrame::new(TAU_MAX_LEVEL),
        })
    }

    pub fn kind(&self) -> TauKind {
        self.kind
    }

    pub fn seed(&self, master: u64, run: usize) -> u64 {
        derive_seed(master, self.kind.stream(), run as u64)
    }

    /// Surviving coefficients per grid value (outer) and level `j ≤ 3` (inner), one draw.
    pub fn run(&self, grid: &[f64], seed: u64) -> Result<Vec<Vec<usize>>> {
        check_grid(grid)?;
        let fx = self.scenario.draw(self.delta, self.eps, seed)?;
        let top = fx.noisy_operator().threshold(self.kappa, TAU_MAX_LEVEL);
        let solution = top.solve(&fx.observation.g, self.frame.lmax())?;
        let beta = needlet_analyze(&solution, &self.frame)?;
        Ok(grid
            .iter()
            .map(|&tau| {
                let (ts, to) = self.kind.constants(tau);
                (0..=TAU_MAX_LEVEL)
                    .map(|j| {
                        let s = signal_threshold(j, &top, self.eps, self.delta, ts, to);
                        beta.level(j).iter().filter(|b| b.abs() > s).count()
                    })
                    .collect()
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauCalibration {
    pub kind: TauKind,
    pub grid: Vec<f64>,
    /// `mean_counts[i][j]`: average survivors at level `j` for grid value `i`.
    pub mean_counts: Vec<Vec<f64>>,
    pub counts: Vec<Vec<usize>>,
    /// Smallest grid value with zero rounded survivors at every level, or the grid maximum.
    pub tau: f64,
    pub exhausted: bool,
}

impl TauCalibration {
    pub fn from_runs(kind: TauKind, grid: &[f64], runs: &[Vec<Vec<usize>>]) -> Result<Self> {
        check_grid(grid)?;
        check_runs(runs.len())?;
        let levels = TAU_MAX_LEVEL + 1;
        if runs
            .iter()
            .any(|r| r.len() != grid.len() || r.iter().any(|c| c.len() != levels))
        {
            return Err(Error::DimensionMismatch("run counts do not match the grid".into()));
        }
        let n = runs.len();
        let mut totals = vec![vec![0usize; levels]; grid.len()];
        for r in runs {
            for (t, c) in totals.iter_mut().zip(r) {
                for (a, b) in t.iter_mut().zip(c) {
                    *a += b;
                }
            }
        }
        let counts: Vec<Vec<usize>> = totals
            .iter()
            .map(|t| t.iter().map(|&x| rounded_mean(x, n)).collect())
            .collect();
        let hit = counts.iter().position(|c| c.iter().all(|&x| x == 0));
        Ok(Self {
            kind,
            grid: grid.to_vec(),
            mean_counts: totals
                .iter()
                .map(|t| t.iter().map(|&x| x as f64 / n as f64).collect())
                .collect(),
            counts,
            tau: grid[hit.unwrap_or(grid.len() - 1)],
            exhausted: hit.is_none(),
        })
    }
}

/// Smallest `τ` in `grid` leaving no coefficient at levels `j ≤ 3` on average.
/// The constant not being calibrated is set to zero.
pub fn calibrate_tau(
    kind: TauKind,
    eps: f64,
    delta: f64,
    kappa: f64,
    grid: &[f64],
    n_runs: usize,
    seed: u64,
) -> Result<TauCalibration> {
    check_runs(n_runs)?;
    let bench = TauBenchmark::new(kind, eps, delta, kappa)?;
    let runs = (0..n_runs)
        .map(|r| bench.run(grid, bench.seed(seed, r)))
        .collect::<Result<Vec<_>>>()?;
    TauCalibration::from_runs(kind, grid, &runs)
}
