//! Monte Carlo error study over a grid of noise levels.
//!
//! A [`Study`] owns everything shared by its replicates (target coefficients,
//! true operator, needlet frame, evaluation grid). Each replicate draws one
//! fixture, thresholds the noisy operator once and runs every requested
//! method on it. Replicates are independent, so callers may run
//! [`Study::run_replicate`] in any order or in parallel and collect the
//! outcomes with [`ErrorReport::from_outcomes`].

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::estimators::{bbd_estimate_thresholded, bnd_estimate_thresholded, Method, ThresholdConfig};
use crate::metrics::{density_values, eval_grid, field_values, normalized_loss, EvalGrid, LossNorm};
use crate::needlets::NeedletFrame;
use crate::simulate::{derive_seed, Scenario, TargetKind};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseCell {
    pub delta: f64,
    pub eps: f64,
}

/// The `(δ, ε)` grid `{3·10⁻³, 10⁻³, 10⁻⁴} × {10⁻³, 10⁻⁴}`.
pub fn table3_cells() -> Vec<NoiseCell> {
    let mut cells = Vec::with_capacity(6);
    for delta in [3e-3, 1e-3, 1e-4] {
        for eps in [1e-3, 1e-4] {
            cells.push(NoiseCell { delta, eps });
        }
    }
    cells
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub cells: Vec<NoiseCell>,
    pub replicates: usize,
    pub master_seed: u64,
    pub methods: Vec<Method>,
    pub kappa: f64,
    pub tau_sig: f64,
    pub tau_op: f64,
    pub lambda: f64,
    /// Upper bound on the maximal needlet level.
    pub level_cap: usize,
    pub grid_size: usize,
    pub alpha: f64,
    pub nu: f64,
    pub target: TargetKind,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            cells: table3_cells(),
            replicates: 20,
            master_seed: 0,
            methods: vec![Method::Bbd, Method::Bnd],
            kappa: 0.8,
            tau_sig: 0.9,
            tau_op: 0.2,
            lambda: 1.0,
            level_cap: 8,
            grid_size: 4096,
            alpha: PI,
            nu: 1.0,
            target: TargetKind::ExpSpike,
        }
    }
}

impl StudyConfig {
    pub fn threshold_config(&self, cell: NoiseCell) -> ThresholdConfig {
        ThresholdConfig {
            kappa: self.kappa,
            tau_sig: self.tau_sig,
            tau_op: self.tau_op,
            lambda: self.lambda,
            eps: cell.eps,
            delta: cell.delta,
            level_override: None,
            level_cap: Some(self.level_cap),
        }
    }

    /// Largest level any cell can reach.
    fn deepest_level(&self) -> Result<usize> {
        let mut deepest = 0;
        for &cell in &self.cells {
            deepest = deepest.max(self.threshold_config(cell).max_level()?);
        }
        Ok(deepest)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub delta: f64,
    pub eps: f64,
    pub method: Method,
    pub replicate: usize,
    pub l2: f64,
    pub linf: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateFailure {
    pub delta: f64,
    pub eps: f64,
    pub method: Method,
    pub replicate: usize,
    pub message: String,
}

pub type ReplicateOutcome = core::result::Result<ErrorRow, ReplicateFailure>;

#[derive(Debug, Clone)]
pub struct Study {
    config: StudyConfig,
    scenario: Scenario,
    frame: NeedletFrame,
    grid: EvalGrid,
    truth: Vec<f64>,
}

impl Study {
    pub fn new(config: StudyConfig) -> Result<Self> {
        if config.cells.is_empty() || config.methods.is_empty() {
            return Err(Error::InvalidParameter(
                "study needs at least one noise cell and one method".into(),
            ));
        }
        let deepest = config.deepest_level()?;
        let lmax = (1usize << (deepest + 1)) - 1;
        let scenario = Scenario::rosenthal(config.target.density(), config.alpha, config.nu, lmax)?;
        let frame = NeedletFrame::new(deepest);
        let grid = eval_grid(config.grid_size)?;
        let truth = density_values(scenario.target(), &grid);
        Ok(Self {
            config,
            scenario,
            frame,
            grid,
            truth,
        })
    }

    pub fn config(&self) -> &StudyConfig {
        &self.config
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Every `(cell index, replicate)` pair.
    pub fn tasks(&self) -> Vec<(usize, usize)> {
        (0..self.config.cells.len())
            .flat_map(|c| (0..self.config.replicates).map(move |r| (c, r)))
            .collect()
    }

    pub fn replicate_seed(&self, cell: usize, replicate: usize) -> u64 {
        derive_seed(self.config.master_seed, cell as u64, replicate as u64)
    }

    /// One outcome per method for replicate `replicate` of cell `cell`.
    pub fn run_replicate(&self, cell: usize, replicate: usize) -> Vec<ReplicateOutcome> {
        let noise = self.config.cells[cell];
        let fail = |method: Method, e: Error| ReplicateFailure {
            delta: noise.delta,
            eps: noise.eps,
            method,
            replicate,
            message: e.to_string(),
        };
        let cfg = self.config.threshold_config(noise);
        let prepared = cfg.max_level().and_then(|j| {
            let fx = self
                .scenario
                .draw(noise.delta, noise.eps, self.replicate_seed(cell, replicate))?;
            let top = fx.noisy_operator().threshold(cfg.kappa, j);
            Ok((fx.observation, top))
        });
        let (obs, top) = match prepared {
            Ok(p) => p,
            Err(e) => return self.config.methods.iter().map(|&m| Err(fail(m, e.clone()))).collect(),
        };
        self.config
            .methods
            .iter()
            .map(|&method| {
                let est = match method {
                    Method::Bnd => bnd_estimate_thresholded(&obs, &top, &cfg, &self.frame),
                    Method::Bbd => bbd_estimate_thresholded(&obs, &top, &cfg),
                }
                .map_err(|e| fail(method, e))?;
                let values = field_values(&est.f_hat, &self.grid);
                Ok(ErrorRow {
                    delta: noise.delta,
                    eps: noise.eps,
                    method,
                    replicate,
                    l2: normalized_loss(&values, &self.truth, &self.grid, LossNorm::L2),
                    linf: normalized_loss(&values, &self.truth, &self.grid, LossNorm::Linf),
                })
            })
            .collect()
    }

    /// Runs every replicate in order.
    pub fn run(&self) -> ErrorReport {
        ErrorReport::from_outcomes(
            self.tasks()
                .into_iter()
                .flat_map(|(c, r)| self.run_replicate(c, r)),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub delta: f64,
    pub eps: f64,
    pub method: Method,
    pub count: usize,
    pub mean_l2: f64,
    pub stderr_l2: f64,
    pub median_l2: f64,
    pub mean_linf: f64,
    pub stderr_linf: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorReport {
    pub rows: Vec<ErrorRow>,
    pub failures: Vec<ReplicateFailure>,
}

impl ErrorReport {
    pub fn from_outcomes<I: IntoIterator<Item = ReplicateOutcome>>(outcomes: I) -> Self {
        let mut report = Self::default();
        for o in outcomes {
            match o {
                Ok(row) => report.rows.push(row),
                Err(f) => report.failures.push(f),
            }
        }
        report
            .rows
            .sort_by_key(|r| key(r.delta, r.eps, r.method, r.replicate));
        report
    }

    /// Rows of one `(δ, ε, method)` cell.
    pub fn cell_rows(&self, delta: f64, eps: f64, method: Method) -> impl Iterator<Item = &ErrorRow> {
        self.rows
            .iter()
            .filter(move |r| r.delta == delta && r.eps == eps && r.method == method)
    }

    /// Means, standard errors and medians per `(δ, ε, method)`, in first-seen order.
    pub fn summaries(&self) -> Vec<CellSummary> {
        let mut keys: Vec<(f64, f64, Method)> = Vec::new();
        for r in &self.rows {
            if !keys.iter().any(|&(d, e, m)| d == r.delta && e == r.eps && m == r.method) {
                keys.push((r.delta, r.eps, r.method));
            }
        }
        keys.into_iter()
            .map(|(delta, eps, method)| {
                let l2: Vec<f64> = self.cell_rows(delta, eps, method).map(|r| r.l2).collect();
                let linf: Vec<f64> = self.cell_rows(delta, eps, method).map(|r| r.linf).collect();
                let (mean_l2, stderr_l2) = mean_and_stderr(&l2);
                let (mean_linf, stderr_linf) = mean_and_stderr(&linf);
                CellSummary {
                    delta,
                    eps,
                    method,
                    count: l2.len(),
                    mean_l2,
                    stderr_l2,
                    median_l2: median(&l2),
                    mean_linf,
                    stderr_linf,
                }
            })
            .collect()
    }

    pub fn summary(&self, delta: f64, eps: f64, method: Method) -> Option<CellSummary> {
        self.summaries()
            .into_iter()
            .find(|s| s.delta == delta && s.eps == eps && s.method == method)
    }
}

fn key(delta: f64, eps: f64, method: Method, replicate: usize) -> (u64, u64, u8, usize) {
    // Largest noise first, matching the usual table layout.
    (
        u64::MAX - delta.to_bits(),
        u64::MAX - eps.to_bits(),
        method as u8,
        replicate,
    )
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
