//! Parallel drivers for the experiments of `sphdeconv-core`.

use rayon::prelude::*;
use sphdeconv_core::calibrate::{
    kappa_run, kappa_seed, KappaCalibration, TauBenchmark, TauCalibration, TauKind,
};
use sphdeconv_core::estimators::{
    bbd_estimate_thresholded, bnd_estimate_thresholded, live_level, EstimateResult, Method,
    ThresholdConfig,
};
use sphdeconv_core::metrics::{eval_grid, lp_error, LossNorm};
use sphdeconv_core::simulate::{scenario_for, FixtureConfig};
use sphdeconv_core::study::{ErrorReport, Study};
use sphdeconv_core::NeedletFrame;

/// All replicates of `study`, spread over the rayon pool. The report does not
/// depend on the number of threads.
pub fn run_study(study: &Study) -> ErrorReport {
    let outcomes: Vec<_> = study
        .tasks()
        .into_par_iter()
        .flat_map_iter(|(c, r)| study.run_replicate(c, r))
        .collect();
    ErrorReport::from_outcomes(outcomes)
}

pub fn run_kappa(delta: f64, n_runs: usize, grid: &[f64], seed: u64) -> anyhow::Result<KappaCalibration> {
    let runs = (0..n_runs)
        .into_par_iter()
        .map(|r| kappa_run(delta, grid, kappa_seed(seed, r)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(KappaCalibration::from_runs(delta, grid, &runs)?)
}

pub fn run_tau(
    kind: TauKind,
    eps: f64,
    delta: f64,
    kappa: f64,
    grid: &[f64],
    n_runs: usize,
    seed: u64,
) -> anyhow::Result<TauCalibration> {
    let bench = TauBenchmark::new(kind, eps, delta, kappa)?;
    let runs = (0..n_runs)
        .into_par_iter()
        .map(|r| bench.run(grid, bench.seed(seed, r)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TauCalibration::from_runs(kind, grid, &runs)?)
}

#[derive(Debug, Clone)]
pub struct EstimateOutput {
    pub result: EstimateResult,
    pub l2: f64,
    pub linf: f64,
}

/// Draws the fixture described by `fixture` and estimates its density.
/// `cfg` supplies the thresholding constants; its noise levels are replaced
/// by those of the fixture.
pub fn estimate(
    fixture: &FixtureConfig,
    method: Method,
    cfg: &ThresholdConfig,
    grid_size: usize,
) -> anyhow::Result<EstimateOutput> {
    let cfg = ThresholdConfig {
        eps: fixture.eps,
        delta: fixture.delta,
        ..*cfg
    };
    cfg.validate()?;
    let j = cfg.max_level()?;
    let scenario = scenario_for(fixture)?;
    let draw = scenario.draw(fixture.delta, fixture.eps, fixture.seed)?;
    let top = draw.noisy_operator().threshold(cfg.kappa, j);
    let result = match method {
        Method::Bnd => {
            let frame = NeedletFrame::new(live_level(&top, j).unwrap_or(0));
            bnd_estimate_thresholded(&draw.observation, &top, &cfg, &frame)?
        }
        Method::Bbd => bbd_estimate_thresholded(&draw.observation, &top, &cfg)?,
    };
    let grid = eval_grid(grid_size)?;
    Ok(EstimateOutput {
        l2: lp_error(&result.f_hat, scenario.target(), &grid, LossNorm::L2),
        linf: lp_error(&result.f_hat, scenario.target(), &grid, LossNorm::Linf),
        result,
    })
}
