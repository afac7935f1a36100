//! The needlet deconvolution estimator (BND) and the blockwise-SVD baseline (BBD).
//!
//! Both start from the operator threshold `T_op(K_δ)` and invert the kept
//! blocks. BND then expands the blockwise solution on the needlet frame, hard
//! thresholds each level at `S_j`, and resynthesizes; BBD stops after the
//! blockwise inversion.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)]
use num_traits::Float;

use crate::harmonics::HarmonicCoeffs;
use crate::needlets::{level_band, needlet_analyze, needlet_synthesize, NeedletCoeffs, NeedletFrame};
use crate::operators::{noise_scale, t_op, BlockOperator, ThresholdedOperator};
use crate::simulate::Observation;
use crate::{Error, Result};

/// Thresholding constants and noise levels of one estimation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdConfig {
    pub kappa: f64,
    pub tau_sig: f64,
    pub tau_op: f64,
    pub lambda: f64,
    pub eps: f64,
    pub delta: f64,
    /// Replaces the noise-driven maximal level.
    pub level_override: Option<usize>,
    /// Upper bound applied to the noise-driven maximal level.
    pub level_cap: Option<usize>,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            kappa: 0.8,
            tau_sig: 0.9,
            tau_op: 0.2,
            lambda: 1.0,
            eps: 0.0,
            delta: 0.0,
            level_override: None,
            level_cap: None,
        }
    }
}

impl ThresholdConfig {
    pub fn with_noise(eps: f64, delta: f64) -> Self {
        Self {
            eps,
            delta,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("kappa", self.kappa),
            ("tau_sig", self.tau_sig),
            ("tau_op", self.tau_op),
            ("lambda", self.lambda),
        ];
        for (name, v) in positive {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(alloc::format!("{name} = {v}")));
            }
        }
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidParameter("lambda must be positive".into()));
        }
        if !(self.eps >= 0.0) || !(self.delta >= 0.0) {
            return Err(Error::InvalidParameter("noise levels must be non-negative".into()));
        }
        Ok(())
    }

    /// `J` from the override, else from [`max_level`] bounded by the cap.
    pub fn max_level(&self) -> Result<usize> {
        if let Some(j) = self.level_override {
            return Ok(j);
        }
        let j = max_level(self.eps, self.delta, self.lambda)?;
        Ok(self.level_cap.map_or(j, |cap| j.min(cap)))
    }
}

/// `J = ⌊log₂(λ ⌊(ε√|ln ε|)^{-1} ∧ (δ√|ln δ|)^{-2}⌋)⌋`, at least 0. A zero
/// noise level removes its term.
pub fn max_level(eps: f64, delta: f64, lambda: f64) -> Result<usize> {
    if !(lambda > 0.0) || !(eps >= 0.0) || !(delta >= 0.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "max level needs λ > 0 and non-negative noise (λ = {lambda}, ε = {eps}, δ = {delta})"
        )));
    }
    let signal = noise_scale(eps);
    let operator = noise_scale(delta);
    let a = if signal > 0.0 { 1.0 / signal } else { f64::INFINITY };
    let b = if operator > 0.0 { 1.0 / (operator * operator) } else { f64::INFINITY };
    let m = a.min(b);
    if m.is_infinite() {
        return Err(Error::NoiseFree);
    }
    let scaled = lambda * m.floor();
    if scaled < 2.0 {
        return Ok(0);
    }
    Ok(scaled.log2().floor() as usize)
}

/// `S_j = ‖(K_δ^{l_j})^{-1}‖ · max(τ_sig ε√|ln ε|, τ_op 2^{-j/2} δ√|ln δ|)` with
/// `l_j` the smallest kept degree of level `j`; infinite when the level has no
/// kept block.
pub fn signal_threshold(
    level: usize,
    top: &ThresholdedOperator,
    eps: f64,
    delta: f64,
    tau_sig: f64,
    tau_op: f64,
) -> f64 {
    let (lo, hi) = level_band(level);
    let Some(lj) = top.first_kept_in(lo, hi.min(top.max_degree())) else {
        return f64::INFINITY;
    };
    let inv = top.inverse_norm(lj).unwrap_or(f64::INFINITY);
    let sig = tau_sig * noise_scale(eps);
    let op = tau_op * 2f64.powf(-(level as f64) / 2.0) * noise_scale(delta);
    inv * sig.max(op)
}

/// Keeps `β` with `|β| > threshold`; returns the kept values and the mask.
pub fn hard_threshold(beta: &[f64], threshold: f64) -> (Vec<f64>, Vec<bool>) {
    let mask: Vec<bool> = beta.iter().map(|b| b.abs() > threshold).collect();
    let kept = beta
        .iter()
        .zip(&mask)
        .map(|(&b, &m)| if m { b } else { 0.0 })
        .collect();
    (kept, mask)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Bnd,
    Bbd,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Bnd => "bnd",
            Method::Bbd => "bbd",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bnd" => Ok(Method::Bnd),
            "bbd" => Ok(Method::Bbd),
            other => Err(Error::InvalidParameter(alloc::format!("unknown method '{other}'"))),
        }
    }
}

/// Needlet-domain part of a BND estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct NeedletStage {
    /// Coefficients before thresholding.
    pub beta_hat: NeedletCoeffs,
    /// `|β̂_{j,η}| > S_j`, per frame level.
    pub survived: Vec<Vec<bool>>,
    /// `S_j` for `j = 0..=J`.
    pub thresholds: Vec<f64>,
    /// `l_j` for `j = 0..=J`; `None` when level `j` has no kept block.
    pub first_kept: Vec<Option<usize>>,
}

impl NeedletStage {
    pub fn surviving_count(&self, level: usize) -> usize {
        self.survived
            .get(level)
            .map_or(0, |m| m.iter().filter(|&&s| s).count())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub method: Method,
    pub max_level: usize,
    pub f_hat: HarmonicCoeffs,
    /// Operator keep mask for degrees `0..=min(2^{J+1}, lmax)`.
    pub keep_mask: Vec<bool>,
    pub needlet: Option<NeedletStage>,
}

/// Highest level `j ≤ J` whose band contains a kept block; levels above it
/// have `S_j = ∞` and contribute nothing.
pub fn live_level(top: &ThresholdedOperator, max_level: usize) -> Option<usize> {
    (0..=max_level).rev().find(|&j| {
        let (lo, hi) = level_band(j);
        lo <= top.max_degree() && top.first_kept_in(lo, hi.min(top.max_degree())).is_some()
    })
}

/// BND from an observation and a noisy operator.
pub fn bnd_estimate(
    obs: &Observation,
    kd: &BlockOperator,
    cfg: &ThresholdConfig,
    frame: &NeedletFrame,
) -> Result<EstimateResult> {
    cfg.validate()?;
    let j = cfg.max_level()?;
    let top = t_op(kd, cfg.delta, cfg.kappa, j);
    bnd_estimate_thresholded(obs, &top, cfg, frame)
}

/// BND when `T_op(K_δ)` is already available. `frame` must reach
/// [`live_level`]; levels beyond `J` are ignored.
pub fn bnd_estimate_thresholded(
    obs: &Observation,
    top: &ThresholdedOperator,
    cfg: &ThresholdConfig,
    frame: &NeedletFrame,
) -> Result<EstimateResult> {
    cfg.validate()?;
    let j_max = cfg.max_level()?;
    if let Some(live) = live_level(top, j_max) {
        if frame.max_level() < live {
            return Err(Error::InvalidParameter(alloc::format!(
                "needlet frame stops at level {} but level {live} carries kept blocks",
                frame.max_level()
            )));
        }
    }
    let solution = top.solve(&obs.g, frame.lmax())?;
    let beta_hat = needlet_analyze(&solution, frame)?;

    let thresholds: Vec<f64> = (0..=j_max)
        .map(|j| signal_threshold(j, top, cfg.eps, cfg.delta, cfg.tau_sig, cfg.tau_op))
        .collect();
    let first_kept = (0..=j_max)
        .map(|j| {
            let (lo, hi) = level_band(j);
            top.first_kept_in(lo, hi.min(top.max_degree()))
        })
        .collect();

    let mut kept = NeedletCoeffs::zeros(frame);
    kept.p0 = beta_hat.p0;
    let mut survived = Vec::with_capacity(frame.levels().len());
    for (j, beta) in beta_hat.levels.iter().enumerate() {
        if j > j_max {
            survived.push(vec![false; beta.len()]);
            continue;
        }
        let (values, mask) = hard_threshold(beta, thresholds[j]);
        kept.levels[j] = values;
        survived.push(mask);
    }
    let f_hat = needlet_synthesize(&kept, frame)?;
    Ok(EstimateResult {
        method: Method::Bnd,
        max_level: j_max,
        f_hat,
        keep_mask: top.keep_mask(),
        needlet: Some(NeedletStage {
            beta_hat,
            survived,
            thresholds,
            first_kept,
        }),
    })
}

/// BBD: `f̂^l = (K_δ^l)^{-1} g^l` on blocks kept by the operator threshold,
/// for `l ≤ 2^{J+1}`.
pub fn bbd_estimate(obs: &Observation, kd: &BlockOperator, cfg: &ThresholdConfig) -> Result<EstimateResult> {
    cfg.validate()?;
    let j = cfg.max_level()?;
    let top = t_op(kd, cfg.delta, cfg.kappa, j);
    bbd_estimate_thresholded(obs, &top, cfg)
}

pub fn bbd_estimate_thresholded(
    obs: &Observation,
    top: &ThresholdedOperator,
    cfg: &ThresholdConfig,
) -> Result<EstimateResult> {
    cfg.validate()?;
    let j = cfg.max_level()?;
    let lmax = top.max_degree().min(obs.g.lmax());
    Ok(EstimateResult {
        method: Method::Bbd,
        max_level: j,
        f_hat: top.solve(&obs.g, lmax)?,
        keep_mask: top.keep_mask(),
        needlet: None,
    })
}
