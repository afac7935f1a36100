//! JSON export of estimates.
//!
//! ```json
//! {
//!   "format": "sphdeconv-estimate",
//!   "version": 1,
//!   "method": "bnd",
//!   "max_level": 8,
//!   "lmax": 31,
//!   "fixture": { "delta": 0.001, "eps": 0.001, "seed": 0, ... },
//!   "constants": { "kappa": 0.8, "tau_sig": 0.9, "tau_op": 0.2, "lambda": 1.0 },
//!   "f_hat": [[f00], [f1-1, f10, f11], ...],
//!   "keep_mask": [true, true, ...],
//!   "needlet": {
//!     "thresholds": [0.0071, ..., null],
//!     "first_kept": [1, 1, 2, ..., null],
//!     "level_sizes": [6, 28, ...],
//!     "survivors": [[0, 3], [...], ...]
//!   },
//!   "loss": { "l2": 0.12, "linf": 0.2, "grid_size": 4096 }
//! }
//! ```
//!
//! `f_hat[l]` holds the `2l+1` real coefficients of degree `l` ordered by
//! `m = -l..=l`. `keep_mask[l]` tells whether the operator block of degree
//! `l` survived thresholding. In `needlet`, `null` thresholds are infinite
//! (level without kept block), and `survivors[j]` lists the indices of the
//! cubature points of level `j` whose coefficient passed the signal threshold,
//! out of `level_sizes[j]`. `needlet` is `null` for the BBD baseline, `fixture`
//! and `loss` are optional. Numbers are written in shortest round-trip form.

use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sphdeconv_core::estimators::{EstimateResult, Method, ThresholdConfig};
use sphdeconv_core::simulate::FixtureConfig;
use sphdeconv_core::HarmonicCoeffs;

use crate::config::FixtureFile;

pub const FORMAT: &str = "sphdeconv-estimate";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub kappa: f64,
    pub tau_sig: f64,
    pub tau_op: f64,
    pub lambda: f64,
}

impl From<&ThresholdConfig> for Constants {
    fn from(c: &ThresholdConfig) -> Self {
        Self {
            kappa: c.kappa,
            tau_sig: c.tau_sig,
            tau_op: c.tau_op,
            lambda: c.lambda,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeedletExport {
    pub thresholds: Vec<Option<f64>>,
    pub first_kept: Vec<Option<usize>>,
    pub level_sizes: Vec<usize>,
    pub survivors: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossExport {
    pub l2: f64,
    pub linf: f64,
    pub grid_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateFile {
    pub format: String,
    pub version: u32,
    pub method: String,
    pub max_level: usize,
    pub lmax: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<FixtureFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<Constants>,
    pub f_hat: Vec<Vec<f64>>,
    pub keep_mask: Vec<bool>,
    pub needlet: Option<NeedletExport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<LossExport>,
}

impl EstimateFile {
    pub fn new(result: &EstimateResult) -> Self {
        let needlet = result.needlet.as_ref().map(|st| NeedletExport {
            thresholds: st
                .thresholds
                .iter()
                .map(|&s| s.is_finite().then_some(s))
                .collect(),
            first_kept: st.first_kept.clone(),
            level_sizes: st.survived.iter().map(Vec::len).collect(),
            survivors: st
                .survived
                .iter()
                .map(|mask| mask.iter().enumerate().filter(|(_, &s)| s).map(|(i, _)| i).collect())
                .collect(),
        });
        Self {
            format: FORMAT.into(),
            version: VERSION,
            method: result.method.as_str().into(),
            max_level: result.max_level,
            lmax: result.f_hat.lmax(),
            fixture: None,
            constants: None,
            f_hat: result.f_hat.blocks().map(<[f64]>::to_vec).collect(),
            keep_mask: result.keep_mask.clone(),
            needlet,
            loss: None,
        }
    }

    pub fn with_fixture(mut self, fixture: &FixtureConfig, cfg: &ThresholdConfig) -> Self {
        self.fixture = Some((*fixture).into());
        self.constants = Some(cfg.into());
        self
    }

    pub fn method(&self) -> anyhow::Result<Method> {
        Ok(self.method.parse()?)
    }

    pub fn coefficients(&self) -> anyhow::Result<HarmonicCoeffs> {
        let c = HarmonicCoeffs::from_blocks(&self.f_hat)?;
        anyhow::ensure!(
            c.lmax() == self.lmax,
            "lmax field {} does not match {} coefficient blocks",
            self.lmax,
            self.f_hat.len()
        );
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("estimate serializes")
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let file: Self = serde_json::from_str(text)?;
        anyhow::ensure!(file.format == FORMAT, "not an estimate file (format `{}`)", file.format);
        anyhow::ensure!(file.version == VERSION, "unsupported estimate version {}", file.version);
        file.method()?;
        file.coefficients()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("parsing {}", path.display()))
    }
}
