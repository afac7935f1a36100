//! TOML fixture files.
//!
//! ```toml
//! delta = 1e-3     # operator noise level
//! eps = 1e-3       # signal noise level
//! seed = 7
//! alpha = 3.141592653589793   # Rosenthal parameters
//! nu = 1.0
//! lmax = 31        # band limit of the observation
//! target = "exp_spike"        # or "uniform"
//! ```
//!
//! Every key is optional; missing keys take the values of
//! [`FixtureConfig::default`]. Unknown keys are rejected.

use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sphdeconv_core::simulate::{FixtureConfig, TargetKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetName {
    ExpSpike,
    Uniform,
}

impl From<TargetName> for TargetKind {
    fn from(t: TargetName) -> Self {
        match t {
            TargetName::ExpSpike => TargetKind::ExpSpike,
            TargetName::Uniform => TargetKind::Uniform,
        }
    }
}

impl From<TargetKind> for TargetName {
    fn from(t: TargetKind) -> Self {
        match t {
            TargetKind::ExpSpike => TargetName::ExpSpike,
            TargetKind::Uniform => TargetName::Uniform,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureFile {
    pub delta: f64,
    pub eps: f64,
    pub seed: u64,
    pub alpha: f64,
    pub nu: f64,
    pub lmax: usize,
    pub target: TargetName,
}

impl Default for FixtureFile {
    fn default() -> Self {
        FixtureConfig::default().into()
    }
}

impl From<FixtureConfig> for FixtureFile {
    fn from(c: FixtureConfig) -> Self {
        Self {
            delta: c.delta,
            eps: c.eps,
            seed: c.seed,
            alpha: c.alpha,
            nu: c.nu,
            lmax: c.lmax,
            target: c.target.into(),
        }
    }
}

impl FixtureFile {
    pub fn to_config(&self) -> anyhow::Result<FixtureConfig> {
        anyhow::ensure!(
            self.delta >= 0.0 && self.delta.is_finite(),
            "delta must be finite and non-negative, got {}",
            self.delta
        );
        anyhow::ensure!(
            self.eps >= 0.0 && self.eps.is_finite(),
            "eps must be finite and non-negative, got {}",
            self.eps
        );
        anyhow::ensure!(self.alpha.is_finite() && self.nu.is_finite(), "alpha and nu must be finite");
        Ok(FixtureConfig {
            delta: self.delta,
            eps: self.eps,
            seed: self.seed,
            alpha: self.alpha,
            nu: self.nu,
            lmax: self.lmax,
            target: self.target.into(),
        })
    }
}

#[derive(Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PartialFixture {
    delta: Option<f64>,
    eps: Option<f64>,
    seed: Option<u64>,
    alpha: Option<f64>,
    nu: Option<f64>,
    lmax: Option<usize>,
    target: Option<TargetName>,
}

pub fn parse_fixture(text: &str) -> anyhow::Result<FixtureConfig> {
    let p: PartialFixture = toml::from_str(text)?;
    let d = FixtureFile::default();
    FixtureFile {
        delta: p.delta.unwrap_or(d.delta),
        eps: p.eps.unwrap_or(d.eps),
        seed: p.seed.unwrap_or(d.seed),
        alpha: p.alpha.unwrap_or(d.alpha),
        nu: p.nu.unwrap_or(d.nu),
        lmax: p.lmax.unwrap_or(d.lmax),
        target: p.target.unwrap_or(d.target),
    }
    .to_config()
}

pub fn load_fixture(path: &Path) -> anyhow::Result<FixtureConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_fixture(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Fails for seeds above `i64::MAX`, which TOML integers cannot hold.
pub fn fixture_to_toml(config: &FixtureConfig) -> anyhow::Result<String> {
    anyhow::ensure!(
        i64::try_from(config.seed).is_ok(),
        "seed {} does not fit a TOML integer",
        config.seed
    );
    Ok(toml::to_string(&FixtureFile::from(*config))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_keys() {
        let c = parse_fixture("delta = 1e-4\ntarget = \"uniform\"\n").unwrap();
        assert_eq!(c.delta, 1e-4);
        assert_eq!(c.target, TargetKind::Uniform);
        assert_eq!(c.eps, FixtureConfig::default().eps);
        assert_eq!(parse_fixture("").unwrap(), FixtureConfig::default());
    }

    #[test]
    fn roundtrip() {
        let c = FixtureConfig {
            delta: 3e-3,
            seed: 42,
            nu: 2.0,
            ..FixtureConfig::default()
        };
        assert_eq!(parse_fixture(&fixture_to_toml(&c).unwrap()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_fixture("delta = -1.0").is_err());
        assert!(parse_fixture("sigma = 1.0").is_err());
        assert!(parse_fixture("target = \"gaussian\"").is_err());
        assert!(parse_fixture("lmax = -3").is_err());
    }
}
