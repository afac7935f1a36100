//! Quick invariant checks behind `sphdeconv selftest`.

use std::fmt;
use std::time::Instant;

use nalgebra::DMatrix;
use sphdeconv_core::estimators::{bnd_estimate, ThresholdConfig};
use sphdeconv_core::harmonics::eval_sh_all;
use sphdeconv_core::needlets::{band_projection, needlet_analyze};
use sphdeconv_core::operators::estimate_dip;
use sphdeconv_core::quadrature::product_rule;
use sphdeconv_core::simulate::{derive_seed, Observation};
use sphdeconv_core::{Block, BlockOperator, HarmonicCoeffs, NeedletFrame, Window};

use crate::{opfile, pointset};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status}  {:<22} {} ({:.2}s)", self.name, self.detail, self.seconds)
    }
}

/// Uniform value in `[-1, 1)` keyed by `(seed, index)`.
fn noise(seed: u64, index: u64) -> f64 {
    (derive_seed(seed, 0, index) >> 11) as f64 / (1u64 << 52) as f64 - 1.0
}

fn random_coeffs(lmax: usize, seed: u64) -> HarmonicCoeffs {
    let n = (lmax + 1) * (lmax + 1);
    HarmonicCoeffs::from_flat(lmax, (0..n as u64).map(|i| noise(seed, i)).collect()).expect("sized")
}

fn random_operator(lmax: usize, seed: u64) -> BlockOperator {
    let mut k = 0u64;
    let blocks = (0..=lmax)
        .map(|l| {
            let n = 2 * l + 1;
            if l % 2 == 0 {
                Block::Dense(DMatrix::from_fn(n, n, |_, _| {
                    k += 1;
                    noise(seed, k)
                }))
            } else {
                Block::Diagonal(
                    (0..n)
                        .map(|_| {
                            k += 1;
                            noise(seed, k)
                        })
                        .collect(),
                )
            }
        })
        .collect();
    BlockOperator::new(blocks).expect("block sizes")
}

fn check(name: &'static str, tol: f64, f: impl FnOnce() -> anyhow::Result<f64>) -> Check {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(v) => (v <= tol, format!("{v:.3e} (limit {tol:.0e})")),
        Err(e) => (false, format!("error: {e:#}")),
    };
    Check {
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn quadrature_gram() -> anyhow::Result<f64> {
    let q = product_rule(20);
    let lmax = 10;
    let n = (lmax + 1) * (lmax + 1);
    let mut gram = DMatrix::<f64>::zeros(n, n);
    for (p, w) in q.nodes().iter().zip(q.weights()) {
        let y = nalgebra::DVector::from_vec(eval_sh_all(lmax, p));
        gram += *w * &y * y.transpose();
    }
    Ok((gram - DMatrix::identity(n, n)).abs().max())
}

fn partition_of_unity() -> anyhow::Result<f64> {
    let w = Window;
    let mut worst = 0.0f64;
    for i in 0..2000 {
        let x = 10f64.powf(4.0 * i as f64 / 1999.0);
        let top = x.log2().ceil() as i32 + 1;
        let s: f64 = (0..=top).map(|j| w.b_squared(x / 2f64.powi(j))).sum();
        worst = worst.max((s - 1.0).abs());
    }
    Ok(worst)
}

fn frame_identity() -> anyhow::Result<f64> {
    let frame = NeedletFrame::new(4);
    let mut worst = 0.0f64;
    for seed in 0..5 {
        let f = random_coeffs(16, seed).with_lmax(frame.lmax());
        let beta = needlet_analyze(&f, &frame)?;
        worst = worst.max((beta.energy() - f.norm_squared()).abs() / f.norm_squared());
    }
    Ok(worst)
}

fn blockwise_apply() -> anyhow::Result<f64> {
    let lmax = 8;
    let n = (lmax + 1) * (lmax + 1);
    let mut worst = 0.0f64;
    for seed in 0..5 {
        let k = random_operator(lmax, 100 + seed);
        let f = random_coeffs(lmax, 200 + seed);
        let mut dense = DMatrix::<f64>::zeros(n, n);
        for l in 0..=lmax {
            dense.view_mut((l * l, l * l), (2 * l + 1, 2 * l + 1)).copy_from(&k.block(l).to_dense());
        }
        let want = dense * nalgebra::DVector::from_column_slice(f.as_slice());
        let got = k.apply(&f)?;
        for (a, b) in got.as_slice().iter().zip(want.iter()) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

fn rosenthal_dip() -> anyhow::Result<f64> {
    let mut worst = 0.0f64;
    for nu in [1.0, 2.0] {
        let k = BlockOperator::rosenthal(std::f64::consts::PI, nu, 64)?;
        let fit = estimate_dip(&k, 4, 64)?;
        worst = worst.max((fit.nu - nu).abs() / nu);
    }
    Ok(worst)
}

fn noiseless_recovery() -> anyhow::Result<f64> {
    let frame = NeedletFrame::new(3);
    let k = BlockOperator::rosenthal(std::f64::consts::PI, 1.0, frame.lmax())?;
    let f = random_coeffs(frame.lmax(), 7);
    let obs = Observation {
        g: k.apply(&f)?,
        eps: 0.0,
        seed: 0,
    };
    let cfg = ThresholdConfig {
        level_override: Some(3),
        ..ThresholdConfig::default()
    };
    let est = bnd_estimate(&obs, &k, &cfg, &frame)?;
    let target = band_projection(&f, &frame);
    let mut diff = est.f_hat.clone();
    diff.as_mut_slice().iter_mut().zip(target.as_slice()).for_each(|(a, b)| *a -= b);
    Ok(diff.norm() / f.norm())
}

fn file_roundtrips() -> anyhow::Result<f64> {
    let set = product_rule(5);
    let mut buf = Vec::new();
    pointset::write_pointset(&mut buf, &set)?;
    let back = pointset::read_pointset(buf.as_slice())?;
    anyhow::ensure!(back.weights() == set.weights() && back.degree() == set.degree(), "point set changed");
    let op = random_operator(6, 9);
    let mut buf = Vec::new();
    opfile::write_operator(&mut buf, &op)?;
    anyhow::ensure!(opfile::read_operator(buf.as_slice())? == op, "operator changed");
    Ok(0.0)
}

pub fn run_all() -> Vec<Check> {
    vec![
        check("quadrature-gram", 1e-9, quadrature_gram),
        check("partition-of-unity", 1e-10, partition_of_unity),
        check("frame-identity", 1e-9, frame_identity),
        check("blockwise-apply", 1e-12, blockwise_apply),
        check("rosenthal-dip", 0.05, rosenthal_dip),
        check("noiseless-recovery", 1e-8, noiseless_recovery),
        check("file-roundtrips", 0.0, file_roundtrips),
    ]
}
