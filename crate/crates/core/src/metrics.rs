//! Evaluation grid and normalized losses.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::harmonics::{synthesize_many, HarmonicCoeffs, SphPoint};
use crate::simulate::TargetDensity;
use crate::{Error, Result};

/// Equal-weight quasi-uniform point set (Fibonacci spiral).
#[derive(Debug, Clone, PartialEq)]
pub struct EvalGrid {
    points: Vec<SphPoint>,
}

impl EvalGrid {
    pub fn points(&self) -> &[SphPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `4π / n`.
    pub fn weight(&self) -> f64 {
        4.0 * PI / self.points.len() as f64
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weight() * values.iter().sum::<f64>()
    }
}

/// `n` points with `z_i = 1 - (2i+1)/n` and longitudes advancing by the golden angle.
pub fn eval_grid(n: usize) -> Result<EvalGrid> {
    if n == 0 {
        return Err(Error::InvalidParameter("grid needs at least one point".into()));
    }
    let golden = PI * (3.0 - 5f64.sqrt());
    let points = (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            SphPoint::from_angles(z.acos(), (i as f64 * golden) % (2.0 * PI))
        })
        .collect();
    Ok(EvalGrid { points })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossNorm {
    L2,
    Linf,
}

/// Values of the expansion `f` at the grid points.
pub fn field_values(f: &HarmonicCoeffs, grid: &EvalGrid) -> Vec<f64> {
    synthesize_many(f, &grid.points)
}

pub fn density_values(target: &TargetDensity, grid: &EvalGrid) -> Vec<f64> {
    grid.points.iter().map(|p| target.value(p)).collect()
}

/// `‖estimate - truth‖ / ‖truth‖` in the grid's discrete norm.
pub fn normalized_loss(estimate: &[f64], truth: &[f64], grid: &EvalGrid, norm: LossNorm) -> f64 {
    match norm {
        LossNorm::L2 => {
            let diff: f64 = estimate.iter().zip(truth).map(|(a, b)| (a - b) * (a - b)).sum();
            let base: f64 = truth.iter().map(|b| b * b).sum();
            (grid.weight() * diff).sqrt() / (grid.weight() * base).sqrt()
        }
        LossNorm::Linf => {
            let diff = estimate
                .iter()
                .zip(truth)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            let base = truth.iter().fold(0.0f64, |m, b| m.max(b.abs()));
            diff / base
        }
    }
}

/// Normalized loss of the expansion `f_hat` against the density `f_true`.
pub fn lp_error(f_hat: &HarmonicCoeffs, f_true: &TargetDensity, grid: &EvalGrid, norm: LossNorm) -> f64 {
    normalized_loss(&field_values(f_hat, grid), &density_values(f_true, grid), grid, norm)
}
