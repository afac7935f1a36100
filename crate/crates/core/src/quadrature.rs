//! Cubature rules on S².
//!
//! A [`CubatureSet`] integrates every spherical polynomial of degree at most
//! `degree` exactly: `∫ f = Σ_η λ_η f(η)`. The built-in generator is the
//! Gauss–Legendre × equispaced-longitude product rule; arbitrary point sets
//! (for instance spherical designs) can be ingested with
//! [`CubatureSet::from_nodes`], which validates them and determines their
//! exactness degree.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::harmonics::{sh_index, SphPoint};
use crate::transform;
use crate::{Error, Result};

/// Absolute tolerance of the exactness test.
pub const EXACTNESS_TOL: f64 = 1e-9;

/// Constant `c` with `c⁻¹ 4^j ≤ card(Z_j) ≤ c 4^j` for [`level_cubature`].
///
/// The product rule of degree `t = 2^{j+2} - 2` has `(2^{j+1} - 1)(2^{j+2} - 1)`
/// nodes, which lies in `[4^j, 8·4^j)`.
pub const LEVEL_CARDINALITY_CONSTANT: f64 = 8.0;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Layout {
    Scattered,
    /// Node `k * phi.len() + i` sits at colatitude `acos(cos_theta[k])`, longitude `phi[i]`.
    Tensor { cos_theta: Vec<f64>, phi: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubatureSet {
    degree: usize,
    nodes: Vec<SphPoint>,
    weights: Vec<f64>,
    layout: Layout,
}

impl CubatureSet {
    /// Validates an arbitrary point set.
    ///
    /// Points must be unit vectors (to `1e-8`), weights strictly positive. With
    /// `declared = Some(t)` the set must be exact to degree `t`; otherwise the
    /// degree is found by scanning upwards until the exactness test fails.
    pub fn from_nodes(points: &[[f64; 4]], declared: Option<usize>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidCubature("empty point set".into()));
        }
        let mut nodes = Vec::with_capacity(points.len());
        let mut weights = Vec::with_capacity(points.len());
        for (i, &[x, y, z, w]) in points.iter().enumerate() {
            let norm = (x * x + y * y + z * z).sqrt();
            if !((norm - 1.0).abs() <= 1e-8) {
                return Err(Error::InvalidCubature(alloc::format!(
                    "node {} is not a unit vector (norm {norm})",
                    i + 1
                )));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidCubature(alloc::format!(
                    "node {} has non-positive weight {w}",
                    i + 1
                )));
            }
            nodes.push(SphPoint::from_vector(x, y, z)?);
            weights.push(w);
        }
        let mut set = Self {
            degree: 0,
            nodes,
            weights,
            layout: Layout::Scattered,
        };
        match declared {
            Some(t) => {
                let defects = set.exactness_defects(t);
                if let Some(l) = defects.iter().position(|&d| d > EXACTNESS_TOL) {
                    return Err(Error::InvalidCubature(alloc::format!(
                        "declared degree {t} but integration fails at degree {l}"
                    )));
                }
                set.degree = t;
            }
            None => {
                let bound = max_possible_degree(set.len());
                let defects = set.exactness_defects(bound + 1);
                match defects.iter().position(|&d| d > EXACTNESS_TOL) {
                    Some(0) => {
                        return Err(Error::InvalidCubature(
                            "weights do not integrate constants (total mass is not 4π)".into(),
                        ))
                    }
                    Some(l) => set.degree = l - 1,
                    None => set.degree = bound + 1,
                }
            }
        }
        Ok(set)
    }

    #[cfg(test)]
    pub(crate) fn from_parts_unchecked(degree: usize, nodes: Vec<SphPoint>, weights: Vec<f64>) -> Self {
        Self {
            degree,
            nodes,
            weights,
            layout: Layout::Scattered,
        }
    }

    /// Tensor rule from a colatitude rule (weights including `sin θ`) and a
    /// longitude rule. The caller vouches for `degree`.
    pub(crate) fn tensor(
        degree: usize,
        cos_theta: Vec<f64>,
        theta_weights: Vec<f64>,
        phi: Vec<f64>,
        phi_weights: Vec<f64>,
    ) -> Self {
        let mut nodes = Vec::with_capacity(cos_theta.len() * phi.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for (&t, &wt) in cos_theta.iter().zip(&theta_weights) {
            let theta = t.clamp(-1.0, 1.0).acos();
            for (&p, &wp) in phi.iter().zip(&phi_weights) {
                nodes.push(SphPoint::from_angles(theta, p));
                weights.push(wt * wp);
            }
        }
        Self {
            degree,
            nodes,
            weights,
            layout: Layout::Tensor { cos_theta, phi },
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nodes(&self) -> &[SphPoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub(crate) fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate<F: Fn(&SphPoint) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p))
            .sum()
    }

    /// For each degree `l ≤ tmax`, `max_m |Σ λ_η Y(l,m)(η) - √(4π) δ_{l0}|`.
    pub fn exactness_defects(&self, tmax: usize) -> Vec<f64> {
        let moments = transform::adjoint(self, &self.weights, tmax, 0);
        (0..=tmax)
            .map(|l| {
                let li = l as i64;
                (-li..=li)
                    .map(|m| {
                        let target = if l == 0 { (4.0 * PI).sqrt() } else { 0.0 };
                        (moments.as_slice()[sh_index(l, m)] - target).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    pub fn is_exact_to(&self, t: usize) -> bool {
        self.exactness_defects(t).iter().all(|&d| d <= EXACTNESS_TOL)
    }

    /// Checks `c⁻¹ 4^{-j} ≤ λ_η ≤ c 4^{-j}` for every weight.
    pub fn satisfies_weight_bounds(&self, level: usize, c: f64) -> bool {
        let scale = 4f64.powi(-(level as i32));
        self.weights
            .iter()
            .all(|&w| w >= scale / c && w <= scale * c)
    }
}

/// Positive-weight rules exact to degree `t` need at least `(⌊t/2⌋+1)²` nodes.
fn max_possible_degree(n: usize) -> usize {
    let r = (n as f64).sqrt().floor() as usize;
    2 * r.saturating_sub(1) + 1
}

/// Gauss–Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi initial guess, then Newton on P_n.
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, t);
        if d.is_finite() {
            dp = d;
        }
        let weight = 2.0 / ((1.0 - t * t) * dp * dp);
        x[n - 1 - i] = t;
        w[n - 1 - i] = weight;
        x[i] = -t;
        w[i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_and_derivative(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

/// Product rule exact to degree `t`: `⌈(t+1)/2⌉` Gauss–Legendre nodes in
/// `cos θ` times `t+1` equispaced longitudes.
pub fn product_rule(t: usize) -> CubatureSet {
    let n_theta = (t + 2) / 2;
    let n_phi = t + 1;
    let (x, w) = gauss_legendre(n_theta);
    let phi: Vec<f64> = (0..n_phi).map(|i| 2.0 * PI * i as f64 / n_phi as f64).collect();
    let phi_weights = vec![2.0 * PI / n_phi as f64; n_phi];
    // Rings ordered north to south.
    let cos_theta: Vec<f64> = x.iter().rev().copied().collect();
    let theta_weights: Vec<f64> = w.iter().rev().copied().collect();
    CubatureSet::tensor(t, cos_theta, theta_weights, phi, phi_weights)
}

/// Needlet centers of level `j`: a rule exact to degree `2^{j+2} - 2`.
pub fn level_cubature(level: usize) -> CubatureSet {
    product_rule(level_degree(level))
}

/// `2^{j+2} - 2`.
pub fn level_degree(level: usize) -> usize {
    (1usize << (level + 2)) - 2
}
