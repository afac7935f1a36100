//! Real spherical harmonics on S².
//!
//! The basis is the real orthonormal one built from the associated Legendre
//! functions with the Condon–Shortley phase:
//!
//! ```text
//! Y(l, 0)  = N(l,0) P(l,0)(cos θ)
//! Y(l, m)  = √2 N(l,m) P(l,m)(cos θ) cos(mφ)     m > 0
//! Y(l, -m) = √2 N(l,m) P(l,m)(cos θ) sin(mφ)     m > 0
//! N(l,m)   = √((2l+1)/(4π) · (l-m)!/(l+m)!)
//! ```
//!
//! Coefficients of degree `l` are stored contiguously as a block of `2l+1`
//! values ordered `m = -l, …, l`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::quadrature::CubatureSet;
use crate::transform;
use crate::{Error, Result};

/// A point on the unit sphere, stored both as angles and as a unit vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphPoint {
    theta: f64,
    phi: f64,
    xyz: [f64; 3],
}

impl SphPoint {
    /// Colatitude `theta` in `[0, π]`, longitude `phi` (wrapped into `[0, 2π)`).
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let theta = theta.clamp(0.0, PI);
        let phi = wrap_longitude(phi);
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self {
            theta,
            phi,
            xyz: [st * cp, st * sp, ct],
        }
    }

    /// Normalizes `(x, y, z)`; fails on the zero vector or non-finite input.
    pub fn from_vector(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Domain(alloc::format!(
                "cannot place ({x}, {y}, {z}) on the sphere"
            )));
        }
        let (x, y, z) = (x / norm, y / norm, z / norm);
        let theta = z.clamp(-1.0, 1.0).acos();
        let phi = wrap_longitude(y.atan2(x));
        Ok(Self {
            theta,
            phi,
            xyz: [x, y, z],
        })
    }

    pub fn north_pole() -> Self {
        Self::from_angles(0.0, 0.0)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn x(&self) -> f64 {
        self.xyz[0]
    }

    pub fn y(&self) -> f64 {
        self.xyz[1]
    }

    pub fn z(&self) -> f64 {
        self.xyz[2]
    }

    pub fn xyz(&self) -> [f64; 3] {
        self.xyz
    }

    /// `sin θ`, from the vector so it stays accurate near the poles.
    pub fn sin_theta(&self) -> f64 {
        (self.xyz[0] * self.xyz[0] + self.xyz[1] * self.xyz[1]).sqrt()
    }

    pub fn dot(&self, other: &SphPoint) -> f64 {
        self.xyz[0] * other.xyz[0] + self.xyz[1] * other.xyz[1] + self.xyz[2] * other.xyz[2]
    }

    /// Geodesic (great-circle) distance.
    pub fn distance(&self, other: &SphPoint) -> f64 {
        self.dot(other).clamp(-1.0, 1.0).acos()
    }
}

fn wrap_longitude(phi: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut p = phi % two_pi;
    if p < 0.0 {
        p += two_pi;
    }
    if p >= two_pi {
        p = 0.0;
    }
    p
}

/// Spherical-harmonic coefficients `f^l = (<f, Y(l,m)>)_{|m| ≤ l}` for `l ≤ lmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicCoeffs {
    lmax: usize,
    data: Vec<f64>,
}

/// Flat position of `(l, m)` in a coefficient vector.
#[inline]
pub fn sh_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

impl HarmonicCoeffs {
    pub fn zeros(lmax: usize) -> Self {
        Self {
            lmax,
            data: vec![0.0; (lmax + 1) * (lmax + 1)],
        }
    }

    /// Flat layout: block `l` occupies `l² .. (l+1)²`.
    pub fn from_flat(lmax: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != (lmax + 1) * (lmax + 1) {
            return Err(Error::DimensionMismatch(alloc::format!(
                "{} coefficients cannot hold degrees 0..={lmax}",
                data.len()
            )));
        }
        Ok(Self { lmax, data })
    }

    pub fn from_blocks(blocks: &[Vec<f64>]) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::DimensionMismatch("no blocks".into()));
        }
        let lmax = blocks.len() - 1;
        let mut out = Self::zeros(lmax);
        for (l, block) in blocks.iter().enumerate() {
            if block.len() != 2 * l + 1 {
                return Err(Error::DimensionMismatch(alloc::format!(
                    "block {l} has {} entries, expected {}",
                    block.len(),
                    2 * l + 1
                )));
            }
            out.block_mut(l).copy_from_slice(block);
        }
        Ok(out)
    }

    /// Single harmonic `Y(l, m)`.
    pub fn unit(lmax: usize, l: usize, m: i64) -> Self {
        let mut c = Self::zeros(lmax);
        c.set(l, m, 1.0);
        c
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn block(&self, l: usize) -> &[f64] {
        &self.data[l * l..(l + 1) * (l + 1)]
    }

    pub fn block_mut(&mut self, l: usize) -> &mut [f64] {
        &mut self.data[l * l..(l + 1) * (l + 1)]
    }

    pub fn blocks(&self) -> impl Iterator<Item = &[f64]> {
        (0..=self.lmax).map(move |l| self.block(l))
    }

    pub fn get(&self, l: usize, m: i64) -> f64 {
        self.data[sh_index(l, m)]
    }

    pub fn set(&mut self, l: usize, m: i64, value: f64) {
        let i = sh_index(l, m);
        self.data[i] = value;
    }

    /// `Σ_l ‖f^l‖²`, equal to `‖f‖²_{L²}` by Parseval.
    pub fn norm_squared(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Zero-pads or truncates to a new band limit.
    pub fn with_lmax(&self, lmax: usize) -> Self {
        let mut out = Self::zeros(lmax);
        let n = out.data.len().min(self.data.len());
        out.data[..n].copy_from_slice(&self.data[..n]);
        out
    }

    /// Highest degree with a nonzero block (0 for the zero function).
    pub fn effective_lmax(&self) -> usize {
        (0..=self.lmax)
            .rev()
            .find(|&l| self.block(l).iter().any(|&v| v != 0.0))
            .unwrap_or(0)
    }

    pub fn is_block_zero(&self, l: usize) -> bool {
        self.block(l).iter().all(|&v| v == 0.0)
    }

    /// `self - other` over the larger band limit.
    pub fn sub(&self, other: &HarmonicCoeffs) -> HarmonicCoeffs {
        let lmax = self.lmax.max(other.lmax);
        let mut out = self.with_lmax(lmax);
        for (o, v) in out.data.iter_mut().zip(other.data.iter()) {
            *o -= v;
        }
        out
    }

    /// `self + other` over the larger band limit.
    pub fn add(&self, other: &HarmonicCoeffs) -> HarmonicCoeffs {
        let lmax = self.lmax.max(other.lmax);
        let mut out = self.with_lmax(lmax);
        for (o, v) in out.data.iter_mut().zip(other.data.iter()) {
            *o += v;
        }
        out
    }

    /// L² inner product; degrees missing from either side count as zero.
    pub fn dot(&self, other: &HarmonicCoeffs) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn scaled(&self, s: f64) -> HarmonicCoeffs {
        HarmonicCoeffs {
            lmax: self.lmax,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }
}

/// Associated Legendre function `P(l,m)(t)`, Condon–Shortley phase included.
///
/// Computed by the upward recurrence in `l`:
/// `(l-m) P(l,m) = (2l-1) t P(l-1,m) - (l+m-1) P(l-2,m)`.
/// Values are unnormalized and overflow for large `m`; the transforms use the
/// normalized recurrence instead.
pub fn eval_legendre(l: usize, m: usize, t: f64) -> Result<f64> {
    if m > l {
        return Err(Error::Domain(alloc::format!("order {m} exceeds degree {l}")));
    }
    if !(t.abs() <= 1.0) {
        return Err(Error::Domain(alloc::format!("|t| = {} > 1", t.abs())));
    }
    let s = (1.0 - t * t).max(0.0).sqrt();
    // P(m,m) = (-1)^m (2m-1)!! s^m
    let mut pmm = 1.0;
    for k in 1..=m {
        pmm *= -((2 * k - 1) as f64) * s;
    }
    if l == m {
        return Ok(pmm);
    }
    let mut prev = pmm;
    let mut cur = t * (2 * m + 1) as f64 * pmm;
    for ll in (m + 2)..=l {
        let next = ((2 * ll - 1) as f64 * t * cur - (ll + m - 1) as f64 * prev) / (ll - m) as f64;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Recurrence coefficients of the orthonormal associated Legendre functions
/// `P̄(l,m) = N(l,m) P(l,m)`, stored column by column (`m`-major).
pub(crate) struct LegendreRecurrence {
    lmax: usize,
    offsets: Vec<usize>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    diag: Vec<f64>,
}

/// Below this magnitude a sectoral seed is flushed to zero.
const UNDERFLOW: f64 = 1e-300;

impl LegendreRecurrence {
    pub(crate) fn new(lmax: usize) -> Self {
        let mut offsets = Vec::with_capacity(lmax + 2);
        let mut off = 0;
        for m in 0..=lmax {
            offsets.push(off);
            off += lmax + 1 - m;
        }
        offsets.push(off);
        let mut alpha = vec![0.0; off];
        let mut beta = vec![0.0; off];
        for (m, &start) in offsets.iter().take(lmax + 1).enumerate() {
            for l in m..=lmax {
                let i = start + (l - m);
                if l == m + 1 {
                    alpha[i] = ((2 * m + 3) as f64).sqrt();
                } else if l >= m + 2 {
                    let (lf, mf) = (l as f64, m as f64);
                    alpha[i] = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                    let lp = lf - 1.0;
                    beta[i] = ((lp * lp - mf * mf) / (4.0 * lp * lp - 1.0)).sqrt();
                }
            }
        }
        let diag = (0..=lmax)
            .map(|m| {
                if m == 0 {
                    (1.0 / (4.0 * PI)).sqrt()
                } else {
                    -((2 * m + 1) as f64 / (2 * m) as f64).sqrt()
                }
            })
            .collect();
        Self {
            lmax,
            offsets,
            alpha,
            beta,
            diag,
        }
    }

    pub(crate) fn table_len(&self) -> usize {
        self.offsets[self.lmax + 1]
    }

    #[inline]
    pub(crate) fn column_offset(&self, m: usize) -> usize {
        self.offsets[m]
    }

    /// Fills `out[offset(m) + (l - m)] = P̄(l,m)(t)`; `s = √(1-t²)`.
    pub(crate) fn fill(&self, t: f64, s: f64, out: &mut [f64]) {
        let lmax = self.lmax;
        let mut pmm = self.diag[0];
        for m in 0..=lmax {
            let off = self.offsets[m];
            let len = lmax + 1 - m;
            let col = &mut out[off..off + len];
            if m > 0 {
                pmm *= self.diag[m] * s;
                if pmm.abs() < UNDERFLOW {
                    pmm = 0.0;
                }
            }
            if pmm == 0.0 {
                // Every remaining column is zero too.
                let end = self.offsets[lmax + 1];
                out[off..end].iter_mut().for_each(|v| *v = 0.0);
                return;
            }
            col[0] = pmm;
            if len > 1 {
                col[1] = self.alpha[off + 1] * t * pmm;
            }
            for k in 2..len {
                col[k] = self.alpha[off + k] * (t * col[k - 1] - self.beta[off + k] * col[k - 2]);
            }
        }
    }
}

/// Value of the real orthonormal harmonic `Y(l, m)` at `p`.
pub fn eval_sh(l: usize, m: i64, p: &SphPoint) -> Result<f64> {
    if m.unsigned_abs() as usize > l {
        return Err(Error::Domain(alloc::format!("|m| = {} exceeds degree {l}", m.abs())));
    }
    let ma = m.unsigned_abs() as usize;
    let t = p.z();
    let s = p.sin_theta();
    // Normalized sectoral seed, then upward in l.
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for k in 1..=ma {
        pmm *= -((2 * k + 1) as f64 / (2 * k) as f64).sqrt() * s;
    }
    let mut value = pmm;
    if l > ma {
        let mut prev = pmm;
        let mut cur = ((2 * ma + 3) as f64).sqrt() * t * pmm;
        for ll in (ma + 2)..=l {
            let (lf, mf) = (ll as f64, ma as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let lp = lf - 1.0;
            let b = ((lp * lp - mf * mf) / (4.0 * lp * lp - 1.0)).sqrt();
            let next = a * (t * cur - b * prev);
            prev = cur;
            cur = next;
        }
        value = cur;
    }
    Ok(match m {
        0 => value,
        m if m > 0 => core::f64::consts::SQRT_2 * value * (m as f64 * p.phi()).cos(),
        m => core::f64::consts::SQRT_2 * value * ((-m) as f64 * p.phi()).sin(),
    })
}

/// All harmonics `Y(l,m)(p)` for `l ≤ lmax`, in coefficient layout.
pub fn eval_sh_all(lmax: usize, p: &SphPoint) -> Vec<f64> {
    let rec = LegendreRecurrence::new(lmax);
    let mut table = vec![0.0; rec.table_len()];
    let mut out = vec![0.0; (lmax + 1) * (lmax + 1)];
    sh_all_with(&rec, &mut table, p, &mut out);
    out
}

pub(crate) fn sh_all_with(
    rec: &LegendreRecurrence,
    table: &mut [f64],
    p: &SphPoint,
    out: &mut [f64],
) {
    let lmax = rec.lmax;
    rec.fill(p.z(), p.sin_theta(), table);
    let (s1, c1) = p.phi().sin_cos();
    let (mut cm, mut sm) = (1.0, 0.0);
    for m in 0..=lmax {
        let off = rec.column_offset(m);
        if m == 0 {
            for l in 0..=lmax {
                out[sh_index(l, 0)] = table[off + l];
            }
        } else {
            let (c, s) = (cm * c1 - sm * s1, sm * c1 + cm * s1);
            cm = c;
            sm = s;
            let (cc, ss) = (core::f64::consts::SQRT_2 * cm, core::f64::consts::SQRT_2 * sm);
            for l in m..=lmax {
                let v = table[off + l - m];
                out[sh_index(l, m as i64)] = v * cc;
                out[sh_index(l, -(m as i64))] = v * ss;
            }
        }
    }
}

/// Coefficients of the L² projection of `f` onto degrees `≤ lmax`, by quadrature.
pub fn analyze<F>(f: F, lmax: usize, quad: &CubatureSet) -> Result<HarmonicCoeffs>
where
    F: Fn(&SphPoint) -> f64,
{
    let samples: Vec<f64> = quad.nodes().iter().map(&f).collect();
    analyze_samples(&samples, lmax, quad)
}

/// As [`analyze`], from values already sampled at the cubature nodes.
pub fn analyze_samples(samples: &[f64], lmax: usize, quad: &CubatureSet) -> Result<HarmonicCoeffs> {
    if quad.degree() < 2 * lmax {
        return Err(Error::InsufficientDegree {
            need: 2 * lmax,
            have: quad.degree(),
        });
    }
    if samples.len() != quad.len() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "{} samples for {} nodes",
            samples.len(),
            quad.len()
        )));
    }
    let weighted: Vec<f64> = samples
        .iter()
        .zip(quad.weights())
        .map(|(v, w)| v * w)
        .collect();
    Ok(transform::adjoint(quad, &weighted, lmax, 0))
}

/// `Σ_l Σ_m c(l,m) Y(l,m)(p)`.
pub fn synthesize(c: &HarmonicCoeffs, p: &SphPoint) -> f64 {
    let lmax = c.effective_lmax();
    let ys = eval_sh_all(lmax, p);
    ys.iter().zip(c.as_slice()).map(|(y, v)| y * v).sum()
}

/// Evaluates `c` at many points, sharing the recurrence setup.
pub fn synthesize_many(c: &HarmonicCoeffs, points: &[SphPoint]) -> Vec<f64> {
    let lmax = c.effective_lmax();
    let rec = LegendreRecurrence::new(lmax);
    let mut table = vec![0.0; rec.table_len()];
    let mut ys = vec![0.0; (lmax + 1) * (lmax + 1)];
    let coeffs = &c.as_slice()[..ys.len()];
    points
        .iter()
        .map(|p| {
            sh_all_with(&rec, &mut table, p, &mut ys);
            ys.iter().zip(coeffs).map(|(y, v)| y * v).sum()
        })
        .collect()
}

/// Legendre polynomial `P_l(t)` (no normalization).
pub fn legendre_polynomial(l: usize, t: f64) -> f64 {
    if l == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, t);
    for k in 2..=l {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * t * cur - (kf - 1.0) * prev) / kf;
        prev = cur;
        cur = next;
    }
    cur
}

/// Projection kernel `L_l(t) = (2l+1)/(4π) P_l(t)`, so that
/// `L_l(<x,y>) = Σ_m Y(l,m)(x) Y(l,m)(y)`.
pub fn legendre_kernel(l: usize, t: f64) -> Result<f64> {
    if !(t.abs() <= 1.0) {
        return Err(Error::Domain(alloc::format!("|t| = {} > 1", t.abs())));
    }
    Ok((2 * l + 1) as f64 / (4.0 * PI) * legendre_polynomial(l, t))
}
