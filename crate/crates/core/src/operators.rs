//! Blockwise convolution operators.
//!
//! A rotation-invariant convolution on S² acts on each degree-`l` harmonic
//! space through a `(2l+1)×(2l+1)` matrix `K^l`. This module holds those
//! blocks, their noisy observation `K^l + δ B^l`, the operator threshold that
//! discards badly conditioned noisy blocks, and a fit of the degree of
//! ill-posedness.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::harmonics::HarmonicCoeffs;
use crate::{Error, Result};

/// Singular values below this fraction of the largest count as zero.
const SINGULAR_RTOL: f64 = 1e-14;

pub(crate) const STREAM_SIGNAL: u64 = 1;
pub(crate) const STREAM_OPERATOR: u64 = 2;

/// Independent generator for one block of one noise source.
pub(crate) fn block_rng(seed: u64, kind: u64, l: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((kind << 40) | l as u64);
    rng
}

/// One harmonic block `K^l`.
#[derive(Debug, Clone, PartialEq)]
pub enum Block {
    Diagonal(Vec<f64>),
    Dense(DMatrix<f64>),
}

impl Block {
    pub fn dim(&self) -> usize {
        match self {
            Block::Diagonal(d) => d.len(),
            Block::Dense(m) => m.nrows(),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Block::Diagonal(d) => d.iter().zip(x).map(|(a, b)| a * b).collect(),
            Block::Dense(m) => {
                let v = m * DVector::from_column_slice(x);
                v.as_slice().to_vec()
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Block::Diagonal(d) => DMatrix::from_diagonal(&DVector::from_column_slice(d)),
            Block::Dense(m) => m.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Block::Diagonal(d) => d.iter().all(|&v| v == 0.0),
            Block::Dense(m) => m.iter().all(|&v| v == 0.0),
        }
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = match self {
            Block::Diagonal(d) => d.iter().map(|v| v.abs()).collect(),
            Block::Dense(m) => m.singular_values().as_slice().to_vec(),
        };
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// Spectral norm `‖K^l‖`.
    pub fn operator_norm(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    /// `‖(K^l)^{-1}‖ = 1/σ_min`, infinite for numerically singular blocks.
    pub fn inverse_norm(&self) -> f64 {
        inverse_norm_from(&self.singular_values())
    }

    fn min_row_norm(&self) -> f64 {
        match self {
            Block::Diagonal(d) => d.iter().fold(f64::INFINITY, |m, v| m.min(v.abs())),
            Block::Dense(m) => m
                .row_iter()
                .map(|r| r.norm())
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Solves `K^l x = rhs` by LU with partial pivoting; `None` if singular.
    pub fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        match self {
            Block::Diagonal(d) => d
                .iter()
                .zip(rhs)
                .map(|(a, b)| if *a == 0.0 { None } else { Some(b / a) })
                .collect(),
            Block::Dense(m) => m
                .clone()
                .lu()
                .solve(&DVector::from_column_slice(rhs))
                .filter(|x| x.iter().all(|v| v.is_finite()))
                .map(|x| x.as_slice().to_vec()),
        }
    }
}

fn inverse_norm_from(singular: &[f64]) -> f64 {
    let max = singular.first().copied().unwrap_or(0.0);
    let min = singular.last().copied().unwrap_or(0.0);
    if max == 0.0 || min <= SINGULAR_RTOL * max {
        f64::INFINITY
    } else {
        1.0 / min
    }
}

/// A convolution operator given by its harmonic blocks `K^0 ..= K^lmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    blocks: Vec<Block>,
}

impl BlockOperator {
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::DimensionMismatch("operator has no blocks".into()));
        }
        for (l, b) in blocks.iter().enumerate() {
            let ok = match b {
                Block::Diagonal(d) => d.len() == 2 * l + 1,
                Block::Dense(m) => m.nrows() == 2 * l + 1 && m.ncols() == 2 * l + 1,
            };
            if !ok {
                return Err(Error::DimensionMismatch(alloc::format!(
                    "block {l} must be {0}×{0}",
                    2 * l + 1
                )));
            }
        }
        Ok(Self { blocks })
    }

    pub fn identity(lmax: usize) -> Self {
        Self::scalar(lmax, |_| 1.0)
    }

    /// Operator of the uniform law on SO(3): `K^0 = 1`, every other block zero.
    pub fn uniform_law(lmax: usize) -> Self {
        Self::scalar(lmax, |l| if l == 0 { 1.0 } else { 0.0 })
    }

    /// `K^l = value(l)·I`.
    pub fn scalar<F: Fn(usize) -> f64>(lmax: usize, value: F) -> Self {
        Self {
            blocks: (0..=lmax)
                .map(|l| Block::Diagonal(vec![value(l); 2 * l + 1]))
                .collect(),
        }
    }

    /// Rosenthal operator with
    /// `K^l = (sin((l+½)α) / ((2l+1) sin(α/2)))^ν · I`.
    ///
    /// The base is negative for some degrees; non-integer `ν` use the odd
    /// extension `sign(r)|r|^ν`.
    pub fn rosenthal(alpha: f64, nu: f64, lmax: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= core::f64::consts::PI) {
            return Err(Error::InvalidParameter(alloc::format!(
                "Rosenthal angle {alpha} outside (0, π]"
            )));
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!(
                "Rosenthal exponent {nu} must be positive"
            )));
        }
        let half = (alpha / 2.0).sin();
        Ok(Self::scalar(lmax, |l| {
            if l == 0 {
                return 1.0;
            }
            let lf = l as f64;
            let r = ((lf + 0.5) * alpha).sin() / ((2.0 * lf + 1.0) * half);
            if nu.fract() == 0.0 && nu <= i32::MAX as f64 {
                r.powi(nu as i32)
            } else {
                r.signum() * r.abs().powf(nu)
            }
        }))
    }

    pub fn lmax(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn block(&self, l: usize) -> &Block {
        &self.blocks[l]
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// `(Kf)^l = K^l f^l`.
    pub fn apply(&self, f: &HarmonicCoeffs) -> Result<HarmonicCoeffs> {
        if f.lmax() > self.lmax() {
            return Err(Error::DimensionMismatch(alloc::format!(
                "operator reaches degree {} but the function has degree {}",
                self.lmax(),
                f.lmax()
            )));
        }
        let mut out = HarmonicCoeffs::zeros(f.lmax());
        for l in 0..=f.lmax() {
            let y = self.blocks[l].apply(f.block(l));
            out.block_mut(l).copy_from_slice(&y);
        }
        Ok(out)
    }

    pub fn inverse_norm(&self, l: usize) -> f64 {
        self.blocks[l].inverse_norm()
    }

    pub fn truncated(&self, lmax: usize) -> Self {
        Self {
            blocks: self.blocks[..=lmax.min(self.lmax())].to_vec(),
        }
    }
}

/// `K + δB` with iid standard normal `B`, drawn block by block in row-major order.
pub fn perturb<R: Rng + ?Sized>(k: &BlockOperator, delta: f64, rng: &mut R) -> BlockOperator {
    if delta == 0.0 {
        return k.clone();
    }
    let blocks = k
        .blocks
        .iter()
        .map(|b| {
            let n = b.dim();
            let mut m = b.to_dense();
            for i in 0..n {
                for j in 0..n {
                    let z: f64 = rng.sample(StandardNormal);
                    m[(i, j)] += delta * z;
                }
            }
            Block::Dense(m)
        })
        .collect();
    BlockOperator { blocks }
}

/// Operator threshold `O_{l,δ} = κ √(2l+1) δ √|ln δ|`.
pub fn operator_threshold(l: usize, delta: f64, kappa: f64) -> f64 {
    kappa * ((2 * l + 1) as f64).sqrt() * noise_scale(delta)
}

/// `x √|ln x|`, taken as 0 at `x = 0`.
pub fn noise_scale(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln().abs().sqrt()
    }
}

/// Highest degree examined by the operator threshold at level cap `J`.
pub fn threshold_degree(max_level: usize) -> usize {
    1usize << (max_level + 1)
}

/// Noisy operator `K + δB` whose blocks are drawn on demand from per-degree
/// random streams, so that blocks can be generated, inspected and discarded
/// independently.
#[derive(Debug, Clone, Copy)]
pub struct NoisyOperator<'a> {
    base: &'a BlockOperator,
    delta: f64,
    seed: u64,
}

impl<'a> NoisyOperator<'a> {
    pub fn new(base: &'a BlockOperator, delta: f64, seed: u64) -> Self {
        Self { base, delta, seed }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn lmax(&self) -> usize {
        self.base.lmax()
    }

    fn rows(&self, l: usize) -> NoisyRows<'_> {
        NoisyRows {
            base: self.base.block(l),
            delta: self.delta,
            rng: block_rng(self.seed, STREAM_OPERATOR, l),
            n: 2 * l + 1,
            next: 0,
        }
    }

    pub fn block(&self, l: usize) -> Block {
        if self.delta == 0.0 {
            return self.base.block(l).clone();
        }
        let n = 2 * l + 1;
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in self.rows(l).enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Block::Dense(m)
    }

    pub fn materialize(&self) -> BlockOperator {
        BlockOperator {
            blocks: (0..=self.lmax()).map(|l| self.block(l)).collect(),
        }
    }

    /// Same result as `t_op(&self.materialize(), ...)`, but a block is only
    /// drawn until one of its rows is short enough to reject it.
    pub fn threshold(&self, kappa: f64, max_level: usize) -> ThresholdedOperator {
        let top = threshold_degree(max_level).min(self.lmax());
        let mut out = ThresholdedOperator::empty(top, self.delta, kappa);
        for l in 0..=top {
            if self.delta == 0.0 {
                out.keep(l, self.base.block(l).clone());
                continue;
            }
            let o = operator_threshold(l, self.delta, kappa);
            let n = 2 * l + 1;
            let mut m = DMatrix::zeros(n, n);
            let mut rejected = false;
            for (i, row) in self.rows(l).enumerate() {
                let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm < o {
                    rejected = true;
                    break;
                }
                for (j, v) in row.into_iter().enumerate() {
                    m[(i, j)] = v;
                }
            }
            if !rejected {
                out.decide_by_svd(l, Block::Dense(m), o);
            }
        }
        out
    }
}

struct NoisyRows<'a> {
    base: &'a Block,
    delta: f64,
    rng: ChaCha8Rng,
    n: usize,
    next: usize,
}

impl Iterator for NoisyRows<'_> {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        if self.next == self.n {
            return None;
        }
        let i = self.next;
        self.next += 1;
        let row = (0..self.n)
            .map(|j| {
                let k = match self.base {
                    Block::Diagonal(d) => {
                        if i == j {
                            d[i]
                        } else {
                            0.0
                        }
                    }
                    Block::Dense(m) => m[(i, j)],
                };
                let z: f64 = self.rng.sample(StandardNormal);
                k + self.delta * z
            })
            .collect();
        Some(row)
    }
}

/// `T_op(K_δ)`: the blocks `l ≤ min(2^{J+1}, lmax)` with
/// `‖(K_δ^l)^{-1}‖ ≤ 1/O_{l,δ}`; all other blocks are zero.
#[derive(Debug, Clone)]
pub struct ThresholdedOperator {
    kept: Vec<Option<Block>>,
    inverse_norms: Vec<Option<f64>>,
    delta: f64,
    kappa: f64,
}

impl ThresholdedOperator {
    fn empty(top: usize, delta: f64, kappa: f64) -> Self {
        Self {
            kept: vec![None; top + 1],
            inverse_norms: vec![None; top + 1],
            delta,
            kappa,
        }
    }

    fn keep(&mut self, l: usize, block: Block) {
        self.inverse_norms[l] = Some(block.inverse_norm());
        self.kept[l] = Some(block);
    }

    fn decide_by_svd(&mut self, l: usize, block: Block, o: f64) {
        let inv = block.inverse_norm();
        if inv <= 1.0 / o {
            self.inverse_norms[l] = Some(inv);
            self.kept[l] = Some(block);
        }
    }

    /// Highest degree the threshold examined.
    pub fn max_degree(&self) -> usize {
        self.kept.len() - 1
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn is_kept(&self, l: usize) -> bool {
        self.kept.get(l).is_some_and(Option::is_some)
    }

    pub fn keep_mask(&self) -> Vec<bool> {
        self.kept.iter().map(Option::is_some).collect()
    }

    pub fn kept_block(&self, l: usize) -> Option<&Block> {
        self.kept.get(l).and_then(Option::as_ref)
    }

    /// `‖(K_δ^l)^{-1}‖` for kept blocks.
    pub fn inverse_norm(&self, l: usize) -> Option<f64> {
        self.inverse_norms.get(l).copied().flatten()
    }

    /// Smallest kept degree in `lo..=hi`.
    pub fn first_kept_in(&self, lo: usize, hi: usize) -> Option<usize> {
        (lo..=hi).find(|&l| self.is_kept(l))
    }

    pub fn kept_count_in(&self, lo: usize, hi: usize) -> usize {
        (lo..=hi).filter(|&l| self.is_kept(l)).count()
    }

    /// Blockwise solution `(K_δ^l)^{-1} g^l` on kept blocks, zero elsewhere,
    /// returned at band limit `lmax`.
    pub fn solve(&self, g: &HarmonicCoeffs, lmax: usize) -> Result<HarmonicCoeffs> {
        let mut out = HarmonicCoeffs::zeros(lmax);
        for l in 0..=lmax.min(g.lmax()) {
            if let Some(block) = self.kept_block(l) {
                let x = block.solve(g.block(l)).ok_or(Error::SingularBlock { degree: l })?;
                out.block_mut(l).copy_from_slice(&x);
            }
        }
        Ok(out)
    }

    /// The thresholded operator as plain blocks (zero where discarded).
    pub fn to_operator(&self) -> BlockOperator {
        BlockOperator {
            blocks: self
                .kept
                .iter()
                .enumerate()
                .map(|(l, b)| b.clone().unwrap_or_else(|| Block::Diagonal(vec![0.0; 2 * l + 1])))
                .collect(),
        }
    }
}

/// Keeps block `l ≤ min(2^{J+1}, lmax)` iff `‖(K_δ^l)^{-1}‖ ≤ 1/O_{l,δ}`.
/// With `δ = 0` every block in range is kept.
pub fn t_op(kd: &BlockOperator, delta: f64, kappa: f64, max_level: usize) -> ThresholdedOperator {
    let top = threshold_degree(max_level).min(kd.lmax());
    let mut out = ThresholdedOperator::empty(top, delta, kappa);
    for l in 0..=top {
        let block = kd.block(l);
        if delta == 0.0 {
            out.keep(l, block.clone());
            continue;
        }
        let o = operator_threshold(l, delta, kappa);
        // σ_min never exceeds the shortest row.
        if block.min_row_norm() < o {
            continue;
        }
        out.decide_by_svd(l, block.clone(), o);
    }
    out
}

/// Fitted growth `‖(K^l)^{-1}‖ ≈ Q l^ν`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipEstimate {
    pub nu: f64,
    /// Smallest `‖(K^l)^{-1}‖ / l^ν` over the fitted range.
    pub q1: f64,
    /// Largest `‖(K^l)^{-1}‖ / l^ν` over the fitted range.
    pub q2: f64,
}

/// Least-squares fit of `ln ‖(K^l)^{-1}‖` against `ln l` for `l ∈ [lmin, lmax]`.
pub fn estimate_dip(k: &BlockOperator, lmin: usize, lmax: usize) -> Result<DipEstimate> {
    if lmin < 1 || lmax <= lmin {
        return Err(Error::InvalidParameter(alloc::format!(
            "degree range [{lmin}, {lmax}] needs 1 ≤ lmin < lmax"
        )));
    }
    if lmax > k.lmax() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "operator stops at degree {}",
            k.lmax()
        )));
    }
    let mut xs = Vec::with_capacity(lmax - lmin + 1);
    let mut norms = Vec::with_capacity(xs.capacity());
    for l in lmin..=lmax {
        let n = k.inverse_norm(l);
        if !n.is_finite() {
            return Err(Error::SingularBlock { degree: l });
        }
        xs.push((l as f64).ln());
        norms.push(n);
    }
    let ys: Vec<f64> = norms.iter().map(|n| n.ln()).collect();
    let count = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / count;
    let my = ys.iter().sum::<f64>() / count;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let nu = sxy / sxx;
    let ratios = (lmin..=lmax).zip(&norms).map(|(l, n)| n / (l as f64).powf(nu));
    let (q1, q2) = ratios.fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
    Ok(DipEstimate { nu, q1, q2 })
}
