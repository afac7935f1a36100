//! Synthesis at cubature nodes and its adjoint.
//!
//! Tensor layouts (rings of constant colatitude sharing one longitude grid)
//! are handled ring by ring: one Legendre table per ring, then a longitude sum
//! per order, for `O(rings · (L² + nφ·L))` work. Scattered layouts fall back to
//! a full harmonic evaluation per node.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

#[allow(unused_imports)]
use num_traits::Float;

use crate::harmonics::{sh_all_with, sh_index, HarmonicCoeffs, LegendreRecurrence};
use crate::quadrature::{CubatureSet, Layout};

struct TrigTable {
    mmax: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl TrigTable {
    fn new(phi: &[f64], mmax: usize) -> Self {
        let stride = mmax + 1;
        let mut cos = vec![0.0; phi.len() * stride];
        let mut sin = vec![0.0; phi.len() * stride];
        for (i, &p) in phi.iter().enumerate() {
            for m in 0..=mmax {
                let (s, c) = (m as f64 * p).sin_cos();
                cos[i * stride + m] = c;
                sin[i * stride + m] = s;
            }
        }
        Self { mmax, cos, sin }
    }

    #[inline]
    fn row(&self, i: usize) -> (&[f64], &[f64]) {
        let stride = self.mmax + 1;
        (
            &self.cos[i * stride..(i + 1) * stride],
            &self.sin[i * stride..(i + 1) * stride],
        )
    }
}

/// Values of `Σ_{lmin ≤ l ≤ lmax} Σ_m c(l,m) Y(l,m)` at every node of `quad`.
pub(crate) fn evaluate(quad: &CubatureSet, c: &HarmonicCoeffs, lmin: usize, lmax: usize) -> Vec<f64> {
    let n = quad.len();
    let lmax = lmax.min(c.lmax());
    if lmin > lmax {
        return vec![0.0; n];
    }
    let rec = LegendreRecurrence::new(lmax);
    let mut table = vec![0.0; rec.table_len()];
    let mut out = vec![0.0; n];
    match quad.layout() {
        Layout::Tensor { cos_theta, phi } => {
            let trig = TrigTable::new(phi, lmax);
            let nphi = phi.len();
            let mut a = vec![0.0; lmax + 1];
            let mut b = vec![0.0; lmax + 1];
            for (k, &t) in cos_theta.iter().enumerate() {
                let s = (1.0 - t * t).max(0.0).sqrt();
                rec.fill(t, s, &mut table);
                for m in 0..=lmax {
                    let off = rec.column_offset(m);
                    let (mut sa, mut sb) = (0.0, 0.0);
                    for l in lmin.max(m)..=lmax {
                        let p = table[off + l - m];
                        sa += p * c.get(l, m as i64);
                        if m > 0 {
                            sb += p * c.get(l, -(m as i64));
                        }
                    }
                    if m > 0 {
                        sa *= SQRT_2;
                        sb *= SQRT_2;
                    }
                    a[m] = sa;
                    b[m] = sb;
                }
                let ring = &mut out[k * nphi..(k + 1) * nphi];
                for (i, v) in ring.iter_mut().enumerate() {
                    let (cr, sr) = trig.row(i);
                    let mut acc = a[0];
                    for m in 1..=lmax {
                        acc += a[m] * cr[m] + b[m] * sr[m];
                    }
                    *v = acc;
                }
            }
        }
        Layout::Scattered => {
            let mut ys = vec![0.0; (lmax + 1) * (lmax + 1)];
            let start = lmin * lmin;
            let coeffs = &c.as_slice()[start..ys.len()];
            for (v, p) in out.iter_mut().zip(quad.nodes()) {
                sh_all_with(&rec, &mut table, p, &mut ys);
                *v = ys[start..].iter().zip(coeffs).map(|(y, c)| y * c).sum();
            }
        }
    }
    out
}

/// `Σ_η values[η] Y(l,m)(η)` for `lmin ≤ l ≤ lmax`; lower degrees are left at zero.
pub(crate) fn adjoint(quad: &CubatureSet, values: &[f64], lmax: usize, lmin: usize) -> HarmonicCoeffs {
    debug_assert_eq!(values.len(), quad.len());
    let mut out = HarmonicCoeffs::zeros(lmax);
    if lmin > lmax {
        return out;
    }
    let rec = LegendreRecurrence::new(lmax);
    let mut table = vec![0.0; rec.table_len()];
    match quad.layout() {
        Layout::Tensor { cos_theta, phi } => {
            let trig = TrigTable::new(phi, lmax);
            let nphi = phi.len();
            let mut cm = vec![0.0; lmax + 1];
            let mut sm = vec![0.0; lmax + 1];
            let data = out.as_mut_slice();
            for (k, &t) in cos_theta.iter().enumerate() {
                let ring = &values[k * nphi..(k + 1) * nphi];
                if ring.iter().all(|&v| v == 0.0) {
                    continue;
                }
                cm.iter_mut().for_each(|v| *v = 0.0);
                sm.iter_mut().for_each(|v| *v = 0.0);
                for (i, &v) in ring.iter().enumerate() {
                    if v == 0.0 {
                        continue;
                    }
                    let (cr, sr) = trig.row(i);
                    for m in 0..=lmax {
                        cm[m] += v * cr[m];
                        sm[m] += v * sr[m];
                    }
                }
                let s = (1.0 - t * t).max(0.0).sqrt();
                rec.fill(t, s, &mut table);
                for m in 0..=lmax {
                    let off = rec.column_offset(m);
                    let (c, sn) = if m == 0 {
                        (cm[0], 0.0)
                    } else {
                        (SQRT_2 * cm[m], SQRT_2 * sm[m])
                    };
                    for l in lmin.max(m)..=lmax {
                        let p = table[off + l - m];
                        data[sh_index(l, m as i64)] += p * c;
                        if m > 0 {
                            data[sh_index(l, -(m as i64))] += p * sn;
                        }
                    }
                }
            }
        }
        Layout::Scattered => {
            let mut ys = vec![0.0; (lmax + 1) * (lmax + 1)];
            let start = lmin * lmin;
            let data = out.as_mut_slice();
            for (&v, p) in values.iter().zip(quad.nodes()) {
                if v == 0.0 {
                    continue;
                }
                sh_all_with(&rec, &mut table, p, &mut ys);
                for (o, y) in data[start..].iter_mut().zip(&ys[start..]) {
                    *o += v * y;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::eval_sh_all;
    use crate::quadrature::{product_rule, CubatureSet};
    use rand::{Rng, SeedableRng};

    fn random_coeffs(lmax: usize, seed: u64) -> HarmonicCoeffs {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let data = (0..(lmax + 1) * (lmax + 1)).map(|_| rng.random_range(-1.0..1.0)).collect();
        HarmonicCoeffs::from_flat(lmax, data).unwrap()
    }

    fn scattered_copy(q: &CubatureSet) -> CubatureSet {
        CubatureSet::from_parts_unchecked(q.degree(), q.nodes().to_vec(), q.weights().to_vec())
    }

    #[test]
    fn tensor_and_scattered_paths_agree() {
        let q = product_rule(14);
        let s = scattered_copy(&q);
        let c = random_coeffs(7, 3);
        for (lmin, lmax) in [(0, 7), (2, 5), (4, 7)] {
            let a = evaluate(&q, &c, lmin, lmax);
            let b = evaluate(&s, &c, lmin, lmax);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
            let ca = adjoint(&q, &a, 7, lmin);
            let cb = adjoint(&s, &a, 7, lmin);
            for (x, y) in ca.as_slice().iter().zip(cb.as_slice()) {
                assert!((x - y).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn evaluate_matches_direct_sum() {
        let q = product_rule(9);
        let c = random_coeffs(6, 11);
        let v = evaluate(&q, &c, 0, 6);
        for (p, val) in q.nodes().iter().zip(&v) {
            let ys = eval_sh_all(6, p);
            let direct: f64 = ys.iter().zip(c.as_slice()).map(|(y, c)| y * c).sum();
            assert!((direct - val).abs() < 1e-12);
        }
    }
}
