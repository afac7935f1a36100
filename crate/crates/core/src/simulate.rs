//! Synthetic experiments: target densities, the white-noise observation
//! `g = Kf + εW` and seeded fixtures.
//!
//! Every random quantity is drawn from a ChaCha8 stream selected by
//! `(seed, noise source, degree)`, so the signal noise and the operator noise
//! of one fixture are independent and each block can be regenerated alone.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::harmonics::{synthesize, HarmonicCoeffs, SphPoint};
use crate::operators::{block_rng, BlockOperator, NoisyOperator, STREAM_SIGNAL};
use crate::quadrature::{gauss_legendre, CubatureSet};
use crate::transform;
use crate::{Error, Result};

/// Seed of replicate `index` in sub-experiment `stream` of a master seed
/// (SplitMix64 finalizer over the combined key).
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    let mut z = master
        ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03).rotate_left(17);
    for _ in 0..2 {
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

/// Normalizer of the exponential spike.
pub const EXP_SPIKE_NORMALIZER: f64 = 0.6729;

#[derive(Debug, Clone, PartialEq)]
pub enum TargetDensity {
    /// `exp(-2‖ω - center‖_1) / normalizer`, with the ℓ¹ norm taken in ℝ³.
    ExpSpike { center: [f64; 3], normalizer: f64 },
    /// `1/(4π)`.
    Uniform,
    Custom(HarmonicCoeffs),
}

impl TargetDensity {
    /// The spike centred at `(0, 1, 0)`.
    pub fn exp_spike() -> Self {
        TargetDensity::ExpSpike {
            center: [0.0, 1.0, 0.0],
            normalizer: EXP_SPIKE_NORMALIZER,
        }
    }

    pub fn value(&self, p: &SphPoint) -> f64 {
        match self {
            TargetDensity::ExpSpike { center, normalizer } => {
                let [x, y, z] = p.xyz();
                let d = (x - center[0]).abs() + (y - center[1]).abs() + (z - center[2]).abs();
                (-2.0 * d).exp() / normalizer
            }
            TargetDensity::Uniform => 1.0 / (4.0 * PI),
            TargetDensity::Custom(c) => synthesize(c, p),
        }
    }

    /// Harmonic coefficients up to degree `lmax`.
    ///
    /// The spike has gradient jumps where a coordinate of `ω - center`
    /// changes sign. For the axis-aligned default center these are the
    /// great circles `z = 0` and `x = 0`, and the coefficients come from a
    /// Gauss–Legendre rule in `(θ, φ)` split along them. For other centers
    /// the split misses the kinks and the coefficients converge more slowly.
    pub fn coefficients(&self, lmax: usize) -> HarmonicCoeffs {
        match self {
            TargetDensity::Uniform => {
                let mut c = HarmonicCoeffs::zeros(lmax);
                c.set(0, 0, 1.0 / (4.0 * PI).sqrt());
                c
            }
            TargetDensity::Custom(c) => c.with_lmax(lmax),
            TargetDensity::ExpSpike { .. } => {
                let quad = kink_adapted_rule(lmax);
                let values: Vec<f64> = quad
                    .nodes()
                    .iter()
                    .zip(quad.weights())
                    .map(|(p, w)| w * self.value(p))
                    .collect();
                transform::adjoint(&quad, &values, lmax, 0)
            }
        }
    }
}

fn gauss_on(n: usize, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|v| v * half).collect(),
    )
}

/// Tensor rule with Gauss–Legendre panels `θ ∈ [0, π/2] ∪ [π/2, π]` and
/// `φ ∈ [-π/2, π/2] ∪ [π/2, 3π/2]`.
fn kink_adapted_rule(lmax: usize) -> CubatureSet {
    let n_theta = (0.785 * lmax as f64) as usize + 24;
    let n_phi = (1.571 * lmax as f64) as usize + 24;
    let mut cos_theta = Vec::with_capacity(2 * n_theta);
    let mut theta_weights = Vec::with_capacity(2 * n_theta);
    for (lo, hi) in [(0.0, PI / 2.0), (PI / 2.0, PI)] {
        let (t, w) = gauss_on(n_theta, lo, hi);
        for (t, w) in t.into_iter().zip(w) {
            cos_theta.push(t.cos());
            theta_weights.push(w * t.sin());
        }
    }
    let mut phi = Vec::with_capacity(2 * n_phi);
    let mut phi_weights = Vec::with_capacity(2 * n_phi);
    for (lo, hi) in [(-PI / 2.0, PI / 2.0), (PI / 2.0, 3.0 * PI / 2.0)] {
        let (p, w) = gauss_on(n_phi, lo, hi);
        for (p, w) in p.into_iter().zip(w) {
            phi.push(if p < 0.0 { p + 2.0 * PI } else { p });
            phi_weights.push(w);
        }
    }
    CubatureSet::tensor(2 * lmax, cos_theta, theta_weights, phi, phi_weights)
}

/// Noisy blockwise observation `g^l = K^l f^l + ε W^l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub g: HarmonicCoeffs,
    pub eps: f64,
    pub seed: u64,
}

/// `g = Kf + εW` with `W^l` iid standard normal, drawn from the signal stream of `seed`.
pub fn observe_signal(f: &HarmonicCoeffs, k: &BlockOperator, eps: f64, seed: u64) -> Result<Observation> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("noise level {eps} < 0")));
    }
    let mut g = k.apply(f)?;
    if eps > 0.0 {
        for l in 0..=g.lmax() {
            let mut rng = block_rng(seed, STREAM_SIGNAL, l);
            for v in g.block_mut(l) {
                let z: f64 = rng.sample(StandardNormal);
                *v += eps * z;
            }
        }
    }
    Ok(Observation { g, eps, seed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TargetKind {
    #[default]
    ExpSpike,
    Uniform,
}

impl TargetKind {
    pub fn density(self) -> TargetDensity {
        match self {
            TargetKind::ExpSpike => TargetDensity::exp_spike(),
            TargetKind::Uniform => TargetDensity::Uniform,
        }
    }
}

/// Parameters of one seeded experiment with a Rosenthal operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureConfig {
    pub delta: f64,
    pub eps: f64,
    pub seed: u64,
    pub alpha: f64,
    pub nu: f64,
    /// Band limit of the observation.
    pub lmax: usize,
    pub target: TargetKind,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        Self {
            delta: 1e-3,
            eps: 1e-3,
            seed: 0,
            alpha: PI,
            nu: 1.0,
            lmax: 31,
            target: TargetKind::ExpSpike,
        }
    }
}

/// The deterministic part of an experiment: the target, its coefficients and
/// the true operator. Draws share it across replicates.
#[derive(Debug, Clone)]
pub struct Scenario {
    target: TargetDensity,
    f: HarmonicCoeffs,
    operator: BlockOperator,
}

impl Scenario {
    pub fn new(target: TargetDensity, operator: BlockOperator) -> Self {
        let f = target.coefficients(operator.lmax());
        Self { target, f, operator }
    }

    pub fn rosenthal(target: TargetDensity, alpha: f64, nu: f64, lmax: usize) -> Result<Self> {
        Ok(Self::new(target, BlockOperator::rosenthal(alpha, nu, lmax)?))
    }

    pub fn target(&self) -> &TargetDensity {
        &self.target
    }

    pub fn coefficients(&self) -> &HarmonicCoeffs {
        &self.f
    }

    pub fn operator(&self) -> &BlockOperator {
        &self.operator
    }

    pub fn lmax(&self) -> usize {
        self.operator.lmax()
    }

    pub fn draw(&self, delta: f64, eps: f64, seed: u64) -> Result<Fixture<'_>> {
        if !(delta >= 0.0) {
            return Err(Error::InvalidParameter(alloc::format!("noise level {delta} < 0")));
        }
        let observation = observe_signal(&self.f, &self.operator, eps, seed)?;
        Ok(Fixture {
            scenario: self,
            observation,
            delta,
            seed,
        })
    }
}

/// One seeded draw: observation plus the noisy operator, whose blocks come
/// from an operator stream independent of the signal noise.
#[derive(Debug, Clone)]
pub struct Fixture<'a> {
    scenario: &'a Scenario,
    pub observation: Observation,
    pub delta: f64,
    pub seed: u64,
}

impl<'a> Fixture<'a> {
    pub fn scenario(&self) -> &'a Scenario {
        self.scenario
    }

    pub fn target(&self) -> &'a TargetDensity {
        &self.scenario.target
    }

    pub fn true_coefficients(&self) -> &'a HarmonicCoeffs {
        &self.scenario.f
    }

    pub fn true_operator(&self) -> &'a BlockOperator {
        &self.scenario.operator
    }

    pub fn noisy_operator(&self) -> NoisyOperator<'a> {
        NoisyOperator::new(&self.scenario.operator, self.delta, self.seed)
    }

    /// `K + δB` with every block drawn.
    pub fn perturbed_operator(&self) -> BlockOperator {
        self.noisy_operator().materialize()
    }
}

/// Rosenthal scenario for `config`.
pub fn scenario_for(config: &FixtureConfig) -> Result<Scenario> {
    Scenario::rosenthal(config.target.density(), config.alpha, config.nu, config.lmax)
}

/// Builds the scenario and draws the fixture of `config`.
pub fn make_fixture(config: &FixtureConfig) -> Result<(Scenario, Observation)> {
    let scenario = scenario_for(config)?;
    let obs = scenario.draw(config.delta, config.eps, config.seed)?.observation;
    Ok((scenario, obs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::product_rule;

    #[test]
    fn density_values() {
        let spike = TargetDensity::exp_spike();
        let at = |x: f64, y: f64, z: f64| spike.value(&SphPoint::from_vector(x, y, z).unwrap());
        assert!((at(0.0, 1.0, 0.0) - 1.0 / 0.6729).abs() < 1e-12);
        assert!((at(0.0, 1.0, 0.0) - 1.4862).abs() < 1e-4);
        assert!((at(0.0, -1.0, 0.0) - (-4.0f64).exp() / 0.6729).abs() < 1e-12);
        assert!((at(0.0, -1.0, 0.0) - 0.02722).abs() < 1e-5);
        let u = TargetDensity::Uniform.value(&SphPoint::north_pole());
        assert!((u - 0.0795775).abs() < 1e-7);
    }

    #[test]
    fn spike_is_normalized() {
        let spike = TargetDensity::exp_spike();
        let mass = product_rule(40).integrate(|p| spike.value(p));
        assert!((mass - 1.0).abs() < 1e-2, "{mass}");
    }

    /// Oracle: direct harmonic evaluation on a rule split along the kinks,
    /// with node counts unrelated to the implementation's.
    fn oracle_coefficients(lmax: usize) -> HarmonicCoeffs {
        let spike = TargetDensity::exp_spike();
        let mut out = HarmonicCoeffs::zeros(lmax);
        for (tlo, thi) in [(0.0, PI / 2.0), (PI / 2.0, PI)] {
            let (ts, tw) = gauss_on(90, tlo, thi);
            for (plo, phi) in [(-PI / 2.0, PI / 2.0), (PI / 2.0, 1.5 * PI)] {
                let (ps, pw) = gauss_on(110, plo, phi);
                for (t, wt) in ts.iter().zip(&tw) {
                    for (p, wp) in ps.iter().zip(&pw) {
                        let pt = SphPoint::from_angles(*t, *p);
                        let v = spike.value(&pt) * wt * t.sin() * wp;
                        let ys = crate::harmonics::eval_sh_all(lmax, &pt);
                        for (o, y) in out.as_mut_slice().iter_mut().zip(&ys) {
                            *o += v * y;
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn spike_coefficients_match_oracle() {
        let c = TargetDensity::exp_spike().coefficients(16);
        let oracle = oracle_coefficients(16);
        let err = c
            .as_slice()
            .iter()
            .zip(oracle.as_slice())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-8, "{err}");
        // Total mass: f^0 = √(4π)·∫f/(4π).
        assert!((c.get(0, 0) * (4.0 * PI).sqrt() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn uniform_coefficients() {
        let c = TargetDensity::Uniform.coefficients(5);
        assert!((c.get(0, 0) - 0.28209479177387814).abs() < 1e-15);
        assert_eq!(c.norm_squared(), c.get(0, 0).powi(2));
    }

    #[test]
    fn noiseless_observation_is_exact() {
        let k = BlockOperator::rosenthal(PI, 1.0, 6).unwrap();
        let f = TargetDensity::exp_spike().coefficients(6);
        let obs = observe_signal(&f, &k, 0.0, 3).unwrap();
        assert_eq!(obs.g, k.apply(&f).unwrap());
        assert!(observe_signal(&f, &k, -1.0, 3).is_err());
        assert!(observe_signal(&f, &BlockOperator::identity(4), 0.0, 3).is_err());
    }

    #[test]
    fn white_noise_energy() {
        let lmax = 6;
        let zero = HarmonicCoeffs::zeros(lmax);
        let id = BlockOperator::identity(lmax);
        let runs = 400;
        let mean: f64 = (0..runs)
            .map(|s| observe_signal(&zero, &id, 1.0, s).unwrap().g.norm_squared())
            .sum::<f64>()
            / runs as f64;
        let expect = ((lmax + 1) * (lmax + 1)) as f64;
        assert!((mean / expect - 1.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn white_noise_is_isotropic() {
        let zero = HarmonicCoeffs::zeros(3);
        let id = BlockOperator::identity(3);
        let mut cov = [[0.0f64; 7]; 7];
        let draws = 2000;
        for s in 0..draws {
            let g = observe_signal(&zero, &id, 1.0, s).unwrap().g;
            let b = g.block(3);
            for i in 0..7 {
                for j in 0..7 {
                    cov[i][j] += b[i] * b[j] / draws as f64;
                }
            }
        }
        for (i, row) in cov.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((v - target).abs() < 0.1, "({i},{j}) = {v}");
            }
        }
    }

    #[test]
    fn fixtures_are_seeded_and_independent() {
        let cfg = FixtureConfig {
            lmax: 12,
            ..FixtureConfig::default()
        };
        let (s1, o1) = make_fixture(&cfg).unwrap();
        let (_, o2) = make_fixture(&cfg).unwrap();
        assert_eq!(o1, o2);
        let (_, o3) = make_fixture(&FixtureConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(o1, o3);

        let fx = s1.draw(cfg.delta, cfg.eps, cfg.seed).unwrap();
        let kd = fx.perturbed_operator();
        assert_eq!(kd, s1.draw(cfg.delta, cfg.eps, cfg.seed).unwrap().perturbed_operator());
        // Operator noise and signal noise of block 2 come from different streams.
        let noise_sig: Vec<f64> = o1
            .g
            .block(2)
            .iter()
            .zip(s1.operator().apply(s1.coefficients()).unwrap().block(2))
            .map(|(a, b)| (a - b) / cfg.eps)
            .collect();
        let noise_op = (kd.block(2).to_dense() - s1.operator().block(2).to_dense()) / cfg.delta;
        let first_row: Vec<f64> = (0..5).map(|j| noise_op[(0, j)]).collect();
        for (a, b) in noise_sig.iter().zip(&first_row) {
            assert!((a - b).abs() > 1e-6);
        }
    }

    #[test]
    fn derived_seeds_are_distinct() {
        let mut seen = alloc::collections::BTreeSet::new();
        for stream in 0..8 {
            for index in 0..64 {
                assert!(seen.insert(derive_seed(42, stream, index)));
            }
        }
        assert_eq!(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
        assert_ne!(derive_seed(1, 2, 3), derive_seed(2, 2, 3));
    }

    #[test]
    fn noiseless_fixture() {
        let cfg = FixtureConfig {
            delta: 0.0,
            eps: 0.0,
            lmax: 8,
            ..FixtureConfig::default()
        };
        let (s, obs) = make_fixture(&cfg).unwrap();
        assert_eq!(obs.g, s.operator().apply(s.coefficients()).unwrap());
        assert_eq!(&s.draw(0.0, 0.0, 5).unwrap().perturbed_operator(), s.operator());
    }
}
