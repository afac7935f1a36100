//! Acceptance criteria, one printed line each. Exits nonzero when any fails.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sphdeconv::runner::{run_kappa, run_study, run_tau};
use sphdeconv_core::calibrate::TauKind;
use sphdeconv_core::estimators::{bnd_estimate, bnd_estimate_thresholded, live_level, Method, ThresholdConfig};
use sphdeconv_core::needlets::{band_projection, localization_decay, needlet_analyze};
use sphdeconv_core::operators::estimate_dip;
use sphdeconv_core::quadrature::product_rule;
use sphdeconv_core::simulate::{Observation, Scenario, TargetKind};
use sphdeconv_core::study::{NoiseCell, Study, StudyConfig};
use sphdeconv_core::{Block, BlockOperator, HarmonicCoeffs, NeedletFrame, Window};
use sphdeconv_validation::{oracle, tol, Report};

type Check = Result<(bool, String), String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn random_coeffs(lmax: usize, rng: &mut ChaCha8Rng) -> HarmonicCoeffs {
    let n = (lmax + 1) * (lmax + 1);
    HarmonicCoeffs::from_flat(lmax, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn frame_identity() -> Check {
    let start = Instant::now();
    let frame = NeedletFrame::new(tol::FRAME_LEVEL);
    let lmax = 1 << tol::FRAME_LEVEL;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..tol::FRAME_FUNCTIONS {
        let f = random_coeffs(lmax, &mut rng);
        let beta = needlet_analyze(&f.with_lmax(frame.lmax()), &frame).map_err(err)?;
        worst = worst.max((beta.energy() - f.norm_squared()).abs() / f.norm_squared());
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst <= tol::FRAME_IDENTITY && secs < tol::FRAME_IDENTITY_SECONDS,
        format!(
            "max relative defect {worst:.2e} (≤ {:.0e}) over {} functions, lmax {lmax}, {secs:.2}s (< {}s)",
            tol::FRAME_IDENTITY,
            tol::FRAME_FUNCTIONS,
            tol::FRAME_IDENTITY_SECONDS
        ),
    ))
}

fn partition_of_unity() -> Check {
    let w = Window;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..tol::PARTITION_SAMPLES {
        let x: f64 = rng.random_range(1.0..=1e4);
        // b²(x/2^j) vanishes once x/2^j < 1/2.
        let top = x.log2().ceil() as i32 + 2;
        let s: f64 = (0..=top).map(|j| w.b_squared(x / 2f64.powi(j))).sum();
        worst = worst.max((s - 1.0).abs());
    }
    Ok((
        worst <= tol::PARTITION_OF_UNITY,
        format!(
            "max |Σ b² − 1| = {worst:.2e} (≤ {:.0e}) over {} samples in [1, 1e4]",
            tol::PARTITION_OF_UNITY,
            tol::PARTITION_SAMPLES
        ),
    ))
}

fn quadrature_exactness() -> Check {
    let q = product_rule(20);
    let n = 11 * 11;
    let mut gram = DMatrix::<f64>::zeros(n, n);
    for (p, w) in q.nodes().iter().zip(q.weights()) {
        let y = DVector::from_vec(oracle::real_sh(10, p.theta(), p.phi()));
        gram += *w * &y * y.transpose();
    }
    let defect = (gram - DMatrix::identity(n, n)).abs().max();
    Ok((
        defect <= tol::QUADRATURE_GRAM,
        format!(
            "degree-20 product rule ({} nodes): max |G − I| = {defect:.2e} (≤ {:.0e}) for l, l' ≤ 10",
            q.len(),
            tol::QUADRATURE_GRAM
        ),
    ))
}

fn blockwise_property() -> Check {
    let lmax = tol::BLOCKWISE_LMAX;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for k in 0..tol::BLOCKWISE_OPERATORS {
        let blocks: Vec<Block> = (0..=lmax)
            .map(|l| {
                let n = 2 * l + 1;
                if (k + l) % 3 == 0 {
                    Block::Diagonal((0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
                } else {
                    Block::Dense(DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0)))
                }
            })
            .collect();
        let dense = oracle::block_diagonal(&blocks.iter().map(Block::to_dense).collect::<Vec<_>>());
        let op = BlockOperator::new(blocks).map_err(err)?;
        let f = random_coeffs(lmax, &mut rng);
        let want = &dense * DVector::from_column_slice(f.as_slice());
        let got = op.apply(&f).map_err(err)?;
        for (a, b) in got.as_slice().iter().zip(want.iter()) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok((
        worst <= tol::BLOCKWISE_APPLY,
        format!(
            "max |blockwise − dense| = {worst:.2e} (≤ {:.0e}) on {} operators, lmax {lmax}",
            tol::BLOCKWISE_APPLY,
            tol::BLOCKWISE_OPERATORS
        ),
    ))
}

fn rosenthal_dip() -> Check {
    let (lo, hi) = tol::DIP_RANGE;
    let mut ok = true;
    let mut parts = Vec::new();
    for (nu, band) in [(1.0, tol::DIP_NU1), (2.0, tol::DIP_NU2)] {
        let k = BlockOperator::rosenthal(PI, nu, hi).map_err(err)?;
        let fit = estimate_dip(&k, lo, hi).map_err(err)?;
        // At α = π every block is ±(2l+1)^{-ν}.
        let xs: Vec<f64> = (lo..=hi).map(|l| (l as f64).ln()).collect();
        let ys: Vec<f64> = (lo..=hi).map(|l| nu * ((2 * l + 1) as f64).ln()).collect();
        let reference = oracle::slope(&xs, &ys);
        ok &= fit.nu >= band.0 && fit.nu <= band.1 && (fit.nu - reference).abs() < 1e-9;
        parts.push(format!(
            "ν={nu}: fitted {:.6} in [{}, {}] (reference {reference:.6})",
            fit.nu, band.0, band.1
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn within_one_step(grid: &[f64], got: f64, want: f64) -> bool {
    let i = grid.iter().position(|&g| g == got);
    let k = grid.iter().position(|&g| g == want);
    matches!((i, k), (Some(i), Some(k)) if i.abs_diff(k) <= 1)
}

fn calibration() -> Check {
    let mut kappa_hits = 0;
    let mut sig_hits = 0;
    let mut op_hits = 0;
    let mut kappas = Vec::new();
    let mut sigs = Vec::new();
    let mut ops = Vec::new();
    let mut first_counts = None;
    for seed in 0..tol::CALIBRATION_SEEDS {
        let k = run_kappa(1e-3, tol::CALIBRATION_RUNS, &tol::KAPPA_GRID, seed).map_err(err)?;
        first_counts.get_or_insert(k.counts.clone());
        kappa_hits += usize::from(!k.exhausted && within_one_step(&tol::KAPPA_GRID, k.kappa, 0.8));
        kappas.push(format!("{}{}", k.kappa, if k.exhausted { "*" } else { "" }));

        let s = run_tau(TauKind::Sig, 1e-3, 1e-4, 0.8, &tol::TAU_SIG_GRID, tol::CALIBRATION_RUNS, seed)
            .map_err(err)?;
        sig_hits += usize::from(!s.exhausted && within_one_step(&tol::TAU_SIG_GRID, s.tau, 0.9));
        sigs.push(format!("{}{}", s.tau, if s.exhausted { "*" } else { "" }));

        let o = run_tau(TauKind::Op, 1e-4, 1e-3, 0.8, &tol::TAU_OP_GRID, tol::CALIBRATION_RUNS, seed)
            .map_err(err)?;
        op_hits += usize::from(!o.exhausted && within_one_step(&tol::TAU_OP_GRID, o.tau, 0.2));
        ops.push(format!("{}{}", o.tau, if o.exhausted { "*" } else { "" }));
    }
    let need = tol::CALIBRATION_HITS;
    let n = tol::CALIBRATION_SEEDS;
    Ok((
        kappa_hits >= need && sig_hits >= need && op_hits >= need,
        format!(
            "κ {kappa_hits}/{n} seeds near 0.8 [{}], Nr_op over κ grid {:?}; τ_sig {sig_hits}/{n} near 0.9 [{}]; \
             τ_op {op_hits}/{n} near 0.2 [{}]; need {need}/{n} each (* = grid exhausted)",
            kappas.join(" "),
            first_counts.unwrap_or_default(),
            sigs.join(" "),
            ops.join(" ")
        ),
    ))
}

fn table3() -> Check {
    let mid = NoiseCell { delta: 1e-3, eps: 1e-3 };
    let op_low = NoiseCell { delta: 1e-4, eps: 1e-3 };
    let low = NoiseCell { delta: 1e-4, eps: 1e-4 };
    let study = Study::new(StudyConfig {
        cells: vec![mid, op_low, low],
        replicates: tol::STUDY_REPLICATES,
        master_seed: 2024,
        ..StudyConfig::default()
    })
    .map_err(err)?;
    let report = run_study(&study);
    if !report.failures.is_empty() {
        return Err(format!("{} replicate failures: {}", report.failures.len(), report.failures[0].message));
    }
    let mean = |c: NoiseCell, m: Method| report.summary(c.delta, c.eps, m).map(|s| s.mean_l2).unwrap_or(f64::NAN);
    let bnd_mid = mean(mid, Method::Bnd);
    let bnd_low = mean(low, Method::Bnd);
    let in_band = |v: f64, (a, b): (f64, f64)| v >= a && v <= b;
    let mut ok = in_band(bnd_mid, tol::BND_L2_MID) && in_band(bnd_low, tol::BND_L2_LOW);
    let mut order = Vec::new();
    for c in [mid, op_low, low] {
        let (b, d) = (mean(c, Method::Bnd), mean(c, Method::Bbd));
        ok &= b < d;
        order.push(format!("({:e},{:e}) BND {b:.4} vs BBD {d:.4}", c.delta, c.eps));
    }
    Ok((
        ok,
        format!(
            "N={}: BND L² at (1e-3,1e-3) = {bnd_mid:.4} in [{}, {}], at (1e-4,1e-4) = {bnd_low:.4} in [{}, {}]; ordering {}",
            tol::STUDY_REPLICATES,
            tol::BND_L2_MID.0,
            tol::BND_L2_MID.1,
            tol::BND_L2_LOW.0,
            tol::BND_L2_LOW.1,
            order.join(", ")
        ),
    ))
}

fn pure_noise_kill() -> Check {
    let (delta, eps) = (1e-4, 1e-3);
    let cfg = ThresholdConfig {
        level_cap: Some(8),
        ..ThresholdConfig::with_noise(eps, delta)
    };
    let j = cfg.max_level().map_err(err)?;
    let scenario = Scenario::rosenthal(TargetKind::Uniform.density(), PI, 1.0, (1 << (j + 1)) - 1).map_err(err)?;
    let mut clean = 0;
    let mut counts = Vec::new();
    for seed in 0..tol::KILL_RUNS {
        let draw = scenario.draw(delta, eps, seed).map_err(err)?;
        let top = draw.noisy_operator().threshold(cfg.kappa, j);
        let frame = NeedletFrame::new(live_level(&top, j).unwrap_or(0).max(tol::KILL_LEVEL));
        let est = bnd_estimate_thresholded(&draw.observation, &top, &cfg, &frame).map_err(err)?;
        let stage = est.needlet.ok_or("BND returned no needlet stage")?;
        let survivors: usize = (0..=tol::KILL_LEVEL).map(|l| stage.surviving_count(l)).sum();
        clean += usize::from(survivors == 0);
        counts.push(survivors);
    }
    Ok((
        clean >= tol::KILL_HITS,
        format!(
            "{clean}/{} runs with no survivor at j ≤ {} (need ≥ {}); survivors per run {counts:?}",
            tol::KILL_RUNS,
            tol::KILL_LEVEL,
            tol::KILL_HITS
        ),
    ))
}

fn noiseless_recovery() -> Check {
    let level = 4;
    let frame = NeedletFrame::new(level);
    let k = BlockOperator::rosenthal(PI, 1.0, frame.lmax()).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cfg = ThresholdConfig {
        level_override: Some(level),
        ..ThresholdConfig::default()
    };
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let f = random_coeffs(frame.lmax(), &mut rng);
        let obs = Observation {
            g: k.apply(&f).map_err(err)?,
            eps: 0.0,
            seed: 0,
        };
        let est = bnd_estimate(&obs, &k, &cfg, &frame).map_err(err)?;
        let target = band_projection(&f, &frame);
        let diff: f64 = est
            .f_hat
            .as_slice()
            .iter()
            .zip(target.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        worst = worst.max(diff.sqrt() / f.norm());
    }
    Ok((
        worst <= tol::NOISELESS_RECOVERY,
        format!(
            "ε = δ = 0, Rosenthal(π,1), J = {level}: max ‖f̃ − A_J f‖/‖f‖ = {worst:.2e} (≤ {:.0e})",
            tol::NOISELESS_RECOVERY
        ),
    ))
}

fn localization() -> Check {
    let frame = NeedletFrame::new(3);
    let centers = frame.level(3).len();
    let mut worst = f64::INFINITY;
    for idx in [0, centers / 3, centers / 2] {
        worst = worst.min(localization_decay(&frame, 3, idx));
    }
    Ok((
        worst >= tol::LOCALIZATION_MIN_DECAY,
        format!(
            "fitted decay exponent of |ψ_3,η| over d ∈ [1/8, 1]: {worst:.3} (need ≥ {})",
            tol::LOCALIZATION_MIN_DECAY
        ),
    ))
}

fn main() {
    let mut report = Report::default();
    report.criterion("1", "frame identity", frame_identity);
    report.criterion("2", "partition of unity", partition_of_unity);
    report.criterion("3", "quadrature exactness", quadrature_exactness);
    report.criterion("4", "blockwise property", blockwise_property);
    report.criterion("5", "Rosenthal DIP", rosenthal_dip);
    report.criterion("6", "calibration reproduction", calibration);
    report.criterion("7", "error table reproduction", table3);
    report.criterion("8", "pure-noise kill", pure_noise_kill);
    report.criterion("9", "noiseless recovery", noiseless_recovery);
    report.criterion("10", "localization", localization);
    let failed = report.failures();
    println!("acceptance: {} of {} criteria passed", report.len() - failed, report.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
