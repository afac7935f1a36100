use std::f64::consts::PI;

use sphdeconv_core::metrics::{eval_grid, lp_error, LossNorm};
use sphdeconv_core::simulate::{observe_signal, TargetKind};
use sphdeconv_core::study::{median, NoiseCell, Study, StudyConfig};
use sphdeconv_core::{bbd_estimate, bnd_estimate, Error, Method, NeedletFrame, Scenario, TargetDensity, ThresholdConfig};

#[test]
fn quiet_observation_recovers_the_spike() {
    let scenario = Scenario::rosenthal(TargetDensity::exp_spike(), PI, 1.0, 63).unwrap();
    let fixture = scenario.draw(1e-7, 1e-7, 3).unwrap();
    let kd = fixture.perturbed_operator();
    let cfg = ThresholdConfig {
        level_override: Some(4),
        ..ThresholdConfig::with_noise(1e-7, 1e-7)
    };
    let frame = NeedletFrame::new(4);
    let grid = eval_grid(2048).unwrap();
    let bnd = bnd_estimate(&fixture.observation, &kd, &cfg, &frame).unwrap();
    let bbd = bbd_estimate(&fixture.observation, &kd, &cfg).unwrap();
    assert_eq!(bnd.method, Method::Bnd);
    assert!(bnd.keep_mask.iter().all(|&k| k));
    let l2 = lp_error(&bnd.f_hat, scenario.target(), &grid, LossNorm::L2);
    let bbd_l2 = lp_error(&bbd.f_hat, scenario.target(), &grid, LossNorm::L2);
    assert!(l2 < 0.1, "bnd l2 {l2}");
    assert!(bbd_l2 < 0.1, "bbd l2 {bbd_l2}");
}

#[test]
fn noise_free_needs_a_level() {
    let scenario = Scenario::rosenthal(TargetDensity::Uniform, PI, 1.0, 15).unwrap();
    let obs = observe_signal(scenario.coefficients(), scenario.operator(), 0.0, 0).unwrap();
    let cfg = ThresholdConfig::with_noise(0.0, 0.0);
    assert!(matches!(bbd_estimate(&obs, scenario.operator(), &cfg), Err(Error::NoiseFree)));
}

#[test]
fn negative_noise_is_rejected() {
    let scenario = Scenario::rosenthal(TargetKind::Uniform.density(), PI, 1.0, 7).unwrap();
    assert!(scenario.draw(-1.0, 1e-3, 0).is_err());
    assert!(observe_signal(scenario.coefficients(), scenario.operator(), -1e-3, 0).is_err());
}

#[test]
fn study_replicates_are_reproducible() {
    let config = StudyConfig {
        cells: vec![NoiseCell { delta: 1e-3, eps: 1e-3 }],
        replicates: 2,
        master_seed: 11,
        level_cap: 3,
        grid_size: 512,
        ..StudyConfig::default()
    };
    let study = Study::new(config).unwrap();
    let a = study.run();
    let b = study.run();
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.rows.len(), 4);
    assert!(a.failures.is_empty());
    let s = a.summary(1e-3, 1e-3, Method::Bnd).unwrap();
    assert_eq!(s.count, 2);
    assert!(s.mean_l2.is_finite() && s.mean_l2 > 0.0);
}

#[test]
fn median_of_even_and_odd() {
    assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
}
