use super::*;
use crate::data::{corrupt, psnr, synth_lowrank_smooth, Mask};
use crate::prox::Penalty;
use crate::rng::SeededRng;
use crate::tensor::DenseTensor;

fn small_cfg() -> SolverConfig {
    let mut cfg = SolverConfig::new(Penalty::Mcp { gamma: 3.0 }, Penalty::Mcp { gamma: 3.0 });
    cfg.max_iters = 300;
    cfg
}

#[test]
fn zero_problem_stays_zero() {
    let z = DenseTensor::zeros(&[5, 4, 3]).unwrap();
    let mask = Mask::full(&[5, 4, 3]);
    let (l, e, rep) = gnrhtc(&z, &mask, &small_cfg()).unwrap();
    assert_eq!(l.max_abs(), 0.0);
    assert_eq!(e.max_abs(), 0.0);
    assert_eq!(rep.status, Status::Converged);
    assert_eq!(rep.iterations, 1);
}

#[test]
fn full_observation_noise_free_reproduces_data() {
    let x = synth_lowrank_smooth(&[10, 9, 4], &[3, 3, 2], 0.5, 1).unwrap();
    let mask = Mask::full(x.dims());
    let (l, rep) = gnhtc(&x, &mask, &small_cfg()).unwrap();
    assert_eq!(rep.status, Status::Converged);
    assert!(l.max_abs_diff(&x).unwrap() <= 1e-3);
}

#[test]
fn mu_schedule_is_geometric_and_capped() {
    let x = synth_lowrank_smooth(&[6, 6, 3], &[2, 2, 2], 0.5, 2).unwrap();
    let c = corrupt(&x, 0.6, 0.1, 3).unwrap();
    let mut cfg = small_cfg();
    cfg.mu0 = 1e-2;
    cfg.mu_max = 1.0;
    cfg.growth = 1.5;
    cfg.max_iters = 20;
    cfg.tol = 1e-300;
    let (_, _, rep) = gnrhtc(&c.observed, &c.mask, &cfg).unwrap();
    assert_eq!(rep.iterations, 20);
    assert_eq!(rep.status, Status::MaxIters);
    for r in &rep.history {
        let expect = (1e-2 * 1.5f64.powi(r.iter as i32)).min(1.0);
        assert!((r.mu - expect).abs() <= 1e-12 * expect);
    }
    assert_eq!(rep.final_mu, 1.0);
}

#[test]
fn runs_are_deterministic() {
    let x = synth_lowrank_smooth(&[8, 7, 3], &[2, 2, 2], 0.5, 4).unwrap();
    let c = corrupt(&x, 0.5, 0.2, 5).unwrap();
    let mut cfg = small_cfg();
    cfg.max_iters = 40;
    let a = gnrhtc(&c.observed, &c.mask, &cfg).unwrap();
    let b = gnrhtc(&c.observed, &c.mask, &cfg).unwrap();
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
    assert_eq!(a.2.history, b.2.history);
}

#[test]
fn degenerate_gradient_modes_still_run() {
    let x = synth_lowrank_smooth(&[6, 5, 1], &[2, 2, 1], 0.5, 6).unwrap();
    let mask = Mask::full(x.dims());
    let mut cfg = small_cfg();
    cfg.regularizer = Regularizer::Gradient(vec![2]);
    let (l, rep) = gnhtc(&x, &mask, &cfg).unwrap();
    assert!(l.is_finite());
    assert_eq!(rep.status, Status::Converged);
    assert!(l.max_abs_diff(&x).unwrap() <= 1e-3);
}

#[test]
fn robust_recovery_beats_observation() {
    let x = synth_lowrank_smooth(&[20, 20, 5], &[3, 3, 2], 0.5, 7).unwrap();
    let c = corrupt(&x, 0.6, 0.1, 8).unwrap();
    let (l, _, _) = gnrhtc(&c.observed, &c.mask, &small_cfg()).unwrap();
    assert!(psnr(&x, &l).unwrap() > psnr(&x, &c.observed).unwrap() + 5.0);
}

#[test]
fn config_validation() {
    let mut cfg = small_cfg();
    cfg.growth = 1.0;
    assert!(cfg.validate().is_err());
    let mut cfg = small_cfg();
    cfg.regularizer = Regularizer::Gradient(vec![]);
    assert!(cfg.validate().is_err());
    let z = DenseTensor::zeros(&[3, 3, 2]).unwrap();
    let empty = Mask::from_indices(&[3, 3, 2], &[]).unwrap();
    assert!(gnrhtc(&z, &empty, &small_cfg()).is_err());
    assert!((default_lambda(1.5, &[60, 40, 10]) - 1.5 / 600f64.sqrt()).abs() < 1e-15);
}

#[test]
fn dither_mean_is_unbiased() {
    let x = DenseTensor::filled(&[1], 0.37).unwrap();
    let obs = onebit_observe(&x, 200_000, 1.0, 0.0, 9, None).unwrap();
    let est = obs.naive_estimate();
    assert!((est.data()[0] - 0.37).abs() <= 3.0 / (200_000f64).sqrt());
}

#[test]
fn naive_estimate_fills_unsampled_with_global_mean() {
    let obs = ObservationSet::new(&[3], 2.0, vec![(0, 1), (0, 1), (1, -1)]).unwrap();
    let est = obs.naive_estimate();
    assert_eq!(est.data(), &[2.0, -2.0, 2.0 / 3.0]);
    assert!(ObservationSet::new(&[3], 1.0, vec![(3, 1)]).is_err());
    assert!(ObservationSet::new(&[3], 1.0, vec![(0, 0)]).is_err());
}

#[test]
fn l_update_is_stationary_inside_box() {
    let mut rng = SeededRng::new(10);
    let l0 = rng.uniform_tensor(&[6, 5, 4]).scale(0.8);
    let obs = onebit_observe(&l0, 300, 1.0, 0.1, 11, None).unwrap();
    let z = rng.normal_tensor(&[6, 5, 4]).scale(0.3);
    let y = rng.normal_tensor(&[6, 5, 4]).scale(0.01);
    let s = rng.normal_tensor(&[6, 5, 4]).scale(0.1);
    for mu in [1e-3, 0.1, 10.0] {
        let l = onebit_l_update(&obs, &z, &y, None, mu, 1.0);
        assert!(onebit_stationarity(&obs, &l, &z, &y, None, mu, 1.0) <= 1e-12);
        assert!(l.max_abs() <= 1.0);
        let l = onebit_l_update(&obs, &z, &y, Some(&s), mu, 1.0);
        assert!(onebit_stationarity(&obs, &l, &z, &y, Some(&s), mu, 1.0) <= 1e-12);
    }
}

#[test]
fn onebit_recovers_better_than_naive() {
    let x = synth_lowrank_smooth(&[16, 16, 4], &[2, 2, 2], 0.5, 12).unwrap();
    let l = x.map(|v| v - 0.5);
    let theta = 1.2 * (l.max_abs() + 0.3);
    let obs = onebit_observe(&l, l.len() * 4, theta, 0.1, 13, None).unwrap();
    let mut cfg = SolverConfig::onebit(Penalty::Mcp { gamma: 3.0 }, Penalty::L1);
    cfg.max_iters = 200;
    let (est, rep) = gnobhtc(&obs, &cfg, theta).unwrap();
    assert!(est.max_abs() <= theta);
    assert!(rep.iterations >= 1);
    let naive = obs.naive_estimate();
    assert!(l.fro_dist(&est).unwrap() < l.fro_dist(&naive).unwrap());
}

#[test]
fn robust_onebit_sparse_part_lives_on_samples() {
    let x = synth_lowrank_smooth(&[10, 10, 3], &[2, 2, 2], 0.5, 14).unwrap();
    let l = x.map(|v| v - 0.5);
    let obs = onebit_observe(&l, 150, 1.0, 0.05, 15, None).unwrap();
    let mut cfg = SolverConfig::onebit(Penalty::Mcp { gamma: 3.0 }, Penalty::L1);
    cfg.max_iters = 30;
    cfg.mu0 = 0.05;
    cfg.lambda2 = 1e-4;
    let (_, s, _) = gnobrhtc(&obs, &cfg, 1.0).unwrap();
    for i in 0..s.len() {
        if obs.j2()[i] == 0.0 {
            assert_eq!(s.data()[i], 0.0);
        }
    }
    assert!(s.max_abs() > 0.0);
    // Large sparse weight forces S = 0 and reproduces the plain solver.
    cfg.lambda2 = 1e6;
    let (lr, s, _) = gnobrhtc(&obs, &cfg, 1.0).unwrap();
    assert_eq!(s.max_abs(), 0.0);
    let (lp, _) = gnobhtc(&obs, &cfg, 1.0).unwrap();
    assert!(lr.max_abs_diff(&lp).unwrap() <= 1e-12);
}
