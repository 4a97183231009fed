mod common;

use common::*;
use dynmask::masking::*;
use dynmask::rng;
use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn simulate_siso(tf: &dynmask::lti::TransferFunction<f64>, u: &[f64]) -> Vec<f64> {
    let ss = tf.to_state_space();
    ss.simulate_siso(u, &DVector::zeros(ss.n())).unwrap().0
}

fn run(systems: &LoopSystems<f64>, r: &[f64], a: &[f64], e: &[f64]) -> LoopTrace<f64> {
    build_loop(systems.clone(), 0.5, r.len()).unwrap().run_siso(r, a, e).unwrap()
}

#[test]
fn zero_inputs_give_zero_trace() {
    let trace = run(&example_loop(0.2), &[0.0; 20], &[0.0; 20], &[0.0; 20]);
    for sig in [Signal::Y, Signal::W, Signal::YHat, Signal::U, Signal::D] {
        assert!(trace.scalar(sig).iter().all(|v| *v == 0.0));
    }
    assert_eq!(detect(&trace, Placement::D1, 0.5).first_alarm, None);
}

#[test]
fn channel_carries_cipher_response() {
    let systems = example_loop(0.2);
    let n = 200;
    let mut rng = rng::stream(1, rng::EXCITATION, 0);
    let r: Vec<f64> = rng::white_noise(&mut rng, n, 1.0);
    let trace = run(&systems, &r, &vec![0.0; n], &vec![0.0; n]);
    let u = trace.scalar(Signal::U);
    let w = trace.scalar(Signal::W);
    let s = simulate_siso(&example_plant().with_shifted_zeros(0.2).unwrap(), &u);
    let g = simulate_siso(&example_plant(), &u);
    let dev_s = w.iter().zip(&s).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let dev_g = w.iter().zip(&g).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(dev_s < 1e-10);
    assert!(dev_g > 1e-2);
}

#[test]
fn unmasked_channel_carries_plant_output() {
    let trace = run(&example_loop(0.0), &[1.0; 30], &[0.0; 30], &[0.0; 30]);
    for rec in &trace.records {
        assert!((&rec.w - &rec.y).norm() < 1e-12);
    }
}

#[test]
fn step_reference_is_tracked() {
    let n = 80;
    let trace = run(&example_loop(0.2), &vec![1.0; n], &vec![0.0; n], &vec![0.0; n]);
    assert!((trace.records[n - 1].y[0] - 1.0).abs() < 1e-6);
    // no attack and no noise: the residual is exactly zero at both placements
    assert!(detect(&trace, Placement::D1, 0.0).final_energy() < 1e-20);
    assert!(detect(&trace, Placement::D2, 0.0).final_energy() < 1e-20);
}

#[test]
fn horizon_and_dimension_errors() {
    let mut engine = build_loop(example_loop(0.2), 0.5, 2).unwrap();
    let one = DVector::from_element(1, 0.0);
    engine.step(&one, &one, &one).unwrap();
    engine.step(&one, &one, &one).unwrap();
    assert_eq!(engine.step(&one, &one, &one), Err(dynmask::Error::HorizonExceeded(2)));
    let mut engine = build_loop(example_loop(0.2), 0.5, 2).unwrap();
    assert!(engine.step(&DVector::zeros(2), &one, &one).is_err());
    assert!(engine.run_siso(&[0.0; 2], &[0.0; 1], &[0.0; 2]).is_err());
    assert!(build_loop(example_loop(0.2), -1.0, 2).is_err());
}

#[test]
fn unstable_cipher_rejected() {
    let g = example_plant();
    let bad = dynmask::lti::TransferFunction::new(vec![1.0], vec![1.0, -1.2]).unwrap();
    let controller = dynmask::design::stabilizing_output_feedback(&g, 0.6).unwrap();
    let err = LoopSystems::new(g.to_state_space(), unit_noise(), bad.to_state_space(), controller);
    assert_eq!(err.unwrap_err(), dynmask::Error::UnstableCipher);
}

#[test]
fn non_stabilizing_controller_rejected() {
    let g = example_plant();
    // u_{k+1} = 3 y_k
    let controller = dynmask::design::common_denominator_realization(&[vec![3.0], vec![0.0]], &[1.0]);
    let err = LoopSystems::new(g.to_state_space(), unit_noise(), g.to_state_space(), controller);
    assert_eq!(err.unwrap_err(), dynmask::Error::UnstableClosedLoop);
}

#[test]
fn trace_csv_layout() {
    let trace = run(&example_loop(0.2), &[1.0; 5], &[0.0; 5], &[0.0; 5]);
    let mut buf = Vec::new();
    trace.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "k,r,u,a,u_tilde,e,y,v,l,w,y_hat,d,z_energy_cum");
    assert_eq!(lines.count(), 5);
}

#[test]
fn calibrated_threshold_is_a_noise_quantile() {
    let systems = example_loop(0.2);
    let t = calibrate_threshold(&systems, Placement::D1, 0.01, 100, 0.99, 200, 3).unwrap();
    // 100 steps of y with variance at least 0.01 per step
    assert!(t > 0.5 && t < 10.0, "threshold {t}");
    let again = calibrate_threshold(&systems, Placement::D1, 0.01, 100, 0.99, 200, 3).unwrap();
    assert_eq!(t, again);
    assert_eq!(calibrate_threshold(&systems, Placement::D1, 0.0, 100, 0.99, 20, 3).unwrap(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn channel_and_reconstruction_identities(seed in any::<u64>(), attack in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let Some((systems, plant, cipher)) = random_loop(&mut rng) else { return Ok(()) };
        let n = 120;
        let mut s1 = rng::stream(seed, rng::EXCITATION, 0);
        let mut s2 = rng::stream(seed, rng::NOISE_IDENTIFICATION, 0);
        let mut s3 = rng::stream(seed, rng::NOISE_ATTACK, 0);
        let r: Vec<f64> = rng::white_noise(&mut s1, n, 1.0);
        let e: Vec<f64> = rng::white_noise(&mut s2, n, 0.1);
        let a: Vec<f64> = if attack { rng::white_noise(&mut s3, n, 0.5) } else { vec![0.0; n] };
        let trace = run(&systems, &r, &a, &e);
        let ut = trace.scalar(Signal::UTilde);
        let s_ut = simulate_siso(&cipher, &ut);
        let he = systems.noise_filter().simulate_siso(&e, &DVector::zeros(systems.noise_filter().n())).unwrap().0;
        let w = trace.scalar(Signal::W);
        let y = trace.scalar(Signal::Y);
        let yh = trace.scalar(Signal::YHat);
        let diff = cipher.sub(&plant);
        let leak = simulate_siso(&diff, &a);
        for k in 0..n {
            let scale = 1.0 + w[k].abs();
            prop_assert!((w[k] - s_ut[k] - he[k]).abs() <= 1e-10 * scale);
            prop_assert!((yh[k] - y[k] - leak[k]).abs() <= 1e-9 * (1.0 + y[k].abs()));
        }
    }

    #[test]
    fn detector_energy_is_monotone(seed in any::<u64>(), t1 in 0.0f64..5.0, t2 in 0.0f64..5.0) {
        let systems = example_loop(0.2);
        let n = 60;
        let mut s = rng::stream(seed, rng::NOISE_ATTACK, 0);
        let a: Vec<f64> = rng::white_noise(&mut s, n, 0.05);
        let trace = run(&systems, &vec![0.0; n], &a, &vec![0.0; n]);
        for placement in [Placement::D1, Placement::D2] {
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let rl = detect(&trace, placement, lo);
            let rh = detect(&trace, placement, hi);
            prop_assert!(rl.cumulative_energy.windows(2).all(|w| w[1] >= w[0]));
            match (rl.first_alarm, rh.first_alarm) {
                (Some(kl), Some(kh)) => prop_assert!(kl <= kh),
                (None, Some(_)) => prop_assert!(false, "higher threshold alarmed first"),
                _ => {}
            }
        }
    }
}
