//! One pass/fail line per acceptance criterion, each at its stated tolerance
//! and time budget.

mod common;

use std::path::Path;
use std::time::{Duration, Instant};

use common::*;
use dynmask::adversary::*;
use dynmask::design::pole_matched_cipher;
use dynmask::lti::{frequency_response, invariant_zeros, FrequencyGrid, TransferFunction};
use dynmask::masking::{build_loop, performance_energy, LoopSystems, Placement, Signal};
use dynmask::privacy::{empirical_bias_variance, mse_lower_bound};
use dynmask::{poly, rng};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome, u64);

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn identification(systems: LoopSystems<f64>, steps: usize, noise: f64, seed: u64) -> IdentificationPhase<f64> {
    IdentificationPhase { systems, steps, excitation_variance: 1.0, noise_variance: noise, seed }
}

fn structure(noise: f64) -> ModelStructure {
    let kind = if noise == 0.0 { EstimatorKind::Arx } else { EstimatorKind::OutputError };
    ModelStructure::new(1, 2, kind).unwrap()
}

fn attack(systems: LoopSystems<f64>, steps: usize) -> AttackPhase<f64> {
    AttackPhase {
        systems,
        steps,
        noise_variance: 0.0,
        placement: Placement::D1,
        threshold: 0.5,
        initial_state: ZdaInitialState::All,
        seed: 42,
    }
}

fn identified_cipher(delta: f64) -> EstimationResult<f64> {
    identification(example_loop(delta), 2000, 0.0, 42).estimate(&structure(0.0), 0).unwrap()
}

fn privacy_reproduction() -> Outcome {
    let est = identified_cipher(0.2);
    let root = est.numerator_roots()[0];
    let to_cipher = (root - c(1.3)).norm();
    let to_plant = (root - c(1.1)).norm();
    outcome(to_cipher <= 1e-3 && to_plant >= 0.18, format!("root {root:.9}, |root-1.3| {to_cipher:.2e}, |root-1.1| {to_plant:.6}"))
}

fn detection() -> Outcome {
    let est = identified_cipher(0.2);
    let plan = synthesize_zda_tf(&est.model, ZeroSelection::MaxModulus, 1e-3, 0).unwrap();
    let run = attack(example_loop(0.2), 100).run(&plan).unwrap();
    let energy = &run.d1.cumulative_energy;
    let beta2 = plan.zero.value.norm_sqr();
    let ratios: Vec<f64> = (30..=60).map(|k| energy[k] / 1.69f64.powi(k as i32)).collect();
    let spread = ratios.iter().cloned().fold(0.0, f64::max) / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let first = run.d1.first_alarm;
    outcome(
        first.is_some_and(|k| k < 80) && spread <= 10.0,
        format!("beta^2 {beta2:.6}, first alarm {first:?}, envelope spread over [30, 60] {spread:.3}"),
    )
}

fn stealth_baseline() -> Outcome {
    let g = example_plant();
    let plan = synthesize_zda_tf(&g, ZeroSelection::MaxModulus, 1e-3, 0).unwrap();
    let run = attack(example_loop(0.0), 100).run(&plan).unwrap();
    let d1 = run.d1.final_energy();
    let e50 = performance_energy(&run.trace, 50);
    let e60 = performance_energy(&run.trace, 60);
    outcome(d1 <= 1e-10 && e60 >= 2.0 * e50, format!("D1 energy {d1:.3e}, E[0,60]/E[0,50] {:.3}", e60 / e50))
}

fn boundedness() -> Outcome {
    let g = example_plant();
    let s = pole_matched_cipher(&g, &[c(0.8)], 1.0).unwrap();
    let systems = loop_with_cipher(&g, &s);
    let est = identification(systems.clone(), 2000, 0.0, 42).estimate(&structure(0.0), 0).unwrap();
    let plan = synthesize_zda_tf(&est.model, ZeroSelection::MaxModulus, 1e-3, 0).unwrap();
    let steps = 400;
    let run = attack(systems.clone(), steps).run(&plan).unwrap();
    let benign = build_loop(systems, 0.5, steps).unwrap().run_siso(&vec![0.0; steps], &vec![0.0; steps], &vec![0.0; steps]).unwrap();
    let worst = (201..steps)
        .map(|k| (run.trace.records[k].z.norm_squared() - benign.records[k].z.norm_squared()).abs())
        .fold(0.0, f64::max);
    outcome(worst < 1e-10, format!("zero {:.6}, largest increment past step 200 {worst:.3e}", plan.zero.value))
}

fn mse_bound() -> Outcome {
    let grid = FrequencyGrid::uniform(512).unwrap();
    let phase = identification(example_loop(0.2), 4000, 0.01, 42);
    let curve = empirical_bias_variance(&phase, &structure(0.01), 50, &grid).unwrap();
    let g = example_plant();
    let s = g.with_shifted_zeros(0.2).unwrap();
    let bound = mse_lower_bound(&curve, &g, &s).unwrap();
    let violations = (0..grid.len())
        .filter(|&j| bound.empirical_mse[j] < bound.bound[j] - 3.0 * bound.standard_error[j])
        .count();
    let gr = frequency_response(&g, &grid).unwrap().values;
    let sr = frequency_response(&s, &grid).unwrap().values;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let emp = mean(&bound.empirical_mse);
    let target = mean(&(0..grid.len()).map(|j| (sr[j] - gr[j]).norm_sqr() + curve.variance[j]).collect::<Vec<_>>());
    let rel = (emp - target).abs() / target;
    outcome(
        violations == 0 && rel <= 0.25,
        format!("violations {violations}/512, failures {}, band MSE {emp:.5} vs {target:.5} ({:.2}%)", curve.failures, 100.0 * rel),
    )
}

fn channel_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut w_dev, mut clean_dev, mut leak_dev) = (0.0f64, 0.0f64, 0.0f64);
    let mut configs = 0;
    let n = 150;
    while configs < 100 {
        let Some((systems, plant, cipher)) = random_loop(&mut rng) else { continue };
        configs += 1;
        let seed: u64 = rng.random();
        let mut s1 = rng::stream(seed, rng::EXCITATION, 0);
        let mut s2 = rng::stream(seed, rng::NOISE_IDENTIFICATION, 0);
        let mut s3 = rng::stream(seed, rng::NOISE_ATTACK, 0);
        let r: Vec<f64> = rng::white_noise(&mut s1, n, 1.0);
        let e: Vec<f64> = rng::white_noise(&mut s2, n, 0.1);
        let a: Vec<f64> = rng::white_noise(&mut s3, n, 0.5);
        let sim = |tf: &TransferFunction<f64>, u: &[f64]| {
            let ss = tf.to_state_space();
            ss.simulate_siso(u, &DVector::zeros(ss.n())).unwrap().0
        };
        let h = systems.noise_filter();
        let he = h.simulate_siso(&e, &DVector::zeros(h.n())).unwrap().0;
        for attacked in [false, true] {
            let a = if attacked { a.clone() } else { vec![0.0; n] };
            let trace = build_loop(systems.clone(), 0.5, n).unwrap().run_siso(&r, &a, &e).unwrap();
            let ut = trace.scalar(Signal::UTilde);
            let s_ut = sim(&cipher, &ut);
            let w = trace.scalar(Signal::W);
            let y = trace.scalar(Signal::Y);
            let yh = trace.scalar(Signal::YHat);
            let leak = sim(&cipher.sub(&plant), &a);
            for k in 0..n {
                w_dev = w_dev.max((w[k] - s_ut[k] - he[k]).abs());
                if attacked {
                    leak_dev = leak_dev.max((yh[k] - y[k] - leak[k]).abs());
                } else {
                    clean_dev = clean_dev.max((yh[k] - y[k]).abs());
                }
            }
        }
    }
    outcome(
        w_dev <= 1e-10 && clean_dev <= 1e-10 && leak_dev <= 1e-9,
        format!("{configs} configs, channel {w_dev:.2e}, reconstruction {clean_dev:.2e}, leak {leak_dev:.2e}"),
    )
}

fn zero_solver() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst_set, mut worst_residual) = (0.0f64, 0.0f64);
    let mut ok = true;
    for _ in 0..200 {
        let order = rng.random_range(2..=6);
        let nz = rng.random_range(0..order);
        let sys = random_siso(&mut rng, order, nz);
        let zeros = invariant_zeros(&sys.ss).unwrap();
        let values: Vec<Complex64> = zeros.iter().map(|z| z.value).collect();
        let roots = poly::roots(sys.ss.to_transfer_function().unwrap().num());
        let d = set_distance(&values, &roots);
        worst_set = worst_set.max(d);
        ok &= d <= 1e-8;
        let bound = 1e-8 * (1.0 + sys.ss.a().norm());
        for z in &zeros {
            let res = z.pencil_residual(&sys.ss);
            worst_residual = worst_residual.max(res / bound);
            ok &= res <= bound;
        }
    }
    outcome(ok, format!("200 systems, worst set distance {worst_set:.2e}, worst residual/bound {worst_residual:.2e}"))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        (v[m - 1] + v[m]) / 2.0
    } else {
        v[m]
    }
}

fn bias_persistence() -> Outcome {
    let sizes = [500, 1000, 2000, 4000];
    let mut to_cipher = Vec::new();
    let mut to_plant = Vec::new();
    for n in sizes {
        let roots: Vec<Complex64> = (0..20u64)
            .into_par_iter()
            .map(|seed| {
                let est = identification(example_loop(0.2), n, 0.01, seed).estimate(&structure(0.01), 0).unwrap();
                let roots = est.numerator_roots();
                roots.into_iter().min_by(|a, b| (a - c(1.3)).norm().total_cmp(&(b - c(1.3)).norm())).unwrap()
            })
            .collect();
        to_cipher.push(median(roots.iter().map(|z| (z - c(1.3)).norm()).collect()));
        to_plant.push(median(roots.iter().map(|z| (z - c(1.1)).norm()).collect()));
    }
    let shrinking = to_cipher.windows(2).all(|w| w[1] < w[0]);
    let persistent = to_plant.iter().all(|d| *d >= 0.15);
    let shown: Vec<String> = to_cipher.iter().map(|d| format!("{d:.2e}")).collect();
    outcome(shrinking && persistent, format!("median |z-1.3| {shown:?}, median |z-1.1| {to_plant:.4?}"))
}

fn csv_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn reproducibility() -> Outcome {
    let mut compared = 0;
    let mut ok = true;
    for name in ["example.toml", "noisy.toml"] {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
        let base = dynmask::scenario::load_config(&path).unwrap();
        let runs: Vec<Vec<(String, Vec<u8>)>> = (0..2)
            .map(|_| {
                let dir = tempfile::tempdir().unwrap();
                let mut c = base.clone();
                c.out_dir = dir.path().to_path_buf();
                dynmask::scenario::run_scenario(&c).unwrap();
                csv_bytes(dir.path())
            })
            .collect();
        compared += runs[0].len();
        ok &= !runs[0].is_empty() && runs[0] == runs[1];
    }
    outcome(ok, format!("{compared} CSV files compared across two runs each"))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("1 privacy/bias reproduction", privacy_reproduction, 10),
        ("2 detection", detection, 5),
        ("3 stealth baseline", stealth_baseline, 5),
        ("4 boundedness", boundedness, 5),
        ("5 MSE lower bound", mse_bound, 180),
        ("6 channel and reconstruction identities", channel_identities, 30),
        ("7 zero-solver oracle equivalence", zero_solver, 30),
        ("8 bias persistence in N", bias_persistence, 300),
        ("9 reproducibility", reproducibility, 60),
    ];
    let mut failed = Vec::new();
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let pass = result.pass && in_time;
        println!(
            "{} criterion {name}: {} [{:.2} s of {budget} s]",
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64()
        );
        if !pass {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
