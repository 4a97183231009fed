#![allow(dead_code)]

use dynmask::design::{shifted_zero_cipher, stabilizing_output_feedback};
use dynmask::lti::{StateSpace, TransferFunction};
use dynmask::masking::LoopSystems;
use nalgebra::DMatrix;
use num_complex::Complex64;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `(z - 1.1) / ((z - 0.2)(z - 0.5))`
pub fn example_plant() -> TransferFunction<f64> {
    TransferFunction::from_zeros_poles(&[c(1.1)], &[c(0.2), c(0.5)], 1.0).unwrap()
}

pub fn unit_noise() -> StateSpace<f64> {
    StateSpace::gain(DMatrix::identity(1, 1))
}

pub fn loop_with_cipher(plant: &TransferFunction<f64>, cipher: &TransferFunction<f64>) -> LoopSystems<f64> {
    let controller = stabilizing_output_feedback(plant, 0.6).unwrap();
    LoopSystems::new(plant.to_state_space(), unit_noise(), cipher.to_state_space(), controller).unwrap()
}

/// Example loop with the cipher zero shifted by `delta` (0 means unmasked).
pub fn example_loop(delta: f64) -> LoopSystems<f64> {
    let g = example_plant();
    let s = shifted_zero_cipher(&g, delta).unwrap();
    loop_with_cipher(&g, &s)
}

use dynmask::design::pole_matched_cipher;
use rand::Rng;

/// Conjugate-closed root set of `count` roots, real or paired, each inside
/// `radius` and at least `gap` away from every root in `avoid` and from each
/// other.
pub fn random_roots<R: Rng>(rng: &mut R, count: usize, radius: f64, gap: f64, avoid: &[Complex64]) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::with_capacity(count);
    let far = |z: Complex64, set: &[Complex64]| set.iter().all(|w| (z - w).norm() >= gap);
    while out.len() < count {
        let pair = count - out.len() >= 2 && rng.random_bool(0.4);
        let r = radius * rng.random_range(0.05..1.0f64).sqrt();
        let z = if pair {
            let th = rng.random_range(0.2..(std::f64::consts::PI - 0.2));
            Complex64::from_polar(r, th)
        } else {
            Complex64::new(if rng.random_bool(0.5) { r } else { -r }, 0.0)
        };
        let mut cand = vec![z];
        if pair {
            cand.push(z.conj());
        }
        if cand.iter().all(|c| far(*c, &out) && far(*c, avoid)) && (!pair || 2.0 * z.im.abs() >= gap) {
            out.extend(cand);
        }
    }
    out
}

pub struct RandomSiso {
    pub tf: TransferFunction<f64>,
    /// Canonical realization under a random similarity transform.
    pub ss: StateSpace<f64>,
    pub zeros: Vec<Complex64>,
}

/// Minimal SISO system of the given order with `nz` well-separated zeros.
pub fn random_siso<R: Rng>(rng: &mut R, order: usize, nz: usize) -> RandomSiso {
    let poles = random_roots(rng, order, 0.95, 0.05, &[]);
    let zeros = random_roots(rng, nz, 2.0, 0.05, &poles);
    let gain = rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let tf = TransferFunction::from_zeros_poles(&zeros, &poles, gain).unwrap();
    let t = DMatrix::from_fn(order, order, |i, j| {
        let off: f64 = rng.random_range(-0.3..0.3);
        if i == j {
            1.0 + off
        } else {
            off
        }
    });
    let ss = tf.to_state_space().transformed(&t).unwrap();
    RandomSiso { tf, ss, zeros }
}

/// Random stable masked loop, or `None` when the controller design fails.
pub fn random_loop<R: Rng>(rng: &mut R) -> Option<(LoopSystems<f64>, TransferFunction<f64>, TransferFunction<f64>)> {
    let order = rng.random_range(1..=3);
    let nz = rng.random_range(0..order);
    let poles = random_roots(rng, order, 0.9, 0.05, &[]);
    let zeros = random_roots(rng, nz, 2.0, 0.1, &poles);
    let gain = rng.random_range(0.5..2.0);
    let plant = TransferFunction::from_zeros_poles(&zeros, &poles, gain).ok()?;
    let cipher_zeros = random_roots(rng, nz, 2.0, 0.1, &poles);
    let cipher = pole_matched_cipher(&plant, &cipher_zeros, rng.random_range(0.5..2.0)).ok()?;
    let noise = TransferFunction::new(vec![1.0, rng.random_range(-0.5..0.5)], vec![1.0, rng.random_range(-0.8..0.8)]).ok()?;
    let controller = stabilizing_output_feedback(&plant, rng.random_range(0.3..0.8)).ok()?;
    let systems = LoopSystems::new(plant.to_state_space(), noise.to_state_space(), cipher.to_state_space(), controller).ok()?;
    Some((systems, plant, cipher))
}

/// Pairs every element of `a` with a distinct nearest element of `b`;
/// returns the largest pairing distance, or infinity on a size mismatch.
pub fn set_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}
