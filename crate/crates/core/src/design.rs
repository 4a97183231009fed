//! Controller synthesis and cipher-plant construction helpers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::lti::{numerical_rank, StateSpace, TransferFunction};
use crate::poly;
use crate::scalar::{lit, Real};

/// Output-feedback controller for a SISO plant by polynomial pole placement.
///
/// Solves `A R + B S = A_cl` with `R` monic of degree `n` and `deg S < n`,
/// where `A_cl` has its `2n` roots on the circle of radius `radius`. The
/// control law is `R u = -S y + T r` with constant `T` giving unit DC gain
/// from `r` to `y` (when the plant has no zero at `z = 1`).
///
/// The returned system maps `[y_k; r_k]` to `u_{k+1}`, matching the loop
/// engine's one-tick controller latency: its transfer row is `z [-S, T] / R`.
pub fn stabilizing_output_feedback<T: Real>(
    plant: &TransferFunction<T>,
    radius: T,
) -> Result<StateSpace<T>> {
    if !(radius > T::zero() && radius < T::one()) {
        return Err(Error::Design("pole radius must lie in (0, 1)".into()));
    }
    let n = plant.order();
    if n == 0 {
        return Err(Error::Design("static plant needs no dynamic controller".into()));
    }
    let a = plant.den().to_vec();
    let b = poly::pad_to(plant.num(), n + 1);
    let target = poly::from_roots(&target_poles(2 * n, radius));

    // Unknowns: r_1..r_n, s_0..s_{n-1}. Coefficient of z^{2n-1-i} for row i.
    let dim = 2 * n;
    let mut sylvester = DMatrix::zeros(dim, dim);
    let mut rhs = DVector::zeros(dim);
    // A * z^n contributes a_j at power 2n - j.
    let a_shift: Vec<T> = {
        let mut v = a.clone();
        v.extend(std::iter::repeat_n(T::zero(), n));
        v
    };
    for i in 0..dim {
        rhs[i] = target[i + 1] - a_shift[i + 1];
    }
    // r_k multiplies A z^{n-k}: coefficient a_j lands at power 2n - k - j.
    for k in 1..=n {
        for (j, aj) in a.iter().enumerate() {
            let power = 2 * n - k - j;
            let row = 2 * n - 1 - power;
            sylvester[(row, k - 1)] += *aj;
        }
    }
    // s_k multiplies B z^{n-1-k}: b_j lands at power 2n - 1 - k - j.
    for k in 0..n {
        for (j, bj) in b.iter().enumerate() {
            let power = 2 * n - 1 - k - j;
            let row = 2 * n - 1 - power;
            sylvester[(row, n + k)] += *bj;
        }
    }
    if numerical_rank(&sylvester) < dim {
        return Err(Error::Design("plant numerator and denominator share a root".into()));
    }
    let sol = sylvester
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Design("plant numerator and denominator share a root".into()))?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::Design("non-finite controller coefficients".into()));
    }
    let mut r = vec![T::one()];
    r.extend(sol.rows(0, n).iter().copied());
    let s: Vec<T> = sol.rows(n, n).iter().copied().collect();

    let plant_dc = poly::eval_real(&b, T::one());
    let t0 = if plant_dc.abs() > lit(1e-12) {
        poly::eval_real(&target, T::one()) / plant_dc
    } else {
        T::one()
    };

    // z * (-S) and z * T as degree-n numerators over R.
    let mut num_y: Vec<T> = s.iter().map(|c| -*c).collect();
    num_y.push(T::zero());
    let num_r = vec![t0, T::zero()];
    Ok(common_denominator_realization(&[num_y, num_r], &r))
}

/// Observer-canonical realization of the row `[n_1/den, ..., n_k/den]`.
pub fn common_denominator_realization<T: Real>(nums: &[Vec<T>], den: &[T]) -> StateSpace<T> {
    let den = poly::scale(den, T::one() / den[0]);
    let n = den.len() - 1;
    let m = nums.len();
    let a = DMatrix::from_fn(n, n, |i, j| {
        if j == 0 {
            -den[i + 1]
        } else if j == i + 1 {
            T::one()
        } else {
            T::zero()
        }
    });
    let mut b = DMatrix::zeros(n, m);
    let mut d = DMatrix::zeros(1, m);
    for (col, num) in nums.iter().enumerate() {
        let padded = poly::pad_to(&poly::trim(num), n + 1);
        let lead = padded[0];
        d[(0, col)] = lead;
        for i in 0..n {
            b[(i, col)] = padded[i + 1] - lead * den[i + 1];
        }
    }
    let c = DMatrix::from_fn(1, n, |_, j| if j == 0 { T::one() } else { T::zero() });
    StateSpace::new(a, b, c, d).expect("observer form is dimensionally consistent")
}

fn target_poles<T: Real>(count: usize, radius: T) -> Vec<Complex<T>> {
    // conjugate pairs at angles (2j+1) pi / (4 count), all inside |arg| < pi/4
    let mut out = Vec::with_capacity(count);
    let pairs = count / 2;
    for j in 0..pairs {
        let angle = T::pi() * lit::<T>((2 * j + 1) as f64) / lit::<T>((4 * count) as f64);
        let z = Complex::new(radius * angle.cos(), radius * angle.sin());
        out.push(z);
        out.push(z.conj());
    }
    if count % 2 == 1 {
        out.push(Complex::new(radius, T::zero()));
    }
    out
}

/// Cipher plant sharing the plant's poles, with every zero moved by `shift`.
pub fn shifted_zero_cipher<T: Real>(plant: &TransferFunction<T>, shift: T) -> Result<TransferFunction<T>> {
    plant.with_shifted_zeros(shift)
}

/// Cipher plant with the plant's poles and the given zeros and gain.
pub fn pole_matched_cipher<T: Real>(
    plant: &TransferFunction<T>,
    zeros: &[Complex<T>],
    gain: T,
) -> Result<TransferFunction<T>> {
    let num = poly::scale(&poly::from_roots(zeros), gain);
    TransferFunction::new(num, plant.den().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::masking::closed_loop_matrix;
    use crate::scalar::cabs;

    fn plant() -> TransferFunction<f64> {
        TransferFunction::new(vec![1.0, -1.1], vec![1.0, -0.7, 0.1]).unwrap()
    }

    #[test]
    fn places_closed_loop_poles_on_radius() {
        let g = plant();
        let c = stabilizing_output_feedback(&g, 0.6).unwrap();
        assert_eq!((c.m(), c.p()), (2, 1));
        let cl = closed_loop_matrix(&g.to_state_space(), &c);
        let mut radii: Vec<f64> = cl.complex_eigenvalues().iter().map(|e| cabs(*e)).collect();
        radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // one latency state sits at the origin, the rest at radius 0.6
        let nonzero: Vec<f64> = radii.into_iter().filter(|r| *r > 1e-6).collect();
        assert_eq!(nonzero.len(), 4);
        for r in nonzero {
            assert!((r - 0.6).abs() < 1e-6, "radius {r}");
        }
    }

    #[test]
    fn unit_dc_tracking() {
        let g = plant();
        let c = stabilizing_output_feedback(&g, 0.6).unwrap();
        // steady state of the nominal loop under r = 1
        let gs = g.to_state_space();
        let mut xg = DVector::zeros(2);
        let mut xc = DVector::zeros(c.n());
        let mut u = DVector::zeros(1);
        let mut y = 0.0;
        for _ in 0..400 {
            let yv = gs.output(&xg, &u);
            y = yv[0];
            let input = DVector::from_vec(vec![y, 1.0]);
            let next_u = c.output(&xc, &input);
            xc = c.next_state(&xc, &input);
            xg = gs.next_state(&xg, &u);
            u = next_u;
        }
        assert!((y - 1.0).abs() < 1e-9, "steady-state output {y}");
    }

    #[test]
    fn common_factor_fails() {
        let g = TransferFunction::new(vec![1.0, -0.5], vec![1.0, -0.7, 0.1]).unwrap();
        assert!(stabilizing_output_feedback(&g, 0.6).is_err());
    }

    #[test]
    fn observer_realization_matches_rows() {
        let den = vec![1.0, -0.3, 0.02];
        let nums = vec![vec![0.5, 1.0, -0.2], vec![2.0, 0.0]];
        let ss = common_denominator_realization(&nums, &den);
        for (col, num) in nums.iter().enumerate() {
            let tf = ss.select_inputs(&[col]).to_transfer_function().unwrap();
            let want = TransferFunction::new(num.clone(), den.clone()).unwrap();
            for w in [0.0, 0.7, 2.1] {
                let z = crate::scalar::unit_circle(w);
                assert!((tf.eval(z) - want.eval(z)).norm() < 1e-12);
            }
        }
    }
}
