//! Invariant zeros and their direction pairs.
//!
//! For a square system with a well-defined vector relative degree the finite
//! generalized eigenvalues of the Rosenbrock pencil
//! `([A, B; C, D], blockdiag(I, 0))` coincide with the eigenvalues of the
//! zero-dynamics matrix: `A + B K` restricted to the output-nulling subspace
//! `{x : c_i A^j x = 0, j < r_i}` with `K = -L^{-1} M`, where `L` stacks the
//! first non-vanishing Markov rows and `M` the matching `c_i A^{r_i}` rows.
//! Working on that restriction removes the infinite eigenvalues exactly
//! instead of thresholding them. Directions `(x0, g)` are recovered from the
//! null space of the complex Rosenbrock matrix at each zero.

use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex;

use super::StateSpace;
use crate::error::{Error, Result};
use crate::poly;
use crate::scalar::{cabs, lit, real, Real};

/// Modulus classification of an invariant zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroStability {
    /// `|beta| <= 1`
    Stable,
    /// `|beta| > 1`
    Unstable,
}

/// One invariant zero with its normalized direction pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroData<T: Real> {
    pub value: Complex<T>,
    pub state_direction: DVector<Complex<T>>,
    pub input_direction: DVector<Complex<T>>,
    pub stability: ZeroStability,
}

impl<T: Real> ZeroData<T> {
    pub fn modulus(&self) -> T {
        cabs(self.value)
    }

    /// `Im(beta)` negligible relative to `|beta|`.
    pub fn is_real(&self) -> bool {
        self.value.im.abs() <= lit::<T>(1e-10) * (T::one() + cabs(self.value))
    }

    /// `||[beta I - A, -B; C, D] [x0; g]||_2`
    pub fn pencil_residual(&self, ss: &StateSpace<T>) -> T {
        let p = rosenbrock(ss, self.value);
        let mut v = DVector::zeros(ss.n() + ss.m());
        v.rows_mut(0, ss.n()).copy_from(&self.state_direction);
        v.rows_mut(ss.n(), ss.m()).copy_from(&self.input_direction);
        (p * v).norm()
    }
}

/// Rosenbrock system matrix `[beta I - A, -B; C, D]` evaluated at `beta`.
pub fn rosenbrock<T: Real>(ss: &StateSpace<T>, beta: Complex<T>) -> DMatrix<Complex<T>> {
    let (n, m, p) = (ss.n(), ss.m(), ss.p());
    let mut out = DMatrix::from_element(n + p, n + m, real(T::zero()));
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = real(-ss.a()[(i, j)]);
        }
        out[(i, i)] += beta;
        for j in 0..m {
            out[(i, n + j)] = real(-ss.b()[(i, j)]);
        }
    }
    for i in 0..p {
        for j in 0..n {
            out[(n + i, j)] = real(ss.c()[(i, j)]);
        }
        for j in 0..m {
            out[(n + i, n + j)] = real(ss.d()[(i, j)]);
        }
    }
    out
}

/// Invariant zeros of a minimal square system, sorted by real then imaginary part.
pub fn invariant_zeros<T: Real>(ss: &StateSpace<T>) -> Result<Vec<ZeroData<T>>> {
    if ss.p() != ss.m() {
        return Err(Error::NonSquare { outputs: ss.p(), inputs: ss.m() });
    }
    if !ss.is_minimal() {
        return Err(Error::NonMinimal);
    }
    let mut values = zero_values(ss)?;
    values.retain(|z| z.re.is_finite() && z.im.is_finite() && cabs(*z) <= lit(1e12));
    poly::sort_complex(&mut values);
    Ok(values.into_iter().map(|beta| direction(ss, beta)).collect())
}

fn zero_values<T: Real>(ss: &StateSpace<T>) -> Result<Vec<Complex<T>>> {
    let (n, m) = (ss.n(), ss.m());
    let (a, b, c, d) = (ss.a(), ss.b(), ss.c(), ss.d());
    let a_norm = a.norm().max(T::one());
    let b_norm = b.norm();

    let mut decoupling = DMatrix::zeros(m, m);
    let mut next_rows = DMatrix::zeros(m, n);
    let mut nulling: Vec<RowDVector<T>> = Vec::new();
    for i in 0..m {
        let ci = c.row(i).clone_owned();
        let di = d.row(i).clone_owned();
        if di.norm() > lit::<T>(1e-12) * (T::one() + d.norm()) {
            decoupling.row_mut(i).copy_from(&di);
            next_rows.row_mut(i).copy_from(&ci);
            continue;
        }
        let mut row = ci.clone();
        let mut scale = ci.norm() * b_norm;
        let mut found = false;
        for _ in 0..n {
            let markov = &row * b;
            if markov.norm() > lit::<T>(1e-9) * scale {
                decoupling.row_mut(i).copy_from(&markov);
                next_rows.row_mut(i).copy_from(&(&row * a));
                found = true;
                break;
            }
            nulling.push(row.clone());
            row = &row * a;
            scale *= a_norm;
        }
        if !found {
            return Err(Error::UnsupportedZeroStructure(format!(
                "output {i} has an identically zero transfer row"
            )));
        }
        // c_i A^{r_i - 1} also belongs to the nulling set
        nulling.push(row);
    }

    let lu = decoupling.clone().lu();
    if !lu.is_invertible() || numerical_condition(&decoupling) > lit(1e12) {
        return Err(Error::UnsupportedZeroStructure("singular decoupling matrix".into()));
    }
    let gain = -lu.solve(&next_rows).expect("invertible decoupling matrix");
    let closed = a + b * &gain;

    let basis = kernel_basis(&nulling, n)?;
    if basis.ncols() == 0 {
        return Ok(Vec::new());
    }
    let reduced = basis.transpose() * closed * &basis;
    Ok(reduced.complex_eigenvalues().iter().copied().collect())
}

fn numerical_condition<T: Real>(m: &DMatrix<T>) -> T {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().fold(T::zero(), |a, s| a.max(*s));
    let min = sv.iter().fold(max, |a, s| a.min(*s));
    if min == T::zero() {
        T::max_value().unwrap_or(max)
    } else {
        max / min
    }
}

/// Orthonormal basis (columns) of `{x : row x = 0 for every row}`.
fn kernel_basis<T: Real>(rows: &[RowDVector<T>], n: usize) -> Result<DMatrix<T>> {
    if rows.is_empty() {
        return Ok(DMatrix::identity(n, n));
    }
    if rows.len() >= n {
        return Ok(DMatrix::zeros(n, 0));
    }
    let mut stacked = DMatrix::zeros(n, n);
    for (i, r) in rows.iter().enumerate() {
        stacked.row_mut(i).copy_from(r);
    }
    let svd = stacked.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sv = &svd.singular_values;
    let max = sv.iter().fold(T::zero(), |a, s| a.max(*s));
    let tol = lit::<T>(1e-9) * max;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|i, j| sv[*j].partial_cmp(&sv[*i]).unwrap_or(std::cmp::Ordering::Equal));
    let rank = order.iter().filter(|i| sv[**i] > tol).count();
    if rank != rows.len() {
        return Err(Error::UnsupportedZeroStructure("dependent output-nulling constraints".into()));
    }
    let kernel: Vec<usize> = order[rank..].to_vec();
    Ok(DMatrix::from_fn(n, kernel.len(), |i, j| v_t[(kernel[j], i)]))
}

fn direction<T: Real>(ss: &StateSpace<T>, beta: Complex<T>) -> ZeroData<T> {
    let (n, m) = (ss.n(), ss.m());
    let p = rosenbrock(ss, beta);
    let dim = n + m;
    let svd = p.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let idx = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, None::<T>), |(bi, bv), (i, s)| match bv {
            Some(v) if v <= *s => (bi, bv),
            _ => (i, Some(*s)),
        })
        .0;
    let mut v: DVector<Complex<T>> = DVector::from_fn(dim, |i, _| v_t[(idx, i)].conj());
    let norm = v.norm();
    v /= real(norm);

    let threshold = lit::<T>(1e-12);
    let anchor = (n..dim)
        .chain(0..n)
        .find(|i| cabs(v[*i]) > threshold)
        .unwrap_or(0);
    let phase = v[anchor] / real(cabs(v[anchor]));
    v /= phase;
    v[anchor] = real(v[anchor].re);

    let stability = if cabs(beta) <= T::one() { ZeroStability::Stable } else { ZeroStability::Unstable };
    ZeroData {
        value: beta,
        state_direction: v.rows(0, n).clone_owned(),
        input_direction: v.rows(n, m).clone_owned(),
        stability,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::TransferFunction;

    fn scalar(v: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, v)
    }

    #[test]
    fn example_plant_zero() {
        let ss = TransferFunction::<f64>::new(vec![1.0, -1.1], vec![1.0, -0.7, 0.1]).unwrap().to_state_space();
        let z = invariant_zeros(&ss).unwrap();
        assert_eq!(z.len(), 1);
        assert!((z[0].value.re - 1.1).abs() < 1e-12 && z[0].value.im == 0.0);
        assert_eq!(z[0].stability, ZeroStability::Unstable);
        assert!(z[0].pencil_residual(&ss) < 1e-12);
    }

    #[test]
    fn feedthrough_zero() {
        let ss = StateSpace::new(scalar(0.5), scalar(1.0), scalar(1.0), scalar(1.0)).unwrap();
        let z = invariant_zeros(&ss).unwrap();
        assert_eq!(z.len(), 1);
        assert!((z[0].value.re + 0.5).abs() < 1e-12);
        assert_eq!(z[0].stability, ZeroStability::Stable);
    }

    #[test]
    fn direction_normalization() {
        let ss = TransferFunction::<f64>::new(vec![1.0, -1.3], vec![1.0, -0.7, 0.1]).unwrap().to_state_space();
        let z = &invariant_zeros(&ss).unwrap()[0];
        let norm2 = z.state_direction.norm_squared() + z.input_direction.norm_squared();
        assert!((norm2 - 1.0).abs() < 1e-12);
        assert!(z.input_direction[0].re > 0.0 && z.input_direction[0].im == 0.0);
    }

    #[test]
    fn errors() {
        let mimo = StateSpace::new(scalar(0.5), DMatrix::from_element(1, 2, 1.0), scalar(1.0), DMatrix::zeros(1, 2)).unwrap();
        assert!(matches!(invariant_zeros(&mimo), Err(Error::NonSquare { .. })));
        let pz = TransferFunction::<f64>::new(vec![1.0, -0.5], vec![1.0, -0.7, 0.1]).unwrap().to_state_space();
        let err = invariant_zeros(&pz).unwrap_err();
        assert_eq!(err.to_string(), "zeros ill-defined on non-minimal realization");
    }

    #[test]
    fn no_finite_zeros() {
        let ss = TransferFunction::<f64>::new(vec![1.0], vec![1.0, -0.7, 0.1]).unwrap().to_state_space();
        assert!(invariant_zeros(&ss).unwrap().is_empty());
    }

    #[test]
    fn complex_pair() {
        let tf = TransferFunction::<f64>::new(vec![1.0, -0.4, 1.25], vec![1.0, -0.9, 0.2, 0.0]).unwrap();
        let ss = tf.to_state_space();
        let z = invariant_zeros(&ss).unwrap();
        assert_eq!(z.len(), 2);
        assert!((z[0].value - Complex::new(0.2, -1.1)).norm() < 1e-10);
        assert!((z[1].value - Complex::new(0.2, 1.1)).norm() < 1e-10);
        for zd in &z {
            assert!(zd.pencil_residual(&ss) < 1e-10);
        }
    }

    #[test]
    fn mimo_square() {
        // two decoupled SISO channels with zeros 1.1 and -0.3
        let g1 = TransferFunction::<f64>::new(vec![1.0, -1.1], vec![1.0, -0.7, 0.1]).unwrap().to_state_space();
        let g2 = TransferFunction::<f64>::new(vec![2.0, 0.6], vec![1.0, -0.4]).unwrap().to_state_space();
        let mut a = DMatrix::zeros(3, 3);
        a.view_mut((0, 0), (2, 2)).copy_from(g1.a());
        a.view_mut((2, 2), (1, 1)).copy_from(g2.a());
        let mut b = DMatrix::zeros(3, 2);
        b.view_mut((0, 0), (2, 1)).copy_from(g1.b());
        b.view_mut((2, 1), (1, 1)).copy_from(g2.b());
        let mut c = DMatrix::zeros(2, 3);
        c.view_mut((0, 0), (1, 2)).copy_from(g1.c());
        c.view_mut((1, 2), (1, 1)).copy_from(g2.c());
        let mut d = DMatrix::zeros(2, 2);
        d[(1, 1)] = g2.d()[(0, 0)];
        let ss = StateSpace::new(a, b, c, d).unwrap();
        let z = invariant_zeros(&ss).unwrap();
        let vals: Vec<f64> = z.iter().map(|z| z.value.re).collect();
        assert_eq!(vals.len(), 2);
        assert!((vals[0] + 0.3).abs() < 1e-10 && (vals[1] - 1.1).abs() < 1e-10);
        for zd in &z {
            assert!(zd.pencil_residual(&ss) < 1e-10);
        }
    }
}
