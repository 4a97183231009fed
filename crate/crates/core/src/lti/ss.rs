use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use super::TransferFunction;
use crate::error::{Error, Result};
use crate::poly;
use crate::scalar::{cabs, lit, Real};

/// Discrete-time LTI system `x+ = A x + B u`, `y = C x + D u`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace<T: Real> {
    a: DMatrix<T>,
    b: DMatrix<T>,
    c: DMatrix<T>,
    d: DMatrix<T>,
}

/// Output and state trajectories of [`StateSpace::simulate`].
///
/// `states` has one more entry than `outputs`: it ends with the state
/// after the last input.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation<T: Real> {
    pub outputs: Vec<DVector<T>>,
    pub states: Vec<DVector<T>>,
}

impl<T: Real> StateSpace<T> {
    pub fn new(a: DMatrix<T>, b: DMatrix<T>, c: DMatrix<T>, d: DMatrix<T>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch(format!("A is {}x{}", n, a.ncols())));
        }
        if b.nrows() != n {
            return Err(Error::DimensionMismatch(format!("B has {} rows, A has {n}", b.nrows())));
        }
        if c.ncols() != n {
            return Err(Error::DimensionMismatch(format!("C has {} cols, A has {n}", c.ncols())));
        }
        if d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "D is {}x{}, expected {}x{}",
                d.nrows(),
                d.ncols(),
                c.nrows(),
                b.ncols()
            )));
        }
        Ok(Self { a, b, c, d })
    }

    /// Static gain with no state.
    pub fn gain(d: DMatrix<T>) -> Self {
        let (p, m) = d.shape();
        Self { a: DMatrix::zeros(0, 0), b: DMatrix::zeros(0, m), c: DMatrix::zeros(p, 0), d }
    }

    pub fn a(&self) -> &DMatrix<T> {
        &self.a
    }
    pub fn b(&self) -> &DMatrix<T> {
        &self.b
    }
    pub fn c(&self) -> &DMatrix<T> {
        &self.c
    }
    pub fn d(&self) -> &DMatrix<T> {
        &self.d
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }
    /// Input dimension.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }
    /// Output dimension.
    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    pub fn is_siso(&self) -> bool {
        self.m() == 1 && self.p() == 1
    }

    /// Similarity transform `x = T x'`.
    pub fn transformed(&self, t: &DMatrix<T>) -> Result<Self> {
        let inv = t
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Singular("similarity transform".into()))?;
        Self::new(&inv * &self.a * t, &inv * &self.b, &self.c * t, self.d.clone())
    }

    /// Keeps only the listed input columns.
    pub fn select_inputs(&self, cols: &[usize]) -> Self {
        let b = self.b.select_columns(cols);
        let d = self.d.select_columns(cols);
        Self { a: self.a.clone(), b, c: self.c.clone(), d }
    }

    pub fn output(&self, x: &DVector<T>, u: &DVector<T>) -> DVector<T> {
        &self.c * x + &self.d * u
    }

    pub fn next_state(&self, x: &DVector<T>, u: &DVector<T>) -> DVector<T> {
        &self.a * x + &self.b * u
    }

    pub fn simulate(&self, inputs: &[DVector<T>], x_init: &DVector<T>) -> Result<Simulation<T>> {
        if inputs.is_empty() {
            return Err(Error::InvalidArgument("empty input sequence".into()));
        }
        if x_init.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "initial state has length {}, system has {} states",
                x_init.len(),
                self.n()
            )));
        }
        let mut x = x_init.clone();
        let mut outputs = Vec::with_capacity(inputs.len());
        let mut states = Vec::with_capacity(inputs.len() + 1);
        for (k, u) in inputs.iter().enumerate() {
            if u.len() != self.m() {
                return Err(Error::DimensionMismatch(format!(
                    "input {k} has length {}, system has {} inputs",
                    u.len(),
                    self.m()
                )));
            }
            outputs.push(self.output(&x, u));
            let next = self.next_state(&x, u);
            states.push(std::mem::replace(&mut x, next));
        }
        states.push(x);
        Ok(Simulation { outputs, states })
    }

    /// Scalar-signal convenience wrapper around [`simulate`](Self::simulate).
    pub fn simulate_siso(&self, input: &[T], x_init: &DVector<T>) -> Result<(Vec<T>, Vec<DVector<T>>)> {
        if !self.is_siso() {
            return Err(Error::SisoOnly);
        }
        let inputs: Vec<DVector<T>> = input.iter().map(|u| DVector::from_element(1, *u)).collect();
        let sim = self.simulate(&inputs, x_init)?;
        Ok((sim.outputs.iter().map(|y| y[0]).collect(), sim.states))
    }

    /// Markov parameters `D, CB, CAB, ...` (first `count` terms).
    pub fn markov_parameters(&self, count: usize) -> Vec<DMatrix<T>> {
        let mut out = Vec::with_capacity(count);
        if count == 0 {
            return out;
        }
        out.push(self.d.clone());
        let mut ak_b = self.b.clone();
        for _ in 1..count {
            out.push(&self.c * &ak_b);
            ak_b = &self.a * ak_b;
        }
        out
    }

    pub fn eigenvalues(&self) -> Vec<Complex<T>> {
        if self.n() == 0 {
            return Vec::new();
        }
        let mut ev: Vec<Complex<T>> = self.a.complex_eigenvalues().iter().copied().collect();
        poly::sort_complex(&mut ev);
        ev
    }

    /// Every eigenvalue of `A` has modulus below `1 - 1e-10`.
    pub fn is_stable(&self) -> bool {
        let margin = T::one() - lit::<T>(1e-10);
        self.eigenvalues().iter().all(|e| cabs(*e) < margin)
    }

    /// `[B, AB, ..., A^{n-1}B]`
    pub fn controllability_matrix(&self) -> DMatrix<T> {
        let (n, m) = (self.n(), self.m());
        let mut out = DMatrix::zeros(n, n * m);
        let mut block = self.b.clone();
        for k in 0..n {
            out.view_mut((0, k * m), (n, m)).copy_from(&block);
            block = &self.a * block;
        }
        out
    }

    /// `[C; CA; ...; CA^{n-1}]`
    pub fn observability_matrix(&self) -> DMatrix<T> {
        let (n, p) = (self.n(), self.p());
        let mut out = DMatrix::zeros(n * p, n);
        let mut block = self.c.clone();
        for k in 0..n {
            out.view_mut((k * p, 0), (p, n)).copy_from(&block);
            block *= &self.a;
        }
        out
    }

    pub fn is_controllable(&self) -> bool {
        self.n() == 0 || numerical_rank(&self.controllability_matrix()) == self.n()
    }

    pub fn is_observable(&self) -> bool {
        self.n() == 0 || numerical_rank(&self.observability_matrix()) == self.n()
    }

    pub fn is_minimal(&self) -> bool {
        self.is_controllable() && self.is_observable()
    }

    /// `C (zI - A)^{-1} B + D` as a coefficient ratio (SISO only).
    ///
    /// The denominator is the characteristic polynomial of `A`; the numerator
    /// follows from the Markov parameters, `num_j = sum_i den_i h_{j-i}`.
    pub fn to_transfer_function(&self) -> Result<TransferFunction<T>> {
        if !self.is_siso() {
            return Err(Error::SisoOnly);
        }
        let n = self.n();
        let den = poly::from_roots(&self.eigenvalues());
        let h: Vec<T> = self.markov_parameters(n + 1).iter().map(|m| m[(0, 0)]).collect();
        let num: Vec<T> = (0..=n)
            .map(|j| (0..=j).fold(T::zero(), |acc, i| acc + den[i] * h[j - i]))
            .collect();
        TransferFunction::new(poly::trim_relative(&num, lit(1e-10)), den)
    }
}

/// Rank with tolerance `1e-8 * sigma_max`.
pub fn numerical_rank<T: Real>(m: &DMatrix<T>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().fold(T::zero(), |a, s| a.max(*s));
    if max == T::zero() {
        return 0;
    }
    let tol = lit::<T>(1e-8) * max;
    sv.iter().filter(|s| **s > tol).count()
}
