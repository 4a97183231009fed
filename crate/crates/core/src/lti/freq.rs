use nalgebra::DMatrix;
use num_complex::Complex;

use super::{StateSpace, TransferFunction};
use crate::error::{Error, Result};
use crate::scalar::{cabs, lit, real, unit_circle, Real};

/// Strictly increasing angular frequencies in `[0, pi]` (radians/sample).
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid<T> {
    omega: Vec<T>,
}

impl<T: Real> FrequencyGrid<T> {
    pub fn new(omega: Vec<T>) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::InvalidGrid("empty grid".into()));
        }
        let pi = T::pi();
        if omega.iter().any(|w| !w.is_finite() || *w < T::zero() || *w > pi) {
            return Err(Error::InvalidGrid("frequencies must lie in [0, pi]".into()));
        }
        if omega.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
        }
        Ok(Self { omega })
    }

    /// `points` uniformly spaced frequencies including both endpoints.
    pub fn uniform(points: usize) -> Result<Self> {
        match points {
            0 => Err(Error::InvalidGrid("empty grid".into())),
            1 => Self::new(vec![T::zero()]),
            _ => {
                let step = T::pi() / lit::<T>((points - 1) as f64);
                let mut omega: Vec<T> = (0..points).map(|k| step * lit::<T>(k as f64)).collect();
                omega[points - 1] = T::pi();
                Self::new(omega)
            }
        }
    }

    pub fn omega(&self) -> &[T] {
        &self.omega
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// Trapezoidal rule for `integral_0^pi f(omega) d omega`.
    pub fn trapezoid(&self, values: &[T]) -> T {
        self.omega
            .windows(2)
            .zip(values.windows(2))
            .fold(T::zero(), |acc, (w, v)| acc + (w[1] - w[0]) * (v[0] + v[1]) * lit(0.5))
    }
}

/// Complex response sampled on a [`FrequencyGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse<T> {
    pub grid: FrequencyGrid<T>,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> FrequencyResponse<T> {
    /// Largest pointwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |m, (a, b)| m.max(cabs(*a - *b)))
    }
}

/// A SISO system whose rational frequency function can be sampled.
pub trait FrequencyDomain<T: Real> {
    fn poles(&self) -> Vec<Complex<T>>;
    /// Unchecked evaluation at `z`.
    fn eval_at(&self, z: Complex<T>) -> Result<Complex<T>>;
}

impl<T: Real> FrequencyDomain<T> for TransferFunction<T> {
    fn poles(&self) -> Vec<Complex<T>> {
        TransferFunction::poles(self)
    }

    fn eval_at(&self, z: Complex<T>) -> Result<Complex<T>> {
        Ok(self.eval(z))
    }
}

impl<T: Real> FrequencyDomain<T> for StateSpace<T> {
    fn poles(&self) -> Vec<Complex<T>> {
        self.eigenvalues()
    }

    fn eval_at(&self, z: Complex<T>) -> Result<Complex<T>> {
        if !self.is_siso() {
            return Err(Error::SisoOnly);
        }
        let n = self.n();
        let feedthrough = real(self.d()[(0, 0)]);
        if n == 0 {
            return Ok(feedthrough);
        }
        let resolvent = DMatrix::from_fn(n, n, |i, j| {
            let a = real(-self.a()[(i, j)]);
            if i == j {
                a + z
            } else {
                a
            }
        });
        let b = DMatrix::from_fn(n, 1, |i, _| real(self.b()[(i, 0)]));
        let x = resolvent.lu().solve(&b).ok_or(Error::EvaluationAtPole)?;
        let cx = (0..n).fold(real(T::zero()), |acc, i| acc + real(self.c()[(0, i)]) * x[(i, 0)]);
        Ok(cx + feedthrough)
    }
}

/// Samples `sys(e^{i omega})` on the grid.
pub fn frequency_response<T: Real, S: FrequencyDomain<T> + ?Sized>(
    sys: &S,
    grid: &FrequencyGrid<T>,
) -> Result<FrequencyResponse<T>> {
    let poles = sys.poles();
    let tol = lit::<T>(1e-12);
    let values = grid
        .omega()
        .iter()
        .map(|w| {
            let z = unit_circle(*w);
            if poles.iter().any(|p| cabs(*p - z) < tol) {
                return Err(Error::EvaluationAtPole);
            }
            sys.eval_at(z)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FrequencyResponse { grid: grid.clone(), values })
}
