use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use super::StateSpace;
use crate::error::{Error, Result};
use crate::poly;
use crate::scalar::{lit, Real};

/// SISO discrete-time transfer function `num(z) / den(z)`.
///
/// Coefficients are stored in descending powers of `z` with a monic
/// denominator; the numerator degree never exceeds the denominator degree.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction<T> {
    num: Vec<T>,
    den: Vec<T>,
}

impl<T: Real> TransferFunction<T> {
    pub fn new(num: Vec<T>, den: Vec<T>) -> Result<Self> {
        if num.iter().chain(den.iter()).any(|c| !c.is_finite()) {
            return Err(Error::InvalidTransferFunction("non-finite coefficient".into()));
        }
        let den = poly::trim(&den);
        if den.len() == 1 && den[0] == T::zero() {
            return Err(Error::InvalidTransferFunction("zero denominator".into()));
        }
        let num = if num.is_empty() { vec![T::zero()] } else { poly::trim(&num) };
        if num.len() > den.len() && !poly::is_zero(&num) {
            return Err(Error::ImproperTransferFunction);
        }
        let lead = den[0];
        Ok(Self {
            num: poly::scale(&num, T::one() / lead),
            den: poly::scale(&den, T::one() / lead),
        })
    }

    /// `gain * prod(z - zeros) / prod(z - poles)`; complex entries must come
    /// in conjugate pairs.
    pub fn from_zeros_poles(zeros: &[Complex<T>], poles: &[Complex<T>], gain: T) -> Result<Self> {
        let num = poly::scale(&poly::from_roots(zeros), gain);
        Self::new(num, poly::from_roots(poles))
    }

    pub fn unity() -> Self {
        Self { num: vec![T::one()], den: vec![T::one()] }
    }

    pub fn num(&self) -> &[T] {
        &self.num
    }

    pub fn den(&self) -> &[T] {
        &self.den
    }

    /// Denominator degree.
    pub fn order(&self) -> usize {
        self.den.len() - 1
    }

    pub fn relative_degree(&self) -> usize {
        self.order() - poly::degree(&self.num)
    }

    pub fn is_strictly_proper(&self) -> bool {
        poly::is_zero(&self.num) || self.relative_degree() > 0
    }

    pub fn zeros(&self) -> Vec<Complex<T>> {
        if poly::is_zero(&self.num) {
            return Vec::new();
        }
        poly::roots(&self.num)
    }

    pub fn poles(&self) -> Vec<Complex<T>> {
        poly::roots(&self.den)
    }

    /// Evaluates the rational function at `z` (no pole check).
    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        poly::eval(&self.num, z) / poly::eval(&self.den, z)
    }

    pub fn dc_gain(&self) -> T {
        poly::eval_real(&self.num, T::one()) / poly::eval_real(&self.den, T::one())
    }

    /// Controllable canonical realization.
    pub fn to_state_space(&self) -> StateSpace<T> {
        let n = self.order();
        let num = poly::pad_to(&self.num, n + 1);
        let feedthrough = num[0];
        let a = DMatrix::from_fn(n, n, |i, j| {
            if i == 0 {
                -self.den[j + 1]
            } else if i == j + 1 {
                T::one()
            } else {
                T::zero()
            }
        });
        let b = DMatrix::from_fn(n, 1, |i, _| if i == 0 { T::one() } else { T::zero() });
        let c = DMatrix::from_fn(1, n, |_, j| num[j + 1] - feedthrough * self.den[j + 1]);
        let d = DMatrix::from_element(1, 1, feedthrough);
        StateSpace::new(a, b, c, d).expect("canonical realization is dimensionally consistent")
    }

    /// `self - other` over the common denominator.
    pub fn sub(&self, other: &Self) -> Self {
        let num = poly::sub(&poly::mul(&self.num, &other.den), &poly::mul(&other.num, &self.den));
        let den = poly::mul(&self.den, &other.den);
        Self::new(num, den).expect("difference of proper functions is proper")
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(poly::mul(&self.num, &other.num), poly::mul(&self.den, &other.den))
            .expect("product of proper functions is proper")
    }

    /// One-sample delay `z^{-1} * self`.
    pub fn delayed(&self) -> Self {
        let mut den = self.den.clone();
        den.push(T::zero());
        Self::new(self.num.clone(), den).expect("delay keeps properness")
    }

    /// Impulse response `h_0 .. h_{len-1}` of the canonical realization.
    pub fn impulse_response(&self, len: usize) -> Vec<T> {
        let ss = self.to_state_space();
        let mut u = vec![T::zero(); len];
        if len > 0 {
            u[0] = T::one();
        }
        ss.simulate_siso(&u, &DVector::zeros(ss.n()))
            .map(|(y, _)| y)
            .unwrap_or_default()
    }

    /// Moves every zero by `shift` along the real axis, keeping poles and the
    /// leading numerator coefficient.
    pub fn with_shifted_zeros(&self, shift: T) -> Result<Self> {
        let zeros: Vec<Complex<T>> = self
            .zeros()
            .into_iter()
            .map(|z| z + Complex::new(shift, T::zero()))
            .collect();
        let lead = self.num[0];
        let num = poly::scale(&poly::from_roots(&zeros), lead);
        Self::new(num, self.den.clone())
    }

    /// All poles strictly inside the unit disk (margin `1e-10`).
    pub fn is_stable(&self) -> bool {
        let margin = T::one() - lit::<T>(1e-10);
        self.poles().iter().all(|p| crate::scalar::cabs(*p) < margin)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::real;

    fn g() -> TransferFunction<f64> {
        TransferFunction::new(vec![1.0, -1.1], vec![1.0, -0.7, 0.1]).unwrap()
    }

    #[test]
    fn normalizes_denominator() {
        let tf = TransferFunction::new(vec![2.0, 4.0], vec![2.0, -1.0]).unwrap();
        assert_eq!(tf.num(), &[1.0, 2.0]);
        assert_eq!(tf.den(), &[1.0, -0.5]);
    }

    #[test]
    fn rejects_improper() {
        let err = TransferFunction::new(vec![1.0, 0.0, 0.0], vec![1.0, 0.5]).unwrap_err();
        assert_eq!(err, Error::ImproperTransferFunction);
        assert_eq!(err.to_string(), "improper transfer function");
    }

    #[test]
    fn rejects_zero_denominator() {
        assert!(TransferFunction::new(vec![1.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn example_plant_realization() {
        let ss = g().to_state_space();
        assert_eq!(ss.n(), 2);
        let mut eig: Vec<f64> = ss.a().complex_eigenvalues().iter().map(|e| e.re).collect();
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((eig[0] - 0.2).abs() < 1e-12 && (eig[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unity_passthrough() {
        let ss = TransferFunction::<f64>::unity().to_state_space();
        assert_eq!(ss.n(), 0);
        assert_eq!(ss.d()[(0, 0)], 1.0);
        let (y, _) = ss.simulate_siso(&[1.0, -2.0, 3.0], &DVector::zeros(0)).unwrap();
        assert_eq!(y, vec![1.0, -2.0, 3.0]);
    }

    #[test]
    fn zeros_and_poles() {
        let tf = g();
        assert!((tf.zeros()[0] - real(1.1)).norm() < 1e-12);
        let p = tf.poles();
        assert!((p[0] - real(0.2)).norm() < 1e-12 && (p[1] - real(0.5)).norm() < 1e-12);
        assert!((tf.dc_gain() + 0.25).abs() < 1e-14);
    }

    #[test]
    fn shifted_zero() {
        let s = g().with_shifted_zeros(0.2).unwrap();
        assert!((s.zeros()[0].re - 1.3).abs() < 1e-12);
        assert_eq!(s.den(), g().den());
    }

    #[test]
    fn delay_adds_pole_at_origin() {
        let d = g().delayed();
        assert_eq!(d.order(), 3);
        assert_eq!(d.relative_degree(), 2);
    }
}
