//! Zero-dynamics attacks.
//!
//! A zero `beta` with directions `(x0, g)` satisfies `A x0 + B g = beta x0`
//! and `C x0 + D g = 0`, so started from `x0` the input `g beta^k` leaves the
//! output at zero. For complex `beta` the conjugate is also a zero with
//! conjugate directions; their sum gives the real signal `2 Re(g beta^k)`
//! from the real state `2 Re(x0)`.

use nalgebra::DVector;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::{invariant_zeros, StateSpace, TransferFunction, ZeroData};
use crate::scalar::{cabs, lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "policy", content = "index")]
pub enum ZeroSelection {
    #[default]
    MaxModulus,
    MinModulus,
    /// Position in the sorted zero list.
    Index(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackPlan<T: Real> {
    pub source: StateSpace<T>,
    pub zero: ZeroData<T>,
    pub amplitude: T,
    pub start: usize,
}

impl<T: Real> AttackPlan<T> {
    fn pair_factor(&self) -> T {
        if self.zero.is_real() {
            T::one()
        } else {
            lit(2.0)
        }
    }

    /// `a_k`, zero before the start step.
    pub fn signal(&self, k: usize) -> DVector<T> {
        let m = self.zero.input_direction.len();
        if k < self.start {
            return DVector::zeros(m);
        }
        let beta = if self.zero.is_real() { Complex::new(self.zero.value.re, T::zero()) } else { self.zero.value };
        let power = beta.powu((k - self.start) as u32);
        let scale = self.amplitude * self.pair_factor();
        self.zero.input_direction.map(|gi| (gi * power).re * scale)
    }

    pub fn sequence(&self, len: usize) -> Vec<DVector<T>> {
        (0..len).map(|k| self.signal(k)).collect()
    }

    /// State the source model must hold at the start step.
    pub fn initial_state(&self) -> DVector<T> {
        let scale = self.amplitude * self.pair_factor();
        self.zero.state_direction.map(|x| x.re * scale)
    }
}

/// Builds the attack from a zero of `model`, chosen by `selection`.
pub fn synthesize_zda<T: Real>(
    model: &StateSpace<T>,
    selection: ZeroSelection,
    amplitude: T,
    start: usize,
) -> Result<AttackPlan<T>> {
    if !(amplitude > T::zero()) {
        return Err(Error::InvalidArgument("attack amplitude must be positive".into()));
    }
    let zeros = invariant_zeros(model)?;
    if zeros.is_empty() {
        return Err(Error::NoZeros);
    }
    let pick = match selection {
        ZeroSelection::MaxModulus => argbest(&zeros, |a, b| a > b),
        ZeroSelection::MinModulus => argbest(&zeros, |a, b| a < b),
        ZeroSelection::Index(i) => {
            if i >= zeros.len() {
                return Err(Error::ZeroIndexOutOfRange { index: i, count: zeros.len() });
            }
            i
        }
    };
    let zero = zeros[pick].clone();
    let tol = lit::<T>(1e-8);
    if model.eigenvalues().iter().any(|p| cabs(*p - zero.value) <= tol) {
        return Err(Error::PoleZeroCancellation);
    }
    Ok(AttackPlan { source: model.clone(), zero, amplitude, start })
}

/// [`synthesize_zda`] on the controllable realization of a SISO model. A
/// near pole-zero cancellation is reported as such before the minimality
/// check could reject the realization.
pub fn synthesize_zda_tf<T: Real>(
    model: &TransferFunction<T>,
    selection: ZeroSelection,
    amplitude: T,
    start: usize,
) -> Result<AttackPlan<T>> {
    let tol = lit::<T>(1e-8);
    let poles = model.poles();
    if model.zeros().iter().any(|z| poles.iter().any(|p| cabs(*p - *z) <= tol)) {
        return Err(Error::PoleZeroCancellation);
    }
    synthesize_zda(&model.to_state_space(), selection, amplitude, start)
}

fn argbest<T: Real>(zeros: &[ZeroData<T>], better: impl Fn(T, T) -> bool) -> usize {
    let mut best = 0;
    for (i, z) in zeros.iter().enumerate().skip(1) {
        if better(z.modulus(), zeros[best].modulus()) {
            best = i;
        }
    }
    best
}
