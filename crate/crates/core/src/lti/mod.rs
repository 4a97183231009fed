//! Discrete-time LTI systems: representations, simulation, stability,
//! frequency responses and invariant zeros.

mod freq;
mod ss;
mod tf;
mod zeros;

pub use freq::{frequency_response, FrequencyDomain, FrequencyGrid, FrequencyResponse};
pub use ss::{numerical_rank, Simulation, StateSpace};
pub use tf::TransferFunction;
pub use zeros::{invariant_zeros, rosenbrock, ZeroData, ZeroStability};

use crate::error::Result;
use crate::scalar::Real;

/// Controllable canonical realization of `tf`.
pub fn tf_to_ss<T: Real>(tf: &TransferFunction<T>) -> StateSpace<T> {
    tf.to_state_space()
}

/// Transfer function of a SISO realization.
pub fn ss_to_tf<T: Real>(ss: &StateSpace<T>) -> Result<TransferFunction<T>> {
    ss.to_transfer_function()
}
