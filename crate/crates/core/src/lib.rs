//! Simulation and analysis of dynamically masked networked control loops.
//!
//! The plant side runs the physical plant next to a digital twin and a
//! cipher plant `S`, so the channel carries `w = S u~ + H e` instead of the
//! plant output. The crate provides the loop engine, an eavesdropping and
//! identifying adversary that synthesizes zero-dynamics attacks, detectors,
//! and Monte Carlo privacy metrics.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`.

pub mod adversary;
pub mod design;
pub mod error;
pub mod lti;
pub mod masking;
pub mod poly;
pub mod privacy;
pub mod rng;
pub mod scalar;
pub mod scenario;

pub use error::{Error, Result};
pub use scalar::Real;

pub type TransferFunction64 = lti::TransferFunction<f64>;
pub type StateSpace64 = lti::StateSpace<f64>;
pub type ZeroData64 = lti::ZeroData<f64>;
pub type FrequencyGrid64 = lti::FrequencyGrid<f64>;
pub type FrequencyResponse64 = lti::FrequencyResponse<f64>;
pub type TransferFunction32 = lti::TransferFunction<f32>;
pub type StateSpace32 = lti::StateSpace<f32>;
pub type LoopSystems64 = masking::LoopSystems<f64>;
pub type LoopEngine64 = masking::LoopEngine<f64>;
pub type LoopTrace64 = masking::LoopTrace<f64>;
pub type DetectorReport64 = masking::DetectorReport<f64>;
pub type DisclosureSet64 = adversary::DisclosureSet<f64>;
pub type EstimationResult64 = adversary::EstimationResult<f64>;
pub type AttackPlan64 = adversary::AttackPlan<f64>;
pub type BiasVarianceCurve64 = privacy::BiasVarianceCurve<f64>;
pub type PrivacyVerdict64 = privacy::PrivacyVerdict<f64>;
