//! Privacy metrics: Monte Carlo bias and variance of the adversary's
//! frequency-domain estimate, delta-privacy verdicts for scalar model
//! properties, and asymptotic prediction-error diagnostics.

mod criterion;
mod montecarlo;

pub use criterion::{
    asymptotic_criterion, believed_controller, believed_controller_response, feedback_path,
    input_spectrum_decomposition, AsymptoticCriterion, MIN_CRITERION_GRID, FixedDenominatorFamily, ModelFamily, NoiseModel,
    RationalFamily, SpectrumDecomposition,
};
pub use montecarlo::{
    delta_privacy_check, empirical_bias_variance, mse_lower_bound, MseBound, NearestZero, PrivacyVerdict,
    PropertyExtractor, BiasVarianceCurve, CURVE_CSV_HEADER,
};

/// At most this fraction of replicates may fail.
pub const MAX_FAILURE_FRACTION: f64 = 0.1;
