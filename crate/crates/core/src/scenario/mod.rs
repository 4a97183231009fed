//! Scenario files, seeded end-to-end runs, parameter sweeps and their
//! artifacts.

mod config;
mod run;

pub use config::{
    load_config, parse_config, CipherSpec, ControllerSpec, EstimatorChoice, ScenarioConfig, ThresholdSpec,
};
pub use run::{
    describe_zeros, run_identification, run_scenario, sweep, sweep_variant, AttackSummary, DetectorSummary,
    ExperimentReport, IdentificationSummary, PrivacySummary, ScenarioError, SweepPoint, SWEEP_CSV_HEADER,
    SWEEP_PARAMETERS,
};
