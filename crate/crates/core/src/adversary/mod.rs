//! The eavesdropping adversary: disclosure, identification from `(u, w)`,
//! and zero-dynamics attack synthesis and injection.

mod disclosure;
mod experiment;
mod identify;
mod zda;

pub use disclosure::{eavesdrop, DisclosureSet};
pub use experiment::{
    energy_diverging, run_attack_experiment, AttackExperiment, AttackOutcome, AttackPhase, AttackRun, AttackSpec,
    IdentificationPhase, ZdaInitialState,
};
pub use identify::{identify, EstimationResult, EstimatorKind, ModelStructure, NoiseFamily};
pub use zda::{synthesize_zda, synthesize_zda_tf, AttackPlan, ZeroSelection};
