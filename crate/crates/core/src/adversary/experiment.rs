use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{eavesdrop, identify, synthesize_zda_tf, AttackPlan, DisclosureSet, EstimationResult, ModelStructure, ZeroSelection};
use crate::error::Result;
use crate::masking::{build_loop, detect, performance_energy, DetectorReport, LoopSystems, LoopTrace, Placement, Subsystem};
use crate::rng;
use crate::scalar::{lit, Real};

/// Which plant-side states start at the attack's initial condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZdaInitialState {
    /// Nothing: the attack starts from rest.
    None,
    /// The plant-side cipher plant.
    Cipher,
    /// The plant and its digital twin.
    PlantAndTwin,
    /// Plant, twin and cipher plant.
    #[default]
    All,
}

/// Benign learning phase: white-noise reference, seeded loop noise.
#[derive(Debug, Clone)]
pub struct IdentificationPhase<T: Real> {
    pub systems: LoopSystems<T>,
    pub steps: usize,
    pub excitation_variance: f64,
    pub noise_variance: f64,
    pub seed: u64,
}

impl<T: Real> IdentificationPhase<T> {
    pub fn run(&self, replicate: u64) -> Result<LoopTrace<T>> {
        let n = self.steps;
        let (m, p, q) = (self.systems.inputs(), self.systems.outputs(), self.systems.noise_inputs());
        let mut rng_r = rng::stream(self.seed, rng::EXCITATION, replicate);
        let mut rng_e = rng::stream(self.seed, rng::NOISE_IDENTIFICATION, replicate);
        let r = vectors(rng::white_noise(&mut rng_r, n * p, self.excitation_variance), p);
        let e = vectors(rng::white_noise(&mut rng_e, n * q, self.noise_variance), q);
        let a = vec![DVector::zeros(m); n];
        build_loop(self.systems.clone(), T::zero(), n)?.run(&r, &a, &e)
    }

    pub fn disclose(&self, replicate: u64) -> Result<DisclosureSet<T>> {
        Ok(eavesdrop(&self.run(replicate)?))
    }

    pub fn estimate(&self, structure: &ModelStructure, replicate: u64) -> Result<EstimationResult<T>> {
        identify(&self.disclose(replicate)?, structure)
    }
}

fn vectors<T: Real>(flat: Vec<T>, dim: usize) -> Vec<DVector<T>> {
    if dim == 0 {
        let len = flat.len();
        return vec![DVector::zeros(0); len];
    }
    flat.chunks(dim).map(DVector::from_column_slice).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackSpec<T> {
    pub selection: ZeroSelection,
    pub amplitude: T,
    pub start: usize,
    pub initial_state: ZdaInitialState,
}

impl<T: Real> Default for AttackSpec<T> {
    fn default() -> Self {
        Self { selection: ZeroSelection::default(), amplitude: lit(1e-3), start: 0, initial_state: ZdaInitialState::default() }
    }
}

/// Attack-phase settings shared by the pipeline and by hand-built plans.
#[derive(Debug, Clone)]
pub struct AttackPhase<T: Real> {
    pub systems: LoopSystems<T>,
    pub steps: usize,
    pub noise_variance: f64,
    pub placement: Placement,
    pub threshold: T,
    pub initial_state: ZdaInitialState,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct AttackRun<T: Real> {
    pub trace: LoopTrace<T>,
    /// Report at the configured placement.
    pub report: DetectorReport<T>,
    pub d1: DetectorReport<T>,
    pub d2: DetectorReport<T>,
    /// `sum z_k^T z_k` over the attack phase.
    pub attacked_energy: T,
    /// Same noise, no attack, rest initial state.
    pub benign_energy: T,
    pub diverging: bool,
}

impl<T: Real> AttackRun<T> {
    pub fn energy_increase(&self) -> T {
        self.attacked_energy - self.benign_energy
    }
}

impl<T: Real> AttackPhase<T> {
    /// Injects `plan` with `r = 0`.
    pub fn run(&self, plan: &AttackPlan<T>) -> Result<AttackRun<T>> {
        let n = self.steps;
        let (m, p, q) = (self.systems.inputs(), self.systems.outputs(), self.systems.noise_inputs());
        let mut rng_e = rng::stream(self.seed, rng::NOISE_ATTACK, 0);
        let e = vectors(rng::white_noise(&mut rng_e, n * q, self.noise_variance), q);
        let r = DVector::zeros(p);

        let mut engine = build_loop(self.systems.clone(), self.threshold, n)?.with_placement(self.placement);
        let mut records = Vec::with_capacity(n);
        for (k, ek) in e.iter().enumerate() {
            if k == plan.start {
                let x0 = plan.initial_state();
                let targets: &[Subsystem] = match self.initial_state {
                    ZdaInitialState::None => &[],
                    ZdaInitialState::Cipher => &[Subsystem::Cipher],
                    ZdaInitialState::PlantAndTwin => &[Subsystem::Plant, Subsystem::Twin],
                    ZdaInitialState::All => &[Subsystem::Plant, Subsystem::Twin, Subsystem::Cipher],
                };
                for t in targets {
                    engine.set_state(*t, x0.clone())?;
                }
            }
            records.push(engine.step(&r, &plan.signal(k), ek)?);
        }
        let trace = LoopTrace { placement: self.placement, records };

        let mut benign = build_loop(self.systems.clone(), self.threshold, n)?.with_placement(self.placement);
        let benign_trace = benign.run(&vec![r.clone(); n], &vec![DVector::zeros(m); n], &e)?;

        let d1 = detect(&trace, Placement::D1, self.threshold);
        let d2 = detect(&trace, Placement::D2, self.threshold);
        let report = match self.placement {
            Placement::D1 => d1.clone(),
            Placement::D2 => d2.clone(),
        };
        Ok(AttackRun {
            attacked_energy: performance_energy(&trace, n),
            benign_energy: performance_energy(&benign_trace, n),
            diverging: energy_diverging(&trace),
            trace,
            report,
            d1,
            d2,
        })
    }
}

/// Last fifth of the run carries at least twice the performance energy of the
/// fifth before it.
pub fn energy_diverging<T: Real>(trace: &LoopTrace<T>) -> bool {
    let window = trace.len() / 5;
    if window == 0 {
        return false;
    }
    let energy = |from: usize| {
        trace.records[from..from + window].iter().fold(T::zero(), |acc, r| acc + r.z.norm_squared())
    };
    let last = energy(trace.len() - window);
    let prev = energy(trace.len() - 2 * window);
    last > T::zero() && last >= lit::<T>(2.0) * prev
}

#[derive(Debug, Clone)]
pub struct AttackExperiment<T: Real> {
    pub identification: IdentificationPhase<T>,
    pub structure: ModelStructure,
    pub attack: AttackSpec<T>,
    pub attack_steps: usize,
    pub placement: Placement,
    pub threshold: T,
}

#[derive(Debug, Clone)]
pub struct AttackOutcome<T: Real> {
    pub identification_trace: LoopTrace<T>,
    pub estimate: EstimationResult<T>,
    pub plan: AttackPlan<T>,
    pub attack: AttackRun<T>,
}

/// Learn, eavesdrop, identify, synthesize, attack with `r = 0`, detect.
pub fn run_attack_experiment<T: Real>(exp: &AttackExperiment<T>) -> Result<AttackOutcome<T>> {
    let identification_trace = exp.identification.run(0)?;
    let estimate = identify(&eavesdrop(&identification_trace), &exp.structure)?;
    let spec = &exp.attack;
    let plan = synthesize_zda_tf(&estimate.model, spec.selection, spec.amplitude, spec.start)?;
    let phase = AttackPhase {
        systems: exp.identification.systems.clone(),
        steps: exp.attack_steps,
        noise_variance: exp.identification.noise_variance,
        placement: exp.placement,
        threshold: exp.threshold,
        initial_state: spec.initial_state,
        seed: exp.identification.seed,
    };
    let attack = phase.run(&plan)?;
    Ok(AttackOutcome { identification_trace, estimate, plan, attack })
}
