use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{ScenarioConfig, ThresholdSpec};
use crate::adversary::{
    eavesdrop, identify, run_attack_experiment, AttackExperiment, AttackSpec, EstimationResult, IdentificationPhase,
};
use crate::error::Error;
use crate::lti::{invariant_zeros, FrequencyGrid};
use crate::masking::{calibrate_threshold, fmt_f64, DetectorReport, LoopSystems, LoopTrace};
use crate::privacy::{delta_privacy_check, empirical_bias_variance, mse_lower_bound, NearestZero};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: Error,
    },
    #[error("{0}")]
    Io(String),
}

impl ScenarioError {
    /// Process exit status for the command line.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Config(_) => 2,
            ScenarioError::Numerical { .. } => 3,
            ScenarioError::Io(_) => 1,
        }
    }
}

trait Context<T> {
    fn context(self, what: &str) -> Result<T, ScenarioError>;
}

impl<T> Context<T> for crate::Result<T> {
    fn context(self, what: &str) -> Result<T, ScenarioError> {
        self.map_err(|source| ScenarioError::Numerical { context: what.to_string(), source })
    }
}

fn io<T, E: std::fmt::Display>(r: Result<T, E>, path: &Path) -> Result<T, ScenarioError> {
    r.map_err(|e| ScenarioError::Io(format!("{}: {e}", path.display())))
}

type Pair = [f64; 2];

fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

fn nearest(roots: &[Complex64], target: Complex64) -> Option<Complex64> {
    roots.iter().copied().min_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()))
}

fn largest(roots: &[Complex64]) -> Option<Complex64> {
    roots.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm()))
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentificationSummary {
    pub estimator: String,
    pub converged: bool,
    pub cost: f64,
    pub iterations: usize,
    pub numerator_roots: Vec<Pair>,
    pub denominator_roots: Vec<Pair>,
    pub plant_zeros: Vec<Pair>,
    pub cipher_zeros: Vec<Pair>,
    /// Identified root closest to the largest plant zero.
    pub identified_zero: Option<Pair>,
    pub zero_error_vs_plant: Option<f64>,
    pub zero_error_vs_cipher: Option<f64>,
}

impl IdentificationSummary {
    fn new(est: &EstimationResult<f64>, config: &ScenarioConfig) -> Result<Self, ScenarioError> {
        let plant_zeros = config.plant().map_err(|e| ScenarioError::Config(vec![e]))?.zeros();
        let cipher_zeros = config.cipher_tf().map_err(|e| ScenarioError::Config(vec![e]))?.zeros();
        let roots = est.numerator_roots();
        let target = largest(&plant_zeros);
        let identified = target.and_then(|t| nearest(&roots, t));
        let dist = |set: &[Complex64]| identified.and_then(|z| nearest(set, z).map(|s| (s - z).norm()));
        Ok(Self {
            estimator: format!("{:?}", est.structure.estimator),
            converged: est.converged,
            cost: est.cost,
            iterations: est.iterations,
            numerator_roots: roots.iter().copied().map(pair).collect(),
            denominator_roots: est.denominator_roots().into_iter().map(pair).collect(),
            zero_error_vs_plant: identified.zip(target).map(|(z, t)| (z - t).norm()),
            zero_error_vs_cipher: dist(&cipher_zeros),
            plant_zeros: plant_zeros.into_iter().map(pair).collect(),
            cipher_zeros: cipher_zeros.into_iter().map(pair).collect(),
            identified_zero: identified.map(pair),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DetectorSummary {
    pub placement: String,
    pub threshold: f64,
    pub final_energy: f64,
    pub alarm: bool,
    pub first_alarm: Option<usize>,
}

impl From<&DetectorReport<f64>> for DetectorSummary {
    fn from(r: &DetectorReport<f64>) -> Self {
        Self {
            placement: r.placement.to_string(),
            threshold: r.threshold,
            final_energy: r.final_energy(),
            alarm: r.alarm,
            first_alarm: r.first_alarm,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AttackSummary {
    pub zero: Pair,
    pub amplitude: f64,
    pub start: usize,
    pub benign_energy: f64,
    pub attacked_energy: f64,
    pub energy_increase: f64,
    pub diverging: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrivacySummary {
    pub replicates: usize,
    pub failures: usize,
    pub property: String,
    pub truth: Pair,
    pub mse: f64,
    pub standard_error: f64,
    pub delta: f64,
    pub private: bool,
    pub zero_mean: Pair,
    pub zero_bias_vs_plant: f64,
    pub zero_bias_vs_cipher: f64,
    pub zero_variance: f64,
    /// Largest bias of the mean frequency response with respect to the cipher.
    pub sup_bias_vs_cipher: f64,
    pub lower_bound_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub id: String,
    pub seed: u64,
    /// Placement the scenario was configured with.
    pub placement: String,
    pub identification: IdentificationSummary,
    pub attack: AttackSummary,
    /// Both placements evaluated on the same attacked trace.
    pub detectors: Vec<DetectorSummary>,
    pub privacy: Option<PrivacySummary>,
    pub manifest: Vec<PathBuf>,
}

impl ExperimentReport {
    pub fn detector(&self) -> &DetectorSummary {
        self.detectors.iter().find(|d| d.placement == self.placement).expect("configured placement reported")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }
}

struct Writer {
    dir: PathBuf,
    manifest: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self, ScenarioError> {
        io(fs::create_dir_all(dir), dir)?;
        Ok(Self { dir: dir.to_path_buf(), manifest: Vec::new() })
    }

    fn text(&mut self, name: &str, body: &str) -> Result<(), ScenarioError> {
        let path = self.dir.join(name);
        io(fs::write(&path, body), &path)?;
        self.manifest.push(path);
        Ok(())
    }

    fn trace(&mut self, name: &str, trace: &LoopTrace<f64>) -> Result<(), ScenarioError> {
        let path = self.dir.join(name);
        io(trace.save_csv(&path), &path)?;
        self.manifest.push(path);
        Ok(())
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), ScenarioError> {
        let path = self.dir.join(name);
        let mut wtr = io(csv::Writer::from_path(&path), &path)?;
        io(wtr.write_record(header), &path)?;
        for row in rows {
            io(wtr.write_record(row), &path)?;
        }
        io(wtr.flush(), &path)?;
        self.manifest.push(path);
        Ok(())
    }
}

fn systems(config: &ScenarioConfig) -> Result<LoopSystems<f64>, ScenarioError> {
    config.systems().map_err(|e| ScenarioError::Config(vec![e]))
}

fn phase(config: &ScenarioConfig, systems: LoopSystems<f64>) -> IdentificationPhase<f64> {
    IdentificationPhase {
        systems,
        steps: config.identification_steps,
        excitation_variance: config.excitation_variance,
        noise_variance: config.noise_variance,
        seed: config.seed,
    }
}

fn structure(config: &ScenarioConfig) -> Result<crate::adversary::ModelStructure, ScenarioError> {
    config.structure().map_err(|e| ScenarioError::Config(vec![format!("adversary: {e}")]))
}

fn threshold(config: &ScenarioConfig, systems: &LoopSystems<f64>) -> Result<f64, ScenarioError> {
    match config.threshold {
        ThresholdSpec::Fixed(t) => Ok(t),
        ThresholdSpec::Calibrated { quantile, runs } => calibrate_threshold(
            systems,
            config.placement,
            config.noise_variance,
            config.attack_steps,
            quantile,
            runs,
            config.seed,
        )
        .context("threshold calibration"),
    }
}

/// Full pipeline; writes every artifact under the configured output directory.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ExperimentReport, ScenarioError> {
    let systems = systems(config)?;
    let structure = structure(config)?;
    let threshold = threshold(config, &systems)?;
    let experiment = AttackExperiment {
        identification: phase(config, systems.clone()),
        structure,
        attack: AttackSpec {
            selection: config.zero,
            amplitude: config.amplitude,
            start: config.start,
            initial_state: config.initial_state,
        },
        attack_steps: config.attack_steps,
        placement: config.placement,
        threshold,
    };
    let outcome = run_attack_experiment(&experiment).context(&format!("scenario {}", config.id))?;

    let mut out = Writer::new(&config.out_dir)?;
    out.text("config.resolved.toml", &config.to_toml())?;
    out.trace("identification_trace.csv", &outcome.identification_trace)?;
    out.text("estimate.toml", &outcome.estimate.to_record())?;
    out.trace("attack_trace.csv", &outcome.attack.trace)?;
    let detector_rows: Vec<Vec<String>> = outcome
        .attack
        .d1
        .cumulative_energy
        .iter()
        .zip(&outcome.attack.d2.cumulative_energy)
        .enumerate()
        .map(|(k, (a, b))| vec![k.to_string(), fmt_f64(*a), fmt_f64(*b)])
        .collect();
    out.csv("detector.csv", &["k", "energy_d1", "energy_d2"], &detector_rows)?;

    let identification = IdentificationSummary::new(&outcome.estimate, config)?;
    let privacy = if config.replicates >= 2 { Some(privacy(config, &systems, &mut out)?) } else { None };

    let run = &outcome.attack;
    let mut report = ExperimentReport {
        id: config.id.clone(),
        seed: config.seed,
        placement: config.placement.to_string(),
        identification,
        attack: AttackSummary {
            zero: pair(outcome.plan.zero.value),
            amplitude: outcome.plan.amplitude,
            start: outcome.plan.start,
            benign_energy: run.benign_energy,
            attacked_energy: run.attacked_energy,
            energy_increase: run.energy_increase(),
            diverging: run.diverging,
        },
        detectors: vec![(&run.d1).into(), (&run.d2).into()],
        privacy,
        manifest: Vec::new(),
    };
    let report_path = out.dir.join("report.toml");
    report.manifest = out.manifest.clone();
    report.manifest.push(report_path.clone());
    io(fs::write(&report_path, report.to_toml()), &report_path)?;
    Ok(report)
}

fn privacy(
    config: &ScenarioConfig,
    systems: &LoopSystems<f64>,
    out: &mut Writer,
) -> Result<PrivacySummary, ScenarioError> {
    let plant = config.plant().map_err(|e| ScenarioError::Config(vec![e]))?;
    let cipher = config.cipher_tf().map_err(|e| ScenarioError::Config(vec![e]))?;
    let phase = phase(config, systems.clone());
    let structure = structure(config)?;
    let Some(truth) = largest(&plant.zeros()) else {
        return Err(ScenarioError::Config(vec!["privacy_metrics: plant has no zero to protect".into()]));
    };
    let grid = FrequencyGrid::uniform(config.grid_points).context("privacy grid")?;
    let curve = empirical_bias_variance(&phase, &structure, config.replicates, &grid).context("bias and variance")?;
    let bound = mse_lower_bound(&curve, &plant, &cipher).context("MSE lower bound")?;
    let path = out.dir.join("privacy_curve.csv");
    let file = io(fs::File::create(&path), &path)?;
    io(curve.write_csv(&bound, std::io::BufWriter::new(file)), &path)?;
    out.manifest.push(path);

    let extractor = NearestZero { zero: truth };
    let verdict =
        delta_privacy_check(&extractor, &phase, &structure, config.delta, config.replicates).context("privacy verdict")?;
    let rows: Vec<Vec<String>> =
        verdict.estimates.iter().enumerate().map(|(i, z)| vec![i.to_string(), fmt_f64(z.re), fmt_f64(z.im)]).collect();
    out.csv("privacy_zero.csv", &["replicate", "re", "im"], &rows)?;

    let n = verdict.estimates.len() as f64;
    let mean = verdict.estimates.iter().sum::<Complex64>() / n;
    let variance = verdict.estimates.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / n;
    let cipher_zero = nearest(&cipher.zeros(), mean).unwrap_or(mean);
    let sup_bias = curve.bias.iter().fold(0.0f64, |m, b| m.max(b.norm()));
    Ok(PrivacySummary {
        replicates: config.replicates,
        failures: verdict.failures,
        property: verdict.property.clone(),
        truth: pair(truth),
        mse: verdict.mse,
        standard_error: verdict.standard_error,
        delta: verdict.delta,
        private: verdict.private,
        zero_mean: pair(mean),
        zero_bias_vs_plant: (mean - truth).norm(),
        zero_bias_vs_cipher: (mean - cipher_zero).norm(),
        zero_variance: variance,
        sup_bias_vs_cipher: sup_bias,
        lower_bound_holds: bound.holds_everywhere(),
    })
}

/// Identification phase only.
pub fn run_identification(config: &ScenarioConfig) -> Result<IdentificationSummary, ScenarioError> {
    let systems = systems(config)?;
    let structure = structure(config)?;
    let trace = phase(config, systems).run(0).context("identification run")?;
    let estimate = identify(&eavesdrop(&trace), &structure).context("identification")?;
    let mut out = Writer::new(&config.out_dir)?;
    out.text("config.resolved.toml", &config.to_toml())?;
    out.trace("identification_trace.csv", &trace)?;
    out.text("estimate.toml", &estimate.to_record())?;
    IdentificationSummary::new(&estimate, config)
}

/// Invariant zeros of the plant and the cipher plant, one per line.
pub fn describe_zeros(config: &ScenarioConfig) -> Result<String, ScenarioError> {
    let mut text = String::new();
    let plant = config.plant().map_err(|e| ScenarioError::Config(vec![e]))?;
    let cipher = config.cipher_tf().map_err(|e| ScenarioError::Config(vec![e]))?;
    for (name, tf) in [("plant", plant), ("cipher", cipher)] {
        let zeros = invariant_zeros(&tf.to_state_space()).context(&format!("{name} zeros"))?;
        if zeros.is_empty() {
            text.push_str(&format!("{name}: no invariant zeros\n"));
        }
        for z in zeros {
            text.push_str(&format!(
                "{name}: beta = {:+.12} {:+.12}i  |beta| = {:.12}  {:?}\n",
                z.value.re,
                z.value.im,
                z.modulus(),
                z.stability
            ));
        }
    }
    Ok(text)
}

/// Parameters a sweep may vary.
pub const SWEEP_PARAMETERS: [&str; 5] = ["delta", "n_id", "lambda", "amplitude", "threshold"];

pub const SWEEP_CSV_HEADER: [&str; 16] = [
    "param",
    "value",
    "status",
    "identified_zero_re",
    "identified_zero_im",
    "zero_error_vs_plant",
    "zero_error_vs_cipher",
    "mc_zero_bias_vs_plant",
    "mc_zero_bias_vs_cipher",
    "mc_zero_variance",
    "alarm",
    "first_alarm",
    "attacked_energy",
    "benign_energy",
    "energy_increase",
    "diverging",
];

/// One sweep point; `report` is `Err` with the failure message when that run failed.
#[derive(Debug)]
pub struct SweepPoint {
    pub value: f64,
    pub report: Result<ExperimentReport, String>,
}

/// Applies `value` to a copy of `base`.
pub fn sweep_variant(base: &ScenarioConfig, param: &str, value: f64) -> Result<ScenarioConfig, ScenarioError> {
    let mut c = base.clone();
    let bad = |msg: String| ScenarioError::Config(vec![msg]);
    match param {
        "delta" => match c.cipher {
            super::CipherSpec::Shift(_) => c.cipher = super::CipherSpec::Shift(value),
            _ => return Err(bad("sweep over delta needs lti.cipher_shift".into())),
        },
        "n_id" => {
            if value < 0.0 || value.fract() != 0.0 {
                return Err(bad(format!("n_id must be a non-negative integer, got {value}")));
            }
            c.identification_steps = value as usize;
        }
        "lambda" => c.noise_variance = value,
        "amplitude" => c.amplitude = value,
        "threshold" => c.threshold = ThresholdSpec::Fixed(value),
        other => {
            return Err(bad(format!("unknown sweep parameter {other:?} (expected one of {})", SWEEP_PARAMETERS.join(", "))))
        }
    }
    Ok(c)
}

/// Independent runs per value, each in its own subdirectory; failures are
/// recorded in the summary CSV and the sweep continues.
pub fn sweep(base: &ScenarioConfig, param: &str, values: &[f64]) -> Result<Vec<SweepPoint>, ScenarioError> {
    let variants = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut c = sweep_variant(base, param, *v)?;
            c.out_dir = base.out_dir.join(format!("{param}_{i:03}"));
            Ok((*v, c))
        })
        .collect::<Result<Vec<_>, ScenarioError>>()?;
    let points: Vec<SweepPoint> = variants
        .into_par_iter()
        .map(|(value, c)| {
            let errors = c.semantic_errors();
            let report = if errors.is_empty() {
                run_scenario(&c).map_err(|e| e.to_string())
            } else {
                Err(ScenarioError::Config(errors).to_string())
            };
            SweepPoint { value, report }
        })
        .collect();

    let mut out = Writer::new(&base.out_dir)?;
    let rows: Vec<Vec<String>> = points.iter().map(|p| sweep_row(param, p)).collect();
    out.csv(&format!("sweep_{param}.csv"), &SWEEP_CSV_HEADER, &rows)?;
    Ok(points)
}

fn sweep_row(param: &str, p: &SweepPoint) -> Vec<String> {
    let f = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    let mut row = vec![param.to_string(), fmt_f64(p.value)];
    match &p.report {
        Err(e) => {
            row.push(format!("error: {}", e.replace('\n', " ")));
            row.resize(SWEEP_CSV_HEADER.len(), String::new());
        }
        Ok(r) => {
            let id = &r.identification;
            let pv = r.privacy.as_ref();
            let det = r.detector();
            row.extend([
                "ok".to_string(),
                f(id.identified_zero.map(|z| z[0])),
                f(id.identified_zero.map(|z| z[1])),
                f(id.zero_error_vs_plant),
                f(id.zero_error_vs_cipher),
                f(pv.map(|p| p.zero_bias_vs_plant)),
                f(pv.map(|p| p.zero_bias_vs_cipher)),
                f(pv.map(|p| p.zero_variance)),
                det.alarm.to_string(),
                det.first_alarm.map(|k| k.to_string()).unwrap_or_default(),
                fmt_f64(r.attack.attacked_energy),
                fmt_f64(r.attack.benign_energy),
                fmt_f64(r.attack.energy_increase),
                r.attack.diverging.to_string(),
            ]);
        }
    }
    row
}
