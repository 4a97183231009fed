//! Scenario configuration.
//!
//! A TOML file with five sections. Unknown keys, type errors, missing
//! required keys and conflicting keys are all collected before failing.
//!
//! ```toml
//! [scenario]
//! id = "example"
//! seed = 42                       # required
//! out_dir = "out"
//!
//! [lti]
//! plant_num = [1.0, -1.1]         # required, descending powers of z
//! plant_den = [1.0, -0.7, 0.1]    # required
//! cipher_shift = 0.2              # or cipher_num + cipher_den
//! noise_num = [1.0]
//! noise_den = [1.0]
//!
//! [masking_loop]
//! controller = "stabilizing-output-feedback"   # or "explicit"
//! pole_radius = 0.6
//! noise_variance = 0.0
//! excitation_variance = 1.0
//! placement = "d1"
//! threshold = 0.5                 # or threshold_quantile + calibration_runs
//! identification_steps = 2000
//! attack_steps = 100
//!
//! [adversary]
//! estimator = "auto"              # auto | arx | output-error
//! noise_model = "none"            # none | independent
//! zero_policy = "max-modulus"     # max-modulus | min-modulus | index
//! amplitude = 1e-3
//! start = 0
//! initial_state = "all"           # all | cipher | plant-and-twin | none
//! max_iterations = 200
//!
//! [privacy_metrics]
//! replicates = 20                 # 0 disables the Monte Carlo metrics
//! grid_points = 512
//! delta = 0.03
//! ```

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use toml::{Table, Value};

use super::ScenarioError;
use crate::adversary::{EstimatorKind, ModelStructure, NoiseFamily, ZdaInitialState, ZeroSelection};
use crate::design::{common_denominator_realization, stabilizing_output_feedback};
use crate::lti::{StateSpace, TransferFunction};
use crate::masking::{LoopSystems, Placement};

#[derive(Debug, Clone, PartialEq)]
pub enum CipherSpec {
    /// Plant poles, every plant zero moved by the shift.
    Shift(f64),
    Explicit { num: Vec<f64>, den: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControllerSpec {
    Builder { pole_radius: f64 },
    /// `[y; r] -> u_{k+1}` rows over a common denominator.
    Explicit { num_y: Vec<f64>, num_r: Vec<f64>, den: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdSpec {
    Fixed(f64),
    Calibrated { quantile: f64, runs: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorChoice {
    /// ARX without loop noise, output error otherwise.
    Auto,
    Fixed(EstimatorKind),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub id: String,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub plant_num: Vec<f64>,
    pub plant_den: Vec<f64>,
    pub cipher: CipherSpec,
    pub noise_num: Vec<f64>,
    pub noise_den: Vec<f64>,
    pub controller: ControllerSpec,
    pub noise_variance: f64,
    pub excitation_variance: f64,
    pub placement: Placement,
    pub threshold: ThresholdSpec,
    pub identification_steps: usize,
    pub attack_steps: usize,
    pub nb: usize,
    pub nf: usize,
    pub estimator: EstimatorChoice,
    pub noise_model: NoiseFamily,
    pub zero: ZeroSelection,
    pub amplitude: f64,
    pub start: usize,
    pub initial_state: ZdaInitialState,
    pub max_iterations: usize,
    pub replicates: usize,
    pub grid_points: usize,
    pub delta: f64,
}

const KNOWN: [(&str, &[&str]); 5] = [
    ("scenario", &["id", "seed", "out_dir"]),
    ("lti", &["plant_num", "plant_den", "cipher_shift", "cipher_num", "cipher_den", "noise_num", "noise_den"]),
    (
        "masking_loop",
        &[
            "controller",
            "pole_radius",
            "controller_num_y",
            "controller_num_r",
            "controller_den",
            "noise_variance",
            "excitation_variance",
            "placement",
            "threshold",
            "threshold_quantile",
            "calibration_runs",
            "identification_steps",
            "attack_steps",
        ],
    ),
    (
        "adversary",
        &[
            "nb",
            "nf",
            "estimator",
            "noise_model",
            "noise_order",
            "zero_policy",
            "zero_index",
            "amplitude",
            "start",
            "initial_state",
            "max_iterations",
        ],
    ),
    ("privacy_metrics", &["replicates", "grid_points", "delta"]),
];

struct Reader<'a> {
    root: &'a Table,
    errors: Vec<String>,
}

impl Reader<'_> {
    fn raw(&self, section: &str, key: &str) -> Option<&Value> {
        self.root.get(section).and_then(Value::as_table).and_then(|t| t.get(key))
    }

    fn has(&self, section: &str, key: &str) -> bool {
        self.raw(section, key).is_some()
    }

    fn get<T: DeserializeOwned>(&mut self, section: &str, key: &str) -> Option<T> {
        let value = self.raw(section, key)?.clone();
        match value.try_into::<T>() {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(format!("{section}.{key}: {}", e.message()));
                None
            }
        }
    }

    fn or<T: DeserializeOwned>(&mut self, section: &str, key: &str, default: T) -> T {
        self.get(section, key).unwrap_or(default)
    }

    fn required<T: DeserializeOwned>(&mut self, section: &str, key: &str) -> Option<T> {
        if !self.has(section, key) {
            self.errors.push(format!("{section}.{key}: required key missing"));
            return None;
        }
        self.get(section, key)
    }

    fn parsed<T: std::str::FromStr>(&mut self, section: &str, key: &str, default: T) -> T
    where
        T::Err: std::fmt::Display,
    {
        match self.get::<String>(section, key) {
            None => default,
            Some(s) => s.parse().unwrap_or_else(|e| {
                self.errors.push(format!("{section}.{key}: {e}"));
                default
            }),
        }
    }

    fn fail(&mut self, msg: String) {
        self.errors.push(msg);
    }
}

fn named<T: Copy>(what: &str, s: &str, options: &[(&str, T)]) -> Result<T, String> {
    options.iter().find(|(n, _)| *n == s).map(|(_, v)| *v).ok_or_else(|| {
        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
        format!("unknown {what} {s:?} (expected one of {})", names.join(", "))
    })
}

struct Named<T>(T);

macro_rules! named_enum {
    ($ty:ty, $what:literal, [$(($name:literal, $val:expr)),* $(,)?]) => {
        impl std::str::FromStr for Named<$ty> {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                named($what, s, &[$(($name, $val)),*]).map(Named)
            }
        }
    };
}

named_enum!(EstimatorChoice, "estimator", [
    ("auto", EstimatorChoice::Auto),
    ("arx", EstimatorChoice::Fixed(EstimatorKind::Arx)),
    ("output-error", EstimatorChoice::Fixed(EstimatorKind::OutputError)),
]);
named_enum!(ZdaInitialState, "initial state", [
    ("all", ZdaInitialState::All),
    ("cipher", ZdaInitialState::Cipher),
    ("plant-and-twin", ZdaInitialState::PlantAndTwin),
    ("none", ZdaInitialState::None),
]);

fn estimator_name(e: EstimatorChoice) -> &'static str {
    match e {
        EstimatorChoice::Auto => "auto",
        EstimatorChoice::Fixed(EstimatorKind::Arx) => "arx",
        EstimatorChoice::Fixed(EstimatorKind::OutputError) => "output-error",
    }
}

fn initial_state_name(s: ZdaInitialState) -> &'static str {
    match s {
        ZdaInitialState::All => "all",
        ZdaInitialState::Cipher => "cipher",
        ZdaInitialState::PlantAndTwin => "plant-and-twin",
        ZdaInitialState::None => "none",
    }
}

/// Reads and validates a scenario file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, ScenarioError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ScenarioError::Config(vec![format!("{}: {e}", path.display())]))?;
    parse_config(&text)
}

/// Parses and validates scenario TOML text.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| ScenarioError::Config(vec![e.message().to_string()]))?;
    let mut rd = Reader { root: &root, errors: Vec::new() };

    for (name, value) in &root {
        match KNOWN.iter().find(|(s, _)| s == name) {
            None => rd.fail(format!("{name}: unknown section")),
            Some((_, keys)) => match value.as_table() {
                None => rd.fail(format!("{name}: expected a table")),
                Some(t) => {
                    for key in t.keys().filter(|k| !keys.contains(&k.as_str())) {
                        rd.fail(format!("{name}.{key}: unknown key"));
                    }
                }
            },
        }
    }

    let id = rd.or("scenario", "id", "scenario".to_string());
    let seed: Option<u64> = rd.required("scenario", "seed");
    let out_dir = PathBuf::from(rd.or("scenario", "out_dir", "out".to_string()));

    let plant_num: Option<Vec<f64>> = rd.required("lti", "plant_num");
    let plant_den: Option<Vec<f64>> = rd.required("lti", "plant_den");
    let has_shift = rd.has("lti", "cipher_shift");
    let has_explicit = rd.has("lti", "cipher_num") || rd.has("lti", "cipher_den");
    let cipher = match (has_shift, has_explicit) {
        (true, true) => {
            rd.fail("lti.cipher_shift: conflicts with lti.cipher_num/cipher_den".into());
            None
        }
        (false, false) => {
            rd.fail("lti.cipher_shift: required unless lti.cipher_num and lti.cipher_den are given".into());
            None
        }
        (true, false) => rd.get("lti", "cipher_shift").map(CipherSpec::Shift),
        (false, true) => {
            let num = rd.required("lti", "cipher_num");
            let den = rd.required("lti", "cipher_den");
            num.zip(den).map(|(num, den)| CipherSpec::Explicit { num, den })
        }
    };
    let noise_num = rd.or("lti", "noise_num", vec![1.0]);
    let noise_den = rd.or("lti", "noise_den", vec![1.0]);

    let ml = "masking_loop";
    let controller = match rd.or(ml, "controller", "stabilizing-output-feedback".to_string()).as_str() {
        "stabilizing-output-feedback" => {
            for key in ["controller_num_y", "controller_num_r", "controller_den"] {
                if rd.has(ml, key) {
                    rd.fail(format!("{ml}.{key}: only valid with controller = \"explicit\""));
                }
            }
            Some(ControllerSpec::Builder { pole_radius: rd.or(ml, "pole_radius", 0.6) })
        }
        "explicit" => {
            if rd.has(ml, "pole_radius") {
                rd.fail(format!("{ml}.pole_radius: only valid with the builder controller"));
            }
            let y = rd.required(ml, "controller_num_y");
            let r = rd.required(ml, "controller_num_r");
            let d = rd.required(ml, "controller_den");
            match (y, r, d) {
                (Some(num_y), Some(num_r), Some(den)) => Some(ControllerSpec::Explicit { num_y, num_r, den }),
                _ => None,
            }
        }
        other => {
            rd.fail(format!("{ml}.controller: unknown controller {other:?}"));
            None
        }
    };
    let noise_variance = rd.or(ml, "noise_variance", 0.0);
    let excitation_variance = rd.or(ml, "excitation_variance", 1.0);
    let placement = rd.parsed(ml, "placement", Placement::D1);
    let threshold = if rd.has(ml, "threshold") && rd.has(ml, "threshold_quantile") {
        rd.fail(format!("{ml}.threshold: conflicts with {ml}.threshold_quantile"));
        ThresholdSpec::Fixed(0.5)
    } else if rd.has(ml, "threshold_quantile") {
        let quantile = rd.or(ml, "threshold_quantile", 0.99);
        let runs = rd.or(ml, "calibration_runs", 200usize);
        ThresholdSpec::Calibrated { quantile, runs }
    } else {
        if rd.has(ml, "calibration_runs") {
            rd.fail(format!("{ml}.calibration_runs: only valid with {ml}.threshold_quantile"));
        }
        ThresholdSpec::Fixed(rd.or(ml, "threshold", 0.5))
    };
    let identification_steps = rd.or(ml, "identification_steps", 2000usize);
    let attack_steps = rd.or(ml, "attack_steps", 100usize);

    let ad = "adversary";
    let zeros_of_plant = plant_num.as_ref().map(|n| crate::poly::degree(&crate::poly::trim(n)));
    let order_of_plant = plant_den.as_ref().map(|d| crate::poly::degree(&crate::poly::trim(d)));
    let nb = rd.get(ad, "nb").or(zeros_of_plant).unwrap_or(1);
    let nf = rd.get(ad, "nf").or(order_of_plant).unwrap_or(1);
    let estimator = rd.parsed::<Named<EstimatorChoice>>(ad, "estimator", Named(EstimatorChoice::Auto)).0;
    let noise_model = match rd.or(ad, "noise_model", "none".to_string()).as_str() {
        "none" => {
            if rd.has(ad, "noise_order") {
                rd.fail(format!("{ad}.noise_order: only valid with noise_model = \"independent\""));
            }
            NoiseFamily::None
        }
        "independent" => NoiseFamily::Independent { order: rd.or(ad, "noise_order", 1usize) },
        other => {
            rd.fail(format!("{ad}.noise_model: unknown noise model {other:?}"));
            NoiseFamily::None
        }
    };
    let zero = match rd.or(ad, "zero_policy", "max-modulus".to_string()).as_str() {
        "max-modulus" | "min-modulus" if rd.has(ad, "zero_index") => {
            rd.fail(format!("{ad}.zero_index: only valid with zero_policy = \"index\""));
            ZeroSelection::MaxModulus
        }
        "max-modulus" => ZeroSelection::MaxModulus,
        "min-modulus" => ZeroSelection::MinModulus,
        "index" => ZeroSelection::Index(rd.required(ad, "zero_index").unwrap_or(0)),
        other => {
            rd.fail(format!("{ad}.zero_policy: unknown policy {other:?}"));
            ZeroSelection::MaxModulus
        }
    };
    let amplitude = rd.or(ad, "amplitude", 1e-3);
    let start = rd.or(ad, "start", 0usize);
    let initial_state = rd.parsed::<Named<ZdaInitialState>>(ad, "initial_state", Named(ZdaInitialState::All)).0;
    let max_iterations = rd.or(ad, "max_iterations", 200usize);

    let pm = "privacy_metrics";
    let replicates = rd.or(pm, "replicates", 20usize);
    let grid_points = rd.or(pm, "grid_points", 512usize);
    let delta = rd.or(pm, "delta", 0.03);

    let mut errors = rd.errors;
    let (Some(seed), Some(plant_num), Some(plant_den), Some(cipher), Some(controller)) =
        (seed, plant_num, plant_den, cipher, controller)
    else {
        return Err(ScenarioError::Config(errors));
    };
    let config = ScenarioConfig {
        id,
        seed,
        out_dir,
        plant_num,
        plant_den,
        cipher,
        noise_num,
        noise_den,
        controller,
        noise_variance,
        excitation_variance,
        placement,
        threshold,
        identification_steps,
        attack_steps,
        nb,
        nf,
        estimator,
        noise_model,
        zero,
        amplitude,
        start,
        initial_state,
        max_iterations,
        replicates,
        grid_points,
        delta,
    };
    errors.extend(config.semantic_errors());
    if errors.is_empty() {
        Ok(config)
    } else {
        Err(ScenarioError::Config(errors))
    }
}

impl ScenarioConfig {
    /// Range and system-level checks, including cipher and loop stability.
    pub fn semantic_errors(&self) -> Vec<String> {
        let mut errors = Vec::new();
        let mut check = |ok: bool, msg: &str| {
            if !ok {
                errors.push(msg.to_string());
            }
        };
        check(self.noise_variance >= 0.0, "masking_loop.noise_variance: must be non-negative");
        check(self.excitation_variance >= 0.0, "masking_loop.excitation_variance: must be non-negative");
        match self.threshold {
            ThresholdSpec::Fixed(t) => check(t >= 0.0, "masking_loop.threshold: must be non-negative"),
            ThresholdSpec::Calibrated { quantile, runs } => {
                check((0.0..=1.0).contains(&quantile), "masking_loop.threshold_quantile: must lie in [0, 1]");
                check(runs > 0, "masking_loop.calibration_runs: must be positive");
            }
        }
        check(self.attack_steps > 0, "masking_loop.attack_steps: must be positive");
        check(self.amplitude > 0.0, "adversary.amplitude: must be positive");
        check(self.start < self.attack_steps.max(1), "adversary.start: must precede the end of the attack phase");
        check(self.replicates != 1, "privacy_metrics.replicates: must be 0 or at least 2");
        check(self.grid_points >= 2, "privacy_metrics.grid_points: must be at least 2");
        check(self.delta >= 0.0, "privacy_metrics.delta: must be non-negative");
        match self.structure() {
            Err(e) => errors.push(format!("adversary: {e}")),
            Ok(s) if self.identification_steps < s.min_samples() => {
                errors.push(format!(
                    "masking_loop.identification_steps: need at least {} samples for nb = {}, nf = {}",
                    s.min_samples(),
                    s.nb,
                    s.nf
                ));
            }
            Ok(_) => {}
        }
        if let ControllerSpec::Builder { pole_radius } = self.controller {
            if !(pole_radius > 0.0 && pole_radius < 1.0) {
                errors.push("masking_loop.pole_radius: must lie in (0, 1)".into());
            }
        }
        if errors.is_empty() {
            if let Err(e) = self.systems() {
                errors.push(e);
            }
        }
        errors
    }

    pub fn plant(&self) -> Result<TransferFunction<f64>, String> {
        TransferFunction::new(self.plant_num.clone(), self.plant_den.clone()).map_err(|e| format!("lti.plant: {e}"))
    }

    pub fn cipher_tf(&self) -> Result<TransferFunction<f64>, String> {
        match &self.cipher {
            CipherSpec::Shift(d) => self.plant()?.with_shifted_zeros(*d).map_err(|e| format!("lti.cipher_shift: {e}")),
            CipherSpec::Explicit { num, den } => {
                TransferFunction::new(num.clone(), den.clone()).map_err(|e| format!("lti.cipher: {e}"))
            }
        }
    }

    pub fn noise_filter(&self) -> Result<TransferFunction<f64>, String> {
        TransferFunction::new(self.noise_num.clone(), self.noise_den.clone()).map_err(|e| format!("lti.noise: {e}"))
    }

    pub fn controller_ss(&self) -> Result<StateSpace<f64>, String> {
        match &self.controller {
            ControllerSpec::Builder { pole_radius } => stabilizing_output_feedback(&self.plant()?, *pole_radius)
                .map_err(|e| format!("masking_loop.controller: {e}")),
            ControllerSpec::Explicit { num_y, num_r, den } => {
                let check = |n: &[f64], key: &str| {
                    TransferFunction::new(n.to_vec(), den.clone()).map_err(|e| format!("masking_loop.{key}: {e}"))
                };
                check(num_y, "controller_num_y")?;
                check(num_r, "controller_num_r")?;
                Ok(common_denominator_realization(&[num_y.clone(), num_r.clone()], den))
            }
        }
    }

    /// Validated loop; errors carry the offending config key.
    pub fn systems(&self) -> Result<LoopSystems<f64>, String> {
        let plant = self.plant()?;
        let cipher = self.cipher_tf()?;
        if !cipher.is_stable() {
            return Err("lti.cipher: cipher plant must be stable".into());
        }
        let noise = self.noise_filter()?;
        let controller = self.controller_ss()?;
        LoopSystems::new(plant.to_state_space(), noise.to_state_space(), cipher.to_state_space(), controller)
            .map_err(|e| format!("masking_loop: {e}"))
    }

    pub fn estimator_kind(&self) -> EstimatorKind {
        match self.estimator {
            EstimatorChoice::Auto if self.noise_variance == 0.0 => EstimatorKind::Arx,
            EstimatorChoice::Auto => EstimatorKind::OutputError,
            EstimatorChoice::Fixed(k) => k,
        }
    }

    pub fn structure(&self) -> crate::Result<ModelStructure> {
        Ok(ModelStructure::new(self.nb, self.nf, self.estimator_kind())?
            .with_noise(self.noise_model)
            .with_max_iterations(self.max_iterations))
    }

    /// The fully resolved configuration as TOML; loading it yields `self`.
    pub fn to_toml(&self) -> String {
        fn arr(v: &[f64]) -> Value {
            Value::Array(v.iter().map(|x| Value::Float(*x)).collect())
        }
        fn int(v: usize) -> Value {
            Value::Integer(v as i64)
        }
        let mut scenario = Table::new();
        scenario.insert("id".into(), Value::String(self.id.clone()));
        scenario.insert("seed".into(), Value::Integer(self.seed as i64));
        scenario.insert("out_dir".into(), Value::String(self.out_dir.display().to_string()));

        let mut lti = Table::new();
        lti.insert("plant_num".into(), arr(&self.plant_num));
        lti.insert("plant_den".into(), arr(&self.plant_den));
        match &self.cipher {
            CipherSpec::Shift(d) => {
                lti.insert("cipher_shift".into(), Value::Float(*d));
            }
            CipherSpec::Explicit { num, den } => {
                lti.insert("cipher_num".into(), arr(num));
                lti.insert("cipher_den".into(), arr(den));
            }
        }
        lti.insert("noise_num".into(), arr(&self.noise_num));
        lti.insert("noise_den".into(), arr(&self.noise_den));

        let mut ml = Table::new();
        match &self.controller {
            ControllerSpec::Builder { pole_radius } => {
                ml.insert("controller".into(), Value::String("stabilizing-output-feedback".into()));
                ml.insert("pole_radius".into(), Value::Float(*pole_radius));
            }
            ControllerSpec::Explicit { num_y, num_r, den } => {
                ml.insert("controller".into(), Value::String("explicit".into()));
                ml.insert("controller_num_y".into(), arr(num_y));
                ml.insert("controller_num_r".into(), arr(num_r));
                ml.insert("controller_den".into(), arr(den));
            }
        }
        ml.insert("noise_variance".into(), Value::Float(self.noise_variance));
        ml.insert("excitation_variance".into(), Value::Float(self.excitation_variance));
        ml.insert("placement".into(), Value::String(self.placement.to_string()));
        match self.threshold {
            ThresholdSpec::Fixed(t) => {
                ml.insert("threshold".into(), Value::Float(t));
            }
            ThresholdSpec::Calibrated { quantile, runs } => {
                ml.insert("threshold_quantile".into(), Value::Float(quantile));
                ml.insert("calibration_runs".into(), int(runs));
            }
        }
        ml.insert("identification_steps".into(), int(self.identification_steps));
        ml.insert("attack_steps".into(), int(self.attack_steps));

        let mut ad = Table::new();
        ad.insert("nb".into(), int(self.nb));
        ad.insert("nf".into(), int(self.nf));
        ad.insert("estimator".into(), Value::String(estimator_name(self.estimator).into()));
        match self.noise_model {
            NoiseFamily::None => {
                ad.insert("noise_model".into(), Value::String("none".into()));
            }
            NoiseFamily::Independent { order } => {
                ad.insert("noise_model".into(), Value::String("independent".into()));
                ad.insert("noise_order".into(), int(order));
            }
        }
        match self.zero {
            ZeroSelection::MaxModulus => {
                ad.insert("zero_policy".into(), Value::String("max-modulus".into()));
            }
            ZeroSelection::MinModulus => {
                ad.insert("zero_policy".into(), Value::String("min-modulus".into()));
            }
            ZeroSelection::Index(i) => {
                ad.insert("zero_policy".into(), Value::String("index".into()));
                ad.insert("zero_index".into(), int(i));
            }
        }
        ad.insert("amplitude".into(), Value::Float(self.amplitude));
        ad.insert("start".into(), int(self.start));
        ad.insert("initial_state".into(), Value::String(initial_state_name(self.initial_state).into()));
        ad.insert("max_iterations".into(), int(self.max_iterations));

        let mut pm = Table::new();
        pm.insert("replicates".into(), int(self.replicates));
        pm.insert("grid_points".into(), int(self.grid_points));
        pm.insert("delta".into(), Value::Float(self.delta));

        let mut root = Table::new();
        root.insert("scenario".into(), Value::Table(scenario));
        root.insert("lti".into(), Value::Table(lti));
        root.insert("masking_loop".into(), Value::Table(ml));
        root.insert("adversary".into(), Value::Table(ad));
        root.insert("privacy_metrics".into(), Value::Table(pm));
        toml::to_string(&root).expect("resolved config serializes")
    }
}
