//! The dynamic-masking closed loop: plant, digital twin, cipher plant,
//! channel, controller-side reconstruction, controller and detectors.

mod detector;
mod engine;
mod systems;
mod trace;

pub use detector::{calibrate_threshold, detect, performance_energy, DetectorReport, Placement};
pub use engine::{build_loop, ControllerFeed, LoopEngine, Subsystem};
pub use systems::{closed_loop_matrix, LoopSystems};
pub use trace::{fmt_f64, LoopRecord, LoopTrace, Signal};
