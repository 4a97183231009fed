use rayon::prelude::*;

use super::{build_loop, LoopSystems, LoopTrace};
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::{lit, Real};

/// Where the residual energy detector sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    /// At the plant output (smart sensor), watching `y`.
    #[default]
    D1,
    /// At the controller, watching the reconstructed `y_hat`.
    D2,
}

impl std::fmt::Display for Placement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Placement::D1 => "d1",
            Placement::D2 => "d2",
        })
    }
}

impl std::str::FromStr for Placement {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "d1" => Ok(Placement::D1),
            "d2" => Ok(Placement::D2),
            other => Err(format!("unknown placement {other:?} (expected d1 or d2)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorReport<T> {
    pub placement: Placement,
    pub threshold: T,
    /// `sum_{j <= k} |d_j|^2` for every tick `k`.
    pub cumulative_energy: Vec<T>,
    pub alarm: bool,
    pub first_alarm: Option<usize>,
}

impl<T: Real> DetectorReport<T> {
    pub fn final_energy(&self) -> T {
        self.cumulative_energy.last().copied().unwrap_or_else(T::zero)
    }
}

/// Residual energy detector over a recorded trace.
///
/// The residual is the monitored signal minus the noise-free, attack-free
/// loop output under the same reference (`d = y` when `r = 0`).
pub fn detect<T: Real>(trace: &LoopTrace<T>, placement: Placement, threshold: T) -> DetectorReport<T> {
    let mut acc = T::zero();
    let mut first_alarm = None;
    let cumulative_energy = trace
        .records
        .iter()
        .map(|rec| {
            let monitored = match placement {
                Placement::D1 => &rec.y,
                Placement::D2 => &rec.y_hat,
            };
            acc += (monitored - &rec.y_nominal).norm_squared();
            if first_alarm.is_none() && acc > threshold {
                first_alarm = Some(rec.k);
            }
            acc
        })
        .collect();
    DetectorReport { placement, threshold, cumulative_energy, alarm: first_alarm.is_some(), first_alarm }
}

/// `sum_{k=0}^{horizon} z_k^T z_k` (clamped to the trace length).
pub fn performance_energy<T: Real>(trace: &LoopTrace<T>, horizon: usize) -> T {
    trace
        .records
        .iter()
        .take(horizon.saturating_add(1))
        .fold(T::zero(), |acc, r| acc + r.z.norm_squared())
}

/// Threshold from the `quantile` of the attack-free residual energy over
/// `runs` seeded noisy runs with `r = 0`.
pub fn calibrate_threshold<T: Real>(
    systems: &LoopSystems<T>,
    placement: Placement,
    noise_variance: f64,
    horizon: usize,
    quantile: f64,
    runs: usize,
    seed: u64,
) -> Result<T> {
    if runs == 0 || !(0.0..=1.0).contains(&quantile) {
        return Err(Error::InvalidArgument("calibration needs runs > 0 and quantile in [0, 1]".into()));
    }
    let (m, p, q) = (systems.inputs(), systems.outputs(), systems.noise_inputs());
    let mut energies = (0..runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = rng::stream(seed, rng::CALIBRATION, run as u64);
            let e: Vec<T> = rng::white_noise(&mut rng, horizon * q, noise_variance);
            let e: Vec<_> = e.chunks(q).map(nalgebra::DVector::from_column_slice).collect();
            let zeros_r = vec![nalgebra::DVector::zeros(p); horizon];
            let zeros_a = vec![nalgebra::DVector::zeros(m); horizon];
            let mut engine = build_loop(systems.clone(), T::zero(), horizon)?.with_placement(placement);
            let trace = engine.run(&zeros_r, &zeros_a, &e)?;
            Ok(detect(&trace, placement, T::zero()).final_energy())
        })
        .collect::<Result<Vec<T>>>()?;
    energies.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    // nearest-rank quantile
    let rank = ((quantile * runs as f64).ceil() as usize).clamp(1, runs);
    Ok(energies[rank - 1].max(lit(0.0)))
}
