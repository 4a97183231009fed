use std::io::Write;

use num_complex::Complex;
use rayon::prelude::*;

use super::MAX_FAILURE_FRACTION;
use crate::adversary::{EstimationResult, IdentificationPhase, ModelStructure};
use crate::error::{Error, Result};
use crate::lti::{frequency_response, FrequencyDomain, FrequencyGrid, TransferFunction};
use crate::masking::fmt_f64;
use crate::scalar::{cabs, lit, to_f64, Real};

pub const CURVE_CSV_HEADER: [&str; 8] =
    ["omega", "re_mean", "im_mean", "re_bias", "im_bias", "variance", "mse_vs_G", "lower_bound"];

/// Monte Carlo statistics of the identified frequency response.
///
/// Moments use `1/R` normalization, so the MSE against the cipher plant
/// equals `|bias|^2 + variance` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasVarianceCurve<T: Real> {
    pub grid: FrequencyGrid<T>,
    pub mean: Vec<Complex<T>>,
    /// `mean - S(e^{i omega})`
    pub bias: Vec<Complex<T>>,
    pub variance: Vec<T>,
    /// Per-replicate responses of the successful replicates, in seed order.
    pub responses: Vec<Vec<Complex<T>>>,
    pub replicates: usize,
    pub failures: usize,
    pub sample_size: usize,
}

impl<T: Real> BiasVarianceCurve<T> {
    /// `(1/R) sum |G_i - target|^2` per frequency.
    pub fn mse_against(&self, target: &[Complex<T>]) -> Vec<T> {
        let r = lit::<T>(self.responses.len() as f64);
        (0..self.grid.len())
            .map(|j| self.responses.iter().fold(T::zero(), |acc, g| acc + sq(g[j] - target[j])) / r)
            .collect()
    }
}

fn sq<T: Real>(z: Complex<T>) -> T {
    z.re * z.re + z.im * z.im
}

fn run_replicates<T: Real>(
    phase: &IdentificationPhase<T>,
    structure: &ModelStructure,
    replicates: usize,
) -> Vec<Result<EstimationResult<T>>> {
    (0..replicates).into_par_iter().map(|i| phase.estimate(structure, i as u64)).collect()
}

fn check_failures(failed: usize, total: usize) -> Result<()> {
    if failed as f64 > MAX_FAILURE_FRACTION * total as f64 {
        return Err(Error::UnreliableMonteCarlo { failed, total });
    }
    Ok(())
}

/// Runs `replicates` seeded identifications and aggregates their responses.
/// Failed or non-converged replicates are excluded and counted.
pub fn empirical_bias_variance<T: Real>(
    phase: &IdentificationPhase<T>,
    structure: &ModelStructure,
    replicates: usize,
    grid: &FrequencyGrid<T>,
) -> Result<BiasVarianceCurve<T>> {
    if replicates < 2 {
        return Err(Error::InvalidArgument("need at least 2 replicates".into()));
    }
    let target = frequency_response(phase.systems.cipher(), grid)?.values;
    let mut responses = Vec::with_capacity(replicates);
    let mut failures = 0;
    for outcome in run_replicates(phase, structure, replicates) {
        match outcome {
            Ok(est) if est.is_reliable() => match frequency_response(&est.model, grid) {
                Ok(resp) => responses.push(resp.values),
                Err(_) => failures += 1,
            },
            _ => failures += 1,
        }
    }
    check_failures(failures, replicates)?;
    let r = lit::<T>(responses.len() as f64);
    let mean: Vec<Complex<T>> = (0..grid.len())
        .map(|j| responses.iter().fold(Complex::new(T::zero(), T::zero()), |acc, g| acc + g[j]).unscale(r))
        .collect();
    let bias = mean.iter().zip(&target).map(|(m, s)| *m - *s).collect();
    let variance = (0..grid.len())
        .map(|j| responses.iter().fold(T::zero(), |acc, g| acc + sq(g[j] - mean[j])) / r)
        .collect();
    Ok(BiasVarianceCurve {
        grid: grid.clone(),
        mean,
        bias,
        variance,
        responses,
        replicates,
        failures,
        sample_size: phase.steps,
    })
}

/// Finite-sample MSE bound against the true plant, per frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct MseBound<T: Real> {
    /// `| |B|^2 - |S - G|^2 | + P`
    pub bound: Vec<T>,
    /// `(1/R) sum |G_i - G|^2`
    pub empirical_mse: Vec<T>,
    /// Standard error of the empirical MSE.
    pub standard_error: Vec<T>,
    /// `empirical_mse >= bound - 3 SE` at each frequency.
    pub holds: Vec<bool>,
}

impl<T: Real> MseBound<T> {
    pub fn holds_everywhere(&self) -> bool {
        self.holds.iter().all(|h| *h)
    }
}

pub fn mse_lower_bound<T: Real, G, S>(curve: &BiasVarianceCurve<T>, plant: &G, cipher: &S) -> Result<MseBound<T>>
where
    G: FrequencyDomain<T> + ?Sized,
    S: FrequencyDomain<T> + ?Sized,
{
    let g = frequency_response(plant, &curve.grid)?.values;
    let s = frequency_response(cipher, &curve.grid)?.values;
    let r = curve.responses.len();
    let rt = lit::<T>(r as f64);
    let mut out = MseBound { bound: vec![], empirical_mse: vec![], standard_error: vec![], holds: vec![] };
    for j in 0..curve.grid.len() {
        let bound = (sq(curve.bias[j]) - sq(s[j] - g[j])).abs() + curve.variance[j];
        let errs: Vec<T> = curve.responses.iter().map(|resp| sq(resp[j] - g[j])).collect();
        let mse = errs.iter().fold(T::zero(), |a, e| a + *e) / rt;
        let se = if r > 1 {
            let ss = errs.iter().fold(T::zero(), |a, e| a + (*e - mse) * (*e - mse));
            (ss / lit::<T>((r - 1) as f64)).sqrt() / rt.sqrt()
        } else {
            T::zero()
        };
        // rounding allowance for the noise-free case where both sides agree exactly
        let rounding = lit::<T>(1e-12) * (T::one() + bound);
        out.holds.push(mse >= bound - lit::<T>(3.0) * se - rounding);
        out.bound.push(bound);
        out.empirical_mse.push(mse);
        out.standard_error.push(se);
    }
    Ok(out)
}

impl<T: Real> BiasVarianceCurve<T> {
    /// Curve CSV, one row per grid point.
    pub fn write_csv<W: Write>(&self, bound: &MseBound<T>, out: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(CURVE_CSV_HEADER)?;
        for j in 0..self.grid.len() {
            let row = [
                self.grid.omega()[j],
                self.mean[j].re,
                self.mean[j].im,
                self.bias[j].re,
                self.bias[j].im,
                self.variance[j],
                bound.empirical_mse[j],
                bound.bound[j],
            ];
            wtr.write_record(row.iter().map(|v| fmt_f64(to_f64(*v))))?;
        }
        wtr.flush().map_err(Into::into)
    }
}

/// A scalar property of a model, such as one of its zeros.
pub trait PropertyExtractor<T: Real>: Sync {
    fn name(&self) -> &str;
    /// Value on the true plant.
    fn truth(&self) -> Complex<T>;
    /// Value on an identified model, `None` when undefined there.
    fn extract(&self, model: &TransferFunction<T>) -> Option<Complex<T>>;
}

/// Numerator root closest to a known true zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestZero<T> {
    pub zero: Complex<T>,
}

impl<T: Real> PropertyExtractor<T> for NearestZero<T> {
    fn name(&self) -> &str {
        "plant zero"
    }

    fn truth(&self) -> Complex<T> {
        self.zero
    }

    fn extract(&self, model: &TransferFunction<T>) -> Option<Complex<T>> {
        model
            .zeros()
            .into_iter()
            .min_by(|a, b| cabs(*a - self.zero).partial_cmp(&cabs(*b - self.zero)).unwrap_or(std::cmp::Ordering::Equal))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrivacyVerdict<T: Real> {
    pub property: String,
    pub truth: Complex<T>,
    pub estimates: Vec<Complex<T>>,
    /// `(1/R) sum |psi_i - psi|^2`
    pub mse: T,
    pub standard_error: T,
    pub delta: T,
    /// `mse >= delta`
    pub private: bool,
    pub failures: usize,
}

/// Monte Carlo delta-privacy verdict for the extracted property.
pub fn delta_privacy_check<T: Real, E: PropertyExtractor<T> + ?Sized>(
    extractor: &E,
    phase: &IdentificationPhase<T>,
    structure: &ModelStructure,
    delta: T,
    replicates: usize,
) -> Result<PrivacyVerdict<T>> {
    if replicates < 2 {
        return Err(Error::InvalidArgument("need at least 2 replicates".into()));
    }
    let truth = extractor.truth();
    let mut estimates = Vec::with_capacity(replicates);
    let mut failures = 0;
    for outcome in run_replicates(phase, structure, replicates) {
        match outcome.ok().filter(|e| e.is_reliable()).and_then(|e| extractor.extract(&e.model)) {
            Some(v) => estimates.push(v),
            None => failures += 1,
        }
    }
    check_failures(failures, replicates)?;
    let errs: Vec<T> = estimates.iter().map(|v| sq(*v - truth)).collect();
    let n = lit::<T>(errs.len() as f64);
    let mse = errs.iter().fold(T::zero(), |a, e| a + *e) / n;
    let standard_error = if errs.len() > 1 {
        let ss = errs.iter().fold(T::zero(), |a, e| a + (*e - mse) * (*e - mse));
        (ss / lit::<T>((errs.len() - 1) as f64)).sqrt() / n.sqrt()
    } else {
        T::zero()
    };
    Ok(PrivacyVerdict {
        property: extractor.name().to_string(),
        truth,
        estimates,
        mse,
        standard_error,
        delta,
        private: mse >= delta,
        failures,
    })
}
