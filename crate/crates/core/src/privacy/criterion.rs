use num_complex::Complex;

use crate::adversary::ModelStructure;
use crate::error::{Error, Result};
use crate::lti::{FrequencyDomain, FrequencyGrid, FrequencyResponse, StateSpace, TransferFunction};
use crate::masking::LoopSystems;
use crate::scalar::{cabs, lit, real, to_f64, unit_circle, Real};

/// Minimum grid size accepted by [`asymptotic_criterion`].
pub const MIN_CRITERION_GRID: usize = 256;

/// The controller's `y -> u` path as a same-tick transfer function.
///
/// The engine's controller emits `u_{k+1}` from `y_k`, so its row is delayed
/// once to give the map from `y_k` to `u_k`.
pub fn feedback_path<T: Real>(controller: &StateSpace<T>) -> Result<TransferFunction<T>> {
    Ok(controller.select_inputs(&[0]).to_transfer_function()?.delayed())
}

fn reference_path<T: Real>(controller: &StateSpace<T>) -> Result<TransferFunction<T>> {
    Ok(controller.select_inputs(&[1]).to_transfer_function()?.delayed())
}

/// Controller-side mechanism `w -> u` as seen by the adversary,
/// `(1 - K (G - S))^{-1} K` with `K` the feedback path.
///
/// It follows from `y_hat = w + (G - S) u`; with `S = G` it reduces to `K`.
pub fn believed_controller<T: Real>(
    plant: &TransferFunction<T>,
    cipher: &TransferFunction<T>,
    feedback: &TransferFunction<T>,
) -> Result<TransferFunction<T>> {
    use crate::poly::{mul, sub};
    let diff = plant.sub(cipher);
    let num = mul(feedback.num(), diff.den());
    let den = sub(&mul(feedback.den(), diff.den()), &mul(feedback.num(), diff.num()));
    TransferFunction::new(num, den)
}

/// Pointwise evaluation of [`believed_controller`]; errors where
/// `1 - K (G - S)` vanishes on the grid.
pub fn believed_controller_response<T: Real>(
    plant: &TransferFunction<T>,
    cipher: &TransferFunction<T>,
    feedback: &TransferFunction<T>,
    grid: &FrequencyGrid<T>,
) -> Result<FrequencyResponse<T>> {
    let values = grid
        .omega()
        .iter()
        .map(|w| {
            let z = unit_circle(*w);
            let k = feedback.eval(z);
            let ret = real(T::one()) - k * (plant.eval(z) - cipher.eval(z));
            if !(cabs(ret) > lit::<T>(1e-12)) {
                return Err(Error::Singular(format!("1 - K(G - S) vanishes at omega = {}", to_f64(*w))));
            }
            Ok(k / ret)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FrequencyResponse { grid: grid.clone(), values })
}

/// Input spectrum split by source. Spectra use `Phi(omega) = lambda |T|^2`
/// for white sources of variance `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumDecomposition<T: Real> {
    pub grid: FrequencyGrid<T>,
    pub total: Vec<T>,
    pub reference: Vec<T>,
    pub noise: Vec<T>,
    /// Closed-loop `e -> u` transfer on the grid.
    pub noise_to_input: Vec<Complex<T>>,
}

/// Closed-loop `r -> u` and `e -> u` spectra; attack-free reconstruction
/// makes the controller see `y`, so `u = (1 - K G)^{-1} (K H e + K_r r)`.
pub fn input_spectrum_decomposition<T: Real>(
    systems: &LoopSystems<T>,
    excitation_variance: f64,
    noise_variance: f64,
    grid: &FrequencyGrid<T>,
) -> Result<SpectrumDecomposition<T>> {
    if !systems.plant().is_siso() || systems.noise_inputs() != 1 {
        return Err(Error::SisoOnly);
    }
    let k = feedback_path(systems.controller())?;
    let kr = reference_path(systems.controller())?;
    let (lr, le) = (lit::<T>(excitation_variance), lit::<T>(noise_variance));
    let mut out = SpectrumDecomposition {
        grid: grid.clone(),
        total: vec![],
        reference: vec![],
        noise: vec![],
        noise_to_input: vec![],
    };
    for w in grid.omega() {
        let z = unit_circle(*w);
        let kz = k.eval(z);
        let sens = real(T::one()) - kz * systems.plant().eval_at(z)?;
        let tur = kr.eval(z) / sens;
        let tue = kz * systems.noise_filter().eval_at(z)? / sens;
        let pr = lr * sq(tur);
        let pe = le * sq(tue);
        out.reference.push(pr);
        out.noise.push(pe);
        out.total.push(pr + pe);
        out.noise_to_input.push(tue);
    }
    Ok(out)
}

fn sq<T: Real>(z: Complex<T>) -> T {
    z.re * z.re + z.im * z.im
}

/// A parameterized set of plant models.
pub trait ModelFamily<T: Real> {
    fn parameter_count(&self) -> usize;
    fn model(&self, theta: &[T]) -> Result<TransferFunction<T>>;
}

/// The identification structure itself: `[f_1..f_nf, b_0..b_nb]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RationalFamily {
    pub structure: ModelStructure,
}

impl<T: Real> ModelFamily<T> for RationalFamily {
    fn parameter_count(&self) -> usize {
        self.structure.nf + self.structure.nb + 1
    }

    fn model(&self, theta: &[T]) -> Result<TransferFunction<T>> {
        check_len(theta, <Self as ModelFamily<T>>::parameter_count(self))?;
        self.structure.model(theta)
    }
}

/// Numerator coefficients over a fixed denominator.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedDenominatorFamily<T> {
    pub den: Vec<T>,
    pub numerator_len: usize,
}

impl<T: Real> ModelFamily<T> for FixedDenominatorFamily<T> {
    fn parameter_count(&self) -> usize {
        self.numerator_len
    }

    fn model(&self, theta: &[T]) -> Result<TransferFunction<T>> {
        check_len(theta, self.numerator_len)?;
        TransferFunction::new(theta.to_vec(), self.den.clone())
    }
}

fn check_len<T>(theta: &[T], want: usize) -> Result<()> {
    if theta.len() != want {
        return Err(Error::DimensionMismatch(format!("expected {want} parameters, got {}", theta.len())));
    }
    Ok(())
}

/// Noise model paired with the family when evaluating the criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseModel {
    /// The true noise filter.
    #[default]
    True,
    /// `H = 1`.
    Unit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticCriterion<T: Real> {
    pub v1: T,
    pub v2: T,
    /// Noise-model bias pull `(H_true - H) Phi_eu / Phi_u` on the grid.
    pub pull: Vec<Complex<T>>,
    /// Integrand of `v1` on the grid.
    pub integrand: Vec<T>,
}

impl<T: Real> AsymptoticCriterion<T> {
    pub fn total(&self) -> T {
        self.v1 + self.v2
    }
}

/// Limit of the prediction-error cost for the model at `theta` fitted to
/// masked data `w = S u + H e`, integrated over `[-pi, pi]`.
pub fn asymptotic_criterion<T: Real, F: ModelFamily<T> + ?Sized>(
    family: &F,
    theta: &[T],
    systems: &LoopSystems<T>,
    noise_model: NoiseModel,
    excitation_variance: f64,
    noise_variance: f64,
    grid: &FrequencyGrid<T>,
) -> Result<AsymptoticCriterion<T>> {
    if grid.len() < MIN_CRITERION_GRID {
        return Err(Error::InvalidGrid(format!("criterion needs at least {MIN_CRITERION_GRID} points")));
    }
    let model = family.model(theta)?;
    let spectra = input_spectrum_decomposition(systems, excitation_variance, noise_variance, grid)?;
    let lambda = lit::<T>(noise_variance);
    let mut integrand = Vec::with_capacity(grid.len());
    let mut integrand2 = Vec::with_capacity(grid.len());
    let mut pull = Vec::with_capacity(grid.len());
    for (j, w) in grid.omega().iter().enumerate() {
        let z = unit_circle(*w);
        let h_true = systems.noise_filter().eval_at(z)?;
        let h = match noise_model {
            NoiseModel::True => h_true,
            NoiseModel::Unit => real(T::one()),
        };
        let phi_u = spectra.total[j];
        let phi_eu = (spectra.noise_to_input[j] * real(lambda)).conj();
        let dh = h_true - h;
        let pi_j = if sq(dh) == T::zero() { real(T::zero()) } else { dh * phi_eu.unscale(phi_u) };
        let err = systems.cipher().eval_at(z)? - model.eval(z) + pi_j;
        let f1 = sq(err) * phi_u / sq(h);
        let f2 = if sq(dh) == T::zero() { T::zero() } else { sq(dh) * (lambda - sq(phi_eu) / phi_u) / sq(h) };
        if !f1.is_finite() || !f2.is_finite() {
            return Err(Error::NonFiniteIntegrand(to_f64(*w)));
        }
        integrand.push(f1);
        integrand2.push(f2);
        pull.push(pi_j);
    }
    let two = lit::<T>(2.0);
    Ok(AsymptoticCriterion {
        v1: two * grid.trapezoid(&integrand),
        v2: two * grid.trapezoid(&integrand2),
        pull,
        integrand,
    })
}
