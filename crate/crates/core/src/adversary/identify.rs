//! Prediction-error identification from disclosed channel data.
//!
//! Model: `w_k = B(q)/F(q) u_k (+ noise)`, `B` of degree `nb`, monic `F` of
//! degree `nf`, input delay `nf - nb` so the model is proper. Parameters are
//! ordered `[f_1..f_nf, b_0..b_nb, d_1..d_nd]`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::DisclosureSet;
use crate::error::{Error, Result};
use crate::lti::TransferFunction;
use crate::poly;
use crate::scalar::{cabs, lit, to_f64, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    /// Closed-form least squares on the equation-error form.
    Arx,
    /// Output-error fit by damped Gauss-Newton from the ARX solution.
    OutputError,
}

/// Noise model paired with the plant model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum NoiseFamily {
    /// White additive noise, `H = 1`.
    None,
    /// `H = 1 / D(q)` parameterized independently of the plant model.
    Independent { order: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelStructure {
    pub nb: usize,
    pub nf: usize,
    pub noise: NoiseFamily,
    pub estimator: EstimatorKind,
    pub max_iterations: usize,
}

impl ModelStructure {
    pub fn new(nb: usize, nf: usize, estimator: EstimatorKind) -> Result<Self> {
        if nb < 1 || nf < nb {
            return Err(Error::InvalidStructure(format!("need 1 <= nb <= nf, got nb = {nb}, nf = {nf}")));
        }
        Ok(Self { nb, nf, noise: NoiseFamily::None, estimator, max_iterations: 200 })
    }

    pub fn with_noise(mut self, noise: NoiseFamily) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_max_iterations(mut self, iters: usize) -> Self {
        self.max_iterations = iters;
        self
    }

    pub fn delay(&self) -> usize {
        self.nf - self.nb
    }

    fn noise_order(&self) -> usize {
        match (self.estimator, self.noise) {
            (EstimatorKind::OutputError, NoiseFamily::Independent { order }) => order,
            _ => 0,
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.nf + self.nb + 1 + self.noise_order()
    }

    /// Minimum sample count accepted by [`identify`].
    pub fn min_samples(&self) -> usize {
        10 * (self.nb + self.nf)
    }

    /// Plant model for a parameter vector.
    pub fn model<T: Real>(&self, theta: &[T]) -> Result<TransferFunction<T>> {
        let mut den = vec![T::one()];
        den.extend_from_slice(&theta[..self.nf]);
        TransferFunction::new(theta[self.nf..self.nf + self.nb + 1].to_vec(), den)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult<T: Real> {
    pub structure: ModelStructure,
    pub theta: DVector<T>,
    pub model: TransferFunction<T>,
    /// `1 / D(q)` when an independent noise model was fitted.
    pub noise_model: Option<TransferFunction<T>>,
    /// Mean squared prediction error at the estimate.
    pub cost: T,
    pub iterations: usize,
    pub converged: bool,
    pub sample_size: usize,
    pub cost_trace: Vec<T>,
}

impl<T: Real> EstimationResult<T> {
    /// Non-converged estimates are flagged, not discarded.
    pub fn is_reliable(&self) -> bool {
        self.converged
    }

    pub fn numerator_roots(&self) -> Vec<Complex<T>> {
        self.model.zeros()
    }

    pub fn denominator_roots(&self) -> Vec<Complex<T>> {
        self.model.poles()
    }

    /// Structured text record (TOML).
    pub fn to_record(&self) -> String {
        let f = |v: &[T]| v.iter().map(|x| to_f64(*x)).collect::<Vec<f64>>();
        let roots = |v: Vec<Complex<T>>| v.into_iter().map(|z| [to_f64(z.re), to_f64(z.im)]).collect::<Vec<_>>();
        let record = EstimationRecord {
            estimator: self.structure.estimator,
            nb: self.structure.nb,
            nf: self.structure.nf,
            noise: self.structure.noise,
            sample_size: self.sample_size,
            theta: f(self.theta.as_slice()),
            numerator: f(self.model.num()),
            denominator: f(self.model.den()),
            numerator_roots: roots(self.numerator_roots()),
            denominator_roots: roots(self.denominator_roots()),
            cost: to_f64(self.cost),
            iterations: self.iterations,
            converged: self.converged,
            reliable: self.is_reliable(),
            cost_trace: f(&self.cost_trace),
        };
        toml::to_string(&record).expect("estimation record serializes")
    }
}

#[derive(Serialize)]
struct EstimationRecord {
    estimator: EstimatorKind,
    nb: usize,
    nf: usize,
    noise: NoiseFamily,
    sample_size: usize,
    theta: Vec<f64>,
    numerator: Vec<f64>,
    denominator: Vec<f64>,
    numerator_roots: Vec<[f64; 2]>,
    denominator_roots: Vec<[f64; 2]>,
    cost: f64,
    iterations: usize,
    converged: bool,
    reliable: bool,
    cost_trace: Vec<f64>,
}

/// Fits the model structure to the disclosed `(u, w)` data.
pub fn identify<T: Real>(data: &DisclosureSet<T>, structure: &ModelStructure) -> Result<EstimationResult<T>> {
    let (u, w) = data.siso()?;
    if u.len() < structure.min_samples() {
        return Err(Error::InsufficientData { needed: structure.min_samples(), got: u.len() });
    }
    let arx = arx(&u, &w, structure)?;
    match structure.estimator {
        EstimatorKind::Arx => Ok(arx),
        EstimatorKind::OutputError => {
            let oe = output_error(&u, &w, structure, arx)?;
            match structure.noise {
                NoiseFamily::None => Ok(oe),
                NoiseFamily::Independent { order } => independent_noise(&u, &w, structure, order, oe),
            }
        }
    }
}

fn arx<T: Real>(u: &[T], w: &[T], s: &ModelStructure) -> Result<EstimationResult<T>> {
    let (nf, nb, nk) = (s.nf, s.nb, s.delay());
    let start = nf.max(nk + nb);
    let rows = u.len() - start;
    let dim = nf + nb + 1;
    let phi = DMatrix::from_fn(rows, dim, |i, j| {
        let k = start + i;
        if j < nf {
            -w[k - 1 - j]
        } else {
            u[k - nk - (j - nf)]
        }
    });
    let target = DVector::from_fn(rows, |i, _| w[start + i]);
    let svd = phi.clone().svd(true, true);
    let sv = &svd.singular_values;
    let max = sv.iter().fold(T::zero(), |a, s| a.max(*s));
    let min = sv.iter().fold(max, |a, s| a.min(*s));
    if max == T::zero() || min <= lit::<T>(1e-10) * max {
        return Err(Error::NotPersistentlyExciting);
    }
    let theta = svd.solve(&target, T::zero()).map_err(|_| Error::NotPersistentlyExciting)?;
    let resid = &target - &phi * &theta;
    let cost = resid.norm_squared() / lit::<T>(rows as f64);
    let model = s.model(theta.as_slice())?;
    let arx_structure = ModelStructure { estimator: EstimatorKind::Arx, noise: NoiseFamily::None, ..*s };
    Ok(EstimationResult {
        structure: arx_structure,
        theta,
        model,
        noise_model: None,
        cost,
        iterations: 0,
        converged: true,
        sample_size: u.len(),
        cost_trace: vec![cost],
    })
}

/// Simulated output and its parameter sensitivities `d w_hat / d theta`.
fn oe_predict<T: Real>(theta: &[T], u: &[T], s: &ModelStructure) -> (Vec<T>, DMatrix<T>) {
    let (nf, nb, nk) = (s.nf, s.nb, s.delay());
    let n = u.len();
    let dim = nf + nb + 1;
    let f = &theta[..nf];
    let b = &theta[nf..dim];
    let mut what = vec![T::zero(); n];
    let mut psi = DMatrix::zeros(n, dim);
    for k in 0..n {
        let mut acc = T::zero();
        for (j, bj) in b.iter().enumerate() {
            if k >= nk + j {
                acc += *bj * u[k - nk - j];
            }
        }
        for (i, fi) in f.iter().enumerate() {
            if k > i {
                acc -= *fi * what[k - 1 - i];
            }
        }
        what[k] = acc;
        for col in 0..dim {
            let mut g = if col < nf {
                if k > col {
                    -what[k - 1 - col]
                } else {
                    T::zero()
                }
            } else {
                let j = col - nf;
                if k >= nk + j {
                    u[k - nk - j]
                } else {
                    T::zero()
                }
            };
            for (i, fi) in f.iter().enumerate() {
                if k > i {
                    g -= *fi * psi[(k - 1 - i, col)];
                }
            }
            psi[(k, col)] = g;
        }
    }
    (what, psi)
}

fn is_monic_stable<T: Real>(coeffs: &[T]) -> bool {
    let mut p = vec![T::one()];
    p.extend_from_slice(coeffs);
    poly::roots(&p).iter().all(|r| cabs(*r) < T::one())
}

/// Reflects roots outside the unit circle to `1 / conj(root)`.
fn stabilize<T: Real>(coeffs: &[T]) -> Vec<T> {
    let mut p = vec![T::one()];
    p.extend_from_slice(coeffs);
    let roots: Vec<Complex<T>> = poly::roots(&p)
        .into_iter()
        .map(|r| {
            let m = cabs(r);
            if m >= T::one() {
                r.scale(lit::<T>(0.99) / (m * m))
            } else {
                r
            }
        })
        .collect();
    poly::from_roots(&roots)[1..].to_vec()
}

/// Residuals `eps` and `psi = -d eps / d theta` at `theta`.
type Linearization<T> = (DVector<T>, DMatrix<T>);
type Linearize<'a, T> = Box<dyn Fn(&[T]) -> Linearization<T> + 'a>;

struct GaussNewton<'a, T: Real> {
    max_iterations: usize,
    /// Leading parameters forming the monic denominator that must stay stable.
    stable_block: usize,
    evaluate: Linearize<'a, T>,
}

struct GnOutcome<T: Real> {
    theta: DVector<T>,
    cost: T,
    iterations: usize,
    converged: bool,
    cost_trace: Vec<T>,
}

impl<T: Real> GaussNewton<'_, T> {
    fn run(&self, theta0: DVector<T>) -> GnOutcome<T> {
        let mut theta = theta0;
        let (mut eps, mut psi) = (self.evaluate)(theta.as_slice());
        let n = lit::<T>(eps.len() as f64);
        let mut cost = eps.norm_squared() / n;
        let mut trace = vec![cost];
        let tiny = lit::<T>(1e-28);
        for iter in 1..=self.max_iterations {
            if cost <= tiny {
                return GnOutcome { theta, cost, iterations: iter - 1, converged: true, cost_trace: trace };
            }
            let step = match psi.clone().svd(true, true).solve(&eps, lit(1e-12)) {
                Ok(s) => s,
                Err(_) => break,
            };
            let mut alpha = T::one();
            let mut accepted = None;
            for _ in 0..30 {
                let cand = &theta + &step * alpha;
                if is_monic_stable(&cand.as_slice()[..self.stable_block]) {
                    let (e, p) = (self.evaluate)(cand.as_slice());
                    let c = e.norm_squared() / n;
                    if c.is_finite() && c < cost {
                        accepted = Some((cand, e, p, c));
                        break;
                    }
                }
                alpha *= lit(0.5);
            }
            let scale = T::one() + theta.norm();
            match accepted {
                Some((cand, e, p, c)) => {
                    let moved = (&cand - &theta).norm();
                    let improvement = cost - c;
                    theta = cand;
                    eps = e;
                    psi = p;
                    cost = c;
                    trace.push(cost);
                    if improvement <= lit::<T>(1e-12) * cost || moved <= lit::<T>(1e-10) * scale {
                        return GnOutcome { theta, cost, iterations: iter, converged: true, cost_trace: trace };
                    }
                }
                None => {
                    // No descent left along the Gauss-Newton direction.
                    let converged = step.norm() <= lit::<T>(1e-6) * scale;
                    return GnOutcome { theta, cost, iterations: iter, converged, cost_trace: trace };
                }
            }
        }
        GnOutcome { theta, cost, iterations: self.max_iterations, converged: false, cost_trace: trace }
    }
}

fn output_error<T: Real>(
    u: &[T],
    w: &[T],
    s: &ModelStructure,
    init: EstimationResult<T>,
) -> Result<EstimationResult<T>> {
    let nf = s.nf;
    let mut theta0 = init.theta.clone();
    if !is_monic_stable(&theta0.as_slice()[..nf]) {
        let f = stabilize(&theta0.as_slice()[..nf]);
        theta0.rows_mut(0, nf).copy_from_slice(&f);
    }
    let gn = GaussNewton {
        max_iterations: s.max_iterations,
        stable_block: nf,
        evaluate: Box::new(|theta: &[T]| {
            let (what, psi) = oe_predict(theta, u, s);
            let eps = DVector::from_fn(u.len(), |k, _| w[k] - what[k]);
            (eps, psi)
        }),
    };
    let out = gn.run(theta0);
    let model = s.model(out.theta.as_slice())?;
    let structure = ModelStructure { noise: NoiseFamily::None, ..*s };
    Ok(EstimationResult {
        structure,
        theta: out.theta,
        model,
        noise_model: None,
        cost: out.cost,
        iterations: out.iterations,
        converged: out.converged,
        sample_size: u.len(),
        cost_trace: out.cost_trace,
    })
}

fn independent_noise<T: Real>(
    u: &[T],
    w: &[T],
    s: &ModelStructure,
    order: usize,
    init: EstimationResult<T>,
) -> Result<EstimationResult<T>> {
    let dim_g = s.nf + s.nb + 1;
    let mut theta0 = DVector::zeros(dim_g + order);
    theta0.rows_mut(0, dim_g).copy_from(&init.theta);
    let n = u.len();
    let gn = GaussNewton {
        max_iterations: s.max_iterations,
        stable_block: s.nf,
        evaluate: Box::new(|theta: &[T]| {
            let (what, psi_g) = oe_predict(&theta[..dim_g], u, s);
            let d = &theta[dim_g..];
            let resid: Vec<T> = (0..n).map(|k| w[k] - what[k]).collect();
            let filt = |k: usize, f: &dyn Fn(usize) -> T| {
                let mut acc = f(k);
                for (i, di) in d.iter().enumerate() {
                    if k > i {
                        acc += *di * f(k - 1 - i);
                    }
                }
                acc
            };
            let eps = DVector::from_fn(n, |k, _| filt(k, &|j| resid[j]));
            let psi = DMatrix::from_fn(n, dim_g + order, |k, col| {
                if col < dim_g {
                    filt(k, &|j| psi_g[(j, col)])
                } else {
                    let lag = col - dim_g + 1;
                    if k >= lag {
                        -resid[k - lag]
                    } else {
                        T::zero()
                    }
                }
            });
            (eps, psi)
        }),
    };
    let out = gn.run(theta0);
    let model = s.model(&out.theta.as_slice()[..dim_g])?;
    let mut d = vec![T::one()];
    d.extend_from_slice(&out.theta.as_slice()[dim_g..]);
    let noise_model = TransferFunction::new(poly::pad_to(&[T::one()], d.len()), d)?;
    Ok(EstimationResult {
        structure: *s,
        theta: out.theta,
        model,
        noise_model: Some(noise_model),
        cost: out.cost,
        iterations: out.iterations + init.iterations,
        converged: out.converged && init.converged,
        sample_size: n,
        cost_trace: init.cost_trace.into_iter().chain(out.cost_trace).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure_validation() {
        assert!(ModelStructure::new(0, 2, EstimatorKind::Arx).is_err());
        assert!(ModelStructure::new(3, 2, EstimatorKind::Arx).is_err());
        let s = ModelStructure::new(1, 2, EstimatorKind::Arx).unwrap();
        assert_eq!(s.delay(), 1);
        assert_eq!(s.parameter_count(), 4);
        assert_eq!(s.min_samples(), 30);
    }

    #[test]
    fn stabilize_reflects_roots() {
        // F = (1 - 2 q^-1)(1 - 0.5 q^-1)
        let f = stabilize(&[-2.5, 1.0]);
        assert!(is_monic_stable(&f));
    }

    #[test]
    fn oe_sensitivities_match_finite_differences() {
        let s = ModelStructure::new(1, 2, EstimatorKind::OutputError).unwrap();
        let u: Vec<f64> = (0..40).map(|k| ((k * 37 % 11) as f64 - 5.0) / 5.0).collect();
        let theta = [-0.7, 0.1, 1.0, -1.3];
        let (base, psi) = oe_predict(&theta, &u, &s);
        for col in 0..4 {
            let mut t = theta;
            let h = 1e-7;
            t[col] += h;
            let (pert, _) = oe_predict(&t, &u, &s);
            for k in 0..u.len() {
                let fd = (pert[k] - base[k]) / h;
                assert!((fd - psi[(k, col)]).abs() < 1e-5 * (1.0 + fd.abs()), "col {col} k {k}");
            }
        }
    }
}
