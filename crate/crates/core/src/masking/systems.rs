use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lti::StateSpace;
use crate::scalar::{cabs, lit, Real};

/// The subsystems of the masked loop.
///
/// The performance output is the plant's full state vector, so no separate
/// performance map is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopSystems<T: Real> {
    plant: StateSpace<T>,
    noise_filter: StateSpace<T>,
    cipher: StateSpace<T>,
    controller: StateSpace<T>,
}

impl<T: Real> LoopSystems<T> {
    /// Validates dimensions, cipher stability and closed-loop stability.
    ///
    /// `controller` takes the stacked input `[y; r]` (2p inputs) and emits the
    /// next control value (m outputs); `noise_filter` maps the noise to the
    /// p plant outputs.
    pub fn new(
        plant: StateSpace<T>,
        noise_filter: StateSpace<T>,
        cipher: StateSpace<T>,
        controller: StateSpace<T>,
    ) -> Result<Self> {
        let (m, p) = (plant.m(), plant.p());
        if cipher.m() != m || cipher.p() != p {
            return Err(Error::DimensionMismatch(format!(
                "cipher is {}x{}, plant is {p}x{m}",
                cipher.p(),
                cipher.m()
            )));
        }
        if noise_filter.p() != p {
            return Err(Error::DimensionMismatch(format!(
                "noise filter has {} outputs, plant has {p}",
                noise_filter.p()
            )));
        }
        if controller.m() != 2 * p || controller.p() != m {
            return Err(Error::DimensionMismatch(format!(
                "controller is {}x{}, expected {m}x{}",
                controller.p(),
                controller.m(),
                2 * p
            )));
        }
        if !cipher.is_stable() {
            return Err(Error::UnstableCipher);
        }
        let cl = closed_loop_matrix(&plant, &controller);
        let margin = T::one() - lit::<T>(1e-10);
        if cl.complex_eigenvalues().iter().any(|e| cabs(*e) >= margin) {
            return Err(Error::UnstableClosedLoop);
        }
        Ok(Self { plant, noise_filter, cipher, controller })
    }

    pub fn plant(&self) -> &StateSpace<T> {
        &self.plant
    }
    pub fn noise_filter(&self) -> &StateSpace<T> {
        &self.noise_filter
    }
    pub fn cipher(&self) -> &StateSpace<T> {
        &self.cipher
    }
    pub fn controller(&self) -> &StateSpace<T> {
        &self.controller
    }

    pub fn inputs(&self) -> usize {
        self.plant.m()
    }
    pub fn outputs(&self) -> usize {
        self.plant.p()
    }
    pub fn noise_inputs(&self) -> usize {
        self.noise_filter.m()
    }

    /// Same loop with another cipher plant.
    pub fn with_cipher(&self, cipher: StateSpace<T>) -> Result<Self> {
        Self::new(self.plant.clone(), self.noise_filter.clone(), cipher, self.controller.clone())
    }
}

/// State matrix of the unmasked loop over `[x_plant; x_ctrl; u_held]`.
///
/// The controller output computed at tick `k` is applied at `k + 1`, hence
/// the held-input block.
pub fn closed_loop_matrix<T: Real>(plant: &StateSpace<T>, controller: &StateSpace<T>) -> DMatrix<T> {
    let (ng, nc, m, p) = (plant.n(), controller.n(), plant.m(), plant.p());
    let bcy = controller.b().columns(0, p).clone_owned();
    let dcy = controller.d().columns(0, p).clone_owned();
    let dim = ng + nc + m;
    let mut out = DMatrix::zeros(dim, dim);
    out.view_mut((0, 0), (ng, ng)).copy_from(plant.a());
    out.view_mut((0, ng + nc), (ng, m)).copy_from(plant.b());
    out.view_mut((ng, 0), (nc, ng)).copy_from(&(&bcy * plant.c()));
    out.view_mut((ng, ng), (nc, nc)).copy_from(controller.a());
    out.view_mut((ng, ng + nc), (nc, m)).copy_from(&(&bcy * plant.d()));
    out.view_mut((ng + nc, 0), (m, ng)).copy_from(&(&dcy * plant.c()));
    out.view_mut((ng + nc, ng), (m, nc)).copy_from(controller.c());
    out.view_mut((ng + nc, ng + nc), (m, m)).copy_from(&(&dcy * plant.d()));
    out
}
