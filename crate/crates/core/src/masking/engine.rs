use nalgebra::DVector;

use super::{LoopRecord, LoopSystems, LoopTrace, Placement};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Subsystem whose state can be overridden before or during a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    Plant,
    /// Plant-side digital twin `-G`.
    Twin,
    /// Plant-side cipher plant `S`.
    Cipher,
    NoiseFilter,
    /// Controller-side copy of `G`.
    PlantCopy,
    /// Controller-side copy of `S`.
    CipherCopy,
    Controller,
}

/// What the controller is fed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ControllerFeed {
    /// `y_hat` rebuilt from the channel signal `w`.
    #[default]
    Reconstructed,
    /// The plant output `y` itself (loop without a network in between).
    Direct,
}

#[derive(Debug, Clone)]
struct Nominal<T: Real> {
    plant: DVector<T>,
    controller: DVector<T>,
    u: DVector<T>,
}

/// Stateful simulator of the masked loop. One engine per thread.
///
/// Each tick: the plant side produces `y`, `v = -G u~`, `l = S u~` and sends
/// `w = y + v + l`; the controller side rebuilds `y_hat = w + G u - S u`
/// with its own copies driven by `u` (it never sees the attack), then the
/// controller computes the control value applied on the next tick.
#[derive(Debug, Clone)]
pub struct LoopEngine<T: Real> {
    systems: LoopSystems<T>,
    threshold: T,
    horizon: usize,
    placement: Placement,
    feed: ControllerFeed,
    plant: DVector<T>,
    twin: DVector<T>,
    cipher: DVector<T>,
    noise: DVector<T>,
    plant_copy: DVector<T>,
    cipher_copy: DVector<T>,
    controller: DVector<T>,
    held_u: DVector<T>,
    nominal: Nominal<T>,
    k: usize,
    z_energy: T,
    d_energy: T,
}

/// Zero-initialized engine over at most `horizon` ticks.
pub fn build_loop<T: Real>(systems: LoopSystems<T>, threshold: T, horizon: usize) -> Result<LoopEngine<T>> {
    LoopEngine::new(systems, threshold, horizon)
}

impl<T: Real> LoopEngine<T> {
    pub fn new(systems: LoopSystems<T>, threshold: T, horizon: usize) -> Result<Self> {
        if !(threshold >= T::zero()) {
            return Err(Error::InvalidArgument("detector threshold must be non-negative".into()));
        }
        let z = |n: usize| DVector::zeros(n);
        let g = systems.plant();
        Ok(Self {
            threshold,
            horizon,
            placement: Placement::default(),
            feed: ControllerFeed::default(),
            plant: z(g.n()),
            twin: z(g.n()),
            cipher: z(systems.cipher().n()),
            noise: z(systems.noise_filter().n()),
            plant_copy: z(g.n()),
            cipher_copy: z(systems.cipher().n()),
            controller: z(systems.controller().n()),
            held_u: z(g.m()),
            nominal: Nominal { plant: z(g.n()), controller: z(systems.controller().n()), u: z(g.m()) },
            k: 0,
            z_energy: T::zero(),
            d_energy: T::zero(),
            systems,
        })
    }

    pub fn with_placement(mut self, placement: Placement) -> Self {
        self.placement = placement;
        self
    }

    pub fn with_feed(mut self, feed: ControllerFeed) -> Self {
        self.feed = feed;
        self
    }

    pub fn systems(&self) -> &LoopSystems<T> {
        &self.systems
    }

    pub fn placement(&self) -> Placement {
        self.placement
    }

    pub fn threshold(&self) -> T {
        self.threshold
    }

    pub fn tick(&self) -> usize {
        self.k
    }

    /// Online alarm: cumulative residual energy above the threshold.
    pub fn alarm(&self) -> bool {
        self.d_energy > self.threshold
    }

    pub fn state(&self, which: Subsystem) -> &DVector<T> {
        match which {
            Subsystem::Plant => &self.plant,
            Subsystem::Twin => &self.twin,
            Subsystem::Cipher => &self.cipher,
            Subsystem::NoiseFilter => &self.noise,
            Subsystem::PlantCopy => &self.plant_copy,
            Subsystem::CipherCopy => &self.cipher_copy,
            Subsystem::Controller => &self.controller,
        }
    }

    pub fn set_state(&mut self, which: Subsystem, x: DVector<T>) -> Result<()> {
        let slot = match which {
            Subsystem::Plant => &mut self.plant,
            Subsystem::Twin => &mut self.twin,
            Subsystem::Cipher => &mut self.cipher,
            Subsystem::NoiseFilter => &mut self.noise,
            Subsystem::PlantCopy => &mut self.plant_copy,
            Subsystem::CipherCopy => &mut self.cipher_copy,
            Subsystem::Controller => &mut self.controller,
        };
        if slot.len() != x.len() {
            return Err(Error::DimensionMismatch(format!(
                "{which:?} state has length {}, got {}",
                slot.len(),
                x.len()
            )));
        }
        *slot = x;
        Ok(())
    }

    pub fn with_state(mut self, which: Subsystem, x: DVector<T>) -> Result<Self> {
        self.set_state(which, x)?;
        Ok(self)
    }

    /// One synchronized tick with reference `r`, injected attack `a` and noise `e`.
    pub fn step(&mut self, r: &DVector<T>, a: &DVector<T>, e: &DVector<T>) -> Result<LoopRecord<T>> {
        if self.k >= self.horizon {
            return Err(Error::HorizonExceeded(self.horizon));
        }
        let (m, p) = (self.systems.inputs(), self.systems.outputs());
        check_len("reference", r, p)?;
        check_len("attack", a, m)?;
        check_len("noise", e, self.systems.noise_inputs())?;
        let g = self.systems.plant();
        let s = self.systems.cipher();
        let h = self.systems.noise_filter();
        let c = self.systems.controller();

        let u = self.held_u.clone();
        let u_tilde = &u + a;

        // plant side
        let y = g.output(&self.plant, &u_tilde) + h.output(&self.noise, e);
        let v = -g.output(&self.twin, &u_tilde);
        let l = s.output(&self.cipher, &u_tilde);
        let w = &y + &v + &l;

        // controller side
        let y_hat = &w + g.output(&self.plant_copy, &u) - s.output(&self.cipher_copy, &u);

        // nominal loop for the residual generator
        let y_nominal = g.output(&self.nominal.plant, &self.nominal.u);
        let nominal_in = stack(&y_nominal, r);
        let nominal_next_u = c.output(&self.nominal.controller, &nominal_in);
        self.nominal.controller = c.next_state(&self.nominal.controller, &nominal_in);
        self.nominal.plant = g.next_state(&self.nominal.plant, &self.nominal.u);
        self.nominal.u = nominal_next_u;

        let d = match self.placement {
            Placement::D1 => &y - &y_nominal,
            Placement::D2 => &y_hat - &y_nominal,
        };
        self.d_energy += d.norm_squared();
        let z = self.plant.clone();
        self.z_energy += z.norm_squared();

        let fed = match self.feed {
            ControllerFeed::Reconstructed => &y_hat,
            ControllerFeed::Direct => &y,
        };
        let ctrl_in = stack(fed, r);
        let next_u = c.output(&self.controller, &ctrl_in);

        self.plant = g.next_state(&self.plant, &u_tilde);
        self.twin = g.next_state(&self.twin, &u_tilde);
        self.cipher = s.next_state(&self.cipher, &u_tilde);
        self.noise = h.next_state(&self.noise, e);
        self.plant_copy = g.next_state(&self.plant_copy, &u);
        self.cipher_copy = s.next_state(&self.cipher_copy, &u);
        self.controller = c.next_state(&self.controller, &ctrl_in);
        self.held_u = next_u;

        let record = LoopRecord {
            k: self.k,
            r: r.clone(),
            u,
            a: a.clone(),
            u_tilde,
            e: e.clone(),
            y,
            v,
            l,
            w,
            y_hat,
            y_nominal,
            d,
            z,
            z_energy_cum: self.z_energy,
        };
        self.k += 1;
        Ok(record)
    }

    /// Steps through equal-length reference, attack and noise sequences.
    pub fn run(&mut self, r: &[DVector<T>], a: &[DVector<T>], e: &[DVector<T>]) -> Result<LoopTrace<T>> {
        if r.len() != a.len() || r.len() != e.len() {
            return Err(Error::DimensionMismatch(format!(
                "sequence lengths differ: r {}, a {}, e {}",
                r.len(),
                a.len(),
                e.len()
            )));
        }
        let records = r
            .iter()
            .zip(a)
            .zip(e)
            .map(|((r, a), e)| self.step(r, a, e))
            .collect::<Result<Vec<_>>>()?;
        Ok(LoopTrace { placement: self.placement, records })
    }

    /// [`run`](Self::run) for scalar signals.
    pub fn run_siso(&mut self, r: &[T], a: &[T], e: &[T]) -> Result<LoopTrace<T>> {
        let wrap = |s: &[T]| s.iter().map(|v| DVector::from_element(1, *v)).collect::<Vec<_>>();
        self.run(&wrap(r), &wrap(a), &wrap(e))
    }
}

fn check_len<T: Real>(what: &str, v: &DVector<T>, want: usize) -> Result<()> {
    if v.len() != want {
        return Err(Error::DimensionMismatch(format!("{what} has length {}, expected {want}", v.len())));
    }
    Ok(())
}

fn stack<T: Real>(top: &DVector<T>, bottom: &DVector<T>) -> DVector<T> {
    let mut out = DVector::zeros(top.len() + bottom.len());
    out.rows_mut(0, top.len()).copy_from(top);
    out.rows_mut(top.len(), bottom.len()).copy_from(bottom);
    out
}
