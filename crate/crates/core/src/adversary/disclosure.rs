use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::masking::LoopTrace;
use crate::scalar::Real;

/// Paired `(u_k, w_k)` samples seen on the channel. Append-only.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DisclosureSet<T: Real> {
    u: Vec<DVector<T>>,
    w: Vec<DVector<T>>,
}

impl<T: Real> DisclosureSet<T> {
    pub fn new() -> Self {
        Self { u: Vec::new(), w: Vec::new() }
    }

    pub fn push(&mut self, u: DVector<T>, w: DVector<T>) -> Result<()> {
        if let (Some(u0), Some(w0)) = (self.u.first(), self.w.first()) {
            if u0.len() != u.len() || w0.len() != w.len() {
                return Err(Error::DimensionMismatch("sample dimensions changed".into()));
            }
        }
        self.u.push(u);
        self.w.push(w);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn inputs(&self) -> &[DVector<T>] {
        &self.u
    }

    pub fn channel(&self) -> &[DVector<T>] {
        &self.w
    }

    /// Scalar streams; errors unless both signals are one-dimensional.
    pub fn siso(&self) -> Result<(Vec<T>, Vec<T>)> {
        if self.u.iter().chain(&self.w).any(|v| v.len() != 1) {
            return Err(Error::SisoOnly);
        }
        Ok((self.u.iter().map(|v| v[0]).collect(), self.w.iter().map(|v| v[0]).collect()))
    }
}

/// Extracts exactly the `(u, w)` columns of a trace.
pub fn eavesdrop<T: Real>(trace: &LoopTrace<T>) -> DisclosureSet<T> {
    DisclosureSet {
        u: trace.records.iter().map(|r| r.u.clone()).collect(),
        w: trace.records.iter().map(|r| r.w.clone()).collect(),
    }
}
