use std::io::Write;
use std::path::Path;

use nalgebra::DVector;

use super::Placement;
use crate::scalar::{to_f64, Real};

/// Every signal of one loop tick.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopRecord<T: Real> {
    pub k: usize,
    pub r: DVector<T>,
    pub u: DVector<T>,
    pub a: DVector<T>,
    pub u_tilde: DVector<T>,
    pub e: DVector<T>,
    pub y: DVector<T>,
    pub v: DVector<T>,
    pub l: DVector<T>,
    pub w: DVector<T>,
    pub y_hat: DVector<T>,
    /// Noise-free, attack-free loop output driven by the same reference.
    pub y_nominal: DVector<T>,
    /// Detector residual at the engine's placement.
    pub d: DVector<T>,
    /// Performance output: the full plant state.
    pub z: DVector<T>,
    pub z_energy_cum: T,
}

/// Signal selector for column extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signal {
    R,
    U,
    A,
    UTilde,
    E,
    Y,
    V,
    L,
    W,
    YHat,
    YNominal,
    D,
    Z,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopTrace<T: Real> {
    pub placement: Placement,
    pub records: Vec<LoopRecord<T>>,
}

impl<T: Real> LoopTrace<T> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn column(&self, signal: Signal) -> Vec<DVector<T>> {
        self.records.iter().map(|r| pick(r, signal).clone()).collect()
    }

    /// First component of a signal, for SISO loops.
    pub fn scalar(&self, signal: Signal) -> Vec<T> {
        self.records.iter().map(|r| pick(r, signal)[0]).collect()
    }

    /// CSV with one row per tick and full double precision.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let Some(first) = self.records.first() else {
            wtr.write_record(CSV_COLUMNS.iter().map(|(n, _)| *n).chain(["z_energy_cum"]))?;
            return wtr.flush().map_err(Into::into);
        };
        let mut header = vec!["k".to_string()];
        for (name, sig) in CSV_COLUMNS.iter().skip(1) {
            let dim = pick(first, *sig).len();
            if dim == 1 {
                header.push((*name).to_string());
            } else {
                header.extend((0..dim).map(|i| format!("{name}_{i}")));
            }
        }
        header.push("z_energy_cum".into());
        wtr.write_record(&header)?;
        for rec in &self.records {
            let mut row = vec![rec.k.to_string()];
            for (_, sig) in CSV_COLUMNS.iter().skip(1) {
                row.extend(pick(rec, *sig).iter().map(|v| fmt_f64(to_f64(*v))));
            }
            row.push(fmt_f64(to_f64(rec.z_energy_cum)));
            wtr.write_record(&row)?;
        }
        wtr.flush().map_err(Into::into)
    }

    pub fn save_csv(&self, path: &Path) -> std::io::Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file)).map_err(std::io::Error::other)
    }
}

// `k` is written separately; its signal slot is unused.
const CSV_COLUMNS: [(&str, Signal); 12] = [
    ("k", Signal::R),
    ("r", Signal::R),
    ("u", Signal::U),
    ("a", Signal::A),
    ("u_tilde", Signal::UTilde),
    ("e", Signal::E),
    ("y", Signal::Y),
    ("v", Signal::V),
    ("l", Signal::L),
    ("w", Signal::W),
    ("y_hat", Signal::YHat),
    ("d", Signal::D),
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn pick<T: Real>(r: &LoopRecord<T>, s: Signal) -> &DVector<T> {
    match s {
        Signal::R => &r.r,
        Signal::U => &r.u,
        Signal::A => &r.a,
        Signal::UTilde => &r.u_tilde,
        Signal::E => &r.e,
        Signal::Y => &r.y,
        Signal::V => &r.v,
        Signal::L => &r.l,
        Signal::W => &r.w,
        Signal::YHat => &r.y_hat,
        Signal::YNominal => &r.y_nominal,
        Signal::D => &r.d,
        Signal::Z => &r.z,
    }
}
