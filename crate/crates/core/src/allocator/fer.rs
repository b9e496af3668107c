//! Empirical decode-failure table of the side-information decoder.
//!
//! The SNR axis is the digital per-use Es/N0 on an AWGN channel,
//! `snr_db + 10 log10(P_d / N_d)`, for the reference hybrid configuration
//! used during calibration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::AllocationPlan;
use crate::channel::ChannelKind;
use crate::digital::{Modulation, Puncture};
use crate::error::{Error, Result};
use crate::link::{Link, Scheme};
use crate::rng::derive_seed;

pub const FER_HEADER: &str = "pattern,B,snr_db,p_f,trials,seed";

/// One calibrated cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FerPoint {
    pub snr_db: f64,
    pub p_f: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FerTable {
    curves: BTreeMap<(Puncture, u8), Vec<FerPoint>>,
}

impl FerTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, pattern: Puncture, bits: u8, point: FerPoint) -> Result<()> {
        if !(0.0..=1.0).contains(&point.p_f) {
            return Err(Error::Format(format!("p_f = {} outside [0, 1]", point.p_f)));
        }
        let curve = self.curves.entry((pattern, bits)).or_default();
        match curve.binary_search_by(|p| p.snr_db.total_cmp(&point.snr_db)) {
            Ok(i) => curve[i] = point,
            Err(i) => curve.insert(i, point),
        }
        Ok(())
    }

    pub fn curve(&self, pattern: Puncture, bits: u8) -> Option<&[FerPoint]> {
        self.curves.get(&(pattern, bits)).map(Vec::as_slice)
    }

    pub fn keys(&self) -> impl Iterator<Item = (Puncture, u8)> + '_ {
        self.curves.keys().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    /// Failure probability at `snr_db`: log-linear between grid points
    /// (linear when an end is zero), clamped outside the grid.
    pub fn lookup(&self, pattern: Puncture, bits: u8, snr_db: f64) -> Result<f64> {
        let curve = self
            .curve(pattern, bits)
            .filter(|c| !c.is_empty())
            .ok_or_else(|| {
                Error::Config(format!("FER table has no curve for {pattern}/B={bits}"))
            })?;
        let first = curve[0];
        let last = curve[curve.len() - 1];
        if snr_db <= first.snr_db {
            return Ok(first.p_f);
        }
        if snr_db >= last.snr_db {
            return Ok(last.p_f);
        }
        let hi = curve.partition_point(|p| p.snr_db <= snr_db);
        let (a, b) = (curve[hi - 1], curve[hi]);
        let t = (snr_db - a.snr_db) / (b.snr_db - a.snr_db);
        Ok(if a.p_f > 0.0 && b.p_f > 0.0 {
            (a.p_f.ln() + t * (b.p_f.ln() - a.p_f.ln())).exp()
        } else {
            a.p_f + t * (b.p_f - a.p_f)
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(FER_HEADER);
        out.push('\n');
        for ((pattern, bits), curve) in &self.curves {
            for p in curve {
                let _ = writeln!(
                    out,
                    "{pattern},{bits},{},{},{},{}",
                    p.snr_db, p.p_f, p.trials, p.seed
                );
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == FER_HEADER => {}
            other => {
                return Err(Error::Format(format!("bad FER header {other:?}")));
            }
        }
        let mut table = Self::new();
        for (i, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 6 {
                return Err(Error::Format(format!(
                    "FER row {}: expected 6 fields",
                    i + 1
                )));
            }
            let bad = |what: &str| Error::Format(format!("FER row {}: bad {what}", i + 1));
            let pattern: Puncture = f[0].parse().map_err(|_| bad("pattern"))?;
            let bits: u8 = f[1].parse().map_err(|_| bad("B"))?;
            let point = FerPoint {
                snr_db: f[2].parse().map_err(|_| bad("snr_db"))?,
                p_f: f[3].parse().map_err(|_| bad("p_f"))?,
                trials: f[4].parse().map_err(|_| bad("trials"))?,
                seed: f[5].parse().map_err(|_| bad("seed"))?,
            };
            table.insert(pattern, bits, point)?;
        }
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Calibration settings.
#[derive(Debug, Clone, PartialEq)]
pub struct FerCalibration {
    /// Analog feature size of the reference configuration.
    pub k: usize,
    pub bits: Vec<u8>,
    pub patterns: Vec<Puncture>,
    pub grid_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub modulation: Modulation,
}

impl FerCalibration {
    /// Every depth 1..=6 and pattern over -10..=30 dB in 2 dB steps.
    pub fn standard(k: usize, trials: usize, seed: u64) -> Self {
        Self {
            k,
            bits: (1..=6).collect(),
            patterns: Puncture::ALL.to_vec(),
            grid_db: (-5..=15).map(|i| 2.0 * i as f64).collect(),
            trials,
            seed,
            modulation: Modulation::Qpsk,
        }
    }
}

/// Hybrid plan with unit power per use on both branches.
pub fn reference_plan(
    n: usize,
    k: usize,
    bits: u8,
    pattern: Puncture,
    modulation: Modulation,
) -> AllocationPlan {
    let analog_uses = crate::analog::analog_uses(k);
    let digital_uses = super::parity_uses(n, bits, pattern, modulation);
    let total = analog_uses + digital_uses;
    AllocationPlan {
        n,
        k,
        total_uses: total,
        analog_uses,
        digital_uses,
        power_total: total as f64,
        power_analog: analog_uses as f64,
        power_digital: digital_uses as f64,
        bits,
        pattern: Some(pattern),
        modulation,
        lambda: 0.5,
    }
}

/// Runs the hybrid scheme on AWGN at every grid point of every
/// `(pattern, B)` pair. Cells run in parallel; each cell's seed depends only
/// on its coordinates.
pub fn calibrate_fer(link: &Link, cal: &FerCalibration) -> Result<FerTable> {
    if cal.trials == 0 {
        return Err(Error::Config("calibration needs at least one trial".into()));
    }
    let link = Link {
        channel: ChannelKind::Awgn,
        ..link.clone()
    };
    let n = link.codec.n();
    let mut cells = Vec::new();
    for &pattern in &cal.patterns {
        for &bits in &cal.bits {
            for (gi, &snr) in cal.grid_db.iter().enumerate() {
                cells.push((pattern, bits, gi, snr));
            }
        }
    }
    let results: Vec<Result<(Puncture, u8, FerPoint)>> = cells
        .par_iter()
        .map(|&(pattern, bits, gi, snr)| {
            let plan = reference_plan(n, cal.k, bits, pattern, cal.modulation);
            let seed = derive_seed(&[cal.seed, pattern as u64, bits as u64, gi as u64]);
            let mut failures = 0usize;
            for t in 0..cal.trials {
                let out = link.run_trial(Scheme::Da, &plan, snr, derive_seed(&[seed, t as u64]))?;
                failures += usize::from(out.frame_error);
            }
            let point = FerPoint {
                snr_db: snr,
                p_f: failures as f64 / cal.trials as f64,
                trials: cal.trials,
                seed,
            };
            Ok((pattern, bits, point))
        })
        .collect();
    let mut table = FerTable::new();
    for r in results {
        let (pattern, bits, point) = r?;
        table.insert(pattern, bits, point)?;
    }
    Ok(table)
}
