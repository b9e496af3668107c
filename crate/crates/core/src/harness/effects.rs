//! Qualitative effect detectors over a sweep CSV.

use std::collections::BTreeMap;
use std::fmt;

use super::{fmt_g9, CSV_HEADER};
use crate::error::{Error, Result};
use crate::link::Scheme;

/// Jump factor between adjacent grid points that counts as a cliff.
pub const CLIFF_FACTOR: f64 = 5.0;
/// Relative change between the top two points below which a curve is flat.
pub const SATURATION_TOLERANCE: f64 = 0.05;
/// Hybrid-over-analog ratio at the top point that counts as improvement.
pub const GRACEFUL_RATIO: f64 = 0.8;

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeEffects {
    pub scheme: Scheme,
    pub cliff_snr: Option<f64>,
    pub saturation_floor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectReport {
    pub schemes: Vec<SchemeEffects>,
    /// `None` unless both `da` and `analog` rows are present.
    pub graceful: Option<bool>,
}

impl EffectReport {
    pub fn scheme(&self, scheme: Scheme) -> Option<&SchemeEffects> {
        self.schemes.iter().find(|s| s.scheme == scheme)
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), fmt_g9)
}

impl fmt::Display for EffectReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.schemes {
            writeln!(
                f,
                "scheme={} cliff_snr={} saturation_floor={}",
                s.scheme,
                opt(s.cliff_snr),
                opt(s.saturation_floor)
            )?;
        }
        let g = match self.graceful {
            Some(true) => "true",
            Some(false) => "false",
            None => "none",
        };
        writeln!(f, "graceful={g}")
    }
}

/// `(scheme, snr_db, data_mse)` triples from a sweep CSV.
pub fn parse_sweep_csv(text: &str) -> Result<Vec<(Scheme, f64, f64)>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    if lines.next().map(str::trim) != Some(CSV_HEADER) {
        return Err(Error::Format("sweep CSV header mismatch".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            let bad = || Error::Format(format!("sweep CSV row {}", i + 1));
            if f.len() != 14 {
                return Err(bad());
            }
            let scheme: Scheme = f[0].parse().map_err(|_| bad())?;
            let snr: f64 = f[1].parse().map_err(|_| bad())?;
            let mse: f64 = f[5].parse().map_err(|_| bad())?;
            Ok((scheme, snr, mse))
        })
        .collect()
}

/// Upper SNR of the highest adjacent pair whose lower point is at least
/// [`CLIFF_FACTOR`] times worse. `curve` is sorted by SNR.
pub fn cliff_snr(curve: &[(f64, f64)]) -> Option<f64> {
    curve
        .windows(2)
        .filter(|w| w[0].1 >= CLIFF_FACTOR * w[1].1)
        .map(|w| w[1].0)
        .next_back()
}

/// Value at the top point when the top two points agree within
/// [`SATURATION_TOLERANCE`].
pub fn saturation_floor(curve: &[(f64, f64)]) -> Option<f64> {
    let [.., a, b] = curve else {
        return None;
    };
    let scale = a.1.abs().max(b.1.abs());
    (a.1 == b.1 || (a.1 - b.1).abs() < SATURATION_TOLERANCE * scale).then_some(b.1)
}

pub fn detect_effects(csv: &str) -> Result<EffectReport> {
    let mut curves: BTreeMap<Scheme, Vec<(f64, f64)>> = BTreeMap::new();
    for (scheme, snr, mse) in parse_sweep_csv(csv)? {
        curves.entry(scheme).or_default().push((snr, mse));
    }
    for c in curves.values_mut() {
        c.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let graceful = match (curves.get(&Scheme::Da), curves.get(&Scheme::Analog)) {
        (Some(da), Some(an)) => {
            let (top_da, top_an) = (da.last().copied(), an.last().copied());
            match (top_da, top_an) {
                (Some(d), Some(a)) if d.0 == a.0 => Some(d.1 <= GRACEFUL_RATIO * a.1),
                _ => Some(false),
            }
        }
        _ => None,
    };
    Ok(EffectReport {
        schemes: curves
            .iter()
            .map(|(&scheme, c)| SchemeEffects {
                scheme,
                cliff_snr: cliff_snr(c),
                saturation_floor: saturation_floor(c),
            })
            .collect(),
        graceful,
    })
}
