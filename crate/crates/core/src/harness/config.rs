//! Flat `key = value` experiment configuration.
//!
//! Lines are trimmed; empty lines and anything after `#` are ignored.
//! Unknown or repeated keys are errors. Defaults describe the reference
//! experiment: Gauss-Markov blocks of 64 samples, a quasi-static Rayleigh
//! channel swept 0..20 dB, `N = 2n` channel uses at unit average power per
//! use, and `lambda = 0.5`. The budget split and `lambda` are choices of
//! this simulator, not measured quantities.

use std::path::{Path, PathBuf};

use crate::allocator::{Resources, DEFAULT_FLOOR_THRESHOLD};
use crate::channel::ChannelKind;
use crate::digital::{Modulation, Puncture};
use crate::error::{Error, Result};
use crate::link::Scheme;
use crate::source::SourceKind;

pub const MIN_TRIALS: usize = 100;

/// How the hybrid plan is chosen at each SNR point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Allocation {
    /// The configured `k`, `bits`, `pattern` and `p_a_fraction`.
    Fixed,
    /// Greedy model-based allocation per SNR point (needs `fer_table`).
    Greedy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub schemes: Vec<Scheme>,
    pub channel: ChannelKind,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub lambda: f64,
    /// Channel uses per block; 0 means `2n`.
    pub total_uses: usize,
    /// Energy per block; 0 means one unit per channel use.
    pub power_total: f64,
    pub modulation: Modulation,
    pub source: SourceKind,
    pub n: usize,
    pub rho: f64,
    pub classes: usize,
    pub source_seed: u64,
    pub image: Option<PathBuf>,
    pub k: usize,
    pub bits: u8,
    pub pattern: Puncture,
    pub p_a_fraction: f64,
    pub digital_bits: u8,
    pub digital_pattern: Puncture,
    pub allocation: Allocation,
    pub fer_table: Option<PathBuf>,
    pub floor_threshold: f64,
    pub seed: u64,
    pub out: PathBuf,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schemes: Scheme::ALL.to_vec(),
            channel: ChannelKind::Rayleigh,
            snr_db: (0..=10).map(|i| 2.0 * i as f64).collect(),
            trials: 2000,
            lambda: 0.5,
            total_uses: 0,
            power_total: 0.0,
            modulation: Modulation::Qpsk,
            source: SourceKind::GaussMarkov,
            n: 64,
            rho: 0.9,
            classes: 4,
            source_seed: 1,
            image: None,
            k: 16,
            bits: 3,
            pattern: Puncture::R12,
            p_a_fraction: 0.5,
            digital_bits: 6,
            digital_pattern: Puncture::R12,
            allocation: Allocation::Fixed,
            fer_table: None,
            floor_threshold: DEFAULT_FLOOR_THRESHOLD,
            seed: 1,
            out: PathBuf::from("sweep.csv"),
            workers: 0,
        }
    }
}

/// Parses `"a:b:step"` (inclusive) or a comma-separated list; empty input
/// gives an empty grid.
pub fn parse_snr_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let bad = || Error::Config(format!("bad SNR grid {text:?}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let grid = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [a, b, step] = parts[..] else {
            return Err(bad());
        };
        let (a, b, step) = (num(a)?, num(b)?, num(step)?);
        if !(step > 0.0) || !a.is_finite() || !b.is_finite() || b < a {
            return Err(bad());
        }
        let count = ((b - a) / step + 1e-9).floor() as usize;
        (0..=count)
            .map(|i| {
                let v = a + step * i as f64;
                (v * 1e9).round() / 1e9
            })
            .collect()
    } else {
        text.split(',').map(num).collect::<Result<Vec<f64>>>()?
    };
    Ok(grid)
}

fn parse_schemes(text: &str) -> Result<Vec<Scheme>> {
    let text = text.trim();
    if text == "all" {
        return Ok(Scheme::ALL.to_vec());
    }
    let mut out: Vec<Scheme> = text
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!(
                    "line {}: repeated key {key:?}",
                    no + 1
                )));
            }
            cfg.set(key, value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", no + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Sets one key; used by the file parser and command-line overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Config(format!("bad value {v:?} for {key}")))
        }
        match key {
            "scheme" => self.schemes = parse_schemes(value)?,
            "channel" => self.channel = value.parse()?,
            "snr" => self.snr_db = parse_snr_grid(value)?,
            "trials" => self.trials = num(key, value)?,
            "lambda" => self.lambda = num(key, value)?,
            "total_uses" => self.total_uses = num(key, value)?,
            "power_total" => self.power_total = num(key, value)?,
            "modulation" => self.modulation = value.parse()?,
            "source" => self.source = value.parse()?,
            "n" => self.n = num(key, value)?,
            "rho" => self.rho = num(key, value)?,
            "classes" => self.classes = num(key, value)?,
            "source_seed" => self.source_seed = num(key, value)?,
            "image" => self.image = Some(PathBuf::from(value)),
            "k" => self.k = num(key, value)?,
            "bits" => self.bits = num(key, value)?,
            "pattern" => self.pattern = value.parse()?,
            "p_a_fraction" => self.p_a_fraction = num(key, value)?,
            "digital_bits" => self.digital_bits = num(key, value)?,
            "digital_pattern" => self.digital_pattern = value.parse()?,
            "allocation" => {
                self.allocation = match value {
                    "fixed" => Allocation::Fixed,
                    "greedy" => Allocation::Greedy,
                    other => return Err(Error::Config(format!("unknown allocation {other:?}"))),
                }
            }
            "fer_table" => self.fer_table = Some(PathBuf::from(value)),
            "floor_threshold" => self.floor_threshold = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "workers" => self.workers = num(key, value)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.trials < MIN_TRIALS {
            return bad(format!("trials = {} below {MIN_TRIALS}", self.trials));
        }
        if self.snr_db.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("SNR grid must be strictly increasing".into());
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return bad("SNR grid values must be finite".into());
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return bad(format!("lambda = {} outside (0, 1)", self.lambda));
        }
        if !(self.p_a_fraction > 0.0 && self.p_a_fraction <= 1.0) {
            return bad(format!(
                "p_a_fraction = {} outside (0, 1]",
                self.p_a_fraction
            ));
        }
        if self.schemes.is_empty() {
            return bad("no scheme selected".into());
        }
        if self.source == SourceKind::ImageBlocks && self.image.is_none() {
            return bad("source = image_blocks needs image = <path>".into());
        }
        if self.allocation == Allocation::Greedy && self.fer_table.is_none() {
            return bad("allocation = greedy needs fer_table = <path>".into());
        }
        if !(self.power_total >= 0.0) || !self.power_total.is_finite() {
            return bad("power_total must be finite and non-negative".into());
        }
        Ok(())
    }

    /// Block length; image tiles are always 8x8.
    pub fn block_len(&self) -> usize {
        match self.source {
            SourceKind::ImageBlocks => crate::source::TILE * crate::source::TILE,
            _ => self.n,
        }
    }

    pub fn resources(&self) -> Resources {
        let n = self.block_len();
        let total_uses = if self.total_uses == 0 {
            2 * n
        } else {
            self.total_uses
        };
        let power_total = if self.power_total == 0.0 {
            total_uses as f64
        } else {
            self.power_total
        };
        Resources {
            n,
            total_uses,
            power_total,
            modulation: self.modulation,
        }
    }
}
