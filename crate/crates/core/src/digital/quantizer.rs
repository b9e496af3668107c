//! Uniform midrise quantizer with per-coefficient clip ranges.

use crate::error::{param, Result};

/// Clip multiple of the coefficient standard deviation.
pub const CLIP_SIGMAS: f64 = 4.0;
pub const MAX_BITS: u8 = 8;

/// `2^B` equal cells over `[-c_i, c_i]`, labelled in natural binary.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerSpec {
    bits: u8,
    clips: Vec<f64>,
}

impl QuantizerSpec {
    pub fn new(bits: u8, clips: Vec<f64>) -> Result<Self> {
        if !(1..=MAX_BITS).contains(&bits) {
            return param(format!("quantizer depth {bits} outside 1..={MAX_BITS}"));
        }
        if clips.iter().any(|c| !(*c > 0.0) || !c.is_finite()) {
            return param("clip ranges must be positive and finite");
        }
        Ok(Self { bits, clips })
    }

    /// Clip at `4 * sqrt(prior_var)` for each coefficient.
    pub fn from_prior_vars(bits: u8, prior_vars: &[f64]) -> Result<Self> {
        Self::new(
            bits,
            prior_vars.iter().map(|v| CLIP_SIGMAS * v.sqrt()).collect(),
        )
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn levels(&self) -> usize {
        1 << self.bits
    }

    pub fn len(&self) -> usize {
        self.clips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clips.is_empty()
    }

    /// Bits produced for a whole coefficient vector.
    pub fn total_bits(&self) -> usize {
        self.len() * self.bits as usize
    }

    pub fn clip(&self, i: usize) -> f64 {
        self.clips[i]
    }

    pub fn step(&self, i: usize) -> f64 {
        2.0 * self.clips[i] / self.levels() as f64
    }

    pub fn cell(&self, i: usize, x: f64) -> usize {
        let j = ((x + self.clips[i]) / self.step(i)).floor();
        if j.is_nan() {
            return 0;
        }
        j.clamp(0.0, (self.levels() - 1) as f64) as usize
    }

    /// Nominal cell bounds; the end cells also absorb the tails beyond.
    pub fn cell_bounds(&self, i: usize, j: usize) -> (f64, f64) {
        let d = self.step(i);
        let lo = -self.clips[i] + j as f64 * d;
        (lo, lo + d)
    }

    pub fn midpoint(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = self.cell_bounds(i, j);
        0.5 * (lo + hi)
    }

    pub fn cells(&self, coeffs: &[f64]) -> Vec<usize> {
        assert_eq!(coeffs.len(), self.len());
        coeffs
            .iter()
            .enumerate()
            .map(|(i, &x)| self.cell(i, x))
            .collect()
    }

    pub fn cells_to_bits(&self, cells: &[usize]) -> Vec<u8> {
        let b = self.bits as usize;
        cells
            .iter()
            .flat_map(|&j| (0..b).map(move |t| ((j >> (b - 1 - t)) & 1) as u8))
            .collect()
    }

    pub fn bits_to_cells(&self, bits: &[u8]) -> Vec<usize> {
        assert_eq!(bits.len(), self.total_bits());
        bits.chunks(self.bits as usize)
            .map(|chunk| chunk.iter().fold(0, |acc, &b| (acc << 1) | b as usize))
            .collect()
    }
}

/// Cell labels of every coefficient, most significant bit first.
pub fn quantize(coeffs: &[f64], spec: &QuantizerSpec) -> Vec<u8> {
    spec.cells_to_bits(&spec.cells(coeffs))
}

/// Cell midpoints.
pub fn dequantize(bits: &[u8], spec: &QuantizerSpec) -> Vec<f64> {
    spec.bits_to_cells(bits)
        .into_iter()
        .enumerate()
        .map(|(i, j)| spec.midpoint(i, j))
        .collect()
}
