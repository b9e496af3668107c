//! Synthetic sources and grayscale image ingestion.
//!
//! Three kinds of [`SourceBlock`] streams are supported: a first-order
//! Gauss-Markov process, a labelled mixture of orthogonal class means in
//! white Gaussian noise, and 8x8 tiles of a binary PGM image.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{param, Error, Result};
use crate::rng::{rng_from_seed, SimRng};

/// Seed of the class-mean constants. Fixed so task weights do not depend on
/// the experiment seed.
pub const CLASS_MEAN_SEED: u64 = 0xC1A55;

/// Side of the square tiles cut from images.
pub const TILE: usize = 8;

/// One source data unit.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceBlock {
    pub samples: Vec<f64>,
    pub label: Option<usize>,
}

impl SourceBlock {
    pub fn new(samples: Vec<f64>) -> Self {
        Self {
            samples,
            label: None,
        }
    }

    pub fn with_label(samples: Vec<f64>, label: usize) -> Self {
        Self {
            samples,
            label: Some(label),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    GaussMarkov,
    ClassMixture,
    ImageBlocks,
}

impl std::str::FromStr for SourceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gauss_markov" => Ok(Self::GaussMarkov),
            "class_mixture" => Ok(Self::ClassMixture),
            "image_blocks" => Ok(Self::ImageBlocks),
            other => Err(Error::Parameter(format!("unknown source kind {other:?}"))),
        }
    }
}

impl std::fmt::Display for SourceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::GaussMarkov => "gauss_markov",
            Self::ClassMixture => "class_mixture",
            Self::ImageBlocks => "image_blocks",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub kind: SourceKind,
    pub n: usize,
    pub rho: f64,
    pub classes: usize,
    pub seed: u64,
}

impl SourceSpec {
    pub fn gauss_markov(n: usize, rho: f64, seed: u64) -> Self {
        Self {
            kind: SourceKind::GaussMarkov,
            n,
            rho,
            classes: 1,
            seed,
        }
    }

    pub fn class_mixture(n: usize, classes: usize, seed: u64) -> Self {
        Self {
            kind: SourceKind::ClassMixture,
            n,
            rho: 0.0,
            classes,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return param("block length n must be at least 1");
        }
        match self.kind {
            SourceKind::GaussMarkov => {
                if !(0.0..1.0).contains(&self.rho) {
                    return param(format!("rho = {} outside [0, 1)", self.rho));
                }
            }
            SourceKind::ClassMixture => {
                if self.classes == 0 {
                    return param("class count must be at least 1");
                }
                if self.classes > self.n {
                    return param(format!(
                        "{} orthogonal class means do not fit in dimension {}",
                        self.classes, self.n
                    ));
                }
            }
            SourceKind::ImageBlocks => {
                if self.n != TILE * TILE {
                    return param("image blocks have n = 64");
                }
            }
        }
        Ok(())
    }
}

/// A validated generator for one [`SourceSpec`].
///
/// `draw` takes the randomness from the caller, so the harness can hand each
/// trial its own stream; `stream` replays the sequence seeded by `spec.seed`.
#[derive(Debug, Clone)]
pub struct Source {
    spec: SourceSpec,
    class_means: Vec<Vec<f64>>,
    noise_std: f64,
}

impl Source {
    pub fn new(spec: SourceSpec) -> Result<Self> {
        spec.validate()?;
        if spec.kind == SourceKind::ImageBlocks {
            return param("image blocks come from load_pgm, not a generator");
        }
        let class_means = match spec.kind {
            SourceKind::ClassMixture => class_means(spec.classes, spec.n),
            _ => Vec::new(),
        };
        Ok(Self {
            spec,
            class_means,
            noise_std: 1.0,
        })
    }

    /// Overrides the class-mixture noise standard deviation (test hook).
    pub fn with_noise_std(mut self, std: f64) -> Self {
        self.noise_std = std;
        self
    }

    pub fn spec(&self) -> &SourceSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    /// Class means in sample space; empty unless the source is a class mixture.
    pub fn class_means(&self) -> &[Vec<f64>] {
        &self.class_means
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> SourceBlock {
        match self.spec.kind {
            SourceKind::GaussMarkov => draw_gauss_markov(self.spec.n, self.spec.rho, rng),
            SourceKind::ClassMixture => {
                let label = rng.random_range(0..self.spec.classes);
                let samples = self.class_means[label]
                    .iter()
                    .map(|m| m + self.noise_std * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                SourceBlock::with_label(samples, label)
            }
            SourceKind::ImageBlocks => unreachable!("rejected in Source::new"),
        }
    }

    pub fn stream(&self) -> SourceStream<'_> {
        SourceStream {
            source: self,
            rng: rng_from_seed(self.spec.seed),
        }
    }
}

/// Infinite block sequence seeded from the spec.
pub struct SourceStream<'a> {
    source: &'a Source,
    rng: SimRng,
}

impl Iterator for SourceStream<'_> {
    type Item = SourceBlock;

    fn next(&mut self) -> Option<SourceBlock> {
        Some(self.source.draw(&mut self.rng))
    }
}

fn draw_gauss_markov<R: Rng + ?Sized>(n: usize, rho: f64, rng: &mut R) -> SourceBlock {
    let innov = (1.0 - rho * rho).sqrt();
    let mut samples = Vec::with_capacity(n);
    let mut prev: f64 = rng.sample(StandardNormal);
    samples.push(prev);
    for _ in 1..n {
        let w: f64 = rng.sample(StandardNormal);
        prev = rho * prev + innov * w;
        samples.push(prev);
    }
    SourceBlock::new(samples)
}

/// K orthogonal vectors of norm `0.5 * sqrt(n)`, by Gram-Schmidt on Gaussian
/// draws from [`CLASS_MEAN_SEED`].
fn class_means(classes: usize, n: usize) -> Vec<Vec<f64>> {
    let mut rng = rng_from_seed(CLASS_MEAN_SEED);
    let norm = 0.5 * (n as f64).sqrt();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(classes);
    while basis.len() < classes {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= len);
        basis.push(v);
    }
    basis
        .into_iter()
        .map(|b| b.into_iter().map(|x| x * norm).collect())
        .collect()
}

pub fn gen_gauss_markov(spec: &SourceSpec) -> Result<SourceBlock> {
    if spec.kind != SourceKind::GaussMarkov {
        return param("spec.kind must be gauss_markov");
    }
    let source = Source::new(spec.clone())?;
    Ok(source.draw(&mut rng_from_seed(spec.seed)))
}

pub fn gen_class_mixture(spec: &SourceSpec) -> Result<SourceBlock> {
    if spec.kind != SourceKind::ClassMixture {
        return param("spec.kind must be class_mixture");
    }
    let source = Source::new(spec.clone())?;
    Ok(source.draw(&mut rng_from_seed(spec.seed)))
}

pub fn pixel_to_sample(p: u8) -> f64 {
    2.0 * f64::from(p) / 255.0 - 1.0
}

pub fn sample_to_pixel(s: f64) -> u8 {
    ((s + 1.0) * 255.0 / 2.0).round().clamp(0.0, 255.0) as u8
}

/// Decoded 8-bit grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

/// Parses a binary (P5) PGM with maxval 255.
pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 0;
    let magic = header_token(bytes, &mut pos)?;
    if magic != b"P5" {
        return Err(Error::Format("not a binary PGM (magic P5)".into()));
    }
    let width = header_number(bytes, &mut pos)?;
    let height = header_number(bytes, &mut pos)?;
    let maxval = header_number(bytes, &mut pos)?;
    if maxval != 255 {
        return Err(Error::Format(format!(
            "maxval {maxval} unsupported, need 255"
        )));
    }
    if width == 0 || height == 0 {
        return Err(Error::Format("empty image".into()));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::Format("missing whitespace after maxval".into())),
    }
    let len = width * height;
    let raster = bytes
        .get(pos..pos + len)
        .ok_or_else(|| Error::Format(format!("raster truncated: need {len} bytes")))?;
    Ok(GrayImage {
        width,
        height,
        pixels: raster.to_vec(),
    })
}

fn header_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        match bytes.get(*pos) {
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' || b == b'\r' {
                        break;
                    }
                }
            }
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
            None => return Err(Error::Format("truncated header".into())),
        }
    }
    let start = *pos;
    while let Some(b) = bytes.get(*pos) {
        if b.is_ascii_whitespace() || *b == b'#' {
            break;
        }
        *pos += 1;
    }
    Ok(&bytes[start..*pos])
}

fn header_number(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    let tok = header_token(bytes, pos)?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| {
            Error::Format(format!(
                "bad header field {:?}",
                String::from_utf8_lossy(tok)
            ))
        })
}

/// Tiles an image row-major into 8x8 blocks. Pixels outside the image are
/// padded with sample value 0.0.
pub fn image_blocks(img: &GrayImage) -> Vec<SourceBlock> {
    let bw = img.width.div_ceil(TILE);
    let bh = img.height.div_ceil(TILE);
    let mut blocks = Vec::with_capacity(bw * bh);
    for by in 0..bh {
        for bx in 0..bw {
            let mut samples = vec![0.0; TILE * TILE];
            for r in 0..TILE {
                let y = by * TILE + r;
                if y >= img.height {
                    break;
                }
                for c in 0..TILE {
                    let x = bx * TILE + c;
                    if x >= img.width {
                        break;
                    }
                    samples[r * TILE + c] = pixel_to_sample(img.pixels[y * img.width + x]);
                }
            }
            blocks.push(SourceBlock::new(samples));
        }
    }
    blocks
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<Vec<SourceBlock>> {
    let bytes = fs::read(path)?;
    Ok(image_blocks(&parse_pgm(&bytes)?))
}
