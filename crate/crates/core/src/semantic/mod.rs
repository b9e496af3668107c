//! Transform-domain semantic codec.
//!
//! A fixed orthonormal DCT maps a block to its coefficient vector; the
//! semantic feature keeps the `k` coefficients with the highest score, where
//! the score is the task relevance when a [`TaskModel`] is known and the
//! calibrated coefficient variance otherwise. Discarded coefficients are the
//! lossy part of the compression and set the analog reconstruction floor.

mod dct;
pub mod sidecar;

pub use dct::Dct;

use crate::error::{param, Error, Result};
use crate::rng::rng_from_seed;
use crate::source::{Source, SourceBlock};

/// Seed of the offline variance calibration pass.
pub const CALIBRATION_SEED: u64 = 0xCA11B;
/// Blocks drawn by the calibration pass.
pub const CALIBRATION_BLOCKS: usize = 10_000;
const MIN_PRIOR_VAR: f64 = 1e-12;

/// Selected transform coefficients together with their statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticFeature {
    pub coeffs: Vec<f64>,
    pub indices: Vec<usize>,
    pub prior_vars: Vec<f64>,
    pub task_weights: Vec<f64>,
    pub n: usize,
}

impl SemanticFeature {
    pub fn new(
        coeffs: Vec<f64>,
        indices: Vec<usize>,
        prior_vars: Vec<f64>,
        task_weights: Vec<f64>,
        n: usize,
    ) -> Result<Self> {
        let k = coeffs.len();
        if indices.len() != k || prior_vars.len() != k || task_weights.len() != k {
            return param("feature vectors must share one length");
        }
        if k > n {
            return param(format!("feature length {k} exceeds source dimension {n}"));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) || indices.iter().any(|&i| i >= n) {
            return param("feature indices must be strictly increasing and below n");
        }
        if prior_vars.iter().any(|&v| !(v > 0.0)) {
            return param("prior variances must be positive");
        }
        Ok(Self {
            coeffs,
            indices,
            prior_vars,
            task_weights,
            n,
        })
    }

    pub fn k(&self) -> usize {
        self.coeffs.len()
    }

    /// Copy of this feature carrying different coefficient values.
    pub fn with_coeffs(&self, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), self.k());
        Self {
            coeffs,
            ..self.clone()
        }
    }
}

/// Centroids of the downstream classes and per-coefficient relevance.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskModel {
    pub centroids: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl TaskModel {
    /// Weights are the between-class variance of each coefficient.
    pub fn from_centroids(centroids: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = centroids.first() else {
            return param("task model needs at least one centroid");
        };
        let n = first.len();
        if centroids.iter().any(|c| c.len() != n) {
            return param("centroids must share one dimension");
        }
        let k = centroids.len() as f64;
        let weights = (0..n)
            .map(|i| {
                let mean = centroids.iter().map(|c| c[i]).sum::<f64>() / k;
                centroids.iter().map(|c| (c[i] - mean).powi(2)).sum::<f64>() / k
            })
            .collect();
        Ok(Self { centroids, weights })
    }

    pub fn classes(&self) -> usize {
        self.centroids.len()
    }

    /// Nearest centroid by Euclidean distance; ties go to the lower class.
    pub fn classify(&self, coeffs: &[f64]) -> usize {
        let mut best = (0, f64::INFINITY);
        for (c, centroid) in self.centroids.iter().enumerate() {
            let d: f64 = centroid
                .iter()
                .zip(coeffs)
                .map(|(a, b)| (a - b).powi(2))
                .sum();
            if d < best.1 {
                best = (c, d);
            }
        }
        best.0
    }
}

/// Transform, calibrated statistics and optional task model.
#[derive(Debug, Clone)]
pub struct SemanticCodec {
    dct: Dct,
    prior_vars: Vec<f64>,
    task: Option<TaskModel>,
}

impl SemanticCodec {
    pub fn new(prior_vars: Vec<f64>, task: Option<TaskModel>) -> Result<Self> {
        let n = prior_vars.len();
        if n == 0 {
            return param("codec dimension must be at least 1");
        }
        if prior_vars.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return param("prior variances must be positive and finite");
        }
        if let Some(t) = &task {
            if t.weights.len() != n || t.centroids.iter().any(|c| c.len() != n) {
                return param("task model dimension differs from codec dimension");
            }
        }
        Ok(Self {
            dct: Dct::new(n),
            prior_vars,
            task,
        })
    }

    /// Offline calibration: per-coefficient second moments over
    /// [`CALIBRATION_BLOCKS`] blocks drawn with [`CALIBRATION_SEED`], plus the
    /// task model when the source is labelled.
    pub fn calibrate(source: &Source) -> Result<Self> {
        let dct = Dct::new(source.n());
        let mut rng = rng_from_seed(CALIBRATION_SEED);
        let blocks: Vec<SourceBlock> = (0..CALIBRATION_BLOCKS)
            .map(|_| source.draw(&mut rng))
            .collect();
        let prior_vars = second_moments(&dct, &blocks);
        let task = if source.class_means().is_empty() {
            None
        } else {
            let centroids = source
                .class_means()
                .iter()
                .map(|m| dct.forward(m))
                .collect();
            Some(TaskModel::from_centroids(centroids)?)
        };
        Self::new(prior_vars, task)
    }

    /// Calibration from an explicit block set (e.g. image tiles).
    pub fn from_blocks(blocks: &[SourceBlock]) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return param("calibration needs at least one block");
        };
        let dct = Dct::new(first.len());
        Self::new(second_moments(&dct, blocks), None)
    }

    pub fn n(&self) -> usize {
        self.prior_vars.len()
    }

    pub fn dct(&self) -> &Dct {
        &self.dct
    }

    pub fn prior_vars(&self) -> &[f64] {
        &self.prior_vars
    }

    pub fn task(&self) -> Option<&TaskModel> {
        self.task.as_ref()
    }

    /// Full coefficient vector of a block.
    pub fn analyze(&self, block: &SourceBlock) -> Vec<f64> {
        self.dct.forward(&block.samples)
    }

    pub fn synthesize_full(&self, coeffs: &[f64]) -> SourceBlock {
        SourceBlock::new(self.dct.inverse(coeffs))
    }

    /// Selection scores used to rank coefficients.
    pub fn scores(&self) -> &[f64] {
        match &self.task {
            Some(t) => &t.weights,
            None => &self.prior_vars,
        }
    }

    /// All indices ranked by descending score, lower index first on ties.
    pub fn ranking(&self) -> Vec<usize> {
        rank_by_score(self.scores())
    }

    /// Indices of the top-`k` feature, ascending.
    pub fn selected_indices(&self, k: usize) -> Result<Vec<usize>> {
        check_k(k, self.n())?;
        let mut idx = self.ranking();
        idx.truncate(k);
        idx.sort_unstable();
        Ok(idx)
    }

    pub fn select(&self, full: &[f64], k: usize) -> Result<SemanticFeature> {
        select_task_related(full, &self.prior_vars, self.task.as_ref(), k)
    }

    /// Inverse transform with zeros at the discarded indices.
    pub fn synthesize(&self, feature: &SemanticFeature) -> Result<SourceBlock> {
        if feature.k() == 0 {
            return param("cannot synthesize an empty feature");
        }
        if feature.n != self.n() {
            return param("feature dimension differs from codec dimension");
        }
        Ok(self.synthesize_full(&scatter(feature, self.n())))
    }

    /// Fraction of estimates classified to their block's label.
    pub fn task_metric(&self, blocks: &[SourceBlock], estimates: &[SourceBlock]) -> Result<f64> {
        let task = self
            .task
            .as_ref()
            .ok_or_else(|| Error::Parameter("task metric needs a task model".into()))?;
        task_metric(blocks, estimates, task, &self.dct)
    }
}

fn second_moments(dct: &Dct, blocks: &[SourceBlock]) -> Vec<f64> {
    let n = dct.len();
    let mut acc = vec![0.0; n];
    for b in blocks {
        for (a, c) in acc.iter_mut().zip(dct.forward(&b.samples)) {
            *a += c * c;
        }
    }
    acc.into_iter()
        .map(|s| (s / blocks.len() as f64).max(MIN_PRIOR_VAR))
        .collect()
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return param(format!("feature size k = {k} outside 1..={n}"));
    }
    Ok(())
}

pub(crate) fn rank_by_score(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    // stable sort keeps lower indices first among equal scores
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    idx
}

/// Keeps the `k` coefficients with the largest score.
pub fn select_task_related(
    full: &[f64],
    prior_vars: &[f64],
    task: Option<&TaskModel>,
    k: usize,
) -> Result<SemanticFeature> {
    let n = full.len();
    check_k(k, n)?;
    if prior_vars.len() != n {
        return param("prior_vars length differs from coefficient count");
    }
    let scores = match task {
        Some(t) if t.weights.len() == n => t.weights.as_slice(),
        Some(_) => return param("task weights length differs from coefficient count"),
        None => prior_vars,
    };
    let mut indices = rank_by_score(scores);
    indices.truncate(k);
    indices.sort_unstable();
    let weights = task.map(|t| t.weights.as_slice());
    SemanticFeature::new(
        indices.iter().map(|&i| full[i]).collect(),
        indices.clone(),
        indices.iter().map(|&i| prior_vars[i]).collect(),
        indices
            .iter()
            .map(|&i| weights.map_or(0.0, |w| w[i]))
            .collect(),
        n,
    )
}

/// Places feature coefficients into a zero vector of length `n`.
pub fn scatter(feature: &SemanticFeature, n: usize) -> Vec<f64> {
    let mut full = vec![0.0; n];
    for (&i, &c) in feature.indices.iter().zip(&feature.coeffs) {
        full[i] = c;
    }
    full
}

/// Feature-domain MSE over the shared index set.
pub fn semantic_distortion(tx: &SemanticFeature, rx: &SemanticFeature) -> Result<f64> {
    if tx.indices != rx.indices {
        return param("feature index sets differ");
    }
    if tx.k() == 0 {
        return param("empty feature");
    }
    Ok(tx
        .coeffs
        .iter()
        .zip(&rx.coeffs)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / tx.k() as f64)
}

/// Sample-domain MSE.
pub fn data_distortion(x: &[f64], estimate: &[f64]) -> Result<f64> {
    if x.len() != estimate.len() || x.is_empty() {
        return param("blocks must be non-empty and of equal length");
    }
    Ok(x.iter()
        .zip(estimate)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / x.len() as f64)
}

pub fn task_metric(
    blocks: &[SourceBlock],
    estimates: &[SourceBlock],
    task: &TaskModel,
    dct: &Dct,
) -> Result<f64> {
    if blocks.len() != estimates.len() || blocks.is_empty() {
        return param("need equally many non-empty blocks and estimates");
    }
    let mut correct = 0usize;
    for (b, e) in blocks.iter().zip(estimates) {
        let label = b
            .label
            .ok_or_else(|| Error::Parameter("task metric needs labelled blocks".into()))?;
        if task.classify(&dct.forward(&e.samples)) == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / blocks.len() as f64)
}
