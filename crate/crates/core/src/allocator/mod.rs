//! Expected-distortion models and joint rate/power allocation.
//!
//! The analog model averages the closed-form MMSE error over the fading
//! distribution; the digital model mixes the refined floor
//! `min(step^2 / 12, err)` with the analog fallback by the calibrated
//! decode-failure probability. The allocator first reserves the analog
//! rate, then picks the digital tuple, then splits power.

mod fer;
mod plan;
pub mod quad;

pub use fer::{calibrate_fer, reference_plan, FerCalibration, FerPoint, FerTable, FER_HEADER};
pub use plan::*;

use crate::analog::{analog_gains, analog_uses, mmse_err_var};
use crate::channel::{noise_var_for, ChannelKind};
use crate::digital::quantizer::CLIP_SIGMAS;
use crate::digital::Puncture;
use crate::error::{Error, Result};
use crate::semantic::SemanticCodec;

/// Default analog floor: normalized feature MSE with all power analog.
pub const DEFAULT_FLOOR_THRESHOLD: f64 = 0.05;
/// Power-split search range as a fraction of `P`.
pub const POWER_RANGE: (f64, f64) = (0.05, 0.95);
pub const GOLDEN_ITERATIONS: usize = 48;
/// Points of the oracle's power grid.
pub const POWER_GRID: usize = 21;

/// `lambda * d_a + (1 - lambda) * d_d`.
pub fn weighted_distortion(lambda: f64, d_a: f64, d_d: f64) -> f64 {
    lambda * d_a + (1.0 - lambda) * d_d
}

/// Statistics the models need: ranked prior variances of the codec.
#[derive(Debug, Clone)]
pub struct DistortionModel {
    prior_vars: Vec<f64>,
    ranking: Vec<usize>,
    channel: ChannelKind,
    fer: Option<FerTable>,
}

impl DistortionModel {
    pub fn new(codec: &SemanticCodec, channel: ChannelKind, fer: Option<FerTable>) -> Self {
        Self::from_parts(codec.prior_vars().to_vec(), codec.ranking(), channel, fer)
    }

    pub fn from_parts(
        prior_vars: Vec<f64>,
        ranking: Vec<usize>,
        channel: ChannelKind,
        fer: Option<FerTable>,
    ) -> Self {
        Self {
            prior_vars,
            ranking,
            channel,
            fer,
        }
    }

    pub fn n(&self) -> usize {
        self.prior_vars.len()
    }

    pub fn channel(&self) -> ChannelKind {
        self.channel
    }

    pub fn fer(&self) -> Option<&FerTable> {
        self.fer.as_ref()
    }

    fn selected(&self, k: usize) -> (Vec<f64>, Vec<bool>) {
        let mut kept = vec![false; self.n()];
        let vars = self.ranking[..k]
            .iter()
            .map(|&i| {
                kept[i] = true;
                self.prior_vars[i]
            })
            .collect();
        (vars, kept)
    }

    fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        match self.channel {
            ChannelKind::Awgn => f(1.0),
            ChannelKind::Rayleigh => quad::expect_exp1(f),
        }
    }

    /// Per-coefficient error variances of the kept coefficients at power
    /// gain `gain2`.
    fn analog_errs<'a>(
        vars: &'a [f64],
        gains: &'a [f64],
        gain2: f64,
        nd: f64,
    ) -> impl Iterator<Item = f64> + 'a {
        vars.iter()
            .zip(gains)
            .map(move |(&v, &g)| mmse_err_var(v, g, gain2, nd))
    }

    /// Expected feature MSE over the `k` analog coefficients.
    pub fn analog_distortion(&self, plan: &AllocationPlan, snr_db: f64) -> f64 {
        if plan.k == 0 {
            return 0.0;
        }
        let (vars, _) = self.selected(plan.k);
        let gains = analog_gains(&vars, plan.analog_power_per_use());
        let nd = noise_var_for(snr_db) / 2.0;
        self.expect(|x| Self::analog_errs(&vars, &gains, x, nd).sum::<f64>() / plan.k as f64)
    }

    /// Normalized feature MSE `sum err / sum prior` with every unit of the
    /// plan's power on the analog branch: the analog-floor proxy.
    pub fn analog_floor_proxy(&self, k: usize, power_total: f64, snr_db: f64) -> f64 {
        let (vars, _) = self.selected(k);
        let gains = analog_gains(&vars, power_total / analog_uses(k) as f64);
        let nd = noise_var_for(snr_db) / 2.0;
        let total: f64 = vars.iter().sum();
        self.expect(|x| Self::analog_errs(&vars, &gains, x, nd).sum::<f64>() / total)
    }

    /// Expected data MSE of the hybrid receiver.
    pub fn digital_distortion(&self, plan: &AllocationPlan, snr_db: f64) -> Result<f64> {
        let n = self.n() as f64;
        let (vars, kept) = self.selected(plan.k);
        let gains = if plan.k > 0 {
            analog_gains(&vars, plan.analog_power_per_use())
        } else {
            Vec::new()
        };
        let nd = noise_var_for(snr_db) / 2.0;
        let discarded: f64 = self
            .prior_vars
            .iter()
            .zip(&kept)
            .filter(|(_, &k)| !k)
            .map(|(v, _)| v)
            .sum();
        let Some(pattern) = plan.pattern.filter(|_| plan.has_digital()) else {
            return Ok(self.expect(|x| {
                (Self::analog_errs(&vars, &gains, x, nd).sum::<f64>() + discarded) / n
            }));
        };
        let fer = self
            .fer
            .as_ref()
            .ok_or_else(|| Error::Config("digital model needs a FER table".into()))?;
        let cell_var = |v: f64| {
            let step = 2.0 * CLIP_SIGMAS * v.sqrt() / (1u64 << plan.bits) as f64;
            step * step / 12.0
        };
        let discarded_floor: f64 = self
            .prior_vars
            .iter()
            .zip(&kept)
            .filter(|(_, &k)| !k)
            .map(|(&v, _)| cell_var(v).min(v))
            .sum();
        let es_db = snr_db + 10.0 * plan.digital_power_per_use().log10();
        // fail early on a missing curve instead of inside the quadrature
        fer.lookup(pattern, plan.bits, es_db)?;
        Ok(self.expect(|x| {
            let p_f = fer
                .lookup(pattern, plan.bits, es_db + 10.0 * x.log10())
                .unwrap_or(1.0);
            let mut fallback = discarded;
            let mut floor = discarded_floor;
            for (e, &v) in Self::analog_errs(&vars, &gains, x, nd).zip(&vars) {
                fallback += e;
                floor += e.min(cell_var(v));
            }
            ((1.0 - p_f) * floor + p_f * fallback) / n
        }))
    }

    pub fn system_distortion(&self, plan: &AllocationPlan, snr_db: f64) -> Result<f64> {
        let d_a = self.analog_distortion(plan, snr_db);
        let d_d = self.digital_distortion(plan, snr_db)?;
        Ok(weighted_distortion(plan.lambda, d_a, d_d))
    }
}

/// Discrete search space of the allocator.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateGrid {
    pub ks: Vec<usize>,
    pub bits: Vec<u8>,
    pub patterns: Vec<Puncture>,
    /// Include the digital-off tuple.
    pub allow_off: bool,
}

impl CandidateGrid {
    /// `k in {n/8, n/4, n/2, n}`, `B in 1..=6`, all patterns, digital off.
    pub fn standard(n: usize) -> Self {
        let mut ks: Vec<usize> = [n / 8, n / 4, n / 2, n]
            .into_iter()
            .filter(|&k| k > 0)
            .collect();
        ks.dedup();
        Self {
            ks,
            bits: (1..=6).collect(),
            patterns: Puncture::ALL.to_vec(),
            allow_off: true,
        }
    }

    /// Digital tuples in lexicographic order, digital off first.
    pub fn tuples(&self) -> Vec<Option<(u8, Puncture)>> {
        let mut out = Vec::new();
        if self.allow_off {
            out.push(None);
        }
        for &b in &self.bits {
            for &p in &self.patterns {
                out.push(Some((b, p)));
            }
        }
        out
    }
}

/// Allocator inputs besides the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationRequest {
    pub resources: Resources,
    pub snr_db: f64,
    pub lambda: f64,
    pub floor_threshold: f64,
}

/// A plan with its modeled cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredPlan {
    pub plan: AllocationPlan,
    pub cost: f64,
}

type TupleKey = (usize, u8, Option<Puncture>, f64);

fn key(plan: &AllocationPlan) -> TupleKey {
    (plan.k, plan.bits, plan.pattern, plan.p_a_fraction())
}

/// Lower cost wins; equal costs fall back to lexicographic `(k, B, pattern, P_a)`.
fn better(a: &ScoredPlan, b: &ScoredPlan) -> bool {
    match a.cost.total_cmp(&b.cost) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => {
            let (ka, kb) = (key(&a.plan), key(&b.plan));
            (ka.0, ka.1, ka.2)
                .cmp(&(kb.0, kb.1, kb.2))
                .then(ka.3.total_cmp(&kb.3))
                .is_lt()
        }
    }
}

fn keep_best(best: &mut Option<ScoredPlan>, cand: ScoredPlan) {
    if best.as_ref().is_none_or(|b| better(&cand, b)) {
        *best = Some(cand);
    }
}

impl DistortionModel {
    fn score(
        &self,
        req: &AllocationRequest,
        k: usize,
        tuple: Option<(u8, Puncture)>,
        frac: f64,
    ) -> Result<Option<ScoredPlan>> {
        let plan = match AllocationPlan::hybrid(&req.resources, k, tuple, frac, req.lambda) {
            Ok(p) => p,
            Err(Error::Allocation(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let cost = self.system_distortion(&plan, req.snr_db)?;
        Ok(Some(ScoredPlan { plan, cost }))
    }

    /// Golden-section search of the power split for one discrete tuple.
    /// Returns the best point evaluated, bracket ends included.
    pub fn refine_power(
        &self,
        req: &AllocationRequest,
        k: usize,
        tuple: Option<(u8, Puncture)>,
    ) -> Result<Option<ScoredPlan>> {
        if tuple.is_none() {
            return self.score(req, k, None, 1.0);
        }
        let (mut a, mut b) = POWER_RANGE;
        let mut best = None;
        let eval = |f: f64, best: &mut Option<ScoredPlan>| -> Result<Option<f64>> {
            let s = self.score(req, k, tuple, f)?;
            if let Some(s) = s {
                keep_best(best, s);
            }
            Ok(s.map(|s| s.cost))
        };
        if eval(a, &mut best)?.is_none() {
            return Ok(None);
        }
        eval(b, &mut best)?;
        let r = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        let mut fc = eval(c, &mut best)?.unwrap_or(f64::INFINITY);
        let mut fd = eval(d, &mut best)?.unwrap_or(f64::INFINITY);
        for _ in 0..GOLDEN_ITERATIONS {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = eval(c, &mut best)?.unwrap_or(f64::INFINITY);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = eval(d, &mut best)?.unwrap_or(f64::INFINITY);
            }
        }
        Ok(best)
    }

    /// Smallest candidate `k` whose analog-only proxy meets the threshold.
    pub fn analog_floor(&self, req: &AllocationRequest, grid: &CandidateGrid) -> Result<usize> {
        let res = &req.resources;
        let mut ks = grid.ks.clone();
        ks.sort_unstable();
        let fitting: Vec<usize> = ks
            .into_iter()
            .filter(|&k| k > 0 && k <= res.n && analog_uses(k) <= res.total_uses)
            .collect();
        if fitting.is_empty() {
            return Err(Error::Infeasible(format!(
                "channel uses: {} uses cannot carry any candidate feature size {:?}",
                res.total_uses, grid.ks
            )));
        }
        for &k in &fitting {
            if self.analog_floor_proxy(k, res.power_total, req.snr_db) <= req.floor_threshold {
                return Ok(k);
            }
        }
        let best = self.analog_floor_proxy(fitting[0], res.power_total, req.snr_db);
        Err(Error::Infeasible(format!(
            "analog floor: normalized feature MSE {best:.4} at k = {} exceeds threshold {} \
             at {} dB with power {}",
            fitting[0], req.floor_threshold, req.snr_db, res.power_total
        )))
    }

    /// Best plan at a fixed `k`: digital tuple at an even power split, then
    /// golden-section refinement of the split.
    fn greedy_at(
        &self,
        req: &AllocationRequest,
        grid: &CandidateGrid,
        k: usize,
    ) -> Result<Option<ScoredPlan>> {
        let mut step2: Option<ScoredPlan> = None;
        for tuple in grid.tuples() {
            let frac = if tuple.is_some() { 0.5 } else { 1.0 };
            if let Some(s) = self.score(req, k, tuple, frac)? {
                keep_best(&mut step2, s);
            }
        }
        let Some(chosen) = step2 else {
            return Ok(None);
        };
        let tuple = chosen.plan.pattern.map(|p| (chosen.plan.bits, p));
        let refined = self.refine_power(req, k, tuple)?.unwrap_or(chosen);
        Ok(Some(if better(&chosen, &refined) {
            chosen
        } else {
            refined
        }))
    }

    /// Greedy allocation. The analog floor fixes the smallest `k`; from
    /// there `k` ascends through the candidates while the best plan at the
    /// next size (digital tuple, then power split) lowers the cost.
    pub fn allocate_greedy(
        &self,
        req: &AllocationRequest,
        grid: &CandidateGrid,
    ) -> Result<ScoredPlan> {
        validate_lambda(req.lambda)?;
        let k_min = self.analog_floor(req, grid)?;
        let mut best = self.greedy_at(req, grid, k_min)?.ok_or_else(|| {
            Error::Infeasible(format!(
                "channel uses: no digital tuple fits beside {} analog uses",
                analog_uses(k_min)
            ))
        })?;
        let mut ks = grid.ks.clone();
        ks.sort_unstable();
        ks.dedup();
        for k in ks
            .into_iter()
            .filter(|&k| k > k_min && k <= req.resources.n)
        {
            match self.greedy_at(req, grid, k)? {
                Some(s) if better(&s, &best) => best = s,
                _ => break,
            }
        }
        Ok(best)
    }

    /// Oracle: every `(k, tuple)` over the power grid plus the same
    /// golden-section refinement the greedy search uses.
    pub fn allocate_exhaustive(
        &self,
        req: &AllocationRequest,
        grid: &CandidateGrid,
    ) -> Result<ScoredPlan> {
        validate_lambda(req.lambda)?;
        let (lo, hi) = POWER_RANGE;
        let mut best = None;
        let mut ks = grid.ks.clone();
        ks.sort_unstable();
        for &k in &ks {
            for tuple in grid.tuples() {
                if tuple.is_none() {
                    if let Some(s) = self.score(req, k, None, 1.0)? {
                        keep_best(&mut best, s);
                    }
                    continue;
                }
                for i in 0..POWER_GRID {
                    let frac = lo + (hi - lo) * i as f64 / (POWER_GRID - 1) as f64;
                    if let Some(s) = self.score(req, k, tuple, frac)? {
                        keep_best(&mut best, s);
                    }
                }
                if let Some(s) = self.refine_power(req, k, tuple)? {
                    keep_best(&mut best, s);
                }
            }
        }
        best.ok_or_else(|| {
            Error::Infeasible(format!(
                "channel uses: no candidate fits {} uses",
                req.resources.total_uses
            ))
        })
    }
}

fn validate_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "lambda = {lambda} outside (0, 1)"
        )))
    }
}
