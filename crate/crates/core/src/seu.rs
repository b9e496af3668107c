//! Model update over the hybrid link.
//!
//! Floating-point parameters go through the analog branch. Integer
//! parameters are never sent: the device already holds an outdated copy,
//! and the sender transmits only the parity of the updated copy, which the
//! device decodes with its stale bits as side information.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Normal};

use crate::analog::{analog_uses, encode_analog, estimate, Ieo};
use crate::channel::{transmit, ChannelKind, ChannelState, ANALOG_STREAM};
use crate::digital::{
    demodulate, dsc_decode, dsc_encode, modulate, CodeSpec, LlrVector, Modulation, Puncture,
};
use crate::error::{param, Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::semantic::SemanticFeature;

/// Largest integer payload per frame; with CRC and tail a frame spans 1184
/// trellis steps.
pub const MAX_FRAME_INFO_BITS: usize = 1166;
/// Noise stream of frame `f` is `FRAME_STREAM_BASE + f`.
const FRAME_STREAM_BASE: u64 = 16;

pub const SESSION_LOG_HEADER: &str =
    "frame_idx,pattern,parity_bits,crc_ok,bit_errors_before,bit_errors_after";

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub floats: Vec<f64>,
    pub ints: Vec<u32>,
    /// Precision of every integer, 4 or 8 bits.
    pub int_bits: u8,
}

impl ModelParams {
    pub fn new(floats: Vec<f64>, ints: Vec<u32>, int_bits: u8) -> Result<Self> {
        if int_bits != 4 && int_bits != 8 {
            return param(format!("integer precision {int_bits} not in {{4, 8}}"));
        }
        if ints.iter().any(|&v| v >> int_bits != 0) {
            return param(format!("integer parameter exceeds {int_bits} bits"));
        }
        Ok(Self {
            floats,
            ints,
            int_bits,
        })
    }

    /// Random parameters: unit-variance floats, uniform integers.
    pub fn random(floats: usize, ints: usize, int_bits: u8, seed: u64) -> Result<Self> {
        let mut rng = rng_from_seed(seed);
        let f = (0..floats)
            .map(|_| rng.sample(rand_distr::StandardNormal))
            .collect();
        let i = (0..ints)
            .map(|_| rng.random_range(0..1u32 << int_bits))
            .collect();
        Self::new(f, i, int_bits)
    }

    pub fn int_bit_len(&self) -> usize {
        self.ints.len() * self.int_bits as usize
    }
}

/// Divergence between the device's outdated copy and the update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftSpec {
    pub float_noise_std: f64,
    /// Independent flip probability of every integer bit.
    pub flip_prob: f64,
}

impl DriftSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.flip_prob) {
            return param(format!(
                "flip probability {} outside [0, 0.5)",
                self.flip_prob
            ));
        }
        if !(self.float_noise_std >= 0.0) || !self.float_noise_std.is_finite() {
            return param("float drift must be finite and non-negative");
        }
        Ok(())
    }
}

/// MSB-first bit serialization.
pub fn ints_to_bits(ints: &[u32], bits: u8) -> Vec<u8> {
    ints.iter()
        .flat_map(|&v| (0..bits).rev().map(move |b| ((v >> b) & 1) as u8))
        .collect()
}

pub fn bits_to_ints(bits: &[u8], width: u8) -> Vec<u32> {
    bits.chunks(width as usize)
        .map(|c| c.iter().fold(0u32, |acc, &b| acc << 1 | b as u32))
        .collect()
}

/// The outdated copy: Gaussian drift on floats, iid bit flips on ints.
pub fn drift(params: &ModelParams, spec: &DriftSpec, seed: u64) -> Result<ModelParams> {
    spec.validate()?;
    let mut rng = rng_from_seed(seed);
    let normal = Normal::new(0.0, spec.float_noise_std)
        .map_err(|e| Error::Parameter(format!("float drift: {e}")))?;
    let flip = Bernoulli::new(spec.flip_prob)
        .map_err(|e| Error::Parameter(format!("flip probability: {e}")))?;
    let floats = params
        .floats
        .iter()
        .map(|&f| f + normal.sample(&mut rng))
        .collect();
    let ints = params
        .ints
        .iter()
        .map(|&v| {
            (0..params.int_bits).fold(v, |acc, b| {
                if flip.sample(&mut rng) {
                    acc ^ (1 << b)
                } else {
                    acc
                }
            })
        })
        .collect();
    Ok(ModelParams {
        floats,
        ints,
        int_bits: params.int_bits,
    })
}

/// Sends the floats over the analog branch at `per_use_power`, with
/// `prior_vars` as the per-parameter variances. Returns the MMSE estimates
/// and the channel uses spent.
pub fn seu_send_floats(
    floats: &[f64],
    prior_vars: &[f64],
    per_use_power: f64,
    state: &ChannelState,
) -> Result<(Ieo, usize)> {
    let m = floats.len();
    if m == 0 {
        return Ok((
            Ieo {
                est: Vec::new(),
                err_var: Vec::new(),
            },
            0,
        ));
    }
    let feature = SemanticFeature::new(
        floats.to_vec(),
        (0..m).collect(),
        prior_vars.to_vec(),
        vec![0.0; m],
        m,
    )?;
    let uses = analog_uses(m);
    let frame = encode_analog(&feature, per_use_power, uses)?;
    let rx = transmit(&frame.symbols, state, ANALOG_STREAM);
    Ok((estimate(&rx, state, &frame.meta), uses))
}

/// Digital-path settings of the integer update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntLink {
    pub pattern: Puncture,
    pub modulation: Modulation,
    /// Drift rate the device assumes when weighting its stale bits.
    pub p_hat: f64,
    /// Transmit power per parity channel use.
    pub power_per_use: f64,
}

impl IntLink {
    pub fn new(pattern: Puncture, p_hat: f64) -> Self {
        Self {
            pattern,
            modulation: Modulation::Qpsk,
            p_hat,
            power_per_use: 1.0,
        }
    }

    /// Systematic LLR magnitude `ln((1 - p) / p)`.
    pub fn side_llr(&self) -> f64 {
        ((1.0 - self.p_hat) / self.p_hat).ln()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameLog {
    pub frame_idx: usize,
    pub pattern: Puncture,
    pub parity_bits: usize,
    pub crc_ok: bool,
    pub bit_errors_before: usize,
    pub bit_errors_after: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntUpdate {
    pub corrected: Vec<u32>,
    /// Every frame passed its CRC.
    pub crc_ok: bool,
    /// Parity bits sent per integer bit.
    pub overhead_ratio: f64,
    pub frames: Vec<FrameLog>,
}

impl IntUpdate {
    pub fn bit_errors(&self) -> usize {
        self.frames.iter().map(|f| f.bit_errors_after).sum()
    }
}

fn hamming(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Corrects the device's outdated integers from parity alone. Frames that
/// fail their CRC keep the outdated bits.
pub fn seu_update_ints(
    updated: &[u32],
    outdated: &[u32],
    int_bits: u8,
    link: &IntLink,
    state: &ChannelState,
) -> Result<IntUpdate> {
    if updated.len() != outdated.len() {
        return param("updated and outdated copies differ in length");
    }
    if !(link.p_hat > 0.0 && link.p_hat < 0.5) {
        return param(format!(
            "assumed drift rate {} outside (0, 0.5)",
            link.p_hat
        ));
    }
    let new_bits = ints_to_bits(updated, int_bits);
    let old_bits = ints_to_bits(outdated, int_bits);
    let code = CodeSpec::new(link.pattern);
    let amp = link.power_per_use.sqrt();
    let mag = link.side_llr();
    let mut result = Vec::with_capacity(new_bits.len());
    let mut frames = Vec::new();
    let mut parity_total = 0;
    for (f, (new, old)) in new_bits
        .chunks(MAX_FRAME_INFO_BITS)
        .zip(old_bits.chunks(MAX_FRAME_INFO_BITS))
        .enumerate()
    {
        // sender side: only parity leaves
        let frame = dsc_encode(new, &code, link.modulation);
        let symbols: Vec<Complex64> = modulate(&frame.parity, link.modulation, amp);
        let rx = transmit(&symbols, state, FRAME_STREAM_BASE + f as u64);
        // device side
        let parity = demodulate(&rx, state, link.modulation, amp, frame.parity.len());
        let side = LlrVector::new(old.iter().map(|&b| (1.0 - 2.0 * b as f64) * mag).collect());
        let res = dsc_decode(&side, &parity, &code);
        let out = if res.crc_ok {
            res.info_bits
        } else {
            old.to_vec()
        };
        parity_total += frame.parity.len();
        frames.push(FrameLog {
            frame_idx: f,
            pattern: link.pattern,
            parity_bits: frame.parity.len(),
            crc_ok: res.crc_ok,
            bit_errors_before: hamming(old, new),
            bit_errors_after: hamming(&out, new),
        });
        result.extend(out);
    }
    let total_bits = new_bits.len();
    Ok(IntUpdate {
        corrected: bits_to_ints(&result, int_bits),
        crc_ok: frames.iter().all(|f| f.crc_ok),
        overhead_ratio: if total_bits == 0 {
            0.0
        } else {
            parity_total as f64 / total_bits as f64
        },
        frames,
    })
}

pub fn session_log_csv(frames: &[FrameLog]) -> String {
    let mut out = String::from(SESSION_LOG_HEADER);
    out.push('\n');
    for f in frames {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            f.frame_idx,
            f.pattern,
            f.parity_bits,
            u8::from(f.crc_ok),
            f.bit_errors_before,
            f.bit_errors_after
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverheadReport {
    pub parity_bits: usize,
    pub analog_uses: usize,
    /// Bits a full retransmission of the integers would have cost.
    pub full_bits: usize,
    /// `1 - parity_bits / full_bits`.
    pub reduction: f64,
}

/// Totals over a session log of `int_bit_len` integer bits.
pub fn seu_overhead_report(
    frames: &[FrameLog],
    int_bit_len: usize,
    analog_uses: usize,
) -> OverheadReport {
    let parity_bits = frames.iter().map(|f| f.parity_bits).sum();
    OverheadReport {
        parity_bits,
        analog_uses,
        full_bits: int_bit_len,
        reduction: if int_bit_len == 0 {
            0.0
        } else {
            1.0 - parity_bits as f64 / int_bit_len as f64
        },
    }
}

/// One complete update session.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionOutcome {
    pub ints: IntUpdate,
    pub float_mse: f64,
    pub analog_uses: usize,
    /// All frames passed and the integers equal the update exactly.
    pub success: bool,
}

/// Settings of a batch of independent sessions.
#[derive(Debug, Clone, PartialEq)]
pub struct SeuExperiment {
    pub floats: usize,
    pub ints: usize,
    pub int_bits: u8,
    pub drift: DriftSpec,
    pub link: IntLink,
    pub channel: ChannelKind,
    pub snr_db: f64,
    /// Analog power per use of the float stream.
    pub float_power: f64,
    pub seed: u64,
}

impl SeuExperiment {
    pub fn run_session(&self, index: u64) -> Result<SessionOutcome> {
        let seed = derive_seed(&[self.seed, index]);
        let params = ModelParams::random(
            self.floats,
            self.ints,
            self.int_bits,
            derive_seed(&[seed, 1]),
        )?;
        let outdated = drift(&params, &self.drift, derive_seed(&[seed, 2]))?;
        let state = ChannelState::draw(self.channel, self.snr_db, derive_seed(&[seed, 3]));
        let vars = vec![1.0; params.floats.len()];
        let (ieo, analog_uses) = seu_send_floats(&params.floats, &vars, self.float_power, &state)?;
        let float_mse = if params.floats.is_empty() {
            0.0
        } else {
            ieo.est
                .iter()
                .zip(&params.floats)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                / params.floats.len() as f64
        };
        let ints = seu_update_ints(
            &params.ints,
            &outdated.ints,
            self.int_bits,
            &self.link,
            &state,
        )?;
        let success = ints.crc_ok && ints.corrected == params.ints;
        Ok(SessionOutcome {
            ints,
            float_mse,
            analog_uses,
            success,
        })
    }

    /// Sessions `0..count` in parallel, results in index order.
    pub fn run(&self, count: usize) -> Result<Vec<SessionOutcome>> {
        use rayon::prelude::*;
        (0..count as u64)
            .into_par_iter()
            .map(|i| self.run_session(i))
            .collect()
    }
}
