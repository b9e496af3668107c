//! Recursive systematic convolutional code (1, 5/7)octal with puncturing.
//!
//! The encoder state holds the last two feedback values `a[t-1], a[t-2]`:
//!
//! ```text
//! a[t] = u[t] ^ a[t-1] ^ a[t-2]     (feedback 7 = 1 + D + D^2)
//! p[t] = a[t] ^ a[t-2]              (forward  5 = 1 + D^2)
//! ```
//!
//! Frames are `info ++ crc16 ++ tail`, where the two tail inputs drive the
//! state back to zero. The parity stream is punctured to a fraction of the
//! trellis length and, for distributed coding, is the only thing sent.

use super::crc::{append_crc, check_crc, CRC_BITS};
use super::modem::Modulation;
use crate::error::{Error, Result};

pub const TAIL_BITS: usize = 2;
const PROTECTED_STEPS: usize = CRC_BITS + TAIL_BITS;
const STATES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Puncture {
    R12,
    R23,
    R34,
}

impl Puncture {
    pub const ALL: [Puncture; 3] = [Puncture::R12, Puncture::R23, Puncture::R34];

    /// Share of trellis steps whose parity bit is kept, as `(num, den)`.
    pub fn fraction(self) -> (usize, usize) {
        match self {
            Puncture::R12 => (1, 1),
            Puncture::R23 => (1, 2),
            Puncture::R34 => (1, 3),
        }
    }

    /// `round(fraction * steps)`, halves rounded up.
    pub fn parity_len(self, steps: usize) -> usize {
        let (num, den) = self.fraction();
        (2 * steps * num + den) / (2 * den)
    }

    /// Kept parity positions of a frame of `steps` trellis steps.
    ///
    /// The CRC and tail steps carry no side information, so their parity is
    /// kept first; the remaining budget is spread evenly over the data steps.
    pub fn mask(self, steps: usize) -> Vec<bool> {
        let total = self.parity_len(steps);
        let guarded = total.min(PROTECTED_STEPS).min(steps);
        let data = steps - guarded;
        let spread = total - guarded;
        let before = |t: usize| (2 * t * spread + data) / (2 * data.max(1));
        (0..steps)
            .map(|t| t >= data || before(t + 1) > before(t))
            .collect()
    }

    pub fn id(self) -> &'static str {
        match self {
            Puncture::R12 => "R12",
            Puncture::R23 => "R23",
            Puncture::R34 => "R34",
        }
    }
}

impl std::fmt::Display for Puncture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for Puncture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R12" => Ok(Puncture::R12),
            "R23" => Ok(Puncture::R23),
            "R34" => Ok(Puncture::R34),
            other => Err(Error::Parameter(format!(
                "unknown puncturing pattern {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeSpec {
    pub pattern: Puncture,
}

impl CodeSpec {
    pub fn new(pattern: Puncture) -> Self {
        Self { pattern }
    }

    /// Trellis length for `info_len` data bits: data, CRC and tail.
    pub fn steps(&self, info_len: usize) -> usize {
        info_len + CRC_BITS + TAIL_BITS
    }

    pub fn parity_len(&self, info_len: usize) -> usize {
        self.pattern.parity_len(self.steps(info_len))
    }
}

/// What leaves the transmitter of the distributed-coding branch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityFrame {
    pub parity: Vec<u8>,
    pub pattern: Puncture,
    pub info_len: usize,
    pub modulation: Modulation,
}

#[inline]
fn step(state: usize, u: u8) -> (usize, u8) {
    let a1 = (state >> 1) as u8 & 1;
    let a2 = state as u8 & 1;
    let a = u ^ a1 ^ a2;
    ((a as usize) << 1 | a1 as usize, a ^ a2)
}

#[inline]
fn tail_input(state: usize) -> u8 {
    ((state >> 1) ^ state) as u8 & 1
}

/// Runs the terminated encoder. Returns the full input sequence (with the
/// two tail bits) and the unpunctured parity stream, both of equal length.
pub fn rsc_encode(input: &[u8]) -> (Vec<u8>, Vec<u8>) {
    let mut state = 0;
    let mut systematic = Vec::with_capacity(input.len() + TAIL_BITS);
    let mut parity = Vec::with_capacity(input.len() + TAIL_BITS);
    let tail = std::iter::repeat_n(None, TAIL_BITS);
    for u in input.iter().map(|&u| Some(u)).chain(tail) {
        let u = u.unwrap_or_else(|| tail_input(state));
        let (next, p) = step(state, u);
        systematic.push(u);
        parity.push(p);
        state = next;
    }
    debug_assert_eq!(state, 0);
    (systematic, parity)
}

pub fn puncture(parity: &[u8], pattern: Puncture) -> Vec<u8> {
    let mask = pattern.mask(parity.len());
    parity
        .iter()
        .zip(mask)
        .filter(|&(_, keep)| keep)
        .map(|(&p, _)| p)
        .collect()
}

/// Spreads received parity LLRs over the trellis, zero at punctured steps.
pub fn depuncture(llrs: &[f64], pattern: Puncture, steps: usize) -> Vec<f64> {
    assert_eq!(
        llrs.len(),
        pattern.parity_len(steps),
        "parity length mismatch"
    );
    let mut it = llrs.iter();
    pattern
        .mask(steps)
        .into_iter()
        .map(|keep| if keep { *it.next().unwrap() } else { 0.0 })
        .collect()
}

/// Parity-only encoding: CRC, tail, RSC, puncture; systematic bits dropped.
pub fn dsc_encode(info: &[u8], code: &CodeSpec, modulation: Modulation) -> ParityFrame {
    let (_, parity) = rsc_encode(&append_crc(info));
    ParityFrame {
        parity: puncture(&parity, code.pattern),
        pattern: code.pattern,
        info_len: info.len(),
        modulation,
    }
}

/// Classic systematic encoding: returns (systematic incl. CRC and tail,
/// punctured parity).
pub fn encode_systematic(info: &[u8], code: &CodeSpec) -> (Vec<u8>, Vec<u8>) {
    let (systematic, parity) = rsc_encode(&append_crc(info));
    (systematic, puncture(&parity, code.pattern))
}

/// Maximum-likelihood input sequence for the zero-terminated trellis.
///
/// LLRs are positive when bit 0 is more likely. The branch metric is
/// `(1 - 2u) * Ls / 2 + (1 - 2p) * Lp / 2`; the returned sequence includes
/// the tail inputs.
pub fn viterbi(sys_llr: &[f64], par_llr: &[f64]) -> Vec<u8> {
    let steps = sys_llr.len();
    assert_eq!(par_llr.len(), steps);
    let mut metric = [f64::NEG_INFINITY; STATES];
    metric[0] = 0.0;
    // survivor[t][s] = (previous state, input) into state s at step t
    let mut survivor = vec![[(0u8, 0u8); STATES]; steps];
    for t in 0..steps {
        let mut next = [f64::NEG_INFINITY; STATES];
        let hs = 0.5 * sys_llr[t];
        let hp = 0.5 * par_llr[t];
        for s in 0..STATES {
            if metric[s] == f64::NEG_INFINITY {
                continue;
            }
            for u in 0..2u8 {
                let (ns, p) = step(s, u);
                let m = metric[s] + if u == 0 { hs } else { -hs } + if p == 0 { hp } else { -hp };
                if m > next[ns] {
                    next[ns] = m;
                    survivor[t][ns] = (s as u8, u);
                }
            }
        }
        metric = next;
    }
    let mut out = vec![0u8; steps];
    let mut s = 0usize;
    for t in (0..steps).rev() {
        let (prev, u) = survivor[t][s];
        out[t] = u;
        s = prev as usize;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub info_bits: Vec<u8>,
    pub crc_ok: bool,
}

/// Decoder with LLRs for every systematic position (data, CRC and tail).
pub fn decode_systematic(
    sys_llr: &[f64],
    parity_llr: &[f64],
    code: &CodeSpec,
    info_len: usize,
) -> DecodeResult {
    let steps = code.steps(info_len);
    assert_eq!(sys_llr.len(), steps, "systematic LLR length mismatch");
    let path = viterbi(sys_llr, &depuncture(parity_llr, code.pattern, steps));
    let framed = &path[..info_len + CRC_BITS];
    DecodeResult {
        info_bits: framed[..info_len].to_vec(),
        crc_ok: check_crc(framed),
    }
}

/// Side-information decoder: `side` covers the data bits; CRC and tail
/// positions enter with LLR 0.
pub fn dsc_decode(side: &[f64], parity_llr: &[f64], code: &CodeSpec) -> DecodeResult {
    let info_len = side.len();
    let mut sys = Vec::with_capacity(code.steps(info_len));
    sys.extend_from_slice(side);
    sys.resize(code.steps(info_len), 0.0);
    decode_systematic(&sys, parity_llr, code, info_len)
}
