//! BPSK / Gray-mapped QPSK with coherent soft demodulation.

use num_complex::Complex64;

use super::LlrVector;
use crate::channel::ChannelState;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulation {
    Bpsk,
    Qpsk,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Bpsk => 1,
            Modulation::Qpsk => 2,
        }
    }

    /// Channel uses needed for `bits`.
    pub fn uses(self, bits: usize) -> usize {
        bits.div_ceil(self.bits_per_symbol())
    }
}

impl std::str::FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bpsk" => Ok(Modulation::Bpsk),
            "qpsk" => Ok(Modulation::Qpsk),
            other => Err(Error::Parameter(format!("unknown modulation {other:?}"))),
        }
    }
}

impl std::fmt::Display for Modulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Modulation::Bpsk => "bpsk",
            Modulation::Qpsk => "qpsk",
        })
    }
}

#[inline]
fn polar(b: u8) -> f64 {
    1.0 - 2.0 * f64::from(b)
}

/// Maps bits to symbols of energy `amplitude^2`. An odd bit count under
/// QPSK is padded with one 0 bit.
pub fn modulate(bits: &[u8], scheme: Modulation, amplitude: f64) -> Vec<Complex64> {
    match scheme {
        Modulation::Bpsk => bits
            .iter()
            .map(|&b| Complex64::new(amplitude * polar(b), 0.0))
            .collect(),
        Modulation::Qpsk => {
            let a = amplitude * std::f64::consts::FRAC_1_SQRT_2;
            bits.chunks(2)
                .map(|p| Complex64::new(a * polar(p[0]), a * polar(p.get(1).copied().unwrap_or(0))))
                .collect()
        }
    }
}

/// Per-bit LLRs (positive favours 0) for the first `nbits` bits.
///
/// BPSK: `4 a Re(conj(h) y) / N0`; QPSK applies the same per dimension with
/// amplitude `a / sqrt(2)`.
pub fn demodulate(
    received: &[Complex64],
    state: &ChannelState,
    scheme: Modulation,
    amplitude: f64,
    nbits: usize,
) -> LlrVector {
    assert!(scheme.uses(nbits) <= received.len(), "not enough symbols");
    let hc = state.h.conj();
    let mut llr = Vec::with_capacity(nbits);
    match scheme {
        Modulation::Bpsk => {
            let s = 4.0 * amplitude / state.noise_var;
            llr.extend(received[..nbits].iter().map(|&y| s * (hc * y).re));
        }
        Modulation::Qpsk => {
            let s = 4.0 * amplitude * std::f64::consts::FRAC_1_SQRT_2 / state.noise_var;
            for &y in &received[..scheme.uses(nbits)] {
                let z = hc * y;
                llr.push(s * z.re);
                llr.push(s * z.im);
            }
            llr.truncate(nbits);
        }
    }
    LlrVector::new(llr)
}
