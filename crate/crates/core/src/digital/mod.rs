//! Digital branch: quantizer, CRC-protected punctured RSC code, modem, and
//! the side-information decoder that turns analog estimates into systematic
//! LLRs so only parity has to be transmitted.

pub mod code;
pub mod crc;
pub mod modem;
pub mod quantizer;
pub mod refine;
pub mod side_info;

pub use code::{
    decode_systematic, dsc_decode, dsc_encode, encode_systematic, viterbi, CodeSpec, DecodeResult,
    ParityFrame, Puncture,
};
pub use modem::{demodulate, modulate, Modulation};
pub use quantizer::{dequantize, quantize, QuantizerSpec};
pub use refine::refine;
pub use side_info::side_info_llrs;

/// Magnitude limit of every LLR in the decoder.
pub const LLR_CLIP: f64 = 30.0;

/// Log-likelihood ratios `ln P(0) / P(1)`, finite and clipped to ±30.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrVector(Vec<f64>);

impl LlrVector {
    pub fn new(mut llrs: Vec<f64>) -> Self {
        for l in &mut llrs {
            *l = if l.is_nan() {
                0.0
            } else {
                l.clamp(-LLR_CLIP, LLR_CLIP)
            };
        }
        Self(llrs)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn hard_decisions(&self) -> Vec<u8> {
        self.0.iter().map(|&l| u8::from(l < 0.0)).collect()
    }
}

impl std::ops::Deref for LlrVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}
