//! Linear analog mapping of semantic coefficients with MMSE reception.
//!
//! Coefficient `i` is scaled by `g_i = c * var_i^(-1/4)`, the minimum total
//! MSE linear power allocation for independent Gaussian coefficients, and
//! two scaled coefficients share one complex channel use (I and Q). The
//! constant `c` makes the expected energy of the frame equal
//! `per_use_power * N_a`, with `N_a = ceil(k / 2)`.

use num_complex::Complex64;

use crate::channel::ChannelState;
use crate::error::{param, Error, Result};
use crate::semantic::{SemanticCodec, SemanticFeature};
use crate::source::SourceBlock;

/// Complex channel uses needed for `k` real coefficients.
pub fn analog_uses(k: usize) -> usize {
    k.div_ceil(2)
}

/// Receiver-side description of a frame: everything but the symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogMeta {
    pub gains: Vec<f64>,
    pub indices: Vec<usize>,
    pub prior_vars: Vec<f64>,
    pub n: usize,
    pub per_use_power: f64,
}

impl AnalogMeta {
    pub fn k(&self) -> usize {
        self.gains.len()
    }

    pub fn uses(&self) -> usize {
        analog_uses(self.k())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalogFrame {
    pub symbols: Vec<Complex64>,
    pub meta: AnalogMeta,
}

impl AnalogFrame {
    /// Mean `|x|^2` per channel use of this realization.
    pub fn power_per_use(&self) -> f64 {
        if self.symbols.is_empty() {
            return 0.0;
        }
        self.symbols.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.symbols.len() as f64
    }
}

/// Intermediate estimation output: MMSE estimates and their error variances.
#[derive(Debug, Clone, PartialEq)]
pub struct Ieo {
    pub est: Vec<f64>,
    pub err_var: Vec<f64>,
}

impl Ieo {
    /// Estimates over all `n` coefficients: analog-discarded ones fall back
    /// to the prior (mean 0, variance `prior_vars[i]`).
    pub fn expand(&self, indices: &[usize], prior_vars: &[f64]) -> Ieo {
        let mut est = vec![0.0; prior_vars.len()];
        let mut err_var = prior_vars.to_vec();
        for (j, &i) in indices.iter().enumerate() {
            est[i] = self.est[j];
            err_var[i] = self.err_var[j];
        }
        Ieo { est, err_var }
    }

    /// Pure prior over `prior_vars`; what the receiver knows without any
    /// analog observation.
    pub fn prior(prior_vars: &[f64]) -> Ieo {
        Ieo {
            est: vec![0.0; prior_vars.len()],
            err_var: prior_vars.to_vec(),
        }
    }
}

/// Gains `c * var^(-1/4)` normalized to `sum g^2 var = per_use_power * ceil(k/2)`.
pub fn analog_gains(prior_vars: &[f64], per_use_power: f64) -> Vec<f64> {
    let energy = per_use_power * analog_uses(prior_vars.len()) as f64;
    let denom: f64 = prior_vars.iter().map(|v| v.sqrt()).sum();
    let c = (energy / denom).sqrt();
    prior_vars.iter().map(|v| c * v.powf(-0.25)).collect()
}

/// Posterior error variance of one coefficient.
pub fn mmse_err_var(prior_var: f64, gain: f64, gain2: f64, noise_var_dim: f64) -> f64 {
    prior_var * noise_var_dim / (gain * gain * gain2 * prior_var + noise_var_dim)
}

pub fn encode_analog(
    feature: &SemanticFeature,
    per_use_power: f64,
    uses: usize,
) -> Result<AnalogFrame> {
    let k = feature.k();
    if k > 2 * uses {
        return Err(Error::Allocation(format!(
            "{k} coefficients need {} analog uses, only {uses} available",
            analog_uses(k)
        )));
    }
    if !(per_use_power > 0.0) || !per_use_power.is_finite() {
        return param("analog power per use must be positive");
    }
    let gains = analog_gains(&feature.prior_vars, per_use_power);
    let scaled: Vec<f64> = gains
        .iter()
        .zip(&feature.coeffs)
        .map(|(g, x)| g * x)
        .collect();
    let symbols = scaled
        .chunks(2)
        .map(|p| Complex64::new(p[0], p.get(1).copied().unwrap_or(0.0)))
        .collect();
    Ok(AnalogFrame {
        symbols,
        meta: AnalogMeta {
            gains,
            indices: feature.indices.clone(),
            prior_vars: feature.prior_vars.clone(),
            n: feature.n,
            per_use_power,
        },
    })
}

/// Per-coefficient MMSE estimates from the received frame.
pub fn estimate(received: &[Complex64], state: &ChannelState, meta: &AnalogMeta) -> Ieo {
    assert!(received.len() >= meta.uses(), "received frame too short");
    let nd = state.noise_var_dim();
    let g2h = state.gain2();
    let mut est = Vec::with_capacity(meta.k());
    let mut err_var = Vec::with_capacity(meta.k());
    for (i, (&g, &v)) in meta.gains.iter().zip(&meta.prior_vars).enumerate() {
        let z = state.h.conj() * received[i / 2];
        let zi = if i % 2 == 0 { z.re } else { z.im };
        let denom = g * g * g2h * v + nd;
        est.push(g * v * zi / denom);
        err_var.push(v * nd / denom);
    }
    Ieo { est, err_var }
}

/// Returns the IEO and the reconstructed block (UEO).
pub fn decode_analog(
    received: &[Complex64],
    state: &ChannelState,
    meta: &AnalogMeta,
    codec: &SemanticCodec,
) -> Result<(Ieo, SourceBlock)> {
    let ieo = estimate(received, state, meta);
    let feature = SemanticFeature::new(
        ieo.est.clone(),
        meta.indices.clone(),
        meta.prior_vars.clone(),
        vec![0.0; meta.k()],
        meta.n,
    )?;
    let ueo = codec.synthesize(&feature)?;
    Ok((ieo, ueo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{transmit, ChannelState};

    fn feature(coeffs: Vec<f64>, vars: Vec<f64>) -> SemanticFeature {
        let k = coeffs.len();
        SemanticFeature::new(coeffs, (0..k).collect(), vars, vec![0.0; k], k).unwrap()
    }

    #[test]
    fn equal_variances_equal_gains() {
        let g = analog_gains(&[2.0; 6], 1.0);
        assert!(g.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-15));
    }

    #[test]
    fn gain_ratio_follows_quarter_power() {
        let g = analog_gains(&[4.0, 1.0], 1.0);
        assert!((g[0] / g[1] - 0.25f64.powf(0.25)).abs() < 1e-6);
        assert!((g[0] / g[1] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-4);
    }

    #[test]
    fn expected_energy_normalization() {
        let vars = [5.0, 1.0, 0.3];
        let g = analog_gains(&vars, 2.0);
        let e: f64 = g.iter().zip(&vars).map(|(g, v)| g * g * v).sum();
        assert!((e - 2.0 * 2.0).abs() < 1e-12);
    }

    #[test]
    fn too_many_coefficients() {
        let f = feature(vec![1.0; 5], vec![1.0; 5]);
        assert!(matches!(
            encode_analog(&f, 1.0, 2),
            Err(Error::Allocation(_))
        ));
        let frame = encode_analog(&f, 1.0, 3).unwrap();
        assert_eq!(frame.symbols.len(), 3);
        assert_eq!(frame.symbols[2].im, 0.0);
    }

    #[test]
    fn noiseless_estimate_is_exact() {
        let f = feature(vec![0.4, -1.3, 2.2], vec![1.0, 2.0, 3.0]);
        let frame = encode_analog(&f, 1.0, 2).unwrap();
        let st = ChannelState::rayleigh(300.0, 4);
        let rx = transmit(&frame.symbols, &st, 0);
        let ieo = estimate(&rx, &st, &frame.meta);
        for (a, b) in ieo.est.iter().zip(&f.coeffs) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!(ieo.err_var.iter().all(|&e| e > 0.0 && e < 1e-20));
    }

    #[test]
    fn scalar_closed_form() {
        assert!((mmse_err_var(1.0, 1.0, 1.0, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn err_var_strictly_decreasing_in_effective_gain() {
        let mut last = f64::INFINITY;
        for i in 0..200 {
            let gg = 0.01 * 1.07f64.powi(i);
            let e = mmse_err_var(2.0, gg.sqrt(), 1.0, 0.3);
            assert!(e < last && e > 0.0 && e <= 2.0);
            last = e;
        }
    }

    #[test]
    fn linear_in_scaled_input() {
        // feature x a, prior x a^2, power x a^2 and noise x a^2: same SNR,
        // estimates scale by a
        let f = feature(vec![0.5, -0.25, 1.5, 0.1], vec![1.0, 0.5, 2.0, 0.2]);
        let a = 3.0;
        let fa = SemanticFeature::new(
            f.coeffs.iter().map(|c| a * c).collect(),
            f.indices.clone(),
            f.prior_vars.iter().map(|v| a * a * v).collect(),
            f.task_weights.clone(),
            f.n,
        )
        .unwrap();
        let st = ChannelState::rayleigh(5.0, 8);
        let st_a = ChannelState {
            noise_var: st.noise_var * a * a,
            ..st
        };
        let fr = encode_analog(&f, 1.0, 2).unwrap();
        let fra = encode_analog(&fa, a * a, 2).unwrap();
        let e1 = estimate(&transmit(&fr.symbols, &st, 0), &st, &fr.meta);
        let e2 = estimate(&transmit(&fra.symbols, &st_a, 0), &st_a, &fra.meta);
        for (x, y) in e1.est.iter().zip(&e2.est) {
            assert!((a * x - y).abs() < 1e-9);
        }
    }
}
