//! Bit LLRs of quantizer labels under a Gaussian belief about each
//! coefficient.
//!
//! The true coefficient is modelled as `N(est, err_var)`. Each cell's
//! probability is a Gaussian CDF difference (end cells take the tails), and
//! the LLR of label bit `b` sums cell probabilities by the value of that bit.
//! Everything is computed in the log domain so a confident belief saturates
//! at the clip instead of producing `0/0`.

use super::quantizer::QuantizerSpec;
use super::{LlrVector, LLR_CLIP};
use crate::analog::Ieo;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// `ln Q(z)` for the standard normal upper tail, accurate far into the tail.
pub fn ln_q(z: f64) -> f64 {
    if z < 30.0 {
        (0.5 * libm::erfc(z / SQRT_2)).ln()
    } else {
        // asymptotic series, erfc underflows out here
        let z2 = z * z;
        -0.5 * z2 - z.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
            + (1.0 - 1.0 / z2 + 3.0 / (z2 * z2)).ln()
    }
}

/// `ln(Phi(b) - Phi(a))` for standardized bounds `a < b`.
pub fn ln_normal_mass(a: f64, b: f64) -> f64 {
    if a >= b {
        return f64::NEG_INFINITY;
    }
    if a >= 0.0 {
        // both in the upper tail: Q(a) - Q(b)
        let qa = ln_q(a);
        if qa == f64::NEG_INFINITY {
            return qa;
        }
        let qb = ln_q(b);
        qa + (-(qb - qa).exp()).ln_1p()
    } else if b <= 0.0 {
        ln_normal_mass(-b, -a)
    } else {
        // straddles zero, mass is at least moderate
        (1.0 - (ln_q(-a)).exp() - (ln_q(b)).exp())
            .max(f64::MIN_POSITIVE)
            .ln()
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Log-probabilities of every cell for one coefficient.
pub fn cell_log_probs(spec: &QuantizerSpec, i: usize, est: f64, err_var: f64) -> Vec<f64> {
    let levels = spec.levels();
    let sd = err_var.sqrt();
    if !(sd > 0.0) {
        let j = spec.cell(i, est);
        return (0..levels)
            .map(|c| if c == j { 0.0 } else { f64::NEG_INFINITY })
            .collect();
    }
    (0..levels)
        .map(|j| {
            let (lo, hi) = spec.cell_bounds(i, j);
            let a = if j == 0 {
                f64::NEG_INFINITY
            } else {
                (lo - est) / sd
            };
            let b = if j + 1 == levels {
                f64::INFINITY
            } else {
                (hi - est) / sd
            };
            ln_normal_mass(a, b)
        })
        .collect()
}

/// LLRs of the label bits (MSB first) of coefficient `i`.
pub fn coefficient_llrs(spec: &QuantizerSpec, i: usize, est: f64, err_var: f64) -> Vec<f64> {
    let logp = cell_log_probs(spec, i, est, err_var);
    let bits = spec.bits() as usize;
    (0..bits)
        .map(|t| {
            let shift = bits - 1 - t;
            let (mut zero, mut one) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for (j, &lp) in logp.iter().enumerate() {
                if (j >> shift) & 1 == 0 {
                    zero = log_add(zero, lp);
                } else {
                    one = log_add(one, lp);
                }
            }
            match (zero.is_finite(), one.is_finite()) {
                (true, true) => (zero - one).clamp(-LLR_CLIP, LLR_CLIP),
                (true, false) => LLR_CLIP,
                (false, true) => -LLR_CLIP,
                (false, false) => 0.0,
            }
        })
        .collect()
}

/// Systematic-position LLRs for the quantized labels of all coefficients.
/// `ieo` must cover every quantized index (use [`Ieo::expand`]).
pub fn side_info_llrs(ieo: &Ieo, spec: &QuantizerSpec) -> LlrVector {
    assert_eq!(
        ieo.est.len(),
        spec.len(),
        "side information must cover every coefficient"
    );
    let llrs = (0..spec.len())
        .flat_map(|i| coefficient_llrs(spec, i, ieo.est[i], ieo.err_var[i]))
        .collect();
    LlrVector::new(llrs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_q_matches_erfc_and_tail() {
        for z in [-3.0, 0.0, 1.0, 5.0, 20.0] {
            let direct = (0.5 * libm::erfc(z / SQRT_2)).ln();
            assert!((ln_q(z) - direct).abs() < 1e-9 * direct.abs().max(1.0));
        }
        // continuity across the switch point
        assert!((ln_q(29.999_999) - ln_q(30.0)).abs() < 1e-4);
        assert!(ln_q(100.0).is_finite());
    }

    #[test]
    fn one_bit_symmetric_belief_is_uninformative() {
        let q = QuantizerSpec::new(1, vec![1.0]).unwrap();
        for v in [1e-3, 0.5, 4.0] {
            assert!(coefficient_llrs(&q, 0, 0.0, v)[0].abs() < 1e-12);
        }
    }

    #[test]
    fn confident_belief_saturates() {
        let q = QuantizerSpec::new(3, vec![4.0]).unwrap();
        // cell 5 = 101 covers [1, 2)
        for v in [1e-12, 1e-30, 0.0] {
            assert_eq!(coefficient_llrs(&q, 0, 1.5, v), vec![-30.0, 30.0, -30.0]);
        }
    }

    #[test]
    fn masses_sum_to_one() {
        let q = QuantizerSpec::new(4, vec![2.0]).unwrap();
        for (est, v) in [(0.3, 0.2), (-5.0, 1.0), (1.9, 1e-4)] {
            let total: f64 = cell_log_probs(&q, 0, est, v).iter().map(|l| l.exp()).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
