//! Fixed quadrature for expectations over the Rayleigh power gain.

use std::sync::OnceLock;

pub const POINTS: usize = 64;
const LN_LO: f64 = -27.631_021_115_928_547; // ln 1e-12
const LN_HI: f64 = 3.912_023_005_428_146; // ln 50

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=m {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(x_j, w_j)` with `sum w_j f(x_j) ~ E f(X)`, `X ~ Exp(1)`.
///
/// Integrates in `t = ln x`, where the density `e^t exp(-e^t)` is smooth
/// and bounded, so high-SNR integrands with a knee near `x = 1/snr` stay
/// resolved.
pub fn exp1_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let (nodes, weights) = gauss_legendre(POINTS);
        let half = 0.5 * (LN_HI - LN_LO);
        let mid = 0.5 * (LN_HI + LN_LO);
        nodes
            .iter()
            .zip(&weights)
            .map(|(&u, &w)| {
                let x = (mid + half * u).exp();
                (x, w * half * x * (-x).exp())
            })
            .collect()
    })
}

pub fn expect_exp1(f: impl Fn(f64) -> f64) -> f64 {
    exp1_rule().iter().map(|&(x, w)| w * f(x)).sum()
}
