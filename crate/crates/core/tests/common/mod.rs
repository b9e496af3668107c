//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::{PI, SQRT_2};

/// Bit-by-bit RSC (1, 5/7): feedback 1 + D + D^2, forward 1 + D^2, two
/// zero-forcing tail inputs. Returns (inputs incl. tail, parity).
pub fn naive_rsc(info: &[u8]) -> (Vec<u8>, Vec<u8>) {
    let (mut r1, mut r2) = (0u8, 0u8);
    let mut sys = Vec::new();
    let mut par = Vec::new();
    for t in 0..info.len() + 2 {
        let u = if t < info.len() { info[t] } else { r1 ^ r2 };
        let a = u ^ r1 ^ r2;
        sys.push(u);
        par.push(a ^ r2);
        r2 = r1;
        r1 = a;
    }
    assert_eq!((r1, r2), (0, 0));
    (sys, par)
}

/// Exhaustive ML over all `2^K` data sequences of a terminated trellis of
/// `K + 2` steps, using the correlation metric `sum (1 - 2b) L`.
pub fn brute_force_ml(sys_llr: &[f64], par_llr: &[f64]) -> Vec<u8> {
    let k = sys_llr.len() - 2;
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for word in 0u32..1 << k {
        let info: Vec<u8> = (0..k).map(|i| (word >> i & 1) as u8).collect();
        let (sys, par) = naive_rsc(&info);
        let metric: f64 = sys
            .iter()
            .zip(sys_llr)
            .chain(par.iter().zip(par_llr))
            .map(|(&b, &l)| (1.0 - 2.0 * b as f64) * l)
            .sum();
        if metric > best.0 {
            best = (metric, sys);
        }
    }
    best.1
}

pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

pub fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    (-(x - mean).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adapt(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(fa, flm, fm, a, m);
    let right = simpson(fm, frm, fb, m, b);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    adapt(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + adapt(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to relative tolerance
/// `rel`, seeded with a 64-panel composite estimate.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, rel: f64) -> f64 {
    let panels = 64;
    let h = (b - a) / panels as f64;
    let rough: f64 = (0..panels)
        .map(|i| {
            let (x0, x1) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            simpson(f(x0), f(0.5 * (x0 + x1)), f(x1), x0, x1)
        })
        .sum();
    let tol = rel * rough.abs() / panels as f64;
    (0..panels)
        .map(|i| {
            let (x0, x1) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (fa, fm, fb) = (f(x0), f(0.5 * (x0 + x1)), f(x1));
            adapt(&f, x0, x1, fa, fm, fb, simpson(fa, fm, fb, x0, x1), tol, 50)
        })
        .sum()
}

/// Half-width of a 95% normal-approximation interval.
pub fn ci95(se: f64) -> f64 {
    1.96 * se
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Default experiment model with the committed decode-failure table.
pub fn default_model() -> datosc::allocator::DistortionModel {
    use datosc::allocator::{DistortionModel, FerTable};
    use datosc::semantic::SemanticCodec;
    use datosc::source::{Source, SourceSpec};
    let cfg = datosc::harness::ExperimentConfig::default();
    let src = Source::new(SourceSpec::gauss_markov(cfg.n, cfg.rho, cfg.source_seed)).unwrap();
    let codec = SemanticCodec::calibrate(&src).unwrap();
    let fer = FerTable::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/fer_awgn.csv")).unwrap();
    DistortionModel::new(&codec, cfg.channel, Some(fer))
}

/// The pinned 20-case allocator suite: `(snr_db, lambda, resources)`.
/// Draws whose analog floor is unreachable (greedy has no plan) are
/// redrawn.
pub fn allocator_cases(
    model: &datosc::allocator::DistortionModel,
) -> Vec<(f64, f64, datosc::allocator::Resources)> {
    use datosc::allocator::{AllocationRequest, CandidateGrid, Resources, DEFAULT_FLOOR_THRESHOLD};
    use datosc::digital::Modulation;
    use rand::Rng;
    let mut rng = datosc::rng::rng_from_seed(0xA110C);
    let grid = CandidateGrid::standard(64);
    std::iter::repeat_with(|| {
        let snr = (rng.random_range(0.0..20.0f64) * 10.0).round() / 10.0;
        let lambda = (rng.random_range(0.05..0.95f64) * 100.0).round() / 100.0;
        let total_uses = rng.random_range(64..=192usize);
        let power_total =
            total_uses as f64 * (rng.random_range(0.5..2.0f64) * 100.0).round() / 100.0;
        let res = Resources {
            n: 64,
            total_uses,
            power_total,
            modulation: Modulation::Qpsk,
        };
        (snr, lambda, res)
    })
    .filter(|&(snr, lambda, res)| {
        let req = AllocationRequest {
            resources: res,
            snr_db: snr,
            lambda,
            floor_threshold: DEFAULT_FLOOR_THRESHOLD,
        };
        model.analog_floor(&req, &grid).is_ok()
    })
    .take(20)
    .collect()
}

/// Decaying variance profile `6 * 0.75^i`.
pub fn vars(k: usize) -> Vec<f64> {
    (0..k).map(|i| 6.0 * 0.75f64.powi(i as i32)).collect()
}

pub fn gaussian_feature<R: rand::Rng>(
    rng: &mut R,
    vars: &[f64],
) -> datosc::semantic::SemanticFeature {
    let k = vars.len();
    let coeffs = vars
        .iter()
        .map(|v| v.sqrt() * rng.sample::<f64, _>(rand_distr::StandardNormal))
        .collect();
    datosc::semantic::SemanticFeature::new(coeffs, (0..k).collect(), vars.to_vec(), vec![0.0; k], k)
        .unwrap()
}

/// Empirical squared error and mean closed-form error variance over
/// `trials` frames.
pub fn mmse_run(
    kind: datosc::channel::ChannelKind,
    snr_db: f64,
    trials: u64,
    power: f64,
) -> (f64, f64) {
    use datosc::analog::{encode_analog, estimate};
    use datosc::channel::{transmit, ChannelState};
    use datosc::rng::{derive_seed, rng_from_seed};
    let v = vars(16);
    let mut rng = rng_from_seed(derive_seed(&[23, snr_db.to_bits()]));
    let (mut se, mut ev) = (0.0, 0.0);
    for t in 0..trials {
        let feat = gaussian_feature(&mut rng, &v);
        let frame = encode_analog(&feat, power, 8).unwrap();
        let st = ChannelState::draw(kind, snr_db, derive_seed(&[24, snr_db.to_bits(), t]));
        let ieo = estimate(&transmit(&frame.symbols, &st, 0), &st, &frame.meta);
        se += ieo
            .est
            .iter()
            .zip(&feat.coeffs)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>();
        ev += ieo.err_var.iter().sum::<f64>();
    }
    let denom = (trials * 16) as f64;
    (se / denom, ev / denom)
}
