use datosc::channel::{ChannelKind, ChannelState};
use datosc::digital::Puncture;
use datosc::seu::{
    drift, ints_to_bits, seu_overhead_report, seu_send_floats, seu_update_ints, DriftSpec, IntLink,
    ModelParams, SeuExperiment,
};

fn experiment(pattern: Puncture, p: f64, p_hat: f64, snr_db: f64) -> SeuExperiment {
    SeuExperiment {
        floats: 0,
        ints: 512,
        int_bits: 8,
        drift: DriftSpec {
            float_noise_std: 0.1,
            flip_prob: p,
        },
        link: IntLink::new(pattern, p_hat),
        channel: ChannelKind::Awgn,
        snr_db,
        float_power: 1.0,
        seed: 7,
    }
}

fn success_rate(exp: &SeuExperiment, sessions: usize) -> f64 {
    let out = exp.run(sessions).unwrap();
    for s in &out {
        if s.ints.crc_ok {
            assert_eq!(s.ints.bit_errors(), 0, "miscorrection behind a passing CRC");
        }
    }
    out.iter().filter(|s| s.success).count() as f64 / sessions as f64
}

#[test]
fn drift_flip_rate_and_determinism() {
    let params = ModelParams::random(10, 125_000, 8, 1).unwrap();
    for p in [0.01, 0.2] {
        let spec = DriftSpec {
            float_noise_std: 0.0,
            flip_prob: p,
        };
        let old = drift(&params, &spec, 2).unwrap();
        let a = ints_to_bits(&params.ints, 8);
        let b = ints_to_bits(&old.ints, 8);
        let rate = a.iter().zip(&b).filter(|(x, y)| x != y).count() as f64 / a.len() as f64;
        assert!((rate - p).abs() <= 0.002, "flip rate {rate} for p = {p}");
        assert_eq!(drift(&params, &spec, 2).unwrap(), old);
        assert_eq!(old.floats, params.floats);
    }
    let none = DriftSpec {
        float_noise_std: 0.0,
        flip_prob: 0.0,
    };
    assert_eq!(drift(&params, &none, 3).unwrap(), params);
}

#[test]
fn float_stream_matches_analog_formula() {
    let params = ModelParams::random(100_000, 0, 8, 4).unwrap();
    let vars = vec![1.0; params.floats.len()];
    let st = ChannelState::awgn(10.0, 5);
    let (ieo, uses) = seu_send_floats(&params.floats, &vars, 1.0, &st).unwrap();
    assert_eq!(uses, 50_000);
    let mse = ieo
        .est
        .iter()
        .zip(&params.floats)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / 1e5;
    let model = ieo.err_var.iter().sum::<f64>() / 1e5;
    assert!((mse - model).abs() < 0.02 * model, "{mse} vs {model}");
    let noiseless = seu_send_floats(&params.floats, &vars, 1.0, &ChannelState::awgn(300.0, 5))
        .unwrap()
        .0;
    let worst = noiseless
        .est
        .iter()
        .zip(&params.floats)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-9);
}

#[test]
fn float_stream_power_normalization() {
    let params = ModelParams::random(100_000, 0, 8, 6).unwrap();
    let frame = datosc::analog::encode_analog(
        &datosc::semantic::SemanticFeature::new(
            params.floats.clone(),
            (0..100_000).collect(),
            vec![1.0; 100_000],
            vec![0.0; 100_000],
            100_000,
        )
        .unwrap(),
        2.0,
        50_000,
    )
    .unwrap();
    let ratio = frame.power_per_use() / 2.0;
    assert!((ratio - 1.0).abs() < 0.01, "{ratio}");
}

#[test]
fn noiseless_identity_and_overhead() {
    let params = ModelParams::random(0, 4096 / 8, 8, 8).unwrap();
    let st = ChannelState::awgn(300.0, 1);
    for pattern in Puncture::ALL {
        let link = IntLink::new(pattern, 0.01);
        let up = seu_update_ints(&params.ints, &params.ints, 8, &link, &st).unwrap();
        assert!(up.crc_ok);
        assert_eq!(up.corrected, params.ints);
        let report = seu_overhead_report(&up.frames, 4096, 0);
        let total: usize = up.frames.iter().map(|f| f.parity_bits).sum();
        assert_eq!(report.parity_bits, total);
        match pattern {
            Puncture::R12 => assert!(report.reduction.abs() < 0.02),
            Puncture::R34 => assert!((report.reduction - 2.0 / 3.0).abs() < 0.01),
            Puncture::R23 => assert!((report.reduction - 0.5).abs() < 0.01),
        }
    }
}

#[test]
fn misreported_drift_rate_hurts() {
    let matched = success_rate(&experiment(Puncture::R23, 0.01, 0.01, 10.0), 300);
    let wrong = success_rate(&experiment(Puncture::R23, 0.01, 0.25, 10.0), 300);
    assert!(wrong < matched, "mismatched {wrong} vs matched {matched}");
}

#[test]
fn success_non_increasing_in_drift() {
    let rates: Vec<f64> = [0.002, 0.01, 0.03]
        .iter()
        .map(|&p| success_rate(&experiment(Puncture::R12, p, p, 10.0), 200))
        .collect();
    for w in rates.windows(2) {
        let slack = 2.58 * (0.25f64 / 200.0).sqrt();
        assert!(w[1] <= w[0] + slack, "{rates:?}");
    }
}
