mod common;

use common::{gaussian_feature, mmse_run, vars};
use datosc::allocator::{AllocationPlan, DistortionModel, Resources};
use datosc::analog::encode_analog;
use datosc::channel::{multiplex, transmit, ChannelBudget, ChannelKind, ChannelState};
use datosc::digital::{modulate, Modulation};
use datosc::rng::{derive_seed, rng_from_seed};
use num_complex::Complex64;
use rand::Rng;

#[test]
fn unit_snr_noise_variance() {
    let x = vec![Complex64::new(1.0, 0.0); 1_000_000];
    let st = ChannelState::awgn(0.0, 3);
    let y = transmit(&x, &st, 0);
    let v = y
        .iter()
        .zip(&x)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        / x.len() as f64;
    assert!((0.99..=1.01).contains(&v), "noise variance {v}");
}

#[test]
fn rayleigh_mean_power_gain() {
    let g = (0..100_000u64)
        .map(|s| ChannelState::rayleigh(10.0, derive_seed(&[5, s])).gain2())
        .sum::<f64>()
        / 100_000.0;
    assert!((0.98..=1.02).contains(&g), "mean |h|^2 {g}");
}

#[test]
fn partition_power_ratio() {
    let mut rng = rng_from_seed(21);
    let v = vars(64);
    let budget = ChannelBudget {
        total_uses: 64,
        analog_uses: 32,
        digital_uses: 32,
        power_total: 64.0,
        power_analog: 32.0,
        power_digital: 32.0,
    };
    let (mut ea, mut ed) = (0.0, 0.0);
    for f in 0..10_000u64 {
        let frame = encode_analog(
            &gaussian_feature(&mut rng, &v),
            budget.analog_power_per_use(),
            32,
        )
        .unwrap();
        let bits: Vec<u8> = (0..64).map(|_| rng.random_range(0..2u8)).collect();
        let digital = modulate(
            &bits,
            Modulation::Qpsk,
            budget.digital_power_per_use().sqrt(),
        );
        let rx = multiplex(
            &frame.symbols,
            &digital,
            &budget,
            &ChannelState::awgn(10.0, f),
        )
        .unwrap();
        ea += rx.analog_energy / 32.0;
        ed += rx.digital_energy / 32.0;
    }
    let ratio = ea / ed;
    assert!((ratio - 1.0).abs() < 0.01, "power ratio {ratio}");
}

#[test]
fn analog_frame_power_meter() {
    let mut rng = rng_from_seed(22);
    let v = vars(16);
    let mut p = 0.0;
    for _ in 0..10_000 {
        p += encode_analog(&gaussian_feature(&mut rng, &v), 2.5, 8)
            .unwrap()
            .power_per_use();
    }
    let ratio = p / 10_000.0 / 2.5;
    assert!((0.99..=1.01).contains(&ratio), "power / budget {ratio}");
}

#[test]
fn mmse_error_matches_closed_form() {
    for snr in [0.0, 10.0, 20.0] {
        let (mse, err_var) = mmse_run(ChannelKind::Awgn, snr, 100_000, 1.0);
        assert!(
            (mse - err_var).abs() < 0.02 * err_var,
            "{snr} dB: {mse} vs {err_var}"
        );
    }
}

#[test]
fn rayleigh_analog_model_matches_monte_carlo() {
    let v = vars(16);
    let model =
        DistortionModel::from_parts(v.clone(), (0..16).collect(), ChannelKind::Rayleigh, None);
    let res = Resources {
        n: 16,
        total_uses: 8,
        power_total: 8.0,
        modulation: Modulation::Qpsk,
    };
    let plan = AllocationPlan::hybrid(&res, 16, None, 1.0, 0.5).unwrap();
    for snr in [0.0, 10.0, 20.0] {
        let (mc, _) = mmse_run(
            ChannelKind::Rayleigh,
            snr,
            100_000,
            plan.analog_power_per_use(),
        );
        let m = model.analog_distortion(&plan, snr);
        assert!((m - mc).abs() < 0.03 * mc, "{snr} dB: model {m} vs {mc}");
    }
}
