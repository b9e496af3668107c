mod common;

use datosc::allocator::{
    AllocationPlan, AllocationRequest, CandidateGrid, FerTable, Resources, DEFAULT_FLOOR_THRESHOLD,
};
use datosc::channel::ChannelKind;
use datosc::digital::Puncture;
use datosc::link::{Link, Scheme};
use datosc::rng::derive_seed;
use datosc::semantic::SemanticCodec;
use datosc::source::{Source, SourceSpec};

fn request(snr_db: f64, lambda: f64, resources: Resources) -> AllocationRequest {
    AllocationRequest {
        resources,
        snr_db,
        lambda,
        floor_threshold: DEFAULT_FLOOR_THRESHOLD,
    }
}

#[test]
fn committed_fer_table_is_monotone() {
    let table = FerTable::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/fer_awgn.csv")).unwrap();
    for (pattern, bits) in table.keys().collect::<Vec<_>>() {
        let curve = table.curve(pattern, bits).unwrap();
        assert!(curve.iter().all(|p| p.trials >= 2000));
        for w in curve.windows(2) {
            let n = w[0].trials as f64;
            let var = |p: f64| (p * (1.0 - p)).max(1.0 / n) / n;
            let slack = 2.58 * (var(w[0].p_f) + var(w[1].p_f)).sqrt();
            assert!(
                w[1].p_f <= w[0].p_f + slack,
                "{pattern} B={bits}: {} dB {} -> {} dB {}",
                w[0].snr_db,
                w[0].p_f,
                w[1].snr_db,
                w[1].p_f
            );
        }
    }
}

#[test]
fn greedy_within_five_percent_of_exhaustive() {
    let model = common::default_model();
    let grid = CandidateGrid::standard(64);
    let cases = common::allocator_cases(&model);
    assert_eq!(cases.len(), 20);
    for (snr, lambda, res) in cases {
        let req = request(snr, lambda, res);
        let g = model.allocate_greedy(&req, &grid).unwrap();
        let e = model.allocate_exhaustive(&req, &grid).unwrap();
        g.plan.validate().unwrap();
        e.plan.validate().unwrap();
        assert!(
            e.cost <= g.cost,
            "{snr} dB: oracle {} above greedy {}",
            e.cost,
            g.cost
        );
        assert!(
            g.cost <= 1.05 * e.cost,
            "{snr} dB: greedy {} vs {}",
            g.cost,
            e.cost
        );
    }
}

#[test]
fn oracle_analog_share_grows_with_lambda() {
    let model = common::default_model();
    let grid = CandidateGrid::standard(64);
    for (snr, _, res) in common::allocator_cases(&model) {
        let share = |l| {
            model
                .allocate_exhaustive(&request(snr, l, res), &grid)
                .unwrap()
                .plan
                .p_a_fraction()
        };
        assert!(share(0.9) >= share(0.1), "{snr} dB");
    }
}

#[test]
fn digital_model_tracks_simulation() {
    let cfg = datosc::harness::ExperimentConfig::default();
    let src = Source::new(SourceSpec::gauss_markov(cfg.n, cfg.rho, cfg.source_seed)).unwrap();
    let codec = SemanticCodec::calibrate(&src).unwrap();
    let model = {
        let m = common::default_model();
        datosc::allocator::DistortionModel::new(&codec, ChannelKind::Awgn, m.fer().cloned())
    };
    let link = Link::new(src, codec, ChannelKind::Awgn).unwrap();
    let res = Resources::default_for(64);
    let plans = [
        AllocationPlan::hybrid(&res, 16, Some((3, Puncture::R12)), 0.5, 0.5).unwrap(),
        AllocationPlan::hybrid(&res, 16, Some((2, Puncture::R12)), 0.4, 0.5).unwrap(),
        AllocationPlan::hybrid(&res, 8, Some((3, Puncture::R12)), 0.3, 0.5).unwrap(),
    ];
    for plan in &plans {
        for snr in [8.0, 12.0, 16.0] {
            let trials = 4000u64;
            let sim = (0..trials)
                .map(|t| {
                    link.run_trial(Scheme::Da, plan, snr, derive_seed(&[31, t]))
                        .unwrap()
                        .data_mse
                })
                .sum::<f64>()
                / trials as f64;
            let m = model.digital_distortion(plan, snr).unwrap();
            assert!(
                (m - sim).abs() <= 0.15 * sim,
                "k={} B={} pa={} at {snr} dB: model {m} vs sim {sim}",
                plan.k,
                plan.bits,
                plan.p_a_fraction()
            );
        }
    }
}
