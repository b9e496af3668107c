use datosc::digital::{dequantize, quantize};
use datosc::harness::{detect_effects, rows_to_csv, Experiment, ExperimentConfig, CSV_HEADER};
use datosc::link::{Scheme, SOURCE_STREAM};
use datosc::rng::{derive_seed, rng_stream};

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::parse(text).unwrap()
}

#[test]
fn noiseless_hybrid_reaches_quantizer_floor() {
    let cfg = config("channel = awgn\nscheme = da\nsnr = 300\ntrials = 100\n");
    let exp = Experiment::new(cfg.clone()).unwrap();
    let row = exp.run_point(Scheme::Da, 0, 300.0).unwrap();
    assert_eq!(row.fer, 0.0);
    let link = &exp.link;
    let qspec = link.full_quantizer(cfg.bits).unwrap();
    let kept = link.codec.selected_indices(cfg.k).unwrap();
    let mut floor = 0.0;
    for t in 0..cfg.trials as u64 {
        let seed = derive_seed(&[cfg.seed, 0, t]);
        let block = link.source.draw(&mut rng_stream(seed, SOURCE_STREAM));
        let full = link.codec.analyze(&block);
        let deq = dequantize(&quantize(&full, &qspec), &qspec);
        let err: f64 = (0..full.len())
            .filter(|i| !kept.contains(i))
            .map(|i| (deq[i] - full[i]).powi(2))
            .sum();
        floor += err / full.len() as f64;
    }
    floor /= cfg.trials as f64;
    assert!(
        row.data_mse <= floor + 1e-6,
        "{} vs floor {floor}",
        row.data_mse
    );
}

#[test]
fn analog_saturates_at_discarded_energy() {
    let cfg = config("channel = awgn\nscheme = analog\nsnr = 60\ntrials = 500\n");
    let exp = Experiment::new(cfg.clone()).unwrap();
    let row = exp.run_point(Scheme::Analog, 0, 60.0).unwrap();
    let kept = exp.link.codec.selected_indices(cfg.k).unwrap();
    let mut floor = 0.0;
    for t in 0..cfg.trials as u64 {
        let seed = derive_seed(&[cfg.seed, 0, t]);
        let block = exp.link.source.draw(&mut rng_stream(seed, SOURCE_STREAM));
        let full = exp.link.codec.analyze(&block);
        let e: f64 = (0..full.len())
            .filter(|i| !kept.contains(i))
            .map(|i| full[i] * full[i])
            .sum();
        floor += e / full.len() as f64;
    }
    floor /= cfg.trials as f64;
    assert!(
        (row.data_mse - floor).abs() < 0.01 * floor,
        "{} vs {floor}",
        row.data_mse
    );
}

#[test]
fn csv_bytes_independent_of_workers() {
    let text = "snr = 0:20:10\ntrials = 150\nseed = 9\n";
    let mut a = config(text);
    a.workers = 1;
    let mut b = config(text);
    b.workers = 3;
    let ra = Experiment::new(a).unwrap().run_sweep().unwrap();
    let rb = Experiment::new(b).unwrap().run_sweep().unwrap();
    assert_eq!(rows_to_csv(&ra), rows_to_csv(&rb));
    assert_eq!(ra.len(), 9);
}

#[test]
fn single_point_sweep_equals_run_point() {
    let exp = Experiment::new(config("snr = 10\ntrials = 120\nscheme = digital\n")).unwrap();
    let rows = exp.run_sweep().unwrap();
    let point = exp.run_point(Scheme::Digital, 0, 10.0).unwrap();
    // task accuracy is NaN for this source, so compare serialized rows
    assert_eq!(rows_to_csv(&rows), rows_to_csv(&[point]));
}

#[test]
fn empty_grid_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("empty.csv");
    let mut cfg = config("snr = \ntrials = 100\n");
    cfg.out = out.clone();
    let rows = Experiment::new(cfg).unwrap().write_sweep().unwrap();
    assert!(rows.is_empty());
    assert_eq!(
        std::fs::read_to_string(out).unwrap(),
        format!("{CSV_HEADER}\n")
    );
}

#[test]
fn standard_error_shrinks_with_trials() {
    let se = |trials| {
        let exp = Experiment::new(config(&format!(
            "scheme = analog\nsnr = 6\ntrials = {trials}\n"
        )))
        .unwrap();
        exp.run_point(Scheme::Analog, 0, 6.0).unwrap().data_mse_se
    };
    let ratio = se(1000) / se(4000);
    assert!((ratio - 2.0).abs() <= 0.4, "stderr ratio {ratio}");
}

#[test]
fn infeasible_plan_fails_before_trials() {
    let cfg = config("k = 64\nbits = 6\ntotal_uses = 40\ntrials = 100\n");
    assert!(Experiment::new(cfg).unwrap().run_sweep().is_err());
}

#[test]
fn default_sweep_matches_golden_report() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let cfg = ExperimentConfig::load(format!("{dir}/configs/default.conf")).unwrap();
    let rows = Experiment::new(cfg).unwrap().run_sweep().unwrap();
    let report = detect_effects(&rows_to_csv(&rows)).unwrap();
    let golden = std::fs::read_to_string(format!("{dir}/data/default_report.txt")).unwrap();
    assert_eq!(report.to_string(), golden);
}

#[test]
fn detector_on_synthetic_curves() {
    let csv = |rows: &[(&str, f64, f64)]| {
        let mut s = format!("{CSV_HEADER}\n");
        for (scheme, snr, mse) in rows {
            s += &format!("{scheme},{snr},100,0,0,{mse},0,0,0,nan,0,0,0,1\n");
        }
        s
    };
    let report = detect_effects(&csv(&[
        ("digital", 4.0, 1.0),
        ("digital", 6.0, 0.1),
        ("digital", 8.0, 0.09),
        ("analog", 4.0, 0.3),
        ("analog", 6.0, 0.2),
        ("analog", 8.0, 0.199),
        ("da", 4.0, 0.3),
        ("da", 6.0, 0.1),
        ("da", 8.0, 0.05),
    ]))
    .unwrap();
    let get = |s| report.scheme(s).unwrap().clone();
    assert_eq!(get(Scheme::Digital).cliff_snr, Some(6.0));
    assert_eq!(get(Scheme::Analog).cliff_snr, None);
    assert_eq!(get(Scheme::Analog).saturation_floor, Some(0.199));
    assert_eq!(get(Scheme::Da).saturation_floor, None);
    assert_eq!(report.graceful, Some(true));
}
