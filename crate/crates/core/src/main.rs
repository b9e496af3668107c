use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use datosc::allocator::{calibrate_fer, FerCalibration};
use datosc::channel::ChannelKind;
use datosc::digital::Puncture;
use datosc::harness::{detect_effects, parse_snr_grid, Experiment, ExperimentConfig};
use datosc::seu::{session_log_csv, seu_overhead_report, DriftSpec, IntLink, SeuExperiment};

#[derive(Parser)]
#[command(
    name = "datosc",
    version,
    about = "Digital-analog semantic link simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// key = value experiment file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    /// analog, digital, da, a comma list, or all
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    /// "start:stop:step" in dB, or a comma list
    #[arg(long)]
    snr: Option<String>,
    /// worker threads, 0 for all cores
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                ExperimentConfig::load(p).with_context(|| format!("reading {}", p.display()))?
            }
            None => ExperimentConfig::default(),
        };
        let overrides = [
            ("seed", self.seed.map(|v| v.to_string())),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("trials", self.trials.map(|v| v.to_string())),
            ("scheme", self.scheme.clone()),
            ("lambda", self.lambda.map(|v| v.to_string())),
            ("snr", self.snr.clone()),
            ("workers", self.workers.map(|v| v.to_string())),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo SNR sweep, one CSV row per point and scheme
    Sweep(Common),
    /// Build the decode-failure table used by model-based allocation
    CalibrateFer(Common),
    /// Parameter-update sessions; writes the session log of session 0
    Seu(SeuArgs),
    /// Cliff, saturation and improvement report for a sweep CSV
    Detect {
        csv: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SeuArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// sessions
    #[arg(long, default_value_t = 500)]
    trials: usize,
    #[arg(long, default_value_t = 10.0)]
    snr: f64,
    #[arg(long, default_value = "awgn")]
    channel: ChannelKind,
    #[arg(long, default_value = "R34")]
    pattern: Puncture,
    /// true bit-flip probability between copies
    #[arg(long, default_value_t = 0.01)]
    p: f64,
    /// drift rate assumed by the device (defaults to p)
    #[arg(long)]
    p_hat: Option<f64>,
    #[arg(long, default_value_t = 512)]
    ints: usize,
    #[arg(long, default_value_t = 8)]
    int_bits: u8,
    #[arg(long, default_value_t = 256)]
    floats: usize,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Sweep(common) => {
            let cfg = common.config()?;
            let out = cfg.out.clone();
            let rows = Experiment::new(cfg)?.write_sweep()?;
            eprintln!("wrote {} rows to {}", rows.len(), out.display());
        }
        Command::CalibrateFer(common) => {
            let mut cfg = common.config()?;
            if common.snr.is_none() {
                cfg.snr_db = parse_snr_grid("-10:30:2")?;
            }
            if common.out.is_none() {
                cfg.out = PathBuf::from("fer_table.csv");
            }
            let exp = Experiment::new(cfg.clone())?;
            let cal = FerCalibration {
                grid_db: cfg.snr_db.clone(),
                modulation: cfg.modulation,
                ..FerCalibration::standard(cfg.k, cfg.trials, cfg.seed)
            };
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.workers)
                .build()?;
            let table = pool.install(|| calibrate_fer(&exp.link, &cal))?;
            table.save(&cfg.out)?;
            eprintln!("wrote FER table to {}", cfg.out.display());
        }
        Command::Seu(a) => {
            let exp = SeuExperiment {
                floats: a.floats,
                ints: a.ints,
                int_bits: a.int_bits,
                drift: DriftSpec {
                    float_noise_std: 0.1,
                    flip_prob: a.p,
                },
                link: IntLink::new(a.pattern, a.p_hat.unwrap_or(a.p)),
                channel: a.channel,
                snr_db: a.snr,
                float_power: 1.0,
                seed: a.seed,
            };
            let sessions = exp.run(a.trials)?;
            let ok = sessions.iter().filter(|s| s.success).count();
            let float_mse =
                sessions.iter().map(|s| s.float_mse).sum::<f64>() / sessions.len().max(1) as f64;
            println!(
                "sessions={} success_rate={}",
                sessions.len(),
                ok as f64 / sessions.len().max(1) as f64
            );
            println!("float_mse={float_mse}");
            if let Some(first) = sessions.first() {
                let r = seu_overhead_report(
                    &first.ints.frames,
                    a.ints * a.int_bits as usize,
                    first.analog_uses,
                );
                println!(
                    "parity_bits={} analog_uses={} full_bits={} reduction={}",
                    r.parity_bits, r.analog_uses, r.full_bits, r.reduction
                );
                if let Some(out) = a.out {
                    std::fs::write(&out, session_log_csv(&first.ints.frames))?;
                }
            }
        }
        Command::Detect { csv, out } => {
            let text = std::fs::read_to_string(&csv)
                .with_context(|| format!("reading {}", csv.display()))?;
            let report = detect_effects(&text)?.to_string();
            match out {
                Some(p) => std::fs::write(p, report)?,
                None => print!("{report}"),
            }
        }
    }
    Ok(())
}
