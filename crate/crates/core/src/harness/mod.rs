//! Monte-Carlo SNR sweeps over the three schemes, CSV output, and the
//! cliff / saturation / graceful-improvement detectors.

mod config;
mod effects;

pub use config::{parse_snr_grid, Allocation, ExperimentConfig, MIN_TRIALS};
pub use effects::{detect_effects, parse_sweep_csv, EffectReport, SchemeEffects};

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::allocator::{
    AllocationPlan, AllocationRequest, CandidateGrid, DistortionModel, FerTable,
};
use crate::error::{Error, Result};
use crate::link::{BlockSource, Link, Scheme, TrialOutcome};
use crate::rng::derive_seed;
use crate::semantic::SemanticCodec;
use crate::source::{load_pgm, Source, SourceKind, SourceSpec};

pub const CSV_HEADER: &str = "scheme,snr_db,trials,feature_mse,feature_mse_se,data_mse,\
data_mse_se,system_distortion,fer,task_accuracy,n_analog,n_digital,p_a_fraction,seed";

/// Aggregated measurements of one scheme at one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub snr_db: f64,
    pub trials: usize,
    pub feature_mse: f64,
    pub feature_mse_se: f64,
    pub data_mse: f64,
    pub data_mse_se: f64,
    pub system_distortion: f64,
    pub fer: f64,
    /// NaN for unlabelled sources.
    pub task_accuracy: f64,
    pub n_analog: usize,
    pub n_digital: usize,
    pub p_a_fraction: f64,
    pub seed: u64,
}

/// C `%.9g`: nine significant digits, shortest form, `nan` / `inf`.
pub fn fmt_g9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..9).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    strip_zeros(&format!("{:.*}", (8 - exp) as usize, x)).to_string()
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

impl SweepRow {
    pub fn to_csv_line(&self) -> String {
        [
            self.scheme.id().to_string(),
            fmt_g9(self.snr_db),
            self.trials.to_string(),
            fmt_g9(self.feature_mse),
            fmt_g9(self.feature_mse_se),
            fmt_g9(self.data_mse),
            fmt_g9(self.data_mse_se),
            fmt_g9(self.system_distortion),
            fmt_g9(self.fer),
            fmt_g9(self.task_accuracy),
            self.n_analog.to_string(),
            self.n_digital.to_string(),
            fmt_g9(self.p_a_fraction),
            self.seed.to_string(),
        ]
        .join(",")
    }
}

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.to_csv_line());
    }
    out
}

/// Sample mean and standard error of the mean.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// A configured experiment: link, budget and, for model-based allocation,
/// the distortion model.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub link: Link,
    model: Option<DistortionModel>,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let (source, codec) = match config.source {
            SourceKind::ImageBlocks => {
                let path = config.image.as_ref().expect("validated");
                let blocks = load_pgm(path)?;
                let codec = SemanticCodec::from_blocks(&blocks)?;
                (BlockSource::Pool(blocks), codec)
            }
            kind => {
                let spec = SourceSpec {
                    kind,
                    n: config.n,
                    rho: config.rho,
                    classes: config.classes,
                    seed: config.source_seed,
                };
                let source = Source::new(spec)?;
                let codec = SemanticCodec::calibrate(&source)?;
                (BlockSource::Generator(source), codec)
            }
        };
        let model = match config.allocation {
            Allocation::Fixed => None,
            Allocation::Greedy => {
                let fer = FerTable::load(config.fer_table.as_ref().expect("validated"))?;
                Some(DistortionModel::new(&codec, config.channel, Some(fer)))
            }
        };
        let link = Link::new(source, codec, config.channel)?;
        Ok(Self {
            config,
            link,
            model,
        })
    }

    /// Plan of `scheme` at `snr_db`.
    pub fn plan(&self, scheme: Scheme, snr_db: f64) -> Result<AllocationPlan> {
        let cfg = &self.config;
        let res = cfg.resources();
        match scheme {
            Scheme::Analog => AllocationPlan::hybrid(&res, cfg.k, None, 1.0, cfg.lambda),
            Scheme::Digital => AllocationPlan::digital_only(
                &res,
                cfg.k,
                cfg.digital_bits,
                cfg.digital_pattern,
                cfg.lambda,
            ),
            Scheme::Da => match &self.model {
                None => AllocationPlan::hybrid(
                    &res,
                    cfg.k,
                    Some((cfg.bits, cfg.pattern)),
                    cfg.p_a_fraction,
                    cfg.lambda,
                ),
                Some(model) => {
                    let req = AllocationRequest {
                        resources: res,
                        snr_db,
                        lambda: cfg.lambda,
                        floor_threshold: cfg.floor_threshold,
                    };
                    Ok(model
                        .allocate_greedy(&req, &CandidateGrid::standard(res.n))?
                        .plan)
                }
            },
        }
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.workers)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))
    }

    /// Runs every trial of one point. Trial `t` of point `point_index` uses
    /// seed `derive_seed([seed, point_index, t])` for every scheme, so
    /// schemes are compared on identical blocks and channel draws.
    pub fn run_point(&self, scheme: Scheme, point_index: usize, snr_db: f64) -> Result<SweepRow> {
        let plan = self.plan(scheme, snr_db)?;
        self.pool()?
            .install(|| self.run_point_with(scheme, &plan, point_index, snr_db))
    }

    fn run_point_with(
        &self,
        scheme: Scheme,
        plan: &AllocationPlan,
        point_index: usize,
        snr_db: f64,
    ) -> Result<SweepRow> {
        let cfg = &self.config;
        let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let seed = derive_seed(&[cfg.seed, point_index as u64, t as u64]);
                self.link.run_trial(scheme, plan, snr_db, seed)
            })
            .collect::<Result<_>>()?;
        Ok(aggregate(scheme, snr_db, plan, cfg, &outcomes))
    }

    /// One row per (grid point, scheme), grid order then scheme order.
    /// Plans are built (and checked) before any trial runs.
    pub fn run_sweep(&self) -> Result<Vec<SweepRow>> {
        let cfg = &self.config;
        let mut jobs = Vec::new();
        for (pi, &snr) in cfg.snr_db.iter().enumerate() {
            for &scheme in &cfg.schemes {
                jobs.push((pi, snr, scheme, self.plan(scheme, snr)?));
            }
        }
        let pool = self.pool()?;
        jobs.iter()
            .map(|(pi, snr, scheme, plan)| {
                pool.install(|| self.run_point_with(*scheme, plan, *pi, *snr))
            })
            .collect()
    }

    /// Runs the sweep and writes the CSV to the configured path.
    pub fn write_sweep(&self) -> Result<Vec<SweepRow>> {
        let rows = self.run_sweep()?;
        std::fs::write(&self.config.out, rows_to_csv(&rows))?;
        Ok(rows)
    }
}

fn aggregate(
    scheme: Scheme,
    snr_db: f64,
    plan: &AllocationPlan,
    cfg: &ExperimentConfig,
    outcomes: &[TrialOutcome],
) -> SweepRow {
    let fm: Vec<f64> = outcomes.iter().map(|o| o.feature_mse).collect();
    let dm: Vec<f64> = outcomes.iter().map(|o| o.data_mse).collect();
    let (feature_mse, feature_mse_se) = mean_se(&fm);
    let (data_mse, data_mse_se) = mean_se(&dm);
    let errors = outcomes.iter().filter(|o| o.frame_error).count();
    let labelled: Vec<bool> = outcomes.iter().filter_map(|o| o.task_correct).collect();
    let task_accuracy = if labelled.is_empty() {
        f64::NAN
    } else {
        labelled.iter().filter(|&&c| c).count() as f64 / labelled.len() as f64
    };
    SweepRow {
        scheme,
        snr_db,
        trials: outcomes.len(),
        feature_mse,
        feature_mse_se,
        data_mse,
        data_mse_se,
        system_distortion: cfg.lambda * feature_mse + (1.0 - cfg.lambda) * data_mse,
        fer: errors as f64 / outcomes.len() as f64,
        task_accuracy,
        n_analog: plan.analog_uses,
        n_digital: plan.digital_uses,
        p_a_fraction: plan.p_a_fraction(),
        seed: cfg.seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g9_formatting() {
        assert_eq!(fmt_g9(0.0), "0");
        assert_eq!(fmt_g9(10.0), "10");
        assert_eq!(fmt_g9(-2.5), "-2.5");
        assert_eq!(fmt_g9(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt_g9(123456789.0), "123456789");
        assert_eq!(fmt_g9(1234567890.0), "1.23456789e+09");
        assert_eq!(fmt_g9(0.0001), "0.0001");
        assert_eq!(fmt_g9(0.00001234), "1.234e-05");
        assert_eq!(fmt_g9(f64::NAN), "nan");
        assert_eq!(fmt_g9(0.99999999999), "1");
        assert_eq!(fmt_g9(2.0f64.sqrt() * 1e-7), "1.41421356e-07");
    }

    #[test]
    fn mean_and_standard_error() {
        let (m, se) = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn header_only_for_empty_grid() {
        assert_eq!(rows_to_csv(&[]), format!("{CSV_HEADER}\n"));
    }
}
