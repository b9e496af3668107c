//! End-to-end transmission of one source block under each scheme.
//!
//! - `analog`: top-k feature over the analog branch only.
//! - `digital`: top-k feature quantized and sent with systematic and parity
//!   bits; a failed CRC yields an all-zero block.
//! - `da`: analog feature plus parity of all `n` quantized coefficients,
//!   decoded with the analog estimates as side information.

use crate::allocator::AllocationPlan;
use crate::analog::{encode_analog, estimate, Ieo};
use crate::channel::{multiplex, ChannelKind, ChannelState};
use crate::digital::{
    decode_systematic, demodulate, dequantize, dsc_decode, dsc_encode, encode_systematic, modulate,
    quantize, refine, side_info_llrs, CodeSpec, QuantizerSpec,
};
use crate::error::{Error, Result};
use crate::rng::rng_stream;
use crate::semantic::SemanticCodec;
use crate::source::{Source, SourceBlock};

/// Stream of a trial seed that draws the source block.
pub const SOURCE_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    Analog,
    Digital,
    Da,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Analog, Scheme::Digital, Scheme::Da];

    pub fn id(self) -> &'static str {
        match self {
            Scheme::Analog => "analog",
            Scheme::Digital => "digital",
            Scheme::Da => "da",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analog" => Ok(Scheme::Analog),
            "digital" => Ok(Scheme::Digital),
            "da" => Ok(Scheme::Da),
            other => Err(Error::Parameter(format!("unknown scheme {other:?}"))),
        }
    }
}

/// Per-trial measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub feature_mse: f64,
    pub data_mse: f64,
    /// Digital frame failed its CRC (always false without a digital branch).
    pub frame_error: bool,
    /// Nearest-centroid decision matched the label; `None` for unlabelled
    /// sources.
    pub task_correct: Option<bool>,
}

/// Where trial blocks come from.
#[derive(Debug, Clone)]
pub enum BlockSource {
    Generator(Source),
    /// Fixed block set (e.g. image tiles), sampled uniformly with replacement.
    Pool(Vec<SourceBlock>),
}

impl BlockSource {
    pub fn n(&self) -> usize {
        match self {
            BlockSource::Generator(s) => s.n(),
            BlockSource::Pool(blocks) => blocks.first().map_or(0, SourceBlock::len),
        }
    }

    pub fn draw<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> SourceBlock {
        match self {
            BlockSource::Generator(s) => s.draw(rng),
            BlockSource::Pool(blocks) => blocks[rng.random_range(0..blocks.len())].clone(),
        }
    }
}

impl From<Source> for BlockSource {
    fn from(s: Source) -> Self {
        BlockSource::Generator(s)
    }
}

/// Source, codec and channel model shared by all trials of an experiment.
#[derive(Debug, Clone)]
pub struct Link {
    pub source: BlockSource,
    pub codec: SemanticCodec,
    pub channel: ChannelKind,
}

impl Link {
    pub fn new(
        source: impl Into<BlockSource>,
        codec: SemanticCodec,
        channel: ChannelKind,
    ) -> Result<Self> {
        let source = source.into();
        if let BlockSource::Pool(blocks) = &source {
            if blocks.is_empty() || blocks.iter().any(|b| b.len() != codec.n()) {
                return Err(Error::Parameter(
                    "block pool is empty or has mixed sizes".into(),
                ));
            }
        }
        if source.n() != codec.n() {
            return Err(Error::Parameter(
                "source and codec dimensions differ".into(),
            ));
        }
        Ok(Self {
            source,
            codec,
            channel,
        })
    }

    /// Quantizer over all `n` coefficients used by the hybrid scheme.
    pub fn full_quantizer(&self, bits: u8) -> Result<QuantizerSpec> {
        QuantizerSpec::from_prior_vars(bits, self.codec.prior_vars())
    }

    /// Runs one trial; all randomness derives from `trial_seed`.
    pub fn run_trial(
        &self,
        scheme: Scheme,
        plan: &AllocationPlan,
        snr_db: f64,
        trial_seed: u64,
    ) -> Result<TrialOutcome> {
        let block = self.source.draw(&mut rng_stream(trial_seed, SOURCE_STREAM));
        let full = self.codec.analyze(&block);
        let state = ChannelState::draw(self.channel, snr_db, trial_seed);
        let (indices, est_full, frame_error) = match scheme {
            Scheme::Digital => self.digital_trial(plan, &full, &state)?,
            Scheme::Analog | Scheme::Da => self.hybrid_trial(scheme, plan, &full, &state)?,
        };
        let k = indices.len() as f64;
        let feature_mse = indices
            .iter()
            .map(|&i| (est_full[i] - full[i]).powi(2))
            .sum::<f64>()
            / k;
        let estimate = self.codec.synthesize_full(&est_full);
        let data_mse = estimate
            .samples
            .iter()
            .zip(&block.samples)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            / block.len() as f64;
        let task_correct = match (self.codec.task(), block.label) {
            (Some(task), Some(label)) => Some(task.classify(&est_full) == label),
            _ => None,
        };
        Ok(TrialOutcome {
            feature_mse,
            data_mse,
            frame_error,
            task_correct,
        })
    }

    fn hybrid_trial(
        &self,
        scheme: Scheme,
        plan: &AllocationPlan,
        full: &[f64],
        state: &ChannelState,
    ) -> Result<(Vec<usize>, Vec<f64>, bool)> {
        let feature = self.codec.select(full, plan.k)?;
        let budget = plan.budget();
        let analog = encode_analog(&feature, budget.analog_power_per_use(), budget.analog_uses)?;
        let use_digital = scheme == Scheme::Da && plan.has_digital();
        let digital = if use_digital {
            let pattern = plan.pattern.expect("checked by has_digital");
            let qspec = self.full_quantizer(plan.bits)?;
            let frame = dsc_encode(
                &quantize(full, &qspec),
                &CodeSpec::new(pattern),
                plan.modulation,
            );
            let amp = budget.digital_power_per_use().sqrt();
            Some((
                qspec,
                frame.clone(),
                modulate(&frame.parity, plan.modulation, amp),
                amp,
            ))
        } else {
            None
        };
        let empty = Vec::new();
        let digital_syms = digital.as_ref().map_or(&empty, |d| &d.2);
        let budget = if use_digital {
            budget
        } else {
            // analog scheme over a hybrid plan: the digital partition idles
            crate::channel::ChannelBudget {
                digital_uses: 0,
                power_digital: 0.0,
                ..budget
            }
        };
        let rx = multiplex(&analog.symbols, digital_syms, &budget, state)?;
        let ieo = estimate(&rx.analog, state, &analog.meta)
            .expand(&feature.indices, self.codec.prior_vars());
        let Some((qspec, frame, _, amp)) = digital else {
            return Ok((feature.indices, ieo.est, false));
        };
        let (cells, ok) = self.decode_parity(&ieo, &qspec, &frame, &rx.digital, state, amp);
        let refined = refine(&ieo, cells.as_deref(), &qspec);
        Ok((feature.indices, refined, !ok))
    }

    fn decode_parity(
        &self,
        ieo: &Ieo,
        qspec: &QuantizerSpec,
        frame: &crate::digital::ParityFrame,
        received: &[num_complex::Complex64],
        state: &ChannelState,
        amp: f64,
    ) -> (Option<Vec<usize>>, bool) {
        let side = side_info_llrs(ieo, qspec);
        let parity = demodulate(received, state, frame.modulation, amp, frame.parity.len());
        let res = dsc_decode(&side, &parity, &CodeSpec::new(frame.pattern));
        if res.crc_ok {
            (Some(qspec.bits_to_cells(&res.info_bits)), true)
        } else {
            (None, false)
        }
    }

    fn digital_trial(
        &self,
        plan: &AllocationPlan,
        full: &[f64],
        state: &ChannelState,
    ) -> Result<(Vec<usize>, Vec<f64>, bool)> {
        let pattern = plan
            .pattern
            .ok_or_else(|| Error::Parameter("digital scheme needs a code pattern".into()))?;
        let code = CodeSpec::new(pattern);
        let feature = self.codec.select(full, plan.k)?;
        let qspec = QuantizerSpec::from_prior_vars(plan.bits, &feature.prior_vars)?;
        let info = quantize(&feature.coeffs, &qspec);
        let (sys, par) = encode_systematic(&info, &code);
        let coded: Vec<u8> = sys.iter().chain(&par).copied().collect();
        let budget = plan.budget();
        let amp = budget.digital_power_per_use().sqrt();
        let rx = multiplex(&[], &modulate(&coded, plan.modulation, amp), &budget, state)?;
        let llr = demodulate(&rx.digital, state, plan.modulation, amp, coded.len());
        let (sys_llr, par_llr) = llr.split_at(sys.len());
        let res = decode_systematic(sys_llr, par_llr, &code, info.len());
        let mut est = vec![0.0; full.len()];
        if res.crc_ok {
            for (&i, v) in feature
                .indices
                .iter()
                .zip(dequantize(&res.info_bits, &qspec))
            {
                est[i] = v;
            }
        }
        Ok((feature.indices, est, !res.crc_ok))
    }
}
