//! AWGN and quasi-static Rayleigh block fading, plus the orthogonal
//! multiplexer that splits a block's channel uses between the branches.
//!
//! `snr_db` is the average received SNR per channel use at unit transmit
//! power, averaged over fading (E|h|^2 = 1). The receiver knows `h` exactly.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::{rng_stream, SimRng};

/// Noise stream of the analog partition.
pub const ANALOG_STREAM: u64 = 0;
/// Noise stream of the digital partition.
pub const DIGITAL_STREAM: u64 = 1;
const FADING_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Awgn,
    Rayleigh,
}

impl std::str::FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "awgn" => Ok(Self::Awgn),
            "rayleigh" => Ok(Self::Rayleigh),
            other => Err(Error::Parameter(format!("unknown channel {other:?}"))),
        }
    }
}

impl std::fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Awgn => "awgn",
            Self::Rayleigh => "rayleigh",
        })
    }
}

/// Channel realization for one block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelState {
    pub snr_db: f64,
    /// Complex noise variance per use; each real dimension carries half.
    pub noise_var: f64,
    pub h: Complex64,
    pub seed: u64,
}

pub fn noise_var_for(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

impl ChannelState {
    pub fn awgn(snr_db: f64, seed: u64) -> Self {
        Self {
            snr_db,
            noise_var: noise_var_for(snr_db),
            h: Complex64::new(1.0, 0.0),
            seed,
        }
    }

    /// Rayleigh block: `h ~ CN(0, 1)` drawn from the seed's fading stream.
    pub fn rayleigh(snr_db: f64, seed: u64) -> Self {
        let mut rng = rng_stream(seed, FADING_STREAM);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Self {
            h: Complex64::new(s * re, s * im),
            ..Self::awgn(snr_db, seed)
        }
    }

    pub fn draw(kind: ChannelKind, snr_db: f64, seed: u64) -> Self {
        match kind {
            ChannelKind::Awgn => Self::awgn(snr_db, seed),
            ChannelKind::Rayleigh => Self::rayleigh(snr_db, seed),
        }
    }

    /// State of block `block_index` in a run seeded with `seed`.
    pub fn for_block(kind: ChannelKind, snr_db: f64, seed: u64, block_index: u64) -> Self {
        Self::draw(kind, snr_db, seed ^ block_index)
    }

    pub fn gain2(&self) -> f64 {
        self.h.norm_sqr()
    }

    /// Noise variance of one real dimension.
    pub fn noise_var_dim(&self) -> f64 {
        self.noise_var / 2.0
    }

    /// Noise generator for one partition of this block.
    pub fn noise_rng(&self, stream: u64) -> SimRng {
        rng_stream(self.seed, stream)
    }
}

/// `y = h x + w` with `w ~ CN(0, noise_var)` drawn from `rng`.
pub fn transmit_with<R: Rng + ?Sized>(
    symbols: &[Complex64],
    state: &ChannelState,
    rng: &mut R,
) -> Vec<Complex64> {
    let sd = state.noise_var_dim().sqrt();
    symbols
        .iter()
        .map(|&x| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            state.h * x + Complex64::new(sd * re, sd * im)
        })
        .collect()
}

/// Transmits over noise stream `stream` of the block.
pub fn transmit(symbols: &[Complex64], state: &ChannelState, stream: u64) -> Vec<Complex64> {
    transmit_with(symbols, state, &mut state.noise_rng(stream))
}

/// Channel uses and energy of one block, split between the branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelBudget {
    pub total_uses: usize,
    pub analog_uses: usize,
    pub digital_uses: usize,
    pub power_total: f64,
    pub power_analog: f64,
    pub power_digital: f64,
}

impl ChannelBudget {
    pub fn validate(&self) -> Result<()> {
        if self.analog_uses + self.digital_uses > self.total_uses {
            return Err(Error::Allocation(format!(
                "{} analog + {} digital uses exceed {} total",
                self.analog_uses, self.digital_uses, self.total_uses
            )));
        }
        let powers = [self.power_total, self.power_analog, self.power_digital];
        if powers.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::Allocation(
                "powers must be finite and non-negative".into(),
            ));
        }
        if self.power_analog + self.power_digital > self.power_total * (1.0 + 1e-12) {
            return Err(Error::Allocation(format!(
                "power {} + {} exceeds total {}",
                self.power_analog, self.power_digital, self.power_total
            )));
        }
        Ok(())
    }

    /// Average analog power per channel use, `P_a / N_a`.
    pub fn analog_power_per_use(&self) -> f64 {
        if self.analog_uses == 0 {
            0.0
        } else {
            self.power_analog / self.analog_uses as f64
        }
    }

    /// Average digital power per channel use, `P_d / N_d`.
    pub fn digital_power_per_use(&self) -> f64 {
        if self.digital_uses == 0 {
            0.0
        } else {
            self.power_digital / self.digital_uses as f64
        }
    }
}

/// Received partitions of one multiplexed block.
#[derive(Debug, Clone)]
pub struct Demultiplexed {
    pub analog: Vec<Complex64>,
    pub digital: Vec<Complex64>,
    /// Transmitted energy per partition.
    pub analog_energy: f64,
    pub digital_energy: f64,
}

/// Sends both branches over orthogonal partitions of the same block.
///
/// Symbols arrive already scaled by their branch encoders to the per-use
/// power of the budget. Both partitions see the block's gain `h` and
/// independent noise streams.
pub fn multiplex(
    analog: &[Complex64],
    digital: &[Complex64],
    budget: &ChannelBudget,
    state: &ChannelState,
) -> Result<Demultiplexed> {
    budget.validate()?;
    if analog.len() > budget.analog_uses {
        return Err(Error::Allocation(format!(
            "{} analog symbols exceed {} analog uses",
            analog.len(),
            budget.analog_uses
        )));
    }
    if digital.len() > budget.digital_uses {
        return Err(Error::Allocation(format!(
            "{} digital symbols exceed {} digital uses",
            digital.len(),
            budget.digital_uses
        )));
    }
    let energy = |s: &[Complex64]| s.iter().map(|x| x.norm_sqr()).sum::<f64>();
    Ok(Demultiplexed {
        analog: transmit(analog, state, ANALOG_STREAM),
        digital: transmit(digital, state, DIGITAL_STREAM),
        analog_energy: energy(analog),
        digital_energy: energy(digital),
    })
}
