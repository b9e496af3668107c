use crate::analog::analog_uses;
use crate::channel::ChannelBudget;
use crate::digital::{CodeSpec, Modulation, Puncture};
use crate::error::{param, Error, Result};

/// Channel-use and power split of one block between the branches.
///
/// `pattern == None` switches the digital branch off. Code rates follow the
/// bandwidth-ratio convention: source symbols per channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationPlan {
    pub n: usize,
    pub k: usize,
    pub total_uses: usize,
    pub analog_uses: usize,
    pub digital_uses: usize,
    pub power_total: f64,
    pub power_analog: f64,
    pub power_digital: f64,
    pub bits: u8,
    pub pattern: Option<Puncture>,
    pub modulation: Modulation,
    pub lambda: f64,
}

/// Fixed resources a plan must fit into.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resources {
    pub n: usize,
    pub total_uses: usize,
    pub power_total: f64,
    pub modulation: Modulation,
}

impl Resources {
    /// `N = 2n` uses at unit average power per use.
    pub fn default_for(n: usize) -> Self {
        Self {
            n,
            total_uses: 2 * n,
            power_total: (2 * n) as f64,
            modulation: Modulation::Qpsk,
        }
    }
}

/// Channel uses of the parity-only stream for `n` coefficients at `bits`.
pub fn parity_uses(n: usize, bits: u8, pattern: Puncture, modulation: Modulation) -> usize {
    let info = n * bits as usize;
    modulation.uses(CodeSpec::new(pattern).parity_len(info))
}

impl AllocationPlan {
    /// Hybrid plan: `k` analog coefficients, parity of all `n` coefficients
    /// quantized to `bits`, analog power `p_a_fraction * P`.
    pub fn hybrid(
        res: &Resources,
        k: usize,
        digital: Option<(u8, Puncture)>,
        p_a_fraction: f64,
        lambda: f64,
    ) -> Result<Self> {
        let analog = analog_uses(k);
        let (bits, pattern, digital_uses, frac) = match digital {
            Some((b, p)) => (
                b,
                Some(p),
                parity_uses(res.n, b, p, res.modulation),
                p_a_fraction,
            ),
            None => (0, None, 0, 1.0),
        };
        let plan = Self {
            n: res.n,
            k,
            total_uses: res.total_uses,
            analog_uses: analog,
            digital_uses,
            power_total: res.power_total,
            power_analog: frac * res.power_total,
            power_digital: (1.0 - frac) * res.power_total,
            bits,
            pattern,
            modulation: res.modulation,
            lambda,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Separate-coding baseline: the `k` feature coefficients quantized to
    /// `bits` and sent with systematic and parity bits, all power digital.
    pub fn digital_only(
        res: &Resources,
        k: usize,
        bits: u8,
        pattern: Puncture,
        lambda: f64,
    ) -> Result<Self> {
        let code = CodeSpec::new(pattern);
        let info = k * bits as usize;
        let coded = code.steps(info) + code.parity_len(info);
        let plan = Self {
            n: res.n,
            k,
            total_uses: res.total_uses,
            analog_uses: 0,
            digital_uses: res.modulation.uses(coded),
            power_total: res.power_total,
            power_analog: 0.0,
            power_digital: res.power_total,
            bits,
            pattern: Some(pattern),
            modulation: res.modulation,
            lambda,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn budget(&self) -> ChannelBudget {
        ChannelBudget {
            total_uses: self.total_uses,
            analog_uses: self.analog_uses,
            digital_uses: self.digital_uses,
            power_total: self.power_total,
            power_analog: self.power_analog,
            power_digital: self.power_digital,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return param(format!("lambda = {} outside (0, 1)", self.lambda));
        }
        if self.k > self.n {
            return param(format!("k = {} exceeds n = {}", self.k, self.n));
        }
        if self.pattern.is_some() && !(1..=8).contains(&self.bits) {
            return param(format!("quantizer depth {} outside 1..=8", self.bits));
        }
        self.budget().validate()?;
        if self.analog_uses > 0 && !(self.power_analog > 0.0) {
            return Err(Error::Allocation("analog uses without analog power".into()));
        }
        if self.digital_uses > 0 && !(self.power_digital > 0.0) {
            return Err(Error::Allocation(
                "digital uses without digital power".into(),
            ));
        }
        Ok(())
    }

    pub fn has_digital(&self) -> bool {
        self.pattern.is_some() && self.digital_uses > 0
    }

    /// `n / N_a`, infinite when the analog branch is off.
    pub fn analog_code_rate(&self) -> f64 {
        self.n as f64 / self.analog_uses as f64
    }

    /// `n / N_d`, infinite when the digital branch is off.
    pub fn digital_code_rate(&self) -> f64 {
        self.n as f64 / self.digital_uses as f64
    }

    pub fn p_a_fraction(&self) -> f64 {
        self.power_analog / self.power_total
    }

    pub fn analog_power_per_use(&self) -> f64 {
        self.budget().analog_power_per_use()
    }

    pub fn digital_power_per_use(&self) -> f64 {
        self.budget().digital_power_per_use()
    }
}
