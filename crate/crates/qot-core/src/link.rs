//! A complete multi-span link.

use crate::error::CoreError;
use crate::fiber::FiberSpec;
use crate::grid::ChannelPlan;
use crate::pumps::PumpSet;

/// How a band is brought back to its launch power at the end of each span.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Amplification {
    LumpedIdeal,
    RamanRecovered,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BandPolicy {
    pub f_lo_thz: f64,
    pub f_hi_thz: f64,
    pub policy: Amplification,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinkConfig {
    pub fiber: FiberSpec,
    pub plan: ChannelPlan,
    pub pumps: PumpSet,
    pub n_spans: usize,
    pub bands: Vec<BandPolicy>,
    pub snr_ase_db: Option<f64>,
    pub snr_trx_db: Option<f64>,
}

impl LinkConfig {
    pub fn new(fiber: FiberSpec, plan: ChannelPlan, pumps: PumpSet, n_spans: usize) -> Result<Self, CoreError> {
        let l = Self {
            fiber,
            plan,
            pumps,
            n_spans,
            bands: Vec::new(),
            snr_ase_db: None,
            snr_trx_db: None,
        };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.n_spans < 1 {
            return Err(CoreError::Link("n_spans must be >= 1".into()));
        }
        self.fiber.validate()?;
        self.plan.validate()?;
        Ok(())
    }

    /// Policy for a channel frequency; lumped-ideal unless a band says otherwise.
    pub fn policy_at(&self, f_thz: f64) -> Amplification {
        self.bands
            .iter()
            .find(|b| f_thz >= b.f_lo_thz && f_thz <= b.f_hi_thz)
            .map(|b| b.policy)
            .unwrap_or(Amplification::LumpedIdeal)
    }
}
