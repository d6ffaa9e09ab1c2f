//! Single-polarization split-step Fourier simulation of a small WDM comb.
//!
//! Channels are Nyquist (sinc) pulses, so each one occupies exactly its
//! symbol-rate bandwidth and the receiver's rectangular filter is matched to
//! it. Loss and Raman gain enter per channel band from a power profile rather
//! than by simulating the pumps. Field power is in mW throughout.

mod grid;
mod propagate;

pub use propagate::{simulate_link, simulate_many};

use num_complex::Complex64;
use qot_raman::PowerProfile;
use thiserror::Error;

/// Reported SNR when the received symbols carry no measurable distortion.
pub const SNR_CEILING_DB: f64 = 100.0;

#[derive(Debug, Error)]
pub enum SsfmError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("aliasing: occupied band {occupied_ghz:.1} GHz x {oversampling} exceeds the simulation band {sim_ghz:.1} GHz")]
    Aliasing { occupied_ghz: f64, oversampling: f64, sim_ghz: f64 },
    #[error("step control needed more than {0} steps in one span")]
    StepBudget(usize),
    #[error("length mismatch: {0} received vs {1} transmitted symbols")]
    Length(usize, usize),
}

/// Power evolution imposed on each channel band along a span.
#[derive(Clone, Copy, Debug)]
pub enum GainSource<'a> {
    /// ρ = 1 everywhere
    Lossless,
    /// ρ = e^{−α z}, α of the fiber at each channel centre
    FiberLoss,
    /// Solved Raman profile, channel by channel
    Profile(&'a PowerProfile),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SsfmConfig {
    /// Power of two
    pub symbols_per_channel: usize,
    pub samples_per_symbol: usize,
    /// Nonlinear phase allowed per step at the peak power (rad)
    pub max_phase_rad: f64,
    pub max_step_km: f64,
    pub max_steps_per_span: usize,
    /// Simulation band must cover the occupied band times this
    pub oversampling: f64,
    pub seed: u64,
}

impl Default for SsfmConfig {
    fn default() -> Self {
        Self {
            symbols_per_channel: 1 << 12,
            samples_per_symbol: 16,
            max_phase_rad: 1e-3,
            max_step_km: 1.0,
            max_steps_per_span: 1_000_000,
            oversampling: 2.0,
            seed: 1,
        }
    }
}

impl SsfmConfig {
    pub fn validate(&self) -> Result<(), SsfmError> {
        let n = self.symbols_per_channel;
        if !n.is_power_of_two() || n < 16 {
            return Err(SsfmError::Config("symbols per channel must be a power of two >= 16".into()));
        }
        if self.samples_per_symbol < 2 {
            return Err(SsfmError::Config("need at least 2 samples per symbol".into()));
        }
        if !(self.max_phase_rad > 0.0) || !(self.max_step_km > 0.0) || self.max_steps_per_span == 0 {
            return Err(SsfmError::Config("step policy limits must be > 0".into()));
        }
        if !(self.oversampling >= 1.0) {
            return Err(SsfmError::Config("oversampling must be >= 1".into()));
        }
        Ok(())
    }
}

/// Transmitted and received (CD-compensated, matched-filtered) symbols of one
/// channel, both at unit mean launch energy.
#[derive(Clone, Debug)]
pub struct ChannelSymbols {
    pub channel: usize,
    pub tx: Vec<Complex64>,
    pub rx: Vec<Complex64>,
}

#[derive(Clone, Debug)]
pub struct SsfmOutput {
    pub channels: Vec<ChannelSymbols>,
    pub seed: u64,
    /// Split steps taken over all spans
    pub steps: usize,
    /// Mean field power (mW) at launch and at the end of each span, before
    /// the lumped amplifier
    pub launch_power_mw: f64,
    pub span_end_power_mw: Vec<f64>,
}

impl SsfmOutput {
    pub fn snr_nli_db(&self) -> Result<Vec<f64>, SsfmError> {
        self.channels.iter().map(|c| measure_snr_nli(&c.rx, &c.tx)).collect()
    }

    /// channel, snr_nli_db; seed in a leading comment line.
    pub fn snr_csv(&self) -> Result<String, SsfmError> {
        let mut s = format!("# seed={}\nchannel,snr_nli_db\n", self.seed);
        for (c, snr) in self.channels.iter().zip(self.snr_nli_db()?) {
            s.push_str(&format!("{},{snr:.6}\n", c.channel));
        }
        Ok(s)
    }

    /// Received constellation of one channel: index, tx re/im, rx re/im.
    pub fn constellation_csv(&self, channel: usize) -> Option<String> {
        let c = self.channels.iter().find(|c| c.channel == channel)?;
        let mut s = format!("# seed={} channel={channel}\nindex,tx_re,tx_im,rx_re,rx_im\n", self.seed);
        for (i, (x, y)) in c.tx.iter().zip(&c.rx).enumerate() {
            s.push_str(&format!("{i},{:.9},{:.9},{:.9},{:.9}\n", x.re, x.im, y.re, y.im));
        }
        Some(s)
    }
}

/// SNR (dB) after removing one complex scale factor, i.e. the mean phase
/// rotation and gain: y ≈ g x, SNR = |g|² E|x|² / E|y − g x|².
pub fn measure_snr_nli(rx: &[Complex64], tx: &[Complex64]) -> Result<f64, SsfmError> {
    if rx.len() != tx.len() {
        return Err(SsfmError::Length(rx.len(), tx.len()));
    }
    if tx.is_empty() {
        return Err(SsfmError::Config("no symbols".into()));
    }
    let ex: f64 = tx.iter().map(|x| x.norm_sqr()).sum();
    let g: Complex64 = tx.iter().zip(rx).map(|(x, y)| x.conj() * y).sum::<Complex64>() / ex;
    let noise: f64 = tx.iter().zip(rx).map(|(x, y)| (y - g * x).norm_sqr()).sum();
    let snr = g.norm_sqr() * ex / noise;
    if !(snr.is_finite()) || snr > 10f64.powf(SNR_CEILING_DB / 10.0) {
        return Ok(SNR_CEILING_DB);
    }
    Ok(10.0 * snr.log10())
}
