use crate::PumpError;
use qot_core::{ChannelPlan, FiberSpec, Pump, PumpSet};
use qot_raman::{solve_profile_with, SolverOptions};

/// How the recovery constraint is applied across the target band.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Recovery {
    /// Every channel within tolerance
    #[default]
    PerChannel,
    /// Only the band-mean net gain within tolerance
    BandAverage,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PumpProblem {
    /// Candidate backward pump wavelengths (nm)
    pub wavelengths_nm: Vec<f64>,
    pub min_power_mw: Vec<f64>,
    pub max_power_mw: Vec<f64>,
    /// Target band (THz), inclusive; must intersect the occupied spectrum
    pub band_thz: (f64, f64),
    pub tolerance_db: f64,
    pub recovery: Recovery,
}

impl PumpProblem {
    /// Pumps bounded to [0, `max_mw`], per-channel recovery.
    pub fn new(wavelengths_nm: Vec<f64>, max_mw: f64, band_thz: (f64, f64), tolerance_db: f64) -> Self {
        let n = wavelengths_nm.len();
        Self {
            wavelengths_nm,
            min_power_mw: vec![0.0; n],
            max_power_mw: vec![max_mw; n],
            band_thz,
            tolerance_db,
            recovery: Recovery::PerChannel,
        }
    }

    pub fn dim(&self) -> usize {
        self.wavelengths_nm.len()
    }

    pub fn validate(&self, plan: &ChannelPlan) -> Result<(), PumpError> {
        let n = self.dim();
        if n == 0 {
            return Err(PumpError::Problem("need at least one candidate wavelength".into()));
        }
        if self.min_power_mw.len() != n || self.max_power_mw.len() != n {
            return Err(PumpError::Problem("one bound pair per wavelength".into()));
        }
        for i in 0..n {
            let (lo, hi) = (self.min_power_mw[i], self.max_power_mw[i]);
            if !(lo >= 0.0) || !(hi >= lo) || !hi.is_finite() {
                return Err(PumpError::Problem(format!("pump {i}: bounds must satisfy 0 <= min <= max")));
            }
            if !(self.wavelengths_nm[i] > 0.0) {
                return Err(PumpError::Problem(format!("pump {i}: wavelength must be > 0")));
            }
        }
        if !(self.tolerance_db > 0.0) {
            return Err(PumpError::Problem("tolerance must be > 0 dB".into()));
        }
        let (lo, hi) = self.band_thz;
        if !(lo <= hi) {
            return Err(PumpError::Problem("band must satisfy lo <= hi".into()));
        }
        let ch = plan.channels();
        let (first, last) = (&ch[0], &ch[ch.len() - 1]);
        let f_min = first.frequency_thz - first.bandwidth_thz() / 2.0;
        let f_max = last.frequency_thz + last.bandwidth_thz() / 2.0;
        // a band reaching past the grid edge just selects up to the last channel
        if lo < hi && (hi < f_min || lo > f_max) {
            return Err(PumpError::Problem(format!(
                "band {lo:.3}..{hi:.3} THz misses the occupied spectrum {f_min:.3}..{f_max:.3} THz"
            )));
        }
        Ok(())
    }

    pub fn target_channels(&self, plan: &ChannelPlan) -> Vec<usize> {
        plan.indices_in(self.band_thz.0, self.band_thz.1)
    }

    pub fn pump_set(&self, powers: &[f64]) -> PumpSet {
        PumpSet {
            pumps: self.wavelengths_nm.iter().zip(powers).map(|(&w, &p)| Pump::backward(w, p)).collect(),
        }
    }
}

/// Net span gain of the target channels.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryReport {
    pub channels: Vec<usize>,
    pub frequency_thz: Vec<f64>,
    /// 10 log10 ρ(L) per channel; 0 dB is full recovery
    pub error_db: Vec<f64>,
}

impl RecoveryReport {
    pub fn max_abs_db(&self) -> f64 {
        self.error_db.iter().fold(0.0, |m, e| m.max(e.abs()))
    }

    pub fn mean_db(&self) -> f64 {
        if self.error_db.is_empty() {
            return 0.0;
        }
        self.error_db.iter().sum::<f64>() / self.error_db.len() as f64
    }

    /// Constraint excess (dB, summed over channels) and feasibility.
    pub fn violation(&self, tol: f64, mode: Recovery) -> (f64, bool) {
        match mode {
            Recovery::PerChannel => {
                let v = self.error_db.iter().map(|e| (e.abs() - tol).max(0.0)).sum();
                (v, self.max_abs_db() <= tol)
            }
            Recovery::BandAverage => {
                let m = self.mean_db().abs();
                ((m - tol).max(0.0), m <= tol)
            }
        }
    }
}

pub(crate) const Z_SAMPLES: usize = 64;

/// Net gain error per channel of `band_thz` with `pumps` on the link.
pub fn evaluate_recovery(
    pumps: &PumpSet,
    fiber: &FiberSpec,
    plan: &ChannelPlan,
    band_thz: (f64, f64),
) -> Result<RecoveryReport, PumpError> {
    recovery_on(pumps, fiber, plan, &plan.indices_in(band_thz.0, band_thz.1))
}

pub(crate) fn recovery_on(
    pumps: &PumpSet,
    fiber: &FiberSpec,
    plan: &ChannelPlan,
    channels: &[usize],
) -> Result<RecoveryReport, PumpError> {
    let f = plan.frequencies();
    if channels.is_empty() {
        return Ok(RecoveryReport { channels: vec![], frequency_thz: vec![], error_db: vec![] });
    }
    let (profile, _) = solve_profile_with(fiber, plan, pumps, Z_SAMPLES, &SolverOptions::default())?;
    let error_db = channels
        .iter()
        .map(|&ch| {
            let c = profile.signal_component(ch).expect("every channel is solved");
            let p = &profile.power_mw[c];
            10.0 * (p[p.len() - 1] / p[0]).log10()
        })
        .collect();
    Ok(RecoveryReport {
        channels: channels.to_vec(),
        frequency_thz: channels.iter().map(|&c| f[c]).collect(),
        error_db,
    })
}
