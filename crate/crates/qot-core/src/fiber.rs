//! Fiber type: attenuation and Raman-gain spectra plus scalar parameters.

use crate::dispersion::dispersion_to_beta;
use crate::error::CoreError;
use crate::table::Table;
use crate::units::{db_per_km_to_neper, nm_to_thz, thz_to_nm};

const G652D_ATTENUATION: &str = include_str!("../data/g652d_attenuation.csv");
const G652D_RAMAN: &str = include_str!("../data/g652d_raman_gain.csv");

/// Wavelength (nm) at which the shipped Raman gain table is normalized.
pub const G652D_RAMAN_REFERENCE_NM: f64 = 1450.0;

#[derive(Clone, Debug, PartialEq)]
pub struct FiberSpec {
    /// Attenuation, wavelength (nm) → dB/km
    pub attenuation: Table,
    /// Raman gain, frequency separation (THz) → 1/(W km), for a pump at `raman_reference_thz`
    pub raman_gain: Table,
    /// Pump frequency the gain table refers to (THz)
    pub raman_reference_thz: f64,
    /// Nonlinear coefficient (1/(W km))
    pub gamma: f64,
    /// Dispersion at the reference wavelength (ps/(nm km))
    pub dispersion_d: f64,
    /// Dispersion slope (ps/(nm² km))
    pub dispersion_slope: f64,
    /// Reference wavelength for D, S and for the phase-mismatch frequency origin (nm)
    pub reference_wavelength_nm: f64,
    /// Span length (km)
    pub span_length_km: f64,
}

impl FiberSpec {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.attenuation.y().iter().any(|&a| a <= 0.0) {
            return Err(CoreError::Fiber("attenuation values must be > 0".into()));
        }
        let g = self.raman_gain.y();
        if g.iter().any(|&v| v < 0.0) {
            return Err(CoreError::Fiber("raman gain must be non-negative".into()));
        }
        let gmax = g.iter().cloned().fold(f64::MIN, f64::max);
        let peaks: Vec<usize> = (0..g.len()).filter(|&i| g[i] == gmax).collect();
        if gmax > 0.0 {
            let x = self.raman_gain.x()[peaks[0]];
            if peaks.len() != 1 || !(x > 10.0 && x < 16.0) {
                return Err(CoreError::Fiber(
                    "raman gain needs a single global maximum between 10 and 16 THz".into(),
                ));
            }
        }
        if !(self.span_length_km > 0.0) {
            return Err(CoreError::Fiber("span length must be > 0".into()));
        }
        if !(self.reference_wavelength_nm > 0.0) || !(self.raman_reference_thz > 0.0) {
            return Err(CoreError::Fiber("reference wavelength/frequency must be > 0".into()));
        }
        if !(self.gamma >= 0.0) {
            return Err(CoreError::Fiber("gamma must be >= 0".into()));
        }
        Ok(())
    }

    /// G.652.D-like fiber on 100 km spans (γ = 1.2, D = 16.5, S = 0.09).
    pub fn g652d_like() -> Self {
        let f = Self {
            attenuation: Table::from_csv_str(G652D_ATTENUATION, "g652d attenuation").unwrap(),
            raman_gain: Table::from_csv_str(G652D_RAMAN, "g652d raman gain").unwrap(),
            raman_reference_thz: nm_to_thz(G652D_RAMAN_REFERENCE_NM),
            gamma: 1.2,
            dispersion_d: 16.5,
            dispersion_slope: 0.09,
            reference_wavelength_nm: 1550.0,
            span_length_km: 100.0,
        };
        f.validate().unwrap();
        f
    }

    pub fn attenuation_db_per_km(&self, f_thz: f64) -> f64 {
        self.attenuation.interp_clamped(thz_to_nm(f_thz))
    }

    /// Power attenuation coefficient (1/km).
    pub fn alpha(&self, f_thz: f64) -> f64 {
        db_per_km_to_neper(self.attenuation_db_per_km(f_thz))
    }

    /// Raman gain (1/(W km)) seen by `acceptor` from `donor`; zero unless the
    /// donor has the higher frequency. Scaled linearly with donor frequency.
    pub fn raman_gain_coefficient(&self, donor_thz: f64, acceptor_thz: f64) -> f64 {
        let df = donor_thz - acceptor_thz;
        if df <= 0.0 {
            return 0.0;
        }
        self.raman_gain.interp_or_zero(df) * donor_thz / self.raman_reference_thz
    }

    pub fn reference_frequency_thz(&self) -> f64 {
        nm_to_thz(self.reference_wavelength_nm)
    }

    /// (β2 ps²/km, β3 ps³/km) at the reference wavelength.
    pub fn betas(&self) -> (f64, f64) {
        dispersion_to_beta(self.dispersion_d, self.dispersion_slope, self.reference_wavelength_nm)
    }

    /// Same fiber with every attenuation value replaced by `db_per_km`.
    pub fn with_flat_attenuation(&self, db_per_km: f64) -> Self {
        Self {
            attenuation: self.attenuation.map_y(|_| db_per_km),
            ..self.clone()
        }
    }

    /// Same fiber with Raman gain switched off.
    pub fn without_raman(&self) -> Self {
        Self {
            raman_gain: self.raman_gain.map_y(|_| 0.0),
            ..self.clone()
        }
    }
}
