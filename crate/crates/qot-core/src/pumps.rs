//! Raman pump sets.

use crate::error::CoreError;
use crate::units::nm_to_thz;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pump {
    pub wavelength_nm: f64,
    /// Injection power (mW): at z = 0 for forward pumps, z = L for backward.
    pub power_mw: f64,
    pub direction: Direction,
}

impl Pump {
    pub fn backward(wavelength_nm: f64, power_mw: f64) -> Self {
        Self { wavelength_nm, power_mw, direction: Direction::Backward }
    }

    pub fn forward(wavelength_nm: f64, power_mw: f64) -> Self {
        Self { wavelength_nm, power_mw, direction: Direction::Forward }
    }

    pub fn frequency_thz(&self) -> f64 {
        nm_to_thz(self.wavelength_nm)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PumpSet {
    pub pumps: Vec<Pump>,
}

impl PumpSet {
    pub fn new(pumps: Vec<Pump>) -> Result<Self, CoreError> {
        for (i, p) in pumps.iter().enumerate() {
            if !(p.power_mw >= 0.0) || !p.power_mw.is_finite() {
                return Err(CoreError::Pumps(format!("pump {i}: power must be >= 0")));
            }
            if !(p.wavelength_nm > 0.0) {
                return Err(CoreError::Pumps(format!("pump {i}: wavelength must be > 0")));
            }
        }
        Ok(Self { pumps })
    }

    pub fn none() -> Self {
        Self::default()
    }

    /// Eight E-band backward pumps recovering the S band of the 135-channel reference link.
    pub fn s_band_recovery() -> Self {
        let wl = [1360.0, 1365.0, 1370.0, 1375.0, 1380.0, 1385.0, 1390.0, 1415.0];
        let pw = [50.0, 250.0, 250.0, 250.0, 249.0, 76.0, 158.0, 250.0];
        Self {
            pumps: wl.iter().zip(pw).map(|(&w, p)| Pump::backward(w, p)).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.pumps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pumps.len()
    }

    /// Mean pump frequency f̂ (THz); `None` with no pumps.
    pub fn average_frequency(&self) -> Option<f64> {
        if self.pumps.is_empty() {
            return None;
        }
        Some(self.pumps.iter().map(|p| p.frequency_thz()).sum::<f64>() / self.pumps.len() as f64)
    }

    pub fn total_power(&self, dir: Direction) -> f64 {
        self.pumps.iter().filter(|p| p.direction == dir).map(|p| p.power_mw).sum()
    }

    pub fn total_power_all(&self) -> f64 {
        self.pumps.iter().map(|p| p.power_mw).sum()
    }

    pub fn with_powers(&self, powers: &[f64]) -> Self {
        Self {
            pumps: self
                .pumps
                .iter()
                .zip(powers)
                .map(|(p, &w)| Pump { power_mw: w, ..*p })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn average_frequency_is_mean() {
        let s = PumpSet::s_band_recovery();
        let mean = s.pumps.iter().map(|p| nm_to_thz(p.wavelength_nm)).sum::<f64>() / 8.0;
        assert_eq!(s.average_frequency(), Some(mean));
        assert_eq!(PumpSet::none().average_frequency(), None);
        assert_eq!(s.total_power(Direction::Backward), 1533.0);
        assert_eq!(s.total_power(Direction::Forward), 0.0);
    }

    #[test]
    fn negative_power_rejected() {
        assert!(PumpSet::new(vec![Pump::backward(1450.0, -1.0)]).is_err());
    }
}
