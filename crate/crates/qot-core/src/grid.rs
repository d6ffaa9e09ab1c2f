//! WDM channel plan and the uniform-grid builder with band gaps.

use crate::constellation::Constellation;
use crate::error::CoreError;
use crate::units::{dbm_to_mw, nm_to_thz, C_NM_THZ};

#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    /// Center frequency (THz)
    pub frequency_thz: f64,
    /// Symbol rate, equal to the occupied bandwidth for Nyquist shaping (GBd)
    pub symbol_rate_gbd: f64,
    /// Launch power (mW)
    pub launch_power_mw: f64,
    /// Excess kurtosis Φ of the modulation
    pub kurtosis: f64,
    pub constellation: Constellation,
}

impl Channel {
    pub fn new(frequency_thz: f64, symbol_rate_gbd: f64, launch_power_mw: f64, c: Constellation) -> Self {
        let kurtosis = c.kurtosis().unwrap_or(0.0);
        Self {
            frequency_thz,
            symbol_rate_gbd,
            launch_power_mw,
            kurtosis,
            constellation: c,
        }
    }

    /// Bandwidth (THz).
    pub fn bandwidth_thz(&self) -> f64 {
        self.symbol_rate_gbd * 1e-3
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelPlan {
    channels: Vec<Channel>,
}

impl ChannelPlan {
    pub fn new(mut channels: Vec<Channel>) -> Result<Self, CoreError> {
        channels.sort_by(|a, b| a.frequency_thz.partial_cmp(&b.frequency_thz).unwrap());
        let plan = Self { channels };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.channels.is_empty() {
            return Err(CoreError::Plan("no channels".into()));
        }
        for (i, c) in self.channels.iter().enumerate() {
            if !(c.frequency_thz > 0.0 && c.frequency_thz.is_finite()) {
                return Err(CoreError::Plan(format!("channel {i}: non-positive frequency")));
            }
            if !(c.launch_power_mw > 0.0) {
                return Err(CoreError::Plan(format!("channel {i}: launch power must be > 0")));
            }
            if !(c.symbol_rate_gbd > 0.0) {
                return Err(CoreError::Plan(format!("channel {i}: symbol rate must be > 0")));
            }
        }
        for (i, w) in self.channels.windows(2).enumerate() {
            let df = w[1].frequency_thz - w[0].frequency_thz;
            if 2.0 * df <= w[0].bandwidth_thz() || 2.0 * df <= w[1].bandwidth_thz() {
                return Err(CoreError::Plan(format!(
                    "channels {i} and {} overlap ({:.1} GHz apart)",
                    i + 1,
                    df * 1e3
                )));
            }
        }
        Ok(())
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn channels_mut(&mut self) -> &mut [Channel] {
        &mut self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.channels.iter().map(|c| c.frequency_thz).collect()
    }

    pub fn total_power_mw(&self) -> f64 {
        self.channels.iter().map(|c| c.launch_power_mw).sum()
    }

    pub fn mean_frequency(&self) -> f64 {
        self.channels.iter().map(|c| c.frequency_thz).sum::<f64>() / self.len() as f64
    }

    /// Sum of channel bandwidths (THz).
    pub fn occupied_bandwidth_thz(&self) -> f64 {
        self.channels.iter().map(|c| c.bandwidth_thz()).sum()
    }

    /// Outer edge-to-edge extent of the grid (THz).
    pub fn extent_thz(&self) -> f64 {
        let lo = &self.channels[0];
        let hi = &self.channels[self.len() - 1];
        hi.frequency_thz - lo.frequency_thz + 0.5 * (hi.bandwidth_thz() + lo.bandwidth_thz())
    }

    /// Indices of channels whose centre lies in [f_lo, f_hi].
    pub fn indices_in(&self, f_lo: f64, f_hi: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| {
                let f = self.channels[i].frequency_thz;
                f >= f_lo && f <= f_hi
            })
            .collect()
    }

    /// Index of the channel whose centre is closest to `f`.
    pub fn nearest(&self, f: f64) -> usize {
        let mut best = 0;
        for (i, c) in self.channels.iter().enumerate() {
            if (c.frequency_thz - f).abs() < (self.channels[best].frequency_thz - f).abs() {
                best = i;
            }
        }
        best
    }

    pub fn scale_powers(&mut self, factor: f64) {
        for c in &mut self.channels {
            c.launch_power_mw *= factor;
        }
    }
}

/// A spectral gap centred on a band boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandGap {
    pub boundary_nm: f64,
    pub gap_nm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridRequest {
    pub center_nm: f64,
    pub n_channels: usize,
    pub symbol_rate_gbd: f64,
    pub spacing_ghz: f64,
    pub gaps: Vec<BandGap>,
    pub power_dbm: f64,
    pub constellation: Constellation,
}

/// Uniform grid centred on `center_nm`; each gap whose boundary falls inside
/// the grid pushes the channels on either side apart by half its width, so the
/// result does not depend on the order of the gap list.
pub fn build_channel_plan(req: &GridRequest) -> Result<ChannelPlan, CoreError> {
    if req.n_channels == 0 {
        return Err(CoreError::Plan("n_channels must be >= 1".into()));
    }
    if !(req.center_nm > 0.0) {
        return Err(CoreError::Plan("center wavelength must be > 0".into()));
    }
    if req.spacing_ghz < req.symbol_rate_gbd {
        return Err(CoreError::Plan(format!(
            "overlapping grid: spacing {} GHz < symbol rate {} GBd",
            req.spacing_ghz, req.symbol_rate_gbd
        )));
    }
    let fc = nm_to_thz(req.center_nm);
    let df = req.spacing_ghz * 1e-3;
    let mid = (req.n_channels as f64 - 1.0) / 2.0;
    let base: Vec<f64> = (0..req.n_channels).map(|j| fc + (j as f64 - mid) * df).collect();
    let mut shift = vec![0.0; base.len()];
    for g in &req.gaps {
        if !(g.gap_nm >= 0.0) || !(g.boundary_nm > 0.0) {
            return Err(CoreError::Plan("gap widths and boundaries must be positive".into()));
        }
        let fb = nm_to_thz(g.boundary_nm);
        // gap width in frequency, linearized at the boundary
        let width = C_NM_THZ * g.gap_nm / (g.boundary_nm * g.boundary_nm);
        for (s, &f) in shift.iter_mut().zip(&base) {
            if f > fb {
                *s += width / 2.0;
            } else if f < fb {
                *s -= width / 2.0;
            }
        }
    }
    let power = dbm_to_mw(req.power_dbm);
    let channels: Vec<Channel> = base
        .iter()
        .zip(&shift)
        .map(|(f, s)| Channel::new(f + s, req.symbol_rate_gbd, power, req.constellation.clone()))
        .collect();
    if channels.iter().any(|c| c.frequency_thz <= 0.0) {
        return Err(CoreError::Plan("gap list produces negative frequencies".into()));
    }
    ChannelPlan::new(channels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(n: usize, gaps: Vec<BandGap>) -> GridRequest {
        GridRequest {
            center_nm: 1550.0,
            n_channels: n,
            symbol_rate_gbd: 10.0,
            spacing_ghz: 50.0,
            gaps,
            power_dbm: 0.0,
            constellation: Constellation::Qpsk,
        }
    }

    #[test]
    fn single_channel_at_center() {
        let mut r = req(1, vec![]);
        r.constellation = Constellation::Gaussian;
        let p = build_channel_plan(&r).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.channels()[0].frequency_thz, nm_to_thz(1550.0));
        assert_eq!(p.channels()[0].kurtosis, 0.0);
        assert_eq!(p.channels()[0].launch_power_mw, 1.0);
    }

    #[test]
    fn five_channels_uniform() {
        let p = build_channel_plan(&req(5, vec![])).unwrap();
        let f = p.frequencies();
        assert_eq!(f[2], nm_to_thz(1550.0));
        for w in f.windows(2) {
            assert!((w[1] - w[0] - 0.05).abs() < 1e-12);
        }
        assert!(p.channels().iter().all(|c| c.kurtosis == -1.0));
    }

    #[test]
    fn overlap_rejected() {
        let mut r = req(3, vec![]);
        r.spacing_ghz = 5.0;
        assert!(build_channel_plan(&r).is_err());
    }

    #[test]
    fn gap_inserted_between_neighbours() {
        let g = BandGap { boundary_nm: 1550.1, gap_nm: 2.0 };
        let p = build_channel_plan(&req(4, vec![g])).unwrap();
        let f = p.frequencies();
        let widest = f.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        assert!((widest - 0.05 - C_NM_THZ * 2.0 / (1550.1 * 1550.1)).abs() < 1e-12);
    }
}
