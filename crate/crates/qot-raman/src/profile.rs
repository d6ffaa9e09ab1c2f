use crate::RamanError;
use qot_core::units::{mw_to_dbm, thz_to_nm};
use qot_core::Direction;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ComponentKind {
    Signal { channel: usize },
    Pump { index: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Component {
    pub frequency_thz: f64,
    pub direction: Direction,
    pub kind: ComponentKind,
}

impl Component {
    /// Column label, e.g. `ch3_1550.116nm` or `pump0_1450.000nm_bwd`.
    pub fn label(&self) -> String {
        let dir = match self.direction {
            Direction::Forward => "fwd",
            Direction::Backward => "bwd",
        };
        match self.kind {
            ComponentKind::Signal { channel } => {
                format!("ch{channel}_{:.3}nm", thz_to_nm(self.frequency_thz))
            }
            ComponentKind::Pump { index } => {
                format!("pump{index}_{:.3}nm_{dir}", thz_to_nm(self.frequency_thz))
            }
        }
    }
}

/// Sampled power evolution of every component over one span.
#[derive(Clone, Debug)]
pub struct PowerProfile {
    /// z samples (km), from 0 to L
    pub z_km: Vec<f64>,
    pub components: Vec<Component>,
    /// Power (mW), indexed [component][z sample]
    pub power_mw: Vec<Vec<f64>>,
}

impl PowerProfile {
    pub fn span_length(&self) -> f64 {
        *self.z_km.last().unwrap()
    }

    /// Component index of signal channel `ch`.
    pub fn signal_component(&self, ch: usize) -> Option<usize> {
        self.components
            .iter()
            .position(|c| c.kind == ComponentKind::Signal { channel: ch })
    }

    /// Component index of pump `index` (zero-power pumps are not solved).
    pub fn pump_component(&self, index: usize) -> Option<usize> {
        self.components
            .iter()
            .position(|c| c.kind == ComponentKind::Pump { index })
    }

    pub fn n_signals(&self) -> usize {
        self.components
            .iter()
            .filter(|c| matches!(c.kind, ComponentKind::Signal { .. }))
            .count()
    }

    /// ρ(z) = P(z)/P(0) for one component.
    pub fn rho(&self, component: usize) -> Vec<f64> {
        let p = &self.power_mw[component];
        p.iter().map(|v| v / p[0]).collect()
    }

    /// ρ of signal channel `ch` at every z sample.
    pub fn signal_rho(&self, ch: usize) -> Vec<f64> {
        self.rho(self.signal_component(ch).expect("channel not in profile"))
    }

    fn component_at(&self, frequency_thz: f64) -> Result<usize, RamanError> {
        self.components
            .iter()
            .position(|c| (c.frequency_thz - frequency_thz).abs() <= 1e-9 * frequency_thz)
            .ok_or(RamanError::UnknownFrequency(frequency_thz))
    }

    /// Power (mW) and ρ at (frequency, z), interpolating ln P linearly in z,
    /// which preserves monotonicity between samples.
    pub fn sample(&self, frequency_thz: f64, z_km: f64) -> Result<(f64, f64), RamanError> {
        let c = self.component_at(frequency_thz)?;
        let l = self.span_length();
        if !(0.0..=l).contains(&z_km) {
            return Err(RamanError::Input(format!("z = {z_km} outside [0, {l}]")));
        }
        let p = self.interp_power(c, z_km);
        Ok((p, p / self.power_mw[c][0]))
    }

    pub fn interp_power(&self, component: usize, z_km: f64) -> f64 {
        let z = &self.z_km;
        let p = &self.power_mw[component];
        let i = match z.binary_search_by(|v| v.partial_cmp(&z_km).unwrap()) {
            Ok(i) => return p[i],
            Err(i) => i.clamp(1, z.len() - 1) - 1,
        };
        let t = (z_km - z[i]) / (z[i + 1] - z[i]);
        (p[i].ln() * (1.0 - t) + p[i + 1].ln() * t).exp()
    }

    /// z, then one column per component in dBm.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("z_km");
        for c in &self.components {
            s.push(',');
            s.push_str(&c.label());
        }
        s.push('\n');
        for (k, z) in self.z_km.iter().enumerate() {
            s.push_str(&format!("{z:.6}"));
            for p in &self.power_mw {
                s.push_str(&format!(",{:.9}", mw_to_dbm(p[k])));
            }
            s.push('\n');
        }
        s
    }
}
