use crate::profile::{Component, ComponentKind};
use qot_core::{ChannelPlan, Direction, FiberSpec, PumpSet};

/// Coefficients of the coupled equations for one set of components.
#[derive(Clone, Debug)]
pub struct RamanSystem {
    pub components: Vec<Component>,
    /// Power attenuation (1/km)
    pub alpha: Vec<f64>,
    /// +1 forward, −1 backward
    pub sign: Vec<f64>,
    /// Row-major coupling matrix (1/(mW km))
    pub coupling: Vec<f64>,
    /// Injection power (mW) at the component's own launch end
    pub launch_mw: Vec<f64>,
}

impl RamanSystem {
    /// Signals are forward components; pumps with zero power are left out.
    pub fn new(fiber: &FiberSpec, plan: &ChannelPlan, pumps: &PumpSet) -> Self {
        let mut components = Vec::new();
        let mut launch = Vec::new();
        for (i, c) in plan.channels().iter().enumerate() {
            components.push(Component {
                frequency_thz: c.frequency_thz,
                direction: Direction::Forward,
                kind: ComponentKind::Signal { channel: i },
            });
            launch.push(c.launch_power_mw);
        }
        for (i, p) in pumps.pumps.iter().enumerate() {
            if p.power_mw > 0.0 {
                components.push(Component {
                    frequency_thz: p.frequency_thz(),
                    direction: p.direction,
                    kind: ComponentKind::Pump { index: i },
                });
                launch.push(p.power_mw);
            }
        }
        Self::from_components(fiber, components, launch)
    }

    pub fn from_components(fiber: &FiberSpec, components: Vec<Component>, launch_mw: Vec<f64>) -> Self {
        let n = components.len();
        let alpha = components.iter().map(|c| fiber.alpha(c.frequency_thz)).collect();
        let sign = components
            .iter()
            .map(|c| if c.direction == Direction::Forward { 1.0 } else { -1.0 })
            .collect();
        let mut coupling = vec![0.0; n * n];
        for i in 0..n {
            let fi = components[i].frequency_thz;
            for j in 0..n {
                let fj = components[j].frequency_thz;
                let g = if fj > fi {
                    // j feeds i
                    fiber.raman_gain_coefficient(fj, fi)
                } else if fj < fi {
                    // i feeds j and loses f_i/f_j photons' worth of energy
                    -(fi / fj) * fiber.raman_gain_coefficient(fi, fj)
                } else {
                    0.0
                };
                coupling[i * n + j] = g * 1e-3;
            }
        }
        Self { components, alpha, sign, coupling, launch_mw }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn backward_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.sign[i] < 0.0).collect()
    }

    pub fn forward_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.sign[i] > 0.0).collect()
    }

    /// dy/dz for the log powers `y`.
    pub fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        let n = self.len();
        let p: Vec<f64> = y.iter().map(|v| v.exp()).collect();
        for i in 0..n {
            let row = &self.coupling[i * n..(i + 1) * n];
            let gain: f64 = row.iter().zip(&p).map(|(g, q)| g * q).sum();
            dy[i] = self.sign[i] * (gain - self.alpha[i]);
        }
    }

    /// dy/dz for a subset `active` of components while the others follow
    /// externally supplied log powers.
    pub fn rhs_partial(&self, active: &[usize], y_active: &[f64], y_all: &mut [f64], dy: &mut [f64]) {
        let n = self.len();
        for (k, &i) in active.iter().enumerate() {
            y_all[i] = y_active[k];
        }
        let p: Vec<f64> = y_all.iter().map(|v| v.exp()).collect();
        for (k, &i) in active.iter().enumerate() {
            let row = &self.coupling[i * n..(i + 1) * n];
            let gain: f64 = row.iter().zip(&p).map(|(g, q)| g * q).sum();
            dy[k] = self.sign[i] * (gain - self.alpha[i]);
        }
    }
}
