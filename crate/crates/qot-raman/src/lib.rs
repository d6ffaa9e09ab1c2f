//! Raman power-profile solver.
//!
//! All signal channels and pumps of one span are integrated together in the
//! log domain, y = ln P, which keeps strongly depleted pumps and tiny
//! residuals well scaled:
//!
//! dy_i/dz = s_i (−α_i + Σ_j G_ij P_j)
//!
//! with s_i = +1 for co-propagating and −1 for counter-propagating components.
//! G_ij > 0 when j is the higher-frequency donor; the donor side carries the
//! photon-energy ratio. Backward pumps make this a two-point boundary value
//! problem, solved by damped Newton shooting on their unknown z = 0 powers with
//! a forward/backward relaxation fallback.

mod profile;
mod solver;
mod system;

pub use profile::{Component, ComponentKind, PowerProfile};
pub use solver::{solve_profile, solve_profile_with, BvpMethod, SolveReport, SolverOptions};
pub use system::RamanSystem;

use qot_core::{FiberSpec, Pump};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RamanError {
    #[error("boundary value problem did not converge after {iterations} iterations (residual {residual:.3e})")]
    BvpNonConvergence { iterations: usize, residual: f64 },
    #[error("power underflow in component {component} at z = {z_km:.3} km")]
    Underflow { component: usize, z_km: f64 },
    #[error("integrator failure: {0}")]
    Integrator(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("frequency {0} THz is not a solved component")]
    UnknownFrequency(f64),
}

/// Undepleted single-pump on-off gain (dB) at `signal_thz`:
/// 10 log10 exp(g_R P_p L_eff), L_eff from the pump-wavelength attenuation.
pub fn undepleted_onoff_gain(fiber: &FiberSpec, pump: &Pump, signal_thz: f64) -> f64 {
    let fp = pump.frequency_thz();
    let g = fiber.raman_gain_coefficient(fp, signal_thz);
    let a = fiber.alpha(fp);
    let l = fiber.span_length_km;
    let leff = if a * l < 1e-12 { l } else { (1.0 - (-a * l).exp()) / a };
    // direction does not enter: both directions see the same integrated pump power
    10.0 * std::f64::consts::LOG10_E * g * pump.power_mw * 1e-3 * leff
}
