//! Nonlinear-interference coefficients for Raman-amplified WDM links.
//!
//! η_n(f_i) = η_GN,n(f_i) + η_corr,n(f_i), both in 1/mW², so that the NLI
//! power of channel i is η P_i³. Two interchangeable backends:
//!
//! * closed form, from the exponential expansion of each channel's fitted
//!   power profile;
//! * adaptive quadrature over the link function, used as the oracle.
//!
//! The Gaussian term keeps SPM and XPM; FWM among three distinct channels is
//! neglected in both backends.

mod closed;
mod integral;
pub mod kernels;
mod link;
mod phase;
mod snr;

pub use closed::{eta_corr_closed, eta_gn_closed, LOW_DISPERSION_CL};
pub use integral::{array_factor, eta_corr_integral, eta_gn_integral, IntegralOptions};
pub use link::{link_function, mu_channel, mu_term, FittedLink, LinkModel, LinkSource, RawLink};
pub use phase::{NliParams, Polarization};
pub use snr::{evaluate, evaluate_closed, evaluate_integral, snr_assemble, Backend, ChannelNli, NliResult, SnrSet};

use qot_core::ChannelPlan;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NliError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("channels {coi} and {interferer} overlap (2Δf < B)")]
    Overlap { coi: usize, interferer: usize },
    #[error("{what} did not converge (error estimate {error:.3e})")]
    Quadrature { what: &'static str, error: f64 },
    #[error("total NLI coefficient {0:.3e} is not positive")]
    NegativeEta(f64),
}

/// Conditions under which a result is an extrapolation of its model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Flags {
    /// a phase-mismatch coefficient was exactly zero and its limit was used
    pub zero_phase: bool,
    /// multi-span SPM with cL below `LOW_DISPERSION_CL`
    pub low_dispersion: bool,
    pub negative_total: bool,
}

impl Flags {
    pub fn any(&self) -> bool {
        self.zero_phase || self.low_dispersion || self.negative_total
    }

    pub fn merge(self, o: Flags) -> Flags {
        Flags {
            zero_phase: self.zero_phase || o.zero_phase,
            low_dispersion: self.low_dispersion || o.low_dispersion,
            negative_total: self.negative_total || o.negative_total,
        }
    }
}

/// One η value (1/mW²) with its diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eta {
    pub value: f64,
    pub flags: Flags,
}

pub(crate) fn check_inputs(plan: &ChannelPlan, coi: usize, n_profiles: usize, span_km: f64, params: &NliParams) -> Result<(), NliError> {
    if coi >= plan.len() {
        return Err(NliError::Input(format!("COI {coi} outside a {}-channel plan", plan.len())));
    }
    if n_profiles != plan.len() {
        return Err(NliError::Input(format!("{n_profiles} channel profiles for {} channels", plan.len())));
    }
    if params.n_spans == 0 {
        return Err(NliError::Input("n_spans must be at least 1".into()));
    }
    if (span_km - params.span_length_km).abs() > 1e-9 * span_km.abs().max(1.0) {
        return Err(NliError::Input(format!("profile span {span_km} km differs from link span {} km", params.span_length_km)));
    }
    let ch = plan.channels();
    let fi = ch[coi].frequency_thz;
    for (k, c) in ch.iter().enumerate() {
        if k != coi && 2.0 * (c.frequency_thz - fi).abs() < c.bandwidth_thz() {
            return Err(NliError::Overlap { coi, interferer: k });
        }
    }
    Ok(())
}
