#![allow(dead_code)]

use qot_core::{build_channel_plan, ChannelPlan, Constellation, FiberSpec, GridRequest, Pump, PumpSet};
use qot_fit::{derive_terms, fit_profile, DerivedTerms};

pub fn c_band(n: usize, rate: f64, spacing: f64, c: Constellation) -> ChannelPlan {
    build_channel_plan(&GridRequest {
        center_nm: 1550.0,
        n_channels: n,
        symbol_rate_gbd: rate,
        spacing_ghz: spacing,
        gaps: vec![],
        power_dbm: 0.0,
        constellation: c,
    })
    .unwrap()
}

/// Solve, fit and expand the profile of `plan` under `pumps`.
pub fn pumped_terms(fiber: &FiberSpec, plan: &ChannelPlan, pumps: &[Pump]) -> DerivedTerms {
    let pumps = PumpSet::new(pumps.to_vec()).unwrap();
    let profile = qot_raman::solve_profile(fiber, plan, &pumps, 101).unwrap();
    let coeffs = fit_profile(&profile, plan, &pumps).unwrap();
    derive_terms(&coeffs, &pumps, fiber, plan).unwrap()
}

pub fn db(a: f64, b: f64) -> f64 {
    10.0 * (a / b).log10()
}
