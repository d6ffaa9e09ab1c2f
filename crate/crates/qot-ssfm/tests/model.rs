//! Simulated SNR against the closed-form and integral NLI models, in the
//! single-polarization mode that matches the scalar simulation.

use qot_core::{build_channel_plan, ChannelPlan, Constellation, Exec, FiberSpec, GridRequest, Pump, PumpSet};
use qot_fit::{derive_terms, fit_profile, DerivedTerms};
use qot_nli::*;
use qot_raman::PowerProfile;
use qot_ssfm::*;
use std::sync::OnceLock;

fn comb(n: usize, rate: f64, spacing: f64, dbm: f64, c: Constellation) -> ChannelPlan {
    build_channel_plan(&GridRequest {
        center_nm: 1550.0,
        n_channels: n,
        symbol_rate_gbd: rate,
        spacing_ghz: spacing,
        gaps: vec![],
        power_dbm: dbm,
        constellation: c,
    })
    .unwrap()
}

fn single_pol(fiber: &FiberSpec) -> NliParams {
    NliParams::from_fiber(fiber, 1).with_polarization(Polarization::Single)
}

fn snr_db(eta: f64, p_mw: f64) -> f64 {
    -10.0 * (eta * p_mw * p_mw).log10()
}

fn closed_snr(plan: &ChannelPlan, terms: &DerivedTerms, p: &NliParams) -> Vec<f64> {
    (0..plan.len())
        .map(|i| {
            let eta = eta_gn_closed(plan, i, terms, p).unwrap().value + eta_corr_closed(plan, i, terms, p).unwrap().value;
            snr_db(eta, plan.channels()[i].launch_power_mw)
        })
        .collect()
}

/// Five 10 GBd channels on a 12.5 GHz grid at 0 dBm, one loss-only span.
fn narrow(c: Constellation) -> (ChannelPlan, Vec<f64>) {
    let plan = comb(5, 10.0, 12.5, 0.0, c);
    let out = simulate_link(&SsfmConfig::default(), &FiberSpec::g652d_like(), &plan, GainSource::FiberLoss, 1).unwrap();
    (plan, out.snr_nli_db().unwrap())
}

fn narrow_gaussian() -> &'static (ChannelPlan, Vec<f64>) {
    static CELL: OnceLock<(ChannelPlan, Vec<f64>)> = OnceLock::new();
    CELL.get_or_init(|| narrow(Constellation::Gaussian))
}

fn wide_config() -> SsfmConfig {
    SsfmConfig { samples_per_symbol: 8, ..Default::default() }
}

/// Three 32 GBd channels at 3 dBm with a 300 mW backward pump at 1450 nm.
fn pumped(plan: &ChannelPlan) -> (PowerProfile, DerivedTerms) {
    let fiber = FiberSpec::g652d_like();
    let pumps = PumpSet::new(vec![Pump::backward(1450.0, 300.0)]).unwrap();
    let profile = qot_raman::solve_profile(&fiber, plan, &pumps, 201).unwrap();
    let coeffs = fit_profile(&profile, plan, &pumps).unwrap();
    let terms = derive_terms(&coeffs, &pumps, &fiber, plan).unwrap();
    (profile, terms)
}

#[test]
fn gaussian_comb_matches_gn_integral() {
    let fiber = FiberSpec::g652d_like();
    let (plan, snr) = narrow_gaussian();
    let terms = DerivedTerms::loss_only(&fiber, plan);
    let p = single_pol(&fiber);
    let closed = closed_snr(plan, &terms, &p);
    for i in 0..plan.len() {
        let eta = eta_gn_integral(plan, i, &FittedLink { terms: &terms }, &p, &IntegralOptions::default()).unwrap();
        let model = snr_db(eta.value, plan.channels()[i].launch_power_mw);
        assert!((snr[i] - model).abs() <= 1.0, "ch{i}: ssfm {} integral {model}", snr[i]);
        assert!((snr[i] - closed[i]).abs() <= 1.0, "ch{i}: ssfm {} closed {}", snr[i], closed[i]);
    }
}

#[test]
fn qam_carries_less_nli_than_gaussian() {
    let (_, gauss) = narrow_gaussian();
    let (_, qam) = narrow(Constellation::Qam64);
    for (g, q) in gauss.iter().zip(&qam) {
        assert!(q > g, "64-QAM {q} vs Gaussian {g}");
    }
}

#[test]
fn nli_grows_with_the_cube_of_power() {
    let fiber = FiberSpec::g652d_like();
    let dbm = [-3.0, -1.5, 0.0];
    let jobs: Vec<(SsfmConfig, ChannelPlan)> =
        dbm.iter().map(|&d| (wide_config(), comb(3, 32.0, 40.0, d, Constellation::Gaussian))).collect();
    let runs: Vec<Vec<f64>> = simulate_many(&jobs, &fiber, GainSource::FiberLoss, 1, Exec::default())
        .into_iter()
        .map(|r| r.unwrap().snr_nli_db().unwrap())
        .collect();
    for ch in 0..3 {
        // least-squares slope of SNR against launch power
        let y: Vec<f64> = runs.iter().map(|r| r[ch]).collect();
        let slope = (y[2] - y[0]) / (dbm[2] - dbm[0]);
        let mid = y[1] - (y[0] + y[2]) / 2.0;
        assert!((slope + 2.0).abs() * 3.0 <= 0.3, "ch{ch}: slope {slope}");
        assert!(mid.abs() < 0.1, "ch{ch}: curvature {mid}");
    }
}

#[test]
fn halving_the_step_barely_moves_the_result() {
    let fiber = FiberSpec::g652d_like();
    let plan = comb(3, 32.0, 40.0, 0.0, Constellation::Gaussian);
    let a = simulate_link(&wide_config(), &fiber, &plan, GainSource::FiberLoss, 1).unwrap();
    let fine = SsfmConfig { max_phase_rad: 5e-4, ..wide_config() };
    let b = simulate_link(&fine, &fiber, &plan, GainSource::FiberLoss, 1).unwrap();
    assert!(b.steps > a.steps * 3 / 2);
    for (x, y) in a.snr_nli_db().unwrap().iter().zip(b.snr_nli_db().unwrap()) {
        assert!((x - y).abs() < 0.05, "{x} vs {y}");
    }
}

#[test]
fn backward_pumped_comb_matches_closed_form() {
    let fiber = FiberSpec::g652d_like();
    let plan = comb(3, 32.0, 40.0, 3.0, Constellation::Gaussian);
    let (profile, terms) = pumped(&plan);
    let out = simulate_link(&wide_config(), &fiber, &plan, GainSource::Profile(&profile), 1).unwrap();
    let snr = out.snr_nli_db().unwrap();
    let model = closed_snr(&plan, &terms, &single_pol(&fiber));
    for i in 0..3 {
        assert!((snr[i] - model[i]).abs() <= 1.0, "ch{i}: ssfm {} model {}", snr[i], model[i]);
    }
    // pumping raises the power late in the span, and with it the NLI
    let lossy = simulate_link(&wide_config(), &fiber, &plan, GainSource::FiberLoss, 1).unwrap();
    for (a, b) in snr.iter().zip(lossy.snr_nli_db().unwrap()) {
        assert!(*a < b);
    }
}

#[test]
fn interferer_kurtosis_matches_correction() {
    // Gaussian COI between 64-QAM neighbours: only the interferer-kurtosis
    // term changes relative to the all-Gaussian comb
    let fiber = FiberSpec::g652d_like();
    let gauss = comb(3, 32.0, 40.0, 3.0, Constellation::Gaussian);
    let mut mixed = comb(3, 32.0, 40.0, 3.0, Constellation::Qam64);
    mixed.channels_mut()[1] = gauss.channels()[1].clone();
    let (profile, terms) = pumped(&gauss);
    let p = single_pol(&fiber);
    let snr_g = simulate_link(&wide_config(), &fiber, &gauss, GainSource::Profile(&profile), 1).unwrap().snr_nli_db().unwrap();
    let snr_m = simulate_link(&wide_config(), &fiber, &mixed, GainSource::Profile(&profile), 1).unwrap().snr_nli_db().unwrap();
    let corr = eta_corr_closed(&mixed, 1, &terms, &p).unwrap().value;
    assert!(corr < 0.0);
    let model = closed_snr(&mixed, &terms, &p)[1];
    assert!((snr_m[1] - model).abs() <= 1.0, "ssfm {} model {model}", snr_m[1]);
    let model_shift = model - closed_snr(&gauss, &terms, &p)[1];
    let ssfm_shift = snr_m[1] - snr_g[1];
    assert!(ssfm_shift > 0.5 * model_shift && ssfm_shift < 2.0 * model_shift, "{ssfm_shift} vs {model_shift}");
}
