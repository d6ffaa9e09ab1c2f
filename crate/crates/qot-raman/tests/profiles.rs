use qot_core::{build_channel_plan, BandGap, Channel, ChannelPlan, Constellation, FiberSpec, GridRequest, Pump, PumpSet};
use qot_raman::{solve_profile, solve_profile_with, undepleted_onoff_gain, BvpMethod, SolverOptions};

fn wideband_plan() -> ChannelPlan {
    build_channel_plan(&GridRequest {
        center_nm: 1530.0,
        n_channels: 135,
        symbol_rate_gbd: 140.0,
        spacing_ghz: 150.0,
        gaps: vec![
            BandGap { boundary_nm: 1525.0, gap_nm: 10.0 },
            BandGap { boundary_nm: 1567.5, gap_nm: 5.0 },
        ],
        power_dbm: 1.0,
        constellation: Constellation::Qam64,
    })
    .unwrap()
}

fn probe(freq: f64, mw: f64) -> ChannelPlan {
    ChannelPlan::new(vec![Channel::new(freq, 10.0, mw, Constellation::Gaussian)]).unwrap()
}

#[test]
fn loss_only_is_exponential() {
    let fiber = FiberSpec::g652d_like().with_flat_attenuation(0.2).without_raman();
    let p = solve_profile(&fiber, &probe(193.4, 1.0), &PumpSet::none(), 101).unwrap();
    let rho = p.signal_rho(0);
    let end_db = 10.0 * rho[100].log10();
    assert!((end_db + 20.0).abs() < 1e-6, "{end_db}");
    for (z, r) in p.z_km.iter().zip(&rho) {
        let want = (-0.2 * z / (10.0 * std::f64::consts::LOG10_E)).exp();
        assert!((r / want - 1.0).abs() < 1e-7);
    }
}

#[test]
fn weak_signal_matches_undepleted_gain() {
    let fiber = FiberSpec::g652d_like().with_flat_attenuation(0.25);
    let pump = Pump::backward(1450.0, 250.0);
    let fs = 1e-3 * 299_792_458.0 / 1550.0;
    let pumps = PumpSet::new(vec![pump]).unwrap();
    let on = solve_profile(&fiber, &probe(fs, 1e-4), &pumps, 101).unwrap();
    let off = solve_profile(&fiber, &probe(fs, 1e-4), &PumpSet::none(), 101).unwrap();
    let g_num = 10.0 * (on.signal_rho(0)[100] / off.signal_rho(0)[100]).log10();
    let g_ref = undepleted_onoff_gain(&fiber, &pump, fs);
    assert!(g_ref > 3.0, "{g_ref}");
    assert!((g_num / g_ref - 1.0).abs() < 0.01, "{g_num} vs {g_ref}");
}

#[test]
fn photon_flux_is_conserved_without_loss() {
    // without loss the full pump set would dump watts into the signals; a
    // tenth of it still couples every component strongly
    let fiber = FiberSpec::g652d_like().with_flat_attenuation(0.0);
    let plan = wideband_plan();
    let t1 = PumpSet::s_band_recovery();
    let powers: Vec<f64> = t1.pumps.iter().map(|p| 0.1 * p.power_mw).collect();
    let pumps = t1.with_powers(&powers);
    let p = solve_profile(&fiber, &plan, &pumps, 65).unwrap();
    let flux = |k: usize| -> f64 {
        p.components
            .iter()
            .zip(&p.power_mw)
            .map(|(c, pw)| {
                let s = if c.direction == qot_core::Direction::Forward { 1.0 } else { -1.0 };
                s * pw[k] / c.frequency_thz
            })
            .sum()
    };
    let f0 = flux(0);
    let scale: f64 = p.components.iter().zip(&p.power_mw).map(|(c, pw)| pw[0] / c.frequency_thz).sum();
    for k in 0..p.z_km.len() {
        assert!((flux(k) - f0).abs() / scale < 1e-6, "z = {}", p.z_km[k]);
    }
}

#[test]
fn reference_pumps_deplete_and_backward_boundary_holds() {
    let fiber = FiberSpec::g652d_like();
    let plan = wideband_plan();
    let pumps = PumpSet::s_band_recovery();
    let (p, report) = solve_profile_with(&fiber, &plan, &pumps, 101, &SolverOptions::default()).unwrap();
    assert!(report.residual < 1e-7);
    let last = p.z_km.len() - 1;
    for (i, pump) in pumps.pumps.iter().enumerate() {
        let c = p.pump_component(i).unwrap();
        assert!((p.power_mw[c][last] / pump.power_mw - 1.0).abs() < 1e-6);
    }
    // the shorter pumps feed the 1415 nm pump on its way through the span,
    // so its residual at z = 0 exceeds what loss alone would leave
    let c = p.pump_component(7).unwrap();
    let loss_only = 250.0 * (-fiber.alpha(pumps.pumps[7].frequency_thz()) * 100.0).exp();
    assert!(p.power_mw[c][0] > loss_only, "{} vs {}", p.power_mw[c][0], loss_only);
    // signals at the short edge gain more than the long edge
    let g_hi = p.signal_rho(134)[last];
    let g_lo = p.signal_rho(0)[last];
    assert!(g_hi > g_lo);
}

#[test]
fn solution_is_independent_of_guess_and_method() {
    let fiber = FiberSpec::g652d_like();
    let plan = wideband_plan();
    let pumps = PumpSet::s_band_recovery();
    let a = solve_profile(&fiber, &plan, &pumps, 101).unwrap();
    let opts = SolverOptions { initial_guess_mw: Some(vec![20.0; 8]), ..Default::default() };
    let (b, _) = solve_profile_with(&fiber, &plan, &pumps, 101, &opts).unwrap();
    let opts = SolverOptions { method: BvpMethod::Relaxation, ..Default::default() };
    let (c, rep) = solve_profile_with(&fiber, &plan, &pumps, 101, &opts).unwrap();
    assert_eq!(rep.method, BvpMethod::Relaxation);
    let last = a.z_km.len() - 1;
    for ch in 0..plan.len() {
        let ra = a.signal_rho(ch)[last];
        assert!((b.signal_rho(ch)[last] / ra - 1.0).abs() < 1e-6);
        assert!((c.signal_rho(ch)[last] / ra - 1.0).abs() < 1e-5, "{}", c.signal_rho(ch)[last] / ra - 1.0);
    }
}

#[test]
fn grid_refinement_does_not_move_the_profile() {
    let fiber = FiberSpec::g652d_like();
    let plan = wideband_plan();
    let pumps = PumpSet::s_band_recovery();
    let coarse = solve_profile(&fiber, &plan, &pumps, 65).unwrap();
    let fine = solve_profile(&fiber, &plan, &pumps, 257).unwrap();
    for ch in 0..plan.len() {
        let a = coarse.signal_rho(ch)[64];
        let b = fine.signal_rho(ch)[256];
        assert!((a / b - 1.0).abs() < 1e-5);
        // interior points agree too
        let (_, mid) = fine.sample(plan.channels()[ch].frequency_thz, 50.0).unwrap();
        assert!((coarse.signal_rho(ch)[32] / mid - 1.0).abs() < 1e-5);
    }
}

#[test]
fn zero_power_pump_is_ignored() {
    let fiber = FiberSpec::g652d_like();
    let plan = probe(193.4, 1.0);
    let pumps = PumpSet::new(vec![Pump::backward(1450.0, 0.0)]).unwrap();
    let p = solve_profile(&fiber, &plan, &pumps, 64).unwrap();
    assert_eq!(p.components.len(), 1);
    assert!(p.pump_component(0).is_none());
}

#[test]
fn too_few_samples_rejected() {
    let fiber = FiberSpec::g652d_like();
    assert!(solve_profile(&fiber, &probe(193.4, 1.0), &PumpSet::none(), 10).is_err());
}

fn flat_gain_fiber() -> FiberSpec {
    let mut fiber = FiberSpec::g652d_like().with_flat_attenuation(0.25);
    fiber.raman_gain = qot_core::Table::new("flat", vec![0.0, 40.0], vec![0.4, 0.4]).unwrap();
    fiber
}

#[test]
fn onoff_gain_formula() {
    let fiber = flat_gain_fiber();
    let fs = 1e-3 * 299_792_458.0 / 1550.0;
    let pump = Pump::backward(1450.0, 250.0);
    // 10 log10(e) * 0.4 * 0.25 * L_eff with L_eff = (1 - e^-aL)/a
    let a = 0.25 / (10.0 * std::f64::consts::LOG10_E);
    let want = 10.0 * std::f64::consts::LOG10_E * 0.1 * (1.0 - (-a * 100.0).exp()) / a;
    let g = undepleted_onoff_gain(&fiber, &pump, fs);
    assert!((g - want).abs() < 1e-12);
    assert!((g - 7.54).abs() < 0.03, "{g}");
    assert_eq!(undepleted_onoff_gain(&fiber, &Pump::backward(1450.0, 0.0), fs), 0.0);
    let g2 = undepleted_onoff_gain(&fiber, &Pump::forward(1450.0, 500.0), fs);
    assert!((g2 / g - 2.0).abs() < 1e-12);

    let pumps = PumpSet::new(vec![pump]).unwrap();
    let on = solve_profile(&fiber, &probe(fs, 1e-4), &pumps, 101).unwrap();
    let off = solve_profile(&fiber, &probe(fs, 1e-4), &PumpSet::none(), 101).unwrap();
    let g_num = 10.0 * (on.signal_rho(0)[100] / off.signal_rho(0)[100]).log10();
    assert!((g_num / g - 1.0).abs() < 0.01, "{g_num} vs {g}");
}

#[test]
fn two_component_photon_exchange() {
    let mut fiber = flat_gain_fiber().with_flat_attenuation(0.0);
    fiber.raman_gain = qot_core::Table::new("flat", vec![0.0, 40.0], vec![0.4, 0.4]).unwrap();
    let fs = 193.0;
    let pumps = PumpSet::new(vec![Pump::forward(1450.0, 400.0)]).unwrap();
    let p = solve_profile(&fiber, &probe(fs, 1.0), &pumps, 101).unwrap();
    let s = p.signal_component(0).unwrap();
    let d = p.pump_component(0).unwrap();
    let fd = p.components[d].frequency_thz;
    for k in 1..p.z_km.len() {
        let lost = (p.power_mw[d][0] - p.power_mw[d][k]) / fd;
        let gained = (p.power_mw[s][k] - p.power_mw[s][0]) / fs;
        assert!(lost > 0.0);
        assert!((lost / gained - 1.0).abs() < 1e-6);
    }
}
