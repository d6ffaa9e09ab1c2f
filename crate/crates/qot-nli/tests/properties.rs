mod common;

use common::{c_band, db, pumped_terms};
use num_complex::Complex64;
use proptest::prelude::*;
use qot_core::{Constellation, Exec, FiberSpec, Pump};
use qot_fit::{DerivedTerms, ExpTerm};
use qot_nli::kernels::{ln_bracket, mu_zero, xpm_pair};
use qot_nli::*;

fn setup() -> (FiberSpec, qot_core::ChannelPlan, DerivedTerms) {
    let fiber = FiberSpec::g652d_like();
    let plan = c_band(5, 64.0, 75.0, Constellation::Qam64);
    let terms = DerivedTerms::loss_only(&fiber, &plan);
    (fiber, plan, terms)
}

#[test]
fn gaussian_constellation_has_no_correction() {
    let (fiber, _, _) = setup();
    let plan = c_band(5, 64.0, 75.0, Constellation::Gaussian);
    let terms = DerivedTerms::loss_only(&fiber, &plan);
    for n in [1, 10] {
        let p = NliParams::from_fiber(&fiber, n);
        for i in 0..plan.len() {
            assert_eq!(eta_corr_closed(&plan, i, &terms, &p).unwrap().value, 0.0);
            let link = FittedLink { terms: &terms };
            assert_eq!(eta_corr_integral(&plan, i, &link, &p, &IntegralOptions::default()).unwrap().value, 0.0);
        }
    }
}

#[test]
fn correction_ignores_uniform_power_scaling() {
    let (fiber, mut plan, terms) = setup();
    let p = NliParams::from_fiber(&fiber, 3);
    let link = FittedLink { terms: &terms };
    let opts = IntegralOptions::default();
    let before: Vec<(f64, f64)> = (0..5)
        .map(|i| (eta_corr_closed(&plan, i, &terms, &p).unwrap().value, eta_corr_integral(&plan, i, &link, &p, &opts).unwrap().value))
        .collect();
    plan.scale_powers(7.3);
    for (i, (c, g)) in before.into_iter().enumerate() {
        let c2 = eta_corr_closed(&plan, i, &terms, &p).unwrap().value;
        let g2 = eta_corr_integral(&plan, i, &link, &p, &opts).unwrap().value;
        assert!((c2 / c - 1.0).abs() < 1e-12 && (g2 / g - 1.0).abs() < 1e-12);
    }
}

#[test]
fn correction_is_linear_in_each_kurtosis() {
    let (fiber, plan, terms) = setup();
    let p = NliParams::from_fiber(&fiber, 2);
    let eval = |phis: &[f64]| {
        let mut pl = plan.clone();
        for (c, k) in pl.channels_mut().iter_mut().zip(phis) {
            c.kurtosis = *k;
        }
        eta_corr_closed(&pl, 2, &terms, &p).unwrap().value
    };
    let base = [-0.6, -0.6, -0.6, -0.6, -0.6];
    let e0 = eval(&base);
    let mut one = base;
    one[4] = -1.2;
    let mut zero = base;
    zero[4] = 0.0;
    // doubling Φ_4 adds exactly what removing it takes away
    assert!(((eval(&one) - e0) - (e0 - eval(&zero))).abs() < 1e-12 * e0.abs());
    // the COI's own Φ does not enter
    let mut own = base;
    own[2] = -1.0;
    assert_eq!(eval(&own), e0);
}

#[test]
fn single_span_has_no_coherent_term() {
    let (fiber, plan, terms) = setup();
    let eta = |n| eta_corr_closed(&plan, 1, &terms, &NliParams::from_fiber(&fiber, n)).unwrap().value;
    assert_eq!(NliParams::from_fiber(&fiber, 1).n_tilde(), 0.0);
    assert_eq!(NliParams::from_fiber(&fiber, 4).n_tilde(), 4.0);
    // η(n) = n (η(1) + C) for n ≥ 2, with C the per-span coherent term
    let (e1, e2, e5) = (eta(1), eta(2), eta(5));
    let c2 = e2 / 2.0 - e1;
    let c5 = e5 / 5.0 - e1;
    assert!(c2.abs() > 1e-3 * e1.abs(), "coherent term unexpectedly small");
    assert!((c2 / c5 - 1.0).abs() < 1e-12);
}

#[test]
fn ln_bracket_positive_with_limits() {
    for b in [0.01, 0.064, 0.14] {
        assert_eq!(ln_bracket(b / 2.0, b), 2.0 * b);
        assert!((ln_bracket(b / 2.0 * (1.0 + 1e-12), b) - 2.0 * b).abs() < 1e-9 * b);
        let mut prev = f64::INFINITY;
        for j in 0..200 {
            let df = b / 2.0 * 10f64.powf(j as f64 * 0.04);
            let v = ln_bracket(df, b);
            assert!(v > 0.0 && v < prev + 1e-15, "df {df}: {v}");
            prev = v;
        }
        // ~ B²/Δf far away
        let df = 1e3 * b;
        assert!((ln_bracket(df, b) / (b * b / df) - 1.0).abs() < 1e-3);
    }
}

#[test]
fn quadrature_is_stable_under_tightening() {
    let fiber = FiberSpec::g652d_like();
    let plan = c_band(3, 64.0, 75.0, Constellation::Qam16);
    let terms = pumped_terms(&fiber, &plan, &[Pump::backward(1450.0, 250.0)]);
    let link = FittedLink { terms: &terms };
    let p = NliParams::from_fiber(&fiber, 10);
    let loose = IntegralOptions::default();
    let tight = IntegralOptions { rel_tol: loose.rel_tol / 10.0, ..loose };
    for i in 0..3 {
        let a = eta_gn_integral(&plan, i, &link, &p, &loose).unwrap().value;
        let b = eta_gn_integral(&plan, i, &link, &p, &tight).unwrap().value;
        assert!((a / b - 1.0).abs() < 1e-3);
        let a = eta_corr_integral(&plan, i, &link, &p, &loose).unwrap().value;
        let b = eta_corr_integral(&plan, i, &link, &p, &tight).unwrap().value;
        assert!((a / b - 1.0).abs() < 1e-3);
    }
}

#[test]
fn eta_is_quadratic_in_gamma() {
    let (fiber, plan, terms) = setup();
    let p = NliParams::from_fiber(&fiber, 2);
    let link = FittedLink { terms: &terms };
    let opts = IntegralOptions::default();
    let zero = NliParams { gamma: 0.0, ..p };
    let twice = NliParams { gamma: 2.0 * p.gamma, ..p };
    assert_eq!(eta_gn_closed(&plan, 1, &terms, &zero).unwrap().value, 0.0);
    assert_eq!(eta_gn_integral(&plan, 1, &link, &zero, &opts).unwrap().value, 0.0);
    let r = eta_gn_closed(&plan, 1, &terms, &twice).unwrap().value / eta_gn_closed(&plan, 1, &terms, &p).unwrap().value;
    assert!((r - 4.0).abs() < 1e-12);
    let r = eta_gn_integral(&plan, 1, &link, &twice, &opts).unwrap().value / eta_gn_integral(&plan, 1, &link, &p, &opts).unwrap().value;
    assert!((r - 4.0).abs() < 1e-12);
}

#[test]
fn no_pump_profile_collapses_to_one_term() {
    let (fiber, plan, terms) = setup();
    let l = fiber.span_length_km;
    for c in &terms.channels {
        assert_eq!(c.active().count(), 1);
        let t = &c.terms[0];
        assert_eq!((t.l1, t.l2, t.upsilon), (0, 0, 1.0));
        assert!(((t.kappa_f - t.kappa_b) - ((-c.alpha * l).exp() - 1.0)).abs() < 1e-15);
        assert!((mu_zero(c, l) - (1.0 - (-c.alpha * l).exp()) / c.alpha).abs() < 1e-12);
    }
    let _ = plan;
}

fn term(alpha: f64, kb: f64, l: f64) -> ExpTerm {
    ExpTerm { l1: 0, l2: 0, alpha, kappa_f: kb * (-alpha * l).exp(), kappa_b: kb, upsilon: 1.0 }
}

proptest! {
    #[test]
    fn pair_kernel_is_symmetric(a in -0.05f64..0.1, a2 in -0.05f64..0.1, kb in 0.01f64..1.0, phi in -50.0f64..50.0, b in 0.01f64..0.15) {
        let l = 100.0;
        let (t, t2) = (term(a, 1.0, l), term(a2, kb, l));
        let x = xpm_pair(&t, &t2, phi, b, l);
        let y = xpm_pair(&t2, &t, phi, b, l);
        prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(1e-12));
    }

    #[test]
    fn opposite_exponents_are_guarded(a in 0.005f64..0.08, phi in 5.0f64..50.0) {
        let l = 100.0;
        let t = term(a, 0.5, l);
        let exact = xpm_pair(&t, &term(-a, 0.5, l), phi, 0.064, l);
        let near = xpm_pair(&t, &term(-a * (1.0 + 1e-6), 0.5, l), phi, 0.064, l);
        prop_assert!(exact.is_finite());
        prop_assert!((exact / near - 1.0).abs() < 1e-4);
    }
}

#[test]
fn zero_dispersion_is_flagged_not_fatal() {
    let (fiber, plan, terms) = setup();
    let p = NliParams { beta2: 0.0, beta3: 0.0, ..NliParams::from_fiber(&fiber, 3) };
    let e = eta_corr_closed(&plan, 2, &terms, &p).unwrap();
    assert!(e.flags.zero_phase && e.value.is_finite());
    let g = eta_gn_closed(&plan, 2, &terms, &p).unwrap();
    assert!(g.flags.zero_phase && g.value.is_finite() && g.value > 0.0);
}

#[test]
fn overlapping_channels_rejected() {
    let (fiber, mut plan, terms) = setup();
    let f0 = plan.channels()[0].frequency_thz;
    plan.channels_mut()[1].frequency_thz = f0 + 0.02;
    let p = NliParams::from_fiber(&fiber, 1);
    assert!(matches!(eta_corr_closed(&plan, 0, &terms, &p), Err(NliError::Overlap { .. })));
    assert!(matches!(eta_gn_closed(&plan, 1, &terms, &p), Err(NliError::Overlap { .. })));
}

#[test]
fn mismatched_inputs_rejected() {
    let (fiber, plan, terms) = setup();
    let p = NliParams::from_fiber(&fiber, 1);
    assert!(eta_gn_closed(&plan, 9, &terms, &p).is_err());
    assert!(eta_gn_closed(&plan, 0, &terms, &NliParams { n_spans: 0, ..p }).is_err());
    assert!(eta_gn_closed(&plan, 0, &terms, &NliParams { span_length_km: 80.0, ..p }).is_err());
}

#[test]
fn snr_arithmetic() {
    let s = snr_assemble(1e-4, 1.0, None, None).unwrap();
    assert!((s.snr_nli_db - 40.0).abs() < 1e-12);
    assert_eq!(s.snr_total_db, s.snr_nli_db);
    let eta = 1e-3; // 30 dB at 1 mW
    let s = snr_assemble(eta, 1.0, Some(30.0), None).unwrap();
    assert!((s.snr_total_db - (30.0 - 10.0 * 2f64.log10())).abs() < 1e-12);
    assert!((s.snr_total_db - 26.99).abs() < 0.01);
    assert!(matches!(snr_assemble(-1e-4, 1.0, None, None), Err(NliError::NegativeEta(_))));
    assert!(snr_assemble(1e-4, 0.0, None, None).is_err());
}

#[test]
fn parallel_and_sequential_agree_bitwise() {
    let (fiber, plan, terms) = setup();
    let p = NliParams::from_fiber(&fiber, 10);
    let a = evaluate_closed(&plan, &terms, &p, Exec::Sequential).unwrap();
    let b = evaluate_closed(&plan, &terms, &p, Exec::Parallel).unwrap();
    assert_eq!(a, b);
    assert!(a.channels.iter().all(|c| c.eta_total == c.eta_gn + c.eta_corr && c.snr_nli_db.is_finite()));
}

#[test]
fn polarization_prefactors() {
    let (fiber, plan, terms) = setup();
    let dual = NliParams::from_fiber(&fiber, 1);
    let single = dual.with_polarization(Polarization::Single);
    let r = eta_gn_closed(&plan, 0, &terms, &single).unwrap().value / eta_gn_closed(&plan, 0, &terms, &dual).unwrap().value;
    assert!((r - 2.0 / (16.0 / 27.0)).abs() < 1e-12);
    let r = eta_corr_closed(&plan, 0, &terms, &single).unwrap().value / eta_corr_closed(&plan, 0, &terms, &dual).unwrap().value;
    assert!((r - 4.0 / (80.0 / 81.0)).abs() < 1e-12);
    let _ = (db(1.0, 1.0), Complex64::new(0.0, 0.0));
}
