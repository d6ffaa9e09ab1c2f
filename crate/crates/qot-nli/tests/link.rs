mod common;

use common::c_band;
use num_complex::Complex64;
use qot_core::{Constellation, FiberSpec, PumpSet};
use qot_fit::DerivedTerms;
use qot_nli::*;

#[test]
fn loss_only_limit_matches_exponential_term() {
    let fiber = FiberSpec::g652d_like();
    let plan = c_band(3, 64.0, 75.0, Constellation::Qam64);
    let terms = DerivedTerms::loss_only(&fiber, &plan);
    let l = fiber.span_length_km;
    let (fi, fk) = (plan.channels()[1].frequency_thz, plan.channels()[2].frequency_thz);
    let a = terms.channels[2].alpha;
    // √(ρ_k ρ_i ρ_k / ρ_i) = ρ_k = e^{−αζ}
    let mu = link_function(LinkSource::Fitted(&terms), [fk, fi, fi], 0.0, 1e-11).unwrap();
    assert!((mu.re - (1.0 - (-a * l).exp()) / a).abs() < 1e-9 * mu.re);
    assert_eq!(mu.im, 0.0);
    for phi in [0.3, -7.0, 40.0] {
        let mu = link_function(LinkSource::Fitted(&terms), [fk, fi, fi], phi, 1e-11).unwrap();
        let exact = mu_term(&terms.channels[2].terms[0], phi, l);
        assert!((mu - exact).norm() < 1e-8 * exact.norm(), "{phi}: {mu} {exact}");
        assert!((FittedLink { terms: &terms }.mu(2, phi) - exact).norm() < 1e-14 * exact.norm());
    }
}

#[test]
fn degenerate_corner_is_real() {
    let fiber = FiberSpec::g652d_like();
    let plan = c_band(3, 64.0, 75.0, Constellation::Qam64);
    let terms = DerivedTerms::loss_only(&fiber, &plan);
    let f = plan.frequencies();
    let mu = link_function(LinkSource::Fitted(&terms), [f[0], f[2], f[0]], 0.0, 1e-9).unwrap();
    assert_eq!(mu.im, 0.0);
}

#[test]
fn raw_backend_is_exact_for_exponentials() {
    let fiber = FiberSpec::g652d_like().without_raman();
    let plan = c_band(3, 64.0, 75.0, Constellation::Qam64);
    let profile = qot_raman::solve_profile(&fiber, &plan, &PumpSet::none(), 65).unwrap();
    let raw = RawLink::new(&profile).unwrap();
    let l = fiber.span_length_km;
    for ch in 0..3 {
        let a = fiber.alpha(plan.channels()[ch].frequency_thz);
        for phi in [0.0, 1e-9, 0.5, -12.0, 300.0] {
            let s = Complex64::new(a, -phi);
            let exact = (1.0 - (-s * l).exp()) / s;
            assert!((raw.mu(ch, phi) - exact).norm() < 1e-7 * exact.norm(), "{ch} {phi}");
        }
    }
    let f = plan.frequencies();
    let mu = link_function(LinkSource::Raw(&raw, &f), [f[1], f[0], f[0]], 2.0, 1e-10).unwrap();
    assert!((mu - raw.mu(1, 2.0)).norm() < 1e-8 * mu.norm());
}
