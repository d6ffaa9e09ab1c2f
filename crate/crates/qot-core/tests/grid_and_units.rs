use proptest::prelude::*;
use qot_core::units::thz_to_nm;
use qot_core::{
    beta_to_dispersion, build_channel_plan, dispersion_to_beta, BandGap, Constellation, GridRequest,
};

fn wideband_request(gaps: Vec<BandGap>) -> GridRequest {
    GridRequest {
        center_nm: 1530.0,
        n_channels: 135,
        symbol_rate_gbd: 140.0,
        spacing_ghz: 150.0,
        gaps,
        power_dbm: 1.0,
        constellation: Constellation::Qam64,
    }
}

fn band_gaps() -> Vec<BandGap> {
    vec![
        BandGap { boundary_nm: 1525.0, gap_nm: 10.0 },
        BandGap { boundary_nm: 1567.5, gap_nm: 5.0 },
    ]
}

#[test]
fn ultra_wideband_plan() {
    let plan = build_channel_plan(&wideband_request(band_gaps())).unwrap();
    assert_eq!(plan.len(), 135);
    let extent = plan.extent_thz();
    // 20 THz of channels plus roughly 2 THz of gaps
    assert!(extent > 19.0 && extent < 23.0, "{extent}");
    let lo = thz_to_nm(plan.channels()[134].frequency_thz);
    let hi = thz_to_nm(plan.channels()[0].frequency_thz);
    assert!(hi - lo > 150.0 && hi - lo < 180.0, "{lo}..{hi}");
    // exactly two enlarged spacings, one per gap
    let f = plan.frequencies();
    let mut wide: Vec<f64> = f.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.151).collect();
    wide.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(wide.len(), 2);
    let c = qot_core::units::C_NM_THZ;
    assert!((wide[0] - 0.15 - c * 5.0 / 1567.5f64.powi(2)).abs() < 1e-9);
    assert!((wide[1] - 0.15 - c * 10.0 / 1525.0f64.powi(2)).abs() < 1e-9);
    assert!(plan.channels().iter().all(|c| (c.kurtosis + 0.619_047_619).abs() < 1e-8));
}

#[test]
fn gap_order_does_not_matter() {
    let a = build_channel_plan(&wideband_request(band_gaps())).unwrap();
    let mut g = band_gaps();
    g.reverse();
    let b = build_channel_plan(&wideband_request(g)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn negative_frequency_rejected() {
    let mut r = wideband_request(vec![BandGap { boundary_nm: 1530.5, gap_nm: 1e6 }]);
    r.n_channels = 3;
    assert!(build_channel_plan(&r).is_err());
}

proptest! {
    #[test]
    fn dispersion_roundtrip(d in -20.0f64..20.0, s in 0.01f64..0.2, l in 1200.0f64..1700.0) {
        let (b2, b3) = dispersion_to_beta(d, s, l);
        let (d2, s2) = beta_to_dispersion(b2, b3, l);
        prop_assert!((d2 - d).abs() <= 1e-9 * d.abs().max(1e-3));
        prop_assert!((s2 - s).abs() <= 1e-9 * s.abs());
    }

    #[test]
    fn plan_is_sorted_and_deterministic(n in 1usize..40, rate in 10.0f64..100.0, extra in 0.0f64..60.0) {
        let r = GridRequest {
            center_nm: 1550.0,
            n_channels: n,
            symbol_rate_gbd: rate,
            spacing_ghz: rate + extra,
            gaps: vec![BandGap { boundary_nm: 1550.3, gap_nm: 1.0 }],
            power_dbm: 0.0,
            constellation: Constellation::Qam16,
        };
        let a = build_channel_plan(&r).unwrap();
        let b = build_channel_plan(&r).unwrap();
        prop_assert_eq!(&a, &b);
        let f = a.frequencies();
        prop_assert!(f.windows(2).all(|w| w[1] > w[0]));
    }
}
