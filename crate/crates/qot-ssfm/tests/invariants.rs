use num_complex::Complex64;
use qot_core::{build_channel_plan, ChannelPlan, Constellation, FiberSpec, GridRequest};
use qot_ssfm::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

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

fn small() -> SsfmConfig {
    SsfmConfig { symbols_per_channel: 1 << 10, samples_per_symbol: 8, ..Default::default() }
}

fn evm(out: &SsfmOutput) -> f64 {
    out.channels
        .iter()
        .map(|c| {
            let e: f64 = c.tx.iter().zip(&c.rx).map(|(x, y)| (y - x).norm_sqr()).sum();
            let p: f64 = c.tx.iter().map(|x| x.norm_sqr()).sum();
            (e / p).sqrt()
        })
        .fold(0.0, f64::max)
}

#[test]
fn linear_channel_is_invertible() {
    let fiber = FiberSpec { gamma: 0.0, ..FiberSpec::g652d_like() };
    let plan = comb(3, 32.0, 40.0, 3.0, Constellation::Qam64);
    let out = simulate_link(&small(), &fiber, &plan, GainSource::FiberLoss, 2).unwrap();
    assert!(evm(&out) < 1e-10, "{}", evm(&out));
}

#[test]
fn back_to_back_is_identity() {
    let plan = comb(3, 32.0, 40.0, 3.0, Constellation::Gaussian);
    let out = simulate_link(&small(), &FiberSpec::g652d_like(), &plan, GainSource::FiberLoss, 0).unwrap();
    assert!(evm(&out) < 1e-12);
    assert_eq!(out.steps, 0);
    for snr in out.snr_nli_db().unwrap() {
        assert_eq!(snr, SNR_CEILING_DB);
    }
}

#[test]
fn lossless_span_conserves_energy() {
    let plan = comb(3, 32.0, 40.0, 3.0, Constellation::Qam16);
    for gamma in [0.0, 1.2] {
        let fiber = FiberSpec { gamma, ..FiberSpec::g652d_like() };
        let out = simulate_link(&small(), &fiber, &plan, GainSource::Lossless, 2).unwrap();
        // three channels at 2 mW, on average
        assert!((out.launch_power_mw / 6.0 - 1.0).abs() < 0.1);
        for e in &out.span_end_power_mw {
            assert!((e / out.launch_power_mw - 1.0).abs() < 1e-9, "gamma {gamma}: {e}");
        }
    }
}

#[test]
fn loss_only_span_attenuates() {
    let fiber = FiberSpec::g652d_like();
    let plan = comb(1, 32.0, 50.0, 0.0, Constellation::Qpsk);
    let out = simulate_link(&small(), &fiber, &plan, GainSource::FiberLoss, 1).unwrap();
    let expect = (-fiber.alpha(plan.channels()[0].frequency_thz) * fiber.span_length_km).exp();
    assert!((out.span_end_power_mw[0] / out.launch_power_mw / expect - 1.0).abs() < 1e-9);
}

#[test]
fn measured_snr_of_known_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 1 << 16;
    let mut gauss = || {
        // Box-Muller, unit variance per complex sample
        let (u, v): (f64, f64) = (rng.random(), rng.random());
        let r = (-(1.0 - u).ln()).sqrt();
        Complex64::from_polar(r, 2.0 * std::f64::consts::PI * v)
    };
    let tx: Vec<Complex64> = (0..n).map(|_| gauss() * 10.0).collect();
    let rx: Vec<Complex64> = tx.iter().map(|x| x + gauss()).collect();
    let snr = measure_snr_nli(&rx, &tx).unwrap();
    assert!((snr - 20.0).abs() < 0.1, "{snr}");
    // a fixed rotation and gain are not noise
    let rot = Complex64::from_polar(0.7, 1.1);
    let rx2: Vec<Complex64> = rx.iter().map(|y| y * rot).collect();
    assert!((measure_snr_nli(&rx2, &tx).unwrap() - snr).abs() < 1e-9);
    assert_eq!(measure_snr_nli(&tx, &tx).unwrap(), SNR_CEILING_DB);
    assert!(matches!(measure_snr_nli(&rx[1..], &tx), Err(SsfmError::Length(..))));
}

#[test]
fn same_seed_same_symbols() {
    let plan = comb(2, 32.0, 50.0, 0.0, Constellation::Gaussian);
    let fiber = FiberSpec::g652d_like();
    let a = simulate_link(&small(), &fiber, &plan, GainSource::FiberLoss, 0).unwrap();
    let b = simulate_link(&small(), &fiber, &plan, GainSource::FiberLoss, 0).unwrap();
    let c = simulate_link(&SsfmConfig { seed: 2, ..small() }, &fiber, &plan, GainSource::FiberLoss, 0).unwrap();
    assert_eq!(a.channels[1].tx, b.channels[1].tx);
    assert_ne!(a.channels[1].tx, c.channels[1].tx);
    let csv = a.snr_csv().unwrap();
    assert!(csv.starts_with("# seed=1\nchannel,snr_nli_db\n"));
    assert_eq!(a.constellation_csv(1).unwrap().lines().count(), 2 + 1024);
}

#[test]
fn invalid_setups_rejected() {
    let fiber = FiberSpec::g652d_like();
    let plan = comb(5, 10.0, 12.5, 0.0, Constellation::Gaussian);
    let aliased = SsfmConfig { samples_per_symbol: 4, ..small() };
    assert!(matches!(simulate_link(&aliased, &fiber, &plan, GainSource::FiberLoss, 1), Err(SsfmError::Aliasing { .. })));
    let odd = SsfmConfig { symbols_per_channel: 1000, ..small() };
    assert!(matches!(simulate_link(&odd, &fiber, &plan, GainSource::FiberLoss, 1), Err(SsfmError::Config(_))));
    // 12.3 GHz is not a whole number of bins of 10 GBd / 1024
    let off = comb(2, 10.0, 12.3, 0.0, Constellation::Gaussian);
    assert!(simulate_link(&small(), &fiber, &off, GainSource::FiberLoss, 1).is_err());
    let mut mixed = comb(2, 10.0, 50.0, 0.0, Constellation::Gaussian);
    mixed.channels_mut()[1].symbol_rate_gbd = 20.0;
    assert!(simulate_link(&small(), &fiber, &mixed, GainSource::FiberLoss, 1).is_err());
    let budget = SsfmConfig { max_steps_per_span: 10, ..small() };
    assert!(matches!(
        simulate_link(&budget, &fiber, &comb(1, 32.0, 50.0, 0.0, Constellation::Gaussian), GainSource::FiberLoss, 1),
        Err(SsfmError::StepBudget(10))
    ));
}
