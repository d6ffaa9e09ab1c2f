//! Randomized desk-scale links for closed-form vs integral checks.

use crate::CliError;
use qot_core::{build_channel_plan, ChannelPlan, Constellation, Exec, FiberSpec, GridRequest, Pump, PumpSet};
use qot_fit::{derive_terms, fit_profile_with, FitOptions};
use qot_nli::{eta_corr_closed, eta_corr_integral, eta_gn_closed, eta_gn_integral, FittedLink, IntegralOptions, NliParams};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct SuiteCase {
    pub id: usize,
    pub fiber: FiberSpec,
    pub plan: ChannelPlan,
    pub pumps: PumpSet,
    pub n_spans: usize,
}

/// Backward pumps are drawn from these slots, 13 to 17 THz above the C band.
const PUMP_SLOTS_NM: [f64; 6] = [1420.0, 1430.0, 1440.0, 1450.0, 1460.0, 1470.0];

/// `n` links of 3 to 9 channels on a 40 to 150 GHz grid in the C band, one
/// QAM format each, 0 to 4 backward pumps and 1 or 10 spans.
pub fn random_suite(n: usize, seed: u64) -> Vec<SuiteCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|id| {
            let spacing = (rng.random_range(40.0..=150.0f64) * 2.0).round() / 2.0;
            // roll-off between 5 and 40 %
            let rate = (spacing * rng.random_range(0.6..0.95)).round();
            let constellation = [Constellation::Qam64, Constellation::Qpsk, Constellation::Qam16][rng.random_range(0..3)].clone();
            let plan = build_channel_plan(&GridRequest {
                center_nm: rng.random_range(1530.0..1565.0),
                n_channels: rng.random_range(3..=9),
                symbol_rate_gbd: rate,
                spacing_ghz: spacing,
                gaps: vec![],
                power_dbm: rng.random_range(-1.0..3.0),
                constellation,
            })
            .expect("suite grids never overlap");
            let n_pumps = rng.random_range(0..=4);
            let mut slots: Vec<usize> = sample(&mut rng, PUMP_SLOTS_NM.len(), n_pumps).into_vec();
            slots.sort_unstable();
            let pumps = slots.iter().map(|&s| Pump::backward(PUMP_SLOTS_NM[s], rng.random_range(30.0..150.0))).collect();
            let n_spans = if rng.random_bool(0.5) { 1 } else { 10 };
            SuiteCase {
                id,
                fiber: FiberSpec::g652d_like(),
                plan,
                pumps: PumpSet::new(pumps).expect("distinct slots"),
                n_spans,
            }
        })
        .collect()
}

/// Both backends on one channel of one case, all η in 1/mW².
#[derive(Clone, Debug, PartialEq)]
pub struct CaseComparison {
    pub case: usize,
    pub channel: usize,
    pub frequency_thz: f64,
    pub gn_closed: f64,
    pub gn_integral: f64,
    pub corr_closed: f64,
    pub corr_integral: f64,
}

/// 10 log10(a/b); 0 when both vanish, infinite when the signs differ.
pub fn gap_db(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else if a * b <= 0.0 {
        f64::INFINITY
    } else {
        10.0 * (a / b).log10()
    }
}

impl CaseComparison {
    pub fn gn_gap_db(&self) -> f64 {
        gap_db(self.gn_closed, self.gn_integral)
    }

    pub fn corr_gap_db(&self) -> f64 {
        gap_db(self.corr_closed, self.corr_integral)
    }
}

/// Solve and fit the case's profile, then evaluate every channel with the
/// closed forms and the quadrature oracle on the same fitted link.
pub fn compare_case(case: &SuiteCase, z_samples: usize, opts: &IntegralOptions, exec: Exec) -> Result<Vec<CaseComparison>, CliError> {
    let profile = qot_raman::solve_profile(&case.fiber, &case.plan, &case.pumps, z_samples)?;
    let coeffs = fit_profile_with(&profile, &case.plan, &case.pumps, &FitOptions { exec, ..Default::default() })?;
    let terms = derive_terms(&coeffs, &case.pumps, &case.fiber, &case.plan)?;
    let p = NliParams::from_fiber(&case.fiber, case.n_spans);
    let link = FittedLink { terms: &terms };
    let plan = &case.plan;
    exec.map_range(plan.len(), |i| {
        Ok(CaseComparison {
            case: case.id,
            channel: i,
            frequency_thz: plan.channels()[i].frequency_thz,
            gn_closed: eta_gn_closed(plan, i, &terms, &p)?.value,
            gn_integral: eta_gn_integral(plan, i, &link, &p, opts)?.value,
            corr_closed: eta_corr_closed(plan, i, &terms, &p)?.value,
            corr_integral: eta_corr_integral(plan, i, &link, &p, opts)?.value,
        })
    })
    .into_iter()
    .collect()
}
