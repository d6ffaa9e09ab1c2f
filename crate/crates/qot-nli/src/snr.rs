use qot_core::{ChannelPlan, Exec};
use qot_fit::DerivedTerms;

use crate::integral::IntegralOptions;
use crate::link::{FittedLink, LinkModel};
use crate::{eta_corr_closed, eta_corr_integral, eta_gn_closed, eta_gn_integral, Flags, NliError, NliParams};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Backend {
    #[default]
    Closed,
    Integral,
}

impl Backend {
    pub fn tag(self) -> &'static str {
        match self {
            Backend::Closed => "closed",
            Backend::Integral => "integral",
        }
    }
}

/// Per-channel NLI coefficients, all in 1/mW².
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelNli {
    pub channel: usize,
    pub frequency_thz: f64,
    pub eta_gn: f64,
    pub eta_corr: f64,
    pub eta_total: f64,
    /// NaN when η_total ≤ 0 (see `flags.negative_total`)
    pub snr_nli_db: f64,
    pub flags: Flags,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NliResult {
    pub backend: Backend,
    pub n_spans: usize,
    pub channels: Vec<ChannelNli>,
}

impl NliResult {
    pub fn any_flagged(&self) -> bool {
        self.channels.iter().any(|c| c.flags.any())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnrSet {
    pub snr_nli_db: f64,
    pub snr_total_db: f64,
}

fn lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// SNR_NLI = 1/(η P²) and the inverse-sum total with the optional ASE and
/// transceiver contributions.
pub fn snr_assemble(eta_total: f64, p_mw: f64, snr_ase_db: Option<f64>, snr_trx_db: Option<f64>) -> Result<SnrSet, NliError> {
    if !(p_mw > 0.0) {
        return Err(NliError::Input(format!("channel power must be positive, got {p_mw} mW")));
    }
    if eta_total < 0.0 || eta_total.is_nan() {
        return Err(NliError::NegativeEta(eta_total));
    }
    let inv_nli = eta_total * p_mw * p_mw;
    let inv = inv_nli + snr_ase_db.map_or(0.0, |d| 1.0 / lin(d)) + snr_trx_db.map_or(0.0, |d| 1.0 / lin(d));
    Ok(SnrSet { snr_nli_db: -10.0 * inv_nli.log10(), snr_total_db: -10.0 * inv.log10() })
}

fn row(plan: &ChannelPlan, i: usize, gn: crate::Eta, corr: crate::Eta) -> ChannelNli {
    let total = gn.value + corr.value;
    let mut flags = gn.flags.merge(corr.flags);
    let p = plan.channels()[i].launch_power_mw;
    let snr = match snr_assemble(total, p, None, None) {
        Ok(s) if total > 0.0 => s.snr_nli_db,
        _ => {
            flags.negative_total = total <= 0.0;
            f64::NAN
        }
    };
    ChannelNli {
        channel: i,
        frequency_thz: plan.channels()[i].frequency_thz,
        eta_gn: gn.value,
        eta_corr: corr.value,
        eta_total: total,
        snr_nli_db: snr,
        flags,
    }
}

fn collect(backend: Backend, params: &NliParams, rows: Vec<Result<ChannelNli, NliError>>) -> Result<NliResult, NliError> {
    Ok(NliResult { backend, n_spans: params.n_spans, channels: rows.into_iter().collect::<Result<_, _>>()? })
}

/// Closed-form η for every channel of the plan.
pub fn evaluate_closed(plan: &ChannelPlan, terms: &DerivedTerms, params: &NliParams, exec: Exec) -> Result<NliResult, NliError> {
    let rows = exec.map_range(plan.len(), |i| {
        let gn = eta_gn_closed(plan, i, terms, params)?;
        let corr = eta_corr_closed(plan, i, terms, params)?;
        Ok(row(plan, i, gn, corr))
    });
    collect(Backend::Closed, params, rows)
}

/// Quadrature η for every channel, on any link-function backend.
pub fn evaluate_integral(plan: &ChannelPlan, link: &dyn LinkModel, params: &NliParams, opts: &IntegralOptions, exec: Exec) -> Result<NliResult, NliError> {
    let rows = exec.map_range(plan.len(), |i| {
        let gn = eta_gn_integral(plan, i, link, params, opts)?;
        let corr = eta_corr_integral(plan, i, link, params, opts)?;
        Ok(row(plan, i, gn, corr))
    });
    collect(Backend::Integral, params, rows)
}

/// Either backend on the fitted profile model.
pub fn evaluate(plan: &ChannelPlan, terms: &DerivedTerms, params: &NliParams, backend: Backend, exec: Exec) -> Result<NliResult, NliError> {
    match backend {
        Backend::Closed => evaluate_closed(plan, terms, params, exec),
        Backend::Integral => evaluate_integral(plan, &FittedLink { terms }, params, &IntegralOptions::default(), exec),
    }
}
