use qot_core::ChannelPlan;
use qot_fit::DerivedTerms;
use std::f64::consts::PI;

use crate::kernels::{ln_bracket, mu_zero, spm_cross, spm_single, xpm_integral};
use crate::{check_inputs, Eta, Flags, NliError, NliParams};

/// W⁻² → mW⁻²
pub(crate) const PER_MW2: f64 = 1e-6;

/// Below this cL the cross-span SPM expansion is flagged as unreliable.
pub const LOW_DISPERSION_CL: f64 = 3.0;

/// Coherent inter-span part of the correction for one interferer.
pub(crate) fn coherent_term(params: &NliParams, fi: f64, fk: f64, bi: f64, bk: f64, mu0: f64, flags: &mut Flags) -> f64 {
    let nt = params.n_tilde();
    if nt == 0.0 {
        return 0.0;
    }
    let pt = params.phi_tilde(fi, fk).abs();
    if pt == 0.0 {
        // every span adds in phase
        flags.zero_phase = true;
        let n = params.n_spans as f64;
        return (n * n - n) * bi * mu0 * mu0;
    }
    nt * mu0 * mu0 * 2.0 * PI / (pt * bk * bk) * ln_bracket(fk - fi, bk)
}

/// Modulation-format correction η_corr of channel `coi`, closed form.
pub fn eta_corr_closed(plan: &ChannelPlan, coi: usize, terms: &DerivedTerms, params: &NliParams) -> Result<Eta, NliError> {
    check_inputs(plan, coi, terms.channels.len(), terms.span_length_km, params)?;
    let ch = plan.channels();
    let (fi, bi, pi) = (ch[coi].frequency_thz, ch[coi].bandwidth_thz(), ch[coi].launch_power_mw);
    let l = params.span_length_km;
    let n = params.n_spans as f64;
    let mut flags = Flags::default();
    let mut sum = 0.0;
    for (k, c) in ch.iter().enumerate() {
        if k == coi || c.kurtosis == 0.0 {
            continue;
        }
        let (fk, bk) = (c.frequency_thz, c.bandwidth_thz());
        let phi = params.phi_xpm(fi, fk);
        flags.zero_phase |= phi == 0.0;
        let tk = &terms.channels[k];
        let main = n * xpm_integral(tk, phi, bi, l);
        let coh = coherent_term(params, fi, fk, bi, bk, mu_zero(tk, l), &mut flags);
        sum += c.kurtosis * (c.launch_power_mw / pi).powi(2) / bk * (main + coh);
    }
    let g2 = params.gamma * params.gamma;
    Ok(Eta { value: params.polarization.correction_prefactor() * g2 * sum * PER_MW2, flags })
}

/// SPM part of the closed-form Gaussian term, before the γ²/B² scaling.
fn spm_closed(params: &NliParams, fi: f64, bi: f64, tc: &qot_fit::ChannelTerms, flags: &mut Flags) -> f64 {
    let l = params.span_length_km;
    let n = params.n_spans;
    let phi = params.phi_spm(fi);
    let single = spm_single(tc, phi, bi, l);
    if n == 1 {
        return single;
    }
    if phi == 0.0 {
        flags.zero_phase = true;
        return (n * n) as f64 * single;
    }
    let c = phi * 3.0 * bi * bi / (4.0 * PI) / 2.0;
    flags.low_dispersion |= c * l < LOW_DISPERSION_CL;
    let cross: f64 = (1..n).map(|m| 2.0 * (n - m) as f64 * spm_cross(tc, phi, m, l)).sum();
    n as f64 * single + cross
}

/// Gaussian-modulation η_GN of channel `coi` (SPM + XPM), closed form.
pub fn eta_gn_closed(plan: &ChannelPlan, coi: usize, terms: &DerivedTerms, params: &NliParams) -> Result<Eta, NliError> {
    check_inputs(plan, coi, terms.channels.len(), terms.span_length_km, params)?;
    let ch = plan.channels();
    let (fi, bi, pi) = (ch[coi].frequency_thz, ch[coi].bandwidth_thz(), ch[coi].launch_power_mw);
    let l = params.span_length_km;
    let n = params.n_spans as f64;
    let mut flags = Flags::default();
    let spm = spm_closed(params, fi, bi, &terms.channels[coi], &mut flags) / (bi * bi);
    let mut xpm = 0.0;
    for (k, c) in ch.iter().enumerate() {
        if k == coi {
            continue;
        }
        let phi = params.phi_xpm(fi, c.frequency_thz);
        flags.zero_phase |= phi == 0.0;
        let bk = c.bandwidth_thz();
        xpm += 2.0 * (c.launch_power_mw / pi).powi(2) / bk * n * xpm_integral(&terms.channels[k], phi, bi, l);
    }
    let g2 = params.gamma * params.gamma;
    Ok(Eta { value: params.polarization.gaussian_prefactor() * g2 * (spm + xpm) * PER_MW2, flags })
}
