use crate::fit::FittedCoeffs;
use crate::FitError;
use qot_core::{ChannelPlan, Direction, FiberSpec, PumpSet};

/// How the Υ expansion reads its T̃ coefficients from the fitted T.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TildeMap {
    /// T̃ = T
    #[default]
    Identity,
}

impl TildeMap {
    fn apply(self, t: f64) -> f64 {
        match self {
            TildeMap::Identity => t,
        }
    }
}

/// One exponential Υ κ_b e^{−α z} of a channel's expanded profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpTerm {
    pub l1: u8,
    pub l2: u8,
    pub alpha: f64,
    pub kappa_f: f64,
    pub kappa_b: f64,
    pub upsilon: f64,
}

impl ExpTerm {
    pub fn rho(&self, z: f64) -> f64 {
        self.upsilon * self.kappa_b * (-self.alpha * z).exp()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelTerms {
    pub channel: usize,
    pub frequency_thz: f64,
    pub t_f: f64,
    pub t_b: f64,
    pub t_k: f64,
    pub alpha: f64,
    pub alpha_f: f64,
    pub alpha_b: f64,
    /// (l1, l2) = (0,0), (1,0), (0,1)
    pub terms: [ExpTerm; 3],
}

impl ChannelTerms {
    fn new(channel: usize, frequency_thz: f64, alpha: f64, alpha_f: f64, alpha_b: f64, t_f: f64, t_b: f64, l: f64, tilde: TildeMap) -> Self {
        let t_k = 1.0 + t_f - t_b * (-alpha_b * l).exp();
        let (tf, tb) = (tilde.apply(t_f), tilde.apply(t_b));
        let term = |l1: u8, l2: u8| {
            let a = alpha + l1 as f64 * alpha_f - l2 as f64 * alpha_b;
            let upsilon = match (l1, l2) {
                (0, 0) => t_k,
                (1, 0) => -tf,
                _ => tb,
            };
            ExpTerm {
                l1,
                l2,
                alpha: a,
                kappa_f: (-(alpha + l1 as f64 * alpha_f) * l).exp(),
                kappa_b: (-(l2 as f64) * alpha_b * l).exp(),
                upsilon,
            }
        };
        Self {
            channel,
            frequency_thz,
            t_f,
            t_b,
            t_k,
            alpha,
            alpha_f,
            alpha_b,
            terms: [term(0, 0), term(1, 0), term(0, 1)],
        }
    }

    pub fn rho(&self, z: f64) -> f64 {
        self.terms.iter().map(|t| t.rho(z)).sum()
    }

    /// Terms with a nonzero weight.
    pub fn active(&self) -> impl Iterator<Item = &ExpTerm> {
        self.terms.iter().filter(|t| t.upsilon != 0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DerivedTerms {
    pub span_length_km: f64,
    pub f_hat_thz: f64,
    pub channels: Vec<ChannelTerms>,
}

impl DerivedTerms {
    /// Pure fiber loss for every channel, no Raman terms.
    pub fn loss_only(fiber: &FiberSpec, plan: &ChannelPlan) -> Self {
        let l = fiber.span_length_km;
        let channels = plan
            .channels()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let a = fiber.alpha(c.frequency_thz);
                ChannelTerms::new(i, c.frequency_thz, a, a, a, 0.0, 0.0, l, TildeMap::Identity)
            })
            .collect();
        Self { span_length_km: l, f_hat_thz: plan.mean_frequency(), channels }
    }

    /// Nearest channel's terms to frequency `f`.
    pub fn nearest(&self, f: f64) -> &ChannelTerms {
        self.channels
            .iter()
            .min_by(|a, b| (a.frequency_thz - f).abs().total_cmp(&(b.frequency_thz - f).abs()))
            .expect("non-empty terms")
    }
}

pub fn derive_terms(coeffs: &FittedCoeffs, pumps: &PumpSet, fiber: &FiberSpec, plan: &ChannelPlan) -> Result<DerivedTerms, FitError> {
    derive_terms_with(coeffs, pumps, fiber, plan, TildeMap::default())
}

pub fn derive_terms_with(
    coeffs: &FittedCoeffs,
    pumps: &PumpSet,
    fiber: &FiberSpec,
    plan: &ChannelPlan,
    tilde: TildeMap,
) -> Result<DerivedTerms, FitError> {
    let l = fiber.span_length_km;
    if (coeffs.span_length_km - l).abs() > 1e-9 * l {
        return Err(FitError::Format(format!(
            "coefficients fitted over {} km, fiber span is {} km",
            coeffs.span_length_km, l
        )));
    }
    if coeffs.channels.len() != plan.len() {
        return Err(FitError::Format(format!("{} fitted channels for a {}-channel plan", coeffs.channels.len(), plan.len())));
    }
    let p_f = pumps.total_power(Direction::Forward) + plan.total_power_mw();
    let p_b = pumps.total_power(Direction::Backward);
    let f_hat = pumps.average_frequency().unwrap_or_else(|| plan.mean_frequency());
    let mut channels = Vec::with_capacity(plan.len());
    for (k, c) in coeffs.channels.iter().enumerate() {
        let df = plan.channels()[k].frequency_thz - f_hat;
        for (name, a, cc) in [("alpha_f", c.alpha_f, c.c_f), ("alpha_b", c.alpha_b, c.c_b)] {
            if a == 0.0 && cc != 0.0 {
                return Err(FitError::Degenerate { channel: k, reason: format!("{name} = 0 with a nonzero gain slope") });
            }
        }
        let t_f = FittedCoeffs::t_from_c(p_f, c.c_f, df, c.alpha_f);
        let t_b = FittedCoeffs::t_from_c(p_b, c.c_b, df, c.alpha_b);
        channels.push(ChannelTerms::new(k, plan.channels()[k].frequency_thz, c.alpha, c.alpha_f, c.alpha_b, t_f, t_b, l, tilde));
    }
    Ok(DerivedTerms { span_length_km: l, f_hat_thz: f_hat, channels })
}
