use crate::model::{model_grad, model_rho, N_PARAMS};
use crate::FitError;
use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::{DMatrix, DVector, Dyn, Owned};
use qot_core::{ChannelPlan, Direction, Exec, PumpSet};
use qot_raman::PowerProfile;

const DB: f64 = 10.0 / std::f64::consts::LN_10;

#[derive(Clone, Debug)]
pub struct FitOptions {
    /// Channels whose RMS error exceeds this (dB) are flagged
    pub ceiling_db: f64,
    pub exec: Exec,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { ceiling_db: 0.5, exec: Exec::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelFit {
    pub channel: usize,
    pub frequency_thz: f64,
    /// Base power attenuation (1/km)
    pub alpha: f64,
    pub alpha_f: f64,
    pub alpha_b: f64,
    /// Gain-slope coefficients, 1/(km THz W)
    pub c_f: f64,
    pub c_b: f64,
    pub t_f: f64,
    pub t_b: f64,
    pub rms_db: f64,
    pub within_ceiling: bool,
}

impl ChannelFit {
    pub fn rho(&self, l: f64, z: f64) -> f64 {
        model_rho(self.alpha, self.alpha_f, self.t_f, self.alpha_b, self.t_b, l, z)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FittedCoeffs {
    pub span_length_km: f64,
    /// Forward power driving the forward-like term: forward pumps plus the signal launch power (mW)
    pub p_f_mw: f64,
    /// Total backward pump power (mW)
    pub p_b_mw: f64,
    /// Mean pump frequency, or the mean signal frequency without pumps (THz)
    pub f_hat_thz: f64,
    pub channels: Vec<ChannelFit>,
}

impl FittedCoeffs {
    pub fn max_rms_db(&self) -> f64 {
        self.channels.iter().fold(0.0, |m, c| m.max(c.rms_db))
    }

    /// T from a gain-slope coefficient: T = −P C (f_k − f̂)/α_x, P in W.
    pub(crate) fn t_from_c(p_mw: f64, c: f64, df: f64, alpha_x: f64) -> f64 {
        if c == 0.0 {
            0.0
        } else {
            -p_mw * 1e-3 * c * df / alpha_x
        }
    }

    pub(crate) fn c_from_t(p_mw: f64, t: f64, df: f64, alpha_x: f64) -> f64 {
        if t == 0.0 || p_mw == 0.0 || df == 0.0 {
            0.0
        } else {
            -t * alpha_x / (p_mw * 1e-3 * df)
        }
    }
}

pub fn fit_profile(profile: &PowerProfile, plan: &ChannelPlan, pumps: &PumpSet) -> Result<FittedCoeffs, FitError> {
    fit_profile_with(profile, plan, pumps, &FitOptions::default())
}

pub fn fit_profile_with(
    profile: &PowerProfile,
    plan: &ChannelPlan,
    pumps: &PumpSet,
    opts: &FitOptions,
) -> Result<FittedCoeffs, FitError> {
    let l = profile.span_length();
    let p_f = pumps.total_power(Direction::Forward) + plan.total_power_mw();
    let p_b = pumps.total_power(Direction::Backward);
    let f_hat = pumps.average_frequency().unwrap_or_else(|| plan.mean_frequency());
    let mut data = Vec::with_capacity(plan.len());
    for ch in 0..plan.len() {
        if profile.signal_component(ch).is_none() {
            return Err(FitError::MissingChannel(ch));
        }
        data.push(profile.signal_rho(ch));
    }
    let z = &profile.z_km;
    let channels = opts.exec.map_range(plan.len(), |ch| {
        let fk = plan.channels()[ch].frequency_thz;
        let df = fk - f_hat;
        let on_hat = df.abs() < 1e-9;
        let free = [true, !on_hat, !on_hat, !on_hat && p_b > 0.0, !on_hat && p_b > 0.0];
        let (p, rms) = fit_channel(z, &data[ch], l, free);
        let [alpha, alpha_f, t_f, alpha_b, t_b] = p;
        ChannelFit {
            channel: ch,
            frequency_thz: fk,
            alpha,
            alpha_f,
            alpha_b,
            c_f: FittedCoeffs::c_from_t(p_f, t_f, df, alpha_f),
            c_b: FittedCoeffs::c_from_t(p_b, t_b, df, alpha_b),
            t_f,
            t_b,
            rms_db: rms,
            within_ceiling: rms <= opts.ceiling_db,
        }
    });
    Ok(FittedCoeffs { span_length_km: l, p_f_mw: p_f, p_b_mw: p_b, f_hat_thz: f_hat, channels })
}

/// Fit one sampled profile ρ(z) over a span of length `l`. The forward and
/// backward corrections can be switched off (their T is then held at 0).
/// Returns (α, α_f, T_f, α_b, T_b) and the RMS error in dB.
pub fn fit_samples(z: &[f64], rho: &[f64], l: f64, forward: bool, backward: bool) -> ([f64; 5], f64) {
    fit_channel(z, rho, l, [true, forward, forward, backward, backward])
}

fn rms_db(z: &[f64], y_db: &[f64], l: f64, p: &[f64; N_PARAMS]) -> f64 {
    let mut s = 0.0;
    for (zi, yi) in z.iter().zip(y_db) {
        let r = model_rho(p[0], p[1], p[2], p[3], p[4], l, *zi);
        if r <= 0.0 {
            return f64::INFINITY;
        }
        s += (DB * r.ln() - yi).powi(2);
    }
    (s / z.len() as f64).sqrt()
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

/// Grid initialization followed by Levenberg–Marquardt in the dB domain.
fn fit_channel(z: &[f64], rho: &[f64], l: f64, free: [bool; N_PARAMS]) -> ([f64; N_PARAMS], f64) {
    let y_db: Vec<f64> = rho.iter().map(|r| DB * r.ln()).collect();
    // initial slope over the first tenth of the span
    let j = (z.len() / 10).max(1);
    let s0 = -(rho[j].ln() - rho[0].ln()) / (z[j] - z[0]);
    let use_f = free[2];
    let use_b = free[4];
    let mut alphas: Vec<f64> = if use_f || use_b {
        (0..12).map(|i| 0.002 + 0.009 * i as f64).collect()
    } else {
        Vec::new()
    };
    if s0 > 0.0 {
        alphas.push(s0);
    }
    let af_grid = if use_f { log_grid(0.002, 2.0, 10) } else { vec![0.05] };
    let ab_grid = if use_b { log_grid(0.002, 2.0, 10) } else { vec![0.05] };
    let mut best = ([s0.max(1e-4), 0.05, 0.0, 0.05, 0.0], f64::INFINITY);
    for &a in &alphas {
        for &af in &af_grid {
            for &ab in &ab_grid {
                // T_f, T_b by linear least squares on the relative error
                // ρ_model/ρ − 1, which tracks the dB error
                let (mut suu, mut suv, mut svv, mut sug, mut svg) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for (zi, ri) in z.iter().zip(rho) {
                    let w = (-a * zi).exp() / ri;
                    let g = 1.0 - w;
                    let u = if use_f { w * (1.0 - (-af * zi).exp()) } else { 0.0 };
                    let v = if use_b { w * ((-ab * (l - zi)).exp() - (-ab * l).exp()) } else { 0.0 };
                    suu += u * u;
                    suv += u * v;
                    svv += v * v;
                    sug += u * g;
                    svg += v * g;
                }
                let (tf, tb) = match (use_f, use_b) {
                    (true, true) => {
                        let det = suu * svv - suv * suv;
                        if det.abs() <= 1e-12 * suu * svv {
                            continue;
                        }
                        ((sug * svv - svg * suv) / det, (svg * suu - sug * suv) / det)
                    }
                    (true, false) => (sug / suu, 0.0),
                    (false, true) => (0.0, svg / svv),
                    (false, false) => (0.0, 0.0),
                };
                let p = [a, af, tf, ab, tb];
                let r = rms_db(z, &y_db, l, &p);
                if r < best.1 {
                    best = (p, r);
                }
            }
        }
    }
    let problem = Problem { z, y_db: &y_db, l, full: best.0, free };
    let (solved, _report) = LevenbergMarquardt::new()
        .with_patience(200)
        .with_tol(1e-14)
        .minimize(problem);
    let r = rms_db(z, &y_db, l, &solved.full);
    if r.is_finite() && r <= best.1 {
        (solved.full, r)
    } else {
        best
    }
}

struct Problem<'a> {
    z: &'a [f64],
    y_db: &'a [f64],
    l: f64,
    full: [f64; N_PARAMS],
    free: [bool; N_PARAMS],
}

/// The three rates are optimized in log form to keep them positive.
const LOG_PARAM: [bool; N_PARAMS] = [true, true, false, true, false];

impl Problem<'_> {
    fn free_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..N_PARAMS).filter(|&i| self.free[i])
    }
}

impl LeastSquaresProblem<f64, Dyn, Dyn> for Problem<'_> {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, Dyn>;
    type ParameterStorage = Owned<f64, Dyn>;

    fn set_params(&mut self, x: &DVector<f64>) {
        let idx: Vec<usize> = self.free_indices().collect();
        for (k, &i) in idx.iter().enumerate() {
            self.full[i] = if LOG_PARAM[i] { x[k].exp() } else { x[k] };
        }
    }

    fn params(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.free_indices().count(),
            self.free_indices().map(|i| if LOG_PARAM[i] { self.full[i].ln() } else { self.full[i] }),
        )
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        let p = &self.full;
        Some(DVector::from_iterator(
            self.z.len(),
            self.z.iter().zip(self.y_db).map(|(z, y)| {
                let r = model_rho(p[0], p[1], p[2], p[3], p[4], self.l, *z);
                // a non-positive model profile is far from any data point
                if r > 1e-30 {
                    DB * r.ln() - y
                } else {
                    300.0
                }
            }),
        ))
    }

    fn jacobian(&self) -> Option<DMatrix<f64>> {
        let idx: Vec<usize> = self.free_indices().collect();
        let p = &self.full;
        let mut jac = DMatrix::zeros(self.z.len(), idx.len());
        for (row, z) in self.z.iter().enumerate() {
            let r = model_rho(p[0], p[1], p[2], p[3], p[4], self.l, *z);
            if r <= 1e-30 {
                continue;
            }
            let g = model_grad(p, self.l, *z);
            for (k, &i) in idx.iter().enumerate() {
                let chain = if LOG_PARAM[i] { p[i] } else { 1.0 };
                jac[(row, k)] = DB * g[i] * chain / r;
            }
        }
        Some(jac)
    }
}
