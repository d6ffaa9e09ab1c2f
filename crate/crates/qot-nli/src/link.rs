use num_complex::Complex64;
use qot_core::quad::{integrate_breaks, QuadOptions};
use qot_fit::{ChannelTerms, DerivedTerms, ExpTerm};
use qot_raman::PowerProfile;

use crate::NliError;

/// Source of the per-channel link function μ_k(φ) = ∫₀ᴸ ρ_k(ζ) e^{jφζ} dζ.
///
/// XPM-type interactions only need the profile of the interfering channel and
/// SPM only that of the COI, so one channel index is enough.
pub trait LinkModel: Sync {
    fn n_channels(&self) -> usize;
    fn mu(&self, ch: usize, phi: f64) -> Complex64;
}

/// (1 − e^{−sL})/s for complex s, stable near s = 0.
pub(crate) fn one_minus_exp_over(s: Complex64, l: f64) -> Complex64 {
    let x = s * l;
    if x.norm() < 1e-4 {
        l * (1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0)
    } else {
        (1.0 - (-x).exp()) / s
    }
}

/// ∫₀ᴸ Υ κ_b e^{(−α + jφ)ζ} dζ for one exponential term.
pub fn mu_term(t: &ExpTerm, phi: f64, l: f64) -> Complex64 {
    t.upsilon * t.kappa_b * one_minus_exp_over(Complex64::new(t.alpha, -phi), l)
}

pub fn mu_channel(c: &ChannelTerms, phi: f64, l: f64) -> Complex64 {
    c.active().map(|t| mu_term(t, phi, l)).sum()
}

/// Link function of the fitted exponential expansion, evaluated exactly.
#[derive(Clone, Copy, Debug)]
pub struct FittedLink<'a> {
    pub terms: &'a DerivedTerms,
}

impl LinkModel for FittedLink<'_> {
    fn n_channels(&self) -> usize {
        self.terms.channels.len()
    }

    fn mu(&self, ch: usize, phi: f64) -> Complex64 {
        mu_channel(&self.terms.channels[ch], phi, self.terms.span_length_km)
    }
}

/// Link function of a solved power profile, with ln ρ taken linear between
/// samples; each segment then integrates in closed form.
#[derive(Clone, Debug)]
pub struct RawLink {
    z: Vec<f64>,
    // per channel: (ln ρ at z_j, slope of ln ρ on segment j)
    log_rho: Vec<Vec<f64>>,
    slope: Vec<Vec<f64>>,
}

impl RawLink {
    pub fn new(profile: &PowerProfile) -> Result<Self, NliError> {
        let n = profile.n_signals();
        if n == 0 {
            return Err(NliError::Input("profile has no signal channels".into()));
        }
        let z = profile.z_km.clone();
        let mut log_rho = Vec::with_capacity(n);
        let mut slope = Vec::with_capacity(n);
        for ch in 0..n {
            let lr: Vec<f64> = profile.signal_rho(ch).iter().map(|r| r.ln()).collect();
            slope.push(z.windows(2).zip(lr.windows(2)).map(|(zz, rr)| (rr[1] - rr[0]) / (zz[1] - zz[0])).collect());
            log_rho.push(lr);
        }
        Ok(Self { z, log_rho, slope })
    }

    /// Interpolated ρ of channel `ch` at `z`.
    pub fn rho(&self, ch: usize, z: f64) -> f64 {
        let j = match self.z.binary_search_by(|v| v.total_cmp(&z)) {
            Ok(j) => return self.log_rho[ch][j].exp(),
            Err(j) => j.clamp(1, self.z.len() - 1) - 1,
        };
        (self.log_rho[ch][j] + self.slope[ch][j] * (z - self.z[j])).exp()
    }
}

impl LinkModel for RawLink {
    fn n_channels(&self) -> usize {
        self.log_rho.len()
    }

    fn mu(&self, ch: usize, phi: f64) -> Complex64 {
        let (lr, g) = (&self.log_rho[ch], &self.slope[ch]);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..g.len() {
            let h = self.z[j + 1] - self.z[j];
            // ∫₀ʰ e^{(g + jφ)s} ds, written as a decaying factor
            let s = Complex64::new(g[j], phi);
            acc += Complex64::from_polar(lr[j].exp(), phi * self.z[j]) * one_minus_exp_over(-s, h);
        }
        acc
    }
}

/// Which profile representation backs a link-function evaluation.
#[derive(Clone, Copy, Debug)]
pub enum LinkSource<'a> {
    /// The fitted model, integrated numerically in ζ.
    Fitted(&'a DerivedTerms),
    /// The solved profile, integrated segment by segment.
    Raw(&'a RawLink, &'a [f64]),
}

/// μ(f1, f2, f3) = ∫₀ᴸ √(ρ1 ρ2 ρ3′ / ρ3) e^{jφζ} dζ with f3′ = f1 + f2 − f3.
///
/// Each frequency takes the profile of its nearest channel. `phi` is the
/// phase mismatch, supplied by the caller.
pub fn link_function(src: LinkSource<'_>, f: [f64; 3], phi: f64, tol: f64) -> Result<Complex64, NliError> {
    let f4 = f[0] + f[1] - f[2];
    let freqs = [f[0], f[1], f4, f[2]];
    let (l, knots, rho): (f64, &[f64], Box<dyn Fn(f64) -> f64 + '_>) = match src {
        LinkSource::Fitted(t) => {
            let c: Vec<&ChannelTerms> = freqs.iter().map(|&x| t.nearest(x)).collect();
            (t.span_length_km, &[], Box::new(move |z| (c[0].rho(z) * c[1].rho(z) * c[2].rho(z) / c[3].rho(z)).sqrt()))
        }
        LinkSource::Raw(r, grid) => {
            let c: Vec<usize> = freqs.iter().map(|&x| nearest_index(grid, x)).collect();
            let l = *r.z.last().unwrap();
            // ρ has slope jumps at every sample
            (l, &r.z, Box::new(move |z| (r.rho(c[0], z) * r.rho(c[1], z) * r.rho(c[2], z) / r.rho(c[3], z)).sqrt()))
        }
    };
    // split at every 2π of phase so each panel sees at most one oscillation
    let cycles = (phi.abs() * l / (2.0 * std::f64::consts::PI)).ceil().max(1.0) as usize;
    let mut pts: Vec<f64> = (0..=cycles).map(|j| l * j as f64 / cycles as f64).chain(knots.iter().copied()).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let opts = QuadOptions { abs_tol: 0.0, rel_tol: tol, max_intervals: 20 * pts.len() + 200 };
    let r = integrate_breaks(|z| Complex64::from_polar(rho(z), phi * z), &pts, opts);
    if !r.converged {
        return Err(NliError::Quadrature { what: "link function", error: r.error });
    }
    Ok(r.value)
}

pub(crate) fn nearest_index(grid: &[f64], f: f64) -> usize {
    let mut best = 0;
    for (i, g) in grid.iter().enumerate() {
        if (g - f).abs() < (grid[best] - f).abs() {
            best = i;
        }
    }
    best
}
