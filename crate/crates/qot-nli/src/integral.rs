//! Quadrature oracles.
//!
//! Integrands here oscillate with the phase mismatch, so every spectral
//! integral is split wherever φL crosses a multiple of 2π. The 2-D Gaussian
//! regions are first reduced with the coarea formula,
//!
//! ∫∫_R g(ψ(x, y)) dx dy = ∫ g(φ) W(φ) dφ,
//!
//! where the phase density W is a smooth 1-D integral along the level curve.
//! That leaves a single oscillatory integral instead of a nested pair whose
//! outer integrand would oscillate too.

use qot_core::quad::{integrate_breaks, QuadOptions};
use qot_core::ChannelPlan;
use std::cell::Cell;
use std::f64::consts::PI;

use crate::closed::{coherent_term, PER_MW2};
use crate::link::LinkModel;
use crate::{check_inputs, Eta, Flags, NliError, NliParams};

/// Tolerances of the 1-D and nested 2-D quadratures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegralOptions {
    /// Relative tolerance of each spectral integral; the phase-density
    /// integrals nested inside run at 1e-10.
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for IntegralOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-5, max_intervals: 20_000 }
    }
}

impl IntegralOptions {
    fn quad(&self, n_breaks: usize) -> QuadOptions {
        QuadOptions { abs_tol: 0.0, rel_tol: self.rel_tol, max_intervals: self.max_intervals + 8 * n_breaks }
    }
}

/// sin²(nθ/2)/sin²(θ/2)
pub fn array_factor(theta: f64, n: usize) -> f64 {
    if n == 1 {
        return 1.0;
    }
    let s = (0.5 * theta).sin();
    if s.abs() < 1e-9 {
        return (n * n) as f64;
    }
    let r = (0.5 * n as f64 * theta).sin() / s;
    r * r
}

/// [a, ..., b] with every x where φ(x)L crosses a multiple of 2π/sub inserted.
///
/// The n-span array factor has n − 1 zeros per period, so splitting each
/// period in ~n/4 pieces lets a single Gauss–Kronrod panel resolve it. φ is
/// assumed monotone on [a, b], which holds for every phase used here away
/// from the zero-dispersion wavelength.
pub(crate) fn phase_breaks(phase: impl Fn(f64) -> f64, a: f64, b: f64, l: f64, sub: usize) -> Vec<f64> {
    let scale = sub as f64 * l / (2.0 * PI);
    let g = |x: f64| phase(x) * scale;
    let (ga, gb) = (g(a), g(b));
    let (lo, hi) = (ga.min(gb), ga.max(gb));
    let mut pts = vec![a];
    let m0 = lo.floor() as i64 + 1;
    let m1 = hi.ceil() as i64 - 1;
    let up = gb > ga;
    let mut left = a;
    let mut ms: Vec<i64> = (m0..=m1).collect();
    if !up {
        ms.reverse();
    }
    for m in ms {
        let target = m as f64;
        // Illinois regula falsi on the monotone bracket [left, b]
        let (mut x0, mut x1) = (left, b);
        let (mut f0, mut f1) = (g(x0) - target, gb - target);
        let mut side = 0;
        let mut x = x0;
        for _ in 0..100 {
            x = (x0 * f1 - x1 * f0) / (f1 - f0);
            if !(x > x0.min(x1) && x < x0.max(x1)) {
                x = 0.5 * (x0 + x1);
            }
            let fx = g(x) - target;
            if fx == 0.0 || (x1 - x0).abs() < 1e-14 * (b - a) {
                break;
            }
            if (fx > 0.0) == (f1 > 0.0) {
                x1 = x;
                f1 = fx;
                if side == -1 {
                    f0 *= 0.5;
                }
                side = -1;
            } else {
                x0 = x;
                f0 = fx;
                if side == 1 {
                    f1 *= 0.5;
                }
                side = 1;
            }
        }
        if x > left && x < b {
            pts.push(x);
            left = x;
        }
    }
    pts.push(b);
    pts
}

fn merge(mut pts: Vec<f64>, extra: &[f64]) -> Vec<f64> {
    let (a, b) = (pts[0], *pts.last().unwrap());
    pts.extend(extra.iter().copied().filter(|x| *x > a && *x < b));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

struct Tracker {
    failed: Cell<bool>,
    worst: Cell<f64>,
}

impl Tracker {
    fn new() -> Self {
        Self { failed: Cell::new(false), worst: Cell::new(0.0) }
    }

    fn note(&self, converged: bool, error: f64) {
        if !converged {
            self.failed.set(true);
            self.worst.set(self.worst.get().max(error));
        }
    }

    fn finish(&self, what: &'static str) -> Result<(), NliError> {
        if self.failed.get() {
            return Err(NliError::Quadrature { what, error: self.worst.get() });
        }
        Ok(())
    }
}

/// ∫_{−B_i/2}^{B_i/2} |μ_k(φ(f_i+u, f_k, f_i))|² du with the exact phase.
fn corr_spectrum(link: &dyn LinkModel, k: usize, params: &NliParams, fi: f64, fk: f64, bi: f64, opts: &IntegralOptions, tr: &Tracker) -> f64 {
    let l = params.span_length_km;
    let phase = |u: f64| params.phi(fi + u, fk, fi);
    let pts = merge(phase_breaks(phase, -0.5 * bi, 0.5 * bi, l, 1), &[0.0]);
    let r = integrate_breaks(|u| link.mu(k, phase(u)).norm_sqr(), &pts, opts.quad(pts.len()));
    tr.note(r.converged, r.error);
    r.value
}

/// Modulation-format correction η_corr by quadrature of the |μ|² spectrum.
pub fn eta_corr_integral(plan: &ChannelPlan, coi: usize, link: &dyn LinkModel, params: &NliParams, opts: &IntegralOptions) -> Result<Eta, NliError> {
    check_inputs(plan, coi, link.n_channels(), params.span_length_km, params)?;
    let ch = plan.channels();
    let (fi, bi, pi) = (ch[coi].frequency_thz, ch[coi].bandwidth_thz(), ch[coi].launch_power_mw);
    let n = params.n_spans as f64;
    let tr = Tracker::new();
    let mut flags = Flags::default();
    let mut sum = 0.0;
    for (k, c) in ch.iter().enumerate() {
        if k == coi || c.kurtosis == 0.0 {
            continue;
        }
        let (fk, bk) = (c.frequency_thz, c.bandwidth_thz());
        let main = n * corr_spectrum(link, k, params, fi, fk, bi, opts, &tr);
        let mu0 = link.mu(k, 0.0).re;
        let coh = coherent_term(params, fi, fk, bi, bk, mu0, &mut flags);
        sum += c.kurtosis * (c.launch_power_mw / pi).powi(2) / bk * (main + coh);
    }
    tr.finish("correction integral")?;
    let g2 = params.gamma * params.gamma;
    Ok(Eta { value: params.polarization.correction_prefactor() * g2 * sum * PER_MW2, flags })
}

/// An interaction region x ∈ [x0, x1], y ∈ [lo(x), hi(x)] with lo and hi
/// piecewise linear, and a phase that is quadratic in y with no constant
/// term: ψ(x, y) = A(x) y² + B(x) y.
struct Region<L, H, C> {
    x0: f64,
    x1: f64,
    /// interior points where lo, hi or the sign of B change
    kinks: Vec<f64>,
    lo: L,
    hi: H,
    coef: C,
}

impl<L, H, C> Region<L, H, C>
where
    L: Fn(f64) -> f64,
    H: Fn(f64) -> f64,
    C: Fn(f64) -> (f64, f64),
{
    fn psi(&self, x: f64, y: f64) -> f64 {
        let (a, b) = (self.coef)(x);
        (a * y + b) * y
    }

    fn pieces(&self) -> Vec<f64> {
        merge(vec![self.x0, self.x1], &self.kinks)
    }

    /// ψ at the polygon corners, where W(φ) has kinks.
    fn corner_phases(&self) -> Vec<f64> {
        self.pieces().iter().flat_map(|&x| [self.psi(x, (self.lo)(x)), self.psi(x, (self.hi)(x))]).collect()
    }

    /// Range of ψ over the region, from its boundary.
    fn phase_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for w in self.pieces().windows(2) {
            for j in 0..=256 {
                let x = w[0] + (w[1] - w[0]) * j as f64 / 256.0;
                for y in [(self.lo)(x), (self.hi)(x)] {
                    let p = self.psi(x, y);
                    lo = lo.min(p);
                    hi = hi.max(p);
                }
            }
        }
        // extrema inside an edge sit between samples; W is zero past them
        let pad = 1e-3 * (hi - lo);
        (lo - pad, hi + pad)
    }

    /// y solving ψ(x, y) = φ on the branch through y = 0.
    fn root(&self, x: f64, phi: f64) -> Option<f64> {
        let (a, b) = (self.coef)(x);
        let d = b * b + 4.0 * a * phi;
        if d < 0.0 || b == 0.0 {
            return None;
        }
        Some(2.0 * phi / (b + b.signum() * d.sqrt()))
    }

    /// Phase density W(φ) = ∫ δ(φ − ψ) dx dy = ∫ dx / |∂ψ/∂y| along the
    /// level curve ψ = φ inside the region.
    fn density(&self, phi: f64) -> f64 {
        let inside = |x: f64| match self.root(x, phi) {
            Some(y) => y >= (self.lo)(x) && y <= (self.hi)(x),
            None => false,
        };
        let g_lo = |x: f64| self.psi(x, (self.lo)(x)) - phi;
        let g_hi = |x: f64| self.psi(x, (self.hi)(x)) - phi;
        let mut cuts = self.pieces();
        for w in self.pieces().windows(2) {
            for g in [&g_lo as &dyn Fn(f64) -> f64, &g_hi] {
                sign_changes(g, w[0], w[1], 16, &mut cuts);
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut total = 0.0;
        for w in cuts.windows(2) {
            if w[1] - w[0] <= 0.0 || !inside(0.5 * (w[0] + w[1])) {
                continue;
            }
            let r = integrate_breaks(
                |x| match self.root(x, phi) {
                    Some(y) => {
                        let (a, b) = (self.coef)(x);
                        1.0 / (2.0 * a * y + b).abs()
                    }
                    None => 0.0,
                },
                w,
                QuadOptions { abs_tol: 0.0, rel_tol: 1e-10, max_intervals: 200 },
            );
            total += r.value;
        }
        total
    }
}

/// Appends to `out` every sign change of g found on a sampled grid.
fn sign_changes(g: &dyn Fn(f64) -> f64, a: f64, b: f64, samples: usize, out: &mut Vec<f64>) {
    let mut x0 = a;
    let mut g0 = g(a);
    for j in 1..=samples {
        let x1 = a + (b - a) * j as f64 / samples as f64;
        let g1 = g(x1);
        if g0 == 0.0 {
            out.push(x0);
        } else if g0 * g1 < 0.0 {
            let (mut l, mut r, mut gl) = (x0, x1, g0);
            for _ in 0..60 {
                let m = 0.5 * (l + r);
                let gm = g(m);
                if gm * gl > 0.0 {
                    l = m;
                    gl = gm;
                } else {
                    r = m;
                }
                if r - l < 1e-15 * (b - a) {
                    break;
                }
            }
            out.push(0.5 * (l + r));
        }
        x0 = x1;
        g0 = g1;
    }
}

/// ∫∫_R |μ_ch(ψ)|² AF(ψL) dx dy, reduced to one oscillatory integral over
/// the phase with the coarea formula.
fn region_integral<L, H, C>(region: &Region<L, H, C>, link: &dyn LinkModel, ch: usize, params: &NliParams, opts: &IntegralOptions, tr: &Tracker) -> f64
where
    L: Fn(f64) -> f64,
    H: Fn(f64) -> f64,
    C: Fn(f64) -> (f64, f64),
{
    let l = params.span_length_km;
    let n = params.n_spans;
    let (p0, p1) = region.phase_range();
    let mut extra = region.corner_phases();
    extra.push(0.0);
    let pts = merge(phase_breaks(|p| p, p0, p1, l, n.div_ceil(4)), &extra);
    // W is log-singular at φ = 0 for SPM; the sliver |φ| < ε adds O(ε ln ε)
    let eps = 1e-12 * (p1 - p0);
    let r = integrate_breaks(
        |p| {
            if p.abs() < eps {
                return 0.0;
            }
            let w = region.density(p);
            if w == 0.0 {
                return 0.0;
            }
            link.mu(ch, p).norm_sqr() * array_factor(p * l, n) * w
        },
        &pts,
        opts.quad(pts.len()),
    );
    tr.note(r.converged, r.error);
    r.value
}

/// SPM: f1 = f_i + u, f2 = f_i + v over the hexagon |u|, |v|, |u+v| ≤ B/2.
fn spm_integral(link: &dyn LinkModel, i: usize, params: &NliParams, fi: f64, b: f64, opts: &IntegralOptions, tr: &Tracker) -> f64 {
    let h = 0.5 * b;
    let ri = fi - params.f_ref_thz;
    let (b2, b3) = (params.beta2, params.beta3);
    let k = -4.0 * PI * PI;
    let region = Region {
        x0: -h,
        x1: h,
        kinks: vec![0.0],
        lo: |u: f64| (-h).max(-h - u),
        hi: |u: f64| h.min(h - u),
        coef: |u: f64| (k * u * PI * b3, k * u * (b2 + PI * b3 * (2.0 * ri + u))),
    };
    region_integral(&region, link, i, params, opts, tr)
}

/// XPM: f1 = f_i + u in the COI, f2 = f_k + v and f1 + f2 − f_i in channel k.
fn xpm_integral(link: &dyn LinkModel, k: usize, params: &NliParams, fi: f64, bi: f64, fk: f64, bk: f64, opts: &IntegralOptions, tr: &Tracker) -> f64 {
    let (hi_, hk) = (0.5 * bi, 0.5 * bk);
    let (ri, rk) = (fi - params.f_ref_thz, fk - params.f_ref_thz);
    let df = fk - fi;
    let (b2, b3) = (params.beta2, params.beta3);
    let c = -4.0 * PI * PI;
    let region = Region {
        x0: -hk,
        x1: hk,
        kinks: vec![hi_ - hk, hk - hi_],
        lo: |v: f64| (-hi_).max(-hk - v),
        hi: |v: f64| hi_.min(hk - v),
        coef: |v: f64| {
            let w = c * (df + v);
            (w * PI * b3, w * (b2 + PI * b3 * (ri + rk + v)))
        },
    };
    region_integral(&region, link, k, params, opts, tr)
}

/// Gaussian-modulation η_GN (SPM + XPM) by adaptive quadrature of the 2-D
/// interaction regions, with the multi-span array factor inside the integral.
pub fn eta_gn_integral(plan: &ChannelPlan, coi: usize, link: &dyn LinkModel, params: &NliParams, opts: &IntegralOptions) -> Result<Eta, NliError> {
    check_inputs(plan, coi, link.n_channels(), params.span_length_km, params)?;
    let ch = plan.channels();
    let (fi, bi, pi) = (ch[coi].frequency_thz, ch[coi].bandwidth_thz(), ch[coi].launch_power_mw);
    let tr = Tracker::new();
    let spm = spm_integral(link, coi, params, fi, bi, opts, &tr) / (bi * bi);
    let mut xpm = 0.0;
    for (k, c) in ch.iter().enumerate() {
        if k == coi {
            continue;
        }
        let (fk, bk) = (c.frequency_thz, c.bandwidth_thz());
        xpm += 2.0 * (c.launch_power_mw / pi).powi(2) / (bk * bk) * xpm_integral(link, k, params, fi, bi, fk, bk, opts, &tr);
    }
    tr.finish("Gaussian integral")?;
    let g2 = params.gamma * params.gamma;
    Ok(Eta { value: params.polarization.gaussian_prefactor() * g2 * (spm + xpm) * PER_MW2, flags: Flags::default() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> NliParams {
        NliParams {
            beta2: -21.7,
            beta3: 0.14,
            f_ref_thz: 193.4,
            gamma: 1.3,
            span_length_km: 100.0,
            n_spans: 1,
            polarization: Default::default(),
        }
    }

    struct Flat;
    impl LinkModel for Flat {
        fn n_channels(&self) -> usize {
            1
        }
        fn mu(&self, _: usize, _: f64) -> num_complex::Complex64 {
            num_complex::Complex64::new(1.0, 0.0)
        }
    }

    #[test]
    fn density_integrates_to_area() {
        let p = params();
        let tr = Tracker::new();
        let o = IntegralOptions::default();
        let b = 0.064;
        let spm = spm_integral(&Flat, 0, &p, 194.0, b, &o, &tr);
        assert!(!tr.failed.get(), "{}", tr.worst.get());
        assert!((spm / (0.75 * b * b) - 1.0).abs() < 1e-6, "{spm}");
        let (bi, bk) = (0.064, 0.03);
        let xpm = xpm_integral(&Flat, 0, &p, 194.0, bi, 194.3, bk, &o, &tr);
        assert!(!tr.failed.get());
        // with B_k ≤ B_i every v sees the full width B_k
        assert!((xpm / (bk * bk) - 1.0).abs() < 1e-6, "{xpm}");
        let xpm = xpm_integral(&Flat, 0, &p, 194.0, bk, 194.3, bk, &o, &tr);
        assert!((xpm / (0.75 * bk * bk) - 1.0).abs() < 1e-6, "{xpm}");
    }
}
