//! Closed-form building blocks shared by the correction and Gaussian terms.
//!
//! Each channel profile is a short sum of exponentials Υ κ_b e^{−aζ} with
//! κ_f = κ_b e^{−aL}, so |μ|² and its spectral integrals reduce to pair sums
//! over (term, term′).

use qot_core::special::{ein, exp_over_u, EULER_GAMMA};
use qot_fit::{ChannelTerms, ExpTerm};
use std::f64::consts::PI;

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// (1 − e^{−aL})/a, equal to L at a = 0.
pub(crate) fn l_eff(a: f64, l: f64) -> f64 {
    let x = a * l;
    if x.abs() < 1e-8 {
        l * (1.0 - 0.5 * x)
    } else {
        -(-x).exp_m1() / a
    }
}

/// μ(0) of one channel.
pub fn mu_zero(c: &ChannelTerms, l: f64) -> f64 {
    c.active().map(|t| t.upsilon * t.kappa_b * l_eff(t.alpha, l)).sum()
}

// relative offset used to step around removable a + a′ = 0 singularities
const PAIR_EPS: f64 = 1e-5;

/// Calls `f(a, a′)` directly, or averages it either side of a + a′ = 0.
fn pair_guard(a: f64, a2: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
    let scale = a.abs().max(a2.abs()).max(1e-6);
    if (a + a2).abs() > 1e-7 * scale {
        return f(a, a2);
    }
    let e = PAIR_EPS * scale;
    0.5 * (f(a + e, a2 + e) + f(a - e, a2 - e))
}

/// ∫_{−B/2}^{B/2} of one (t, t′) pair of μ(φu)μ*(φu), without the Υ factors.
///
/// Uses the large-|φ|BL form: the atan block carries the slowly varying part
/// and the sign block the residue of the cos(φuL) cross terms. At φ = 0 the
/// integrand is constant and the limit B·μ(0)μ′(0) is returned.
pub fn xpm_pair(t: &ExpTerm, t2: &ExpTerm, phi: f64, b: f64, l: f64) -> f64 {
    let kb = t.kappa_b;
    let kb2 = t2.kappa_b;
    if phi == 0.0 {
        return b * kb * l_eff(t.alpha, l) * kb2 * l_eff(t2.alpha, l);
    }
    pair_guard(t.alpha, t2.alpha, |a, a2| {
        let kf = kb * (-a * l).exp();
        let kf2 = kb2 * (-a2 * l).exp();
        let e = (-(a * l).abs()).exp();
        let e2 = (-(a2 * l).abs()).exp();
        let den = phi * (a + a2);
        let atan = 2.0 * (kf * kf2 + kb * kb2) / den * ((phi * b / (2.0 * a)).atan() + (phi * b / (2.0 * a2)).atan());
        let sign = PI / den
            * (-(kf * kb2 + kb * kf2) * (sgn(a / phi) * e + sgn(a2 / phi) * e2)
                + (kb * kf2 - kf * kb2) * (sgn(-phi) * e + sgn(phi) * e2));
        atan + sign
    })
}

/// ∫_{−B/2}^{B/2} |μ_k(φu)|² du from the closed-form pair sum.
pub fn xpm_integral(c: &ChannelTerms, phi: f64, b: f64, l: f64) -> f64 {
    let mut s = 0.0;
    for t in c.active() {
        for t2 in c.active() {
            s += t.upsilon * t2.upsilon * xpm_pair(t, t2, phi, b, l);
        }
    }
    s
}

/// (2Δf − B) ln((2Δf − B)/(2Δf + B)) + 2B for 2Δf ≥ B, with the 2Δf → B limit.
pub fn ln_bracket(df: f64, b: f64) -> f64 {
    let d = 2.0 * df.abs();
    if d == b {
        return 2.0 * b;
    }
    // ln((d−b)/(d+b)) = −2 artanh(b/d), which keeps precision for d ≫ b
    -(d - b) * 2.0 * (b / d).atanh() + 2.0 * b
}

/// m_n(s) = ∫₀¹ tⁿ e^{−st} dt
fn moment(n: usize, s: f64) -> f64 {
    let mut sum = 0.0;
    if s >= 0.0 {
        // e^{−s} Σ_j s^j n!/(n+j+1)!
        let mut term = 1.0 / (n as f64 + 1.0);
        let mut j = 0usize;
        loop {
            sum += term;
            j += 1;
            term *= s / (n + j + 1) as f64;
            if term < 1e-17 * sum && j as f64 > s {
                break;
            }
        }
        sum * (-s).exp()
    } else {
        // Σ_j (−s)^j / (j! (n+j+1))
        let mut pw = 1.0;
        let mut j = 0usize;
        loop {
            let term = pw / (n + j + 1) as f64;
            sum += term;
            j += 1;
            pw *= -s / j as f64;
            if term < 1e-17 * sum && j as f64 > -s {
                break;
            }
        }
        sum
    }
}

/// Above this value of cL the asymptotic form of S is used.
pub const SPM_SERIES_LIMIT: f64 = 12.0;

/// S(p)/|φ| for the disk-equivalent SPM integral, with c = |φ|R²/2.
///
/// S(p) = ∫₀ᴸ e^{−pτ} F(cτ)/τ dτ with F(y) = ∫₀ʸ J₀(s) ds, evaluated by its
/// power series in cL when cL is small and by the large-cL expansion
/// otherwise. Dividing by
/// |φ| inside keeps the φ → 0 limit finite.
pub(crate) fn s_over_phi(p: f64, phi_abs: f64, r2: f64, l: f64) -> f64 {
    let c = phi_abs * r2 / 2.0;
    let x = c * l;
    if x > SPM_SERIES_LIMIT {
        let s = ((1.0 + (1.0 + (p / c).powi(2)).sqrt()) / 2.0).ln() + (2.0 * x).ln() + EULER_GAMMA - ein(p * l);
        return s / phi_abs;
    }
    let pl = p * l;
    let mut sum = 0.0;
    // coefficient x^{2m} / ((m!)² 4^m)
    let mut coef = 1.0;
    let mut m = 0usize;
    loop {
        let term = coef / (2 * m + 1) as f64 * moment(2 * m, pl);
        sum += if m % 2 == 0 { term } else { -term };
        m += 1;
        coef *= x * x / (4.0 * (m * m) as f64);
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && m as f64 > x {
            break;
        }
    }
    r2 * l / 2.0 * sum
}

/// Single-span SPM integral of |μ_i|² over the disk of the hexagon's area.
pub fn spm_single(c: &ChannelTerms, phi_abs: f64, b: f64, l: f64) -> f64 {
    let r2 = 3.0 * b * b / (4.0 * PI);
    let mut s = 0.0;
    for t in c.active() {
        for t2 in c.active() {
            let (kb, kb2) = (t.kappa_b, t2.kappa_b);
            let v = pair_guard(t.alpha, t2.alpha, |a, a2| {
                let kf = kb * (-a * l).exp();
                let kf2 = kb2 * (-a2 * l).exp();
                let sp = s_over_phi(a, phi_abs, r2, l) + s_over_phi(a2, phi_abs, r2, l);
                let sm = s_over_phi(-a, phi_abs, r2, l) + s_over_phi(-a2, phi_abs, r2, l);
                2.0 * PI / (a + a2) * (kb * kb2 * sp - kf * kf2 * sm)
            });
            s += t.upsilon * t2.upsilon * v;
        }
    }
    s
}

/// Cross-span SPM coupling between spans m apart.
///
/// Away from the stationary point the array-factor cross terms reduce to
/// (2π/|φ|) ∫ D(τ)/(τ + mL) dτ with D the autocorrelation of ρ. Valid for
/// cL ≳ 3.
pub fn spm_cross(c: &ChannelTerms, phi_abs: f64, m: usize, l: f64) -> f64 {
    let ml = m as f64 * l;
    let mut s = 0.0;
    for t in c.active() {
        for t2 in c.active() {
            let (kb, kb2) = (t.kappa_b, t2.kappa_b);
            let v = pair_guard(t.alpha, t2.alpha, |a, a2| {
                let damp = (-(a + a2) * l).exp();
                let pos = exp_over_u(-a, ml, l + ml, ml) - damp * exp_over_u(a2, ml, l + ml, ml);
                let neg = if m == 1 {
                    (-a2 * l).exp() * (ein(a * l) - ein(-a2 * l))
                } else {
                    exp_over_u(a2, ml - l, ml, ml) - damp * exp_over_u(-a, ml - l, ml, ml)
                };
                (pos + neg) / (a + a2)
            });
            s += t.upsilon * t2.upsilon * kb * kb2 * v;
        }
    }
    2.0 * PI / phi_abs * s
}
