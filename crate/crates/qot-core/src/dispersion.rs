//! Conversion between the engineering dispersion pair (D, S) and the
//! propagation-constant derivatives (β2, β3).

use std::f64::consts::PI;

/// c in nm/ps.
const C_NM_PER_PS: f64 = crate::units::C_M_PER_S * 1e-3;

/// (D ps/(nm km), S ps/(nm² km), λ nm) → (β2 ps²/km, β3 ps³/km).
pub fn dispersion_to_beta(d: f64, s: f64, lambda_nm: f64) -> (f64, f64) {
    let k = lambda_nm * lambda_nm / (2.0 * PI * C_NM_PER_PS);
    let beta2 = -d * k;
    let beta3 = k * k * (s + 2.0 * d / lambda_nm);
    (beta2, beta3)
}

/// Inverse of [`dispersion_to_beta`].
pub fn beta_to_dispersion(beta2: f64, beta3: f64, lambda_nm: f64) -> (f64, f64) {
    let k = lambda_nm * lambda_nm / (2.0 * PI * C_NM_PER_PS);
    let d = -beta2 / k;
    let s = beta3 / (k * k) - 2.0 * d / lambda_nm;
    (d, s)
}
