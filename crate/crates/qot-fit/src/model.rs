/// Parameters in fit order: α, α_f, T_f, α_b, T_b.
pub(crate) const N_PARAMS: usize = 5;

/// Model profile at `z` for span length `l`.
pub fn model_rho(alpha: f64, alpha_f: f64, t_f: f64, alpha_b: f64, t_b: f64, l: f64, z: f64) -> f64 {
    let base = (-alpha * z).exp();
    base * (1.0 + t_f * (1.0 - (-alpha_f * z).exp()) + t_b * ((-alpha_b * (l - z)).exp() - (-alpha_b * l).exp()))
}

/// ∂ρ/∂p for p in fit order.
pub(crate) fn model_grad(p: &[f64; N_PARAMS], l: f64, z: f64) -> [f64; N_PARAMS] {
    let [a, af, tf, ab, tb] = *p;
    let base = (-a * z).exp();
    let ef = (-af * z).exp();
    let eb = (-ab * (l - z)).exp();
    let el = (-ab * l).exp();
    let rho = base * (1.0 + tf * (1.0 - ef) + tb * (eb - el));
    [
        -z * rho,
        base * tf * z * ef,
        base * (1.0 - ef),
        base * tb * (-(l - z) * eb + l * el),
        base * (eb - el),
    ]
}
