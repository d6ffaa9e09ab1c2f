//! Exponential integrals.
//!
//! E1(x) = ∫_x^∞ e^{-t}/t dt, Ei(x) = PV ∫_{-∞}^x e^t/t dt and the entire
//! function Ein(x) = ∫_0^x (1 - e^{-t})/t dt.

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const EPS: f64 = 1e-16;

/// e^x E1(x), x > 0.
pub fn e1_scaled(x: f64) -> f64 {
    assert!(x > 0.0, "e1_scaled needs x > 0, got {x}");
    if x <= 1.0 {
        return x.exp() * e1_series(x);
    }
    // modified Lentz on the continued fraction
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

fn e1_series(x: f64) -> f64 {
    // -γ - ln x - Σ (-x)^k/(k k!)
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        term *= -x / k as f64;
        let add = term / k as f64;
        sum += add;
        if add.abs() < EPS * sum.abs().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

pub fn e1(x: f64) -> f64 {
    if x <= 1.0 {
        e1_series(x)
    } else {
        (-x).exp() * e1_scaled(x)
    }
}

/// e^{-x} Ei(x), x > 0.
pub fn ei_scaled(x: f64) -> f64 {
    assert!(x > 0.0, "ei_scaled needs x > 0, got {x}");
    if x <= 40.0 {
        return (-x).exp() * ei_series(x);
    }
    // asymptotic: Ei(x) ~ e^x/x Σ k!/x^k
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in 1..100 {
        let prev = term;
        term *= k as f64 / x;
        if term > prev || term < EPS * sum {
            break;
        }
        sum += term;
    }
    sum / x
}

fn ei_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..500 {
        term *= x / k as f64;
        let add = term / k as f64;
        sum += add;
        if add < EPS * sum {
            break;
        }
    }
    EULER_GAMMA + x.ln() + sum
}

pub fn ei(x: f64) -> f64 {
    if x <= 40.0 {
        ei_series(x)
    } else {
        x.exp() * ei_scaled(x)
    }
}

/// Ein(x) = ∫_0^x (1 - e^{-t})/t dt, any real x.
pub fn ein(x: f64) -> f64 {
    if x >= 1.0 {
        return e1(x) + EULER_GAMMA + x.ln();
    }
    if x < -40.0 {
        return EULER_GAMMA + (-x).ln() - ei(-x);
    }
    // Σ (-1)^{k+1} x^k/(k k!); no cancellation for x < 0
    let mut sum = 0.0;
    let mut term = -1.0;
    for k in 1..400 {
        term *= -x / k as f64;
        let add = term / k as f64;
        sum += add;
        if add.abs() <= EPS * sum.abs() {
            break;
        }
    }
    sum
}

/// ∫_{u0}^{u1} e^{p (u - s)}/u du for 0 < u0 < u1, written so that large
/// |p u| never overflows or cancels.
pub fn exp_over_u(p: f64, u0: f64, u1: f64, s: f64) -> f64 {
    assert!(u0 > 0.0 && u1 >= u0);
    if (p * u1).abs() < 1e-2 {
        // e^{-ps} Σ_k p^k (u1^k - u0^k)/(k k!) + ln ratio
        let mut sum = (u1 / u0).ln();
        let (mut a, mut b, mut fact) = (1.0, 1.0, 1.0);
        for k in 1..10 {
            a *= p * u1;
            b *= p * u0;
            fact *= k as f64;
            sum += (a - b) / (k as f64 * fact);
        }
        return (-p * s).exp() * sum;
    }
    if p > 0.0 {
        (p * (u1 - s)).exp() * ei_scaled(p * u1) - (p * (u0 - s)).exp() * ei_scaled(p * u0)
    } else {
        let q = -p;
        (-q * (u0 - s)).exp() * e1_scaled(q * u0) - (-q * (u1 - s)).exp() * e1_scaled(q * u1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn reference_values() {
        // tabulated values (Abramowitz & Stegun)
        assert!((e1(1.0) - 0.219_383_934_395_520_3).abs() < 1e-15);
        assert!((e1(0.1) - 1.822_923_958_419_390_7).abs() < 1e-14);
        assert!((ei(1.0) - 1.895_117_816_355_936_8).abs() < 1e-14);
        assert!((ei(50.0) / 1.058_563_689_713_169e20 - 1.0).abs() < 1e-12);
        assert!((e1(30.0) / 3.021_552_010_688_35e-15 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ein_against_quadrature() {
        for &x in &[-60.0, -30.0, -3.0, -0.5, 1e-6, 0.3, 0.999, 1.0, 2.0, 25.0] {
            let q = simpson(
                |t| if t == 0.0 { 1.0 } else { (1.0 - (-t).exp()) / t },
                0.0,
                x,
                20_000,
            );
            assert!(((ein(x) - q) / q).abs() < 1e-9, "x={x}: {} vs {q}", ein(x));
        }
        assert_eq!(ein(0.0), 0.0);
    }

    #[test]
    fn exp_over_u_against_quadrature() {
        for &(p, u0, u1, s) in &[
            (0.05, 100.0, 200.0, 100.0),
            (-0.05, 100.0, 200.0, 100.0),
            (0.2, 800.0, 900.0, 800.0),
            (-0.3, 0.5, 100.0, 50.0),
            (1e-7, 10.0, 20.0, 10.0),
            (0.0, 1.0, 2.0, 0.0),
        ] {
            let q = simpson(|u| (p * (u - s)).exp() / u, u0, u1, 200_000);
            let v = exp_over_u(p, u0, u1, s);
            assert!(((v - q) / q).abs() < 1e-9, "{p} {u0} {u1}: {v} vs {q}");
        }
    }
}
