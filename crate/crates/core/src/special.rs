//! Log-gamma helpers.
//!
//! Every gamma ratio in the crate goes through [`ln_gamma_ratio`], which keeps
//! full relative precision even when both gamma values are astronomically
//! large (N in the thousands). Plain `ln_gamma(x + d) - ln_gamma(x)` loses
//! roughly `log10(ln_gamma(x))` digits to cancellation.

use std::f64::consts::PI;

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// `ln Γ(x + d) - ln Γ(x)` for `x > 0`, `d >= 0`.
pub fn ln_gamma_ratio(x: f64, d: f64) -> f64 {
    debug_assert!(x > 0.0 && d >= 0.0);
    let whole = d.floor();
    let frac = d - whole;
    let base = x + frac;
    let mut acc: f64 = (0..whole as usize).map(|i| (base + i as f64).ln()).sum();
    if frac > 0.0 {
        acc += fractional_ratio(x, frac);
    }
    acc
}

// Below this the Stirling tail is not accurate to machine precision.
const ASYMPTOTIC_FLOOR: f64 = 20.0;

/// `ln Γ(x + a) - ln Γ(x)` for `0 < a < 1`.
fn fractional_ratio(x: f64, a: f64) -> f64 {
    if x >= ASYMPTOTIC_FLOOR {
        return stirling_ratio(x, a);
    }
    let shift = (ASYMPTOTIC_FLOOR - x).ceil() as usize;
    // Γ(x + a)/Γ(x) = Γ(x + n + a)/Γ(x + n) · Π (x + i)/(x + i + a)
    let correction: f64 = (0..shift)
        .map(|i| (a / (x + i as f64)).ln_1p())
        .sum();
    stirling_ratio(x + shift as f64, a) - correction
}

fn stirling_ratio(x: f64, a: f64) -> f64 {
    (x - 0.5) * (a / x).ln_1p() + a * (x + a).ln() - a + stirling_tail(x + a) - stirling_tail(x)
}

fn stirling_tail(z: f64) -> f64 {
    let z2 = z * z;
    let inv = 1.0 / z;
    let inv2 = 1.0 / z2;
    inv * (1.0 / 12.0
        - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))))
}

/// `ln π`.
pub fn ln_pi() -> f64 {
    PI.ln()
}

/// Numerically stable `ln Σ exp(v_i)`. Returns `-inf` for an empty slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}
