//! Globally adaptive 15-point Gauss–Kronrod quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

// Kronrod abscissae (descending, last is the midpoint) and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the embedded 7-point rule (nodes XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Sum of per-interval `|K15 − G7|` estimates.
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Piece {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kron += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    Piece {
        a,
        b,
        value: kron * half,
        error: ((kron - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[a, b]` until the error estimate falls below
/// `max(abs_tol, rel_tol·|value|)`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Integral {
    let mut heap = BinaryHeap::new();
    let first = kronrod(&mut f, a, b);
    let mut value = first.value;
    let mut error = first.error;
    let mut evaluations = 15;
    heap.push(first);
    let mut converged = false;
    while heap.len() < MAX_INTERVALS {
        if error <= abs_tol.max(rel_tol * value.abs()) {
            converged = true;
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        let left = kronrod(&mut f, worst.a, mid);
        let right = kronrod(&mut f, mid, worst.b);
        evaluations += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift of the incremental updates.
    let mut pieces = heap.into_vec();
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = pieces.iter().map(|p| p.value).sum();
    let error = pieces.iter().map(|p| p.error).sum::<f64>();
    if !converged {
        converged = error <= abs_tol.max(rel_tol * f64::abs(value));
    }
    Integral {
        value,
        error,
        evaluations,
        converged,
    }
}

/// Iterated integral over a rectangle; the inner integral runs over the second coordinate.
pub fn integrate_2d<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    outer: (f64, f64),
    inner: (f64, f64),
    abs_tol: f64,
    rel_tol: f64,
) -> Integral {
    let mut evaluations = 0;
    let mut all_converged = true;
    let result = integrate(
        |u| {
            let r = integrate(|v| f(u, v), inner.0, inner.1, abs_tol * 1e-3, rel_tol * 1e-2);
            evaluations += r.evaluations;
            all_converged &= r.converged;
            r.value
        },
        outer.0,
        outer.1,
        abs_tol,
        rel_tol,
    );
    Integral {
        evaluations,
        converged: result.converged && all_converged,
        ..result
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0, 1e-14, 1e-14);
        let want = (64.0 - 1.0) / 6.0 - (8.0 + 1.0) + 3.0;
        assert!((r.value - want).abs() < 1e-13);
    }

    #[test]
    fn gaussian_mass() {
        let r = integrate(|x| (-0.5 * x * x).exp(), -30.0, 30.0, 0.0, 1e-12);
        assert!(r.converged);
        assert!((r.value - (2.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn peaked_and_endpoint_singular() {
        let r = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 0.0, 1e-10);
        let want = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!(((r.value - want) / want).abs() < 1e-9);
        let r = integrate(|x| x.sqrt(), 0.0, 1.0, 0.0, 1e-10);
        assert!((r.value - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn two_dimensional_gaussian() {
        let r = integrate_2d(
            |x, y| (-(x * x + x * y + y * y)).exp(),
            (-12.0, 12.0),
            (-12.0, 12.0),
            0.0,
            1e-10,
        );
        // ∫ exp(−vᵀAv) = π / sqrt(det A), A = [[1, ½], [½, 1]]
        let want = PI / 0.75f64.sqrt();
        assert!(((r.value - want) / want).abs() < 1e-9);
    }
}
