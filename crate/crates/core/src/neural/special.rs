//! Special functions used by the Beta policy head.

pub use statrs::function::gamma::{digamma, ln_gamma};

/// Trigamma function ψ₁(x) for x > 0.
///
/// Shifts the argument above 10 with the recurrence ψ₁(x) = ψ₁(x + 1) + 1/x²
/// and finishes with the asymptotic Bernoulli series.
pub fn trigamma(x: f64) -> f64 {
    if !(x > 0.0) {
        return f64::NAN;
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    // 1/x + 1/(2x²) + Σ B_2k / x^(2k+1)
    const BERNOULLI: [f64; 7] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
    ];
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = BERNOULLI.iter().rev().fold(0.0, |acc, &b| acc * inv2 + b);
    acc + inv + 0.5 * inv2 + inv * inv2 * series
}

/// Log of the Beta function B(a, b).
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Numerically stable `ln(1 + e^x)`.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Derivative of [`softplus`].
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
