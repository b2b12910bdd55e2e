//! Complementary error function and its exponentially scaled form.

use std::f64::consts::PI;

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Above this argument `erfcx` switches from `exp(x²)·erfc(x)` to the
/// continued fraction, well before `erfc` loses relative precision.
const CF_THRESHOLD: f64 = 6.0;

/// `erfc(x) = 2/√π ∫ₓ^∞ e^{−t²} dt`.
///
/// Values lie in `[0, 2]`; the result underflows to zero for `x ≳ 27`.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Scaled complementary error function `erfcx(x) = e^{x²}·erfc(x)`.
///
/// Finite for every `x > −26.6`; for large positive `x` it decays like
/// `1/(x√π)` instead of overflowing/underflowing the way the naive product does.
pub fn erfcx(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        // erfc(−y) = 2 − erfc(y)
        let y = -x;
        return 2.0 * (y * y).exp() - erfcx(y);
    }
    if x < CF_THRESHOLD {
        return (x * x).exp() * libm::erfc(x);
    }
    if x > 1e8 {
        return FRAC_1_SQRT_PI / x;
    }
    // erfcx(x) = (1/√π) · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + …))))
    let mut tail = x;
    for k in (1..=60).rev() {
        tail = x + (0.5 * k as f64) / tail;
    }
    FRAC_1_SQRT_PI / tail
}

/// `√(π/2)·erfc(x)·e^{x²}` evaluated without overflow.
pub fn scaled_gaussian_tail(x: f64) -> f64 {
    (PI / 2.0).sqrt() * erfcx(x)
}
