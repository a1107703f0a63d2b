//! Univariate normal truncated to `[lo, hi]`: exact sampling and log-density.

use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln Phi(x)`, accurate far into the lower tail.
pub fn ln_ndtr(x: f64) -> f64 {
    if x > -30.0 {
        (0.5 * erfc(-x / std::f64::consts::SQRT_2)).ln()
    } else {
        // Asymptotic series of the Mills ratio.
        let x2 = x * x;
        -0.5 * x2 - LN_SQRT_2PI - (-x).ln() + (1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2)).ln()
    }
}

/// `ln(Phi(b) - Phi(a))` for standardized bounds `a < b`.
fn ln_mass(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        return ln_mass(-b, -a);
    }
    if b <= 0.0 {
        let lb = ln_ndtr(b);
        let la = ln_ndtr(a);
        lb + (-(la - lb).exp()).ln_1p()
    } else {
        // Both tails are at most one half; no cancellation.
        (1.0 - (ln_ndtr(a).exp() + ln_ndtr(-b).exp())).ln()
    }
}

/// Log-density at `x` of `N(mean, sd^2)` truncated to `[lo, hi]`.
pub fn ln_pdf(x: f64, mean: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    if x < lo || x > hi {
        return f64::NEG_INFINITY;
    }
    let z = (x - mean) / sd;
    -0.5 * z * z - LN_SQRT_2PI - sd.ln() - ln_mass((lo - mean) / sd, (hi - mean) / sd)
}

pub fn sample<R: Rng + ?Sized>(mean: f64, sd: f64, lo: f64, hi: f64, rng: &mut R) -> f64 {
    let z = standard(((lo - mean) / sd).max(-1e300), ((hi - mean) / sd).min(1e300), rng);
    (mean + sd * z).clamp(lo, hi)
}

/// Standard normal truncated to `[a, b]`.
fn standard<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    if a >= 0.0 {
        return -standard(-b, -a, rng);
    }
    // Now a < 0. When the whole interval sits deep in the lower tail, the
    // CDF values underflow, so switch to exponential rejection on the mirror.
    if b < -30.0 {
        return -tail(-b, -a, rng);
    }
    let normal = Normal::standard();
    let pa = normal.cdf(a);
    let pb = normal.cdf(b);
    let u: f64 = rng.random();
    normal.inverse_cdf(pa + u * (pb - pa)).clamp(a, b)
}

/// Standard normal truncated to `[a, b]` with `a > 0` large, by rejection
/// from a shifted exponential with the optimal rate.
fn tail<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let rate = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let e = -(1.0 - rng.random::<f64>()).ln();
        let x = a + e / rate;
        if x > b {
            continue;
        }
        let accept = (-(x - rate) * (x - rate) / 2.0).exp();
        if rng.random::<f64>() <= accept {
            return x;
        }
    }
}
