//! Scalar special functions used by the densities.

use std::f64::consts::SQRT_2;

use libm::erfc;

pub use statrs::function::gamma::ln_gamma;

/// `log(sqrt(2 pi))`
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `sqrt(2/pi)`, the mean of a standard half-normal variable.
pub const HALF_NORMAL_MEAN: f64 = 0.797_884_560_802_865_4;

/// Standard normal log-density.
pub fn ln_phi(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

/// `log Phi(z)`, accurate in the far lower tail.
pub fn ln_ndtr(z: f64) -> f64 {
    if z > -20.0 {
        (0.5 * erfc(-z / SQRT_2)).ln()
    } else {
        // Asymptotic Mills-ratio series.
        let z2 = z * z;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..8 {
            term *= -((2 * k - 1) as f64) / z2;
            sum += term;
        }
        ln_phi(z) - (-z).ln() + sum.ln()
    }
}

/// `log(n!)`
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0)
}

/// Poisson log-pmf parameterized by the log mean.
pub fn poisson_ln_pmf(y: u64, log_mean: f64) -> f64 {
    y as f64 * log_mean - log_mean.exp() - ln_factorial(y)
}
