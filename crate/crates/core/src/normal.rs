//! Standard normal distribution helpers.

use libm::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Standard normal CDF. `cdf(0.0) == 0.5` exactly.
pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// CDF of `N(0, variance)`.
pub fn cdf_with_variance(x: f64, variance: f64) -> f64 {
    cdf(x / variance.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert_eq!(cdf(0.0), 0.5);
        assert!((cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-15);
        assert!((cdf(-1.0) - 0.158_655_253_931_457_05).abs() < 1e-15);
        assert!((cdf(0.1) + cdf(-0.1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn deep_tail_stays_accurate() {
        // erfc keeps relative accuracy where 1 - cdf(x) would cancel
        let p = cdf(-10.0);
        assert!((p / 7.619_853_024_160_527e-24 - 1.0).abs() < 1e-10);
    }
}
