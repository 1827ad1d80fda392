//! Monte Carlo plumbing: schedule-independent path maps and running moments.

use serde::{Deserialize, Serialize};

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl Estimate {
    /// `|mean - target| <= k * std_error + slack`.
    pub fn within(&self, target: f64, k: f64, slack: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error + slack
    }

    /// Distance to `target` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target) / self.std_error
    }
}

/// Welford accumulator. Merging is exact up to rounding, so parallel reductions agree
/// with the serial pass to ~1e-15 relative; callers that need bitwise reproducibility
/// should collect per-path values first and use [`Estimate::from_samples`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn estimate(&self) -> Estimate {
        Estimate {
            mean: self.mean,
            std_error: (self.variance() / self.n.max(1) as f64).sqrt(),
            n: self.n,
        }
    }
}

impl Extend<f64> for Moments {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.push(x);
        }
    }
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Estimate {
        let mut m = Moments::default();
        m.extend(xs.iter().copied());
        m.estimate()
    }
}

/// Evaluates `f(path_index)` for every index, in index order. Work is spread over the
/// rayon pool when the `parallel` feature is on; output order never depends on scheduling.
pub fn map_paths<T, F>(n_paths: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n_paths as u64).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n_paths as u64).map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_matches_two_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let e = Estimate::from_samples(&xs);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((e.mean - mean).abs() < 1e-12);
        assert!((e.std_error - (var / 1000.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn map_preserves_order() {
        let v = map_paths(100, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i as u64));
    }
}
