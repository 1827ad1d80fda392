//! Per-path random streams.
//!
//! Every path draws from its own ChaCha8 stream, keyed by `(master seed, path index)`.
//! ChaCha is a counter-based generator, so a path's draws depend only on that key and
//! never on which thread produced it or in which order paths were scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Identifier recorded alongside every sampled path.
pub const GENERATOR_ID: &str = "chacha8-stream/v1";

/// Where a path's randomness came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub master: u64,
    pub path_index: u64,
    /// Path was generated as the antithetic twin of `path_index - 1`.
    pub antithetic: bool,
}

impl SeedRecord {
    pub fn new(master: u64, path_index: u64) -> Self {
        Self {
            master,
            path_index,
            antithetic: false,
        }
    }

    pub fn generator(&self) -> &'static str {
        GENERATOR_ID
    }
}

/// Gaussian noise source for one path.
#[derive(Debug, Clone)]
pub struct PathRng {
    rng: ChaCha8Rng,
    sign: f64,
    record: SeedRecord,
}

impl PathRng {
    pub fn new(master: u64, path_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master);
        rng.set_stream(path_index);
        Self {
            rng,
            sign: 1.0,
            record: SeedRecord::new(master, path_index),
        }
    }

    /// Antithetic pairing: odd indices replay the stream of the preceding even index
    /// with every normal draw negated.
    pub fn antithetic(master: u64, path_index: u64) -> Self {
        let base = path_index & !1;
        let mut out = Self::new(master, base);
        if path_index & 1 == 1 {
            out.sign = -1.0;
        }
        out.record = SeedRecord {
            master,
            path_index,
            antithetic: path_index & 1 == 1,
        };
        out
    }

    pub fn record(&self) -> SeedRecord {
        self.record
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        let z: f64 = self.rng.sample(StandardNormal);
        self.sign * z
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        loop {
            let u: f64 = self.rng.random();
            if u > 0.0 {
                return u;
            }
        }
    }
}

/// Source of Gaussian increments. Lets tests drive samplers with scripted noise.
pub trait NormalSource {
    fn next_normal(&mut self) -> f64;
}

impl NormalSource for PathRng {
    #[inline]
    fn next_normal(&mut self) -> f64 {
        self.normal()
    }
}

/// Noise source returning zero forever.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroNoise;

impl NormalSource for ZeroNoise {
    fn next_normal(&mut self) -> f64 {
        0.0
    }
}

/// Replays a fixed sequence of standard normals.
#[derive(Debug, Clone)]
pub struct ScriptedNoise<'a> {
    draws: &'a [f64],
    pos: usize,
}

impl<'a> ScriptedNoise<'a> {
    pub fn new(draws: &'a [f64]) -> Self {
        Self { draws, pos: 0 }
    }
}

impl NormalSource for ScriptedNoise<'_> {
    fn next_normal(&mut self) -> f64 {
        let z = self.draws[self.pos];
        self.pos += 1;
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let mut a = PathRng::new(7, 3);
        let mut b = PathRng::new(7, 3);
        for _ in 0..100 {
            assert_eq!(a.normal().to_bits(), b.normal().to_bits());
        }
    }

    #[test]
    fn distinct_paths_get_distinct_streams() {
        let mut a = PathRng::new(7, 3);
        let mut b = PathRng::new(7, 4);
        let same = (0..32).filter(|_| a.normal() == b.normal()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn antithetic_twin_negates() {
        let mut even = PathRng::antithetic(11, 4);
        let mut odd = PathRng::antithetic(11, 5);
        for _ in 0..50 {
            assert_eq!(even.normal(), -odd.normal());
        }
        assert!(odd.record().antithetic);
    }
}
