use proptest::prelude::*;
use zeroset::mc::map_paths;
use zeroset::paths::{
    bridge_pinned_with, dds_clock, dds_inverse, sample_bridge_pinned, sample_brownian, sample_doob_bridge, sample_gbm,
    GbmParams,
};
use zeroset::paths::export::write_binary;
use zeroset::rng::{PathRng, ScriptedNoise};
use zeroset::{SeedRecord, TimeGrid};

fn max_terminal_gap(epsilon: f64) -> f64 {
    let grid = TimeGrid::bridge(10_000, epsilon).unwrap();
    map_paths(1000, |i| {
        let p = sample_bridge_pinned(0.0, 1.0, &grid, SeedRecord::new(91, i)).unwrap();
        (p.last() - 1.0).abs()
    })
    .into_iter()
    .fold(0.0, f64::max)
}

#[test]
fn pinning_tightens_as_last_point_nears_one() {
    let wide = max_terminal_gap(1e-3);
    let narrow = max_terminal_gap(1e-4);
    assert!(narrow < wide, "{narrow} vs {wide}");
    assert!(narrow < 0.1, "{narrow}");
}

/// Terminal value on a grid of `n` steps, driven by the fine normals summed in blocks.
fn coarse_terminal(fine: &[f64], n: usize, epsilon: f64) -> f64 {
    let block = fine.len() / n;
    let draws: Vec<f64> = fine
        .chunks(block)
        .map(|c| c.iter().sum::<f64>() / (block as f64).sqrt())
        .collect();
    let grid = TimeGrid::bridge(n, epsilon).unwrap();
    bridge_pinned_with(0.3, 0.0, &grid, &mut ScriptedNoise::new(&draws)).unwrap().last()
}

#[test]
fn euler_error_shrinks_when_step_is_halved() {
    let fine_n = 8192;
    let eps = 1e-2;
    let sizes = [128, 256, 512, 1024];
    let mut err = [0.0; 4];
    let n_paths = 400;
    for i in 0..n_paths {
        let mut rng = PathRng::new(92, i);
        let fine: Vec<f64> = (0..fine_n).map(|_| rng.normal()).collect();
        let reference = coarse_terminal(&fine, fine_n, eps);
        for (e, &n) in err.iter_mut().zip(&sizes) {
            *e += (coarse_terminal(&fine, n, eps) - reference).abs() / n_paths as f64;
        }
    }
    for w in err.windows(2) {
        assert!(w[1] < w[0], "{err:?}");
    }
    // strong order 1/2 or better: each halving cuts the error by at least 1/√2 up to noise
    assert!(err[3] < err[0] / 2.0, "{err:?}");
}

#[test]
fn doob_bridge_is_reproducible_and_starts_at_zero() {
    let grid = TimeGrid::bridge(500, 1e-4).unwrap();
    let a = sample_doob_bridge(&grid, SeedRecord::new(5, 9)).unwrap();
    let b = sample_doob_bridge(&grid, SeedRecord::new(5, 9)).unwrap();
    assert_eq!(a.values(), b.values());
    assert_eq!(a.first(), 0.0);
}

#[test]
fn parallel_map_matches_sequential_sampling() {
    let grid = TimeGrid::uniform(200, 1.0).unwrap();
    let par = map_paths(64, |i| sample_brownian(&grid, SeedRecord::new(8, i)).last());
    let seq: Vec<f64> = (0..64).map(|i| sample_brownian(&grid, SeedRecord::new(8, i)).last()).collect();
    assert_eq!(par, seq);
}

#[test]
fn dds_clock_is_increasing_convex_and_inverted() {
    let ts: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
    let c: Vec<f64> = ts.iter().map(|&t| dds_clock(t).unwrap()).collect();
    for w in c.windows(3) {
        assert!(w[1] > w[0]);
        assert!(w[2] - w[1] > w[1] - w[0]);
    }
    for i in 1..=9 {
        let t = i as f64 / 10.0;
        assert!((dds_inverse(dds_clock(t).unwrap()).unwrap() - t).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gbm_stays_positive(mu in -2.0..2.0f64, sigma in 0.01..2.0f64, s0 in 0.01..1e4f64, seed: u64) {
        let grid = TimeGrid::uniform(500, 5.0).unwrap();
        let p = sample_gbm(&GbmParams::new(mu, sigma, s0).unwrap(), &grid, SeedRecord::new(seed, 0)).unwrap();
        prop_assert!(p.values().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn same_seed_same_bytes(master: u64, index in 0u64..1_000_000, x in -2.0..2.0f64, pin in -2.0..2.0f64) {
        let grid = TimeGrid::bridge(300, 1e-4).unwrap();
        let bytes = |p: &zeroset::SamplePath| {
            let mut out = Vec::new();
            write_binary(p, &mut out).unwrap();
            out
        };
        let a = sample_bridge_pinned(x, pin, &grid, SeedRecord::new(master, index)).unwrap();
        let b = sample_bridge_pinned(x, pin, &grid, SeedRecord::new(master, index)).unwrap();
        prop_assert_eq!(bytes(&a), bytes(&b));
        let c = sample_bridge_pinned(x, pin, &grid, SeedRecord::new(master, index.wrapping_add(1))).unwrap();
        prop_assert_ne!(a.values(), c.values());
    }
}
