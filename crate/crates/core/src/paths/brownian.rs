use crate::paths::{SamplePath, TimeGrid};
use crate::rng::{NormalSource, PathRng, SeedRecord};

/// Standard Brownian motion on `grid`, started at 0.
pub fn sample_brownian(grid: &TimeGrid, seed: SeedRecord) -> SamplePath {
    let mut rng = rng_for(seed);
    let mut path = brownian_with(grid, &mut rng);
    path.seed = Some(seed);
    path
}

/// Brownian motion driven by an arbitrary normal source.
pub fn brownian_with<N: NormalSource>(grid: &TimeGrid, noise: &mut N) -> SamplePath {
    let mut values = Vec::with_capacity(grid.len());
    let mut b = 0.0;
    values.push(b);
    for (_, dt) in grid.steps() {
        b += dt.sqrt() * noise.next_normal();
        values.push(b);
    }
    SamplePath::from_parts(grid, values, None)
}

pub(crate) fn rng_for(seed: SeedRecord) -> PathRng {
    if seed.antithetic {
        PathRng::antithetic(seed.master, seed.path_index)
    } else {
        PathRng::new(seed.master, seed.path_index)
    }
}
