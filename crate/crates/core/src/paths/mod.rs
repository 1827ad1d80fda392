//! Brownian motion, geometric Brownian motion, the alpha bridges, and the DDS clock.

mod bridge;
mod brownian;
mod dds;
pub mod export;
mod gbm;
mod grid;

pub use bridge::{
    bridge_paper_sde_from_brownian, bridge_paper_sde_with, bridge_pinned_with, doob_image_grid,
    doob_transform_bridge, paper_sde_mean, sample_bridge_paper_sde, sample_bridge_pinned,
    sample_doob_bridge, BridgeKind, BridgeSpec, DEFAULT_EPSILON,
};
pub use brownian::{brownian_with, sample_brownian};
pub use dds::{dds_clock, dds_inverse};
pub use gbm::{gbm_from_brownian, gbm_with, sample_gbm, GbmParams};
pub use grid::{SamplePath, TimeGrid};
