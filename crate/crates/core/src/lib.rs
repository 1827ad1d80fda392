//! Simulation of trade-strategy alpha as a Brownian bridge, its Girsanov measure change
//! and local time on the CAPM zero set, plus the crash-hedging instruments built on top:
//! first-passage crash times, down-and-in puts, and Black-style swaptions.
//!
//! Every Monte Carlo routine draws from per-path counter-based streams (see [`rng`]),
//! so results depend only on `(master seed, path index)` and never on thread scheduling.

pub mod crash;
pub mod derivatives;
mod error;
pub mod local_time;
pub mod mc;
pub mod measure;
pub mod multifactor;
pub mod normal;
pub mod paths;
pub mod rng;

pub use error::{Error, Result};
pub use mc::Estimate;
pub use paths::{SamplePath, TimeGrid};
pub use rng::SeedRecord;
