//! Hedging instruments: event swaps and the market-systemic alpha, barrier puts, and the
//! floating-leg swaption.

mod barrier;
mod swaption;
mod systemic;

pub use barrier::*;
pub use swaption::*;
pub use systemic::*;
