//! Quadratic-variation clock of `M(t) = ∫ dB(s) / (1 - s)`.

use crate::error::{Error, Result};

/// `<M>_t = ∫_0^t (1 - s)^-2 ds = t / (1 - t)` on `[0, 1)`.
pub fn dds_clock(t: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&t) {
        return Err(if t >= 1.0 {
            Error::SingularHorizon { t }
        } else {
            Error::param("t", format!("must lie in [0, 1), got {t}"))
        });
    }
    Ok(t / (1.0 - t))
}

/// Inverse clock `T(s) = s / (1 + s)`, so that `T(<M>_t) = t`.
pub fn dds_inverse(s: f64) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::param("s", format!("must be finite and >= 0, got {s}")));
    }
    Ok(s / (1.0 + s))
}
