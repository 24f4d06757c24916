use serde::Serialize;

use crate::error::{Error, Result};

/// The scale constants of the construction and the resulting shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmbeddingConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub zeta_f: f64,
    /// `c3 · zeta_f`.
    pub epsilon: f64,
}

impl EmbeddingConstants {
    pub fn new(c1: f64, c2: f64, c3: f64, zeta_f: f64) -> Result<Self> {
        for (name, value) in [("c1", c1), ("c2", c2), ("c3", c3), ("zeta_f", zeta_f)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConstant { name, value });
            }
        }
        Ok(Self { c1, c2, c3, zeta_f, epsilon: c3 * zeta_f })
    }

    /// `2 + c1 + c2 − c3`, which vanishes on the doubling path.
    pub fn doubling_gap(&self) -> f64 {
        2.0 + self.c1 + self.c2 - self.c3
    }
}
