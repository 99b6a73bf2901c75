//! Physical constants. CODATA 2018 values by default, overridable for tests.

use serde::{Deserialize, Serialize};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub c: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            hbar: HBAR,
            c: SPEED_OF_LIGHT,
        }
    }
}

impl PhysicalConstants {
    /// Angular frequency of light with vacuum wavelength `lambda` (m).
    pub fn angular_frequency(&self, lambda: f64) -> f64 {
        2.0 * std::f64::consts::PI * self.c / lambda
    }
}
