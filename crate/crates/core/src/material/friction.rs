//! Hydrodynamic power-law mold friction.

use crate::error::{Error, Result};

/// Velocities below this magnitude produce no friction stress.
const SLIP_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrictionModel {
    /// Hydrodynamic friction coefficient (N s / m^3).
    pub lambda: f64,
    /// Power-law coefficient.
    pub m: f64,
    /// Reference velocity (m/s).
    pub v0: f64,
}

impl FrictionModel {
    /// Mold friction parameters used for the press rheometer.
    pub fn press_rheometer() -> Self {
        Self {
            lambda: 3.0e6,
            m: 0.6,
            v0: 1.0e-3,
        }
    }

    pub fn frictionless() -> Self {
        Self {
            lambda: 0.0,
            ..Self::press_rheometer()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) {
            return Err(Error::InvalidInput(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.m > 0.0 && self.m <= 1.0) {
            return Err(Error::InvalidInput(format!("m must lie in (0, 1], got {}", self.m)));
        }
        if !(self.v0 > 0.0) {
            return Err(Error::InvalidInput(format!("v0 must be positive, got {}", self.v0)));
        }
        Ok(())
    }

    /// Wall shear stress (Pa) for slip velocity `v` (m/s); opposes the motion.
    pub fn stress(&self, v: f64) -> f64 {
        if self.lambda == 0.0 || v.abs() < SLIP_CUTOFF {
            return 0.0;
        }
        -self.lambda * (v.abs() / self.v0).powf(self.m - 1.0) * v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn table_values() {
        let f = FrictionModel::press_rheometer();
        assert_relative_eq!(f.stress(1e-3), -3.0e3, max_relative = 1e-12);
        assert_relative_eq!(f.stress(4e-3), -3000.0 * 4f64.powf(0.6), max_relative = 1e-12);
        assert_relative_eq!(f.stress(4e-3), -6.89e3, max_relative = 1e-3);
        assert_eq!(f.stress(0.0), 0.0);
        assert_eq!(FrictionModel::frictionless().stress(1.0), 0.0);
    }

    proptest! {
        #[test]
        fn odd_in_velocity(v in -1.0f64..1.0) {
            let f = FrictionModel::press_rheometer();
            prop_assert_eq!(f.stress(v), -f.stress(-v));
            prop_assert!(f.stress(v) * v <= 0.0);
        }
    }
}
