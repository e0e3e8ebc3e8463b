//! Anisotropic viscosity of a planar fiber suspension under plug flow.

use super::closure::{planar_fourth, ClosureKind};
use super::PlanarState;
use crate::error::Result;
use crate::material::SuspensionParams;

/// The four non-trivial components of the viscosity tensor for plug flow with
/// strain rates Dxx (in-plane) and Dzz (thickness). Units Pa·s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViscosityComponents {
    pub xxxx: f64,
    pub zzxx: f64,
    pub zzzz: f64,
    pub xxzz: f64,
}

impl ViscosityComponents {
    /// Isotropic Newtonian components.
    pub fn newtonian(eta: f64) -> Self {
        Self {
            xxxx: 4.0 * eta / 3.0,
            zzxx: -2.0 * eta / 3.0,
            zzzz: 4.0 * eta / 3.0,
            xxzz: -2.0 * eta / 3.0,
        }
    }

    /// σxx viscous part for the given strain rates.
    pub fn sigma_xx(&self, dxx: f64, dzz: f64) -> f64 {
        self.xxxx * dxx + self.xxzz * dzz
    }

    /// σzz viscous part for the given strain rates.
    pub fn sigma_zz(&self, dxx: f64, dzz: f64) -> f64 {
        self.zzxx * dxx + self.zzzz * dzz
    }
}

pub fn viscosity_components(
    eta: f64,
    params: &SuspensionParams,
    s: &PlanarState,
    closure: ClosureKind,
) -> Result<ViscosityComponents> {
    let eta2 = params.eta2_ratio()? * eta;
    let mut v = ViscosityComponents::newtonian(eta);
    if eta2 != 0.0 {
        let a4 = planar_fourth(s, closure);
        v.xxxx += eta2 * (a4.xxxx - s.axx / 3.0);
        v.zzxx -= eta2 * s.axx / 3.0;
    }
    Ok(v)
}
