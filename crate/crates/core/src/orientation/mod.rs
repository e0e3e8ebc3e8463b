//! Fiber orientation tensors: closures, Jeffery rates, anisotropic viscosity.
//!
//! Only Jeffery's equation is provided. Diffusion-type extensions
//! (Folgar-Tucker, RSC, ARD) are left out on purpose: between closely spaced
//! mold walls the out-of-plane component they generate is suppressed, and the
//! plain equation tracks the direct bundle simulations better for planar flow.

mod closure;
mod exact;
mod jeffery;
mod viscosity;

pub use closure::{closure_fourth, planar_fourth, ClosureKind, PlanarFourth, Tensor4};
pub use exact::{evolve_planar_exact, ExactPlanar};
pub use jeffery::{integrate_jeffery, integrate_planar, jeffery_rate, planar_rates};
pub use viscosity::{viscosity_components, ViscosityComponents};

use nalgebra::Matrix3;

use crate::error::{Error, Result};

/// Second-order orientation tensor: symmetric, unit trace, eigenvalues in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationTensor2(Matrix3<f64>);

impl OrientationTensor2 {
    const TOL: f64 = 1e-9;

    pub fn new(a: Matrix3<f64>) -> Result<Self> {
        if (a - a.transpose()).abs().max() > Self::TOL {
            return Err(Error::InvalidInput("orientation tensor is not symmetric".into()));
        }
        if (a.trace() - 1.0).abs() > Self::TOL {
            return Err(Error::InvalidInput(format!(
                "orientation tensor trace is {}, expected 1",
                a.trace()
            )));
        }
        let eig = a.symmetric_eigenvalues();
        if eig.iter().any(|l| !(-Self::TOL..=1.0 + Self::TOL).contains(l)) {
            return Err(Error::InvalidInput(format!(
                "orientation tensor eigenvalues {eig:?} outside [0, 1]"
            )));
        }
        Ok(Self(a))
    }

    /// All fibers along one unit direction.
    pub fn aligned(dir: nalgebra::Vector3<f64>) -> Self {
        let p = dir.normalize();
        Self(p * p.transpose())
    }

    pub fn isotropic_3d() -> Self {
        Self(Matrix3::identity() / 3.0)
    }

    pub fn planar_isotropic() -> Self {
        PlanarState::ISOTROPIC.to_tensor()
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }
}

/// In-plane orientation state (x-y plane); z components vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarState {
    pub axx: f64,
    pub ayy: f64,
    pub axy: f64,
}

impl PlanarState {
    pub const ISOTROPIC: PlanarState = PlanarState {
        axx: 0.5,
        ayy: 0.5,
        axy: 0.0,
    };

    pub fn new(axx: f64, ayy: f64, axy: f64) -> Result<Self> {
        let s = Self { axx, ayy, axy };
        if (axx + ayy - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("Axx + Ayy = {}, expected 1", axx + ayy)));
        }
        if axx * ayy - axy * axy < -1e-9 || axx < -1e-9 || ayy < -1e-9 {
            return Err(Error::InvalidInput(format!(
                "planar state ({axx}, {ayy}, {axy}) is not positive semidefinite"
            )));
        }
        Ok(s)
    }

    pub fn to_tensor(&self) -> OrientationTensor2 {
        OrientationTensor2(Matrix3::new(
            self.axx, self.axy, 0.0, self.axy, self.ayy, 0.0, 0.0, 0.0, 0.0,
        ))
    }

    /// Rescales so that Axx + Ayy = 1.
    pub fn renormalized(&self) -> Self {
        let tr = self.axx + self.ayy;
        Self {
            axx: self.axx / tr,
            ayy: self.ayy / tr,
            axy: self.axy / tr,
        }
    }
}
