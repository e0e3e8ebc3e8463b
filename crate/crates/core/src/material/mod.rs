//! Material models and parameter containers shared by all solvers.

mod eos;
mod friction;
mod viscosity;

pub use eos::{EquationOfState, BAR, UPPH_GF_TABLE_BAR};
pub use friction::FrictionModel;
pub use viscosity::{Viscosity, ViscosityModel};

use nalgebra::Matrix3;

use crate::error::{Error, Result};

/// Transverse thermal properties of the charge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalProps {
    /// Thermal conductivity through the thickness (W/m/°C).
    pub kappa: f64,
    /// Mold-to-charge gap conductance (W/m²/°C).
    pub k_gap: f64,
    /// Specific heat (J/kg/°C).
    pub cp: f64,
    /// Uncompacted density (kg/m³).
    pub rho0: f64,
}

impl ThermalProps {
    /// UPPH-GF SMC in B-staged state.
    pub fn upph_gf() -> Self {
        Self {
            kappa: 0.163,
            k_gap: 403.0,
            cp: 1530.0,
            rho0: 1480.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("kappa", self.kappa),
            ("k_gap", self.k_gap),
            ("cp", self.cp),
            ("rho0", self.rho0),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Volumetric heat capacity rho0 * cp (J/m³/°C).
    pub fn heat_capacity(&self) -> f64 {
        self.rho0 * self.cp
    }
}

/// Fiber suspension parameters for the anisotropic viscosity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuspensionParams {
    /// Fiber volume fraction.
    pub f: f64,
    /// Aspect ratio of the suspended unit.
    pub r_p: f64,
    pub c: f64,
    /// Jeffery shape factor.
    pub xi: f64,
    /// When false the fiber contribution to the stress is switched off (eta2 = 0).
    pub anisotropic: bool,
}

impl SuspensionParams {
    /// Default bundle length (m).
    pub const BUNDLE_LENGTH: f64 = 25.0e-3;
    /// Default bundle cross-section (m²).
    pub const BUNDLE_AREA: f64 = 0.03e-6;

    /// Aspect ratio of a bundle: length over the diameter of the circle with
    /// the same cross-sectional area.
    pub fn bundle_aspect_ratio(length: f64, area: f64) -> f64 {
        length / (4.0 * area / std::f64::consts::PI).sqrt()
    }

    /// 23 % glass fiber SMC with 25 mm bundles of 0.03 mm².
    pub fn smc_default() -> Self {
        Self {
            f: 0.23,
            r_p: Self::bundle_aspect_ratio(Self::BUNDLE_LENGTH, Self::BUNDLE_AREA),
            c: 0.1585,
            xi: 1.0,
            anisotropic: true,
        }
    }

    /// Newtonian limit: the fiber term vanishes.
    pub fn isotropic() -> Self {
        Self {
            anisotropic: false,
            ..Self::smc_default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xi >= 0.0 && self.xi <= 1.0) {
            return Err(Error::InvalidInput(format!("xi must lie in [0, 1], got {}", self.xi)));
        }
        if !self.anisotropic {
            return Ok(());
        }
        if !(self.f > 0.0 && self.f < 1.0) {
            return Err(Error::InvalidInput(format!("f must lie in (0, 1), got {}", self.f)));
        }
        if !(self.r_p > 1.0) {
            return Err(Error::InvalidInput(format!("r_p must exceed 1, got {}", self.r_p)));
        }
        self.eta2_ratio().map(|_| ())
    }

    /// eta2 / eta for a semi-dilute suspension of rods.
    pub fn eta2_ratio(&self) -> Result<f64> {
        if !self.anisotropic {
            return Ok(0.0);
        }
        let inv = 1.0 / self.f;
        // ln ln(1/f) requires f < 1
        let bracket = inv.ln() + inv.ln().ln() + self.c;
        if !(bracket > 0.0) || !bracket.is_finite() {
            return Err(Error::Domain(format!(
                "ln(1/f) + ln ln(1/f) + C = {bracket} is not positive for f = {}",
                self.f
            )));
        }
        Ok(4.0 * self.f * self.r_p * self.r_p / (3.0 * bracket))
    }
}

/// Equivalent shear rate sqrt(2 D':D') of a symmetric strain-rate tensor.
pub fn equivalent_shear_rate(d: &Matrix3<f64>) -> f64 {
    let dev = d - Matrix3::identity() * (d.trace() / 3.0);
    (2.0 * dev.component_mul(&dev).sum()).max(0.0).sqrt()
}

/// Equivalent shear rate of diag(dxx, 0, dzz) without building the tensor.
pub fn equivalent_shear_rate_planar(dxx: f64, dzz: f64) -> f64 {
    let m = (dxx + dzz) / 3.0;
    let (a, b, c) = (dxx - m, -m, dzz - m);
    (2.0 * (a * a + b * b + c * c)).sqrt()
}

/// Every material model a simulation needs.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialSet {
    pub viscosity: Viscosity,
    pub eos: EquationOfState,
    pub friction: FrictionModel,
    pub thermal: ThermalProps,
    pub suspension: SuspensionParams,
}

impl MaterialSet {
    /// UPPH-GF SMC as characterized for the press rheometer trials.
    pub fn upph_gf() -> Self {
        Self {
            viscosity: Viscosity::CrossWlf(ViscosityModel::upph_paste()),
            eos: EquationOfState::upph_gf(),
            friction: FrictionModel::press_rheometer(),
            thermal: ThermalProps::upph_gf(),
            suspension: SuspensionParams::smc_default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.viscosity.validate()?;
        self.friction.validate()?;
        self.thermal.validate()?;
        self.suspension.validate()
    }
}
