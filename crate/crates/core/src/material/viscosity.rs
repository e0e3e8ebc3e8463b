//! Shear- and temperature-dependent matrix viscosity.
//!
//! Cross-type shear thinning with a WLF-type temperature shift of the
//! zero-shear viscosity:
//!
//! ```text
//! eta  = eta0 / (1 + (gammadot / gamma0)^(1 - n))
//! eta0 = D1 * exp(-alpha1 (T - T*) / (alpha2 + (T - T*)))
//! ```

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViscosityModel {
    /// Reference viscosity (Pa s).
    pub d1: f64,
    /// Transition shear rate (1/s).
    pub gamma0: f64,
    /// Power-law coefficient.
    pub n: f64,
    /// Reference temperature (°C).
    pub t_star: f64,
    pub alpha1: f64,
    /// (°C)
    pub alpha2: f64,
    /// Lower end of the fitted temperature range (°C).
    pub t_min: f64,
    /// Upper end of the fitted temperature range (°C).
    pub t_max: f64,
}

impl ViscosityModel {
    /// UPPH paste in B-staged state, fitted between 20 °C and 80 °C.
    pub fn upph_paste() -> Self {
        Self {
            d1: 72.0e3,
            gamma0: 0.1,
            n: 0.385,
            t_star: 40.73,
            alpha1: 7.94,
            alpha2: 105.96,
            t_min: 20.0,
            t_max: 80.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d1 > 0.0) {
            return Err(Error::InvalidInput(format!("D1 must be positive, got {}", self.d1)));
        }
        if !(self.gamma0 > 0.0) {
            return Err(Error::InvalidInput(format!("gamma0 must be positive, got {}", self.gamma0)));
        }
        if !(self.n > 0.0 && self.n < 1.0) {
            return Err(Error::InvalidInput(format!("n must lie in (0, 1), got {}", self.n)));
        }
        if !(self.t_min < self.t_max) {
            return Err(Error::InvalidInput(format!(
                "empty temperature range [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        if !(self.alpha2 + (self.t_min - self.t_star) > 0.0) {
            return Err(Error::InvalidInput(format!(
                "alpha2 + (T - T*) must stay positive over [{}, {}] °C",
                self.t_min, self.t_max
            )));
        }
        Ok(())
    }

    /// Zero-shear viscosity at `temp` (°C), no range clamping.
    pub fn zero_shear(&self, temp: f64) -> Result<f64> {
        let dt = temp - self.t_star;
        let denom = self.alpha2 + dt;
        if !(denom > 0.0) {
            return Err(Error::Domain(format!(
                "alpha2 + (T - T*) = {denom} <= 0 at T = {temp} °C"
            )));
        }
        Ok(self.d1 * (-self.alpha1 * dt / denom).exp())
    }

    /// Viscosity at shear rate `gammadot` (1/s) and temperature `temp` (°C).
    pub fn viscosity(&self, gammadot: f64, temp: f64) -> Result<f64> {
        let eta0 = self.zero_shear(temp)?;
        Ok(eta0 / (1.0 + (gammadot.max(0.0) / self.gamma0).powf(1.0 - self.n)))
    }

    /// Evaluates with the temperature clamped to the fitted range. The flag is
    /// set when clamping was applied.
    pub fn viscosity_clamped(&self, gammadot: f64, temp: f64) -> (f64, bool) {
        let clamped = temp.clamp(self.t_min, self.t_max);
        // validate() guarantees the formula is defined on [t_min, t_max]
        let eta = self
            .viscosity(gammadot, clamped)
            .expect("viscosity defined over the validated range");
        (eta, clamped != temp)
    }
}

/// Viscosity law used by the solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Viscosity {
    CrossWlf(ViscosityModel),
    /// Constant viscosity (Pa s).
    Newtonian(f64),
}

impl Viscosity {
    pub fn validate(&self) -> Result<()> {
        match self {
            Viscosity::CrossWlf(m) => m.validate(),
            Viscosity::Newtonian(eta) if *eta > 0.0 => Ok(()),
            Viscosity::Newtonian(eta) => Err(Error::InvalidInput(format!(
                "Newtonian viscosity must be positive, got {eta}"
            ))),
        }
    }

    /// Returns the viscosity and whether the temperature had to be clamped.
    pub fn eval(&self, gammadot: f64, temp: f64) -> (f64, bool) {
        match self {
            Viscosity::CrossWlf(m) => m.viscosity_clamped(gammadot, temp),
            Viscosity::Newtonian(eta) => (*eta, false),
        }
    }
}
