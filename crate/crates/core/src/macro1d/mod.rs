//! One-dimensional press-rheometer model: plug flow of a compressible,
//! anisotropic viscous charge on a stretched coordinate x* = x / X(t) that
//! follows the flow front X.
//!
//! Unknowns per node are density, velocity and the planar orientation
//! (Axx, Ayy, Axy). Mass is balanced on finite volumes in conservative form,
//! the momentum balance includes inertia, wall friction and the traction-free
//! front, and orientation follows Jeffery's equation with upwind transport.
//! Each step is backward Euler solved by Newton's method with a banded
//! Jacobian; step doubling controls the local error.

mod banded;
mod controller;
mod discretization;
mod output;
mod solver;

pub use controller::{PressController, PressSettings};
pub use discretization::{assemble_rates, cell_sigma_zz, node_sigma_zz, sensor_pressures, sigma_zz, total_force, Rates};
pub use output::{OutputRecord, RunError, SimulationOutput};
pub use solver::{run_scenario, MacroSolver, StepReport};

use crate::characterization::average_temperature;
use crate::error::{Error, Result};
use crate::material::MaterialSet;
use crate::orientation::{ClosureKind, PlanarState};

/// Numerical settings of the time integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub rtol: f64,
    /// Absolute velocity tolerance (m/s).
    pub atol_v: f64,
    /// Absolute tolerance on orientation components.
    pub atol_a: f64,
    pub dt_initial: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub max_newton: usize,
    /// Terms of the average-temperature series.
    pub temperature_terms: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            rtol: 1e-6,
            atol_v: 1e-9,
            atol_a: 1e-6,
            dt_initial: 1e-4,
            dt_min: 1e-10,
            dt_max: 0.05,
            max_newton: 12,
            temperature_terms: 100,
        }
    }
}

/// A press-rheometer run: tool, charge, materials, press and sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Tool length (m).
    pub tool_length: f64,
    /// Tool and charge width (m).
    pub width: f64,
    /// Initial charge length from the closed end (m).
    pub charge_length: f64,
    /// Initial gap, equal to the stack height (m).
    pub initial_gap: f64,
    /// Initial charge temperature (°C).
    pub t_initial: f64,
    /// Mold temperature (°C).
    pub t_mold: f64,
    /// Sensor positions from the closed end (m).
    pub sensors: Vec<f64>,
    pub materials: MaterialSet,
    pub closure: ClosureKind,
    pub grid_n: usize,
    pub press: PressSettings,
    /// Simulated time after the tool is filled (s).
    pub hold_time: f64,
    /// Hard stop (s).
    pub t_max: f64,
    /// Output sampling interval (s).
    pub output_interval: f64,
    pub solver: SolverSettings,
}

impl Scenario {
    /// Sensor positions of the press rheometer (m).
    pub const RHEOMETER_SENSORS: [f64; 7] = [0.032, 0.146, 0.248, 0.450, 0.552, 0.604, 0.709];

    /// 75 % initial coverage: a 600 mm charge of 18 mm height in the 800 mm tool.
    pub fn coverage75() -> Self {
        Self {
            tool_length: 0.8,
            width: 0.45,
            charge_length: 0.6,
            initial_gap: 18.0e-3,
            t_initial: 24.0,
            t_mold: 145.0,
            sensors: Self::RHEOMETER_SENSORS.to_vec(),
            materials: MaterialSet::upph_gf(),
            closure: ClosureKind::Ibof,
            grid_n: 40,
            press: PressSettings::press_rheometer(),
            hold_time: 2.0,
            t_max: 60.0,
            output_interval: 0.05,
            solver: SolverSettings::default(),
        }
    }

    /// 25 % initial coverage: a 200 mm charge of 8.5 mm height.
    pub fn coverage25() -> Self {
        Self {
            charge_length: 0.2,
            initial_gap: 8.5e-3,
            ..Self::coverage75()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if !(self.tool_length > 0.0 && self.width > 0.0) {
            return bad("tool length and width must be positive".into());
        }
        if !(self.charge_length > 0.0 && self.charge_length <= self.tool_length) {
            return bad(format!(
                "charge length {} m must lie in (0, {}]",
                self.charge_length, self.tool_length
            ));
        }
        if !(self.initial_gap > 0.0) {
            return bad("initial gap must be positive".into());
        }
        if let Some(s) = self.sensors.iter().find(|&&s| !(0.0..=self.tool_length).contains(&s)) {
            return bad(format!("sensor at {s} m lies outside the tool"));
        }
        if self.grid_n < 3 {
            return Err(Error::InvalidGrid(format!("grid_n = {} but at least 3 nodes are needed", self.grid_n)));
        }
        if !(self.output_interval > 0.0 && self.t_max > 0.0 && self.hold_time >= 0.0) {
            return bad("output interval and t_max must be positive, hold time non-negative".into());
        }
        self.materials.validate()?;
        self.press.validate()
    }

    /// Thickness-averaged temperature at time `t` and gap `h`.
    pub fn average_temperature(&self, t: f64, h: f64) -> f64 {
        average_temperature(
            &self.materials.thermal,
            self.t_initial,
            self.t_mold,
            self.initial_gap,
            h,
            t,
            self.solver.temperature_terms,
        )
    }
}

/// Solver state on x*_i = i / (n - 1): velocity and orientation per node,
/// density per cell between neighboring nodes, plus front, gap and time.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroState {
    pub t: f64,
    /// Front position (m).
    pub front: f64,
    /// Gap (m).
    pub gap: f64,
    /// Gap rate applied over the last step (m/s).
    pub hdot: f64,
    /// Cell densities, `n - 1` entries.
    pub rho: Vec<f64>,
    pub v: Vec<f64>,
    pub axx: Vec<f64>,
    pub ayy: Vec<f64>,
    pub axy: Vec<f64>,
    pub filled: bool,
}

impl MacroState {
    /// Charge at rest with uniform reference density and planar isotropy.
    pub fn initial(scenario: &Scenario) -> Self {
        let n = scenario.grid_n;
        let iso = PlanarState::ISOTROPIC;
        Self {
            t: 0.0,
            front: scenario.charge_length,
            gap: scenario.initial_gap,
            hdot: 0.0,
            rho: vec![scenario.materials.thermal.rho0; n - 1],
            v: vec![0.0; n],
            axx: vec![iso.axx; n],
            ayy: vec![iso.ayy; n],
            axy: vec![iso.axy; n],
            filled: scenario.charge_length >= scenario.tool_length,
        }
    }

    pub fn nodes(&self) -> usize {
        self.v.len()
    }

    /// Stretched coordinate of node `i`.
    pub fn x_star(&self, i: usize) -> f64 {
        i as f64 / (self.nodes() - 1) as f64
    }

    pub fn planar(&self, i: usize) -> PlanarState {
        PlanarState {
            axx: self.axx[i],
            ayy: self.ayy[i],
            axy: self.axy[i],
        }
    }

    /// Charge mass (kg), consistent with the finite-volume balance.
    pub fn mass(&self, width: f64) -> f64 {
        let d = 1.0 / self.rho.len() as f64;
        width * self.gap * self.front * d * self.rho.iter().sum::<f64>()
    }

    /// Linear interpolation of a nodal field at x*.
    pub fn interpolate(field: &[f64], x_star: f64) -> f64 {
        let n = field.len();
        let s = x_star.clamp(0.0, 1.0) * (n - 1) as f64;
        let i = (s.floor() as usize).min(n - 2);
        let w = s - i as f64;
        field[i] * (1.0 - w) + field[i + 1] * w
    }
}
