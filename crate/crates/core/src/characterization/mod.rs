//! Material characterization: heat conduction through the stack, viscosity
//! and friction fits from measurements.

mod data;
mod friction;
mod thermal;
mod viscosity_fit;

pub use data::{read_friction_csv, read_thermal_csv, read_viscosity_csv};
pub use friction::{
    extract_friction, extract_friction_all, fit_friction, FrictionFit, FrictionSample, GapHistory, SensorTrace,
};
pub use thermal::{
    average_temperature, fit_thermal, solve_heat_1d, thermal_residual, HeatField, HeatSetup, HeatSolver,
    ThermalFit, ThermalMeasurement,
};
pub use viscosity_fit::{fit_viscosity, viscosity_residual, ViscosityFit, ViscosityFitOptions, ViscosityPoint};
