//! Sampled results of a run and their CSV export.

use std::fmt;
use std::path::Path;

use super::solver::MacroSolver;
use super::{MacroState, Scenario};
use crate::error::{Error, Result};
use crate::io::{header_for_position, Table};
use crate::material::{Viscosity, BAR};

/// One output sample.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputRecord {
    pub t: f64,
    /// Gap (m).
    pub gap: f64,
    /// Gap rate (m/s).
    pub hdot: f64,
    /// Press force (N).
    pub force: f64,
    /// Front position (m).
    pub front: f64,
    /// Thickness-averaged temperature (°C).
    pub temperature: f64,
    /// Sensor pressures (Pa), zero for sensors beyond the front.
    pub sensors: Vec<f64>,
    /// Nodal σzz over the charge (Pa), closed end first.
    pub sigma_zz: Vec<f64>,
    pub axx_mid: f64,
    pub ayy_mid: f64,
    /// Charge mass (kg).
    pub mass: f64,
    pub switched: bool,
    pub filled: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    /// Sensor positions (m).
    pub sensor_positions: Vec<f64>,
    pub records: Vec<OutputRecord>,
    pub fill_time: Option<f64>,
    pub switch_time: Option<f64>,
    pub peak_force: f64,
    /// Output samples whose average temperature lay outside the fitted
    /// viscosity range.
    pub clamped_samples: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub final_state: Option<MacroState>,
}

impl SimulationOutput {
    pub(crate) fn empty(sc: &Scenario) -> Self {
        Self {
            sensor_positions: sc.sensors.clone(),
            records: Vec::new(),
            fill_time: None,
            switch_time: None,
            peak_force: 0.0,
            clamped_samples: 0,
            accepted_steps: 0,
            rejected_steps: 0,
            final_state: None,
        }
    }

    pub(crate) fn finish(&mut self, solver: &MacroSolver) {
        self.accepted_steps = solver.accepted;
        self.rejected_steps = solver.rejected;
        self.final_state = Some(solver.state().clone());
        if let Viscosity::CrossWlf(m) = solver.scenario().materials.viscosity {
            let range = m.t_min..=m.t_max;
            self.clamped_samples = self.records.iter().filter(|r| !range.contains(&r.temperature)).count();
        }
    }

    /// Largest relative deviation of the sampled mass from the first sample.
    pub fn mass_drift(&self) -> f64 {
        let Some(m0) = self.records.first().map(|r| r.mass) else {
            return 0.0;
        };
        self.records.iter().map(|r| (r.mass / m0 - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Time series of one sensor (s, Pa).
    pub fn sensor_series(&self, k: usize) -> Vec<(f64, f64)> {
        self.records.iter().map(|r| (r.t, r.sensors[k])).collect()
    }

    pub fn force_table(&self) -> Table {
        let mut t = Table::new(
            ["t_s", "h_m", "hdot_m_per_s", "F_N", "X_m", "T_avg_C"].map(String::from).to_vec(),
        );
        for r in &self.records {
            t.rows.push(vec![r.t, r.gap, r.hdot, r.force, r.front, r.temperature]);
        }
        t
    }

    /// Sensor pressures in bar.
    pub fn sensor_table(&self) -> Table {
        let mut headers = vec!["t_s".to_string()];
        headers.extend(self.sensor_positions.iter().map(|&x| header_for_position("p", x, "bar")));
        let mut t = Table::new(headers);
        for r in &self.records {
            let mut row = vec![r.t];
            row.extend(r.sensors.iter().map(|p| p / BAR));
            t.rows.push(row);
        }
        t
    }

    /// Orientation at mid-length of the charge.
    pub fn orientation_table(&self) -> Table {
        let mut t = Table::new(["t_s", "Axx", "Ayy"].map(String::from).to_vec());
        for r in &self.records {
            t.rows.push(vec![r.t, r.axx_mid, r.ayy_mid]);
        }
        t
    }

    /// Writes force.csv, sensors.csv and orientation.csv into `dir`.
    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
        self.force_table().write(&dir.join("force.csv"))?;
        self.sensor_table().write(&dir.join("sensors.csv"))?;
        self.orientation_table().write(&dir.join("orientation.csv"))
    }
}

/// A failed run with everything computed up to the failure.
#[derive(Debug)]
pub struct RunError {
    pub error: Error,
    pub partial: SimulationOutput,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (after {} samples)", self.error, self.partial.records.len())
    }
}

impl std::error::Error for RunError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}
