//! CSV readers for characterization measurements.

use std::path::Path;

use super::friction::{GapHistory, SensorTrace};
use super::thermal::ThermalMeasurement;
use super::viscosity_fit::ViscosityPoint;
use crate::error::{Error, Result};
use crate::io::{position_mm_from_header, Table};
use crate::material::BAR;

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn require(table: &Table, path: &Path, name: &str) -> Result<usize> {
    table
        .column_index(name)
        .ok_or_else(|| parse_err(path, format!("missing column `{name}`")))
}

/// `time_s` followed by one column per sensor named `T_<depth>mm_C`.
pub fn read_thermal_csv(path: &Path) -> Result<ThermalMeasurement> {
    let t = Table::read(path)?;
    let it = require(&t, path, "time_s")?;
    let mut sensors = Vec::new();
    for (i, h) in t.headers.iter().enumerate() {
        if i == it {
            continue;
        }
        let depth = position_mm_from_header(h)
            .ok_or_else(|| parse_err(path, format!("column `{h}` does not name a depth like T_2.2mm_C")))?;
        sensors.push((depth * 1e-3, t.column(i)));
    }
    Ok(ThermalMeasurement {
        times: t.column(it),
        sensors,
    })
}

/// Columns `T_C`, `gammadot_1_per_s`, `eta_Pa_s`.
pub fn read_viscosity_csv(path: &Path) -> Result<Vec<ViscosityPoint>> {
    let t = Table::read(path)?;
    let (a, b, c) = (
        require(&t, path, "T_C")?,
        require(&t, path, "gammadot_1_per_s")?,
        require(&t, path, "eta_Pa_s")?,
    );
    Ok(t.rows
        .iter()
        .map(|r| ViscosityPoint {
            temp: r[a],
            gammadot: r[b],
            eta: r[c],
        })
        .collect())
}

/// Press-rheometer traces: `time_s`, `gap_mm`, optional `gap_rate_mm_per_s`
/// and sensor columns `p_<x>mm_bar`.
pub fn read_friction_csv(path: &Path) -> Result<(Vec<SensorTrace>, GapHistory)> {
    let t = Table::read(path)?;
    let it = require(&t, path, "time_s")?;
    let ig = require(&t, path, "gap_mm")?;
    let ir = t.column_index("gap_rate_mm_per_s");
    let times = t.column(it);
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(parse_err(path, "time_s must be strictly increasing"));
    }
    let h: Vec<f64> = t.column(ig).iter().map(|v| v * 1e-3).collect();
    let gap = match ir {
        Some(i) => GapHistory {
            h,
            hdot: t.column(i).iter().map(|v| v * 1e-3).collect(),
        },
        None => GapHistory::from_gap(&times, h).map_err(|e| parse_err(path, e.to_string()))?,
    };
    let mut traces = Vec::new();
    for (i, name) in t.headers.iter().enumerate() {
        if i == it || i == ig || Some(i) == ir {
            continue;
        }
        let x = position_mm_from_header(name)
            .ok_or_else(|| parse_err(path, format!("column `{name}` does not name a sensor like p_146mm_bar")))?;
        traces.push(SensorTrace {
            x: x * 1e-3,
            times: times.clone(),
            pressures: t.column(i).iter().map(|p| p * BAR).collect(),
        });
    }
    if traces.len() < 2 {
        return Err(parse_err(path, "at least two sensor columns are required"));
    }
    Ok((traces, gap))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn friction_columns() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        std::fs::write(&p, "time_s,gap_mm,p_32mm_bar,p_146mm_bar\n0,10,20,10\n1,9,30,12\n").unwrap();
        let (traces, gap) = read_friction_csv(&p).unwrap();
        assert_eq!(traces.len(), 2);
        assert!((traces[1].x - 0.146).abs() < 1e-12);
        assert_eq!(traces[0].pressures[1], 30.0 * BAR);
        assert!((gap.hdot[0] + 1e-3).abs() < 1e-12);
    }

    #[test]
    fn missing_column_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.csv");
        std::fs::write(&p, "T_C,eta_Pa_s\n20,1\n").unwrap();
        let err = read_viscosity_csv(&p).unwrap_err().to_string();
        assert!(err.contains("gammadot_1_per_s"), "{err}");
    }

    #[test]
    fn thermal_depths_in_metres() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        std::fs::write(&p, "time_s,T_0mm_C,T_1.1mm_C\n0,24,24\n10,60,30\n").unwrap();
        let m = read_thermal_csv(&p).unwrap();
        assert_eq!(m.sensors[1].0, 1.1e-3);
        assert_eq!(m.sensors[0].1, vec![24.0, 60.0]);
    }
}
