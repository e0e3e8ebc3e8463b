//! Writes synthetic measurement files for the fit commands: a heating
//! experiment, a rheometer sweep and press-rheometer sensor traces, each
//! generated from the forward models with the default UPPH-GF parameters.
//!
//! cargo run --release --example sample_data [output-dir]   (default examples/data)

use std::path::PathBuf;

use smc_sim::characterization::{HeatSetup, ThermalMeasurement};
use smc_sim::io::{header_for_position, Table};
use smc_sim::material::{FrictionModel, ThermalProps, ViscosityModel, BAR};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "examples/data".into()));
    std::fs::create_dir_all(&dir)?;

    // sheets stacked on the hot mold, thermocouples every two sheets
    let times: Vec<f64> = (0..=60).map(|i| 5.0 * i as f64).collect();
    let depths = [0.0, 2.2e-3, 4.4e-3, 6.6e-3, 8.8e-3, 11.0e-3];
    let m = ThermalMeasurement::simulate(&ThermalProps::upph_gf(), &HeatSetup::stack_on_hot_mold(), &times, &depths)?;
    let mut headers = vec!["time_s".to_string()];
    headers.extend(depths.iter().map(|&d| header_for_position("T", d, "C")));
    let mut t = Table::new(headers);
    for (i, &time) in m.times.iter().enumerate() {
        let mut row = vec![time];
        row.extend(m.sensors.iter().map(|s| s.1[i]));
        t.rows.push(row);
    }
    t.write(&dir.join("thermal.csv"))?;

    let model = ViscosityModel::upph_paste();
    let mut t = Table::new(["T_C", "gammadot_1_per_s", "eta_Pa_s"].map(String::from).to_vec());
    for temp in [20.0, 35.0, 50.0, 65.0, 80.0] {
        for k in 0..=12 {
            let gd = 10f64.powf(-1.0 + k as f64 / 4.0);
            t.rows.push(vec![temp, gd, model.viscosity(gd, temp)?]);
        }
    }
    t.write(&dir.join("viscosity.csv"))?;

    // press closing at 1 mm/s with 20 bar at the outermost sensor; the
    // pressure rises toward the closed end by the friction drop 2 Δx τ / h
    let friction = FrictionModel::press_rheometer();
    let sensors = [0.032, 0.146, 0.248, 0.450];
    let (h0, hdot) = (14.0e-3, -1.0e-3);
    let mut headers = vec!["time_s".to_string(), "gap_mm".to_string(), "gap_rate_mm_per_s".to_string()];
    headers.extend(sensors.iter().map(|&x| header_for_position("p", x, "bar")));
    let mut t = Table::new(headers);
    for i in 0..=40 {
        let time = 0.1 * i as f64;
        let h = h0 + hdot * time;
        let mut p = vec![0.0; sensors.len()];
        p[sensors.len() - 1] = 20.0 * BAR;
        for k in (0..sensors.len() - 1).rev() {
            let dx = sensors[k + 1] - sensors[k];
            let v = -hdot / h * (sensors[k] + dx / 2.0);
            p[k] = p[k + 1] - 2.0 * dx * friction.stress(v) / h;
        }
        let mut row = vec![time, h * 1e3, hdot * 1e3];
        row.extend(p.iter().map(|x| x / BAR));
        t.rows.push(row);
    }
    t.write(&dir.join("friction.csv"))?;

    for f in ["thermal.csv", "viscosity.csv", "friction.csv"] {
        println!("wrote {}", dir.join(f).display());
    }
    Ok(())
}
