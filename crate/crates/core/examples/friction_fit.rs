//! Mold friction from sensor pressure differences: builds power-law traces,
//! extracts slip speed and wall stress between sensor pairs above the
//! threshold and fits (lambda, m).
//!
//! cargo run --example friction_fit

use smc_sim::characterization::{extract_friction_all, fit_friction, GapHistory, SensorTrace};
use smc_sim::material::{FrictionModel, BAR};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let truth = FrictionModel::press_rheometer();
    let xs = [0.032, 0.146, 0.248, 0.450];
    let times: Vec<f64> = (0..=50).map(|i| 0.1 * i as f64).collect();
    let hdot = -1.0e-3;
    let h: Vec<f64> = times.iter().map(|t| 14e-3 + hdot * t).collect();
    let mut traces: Vec<SensorTrace> = xs
        .iter()
        .map(|&x| SensorTrace {
            x,
            times: times.clone(),
            pressures: vec![0.0; times.len()],
        })
        .collect();
    for (i, &hi) in h.iter().enumerate() {
        let mut p = 20.0 * BAR;
        traces[xs.len() - 1].pressures[i] = p;
        for k in (0..xs.len() - 1).rev() {
            let dx = xs[k + 1] - xs[k];
            let v = -hdot / hi * (xs[k] + dx / 2.0);
            p -= 2.0 * dx * truth.stress(v) / hi;
            traces[k].pressures[i] = p;
        }
    }
    let gap = GapHistory {
        h,
        hdot: vec![hdot; times.len()],
    };
    for threshold_bar in [0.0, 2.0, 5.0] {
        let samples = extract_friction_all(&traces, &gap, threshold_bar * BAR)?;
        let fit = fit_friction(&samples, truth.v0)?;
        println!(
            "threshold {threshold_bar:>3} bar: {:>3} samples, lambda {:.6e} N s/m3, m {:.6}, R^2 {:.6}",
            fit.samples, fit.model.lambda, fit.model.m, fit.r_squared
        );
    }
    Ok(())
}
