//! Heating of a stack on the hot mold: the transient field, the
//! thickness-averaged temperature series, and recovery of conductivity and
//! gap conductance from synthetic thermocouple readings.
//!
//! cargo run --release --example thermal_fit

use smc_sim::characterization::{average_temperature, fit_thermal, solve_heat_1d, HeatSetup, ThermalMeasurement};
use smc_sim::material::ThermalProps;
use smc_sim::optim::NelderMeadOptions;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let props = ThermalProps::upph_gf();
    let setup = HeatSetup::stack_on_hot_mold();
    let times = [0.0, 30.0, 60.0, 120.0, 300.0];
    println!("{:>6} {:>9} {:>9} {:>9} {:>11}", "t (s)", "z=0", "z=H/2", "z=H", "series avg");
    for f in solve_heat_1d(&props, &setup, &times)? {
        let avg = average_temperature(&props, setup.t_initial, setup.t_mold, setup.height, setup.height, f.t, 100);
        println!(
            "{:>6.0} {:>9.2} {:>9.2} {:>9.2} {:>11.2}",
            f.t,
            f.temperature_at(0.0),
            f.temperature_at(setup.height / 2.0),
            f.temperature_at(setup.height),
            avg
        );
    }

    let samples: Vec<f64> = (0..=30).map(|i| 10.0 * i as f64).collect();
    let depths = [0.0, 2.2e-3, 4.4e-3, 6.6e-3];
    let data = ThermalMeasurement::simulate(&props, &setup, &samples, &depths)?;
    let guess = ThermalProps {
        kappa: 0.3,
        k_gap: 150.0,
        ..props
    };
    let fit = fit_thermal(&data, &setup, &guess, &NelderMeadOptions::default())?;
    println!(
        "\nfit from (0.3, 150): kappa {:.4} W/m/C, k {:.1} W/m2/C, rms {:.2e} C, {} iterations",
        fit.kappa, fit.k_gap, fit.rms, fit.iterations
    );
    Ok(())
}
