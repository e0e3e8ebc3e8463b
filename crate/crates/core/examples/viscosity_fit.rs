//! Fits the Cross-WLF model to a synthetic rheometer sweep with 2 %
//! multiplicative scatter and compares the curves.
//!
//! cargo run --release --example viscosity_fit

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smc_sim::characterization::{fit_viscosity, ViscosityFitOptions, ViscosityPoint};
use smc_sim::material::ViscosityModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let truth = ViscosityModel::upph_paste();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut data = Vec::new();
    for temp in [20.0, 40.0, 60.0, 80.0] {
        for k in 0..10 {
            let gd = 10f64.powf(-1.0 + k as f64 / 3.0);
            let noise = 1.0 + 0.02 * (2.0 * rng.random::<f64>() - 1.0);
            data.push(ViscosityPoint {
                temp,
                gammadot: gd,
                eta: truth.viscosity(gd, temp)? * noise,
            });
        }
    }
    let opts = ViscosityFitOptions {
        guess: ViscosityModel {
            d1: 40e3,
            n: 0.3,
            alpha1: 5.0,
            alpha2: 80.0,
            ..truth
        },
        ..Default::default()
    };
    let fit = fit_viscosity(&data, &opts)?;
    let m = fit.model;
    println!("          {:>12} {:>12}", "fitted", "generating");
    println!("D1 (Pa s) {:>12.1} {:>12.1}", m.d1, truth.d1);
    println!("n         {:>12.4} {:>12.4}", m.n, truth.n);
    println!("alpha1    {:>12.3} {:>12.3}", m.alpha1, truth.alpha1);
    println!("alpha2    {:>12.2} {:>12.2}", m.alpha2, truth.alpha2);
    println!("residual {:.3e}, {} iterations", fit.residual, fit.iterations);
    for (t, gd) in [(80.0, 50.0), (20.0, 0.5)] {
        println!("eta({t} C, {gd} 1/s) = {:.1} Pa s (generating {:.1})", m.viscosity(gd, t)?, truth.viscosity(gd, t)?);
    }
    Ok(())
}
