//! Viscosity of the UPPH paste against shear rate at several temperatures,
//! plus the anisotropic fiber contribution for aligned and isotropic states.
//!
//! cargo run --example viscosity_curves

use smc_sim::material::{SuspensionParams, ViscosityModel};
use smc_sim::orientation::{viscosity_components, ClosureKind, PlanarState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = ViscosityModel::upph_paste();
    let temps = [20.0, 40.0, 60.0, 80.0];
    print!("{:>12}", "rate (1/s)");
    for t in temps {
        print!("{:>14}", format!("{t} C (Pa s)"));
    }
    println!();
    for k in 0..=8 {
        let gd = 10f64.powf(-2.0 + 0.5 * k as f64);
        print!("{gd:>12.3e}");
        for t in temps {
            print!("{:>14.1}", m.viscosity(gd, t)?);
        }
        println!();
    }

    let sus = SuspensionParams::smc_default();
    println!("\nr_p = {:.1}, eta2/eta = {:.1}", sus.r_p, sus.eta2_ratio()?);
    let eta = m.viscosity(1.0, 40.0)?;
    for (name, s) in [("planar isotropic", PlanarState::new(0.5, 0.5, 0.0)?), ("aligned with x", PlanarState::new(1.0, 0.0, 0.0)?)] {
        let v = viscosity_components(eta, &sus, &s, ClosureKind::Ibof)?;
        println!("{name:>17}: Vxxxx {:.3e}  Vzzxx {:.3e}  Vzzzz {:.3e}  Vxxzz {:.3e} Pa s", v.xxxx, v.zzxx, v.zzzz, v.xxzz);
    }
    Ok(())
}
