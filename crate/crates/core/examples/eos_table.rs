//! The compaction law: tabulated knots and interpolated pressures over the
//! gap range of a closing press.
//!
//! cargo run --example eos_table

use smc_sim::material::{EquationOfState, BAR};

fn main() {
    let eos = EquationOfState::upph_gf();
    println!("{:>10} {:>12}", "strain", "p (bar)");
    for &(e, p) in eos.knots() {
        println!("{e:>10.4} {:>12.3}", p / BAR);
    }
    println!("extrapolation slope {:.1} bar per unit strain\n", eos.extrapolation_slope() / BAR);

    let h0 = 18.0;
    println!("{:>8} {:>10} {:>12}", "h (mm)", "strain", "p (bar)");
    for k in 0..=10 {
        let h = h0 - 0.5 * k as f64;
        let e = (h / h0).ln();
        println!("{h:>8.1} {e:>10.4} {:>12.3}", eos.pressure(e) / BAR);
    }
}
