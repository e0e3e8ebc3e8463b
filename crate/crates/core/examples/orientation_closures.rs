//! Planar elongation with each closure against the closure-free material
//! line solution.
//!
//! cargo run --example orientation_closures

use smc_sim::orientation::{evolve_planar_exact, integrate_planar, ClosureKind, PlanarState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let start = PlanarState::new(0.5, 0.5, 0.0)?;
    let kinds = ClosureKind::ALL;
    print!("{:>7} {:>9}", "strain", "exact");
    for k in kinds {
        print!(" {:>10}", format!("{k:?}"));
    }
    println!();
    for i in 0..=8 {
        let strain = 0.25 * i as f64;
        let exact = evolve_planar_exact(&[(strain, 1.0)], 20_000).state.axx;
        print!("{strain:>7.2} {exact:>9.4}");
        for k in kinds {
            let s = integrate_planar(start, &[(strain, 1.0)], k, 1e-3);
            print!(" {:>10.4}", s.axx);
        }
        println!();
    }
    let e = evolve_planar_exact(&[], 20_000);
    println!("\nplanar isotropic Axxxx: exact {:.4}, quadratic 0.25", e.axxxx);
    Ok(())
}
