//! Press-rheometer run at 75 % mold coverage with the default material set.
//!
//! cargo run --release --example press_rheometer_75 [output-dir]

use smc_sim::macro1d::{run_scenario, Scenario};
use smc_sim::material::BAR;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sc = Scenario::coverage75();
    let start = std::time::Instant::now();
    let out = match run_scenario(&sc) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("run failed: {}", e.error);
            e.partial
        }
    };
    println!("wall time      {:.2} s", start.elapsed().as_secs_f64());
    println!("steps          {} accepted, {} rejected", out.accepted_steps, out.rejected_steps);
    println!("switch-over    {:?} s", out.switch_time);
    println!("fill           {:?} s", out.fill_time);
    println!("peak force     {:.1} kN", out.peak_force / 1e3);
    println!("mass drift     {:.2e}", out.mass_drift());
    if let Some(last) = out.records.last() {
        println!("final t        {:.2} s, gap {:.3} mm, T {:.1} °C", last.t, last.gap * 1e3, last.temperature);
        let p: Vec<String> = last.sensors.iter().map(|p| format!("{:.1}", p / BAR)).collect();
        println!("sensors (bar)  {}", p.join(" "));
    }
    for r in out.records.iter().step_by(10) {
        println!(
            "t {:6.2}  h {:6.3} mm  hdot {:8.4} mm/s  F {:8.1} kN  X {:6.1} mm  p0 {:6.1} bar",
            r.t,
            r.gap * 1e3,
            r.hdot * 1e3,
            r.force / 1e3,
            r.front * 1e3,
            r.sensors[0] / BAR
        );
    }
    if let Some(dir) = std::env::args().nth(1) {
        out.write_csv(std::path::Path::new(&dir))?;
    }
    Ok(())
}
