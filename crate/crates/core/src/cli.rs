//! The `smc` command-line front end.
//!
//! Exit codes: 0 on success, 1 for invalid arguments, configuration or data,
//! 2 when a run fails after it started. Every command that writes files also
//! writes `MANIFEST` into the output directory, listing what was written.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::bundles::run_bundles;
use crate::characterization::{
    extract_friction_all, fit_friction, fit_thermal, fit_viscosity, read_friction_csv, read_thermal_csv,
    read_viscosity_csv,
};
use crate::config::{self, FileKind, FitConfig};
use crate::error::Error;
use crate::io::Table;
use crate::macro1d::run_scenario;
use crate::material::BAR;
use crate::plot;

/// Environment variable with the default output directory.
pub const OUT_DIR_ENV: &str = "SMC_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "smc", version, about = "Compression molding simulation for sheet molding compound")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a press-rheometer scenario and write force, sensor and orientation series.
    Simulate {
        /// Scenario file.
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Fit conductivity and gap conductance to a heating experiment.
    FitThermal {
        /// CSV with `time_s` and one `T_<depth>mm_C` column per sensor.
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Fit the Cross-WLF viscosity model to rheometer data.
    FitViscosity {
        /// CSV with columns `T_C`, `gammadot_1_per_s`, `eta_Pa_s`.
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Extract mold friction from press-rheometer traces and fit the power law.
    FitFriction {
        /// CSV with `time_s`, `gap_mm`, optional `gap_rate_mm_per_s` and `p_<x>mm_bar` sensor columns.
        #[arg(long)]
        data: PathBuf,
        /// Minimum pressure difference between neighboring sensors (bar); overrides the fit file.
        #[arg(long)]
        threshold_bar: Option<f64>,
        /// Reference velocity of the friction law (mm/s); overrides the fit file.
        #[arg(long)]
        v0_mm_per_s: Option<f64>,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Generate a bundle stack, move it with the configured kinematics and record diagnostics.
    Bundles {
        /// Bundle run file.
        #[arg(long)]
        config: PathBuf,
        /// Stack seed; overrides the run file.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; overrides the run file.
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Parse and check configuration files without running anything.
    Validate {
        /// Scenario, material, bundle run or fit files.
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output directory [default: $SMC_OUT_DIR or ./out].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Fit file with [heat], [fit] and starting-point [thermal]/[viscosity] sections.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory [default: $SMC_OUT_DIR or ./out].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: 1,
        message: e.to_string(),
    }
}

fn command() -> clap::Command {
    let keys = config::reference();
    let mut cmd = Cli::command().after_long_help(format!("Configuration keys\n\n{keys}"));
    for name in ["simulate", "fit-thermal", "fit-viscosity", "fit-friction", "bundles", "validate"] {
        cmd = cmd.mut_subcommand(name, |c| c.after_long_help(format!("Configuration keys\n\n{keys}")));
    }
    cmd
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match command().try_get_matches_from(args).and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

pub fn main() -> ! {
    std::process::exit(run(std::env::args_os()))
}

fn out_dir(arg: Option<PathBuf>) -> Result<PathBuf, Failure> {
    let dir = arg
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).map_err(|e| invalid(format!("{}: cannot create output directory: {e}", dir.display())))?;
    Ok(dir)
}

/// Files written so far, recorded in `MANIFEST` whatever the outcome.
struct Manifest {
    dir: PathBuf,
    command: &'static str,
    files: Vec<PathBuf>,
}

impl Manifest {
    fn new(dir: &Path, command: &'static str) -> Self {
        Self {
            dir: dir.to_path_buf(),
            command,
            files: Vec::new(),
        }
    }

    fn table(&mut self, name: &str, table: &Table) -> Result<(), Failure> {
        let path = self.dir.join(name);
        table.write(&path).map_err(|e| Failure {
            code: 2,
            message: e.to_string(),
        })?;
        self.files.push(path);
        Ok(())
    }

    fn finish(self, status: &str) -> Result<(), Failure> {
        let mut text = format!("# smc {}\n# status: {status}\n", self.command);
        for f in &self.files {
            let name = f.strip_prefix(&self.dir).unwrap_or(f);
            text.push_str(&format!("{}\n", name.display()));
        }
        let path = self.dir.join("MANIFEST");
        fs::write(&path, text).map_err(|e| Failure {
            code: 2,
            message: format!("{}: {e}", path.display()),
        })?;
        for f in &self.files {
            println!("wrote {}", f.display());
        }
        Ok(())
    }
}

fn execute(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Simulate { scenario, out } => simulate(&scenario, out),
        Command::FitThermal { data, fit } => {
            let cfg = fit_config(&fit)?;
            let m = read_thermal_csv(&data).map_err(invalid)?;
            let setup = cfg.heat;
            let r = fit_thermal(&m, &setup, &cfg.thermal_guess, &cfg.simplex).map_err(invalid)?;
            println!("kappa      {:.6} W/m/C", r.kappa);
            println!("k_gap      {:.3} W/m2/C", r.k_gap);
            println!("rms        {:.4} C over {} iterations (converged: {})", r.rms, r.iterations, r.converged);
            let dir = out_dir(fit.out)?;
            let mut manifest = Manifest::new(&dir, "fit-thermal");
            let mut t = Table::new(
                ["kappa_W_per_m_C", "k_gap_W_per_m2_C", "residual_C2", "rms_C", "iterations", "converged"]
                    .map(String::from)
                    .to_vec(),
            );
            t.rows.push(vec![r.kappa, r.k_gap, r.residual, r.rms, r.iterations as f64, f64::from(u8::from(r.converged))]);
            manifest.table("thermal_fit.csv", &t)?;
            manifest.finish("ok")
        }
        Command::FitViscosity { data, fit } => {
            let cfg = fit_config(&fit)?;
            let points = read_viscosity_csv(&data).map_err(invalid)?;
            let r = fit_viscosity(&points, &cfg.viscosity).map_err(invalid)?;
            let m = r.model;
            println!("D1         {:.6e} Pa s", m.d1);
            println!("n          {:.6}", m.n);
            println!("T*         {:.4} C", m.t_star);
            println!("alpha1     {:.6}", m.alpha1);
            println!("alpha2     {:.4} C", m.alpha2);
            println!("residual   {:.3e} over {} iterations (converged: {})", r.residual, r.iterations, r.converged);
            let dir = out_dir(fit.out)?;
            let mut manifest = Manifest::new(&dir, "fit-viscosity");
            let mut t = Table::new(
                ["D1_Pa_s", "gamma0_1_per_s", "n", "t_star_C", "alpha1", "alpha2_C", "residual"]
                    .map(String::from)
                    .to_vec(),
            );
            t.rows.push(vec![m.d1, m.gamma0, m.n, m.t_star, m.alpha1, m.alpha2, r.residual]);
            manifest.table("viscosity_fit.csv", &t)?;
            manifest.finish("ok")
        }
        Command::FitFriction {
            data,
            threshold_bar,
            v0_mm_per_s,
            fit,
        } => {
            let cfg = fit_config(&fit)?;
            let threshold = threshold_bar.map_or(cfg.threshold, |b| b * BAR);
            let v0 = v0_mm_per_s.map_or(cfg.v0, |v| v * 1e-3);
            if !(threshold >= 0.0 && v0 > 0.0) {
                return Err(invalid("--threshold-bar must be >= 0 and --v0-mm-per-s positive"));
            }
            let (traces, gap) = read_friction_csv(&data).map_err(invalid)?;
            let samples = extract_friction_all(&traces, &gap, threshold).map_err(invalid)?;
            let r = fit_friction(&samples, v0).map_err(invalid)?;
            println!("lambda     {:.6e} N s/m3", r.model.lambda);
            println!("m          {:.6}", r.model.m);
            println!("samples    {} (threshold {} bar), R^2 = {:.6}", r.samples, threshold / BAR, r.r_squared);
            let dir = out_dir(fit.out)?;
            let mut manifest = Manifest::new(&dir, "fit-friction");
            let mut s = Table::new(["t_s", "v_m_per_s", "tau_Pa"].map(String::from).to_vec());
            s.rows.extend(samples.iter().map(|x| vec![x.t, x.v, x.tau]));
            manifest.table("friction_samples.csv", &s)?;
            let mut t = Table::new(["lambda_N_s_per_m3", "m", "v0_m_per_s", "r_squared", "samples"].map(String::from).to_vec());
            t.rows.push(vec![r.model.lambda, r.model.m, v0, r.r_squared, r.samples as f64]);
            manifest.table("friction_fit.csv", &t)?;
            manifest.finish("ok")
        }
        Command::Bundles {
            config: path,
            seed,
            workers,
            out,
        } => {
            let mut cfg = config::load_bundle_run(&path).map_err(invalid)?;
            if let Some(s) = seed {
                cfg.stack.seed = s;
            }
            if workers.is_some() {
                cfg.workers = workers;
            }
            cfg.validate().map_err(invalid)?;
            let dir = out_dir(out.out)?;
            let mut manifest = Manifest::new(&dir, "bundles");
            let result = match run_bundles(&cfg) {
                Ok(r) => r,
                Err(e) => {
                    let message = e.to_string();
                    manifest.finish(&format!("failed: {message}"))?;
                    return Err(Failure { code: 2, message });
                }
            };
            if let Some(last) = result.diagnostics.last() {
                println!(
                    "t = {:.3} s: {} segments, Axx {:.4} Ayy {:.4}, {} contacts, reaction residual {:.1e}",
                    last.t, last.segments, last.a[0], last.a[1], last.contacts, last.reaction_residual
                );
            }
            manifest.table("orientation.csv", &result.orientation_table())?;
            manifest.table("coupling.csv", &result.coupling_table())?;
            manifest.table("bundles.csv", &result.chains_table())?;
            manifest.table("body_force.csv", &result.body_force_table())?;
            if out.plot {
                plots(&mut manifest, plot::emit_bundle_plots(&result, &dir))?;
            }
            manifest.finish("ok")
        }
        Command::Validate { files } => {
            let mut failed = Vec::new();
            for f in &files {
                match validate_file(f) {
                    Ok(kind) => println!("ok      {} ({kind:?})", f.display()),
                    Err(e) => {
                        println!("invalid {}: {e}", f.display());
                        failed.push(f.display().to_string());
                    }
                }
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(invalid(format!("{} of {} files invalid: {}", failed.len(), files.len(), failed.join(", "))))
            }
        }
    }
}

fn validate_file(path: &Path) -> Result<FileKind, Error> {
    let kind = config::detect_kind(path)?;
    match kind {
        FileKind::Scenario => config::load_scenario(path).map(|_| ()),
        FileKind::Materials => config::load_materials(path).map(|_| ()),
        FileKind::Bundles => config::load_bundle_run(path).map(|_| ()),
        FileKind::Fit => config::load_fit(path).map(|_| ()),
    }?;
    Ok(kind)
}

fn fit_config(args: &FitArgs) -> Result<FitConfig, Failure> {
    match &args.config {
        Some(p) => config::load_fit(p).map_err(invalid),
        None => Ok(FitConfig::default()),
    }
}

fn plots(manifest: &mut Manifest, report: crate::Result<plot::PlotReport>) -> Result<(), Failure> {
    let report = report.map_err(|e| Failure {
        code: 2,
        message: e.to_string(),
    })?;
    for s in report.skipped {
        eprintln!("note: {s} skipped, no data");
    }
    manifest.files.extend(report.written);
    Ok(())
}

fn simulate(path: &Path, out: OutArgs) -> Result<(), Failure> {
    let sc = config::load_scenario(path).map_err(invalid)?;
    let dir = out_dir(out.out)?;
    let mut manifest = Manifest::new(&dir, "simulate");
    let (output, failure) = match run_scenario(&sc) {
        Ok(o) => (o, None),
        Err(e) => (e.partial, Some(e.error.to_string())),
    };
    manifest.table("force.csv", &output.force_table())?;
    manifest.table("sensors.csv", &output.sensor_table())?;
    manifest.table("orientation.csv", &output.orientation_table())?;
    if out.plot {
        plots(&mut manifest, plot::emit_plots(&output, &dir))?;
    }
    let fmt = |t: Option<f64>| t.map_or("-".to_string(), |t| format!("{t:.4} s"));
    println!("switch-over {}", fmt(output.switch_time));
    println!("fill        {}", fmt(output.fill_time));
    println!("peak force  {:.1} kN", output.peak_force / 1e3);
    println!("mass drift  {:.2e}", output.mass_drift());
    if output.clamped_samples > 0 {
        eprintln!(
            "note: {} samples outside the fitted viscosity temperature range; viscosity evaluated at the nearest bound",
            output.clamped_samples
        );
    }
    match failure {
        None => manifest.finish("ok"),
        Some(message) => {
            manifest.finish(&format!("failed: {message}"))?;
            Err(Failure { code: 2, message })
        }
    }
}
