//! End-to-end runs of the `smc` binary on the shipped example files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn examples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")
}

fn smc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smc")).args(args).env_remove("SMC_OUT_DIR").output().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn manifest(dir: &Path) -> String {
    fs::read_to_string(dir.join("MANIFEST")).unwrap()
}

#[test]
fn shipped_configs_validate() {
    let mut files: Vec<String> = fs::read_dir(examples())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "cfg"))
        .map(|p| p.display().to_string())
        .collect();
    files.sort();
    assert!(files.len() >= 7);
    let mut args = vec!["validate"];
    args.extend(files.iter().map(String::as_str));
    let out = smc(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unknown_key_is_reported_with_its_section() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "[scenario]\npreset = coverage75\ngrid_size = 40\n").unwrap();
    let out = smc(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("scenario.grid_size") && text.contains("unknown key"), "{text}");
}

#[test]
fn friction_fit_on_the_sample_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = examples().join("data/friction.csv");
    let fit = examples().join("fit.cfg");
    let out = smc(&[
        "fit-friction",
        "--data",
        data.to_str().unwrap(),
        "--config",
        fit.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("friction_fit.csv"));
    assert_eq!(header[..2], ["lambda_N_s_per_m3", "m"]);
    assert!((rows[0][0] / 3.0e6 - 1.0).abs() < 1e-6, "{:?}", rows[0]);
    assert!((rows[0][1] / 0.6 - 1.0).abs() < 1e-6);
    let m = manifest(dir.path());
    assert!(m.contains("# status: ok") && m.contains("friction_samples.csv") && m.contains("friction_fit.csv"));
}

#[test]
fn viscosity_fit_on_the_sample_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = examples().join("data/viscosity.csv");
    let fit = examples().join("fit.cfg");
    let out = smc(&[
        "fit-viscosity",
        "--data",
        data.to_str().unwrap(),
        "--config",
        fit.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("viscosity_fit.csv").exists());
    assert!(manifest(dir.path()).contains("viscosity_fit.csv"));
}

#[test]
fn short_simulation_honors_the_output_env() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.cfg");
    let materials = examples().join("upph_gf.cfg");
    fs::write(
        &cfg,
        format!("[scenario]\npreset = coverage75\nmaterials = {}\ngrid_n = 15\nt_max_s = 0.3\noutput_interval_s = 0.1\n", materials.display()),
    )
    .unwrap();
    let out_dir = dir.path().join("from_env");
    let out = Command::new(env!("CARGO_BIN_EXE_smc"))
        .args(["simulate", "--scenario", cfg.to_str().unwrap(), "--plot"])
        .env("SMC_OUT_DIR", &out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&out_dir.join("force.csv"));
    assert_eq!(header[0], "t_s");
    assert_eq!(rows.len(), 4);
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0]));
    for name in ["sensors.csv", "orientation.csv", "force.svg", "sensors.svg", "orientation.svg"] {
        assert!(out_dir.join(name).exists(), "{name}");
        assert!(manifest(&out_dir).contains(name), "{name}");
    }
}

#[test]
fn bundle_output_does_not_depend_on_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.cfg");
    let base = fs::read_to_string(examples().join("bundles_elongation.cfg")).unwrap();
    let small = base.replace("extent_mm = 50, 50, 4.5", "extent_mm = 15, 15, 3").replace("duration_s = 1", "duration_s = 0.1");
    fs::write(&cfg, small).unwrap();
    let run = |workers: &str| {
        let out_dir = dir.path().join(format!("w{workers}"));
        let out = smc(&[
            "bundles",
            "--config",
            cfg.to_str().unwrap(),
            "--workers",
            workers,
            "--seed",
            "7",
            "--plot",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out_dir
    };
    let (a, b) = (run("1"), run("3"));
    for name in ["orientation.csv", "coupling.csv", "bundles.csv", "body_force.csv", "orientation.svg"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let (header, rows) = read_csv(&a.join("orientation.csv"));
    let k = header.iter().position(|h| h == "Axx").unwrap();
    assert!(rows.last().unwrap()[k] > rows[0][k], "elongation along x raises Axx");
}
