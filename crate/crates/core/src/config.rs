//! INI-style configuration files with unit-suffixed keys.
//!
//! Every physical quantity is written as `<name>_<unit>`, e.g.
//! `charge_length_mm = 600` or `f_max_kN = 4400`, and converted to SI while
//! parsing. Any unit of the right dimension is accepted, so
//! `charge_length_m = 0.6` means the same. Dimensionless keys carry no
//! suffix. Unknown keys, wrong units and malformed values are errors naming
//! the file and the key.
//!
//! Four kinds of files share the same sections:
//! scenario files (`[scenario]`, `[press]`, `[solver]` and material
//! sections), material files (material sections only), bundle run files
//! (`[stack]`, `[kinematics]`, `[run]`, `[coupling]`) and fit files
//! (`[heat]`, `[fit]` plus the starting-point material sections).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ini::Ini;

use crate::bundles::{Aabb, BundleRunConfig, CouplingParams, Kinematics, Point};
use crate::characterization::{HeatSetup, ViscosityFitOptions};
use crate::error::{Error, Result};
use crate::macro1d::Scenario;
use crate::material::{EquationOfState, MaterialSet, Viscosity, ViscosityModel};
use crate::optim::NelderMeadOptions;
use crate::orientation::ClosureKind;

/// Physical dimension of a key and the unit suffixes accepted for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Length,
    Area,
    Time,
    Temperature,
    Pressure,
    Force,
    Viscosity,
    Velocity,
    Rate,
    Conductivity,
    GapConductance,
    SpecificHeat,
    Density,
    FrictionCoefficient,
}

impl Dim {
    /// Accepted suffixes and their factor to SI; the first one is the SI unit.
    pub fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Dim::Length => &[("m", 1.0), ("mm", 1e-3), ("um", 1e-6)],
            Dim::Area => &[("m2", 1.0), ("mm2", 1e-6)],
            Dim::Time => &[("s", 1.0), ("ms", 1e-3)],
            Dim::Temperature => &[("C", 1.0)],
            Dim::Pressure => &[("Pa", 1.0), ("kPa", 1e3), ("bar", 1e5), ("MPa", 1e6), ("GPa", 1e9)],
            Dim::Force => &[("N", 1.0), ("kN", 1e3), ("MN", 1e6)],
            Dim::Viscosity => &[("Pa_s", 1.0), ("kPa_s", 1e3)],
            Dim::Velocity => &[("m_per_s", 1.0), ("mm_per_s", 1e-3)],
            Dim::Rate => &[("1_per_s", 1.0)],
            Dim::Conductivity => &[("W_per_m_C", 1.0)],
            Dim::GapConductance => &[("W_per_m2_C", 1.0)],
            Dim::SpecificHeat => &[("J_per_kg_C", 1.0)],
            Dim::Density => &[("kg_per_m3", 1.0)],
            Dim::FrictionCoefficient => &[("N_s_per_m3", 1.0), ("MN_s_per_m3", 1e6)],
        }
    }

    fn name(self) -> &'static str {
        match self {
            Dim::Length => "length",
            Dim::Area => "area",
            Dim::Time => "time",
            Dim::Temperature => "temperature",
            Dim::Pressure => "pressure",
            Dim::Force => "force",
            Dim::Viscosity => "viscosity",
            Dim::Velocity => "velocity",
            Dim::Rate => "rate",
            Dim::Conductivity => "conductivity",
            Dim::GapConductance => "gap conductance",
            Dim::SpecificHeat => "specific heat",
            Dim::Density => "density",
            Dim::FrictionCoefficient => "friction coefficient",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Number(Dim),
    /// Comma-separated numbers of one dimension.
    List(Dim),
    Plain,
    Count,
    Flag,
    Text,
}

#[derive(Debug, Clone, Copy)]
pub struct KeyDoc {
    pub name: &'static str,
    pub kind: Kind,
    pub doc: &'static str,
}

#[derive(Debug, Clone, Copy)]
pub struct SectionDoc {
    pub name: &'static str,
    pub doc: &'static str,
    pub keys: &'static [KeyDoc],
}

const fn key(name: &'static str, kind: Kind, doc: &'static str) -> KeyDoc {
    KeyDoc { name, kind, doc }
}

use Dim::*;
use Kind::*;

pub const SCENARIO: SectionDoc = SectionDoc {
    name: "scenario",
    doc: "tool, charge and run control (defaults: 75 % coverage run)",
    keys: &[
        key("preset", Text, "coverage75 or coverage25; other keys override it"),
        key("materials", Text, "material file, relative to this file; local material sections override it"),
        key("tool_length", Number(Length), "tool length [800 mm]"),
        key("width", Number(Length), "tool and charge width [450 mm]"),
        key("charge_length", Number(Length), "initial charge length [600 mm]"),
        key("initial_gap", Number(Length), "initial gap = stack height [18 mm]"),
        key("t_initial", Number(Temperature), "initial charge temperature [24 C]"),
        key("t_mold", Number(Temperature), "mold temperature [145 C]"),
        key("sensors", List(Length), "sensor positions from the closed end [32, 146, 248, 450, 552, 604, 709 mm]"),
        key("grid_n", Count, "grid nodes [40]"),
        key("closure", Text, "quadratic, linear, hybrid or ibof [ibof]"),
        key("hold_time", Number(Time), "simulated time after fill [2 s]"),
        key("t_max", Number(Time), "hard stop [60 s]"),
        key("output_interval", Number(Time), "output sampling interval [0.05 s]"),
    ],
};

pub const PRESS: SectionDoc = SectionDoc {
    name: "press",
    doc: "closing profile and force control",
    keys: &[
        key("profile_gap", List(Length), "profile gaps, strictly decreasing [10, 0 mm]"),
        key("profile_velocity", List(Velocity), "closing velocity at each profile gap, negative [-1, -1 mm/s]"),
        key("f_max", Number(Force), "force limit and set point [4400 kN]"),
        key("pp", Plain, "proportional gain [0.5]"),
        key("pi", Plain, "integral gain [0.5]"),
        key("period", Number(Time), "controller sampling period [0.1 ms]"),
    ],
};

pub const SOLVER: SectionDoc = SectionDoc {
    name: "solver",
    doc: "time integration",
    keys: &[
        key("rtol", Plain, "relative tolerance [1e-6]"),
        key("atol_v", Number(Velocity), "absolute velocity tolerance [1e-9 m/s]"),
        key("atol_a", Plain, "absolute orientation tolerance [1e-6]"),
        key("dt_initial", Number(Time), "first step [1e-4 s]"),
        key("dt_min", Number(Time), "smallest step [1e-10 s]"),
        key("dt_max", Number(Time), "largest step [0.05 s]"),
        key("max_newton", Count, "Newton iterations per step [12]"),
        key("temperature_terms", Count, "terms of the average-temperature series [100]"),
    ],
};

pub const VISCOSITY: SectionDoc = SectionDoc {
    name: "viscosity",
    doc: "matrix viscosity (defaults: UPPH paste)",
    keys: &[
        key("model", Text, "cross_wlf or newtonian [cross_wlf]"),
        key("eta", Number(Viscosity), "constant viscosity, newtonian model only"),
        key("d1", Number(Viscosity), "reference viscosity [72 kPa_s]"),
        key("gamma0", Number(Rate), "transition shear rate [0.1 1/s]"),
        key("n", Plain, "power-law index [0.385]"),
        key("t_star", Number(Temperature), "reference temperature [40.73 C]"),
        key("alpha1", Plain, "WLF constant [7.94]"),
        key("alpha2", Number(Temperature), "WLF constant [105.96 C]"),
        key("t_min", Number(Temperature), "lower end of the valid range [20 C]"),
        key("t_max", Number(Temperature), "upper end of the valid range [80 C]"),
    ],
};

pub const EOS: SectionDoc = SectionDoc {
    name: "eos",
    doc: "compaction pressure against Hencky strain",
    keys: &[
        key("table", Text, "upph_gf or a two-column CSV (strain, pressure in bar) relative to this file [upph_gf]"),
        key("scale", Plain, "factor on all pressures [1]"),
    ],
};

pub const FRICTION: SectionDoc = SectionDoc {
    name: "friction",
    doc: "power-law mold friction",
    keys: &[
        key("lambda", Number(FrictionCoefficient), "friction coefficient, 0 for frictionless [3 MN_s_per_m3]"),
        key("m", Plain, "power-law index in (0, 1] [0.6]"),
        key("v0", Number(Velocity), "reference velocity [1 mm/s]"),
    ],
};

pub const THERMAL: SectionDoc = SectionDoc {
    name: "thermal",
    doc: "transverse thermal properties",
    keys: &[
        key("kappa", Number(Conductivity), "conductivity [0.163 W_per_m_C]"),
        key("k_gap", Number(GapConductance), "mold gap conductance [403 W_per_m2_C]"),
        key("cp", Number(SpecificHeat), "specific heat [1530 J_per_kg_C]"),
        key("rho0", Number(Density), "uncompacted density [1480 kg_per_m3]"),
    ],
};

pub const SUSPENSION: SectionDoc = SectionDoc {
    name: "suspension",
    doc: "fiber suspension",
    keys: &[
        key("f", Plain, "fiber volume fraction [0.23]"),
        key("r_p", Plain, "aspect ratio [from 25 mm bundles of 0.03 mm2, about 128]"),
        key("c", Plain, "constant of the fiber viscosity [0.1585]"),
        key("xi", Plain, "Jeffery shape factor [1]"),
        key("anisotropic", Flag, "fiber stress contribution on [true]"),
    ],
};

pub const STACK: SectionDoc = SectionDoc {
    name: "stack",
    doc: "generated bundle stack (defaults: 50 x 50 x 4.5 mm at 23 %)",
    keys: &[
        key("origin", List(Length), "lower corner x, y, z [0, 0, 0 mm]"),
        key("extent", List(Length), "edge lengths x, y, z [50, 50, 4.5 mm]"),
        key("volume_fraction", Plain, "target fiber volume fraction [0.23]"),
        key("bundle_length", Number(Length), "bundle length before clipping [25 mm]"),
        key("rest_length", Number(Length), "segment rest length [2.5 mm]"),
        key("area", Number(Area), "bundle cross-section [0.03 mm2]"),
        key("youngs_modulus", Number(Pressure), "bundle Young's modulus [72 GPa]"),
        key("seed", Count, "random seed [1]"),
    ],
};

pub const KINEMATICS: SectionDoc = SectionDoc {
    name: "kinematics",
    doc: "matrix flow carrying the bundles",
    keys: &[
        key("type", Text, "affine or press [affine]"),
        key("dxx", Number(Rate), "elongation rate, affine only [0.5 1/s]"),
        key("scenario", Text, "scenario file driving the press, relative to this file"),
    ],
};

pub const RUN: SectionDoc = SectionDoc {
    name: "run",
    doc: "bundle time stepping",
    keys: &[
        key("duration", Number(Time), "simulated time [1 s]"),
        key("dt", Number(Time), "time step [0.01 s]"),
        key("output_interval", Number(Time), "diagnostics interval [0.1 s]"),
        key("workers", Count, "worker threads [all cores]"),
    ],
};

pub const COUPLING: SectionDoc = SectionDoc {
    name: "coupling",
    doc: "bundle-matrix coupling diagnostics",
    keys: &[
        key("eta", Number(Viscosity), "matrix viscosity [10 kPa_s]"),
        key("search_radius", Number(Length), "neighbor search radius [2.5 mm]"),
        key("sigma", Number(Length), "Gaussian width [1.25 mm]"),
        key("cell_size", Number(Length), "matrix cell edge [1.25 mm]"),
        key("k_d", Plain, "drag factor [1]"),
        key("k_l", Plain, "lift factor [0]"),
        key("contact_cap", Number(Pressure), "contact stress cap [1 MPa]"),
        key("g_min", Number(Length), "smallest effective gap [1 um]"),
    ],
};

pub const HEAT: SectionDoc = SectionDoc {
    name: "heat",
    doc: "heating experiment for fit-thermal",
    keys: &[
        key("height", Number(Length), "stack height [11 mm]"),
        key("t_initial", Number(Temperature), "initial temperature [24 C]"),
        key("t_mold", Number(Temperature), "mold temperature [145 C]"),
        key("nz", Count, "grid nodes [111]"),
        key("max_dt", Number(Time), "largest time step [0.1 s]"),
    ],
};

pub const FIT: SectionDoc = SectionDoc {
    name: "fit",
    doc: "fit controls",
    keys: &[
        key("max_iterations", Count, "simplex iterations [2000]"),
        key("free_t_star", Flag, "fit the viscosity reference temperature too [false]"),
        key("restarts", Count, "simplex restarts for fit-viscosity [3]"),
        key("threshold", Number(Pressure), "minimum sensor pressure difference for fit-friction [5 bar]"),
        key("v0", Number(Velocity), "reference velocity for fit-friction [1 mm/s]"),
    ],
};

pub const MATERIAL_SECTIONS: [&SectionDoc; 5] = [&VISCOSITY, &EOS, &FRICTION, &THERMAL, &SUSPENSION];
pub const SCENARIO_SECTIONS: [&SectionDoc; 8] = [&SCENARIO, &PRESS, &SOLVER, &VISCOSITY, &EOS, &FRICTION, &THERMAL, &SUSPENSION];
pub const BUNDLE_SECTIONS: [&SectionDoc; 4] = [&STACK, &KINEMATICS, &RUN, &COUPLING];
pub const FIT_SECTIONS: [&SectionDoc; 4] = [&HEAT, &FIT, &THERMAL, &VISCOSITY];

/// Human-readable list of every section and key, as shown by `--help`.
pub fn reference() -> String {
    let mut s = String::new();
    let groups: [(&str, &[&SectionDoc]); 3] = [
        ("Scenario and material files", &SCENARIO_SECTIONS),
        ("Bundle run files", &BUNDLE_SECTIONS),
        ("Fit files", &[&HEAT, &FIT]),
    ];
    for (title, sections) in groups {
        let _ = writeln!(s, "{title}:");
        for sec in sections {
            let _ = writeln!(s, "  [{}]  {}", sec.name, sec.doc);
            for k in sec.keys {
                let name = match k.kind {
                    Number(d) | List(d) => format!("{}_<{}>", k.name, d.name()),
                    _ => k.name.to_string(),
                };
                let _ = writeln!(s, "    {name:<32} {}", k.doc);
            }
        }
        s.push('\n');
    }
    s.push_str("Units (suffix = factor to SI):\n");
    for d in [
        Length, Area, Time, Temperature, Pressure, Force, Viscosity, Velocity, Rate, Conductivity, GapConductance,
        SpecificHeat, Density, FrictionCoefficient,
    ] {
        let u: Vec<String> = d.units().iter().map(|(n, f)| format!("{n}={f:e}")).collect();
        let _ = writeln!(s, "  {:<22} {}", d.name(), u.join(" "));
    }
    s.push_str("Fit files also take [thermal] and [viscosity] as starting points.\n");
    s
}

/// A parsed file with its keys resolved against the schema.
#[derive(Debug)]
pub struct ConfigFile {
    pub path: PathBuf,
    sections: BTreeMap<String, Vec<(String, String)>>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(path, &text)
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let ini = Ini::load_from_str_noescape(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut sections: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
        for (name, props) in ini.iter() {
            let Some(name) = name else {
                if let Some((k, _)) = props.iter().next() {
                    return Err(Error::config(path.display().to_string(), k, "key outside any [section]"));
                }
                continue;
            };
            let entry = sections.entry(name.trim().to_string()).or_default();
            for (k, v) in props.iter() {
                entry.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
        Ok(Self {
            path: path.to_path_buf(),
            sections,
        })
    }

    pub fn has_section(&self, name: &str) -> bool {
        self.sections.contains_key(name)
    }

    fn file(&self) -> String {
        self.path.display().to_string()
    }

    /// Rejects sections outside `allowed`.
    fn check_sections(&self, allowed: &[&SectionDoc]) -> Result<()> {
        for name in self.sections.keys() {
            if !allowed.iter().any(|s| s.name == name) {
                let names: Vec<&str> = allowed.iter().map(|s| s.name).collect();
                return Err(Error::config(
                    self.file(),
                    format!("[{name}]"),
                    format!("unknown section; expected one of {}", names.join(", ")),
                ));
            }
        }
        Ok(())
    }

    fn section<'a>(&'a self, doc: &'static SectionDoc) -> Result<Section<'a>> {
        let mut values = BTreeMap::new();
        let props: &[(String, String)] = self.sections.get(doc.name).map_or(&[], |v| v.as_slice());
        for (k, v) in props {
            let (kd, factor) = resolve(doc, k).map_err(|m| Error::config(self.file(), format!("{}.{k}", doc.name), m))?;
            if let Some((prev, _, _)) = values.insert(kd.name, (k.as_str(), v.as_str(), factor)) {
                return Err(Error::config(
                    self.file(),
                    format!("{}.{k}", doc.name),
                    format!("duplicates `{prev}`"),
                ));
            }
        }
        Ok(Section {
            file: self,
            doc,
            values,
        })
    }

    /// Path given in the file, relative to the file's directory.
    fn relative(&self, p: &str) -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.path.parent().unwrap_or(Path::new(".")).join(p)
        }
    }
}

/// Matches `key` to a schema entry and returns it with the unit factor.
fn resolve(doc: &'static SectionDoc, key: &str) -> std::result::Result<(&'static KeyDoc, f64), String> {
    let mut wrong_unit = None;
    for kd in doc.keys {
        match kd.kind {
            Number(d) | List(d) => {
                if kd.name == key {
                    return Err(format!("missing unit suffix; write {key}_{} or another {} unit", d.units()[0].0, d.name()));
                }
                let Some(unit) = key.strip_prefix(kd.name).and_then(|r| r.strip_prefix('_')) else {
                    continue;
                };
                match d.units().iter().find(|(u, _)| *u == unit) {
                    Some(&(_, f)) => return Ok((kd, f)),
                    None => wrong_unit = wrong_unit.or(Some((kd, d, unit))),
                }
            }
            _ if kd.name == key => return Ok((kd, 1.0)),
            _ => {}
        }
    }
    if let Some((kd, d, unit)) = wrong_unit {
        let units: Vec<&str> = d.units().iter().map(|u| u.0).collect();
        return Err(format!(
            "`{unit}` is not a {} unit; write {}_<unit> with one of {}",
            d.name(),
            kd.name,
            units.join(", ")
        ));
    }
    let names: Vec<String> = doc
        .keys
        .iter()
        .map(|k| match k.kind {
            Number(_) | List(_) => format!("{}_<unit>", k.name),
            _ => k.name.to_string(),
        })
        .collect();
    Err(format!("unknown key; [{}] takes {}", doc.name, names.join(", ")))
}

struct Section<'a> {
    file: &'a ConfigFile,
    doc: &'static SectionDoc,
    /// schema name -> (key as written, raw value, factor to SI)
    values: BTreeMap<&'static str, (&'a str, &'a str, f64)>,
}

impl Section<'_> {
    fn err(&self, written: &str, message: impl Into<String>) -> Error {
        Error::config(self.file.file(), format!("{}.{written}", self.doc.name), message)
    }

    fn raw(&self, name: &'static str) -> Option<(&str, &str, f64)> {
        debug_assert!(self.doc.keys.iter().any(|k| k.name == name), "{name} missing from [{}]", self.doc.name);
        self.values.get(name).copied()
    }

    fn number(&self, name: &'static str) -> Result<Option<f64>> {
        let Some((k, v, f)) = self.raw(name) else {
            return Ok(None);
        };
        parse_number(v).map(|x| Some(x * f)).map_err(|m| self.err(k, m))
    }

    fn set(&self, name: &'static str, target: &mut f64) -> Result<()> {
        if let Some(v) = self.number(name)? {
            *target = v;
        }
        Ok(())
    }

    fn list(&self, name: &'static str) -> Result<Option<Vec<f64>>> {
        let Some((k, v, f)) = self.raw(name) else {
            return Ok(None);
        };
        v.split(',')
            .map(|s| parse_number(s).map(|x| x * f))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(Some)
            .map_err(|m| self.err(k, m))
    }

    fn count(&self, name: &'static str) -> Result<Option<u64>> {
        let Some((k, v, _)) = self.raw(name) else {
            return Ok(None);
        };
        v.parse::<u64>()
            .map(Some)
            .map_err(|_| self.err(k, format!("`{v}` is not a non-negative integer")))
    }

    fn set_count(&self, name: &'static str, target: &mut usize) -> Result<()> {
        if let Some(v) = self.count(name)? {
            *target = v as usize;
        }
        Ok(())
    }

    fn flag(&self, name: &'static str) -> Result<Option<bool>> {
        let Some((k, v, _)) = self.raw(name) else {
            return Ok(None);
        };
        match v.to_ascii_lowercase().as_str() {
            "true" | "yes" | "on" | "1" => Ok(Some(true)),
            "false" | "no" | "off" | "0" => Ok(Some(false)),
            _ => Err(self.err(k, format!("`{v}` is not a boolean (true/false)"))),
        }
    }

    fn text(&self, name: &'static str) -> Option<(&str, &str)> {
        self.raw(name).map(|(k, v, _)| (k, v))
    }

    /// Wraps a validation failure of the values read from this section.
    fn check(&self, r: Result<()>) -> Result<()> {
        r.map_err(|e| match e {
            Error::Config { .. } => e,
            other => Error::config(self.file.file(), format!("[{}]", self.doc.name), other.to_string()),
        })
    }
}

fn parse_number(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a finite number")),
    }
}

/// Applies the material sections of `file` on top of `base`.
fn apply_materials(file: &ConfigFile, base: &mut MaterialSet) -> Result<()> {
    let sec = file.section(&VISCOSITY)?;
    let model = match sec.text("model") {
        None => None,
        Some((k, v)) => match v.to_ascii_lowercase().as_str() {
            "cross_wlf" => Some(false),
            "newtonian" => Some(true),
            _ => return Err(sec.err(k, format!("`{v}` is not a viscosity model (cross_wlf or newtonian)"))),
        },
    };
    let eta = sec.number("eta")?;
    let mut cw = match base.viscosity {
        Viscosity::CrossWlf(m) => m,
        Viscosity::Newtonian(_) => ViscosityModel::upph_paste(),
    };
    sec.set("d1", &mut cw.d1)?;
    sec.set("gamma0", &mut cw.gamma0)?;
    sec.set("n", &mut cw.n)?;
    sec.set("t_star", &mut cw.t_star)?;
    sec.set("alpha1", &mut cw.alpha1)?;
    sec.set("alpha2", &mut cw.alpha2)?;
    sec.set("t_min", &mut cw.t_min)?;
    sec.set("t_max", &mut cw.t_max)?;
    let newtonian = model.unwrap_or(matches!(base.viscosity, Viscosity::Newtonian(_)) || eta.is_some());
    base.viscosity = if newtonian {
        let eta = match (eta, base.viscosity) {
            (Some(e), _) => e,
            (None, Viscosity::Newtonian(e)) => e,
            _ => return Err(sec.err("model", "the newtonian model needs eta_<viscosity unit>")),
        };
        Viscosity::Newtonian(eta)
    } else {
        if eta.is_some() {
            return Err(sec.err("eta", "eta applies to the newtonian model only"));
        }
        Viscosity::CrossWlf(cw)
    };
    sec.check(base.viscosity.validate())?;

    let sec = file.section(&EOS)?;
    if let Some((k, v)) = sec.text("table") {
        base.eos = if v.eq_ignore_ascii_case("upph_gf") {
            EquationOfState::upph_gf()
        } else {
            EquationOfState::from_csv(&file.relative(v)).map_err(|e| sec.err(k, e.to_string()))?
        };
    }
    if let Some(f) = sec.number("scale")? {
        if !(f > 0.0) {
            return Err(sec.err("scale", format!("must be positive, got {f}")));
        }
        base.eos = base.eos.scaled(f);
    }

    let sec = file.section(&FRICTION)?;
    sec.set("lambda", &mut base.friction.lambda)?;
    sec.set("m", &mut base.friction.m)?;
    sec.set("v0", &mut base.friction.v0)?;
    sec.check(base.friction.validate())?;

    let sec = file.section(&THERMAL)?;
    sec.set("kappa", &mut base.thermal.kappa)?;
    sec.set("k_gap", &mut base.thermal.k_gap)?;
    sec.set("cp", &mut base.thermal.cp)?;
    sec.set("rho0", &mut base.thermal.rho0)?;
    sec.check(base.thermal.validate())?;

    let sec = file.section(&SUSPENSION)?;
    let s = &mut base.suspension;
    sec.set("f", &mut s.f)?;
    sec.set("r_p", &mut s.r_p)?;
    sec.set("c", &mut s.c)?;
    sec.set("xi", &mut s.xi)?;
    if let Some(a) = sec.flag("anisotropic")? {
        s.anisotropic = a;
    }
    sec.check(s.validate())
}

/// Reads a material file on top of the default material set.
pub fn load_materials(path: &Path) -> Result<MaterialSet> {
    let file = ConfigFile::load(path)?;
    file.check_sections(&MATERIAL_SECTIONS)?;
    let mut m = MaterialSet::upph_gf();
    apply_materials(&file, &mut m)?;
    Ok(m)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    scenario_from(&ConfigFile::load(path)?)
}

pub fn scenario_from(file: &ConfigFile) -> Result<Scenario> {
    file.check_sections(&SCENARIO_SECTIONS)?;
    let sec = file.section(&SCENARIO)?;
    let mut sc = match sec.text("preset") {
        None => Scenario::coverage75(),
        Some((_, v)) if v.eq_ignore_ascii_case("coverage75") => Scenario::coverage75(),
        Some((_, v)) if v.eq_ignore_ascii_case("coverage25") => Scenario::coverage25(),
        Some((k, v)) => return Err(sec.err(k, format!("unknown preset `{v}` (coverage75 or coverage25)"))),
    };
    if let Some((k, v)) = sec.text("materials") {
        let p = file.relative(v);
        let mat = ConfigFile::load(&p).map_err(|e| sec.err(k, e.to_string()))?;
        mat.check_sections(&MATERIAL_SECTIONS)?;
        apply_materials(&mat, &mut sc.materials)?;
    }
    apply_materials(file, &mut sc.materials)?;
    sec.set("tool_length", &mut sc.tool_length)?;
    sec.set("width", &mut sc.width)?;
    sec.set("charge_length", &mut sc.charge_length)?;
    sec.set("initial_gap", &mut sc.initial_gap)?;
    sec.set("t_initial", &mut sc.t_initial)?;
    sec.set("t_mold", &mut sc.t_mold)?;
    if let Some(s) = sec.list("sensors")? {
        sc.sensors = s;
    }
    sec.set_count("grid_n", &mut sc.grid_n)?;
    if let Some((k, v)) = sec.text("closure") {
        sc.closure = v.parse::<ClosureKind>().map_err(|e| sec.err(k, e.to_string()))?;
    }
    sec.set("hold_time", &mut sc.hold_time)?;
    sec.set("t_max", &mut sc.t_max)?;
    sec.set("output_interval", &mut sc.output_interval)?;

    // key-specific messages for the checks users trip over most
    let key_of = |name: &'static str| sec.values.get(name).map_or(name, |v| v.0);
    if !(sc.charge_length > 0.0 && sc.charge_length <= sc.tool_length) {
        return Err(sec.err(
            key_of("charge_length"),
            format!(
                "initial charge length {} m must lie in (0, tool length {} m]",
                sc.charge_length, sc.tool_length
            ),
        ));
    }
    if !(sc.initial_gap > 0.0) {
        return Err(sec.err(key_of("initial_gap"), "must be positive"));
    }
    if let Some(s) = sc.sensors.iter().find(|&&s| !(0.0..=sc.tool_length).contains(&s)) {
        return Err(sec.err(key_of("sensors"), format!("sensor at {s} m lies outside the tool")));
    }

    let sec = file.section(&PRESS)?;
    match (sec.list("profile_gap")?, sec.list("profile_velocity")?) {
        (None, None) => {}
        (Some(g), Some(v)) if g.len() == v.len() => sc.press.profile = g.into_iter().zip(v).collect(),
        (Some(_), Some(_)) => return Err(sec.err("profile_velocity", "needs one value per profile gap")),
        _ => return Err(sec.err("profile_gap", "profile_gap and profile_velocity must be given together")),
    }
    sec.set("f_max", &mut sc.press.f_max)?;
    sec.set("pp", &mut sc.press.pp)?;
    sec.set("pi", &mut sc.press.pi)?;
    sec.set("period", &mut sc.press.period)?;
    sec.check(sc.press.validate())?;

    let sec = file.section(&SOLVER)?;
    let s = &mut sc.solver;
    sec.set("rtol", &mut s.rtol)?;
    sec.set("atol_v", &mut s.atol_v)?;
    sec.set("atol_a", &mut s.atol_a)?;
    sec.set("dt_initial", &mut s.dt_initial)?;
    sec.set("dt_min", &mut s.dt_min)?;
    sec.set("dt_max", &mut s.dt_max)?;
    sec.set_count("max_newton", &mut s.max_newton)?;
    sec.set_count("temperature_terms", &mut s.temperature_terms)?;
    let ok = s.rtol > 0.0 && s.atol_v > 0.0 && s.atol_a > 0.0 && 0.0 < s.dt_min && s.dt_min <= s.dt_initial;
    if !(ok && s.dt_initial <= s.dt_max && s.max_newton > 0 && s.temperature_terms > 0) {
        return Err(sec.err("[solver]", "tolerances must be positive and dt_min <= dt_initial <= dt_max"));
    }

    sc.validate().map_err(|e| Error::config(file.file(), "[scenario]", e.to_string()))?;
    Ok(sc)
}

pub fn load_bundle_run(path: &Path) -> Result<BundleRunConfig> {
    let file = ConfigFile::load(path)?;
    file.check_sections(&BUNDLE_SECTIONS)?;
    let mut cfg = BundleRunConfig::elongation();

    let sec = file.section(&STACK)?;
    let st = &mut cfg.stack;
    let xyz = |name: &'static str| -> Result<Option<Point>> {
        match sec.list(name)? {
            None => Ok(None),
            Some(v) if v.len() == 3 => Ok(Some(Point::new(v[0], v[1], v[2]))),
            Some(_) => Err(sec.err(sec.values[name].0, "needs three values x, y, z")),
        }
    };
    let origin = xyz("origin")?.unwrap_or(st.region.min);
    let extent = xyz("extent")?.unwrap_or(st.region.extent());
    st.region = Aabb::new(origin, origin + extent);
    sec.set("volume_fraction", &mut st.volume_fraction)?;
    sec.set("bundle_length", &mut st.bundle_length)?;
    sec.set("rest_length", &mut st.params.rest_length)?;
    sec.set("area", &mut st.params.area)?;
    sec.set("youngs_modulus", &mut st.params.youngs_modulus)?;
    if let Some(s) = sec.count("seed")? {
        st.seed = s;
    }
    sec.check(st.validate())?;

    let sec = file.section(&KINEMATICS)?;
    let dxx = sec.number("dxx")?;
    let kind = sec.text("type").map(|(_, v)| v.to_ascii_lowercase());
    let scenario = sec.text("scenario");
    match kind.as_deref() {
        None | Some("affine") => {
            if scenario.is_some() {
                return Err(sec.err("scenario", "applies to type = press only"));
            }
            cfg.kinematics = Kinematics::Affine { dxx: dxx.unwrap_or(0.5) };
        }
        Some("press") => {
            if dxx.is_some() {
                return Err(sec.err(sec.values["dxx"].0, "applies to type = affine only"));
            }
            let sc = match scenario {
                Some((k, v)) => load_scenario(&file.relative(v)).map_err(|e| sec.err(k, e.to_string()))?,
                None => Scenario::coverage75(),
            };
            cfg.kinematics = Kinematics::Press(Box::new(sc));
        }
        Some(other) => return Err(sec.err("type", format!("unknown kinematics `{other}` (affine or press)"))),
    }

    let sec = file.section(&RUN)?;
    sec.set("duration", &mut cfg.duration)?;
    sec.set("dt", &mut cfg.dt)?;
    sec.set("output_interval", &mut cfg.output_interval)?;
    if let Some(w) = sec.count("workers")? {
        cfg.workers = Some(w as usize);
    }

    let sec = file.section(&COUPLING)?;
    let c: &mut CouplingParams = &mut cfg.coupling;
    sec.set("eta", &mut c.eta)?;
    sec.set("search_radius", &mut c.search_radius)?;
    sec.set("sigma", &mut c.sigma)?;
    sec.set("cell_size", &mut c.cell_size)?;
    sec.set("k_d", &mut c.drag.k_d)?;
    sec.set("k_l", &mut c.drag.k_l)?;
    sec.set("contact_cap", &mut c.contact.cap)?;
    sec.set("g_min", &mut c.contact.g_min)?;
    sec.check(c.validate())?;

    cfg.validate().map_err(|e| Error::config(file.file(), "[run]", e.to_string()))?;
    Ok(cfg)
}

/// Settings of the characterization fits.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub heat: HeatSetup,
    pub thermal_guess: crate::material::ThermalProps,
    pub viscosity: ViscosityFitOptions,
    pub simplex: NelderMeadOptions,
    /// Pressure difference threshold for friction samples (Pa).
    pub threshold: f64,
    /// Reference velocity of the friction law (m/s).
    pub v0: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            heat: HeatSetup::stack_on_hot_mold(),
            thermal_guess: crate::material::ThermalProps::upph_gf(),
            viscosity: ViscosityFitOptions::default(),
            simplex: NelderMeadOptions::default(),
            threshold: 5.0 * crate::material::BAR,
            v0: 1e-3,
        }
    }
}

pub fn load_fit(path: &Path) -> Result<FitConfig> {
    let file = ConfigFile::load(path)?;
    file.check_sections(&FIT_SECTIONS)?;
    let mut cfg = FitConfig::default();

    let sec = file.section(&HEAT)?;
    sec.set("height", &mut cfg.heat.height)?;
    sec.set("t_initial", &mut cfg.heat.t_initial)?;
    sec.set("t_mold", &mut cfg.heat.t_mold)?;
    sec.set_count("nz", &mut cfg.heat.nz)?;
    sec.set("max_dt", &mut cfg.heat.max_dt)?;
    sec.check(cfg.heat.validate())?;

    let mut m = MaterialSet::upph_gf();
    apply_materials(&file, &mut m)?;
    cfg.thermal_guess = m.thermal;
    match m.viscosity {
        Viscosity::CrossWlf(g) => cfg.viscosity.guess = g,
        Viscosity::Newtonian(_) => {
            return Err(Error::config(file.file(), "viscosity.model", "fits start from a cross_wlf model"))
        }
    }

    let sec = file.section(&FIT)?;
    sec.set_count("max_iterations", &mut cfg.simplex.max_iter)?;
    cfg.viscosity.simplex.max_iter = cfg.simplex.max_iter;
    if let Some(f) = sec.flag("free_t_star")? {
        cfg.viscosity.free_t_star = f;
    }
    sec.set_count("restarts", &mut cfg.viscosity.restarts)?;
    sec.set("threshold", &mut cfg.threshold)?;
    sec.set("v0", &mut cfg.v0)?;
    if !(cfg.threshold >= 0.0 && cfg.v0 > 0.0 && cfg.simplex.max_iter > 0) {
        return Err(sec.err("[fit]", "threshold must be >= 0, v0 and max_iterations positive"));
    }
    Ok(cfg)
}

/// What a configuration file describes, judged by its sections.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    Scenario,
    Materials,
    Bundles,
    Fit,
}

pub fn detect_kind(path: &Path) -> Result<FileKind> {
    let f = ConfigFile::load(path)?;
    let any = |s: &[&SectionDoc]| s.iter().any(|d| f.has_section(d.name));
    Ok(if any(&BUNDLE_SECTIONS) {
        FileKind::Bundles
    } else if any(&[&HEAT, &FIT]) {
        FileKind::Fit
    } else if any(&[&SCENARIO, &PRESS, &SOLVER]) {
        FileKind::Scenario
    } else {
        FileKind::Materials
    })
}
