//! Least-squares fit of the Cross-WLF viscosity model to rheometer data.

use crate::error::{Error, Result};
use crate::material::ViscosityModel;
use crate::optim::{nelder_mead, NelderMeadOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViscosityPoint {
    /// °C
    pub temp: f64,
    /// 1/s
    pub gammadot: f64,
    /// Pa s
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViscosityFitOptions {
    /// Starting point; its gamma0 and temperature range are kept.
    pub guess: ViscosityModel,
    /// Fit the reference temperature too. A shift of T* can be absorbed
    /// exactly by D1, alpha1 and alpha2, so a free T* only makes sense when
    /// the fitted curves matter and not the individual parameters.
    pub free_t_star: bool,
    pub simplex: NelderMeadOptions,
    /// Number of simplex restarts from the best point found.
    pub restarts: usize,
}

impl Default for ViscosityFitOptions {
    fn default() -> Self {
        Self {
            guess: ViscosityModel::upph_paste(),
            free_t_star: false,
            simplex: NelderMeadOptions {
                x_rel_tol: 1e-9,
                ..Default::default()
            },
            restarts: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViscosityFit {
    pub model: ViscosityModel,
    /// Σ ((eta_model - eta) / eta)²
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Normalized squared error of `model` against `data`; +inf where undefined.
pub fn viscosity_residual(model: &ViscosityModel, data: &[ViscosityPoint]) -> f64 {
    if !(model.n > 0.0 && model.n < 1.0 && model.d1 > 0.0) {
        return f64::INFINITY;
    }
    data.iter()
        .map(|p| match model.viscosity(p.gammadot, p.temp) {
            Ok(eta) => ((eta - p.eta) / p.eta).powi(2),
            Err(_) => f64::INFINITY,
        })
        .sum()
}

fn check_coverage(data: &[ViscosityPoint]) -> Result<()> {
    if data.iter().any(|p| !(p.eta > 0.0) || !(p.gammadot >= 0.0)) {
        return Err(Error::InvalidInput("viscosities must be positive and shear rates non-negative".into()));
    }
    let mut temps: Vec<f64> = data.iter().map(|p| p.temp).collect();
    temps.sort_by(f64::total_cmp);
    temps.dedup();
    if temps.len() < 2 {
        return Err(Error::InvalidInput(
            "at least two temperatures are required to fit the temperature shift".into(),
        ));
    }
    for t in &temps {
        let mut rates: Vec<f64> = data.iter().filter(|p| p.temp == *t).map(|p| p.gammadot).collect();
        rates.sort_by(f64::total_cmp);
        rates.dedup();
        if rates.len() < 4 {
            return Err(Error::InvalidInput(format!(
                "temperature {t} °C has {} distinct shear rates, at least 4 are required",
                rates.len()
            )));
        }
    }
    Ok(())
}

/// Fits (D1, n, alpha1, alpha2) and optionally T*, holding gamma0.
pub fn fit_viscosity(data: &[ViscosityPoint], opts: &ViscosityFitOptions) -> Result<ViscosityFit> {
    check_coverage(data)?;
    let g = opts.guess;
    let model_at = |x: &[f64]| ViscosityModel {
        d1: x[0].exp(),
        n: x[1],
        alpha1: x[2],
        alpha2: x[3],
        t_star: if opts.free_t_star { x[4] } else { g.t_star },
        ..g
    };
    let objective = |x: &[f64]| viscosity_residual(&model_at(x), data);
    let mut x = vec![g.d1.ln(), g.n, g.alpha1, g.alpha2];
    if opts.free_t_star {
        x.push(g.t_star);
    }
    if !objective(&x).is_finite() {
        return Err(Error::InvalidInput("the initial guess is undefined for the data".into()));
    }
    let mut iterations = 0;
    let mut m = nelder_mead(objective, &x, &opts.simplex);
    iterations += m.iterations;
    for _ in 0..opts.restarts {
        let again = nelder_mead(objective, &m.x, &opts.simplex);
        iterations += again.iterations;
        let stalled = again.value >= m.value * (1.0 - 1e-12);
        m = if again.value <= m.value { again } else { m };
        if stalled {
            break;
        }
    }
    Ok(ViscosityFit {
        model: model_at(&m.x),
        residual: m.value,
        iterations,
        converged: m.converged,
    })
}
