//! Transverse heat conduction in a stack on a heated mold, and the inverse
//! fit of conductivity and gap conductance.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::material::ThermalProps;
use crate::optim::{nelder_mead, NelderMeadOptions};

/// Temperature profile through the thickness at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatField {
    pub t: f64,
    /// Node positions from the mold contact (z = 0) to the free side (m).
    pub z: Vec<f64>,
    pub temp: Vec<f64>,
}

impl HeatField {
    /// Linear interpolation at depth `z` (clamped to the stack).
    pub fn temperature_at(&self, z: f64) -> f64 {
        let n = self.z.len();
        let h = self.z[n - 1];
        let s = (z / h).clamp(0.0, 1.0) * (n - 1) as f64;
        let i = (s.floor() as usize).min(n - 2);
        let w = s - i as f64;
        self.temp[i] * (1.0 - w) + self.temp[i + 1] * w
    }

    /// Stored heat ∫ ρ cp T dz per unit area (J/m²), consistent with the
    /// finite-volume discretization.
    pub fn heat_content(&self, props: &ThermalProps) -> f64 {
        let dz = self.z[1] - self.z[0];
        let n = self.temp.len();
        let interior: f64 = self.temp[1..n - 1].iter().sum();
        props.heat_capacity() * dz * (interior + 0.5 * (self.temp[0] + self.temp[n - 1]))
    }
}

/// Geometry and boundary temperatures of a heating experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatSetup {
    /// Stack height (m).
    pub height: f64,
    /// Initial uniform temperature (°C).
    pub t_initial: f64,
    /// Mold temperature (°C).
    pub t_mold: f64,
    pub nz: usize,
    /// Largest time step (s).
    pub max_dt: f64,
}

impl HeatSetup {
    /// Ten 1.1 mm sheets at room temperature placed on a 145 °C mold.
    pub fn stack_on_hot_mold() -> Self {
        Self {
            height: 11.0e-3,
            t_initial: 24.0,
            t_mold: 145.0,
            nz: 111,
            max_dt: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nz < 10 {
            return Err(Error::InvalidGrid(format!("nz = {} but at least 10 nodes are needed", self.nz)));
        }
        if !(self.height > 0.0) || !(self.max_dt > 0.0) {
            return Err(Error::InvalidInput("height and max_dt must be positive".into()));
        }
        Ok(())
    }
}

/// Backward-Euler finite-volume solver. Node 0 touches the mold through the
/// gap conductance; the last node is insulated.
#[derive(Debug, Clone)]
pub struct HeatSolver {
    props: ThermalProps,
    setup: HeatSetup,
    dz: f64,
    t: f64,
    temp: Vec<f64>,
}

impl HeatSolver {
    pub fn new(props: ThermalProps, setup: HeatSetup) -> Result<Self> {
        props.validate()?;
        setup.validate()?;
        Ok(Self {
            props,
            setup,
            dz: setup.height / (setup.nz - 1) as f64,
            t: 0.0,
            temp: vec![setup.t_initial; setup.nz],
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn field(&self) -> HeatField {
        HeatField {
            t: self.t,
            z: (0..self.setup.nz).map(|i| i as f64 * self.dz).collect(),
            temp: self.temp.clone(),
        }
    }

    /// Advances by `dt` and returns the heat that entered through the mold
    /// side during the step (J/m²).
    pub fn step(&mut self, dt: f64) -> f64 {
        let n = self.temp.len();
        let c = self.props.heat_capacity() * self.dz / dt;
        let g = self.props.kappa / self.dz;
        let k = self.props.k_gap;
        // tridiagonal system: sub a, diag b, super cc, rhs d
        let mut a = vec![-g; n];
        let mut b = vec![c + 2.0 * g; n];
        let mut cc = vec![-g; n];
        let mut d: Vec<f64> = self.temp.iter().map(|&t| c * t).collect();
        b[0] = 0.5 * c + g + k;
        d[0] = 0.5 * c * self.temp[0] + k * self.setup.t_mold;
        b[n - 1] = 0.5 * c + g;
        d[n - 1] = 0.5 * c * self.temp[n - 1];
        a[0] = 0.0;
        cc[n - 1] = 0.0;
        // Thomas algorithm
        for i in 1..n {
            let m = a[i] / b[i - 1];
            b[i] -= m * cc[i - 1];
            d[i] -= m * d[i - 1];
        }
        self.temp[n - 1] = d[n - 1] / b[n - 1];
        for i in (0..n - 1).rev() {
            self.temp[i] = (d[i] - cc[i] * self.temp[i + 1]) / b[i];
        }
        self.t += dt;
        k * (self.setup.t_mold - self.temp[0]) * dt
    }

    /// Steps to `t_end` with at most `max_dt` per step, landing exactly on it.
    pub fn advance_to(&mut self, t_end: f64) {
        let remaining = t_end - self.t;
        if remaining <= 0.0 {
            return;
        }
        let steps = (remaining / self.setup.max_dt).ceil().max(1.0) as usize;
        let dt = remaining / steps as f64;
        for _ in 0..steps {
            self.step(dt);
        }
        self.t = t_end;
    }
}

/// Temperature fields at each of `output_times` (ascending, ≥ 0).
pub fn solve_heat_1d(props: &ThermalProps, setup: &HeatSetup, output_times: &[f64]) -> Result<Vec<HeatField>> {
    if output_times.windows(2).any(|w| w[1] < w[0]) || output_times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidInput("output times must be non-negative and ascending".into()));
    }
    let mut solver = HeatSolver::new(*props, *setup)?;
    Ok(output_times
        .iter()
        .map(|&t| {
            solver.advance_to(t);
            solver.field()
        })
        .collect())
}

/// Series estimate of the thickness-averaged temperature of a charge between
/// two mold halves at `t_mold`, starting uniform at `t_initial`.
///
/// `n_terms` counts the non-vanishing (odd) terms of the series. The decay
/// uses the product of initial gap `h0` and current gap `h`.
pub fn average_temperature(
    props: &ThermalProps,
    t_initial: f64,
    t_mold: f64,
    h0: f64,
    h: f64,
    t: f64,
    n_terms: usize,
) -> f64 {
    let rate = PI * PI * props.kappa * t / (h0 * h * props.heat_capacity());
    let mut sum = 0.0;
    // small terms first
    for j in (0..n_terms).rev() {
        let q = (2 * j + 1) as f64;
        sum += -2.0 / (q * q) * (-q * q * rate).exp();
    }
    t_mold + (t_mold - t_initial) * 4.0 / (PI * PI) * sum
}

/// Temperatures measured at fixed depths on a shared time base.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalMeasurement {
    pub times: Vec<f64>,
    /// (depth from the mold side in m, temperature per time in °C)
    pub sensors: Vec<(f64, Vec<f64>)>,
}

impl ThermalMeasurement {
    pub fn validate(&self) -> Result<()> {
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("measurement times must be strictly increasing".into()));
        }
        let mut depths: Vec<f64> = self.sensors.iter().map(|s| s.0).collect();
        depths.sort_by(f64::total_cmp);
        depths.dedup();
        if depths.len() < 2 {
            return Err(Error::InvalidInput("at least two sensors at distinct depths are needed".into()));
        }
        for (depth, temps) in &self.sensors {
            if temps.len() != self.times.len() {
                return Err(Error::InvalidInput(format!(
                    "sensor at {depth} m has {} samples for {} times",
                    temps.len(),
                    self.times.len()
                )));
            }
        }
        Ok(())
    }

    /// Synthetic measurement from the forward model.
    pub fn simulate(props: &ThermalProps, setup: &HeatSetup, times: &[f64], depths: &[f64]) -> Result<Self> {
        let fields = solve_heat_1d(props, setup, times)?;
        Ok(Self {
            times: times.to_vec(),
            sensors: depths
                .iter()
                .map(|&d| (d, fields.iter().map(|f| f.temperature_at(d)).collect()))
                .collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalFit {
    pub kappa: f64,
    pub k_gap: f64,
    /// Sum of squared temperature errors (°C²).
    pub residual: f64,
    pub rms: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Squared temperature error of the forward model against `data`.
pub fn thermal_residual(props: &ThermalProps, setup: &HeatSetup, data: &ThermalMeasurement) -> Result<f64> {
    let fields = solve_heat_1d(props, setup, &data.times)?;
    let mut sum = 0.0;
    for (depth, temps) in &data.sensors {
        for (field, measured) in fields.iter().zip(temps) {
            sum += (field.temperature_at(*depth) - measured).powi(2);
        }
    }
    Ok(sum)
}

/// Fits conductivity and gap conductance by simplex descent in log space,
/// starting from `guess.kappa` and `guess.k_gap`; cp and rho0 are held.
pub fn fit_thermal(
    data: &ThermalMeasurement,
    setup: &HeatSetup,
    guess: &ThermalProps,
    opts: &NelderMeadOptions,
) -> Result<ThermalFit> {
    data.validate()?;
    guess.validate()?;
    setup.validate()?;
    let props_at = |x: &[f64]| ThermalProps {
        kappa: x[0].exp(),
        k_gap: x[1].exp(),
        ..*guess
    };
    let objective = |x: &[f64]| thermal_residual(&props_at(x), setup, data).unwrap_or(f64::INFINITY);
    let x0 = [guess.kappa.ln(), guess.k_gap.ln()];
    // relative tolerance on logs is meaningless near zero, so step in absolute terms
    let opts = NelderMeadOptions {
        initial_step: 0.2,
        ..*opts
    };
    let m = nelder_mead(objective, &x0, &opts);
    let best = props_at(&m.x);
    let samples = (data.times.len() * data.sensors.len()) as f64;
    Ok(ThermalFit {
        kappa: best.kappa,
        k_gap: best.k_gap,
        residual: m.value,
        rms: (m.value / samples).sqrt(),
        iterations: m.iterations,
        converged: m.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn setup() -> HeatSetup {
        HeatSetup::stack_on_hot_mold()
    }

    #[test]
    fn rejects_coarse_grid() {
        let s = HeatSetup { nz: 9, ..setup() };
        assert!(matches!(solve_heat_1d(&ThermalProps::upph_gf(), &s, &[1.0]), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn initial_field_is_uniform() {
        let f = &solve_heat_1d(&ThermalProps::upph_gf(), &setup(), &[0.0]).unwrap()[0];
        assert!(f.temp.iter().all(|&t| t == 24.0));
    }

    #[test]
    fn reaches_mold_temperature() {
        let p = ThermalProps::upph_gf();
        let s = setup();
        let t_long = 10.0 * s.height * s.height * p.heat_capacity() / p.kappa;
        let f = &solve_heat_1d(&p, &HeatSetup { max_dt: 10.0, ..s }, &[t_long]).unwrap()[0];
        assert!(f.temp.iter().all(|&t| (t - 145.0).abs() < 0.5), "{:?}", f.temp.last());
    }

    #[test]
    fn profiles_are_ordered_and_bounded() {
        let fields = solve_heat_1d(&ThermalProps::upph_gf(), &setup(), &[0.5, 5.0, 60.0, 300.0]).unwrap();
        for f in &fields {
            for w in f.temp.windows(2) {
                // far nodes may still sit at the initial value to rounding
                assert!(w[0] > w[1] || (w[0] == w[1] && w[0] - 24.0 < 1e-9));
            }
            assert!(f.temp.iter().all(|&t| (24.0..=145.0).contains(&t)));
        }
    }

    #[test]
    fn matches_fine_explicit_scheme() {
        // forward Euler on a finer grid, central differences, ghost-node boundaries
        let p = ThermalProps::upph_gf();
        let s = setup();
        let n = 221;
        let dz = s.height / (n - 1) as f64;
        let alpha = p.kappa / p.heat_capacity();
        let dt = 0.2 * dz * dz / alpha;
        let mut t = vec![s.t_initial; n];
        let t_end = 30.0;
        let steps = (t_end / dt).ceil() as usize;
        let dt = t_end / steps as f64;
        for _ in 0..steps {
            let mut next = t.clone();
            for i in 0..n {
                let left = if i == 0 { t[1] + 2.0 * dz * p.k_gap / p.kappa * (s.t_mold - t[0]) } else { t[i - 1] };
                let right = if i == n - 1 { t[n - 2] } else { t[i + 1] };
                next[i] = t[i] + alpha * dt / (dz * dz) * (left - 2.0 * t[i] + right);
            }
            t = next;
        }
        let implicit = &solve_heat_1d(&p, &HeatSetup { max_dt: 0.01, ..s }, &[t_end]).unwrap()[0];
        for (i, &ti) in implicit.temp.iter().enumerate() {
            assert_abs_diff_eq!(ti, t[2 * i], epsilon = 0.1);
        }
    }

    #[test]
    fn discrete_energy_balance() {
        let p = ThermalProps::upph_gf();
        let mut solver = HeatSolver::new(p, setup()).unwrap();
        let e0 = solver.field().heat_content(&p);
        let mut influx = 0.0;
        for _ in 0..600 {
            influx += solver.step(0.1);
        }
        let gained = solver.field().heat_content(&p) - e0;
        assert!(((gained - influx) / influx).abs() < 1e-10);
    }

    #[test]
    fn average_temperature_limits() {
        let p = ThermalProps::upph_gf();
        let h = 11e-3;
        assert_abs_diff_eq!(average_temperature(&p, 24.0, 145.0, h, h, 0.0, 100_000), 24.0, epsilon = 0.1);
        assert_abs_diff_eq!(average_temperature(&p, 24.0, 145.0, h, h, 1e6, 100), 145.0, epsilon = 1e-9);
        let mut last = f64::NEG_INFINITY;
        for i in 0..200 {
            let v = average_temperature(&p, 24.0, 145.0, h, h, i as f64, 100);
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn average_temperature_series_converged() {
        let p = ThermalProps::upph_gf();
        let h = 11e-3;
        let rate = PI * PI * p.kappa * 60.0 / (h * h * p.heat_capacity());
        let mut reference = 0.0;
        for q in 1..=4000 {
            let q = q as f64;
            reference += ((q * PI).cos() - 1.0) / (q * q) * (-q * q * rate).exp();
        }
        let reference = 145.0 + 121.0 * 4.0 / (PI * PI) * reference;
        assert_abs_diff_eq!(average_temperature(&p, 24.0, 145.0, h, h, 60.0, 100), reference, epsilon = 1e-6);
    }

    #[test]
    fn fit_from_exact_guess_stays_put() {
        let p = ThermalProps::upph_gf();
        let s = HeatSetup { max_dt: 0.5, ..setup() };
        let times: Vec<f64> = (1..=60).map(|i| 5.0 * i as f64).collect();
        let depths: Vec<f64> = (0..8).map(|i| 1.1e-3 * i as f64).collect();
        let data = ThermalMeasurement::simulate(&p, &s, &times, &depths).unwrap();
        assert!(thermal_residual(&p, &s, &data).unwrap() < 1e-20);
        let fit = fit_thermal(&data, &s, &p, &NelderMeadOptions { max_iter: 50, ..Default::default() }).unwrap();
        assert!((fit.kappa / 0.163 - 1.0).abs() < 1e-3);
        assert!((fit.k_gap / 403.0 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn single_depth_rejected() {
        let data = ThermalMeasurement { times: vec![1.0, 2.0], sensors: vec![(0.0, vec![30.0, 40.0])] };
        assert!(fit_thermal(&data, &setup(), &ThermalProps::upph_gf(), &NelderMeadOptions::default()).is_err());
    }
}
