//! Time integration: backward Euler + Newton with a banded finite-difference
//! Jacobian, step doubling for error control, explicit front and gap updates.

use std::cell::RefCell;

use super::banded::{BandLu, BandMatrix};
use super::controller::PressController;
use super::discretization::{
    equilibrium_residual, force_from_sigma, node_density, node_sigma_zz, pack, pressures_from_sigma, residual, unpack, Frame, AXX, AXY, AYY, RHO, VARS,
    VEL,
};
use super::output::{OutputRecord, RunError, SimulationOutput};
use super::{MacroState, Scenario};
use crate::error::{Error, Result};
#[cfg(test)]
use crate::material::Viscosity;

/// Counters of one `advance` call.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepReport {
    pub accepted: usize,
    pub rejected: usize,
    /// The front reached the tool end during this call.
    pub filled: bool,
}

/// Owns the state of one run and advances it in time.
#[derive(Debug, Clone)]
pub struct MacroSolver {
    scenario: Scenario,
    state: MacroState,
    eta2_ratio: f64,
    dt_next: f64,
    pub accepted: usize,
    pub rejected: usize,
    /// Time at which the front reached the tool end.
    pub fill_time: Option<f64>,
    /// Gap rate and front condition the velocity was last balanced for.
    balanced: Option<(f64, bool)>,
    /// Factorized step Jacobians of recent step sizes, reused while Newton
    /// keeps converging.
    jacobians: RefCell<Vec<(f64, BandLu)>>,
}

struct Solved {
    y: Vec<f64>,
    front: f64,
    gap: f64,
    lu: BandLu,
}

impl MacroSolver {
    pub fn new(scenario: Scenario) -> Result<Self> {
        scenario.validate()?;
        let eta2_ratio = scenario.materials.suspension.eta2_ratio()?;
        let state = MacroState::initial(&scenario);
        let fill_time = state.filled.then_some(0.0);
        let dt_next = scenario.solver.dt_initial;
        Ok(Self {
            scenario,
            state,
            eta2_ratio,
            dt_next,
            accepted: 0,
            rejected: 0,
            fill_time,
            balanced: None,
            jacobians: RefCell::new(Vec::new()),
        })
    }

    /// Starts from an arbitrary state (fields must match the grid).
    pub fn with_state(scenario: Scenario, state: MacroState) -> Result<Self> {
        let mut s = Self::new(scenario)?;
        if state.nodes() != s.scenario.grid_n || state.rho.len() + 1 != state.nodes() {
            return Err(Error::InvalidGrid(format!(
                "state has {} nodes and {} cells, scenario grid_n is {}",
                state.nodes(),
                state.rho.len(),
                s.scenario.grid_n
            )));
        }
        s.state = state;
        Ok(s)
    }

    pub fn state(&self) -> &MacroState {
        &self.state
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Sets the gap rate used by subsequent steps (m/s).
    pub fn set_gap_rate(&mut self, hdot: f64) {
        self.state.hdot = hdot;
    }

    pub fn temperature(&self) -> f64 {
        self.scenario.average_temperature(self.state.t, self.state.gap)
    }

    /// σzz per node (Pa).
    pub fn sigma_zz(&self) -> Vec<f64> {
        node_sigma_zz(&self.state, &self.scenario, self.temperature()).expect("suspension validated at construction")
    }

    pub fn force(&self) -> f64 {
        force_from_sigma(&self.sigma_zz(), self.state.front, self.scenario.width)
    }

    fn weights(&self, y: &[f64], other: &[f64]) -> Vec<f64> {
        let s = &self.scenario.solver;
        let rho_scale = self.scenario.materials.thermal.rho0;
        y.iter()
            .zip(other)
            .enumerate()
            .map(|(k, (a, b))| {
                let mag = a.abs().max(b.abs());
                let atol = match k % VARS {
                    RHO => s.rtol * rho_scale,
                    VEL => s.atol_v,
                    _ => s.atol_a,
                };
                atol + s.rtol * mag
            })
            .collect()
    }

    /// One backward-Euler solve from `old` over `dt` with the front moving at
    /// `front_rate`.
    #[allow(clippy::too_many_arguments)]
    fn solve_step(
        &self,
        old: &[f64],
        front_old: f64,
        gap_old: f64,
        t_old: f64,
        dt: f64,
        front_rate: f64,
        filled: bool,
    ) -> Option<Solved> {
        let sc = &self.scenario;
        let front = if filled { front_old } else { (front_old + front_rate * dt).min(sc.tool_length) };
        let gap = gap_old + self.state.hdot * dt;
        if !(gap > 0.0) {
            return None;
        }
        let frame = Frame {
            front,
            front_rate: if filled { 0.0 } else { front_rate },
            gap,
            hdot: self.state.hdot,
            temp: sc.average_temperature(t_old + dt, gap),
            filled,
        };
        let m = old.len();
        let n = m / VARS;
        let eval = |y: &[f64], out: &mut [f64]| residual(sc, self.eta2_ratio, &frame, y, old, front_old, gap_old, dt, out);

        let mut y = old.to_vec();
        if filled {
            y[VARS * (n - 1) + VEL] = 0.0;
        }
        let cached = self.jacobians.borrow().iter().find(|(h, _)| *h == dt).map(|(_, lu)| lu.clone());
        let (y, lu) = self.newton(&eval, y, old, sc.solver.max_newton, cached)?;
        let mut cache = self.jacobians.borrow_mut();
        cache.retain(|(h, _)| *h != dt);
        cache.push((dt, lu.clone()));
        if cache.len() > 2 {
            cache.remove(0);
        }
        Some(Solved { y, front, gap, lu })
    }

    /// Damped Newton iteration on `eval` from `y`, converged on the weighted
    /// update norm. Returns the solution and the last factorized Jacobian.
    fn newton<F>(
        &self,
        eval: &F,
        mut y: Vec<f64>,
        reference: &[f64],
        max_iter: usize,
        start: Option<BandLu>,
    ) -> Option<(Vec<f64>, BandLu)>
    where
        F: Fn(&[f64], &mut [f64]),
    {
        let m = y.len();
        let mut r = vec![0.0; m];
        let mut lu = start;
        let mut fresh = false;
        let mut last_norm = f64::INFINITY;
        let solve = |lu: &BandLu, r: &[f64]| {
            let mut delta: Vec<f64> = r.iter().map(|x| -x).collect();
            lu.solve(&mut delta);
            delta
        };
        eval(&y, &mut r);
        for _ in 0..max_iter {
            if r.iter().any(|x| !x.is_finite()) {
                return None;
            }
            if lu.is_none() {
                lu = Some(jacobian(eval, &y, &r)?.factor()?);
                fresh = true;
            }
            let jac = lu.as_ref()?;
            let delta = solve(jac, &r);
            let w = self.weights(&y, reference);
            let norm = self.norm(&delta, &w);
            if !norm.is_finite() {
                return None;
            }
            if norm < 1e-2 {
                for (a, b) in y.iter_mut().zip(&delta) {
                    *a += b;
                }
                return Some((y, lu?));
            }
            // damped step: accept when the next simplified update shrinks
            let mut lambda = 1.0;
            let mut accepted = false;
            let mut y_try = y.clone();
            let mut r_try = vec![0.0; m];
            while lambda >= 1.0 / 64.0 {
                for ((t, a), b) in y_try.iter_mut().zip(&y).zip(&delta) {
                    *t = a + lambda * b;
                }
                eval(&y_try, &mut r_try);
                if r_try.iter().all(|x| x.is_finite()) {
                    let next = self.norm(&solve(jac, &r_try), &w);
                    if next < (1.0 - lambda / 4.0) * norm {
                        accepted = true;
                        break;
                    }
                }
                lambda /= 2.0;
            }
            if accepted {
                y = y_try;
                r = r_try;
                // slow contraction means the Jacobian is out of date
                if !fresh && (lambda < 1.0 || norm > 0.1 * last_norm) {
                    lu = None;
                }
                last_norm = norm;
                fresh = false;
            } else if fresh {
                return None;
            } else {
                lu = None;
            }
        }
        None
    }

    /// Brings the velocity field into inertia-free balance with the current
    /// density, orientation and boundary data. Called when the gap rate or
    /// the front condition jumps, so that steps do not have to resolve the
    /// inertial transient. Leaves the state untouched if Newton fails.
    fn equilibrate(&mut self) {
        let sc = &self.scenario;
        let st = &self.state;
        let n = st.nodes();
        let frame = Frame {
            front: st.front,
            front_rate: if st.filled { 0.0 } else { st.v[n - 1].max(0.0) },
            gap: st.gap,
            hdot: st.hdot,
            temp: sc.average_temperature(st.t, st.gap),
            filled: st.filled,
        };
        let frozen = pack(st);
        let eval = |y: &[f64], out: &mut [f64]| equilibrium_residual(sc, self.eta2_ratio, &frame, y, &frozen, out);
        let mut y = frozen.clone();
        if st.filled {
            y[VARS * (n - 1) + VEL] = 0.0;
        }
        if let Some((y, _)) = self.newton(&eval, y, &frozen, 4 * sc.solver.max_newton, None) {
            let v: Vec<f64> = (0..n).map(|i| y[VARS * i + VEL]).collect();
            self.state.v = v;
        }
        self.balanced = Some((self.state.hdot, self.state.filled));
    }

    fn norm(&self, delta: &[f64], w: &[f64]) -> f64 {
        delta.iter().zip(w).map(|(d, w)| (d / w).abs()).fold(0.0, f64::max)
    }

    /// Step-doubling error filtered through the step Jacobian so that
    /// components relaxing much faster than the step do not count.
    fn filtered_error(&self, full: &Solved, halves: &Solved, old: &[f64]) -> f64 {
        let rho0 = self.scenario.materials.thermal.rho0;
        let mut e: Vec<f64> = full
            .y
            .iter()
            .zip(&halves.y)
            .enumerate()
            .map(|(k, (a, b))| {
                let diff = a - b;
                match k % VARS {
                    RHO => diff / rho0,
                    VEL => diff * node_density(&halves.y, k / VARS) / rho0,
                    _ => diff,
                }
            })
            .collect();
        full.lu.solve(&mut e);
        let w = self.weights(&halves.y, old);
        self.norm(&e, &w)
    }

    /// Advances the state by `dt` holding the gap rate, with adaptive
    /// substeps. The front update is explicit; when it reaches the tool end
    /// the step is cut to land there and the front node is held at rest
    /// afterwards.
    pub fn advance(&mut self, dt: f64) -> Result<StepReport> {
        let mut report = StepReport::default();
        if !(dt > 0.0) {
            return Ok(report);
        }
        let sc = self.scenario.clone();
        let n = self.state.nodes();
        let d = 1.0 / (n - 1) as f64;
        let t_end = self.state.t + dt;
        if self.balanced != Some((self.state.hdot, self.state.filled)) {
            self.equilibrate();
        }
        while self.state.t < t_end - 1e-12 * t_end.max(1.0) {
            let st = &self.state;
            let front_rate = if st.filled { 0.0 } else { st.v[n - 1].max(0.0) };
            let mut h = self.dt_next.min(sc.solver.dt_max).min(t_end - st.t);
            if front_rate > 0.0 {
                h = h.min(0.9 * st.front * d / front_rate);
            }
            let mut lands = false;
            if !st.filled && front_rate > 0.0 && st.front + front_rate * h >= sc.tool_length {
                h = (sc.tool_length - st.front) / front_rate;
                lands = true;
            }
            if h < sc.solver.dt_min {
                if lands {
                    // already at the end for all practical purposes
                    self.state.front = sc.tool_length;
                    self.state.filled = true;
                    self.fill_time = Some(self.state.t);
                    report.filled = true;
                    self.equilibrate();
                    continue;
                }
                return Err(Error::StepFailure {
                    t: st.t,
                    message: format!("step size {h:e} s below the minimum"),
                });
            }

            let old = pack(st);
            let (front0, gap0, t0, filled) = (st.front, st.gap, st.t, st.filled);
            let full = self.solve_step(&old, front0, gap0, t0, h, front_rate, filled);
            let halves = self.solve_step(&old, front0, gap0, t0, h / 2.0, front_rate, filled).and_then(|a| {
                self.solve_step(&a.y, a.front, a.gap, t0 + h / 2.0, h / 2.0, front_rate, filled)
            });
            let (full, halves) = match (full, halves) {
                (Some(f), Some(hv)) => (f, hv),
                _ => {
                    self.rejected += 1;
                    report.rejected += 1;
                    self.dt_next = h / 4.0;
                    if self.dt_next < sc.solver.dt_min {
                        return Err(Error::StepFailure {
                            t: t0,
                            message: "Newton iteration did not converge".into(),
                        });
                    }
                    continue;
                }
            };
            let err = self.filtered_error(&full, &halves, &old);
            let factor = if err > 0.0 { 0.9 / err.sqrt() } else { 4.0 };
            if err > 1.0 {
                self.rejected += 1;
                report.rejected += 1;
                self.dt_next = h * factor.clamp(0.1, 0.9);
                if self.dt_next < sc.solver.dt_min {
                    return Err(Error::StepFailure {
                        t: t0,
                        message: format!("local error {err:.3e} with step {h:e} s"),
                    });
                }
                continue;
            }
            self.accepted += 1;
            report.accepted += 1;
            self.dt_next = h * factor.clamp(0.2, 4.0);
            let mut y = halves.y;
            for i in 0..n {
                let tr = y[VARS * i + AXX] + y[VARS * i + AYY];
                y[VARS * i + AXX] /= tr;
                y[VARS * i + AYY] /= tr;
                y[VARS * i + AXY] /= tr;
            }
            let state = &mut self.state;
            unpack(&y, state);
            state.gap = halves.gap;
            state.t = t0 + h;
            if lands {
                state.front = sc.tool_length;
                state.filled = true;
                self.fill_time = Some(state.t);
                report.filled = true;
                self.equilibrate();
            } else {
                state.front = halves.front;
            }
        }
        self.state.t = t_end;
        Ok(report)
    }
}

/// Finite-difference Jacobian exploiting the three-node stencil: columns of
/// nodes three apart are perturbed together.
fn jacobian<F>(eval: &F, y: &[f64], r0: &[f64]) -> Option<BandMatrix>
where
    F: Fn(&[f64], &mut [f64]),
{
    let m = y.len();
    let n = m / VARS;
    let band = 2 * VARS - 1;
    let mut jac = BandMatrix::zeros(m, band, band);
    let mut yp = y.to_vec();
    let mut rp = vec![0.0; m];
    let scale = [1480.0, 1e-3, 1.0, 1.0, 1.0];
    for color in 0..3 {
        for k in 0..VARS {
            let mut steps = vec![0.0; n];
            for i in (color..n).step_by(3) {
                let c = VARS * i + k;
                let h = 1.5e-8 * y[c].abs().max(scale[k]);
                steps[i] = h;
                yp[c] = y[c] + h;
            }
            eval(&yp, &mut rp);
            for i in (color..n).step_by(3) {
                let c = VARS * i + k;
                yp[c] = y[c];
                let lo = i.saturating_sub(1);
                let hi = (i + 1).min(n - 1);
                for row in VARS * lo..VARS * (hi + 1) {
                    let v = (rp[row] - r0[row]) / steps[i];
                    if !v.is_finite() {
                        return None;
                    }
                    jac.set(row, c, v);
                }
            }
        }
    }
    Some(jac)
}

/// Runs the scenario under press control until the tool is filled and the
/// hold time has passed, or until `t_max`.
///
/// The controller samples force and gap every `press.period`. While it
/// follows a constant stretch of the profile the solver advances between
/// output instants in one go and the first sample with F ≥ F_max is located
/// by bisection, which gives the same switch-over instant as sampling every
/// period.
pub fn run_scenario(scenario: &Scenario) -> std::result::Result<SimulationOutput, RunError> {
    let fail = |error| RunError {
        error,
        partial: SimulationOutput::empty(scenario),
    };
    let mut solver = MacroSolver::new(scenario.clone()).map_err(fail)?;
    let mut controller = PressController::new(scenario.press.clone(), scenario.initial_gap).map_err(fail)?;
    let mut out = SimulationOutput::empty(scenario);
    let period = scenario.press.period;
    let f_max = scenario.press.f_max;
    let eps = 1e-9 * period;
    let mut next_output = 0.0;
    loop {
        let sigma = solver.sigma_zz();
        let force = force_from_sigma(&sigma, solver.state.front, scenario.width);
        out.peak_force = out.peak_force.max(force);
        let t = solver.state.t;
        if t >= next_output - eps {
            out.records.push(record(&solver, &sigma, force, controller.switched));
            while next_output <= t + eps {
                next_output += scenario.output_interval;
            }
        }
        let mut t_stop = scenario.t_max;
        if let Some(tf) = solver.fill_time {
            t_stop = t_stop.min(tf + scenario.hold_time);
        }
        if t >= t_stop - eps {
            if out.records.last().is_some_and(|r| r.t < t - eps) {
                out.records.push(record(&solver, &sigma, force, controller.switched));
            }
            break;
        }

        let was_switched = controller.switched;
        let hdot = controller.update(solver.state.gap, force, period);
        if controller.switched && !was_switched {
            out.switch_time = Some(t);
        }
        solver.set_gap_rate(hdot);

        let chunk = next_output.min(t_stop) - t;
        let samples = (chunk / period - 1e-6).ceil().max(1.0) as usize;
        let gap_end = solver.state.gap + hdot * chunk;
        let steady = !controller.switched && controller.settings.profile_velocity(gap_end) == hdot && samples > 1;
        let result = if steady {
            advance_to_switch(&mut solver, chunk, samples, period, f_max)
        } else {
            solver.advance(period.min(t_stop - t)).map(|_| ())
        };
        if let Err(error) = result {
            out.fill_time = solver.fill_time;
            out.finish(&solver);
            return Err(RunError { error, partial: out });
        }
    }
    out.fill_time = solver.fill_time;
    out.finish(&solver);
    Ok(out)
}

/// Advances by `chunk` (spanning `samples` controller periods) unless the
/// force reaches `f_max` at an earlier sample, in which case the solver is
/// left at the first such sample.
fn advance_to_switch(solver: &mut MacroSolver, chunk: f64, samples: usize, period: f64, f_max: f64) -> Result<()> {
    let saved = solver.clone();
    solver.advance(chunk)?;
    if solver.force() < f_max {
        return Ok(());
    }
    // force at sample lo is below f_max, at sample hi above
    let (mut lo, mut hi) = (0, samples);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        let mut trial = saved.clone();
        trial.advance(mid as f64 * period)?;
        if trial.force() >= f_max {
            hi = mid;
            *solver = trial;
        } else {
            lo = mid;
        }
    }
    if hi == samples {
        return Ok(());
    }
    if (solver.state.t - (saved.state.t + hi as f64 * period)).abs() > 1e-9 * period {
        *solver = saved;
        solver.advance(hi as f64 * period)?;
    }
    Ok(())
}

fn record(solver: &MacroSolver, sigma: &[f64], force: f64, switched: bool) -> OutputRecord {
    let st = solver.state();
    let sc = solver.scenario();
    OutputRecord {
        t: st.t,
        gap: st.gap,
        hdot: st.hdot,
        force,
        front: st.front,
        temperature: solver.temperature(),
        sensors: pressures_from_sigma(sigma, st.front, &sc.sensors),
        sigma_zz: sigma.to_vec(),
        axx_mid: MacroState::interpolate(&st.axx, 0.5),
        ayy_mid: MacroState::interpolate(&st.ayy, 0.5),
        mass: st.mass(sc.width),
        switched,
        filled: st.filled,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{EquationOfState, FrictionModel, SuspensionParams};
    use crate::orientation::ClosureKind;

    fn newtonian(eta: f64) -> Scenario {
        let mut sc = Scenario::coverage75();
        sc.materials.viscosity = Viscosity::Newtonian(eta);
        sc.materials.suspension = SuspensionParams::isotropic();
        sc.materials.friction = FrictionModel::frictionless();
        sc.closure = ClosureKind::Quadratic;
        sc.grid_n = 21;
        sc
    }

    #[test]
    fn stiff_eos_balance_is_plug_flow() {
        let mut sc = newtonian(1e4);
        sc.materials.eos = EquationOfState::upph_gf().scaled(1e6);
        let hdot = -1e-3;
        let mut st = MacroState::initial(&sc);
        st.hdot = hdot;
        // density carrying p = -2η ḣ/h, which balances a traction-free front
        let p = -2.0 * 1e4 * hdot / st.gap;
        let rho0 = sc.materials.thermal.rho0;
        let (mut lo, mut hi) = (rho0, rho0 * 1.01);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if sc.materials.eos.pressure_from_density(mid, rho0) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        st.rho.iter_mut().for_each(|r| *r = 0.5 * (lo + hi));
        let mut s = MacroSolver::with_state(sc, st).unwrap();
        s.equilibrate();
        let st = s.state();
        let v1 = -hdot / st.gap * st.front;
        for i in 0..st.nodes() {
            assert!((st.v[i] - st.x_star(i) * v1).abs() < 1e-3 * v1, "node {i}: {}", st.v[i]);
        }
    }

    #[test]
    fn zero_step_leaves_state_unchanged() {
        let sc = Scenario::coverage75();
        let mut s = MacroSolver::new(sc).unwrap();
        s.set_gap_rate(-1e-3);
        let before = s.state().clone();
        let rep = s.advance(0.0).unwrap();
        assert_eq!(rep, StepReport::default());
        assert_eq!(s.state(), &before);
    }

    #[test]
    fn charge_at_rest_stays_at_rest() {
        let mut s = MacroSolver::new(newtonian(1e4)).unwrap();
        s.advance(0.05).unwrap();
        let st = s.state();
        assert!(st.v.iter().all(|v| v.abs() < 1e-12));
        assert!(st.rho.iter().all(|r| (r - 1480.0).abs() < 1e-9));
        assert_eq!(st.front, 0.6);
        assert!((st.t - 0.05).abs() < 1e-15);
    }

    #[test]
    fn short_closing_conserves_mass_and_orientation_trace() {
        let mut sc = Scenario::coverage75();
        sc.grid_n = 15;
        let mut s = MacroSolver::new(sc.clone()).unwrap();
        let m0 = s.state().mass(sc.width);
        s.set_gap_rate(-1e-3);
        s.advance(0.3).unwrap();
        let st = s.state();
        assert!((st.mass(sc.width) / m0 - 1.0).abs() < 1e-10);
        for i in 0..st.nodes() {
            assert!((st.axx[i] + st.ayy[i] - 1.0).abs() < 1e-6);
        }
        assert!(st.v[0].abs() < 1e-15 && st.v[st.nodes() - 1] > 0.0);
        assert!(st.gap < sc.initial_gap);
    }

    #[test]
    fn full_coverage_is_pure_compaction() {
        let mut sc = newtonian(1e4);
        sc.charge_length = sc.tool_length;
        sc.materials.eos = EquationOfState::upph_gf();
        let mut s = MacroSolver::new(sc.clone()).unwrap();
        assert!(s.state().filled);
        s.set_gap_rate(-1e-3);
        s.advance(0.5).unwrap();
        let st = s.state();
        assert!(st.v.iter().all(|v| v.abs() < 1e-9), "{:?}", st.v);
        let rho = 1480.0 * sc.initial_gap / st.gap;
        assert!(st.rho.iter().all(|r| (r / rho - 1.0).abs() < 1e-6));
    }

    #[test]
    fn run_stops_at_t_max_with_partial_samples() {
        let mut sc = newtonian(1e4);
        sc.t_max = 0.2;
        sc.output_interval = 0.05;
        let out = run_scenario(&sc).unwrap();
        let times: Vec<f64> = out.records.iter().map(|r| r.t).collect();
        assert_eq!(times.len(), 5);
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        assert!((times[4] - 0.2).abs() < 1e-9);
        assert!(out.fill_time.is_none() && out.switch_time.is_none());
    }
}
