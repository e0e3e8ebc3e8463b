//! Spatial discretization on the stretched grid.

use super::{MacroState, Scenario};
use crate::error::Result;
use crate::material::equivalent_shear_rate_planar;
use crate::orientation::{planar_fourth, planar_rates, PlanarState, ViscosityComponents};

pub(crate) const VARS: usize = 5;
pub(crate) const RHO: usize = 0;
pub(crate) const VEL: usize = 1;
pub(crate) const AXX: usize = 2;
pub(crate) const AYY: usize = 3;
pub(crate) const AXY: usize = 4;

/// Quantities that are fixed while the nodal fields are solved for.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Frame {
    pub front: f64,
    pub front_rate: f64,
    pub gap: f64,
    pub hdot: f64,
    pub temp: f64,
    pub filled: bool,
}

pub(crate) fn pack(state: &MacroState) -> Vec<f64> {
    let n = state.nodes();
    let mut y = vec![0.0; VARS * n];
    for i in 0..n {
        // the density slot of the last node has no cell and stays zero
        if i < n - 1 {
            y[VARS * i + RHO] = state.rho[i];
        }
        y[VARS * i + VEL] = state.v[i];
        y[VARS * i + AXX] = state.axx[i];
        y[VARS * i + AYY] = state.ayy[i];
        y[VARS * i + AXY] = state.axy[i];
    }
    y
}

pub(crate) fn unpack(y: &[f64], state: &mut MacroState) {
    let n = state.nodes();
    for i in 0..n {
        if i < n - 1 {
            state.rho[i] = y[VARS * i + RHO];
        }
        state.v[i] = y[VARS * i + VEL];
        state.axx[i] = y[VARS * i + AXX];
        state.ayy[i] = y[VARS * i + AYY];
        state.axy[i] = y[VARS * i + AXY];
    }
}

#[inline]
fn planar_at(y: &[f64], i: usize) -> PlanarState {
    PlanarState {
        axx: y[VARS * i + AXX],
        ayy: y[VARS * i + AYY],
        axy: y[VARS * i + AXY],
    }
}

fn mean_planar(a: &PlanarState, b: &PlanarState) -> PlanarState {
    PlanarState {
        axx: 0.5 * (a.axx + b.axx),
        ayy: 0.5 * (a.ayy + b.ayy),
        axy: 0.5 * (a.axy + b.axy),
    }
}

/// Density carried by the momentum volume of node `i`.
#[inline]
pub(crate) fn node_density(y: &[f64], i: usize) -> f64 {
    let n = y.len() / VARS;
    if i == 0 {
        y[RHO]
    } else if i == n - 1 {
        y[VARS * (n - 2) + RHO]
    } else {
        0.5 * (y[VARS * (i - 1) + RHO] + y[VARS * i + RHO])
    }
}

#[inline]
fn node_volume(n: usize, i: usize) -> f64 {
    let d = 1.0 / (n - 1) as f64;
    if i == 0 || i == n - 1 {
        0.5 * d
    } else {
        d
    }
}

/// Viscosity components for strain rates (dxx, dzz) and orientation `s`.
fn components(sc: &Scenario, eta2_ratio: f64, dxx: f64, dzz: f64, temp: f64, s: &PlanarState) -> ViscosityComponents {
    let gammadot = equivalent_shear_rate_planar(dxx, dzz);
    let (eta, _) = sc.materials.viscosity.eval(gammadot, temp);
    let mut v = ViscosityComponents::newtonian(eta);
    if eta2_ratio != 0.0 {
        let eta2 = eta2_ratio * eta;
        let a4 = planar_fourth(s, sc.closure);
        v.xxxx += eta2 * (a4.xxxx - s.axx / 3.0);
        v.zzxx -= eta2 * s.axx / 3.0;
    }
    v
}

/// Nodal strain rate Dxx from the velocity field: central inside, one-sided
/// at the ends.
#[inline]
fn node_dxx(y: &[f64], n: usize, i: usize, front: f64) -> f64 {
    let d = 1.0 / (n - 1) as f64;
    let v = |j: usize| y[VARS * j + VEL];
    if i == 0 {
        (v(1) - v(0)) / (front * d)
    } else if i == n - 1 {
        (v(n - 1) - v(n - 2)) / (front * d)
    } else {
        (v(i + 1) - v(i - 1)) / (2.0 * front * d)
    }
}

/// Upwind derivative d q / d x* of component `k` at node `i` for transport
/// speed `u`; zero where the upwind neighbor is missing.
#[inline]
fn upwind(y: &[f64], n: usize, i: usize, k: usize, u: f64) -> f64 {
    let d = 1.0 / (n - 1) as f64;
    let q = |j: usize| y[VARS * j + k];
    if u > 0.0 && i > 0 {
        (q(i) - q(i - 1)) / d
    } else if u < 0.0 && i < n - 1 {
        (q(i + 1) - q(i)) / d
    } else {
        0.0
    }
}

/// Pressure, strain rate and viscosity components of cell `c`.
fn cell_state(sc: &Scenario, eta2_ratio: f64, y: &[f64], c: usize, front: f64, dzz: f64, temp: f64) -> (f64, f64, ViscosityComponents) {
    let n = y.len() / VARS;
    let d = 1.0 / (n - 1) as f64;
    let p = sc.materials.eos.pressure_from_density(y[VARS * c + RHO], sc.materials.thermal.rho0);
    let dxx = (y[VARS * (c + 1) + VEL] - y[VARS * c + VEL]) / (front * d);
    let s = mean_planar(&planar_at(y, c), &planar_at(y, c + 1));
    (p, dxx, components(sc, eta2_ratio, dxx, dzz, temp, &s))
}

/// Spatial terms of the semi-discrete system for the fields `y`. Density
/// and stress live on the cells between nodes, velocity and orientation on
/// the nodes.
pub(crate) struct Terms {
    /// Net mass outflow of each cell per unit width (kg/m/s).
    pub mass_outflow: Vec<f64>,
    /// Net force on each nodal volume per unit width and unit gap, divided
    /// by X (Pa); includes stress divergence and wall friction.
    pub force: Vec<f64>,
    /// Convective acceleration u* ∂v/∂x* per node (m/s²).
    pub convection: Vec<f64>,
    /// Orientation rates minus transport, per node.
    pub orientation: Vec<[f64; 3]>,
}

pub(crate) fn terms(sc: &Scenario, eta2_ratio: f64, f: &Frame, y: &[f64]) -> Terms {
    let n = y.len() / VARS;
    let d = 1.0 / (n - 1) as f64;
    let dzz = f.hdot / f.gap;

    let stress: Vec<f64> = (0..n - 1)
        .map(|c| {
            let (p, dxx, v) = cell_state(sc, eta2_ratio, y, c, f.front, dzz, f.temp);
            -p + v.sigma_xx(dxx, dzz)
        })
        .collect();

    // mass crosses interior nodes only; the ends are material boundaries
    let mut flux = vec![0.0; n];
    for i in 1..n - 1 {
        let u = y[VARS * i + VEL] - i as f64 * d * f.front_rate;
        let rho_up = if u >= 0.0 { y[VARS * (i - 1) + RHO] } else { y[VARS * i + RHO] };
        flux[i] = f.gap * rho_up * u;
    }

    let mut mass_outflow = vec![0.0; n - 1];
    for c in 0..n - 1 {
        mass_outflow[c] = flux[c + 1] - flux[c];
    }

    let mut force = vec![0.0; n];
    let mut convection = vec![0.0; n];
    let mut orientation = vec![[0.0; 3]; n];
    let friction = &sc.materials.friction;
    for i in 0..n {
        let vi = y[VARS * i + VEL];
        let right = if i < n - 1 { stress[i] } else { 0.0 };
        let left = if i > 0 { stress[i - 1] } else { right };
        // node 0 and a filled front carry Dirichlet velocities, so only the
        // friction there matters for the record
        force[i] = (right - left) / f.front + node_volume(n, i) * 2.0 * friction.stress(vi) / f.gap;
        let u = (vi - i as f64 * d * f.front_rate) / f.front;
        convection[i] = u * upwind(y, n, i, VEL, u);
        let s = planar_at(y, i);
        let (rxx, ryy, rxy) = planar_rates(&s, node_dxx(y, n, i, f.front), sc.closure);
        orientation[i] = [
            rxx - u * upwind(y, n, i, AXX, u),
            ryy - u * upwind(y, n, i, AYY, u),
            rxy - u * upwind(y, n, i, AXY, u),
        ];
    }
    Terms {
        mass_outflow,
        force,
        convection,
        orientation,
    }
}

/// Backward-Euler residual of one step from `old` (at `old_front`, `old_gap`)
/// to `y` over `dt`, written into `out`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn residual(
    sc: &Scenario,
    eta2_ratio: f64,
    f: &Frame,
    y: &[f64],
    old: &[f64],
    old_front: f64,
    old_gap: f64,
    dt: f64,
    out: &mut [f64],
) {
    let n = y.len() / VARS;
    let d = 1.0 / (n - 1) as f64;
    let rho0 = sc.materials.thermal.rho0;
    let t = terms(sc, eta2_ratio, f, y);
    for i in 0..n {
        let r = &mut out[VARS * i..VARS * (i + 1)];
        // continuity, normalized to a relative density change
        r[RHO] = if i < n - 1 {
            let m_new = f.front * f.gap * y[VARS * i + RHO] * d;
            let m_old = old_front * old_gap * old[VARS * i + RHO] * d;
            (m_new - m_old + dt * t.mass_outflow[i]) / (old_front * old_gap * rho0 * d)
        } else {
            y[VARS * i + RHO]
        };

        let v = y[VARS * i + VEL];
        let dirichlet = i == 0 || (i == n - 1 && f.filled);
        r[VEL] = if dirichlet {
            v
        } else {
            let vol = node_volume(n, i);
            let accel = (v - old[VARS * i + VEL]) / dt + t.convection[i];
            (vol * node_density(y, i) * accel - t.force[i]) * dt / (vol * rho0)
        };

        for (k, comp) in [AXX, AYY, AXY].into_iter().enumerate() {
            r[comp] = y[VARS * i + comp] - old[VARS * i + comp] - dt * t.orientation[i][k];
        }
    }
}

/// Residual of the inertia-free momentum balance with density and
/// orientation frozen at `frozen`. Used to bring the velocity field into
/// balance after a jump in the boundary data.
pub(crate) fn equilibrium_residual(sc: &Scenario, eta2_ratio: f64, f: &Frame, y: &[f64], frozen: &[f64], out: &mut [f64]) {
    let n = y.len() / VARS;
    let rho0 = sc.materials.thermal.rho0;
    let t = terms(sc, eta2_ratio, f, y);
    for i in 0..n {
        let r = &mut out[VARS * i..VARS * (i + 1)];
        r[RHO] = (y[VARS * i + RHO] - frozen[VARS * i + RHO]) / rho0;
        let dirichlet = i == 0 || (i == n - 1 && f.filled);
        r[VEL] = if dirichlet {
            y[VARS * i + VEL]
        } else {
            -t.force[i] / (node_volume(n, i) * rho0)
        };
        for comp in [AXX, AYY, AXY] {
            r[comp] = y[VARS * i + comp] - frozen[VARS * i + comp];
        }
    }
}

/// Time derivatives at fixed x*: density per cell, the rest per node.
#[derive(Debug, Clone, PartialEq)]
pub struct Rates {
    pub rho: Vec<f64>,
    pub v: Vec<f64>,
    pub axx: Vec<f64>,
    pub ayy: Vec<f64>,
    pub axy: Vec<f64>,
}

/// Semi-discrete rates for `state` with average temperature `temp`; the gap
/// moves at `state.hdot` and the front with the front-node velocity.
pub fn assemble_rates(state: &MacroState, scenario: &Scenario, temp: f64) -> Result<Rates> {
    let eta2_ratio = scenario.materials.suspension.eta2_ratio()?;
    let n = state.nodes();
    let d = 1.0 / (n - 1) as f64;
    let front_rate = if state.filled { 0.0 } else { state.v[n - 1] };
    let f = Frame {
        front: state.front,
        front_rate,
        gap: state.gap,
        hdot: state.hdot,
        temp,
        filled: state.filled,
    };
    let y = pack(state);
    let t = terms(scenario, eta2_ratio, &f, &y);
    let stretch = front_rate * state.gap + state.front * state.hdot;
    let rho = (0..n - 1)
        .map(|c| (-t.mass_outflow[c] / d - state.rho[c] * stretch) / (state.front * state.gap))
        .collect();
    let v = (0..n)
        .map(|i| {
            if i == 0 || (i == n - 1 && state.filled) {
                0.0
            } else {
                t.force[i] / (node_volume(n, i) * node_density(&y, i)) - t.convection[i]
            }
        })
        .collect();
    Ok(Rates {
        rho,
        v,
        axx: t.orientation.iter().map(|o| o[0]).collect(),
        ayy: t.orientation.iter().map(|o| o[1]).collect(),
        axy: t.orientation.iter().map(|o| o[2]).collect(),
    })
}

/// Normal stress σzz in every cell (Pa).
pub fn cell_sigma_zz(state: &MacroState, scenario: &Scenario, temp: f64) -> Result<Vec<f64>> {
    let eta2_ratio = scenario.materials.suspension.eta2_ratio()?;
    let y = pack(state);
    let dzz = state.hdot / state.gap;
    Ok((0..state.nodes() - 1)
        .map(|c| {
            let (p, dxx, v) = cell_state(scenario, eta2_ratio, &y, c, state.front, dzz, temp);
            -p + v.sigma_zz(dxx, dzz)
        })
        .collect())
}

/// σzz at every node: mean of the adjacent cells, the end cell at either
/// end (Pa).
pub fn node_sigma_zz(state: &MacroState, scenario: &Scenario, temp: f64) -> Result<Vec<f64>> {
    Ok(cells_to_nodes(&cell_sigma_zz(state, scenario, temp)?))
}

pub(crate) fn cells_to_nodes(cells: &[f64]) -> Vec<f64> {
    let m = cells.len();
    (0..=m)
        .map(|i| match i {
            0 => cells[0],
            i if i == m => cells[m - 1],
            i => 0.5 * (cells[i - 1] + cells[i]),
        })
        .collect()
}

/// σzz at x* by linear interpolation between nodes (Pa).
pub fn sigma_zz(state: &MacroState, scenario: &Scenario, temp: f64, x_star: f64) -> Result<f64> {
    Ok(MacroState::interpolate(&node_sigma_zz(state, scenario, temp)?, x_star))
}

/// Press force W X ∫ max(-σzz, 0) dx* by the trapezoid rule over nodes (N).
pub fn total_force(state: &MacroState, scenario: &Scenario, temp: f64) -> Result<f64> {
    Ok(force_from_sigma(&node_sigma_zz(state, scenario, temp)?, state.front, scenario.width))
}

pub(crate) fn force_from_sigma(sigma: &[f64], front: f64, width: f64) -> f64 {
    let n = sigma.len();
    let d = 1.0 / (n - 1) as f64;
    let g: Vec<f64> = sigma.iter().map(|s| (-s).max(0.0)).collect();
    let integral = d * (g[1..n - 1].iter().sum::<f64>() + 0.5 * (g[0] + g[n - 1]));
    width * front * integral
}

/// Gauge pressure -σzz (clamped at zero) at each sensor; zero for sensors
/// beyond the front (Pa).
pub fn sensor_pressures(state: &MacroState, scenario: &Scenario, temp: f64) -> Result<Vec<f64>> {
    let sigma = node_sigma_zz(state, scenario, temp)?;
    Ok(pressures_from_sigma(&sigma, state.front, &scenario.sensors))
}

pub(crate) fn pressures_from_sigma(sigma: &[f64], front: f64, sensors: &[f64]) -> Vec<f64> {
    sensors
        .iter()
        .map(|&x| {
            if x <= front {
                (-MacroState::interpolate(sigma, x / front)).max(0.0)
            } else {
                0.0
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{Viscosity, BAR};
    use crate::orientation::ClosureKind;

    fn moving_state(sc: &Scenario) -> MacroState {
        let mut st = MacroState::initial(sc);
        let n = st.nodes();
        st.hdot = -1e-3;
        for i in 0..n {
            let x = st.x_star(i);
            st.v[i] = 2e-3 * x + 4e-4 * x * x;
            if i < n - 1 {
                st.rho[i] = 1500.0 - 10.0 * x;
            }
            st.axx[i] = 0.5 + 0.2 * x;
            st.ayy[i] = 0.5 - 0.2 * x;
            st.axy[i] = 0.02 * x;
        }
        st
    }

    #[test]
    fn rest_state_has_zero_rates_and_stress() {
        let sc = Scenario::coverage75();
        let st = MacroState::initial(&sc);
        let r = assemble_rates(&st, &sc, 50.0).unwrap();
        for f in [&r.rho, &r.v, &r.axx, &r.ayy, &r.axy] {
            assert!(f.iter().all(|x| *x == 0.0));
        }
        assert!(cell_sigma_zz(&st, &sc, 50.0).unwrap().iter().all(|s| *s == 0.0));
        assert_eq!(total_force(&st, &sc, 50.0).unwrap(), 0.0);
    }

    #[test]
    fn force_of_uniform_stress() {
        // 4 kPa over 0.6 m x 0.45 m
        let f = force_from_sigma(&[-4.0e3; 17], 0.6, 0.45);
        assert!((f - 1080.0).abs() < 1e-9);
        // tension does not pull on the press
        assert_eq!(force_from_sigma(&[1.0e3; 5], 0.6, 0.45), 0.0);
    }

    #[test]
    fn sensors_beyond_front_read_zero() {
        let sigma = [-3.0 * BAR, -2.0 * BAR, -BAR];
        let p = pressures_from_sigma(&sigma, 0.4, &[0.0, 0.2, 0.3, 0.41]);
        assert!((p[0] - 3.0 * BAR).abs() < 1e-9);
        assert!((p[1] - 2.0 * BAR).abs() < 1e-9);
        assert!((p[2] - 1.5 * BAR).abs() < 1e-9);
        assert_eq!(p[3], 0.0);
    }

    #[test]
    fn cell_to_node_averaging_keeps_the_trapezoid_integral() {
        let cells = [-4.0, -2.0, -1.0, -3.0];
        let nodes = cells_to_nodes(&cells);
        assert_eq!(nodes, vec![-4.0, -3.0, -1.5, -2.0, -3.0]);
        // equals the midpoint sum over cells while nothing is in tension
        let f = force_from_sigma(&nodes, 1.0, 1.0);
        assert!((f - 2.5).abs() < 1e-12);
    }

    #[test]
    fn newtonian_incompressible_stress() {
        // Dxx = -Dzz = 0.1/s at reference density: σzz = -2η/3 Dxx + 4η/3 Dzz = -2η Dxx
        let mut sc = Scenario::coverage75();
        sc.materials.viscosity = Viscosity::Newtonian(1e4);
        sc.materials.suspension.anisotropic = false;
        let mut st = MacroState::initial(&sc);
        st.hdot = -1e-3;
        st.gap = 0.01;
        let n = st.nodes();
        for i in 0..n {
            st.v[i] = 0.1 * st.x_star(i) * st.front;
        }
        let s = cell_sigma_zz(&st, &sc, 50.0).unwrap();
        assert!(s.iter().all(|s| (s + 2.0e3).abs() < 1e-9));
    }

    #[test]
    fn residual_is_consistent_with_rates() {
        let mut sc = Scenario::coverage75();
        sc.closure = ClosureKind::Hybrid;
        let st = moving_state(&sc);
        let n = st.nodes();
        let eta2 = sc.materials.suspension.eta2_ratio().unwrap();
        let temp = 40.0;
        let rates = assemble_rates(&st, &sc, temp).unwrap();
        let old = pack(&st);
        let rows = |dt: f64| {
            let front_rate = st.v[n - 1];
            let mut next = st.clone();
            for (r, dr) in next.rho.iter_mut().zip(&rates.rho) {
                *r += dt * dr;
            }
            for i in 0..n {
                next.v[i] += dt * rates.v[i];
                next.axx[i] += dt * rates.axx[i];
                next.ayy[i] += dt * rates.ayy[i];
                next.axy[i] += dt * rates.axy[i];
            }
            let f = Frame {
                front: st.front + dt * front_rate,
                front_rate,
                gap: st.gap + dt * st.hdot,
                hdot: st.hdot,
                temp,
                filled: false,
            };
            let y = pack(&next);
            let mut r = vec![0.0; y.len()];
            residual(&sc, eta2, &f, &y, &old, st.front, st.gap, dt, &mut r);
            r
        };
        // an explicit Euler update leaves an O(dt^2) residual in every row
        let (coarse, fine) = (rows(1e-7), rows(1e-8));
        for (k, (c, f)) in coarse.iter().zip(&fine).enumerate() {
            assert!(f.abs() <= 0.02 * c.abs() + 1e-14, "row {k}: {c:e} -> {f:e}");
        }
    }
}
