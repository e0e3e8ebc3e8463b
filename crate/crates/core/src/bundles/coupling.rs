//! Bundle–matrix coupling: Gaussian-weighted relative velocity, drag and lift,
//! the opposite body force on the matrix grid, and lubricated contact.

use nalgebra::Vector3;

use super::{Aabb, NeighborIndex, Point};
use crate::error::{Error, Result};

/// Drag and lift factors of the segment force law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DragCoefficients {
    pub k_d: f64,
    pub k_l: f64,
}

impl Default for DragCoefficients {
    /// Placeholders: calibrated values come from micro-scale simulations.
    fn default() -> Self {
        Self { k_d: 1.0, k_l: 0.0 }
    }
}

impl DragCoefficients {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_d > 0.0 && self.k_l >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "need k_d > 0 and k_l >= 0, got {} and {}",
                self.k_d, self.k_l
            )));
        }
        Ok(())
    }
}

/// Cap and gap floor of the lubricated contact law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactParams {
    /// Largest tangential stress (Pa).
    pub cap: f64,
    /// Smallest effective film thickness (m).
    pub g_min: f64,
}

impl Default for ContactParams {
    fn default() -> Self {
        Self { cap: 1e6, g_min: 1e-6 }
    }
}

/// Regular lattice of matrix cells with a velocity and an accumulated body
/// force per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerGrid {
    pub origin: Point,
    pub cell: Point,
    pub dims: [usize; 3],
    pub velocity: Vec<Vector3<f64>>,
    /// Body force density (N/m³).
    pub force: Vec<Vector3<f64>>,
}

impl EulerGrid {
    /// Cells of edge close to `size` covering `domain`, at least one per axis.
    pub fn covering(domain: &Aabb, size: f64) -> Result<Self> {
        let e = domain.extent();
        if !(size > 0.0 && e.x > 0.0 && e.y > 0.0 && e.z > 0.0) {
            return Err(Error::InvalidGrid(format!("cell size {size} over extent {e:?}")));
        }
        let dims = [0, 1, 2].map(|k| ((e[k] / size).round() as usize).max(1));
        let cell = Point::new(e.x / dims[0] as f64, e.y / dims[1] as f64, e.z / dims[2] as f64);
        let n = dims[0] * dims[1] * dims[2];
        Ok(Self {
            origin: domain.min,
            cell,
            dims,
            velocity: vec![Vector3::zeros(); n],
            force: vec![Vector3::zeros(); n],
        })
    }

    pub fn len(&self) -> usize {
        self.velocity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.velocity.is_empty()
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell.x * self.cell.y * self.cell.z
    }

    pub fn center(&self, id: usize) -> Point {
        let [nx, ny, _] = self.dims;
        let (i, j, k) = (id % nx, (id / nx) % ny, id / (nx * ny));
        self.origin + Point::new((i as f64 + 0.5) * self.cell.x, (j as f64 + 0.5) * self.cell.y, (k as f64 + 0.5) * self.cell.z)
    }

    pub fn centers(&self) -> Vec<Point> {
        (0..self.len()).map(|i| self.center(i)).collect()
    }

    /// Σ f V over all cells (N).
    pub fn total_force(&self) -> Vector3<f64> {
        let v = self.cell_volume();
        self.force.iter().fold(Vector3::zeros(), |acc, f| acc + f * v)
    }
}

/// Gaussian weight for squared distance `d2` and width `sigma`.
#[inline]
pub fn gaussian_weight(d2: f64, sigma: f64) -> f64 {
    (-d2 / (2.0 * sigma * sigma)).exp()
}

/// Normalized weights of the cells around one segment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NeighborWeights {
    pub cells: Vec<usize>,
    /// w_ij / W_j, summing to one when non-empty.
    pub weights: Vec<f64>,
}

/// Cells strictly within `radius` of `x` with normalized Gaussian weights.
pub fn neighbor_weights(index: &NeighborIndex, x: &Point, radius: f64, sigma: f64) -> NeighborWeights {
    let cells = index.radius_query(x, radius);
    let mut weights: Vec<f64> = cells
        .iter()
        .map(|&c| gaussian_weight((index.point(c) - x).norm_squared(), sigma))
        .collect();
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        weights.iter_mut().for_each(|w| *w /= total);
    }
    NeighborWeights { cells, weights }
}

/// Δv = Σ (w_i / W)(v_i − v_seg) over neighbor cells given as (center,
/// velocity). Zero without neighbors.
pub fn relative_velocity(center: &Point, v_seg: &Vector3<f64>, neighbors: &[(Point, Vector3<f64>)], sigma: f64) -> Vector3<f64> {
    let mut total = 0.0;
    let mut acc = Vector3::zeros();
    for (x, v) in neighbors {
        let w = gaussian_weight((x - center).norm_squared(), sigma);
        total += w;
        acc += w * (v - v_seg);
    }
    if total > 0.0 {
        acc / total
    } else {
        Vector3::zeros()
    }
}

/// Segment force F = 6πηR (k_d Δv + k_l |Δv| q), q the unit part of Δv
/// normal to the unit `axis` (no lift when Δv is along the axis).
pub fn hydrodynamic_force(eta: f64, radius: f64, coeffs: &DragCoefficients, dv: &Vector3<f64>, axis: &Vector3<f64>) -> Vector3<f64> {
    let speed = dv.norm();
    let mut f = coeffs.k_d * dv;
    if coeffs.k_l != 0.0 && speed > 0.0 {
        let normal = dv - dv.dot(axis) * axis;
        let nn = normal.norm();
        if nn >= 1e-12 * speed {
            f += coeffs.k_l * speed * normal / nn;
        }
    }
    6.0 * std::f64::consts::PI * eta * radius * f
}

/// Adds f_i = −(1/V) (w_ij / W_j) F_j for every segment j to the grid.
pub fn accumulate_body_force(grid: &mut EulerGrid, forces: &[Vector3<f64>], weights: &[NeighborWeights]) {
    let inv_v = 1.0 / grid.cell_volume();
    for (f, nw) in forces.iter().zip(weights) {
        for (&c, &w) in nw.cells.iter().zip(&nw.weights) {
            grid.force[c] -= inv_v * w * f;
        }
    }
}

/// Tangential contact stress −η (d_a² / |sin φ|) Δv_t / (t̄ A) with the
/// film thickness t̄ = max(g, g_min), clamped in magnitude to the cap.
pub fn contact_stress(eta: f64, d_a: f64, phi: f64, dv_t: &Vector3<f64>, gap: f64, area: f64, p: &ContactParams) -> Vector3<f64> {
    let speed = dv_t.norm();
    if speed == 0.0 {
        return Vector3::zeros();
    }
    let film = gap.max(p.g_min);
    // an infinite value at parallel axes is caught by the cap
    let magnitude = (eta * d_a * d_a * speed / (phi.sin().abs() * film * area)).min(p.cap);
    -magnitude * dv_t / speed
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const MM: f64 = 1e-3;

    #[test]
    fn relative_velocity_cases() {
        let c = Point::zeros();
        let v = Vector3::new(1.0, 2.0, 3.0);
        assert_eq!(relative_velocity(&c, &v, &[(Point::new(1e-3, 0.0, 0.0), v)], 1e-3), Vector3::zeros());
        let dv = relative_velocity(&c, &Vector3::zeros(), &[(Point::new(2e-3, 0.0, 0.0), Vector3::new(1e-3, 0.0, 0.0))], 1e-4);
        assert!((dv - Vector3::new(1e-3, 0.0, 0.0)).norm() < 1e-18);
        let pair = [
            (Point::new(1e-3, 0.0, 0.0), Vector3::new(1e-3, 0.0, 0.0)),
            (Point::new(-1e-3, 0.0, 0.0), Vector3::new(-1e-3, 0.0, 0.0)),
        ];
        assert!(relative_velocity(&c, &Vector3::zeros(), &pair, 1e-3).norm() < 1e-18);
        assert_eq!(relative_velocity(&c, &v, &[], 1e-3), Vector3::zeros());
    }

    #[test]
    fn drag_magnitude_and_lift() {
        let k = DragCoefficients::default();
        let axis = Vector3::new(0.0, 1.0, 0.0);
        let f = hydrodynamic_force(1e4, 0.1 * MM, &k, &Vector3::new(1e-3, 0.0, 0.0), &axis);
        assert!((f.norm() - 0.018849555921538757).abs() < 1e-15);
        assert_eq!(hydrodynamic_force(1e4, 0.1 * MM, &k, &Vector3::zeros(), &axis), Vector3::zeros());
        // lift vanishes for motion along the axis
        let along = Vector3::new(0.0, 1e-3, 0.0);
        let lifted = DragCoefficients { k_d: 1.0, k_l: 5.0 };
        assert_eq!(hydrodynamic_force(1e4, 0.1 * MM, &lifted, &along, &axis), hydrodynamic_force(1e4, 0.1 * MM, &k, &along, &axis));
        // across the axis it adds k_l |Δv| along Δv
        let across = Vector3::new(1e-3, 0.0, 0.0);
        let f = hydrodynamic_force(1e4, 0.1 * MM, &lifted, &across, &axis);
        assert!((f.norm() - 6.0 * 0.018849555921538757).abs() < 1e-14);
    }

    #[test]
    fn single_cell_body_force() {
        let mut g = EulerGrid::covering(&Aabb::from_extent(Point::new(0.01, 0.01, 0.01)), 0.01).unwrap();
        assert_eq!(g.len(), 1);
        let nw = NeighborWeights { cells: vec![0], weights: vec![1.0] };
        accumulate_body_force(&mut g, &[Vector3::new(1.0, 0.0, 0.0)], std::slice::from_ref(&nw));
        assert!((g.force[0] - Vector3::new(-1e6, 0.0, 0.0)).norm() < 1e-6);
        let mut z = EulerGrid::covering(&Aabb::from_extent(Point::new(0.01, 0.01, 0.01)), 0.01).unwrap();
        accumulate_body_force(&mut z, &[Vector3::zeros()], &[nw]);
        assert_eq!(z.force[0], Vector3::zeros());
    }

    #[test]
    fn reaction_balance_on_random_segments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let domain = Aabb::from_extent(Point::new(0.05, 0.05, 0.01));
        let mut grid = EulerGrid::covering(&domain, 2.5e-3).unwrap();
        let index = NeighborIndex::build(&grid.centers());
        let mut forces = Vec::new();
        let mut weights = Vec::new();
        for _ in 0..100 {
            let x = Point::new(rng.random::<f64>() * 0.05, rng.random::<f64>() * 0.05, rng.random::<f64>() * 0.01);
            weights.push(neighbor_weights(&index, &x, 5e-3, 2.5e-3));
            forces.push(Vector3::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        }
        accumulate_body_force(&mut grid, &forces, &weights);
        let applied: Vector3<f64> = forces.iter().sum();
        let residual = (grid.total_force() + applied).norm() / forces.iter().map(|f| f.norm()).sum::<f64>();
        assert!(residual < 1e-10, "{residual}");
        for w in &weights {
            assert!((w.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn contact_stress_cases() {
        let p = ContactParams { cap: 10e6, g_min: 1e-6 };
        let dv = Vector3::new(1e-3, 0.0, 0.0);
        let s = contact_stress(1e4, 1e-3, std::f64::consts::FRAC_PI_2, &dv, 1e-5, 1e-6, &p);
        assert!((s + Vector3::new(1e6, 0.0, 0.0)).norm() < 1e-6);
        let capped = ContactParams { cap: 0.5e6, ..p };
        let s = contact_stress(1e4, 1e-3, std::f64::consts::FRAC_PI_2, &dv, 1e-5, 1e-6, &capped);
        assert!((s + Vector3::new(0.5e6, 0.0, 0.0)).norm() < 1e-6);
        let s = contact_stress(1e4, 1e-3, 0.0, &dv, 1e-5, 1e-6, &capped);
        assert!((s.norm() - 0.5e6).abs() < 1e-6);
        assert_eq!(contact_stress(1e4, 1e-3, 1.0, &Vector3::zeros(), 1e-5, 1e-6, &p), Vector3::zeros());
        // the film never gets thinner than g_min
        let thin = contact_stress(1e4, 1e-3, 1.0, &dv, 1e-9, 1e-6, &p);
        let floor = contact_stress(1e4, 1e-3, 1.0, &dv, 1e-6, 1e-6, &p);
        assert_eq!(thin, floor);
    }

    proptest! {
        #[test]
        fn contact_stress_is_capped_and_odd(
            vx in -1.0f64..1.0, vy in -1.0f64..1.0, phi in -3.2f64..3.2, g in 1e-8f64..1e-3, cap in 1.0f64..1e7,
        ) {
            let p = ContactParams { cap, g_min: 1e-6 };
            let dv = Vector3::new(vx, vy, 0.0);
            let s = contact_stress(1e4, 1e-3, phi, &dv, g, 1e-6, &p);
            prop_assert!(s.norm() <= cap * (1.0 + 1e-12));
            prop_assert_eq!(contact_stress(1e4, 1e-3, phi, &(-dv), g, 1e-6, &p), -s);
        }
    }
}
