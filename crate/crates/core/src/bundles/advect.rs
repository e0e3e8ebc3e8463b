//! Bundle transport by prescribed velocity fields and ensemble orientation.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use super::{Aabb, BundleChain, Point};
use crate::error::{Error, Result};
use crate::macro1d::MacroState;
use crate::orientation::OrientationTensor2;

/// Matrix velocity prescribed over a time-dependent domain.
pub trait VelocityField: Sync {
    fn velocity(&self, x: &Point, t: f64) -> Vector3<f64>;
    fn domain(&self, t: f64) -> Aabb;
}

/// v = (Dxx x, 0, −Dxx z): planar elongation at constant thickness-times-length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineElongation {
    pub dxx: f64,
    /// Domain at t = 0; it deforms with the flow about the origin.
    pub initial: Aabb,
}

impl VelocityField for AffineElongation {
    fn velocity(&self, x: &Point, _t: f64) -> Vector3<f64> {
        Vector3::new(self.dxx * x.x, 0.0, -self.dxx * x.z)
    }

    fn domain(&self, t: f64) -> Aabb {
        let s = Vector3::new((self.dxx * t).exp(), 1.0, (-self.dxx * t).exp());
        Aabb::new(self.initial.min.component_mul(&s), self.initial.max.component_mul(&s))
    }
}

/// Plug flow of a press-rheometer charge frozen at one instant: v_x from
/// the nodal velocity profile, v_z = ḣ z / h, v_y = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PlugFlow {
    pub front: f64,
    pub gap: f64,
    pub hdot: f64,
    pub width: f64,
    /// Velocity at x*_i = i / (n − 1).
    pub profile: Vec<f64>,
}

impl PlugFlow {
    pub fn from_state(state: &MacroState, width: f64) -> Self {
        Self {
            front: state.front,
            gap: state.gap,
            hdot: state.hdot,
            width,
            profile: state.v.clone(),
        }
    }
}

impl VelocityField for PlugFlow {
    fn velocity(&self, x: &Point, _t: f64) -> Vector3<f64> {
        let vx = MacroState::interpolate(&self.profile, x.x / self.front);
        Vector3::new(vx, 0.0, self.hdot * x.z / self.gap)
    }

    fn domain(&self, _t: f64) -> Aabb {
        Aabb::from_extent(Point::new(self.front, self.width, self.gap))
    }
}

/// Moves every node over `dt` with the explicit midpoint rule and clamps
/// nodes leaving the domain; returns the number of clamped nodes.
pub fn advect<F: VelocityField>(chains: &mut [BundleChain], field: &F, t: f64, dt: f64) -> usize {
    if dt == 0.0 {
        return 0;
    }
    let domain = field.domain(t + dt);
    chains
        .par_iter_mut()
        .map(|chain| {
            let mut clamped = 0;
            for x in chain.nodes.iter_mut() {
                let half = *x + 0.5 * dt * field.velocity(x, t);
                let next = *x + dt * field.velocity(&half, t + 0.5 * dt);
                let inside = domain.clamp(&next);
                if inside != next {
                    clamped += 1;
                }
                *x = inside;
            }
            clamped
        })
        .sum()
}

/// How segments enter the ensemble average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// By current segment length.
    #[default]
    Length,
    /// Each segment once. Under affine motion this is the material-line
    /// average of the exact fiber solution, since segments stretch but are
    /// never created or destroyed.
    Count,
}

/// Length-weighted A = Σ ℓ p⊗p / Σ ℓ over segments whose midpoint lies in
/// `region`.
pub fn measure_orientation(chains: &[BundleChain], region: &Aabb) -> Result<OrientationTensor2> {
    measure_orientation_weighted(chains, region, Weighting::Length)
}

pub fn measure_orientation_weighted(chains: &[BundleChain], region: &Aabb, weighting: Weighting) -> Result<OrientationTensor2> {
    let mut acc = Matrix3::zeros();
    let mut total = 0.0;
    for chain in chains {
        for (a, b) in chain.segments() {
            if !region.contains(&(0.5 * (a + b))) {
                continue;
            }
            let d = b - a;
            let l = d.norm();
            if l == 0.0 {
                continue;
            }
            let w = match weighting {
                Weighting::Length => 1.0 / l,
                Weighting::Count => 1.0 / (l * l),
            };
            // ℓ p⊗p = d d^T / ℓ
            acc += d * d.transpose() * w;
            total += match weighting {
                Weighting::Length => l,
                Weighting::Count => 1.0,
            };
        }
    }
    if total == 0.0 {
        return Err(Error::EmptyRegion);
    }
    let mut a = acc / total;
    // exact symmetry and unit trace against summation round-off
    a = 0.5 * (a + a.transpose());
    a /= a.trace();
    OrientationTensor2::new(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundles::{generate_stack, BundleParams, StackSpec};
    use crate::orientation::evolve_planar_exact;

    fn chain(nodes: Vec<Point>) -> BundleChain {
        BundleChain {
            nodes,
            params: BundleParams::default(),
        }
    }

    struct Uniform(Vector3<f64>);
    impl VelocityField for Uniform {
        fn velocity(&self, _x: &Point, _t: f64) -> Vector3<f64> {
            self.0
        }
        fn domain(&self, _t: f64) -> Aabb {
            Aabb::new(Point::repeat(-1.0), Point::repeat(1.0))
        }
    }

    #[test]
    fn zero_and_uniform_fields() {
        let c0 = vec![chain(vec![Point::zeros(), Point::new(1e-3, 2e-3, 0.0), Point::new(2e-3, 2e-3, 1e-3)])];
        let mut c = c0.clone();
        assert_eq!(advect(&mut c, &Uniform(Vector3::zeros()), 0.0, 0.1), 0);
        assert_eq!(c, c0);
        let shift = Vector3::new(1e-3, -2e-3, 0.5e-3);
        advect(&mut c, &Uniform(shift), 0.0, 2.0);
        for (a, b) in c[0].segments().zip(c0[0].segments()) {
            assert!(((a.1 - a.0) - (b.1 - b.0)).norm() < 1e-15);
            assert!((a.0 - b.0 - 2.0 * shift).norm() < 1e-15);
        }
    }

    #[test]
    fn leaving_nodes_are_clamped() {
        let mut c = vec![chain(vec![Point::new(0.9, 0.0, 0.0), Point::new(0.0, 0.0, 0.0)])];
        let n = advect(&mut c, &Uniform(Vector3::new(1.0, 0.0, 0.0)), 0.0, 0.5);
        assert_eq!(n, 1);
        assert_eq!(c[0].nodes[0].x, 1.0);
    }

    #[test]
    fn orientation_of_simple_sets() {
        let region = Aabb::new(Point::repeat(-1.0), Point::repeat(1.0));
        let along = vec![chain(vec![Point::zeros(), Point::new(0.1, 0.0, 0.0), Point::new(0.3, 0.0, 0.0)])];
        let a = measure_orientation(&along, &region).unwrap();
        assert_eq!(*a.matrix(), Matrix3::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0));
        let cross = vec![
            chain(vec![Point::zeros(), Point::new(0.1, 0.0, 0.0)]),
            chain(vec![Point::zeros(), Point::new(0.0, 0.1, 0.0)]),
        ];
        let a = measure_orientation(&cross, &region).unwrap();
        assert_eq!(*a.matrix(), Matrix3::new(0.5, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0));
        let far = Aabb::new(Point::repeat(5.0), Point::repeat(6.0));
        assert!(matches!(measure_orientation(&cross, &far), Err(Error::EmptyRegion)));
    }

    #[test]
    fn elongation_matches_affine_map_of_the_initial_stack() {
        let spec = StackSpec {
            region: Aabb::from_extent(Point::new(0.1, 0.1, 2e-3)),
            volume_fraction: 0.02,
            ..StackSpec::reference()
        };
        let initial = generate_stack(&spec).unwrap();
        let mut chains = initial.clone();
        let field = AffineElongation {
            dxx: 0.5,
            initial: spec.region,
        };
        let dt = 0.01;
        for k in 0..100 {
            advect(&mut chains, &field, k as f64 * dt, dt);
        }
        // material lines map exactly through F = diag(e^{Dt}, 1, e^{-Dt})
        let f = Vector3::new(0.5f64.exp(), 1.0, (-0.5f64).exp());
        let mapped: Vec<BundleChain> = initial
            .iter()
            .map(|c| chain(c.nodes.iter().map(|x| x.component_mul(&f)).collect()))
            .collect();
        let region = field.domain(1.0);
        let a = measure_orientation(&chains, &region).unwrap();
        let b = measure_orientation(&mapped, &region).unwrap();
        assert!((a.matrix() - b.matrix()).amax() < 1e-4, "{} vs {}", a.matrix(), b.matrix());
        for (c, m) in chains.iter().zip(&mapped) {
            for (x, y) in c.nodes.iter().zip(&m.nodes) {
                assert!((x - y).norm() < 1e-5 * region.extent().x);
            }
        }
    }

    #[test]
    fn length_weighting_of_stretched_lines() {
        // a planar-isotropic set stretched by λ: number-weighted Axx is
        // λ/(1+λ) as given by the exact fiber solution, while weighting by
        // the stretched length tilts the average further toward x
        let lambda = 0.5f64.exp();
        let n = 3600;
        let chains: Vec<BundleChain> = (0..n)
            .map(|k| {
                let t = (k as f64 + 0.5) * std::f64::consts::PI / n as f64;
                chain(vec![Point::zeros(), Point::new(lambda * t.cos(), t.sin(), 0.0)])
            })
            .collect();
        let region = Aabb::new(Point::repeat(-2.0), Point::repeat(2.0));
        let axx = measure_orientation(&chains, &region).unwrap().matrix()[(0, 0)];
        let number = measure_orientation_weighted(&chains, &region, Weighting::Count).unwrap().matrix()[(0, 0)];
        let exact = evolve_planar_exact(&[(1.0, 0.5)], 20_000).state.axx;
        assert!((number - exact).abs() < 1e-4, "{number} vs {exact}");
        assert!((number - lambda / (1.0 + lambda)).abs() < 1e-6);
        assert!((axx - 0.679597594).abs() < 1e-6, "{axx}");
    }
}
