//! Mesoscale bundle kinematics: random stacks of bundle chains carried by a
//! prescribed plug flow, with kd-tree neighbor search, matrix drag and the
//! reaction body force it implies.

mod advect;
mod coupling;
mod driver;
mod kdtree;
mod stack;

use nalgebra::Vector3;

pub use advect::{advect, measure_orientation, measure_orientation_weighted, AffineElongation, PlugFlow, VelocityField, Weighting};
pub use coupling::{
    accumulate_body_force, contact_stress, gaussian_weight, hydrodynamic_force, neighbor_weights, relative_velocity,
    ContactParams, DragCoefficients, EulerGrid, NeighborWeights,
};
pub use driver::{run_bundles, BundleRunConfig, BundleRunOutput, CouplingParams, Kinematics, StepDiagnostics};
pub use kdtree::{brute_force_query, NeighborIndex};
pub use stack::{generate_stack, StackSpec};

pub type Point = Vector3<f64>;

/// Geometry and stiffness shared by the bundles of a stack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BundleParams {
    /// Cross-section area (m²).
    pub area: f64,
    /// Segment rest length (m).
    pub rest_length: f64,
    /// Axial stiffness (Pa); carried as metadata, the kinematics ignore it.
    pub youngs_modulus: f64,
}

impl Default for BundleParams {
    fn default() -> Self {
        Self {
            area: 0.03e-6,
            rest_length: 2.5e-3,
            youngs_modulus: 72e9,
        }
    }
}

impl BundleParams {
    /// Radius of the circle with the cross-section area (m).
    pub fn radius(&self) -> f64 {
        (self.area / std::f64::consts::PI).sqrt()
    }
}

/// A bundle as a chain of straight segments.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleChain {
    pub nodes: Vec<Point>,
    pub params: BundleParams,
}

impl BundleChain {
    pub fn segment_count(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.nodes.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| (b - a).norm()).sum()
    }

    /// Fiber volume of the chain (m³).
    pub fn volume(&self) -> f64 {
        self.length() * self.params.area
    }
}

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point,
    pub max: Point,
}

impl Aabb {
    pub fn new(min: Point, max: Point) -> Self {
        Self { min, max }
    }

    /// Box from the origin to `extent`.
    pub fn from_extent(extent: Point) -> Self {
        Self::new(Point::zeros(), extent)
    }

    pub fn extent(&self) -> Point {
        self.max - self.min
    }

    pub fn volume(&self) -> f64 {
        let e = self.extent();
        e.x * e.y * e.z
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }

    pub fn clamp(&self, p: &Point) -> Point {
        Point::new(
            p.x.clamp(self.min.x, self.max.x),
            p.y.clamp(self.min.y, self.max.y),
            p.z.clamp(self.min.z, self.max.z),
        )
    }

    /// Parameter interval of `a + s (b - a)` inside the box, if any.
    pub fn clip_line(&self, a: &Point, b: &Point) -> Option<(f64, f64)> {
        let d = b - a;
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for k in 0..3 {
            if d[k] == 0.0 {
                if a[k] < self.min[k] || a[k] > self.max[k] {
                    return None;
                }
            } else {
                let s0 = (self.min[k] - a[k]) / d[k];
                let s1 = (self.max[k] - a[k]) / d[k];
                lo = lo.max(s0.min(s1));
                hi = hi.min(s0.max(s1));
            }
        }
        (lo <= hi).then_some((lo, hi))
    }
}
