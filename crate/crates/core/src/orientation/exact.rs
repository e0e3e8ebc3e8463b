//! Closure-free reference: a planar fiber population evolved as material lines.

use std::f64::consts::PI;

use super::PlanarState;

/// Second and fourth moments of an evolved planar direction population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactPlanar {
    pub state: PlanarState,
    pub axxxx: f64,
    pub axxyy: f64,
    pub ayyyy: f64,
    pub axxxy: f64,
}

/// Starts from `n_dirs` equally spaced in-plane directions (planar isotropy)
/// and stretches each one under the history `(duration, dxx)`, with the flow
/// leaving y unstrained. Returns the resulting moments.
///
/// A material line (cos θ, sin θ) maps to (e^s cos θ, sin θ) after a strain
/// s = ∫ Dxx dt, which is the slender-fiber Jeffery solution.
pub fn evolve_planar_exact(history: &[(f64, f64)], n_dirs: usize) -> ExactPlanar {
    let strain: f64 = history.iter().map(|&(dt, dxx)| dt * dxx).sum();
    let stretch = strain.exp();
    let n = n_dirs.max(1);
    let mut m = [0.0f64; 7];
    for i in 0..n {
        let theta = PI * (i as f64 + 0.5) / n as f64;
        let (x, y) = (stretch * theta.cos(), theta.sin());
        let r = x.hypot(y);
        let (px, py) = (x / r, y / r);
        let (xx, yy, xy) = (px * px, py * py, px * py);
        m[0] += xx;
        m[1] += yy;
        m[2] += xy;
        m[3] += xx * xx;
        m[4] += xx * yy;
        m[5] += yy * yy;
        m[6] += xx * xy;
    }
    let k = 1.0 / n as f64;
    ExactPlanar {
        state: PlanarState {
            axx: m[0] * k,
            ayy: m[1] * k,
            axy: m[2] * k,
        },
        axxxx: m[3] * k,
        axxyy: m[4] * k,
        ayyyy: m[5] * k,
        axxxy: m[6] * k,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orientation::{integrate_planar, ClosureKind};
    use approx::assert_abs_diff_eq;

    #[test]
    fn no_strain_is_planar_isotropic() {
        let e = evolve_planar_exact(&[], 10_000);
        assert_abs_diff_eq!(e.state.axx, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(e.state.axy, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.axxxx, 3.0 / 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.axxyy, 1.0 / 8.0, epsilon = 1e-12);
    }

    #[test]
    fn matches_closed_form_average() {
        // mean of k^2 cos^2 / (k^2 cos^2 + sin^2) over a half turn is k / (1 + k)
        for strain in [0.1f64, 0.5, 1.0, 2.0] {
            let e = evolve_planar_exact(&[(strain, 1.0)], 100_000);
            let k = strain.exp();
            assert_abs_diff_eq!(e.state.axx, k / (1.0 + k), epsilon = 1e-9);
            assert_abs_diff_eq!(e.state.axx + e.state.ayy, 1.0, epsilon = 1e-12);
        }
        let e = evolve_planar_exact(&[(0.5, 1.0)], 1_000_000);
        assert_abs_diff_eq!(e.state.axx, 0.6225, epsilon = 1e-4);
    }

    #[test]
    fn only_total_strain_matters() {
        let a = evolve_planar_exact(&[(0.2, 1.0), (0.3, 2.0), (1.0, -0.1)], 10_000);
        let b = evolve_planar_exact(&[(0.7, 1.0)], 10_000);
        assert_abs_diff_eq!(a.state.axx, b.state.axx, epsilon = 1e-12);
    }

    #[test]
    fn quadratic_closure_overshoots_reference() {
        let mut worst = 0.0f64;
        for i in 1..=20 {
            let strain = 0.1 * i as f64;
            let exact = evolve_planar_exact(&[(strain, 1.0)], 10_000).state.axx;
            let quad = integrate_planar(PlanarState::ISOTROPIC, &[(strain, 1.0)], ClosureKind::Quadratic, 1e-3).axx;
            assert!(quad > exact);
            worst = worst.max(quad - exact);
        }
        // largest gap sits near unit strain
        assert!(worst > 0.14 && worst < 0.155, "{worst}");
    }
}
