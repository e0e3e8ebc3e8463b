//! Jeffery's equation for the second-order orientation tensor.

use nalgebra::Matrix3;

use super::closure::{closure_fourth, contract, planar_fourth, ClosureKind};
use super::{OrientationTensor2, PlanarState};

/// Material rate of A for strain rate `d`, vorticity `w` and shape factor `xi`.
///
/// `w` is the antisymmetric part of the velocity gradient L_ij = dv_i/dx_j, so
/// rigid rotation carries A as W·A - A·W.
pub fn jeffery_rate(
    a: &OrientationTensor2,
    closure: ClosureKind,
    d: &Matrix3<f64>,
    w: &Matrix3<f64>,
    xi: f64,
) -> Matrix3<f64> {
    let am = a.matrix();
    let a4 = closure_fourth(a, closure);
    w * am - am * w + (d * am + am * d - contract(&a4, d) * 2.0) * xi
}

/// Rates (Axx, Ayy, Axy) under planar plug-flow elongation with strain rate
/// `dxx` along x, no strain along y and no shear.
pub fn planar_rates(s: &PlanarState, dxx: f64, closure: ClosureKind) -> (f64, f64, f64) {
    if dxx == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let f = planar_fourth(s, closure);
    (
        2.0 * (s.axx - f.xxxx) * dxx,
        -2.0 * f.yyxx * dxx,
        (s.axy - 2.0 * f.xyxx) * dxx,
    )
}

fn rk4_planar(s: &PlanarState, dxx: f64, dt: f64, closure: ClosureKind) -> PlanarState {
    let add = |s: &PlanarState, k: (f64, f64, f64), h: f64| PlanarState {
        axx: s.axx + h * k.0,
        ayy: s.ayy + h * k.1,
        axy: s.axy + h * k.2,
    };
    let k1 = planar_rates(s, dxx, closure);
    let k2 = planar_rates(&add(s, k1, dt / 2.0), dxx, closure);
    let k3 = planar_rates(&add(s, k2, dt / 2.0), dxx, closure);
    let k4 = planar_rates(&add(s, k3, dt), dxx, closure);
    PlanarState {
        axx: s.axx + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        ayy: s.ayy + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        axy: s.axy + dt / 6.0 * (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2),
    }
    .renormalized()
}

/// Integrates the planar equations through a piecewise-constant strain-rate
/// history `(duration, dxx)` using classical RK4 steps of at most `max_strain`
/// strain each, renormalizing the trace after every step.
pub fn integrate_planar(
    start: PlanarState,
    history: &[(f64, f64)],
    closure: ClosureKind,
    max_strain: f64,
) -> PlanarState {
    let mut s = start;
    for &(duration, dxx) in history {
        if duration <= 0.0 || dxx == 0.0 {
            continue;
        }
        let n = ((duration * dxx.abs()) / max_strain).ceil().max(1.0) as usize;
        let dt = duration / n as f64;
        for _ in 0..n {
            s = rk4_planar(&s, dxx, dt, closure);
        }
    }
    s
}

/// RK4 integration of the full tensor equation under constant `d`, `w`.
pub fn integrate_jeffery(
    start: &OrientationTensor2,
    closure: ClosureKind,
    d: &Matrix3<f64>,
    w: &Matrix3<f64>,
    xi: f64,
    t_end: f64,
    steps: usize,
) -> Matrix3<f64> {
    let dt = t_end / steps as f64;
    let rate = |a: &Matrix3<f64>| {
        // intermediate stages may leave the admissible set slightly; the
        // closures are polynomial so evaluating them there is harmless
        jeffery_rate(&OrientationTensor2(*a), closure, d, w, xi)
    };
    let mut a = *start.matrix();
    for _ in 0..steps {
        let k1 = rate(&a);
        let k2 = rate(&(a + k1 * (dt / 2.0)));
        let k3 = rate(&(a + k2 * (dt / 2.0)));
        let k4 = rate(&(a + k3 * dt));
        a += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        a = (a + a.transpose()) / 2.0;
        a /= a.trace();
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::Vector3;
    use proptest::prelude::*;

    fn diag(a: f64, b: f64, c: f64) -> Matrix3<f64> {
        Matrix3::from_diagonal(&Vector3::new(a, b, c))
    }

    #[test]
    fn no_flow_no_rate() {
        let a = OrientationTensor2::planar_isotropic();
        for kind in ClosureKind::ALL {
            let r = jeffery_rate(&a, kind, &Matrix3::zeros(), &Matrix3::zeros(), 1.0);
            assert_eq!(r, Matrix3::zeros());
        }
    }

    #[test]
    fn aligned_state_is_a_fixed_point() {
        let a = OrientationTensor2::aligned(Vector3::x());
        let r = jeffery_rate(&a, ClosureKind::Quadratic, &diag(1.0, 0.0, -1.0), &Matrix3::zeros(), 1.0);
        assert_abs_diff_eq!(r, Matrix3::zeros(), epsilon = 1e-15);
        assert_eq!(
            planar_rates(&PlanarState::new(1.0, 0.0, 0.0).unwrap(), 1.0, ClosureKind::Quadratic),
            (0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn planar_isotropic_elongation_rate() {
        let a = OrientationTensor2::planar_isotropic();
        let r = jeffery_rate(&a, ClosureKind::Quadratic, &diag(1.0, 0.0, -1.0), &Matrix3::zeros(), 1.0);
        assert_abs_diff_eq!(r[(0, 0)], 0.5, epsilon = 1e-15);
        let p = planar_rates(&PlanarState::ISOTROPIC, 1.0, ClosureKind::Quadratic);
        assert_eq!(p, (0.5, -0.5, 0.0));
        assert_eq!(planar_rates(&PlanarState::ISOTROPIC, 0.0, ClosureKind::Ibof), (0.0, 0.0, 0.0));
    }

    #[test]
    fn rigid_rotation_preserves_eigenvalues() {
        let s = PlanarState::new(0.9, 0.1, 0.0).unwrap();
        let mut w = Matrix3::zeros();
        w[(0, 1)] = -1.0;
        w[(1, 0)] = 1.0;
        let a = integrate_jeffery(&s.to_tensor(), ClosureKind::Quadratic, &Matrix3::zeros(), &w, 1.0, std::f64::consts::FRAC_PI_2, 400);
        // a quarter turn swaps the principal directions
        assert_abs_diff_eq!(a[(0, 0)], 0.1, epsilon = 1e-9);
        assert_abs_diff_eq!(a[(1, 1)], 0.9, epsilon = 1e-9);
    }

    #[test]
    fn quadratic_planar_elongation_is_logistic() {
        for strain in [0.1, 0.5, 1.0, 2.0] {
            let s = integrate_planar(PlanarState::ISOTROPIC, &[(strain, 1.0)], ClosureKind::Quadratic, 1e-3);
            let logistic = (2.0 * strain).exp() / (1.0 + (2.0 * strain).exp());
            assert_abs_diff_eq!(s.axx, logistic, epsilon = 1e-9);
        }
    }

    #[test]
    fn trace_drift_without_renormalization_is_small() {
        // plain RK4 on the full tensor, one unit of strain
        let d = diag(1.0, 0.0, -1.0);
        for kind in ClosureKind::ALL {
            let start = OrientationTensor2::planar_isotropic();
            let mut a = *start.matrix();
            let dt = 1e-3;
            for _ in 0..1000 {
                let rate = |a: &Matrix3<f64>| jeffery_rate(&OrientationTensor2(*a), kind, &d, &Matrix3::zeros(), 1.0);
                let k1 = rate(&a);
                let k2 = rate(&(a + k1 * (dt / 2.0)));
                let k3 = rate(&(a + k2 * (dt / 2.0)));
                let k4 = rate(&(a + k3 * dt));
                a += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
            }
            assert!((a.trace() - 1.0).abs() < 1e-6, "{kind}: {}", a.trace());
        }
    }

    proptest! {
        #[test]
        fn planar_rates_match_full_equation(axx in 0.0f64..1.0, c in -1.0f64..1.0, dxx in -2.0f64..2.0) {
            let ayy = 1.0 - axx;
            let axy = c * (axx * ayy).sqrt();
            let s = PlanarState::new(axx, ayy, axy).unwrap();
            for kind in ClosureKind::ALL {
                let full = jeffery_rate(&s.to_tensor(), kind, &diag(dxx, 0.0, 0.0), &Matrix3::zeros(), 1.0);
                let p = planar_rates(&s, dxx, kind);
                prop_assert!((full[(0, 0)] - p.0).abs() < 1e-12);
                prop_assert!((full[(1, 1)] - p.1).abs() < 1e-12);
                prop_assert!((full[(0, 1)] - p.2).abs() < 1e-12);
                let sym = full - full.transpose();
                prop_assert!(sym.abs().max() < 1e-14);
                prop_assert!(full.trace().abs() < 1e-9);
            }
        }

        #[test]
        fn elongation_increases_axx_monotonically(dxx in 0.01f64..3.0) {
            for kind in [ClosureKind::Quadratic, ClosureKind::Ibof] {
                let mut s = PlanarState::ISOTROPIC;
                for _ in 0..50 {
                    let next = integrate_planar(s, &[(0.05, dxx)], kind, 1e-2);
                    prop_assert!(next.axx >= s.axx - 1e-12);
                    prop_assert!(next.axx <= 1.0 + 1e-9);
                    prop_assert!((next.axx + next.ayy - 1.0).abs() < 1e-12);
                    s = next;
                }
            }
        }
    }
}
