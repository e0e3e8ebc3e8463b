//! Closure approximations of the fourth-order orientation tensor.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix3;

use super::{OrientationTensor2, PlanarState};
use crate::error::{Error, Result};

pub type Tensor4 = [[[[f64; 3]; 3]; 3]; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClosureKind {
    /// A ⊗ A. Exact for aligned states and admits closed-form solutions.
    #[default]
    Quadratic,
    /// Hand's linear closure, exact for 3D isotropy.
    Linear,
    /// Blend of linear and quadratic with weight f = 1 - 27 det(A).
    Hybrid,
    /// Invariant-based optimal fitting closure.
    Ibof,
}

impl ClosureKind {
    pub const ALL: [ClosureKind; 4] = [
        ClosureKind::Quadratic,
        ClosureKind::Linear,
        ClosureKind::Hybrid,
        ClosureKind::Ibof,
    ];
}

impl FromStr for ClosureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "quadratic" => Ok(ClosureKind::Quadratic),
            "linear" => Ok(ClosureKind::Linear),
            "hybrid" => Ok(ClosureKind::Hybrid),
            "ibof" => Ok(ClosureKind::Ibof),
            other => Err(Error::InvalidInput(format!(
                "unsupported closure `{other}` (expected quadratic, linear, hybrid or ibof)"
            ))),
        }
    }
}

impl fmt::Display for ClosureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClosureKind::Quadratic => "quadratic",
            ClosureKind::Linear => "linear",
            ClosureKind::Hybrid => "hybrid",
            ClosureKind::Ibof => "ibof",
        })
    }
}

// IBOF polynomial coefficients for beta3, beta4 and beta6, transcribed from
// Chung & Tucker, J. Non-Newtonian Fluid Mech. 107 (2002) 67-86, in the
// monomial order of `ibof_monomials`.
const IBOF_BETA3: [f64; 21] = [
    0.24940908165786e2,
    -0.435101153160329e3,
    0.372389335663877e4,
    0.703443657916476e4,
    0.823995187366106e6,
    -0.133931929894245e6,
    0.880683515327916e6,
    -0.991630690741981e7,
    -0.159392396237307e5,
    0.800970026849796e7,
    -0.237010458689252e7,
    0.379010599355267e8,
    -0.337010820273821e8,
    0.322219416256417e5,
    -0.257258805870567e9,
    0.214419090344474e7,
    -0.449275591851490e8,
    -0.213133920223355e8,
    0.157076702372204e10,
    -0.232153488525298e5,
    -0.395769398304473e10,
];
const IBOF_BETA4: [f64; 21] = [
    -0.497217790110754e0,
    0.234980797511405e2,
    -0.391044251397838e3,
    0.153965820593506e3,
    0.152772950743819e6,
    -0.213755248785646e4,
    -0.400138947092812e4,
    -0.185949305922308e7,
    0.296004865275814e4,
    0.247717810054366e7,
    0.101013983339062e6,
    0.732341494213578e7,
    -0.147919027644202e8,
    -0.104092072189767e5,
    -0.635149929624336e8,
    -0.247435106210237e6,
    -0.902980378929272e7,
    0.724969796807399e7,
    0.487093452892595e9,
    0.138088690964946e5,
    -0.160162178614234e10,
];
const IBOF_BETA6: [f64; 21] = [
    0.234146291570999e2,
    -0.412048043372534e3,
    0.319553200392089e4,
    0.573259594331015e4,
    -0.485212803064813e5,
    -0.605006113515592e5,
    -0.477173740017567e5,
    0.599066486689836e7,
    -0.110656935176569e5,
    -0.460543580680696e8,
    0.203042960322874e7,
    -0.556606156734835e8,
    0.567424911007837e9,
    0.128967058686204e5,
    -0.152752854956514e10,
    -0.499321746092534e8,
    0.132124828143333e9,
    -0.162359994620983e10,
    0.792526849882218e10,
    0.466767581292985e4,
    -0.128050778279459e11,
];

fn ibof_monomials(ii: f64, iii: f64) -> [f64; 21] {
    let (ii2, ii3, ii4) = (ii * ii, ii * ii * ii, ii * ii * ii * ii);
    let (iii2, iii3, iii4) = (iii * iii, iii * iii * iii, iii * iii * iii * iii);
    [
        1.0,
        ii,
        ii2,
        iii,
        iii2,
        ii * iii,
        ii2 * iii,
        ii * iii2,
        ii3,
        iii3,
        ii3 * iii,
        ii2 * iii2,
        ii * iii3,
        ii4,
        iii4,
        ii4 * iii,
        ii3 * iii2,
        ii2 * iii3,
        ii * iii4,
        ii4 * ii,
        iii4 * iii,
    ]
}

/// beta1..beta6; beta1, beta2 and beta5 follow from the normalization 𝔸:I = A.
fn ibof_betas(a: &Matrix3<f64>) -> [f64; 6] {
    let ii = a[(0, 0)] * a[(1, 1)] + a[(1, 1)] * a[(2, 2)] + a[(0, 0)] * a[(2, 2)]
        - a[(0, 1)] * a[(1, 0)]
        - a[(1, 2)] * a[(2, 1)]
        - a[(0, 2)] * a[(2, 0)];
    let iii = a.determinant();
    let mono = ibof_monomials(ii, iii);
    let dot = |c: &[f64; 21]| c.iter().zip(mono.iter()).map(|(c, m)| c * m).sum::<f64>();
    let b3 = dot(&IBOF_BETA3);
    let b4 = dot(&IBOF_BETA4);
    let b6 = dot(&IBOF_BETA6);
    let b1 = 3.0 / 5.0
        * (-1.0 / 7.0 + 1.0 / 5.0 * b3 * (1.0 / 7.0 + 4.0 / 7.0 * ii + 8.0 / 3.0 * iii)
            - b4 * (1.0 / 5.0 - 8.0 / 15.0 * ii - 14.0 / 15.0 * iii)
            - b6 * (1.0 / 35.0 - 24.0 / 105.0 * iii - 4.0 / 35.0 * ii + 16.0 / 15.0 * ii * iii
                + 8.0 / 35.0 * ii * ii));
    let b2 = 6.0 / 7.0
        * (1.0 - 1.0 / 5.0 * b3 * (1.0 + 4.0 * ii) + 7.0 / 5.0 * b4 * (1.0 / 6.0 - ii)
            - b6 * (-1.0 / 5.0 + 2.0 / 3.0 * iii + 4.0 / 5.0 * ii - 8.0 / 5.0 * ii * ii));
    let b5 = -4.0 / 5.0 * b3 - 7.0 / 5.0 * b4 - 6.0 / 5.0 * b6 * (1.0 - 4.0 / 3.0 * ii);
    [b1, b2, b3, b4, b5, b6]
}

/// Fully symmetrized product of two symmetric second-order tensors.
#[inline]
fn sym(a: &Matrix3<f64>, b: &Matrix3<f64>, i: usize, j: usize, k: usize, l: usize) -> f64 {
    (a[(i, j)] * b[(k, l)]
        + a[(k, l)] * b[(i, j)]
        + a[(i, k)] * b[(j, l)]
        + a[(j, l)] * b[(i, k)]
        + a[(i, l)] * b[(j, k)]
        + a[(j, k)] * b[(i, l)])
        / 6.0
}

/// Precomputed per-state data so that single components stay cheap.
struct Closure {
    a: Matrix3<f64>,
    a2: Matrix3<f64>,
    rule: Rule,
}

enum Rule {
    Quadratic,
    Linear,
    Hybrid(f64),
    Ibof([f64; 6]),
}

impl Closure {
    fn new(a: &Matrix3<f64>, kind: ClosureKind) -> Self {
        let rule = match kind {
            ClosureKind::Quadratic => Rule::Quadratic,
            ClosureKind::Linear => Rule::Linear,
            ClosureKind::Hybrid => Rule::Hybrid(1.0 - 27.0 * a.determinant()),
            ClosureKind::Ibof => Rule::Ibof(ibof_betas(a)),
        };
        let a2 = if matches!(rule, Rule::Ibof(_)) { a * a } else { Matrix3::zeros() };
        Self { a: *a, a2, rule }
    }

    fn linear(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let id = Matrix3::identity();
        -3.0 / 35.0 * sym(&id, &id, i, j, k, l) + 6.0 / 7.0 * sym(&self.a, &id, i, j, k, l)
    }

    fn component(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let a = &self.a;
        match self.rule {
            Rule::Quadratic => a[(i, j)] * a[(k, l)],
            Rule::Linear => self.linear(i, j, k, l),
            Rule::Hybrid(f) => (1.0 - f) * self.linear(i, j, k, l) + f * a[(i, j)] * a[(k, l)],
            Rule::Ibof(b) => {
                let id = Matrix3::identity();
                let a2 = &self.a2;
                b[0] * sym(&id, &id, i, j, k, l)
                    + b[1] * sym(&id, a, i, j, k, l)
                    + b[2] * sym(a, a, i, j, k, l)
                    + b[3] * sym(&id, a2, i, j, k, l)
                    + b[4] * sym(a, a2, i, j, k, l)
                    + b[5] * sym(a2, a2, i, j, k, l)
            }
        }
    }
}

/// Fourth-order orientation tensor approximated from `a`.
pub fn closure_fourth(a: &OrientationTensor2, kind: ClosureKind) -> Tensor4 {
    let c = Closure::new(a.matrix(), kind);
    let mut out = [[[[0.0; 3]; 3]; 3]; 3];
    for (i, oi) in out.iter_mut().enumerate() {
        for (j, oj) in oi.iter_mut().enumerate() {
            for (k, ok) in oj.iter_mut().enumerate() {
                for (l, v) in ok.iter_mut().enumerate() {
                    *v = c.component(i, j, k, l);
                }
            }
        }
    }
    out
}

/// The fourth-order components entering the planar elongation equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarFourth {
    pub xxxx: f64,
    pub yyxx: f64,
    pub xyxx: f64,
}

pub fn planar_fourth(s: &PlanarState, kind: ClosureKind) -> PlanarFourth {
    let a = Matrix3::new(s.axx, s.axy, 0.0, s.axy, s.ayy, 0.0, 0.0, 0.0, 0.0);
    let c = Closure::new(&a, kind);
    PlanarFourth {
        xxxx: c.component(0, 0, 0, 0),
        yyxx: c.component(1, 1, 0, 0),
        xyxx: c.component(0, 1, 0, 0),
    }
}

/// Double contraction 𝔸 : D.
pub fn contract(t: &Tensor4, d: &Matrix3<f64>) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| {
        let mut s = 0.0;
        for k in 0..3 {
            for l in 0..3 {
                s += t[i][j][k][l] * d[(k, l)];
            }
        }
        s
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;
    use proptest::prelude::*;

    fn random_orientation(e: [f64; 3], angles: [f64; 3]) -> OrientationTensor2 {
        let sum: f64 = e.iter().sum();
        let d = Matrix3::from_diagonal(&Vector3::new(e[0] / sum, e[1] / sum, e[2] / sum));
        let r = nalgebra::Rotation3::from_euler_angles(angles[0], angles[1], angles[2]);
        let m = r.matrix() * d * r.matrix().transpose();
        OrientationTensor2::new((m + m.transpose()) / 2.0).unwrap()
    }

    #[test]
    fn aligned_state_is_exact() {
        let a = OrientationTensor2::aligned(Vector3::x());
        for kind in [ClosureKind::Quadratic, ClosureKind::Hybrid, ClosureKind::Ibof] {
            let t = closure_fourth(&a, kind);
            let tol = if kind == ClosureKind::Ibof { 1e-3 } else { 1e-14 };
            assert!((t[0][0][0][0] - 1.0).abs() < tol, "{kind}: {}", t[0][0][0][0]);
            assert!(t[1][1][0][0].abs() < tol);
            assert!(t[1][1][1][1].abs() < tol);
            assert!(t[0][1][0][1].abs() < tol);
        }
        // the linear closure is only exact for 3D isotropy
        let lin = closure_fourth(&a, ClosureKind::Linear);
        assert!((lin[0][0][0][0] - 27.0 / 35.0).abs() < 1e-14);
    }

    #[test]
    fn planar_isotropic_values() {
        let a = OrientationTensor2::planar_isotropic();
        let q = closure_fourth(&a, ClosureKind::Quadratic);
        assert_eq!(q[0][0][0][0], 0.25);
        // exact value 3/8; IBOF is fitted to distributions and lands close
        let ibof = closure_fourth(&a, ClosureKind::Ibof);
        assert!((ibof[0][0][0][0] - 0.375).abs() < 1e-4);
    }

    #[test]
    fn isotropic_3d_linear_is_exact() {
        let a = OrientationTensor2::isotropic_3d();
        for kind in [ClosureKind::Linear, ClosureKind::Hybrid, ClosureKind::Ibof] {
            let t = closure_fourth(&a, kind);
            assert!((t[0][0][0][0] - 0.2).abs() < 1e-9, "{kind}");
            assert!((t[0][0][1][1] - 1.0 / 15.0).abs() < 1e-9, "{kind}");
        }
    }

    #[test]
    fn planar_fast_path_matches_full_tensor() {
        let s = PlanarState::new(0.63, 0.37, -0.11).unwrap();
        for kind in ClosureKind::ALL {
            let t = closure_fourth(&s.to_tensor(), kind);
            let p = planar_fourth(&s, kind);
            assert_eq!(p.xxxx, t[0][0][0][0]);
            assert_eq!(p.yyxx, t[1][1][0][0]);
            assert_eq!(p.xyxx, t[0][1][0][0]);
        }
    }

    #[test]
    fn hybrid_is_quadratic_for_planar_states() {
        let s = PlanarState::new(0.8, 0.2, 0.1).unwrap();
        let h = planar_fourth(&s, ClosureKind::Hybrid);
        let q = planar_fourth(&s, ClosureKind::Quadratic);
        assert!((h.xxxx - q.xxxx).abs() < 1e-15);
        assert!((h.yyxx - q.yyxx).abs() < 1e-15);
    }

    #[test]
    fn parses_kinds() {
        assert_eq!("IBOF".parse::<ClosureKind>().unwrap(), ClosureKind::Ibof);
        assert!(matches!("natural".parse::<ClosureKind>(), Err(Error::InvalidInput(_))));
        for k in ClosureKind::ALL {
            assert_eq!(k.to_string().parse::<ClosureKind>().unwrap(), k);
        }
    }

    proptest! {
        #[test]
        fn contraction_and_symmetry(
            e0 in 0.0f64..1.0, e1 in 0.0f64..1.0, e2 in 0.0f64..1.0,
            t0 in 0.0f64..6.3, t1 in 0.0f64..6.3, t2 in 0.0f64..6.3,
        ) {
            prop_assume!(e0 + e1 + e2 > 0.05);
            let a = random_orientation([e0, e1, e2], [t0, t1, t2]);
            for kind in ClosureKind::ALL {
                let t = closure_fourth(&a, kind);
                let full = matches!(kind, ClosureKind::Linear | ClosureKind::Ibof);
                for i in 0..3 { for j in 0..3 {
                    let c: f64 = (0..3).map(|k| t[i][j][k][k]).sum();
                    prop_assert!((c - a.matrix()[(i, j)]).abs() < 1e-6, "{} contraction", kind);
                    for k in 0..3 { for l in 0..3 {
                        let v = t[i][j][k][l];
                        prop_assert!((v - t[j][i][k][l]).abs() < 1e-12);
                        prop_assert!((v - t[i][j][l][k]).abs() < 1e-12);
                        prop_assert!((v - t[k][l][i][j]).abs() < 1e-12);
                        if full {
                            prop_assert!((v - t[i][k][j][l]).abs() < 1e-9, "{} full symmetry", kind);
                        }
                    }}
                }}
            }
        }
    }
}
