//! Rank-one connections between wells, Mallard twins and the habit-plane
//! equation `R M = 1 + b⊗m`.
//!
//! Every solver here reduces to the classical problem `Q F = 1 + b⊗m`,
//! which is solvable iff the eigenvalues `λ1 ≤ λ2 ≤ λ3` of `FᵀF` satisfy
//! `λ2 = 1`. Solutions are returned with their residuals recomputed from the
//! defining equation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mat3::{Mat3, MatError, Vec3, DEFAULT_TOL};
use crate::symmetry::{cubic_group, Rotation, Stretch};

/// Absolute tolerance on `|λ2 − 1|` for solvability.
pub const MIDDLE_EIGENVALUE_TOL: f64 = 1e-8;

/// Largest residual a returned connection may carry.
pub const CONNECTION_RESIDUAL_TOL: f64 = 1e-8;

/// Spread `λ3 − λ1` below which `FᵀF` is treated as the identity.
const COINCIDENCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TwinError {
    #[error("determinants differ: det A = {det_a}, det B = {det_b}")]
    DeterminantMismatch { det_a: f64, det_b: f64 },
    #[error("no rank-one connection: middle eigenvalue {middle_eigenvalue} differs from 1")]
    NoSolution { middle_eigenvalue: f64 },
    #[error("input is a rotation; the compatibility equation is trivial")]
    IdentityInput,
    #[error("the 180° rotation leaves the stretch invariant; no twin")]
    NoTwin,
    #[error("180° rotation about {axis} is not in the cubic group")]
    NotInGroup { axis: Vec3 },
    #[error("axis must be a unit vector (|e| = {norm})")]
    NonUnitAxis { norm: f64 },
    #[error("rank-one solution residual {residual:.3e} exceeds tolerance")]
    ResidualTooLarge { residual: f64 },
    #[error(transparent)]
    Matrix(#[from] MatError),
}

/// `(Q, a, n)` with `Q B = A + a⊗n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankOneConnection {
    pub rotation: Rotation,
    pub shear: Vec3,
    pub normal: Vec3,
    pub residual: f64,
}

impl RankOneConnection {
    /// `|Q B − A − a⊗n|`, recomputed.
    pub fn residual_for(&self, a: &Mat3, b: &Mat3) -> f64 {
        (*self.rotation.matrix() * *b - *a - self.shear.outer(&self.normal)).norm()
    }
}

/// Outcome of [`solve_rank_one`]. Coincident wells are a verdict rather than
/// an error because every rotation relating them is a (trivial) solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum RankOneOutcome {
    Connections { solutions: Vec<RankOneConnection> },
    NoSolution { middle_eigenvalue: f64 },
    DegenerateCoincidence,
}

impl RankOneOutcome {
    pub fn solutions(&self) -> &[RankOneConnection] {
        match self {
            RankOneOutcome::Connections { solutions } => solutions,
            _ => &[],
        }
    }
}

/// `(R, b, m)` with `R M = 1 + b⊗m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HabitPlaneSolution {
    pub rotation: Rotation,
    pub shape_vector: Vec3,
    pub habit_normal: Vec3,
    pub residual: f64,
}

impl HabitPlaneSolution {
    pub fn residual_for(&self, m: &Mat3) -> f64 {
        (*self.rotation.matrix() * *m - Mat3::identity() - self.shape_vector.outer(&self.habit_normal))
            .norm()
    }
}

enum Classical {
    Solutions([(Mat3, Vec3, Vec3); 2]),
    NoSolution(f64),
    Identity,
}

/// Solves `Q F = 1 + b⊗m`. Returned rotations are
/// projected onto SO(3); `m` is a unit vector.
fn classical_twin(f: &Mat3, tol: f64) -> Result<Classical, TwinError> {
    let f_inv = f.inverse()?;
    let eig = f.gram().symmetrized().sym_eigen()?;
    let [l1, l2, l3] = eig.values;
    if l3 - l1 <= COINCIDENCE_TOL {
        return Ok(Classical::Identity);
    }
    if (l2 - 1.0).abs() > tol {
        return Ok(Classical::NoSolution(l2));
    }
    let (e1, e3) = (eig.vectors[0], eig.vectors[2]);
    let l1c = l1.min(1.0);
    let l3c = l3.max(1.0);
    let spread = l3c - l1c;
    let rho = l3c.sqrt() - l1c.sqrt();
    let c1 = (l3c * (1.0 - l1c) / spread).sqrt();
    let c3 = (l1c * (l3c - 1.0) / spread).sqrt();
    let d1 = (1.0 - l1c).sqrt() / spread.sqrt();
    let d3 = (l3c - 1.0).sqrt() / spread.sqrt();
    let mut out = [(Mat3::zeros(), Vec3::ZERO, Vec3::ZERO); 2];
    for (slot, kappa) in out.iter_mut().zip([1.0, -1.0]) {
        let b = (e1 * c1 + e3 * (kappa * c3)) * rho;
        let m = e1 * (-d1) + e3 * (kappa * d3);
        let q = ((Mat3::identity() + b.outer(&m)) * f_inv).polar_rotation()?;
        *slot = (q, b, m);
    }
    Ok(Classical::Solutions(out))
}

fn sort_by_normal<T>(items: &mut [T], normal: impl Fn(&T) -> Vec3) {
    items.sort_by(|x, y| {
        let (a, b) = (normal(x), normal(y));
        a.0.iter()
            .zip(b.0.iter())
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

/// All `(Q, a, n)` with `Q B = A + a⊗n`, using the default λ2 tolerance.
pub fn solve_rank_one(a: &Mat3, b: &Mat3) -> Result<RankOneOutcome, TwinError> {
    solve_rank_one_tol(a, b, MIDDLE_EIGENVALUE_TOL)
}

pub fn solve_rank_one_tol(a: &Mat3, b: &Mat3, tol: f64) -> Result<RankOneOutcome, TwinError> {
    let (det_a, det_b) = (a.det(), b.det());
    if det_a <= 0.0
        || det_b <= 0.0
        || (det_a - det_b).abs() > DEFAULT_TOL * det_a.abs().max(det_b.abs())
    {
        return Err(TwinError::DeterminantMismatch { det_a, det_b });
    }
    // Q B A⁻¹ = 1 + a⊗(A⁻ᵀn), so solve the classical problem for F = B A⁻¹.
    let f = *b * a.inverse()?;
    let sols = match classical_twin(&f, tol)? {
        Classical::Identity => return Ok(RankOneOutcome::DegenerateCoincidence),
        Classical::NoSolution(l2) => {
            return Ok(RankOneOutcome::NoSolution { middle_eigenvalue: l2 })
        }
        Classical::Solutions(s) => s,
    };
    let at = a.transpose();
    let mut solutions = Vec::with_capacity(2);
    for (q, _, m) in sols {
        let raw_n = at.mul_vec(&m);
        let n = raw_n.normalized().ok_or(MatError::SingularInput { det: det_a })?.canonical_sign();
        // Least-squares shear for the projected rotation.
        let shear = (q * *b - *a).mul_vec(&n);
        let mut conn = RankOneConnection {
            rotation: Rotation::from_matrix_unchecked(q),
            shear,
            normal: n,
            residual: 0.0,
        };
        conn.residual = conn.residual_for(a, b);
        if conn.residual > CONNECTION_RESIDUAL_TOL.max(tol) * a.norm().max(1.0) {
            return Err(TwinError::ResidualTooLarge { residual: conn.residual });
        }
        solutions.push(conn);
    }
    sort_by_normal(&mut solutions, |c| c.normal);
    Ok(RankOneOutcome::Connections { solutions })
}

/// Solutions of `R M = 1 + b⊗m`.
pub fn habit_plane(m: &Mat3) -> Result<Vec<HabitPlaneSolution>, TwinError> {
    habit_plane_tol(m, MIDDLE_EIGENVALUE_TOL)
}

pub fn habit_plane_tol(m: &Mat3, tol: f64) -> Result<Vec<HabitPlaneSolution>, TwinError> {
    let det = m.det();
    if !(det > 0.0) {
        return Err(TwinError::Matrix(MatError::SingularInput { det }));
    }
    let sols = match classical_twin(m, tol)? {
        Classical::Identity => return Err(TwinError::IdentityInput),
        Classical::NoSolution(l2) => return Err(TwinError::NoSolution { middle_eigenvalue: l2 }),
        Classical::Solutions(s) => s,
    };
    let mut out = Vec::with_capacity(2);
    for (r, _, normal) in sols {
        let normal = normal.canonical_sign();
        // Least-squares shape vector for the projected rotation.
        let shape = (r * *m - Mat3::identity()).mul_vec(&normal);
        let mut s = HabitPlaneSolution {
            rotation: Rotation::from_matrix_unchecked(r),
            shape_vector: shape,
            habit_normal: normal,
            residual: 0.0,
        };
        s.residual = s.residual_for(m);
        out.push(s);
    }
    sort_by_normal(&mut out, |s| s.habit_normal);
    Ok(out)
}

fn check_unit(e: &Vec3) -> Result<(), TwinError> {
    let norm = e.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(TwinError::NonUnitAxis { norm });
    }
    Ok(())
}

/// Mallard twin of a general deformation gradient: `(Q, a)` with
/// `Q F R − F = a⊗e` where `R = −1 + 2e⊗e` is a cubic symmetry.
///
/// With `u = F⁻ᵀe/|F⁻ᵀe|` the solution is `Q = −1 + 2u⊗u` and
/// `a = 2(F⁻ᵀe/|F⁻ᵀe|² − Fe)`: `Q` reverses `F(e⊥)` and maps `Fe` to `Fe + a`.
pub fn mallard_twin_gradient(f: &Mat3, e: &Vec3) -> Result<RankOneConnection, TwinError> {
    check_unit(e)?;
    let half = Rotation::half_turn(e).map_err(|_| TwinError::NonUnitAxis { norm: e.norm() })?;
    if !cubic_group().contains(half.matrix(), DEFAULT_TOL) {
        return Err(TwinError::NotInGroup { axis: *e });
    }
    let r = *half.matrix();
    let c = f.gram();
    if (r * c * r).dist(&c) <= DEFAULT_TOL * c.norm() {
        return Err(TwinError::NoTwin);
    }
    let g = f.inverse()?.transpose().mul_vec(e);
    let g2 = g.dot(&g);
    let u = g * (1.0 / g2.sqrt());
    let q = u.outer(&u) * 2.0 - Mat3::identity();
    let shear = (g * (1.0 / g2) - f.mul_vec(e)) * 2.0;
    let mut conn = RankOneConnection {
        rotation: Rotation::from_matrix_unchecked(q),
        shear,
        normal: *e,
        residual: 0.0,
    };
    conn.residual = conn.residual_for(f, &(*f * r));
    if conn.residual > CONNECTION_RESIDUAL_TOL * f.norm().max(1.0) {
        return Err(TwinError::ResidualTooLarge { residual: conn.residual });
    }
    Ok(conn)
}

/// Mallard twin `(Q, a, e)` with `Q U R − U = a⊗e`.
pub fn mallard_twin(u: &Stretch, e: &Vec3) -> Result<RankOneConnection, TwinError> {
    mallard_twin_gradient(u.matrix(), e)
}

/// Equal-fraction laminate `F½ = U + ½ a⊗e` of `U` and its Mallard twin.
pub fn mallard_average(u: &Stretch, e: &Vec3) -> Result<Mat3, TwinError> {
    let conn = mallard_twin(u, e)?;
    Ok(*u.matrix() + conn.shear.outer(e) * 0.5)
}

/// One averaging step of the Mallard diagonalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MallardStep {
    /// `F` was averaged with its twin across the plane normal to `axis`.
    Twinned { axis: Vec3, connection: RankOneConnection },
    /// `R FᵀF R = FᵀF` already; the step is the identity (`a = 0`).
    Invariant { axis: Vec3 },
}

/// Average `F` with its Mallard twin across `e`. A rotation that already
/// leaves `FᵀF` invariant yields the trivial solution `Q = 1, a = 0`.
pub fn mallard_step(f: &Mat3, e: &Vec3) -> Result<(Mat3, MallardStep), TwinError> {
    match mallard_twin_gradient(f, e) {
        Ok(conn) => Ok((*f + conn.shear.outer(e) * 0.5, MallardStep::Twinned { axis: *e, connection: conn })),
        Err(TwinError::NoTwin) => Ok((*f, MallardStep::Invariant { axis: *e })),
        Err(err) => Err(err),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coincident_wells() {
        let id = Mat3::identity();
        assert_eq!(solve_rank_one(&id, &id).unwrap(), RankOneOutcome::DegenerateCoincidence);
    }

    #[test]
    fn determinant_mismatch() {
        let err = solve_rank_one(&Mat3::identity(), &Mat3::diag(1.0, 1.0, 1.1)).unwrap_err();
        assert!(matches!(err, TwinError::DeterminantMismatch { .. }));
    }

    #[test]
    fn shear_of_identity() {
        let b0 = Vec3::new(0.0, 0.2, -0.1);
        let m0 = Vec3::new(1.0, 0.0, 0.0);
        let b = Mat3::identity() + b0.outer(&m0);
        let out = solve_rank_one(&Mat3::identity(), &b).unwrap();
        assert_eq!(out.solutions().len(), 2);
        // Q = 1 gives a⊗n = b0⊗m0.
        let hit = out.solutions().iter().any(|c| {
            c.rotation.matrix().dist(&Mat3::identity()) < 1e-10
                && c.normal.max_abs_diff(&m0) < 1e-10
                && c.shear.max_abs_diff(&b0) < 1e-10
        });
        assert!(hit, "{out:?}");
    }

    #[test]
    fn two_well_normals() {
        let a = Mat3::diag(0.9, 1.1, 1.0);
        let b = Mat3::diag(1.1, 0.9, 1.0);
        let out = solve_rank_one(&a, &b).unwrap();
        let s = out.solutions();
        assert_eq!(s.len(), 2);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(s[0].normal.max_abs_diff(&Vec3::new(h, -h, 0.0)) < 1e-12);
        assert!(s[1].normal.max_abs_diff(&Vec3::new(h, h, 0.0)) < 1e-12);
        for c in s {
            assert!(c.residual_for(&a, &b) < 1e-12);
        }
    }

    #[test]
    fn incompatible_wells() {
        let a = Mat3::diag(0.9, 1.2, 1.0);
        let b = Mat3::diag(1.2, 1.0, 0.9);
        match solve_rank_one(&a, &b).unwrap() {
            RankOneOutcome::NoSolution { middle_eigenvalue } => {
                assert!((middle_eigenvalue - 1.0).abs() > 1e-3)
            }
            other => panic!("expected no solution, got {other:?}"),
        }
    }

    #[test]
    fn habit_plane_examples() {
        let sols = habit_plane(&Mat3::diag(0.95, 1.0, 1.08)).unwrap();
        assert_eq!(sols.len(), 2);
        for s in &sols {
            assert!(s.residual_for(&Mat3::diag(0.95, 1.0, 1.08)) < 1e-10);
        }
        assert!(matches!(
            habit_plane(&Mat3::diag(0.9, 0.95, 1.1)),
            Err(TwinError::NoSolution { .. })
        ));
        assert_eq!(habit_plane(&Mat3::identity()), Err(TwinError::IdentityInput));
    }

    #[test]
    fn habit_plane_recovers_shear() {
        let b0 = Vec3::new(0.03, 0.1, 0.0);
        let m0 = Vec3::new(0.6, 0.8, 0.0);
        let sols = habit_plane(&(Mat3::identity() + b0.outer(&m0))).unwrap();
        assert!(sols.iter().any(|s| {
            s.rotation.matrix().dist(&Mat3::identity()) < 1e-10
                && s.habit_normal.max_abs_diff(&m0) < 1e-10
                && s.shape_vector.max_abs_diff(&b0) < 1e-10
        }));
    }

    #[test]
    fn diagonal_stretch_has_no_coordinate_twin() {
        let u = Stretch::diag(1.1, 0.9, 1.0).unwrap();
        assert_eq!(mallard_twin(&u, &Vec3::basis(0)), Err(TwinError::NoTwin));
        let (f, step) = mallard_step(u.matrix(), &Vec3::basis(0)).unwrap();
        assert_eq!(f, *u.matrix());
        assert!(matches!(step, MallardStep::Invariant { .. }));
    }

    #[test]
    fn mallard_rejects_non_symmetry_axis() {
        let u = Stretch::diag(1.1, 0.9, 1.0).unwrap();
        let e = Vec3::new(0.6, 0.8, 0.0);
        assert!(matches!(mallard_twin(&u, &e), Err(TwinError::NotInGroup { .. })));
        assert!(matches!(
            mallard_twin(&u, &Vec3::new(2.0, 0.0, 0.0)),
            Err(TwinError::NonUnitAxis { .. })
        ));
    }
}
