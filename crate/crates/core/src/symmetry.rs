//! Rotations, the cubic point group and martensite variants.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mat3::{Mat3, MatError, Vec3};

/// Frobenius distance below which two variants are considered identical.
pub const VARIANT_DEDUP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymmetryError {
    #[error("rotation axis must be nonzero")]
    ZeroAxis,
    #[error("matrix is not a rotation (|RᵀR − 1| = {orthogonality:.3e}, det = {det})")]
    NotRotation { orthogonality: f64, det: f64 },
    #[error("stretch must be symmetric positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error(transparent)]
    Matrix(#[from] MatError),
}

/// An element of SO(3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rotation(Mat3);

impl Rotation {
    pub const IDENTITY: Rotation = Rotation(Mat3::identity());

    /// Checks `RᵀR = 1` and `det R = 1` within `1e-12`.
    pub fn new(m: Mat3) -> Result<Self, SymmetryError> {
        let orthogonality = (m.transpose() * m).dist(&Mat3::identity());
        let det = m.det();
        if !m.is_finite() || orthogonality > 1e-12 || (det - 1.0).abs() > 1e-12 {
            return Err(SymmetryError::NotRotation { orthogonality, det });
        }
        Ok(Rotation(m))
    }

    /// Wraps a matrix known to be orthogonal up to roundoff.
    pub(crate) fn from_matrix_unchecked(m: Mat3) -> Self {
        Rotation(m)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn transpose(&self) -> Rotation {
        Rotation(self.0.transpose())
    }

    pub fn compose(&self, other: &Rotation) -> Rotation {
        Rotation(self.0 * other.0)
    }

    /// 180° rotation `−1 + 2e⊗e` about a unit vector.
    pub fn half_turn(e: &Vec3) -> Result<Rotation, SymmetryError> {
        let e = e.normalized().ok_or(SymmetryError::ZeroAxis)?;
        Ok(Rotation(e.outer(&e) * 2.0 - Mat3::identity()))
    }
}

/// Rotation by `angle` (radians, right-hand rule) about `axis`.
pub fn rotation_about_axis(angle: f64, axis: &Vec3) -> Result<Rotation, SymmetryError> {
    let e = axis.normalized().ok_or(SymmetryError::ZeroAxis)?;
    let (s, c) = angle.sin_cos();
    let k = Mat3::from_rows([[0.0, -e[2], e[1]], [e[2], 0.0, -e[0]], [-e[1], e[0], 0.0]]);
    Ok(Rotation(Mat3::identity() * c + k * s + e.outer(&e) * (1.0 - c)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointGroup {
    elements: Vec<Rotation>,
}

impl PointGroup {
    pub fn elements(&self) -> &[Rotation] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Index of the element within `tol` (Frobenius) of `m`.
    pub fn position(&self, m: &Mat3, tol: f64) -> Option<usize> {
        self.elements.iter().position(|r| r.0.dist(m) <= tol)
    }

    pub fn contains(&self, m: &Mat3, tol: f64) -> bool {
        self.position(m, tol).is_some()
    }

    /// Distance from `m` to the nearest element.
    pub fn distance_to(&self, m: &Mat3) -> f64 {
        self.elements.iter().map(|r| r.0.dist(m)).fold(f64::INFINITY, f64::min)
    }
}

/// The 24 proper rotations of the cube, in a fixed listing order: the
/// identity, ±90° about e₁, e₂, e₃, ±120° about the four body diagonals,
/// 180° about e₁, e₂, e₃ and 180° about the six face diagonals.
pub fn cubic_group() -> PointGroup {
    let e = |x: f64, y: f64, z: f64| Vec3::new(x, y, z);
    let third = 2.0 * PI / 3.0;
    let mut spec: Vec<(f64, Vec3)> = vec![(0.0, e(1.0, 0.0, 0.0))];
    for axis in [e(1.0, 0.0, 0.0), e(0.0, 1.0, 0.0), e(0.0, 0.0, 1.0)] {
        spec.push((FRAC_PI_2, axis));
        spec.push((-FRAC_PI_2, axis));
    }
    for axis in [
        e(1.0, 1.0, 1.0),
        e(-1.0, 1.0, 1.0),
        e(1.0, -1.0, 1.0),
        e(1.0, 1.0, -1.0),
    ] {
        spec.push((third, axis));
        spec.push((-third, axis));
    }
    for axis in [e(1.0, 0.0, 0.0), e(0.0, 1.0, 0.0), e(0.0, 0.0, 1.0)] {
        spec.push((PI, axis));
    }
    for axis in [
        e(1.0, 1.0, 0.0),
        e(1.0, -1.0, 0.0),
        e(0.0, 1.0, 1.0),
        e(0.0, 1.0, -1.0),
        e(1.0, 0.0, 1.0),
        e(-1.0, 0.0, 1.0),
    ] {
        spec.push((PI, axis));
    }
    let elements = spec
        .into_iter()
        .map(|(angle, axis)| {
            let r = rotation_about_axis(angle, &axis).expect("nonzero axis");
            // Every entry of a cube symmetry is −1, 0 or 1.
            let mut m = *r.matrix();
            m.0.iter_mut().flatten().for_each(|x| *x = x.round());
            Rotation(m)
        })
        .collect();
    PointGroup { elements }
}

/// Symmetric positive-definite transformation stretch `U` with `Δ = det U`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stretch {
    matrix: Mat3,
    determinant: f64,
}

impl Stretch {
    pub fn new(matrix: Mat3) -> Result<Self, SymmetryError> {
        if !matrix.is_finite() {
            return Err(SymmetryError::Matrix(MatError::NonFinite));
        }
        let eig = matrix.sym_eigen()?;
        if eig.values[0] <= 0.0 {
            return Err(SymmetryError::NotPositiveDefinite(format!(
                "smallest eigenvalue {}",
                eig.values[0]
            )));
        }
        let matrix = matrix.symmetrized();
        Ok(Stretch { matrix, determinant: matrix.det() })
    }

    pub fn diag(a: f64, b: f64, c: f64) -> Result<Self, SymmetryError> {
        Self::new(Mat3::diag(a, b, c))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.matrix
    }

    /// `Δ`.
    pub fn determinant(&self) -> f64 {
        self.determinant
    }

    /// `RᵀUR`.
    pub fn conjugate(&self, r: &Rotation) -> Stretch {
        let m = (r.matrix().transpose() * self.matrix * *r.matrix()).symmetrized();
        Stretch { matrix: m, determinant: m.det() }
    }

    pub fn scaled(&self, s: f64) -> Result<Stretch, SymmetryError> {
        Stretch::new(self.matrix * s)
    }
}

impl<'de> Deserialize<'de> for Stretch {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let m = Mat3::deserialize(d)?;
        Stretch::new(m).map_err(serde::de::Error::custom)
    }
}

/// Distinct variants `RᵀUR`, `R` in `group`, in order of first appearance.
pub fn variants(u: &Stretch, group: &PointGroup) -> Vec<Stretch> {
    let mut out: Vec<Stretch> = Vec::new();
    for r in group.elements() {
        let v = u.conjugate(r);
        if out.iter().all(|w| w.matrix.dist(&v.matrix) > VARIANT_DEDUP_TOL) {
            out.push(v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_angle_closed_forms() {
        let e1 = Vec3::basis(0);
        assert!(rotation_about_axis(0.0, &e1).unwrap().matrix().dist(&Mat3::identity()) < 1e-15);
        let half = rotation_about_axis(PI, &e1).unwrap();
        assert!(half.matrix().dist(&Mat3::diag(1.0, -1.0, -1.0)) < 1e-15);
        assert_eq!(
            rotation_about_axis(1.0, &Vec3::ZERO),
            Err(SymmetryError::ZeroAxis)
        );
    }

    #[test]
    fn body_diagonal_cycles_axes() {
        let r = rotation_about_axis(2.0 * PI / 3.0, &Vec3::new(1.0, 1.0, 1.0)).unwrap();
        let m = r.matrix();
        assert!(m.mul_vec(&Vec3::basis(0)).max_abs_diff(&Vec3::basis(1)) < 1e-15);
        assert!(m.mul_vec(&Vec3::basis(1)).max_abs_diff(&Vec3::basis(2)) < 1e-15);
        assert!(m.mul_vec(&Vec3::basis(2)).max_abs_diff(&Vec3::basis(0)) < 1e-15);
    }

    #[test]
    fn group_listing_order() {
        let g = cubic_group();
        assert_eq!(g.len(), 24);
        assert_eq!(*g.elements()[0].matrix(), Mat3::identity());
        // R[+90°, e1] maps e2 to e3.
        assert_eq!(g.elements()[1].matrix().mul_vec(&Vec3::basis(1)), Vec3::basis(2));
        assert_eq!(*g.elements()[15].matrix(), Mat3::diag(1.0, -1.0, -1.0));
    }

    #[test]
    fn stretch_validation() {
        assert!(Stretch::diag(1.0, 2.0, 3.0).is_ok());
        assert!(matches!(
            Stretch::diag(1.0, -2.0, 3.0),
            Err(SymmetryError::NotPositiveDefinite(_))
        ));
        let asym = Mat3::from_rows([[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(Stretch::new(asym).is_err());
    }

    #[test]
    fn variant_counts() {
        let g = cubic_group();
        assert_eq!(variants(&Stretch::diag(1.1, 1.1, 1.1).unwrap(), &g).len(), 1);
        assert_eq!(variants(&Stretch::diag(1.1, 0.95, 0.95).unwrap(), &g).len(), 3);
        assert_eq!(variants(&Stretch::diag(1.1, 0.95, 1.02).unwrap(), &g).len(), 6);
    }

    #[test]
    fn half_turn_matches_axis_angle() {
        let e = Vec3::new(0.0, 1.0, 1.0);
        let a = Rotation::half_turn(&e).unwrap();
        let b = rotation_about_axis(PI, &e).unwrap();
        assert!(a.matrix().dist(b.matrix()) < 1e-15);
    }
}
