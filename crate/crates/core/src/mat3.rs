//! Fixed-size 3-vectors and 3×3 matrices.
//!
//! Everything here is `Copy` and allocation free. Matrices are stored row
//! major; `m[i][j]` is the entry in row `i`, column `j`.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default absolute tolerance on residuals.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Relative asymmetry accepted by [`Mat3::sym_eigen`].
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatError {
    #[error("matrix is not symmetric (relative asymmetry {asymmetry:.3e})")]
    NonSymmetric { asymmetry: f64 },
    #[error("matrix is singular or orientation reversing (det = {det:.6e})")]
    SingularInput { det: f64 },
    #[error("matrix has non-finite entries")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    /// Standard basis vector `e_{i+1}`.
    pub fn basis(i: usize) -> Self {
        let mut v = [0.0; 3];
        v[i] = 1.0;
        Vec3(v)
    }

    pub fn dot(&self, other: &Vec3) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn cross(&self, other: &Vec3) -> Vec3 {
        let [a0, a1, a2] = self.0;
        let [b0, b1, b2] = other.0;
        Vec3([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Unit vector in the same direction, or `None` for (near) zero input.
    pub fn normalized(&self) -> Option<Vec3> {
        let n = self.norm();
        if n > f64::MIN_POSITIVE && n.is_finite() {
            Some(*self * (1.0 / n))
        } else {
            None
        }
    }

    /// Tensor product `self ⊗ other`, i.e. the matrix with entries `self_i * other_j`.
    pub fn outer(&self, other: &Vec3) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.0[i] * other.0[j];
            }
        }
        Mat3(m)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Flip the sign so that the largest-magnitude component is positive.
    /// Components within a relative `1e-12` of the maximum count as tied;
    /// ties go to the lowest index.
    pub fn canonical_sign(&self) -> Vec3 {
        let max = self.0.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let k = (0..3).find(|&i| self.0[i].abs() >= max * (1.0 - 1e-12)).unwrap_or(0);
        if self.0[k] < 0.0 {
            -*self
        } else {
            *self
        }
    }

    pub fn max_abs_diff(&self, other: &Vec3) -> f64 {
        (0..3).map(|i| (self.0[i] - other.0[i]).abs()).fold(0.0, f64::max)
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vec3 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

/// A real 3×3 matrix in row-major order.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mat3(pub [[f64; 3]; 3]);

/// Spectral decomposition of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEigen {
    /// Nondecreasing.
    pub values: [f64; 3],
    /// `vectors[i]` belongs to `values[i]`; largest-magnitude component positive.
    pub vectors: [Vec3; 3],
}

impl SymEigen {
    pub fn reconstruct(&self) -> Mat3 {
        (0..3).fold(Mat3::zeros(), |acc, i| {
            acc + self.vectors[i].outer(&self.vectors[i]) * self.values[i]
        })
    }

    /// `Σ f(λᵢ) vᵢ⊗vᵢ`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Mat3 {
        (0..3).fold(Mat3::zeros(), |acc, i| {
            acc + self.vectors[i].outer(&self.vectors[i]) * f(self.values[i])
        })
    }
}

impl Mat3 {
    pub const fn identity() -> Self {
        Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub const fn zeros() -> Self {
        Mat3([[0.0; 3]; 3])
    }

    pub const fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Mat3(rows)
    }

    pub const fn diag(a: f64, b: f64, c: f64) -> Self {
        Mat3([[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]])
    }

    pub fn from_cols(c0: Vec3, c1: Vec3, c2: Vec3) -> Self {
        Mat3([
            [c0[0], c1[0], c2[0]],
            [c0[1], c1[1], c2[1]],
            [c0[2], c1[2], c2[2]],
        ])
    }

    pub fn row(&self, i: usize) -> Vec3 {
        Vec3(self.0[i])
    }

    pub fn col(&self, j: usize) -> Vec3 {
        Vec3([self.0[0][j], self.0[1][j], self.0[2][j]])
    }

    pub fn diagonal(&self) -> Vec3 {
        Vec3([self.0[0][0], self.0[1][1], self.0[2][2]])
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        Vec3([self.row(0).dot(v), self.row(1).dot(v), self.row(2).dot(v)])
    }

    /// Cofactor matrix, `cof(A)ᵀ A = det(A) 1`.
    pub fn cofactor(&self) -> Mat3 {
        let m = &self.0;
        let mut c = [[0.0; 3]; 3];
        for (i, row) in c.iter_mut().enumerate() {
            let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
            for (j, e) in row.iter_mut().enumerate() {
                let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
                // Cyclic index choice absorbs the (-1)^{i+j} sign.
                *e = m[i1][j1] * m[i2][j2] - m[i1][j2] * m[i2][j1];
            }
        }
        Mat3(c)
    }

    pub fn inverse(&self) -> Result<Mat3, MatError> {
        let det = self.det();
        if !det.is_finite() || det.abs() <= f64::EPSILON * self.max_abs().powi(3) {
            return Err(MatError::SingularInput { det });
        }
        Ok(self.cofactor().transpose() * (1.0 / det))
    }

    /// Largest entry of `A − Aᵀ` relative to `max(1, max|A|)`.
    pub fn asymmetry(&self) -> f64 {
        let m = &self.0;
        let d = (m[0][1] - m[1][0])
            .abs()
            .max((m[0][2] - m[2][0]).abs())
            .max((m[1][2] - m[2][1]).abs());
        d / self.max_abs().max(1.0)
    }

    pub fn symmetrized(&self) -> Mat3 {
        (*self + self.transpose()) * 0.5
    }

    /// `AᵀA`.
    pub fn gram(&self) -> Mat3 {
        self.transpose() * *self
    }

    pub fn dist(&self, other: &Mat3) -> f64 {
        (*self - *other).norm()
    }

    /// Spectrum and orthonormal eigenframe of a symmetric matrix.
    ///
    /// The eigenvalues come from the trigonometric solution of the
    /// characteristic cubic, each polished by one Newton step. The eigenvector
    /// of the best separated eigenvalue is taken from cross products of the
    /// rows of `A − λ1`; the remaining pair is resolved exactly as a 2×2
    /// problem on its orthogonal complement, which keeps repeated and nearly
    /// repeated spectra well behaved.
    pub fn sym_eigen(&self) -> Result<SymEigen, MatError> {
        if !self.is_finite() {
            return Err(MatError::NonFinite);
        }
        let asym = self.asymmetry();
        if asym > SYMMETRY_TOL {
            return Err(MatError::NonSymmetric { asymmetry: asym });
        }
        let scale = self.max_abs();
        if scale == 0.0 {
            return Ok(SymEigen {
                values: [0.0; 3],
                vectors: [Vec3::basis(0), Vec3::basis(1), Vec3::basis(2)],
            });
        }
        let a = self.symmetrized() * (1.0 / scale);
        let (values, vectors) = sym_eigen_normalized(&a);

        let mut pairs: Vec<(f64, Vec3)> = values
            .iter()
            .zip(vectors.iter())
            .map(|(&l, v)| (l * scale, v.canonical_sign()))
            .collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        Ok(SymEigen {
            values: [pairs[0].0, pairs[1].0, pairs[2].0],
            vectors: [pairs[0].1, pairs[1].1, pairs[2].1],
        })
    }

    /// Rotation factor `R` of the polar decomposition `F = R U`, `U = sqrt(FᵀF)`.
    pub fn polar_rotation(&self) -> Result<Mat3, MatError> {
        Ok(self.polar()?.0)
    }

    /// Both factors of `F = R U`.
    pub fn polar(&self) -> Result<(Mat3, Mat3), MatError> {
        if !self.is_finite() {
            return Err(MatError::NonFinite);
        }
        let det = self.det();
        if det <= DEFAULT_TOL * self.max_abs().powi(3).max(f64::MIN_POSITIVE) {
            return Err(MatError::SingularInput { det });
        }
        let eig = self.gram().symmetrized().sym_eigen()?;
        if eig.values[0] <= 0.0 {
            return Err(MatError::SingularInput { det });
        }
        let u_inv = eig.map(|l| 1.0 / l.sqrt());
        let mut r = *self * u_inv;
        // Newton iterations for the orthogonal factor; converges quadratically
        // from the spectral estimate.
        for _ in 0..3 {
            let rinv_t = match r.inverse() {
                Ok(inv) => inv.transpose(),
                Err(_) => break,
            };
            let next = (r + rinv_t) * 0.5;
            let change = next.dist(&r);
            r = next;
            if change < 1e-15 {
                break;
            }
        }
        let u = (r.transpose() * *self).symmetrized();
        Ok((r, u))
    }

    /// Positive-definite square root of a symmetric positive-semidefinite matrix.
    pub fn sqrt_spd(&self) -> Result<Mat3, MatError> {
        let eig = self.sym_eigen()?;
        Ok(eig.map(|l| l.max(0.0).sqrt()))
    }
}

/// Eigen-decomposition of a symmetric matrix scaled to `max|a_ij| = 1`.
fn sym_eigen_normalized(a: &Mat3) -> ([f64; 3], [Vec3; 3]) {
    let m = &a.0;
    let off = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    if off == 0.0 {
        return (
            [m[0][0], m[1][1], m[2][2]],
            [Vec3::basis(0), Vec3::basis(1), Vec3::basis(2)],
        );
    }

    let q = a.trace() / 3.0;
    let shifted = *a - Mat3::identity() * q;
    let p2 = (shifted.0.iter().flatten().map(|x| x * x).sum::<f64>()) / 6.0;
    let p = p2.sqrt();
    let (mut lo, mut hi);
    if p == 0.0 {
        lo = q;
        hi = q;
    } else {
        let r = (shifted * (1.0 / p)).det() / 2.0;
        let phi = r.clamp(-1.0, 1.0).acos() / 3.0;
        hi = q + 2.0 * p * phi.cos();
        lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
    }
    hi = newton_polish(a, hi);
    lo = newton_polish(a, lo);
    let mid = a.trace() - hi - lo;

    // Resolve the best separated eigenvalue first.
    let isolated = if mid - lo > hi - mid { lo } else { hi };
    let w = match null_vector(&(*a - Mat3::identity() * isolated)) {
        Some(w) => w,
        None => {
            return (
                [m[0][0], m[1][1], m[2][2]],
                [Vec3::basis(0), Vec3::basis(1), Vec3::basis(2)],
            );
        }
    };
    let (u, v) = complement_basis(&w);
    let au = a.mul_vec(&u);
    let av = a.mul_vec(&v);
    let (b00, b01, b11) = (u.dot(&au), u.dot(&av), v.dot(&av));
    let (l0, l1, c, s) = sym2_eigen(b00, b01, b11);
    let x0 = u * c - v * s;
    let x1 = u * s + v * c;
    let lw = w.dot(&a.mul_vec(&w));
    ([lw, l0, l1], [w, x0, x1])
}

fn newton_polish(a: &Mat3, x: f64) -> f64 {
    // det(A − x1) = −x³ + tr x² − c2 x + det
    let tr = a.trace();
    let m = &a.0;
    let c2 = m[0][0] * m[1][1] + m[0][0] * m[2][2] + m[1][1] * m[2][2]
        - m[0][1] * m[1][0]
        - m[0][2] * m[2][0]
        - m[1][2] * m[2][1];
    let det = a.det();
    let f = -x * x * x + tr * x * x - c2 * x + det;
    let df = -3.0 * x * x + 2.0 * tr * x - c2;
    if df.abs() > 1e-8 {
        let y = x - f / df;
        let fy = -y * y * y + tr * y * y - c2 * y + det;
        if fy.abs() < f.abs() {
            return y;
        }
    }
    x
}

/// Unit vector spanning the (numerical) kernel of a rank-≤2 symmetric matrix.
fn null_vector(m: &Mat3) -> Option<Vec3> {
    let r = [m.row(0), m.row(1), m.row(2)];
    let cands = [r[0].cross(&r[1]), r[0].cross(&r[2]), r[1].cross(&r[2])];
    let best = cands
        .iter()
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))
        .copied()?;
    if best.norm() <= 1e-30 {
        return None;
    }
    best.normalized()
}

/// Orthonormal pair spanning the plane perpendicular to the unit vector `w`.
pub(crate) fn complement_basis(w: &Vec3) -> (Vec3, Vec3) {
    let u = if w[0].abs() > w[1].abs() {
        Vec3::new(-w[2], 0.0, w[0]) * (1.0 / (w[0] * w[0] + w[2] * w[2]).sqrt())
    } else {
        Vec3::new(0.0, w[2], -w[1]) * (1.0 / (w[1] * w[1] + w[2] * w[2]).sqrt())
    };
    let v = w.cross(&u);
    (u, v)
}

/// Jacobi rotation for `[[a, b], [b, c]]`: returns `(λ0, λ1, cos, sin)` with
/// eigenvectors `(cos, −sin)` and `(sin, cos)`.
fn sym2_eigen(a: f64, b: f64, c: f64) -> (f64, f64, f64, f64) {
    if b == 0.0 {
        return (a, c, 1.0, 0.0);
    }
    let theta = (c - a) / (2.0 * b);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let cs = 1.0 / (t * t + 1.0).sqrt();
    let sn = t * cs;
    (a - t * b, c + t * b, cs, sn)
}

impl Index<(usize, usize)> for Mat3 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat3 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, o: Mat3) -> Mat3 {
        let mut r = self;
        for i in 0..3 {
            for j in 0..3 {
                r.0[i][j] += o.0[i][j];
            }
        }
        r
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, o: Mat3) -> Mat3 {
        let mut r = self;
        for i in 0..3 {
            for j in 0..3 {
                r.0[i][j] -= o.0[i][j];
            }
        }
        r
    }
}

impl Neg for Mat3 {
    type Output = Mat3;
    fn neg(self) -> Mat3 {
        self * -1.0
    }
}

impl Mul<f64> for Mat3 {
    type Output = Mat3;
    fn mul(self, s: f64) -> Mat3 {
        let mut r = self;
        r.0.iter_mut().flatten().for_each(|x| *x *= s);
        r
    }
}

impl Mul<Mat3> for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut r = [[0.0; 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.0[i][0] * o.0[0][j] + self.0[i][1] * o.0[1][j] + self.0[i][2] * o.0[2][j];
            }
        }
        Mat3(r)
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        self.mul_vec(&v)
    }
}

impl fmt::Display for Mat3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "[{:>14.9} {:>14.9} {:>14.9}]", r[0], r[1], r[2])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_mat(rng: &mut ChaCha8Rng) -> Mat3 {
        let mut m = Mat3::zeros();
        m.0.iter_mut().flatten().for_each(|x| *x = rng.gen_range(-2.0..2.0));
        m
    }

    fn random_rotation(rng: &mut ChaCha8Rng) -> Mat3 {
        // Normalized quaternion.
        let q: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        let [w, x, y, z] = q.map(|c| c / n);
        Mat3([
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ])
    }

    #[test]
    fn eigen_identity() {
        let e = Mat3::identity().sym_eigen().unwrap();
        assert_eq!(e.values, [1.0, 1.0, 1.0]);
    }

    #[test]
    fn eigen_diagonal_axes() {
        let e = Mat3::diag(4.0, 1.0, 9.0).sym_eigen().unwrap();
        assert_eq!(e.values, [1.0, 4.0, 9.0]);
        assert_eq!(e.vectors[0], Vec3::basis(1));
        assert_eq!(e.vectors[1], Vec3::basis(0));
        assert_eq!(e.vectors[2], Vec3::basis(2));
    }

    #[test]
    fn eigen_rejects_asymmetric() {
        let m = Mat3::from_rows([[1.0, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(matches!(m.sym_eigen(), Err(MatError::NonSymmetric { .. })));
        let mut nan = Mat3::identity();
        nan[(0, 0)] = f64::NAN;
        assert_eq!(nan.sym_eigen(), Err(MatError::NonFinite));
    }

    #[test]
    fn eigen_reconstruction_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let a = random_mat(&mut rng).symmetrized();
            let e = a.sym_eigen().unwrap();
            let res = e.reconstruct().dist(&a);
            assert!(res <= 1e-12 * a.norm().max(1.0), "residual {res:e} for {a:?}");
            assert!(e.values[0] <= e.values[1] && e.values[1] <= e.values[2]);
            for i in 0..3 {
                for j in 0..3 {
                    let d = e.vectors[i].dot(&e.vectors[j]);
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((d - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn eigen_repeated_spectra() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for spectrum in [[2.0, 2.0, 5.0], [1.0, 3.0, 3.0], [1.0, 1.0 + 1e-9, 2.0], [4.0, 4.0, 4.0]] {
            for _ in 0..200 {
                let r = random_rotation(&mut rng);
                let a = (r * Mat3::diag(spectrum[0], spectrum[1], spectrum[2]) * r.transpose())
                    .symmetrized();
                let e = a.sym_eigen().unwrap();
                assert!(e.reconstruct().dist(&a) <= 1e-12 * a.norm());
                for k in 0..3 {
                    assert!((e.values[k] - spectrum[k]).abs() < 1e-12 * a.norm());
                }
            }
        }
    }

    #[test]
    fn eigen_sign_convention() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_mat(&mut rng).symmetrized();
        let e = a.sym_eigen().unwrap();
        for v in e.vectors {
            let k = (0..3).max_by(|&i, &j| v[i].abs().total_cmp(&v[j].abs())).unwrap();
            assert!(v[k] > 0.0);
        }
    }

    #[test]
    fn polar_of_rotation_is_itself() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r0 = random_rotation(&mut rng);
        assert!(r0.polar_rotation().unwrap().dist(&r0) < 1e-12);
        assert!(Mat3::diag(2.0, 3.0, 4.0).polar_rotation().unwrap().dist(&Mat3::identity()) < 1e-14);
    }

    #[test]
    fn polar_compose_then_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let r0 = random_rotation(&mut rng);
            let f = r0 * Mat3::diag(2.0, 3.0, 4.0);
            let (r, u) = f.polar().unwrap();
            assert!(r.dist(&r0) < 1e-10);
            assert!((r.transpose() * r).dist(&Mat3::identity()) < 1e-12);
            assert!((r.det() - 1.0).abs() < 1e-12);
            assert!((r * u).dist(&f) < 1e-10);
        }
    }

    #[test]
    fn polar_rejects_reflection() {
        assert!(matches!(
            Mat3::diag(-1.0, 1.0, 1.0).polar_rotation(),
            Err(MatError::SingularInput { .. })
        ));
        assert!(matches!(Mat3::zeros().polar_rotation(), Err(MatError::SingularInput { .. })));
    }

    #[test]
    fn cofactor_closed_forms() {
        assert_eq!(Mat3::identity().cofactor(), Mat3::identity());
        assert_eq!(Mat3::diag(2.0, 3.0, 5.0).cofactor(), Mat3::diag(15.0, 10.0, 6.0));
    }

    #[test]
    fn cofactor_adjugate_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..1000 {
            let a = random_mat(&mut rng);
            let lhs = a.cofactor().transpose() * a;
            let rhs = Mat3::identity() * a.det();
            assert!(lhs.dist(&rhs) <= 1e-12 * a.norm().powi(2).max(1.0));
        }
    }

    #[test]
    fn inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let a = random_mat(&mut rng) + Mat3::identity() * 5.0;
        assert!((a * a.inverse().unwrap()).dist(&Mat3::identity()) < 1e-13);
        assert!(Mat3::zeros().inverse().is_err());
    }

    #[test]
    fn cross_and_outer() {
        let x = Vec3::basis(0);
        let y = Vec3::basis(1);
        assert_eq!(x.cross(&y), Vec3::basis(2));
        let o = Vec3::new(1.0, 2.0, 3.0).outer(&Vec3::new(0.0, 1.0, 0.0));
        assert_eq!(o.col(1), Vec3::new(1.0, 2.0, 3.0));
        assert_eq!(o.col(0), Vec3::ZERO);
    }
}
