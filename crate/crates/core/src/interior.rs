//! Rank-one connections from the identity into the relative interior of the
//! martensite hull.
//!
//! A three-well tetragonal configuration with parameter `κ` embedded in the
//! hull places a ball `B(Δ^{1/3}1, Δ^{1/3}ε(κ)) ∩ {det = Δ}` inside it, with
//! the explicit bound `ε(κ) = (κ − 1)²/62` for `κ < 3/2`. The point
//! `F = 1 + (Δ − 1) n⊗n` lies in that ball whenever
//! `|Δ^{1/3} − 1| / Δ^{1/3} · sqrt(Δ^{4/3} + 2Δ + Δ^{2/3} + 2) < ε(κ)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hulls::{kappa_set, KappaSet, KappaSource};
use crate::mat3::{Mat3, Vec3};
use crate::symmetry::Stretch;

/// Upper end of the range where the explicit `ε(κ)` bound is valid.
pub const KAPPA_MAX: f64 = 1.5;

/// `|κ − 1|` at or below this is rejected as degenerate.
pub const KAPPA_DEGENERATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InteriorError {
    #[error("κ = {kappa} outside (0, 3/2)")]
    KappaOutOfRange { kappa: f64 },
    #[error("κ = {kappa} is degenerate (κ = 1)")]
    KappaDegenerate { kappa: f64 },
    #[error("Δ must be positive (got {delta})")]
    NonPositiveDelta { delta: f64 },
    #[error("normal must be a unit vector (|n| = {norm})")]
    NonUnitNormal { norm: f64 },
    #[error("no admissible κ in S(U) (need 0 < κ < 3/2, κ ≠ 1)")]
    NoAdmissibleKappa,
}

/// `ε(κ) = (κ − 1)²/62`.
pub fn epsilon_dk(kappa: f64) -> Result<f64, InteriorError> {
    if !(kappa > 0.0 && kappa < KAPPA_MAX) {
        return Err(InteriorError::KappaOutOfRange { kappa });
    }
    if (kappa - 1.0).abs() <= KAPPA_DEGENERATE_TOL {
        return Err(InteriorError::KappaDegenerate { kappa });
    }
    Ok((kappa - 1.0).powi(2) / 62.0)
}

/// `Δ^{1/3} − 1` without cancellation near `Δ = 1`.
pub fn cbrt_minus_one(delta: f64) -> f64 {
    let c = delta.cbrt();
    (delta - 1.0) / (c * c + c + 1.0)
}

fn check_delta(delta: f64) -> Result<(), InteriorError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(InteriorError::NonPositiveDelta { delta });
    }
    Ok(())
}

/// `sqrt(Δ^{4/3} + 2Δ + Δ^{2/3} + 2)`.
fn ball_factor(delta: f64) -> f64 {
    let c = delta.cbrt();
    (c.powi(4) + 2.0 * delta + c * c + 2.0).sqrt()
}

/// `|Δ^{1/3} − 1| / Δ^{1/3} · sqrt(Δ^{4/3} + 2Δ + Δ^{2/3} + 2)`.
pub fn delta_condition_lhs(delta: f64) -> Result<f64, InteriorError> {
    check_delta(delta)?;
    Ok(cbrt_minus_one(delta).abs() / delta.cbrt() * ball_factor(delta))
}

/// What is known about the microstructure realizing the interior point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Microstructure {
    /// Some laminate, of unknown order.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteriorPointCertificate {
    pub delta: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub lhs: f64,
    /// `lhs < epsilon`.
    pub holds: bool,
    /// `F = 1 + a⊗n`.
    pub point: Mat3,
    pub shear: Vec3,
    pub normal: Vec3,
    /// `Δ^{1/3} ε`.
    pub ball_radius: f64,
    /// `F − Δ^{1/3}1`, evaluated as `(1 − Δ^{1/3})1 + a⊗n`.
    pub offset: Mat3,
    /// `|F − Δ^{1/3}1|`.
    pub distance: f64,
    /// `|det F − Δ| / Δ`.
    pub det_residual: f64,
    pub microstructure: Microstructure,
}

impl InteriorPointCertificate {
    pub fn delta_cbrt(&self) -> f64 {
        self.delta.cbrt()
    }

    /// Room left between `F` and the edge of the certified ball.
    pub fn slack(&self) -> f64 {
        self.ball_radius - self.distance
    }

    /// Whether `g` lies in the certified ball on `{det = Δ}`.
    pub fn contains(&self, g: &Mat3, det_tol: f64) -> bool {
        let on_surface = (g.det() - self.delta).abs() <= det_tol * self.delta;
        let inside = (*g - Mat3::identity() * self.delta_cbrt()).norm() < self.ball_radius;
        on_surface && inside
    }
}

/// Builds `F = 1 + (Δ − 1) n⊗n` and checks it against the `ε(κ)` ball.
pub fn construct_interior_point(
    delta: f64,
    normal: &Vec3,
    kappa: f64,
) -> Result<InteriorPointCertificate, InteriorError> {
    check_delta(delta)?;
    let norm = normal.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(InteriorError::NonUnitNormal { norm });
    }
    let epsilon = epsilon_dk(kappa)?;
    let lhs = delta_condition_lhs(delta)?;
    let shear = *normal * (delta - 1.0);
    let rank_one = shear.outer(normal);
    let point = Mat3::identity() + rank_one;
    let offset = Mat3::identity() * (-cbrt_minus_one(delta)) + rank_one;
    let distance = offset.norm();
    Ok(InteriorPointCertificate {
        delta,
        kappa,
        epsilon,
        lhs,
        holds: lhs < epsilon,
        point,
        shear,
        normal: *normal,
        ball_radius: delta.cbrt() * epsilon,
        offset,
        distance,
        det_residual: (point.det() - delta).abs() / delta,
        microstructure: Microstructure::Unknown,
    })
}

/// Verdict for one admissible `κ` of `S(U)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaVerdict {
    pub kappa: f64,
    pub epsilon: f64,
    pub holds: bool,
    pub sources: Vec<KappaSource>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicAusteniteReport {
    pub delta_cbrt: f64,
    pub kappa_set: KappaSet,
    /// Certificate for the admissible `κ` maximizing `(κ − 1)²`.
    pub certificate: InteriorPointCertificate,
    pub kappa_sources: Vec<KappaSource>,
    /// Every admissible `κ`, ascending.
    pub candidates: Vec<KappaVerdict>,
}

/// Checks whether `U` (with cubic austenite) admits a rank-one connection
/// from the identity into the relative hull interior, using `n = e₁`.
pub fn cubic_austenite_check(u: &Stretch) -> Result<CubicAusteniteReport, InteriorError> {
    cubic_austenite_check_with_normal(u, &Vec3::basis(0))
}

pub fn cubic_austenite_check_with_normal(
    u: &Stretch,
    normal: &Vec3,
) -> Result<CubicAusteniteReport, InteriorError> {
    let delta = u.determinant();
    check_delta(delta)?;
    let set = kappa_set(u);
    let lhs = delta_condition_lhs(delta)?;
    let candidates: Vec<KappaVerdict> = set
        .entries
        .iter()
        .filter(|e| e.usable)
        .filter_map(|e| {
            epsilon_dk(e.kappa).ok().map(|epsilon| KappaVerdict {
                kappa: e.kappa,
                epsilon,
                holds: lhs < epsilon,
                sources: e.sources.clone(),
            })
        })
        .collect();
    let best = candidates
        .iter()
        .fold(None::<&KappaVerdict>, |best, c| match best {
            Some(b) if (b.kappa - 1.0).powi(2) >= (c.kappa - 1.0).powi(2) => Some(b),
            _ => Some(c),
        })
        .ok_or(InteriorError::NoAdmissibleKappa)?;
    let certificate = construct_interior_point(delta, normal, best.kappa)?;
    Ok(CubicAusteniteReport {
        delta_cbrt: delta.cbrt(),
        kappa_sources: best.sources.clone(),
        certificate,
        kappa_set: set,
        candidates,
    })
}
