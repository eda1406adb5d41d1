//! Cubic-to-orthorhombic CuAlNi and the Type-II volume-fraction relation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hulls::KappaSource;
use crate::interior::{cubic_austenite_check, InteriorError};
use crate::mat3::Mat3;
use crate::symmetry::{Stretch, SymmetryError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CaseStudyError {
    #[error("lattice parameters must be positive and finite")]
    InvalidLattice,
    #[error("denominator a1 + a3(Λ² − Λ) vanishes at Λ = {lambda}")]
    DegenerateDenominator { lambda: f64 },
    #[error("Λ = {lambda} outside [0, 1]")]
    LambdaOutOfRange { lambda: f64 },
    #[error(transparent)]
    Interior(#[from] InteriorError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
}

/// Orthorhombic lattice parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl LatticeParams {
    pub const CUALNI: LatticeParams = LatticeParams { alpha: 1.06372, beta: 0.91542, gamma: 1.02368 };

    pub fn validate(&self) -> Result<(), CaseStudyError> {
        if [self.alpha, self.beta, self.gamma].iter().all(|x| *x > 0.0 && x.is_finite()) {
            Ok(())
        } else {
            Err(CaseStudyError::InvalidLattice)
        }
    }
}

/// `U = [[β, 0, 0], [0, (α+γ)/2, (α−γ)/2], [0, (α−γ)/2, (α+γ)/2]]`.
pub fn cualni_stretch(p: &LatticeParams) -> Result<Stretch, CaseStudyError> {
    p.validate()?;
    let d = (p.alpha + p.gamma) / 2.0;
    let o = (p.alpha - p.gamma) / 2.0;
    Ok(Stretch::new(Mat3::from_rows([[p.beta, 0.0, 0.0], [0.0, d, o], [0.0, o, d]]))?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CualniReport {
    pub lattice: LatticeParams,
    pub stretch: Mat3,
    pub delta_cbrt: f64,
    pub kappa_star: f64,
    pub kappa_provenance: Vec<KappaSource>,
    /// `β^{1/3}(αγ)^{−1/6}`, evaluated directly from the lattice parameters.
    pub kappa_closed_form: f64,
    pub epsilon: f64,
    pub lhs: f64,
    pub holds: bool,
    pub all_admissible_kappas: Vec<f64>,
}

/// Runs the interior-point check on the orthorhombic stretch built from `p`.
pub fn run_case(p: &LatticeParams) -> Result<CualniReport, CaseStudyError> {
    let u = cualni_stretch(p)?;
    let report = cubic_austenite_check(&u)?;
    let cert = &report.certificate;
    Ok(CualniReport {
        lattice: *p,
        stretch: *u.matrix(),
        delta_cbrt: report.delta_cbrt,
        kappa_star: cert.kappa,
        kappa_provenance: report.kappa_sources.clone(),
        kappa_closed_form: p.beta.cbrt() * (p.alpha * p.gamma).powf(-1.0 / 6.0),
        epsilon: cert.epsilon,
        lhs: cert.lhs,
        holds: cert.holds,
        all_admissible_kappas: report.candidates.iter().map(|c| c.kappa).collect(),
    })
}

/// The CuAlNi computation with `α = 1.06372`, `β = 0.91542`, `γ = 1.02368`.
pub fn run_cualni_case() -> CualniReport {
    run_case(&LatticeParams::CUALNI).expect("CuAlNi parameters are admissible")
}

/// Coefficients of `λ² − λ = (a₀ + a₂(Λ² − Λ)) / (a₁ + a₃(Λ² − Λ))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeFractionCoefficients {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl VolumeFractionCoefficients {
    /// Right-hand side at `Λ`.
    pub fn rhs(&self, lambda: f64) -> Result<f64, CaseStudyError> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(CaseStudyError::LambdaOutOfRange { lambda });
        }
        let q = lambda * lambda - lambda;
        let den = self.a1 + self.a3 * q;
        let scale = self.a1.abs() + (self.a3 * q).abs();
        if den == 0.0 || den.abs() <= 1e-14 * scale || !den.is_finite() {
            return Err(CaseStudyError::DegenerateDenominator { lambda });
        }
        Ok((self.a0 + self.a2 * q) / den)
    }
}

/// Roots of `λ² − λ − r = 0` lying in `[0, 1]`: none, or the pair
/// `(λ, 1 − λ)` in ascending order.
pub fn volume_fraction_roots(
    coeffs: &VolumeFractionCoefficients,
    lambda: f64,
) -> Result<Vec<f64>, CaseStudyError> {
    let r = coeffs.rhs(lambda)?;
    Ok(roots_for_rhs(r))
}

fn roots_for_rhs(r: f64) -> Vec<f64> {
    let disc = 1.0 + 4.0 * r;
    if !(disc >= 0.0) || r > 0.0 {
        return Vec::new();
    }
    let half = disc.sqrt() / 2.0;
    // Smaller root as −r/(larger root) to keep precision when r is tiny.
    let upper = 0.5 + half;
    let lower = if upper > 0.0 { -r / upper } else { 0.5 - half };
    vec![lower, upper]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs_for(r: f64) -> VolumeFractionCoefficients {
        VolumeFractionCoefficients { a0: r, a1: 1.0, a2: 0.0, a3: 0.0 }
    }

    #[test]
    fn trivial_roots() {
        assert_eq!(volume_fraction_roots(&coeffs_for(0.0), 0.5).unwrap(), vec![0.0, 1.0]);
        assert_eq!(volume_fraction_roots(&coeffs_for(-0.25), 0.5).unwrap(), vec![0.5, 0.5]);
        let r = volume_fraction_roots(&coeffs_for(-0.21), 0.5).unwrap();
        assert!((r[0] - 0.3).abs() < 1e-15 && (r[1] - 0.7).abs() < 1e-15);
        assert!(volume_fraction_roots(&coeffs_for(-0.3), 0.5).unwrap().is_empty());
        assert!(volume_fraction_roots(&coeffs_for(0.1), 0.5).unwrap().is_empty());
    }

    #[test]
    fn errors() {
        let c = VolumeFractionCoefficients { a0: 1.0, a1: 0.0, a2: 0.0, a3: 0.0 };
        assert!(matches!(volume_fraction_roots(&c, 0.3), Err(CaseStudyError::DegenerateDenominator { .. })));
        let c = VolumeFractionCoefficients { a0: 1.0, a1: 0.25, a2: 0.0, a3: 1.0 };
        assert!(matches!(volume_fraction_roots(&c, 0.5), Err(CaseStudyError::DegenerateDenominator { .. })));
        assert!(matches!(volume_fraction_roots(&coeffs_for(0.0), 1.5), Err(CaseStudyError::LambdaOutOfRange { .. })));
    }

    #[test]
    fn stretch_shape() {
        let p = LatticeParams { alpha: 1.05, beta: 0.9, gamma: 1.05 };
        assert_eq!(*cualni_stretch(&p).unwrap().matrix(), Mat3::diag(0.9, 1.05, 1.05));
        let u = cualni_stretch(&LatticeParams::CUALNI).unwrap();
        let p = LatticeParams::CUALNI;
        let det = p.alpha * p.beta * p.gamma;
        assert!((u.determinant() - det).abs() <= 1e-12 * det);
        assert!(cualni_stretch(&LatticeParams { alpha: -1.0, beta: 1.0, gamma: 1.0 }).is_err());
    }

    #[test]
    fn cualni_numbers() {
        let r = run_cualni_case();
        assert!((r.delta_cbrt - 0.998935).abs() < 5e-7);
        assert!((r.kappa_star - 0.957286).abs() < 5e-7);
        assert!((r.kappa_star - r.kappa_closed_form).abs() < 1e-14);
        assert!(!r.holds);
    }
}
