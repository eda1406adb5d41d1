//! Explicit quasiconvex-hull machinery.
//!
//! * [`two_well_membership`]: the closed-form hull of `SO(3)U₁ ∪ SO(3)U₂`
//!   with `U₁ = diag(η₁, η₂, η₃)` and `U₂ = diag(η₂, η₁, η₃)`.
//! * [`mallard_diagonalize`]: two Mallard averaging steps that carry a
//!   cubic-symmetric stretch to a diagonal element of the hull.
//! * [`three_well_configs`] and [`kappa_set`]: the embedded tetragonal
//!   configurations and their `κ` values.
//!
//! Axis indices in this module are 1-based (`1`, `2`, `3`).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mat3::{Mat3, Vec3};
use crate::symmetry::{Stretch, SymmetryError};
use crate::twinning::{mallard_step, MallardStep, TwinError};

/// `κ` values closer than this are merged.
pub const KAPPA_DEDUP_TOL: f64 = 1e-10;

/// `|κ − 1|` at or below this marks a degenerate configuration.
pub const KAPPA_DEGENERATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HullError {
    #[error("well parameters must be positive with η₁ ≠ η₂ (got {eta1}, {eta2}, {eta3})")]
    InvalidWells { eta1: f64, eta2: f64, eta3: f64 },
    #[error("axis pair ({first}, {second}) must be two distinct axes in 1..=3")]
    InvalidAxisPair { first: usize, second: usize },
    #[error("averaged gradient is not diagonal (off-diagonal residual {residual:.3e})")]
    NotDiagonal { residual: f64 },
    #[error(transparent)]
    Twin(#[from] TwinError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
}

/// Parameters of the two wells `diag(η₁, η₂, η₃)` and `diag(η₂, η₁, η₃)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoWellSpec {
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
}

impl TwoWellSpec {
    pub fn new(eta1: f64, eta2: f64, eta3: f64) -> Result<Self, HullError> {
        let ok = [eta1, eta2, eta3].iter().all(|x| x.is_finite() && *x > 0.0)
            && (eta1 - eta2).abs() > 1e-12 * eta1.max(eta2);
        if !ok {
            return Err(HullError::InvalidWells { eta1, eta2, eta3 });
        }
        Ok(TwoWellSpec { eta1, eta2, eta3 })
    }

    pub fn wells(&self) -> (Mat3, Mat3) {
        (
            Mat3::diag(self.eta1, self.eta2, self.eta3),
            Mat3::diag(self.eta2, self.eta1, self.eta3),
        )
    }

    pub fn scaled(&self, s: f64) -> Result<Self, HullError> {
        Self::new(self.eta1 * s, self.eta2 * s, self.eta3 * s)
    }
}

/// Tolerances for the three membership conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HullTolerances {
    /// Absolute, on the entries `(1,3)`, `(2,3)` and `(3,3) − η₃²` of `FᵀF`.
    pub block: f64,
    /// Relative, on `ab − c² − η₁²η₂²`.
    pub determinant: f64,
    /// Slack allowed in `a + b + 2|c| ≤ η₁² + η₂²`.
    pub trace_slack: f64,
}

impl Default for HullTolerances {
    fn default() -> Self {
        HullTolerances { block: 1e-8, determinant: 1e-8, trace_slack: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HullVerdict {
    pub member: bool,
    pub block_structure_residual: f64,
    pub det_residual: f64,
    /// `η₁² + η₂² − a − b − 2|c|`; negative values violate the inequality.
    pub trace_margin: f64,
}

/// Membership of `F` in the two-well hull, with the default tolerances.
pub fn two_well_membership(f: &Mat3, spec: &TwoWellSpec) -> HullVerdict {
    two_well_membership_tol(f, spec, &HullTolerances::default())
}

pub fn two_well_membership_tol(f: &Mat3, spec: &TwoWellSpec, tol: &HullTolerances) -> HullVerdict {
    let c = f.gram();
    let (e1, e2, e3) = (spec.eta1 * spec.eta1, spec.eta2 * spec.eta2, spec.eta3 * spec.eta3);
    let block_structure_residual = c[(0, 2)]
        .abs()
        .max(c[(2, 0)].abs())
        .max(c[(1, 2)].abs())
        .max(c[(2, 1)].abs())
        .max((c[(2, 2)] - e3).abs());
    let (a, b, cc) = (c[(0, 0)], c[(1, 1)], 0.5 * (c[(0, 1)] + c[(1, 0)]));
    let target = e1 * e2;
    let det_residual = ((a * b - cc * cc) - target).abs() / target;
    let trace_margin = e1 + e2 - a - b - 2.0 * cc.abs();
    let member = f.is_finite()
        && block_structure_residual <= tol.block
        && det_residual <= tol.determinant
        && trace_margin >= -tol.trace_slack;
    HullVerdict { member, block_structure_residual, det_residual, trace_margin }
}

fn axis_vec(axis: usize) -> Vec3 {
    Vec3::basis(axis - 1)
}

/// Result of the two-step Mallard averaging for one axis chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MallardDiagonalization {
    pub first_axis: usize,
    pub second_axis: usize,
    pub steps: [MallardStep; 2],
    /// `G½`, the doubly averaged gradient.
    pub gradient: Mat3,
    /// `Ṽ = sqrt(G½ᵀ G½)`, diagonal.
    pub v_tilde: Mat3,
    pub off_diagonal_residual: f64,
}

impl MallardDiagonalization {
    pub fn diagonal(&self) -> Vec3 {
        self.v_tilde.diagonal()
    }
}

/// Diagonal hull element reached by averaging across the plane normal to
/// `first_axis` and then across the plane normal to `second_axis`.
///
/// A step whose half-turn already leaves the current `FᵀF` invariant is
/// recorded as [`MallardStep::Invariant`]; the trivial twin `a = 0` keeps the
/// pipeline well defined for stretches that are diagonal in some axes.
pub fn mallard_diagonalize(
    u: &Stretch,
    first_axis: usize,
    second_axis: usize,
) -> Result<MallardDiagonalization, HullError> {
    if !(1..=3).contains(&first_axis) || !(1..=3).contains(&second_axis) || first_axis == second_axis {
        return Err(HullError::InvalidAxisPair { first: first_axis, second: second_axis });
    }
    let (f_half, step1) = mallard_step(u.matrix(), &axis_vec(first_axis))?;
    let (g_half, step2) = mallard_step(&f_half, &axis_vec(second_axis))?;
    let d = g_half.gram();
    let off = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(i, j)| d[(i, j)].abs().max(d[(j, i)].abs()))
        .fold(0.0, f64::max);
    if off > 1e-8 * d.max_abs() {
        return Err(HullError::NotDiagonal { residual: off });
    }
    let diag = d.diagonal();
    let v_tilde = Mat3::diag(diag[0].sqrt(), diag[1].sqrt(), diag[2].sqrt());
    Ok(MallardDiagonalization {
        first_axis,
        second_axis,
        steps: [step1, step2],
        gradient: g_half,
        v_tilde,
        off_diagonal_residual: off,
    })
}

/// The three candidate diagonal values for the chain with first axis `j`
/// and untouched axis `k`: `Δ/√(cof U²)_jj`, `√((cof U²)_jj/(U²)_kk)` and
/// `√(U²)_kk`. Their product is `Δ`.
pub fn chain_values(u: &Stretch, j: usize, k: usize) -> [f64; 3] {
    let u2 = *u.matrix() * *u.matrix();
    let cof = u2.cofactor();
    let cjj = cof[(j - 1, j - 1)];
    let ukk = u2[(k - 1, k - 1)];
    [u.determinant() / cjj.sqrt(), (cjj / ukk).sqrt(), ukk.sqrt()]
}

/// Which member of the `S(U)` triple a `κ` came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KappaFormula {
    /// `Δ^{1/3} / (cof U²)_jj^{1/4}`
    DeltaOverCofactor,
    /// `(cof U²)_jj^{1/4} / ((U²)_kk^{1/4} Δ^{1/6})`
    CofactorOverStretch,
    /// `(U²)_kk^{1/4} / Δ^{1/6}`
    StretchOverDelta,
}

impl KappaFormula {
    pub const ALL: [KappaFormula; 3] = [
        KappaFormula::DeltaOverCofactor,
        KappaFormula::CofactorOverStretch,
        KappaFormula::StretchOverDelta,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KappaSource {
    pub j: usize,
    pub k: usize,
    pub formula: KappaFormula,
}

/// An embedded configuration `diag(μ, √(νξ), √(νξ))` and its permutations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThreeWellConfig {
    pub source: KappaSource,
    pub mu: f64,
    pub nu: f64,
    pub xi: f64,
    pub wells: [Stretch; 3],
    /// `μ = Δ^{1/3} κ²`, `√(νξ) = Δ^{1/3} / κ`.
    pub kappa: f64,
    pub degenerate: bool,
}

/// Ordered pairs `(j, k)`, `j ≠ k`.
fn axis_pairs() -> impl Iterator<Item = (usize, usize)> {
    (1..=3).flat_map(|j| (1..=3).filter(move |&k| k != j).map(move |k| (j, k)))
}

/// All configurations obtained from every chain `(j, k)` and every choice of
/// the distinguished value `μ`.
pub fn three_well_configs(u: &Stretch) -> Result<Vec<ThreeWellConfig>, HullError> {
    let delta_cbrt = u.determinant().cbrt();
    let mut out = Vec::with_capacity(18);
    for (j, k) in axis_pairs() {
        let vals = chain_values(u, j, k);
        for (i, formula) in KappaFormula::ALL.into_iter().enumerate() {
            let mu = vals[i];
            let nu = vals[(i + 1) % 3];
            let xi = vals[(i + 2) % 3];
            let s = (nu * xi).sqrt();
            let wells = [
                Stretch::diag(mu, s, s)?,
                Stretch::diag(s, mu, s)?,
                Stretch::diag(s, s, mu)?,
            ];
            let kappa = (mu / delta_cbrt).sqrt();
            out.push(ThreeWellConfig {
                source: KappaSource { j, k, formula },
                mu,
                nu,
                xi,
                wells,
                kappa,
                degenerate: (kappa - 1.0).abs() <= KAPPA_DEGENERATE_TOL,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaEntry {
    pub kappa: f64,
    pub sources: Vec<KappaSource>,
    /// `false` for `κ = 1`, which certifies nothing.
    pub usable: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct KappaSet {
    /// Ascending in `κ`.
    pub entries: Vec<KappaEntry>,
}

impl KappaSet {
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.kappa).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn from_raw(mut raw: Vec<(f64, KappaSource)>) -> KappaSet {
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut entries: Vec<KappaEntry> = Vec::new();
        for (kappa, source) in raw {
            match entries.last_mut() {
                Some(last) if (kappa - last.kappa).abs() <= KAPPA_DEDUP_TOL => {
                    last.sources.push(source)
                }
                _ => entries.push(KappaEntry {
                    kappa,
                    sources: vec![source],
                    usable: (kappa - 1.0).abs() > KAPPA_DEGENERATE_TOL,
                }),
            }
        }
        KappaSet { entries }
    }
}

/// `S(U)`: the union over `j ≠ k` of the three `κ` formulas.
pub fn kappa_set(u: &Stretch) -> KappaSet {
    let delta = u.determinant();
    let u2 = *u.matrix() * *u.matrix();
    let cof = u2.cofactor();
    let mut raw = Vec::with_capacity(18);
    for (j, k) in axis_pairs() {
        let c = cof[(j - 1, j - 1)].powf(0.25);
        let s = u2[(k - 1, k - 1)].powf(0.25);
        let values = [
            delta.cbrt() / c,
            c / (s * delta.powf(1.0 / 6.0)),
            s / delta.powf(1.0 / 6.0),
        ];
        for (kappa, formula) in values.into_iter().zip(KappaFormula::ALL) {
            raw.push((kappa, KappaSource { j, k, formula }));
        }
    }
    KappaSet::from_raw(raw)
}

/// `κ` values carried by a list of configurations, merged like [`kappa_set`].
pub fn kappas_of_configs(configs: &[ThreeWellConfig]) -> KappaSet {
    KappaSet::from_raw(configs.iter().map(|c| (c.kappa, c.source)).collect())
}
