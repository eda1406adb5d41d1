//! Curved austenite–martensite interfaces.
//!
//! With `f(x) = x·n + h(x·w)` and `w ⊥ a, n`, the deformation `y⁺ = x + a f(x)`
//! on one side of `Γ = {f = 0}` and `y⁻ = x` on the other is continuous, and
//! `Dy⁺ = 1 + a⊗∇f` has constant determinant `1 + a·n`. Here `w = a∧n`, or a
//! fixed perpendicular of length `|a|` when `a ∥ n`.

use std::collections::VecDeque;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interior::InteriorPointCertificate;
use crate::mat3::{Mat3, Vec3};

/// Vertices must satisfy `|f(x)| ≤` this.
pub const LEVEL_SET_TOL: f64 = 1e-10;
/// Two normals differing by more than this witness non-planarity.
pub const NONPLANARITY_TOL: f64 = 1e-6;
/// Default trapezoid steps per path.
pub const DEFAULT_PATH_STEPS: usize = 1000;

const PROFILE_SAMPLES: usize = 4001;
const PARALLEL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurfaceError {
    #[error("normal must be a unit vector (|n| = {norm})")]
    NonUnitNormal { norm: f64 },
    #[error("shear vector must be nonzero")]
    ZeroShear,
    #[error("profile too steep: sup|h'| = {sup_derivative} but need sup|h'| < eps/|a|^2 = {limit}")]
    BoundViolated { sup_derivative: f64, limit: f64 },
    #[error("profile derivative is constant on the domain; the interface would be planar")]
    PlanarProfile,
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("domain radius {radius} does not exceed sup|h| = {sup_value} on the domain")]
    DomainTooSmall { radius: f64, sup_value: f64 },
    #[error("point at distance {distance} lies outside the domain of radius {radius}")]
    OutOfDomain { distance: f64, radius: f64 },
    #[error("resolution must be at least 2 (got {0})")]
    InvalidResolution(usize),
    #[error("mesh was not produced from this surface: {0}")]
    MeshSurfaceMismatch(String),
    #[error("mesh is disconnected ({reached} of {total} vertices reachable)")]
    DisconnectedMesh { reached: usize, total: usize },
}

/// Scalar profile `h` with `h(0) = ḣ(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Profile {
    /// `h(t) = scale · t² e^{−t²}`.
    GaussBump { scale: f64 },
    /// `h ≡ 0`.
    Flat,
}

fn gauss_bump_sup_derivative() -> f64 {
    let t = ((5.0 - 17f64.sqrt()) / 4.0).sqrt();
    2.0 * t * (1.0 - t * t) * (-t * t).exp()
}

impl Profile {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Profile::GaussBump { scale } => scale * t * t * (-t * t).exp(),
            Profile::Flat => 0.0,
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            Profile::GaussBump { scale } => scale * 2.0 * t * (1.0 - t * t) * (-t * t).exp(),
            Profile::Flat => 0.0,
        }
    }

    /// `sup |ḣ|` over ℝ.
    pub fn sup_derivative(&self) -> f64 {
        match *self {
            Profile::GaussBump { scale } => scale.abs() * gauss_bump_sup_derivative(),
            Profile::Flat => 0.0,
        }
    }

    /// `sup |h|` over ℝ.
    pub fn sup_value(&self) -> f64 {
        match *self {
            Profile::GaussBump { scale } => scale.abs() * (-1f64).exp(),
            Profile::Flat => 0.0,
        }
    }

    /// `sup |h|` over `[−half_width, half_width]`.
    pub fn sup_value_on(&self, half_width: f64) -> f64 {
        match *self {
            Profile::GaussBump { scale } if half_width < 1.0 => {
                scale.abs() * half_width * half_width * (-half_width * half_width).exp()
            }
            _ => self.sup_value(),
        }
    }

    /// Checks the profile invariants on `[−half_width, half_width]`.
    /// Returns whether `ḣ` is non-constant there.
    fn validate(&self, half_width: f64) -> Result<bool, SurfaceError> {
        if let Profile::GaussBump { scale } = *self {
            if !scale.is_finite() {
                return Err(SurfaceError::InvalidProfile(format!("scale {scale}")));
            }
        }
        if self.value(0.0).abs() > 1e-12 || self.derivative(0.0).abs() > 1e-12 {
            return Err(SurfaceError::InvalidProfile("h(0) and h'(0) must vanish".into()));
        }
        let sup = self.sup_derivative();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..PROFILE_SAMPLES {
            let t = -half_width + 2.0 * half_width * i as f64 / (PROFILE_SAMPLES - 1) as f64;
            let d = self.derivative(t);
            if d.abs() > sup * (1.0 + 1e-12) {
                return Err(SurfaceError::InvalidProfile(format!(
                    "|h'({t})| = {} exceeds sup bound {sup}",
                    d.abs()
                )));
            }
            lo = lo.min(d);
            hi = hi.max(d);
        }
        Ok(hi - lo > NONPLANARITY_TOL)
    }
}

/// The interface `{x·n + h(x·w) = 0}` inside the ball of radius `domain_radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfaceSurface {
    pub normal_at_origin: Vec3,
    pub shear: Vec3,
    /// `w/|w|`.
    pub transverse: Vec3,
    /// `|w|`.
    pub transverse_scale: f64,
    /// `n × transverse`, the second in-plane direction.
    pub lateral: Vec3,
    pub profile: Profile,
    pub domain_radius: f64,
    pub epsilon: Option<f64>,
    /// `sup|ḣ| < ε/|a|²` when `ε` is given.
    pub example_bound: Option<BoundCheck>,
    /// Whether `w` came from the perpendicular fallback (`a ∥ n`).
    pub transverse_fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub sup_derivative: f64,
    /// `ε/|a|²`.
    pub limit: f64,
    /// `ε/|a| − sup|ḣ|·|w|`, a lower bound for the ball margin.
    pub gradient_margin: f64,
}

/// First basis vector not parallel to `n`, orthonormalized against it.
fn fallback_perpendicular(n: &Vec3) -> Vec3 {
    (0..3)
        .map(|i| {
            let e = Vec3::basis(i);
            e - *n * e.dot(n)
        })
        .find(|p| p.norm() > 1e-8)
        .and_then(|p| p.normalized())
        .expect("a unit vector is parallel to at most one basis direction")
}

/// Builds the interface, rejecting planar profiles.
pub fn build_surface(
    n: &Vec3,
    a: &Vec3,
    profile: Profile,
    epsilon: Option<f64>,
    radius: f64,
) -> Result<InterfaceSurface, SurfaceError> {
    build(n, a, profile, epsilon, radius, false)
}

/// Flat interface `h ≡ 0`, used as a degenerate control.
pub fn build_planar_control(
    n: &Vec3,
    a: &Vec3,
    epsilon: Option<f64>,
    radius: f64,
) -> Result<InterfaceSurface, SurfaceError> {
    build(n, a, Profile::Flat, epsilon, radius, true)
}

fn build(
    n: &Vec3,
    a: &Vec3,
    profile: Profile,
    epsilon: Option<f64>,
    radius: f64,
    allow_planar: bool,
) -> Result<InterfaceSurface, SurfaceError> {
    let norm = n.norm();
    if !n.is_finite() || (norm - 1.0).abs() > 1e-12 {
        return Err(SurfaceError::NonUnitNormal { norm });
    }
    if !a.is_finite() {
        return Err(SurfaceError::InvalidParameter("shear is not finite".into()));
    }
    let a_norm = a.norm();
    if a_norm == 0.0 {
        return Err(SurfaceError::ZeroShear);
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(SurfaceError::InvalidParameter(format!("radius {radius}")));
    }
    let w = a.cross(n);
    let fallback = w.norm() <= PARALLEL_TOL * a_norm;
    let (transverse, transverse_scale) = if fallback {
        (fallback_perpendicular(n), a_norm)
    } else {
        (w.normalized().expect("nonzero"), w.norm())
    };
    let nonconstant = profile.validate(transverse_scale * radius)?;
    if !nonconstant && !allow_planar {
        return Err(SurfaceError::PlanarProfile);
    }
    let sup_value = profile.sup_value_on(transverse_scale * radius);
    if radius <= sup_value {
        return Err(SurfaceError::DomainTooSmall { radius, sup_value });
    }
    let example_bound = match epsilon {
        None => None,
        Some(eps) => {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(SurfaceError::InvalidParameter(format!("epsilon {eps}")));
            }
            let sup_derivative = profile.sup_derivative();
            let limit = eps / (a_norm * a_norm);
            if !(sup_derivative < limit) {
                return Err(SurfaceError::BoundViolated { sup_derivative, limit });
            }
            Some(BoundCheck {
                sup_derivative,
                limit,
                gradient_margin: eps / a_norm - sup_derivative * transverse_scale,
            })
        }
    };
    Ok(InterfaceSurface {
        normal_at_origin: *n,
        shear: *a,
        transverse,
        transverse_scale,
        lateral: n.cross(&transverse),
        profile,
        domain_radius: radius,
        epsilon,
        example_bound,
        transverse_fallback: fallback,
    })
}

impl InterfaceSurface {
    /// `x·w`.
    fn transverse_coordinate(&self, x: &Vec3) -> f64 {
        self.transverse_scale * x.dot(&self.transverse)
    }

    /// `f(x) = x·n + h(x·w)`.
    pub fn level(&self, x: &Vec3) -> f64 {
        x.dot(&self.normal_at_origin) + self.profile.value(self.transverse_coordinate(x))
    }

    /// `∇f(x) = n + ḣ(x·w) w`.
    pub fn level_gradient(&self, x: &Vec3) -> Vec3 {
        let d = self.profile.derivative(self.transverse_coordinate(x));
        self.normal_at_origin + self.transverse * (d * self.transverse_scale)
    }

    /// `1 + a·n`.
    pub fn expected_determinant(&self) -> f64 {
        1.0 + self.shear.dot(&self.normal_at_origin)
    }

    /// Point of `Γ` with in-plane coordinates `(s, k)` along (transverse, lateral).
    pub fn lift(&self, s: f64, k: f64) -> Vec3 {
        let h = self.profile.value(self.transverse_scale * s);
        self.transverse * s + self.lateral * k - self.normal_at_origin * h
    }

    /// Derivative of `lift` along `(ds, dk)`.
    fn lift_velocity(&self, s: f64, ds: f64, dk: f64) -> Vec3 {
        let hd = self.profile.derivative(self.transverse_scale * s) * self.transverse_scale;
        self.transverse * ds + self.lateral * dk - self.normal_at_origin * (hd * ds)
    }

    /// Half-width of the square parameter patch whose lift stays in the domain.
    pub fn patch_half_width(&self) -> f64 {
        let hs = self.profile.sup_value_on(self.transverse_scale * self.domain_radius);
        ((self.domain_radius * self.domain_radius - hs * hs) / 2.0).sqrt()
    }
}

/// `y⁺(x) = x + a f(x)` and `Dy⁺(x) = 1 + a⊗∇f(x)`.
pub fn deformation_plus(surface: &InterfaceSurface, x: &Vec3) -> Result<(Vec3, Mat3), SurfaceError> {
    let distance = x.norm();
    if !(distance <= surface.domain_radius * (1.0 + 1e-12)) {
        return Err(SurfaceError::OutOfDomain { distance, radius: surface.domain_radius });
    }
    Ok(deformation_unchecked(surface, x))
}

fn deformation_unchecked(surface: &InterfaceSurface, x: &Vec3) -> (Vec3, Mat3) {
    let value = *x + surface.shear * surface.level(x);
    let gradient = Mat3::identity() + surface.shear.outer(&surface.level_gradient(x));
    (value, gradient)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMesh {
    pub surface: InterfaceSurface,
    pub resolution: usize,
    pub half_width: f64,
    /// Parameter coordinates `(s, k)` of each vertex.
    pub parameters: Vec<[f64; 2]>,
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    /// `∇f/|∇f|`.
    pub normals: Vec<Vec3>,
    /// `|∇f| a`.
    pub shears: Vec<Vec3>,
}

impl SurfaceMesh {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }
}

/// Triangulated graph of `Γ` over a `resolution × resolution` grid in the
/// (transverse, lateral) plane.
pub fn mesh_interface(surface: &InterfaceSurface, resolution: usize) -> Result<SurfaceMesh, SurfaceError> {
    if resolution < 2 {
        return Err(SurfaceError::InvalidResolution(resolution));
    }
    let half_width = surface.patch_half_width();
    let coord = |i: usize| -half_width + 2.0 * half_width * i as f64 / (resolution - 1) as f64;
    let mut parameters = Vec::with_capacity(resolution * resolution);
    for i in 0..resolution {
        for j in 0..resolution {
            parameters.push([coord(i), coord(j)]);
        }
    }
    let vertices: Vec<Vec3> = parameters.iter().map(|p| surface.lift(p[0], p[1])).collect();
    let (normals, shears) = vertices
        .iter()
        .map(|x| {
            let g = surface.level_gradient(x);
            let len = g.norm();
            (g * (1.0 / len), surface.shear * len)
        })
        .unzip();
    let mut triangles = Vec::with_capacity(2 * (resolution - 1) * (resolution - 1));
    let idx = |i: usize, j: usize| i * resolution + j;
    for i in 0..resolution - 1 {
        for j in 0..resolution - 1 {
            triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    Ok(SurfaceMesh {
        surface: surface.clone(),
        resolution,
        half_width,
        parameters,
        vertices,
        triangles,
        normals,
        shears,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VertexResidual {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// `|Dy⁺ − 1 − a(x)⊗n(x)|`.
    pub jump_residual: f64,
    /// `|det Dy⁺ − (1 + a·n)|`.
    pub det_deviation: f64,
    /// `ε/|a| − |∇f − n|`.
    pub ball_margin: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonplanarityWitness {
    pub first: usize,
    pub second: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    pub vertex_count: usize,
    pub triangle_count: usize,
    pub max_jump_residual: f64,
    pub det_deviation: f64,
    pub ball_membership_margin: Option<f64>,
    /// `max |a·∇f − a·n|`.
    pub orthogonality_residual: f64,
    /// `max |f|` over vertices.
    pub level_set_residual: f64,
    /// `max |y⁺(x) − x|` over vertices.
    pub displacement_residual: f64,
    pub path_continuity_residual: Option<f64>,
    pub nonplanarity_witness: Option<NonplanarityWitness>,
    /// Largest normal difference across the mesh.
    pub normal_spread: f64,
    pub hull_checked: Option<usize>,
    pub hull_failures: Option<usize>,
    /// Non-planarity is only checked on the meshed domain.
    pub nonplanarity_scope: String,
}

impl CompatibilityReport {
    /// Jump residual within `tol` and a nonnegative ball margin (if any).
    pub fn passes(&self, tol: f64) -> bool {
        self.max_jump_residual <= tol
            && self.ball_membership_margin.is_none_or(|m| m >= 0.0)
            && self.hull_failures.is_none_or(|f| f == 0)
    }
}

/// Membership predicate for the ball certified by an interior-point run.
pub fn certificate_predicate(cert: &InteriorPointCertificate, det_tol: f64) -> impl Fn(&Mat3) -> bool + '_ {
    move |g| cert.contains(g, det_tol)
}

/// Margin left by `F` in the certified ball, `Δ^{1/3}ε − |F − Δ^{1/3}1|`.
/// This is the ε to hand to `build_surface` when the shear comes from `cert`.
pub fn certificate_epsilon(cert: &InteriorPointCertificate) -> f64 {
    cert.slack()
}

fn check_mesh(surface: &InterfaceSurface, mesh: &SurfaceMesh) -> Result<(), SurfaceError> {
    if mesh.surface != *surface {
        return Err(SurfaceError::MeshSurfaceMismatch("surface parameters differ".into()));
    }
    let n = mesh.vertices.len();
    if mesh.normals.len() != n || mesh.shears.len() != n || mesh.parameters.len() != n {
        return Err(SurfaceError::MeshSurfaceMismatch("per-vertex arrays have inconsistent lengths".into()));
    }
    if let Some(t) = mesh.triangles.iter().find(|t| t.iter().any(|&i| i >= n)) {
        return Err(SurfaceError::MeshSurfaceMismatch(format!("triangle {t:?} out of range")));
    }
    for (i, x) in mesh.vertices.iter().enumerate() {
        let f = surface.level(x);
        if !(f.abs() <= LEVEL_SET_TOL) {
            return Err(SurfaceError::MeshSurfaceMismatch(format!("vertex {i} has f = {f}")));
        }
    }
    Ok(())
}

/// Per-vertex residuals of the generalized jump condition.
pub fn vertex_residuals(surface: &InterfaceSurface, mesh: &SurfaceMesh) -> Result<Vec<VertexResidual>, SurfaceError> {
    check_mesh(surface, mesh)?;
    let expected_det = surface.expected_determinant();
    let a_norm = surface.shear.norm();
    Ok(mesh
        .vertices
        .iter()
        .zip(mesh.normals.iter().zip(&mesh.shears))
        .map(|(x, (nx, ax))| {
            let (_, grad) = deformation_unchecked(surface, x);
            let jump = grad - Mat3::identity() - ax.outer(nx);
            let gap = (surface.level_gradient(x) - surface.normal_at_origin).norm();
            VertexResidual {
                x: x[0],
                y: x[1],
                z: x[2],
                jump_residual: jump.norm(),
                det_deviation: (grad.det() - expected_det).abs(),
                ball_margin: surface.epsilon.map(|eps| eps / a_norm - gap),
            }
        })
        .collect())
}

/// Checks `Dy⁺(x) = 1 + a(x)⊗n(x)` at every vertex. When `hull_test` is
/// given, every `Dy⁺(x)` is passed to it and failures counted.
pub fn verify_compatibility(
    surface: &InterfaceSurface,
    mesh: &SurfaceMesh,
    hull_test: Option<&dyn Fn(&Mat3) -> bool>,
) -> Result<CompatibilityReport, SurfaceError> {
    let residuals = vertex_residuals(surface, mesh)?;
    let max = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0f64, f64::max);
    let a_dot_n = surface.shear.dot(&surface.normal_at_origin);
    let hull_failures = hull_test.map(|test| {
        mesh.vertices
            .iter()
            .filter(|x| !test(&deformation_unchecked(surface, x).1))
            .count()
    });
    let (witness, spread) = nonplanarity(mesh);
    Ok(CompatibilityReport {
        vertex_count: mesh.vertex_count(),
        triangle_count: mesh.triangle_count(),
        max_jump_residual: max(&mut residuals.iter().map(|r| r.jump_residual)),
        det_deviation: max(&mut residuals.iter().map(|r| r.det_deviation)),
        ball_membership_margin: surface
            .epsilon
            .map(|_| residuals.iter().filter_map(|r| r.ball_margin).fold(f64::INFINITY, f64::min)),
        orthogonality_residual: max(&mut mesh
            .vertices
            .iter()
            .map(|x| (surface.shear.dot(&surface.level_gradient(x)) - a_dot_n).abs())),
        level_set_residual: max(&mut mesh.vertices.iter().map(|x| surface.level(x).abs())),
        displacement_residual: max(&mut mesh
            .vertices
            .iter()
            .map(|x| (surface.shear * surface.level(x)).norm())),
        path_continuity_residual: None,
        nonplanarity_witness: witness,
        normal_spread: spread,
        hull_checked: hull_test.map(|_| mesh.vertex_count()),
        hull_failures,
        nonplanarity_scope: "meshed domain only".into(),
    })
}

/// Pair of vertices whose unit normals are farthest from each other along
/// the transverse direction; present when they differ by more than the
/// non-planarity tolerance.
fn nonplanarity(mesh: &SurfaceMesh) -> (Option<NonplanarityWitness>, f64) {
    let t = mesh.surface.transverse;
    let key = |i: &usize| mesh.normals[*i].dot(&t);
    let cmp = |a: &usize, b: &usize| key(a).total_cmp(&key(b));
    let indices = 0..mesh.normals.len();
    let (Some(lo), Some(hi)) = (indices.clone().min_by(cmp), indices.max_by(cmp)) else {
        return (None, 0.0);
    };
    let spread = (mesh.normals[hi] - mesh.normals[lo]).norm();
    let witness = (spread > NONPLANARITY_TOL).then_some(NonplanarityWitness { first: lo, second: hi });
    (witness, spread)
}

fn check_connected(mesh: &SurfaceMesh) -> Result<(), SurfaceError> {
    let total = mesh.vertices.len();
    let mut adjacency = vec![Vec::new(); total];
    for t in &mesh.triangles {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
    }
    let mut seen = vec![false; total];
    let mut queue = VecDeque::new();
    if total > 0 {
        seen[0] = true;
        queue.push_back(0);
    }
    let mut reached = usize::from(total > 0);
    while let Some(v) = queue.pop_front() {
        for &w in &adjacency[v] {
            if !seen[w] {
                seen[w] = true;
                reached += 1;
                queue.push_back(w);
            }
        }
    }
    if reached != total {
        return Err(SurfaceError::DisconnectedMesh { reached, total });
    }
    Ok(())
}

/// Result of integrating `[Dy⁺ − Dy⁻]γ̇ = a(γ)(n(γ)·γ̇)` along a path.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PathIntegral {
    /// `|∫ a(γ)(n(γ)·γ̇) dt|`.
    pub jump: f64,
    /// `∫ |n(γ)·γ̇| |a(γ)| dt`, which vanishes iff the path is tangent to `Γ`.
    pub tangency_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathContinuityReport {
    pub trials: usize,
    pub steps: usize,
    pub seed: u64,
    pub max_jump: f64,
    pub max_tangency_defect: f64,
    /// `max |a f(x)|` over vertices.
    pub vertex_displacement: f64,
    /// Larger of `max_jump` and `max_tangency_defect`.
    pub residual: f64,
}

/// Composite trapezoid rule for the jump integrand along `γ` on `[0, 1]`.
/// Returns the vector integral and the tangency defect.
fn integrate_path(
    surface: &InterfaceSurface,
    steps: usize,
    point: impl Fn(f64) -> Vec3,
    velocity: impl Fn(f64) -> Vec3,
) -> (Vec3, f64) {
    let steps = steps.max(1);
    let dt = 1.0 / steps as f64;
    let mut jump = Vec3::ZERO;
    let mut defect = 0.0;
    for i in 0..=steps {
        let t = i as f64 * dt;
        let weight = if i == 0 || i == steps { 0.5 * dt } else { dt };
        let g = surface.level_gradient(&point(t));
        let len = g.norm();
        let normal_speed = g.dot(&velocity(t)) / len;
        let ax = surface.shear * len;
        jump += ax * (normal_speed * weight);
        defect += normal_speed.abs() * ax.norm() * weight;
    }
    (jump, defect)
}

/// Integral along the in-surface path lifting the parameter segment `p → q`.
fn lifted_segment(surface: &InterfaceSurface, p: [f64; 2], q: [f64; 2], steps: usize) -> (Vec3, f64) {
    let (ds, dk) = (q[0] - p[0], q[1] - p[1]);
    integrate_path(
        surface,
        steps,
        |t| surface.lift(p[0] + t * ds, p[1] + t * dk),
        |t| surface.lift_velocity(p[0] + t * ds, ds, dk),
    )
}

/// Integrates the jump along `trials` random in-surface paths between mesh
/// vertices. Each path is the lift of a two-leg polygon in the parameter
/// plane through a random intermediate vertex.
pub fn path_continuity_check(
    surface: &InterfaceSurface,
    mesh: &SurfaceMesh,
    trials: usize,
    steps: usize,
    seed: u64,
) -> Result<PathContinuityReport, SurfaceError> {
    check_mesh(surface, mesh)?;
    check_connected(mesh)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = mesh.vertex_count();
    let leg_steps = (steps / 2).max(1);
    let (mut max_jump, mut max_defect) = (0.0f64, 0.0f64);
    for _ in 0..trials {
        let (i, m, j) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
        let (p, mid, q) = (mesh.parameters[i], mesh.parameters[m], mesh.parameters[j]);
        let (j1, r1) = lifted_segment(surface, p, mid, leg_steps);
        let (j2, r2) = lifted_segment(surface, mid, q, leg_steps);
        max_jump = max_jump.max((j1 + j2).norm());
        max_defect = max_defect.max(r1 + r2);
    }
    let vertex_displacement = mesh
        .vertices
        .iter()
        .map(|x| (surface.shear * surface.level(x)).norm())
        .fold(0.0, f64::max);
    Ok(PathContinuityReport {
        trials,
        steps,
        seed,
        max_jump,
        max_tangency_defect: max_defect,
        vertex_displacement,
        residual: max_jump.max(max_defect),
    })
}

/// Integral along a single in-surface path between two vertices (one leg).
pub fn in_surface_path(surface: &InterfaceSurface, mesh: &SurfaceMesh, from: usize, to: usize, steps: usize) -> PathIntegral {
    let (jump, tangency_defect) = lifted_segment(surface, mesh.parameters[from], mesh.parameters[to], steps);
    PathIntegral { jump: jump.norm(), tangency_defect }
}

/// Integral along the straight chord between two vertices, which leaves `Γ`.
pub fn chord_path(surface: &InterfaceSurface, mesh: &SurfaceMesh, from: usize, to: usize, steps: usize) -> PathIntegral {
    let (x0, x1) = (mesh.vertices[from], mesh.vertices[to]);
    let d = x1 - x0;
    let (jump, tangency_defect) = integrate_path(surface, steps, |t| x0 + d * t, |_| d);
    PathIntegral { jump: jump.norm(), tangency_defect }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChordControlReport {
    pub trials: usize,
    pub threshold: f64,
    /// Chords whose tangency defect exceeds `threshold`.
    pub exceeding: usize,
    pub min_defect: f64,
    pub max_defect: f64,
}

/// Same integrator on straight chords between random vertex pairs.
pub fn chord_control(
    surface: &InterfaceSurface,
    mesh: &SurfaceMesh,
    trials: usize,
    steps: usize,
    seed: u64,
    threshold: f64,
) -> Result<ChordControlReport, SurfaceError> {
    check_mesh(surface, mesh)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = mesh.vertex_count();
    let defects: Vec<f64> = (0..trials)
        .map(|_| {
            let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
            chord_path(surface, mesh, i, j, steps).tangency_defect
        })
        .collect();
    Ok(ChordControlReport {
        trials,
        threshold,
        exceeding: defects.iter().filter(|&&d| d > threshold).count(),
        min_defect: defects.iter().copied().fold(f64::INFINITY, f64::min),
        max_defect: defects.iter().copied().fold(0.0, f64::max),
    })
}

/// Wavefront OBJ with 1-based face indices.
pub fn write_obj<W: Write>(mesh: &SurfaceMesh, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# vertices {} faces {}", mesh.vertex_count(), mesh.triangle_count())?;
    for v in &mesh.vertices {
        writeln!(out, "v {} {} {}", v[0], v[1], v[2])?;
    }
    for t in &mesh.triangles {
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    Ok(())
}

/// Per-vertex residual table with header `x,y,z,jump_residual,det_deviation,ball_margin`.
pub fn write_residual_csv<W: Write>(rows: &[VertexResidual], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(["x", "y", "z", "jump_residual", "det_deviation", "ball_margin"])?;
    }
    w.flush()?;
    Ok(())
}

/// Parameters of the figure surface: `n = e₁`, `a = e₃`, `h(t) = t²e^{−t²}`.
pub fn figure_surface() -> InterfaceSurface {
    build_surface(&Vec3::basis(0), &Vec3::basis(2), Profile::GaussBump { scale: 1.0 }, None, 3.0)
        .expect("figure parameters are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_bump_sup_matches_scan() {
        let p = Profile::GaussBump { scale: 1.0 };
        let scan = (0..=200_000)
            .map(|i| p.derivative(-5.0 + 5e-5 * i as f64).abs())
            .fold(0.0, f64::max);
        assert!((p.sup_derivative() - 0.5872).abs() < 5e-5);
        assert!(scan <= p.sup_derivative() * (1.0 + 1e-12));
        assert!(p.sup_derivative() - scan < 1e-8);
    }

    #[test]
    fn flat_profile_rejected() {
        let e = build_surface(&Vec3::basis(0), &Vec3::basis(2), Profile::Flat, None, 1.0);
        assert_eq!(e.unwrap_err(), SurfaceError::PlanarProfile);
    }

    #[test]
    fn zero_shear_and_bad_normal() {
        let p = Profile::GaussBump { scale: 1.0 };
        assert_eq!(
            build_surface(&Vec3::basis(0), &Vec3::ZERO, p, None, 1.0).unwrap_err(),
            SurfaceError::ZeroShear
        );
        assert!(matches!(
            build_surface(&Vec3::new(1.0, 1.0, 0.0), &Vec3::basis(2), p, None, 1.0),
            Err(SurfaceError::NonUnitNormal { .. })
        ));
    }

    #[test]
    fn bound_violated_for_unscaled_bump() {
        let p = Profile::GaussBump { scale: 1.0 };
        let e = build_surface(&Vec3::basis(0), &Vec3::basis(2), p, Some(1e-3), 1.0).unwrap_err();
        assert!(matches!(e, SurfaceError::BoundViolated { .. }));
        let s = 0.9e-3 / p.sup_derivative();
        let ok = build_surface(&Vec3::basis(0), &Vec3::basis(2), Profile::GaussBump { scale: s }, Some(1e-3), 1.0);
        assert!(ok.unwrap().example_bound.unwrap().gradient_margin > 0.0);
    }

    #[test]
    fn parallel_shear_uses_fallback() {
        let s = build_surface(&Vec3::basis(0), &Vec3::new(0.5, 0.0, 0.0), Profile::GaussBump { scale: 1.0 }, None, 2.0)
            .unwrap();
        assert!(s.transverse_fallback);
        assert_eq!(s.transverse, Vec3::basis(1));
        assert_eq!(s.transverse_scale, 0.5);
    }

    #[test]
    fn gradient_at_origin() {
        let s = figure_surface();
        let (y, g) = deformation_plus(&s, &Vec3::ZERO).unwrap();
        assert_eq!(y, Vec3::ZERO);
        assert_eq!(g, Mat3::identity() + s.shear.outer(&s.normal_at_origin));
        assert!(matches!(
            deformation_plus(&s, &Vec3::new(4.0, 0.0, 0.0)),
            Err(SurfaceError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn small_mesh() {
        let s = figure_surface();
        let m = mesh_interface(&s, 2).unwrap();
        assert_eq!((m.vertex_count(), m.triangle_count()), (4, 2));
        assert!(m.vertices.iter().all(|x| s.level(x).abs() <= 1e-12 && x.norm() <= 3.0));
        assert_eq!(mesh_interface(&s, 1).unwrap_err(), SurfaceError::InvalidResolution(1));
    }

    #[test]
    fn figure_cross_sections() {
        let s = figure_surface();
        let m = mesh_interface(&s, 5).unwrap();
        for (p, x) in m.parameters.iter().zip(&m.vertices) {
            let h = s.profile.value(p[0]);
            assert!(x.max_abs_diff(&Vec3::new(-h, p[0], p[1])) < 1e-15);
        }
    }

    #[test]
    fn mismatch_detected() {
        let s = figure_surface();
        let m = mesh_interface(&s, 4).unwrap();
        let other = build_surface(&Vec3::basis(0), &Vec3::basis(2), Profile::GaussBump { scale: 0.5 }, None, 3.0).unwrap();
        assert!(matches!(verify_compatibility(&other, &m, None), Err(SurfaceError::MeshSurfaceMismatch(_))));
    }

    #[test]
    fn planar_control_is_exact() {
        let s = build_planar_control(&Vec3::basis(0), &Vec3::new(0.5, 0.0, 0.25), Some(0.5), 1.0).unwrap();
        let m = mesh_interface(&s, 6).unwrap();
        let r = verify_compatibility(&s, &m, None).unwrap();
        assert_eq!(r.max_jump_residual, 0.0);
        assert_eq!(r.det_deviation, 0.0);
        assert!(r.nonplanarity_witness.is_none());
        let expected = 0.5 / Vec3::new(0.5, 0.0, 0.25).norm();
        assert_eq!(r.ball_membership_margin, Some(expected));
    }

    #[test]
    fn equal_endpoints_give_zero() {
        let s = figure_surface();
        let m = mesh_interface(&s, 5).unwrap();
        let r = in_surface_path(&s, &m, 7, 7, 100);
        assert_eq!(r, PathIntegral::default());
    }

    #[test]
    fn csv_header_and_terminator() {
        let rows = [VertexResidual { x: 1.0, y: 0.5, z: 0.0, jump_residual: 0.0, det_deviation: 0.0, ball_margin: None }];
        let mut buf = Vec::new();
        write_residual_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "x,y,z,jump_residual,det_deviation,ball_margin\r\n1.0,0.5,0.0,0.0,0.0,\r\n");
    }
}
