#![allow(dead_code)]

use nonplanar::hulls::TwoWellSpec;
use nonplanar::twinning::solve_rank_one;
use nonplanar::{Mat3, Rotation, Stretch, Vec3};
use rand::Rng;

/// Rotation from a uniformly drawn unit quaternion.
pub fn random_rotation<R: Rng>(rng: &mut R) -> Mat3 {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n2: f64 = q.iter().map(|x| x * x).sum();
        if (1e-4..=1.0).contains(&n2) {
            return quaternion_rotation(q);
        }
    }
}

pub fn quaternion_rotation(q: [f64; 4]) -> Mat3 {
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|c| c / n);
    Mat3::from_rows([
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ])
}

pub fn random_unit<R: Rng>(rng: &mut R) -> Vec3 {
    random_rotation(rng).col(0)
}

/// `Rᵀ diag(λ) R` with eigenvalues in `range` and a random frame.
pub fn random_spd<R: Rng>(rng: &mut R, range: std::ops::Range<f64>) -> Stretch {
    let r = random_rotation(rng);
    let d = Mat3::diag(
        rng.gen_range(range.clone()),
        rng.gen_range(range.clone()),
        rng.gen_range(range),
    );
    Stretch::new(r.transpose() * d * r).expect("spd")
}

pub fn random_two_well<R: Rng>(rng: &mut R) -> TwoWellSpec {
    loop {
        let (e1, e2, e3): (f64, f64, f64) = (rng.gen_range(0.85..1.15), rng.gen_range(0.85..1.15), rng.gen_range(0.9..1.1));
        if (e1 - e2).abs() > 0.02 {
            return TwoWellSpec::new(e1, e2, e3).expect("valid wells");
        }
    }
}

/// `R((1−λ)U₁ + λQU₂)` along a random twin of the two wells.
pub fn first_order_laminate<R: Rng>(rng: &mut R, spec: &TwoWellSpec) -> Mat3 {
    let (u1, u2) = spec.wells();
    let sols = solve_rank_one(&u1, &u2).expect("equal determinants");
    let sols = sols.solutions();
    let c = &sols[rng.gen_range(0..sols.len())];
    let lambda = rng.gen_range(0.0..=1.0);
    let q = *c.rotation.matrix();
    random_rotation(rng) * (u1 * (1.0 - lambda) + q * u2 * lambda)
}

/// Convex combination along a rank-one segment between two first-order laminates.
pub fn second_order_laminate<R: Rng>(rng: &mut R, spec: &TwoWellSpec) -> Mat3 {
    loop {
        let g = first_order_laminate(rng, spec);
        let h = first_order_laminate(rng, spec);
        let Ok(outcome) = solve_rank_one(&g, &h) else { continue };
        let sols = outcome.solutions();
        if sols.is_empty() {
            continue;
        }
        let c = &sols[rng.gen_range(0..sols.len())];
        let t = rng.gen_range(0.0..=1.0);
        return g + c.shear.outer(&c.normal) * t;
    }
}

/// `R₀ sqrt(C)` where `C` has the two-well block structure and determinant
/// but violates the trace inequality by at least `min_violation`.
pub fn trace_violator<R: Rng>(rng: &mut R, spec: &TwoWellSpec, min_violation: f64) -> Mat3 {
    let (e1, e2, e3) = (spec.eta1, spec.eta2, spec.eta3);
    let p = e1 * e1 * e2 * e2;
    let bound = e1 * e1 + e2 * e2;
    let c: f64 = rng.gen_range(-0.3..0.3);
    let r = (p + c * c).sqrt();
    let need = (bound - 2.0 * c.abs() + min_violation) / (2.0 * r);
    let tau_min = if need > 1.0 { need.acosh() } else { 0.0 };
    let tau = (tau_min + rng.gen_range(0.01..0.3)) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let (a, b) = (r * tau.exp(), r * (-tau).exp());
    let cmat = Mat3::from_rows([[a, c, 0.0], [c, b, 0.0], [0.0, 0.0, e3 * e3]]);
    random_rotation(rng) * cmat.sqrt_spd().expect("spd")
}

pub fn cubic_rotations() -> Vec<Rotation> {
    nonplanar::cubic_group().elements().to_vec()
}

/// Normals with canonical sign, in lexicographic order.
pub fn sorted_normals(mut ns: Vec<Vec3>) -> Vec<Vec3> {
    ns.iter_mut().for_each(|n| *n = n.canonical_sign());
    ns.sort_by(|a, b| {
        a.0.iter()
            .zip(b.0.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    ns
}
