//! Star-shaped parametric surfaces, their grids and boundary
//! perturbations.

mod grid;
mod harmonics;
mod tangential;

pub use grid::{
    chart_point, face_chart, icosphere, ChartPoint, QuadPoint, SurfaceGrid, SurfaceShape,
    Triangulation, TRI_RULE,
};
pub use harmonics::{real_solid_harmonic, Poly3};
pub use tangential::{
    surface_divergence, tangential_gradient, tangential_gradient_scalar, MlsOperators,
};

use crate::{RMat3, RVec3};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("invalid surface: {0}")]
    InvalidSurface(String),
    #[error("perturbation not admissible: {0}")]
    AdmissibilityViolation(String),
    #[error("nesting violation: {0}")]
    NestingViolation(String),
    #[error("operation requires a radial perturbation field")]
    NotRadial,
}

/// Admissibility margin for perturbations: t * |theta|_C2 must stay
/// below this fraction of the minimal radius.
const ADMISSIBILITY_FACTOR: f64 = 0.9;

/// Star-shaped boundary r(xh) = r0 + sum c_lm Y_lm(xh), with a finite
/// real spherical-harmonic expansion. Finite expansions are analytic,
/// so normals and curvatures follow exactly from chart derivatives.
#[derive(Debug, Clone)]
pub struct StarSurface {
    base_radius: f64,
    coeffs: Vec<(u32, i32, f64)>,
    rho: Poly3,
    r_min: f64,
    r_max: f64,
}

impl StarSurface {
    pub const MIN_RADIUS: f64 = 1e-6;

    pub fn new(base_radius: f64, coeffs: Vec<(u32, i32, f64)>) -> Result<Self, SurfaceError> {
        let mut rho = Poly3::constant(base_radius);
        for &(l, m, c) in &coeffs {
            if m.unsigned_abs() > l {
                return Err(SurfaceError::InvalidSurface(format!(
                    "harmonic order |{m}| exceeds degree {l}"
                )));
            }
            rho = rho.add(&real_solid_harmonic(l, m).scale(c));
        }
        // Dense radial sample over a fine parameter sphere.
        let sample = icosphere(4);
        let mut r_min = f64::INFINITY;
        let mut r_max = 0.0f64;
        for p in &sample.verts {
            let r = rho.eval(p);
            r_min = r_min.min(r);
            r_max = r_max.max(r);
        }
        if !(r_min > Self::MIN_RADIUS) {
            return Err(SurfaceError::InvalidSurface(format!(
                "radial function reaches {r_min:.3e}; surface must stay positive"
            )));
        }
        Ok(StarSurface {
            base_radius,
            coeffs,
            rho,
            r_min,
            r_max,
        })
    }

    pub fn unit_sphere() -> Self {
        StarSurface::new(1.0, Vec::new()).expect("unit sphere is valid")
    }

    pub fn sphere(radius: f64) -> Result<Self, SurfaceError> {
        StarSurface::new(radius, Vec::new())
    }

    pub fn rho_poly(&self) -> &Poly3 {
        &self.rho
    }

    pub fn base_radius(&self) -> f64 {
        self.base_radius
    }

    pub fn coeffs(&self) -> &[(u32, i32, f64)] {
        &self.coeffs
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Radius in direction `p` (normalized internally).
    pub fn radius(&self, p: &RVec3) -> f64 {
        self.rho.eval(&p.normalize())
    }

    /// True if `x` lies strictly inside the enclosed domain.
    pub fn contains(&self, x: &RVec3) -> bool {
        let r = x.norm();
        if r == 0.0 {
            return true;
        }
        r < self.radius(x)
    }
}

/// Second-order jet of a vector field on the parameter sphere.
pub struct VectorJet2 {
    pub value: RVec3,
    pub jacobian: RMat3,
    pub hessians: [RMat3; 3],
}

/// Boundary perturbation field theta on the parameter sphere: either a
/// scalar harmonic profile times the radial direction (which is the
/// outward normal on spheres, where all reference configurations live),
/// or a general polynomial 3-vector field.
#[derive(Debug, Clone)]
pub enum PerturbationField {
    Radial {
        constant: f64,
        harmonics: Vec<(u32, i32, f64)>,
        profile: Poly3,
    },
    General {
        components: Box<[Poly3; 3]>,
    },
}

impl PerturbationField {
    /// Uniform unit radial field; equals the outward normal on spheres.
    pub fn normal() -> Self {
        Self::radial(1.0, Vec::new())
    }

    /// profile(xh) = constant + sum c_lm Y_lm(xh), field = profile * xh.
    pub fn radial(constant: f64, harmonics: Vec<(u32, i32, f64)>) -> Self {
        let mut profile = Poly3::constant(constant);
        for &(l, m, c) in &harmonics {
            profile = profile.add(&real_solid_harmonic(l, m).scale(c));
        }
        PerturbationField::Radial {
            constant,
            harmonics,
            profile,
        }
    }

    pub fn general(components: [Poly3; 3]) -> Self {
        PerturbationField::General {
            components: Box::new(components),
        }
    }

    /// Tangential rotation-like field xh x e3 (used as the canonical
    /// tangential test field).
    pub fn tangential_rotation() -> Self {
        Self::general([
            Poly3::monomial(0, 1, 0, 1.0),
            Poly3::monomial(1, 0, 0, -1.0),
            Poly3::zero(),
        ])
    }

    pub fn is_radial(&self) -> bool {
        matches!(self, PerturbationField::Radial { .. })
    }

    pub fn eval(&self, p: &RVec3) -> RVec3 {
        match self {
            PerturbationField::Radial { profile, .. } => p * profile.eval(p),
            PerturbationField::General { components } => RVec3::new(
                components[0].eval(p),
                components[1].eval(p),
                components[2].eval(p),
            ),
        }
    }

    pub fn eval_with_jacobian(&self, p: &RVec3) -> (RVec3, RMat3) {
        match self {
            PerturbationField::Radial { profile, .. } => {
                let g = profile.eval(p);
                let grad = profile.gradient(p);
                // xi_c = g p_c : row c of J is p_c grad^T + g e_c^T
                let jac = p * grad.transpose() + RMat3::identity() * g;
                (p * g, jac)
            }
            PerturbationField::General { components } => {
                let mut jac = RMat3::zeros();
                let mut val = RVec3::zeros();
                for c in 0..3 {
                    val[c] = components[c].eval(p);
                    jac.set_row(c, &components[c].gradient(p).transpose());
                }
                (val, jac)
            }
        }
    }

    pub fn eval_with_second(&self, p: &RVec3) -> VectorJet2 {
        match self {
            PerturbationField::Radial { profile, .. } => {
                let g = profile.eval(p);
                let grad = profile.gradient(p);
                let hess = profile.hessian(p);
                let jac = p * grad.transpose() + RMat3::identity() * g;
                let mut hessians = [RMat3::zeros(); 3];
                for (c, h) in hessians.iter_mut().enumerate() {
                    let mut ec = RVec3::zeros();
                    ec[c] = 1.0;
                    *h = hess * p[c] + ec * grad.transpose() + grad * ec.transpose();
                }
                VectorJet2 {
                    value: p * g,
                    jacobian: jac,
                    hessians,
                }
            }
            PerturbationField::General { components } => {
                let mut jac = RMat3::zeros();
                let mut val = RVec3::zeros();
                let mut hessians = [RMat3::zeros(); 3];
                for c in 0..3 {
                    val[c] = components[c].eval(p);
                    jac.set_row(c, &components[c].gradient(p).transpose());
                    hessians[c] = components[c].hessian(p);
                }
                VectorJet2 {
                    value: val,
                    jacobian: jac,
                    hessians,
                }
            }
        }
    }

    /// Crude C2-norm estimate over a dense parameter sample.
    pub fn c2_norm_estimate(&self) -> f64 {
        let sample = icosphere(3);
        sample
            .verts
            .iter()
            .map(|p| {
                let jets = self.eval_with_second(p);
                jets.value.norm()
                    + jets.jacobian.norm()
                    + jets.hessians.iter().map(|h| h.norm()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// Discretize a star surface at the given refinement level.
pub fn build_grid(surface: &StarSurface, level: u32) -> Result<SurfaceGrid, SurfaceError> {
    grid::build(SurfaceShape::Star(surface.clone()), level)
}

/// Grid of the displaced surface (Id + t theta)Gamma with node
/// correspondence to the base parametrization, for perturbation fields
/// that are not radial profiles.
pub fn build_offset_grid(
    surface: &StarSurface,
    field: &PerturbationField,
    t: f64,
    level: u32,
) -> Result<SurfaceGrid, SurfaceError> {
    grid::build(
        SurfaceShape::Offset {
            base: surface.clone(),
            field: field.clone(),
            t,
        },
        level,
    )
}

/// The perturbed surface Gamma_{t theta} for radial profile fields;
/// exact coefficient arithmetic on the harmonic expansion.
pub fn perturb(
    surface: &StarSurface,
    theta: &PerturbationField,
    t: f64,
) -> Result<StarSurface, SurfaceError> {
    let PerturbationField::Radial {
        constant,
        harmonics,
        ..
    } = theta
    else {
        return Err(SurfaceError::NotRadial);
    };
    let c2 = theta.c2_norm_estimate();
    if t.abs() * c2 > ADMISSIBILITY_FACTOR * surface.r_min() {
        return Err(SurfaceError::AdmissibilityViolation(format!(
            "t |theta|_C2 = {:.3e} exceeds {:.3e}",
            t.abs() * c2,
            ADMISSIBILITY_FACTOR * surface.r_min()
        )));
    }
    let mut coeffs = surface.coeffs.clone();
    for &(l, m, c) in harmonics {
        if let Some(entry) = coeffs.iter_mut().find(|e| e.0 == l && e.1 == m) {
            entry.2 += t * c;
        } else {
            coeffs.push((l, m, t * c));
        }
    }
    StarSurface::new(surface.base_radius + t * constant, coeffs)
        .map_err(|e| SurfaceError::AdmissibilityViolation(e.to_string()))
}

/// A strictly nested pair (Gamma, Gamma_theta) produced by a radial
/// offset; nesting is verified by dense radial comparison.
pub fn nested_pair(
    surface: &StarSurface,
    offset: f64,
) -> Result<(StarSurface, StarSurface), SurfaceError> {
    if !(offset > 0.0) {
        return Err(SurfaceError::NestingViolation(format!(
            "offset must be positive, got {offset}"
        )));
    }
    let outer = StarSurface::new(surface.base_radius + offset, surface.coeffs.clone())
        .map_err(|e| SurfaceError::NestingViolation(e.to_string()))?;
    let sample = icosphere(4);
    for p in &sample.verts {
        let gap = outer.radius(p) - surface.radius(p);
        if gap <= 0.0 {
            return Err(SurfaceError::NestingViolation(format!(
                "radial gap {gap:.3e} at a sample direction"
            )));
        }
    }
    Ok((surface.clone(), outer))
}

/// Plain-text mesh export: one node per line `x y z nx ny nz w H`,
/// followed by triangle index triples.
pub fn export_mesh(grid: &SurfaceGrid) -> String {
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", grid.n_nodes(), grid.faces.len()));
    for i in 0..grid.n_nodes() {
        let x = grid.nodes[i];
        let n = grid.normals[i];
        out.push_str(&format!(
            "{:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e}\n",
            x.x, x.y, x.z, n.x, n.y, n.z, grid.weights[i], grid.mean_curvature[i]
        ));
    }
    for f in &grid.faces {
        out.push_str(&format!("{} {} {}\n", f[0], f[1], f[2]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perturb_identity_and_uniform_offset() {
        let s = StarSurface::unit_sphere();
        let unchanged = perturb(&s, &PerturbationField::normal(), 0.0).unwrap();
        assert_eq!(unchanged.base_radius(), 1.0);
        assert!(unchanged.coeffs().is_empty());

        let grown = perturb(&s, &PerturbationField::normal(), 0.1).unwrap();
        let p = RVec3::new(0.3, -0.5, 0.81).normalize();
        assert!((grown.radius(&p) - 1.1).abs() < 1e-15);
    }

    #[test]
    fn perturb_shifts_harmonic_coefficient() {
        let s = StarSurface::unit_sphere();
        let theta = PerturbationField::radial(0.0, vec![(2, 0, 1.0)]);
        let p = perturb(&s, &theta, 0.05).unwrap();
        assert_eq!(p.coeffs(), &[(2, 0, 0.05)]);
        // point-wise radii agree with the profile
        let y20 = real_solid_harmonic(2, 0);
        for dir in [
            RVec3::new(0.0, 0.0, 1.0),
            RVec3::new(1.0, 0.0, 0.0),
            RVec3::new(0.6, 0.48, 0.64).normalize(),
        ] {
            assert!((p.radius(&dir) - (1.0 + 0.05 * y20.eval(&dir))).abs() < 1e-14);
        }
    }

    #[test]
    fn perturb_is_affine_in_t() {
        let s = StarSurface::new(1.0, vec![(2, 0, 0.1)]).unwrap();
        let theta = PerturbationField::radial(0.2, vec![(3, 1, 0.5)]);
        let one_shot = perturb(&s, &theta, 0.06).unwrap();
        let two_step = perturb(&perturb(&s, &theta, 0.04).unwrap(), &theta, 0.02).unwrap();
        assert!((one_shot.base_radius() - two_step.base_radius()).abs() < 1e-15);
        for (a, b) in one_shot.coeffs().iter().zip(two_step.coeffs().iter()) {
            assert_eq!((a.0, a.1), (b.0, b.1));
            assert!((a.2 - b.2).abs() < 1e-15);
        }
    }

    #[test]
    fn inadmissible_perturbation_rejected() {
        let s = StarSurface::unit_sphere();
        assert!(matches!(
            perturb(&s, &PerturbationField::normal(), -0.9),
            Err(SurfaceError::AdmissibilityViolation(_))
        ));
        assert!(matches!(
            perturb(&s, &PerturbationField::tangential_rotation(), 0.05),
            Err(SurfaceError::NotRadial)
        ));
    }

    #[test]
    fn nested_pair_spheres() {
        let s = StarSurface::unit_sphere();
        let (inner, outer) = nested_pair(&s, 0.2).unwrap();
        assert!((inner.base_radius() - 1.0).abs() < 1e-15);
        assert!((outer.base_radius() - 1.2).abs() < 1e-15);
        assert!(matches!(
            nested_pair(&s, 0.0),
            Err(SurfaceError::NestingViolation(_))
        ));
    }

    #[test]
    fn nested_pair_perturbed_base() {
        let s = StarSurface::new(1.0, vec![(2, 0, 0.15), (3, -2, 0.05)]).unwrap();
        let (inner, outer) = nested_pair(&s, 0.3).unwrap();
        let sample = icosphere(4);
        let min_gap = sample
            .verts
            .iter()
            .map(|p| outer.radius(p) - inner.radius(p))
            .fold(f64::INFINITY, f64::min);
        assert!(min_gap >= 0.29, "min gap {min_gap}");
    }

    #[test]
    fn surface_validation_rejects_negative_radius() {
        assert!(matches!(
            StarSurface::new(0.1, vec![(2, 0, 1.0)]),
            Err(SurfaceError::InvalidSurface(_))
        ));
    }

    #[test]
    fn mesh_export_roundtrip_shape() {
        let g = build_grid(&StarSurface::unit_sphere(), 1).unwrap();
        let text = export_mesh(&g);
        let mut lines = text.lines();
        let header: Vec<usize> = lines
            .next()
            .unwrap()
            .split_whitespace()
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(header, vec![g.n_nodes(), g.faces.len()]);
        assert_eq!(text.lines().count(), 1 + g.n_nodes() + g.faces.len());
    }

    #[test]
    fn offset_grid_matches_perturbed_star_grid_for_radial_fields() {
        let s = StarSurface::unit_sphere();
        let theta = PerturbationField::radial(0.0, vec![(2, 0, 1.0)]);
        let t = 0.05;
        let direct = build_grid(&perturb(&s, &theta, t).unwrap(), 2).unwrap();
        let offset = build_offset_grid(&s, &theta, t, 2).unwrap();
        for i in 0..direct.n_nodes() {
            assert!((direct.nodes[i] - offset.nodes[i]).norm() < 1e-13);
            assert!((direct.normals[i] - offset.normals[i]).norm() < 1e-12);
            assert!((direct.mean_curvature[i] - offset.mean_curvature[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn harmonics_are_orthonormal_under_grid_quadrature() {
        let g = build_grid(&StarSurface::unit_sphere(), 3).unwrap();
        let pairs = [(0, 0), (1, 1), (2, 0), (2, 2), (3, 1), (4, -3)];
        for (i, &(l1, m1)) in pairs.iter().enumerate() {
            let y1 = real_solid_harmonic(l1, m1);
            for &(l2, m2) in pairs.iter().skip(i) {
                let y2 = real_solid_harmonic(l2, m2);
                let mut acc = 0.0;
                for quad in &g.quads {
                    for qp in quad {
                        acc += qp.weight * y1.eval(&qp.pos) * y2.eval(&qp.pos);
                    }
                }
                let expected = if (l1, m1) == (l2, m2) { 1.0 } else { 0.0 };
                assert!(
                    (acc - expected).abs() < 1e-6,
                    "<Y{l1}{m1}, Y{l2}{m2}> = {acc}"
                );
            }
        }
    }
}
