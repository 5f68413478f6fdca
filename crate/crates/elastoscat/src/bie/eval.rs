//! Near-field and far-field evaluation of solved representations.

use super::{
    BieError, DirectionGrid, FarFieldPattern, Representation, ScatteringSolution,
};
use crate::medium::{
    far_kernels, far_traction_kernels, fundamental_solution, fundamental_traction,
    kernel_scalars2, ElasticMedium, FieldJet, KernelMode, KernelScalars2,
};
use crate::surface::{chart_point, SurfaceGrid, TRI_RULE};
use crate::{cvec, CMat3, CVec3, C64, RVec3};
use rayon::prelude::*;
use std::sync::Arc;

#[derive(Debug, Clone, Copy)]
pub struct EvalParams {
    /// Minimum admissible distance to the boundary in units of the mean
    /// node spacing.
    pub guard_spacings: f64,
    /// Subdivide a face whose diameter exceeds this fraction of its
    /// distance to the evaluation point.
    pub near_factor: f64,
    pub max_subdivision: u32,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            guard_spacings: 2.0,
            near_factor: 1.5,
            max_subdivision: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    Single,
    Double,
}

/// Layer potential with a node-sampled density interpolated linearly
/// over the parameter triangles, with adaptive refinement near the
/// evaluation point. Kernels carry no factor two here.
pub fn layer_potential(
    grid: &SurfaceGrid,
    medium: &ElasticMedium,
    density: &[CVec3],
    kind: LayerKind,
    x: &RVec3,
    params: &EvalParams,
) -> CVec3 {
    let mut acc = CVec3::zeros();
    for f_idx in 0..grid.faces.len() {
        acc += face_potential(
            grid,
            medium,
            density,
            kind,
            x,
            f_idx,
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            0,
            params,
        );
    }
    acc
}

#[allow(clippy::too_many_arguments)]
fn face_potential(
    grid: &SurfaceGrid,
    medium: &ElasticMedium,
    density: &[CVec3],
    kind: LayerKind,
    x: &RVec3,
    f_idx: usize,
    corners: [[f64; 3]; 3],
    depth: u32,
    params: &EvalParams,
) -> CVec3 {
    let face = grid.faces[f_idx];
    let node_pos = [
        grid.nodes[face[0]],
        grid.nodes[face[1]],
        grid.nodes[face[2]],
    ];
    let corner_pos: [RVec3; 3] = std::array::from_fn(|k| {
        node_pos[0] * corners[k][0] + node_pos[1] * corners[k][1] + node_pos[2] * corners[k][2]
    });
    let diam = (corner_pos[0] - corner_pos[1])
        .norm()
        .max((corner_pos[1] - corner_pos[2]).norm())
        .max((corner_pos[2] - corner_pos[0]).norm());
    let dist = corner_pos
        .iter()
        .map(|p| (p - x).norm())
        .fold(f64::INFINITY, f64::min);
    if depth < params.max_subdivision && diam > params.near_factor * dist {
        let mid = |a: [f64; 3], b: [f64; 3]| {
            [
                0.5 * (a[0] + b[0]),
                0.5 * (a[1] + b[1]),
                0.5 * (a[2] + b[2]),
            ]
        };
        let m01 = mid(corners[0], corners[1]);
        let m12 = mid(corners[1], corners[2]);
        let m20 = mid(corners[2], corners[0]);
        let mut acc = CVec3::zeros();
        for child in [
            [corners[0], m01, m20],
            [m01, corners[1], m12],
            [m20, m12, corners[2]],
            [m01, m12, m20],
        ] {
            acc += face_potential(grid, medium, density, kind, x, f_idx, child, depth + 1, params);
        }
        return acc;
    }

    let verts = [
        grid.params[face[0]],
        grid.params[face[1]],
        grid.params[face[2]],
    ];
    let corner_q: [RVec3; 3] = std::array::from_fn(|k| {
        verts[0] * corners[k][0] + verts[1] * corners[k][1] + verts[2] * corners[k][2]
    });
    let q_u = corner_q[1] - corner_q[0];
    let q_v = corner_q[2] - corner_q[0];
    let mut acc = CVec3::zeros();
    for (rule_bary, rw) in TRI_RULE {
        let q = corner_q[0] * rule_bary[0] + corner_q[1] * rule_bary[1] + corner_q[2] * rule_bary[2];
        let cp = chart_point(&grid.shape, &q, &q_u, &q_v);
        let w = 0.5 * rw * cp.measure;
        let mut bary = [0.0; 3];
        for k in 0..3 {
            bary[k] = corners[0][k] * rule_bary[0]
                + corners[1][k] * rule_bary[1]
                + corners[2][k] * rule_bary[2];
        }
        let dens = density[face[0]] * C64::new(bary[0], 0.0)
            + density[face[1]] * C64::new(bary[1], 0.0)
            + density[face[2]] * C64::new(bary[2], 0.0);
        let kernel = match kind {
            LayerKind::Single => fundamental_solution(medium, x, &cp.pos),
            LayerKind::Double => {
                fundamental_traction(medium, x, &cp.pos, &cp.normal).map(|m| m.transpose())
            }
        }
        .expect("quadrature points stay away from the evaluation point");
        acc += kernel * dens.scale(w);
    }
    acc
}

/// Value and gradient of the single-layer kernel applied to a complex
/// weight: u(x) = Phi(x, y) w for fixed y.
fn single_layer_point_jet(s: &KernelScalars2, zh: &RVec3, w: &CVec3) -> (CVec3, CMat3) {
    let zc = cvec(zh);
    let zw = zc.dot(w);
    let value = w * s.base.a + zc * (s.base.b * zw);
    let b_over_r = s.base.b / s.base.r;
    let jac = w * zc.transpose() * s.base.ap
        + zc * zc.transpose() * (s.base.bp * zw - b_over_r * 2.0 * zw)
        + CMat3::identity() * (b_over_r * zw)
        + zc * w.transpose() * b_over_r;
    (value, jac)
}

/// Value and gradient in x of the double-layer kernel applied to a
/// complex weight: u(x) = t[T_y Phi(x, y)] w for fixed y with source
/// normal n. With c1, c2, c3 the traction combination coefficients,
///   u = -[c1 (n.w) zh + c2 ((zh.n) w + (zh.w) n) + c3 (zh.n)(zh.w) zh].
fn double_layer_point_jet(
    medium: &ElasticMedium,
    s: &KernelScalars2,
    zh: &RVec3,
    n: &RVec3,
    w: &CVec3,
) -> (CVec3, CMat3) {
    let lam = medium.lambda;
    let mu = medium.mu;
    let r = s.base.r;
    let b_over_r = s.base.b / r;
    let db_over_r = (s.base.bp - b_over_r) / r; // d/dr (b/r)
    let c1 = (s.base.ap + s.base.bp + b_over_r * 2.0) * lam + b_over_r * (2.0 * mu);
    let c2 = (s.base.ap + b_over_r) * mu;
    let c3 = (s.base.bp * 2.0 - b_over_r * 4.0) * mu;
    let c1p = (s.app + s.bpp + db_over_r * 2.0) * lam + db_over_r * (2.0 * mu);
    let c2p = (s.app + db_over_r) * mu;
    let c3p = (s.bpp * 2.0 - db_over_r * 4.0) * mu;

    let zc = cvec(zh);
    let nc = cvec(n);
    let zn = zh.dot(n);
    let zw = zc.dot(w);
    let nw = nc.dot(w);
    let value = -(zc * (c1 * nw) + (w * C64::new(zn, 0.0) + nc * zw) * c2 + zc * (c3 * zn * zw));

    // projector P = I - zh zh^T, gradient of zh is P/r, of r is zh.
    let proj = CMat3::identity() - zc * zc.transpose();
    let pn = nc - zc * C64::new(zn, 0.0); // P n
    let pw = w - zc * zw; // P w
    let mut jac = CMat3::zeros();
    // c1 (n.w) zh term
    jac += zc * zc.transpose() * (c1p * nw) + proj * (c1 * nw / r);
    // c2 ((zh.n) w + (zh.w) n) term
    jac += w * zc.transpose() * (c2p * C64::new(zn, 0.0)) + nc * zc.transpose() * (c2p * zw);
    jac += (w * pn.transpose() + nc * pw.transpose()) * (c2 / r);
    // c3 (zh.n)(zh.w) zh term
    jac += zc * zc.transpose() * (c3p * C64::new(zn, 0.0) * zw);
    jac += (zc * pn.transpose() * zw + zc * pw.transpose() * C64::new(zn, 0.0) + proj * (C64::new(zn, 0.0) * zw))
        * (c3 / r);
    (value, -jac)
}

/// Layer potential together with its first-derivative jet, from
/// analytic kernel derivatives (same traversal as `layer_potential`).
pub fn layer_potential_jet(
    grid: &SurfaceGrid,
    medium: &ElasticMedium,
    density: &[CVec3],
    kind: LayerKind,
    x: &RVec3,
    params: &EvalParams,
) -> FieldJet {
    let mut value = CVec3::zeros();
    let mut jac = CMat3::zeros();
    for f_idx in 0..grid.faces.len() {
        face_potential_jet(
            grid,
            medium,
            density,
            kind,
            x,
            f_idx,
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            0,
            params,
            &mut value,
            &mut jac,
        );
    }
    FieldJet::new(value, jac)
}

#[allow(clippy::too_many_arguments)]
fn face_potential_jet(
    grid: &SurfaceGrid,
    medium: &ElasticMedium,
    density: &[CVec3],
    kind: LayerKind,
    x: &RVec3,
    f_idx: usize,
    corners: [[f64; 3]; 3],
    depth: u32,
    params: &EvalParams,
    value: &mut CVec3,
    jac: &mut CMat3,
) {
    let face = grid.faces[f_idx];
    let node_pos = [
        grid.nodes[face[0]],
        grid.nodes[face[1]],
        grid.nodes[face[2]],
    ];
    let corner_pos: [RVec3; 3] = std::array::from_fn(|k| {
        node_pos[0] * corners[k][0] + node_pos[1] * corners[k][1] + node_pos[2] * corners[k][2]
    });
    let diam = (corner_pos[0] - corner_pos[1])
        .norm()
        .max((corner_pos[1] - corner_pos[2]).norm())
        .max((corner_pos[2] - corner_pos[0]).norm());
    let dist = corner_pos
        .iter()
        .map(|p| (p - x).norm())
        .fold(f64::INFINITY, f64::min);
    if depth < params.max_subdivision && diam > params.near_factor * dist {
        let mid = |a: [f64; 3], b: [f64; 3]| {
            [
                0.5 * (a[0] + b[0]),
                0.5 * (a[1] + b[1]),
                0.5 * (a[2] + b[2]),
            ]
        };
        let m01 = mid(corners[0], corners[1]);
        let m12 = mid(corners[1], corners[2]);
        let m20 = mid(corners[2], corners[0]);
        for child in [
            [corners[0], m01, m20],
            [m01, corners[1], m12],
            [m20, m12, corners[2]],
            [m01, m12, m20],
        ] {
            face_potential_jet(
                grid, medium, density, kind, x, f_idx, child, depth + 1, params, value, jac,
            );
        }
        return;
    }

    let verts = [
        grid.params[face[0]],
        grid.params[face[1]],
        grid.params[face[2]],
    ];
    let corner_q: [RVec3; 3] = std::array::from_fn(|k| {
        verts[0] * corners[k][0] + verts[1] * corners[k][1] + verts[2] * corners[k][2]
    });
    let q_u = corner_q[1] - corner_q[0];
    let q_v = corner_q[2] - corner_q[0];
    for (rule_bary, rw) in TRI_RULE {
        let q = corner_q[0] * rule_bary[0] + corner_q[1] * rule_bary[1] + corner_q[2] * rule_bary[2];
        let cp = chart_point(&grid.shape, &q, &q_u, &q_v);
        let w = 0.5 * rw * cp.measure;
        let mut bary = [0.0; 3];
        for k in 0..3 {
            bary[k] = corners[0][k] * rule_bary[0]
                + corners[1][k] * rule_bary[1]
                + corners[2][k] * rule_bary[2];
        }
        let dens = density[face[0]] * C64::new(bary[0], 0.0)
            + density[face[1]] * C64::new(bary[1], 0.0)
            + density[face[2]] * C64::new(bary[2], 0.0);
        let z = x - cp.pos;
        let r = z.norm();
        let zh = z / r;
        let s = kernel_scalars2(medium, r, KernelMode::Dynamic);
        let (v, j) = match kind {
            LayerKind::Single => single_layer_point_jet(&s, &zh, &dens),
            LayerKind::Double => double_layer_point_jet(medium, &s, &zh, &cp.normal, &dens),
        };
        *value += v.scale(w);
        *jac += j.scale(w);
    }
}

/// Jet of a solution's representation at an exterior point.
pub fn representation_jet(
    solution: &ScatteringSolution,
    x: &RVec3,
    params: &EvalParams,
) -> FieldJet {
    let grid = &solution.grid;
    let m = &solution.medium;
    let combine = |jets: Vec<(C64, FieldJet)>| {
        let mut value = CVec3::zeros();
        let mut jac = CMat3::zeros();
        for (factor, jet) in jets {
            value += jet.value * factor;
            jac += jet.gradient * factor;
        }
        FieldJet::new(value, jac)
    };
    match &solution.representation {
        Representation::SingleLayerNeg { density } => combine(vec![(
            -C64::ONE,
            layer_potential_jet(grid, m, density, LayerKind::Single, x, params),
        )]),
        Representation::CombinedField { density, eta } => combine(vec![
            (
                C64::ONE,
                layer_potential_jet(grid, m, density, LayerKind::Double, x, params),
            ),
            (
                C64::new(0.0, -*eta),
                layer_potential_jet(grid, m, density, LayerKind::Single, x, params),
            ),
        ]),
        Representation::DoubleLayerTotal { density, beta } => {
            let mut jets = vec![(
                C64::ONE,
                layer_potential_jet(grid, m, density, LayerKind::Double, x, params),
            )];
            if *beta != 0.0 {
                jets.push((
                    C64::new(0.0, *beta),
                    layer_potential_jet(grid, m, density, LayerKind::Single, x, params),
                ));
            }
            combine(jets)
        }
        Representation::DoubleLayerWithData {
            density,
            beta,
            data,
        } => {
            let mut jets = vec![
                (
                    C64::ONE,
                    layer_potential_jet(grid, m, density, LayerKind::Double, x, params),
                ),
                (
                    -C64::ONE,
                    layer_potential_jet(grid, m, data, LayerKind::Single, x, params),
                ),
            ];
            if *beta != 0.0 {
                jets.push((
                    C64::new(0.0, *beta),
                    layer_potential_jet(grid, m, density, LayerKind::Single, x, params),
                ));
            }
            combine(jets)
        }
    }
}

/// Representation value at a point, without the distance guard (used by
/// the identity checks that evaluate at controlled standoff distances).
pub fn representation_value(
    solution: &ScatteringSolution,
    x: &RVec3,
    params: &EvalParams,
) -> CVec3 {
    representation_field(solution, x, params)
}

fn representation_field(
    solution: &ScatteringSolution,
    x: &RVec3,
    params: &EvalParams,
) -> CVec3 {
    let grid = &solution.grid;
    let m = &solution.medium;
    match &solution.representation {
        Representation::SingleLayerNeg { density } => {
            -layer_potential(grid, m, density, LayerKind::Single, x, params)
        }
        Representation::CombinedField { density, eta } => {
            let dl = layer_potential(grid, m, density, LayerKind::Double, x, params);
            let sl = layer_potential(grid, m, density, LayerKind::Single, x, params);
            dl - sl * C64::new(0.0, *eta)
        }
        Representation::DoubleLayerTotal { density, beta } => {
            let dl = layer_potential(grid, m, density, LayerKind::Double, x, params);
            if *beta == 0.0 {
                dl
            } else {
                let sl = layer_potential(grid, m, density, LayerKind::Single, x, params);
                dl + sl * C64::new(0.0, *beta)
            }
        }
        Representation::DoubleLayerWithData {
            density,
            beta,
            data,
        } => {
            let dl = layer_potential(grid, m, density, LayerKind::Double, x, params);
            let sl_data = layer_potential(grid, m, data, LayerKind::Single, x, params);
            let mut out = dl - sl_data;
            if *beta != 0.0 {
                let sl = layer_potential(grid, m, density, LayerKind::Single, x, params);
                out += sl * C64::new(0.0, *beta);
            }
            out
        }
    }
}

/// Scattered-field values at strictly exterior points.
pub fn evaluate_field(
    solution: &ScatteringSolution,
    points: &[RVec3],
) -> Result<Vec<CVec3>, BieError> {
    evaluate_field_with(solution, points, &EvalParams::default())
}

pub fn evaluate_field_with(
    solution: &ScatteringSolution,
    points: &[RVec3],
    params: &EvalParams,
) -> Result<Vec<CVec3>, BieError> {
    let grid = &solution.grid;
    let required = params.guard_spacings * grid.mean_spacing;
    for x in points {
        let distance = grid
            .nodes
            .iter()
            .map(|p| (p - x).norm())
            .fold(f64::INFINITY, f64::min);
        if distance < required {
            return Err(BieError::NearBoundary { distance, required });
        }
    }
    Ok(points
        .par_iter()
        .map(|x| representation_field(solution, x, params))
        .collect())
}

/// Far-field pattern of a solved representation on a direction grid.
pub fn evaluate_farfield(
    solution: &ScatteringSolution,
    directions: &Arc<DirectionGrid>,
) -> FarFieldPattern {
    let grid = &solution.grid;
    let m = &solution.medium;

    // (single-layer weight, its density), (double-layer weight, density)
    struct Term<'a> {
        single: C64,
        double: C64,
        density: &'a [CVec3],
    }
    let mut terms: Vec<Term> = Vec::new();
    match &solution.representation {
        Representation::SingleLayerNeg { density } => terms.push(Term {
            single: -C64::ONE,
            double: C64::ZERO,
            density,
        }),
        Representation::CombinedField { density, eta } => terms.push(Term {
            single: C64::new(0.0, -*eta),
            double: C64::ONE,
            density,
        }),
        Representation::DoubleLayerTotal { density, beta } => terms.push(Term {
            single: C64::new(0.0, *beta),
            double: C64::ONE,
            density,
        }),
        Representation::DoubleLayerWithData {
            density,
            beta,
            data,
        } => {
            terms.push(Term {
                single: C64::new(0.0, *beta),
                double: C64::ONE,
                density,
            });
            terms.push(Term {
                single: -C64::ONE,
                double: C64::ZERO,
                density: data,
            });
        }
    }

    let pairs: Vec<(CVec3, CVec3)> = directions
        .dirs
        .par_iter()
        .map(|xhat| {
            let mut up = CVec3::zeros();
            let mut us = CVec3::zeros();
            for (face, quad) in grid.faces.iter().zip(grid.quads.iter()) {
                for qp in quad {
                    let (kp, ks) = far_kernels(m, xhat, &qp.pos);
                    let needs_double = terms.iter().any(|t| t.double != C64::ZERO);
                    let (dp, ds) = if needs_double {
                        far_traction_kernels(m, xhat, &qp.pos, &qp.normal)
                    } else {
                        (crate::CMat3::zeros(), crate::CMat3::zeros())
                    };
                    for term in &terms {
                        let dens = term.density[face[0]] * C64::new(qp.bary[0], 0.0)
                            + term.density[face[1]] * C64::new(qp.bary[1], 0.0)
                            + term.density[face[2]] * C64::new(qp.bary[2], 0.0);
                        let dens = dens.scale(qp.weight);
                        if term.single != C64::ZERO {
                            up += kp * dens * term.single;
                            us += ks * dens * term.single;
                        }
                        if term.double != C64::ZERO {
                            up += dp * dens * term.double;
                            us += ds * dens * term.double;
                        }
                    }
                }
            }
            (up, us)
        })
        .collect();

    FarFieldPattern::new(
        directions.clone(),
        pairs.iter().map(|p| p.0).collect(),
        pairs.iter().map(|p| p.1).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bie::{BoundaryTrace, ProblemKind, Representation, TraceSpace};
    use crate::medium::ElasticMedium;
    use crate::surface::{build_grid, StarSurface};
    use crate::cvec;

    fn medium() -> ElasticMedium {
        ElasticMedium::new(2.0, 1.0, 1.0, 2.0).unwrap()
    }

    fn dummy_solution(density: Vec<CVec3>) -> ScatteringSolution {
        let grid = Arc::new(build_grid(&StarSurface::unit_sphere(), 1).unwrap());
        let unknown = BoundaryTrace::new(density.clone(), TraceSpace::Traction, &grid).unwrap();
        ScatteringSolution {
            kind: ProblemKind::Dirichlet,
            medium: medium(),
            grid,
            incident: None,
            unknown: unknown.clone(),
            complementary: unknown,
            representation: Representation::SingleLayerNeg { density },
            condition: 1.0,
            bc_residual: 0.0,
        }
    }

    #[test]
    fn zero_density_gives_zero_field_and_pattern() {
        let sol = dummy_solution(vec![CVec3::zeros(); 42]);
        let pts = vec![RVec3::new(3.0, 0.0, 0.0), RVec3::new(0.0, -2.5, 1.0)];
        for v in evaluate_field(&sol, &pts).unwrap() {
            assert!(v.norm() == 0.0);
        }
        let dirs = Arc::new(DirectionGrid::new(1));
        let pat = evaluate_farfield(&sol, &dirs);
        assert!(pat.l2_norm() == 0.0);
    }

    #[test]
    fn near_boundary_evaluation_rejected() {
        let sol = dummy_solution(vec![CVec3::zeros(); 42]);
        let pts = vec![RVec3::new(1.01, 0.0, 0.0)];
        assert!(matches!(
            evaluate_field(&sol, &pts),
            Err(BieError::NearBoundary { .. })
        ));
    }

    #[test]
    fn single_layer_matches_fine_quadrature_oracle() {
        let grid = Arc::new(build_grid(&StarSurface::unit_sphere(), 2).unwrap());
        let m = medium();
        let density: Vec<CVec3> = grid
            .nodes
            .iter()
            .map(|x| cvec(x) * C64::new(0.4, -0.7) + CVec3::new(C64::new(0.2, 0.1), C64::ZERO, C64::ONE))
            .collect();
        let params = EvalParams::default();
        for x in [RVec3::new(2.0, 0.3, -0.4), RVec3::new(-1.5, 1.5, 1.0)] {
            let direct = layer_potential(&grid, &m, &density, LayerKind::Single, &x, &params);
            let oracle = crate::oracles::fine_quadrature_potential(
                &grid,
                &m,
                &density,
                crate::oracles::OracleLayer::Single,
                &x,
            )
            .unwrap();
            let rel = (direct - oracle).norm() / oracle.norm();
            assert!(rel < 1e-4, "single layer vs oracle: {rel}");
        }
    }

    #[test]
    fn potential_jets_match_finite_differences() {
        let grid = Arc::new(build_grid(&StarSurface::unit_sphere(), 1).unwrap());
        let m = medium();
        let density: Vec<CVec3> = grid
            .nodes
            .iter()
            .map(|p| cvec(p) * C64::new(0.7, -0.2) + CVec3::new(C64::new(0.1, 0.4), C64::ONE, C64::ZERO))
            .collect();
        let params = EvalParams::default();
        let x = RVec3::new(1.6, -0.5, 0.9);
        for kind in [LayerKind::Single, LayerKind::Double] {
            let jet = layer_potential_jet(&grid, &m, &density, kind, &x, &params);
            let eval = |p: &RVec3| layer_potential(&grid, &m, &density, kind, p, &params);
            let fd = crate::oracles::fd_jet(&eval, &x, 1e-4);
            assert!((jet.value - fd.value).norm() < 1e-12 * fd.value.norm());
            let rel = (jet.gradient - fd.gradient).norm() / fd.gradient.norm();
            assert!(rel < 1e-6, "{kind:?} gradient mismatch {rel}");
        }
    }

    #[test]
    fn far_pattern_structure_enforced() {
        let grid = Arc::new(build_grid(&StarSurface::unit_sphere(), 1).unwrap());
        let density: Vec<CVec3> = grid
            .nodes
            .iter()
            .map(|x| cvec(x) + CVec3::new(C64::new(0.0, 0.3), C64::ONE, C64::ZERO))
            .collect();
        let sol = dummy_solution(density);
        let dirs = Arc::new(DirectionGrid::new(1));
        let pat = evaluate_farfield(&sol, &dirs);
        assert!(pat.l2_norm() > 0.0);
        assert!(pat.structure_residual() < 1e-10 * pat.l2_norm());
    }
}
