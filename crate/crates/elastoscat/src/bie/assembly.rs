//! Collocation assembly of the boundary operators S, K and K'.
//!
//! Collocation points are the grid nodes. Far interactions use the
//! nodal (lumped hat) quadrature, kernel evaluated at node pairs, which
//! preserves the kernel symmetries in the matrix blocks exactly. Faces
//! near the collocation point switch to linear density interpolation
//! with recursive subdivision, and faces touching the collocation node
//! are integrated with a Duffy transform from the singular vertex,
//! which removes the 1/r singularity.
//!
//! The double-layer kernels are only Cauchy-singular through their
//! elastostatic part. Their diagonal blocks are therefore completed by
//! the rigid-motion identity of the static kernel (the static double
//! layer maps constants to -1/2 times the constant at smooth boundary
//! points) rather than by direct quadrature: for K the diagonal is
//! whatever makes the static row sum equal -I, and for K' the static
//! diagonal is the weakly singular combination
//! 2 [T(n_x - n_y, d_x) Phi] minus the transpose of the completed K
//! diagonal. The remaining dynamic-minus-static kernels are weakly
//! singular and integrate with the Duffy rule directly.

use super::{BieError, DenseBoundaryOperator, OperatorTag};
use crate::linalg::CMatrix;
use crate::medium::{
    kernel_scalars, traction_of_columns_x, ElasticMedium, KernelMode, KernelScalars,
};
use crate::surface::{chart_point, SurfaceGrid, TRI_RULE};
use crate::{CMat3, RVec3};
use rayon::prelude::*;

/// Gauss-Legendre nodes/weights on [0, 1] (12 points).
pub const GAUSS_12: [(f64, f64); 12] = {
    const X: [f64; 6] = [
        0.125_233_408_511_468_9,
        0.367_831_498_998_180_2,
        0.587_317_954_286_617_5,
        0.769_902_674_194_304_7,
        0.904_117_256_370_474_9,
        0.981_560_634_246_719_2,
    ];
    const W: [f64; 6] = [
        0.249_147_045_813_402_8,
        0.233_492_536_538_354_8,
        0.203_167_426_723_065_9,
        0.160_078_328_543_346_2,
        0.106_939_325_995_318_4,
        0.047_175_336_386_511_8,
    ];
    [
        ((1.0 - X[5]) / 2.0, W[5] / 2.0),
        ((1.0 - X[4]) / 2.0, W[4] / 2.0),
        ((1.0 - X[3]) / 2.0, W[3] / 2.0),
        ((1.0 - X[2]) / 2.0, W[2] / 2.0),
        ((1.0 - X[1]) / 2.0, W[1] / 2.0),
        ((1.0 - X[0]) / 2.0, W[0] / 2.0),
        ((1.0 + X[0]) / 2.0, W[0] / 2.0),
        ((1.0 + X[1]) / 2.0, W[1] / 2.0),
        ((1.0 + X[2]) / 2.0, W[2] / 2.0),
        ((1.0 + X[3]) / 2.0, W[3] / 2.0),
        ((1.0 + X[4]) / 2.0, W[4] / 2.0),
        ((1.0 + X[5]) / 2.0, W[5] / 2.0),
    ]
};

#[derive(Debug, Clone, Copy)]
pub struct AssemblyParams {
    /// Subdivide a face when the collocation point is closer than this
    /// multiple of the face diameter.
    pub near_factor: f64,
    /// Maximum subdivision depth for near-singular faces.
    pub max_subdivision: u32,
}

impl Default for AssemblyParams {
    fn default() -> Self {
        AssemblyParams {
            near_factor: 2.0,
            max_subdivision: 3,
        }
    }
}

/// Assemble the collocation matrix of a boundary operator.
pub fn assemble(
    grid: &SurfaceGrid,
    medium: &ElasticMedium,
    tag: OperatorTag,
) -> Result<DenseBoundaryOperator, BieError> {
    assemble_with(grid, medium, tag, &AssemblyParams::default())
}

pub fn assemble_with(
    grid: &SurfaceGrid,
    medium: &ElasticMedium,
    tag: OperatorTag,
    params: &AssemblyParams,
) -> Result<DenseBoundaryOperator, BieError> {
    let n = grid.n_nodes();
    let dim = 3 * n;
    // Hat masses per (face, vertex slot) for the lumped far rule.
    let hat_mass: Vec<[f64; 3]> = grid
        .quads
        .iter()
        .map(|quad| {
            let mut m = [0.0; 3];
            for qp in quad {
                for (slot, mass) in m.iter_mut().enumerate() {
                    *mass += qp.weight * qp.bary[slot];
                }
            }
            m
        })
        .collect();
    let mut matrix = CMatrix::zeros(dim, dim);
    matrix
        .data
        .par_chunks_mut(3 * dim)
        .enumerate()
        .for_each(|(i, band)| {
            let row = assemble_row(grid, medium, tag, i, params, &hat_mass);
            for (j, blk) in row.iter().enumerate() {
                for r in 0..3 {
                    for c in 0..3 {
                        band[r * dim + 3 * j + c] = blk[(r, c)];
                    }
                }
            }
        });
    Ok(DenseBoundaryOperator {
        tag,
        n_nodes: n,
        matrix,
    })
}

/// The three kernels the assembly needs at one quadrature point, all
/// carrying the factor two of the printed equations:
/// the dynamic kernel of `tag`, the static K kernel (for the diagonal
/// completions), and for K' the weakly singular static combination.
struct KernelPoint {
    dynamic: CMat3,
    static_k: CMat3,
    weak_kprime: CMat3,
}

#[inline]
fn kernels_at(
    medium: &ElasticMedium,
    tag: OperatorTag,
    x_i: &RVec3,
    n_i: &RVec3,
    y: &RVec3,
    n_y: &RVec3,
    need_weak: bool,
) -> KernelPoint {
    let z = x_i - y;
    let r = z.norm();
    let zh = z / r;
    let dyn_scal = kernel_scalars(medium, r, KernelMode::Dynamic);
    match tag {
        OperatorTag::S => KernelPoint {
            dynamic: crate::medium::phi_from_scalars(&dyn_scal, &zh).scale(2.0),
            static_k: CMat3::zeros(),
            weak_kprime: CMat3::zeros(),
        },
        OperatorTag::K => {
            let stat_scal = kernel_scalars(medium, r, KernelMode::Static);
            KernelPoint {
                dynamic: k_kernel(medium, &dyn_scal, &zh, n_y),
                static_k: k_kernel(medium, &stat_scal, &zh, n_y),
                weak_kprime: CMat3::zeros(),
            }
        }
        OperatorTag::KPrime => {
            let stat_scal = kernel_scalars(medium, r, KernelMode::Static);
            let weak = if need_weak {
                traction_of_columns_x(medium, &stat_scal, &zh, &(n_i - n_y)).scale(2.0)
            } else {
                CMat3::zeros()
            };
            KernelPoint {
                dynamic: traction_of_columns_x(medium, &dyn_scal, &zh, n_i).scale(2.0),
                static_k: k_kernel(medium, &stat_scal, &zh, n_y),
                weak_kprime: weak,
            }
        }
    }
}

/// Kernel of K: 2 t[T_y Phi(x, y)].
#[inline]
fn k_kernel(medium: &ElasticMedium, scal: &KernelScalars, zh: &RVec3, n_y: &RVec3) -> CMat3 {
    (-traction_of_columns_x(medium, scal, zh, n_y)).transpose().scale(2.0)
}

fn assemble_row(
    grid: &SurfaceGrid,
    medium: &ElasticMedium,
    tag: OperatorTag,
    i: usize,
    params: &AssemblyParams,
    hat_mass: &[[f64; 3]],
) -> Vec<CMat3> {
    let n = grid.n_nodes();
    let x_i = grid.nodes[i];
    let n_i = grid.normals[i];
    let needs_static = tag != OperatorTag::S;
    let mut row = vec![CMat3::zeros(); n];
    let mut row_stat = if needs_static {
        vec![CMat3::zeros(); n]
    } else {
        Vec::new()
    };
    let mut weak_diag = CMat3::zeros();
    let mut far_mass = vec![0.0f64; n];

    for (f_idx, face) in grid.faces.iter().enumerate() {
        let local = face.iter().position(|&v| v == i);
        if let Some(local) = local {
            // Duffy quadrature from the singular vertex.
            let verts = [
                grid.params[face[0]],
                grid.params[face[1]],
                grid.params[face[2]],
            ];
            let a = verts[local];
            let b = verts[(local + 1) % 3];
            let c = verts[(local + 2) % 3];
            for &(s, ws) in GAUSS_12.iter() {
                for &(t, wt) in GAUSS_12.iter() {
                    let mut bary = [0.0; 3];
                    bary[local] = 1.0 - s;
                    bary[(local + 1) % 3] = s * (1.0 - t);
                    bary[(local + 2) % 3] = s * t;
                    let q = a * bary[local]
                        + b * bary[(local + 1) % 3]
                        + c * bary[(local + 2) % 3];
                    let q_s = (b - a) * (1.0 - t) + (c - a) * t;
                    let q_t = (c - b) * s;
                    let cp = chart_point(&grid.shape, &q, &q_s, &q_t);
                    let w = ws * wt * cp.measure;
                    let kp = kernels_at(
                        medium,
                        tag,
                        &x_i,
                        &n_i,
                        &cp.pos,
                        &cp.normal,
                        tag == OperatorTag::KPrime,
                    );
                    for (slot, &node) in face.iter().enumerate() {
                        let hat = bary[slot] * w;
                        if hat == 0.0 {
                            continue;
                        }
                        if node == i && needs_static {
                            // Diagonal: only the weakly singular
                            // dynamic-minus-static part integrates here.
                            row[node] += (kp.dynamic - kp.static_k).scale(hat);
                        } else {
                            row[node] += kp.dynamic.scale(hat);
                            if needs_static {
                                row_stat[node] += kp.static_k.scale(hat);
                            }
                        }
                    }
                    if tag == OperatorTag::KPrime {
                        weak_diag += kp.weak_kprime.scale(bary[local] * w);
                    }
                }
            }
        } else {
            let node_pos = [
                grid.nodes[face[0]],
                grid.nodes[face[1]],
                grid.nodes[face[2]],
            ];
            let diam = (node_pos[0] - node_pos[1])
                .norm()
                .max((node_pos[1] - node_pos[2]).norm())
                .max((node_pos[2] - node_pos[0]).norm());
            let dist = node_pos
                .iter()
                .map(|p| (p - x_i).norm())
                .fold(f64::INFINITY, f64::min);
            if dist >= params.near_factor * diam {
                // Far face: defer to the lumped nodal rule.
                for (slot, &node) in face.iter().enumerate() {
                    far_mass[node] += hat_mass[f_idx][slot];
                }
            } else {
                let corners = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
                accumulate_adaptive(
                    grid, medium, tag, &x_i, &n_i, f_idx, corners, 1, params, needs_static,
                    &mut row, &mut row_stat,
                );
            }
        }
    }

    // Lumped far contributions: one kernel evaluation per node pair.
    for (j, &mass) in far_mass.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        let kp = kernels_at(
            medium,
            tag,
            &x_i,
            &n_i,
            &grid.nodes[j],
            &grid.normals[j],
            false,
        );
        row[j] += kp.dynamic.scale(mass);
        if needs_static {
            row_stat[j] += kp.static_k.scale(mass);
        }
    }

    // Rigid-motion completion of the strongly singular diagonals.
    match tag {
        OperatorTag::S => {}
        OperatorTag::K => {
            let mut d = -CMat3::identity();
            for (j, blk) in row_stat.iter().enumerate() {
                if j != i {
                    d -= blk;
                }
            }
            row[i] += d;
        }
        OperatorTag::KPrime => {
            let mut d = -CMat3::identity();
            for (j, blk) in row_stat.iter().enumerate() {
                if j != i {
                    d -= blk;
                }
            }
            row[i] += weak_diag - d.transpose();
        }
    }
    row
}

#[allow(clippy::too_many_arguments)]
fn accumulate_adaptive(
    grid: &SurfaceGrid,
    medium: &ElasticMedium,
    tag: OperatorTag,
    x_i: &RVec3,
    n_i: &RVec3,
    f_idx: usize,
    corners: [[f64; 3]; 3],
    depth: u32,
    params: &AssemblyParams,
    needs_static: bool,
    row: &mut [CMat3],
    row_stat: &mut [CMat3],
) {
    let face = grid.faces[f_idx];
    let node_pos = [
        grid.nodes[face[0]],
        grid.nodes[face[1]],
        grid.nodes[face[2]],
    ];
    // Approximate corner positions for the refinement decision.
    let corner_pos: [RVec3; 3] = std::array::from_fn(|k| {
        node_pos[0] * corners[k][0] + node_pos[1] * corners[k][1] + node_pos[2] * corners[k][2]
    });
    let diam = (corner_pos[0] - corner_pos[1])
        .norm()
        .max((corner_pos[1] - corner_pos[2]).norm())
        .max((corner_pos[2] - corner_pos[0]).norm());
    let dist = corner_pos
        .iter()
        .map(|p| (p - x_i).norm())
        .fold(f64::INFINITY, f64::min);

    if depth < params.max_subdivision && dist < params.near_factor * diam {
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
            accumulate_adaptive(
                grid, medium, tag, x_i, n_i, f_idx, child, depth + 1, params, needs_static, row,
                row_stat,
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
        let kp = kernels_at(medium, tag, x_i, n_i, &cp.pos, &cp.normal, false);
        // Global barycentric coordinates for the hat weights.
        let mut bary = [0.0; 3];
        for k in 0..3 {
            bary[k] = corners[0][k] * rule_bary[0]
                + corners[1][k] * rule_bary[1]
                + corners[2][k] * rule_bary[2];
        }
        for (slot, &node) in face.iter().enumerate() {
            let hat = bary[slot] * w;
            row[node] += kp.dynamic.scale(hat);
            if needs_static {
                row_stat[node] += kp.static_k.scale(hat);
            }
        }
    }
}
