//! Boundary integral operators, the three exterior solves, and field /
//! far-field evaluation.

pub mod assembly;
pub mod eval;
pub mod solve;

pub use assembly::{assemble, assemble_with, AssemblyParams};
pub use eval::{
    evaluate_farfield, evaluate_field, evaluate_field_with, layer_potential, layer_potential_jet,
    representation_jet, representation_value, EvalParams, LayerKind,
};
pub use solve::{
    solve_dirichlet, solve_dirichlet_bvp, solve_impedance, solve_impedance_bvp, solve_neumann,
    SolverContext, SolverParams,
};

use crate::linalg::{CMatrix, LinalgError};
use crate::medium::{ElasticMedium, IncidentField, MediumError};
use crate::surface::{SurfaceError, SurfaceGrid};
use crate::{cvec, CVec3, C64, RVec3};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BieError {
    #[error("linear algebra failure: {0}")]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Medium(#[from] MediumError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("evaluation point at distance {distance:.3e} is closer than {required:.3e} to the boundary")]
    NearBoundary { distance: f64, required: f64 },
    #[error("operation expects a {expected} solve, got {got}")]
    WrongKind { expected: String, got: String },
    #[error("trace has the wrong space tag: {0}")]
    SpaceTag(String),
    #[error("alpha = 0 is the Neumann problem; use the Neumann solver")]
    UseNeumann,
    #[error("impedance parameter mismatch: solution has alpha = {have}, requested {want}")]
    AlphaMismatch { have: f64, want: f64 },
    #[error("invalid boundary trace: {0}")]
    InvalidTrace(String),
}

/// Trace-space role of a boundary field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceSpace {
    /// H^{1/2}-type data (displacement-like).
    Displacement,
    /// H^{-1/2}-type data (traction-like).
    Traction,
}

/// Complex 3-vector field sampled at the grid nodes.
#[derive(Debug, Clone)]
pub struct BoundaryTrace {
    pub values: Vec<CVec3>,
    pub space: TraceSpace,
}

impl BoundaryTrace {
    pub fn new(values: Vec<CVec3>, space: TraceSpace, grid: &SurfaceGrid) -> Result<Self, BieError> {
        if values.len() != grid.n_nodes() {
            return Err(BieError::InvalidTrace(format!(
                "trace has {} values for a grid with {} nodes",
                values.len(),
                grid.n_nodes()
            )));
        }
        if values
            .iter()
            .any(|v| !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()))
        {
            return Err(BieError::InvalidTrace("non-finite trace value".into()));
        }
        Ok(BoundaryTrace { values, space })
    }

    pub fn zeros(grid: &SurfaceGrid, space: TraceSpace) -> Self {
        BoundaryTrace {
            values: vec![CVec3::zeros(); grid.n_nodes()],
            space,
        }
    }

    /// Weighted L2 norm over the surface.
    pub fn l2_norm(&self, grid: &SurfaceGrid) -> f64 {
        self.values
            .iter()
            .zip(grid.weights.iter())
            .map(|(v, w)| v.norm_squared() * w)
            .sum::<f64>()
            .sqrt()
    }
}

/// Sample an incident field's trace on the grid nodes.
pub fn incident_trace(
    field: &IncidentField,
    medium: &ElasticMedium,
    grid: &SurfaceGrid,
) -> Result<(BoundaryTrace, BoundaryTrace), BieError> {
    let mut disp = Vec::with_capacity(grid.n_nodes());
    let mut trac = Vec::with_capacity(grid.n_nodes());
    for i in 0..grid.n_nodes() {
        let jet = field.eval(medium, &grid.nodes[i])?;
        disp.push(jet.value);
        trac.push(crate::medium::traction(&jet, &grid.normals[i], medium)?);
    }
    Ok((
        BoundaryTrace {
            values: disp,
            space: TraceSpace::Displacement,
        },
        BoundaryTrace {
            values: trac,
            space: TraceSpace::Traction,
        },
    ))
}

/// Which boundary operator a matrix discretizes. The kernels carry the
/// factor two, so the second-kind equations read exactly as printed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorTag {
    /// Single layer, kernel 2 Phi(x, y).
    S,
    /// Double layer, kernel 2 t[T_y Phi(x, y)].
    K,
    /// Traction of the single layer, kernel 2 [T_x Phi(x, y)].
    KPrime,
}

/// Dense collocation matrix of a boundary operator.
pub struct DenseBoundaryOperator {
    pub tag: OperatorTag,
    pub n_nodes: usize,
    pub matrix: CMatrix,
}

impl DenseBoundaryOperator {
    pub fn apply(&self, values: &[CVec3]) -> Vec<CVec3> {
        let flat = flatten(values);
        let out = self.matrix.matvec(&flat);
        unflatten(&out)
    }
}

pub(crate) fn flatten(values: &[CVec3]) -> Vec<C64> {
    let mut out = Vec::with_capacity(values.len() * 3);
    for v in values {
        out.extend_from_slice(&[v.x, v.y, v.z]);
    }
    out
}

pub(crate) fn unflatten(flat: &[C64]) -> Vec<CVec3> {
    flat.chunks_exact(3)
        .map(|c| CVec3::new(c[0], c[1], c[2]))
        .collect()
}

/// Exterior boundary-value problem class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemKind {
    Dirichlet,
    Neumann,
    Impedance { alpha: f64 },
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProblemKind::Dirichlet => write!(f, "dirichlet"),
            ProblemKind::Neumann => write!(f, "neumann"),
            ProblemKind::Impedance { alpha } => write!(f, "impedance(alpha={alpha})"),
        }
    }
}

/// How a solution's exterior field is represented by layer potentials
/// over its grid.
#[derive(Debug, Clone)]
pub enum Representation {
    /// u = -SL[psi], psi the total traction (Dirichlet scattering).
    SingleLayerNeg { density: Vec<CVec3> },
    /// u = DL[phi] - i eta SL[phi] (combined-field Dirichlet data solve).
    CombinedField { density: Vec<CVec3>, eta: f64 },
    /// u = DL[w] + i beta SL[w], w the total displacement trace
    /// (impedance / Neumann scattering; beta = alpha omega sqrt(rho)).
    DoubleLayerTotal { density: Vec<CVec3>, beta: f64 },
    /// u = DL[v] + i beta SL[v] - SL[g] for the data-driven impedance /
    /// Neumann problem with traces v = u|Gamma and g = (T + i beta)u.
    DoubleLayerWithData {
        density: Vec<CVec3>,
        beta: f64,
        data: Vec<CVec3>,
    },
}

/// A solved exterior problem: boundary unknown plus everything needed
/// to evaluate fields and far fields.
pub struct ScatteringSolution {
    pub kind: ProblemKind,
    pub medium: ElasticMedium,
    pub grid: Arc<SurfaceGrid>,
    pub incident: Option<IncidentField>,
    /// Native unknown of the formulation (Dirichlet scattering: total
    /// traction; impedance/Neumann scattering: total displacement;
    /// data-driven solves: the representation density).
    pub unknown: BoundaryTrace,
    /// Derived complementary trace (see `kind`).
    pub complementary: BoundaryTrace,
    pub representation: Representation,
    /// One-norm condition estimate of the solved system.
    pub condition: f64,
    /// Consistency residual of the solved traces (see solver docs).
    pub bc_residual: f64,
}

/// Quadrature grid of directions on the unit sphere with L2 weights.
#[derive(Debug, Clone)]
pub struct DirectionGrid {
    pub level: u32,
    pub dirs: Vec<RVec3>,
    pub weights: Vec<f64>,
}

impl DirectionGrid {
    pub fn new(level: u32) -> Self {
        let grid = crate::surface::build_grid(&crate::surface::StarSurface::unit_sphere(), level)
            .expect("unit sphere grid");
        DirectionGrid {
            level,
            dirs: grid.nodes,
            weights: grid.weights,
        }
    }
}

/// Far-field pair (u_p, u_s) on a direction grid; u_p is radial and
/// u_s tangential, enforced by projection.
#[derive(Debug, Clone)]
pub struct FarFieldPattern {
    pub directions: Arc<DirectionGrid>,
    pub u_p: Vec<CVec3>,
    pub u_s: Vec<CVec3>,
}

impl FarFieldPattern {
    pub fn new(directions: Arc<DirectionGrid>, u_p: Vec<CVec3>, u_s: Vec<CVec3>) -> Self {
        let mut out = FarFieldPattern {
            directions,
            u_p,
            u_s,
        };
        out.project();
        out
    }

    pub fn zeros(directions: Arc<DirectionGrid>) -> Self {
        let n = directions.dirs.len();
        FarFieldPattern {
            directions,
            u_p: vec![CVec3::zeros(); n],
            u_s: vec![CVec3::zeros(); n],
        }
    }

    /// Enforce u_p parallel and u_s orthogonal to the direction.
    fn project(&mut self) {
        for (i, d) in self.directions.dirs.iter().enumerate() {
            let dc = cvec(d);
            self.u_p[i] = dc * dc.dot(&self.u_p[i]);
            let radial = dc.dot(&self.u_s[i]);
            self.u_s[i] -= dc * radial;
        }
    }

    /// L2(S^2)^2 norm of the pair.
    pub fn l2_norm(&self) -> f64 {
        self.directions
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| w * (self.u_p[i].norm_squared() + self.u_s[i].norm_squared()))
            .sum::<f64>()
            .sqrt()
    }

    /// self + factor * other, on the same direction grid.
    pub fn add_scaled(&self, other: &FarFieldPattern, factor: C64) -> FarFieldPattern {
        assert_eq!(self.directions.dirs.len(), other.directions.dirs.len());
        FarFieldPattern {
            directions: self.directions.clone(),
            u_p: self
                .u_p
                .iter()
                .zip(other.u_p.iter())
                .map(|(a, b)| a + b * factor)
                .collect(),
            u_s: self
                .u_s
                .iter()
                .zip(other.u_s.iter())
                .map(|(a, b)| a + b * factor)
                .collect(),
        }
    }

    /// Largest structural violation |u_s . d| or |u_p x d|.
    pub fn structure_residual(&self) -> f64 {
        self.directions
            .dirs
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let dc = cvec(d);
                let radial = dc.dot(&self.u_s[i]).norm();
                let cross = self.u_p[i].cross(&dc).norm();
                radial.max(cross)
            })
            .fold(0.0, f64::max)
    }
}
