//! The three exterior solves and their data-driven variants.
//!
//! All formulations are second-kind equations in the factor-two
//! operators of the assembly module:
//!
//! * Dirichlet scattering, unknown psi = T(u + u_inc) on Gamma:
//!     (I + K' - i eta S) psi = 2 (T u_inc - i eta u_inc),  eta = kappa_s,
//!   and u = -SL[psi].
//! * Dirichlet data problem u = f on Gamma (combined-field ansatz
//!   u = DL[phi] - i eta SL[phi]):
//!     (I + K - i eta S) phi = 2 f.
//! * Impedance scattering (beta = alpha omega sqrt(rho) > 0), unknown
//!   w = (u + u_inc) on Gamma:
//!     (I - K - i beta S) w = 2 u_inc,   u = DL[w] + i beta SL[w].
//!   beta = 0 is the Neumann problem: same trace equation, guarded
//!   against irregular frequencies by the condition estimate.
//! * Impedance data problem (T + i beta) u = g, unknown v = u on Gamma:
//!     (I - K - i beta S) v = -S g,      u = DL[v] + i beta SL[v] - SL[g].
//!
//! The sign and scale conventions were fixed once against the
//! manufactured point-source oracle and are asserted by the tests.

use super::{
    assemble_with, flatten, incident_trace, unflatten, AssemblyParams, BieError, BoundaryTrace,
    DenseBoundaryOperator, OperatorTag, ProblemKind, Representation, ScatteringSolution,
    TraceSpace,
};
use crate::linalg::{CMatrix, LinalgError, LuSolver};
use crate::medium::{ElasticMedium, IncidentField};
use crate::surface::SurfaceGrid;
use crate::{CVec3, C64};
use std::collections::HashMap;
use std::sync::Arc;

#[derive(Debug, Clone, Copy)]
pub struct SolverParams {
    /// Abort when the one-norm condition estimate exceeds this.
    pub condition_guard: f64,
    /// Coupling parameter of the combined-field Dirichlet equations;
    /// defaults to kappa_s.
    pub eta: Option<f64>,
    pub assembly: AssemblyParams,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            condition_guard: 1e10,
            eta: None,
            assembly: AssemblyParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum SystemId {
    DirichletScatter,
    DirichletData,
    ImpedanceTotal { beta_bits: u64 },
}

struct SolvedSystem {
    lu: LuSolver,
    condition: f64,
}

/// Caches assembled operators and factored systems for one
/// (grid, medium) pair, so repeated solves (derivative data, multiple
/// right-hand sides, point-source columns) reuse the expensive parts.
pub struct SolverContext {
    pub grid: Arc<SurfaceGrid>,
    pub medium: ElasticMedium,
    pub params: SolverParams,
    ops: HashMap<OperatorTag, Arc<DenseBoundaryOperator>>,
    systems: HashMap<SystemId, Arc<SolvedSystem>>,
}

impl SolverContext {
    pub fn new(grid: Arc<SurfaceGrid>, medium: ElasticMedium) -> Self {
        SolverContext {
            grid,
            medium,
            params: SolverParams::default(),
            ops: HashMap::new(),
            systems: HashMap::new(),
        }
    }

    pub fn with_params(mut self, params: SolverParams) -> Self {
        self.params = params;
        self
    }

    fn eta(&self) -> f64 {
        self.params.eta.unwrap_or_else(|| self.medium.kappa_s())
    }

    pub fn operator(&mut self, tag: OperatorTag) -> Result<Arc<DenseBoundaryOperator>, BieError> {
        if let Some(op) = self.ops.get(&tag) {
            return Ok(op.clone());
        }
        let op = Arc::new(assemble_with(
            &self.grid,
            &self.medium,
            tag,
            &self.params.assembly,
        )?);
        self.ops.insert(tag, op.clone());
        Ok(op)
    }

    fn system(&mut self, id: SystemId) -> Result<Arc<SolvedSystem>, BieError> {
        if let Some(sys) = self.systems.get(&id) {
            return Ok(sys.clone());
        }
        let eta = self.eta();
        let s = self.operator(OperatorTag::S)?;
        let mut matrix: CMatrix = match id {
            SystemId::DirichletScatter => {
                let kp = self.operator(OperatorTag::KPrime)?;
                let mut m = kp.matrix.clone();
                m.scale_add(&s.matrix, C64::new(0.0, -eta));
                m
            }
            SystemId::DirichletData => {
                let k = self.operator(OperatorTag::K)?;
                let mut m = k.matrix.clone();
                m.scale_add(&s.matrix, C64::new(0.0, -eta));
                m
            }
            SystemId::ImpedanceTotal { beta_bits } => {
                let beta = f64::from_bits(beta_bits);
                let k = self.operator(OperatorTag::K)?;
                let mut m = CMatrix::zeros(k.matrix.n_rows, k.matrix.n_cols);
                m.scale_add(&k.matrix, -C64::ONE);
                m.scale_add(&s.matrix, C64::new(0.0, -beta));
                m
            }
        };
        matrix.add_identity(C64::ONE);
        let lu = LuSolver::factor(matrix)?;
        let condition = lu.condition_estimate();
        if condition > self.params.condition_guard {
            return Err(BieError::Linalg(LinalgError::IllConditioned {
                cond: condition,
                guard: self.params.condition_guard,
            }));
        }
        let sys = Arc::new(SolvedSystem { lu, condition });
        self.systems.insert(id, sys.clone());
        Ok(sys)
    }

    /// Calderon-consistency level of the discretization for an interior
    /// (entire) field with traces (f, g): |(I + K) f - S g| / |2 f|.
    fn interior_calderon_residual(
        &mut self,
        disp: &BoundaryTrace,
        trac: &BoundaryTrace,
    ) -> Result<f64, BieError> {
        let k = self.operator(OperatorTag::K)?;
        let s = self.operator(OperatorTag::S)?;
        let kf = k.apply(&disp.values);
        let sg = s.apply(&trac.values);
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..self.grid.n_nodes() {
            let w = self.grid.weights[i];
            let r = disp.values[i] + kf[i] - sg[i];
            num += r.norm_squared() * w;
            den += (disp.values[i] * C64::new(2.0, 0.0)).norm_squared() * w;
        }
        Ok((num / den.max(1e-300)).sqrt())
    }

    /// Dirichlet scattering solve: unknown is the total traction.
    pub fn solve_dirichlet(
        &mut self,
        incident: &IncidentField,
    ) -> Result<ScatteringSolution, BieError> {
        let eta = self.eta();
        let (ui, ti) = incident_trace(incident, &self.medium, &self.grid)?;
        let rhs: Vec<CVec3> = ui
            .values
            .iter()
            .zip(ti.values.iter())
            .map(|(u, t)| (t - u * C64::new(0.0, eta)) * C64::new(2.0, 0.0))
            .collect();
        let sys = self.system(SystemId::DirichletScatter)?;
        let psi = unflatten(&sys.lu.solve(&flatten(&rhs)));

        // Residual of the trace sub-equation: (u + u_inc)|Gamma should
        // vanish, with u|Gamma = -S psi / 2.
        let s = self.operator(OperatorTag::S)?;
        let s_psi = s.apply(&psi);
        let total_disp: Vec<CVec3> = ui
            .values
            .iter()
            .zip(s_psi.iter())
            .map(|(u, sp)| u - sp * C64::new(0.5, 0.0))
            .collect();
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..self.grid.n_nodes() {
            let w = self.grid.weights[i];
            num += total_disp[i].norm_squared() * w;
            den += ui.values[i].norm_squared() * w;
        }
        let unknown = BoundaryTrace::new(psi.clone(), TraceSpace::Traction, &self.grid)?;
        let complementary =
            BoundaryTrace::new(total_disp, TraceSpace::Displacement, &self.grid)?;
        Ok(ScatteringSolution {
            kind: ProblemKind::Dirichlet,
            medium: self.medium,
            grid: self.grid.clone(),
            incident: Some(*incident),
            unknown,
            complementary,
            representation: Representation::SingleLayerNeg { density: psi },
            condition: sys.condition,
            bc_residual: (num / den.max(1e-300)).sqrt(),
        })
    }

    /// Radiating solution with prescribed boundary displacement `f`
    /// (combined-field ansatz).
    pub fn solve_dirichlet_bvp(
        &mut self,
        f: &BoundaryTrace,
    ) -> Result<ScatteringSolution, BieError> {
        if f.space != TraceSpace::Displacement {
            return Err(BieError::SpaceTag(
                "Dirichlet data must be displacement-tagged".into(),
            ));
        }
        if f.values.len() != self.grid.n_nodes() {
            return Err(BieError::InvalidTrace("data length mismatch".into()));
        }
        let eta = self.eta();
        let rhs: Vec<CVec3> = f.values.iter().map(|v| v * C64::new(2.0, 0.0)).collect();
        let sys = self.system(SystemId::DirichletData)?;
        let b = flatten(&rhs);
        let phi = sys.lu.solve(&b);
        let resid = sys.lu.residual_norm(&phi, &b);
        let phi = unflatten(&phi);
        let unknown = BoundaryTrace::new(phi.clone(), TraceSpace::Displacement, &self.grid)?;
        Ok(ScatteringSolution {
            kind: ProblemKind::Dirichlet,
            medium: self.medium,
            grid: self.grid.clone(),
            incident: None,
            unknown,
            complementary: f.clone(),
            representation: Representation::CombinedField { density: phi, eta },
            condition: sys.condition,
            bc_residual: resid,
        })
    }

    /// Impedance scattering (alpha > 0): unknown is the total
    /// displacement trace.
    pub fn solve_impedance(
        &mut self,
        alpha: f64,
        incident: &IncidentField,
    ) -> Result<ScatteringSolution, BieError> {
        if alpha == 0.0 {
            return Err(BieError::UseNeumann);
        }
        self.solve_total_trace(ProblemKind::Impedance { alpha }, incident)
    }

    /// Neumann scattering: the alpha = 0 member of the impedance family,
    /// guarded against irregular frequencies by the condition estimate.
    pub fn solve_neumann(
        &mut self,
        incident: &IncidentField,
    ) -> Result<ScatteringSolution, BieError> {
        self.solve_total_trace(ProblemKind::Neumann, incident)
    }

    fn solve_total_trace(
        &mut self,
        kind: ProblemKind,
        incident: &IncidentField,
    ) -> Result<ScatteringSolution, BieError> {
        let alpha = match kind {
            ProblemKind::Impedance { alpha } => alpha,
            ProblemKind::Neumann => 0.0,
            ProblemKind::Dirichlet => unreachable!(),
        };
        let beta = self.medium.impedance_weight(alpha);
        let (ui, ti) = incident_trace(incident, &self.medium, &self.grid)?;
        let rhs: Vec<CVec3> = ui.values.iter().map(|v| v * C64::new(2.0, 0.0)).collect();
        let sys = self.system(SystemId::ImpedanceTotal {
            beta_bits: beta.to_bits(),
        })?;
        let w = unflatten(&sys.lu.solve(&flatten(&rhs)));
        let bc_residual = self.interior_calderon_residual(&ui, &ti)?;
        // Boundary condition gives the total traction directly.
        let total_traction: Vec<CVec3> = w
            .iter()
            .map(|v| v * C64::new(0.0, -beta))
            .collect();
        let unknown = BoundaryTrace::new(w.clone(), TraceSpace::Displacement, &self.grid)?;
        let complementary =
            BoundaryTrace::new(total_traction, TraceSpace::Traction, &self.grid)?;
        Ok(ScatteringSolution {
            kind,
            medium: self.medium,
            grid: self.grid.clone(),
            incident: Some(*incident),
            unknown,
            complementary,
            representation: Representation::DoubleLayerTotal { density: w, beta },
            condition: sys.condition,
            bc_residual,
        })
    }

    /// Radiating solution with prescribed impedance data
    /// g = (T + i beta) u on Gamma; alpha = 0 is the Neumann data
    /// problem. The unknown is the boundary trace of the solution.
    pub fn solve_impedance_bvp(
        &mut self,
        alpha: f64,
        g: &BoundaryTrace,
    ) -> Result<ScatteringSolution, BieError> {
        if g.space != TraceSpace::Traction {
            return Err(BieError::SpaceTag(
                "impedance data must be traction-tagged".into(),
            ));
        }
        if g.values.len() != self.grid.n_nodes() {
            return Err(BieError::InvalidTrace("data length mismatch".into()));
        }
        let beta = self.medium.impedance_weight(alpha);
        let s = self.operator(OperatorTag::S)?;
        let rhs: Vec<CVec3> = s.apply(&g.values).into_iter().map(|v| -v).collect();
        let sys = self.system(SystemId::ImpedanceTotal {
            beta_bits: beta.to_bits(),
        })?;
        let b = flatten(&rhs);
        let v = sys.lu.solve(&b);
        let resid = sys.lu.residual_norm(&v, &b);
        let v = unflatten(&v);
        let traction: Vec<CVec3> = g
            .values
            .iter()
            .zip(v.iter())
            .map(|(gi, vi)| gi - vi * C64::new(0.0, beta))
            .collect();
        let kind = if alpha == 0.0 {
            ProblemKind::Neumann
        } else {
            ProblemKind::Impedance { alpha }
        };
        let unknown = BoundaryTrace::new(v.clone(), TraceSpace::Displacement, &self.grid)?;
        let complementary = BoundaryTrace::new(traction, TraceSpace::Traction, &self.grid)?;
        Ok(ScatteringSolution {
            kind,
            medium: self.medium,
            grid: self.grid.clone(),
            incident: None,
            unknown,
            complementary,
            representation: Representation::DoubleLayerWithData {
                density: v,
                beta,
                data: g.values.clone(),
            },
            condition: sys.condition,
            bc_residual: resid,
        })
    }
}

/// One-shot Dirichlet scattering solve.
pub fn solve_dirichlet(
    grid: &Arc<SurfaceGrid>,
    medium: &ElasticMedium,
    incident: &IncidentField,
) -> Result<ScatteringSolution, BieError> {
    SolverContext::new(grid.clone(), *medium).solve_dirichlet(incident)
}

/// One-shot Dirichlet data solve (u = f on Gamma).
pub fn solve_dirichlet_bvp(
    grid: &Arc<SurfaceGrid>,
    medium: &ElasticMedium,
    f: &BoundaryTrace,
) -> Result<ScatteringSolution, BieError> {
    SolverContext::new(grid.clone(), *medium).solve_dirichlet_bvp(f)
}

/// One-shot impedance scattering solve (alpha > 0).
pub fn solve_impedance(
    grid: &Arc<SurfaceGrid>,
    medium: &ElasticMedium,
    alpha: f64,
    incident: &IncidentField,
) -> Result<ScatteringSolution, BieError> {
    SolverContext::new(grid.clone(), *medium).solve_impedance(alpha, incident)
}

/// One-shot Neumann scattering solve.
pub fn solve_neumann(
    grid: &Arc<SurfaceGrid>,
    medium: &ElasticMedium,
    incident: &IncidentField,
) -> Result<ScatteringSolution, BieError> {
    SolverContext::new(grid.clone(), *medium).solve_neumann(incident)
}

/// One-shot impedance/Neumann data solve ((T + i beta) u = g on Gamma).
pub fn solve_impedance_bvp(
    grid: &Arc<SurfaceGrid>,
    medium: &ElasticMedium,
    alpha: f64,
    g: &BoundaryTrace,
) -> Result<ScatteringSolution, BieError> {
    SolverContext::new(grid.clone(), *medium).solve_impedance_bvp(alpha, g)
}
