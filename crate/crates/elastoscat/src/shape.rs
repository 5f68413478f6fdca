//! Shape-derivative engine: derivative boundary data for the three
//! exterior problems, the derivative solve, the finite-difference
//! validation harness, and the factorization-identity checks.
//!
//! The derivative of the boundary-to-far-field map in direction xi is
//! the far field of a radiating solution with boundary data assembled
//! from the solved trace of the base problem:
//!
//! * Dirichlet: v = -(xi.n) [ (n x T u_tot) x n / mu
//!                            + (n . T u_tot) n / (lambda + 2 mu) ],
//! * Neumann:   T v = div_G((xi.n) sigma_N(u_tot)) + rho w^2 (xi.n) u_tot,
//! * impedance: (T + i beta) v = div_G((xi.n){sigma_I(u_tot)
//!                - i beta n (u_tot,t)^T})
//!                + rho w^2 (xi.n)[(1 - a^2/mu) u_tot,t
//!                + (1 - a^2/(lambda+2mu)) u_tot,n n]
//!                + i beta (xi.n)[[grad_G u_tot] n
//!                + lambda/(lambda+2mu) (div_G u_tot) n - u_tot H],
//!
//! with sigma_N / sigma_I the tangential stress tensors. The surface
//! divergence of the matrix fields is taken row-wise in the ambient
//! frame; rows are tangential, so the closed-surface integration by
//! parts is exact.

use crate::bie::{
    evaluate_farfield, evaluate_field_with, layer_potential, representation_jet, BieError,
    BoundaryTrace, DirectionGrid, EvalParams, FarFieldPattern, LayerKind, ProblemKind,
    Representation, ScatteringSolution, SolverContext, TraceSpace,
};
use crate::medium::{
    fundamental_solution, fundamental_traction, traction, ElasticMedium, IncidentField,
};
use crate::surface::{
    build_grid, build_offset_grid, nested_pair, perturb, MlsOperators, PerturbationField,
    StarSurface, SurfaceError,
};
use crate::{cvec, CMat3, CVec3, C64, RVec3};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ShapeError {
    #[error(transparent)]
    Bie(#[from] BieError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Medium(#[from] crate::medium::MediumError),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("discretization floor dominates all steps; refine the grid")]
    InconclusiveRefine,
}

/// Boundary data of the derivative problem.
pub struct DerivativeData {
    pub kind: ProblemKind,
    pub trace: BoundaryTrace,
}

fn xi_dot_n(solution: &ScatteringSolution, xi: &PerturbationField) -> Vec<f64> {
    let grid = &solution.grid;
    (0..grid.n_nodes())
        .map(|i| {
            let v = xi.eval(&grid.params[i]);
            let d = v.dot(&grid.normals[i]);
            // Tangential fields must produce identically vanishing data;
            // flush the rounding residue of the orthogonality.
            if d.abs() <= 1e-14 * v.norm() {
                0.0
            } else {
                d
            }
        })
        .collect()
}

/// Dirichlet derivative data from the solved total traction.
pub fn dirichlet_derivative_data(
    solution: &ScatteringSolution,
    xi: &PerturbationField,
) -> Result<DerivativeData, BieError> {
    if solution.kind != ProblemKind::Dirichlet
        || !matches!(solution.representation, Representation::SingleLayerNeg { .. })
    {
        return Err(BieError::WrongKind {
            expected: "Dirichlet scattering".into(),
            got: solution.kind.to_string(),
        });
    }
    let grid = &solution.grid;
    let m = &solution.medium;
    let xin = xi_dot_n(solution, xi);
    let values = (0..grid.n_nodes())
        .map(|i| {
            let n = cvec(&grid.normals[i]);
            let psi = solution.unknown.values[i];
            let psi_n = n.dot(&psi);
            let psi_t = psi - n * psi_n;
            (psi_t / C64::new(m.mu, 0.0) + n * (psi_n / C64::new(m.lambda + 2.0 * m.mu, 0.0)))
                .scale(-xin[i])
        })
        .collect();
    Ok(DerivativeData {
        kind: ProblemKind::Dirichlet,
        trace: BoundaryTrace::new(values, TraceSpace::Displacement, grid)?,
    })
}

/// Neumann derivative data; shares the impedance code path at alpha = 0
/// so the formula specialization is exact.
pub fn neumann_derivative_data(
    solution: &ScatteringSolution,
    xi: &PerturbationField,
) -> Result<DerivativeData, BieError> {
    if solution.kind != ProblemKind::Neumann {
        return Err(BieError::WrongKind {
            expected: "Neumann scattering".into(),
            got: solution.kind.to_string(),
        });
    }
    let trace = impedance_derivative_core(solution, xi, 0.0)?;
    Ok(DerivativeData {
        kind: ProblemKind::Neumann,
        trace,
    })
}

/// Impedance derivative data (T + i beta) v on the boundary.
pub fn impedance_derivative_data(
    solution: &ScatteringSolution,
    xi: &PerturbationField,
    alpha: f64,
) -> Result<DerivativeData, BieError> {
    match solution.kind {
        ProblemKind::Impedance { alpha: have } if have == alpha => {}
        ProblemKind::Neumann if alpha == 0.0 => {}
        ProblemKind::Impedance { alpha: have } => {
            return Err(BieError::AlphaMismatch { have, want: alpha })
        }
        other => {
            return Err(BieError::WrongKind {
                expected: "impedance scattering".into(),
                got: other.to_string(),
            })
        }
    }
    let trace = impedance_derivative_core(solution, xi, alpha)?;
    Ok(DerivativeData {
        kind: solution.kind,
        trace,
    })
}

/// Shared assembly of the Neumann / impedance derivative data. All
/// alpha-dependent terms are skipped exactly when alpha = 0, so the
/// Neumann data agrees bit for bit with the impedance data at alpha = 0.
fn impedance_derivative_core(
    solution: &ScatteringSolution,
    xi: &PerturbationField,
    alpha: f64,
) -> Result<BoundaryTrace, BieError> {
    let grid = &solution.grid;
    let m = &solution.medium;
    let beta = m.impedance_weight(alpha);
    let lam = m.lambda;
    let mu = m.mu;
    let lam2mu = lam + 2.0 * mu;
    let rho_w2 = m.rho * m.omega * m.omega;
    let w = &solution.unknown.values; // total displacement trace
    let xin = xi_dot_n(solution, xi);

    let mls = MlsOperators::new(grid);
    let grads = mls.gradient(grid, w); // [grad_G w], columns are component gradients
    let n_nodes = grid.n_nodes();

    // Matrix field M = (xi.n) { sigma_I - i beta n w_t^T }.
    let mut matrix_field = vec![CMat3::zeros(); n_nodes];
    let mut divs = vec![C64::ZERO; n_nodes];
    for i in 0..n_nodes {
        let g = grads[i];
        let div = g[(0, 0)] + g[(1, 1)] + g[(2, 2)];
        divs[i] = div;
        let n = cvec(&grid.normals[i]);
        let proj = CMat3::identity() - n * n.transpose();
        let w_n = n.dot(&w[i]);
        let w_t = w[i] - n * w_n;
        let mut scalar = div * (2.0 * lam * mu / lam2mu);
        if beta != 0.0 {
            scalar -= C64::new(0.0, beta * lam / lam2mu) * w_n;
        }
        let mut sigma = proj * scalar + (proj * (g + g.transpose()) * proj).scale(mu);
        if beta != 0.0 {
            sigma -= (n * w_t.transpose()) * C64::new(0.0, beta);
        }
        matrix_field[i] = sigma.scale(xin[i]);
    }

    // Row-wise surface divergence of the matrix field.
    let mut rows = [
        vec![CVec3::zeros(); n_nodes],
        vec![CVec3::zeros(); n_nodes],
        vec![CVec3::zeros(); n_nodes],
    ];
    for i in 0..n_nodes {
        for (a, row) in rows.iter_mut().enumerate() {
            row[i] = CVec3::new(
                matrix_field[i][(a, 0)],
                matrix_field[i][(a, 1)],
                matrix_field[i][(a, 2)],
            );
        }
    }
    let divergences: Vec<Vec<C64>> = rows
        .iter()
        .map(|row| mls.divergence(grid, row))
        .collect();

    let values = (0..n_nodes)
        .map(|i| {
            let n = cvec(&grid.normals[i]);
            let w_n = n.dot(&w[i]);
            let w_t = w[i] - n * w_n;
            let mut out = CVec3::new(divergences[0][i], divergences[1][i], divergences[2][i]);
            out += (w_t.scale(1.0 - alpha * alpha / mu)
                + n * (w_n * (1.0 - alpha * alpha / lam2mu)))
            .scale(rho_w2 * xin[i]);
            if beta != 0.0 {
                let g = grads[i];
                let extra = g * n + n * (divs[i] * (lam / lam2mu))
                    - w[i].scale(grid.mean_curvature[i]);
                out += extra * C64::new(0.0, beta * xin[i]);
            }
            out
        })
        .collect();
    BoundaryTrace::new(values, TraceSpace::Traction, grid)
}

/// Derivative data for the solution's own problem kind.
pub fn derivative_data(
    solution: &ScatteringSolution,
    xi: &PerturbationField,
) -> Result<DerivativeData, BieError> {
    match solution.kind {
        ProblemKind::Dirichlet => dirichlet_derivative_data(solution, xi),
        ProblemKind::Neumann => neumann_derivative_data(solution, xi),
        ProblemKind::Impedance { alpha } => impedance_derivative_data(solution, xi, alpha),
    }
}

/// Far-field of the shape derivative F'(0) xi: assembles the derivative
/// data, solves the matching data-driven problem on the same grid and
/// evaluates its far field.
pub fn shape_derivative_farfield(
    ctx: &mut SolverContext,
    solution: &ScatteringSolution,
    xi: &PerturbationField,
    directions: &Arc<DirectionGrid>,
) -> Result<FarFieldPattern, BieError> {
    let data = derivative_data(solution, xi)?;
    let derivative_solution = match data.kind {
        ProblemKind::Dirichlet => ctx.solve_dirichlet_bvp(&data.trace)?,
        ProblemKind::Neumann => ctx.solve_impedance_bvp(0.0, &data.trace)?,
        ProblemKind::Impedance { alpha } => ctx.solve_impedance_bvp(alpha, &data.trace)?,
    };
    Ok(evaluate_farfield(&derivative_solution, directions))
}

/// Configuration of the finite-difference derivative check.
pub struct FdConfig {
    pub kind: ProblemKind,
    pub medium: ElasticMedium,
    pub surface: StarSurface,
    pub level: u32,
    pub incident: IncidentField,
    pub xi: PerturbationField,
    pub steps: Vec<f64>,
    pub farfield_level: u32,
}

/// Step-wise errors e(t) = |F(t xi) - F(0) - t F'(0) xi| and the
/// log-log slope over the steps above the discretization floor.
pub struct FdReport {
    pub steps: Vec<f64>,
    pub errors: Vec<f64>,
    /// Log-log slope fitted over the converging steps.
    pub slope: f64,
    /// Number of leading steps used for the slope fit.
    pub used_steps: usize,
    /// Smallest error reached (floor estimate).
    pub floor: f64,
    pub fprime_norm: f64,
    pub f0_norm: f64,
}

impl FdReport {
    /// PASS rule of the harness: slope at least 1.5 above the floor.
    pub fn passes(&self, min_slope: f64) -> bool {
        self.slope >= min_slope
    }
}

fn solve_scattering(
    ctx: &mut SolverContext,
    kind: ProblemKind,
    incident: &IncidentField,
) -> Result<ScatteringSolution, BieError> {
    match kind {
        ProblemKind::Dirichlet => ctx.solve_dirichlet(incident),
        ProblemKind::Neumann => ctx.solve_neumann(incident),
        ProblemKind::Impedance { alpha } => ctx.solve_impedance(alpha, incident),
    }
}

/// Runs the finite-difference validation of the shape derivative on
/// matched transported grids.
pub fn fd_validate(cfg: &FdConfig) -> Result<FdReport, ShapeError> {
    if cfg.steps.is_empty() {
        return Err(ShapeError::Argument("empty step list".into()));
    }
    if cfg
        .steps
        .windows(2)
        .any(|w| w[1] >= w[0] || w[0] <= 0.0 || w[1] <= 0.0)
    {
        return Err(ShapeError::Argument(
            "steps must be positive and strictly decreasing".into(),
        ));
    }

    let directions = Arc::new(DirectionGrid::new(cfg.farfield_level));
    let base_grid = Arc::new(build_grid(&cfg.surface, cfg.level)?);
    let mut ctx = SolverContext::new(base_grid, cfg.medium);
    let base = solve_scattering(&mut ctx, cfg.kind, &cfg.incident)?;
    let f0 = evaluate_farfield(&base, &directions);
    let fprime = shape_derivative_farfield(&mut ctx, &base, &cfg.xi, &directions)?;

    let mut errors = Vec::with_capacity(cfg.steps.len());
    for &t in &cfg.steps {
        let grid_t = if cfg.xi.is_radial() {
            Arc::new(build_grid(&perturb(&cfg.surface, &cfg.xi, t)?, cfg.level)?)
        } else {
            Arc::new(build_offset_grid(&cfg.surface, &cfg.xi, t, cfg.level)?)
        };
        let mut ctx_t = SolverContext::new(grid_t, cfg.medium);
        let sol_t = solve_scattering(&mut ctx_t, cfg.kind, &cfg.incident)?;
        let f_t = evaluate_farfield(&sol_t, &directions);
        let diff = f_t
            .add_scaled(&f0, -C64::ONE)
            .add_scaled(&fprime, C64::new(-t, 0.0));
        errors.push(diff.l2_norm());
    }

    // Steps still converging: consecutive log-log slope above 0.5.
    let mut used = 1;
    let mut slopes = Vec::new();
    for k in 0..errors.len() - 1 {
        let s = (errors[k] / errors[k + 1]).ln() / (cfg.steps[k] / cfg.steps[k + 1]).ln();
        slopes.push(s);
        if s > 0.5 {
            used = k + 2;
        } else {
            break;
        }
    }
    if used < 2 {
        return Err(ShapeError::InconclusiveRefine);
    }
    // Least-squares slope over the converging prefix.
    let xs: Vec<f64> = cfg.steps[..used].iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = errors[..used].iter().map(|e| e.max(1e-300).ln()).collect();
    let xm = xs.iter().sum::<f64>() / xs.len() as f64;
    let ym = ys.iter().sum::<f64>() / ys.len() as f64;
    let slope = xs
        .iter()
        .zip(ys.iter())
        .map(|(x, y)| (x - xm) * (y - ym))
        .sum::<f64>()
        / xs.iter().map(|x| (x - xm) * (x - xm)).sum::<f64>();

    Ok(FdReport {
        steps: cfg.steps.clone(),
        errors: errors.clone(),
        slope,
        used_steps: used,
        floor: errors.iter().cloned().fold(f64::INFINITY, f64::min),
        fprime_norm: fprime.l2_norm(),
        f0_norm: f0.l2_norm(),
    })
}

/// Configuration of the factorization / representation identity checks.
pub struct IdentityConfig {
    pub kind: ProblemKind,
    pub medium: ElasticMedium,
    pub surface: StarSurface,
    pub offset: f64,
    pub level: u32,
    pub incident: IncidentField,
    pub eval_points: Vec<RVec3>,
}

pub struct IdentityReport {
    /// Relative residual per evaluation point.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// Norms of both sides, for scale context.
    pub lhs_norms: Vec<f64>,
    pub rhs_norms: Vec<f64>,
}

fn standoff_params() -> EvalParams {
    EvalParams {
        guard_spacings: 0.0,
        near_factor: 1.2,
        max_subdivision: 5,
    }
}

/// Residual of the factorization identity for the difference of the
/// scattered fields of the nested pair (Gamma, Gamma_theta):
/// Dirichlet (Alves-Kress):
///   u_theta(x) - u(x) = -int_{G_th} t[V(x,y)] T(u_theta + u_inc)(y) ds,
/// impedance:
///   u_theta(x) - u(x) = +int_{G_th} t[(T_y + i beta)V(x,y)]
///                          (u_theta + u_inc)(y) ds,
/// with V(x,.) the total field of the point-source scattering problem
/// on the inner boundary (three solves per evaluation point).
pub fn factorization_residual(cfg: &IdentityConfig) -> Result<IdentityReport, ShapeError> {
    let (inner, outer) = nested_pair(&cfg.surface, cfg.offset)?;
    let grid = Arc::new(build_grid(&inner, cfg.level)?);
    let grid_theta = Arc::new(build_grid(&outer, cfg.level)?);
    let mut ctx = SolverContext::new(grid.clone(), cfg.medium);
    let mut ctx_theta = SolverContext::new(grid_theta.clone(), cfg.medium);

    let (u, u_theta) = match cfg.kind {
        ProblemKind::Dirichlet => (
            ctx.solve_dirichlet(&cfg.incident)?,
            ctx_theta.solve_dirichlet(&cfg.incident)?,
        ),
        ProblemKind::Impedance { alpha } => (
            ctx.solve_impedance(alpha, &cfg.incident)?,
            ctx_theta.solve_impedance(alpha, &cfg.incident)?,
        ),
        ProblemKind::Neumann => (
            ctx.solve_neumann(&cfg.incident)?,
            ctx_theta.solve_neumann(&cfg.incident)?,
        ),
    };

    let params = EvalParams::default();
    let lhs_all = {
        let a = evaluate_field_with(&u_theta, &cfg.eval_points, &params)?;
        let b = evaluate_field_with(&u, &cfg.eval_points, &params)?;
        a.iter().zip(b.iter()).map(|(x, y)| x - y).collect::<Vec<CVec3>>()
    };

    let beta = match cfg.kind {
        ProblemKind::Impedance { alpha } => cfg.medium.impedance_weight(alpha),
        _ => 0.0,
    };

    let mut residuals = Vec::new();
    let mut lhs_norms = Vec::new();
    let mut rhs_norms = Vec::new();
    for (pt_idx, x) in cfg.eval_points.iter().enumerate() {
        // Point-source scattering solves on the inner boundary.
        let mut columns = Vec::with_capacity(3);
        for j in 0..3 {
            let mut e = RVec3::zeros();
            e[j] = 1.0;
            let source = IncidentField::point_source(*x, e)?;
            let sol = match cfg.kind {
                ProblemKind::Dirichlet => ctx.solve_dirichlet(&source)?,
                ProblemKind::Impedance { alpha } => ctx.solve_impedance(alpha, &source)?,
                ProblemKind::Neumann => ctx.solve_neumann(&source)?,
            };
            columns.push(sol);
        }

        let rhs = match cfg.kind {
            ProblemKind::Dirichlet => {
                // V values on Gamma_theta: Phi + scattered field of the
                // point source, evaluated at standoff distance.
                let psi_theta = &u_theta.unknown.values;
                let mut acc = CVec3::zeros();
                for i in 0..grid_theta.n_nodes() {
                    let y = grid_theta.nodes[i];
                    let phi = fundamental_solution(&cfg.medium, x, &y)?;
                    let mut v = phi;
                    for (j, col) in columns.iter().enumerate() {
                        // scattered field W_j = -SL[psi_j]
                        let w_val = -layer_potential(
                            &grid,
                            &cfg.medium,
                            match &col.representation {
                                Representation::SingleLayerNeg { density } => density,
                                _ => unreachable!(),
                            },
                            LayerKind::Single,
                            &y,
                            &standoff_params(),
                        );
                        for r in 0..3 {
                            v[(r, j)] += w_val[r];
                        }
                    }
                    acc += v.transpose() * psi_theta[i].scale(grid_theta.weights[i]);
                }
                -acc
            }
            _ => {
                // Impedance family: kernel t[(T_y + i beta) V](x, y).
                let w_theta = &u_theta.unknown.values;
                let mut acc = CVec3::zeros();
                for i in 0..grid_theta.n_nodes() {
                    let y = grid_theta.nodes[i];
                    let n_y = grid_theta.normals[i];
                    // analytic point-source part
                    let phi = fundamental_solution(&cfg.medium, x, &y)?;
                    let t_phi = fundamental_traction(&cfg.medium, x, &y, &n_y)?;
                    let mut kernel = t_phi + phi * C64::new(0.0, beta);
                    // scattered parts, traction from the analytic jet of
                    // the representation
                    for (j, col) in columns.iter().enumerate() {
                        let jet = representation_jet(col, &y, &standoff_params());
                        let t_w = traction(&jet, &n_y, &cfg.medium)?;
                        let contribution = t_w + jet.value * C64::new(0.0, beta);
                        for r in 0..3 {
                            kernel[(r, j)] += contribution[r];
                        }
                    }
                    acc += kernel.transpose() * w_theta[i].scale(grid_theta.weights[i]);
                }
                acc
            }
        };

        let lhs = lhs_all[pt_idx];
        let denom = lhs.norm().max(rhs.norm()).max(1e-300);
        residuals.push((lhs - rhs).norm() / denom);
        lhs_norms.push(lhs.norm());
        rhs_norms.push(rhs.norm());
    }

    Ok(IdentityReport {
        max_residual: residuals.iter().cloned().fold(0.0, f64::max),
        residuals,
        lhs_norms,
        rhs_norms,
    })
}

/// Residual of the point-source representation of the data-driven
/// solution:
/// Dirichlet: v(x) = int_G t[T_y V(x,y)] f(y) ds(y),
/// impedance: v(x) = -int_G t[V(x,y)] g(y) ds(y),
/// where the traction (resp. trace) of V on Gamma is the native unknown
/// of the point-source scattering solve.
pub fn representation_check(
    kind: ProblemKind,
    medium: &ElasticMedium,
    surface: &StarSurface,
    level: u32,
    data: &BoundaryTrace,
    eval_points: &[RVec3],
) -> Result<IdentityReport, ShapeError> {
    let grid = Arc::new(build_grid(surface, level)?);
    let mut ctx = SolverContext::new(grid.clone(), *medium);

    let direct_sol = match kind {
        ProblemKind::Dirichlet => {
            if data.space != TraceSpace::Displacement {
                return Err(ShapeError::Bie(BieError::SpaceTag(
                    "Dirichlet representation check needs displacement data".into(),
                )));
            }
            ctx.solve_dirichlet_bvp(data)?
        }
        ProblemKind::Neumann => {
            if data.space != TraceSpace::Traction {
                return Err(ShapeError::Bie(BieError::SpaceTag(
                    "Neumann representation check needs traction data".into(),
                )));
            }
            ctx.solve_impedance_bvp(0.0, data)?
        }
        ProblemKind::Impedance { alpha } => {
            if data.space != TraceSpace::Traction {
                return Err(ShapeError::Bie(BieError::SpaceTag(
                    "impedance representation check needs traction data".into(),
                )));
            }
            ctx.solve_impedance_bvp(alpha, data)?
        }
    };
    let direct = evaluate_field_with(&direct_sol, eval_points, &EvalParams::default())?;

    let mut residuals = Vec::new();
    let mut lhs_norms = Vec::new();
    let mut rhs_norms = Vec::new();
    for (pt_idx, x) in eval_points.iter().enumerate() {
        // kernel columns from three point-source solves at x
        let mut kernel_cols: Vec<Vec<CVec3>> = Vec::with_capacity(3);
        for j in 0..3 {
            let mut e = RVec3::zeros();
            e[j] = 1.0;
            let source = IncidentField::point_source(*x, e)?;
            let sol = match kind {
                ProblemKind::Dirichlet => ctx.solve_dirichlet(&source)?,
                ProblemKind::Neumann => ctx.solve_neumann(&source)?,
                ProblemKind::Impedance { alpha } => ctx.solve_impedance(alpha, &source)?,
            };
            kernel_cols.push(sol.unknown.values.clone());
        }
        let mut rep = CVec3::zeros();
        for i in 0..grid.n_nodes() {
            let mut kernel = CMat3::zeros();
            for (j, col) in kernel_cols.iter().enumerate() {
                for r in 0..3 {
                    kernel[(r, j)] = col[i][r];
                }
            }
            let weight = grid.weights[i];
            match kind {
                ProblemKind::Dirichlet => {
                    rep += kernel.transpose() * data.values[i].scale(weight);
                }
                _ => {
                    rep -= kernel.transpose() * data.values[i].scale(weight);
                }
            }
        }
        let lhs = direct[pt_idx];
        let denom = lhs.norm().max(rep.norm()).max(1e-300);
        residuals.push((lhs - rep).norm() / denom);
        lhs_norms.push(lhs.norm());
        rhs_norms.push(rep.norm());
    }
    Ok(IdentityReport {
        max_residual: residuals.iter().cloned().fold(0.0, f64::max),
        residuals,
        lhs_norms,
        rhs_norms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bie::solve_neumann;

    fn medium() -> ElasticMedium {
        ElasticMedium::new(2.0, 1.0, 1.0, 2.0).unwrap()
    }

    fn sphere_neumann_solution(level: u32) -> ScatteringSolution {
        let grid = Arc::new(build_grid(&StarSurface::unit_sphere(), level).unwrap());
        let incident = IncidentField::pressure_plane(RVec3::new(0.0, 0.0, 1.0)).unwrap();
        solve_neumann(&grid, &medium(), &incident).unwrap()
    }

    #[test]
    fn tangential_perturbations_give_exactly_zero_data() {
        let sol = sphere_neumann_solution(1);
        let xi = PerturbationField::tangential_rotation();
        let data = neumann_derivative_data(&sol, &xi).unwrap();
        for v in &data.trace.values {
            assert_eq!(v.norm(), 0.0);
        }
    }

    #[test]
    fn impedance_data_at_alpha_zero_is_bitwise_neumann() {
        let sol = sphere_neumann_solution(1);
        let xi = PerturbationField::radial(0.0, vec![(2, 0, 1.0)]);
        let a = neumann_derivative_data(&sol, &xi).unwrap();
        let b = impedance_derivative_data(&sol, &xi, 0.0).unwrap();
        for (x, y) in a.trace.values.iter().zip(b.trace.values.iter()) {
            for c in 0..3 {
                assert_eq!(x[c].re.to_bits(), y[c].re.to_bits());
                assert_eq!(x[c].im.to_bits(), y[c].im.to_bits());
            }
        }
    }

    #[test]
    fn neumann_data_of_constant_trace_is_mass_term() {
        // sigma_N of a constant vanishes: data = rho omega^2 (xi.n) c.
        let mut sol = sphere_neumann_solution(1);
        let c = CVec3::new(C64::new(0.3, -0.1), C64::new(0.0, 0.8), C64::ONE);
        sol.unknown = BoundaryTrace {
            values: vec![c; sol.grid.n_nodes()],
            space: TraceSpace::Displacement,
        };
        let xi = PerturbationField::normal();
        let data = neumann_derivative_data(&sol, &xi).unwrap();
        let m = medium();
        for (i, v) in data.trace.values.iter().enumerate() {
            let xin = 1.0; // xi = n on the sphere
            let expected = c * C64::new(m.rho * m.omega * m.omega * xin, 0.0);
            assert!(
                (v - expected).norm() < 1e-8 * expected.norm(),
                "node {i}: {}",
                (v - expected).norm()
            );
        }
    }

    #[test]
    fn sphere_normal_trace_gives_projection_stress() {
        // With trace w = n on the unit sphere, sigma_N(w) =
        // (2 mu (3 lambda + 2 mu)/(lambda + 2 mu)) Pi_3.
        let mut sol = sphere_neumann_solution(2);
        sol.unknown = BoundaryTrace {
            values: sol.grid.normals.iter().map(cvec).collect(),
            space: TraceSpace::Displacement,
        };
        let m = medium();
        let grid = sol.grid.clone();
        let mls = MlsOperators::new(&grid);
        let grads = mls.gradient(&grid, &sol.unknown.values);
        let coeff = 2.0 * m.mu * (3.0 * m.lambda + 2.0 * m.mu) / (m.lambda + 2.0 * m.mu);
        for i in 0..grid.n_nodes() {
            let g = grads[i];
            let div = g[(0, 0)] + g[(1, 1)] + g[(2, 2)];
            let n = cvec(&grid.normals[i]);
            let proj = CMat3::identity() - n * n.transpose();
            let sigma = proj * (div * (2.0 * m.lambda * m.mu / (m.lambda + 2.0 * m.mu)))
                + (proj * (g + g.transpose()) * proj).scale(m.mu);
            let expected = proj.scale(coeff);
            assert!(
                (sigma - expected).norm() < 1e-3 * expected.norm(),
                "node {i}: {}",
                (sigma - expected).norm() / expected.norm()
            );
        }
    }

    #[test]
    fn fd_rejects_non_decreasing_steps() {
        let cfg = FdConfig {
            kind: ProblemKind::Dirichlet,
            medium: medium(),
            surface: StarSurface::unit_sphere(),
            level: 1,
            incident: IncidentField::pressure_plane(RVec3::new(0.0, 0.0, 1.0)).unwrap(),
            xi: PerturbationField::normal(),
            steps: vec![0.01, 0.02],
            farfield_level: 0,
        };
        assert!(matches!(
            fd_validate(&cfg),
            Err(ShapeError::Argument(_))
        ));
    }
}
