//! Batch experiment front-end: configuration parsing, orchestration of
//! the solve / far-field / derivative / validation pipelines, and
//! deterministic result emission (JSON far fields, CSV tables, a run
//! log with condition numbers and residuals).

use crate::bie::{
    evaluate_farfield, evaluate_field, DirectionGrid, FarFieldPattern, ProblemKind,
    ScatteringSolution, SolverContext,
};
use crate::medium::{ElasticMedium, IncidentField};
use crate::oracles::ManufacturedSolution;
use crate::shape::{factorization_residual, fd_validate, FdConfig, IdentityConfig};
use crate::surface::{build_grid, export_mesh, PerturbationField, StarSurface};
use crate::{CVec3, RVec3};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Configuration problems: exit status 2.
    #[error("configuration error: {0}")]
    Config(String),
    /// Module failures during a run: exit status 1.
    #[error("run error: {0}")]
    Run(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }

    /// Machine-readable error record.
    pub fn record(&self) -> String {
        let kind = match self {
            CliError::Config(_) => "config",
            CliError::Run(_) => "run",
            CliError::Io(_) => "io",
        };
        format!(
            "{{\"error\":{{\"kind\":\"{kind}\",\"message\":{}}}}}",
            serde_json::to_string(&self.to_string()).unwrap_or_else(|_| "\"\"".into())
        )
    }
}

fn run_err(e: impl std::fmt::Display) -> CliError {
    CliError::Run(e.to_string())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub base_radius: f64,
    #[serde(default)]
    pub harmonics: Vec<(u32, i32, f64)>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub level: u32,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub kind: String,
    #[serde(default)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidentConfig {
    pub kind: String,
    #[serde(default)]
    pub direction: Option<[f64; 3]>,
    #[serde(default)]
    pub polarization: Option<[f64; 3]>,
    #[serde(default)]
    pub location: Option<[f64; 3]>,
    #[serde(default)]
    pub strength: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    pub kind: String,
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub harmonics: Vec<(u32, i32, f64)>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdSection {
    pub steps: Vec<f64>,
    #[serde(default = "default_min_slope")]
    pub min_slope: f64,
    #[serde(default = "default_quotient_tolerance")]
    pub quotient_tolerance: f64,
}

fn default_min_slope() -> f64 {
    1.5
}

fn default_quotient_tolerance() -> f64 {
    0.05
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FarfieldSection {
    pub level: u32,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentitySection {
    pub offset: f64,
    #[serde(default = "default_eval_radius")]
    pub eval_radius: f64,
    #[serde(default = "default_eval_points")]
    pub n_eval_points: usize,
    #[serde(default = "default_identity_tolerance")]
    pub tolerance: f64,
}

fn default_eval_radius() -> f64 {
    3.0
}

fn default_eval_points() -> usize {
    3
}

fn default_identity_tolerance() -> f64 {
    1e-2
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSection {
    pub levels: Vec<u32>,
    pub source: [f64; 3],
    pub strength: [f64; 3],
    #[serde(default = "default_eval_radius")]
    pub eval_radius: f64,
    #[serde(default = "default_conv_points")]
    pub n_eval_points: usize,
}

fn default_conv_points() -> usize {
    5
}

/// Experiment description; unknown keys anywhere are rejected at parse
/// time with an error naming the key.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub medium: MediumConfig,
    pub surface: SurfaceConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub problem: Option<ProblemConfig>,
    #[serde(default)]
    pub incident: Option<IncidentConfig>,
    #[serde(default)]
    pub perturbation: Option<PerturbationConfig>,
    #[serde(default)]
    pub fd: Option<FdSection>,
    #[serde(default)]
    pub farfield: Option<FarfieldSection>,
    #[serde(default)]
    pub identity: Option<IdentitySection>,
    #[serde(default)]
    pub convergence: Option<ConvergenceSection>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn medium(&self) -> Result<ElasticMedium, CliError> {
        ElasticMedium::new(
            self.medium.lambda,
            self.medium.mu,
            self.medium.rho,
            self.medium.omega,
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn star_surface(&self) -> Result<StarSurface, CliError> {
        StarSurface::new(self.surface.base_radius, self.surface.harmonics.clone())
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn problem_kind(&self) -> Result<ProblemKind, CliError> {
        let p = self
            .problem
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [problem] section".into()))?;
        match p.kind.as_str() {
            "dirichlet" => Ok(ProblemKind::Dirichlet),
            "neumann" => Ok(ProblemKind::Neumann),
            "impedance" => {
                if p.alpha < 0.0 {
                    return Err(CliError::Config("alpha must be non-negative".into()));
                }
                if p.alpha == 0.0 {
                    Ok(ProblemKind::Neumann)
                } else {
                    Ok(ProblemKind::Impedance { alpha: p.alpha })
                }
            }
            other => Err(CliError::Config(format!("unknown problem kind `{other}`"))),
        }
    }

    pub fn incident_field(&self) -> Result<IncidentField, CliError> {
        let inc = self
            .incident
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [incident] section".into()))?;
        let vec3 = |v: &Option<[f64; 3]>, name: &str| -> Result<RVec3, CliError> {
            v.map(|a| RVec3::new(a[0], a[1], a[2]))
                .ok_or_else(|| CliError::Config(format!("incident field requires `{name}`")))
        };
        match inc.kind.as_str() {
            "pressure" => IncidentField::pressure_plane(vec3(&inc.direction, "direction")?)
                .map_err(|e| CliError::Config(e.to_string())),
            "shear" => IncidentField::shear_plane(
                vec3(&inc.direction, "direction")?,
                vec3(&inc.polarization, "polarization")?,
            )
            .map_err(|e| CliError::Config(e.to_string())),
            "point" => IncidentField::point_source(
                vec3(&inc.location, "location")?,
                vec3(&inc.strength, "strength")?,
            )
            .map_err(|e| CliError::Config(e.to_string())),
            other => Err(CliError::Config(format!("unknown incident kind `{other}`"))),
        }
    }

    pub fn perturbation_field(&self) -> Result<PerturbationField, CliError> {
        let p = self
            .perturbation
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [perturbation] section".into()))?;
        match p.kind.as_str() {
            "radial" => Ok(PerturbationField::radial(p.constant, p.harmonics.clone())),
            "tangential-rotation" => Ok(PerturbationField::tangential_rotation()),
            other => Err(CliError::Config(format!(
                "unknown perturbation kind `{other}`"
            ))),
        }
    }

    pub fn farfield_level(&self) -> u32 {
        self.farfield.as_ref().map(|f| f.level).unwrap_or(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Farfield,
    ShapeDerivative,
    FdCheck,
    IdentityCheck,
    Convergence,
    ExportMesh,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub level_override: Option<u32>,
    pub seed: u64,
}

/// Outcome of a run: human line plus the artifacts written.
pub struct RunSummary {
    pub passed: Option<bool>,
    pub artifacts: Vec<PathBuf>,
    pub log: String,
}

#[derive(Serialize)]
struct MediumOut {
    lambda: f64,
    mu: f64,
    rho: f64,
    omega: f64,
}

#[derive(Serialize)]
struct FarfieldRecord {
    xhat: [f64; 3],
    up: [[f64; 2]; 3],
    us: [[f64; 2]; 3],
}

#[derive(Serialize)]
struct FarfieldFile {
    medium: MediumOut,
    kappa_p: f64,
    kappa_s: f64,
    grid_level: u32,
    farfield_level: u32,
    formulation: String,
    code_version: String,
    records: Vec<FarfieldRecord>,
}

fn farfield_file(
    medium: &ElasticMedium,
    grid_level: u32,
    formulation: &str,
    pattern: &FarFieldPattern,
) -> FarfieldFile {
    let pair = |v: &CVec3| -> [[f64; 2]; 3] {
        [[v.x.re, v.x.im], [v.y.re, v.y.im], [v.z.re, v.z.im]]
    };
    FarfieldFile {
        medium: MediumOut {
            lambda: medium.lambda,
            mu: medium.mu,
            rho: medium.rho,
            omega: medium.omega,
        },
        kappa_p: medium.kappa_p(),
        kappa_s: medium.kappa_s(),
        grid_level,
        farfield_level: pattern.directions.level,
        formulation: formulation.to_string(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        records: pattern
            .directions
            .dirs
            .iter()
            .enumerate()
            .map(|(i, d)| FarfieldRecord {
                xhat: [d.x, d.y, d.z],
                up: pair(&pattern.u_p[i]),
                us: pair(&pattern.u_s[i]),
            })
            .collect(),
    }
}

fn solve_configured(
    ctx: &mut SolverContext,
    kind: ProblemKind,
    incident: &IncidentField,
) -> Result<ScatteringSolution, CliError> {
    match kind {
        ProblemKind::Dirichlet => ctx.solve_dirichlet(incident),
        ProblemKind::Neumann => ctx.solve_neumann(incident),
        ProblemKind::Impedance { alpha } => ctx.solve_impedance(alpha, incident),
    }
    .map_err(run_err)
}

fn sample_directions(seed: u64, count: usize) -> Vec<RVec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            loop {
                let v = RVec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                );
                if v.norm() > 0.1 && v.norm() <= 1.0 {
                    break v.normalize();
                }
            }
        })
        .collect()
}

fn write_artifact(
    out_dir: &Path,
    name: &str,
    content: &str,
    artifacts: &mut Vec<PathBuf>,
) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(name);
    std::fs::write(&path, content)?;
    artifacts.push(path);
    Ok(())
}

/// Execute one experiment. Outputs are deterministic for identical
/// configuration and build: no timestamps, fixed float formatting, and
/// thread-independent numerics.
pub fn run(
    cmd: Command,
    config: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<RunSummary, CliError> {
    let medium = config.medium()?;
    let surface = config.star_surface()?;
    let level = opts.level_override.unwrap_or(config.grid.level);
    let mut artifacts = Vec::new();
    let mut log = String::new();
    writeln!(log, "command: {cmd:?}").ok();
    writeln!(
        log,
        "medium: lambda={} mu={} rho={} omega={} kappa_p={:.12} kappa_s={:.12}",
        medium.lambda,
        medium.mu,
        medium.rho,
        medium.omega,
        medium.kappa_p(),
        medium.kappa_s()
    )
    .ok();
    writeln!(log, "grid level: {level}").ok();
    let mut passed = None;

    match cmd {
        Command::ExportMesh => {
            let grid = build_grid(&surface, level).map_err(run_err)?;
            writeln!(log, "nodes: {} faces: {}", grid.n_nodes(), grid.faces.len()).ok();
            write_artifact(&opts.out_dir, "mesh.txt", &export_mesh(&grid), &mut artifacts)?;
        }
        Command::Solve | Command::Farfield | Command::ShapeDerivative => {
            let kind = config.problem_kind()?;
            let incident = config.incident_field()?;
            let grid = Arc::new(build_grid(&surface, level).map_err(run_err)?);
            writeln!(log, "nodes: {} faces: {}", grid.n_nodes(), grid.faces.len()).ok();
            let mut ctx = SolverContext::new(grid.clone(), medium);
            let solution = solve_configured(&mut ctx, kind, &incident)?;
            writeln!(
                log,
                "solve: kind={} condition={:.6e} bc_residual={:.6e}",
                solution.kind, solution.condition, solution.bc_residual
            )
            .ok();

            match cmd {
                Command::Solve => {
                    let mut csv = String::from(
                        "node,x,y,z,unknown_re_x,unknown_im_x,unknown_re_y,unknown_im_y,unknown_re_z,unknown_im_z\n",
                    );
                    for (i, v) in solution.unknown.values.iter().enumerate() {
                        let p = grid.nodes[i];
                        writeln!(
                            csv,
                            "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                            i, p.x, p.y, p.z, v.x.re, v.x.im, v.y.re, v.y.im, v.z.re, v.z.im
                        )
                        .ok();
                    }
                    write_artifact(&opts.out_dir, "boundary_trace.csv", &csv, &mut artifacts)?;
                    let summary = serde_json::json!({
                        "kind": solution.kind.to_string(),
                        "n_nodes": grid.n_nodes(),
                        "grid_level": level,
                        "kappa_p": medium.kappa_p(),
                        "kappa_s": medium.kappa_s(),
                        "condition": solution.condition,
                        "bc_residual": solution.bc_residual,
                        "code_version": env!("CARGO_PKG_VERSION"),
                    });
                    write_artifact(
                        &opts.out_dir,
                        "solve.json",
                        &serde_json::to_string_pretty(&summary).unwrap(),
                        &mut artifacts,
                    )?;
                }
                Command::Farfield => {
                    let dirs = Arc::new(DirectionGrid::new(config.farfield_level()));
                    let pattern = evaluate_farfield(&solution, &dirs);
                    writeln!(
                        log,
                        "farfield: norm={:.12e} structure_residual={:.3e}",
                        pattern.l2_norm(),
                        pattern.structure_residual()
                    )
                    .ok();
                    let file = farfield_file(&medium, level, "scattering", &pattern);
                    write_artifact(
                        &opts.out_dir,
                        "farfield.json",
                        &serde_json::to_string_pretty(&file).unwrap(),
                        &mut artifacts,
                    )?;
                }
                Command::ShapeDerivative => {
                    let xi = config.perturbation_field()?;
                    let dirs = Arc::new(DirectionGrid::new(config.farfield_level()));
                    let pattern =
                        crate::shape::shape_derivative_farfield(&mut ctx, &solution, &xi, &dirs)
                            .map_err(run_err)?;
                    writeln!(log, "derivative farfield: norm={:.12e}", pattern.l2_norm()).ok();
                    let file = farfield_file(&medium, level, "shape-derivative", &pattern);
                    write_artifact(
                        &opts.out_dir,
                        "shape_derivative.json",
                        &serde_json::to_string_pretty(&file).unwrap(),
                        &mut artifacts,
                    )?;
                }
                _ => unreachable!(),
            }
        }
        Command::FdCheck => {
            let kind = config.problem_kind()?;
            let incident = config.incident_field()?;
            let xi = config.perturbation_field()?;
            let fd = config
                .fd
                .as_ref()
                .ok_or_else(|| CliError::Config("missing [fd] section".into()))?;
            if fd.steps.windows(2).any(|w| w[1] >= w[0]) || fd.steps.iter().any(|&t| t <= 0.0) {
                return Err(CliError::Config(
                    "fd steps must be positive and strictly decreasing".into(),
                ));
            }
            let cfg = FdConfig {
                kind,
                medium,
                surface,
                level,
                incident,
                xi,
                steps: fd.steps.clone(),
                farfield_level: config.farfield_level(),
            };
            let report = fd_validate(&cfg).map_err(run_err)?;
            let quotient = report.errors.last().unwrap() / fd.steps.last().unwrap();
            let ok = report.passes(fd.min_slope)
                && quotient <= fd.quotient_tolerance * report.fprime_norm;
            passed = Some(ok);
            let mut csv = String::from("t,e,slope\n");
            for (k, (&t, &e)) in cfg.steps.iter().zip(report.errors.iter()).enumerate() {
                let slope = if k + 1 < report.errors.len() {
                    format!(
                        "{:.6}",
                        (report.errors[k] / report.errors[k + 1]).ln()
                            / (cfg.steps[k] / cfg.steps[k + 1]).ln()
                    )
                } else {
                    String::new()
                };
                writeln!(csv, "{:.17e},{:.17e},{}", t, e, slope).ok();
            }
            write_artifact(&opts.out_dir, "fd_check.csv", &csv, &mut artifacts)?;
            writeln!(
                log,
                "fd-check: slope={:.4} used_steps={} floor={:.3e} fprime_norm={:.6e} quotient={:.3e} -> {}",
                report.slope,
                report.used_steps,
                report.floor,
                report.fprime_norm,
                quotient,
                if ok { "PASS" } else { "FAIL" }
            )
            .ok();
        }
        Command::IdentityCheck => {
            let kind = config.problem_kind()?;
            let incident = config.incident_field()?;
            let identity = config
                .identity
                .as_ref()
                .ok_or_else(|| CliError::Config("missing [identity] section".into()))?;
            if identity.offset <= 0.0 {
                return Err(CliError::Config("identity offset must be positive".into()));
            }
            let eval_points: Vec<RVec3> = sample_directions(opts.seed, identity.n_eval_points)
                .into_iter()
                .map(|d| d * identity.eval_radius)
                .collect();
            let cfg = IdentityConfig {
                kind,
                medium,
                surface,
                offset: identity.offset,
                level,
                incident,
                eval_points: eval_points.clone(),
            };
            let report = factorization_residual(&cfg).map_err(run_err)?;
            let ok = report.max_residual <= identity.tolerance;
            passed = Some(ok);
            let mut csv = String::from("point,x,y,z,lhs_norm,rhs_norm,residual\n");
            for (i, x) in eval_points.iter().enumerate() {
                writeln!(
                    csv,
                    "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                    i,
                    x.x,
                    x.y,
                    x.z,
                    report.lhs_norms[i],
                    report.rhs_norms[i],
                    report.residuals[i]
                )
                .ok();
            }
            write_artifact(&opts.out_dir, "identity_check.csv", &csv, &mut artifacts)?;
            writeln!(
                log,
                "identity-check: max_residual={:.6e} tolerance={:.1e} -> {}",
                report.max_residual,
                identity.tolerance,
                if ok { "PASS" } else { "FAIL" }
            )
            .ok();
        }
        Command::Convergence => {
            let kind = config.problem_kind()?;
            let conv = config
                .convergence
                .as_ref()
                .ok_or_else(|| CliError::Config("missing [convergence] section".into()))?;
            let source = RVec3::new(conv.source[0], conv.source[1], conv.source[2]);
            let strength = RVec3::new(conv.strength[0], conv.strength[1], conv.strength[2]);
            let exact = ManufacturedSolution::new(medium, &surface, source, strength)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let eval_points: Vec<RVec3> = sample_directions(opts.seed, conv.n_eval_points)
                .into_iter()
                .map(|d| d * conv.eval_radius)
                .collect();

            let mut table = String::from(
                "level,n_nodes,point,x,y,z,computed_re_x,computed_im_x,computed_re_y,computed_im_y,computed_re_z,computed_im_z,oracle_re_x,oracle_im_x,oracle_re_y,oracle_im_y,oracle_re_z,oracle_im_z,abs_error\n",
            );
            let mut summary = String::from("level,n_nodes,rel_error,ratio\n");
            let mut prev_err: Option<f64> = None;
            for &lvl in &conv.levels {
                let grid = Arc::new(build_grid(&surface, lvl).map_err(run_err)?);
                let mut ctx = SolverContext::new(grid.clone(), medium);
                let solution = match kind {
                    ProblemKind::Dirichlet => ctx
                        .solve_dirichlet_bvp(&exact.dirichlet_data(&grid))
                        .map_err(run_err)?,
                    ProblemKind::Neumann => ctx
                        .solve_impedance_bvp(0.0, &exact.neumann_data(&grid))
                        .map_err(run_err)?,
                    ProblemKind::Impedance { alpha } => ctx
                        .solve_impedance_bvp(alpha, &exact.impedance_data(&grid, alpha))
                        .map_err(run_err)?,
                };
                let computed = evaluate_field(&solution, &eval_points).map_err(run_err)?;
                let mut num = 0.0;
                let mut den = 0.0;
                for (i, x) in eval_points.iter().enumerate() {
                    let reference = exact.eval(x);
                    let err = (computed[i] - reference).norm();
                    num += err * err;
                    den += reference.norm_squared();
                    writeln!(
                        table,
                        "{},{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                        lvl, grid.n_nodes(), i, x.x, x.y, x.z,
                        computed[i].x.re, computed[i].x.im,
                        computed[i].y.re, computed[i].y.im,
                        computed[i].z.re, computed[i].z.im,
                        reference.x.re, reference.x.im,
                        reference.y.re, reference.y.im,
                        reference.z.re, reference.z.im,
                        err
                    )
                    .ok();
                }
                let rel = (num / den).sqrt();
                let ratio = prev_err.map(|p| p / rel);
                writeln!(
                    summary,
                    "{},{},{:.17e},{}",
                    lvl,
                    grid.n_nodes(),
                    rel,
                    ratio.map(|r| format!("{r:.6}")).unwrap_or_default()
                )
                .ok();
                writeln!(
                    log,
                    "convergence: level={} n_nodes={} rel_error={:.6e} condition={:.3e}",
                    lvl,
                    grid.n_nodes(),
                    rel,
                    solution.condition
                )
                .ok();
                prev_err = Some(rel);
            }
            write_artifact(&opts.out_dir, "convergence.csv", &table, &mut artifacts)?;
            write_artifact(
                &opts.out_dir,
                "convergence_summary.csv",
                &summary,
                &mut artifacts,
            )?;
        }
    }

    write_artifact(&opts.out_dir, "run.log", &log, &mut artifacts)?;
    Ok(RunSummary {
        passed,
        artifacts,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[medium]
lambda = 2.0
mu = 1.0
rho = 1.0
omega = 2.0

[surface]
base_radius = 1.0

[grid]
level = 1

[problem]
kind = "dirichlet"

[incident]
kind = "pressure"
direction = [0.0, 0.0, 1.0]

[farfield]
level = 1
"#;

    #[test]
    fn config_parses_and_validates() {
        let cfg = ExperimentConfig::parse(BASE).unwrap();
        assert!(cfg.medium().is_ok());
        assert!(cfg.star_surface().is_ok());
        assert_eq!(cfg.problem_kind().unwrap(), ProblemKind::Dirichlet);
        assert!(cfg.incident_field().is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let bad = format!("{BASE}\n[grid2]\nlevel = 1\n");
        let err = ExperimentConfig::parse(&bad).unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
        assert!(err.to_string().contains("grid2"), "{err}");
        assert_eq!(err.exit_code(), 2);

        let bad2 = BASE.replace("omega = 2.0", "omega = 2.0\nwavelength = 3.0");
        let err2 = ExperimentConfig::parse(&bad2).unwrap_err();
        assert!(err2.to_string().contains("wavelength"), "{err2}");
    }

    #[test]
    fn farfield_run_writes_schema_conforming_json() {
        let cfg = ExperimentConfig::parse(BASE).unwrap();
        let dir = std::env::temp_dir().join(format!("elastoscat-cli-test-{}", std::process::id()));
        let opts = RunOptions {
            out_dir: dir.clone(),
            level_override: None,
            seed: 0,
        };
        let summary = run(Command::Farfield, &cfg, &opts).unwrap();
        assert!(summary.artifacts.iter().any(|p| p.ends_with("farfield.json")));
        let text = std::fs::read_to_string(dir.join("farfield.json")).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        let records = parsed["records"].as_array().unwrap();
        assert_eq!(records.len(), 42); // level-1 direction grid
        for r in records {
            assert_eq!(r["xhat"].as_array().unwrap().len(), 3);
            assert_eq!(r["up"].as_array().unwrap().len(), 3);
            assert_eq!(r["us"].as_array().unwrap().len(), 3);
        }
        assert!(parsed["kappa_p"].as_f64().unwrap() > 0.0);
        std::fs::remove_dir_all(&dir).ok();
    }
}
