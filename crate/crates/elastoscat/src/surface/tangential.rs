//! Discrete tangential calculus on surface grids.
//!
//! Derivatives of node-sampled traces are obtained from weighted cubic
//! least-squares fits in the tangent-plane chart of each node. The
//! tangent-plane projection is an exact local chart, so the fitted
//! gradient at the center is a third-order approximation of the
//! surface gradient; two-ring stencils (15+ nodes) support the ten
//! cubic monomials.

use super::SurfaceGrid;
use crate::{CMat3, CVec3, C64};
use nalgebra::{SMatrix, SVector};

type Basis = SVector<f64, 10>;

fn basis(xi: f64, eta: f64) -> Basis {
    Basis::from_column_slice(&[
        1.0,
        xi,
        eta,
        xi * xi,
        xi * eta,
        eta * eta,
        xi * xi * xi,
        xi * xi * eta,
        xi * eta * eta,
        eta * eta * eta,
    ])
}

/// Per-node differentiation weights: the surface gradient of a sampled
/// function f at node i is sum_j (w1_j s1 + w2_j s2) f_j over the node
/// itself and its two-ring.
pub struct MlsOperators {
    /// (node index, weight for s1, weight for s2)
    pub stencils: Vec<Vec<(usize, f64, f64)>>,
}

impl MlsOperators {
    pub fn new(grid: &SurfaceGrid) -> Self {
        let stencils = (0..grid.n_nodes())
            .map(|i| {
                let (s1, s2) = grid.frames[i];
                let xi_of = |j: usize| {
                    let d = grid.nodes[j] - grid.nodes[i];
                    (d.dot(&s1), d.dot(&s2))
                };
                let members: Vec<usize> =
                    std::iter::once(i).chain(grid.neighbors[i].iter().copied()).collect();
                let scale = grid.neighbors[i]
                    .iter()
                    .map(|&j| (grid.nodes[j] - grid.nodes[i]).norm())
                    .fold(0.0, f64::max)
                    .max(1e-14);
                let mut normal_mat = SMatrix::<f64, 10, 10>::zeros();
                let mut rows: Vec<(usize, Basis, f64)> = Vec::with_capacity(members.len());
                for &j in &members {
                    let (xi, eta) = xi_of(j);
                    let d2 = (xi * xi + eta * eta) / (scale * scale);
                    let w = (-2.0 * d2).exp();
                    let phi = basis(xi / scale, eta / scale);
                    normal_mat += phi * phi.transpose() * w;
                    rows.push((j, phi, w));
                }
                let inv = normal_mat
                    .try_inverse()
                    .expect("MLS normal matrix is invertible on two-ring stencils");
                rows.into_iter()
                    .map(|(j, phi, w)| {
                        let coeffs = inv * (phi * w);
                        // gradient components in chart units, undo scaling
                        (j, coeffs[1] / scale, coeffs[2] / scale)
                    })
                    .collect()
            })
            .collect();
        MlsOperators { stencils }
    }

    /// Surface gradient of a scalar node-sampled function.
    pub fn gradient_scalar(&self, grid: &SurfaceGrid, values: &[C64]) -> Vec<CVec3> {
        assert_eq!(values.len(), grid.n_nodes());
        self.stencils
            .iter()
            .enumerate()
            .map(|(i, st)| {
                let (s1, s2) = grid.frames[i];
                let mut c1 = C64::ZERO;
                let mut c2 = C64::ZERO;
                for &(j, w1, w2) in st {
                    c1 += values[j] * w1;
                    c2 += values[j] * w2;
                }
                crate::cvec(&s1) * c1 + crate::cvec(&s2) * c2
            })
            .collect()
    }

    /// Tangential gradient matrix [grad_Gamma u] of a 3-vector trace;
    /// column b holds the surface gradient of component b.
    pub fn gradient(&self, grid: &SurfaceGrid, trace: &[CVec3]) -> Vec<CMat3> {
        assert_eq!(trace.len(), grid.n_nodes());
        let mut out = vec![CMat3::zeros(); grid.n_nodes()];
        for b in 0..3 {
            let comp: Vec<C64> = trace.iter().map(|v| v[b]).collect();
            let grads = self.gradient_scalar(grid, &comp);
            for (m, g) in out.iter_mut().zip(grads) {
                m.set_column(b, &g);
            }
        }
        out
    }

    /// Surface divergence of a 3-vector trace.
    pub fn divergence(&self, grid: &SurfaceGrid, trace: &[CVec3]) -> Vec<C64> {
        self.gradient(grid, trace)
            .into_iter()
            .map(|g| g[(0, 0)] + g[(1, 1)] + g[(2, 2)])
            .collect()
    }
}

/// Discrete tangential gradient of a scalar trace.
pub fn tangential_gradient_scalar(grid: &SurfaceGrid, values: &[C64]) -> Vec<CVec3> {
    MlsOperators::new(grid).gradient_scalar(grid, values)
}

/// Discrete tangential gradient [grad_Gamma u] of a vector trace
/// (columns are component gradients).
pub fn tangential_gradient(grid: &SurfaceGrid, trace: &[CVec3]) -> Vec<CMat3> {
    MlsOperators::new(grid).gradient(grid, trace)
}

/// Discrete surface divergence of a vector trace.
pub fn surface_divergence(grid: &SurfaceGrid, trace: &[CVec3]) -> Vec<C64> {
    MlsOperators::new(grid).divergence(grid, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{build_grid, StarSurface};
    use crate::{cvec, RVec3};

    fn sphere_grid(level: u32) -> SurfaceGrid {
        build_grid(&StarSurface::unit_sphere(), level).unwrap()
    }

    #[test]
    fn gradient_exact_on_constants() {
        let g = sphere_grid(2);
        let vals = vec![C64::new(3.25, -1.5); g.n_nodes()];
        for grad in tangential_gradient_scalar(&g, &vals) {
            assert!(grad.norm() < 1e-12);
        }
    }

    #[test]
    fn gradient_of_normal_is_projection_on_sphere() {
        let g = sphere_grid(3);
        let trace: Vec<CVec3> = g.normals.iter().map(cvec).collect();
        let grads = tangential_gradient(&g, &trace);
        for (i, m) in grads.iter().enumerate() {
            let n = cvec(&g.normals[i]);
            let proj = CMat3::identity() - n * n.transpose();
            assert!((m - proj).norm() < 1e-3, "node {i}: {}", (m - proj).norm());
        }
    }

    #[test]
    fn divergence_of_normal_is_mean_curvature() {
        let g = sphere_grid(2);
        let trace: Vec<CVec3> = g.normals.iter().map(cvec).collect();
        for div in surface_divergence(&g, &trace) {
            assert!((div.re - 2.0).abs() < 1e-3 && div.im.abs() < 1e-12);
        }
    }

    #[test]
    fn closed_surface_divergence_integrates_to_zero() {
        let g = sphere_grid(3);
        // tangential field v = n x e3
        let e3 = RVec3::new(0.0, 0.0, 1.0);
        let trace: Vec<CVec3> = g.normals.iter().map(|n| cvec(&n.cross(&e3))).collect();
        let divs = surface_divergence(&g, &trace);
        let total: C64 = divs
            .iter()
            .zip(g.weights.iter())
            .map(|(d, w)| d * C64::new(*w, 0.0))
            .sum();
        let scale: f64 = trace.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(total.norm() < 1e-6 * scale, "total {total}");
    }

    #[test]
    fn splitting_identity_for_position_field() {
        // u(x) = x: grad_Gamma u + n (du/dn)^T reconstructs the identity
        // and div_Gamma x = 2 on the unit sphere.
        let g = sphere_grid(3);
        let trace: Vec<CVec3> = g.nodes.iter().map(cvec).collect();
        let grads = tangential_gradient(&g, &trace);
        let divs = surface_divergence(&g, &trace);
        for i in 0..g.n_nodes() {
            // du/dn for u(x)=x equals n itself
            let n = cvec(&g.normals[i]);
            let rebuilt = grads[i] + n * n.transpose();
            assert!(
                (rebuilt - CMat3::identity()).norm() < 1e-3,
                "node {i}: {}",
                (rebuilt - CMat3::identity()).norm()
            );
            assert!((divs[i].re - 2.0).abs() < 1e-3);
        }
    }

    #[test]
    fn gunter_identity_surface_vs_volume_form() {
        // M u = [grad_Gamma u] n - (div_Gamma u) n for an analytic field
        // restricted to the sphere, against exact ambient derivatives.
        use crate::medium::{gunter_derivative, FieldJet};
        let g = sphere_grid(4);
        // polynomial field u = (x^2, x y, z) with exact Jacobian
        let field = |x: &RVec3| CVec3::new(C64::new(x.x * x.x, 0.0), C64::new(x.x * x.y, 0.0), C64::new(x.z, 0.0));
        let jac = |x: &RVec3| {
            let mut j = CMat3::zeros();
            j[(0, 0)] = C64::new(2.0 * x.x, 0.0);
            j[(1, 0)] = C64::new(x.y, 0.0);
            j[(1, 1)] = C64::new(x.x, 0.0);
            j[(2, 2)] = C64::new(1.0, 0.0);
            j
        };
        let trace: Vec<CVec3> = g.nodes.iter().map(|x| field(x)).collect();
        let grads = tangential_gradient(&g, &trace);
        let divs = surface_divergence(&g, &trace);
        let umax = trace.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for i in 0..g.n_nodes() {
            let n = g.normals[i];
            let jet = FieldJet::new(field(&g.nodes[i]), jac(&g.nodes[i]));
            let volume = gunter_derivative(&jet, &n).unwrap();
            let surface = grads[i] * cvec(&n) - cvec(&n) * divs[i];
            assert!(
                (volume - surface).norm() <= 1e-3 * umax,
                "node {i}: {}",
                (volume - surface).norm()
            );
        }
    }
}
