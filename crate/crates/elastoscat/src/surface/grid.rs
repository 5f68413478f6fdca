//! Triangulated grids over star-shaped surfaces.
//!
//! The parameter domain is an icosphere: an icosahedron refined by edge
//! midpoint subdivision, vertices projected to the unit sphere. Each
//! flat parameter triangle maps to a curved surface patch through
//! p -> rho(p) p (+ optional transported offset), and the patches tile
//! the surface exactly, so all geometric quantities are evaluated on
//! the true surface rather than on a faceted approximation.

use super::{PerturbationField, StarSurface, SurfaceError};
use crate::RVec3;
use rayon::prelude::*;

/// Degree-5 seven-point symmetric triangle rule (barycentric, weights
/// normalized to sum to one).
pub const TRI_RULE: [([f64; 3], f64); 7] = {
    const A1: f64 = 0.059715871789770;
    const B1: f64 = 0.470142064105115;
    const W1: f64 = 0.132394152788506;
    const A2: f64 = 0.797426985353087;
    const B2: f64 = 0.101286507323456;
    const W2: f64 = 0.125939180544827;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ]
};

/// The surface a grid discretizes: a star-shaped boundary, optionally
/// displaced by `t * field` with node correspondence to the base
/// parametrization (transported mesh).
#[derive(Debug, Clone)]
pub enum SurfaceShape {
    Star(StarSurface),
    Offset {
        base: StarSurface,
        field: PerturbationField,
        t: f64,
    },
}

impl SurfaceShape {
    fn rho(&self) -> &StarSurface {
        match self {
            SurfaceShape::Star(s) => s,
            SurfaceShape::Offset { base, .. } => base,
        }
    }
}

/// Parameter-sphere triangulation.
#[derive(Debug, Clone)]
pub struct Triangulation {
    pub verts: Vec<RVec3>,
    pub faces: Vec<[usize; 3]>,
}

pub fn icosphere(level: u32) -> Triangulation {
    let t = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let raw = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ];
    let mut verts: Vec<RVec3> = raw
        .iter()
        .map(|&(x, y, z)| RVec3::new(x, y, z).normalize())
        .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..level {
        let mut midpoint = std::collections::HashMap::new();
        let mut next_faces = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut mids = [0usize; 3];
            for e in 0..3 {
                let a = f[e];
                let b = f[(e + 1) % 3];
                let key = (a.min(b), a.max(b));
                mids[e] = *midpoint.entry(key).or_insert_with(|| {
                    let m = (verts[a] + verts[b]).normalize();
                    verts.push(m);
                    verts.len() - 1
                });
            }
            next_faces.push([f[0], mids[0], mids[2]]);
            next_faces.push([f[1], mids[1], mids[0]]);
            next_faces.push([f[2], mids[2], mids[1]]);
            next_faces.push([mids[0], mids[1], mids[2]]);
        }
        faces = next_faces;
    }

    // Keep outward orientation: (v1-v0)x(v2-v0) . centroid > 0.
    for f in faces.iter_mut() {
        let (a, b, c) = (verts[f[0]], verts[f[1]], verts[f[2]]);
        let n = (b - a).cross(&(c - a));
        if n.dot(&(a + b + c)) < 0.0 {
            f.swap(1, 2);
        }
    }
    Triangulation { verts, faces }
}

/// A point of a curved face chart: position, outward unit normal and
/// the surface measure factor |X_u x X_v| of the simplex chart.
#[derive(Debug, Clone, Copy)]
pub struct ChartPoint {
    pub pos: RVec3,
    pub normal: RVec3,
    pub measure: f64,
}

fn map_point(shape: &SurfaceShape, p: &RVec3) -> RVec3 {
    let rho = shape.rho().rho_poly().eval(p);
    match shape {
        SurfaceShape::Star(_) => p * rho,
        SurfaceShape::Offset { field, t, .. } => p * rho + field.eval(p) * *t,
    }
}

/// Evaluate the chart q -> X(q/|q|) together with its differential
/// applied to (q_u, q_v).
fn chart_jet1(shape: &SurfaceShape, q: &RVec3, q_u: &RVec3, q_v: &RVec3) -> (RVec3, RVec3, RVec3) {
    let norm = q.norm();
    let p = q / norm;
    let proj_u = (q_u - p * p.dot(q_u)) / norm;
    let proj_v = (q_v - p * p.dot(q_v)) / norm;
    let star = shape.rho();
    let rho = star.rho_poly().eval(&p);
    let g = star.rho_poly().gradient(&p);
    let mut x = p * rho;
    let mut x_u = p * g.dot(&proj_u) + proj_u * rho;
    let mut x_v = p * g.dot(&proj_v) + proj_v * rho;
    if let SurfaceShape::Offset { field, t, .. } = shape {
        let (val, jac) = field.eval_with_jacobian(&p);
        x += val * *t;
        x_u += jac * proj_u * *t;
        x_v += jac * proj_v * *t;
    }
    (x, x_u, x_v)
}

/// Chart data for an arbitrary parameter-domain chart point q with
/// chart derivatives (q_u, q_v); the measure is |X_u x X_v| of the
/// composed surface chart.
pub fn chart_point(shape: &SurfaceShape, q: &RVec3, q_u: &RVec3, q_v: &RVec3) -> ChartPoint {
    let (x, x_u, x_v) = chart_jet1(shape, q, q_u, q_v);
    let cross = x_u.cross(&x_v);
    let measure = cross.norm();
    let mut normal = cross / measure;
    if normal.dot(&(q / q.norm())) < 0.0 {
        normal = -normal;
    }
    ChartPoint {
        pos: x,
        normal,
        measure,
    }
}

/// Chart data at barycentric coordinates of a parameter face.
pub fn face_chart(shape: &SurfaceShape, verts: [&RVec3; 3], bary: [f64; 3]) -> ChartPoint {
    let q = verts[0] * bary[0] + verts[1] * bary[1] + verts[2] * bary[2];
    let q_u = verts[1] - verts[0];
    let q_v = verts[2] - verts[0];
    chart_point(shape, &q, &q_u, &q_v)
}

/// Node geometry from the tangent-plane chart of the parameter sphere:
/// position, outward normal, mean curvature (div_Gamma n convention)
/// and an orthonormal surface tangent frame.
fn node_geometry(shape: &SurfaceShape, p0: &RVec3) -> (RVec3, RVec3, f64, (RVec3, RVec3)) {
    // Parameter tangent frame at p0.
    let helper = if p0.x.abs() < 0.9 {
        RVec3::new(1.0, 0.0, 0.0)
    } else {
        RVec3::new(0.0, 1.0, 0.0)
    };
    let t1 = helper.cross(p0).normalize();
    let t2 = p0.cross(&t1);

    let star = shape.rho();
    let rho = star.rho_poly().eval(p0);
    let g = star.rho_poly().gradient(p0);
    let h = star.rho_poly().hessian(p0);

    let r_x1 = g.dot(&t1);
    let r_x2 = g.dot(&t2);
    let r_11 = (h * t1).dot(&t1) - g.dot(p0);
    let r_22 = (h * t2).dot(&t2) - g.dot(p0);
    let r_12 = (h * t1).dot(&t2);

    let mut x = p0 * rho;
    let mut x1 = p0 * r_x1 + t1 * rho;
    let mut x2 = p0 * r_x2 + t2 * rho;
    let mut x11 = p0 * r_11 + t1 * (2.0 * r_x1) - p0 * rho;
    let mut x22 = p0 * r_22 + t2 * (2.0 * r_x2) - p0 * rho;
    let mut x12 = p0 * r_12 + t2 * r_x1 + t1 * r_x2;

    if let SurfaceShape::Offset { field, t, .. } = shape {
        let jets = field.eval_with_second(p0);
        x += jets.value * *t;
        x1 += jets.jacobian * t1 * *t;
        x2 += jets.jacobian * t2 * *t;
        for c in 0..3 {
            let hc = jets.hessians[c];
            let gc = RVec3::new(
                jets.jacobian[(c, 0)],
                jets.jacobian[(c, 1)],
                jets.jacobian[(c, 2)],
            );
            x11[c] += ((hc * t1).dot(&t1) - gc.dot(p0)) * *t;
            x22[c] += ((hc * t2).dot(&t2) - gc.dot(p0)) * *t;
            x12[c] += (hc * t1).dot(&t2) * *t;
        }
    }

    let cross = x1.cross(&x2);
    let mut normal = cross.normalize();
    if normal.dot(p0) < 0.0 {
        normal = -normal;
    }

    let e = x1.dot(&x1);
    let f = x1.dot(&x2);
    let g2 = x2.dot(&x2);
    let l = x11.dot(&normal);
    let m = x12.dot(&normal);
    let n2 = x22.dot(&normal);
    // H = div_Gamma n; the unit sphere with outward normal gives +2.
    let mean_curv = -(l * g2 - 2.0 * m * f + n2 * e) / (e * g2 - f * f);

    let s1 = x1.normalize();
    let s2 = (x2 - s1 * x2.dot(&s1)).normalize();
    (x, normal, mean_curv, (s1, s2))
}

/// Surface quadrature point.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub pos: RVec3,
    pub normal: RVec3,
    /// Quadrature weight including the surface measure.
    pub weight: f64,
    pub bary: [f64; 3],
}

/// Discretized surface with per-node geometry, a per-face quadrature
/// rule on the exact curved surface, and neighbor structure for the
/// least-squares tangential calculus.
#[derive(Debug, Clone)]
pub struct SurfaceGrid {
    pub level: u32,
    pub shape: SurfaceShape,
    /// Parameter-sphere node positions (unit vectors).
    pub params: Vec<RVec3>,
    pub nodes: Vec<RVec3>,
    pub normals: Vec<RVec3>,
    pub mean_curvature: Vec<f64>,
    /// Nodal quadrature weights: sum w_i f(x_i) approximates the surface
    /// integral of f.
    pub weights: Vec<f64>,
    /// Orthonormal tangent frame per node.
    pub frames: Vec<(RVec3, RVec3)>,
    pub faces: Vec<[usize; 3]>,
    pub quads: Vec<[QuadPoint; 7]>,
    /// Two-ring node neighborhoods (excluding the node itself), sorted.
    pub neighbors: Vec<Vec<usize>>,
    pub area: f64,
    pub mean_spacing: f64,
}

impl SurfaceGrid {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Chart data at a barycentric point of face `face`.
    pub fn chart(&self, face: usize, bary: [f64; 3]) -> ChartPoint {
        let f = self.faces[face];
        face_chart(
            &self.shape,
            [&self.params[f[0]], &self.params[f[1]], &self.params[f[2]]],
            bary,
        )
    }

    /// Surface diameter estimate (max node distance from centroid * 2).
    pub fn diameter(&self) -> f64 {
        let centroid = self.nodes.iter().sum::<RVec3>() / self.nodes.len() as f64;
        2.0 * self
            .nodes
            .iter()
            .map(|x| (x - centroid).norm())
            .fold(0.0, f64::max)
    }
}

pub(super) fn build(shape: SurfaceShape, level: u32) -> Result<SurfaceGrid, SurfaceError> {
    let tri = icosphere(level);

    // Validate positive radial distance of the realized surface.
    {
        let fine = icosphere((level + 1).min(5));
        for p in &fine.verts {
            let x = map_point(&shape, p);
            if x.norm() < StarSurface::MIN_RADIUS || x.normalize().dot(p) <= 0.0 {
                return Err(SurfaceError::InvalidSurface(
                    "surface radius not positive on a dense sample".into(),
                ));
            }
        }
    }

    let node_geom: Vec<_> = tri
        .verts
        .par_iter()
        .map(|p| node_geometry(&shape, p))
        .collect();

    let quads: Vec<[QuadPoint; 7]> = tri
        .faces
        .par_iter()
        .map(|f| {
            let verts = [&tri.verts[f[0]], &tri.verts[f[1]], &tri.verts[f[2]]];
            std::array::from_fn(|q| {
                let (bary, w) = TRI_RULE[q];
                let cp = face_chart(&shape, verts, bary);
                QuadPoint {
                    pos: cp.pos,
                    normal: cp.normal,
                    weight: 0.5 * w * cp.measure,
                    bary,
                }
            })
        })
        .collect();

    let n = tri.verts.len();
    let mut weights = vec![0.0; n];
    let mut area = 0.0;
    for (f, quad) in tri.faces.iter().zip(quads.iter()) {
        for qp in quad {
            area += qp.weight;
            for (v, b) in f.iter().zip(qp.bary.iter()) {
                weights[*v] += qp.weight * b;
            }
        }
    }

    let mut ring1: Vec<std::collections::BTreeSet<usize>> = vec![Default::default(); n];
    for f in &tri.faces {
        for &a in f {
            for &b in f {
                if a != b {
                    ring1[a].insert(b);
                }
            }
        }
    }
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let mut set = ring1[i].clone();
            for &j in &ring1[i] {
                set.extend(ring1[j].iter().copied());
            }
            set.remove(&i);
            set.into_iter().collect()
        })
        .collect();

    let nodes: Vec<RVec3> = node_geom.iter().map(|g| g.0).collect();
    let mut edge_len = 0.0;
    let mut edge_count = 0usize;
    for f in &tri.faces {
        for e in 0..3 {
            edge_len += (nodes[f[e]] - nodes[f[(e + 1) % 3]]).norm();
            edge_count += 1;
        }
    }

    Ok(SurfaceGrid {
        level,
        shape,
        params: tri.verts,
        normals: node_geom.iter().map(|g| g.1).collect(),
        mean_curvature: node_geom.iter().map(|g| g.2).collect(),
        frames: node_geom.iter().map(|g| g.3).collect(),
        nodes,
        weights,
        faces: tri.faces,
        quads,
        neighbors,
        area,
        mean_spacing: edge_len / edge_count as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::StarSurface;

    #[test]
    fn quadrature_rule_is_degree_five() {
        // Exact on u^a v^b with a+b <= 5 over the unit simplex.
        let fact = |n: u32| (1..=n).map(|i| i as f64).product::<f64>().max(1.0);
        for a in 0..=5u32 {
            for b in 0..=(5 - a) {
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                let mut num = 0.0;
                for (bary, w) in TRI_RULE {
                    let (u, v) = (bary[1], bary[2]);
                    num += 0.5 * w * u.powi(a as i32) * v.powi(b as i32);
                }
                assert!(
                    (num - exact).abs() < 1e-15,
                    "monomial u^{a} v^{b}: {num} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn icosphere_counts() {
        for level in 0..4u32 {
            let t = icosphere(level);
            assert_eq!(t.faces.len(), 20 * 4usize.pow(level));
            assert_eq!(t.verts.len(), 10 * 4usize.pow(level) + 2);
        }
    }

    #[test]
    fn sphere_grid_geometry() {
        let grid = build(SurfaceShape::Star(StarSurface::unit_sphere()), 2).unwrap();
        let sphere_area = 4.0 * std::f64::consts::PI;
        assert!(
            (grid.area - sphere_area).abs() / sphere_area < 1e-4,
            "area {}",
            grid.area
        );
        let wsum: f64 = grid.weights.iter().sum();
        assert!((wsum - grid.area).abs() < 1e-12);
        for (i, n) in grid.normals.iter().enumerate() {
            assert!((n - grid.params[i]).norm() < 1e-12, "normal at node {i}");
            assert!((grid.mean_curvature[i] - 2.0).abs() < 1e-3);
        }
        // closed surface: integral of the normal vanishes
        let mut total = RVec3::zeros();
        for quad in &grid.quads {
            for qp in quad {
                total += qp.normal * qp.weight;
            }
        }
        assert!(total.norm() < 1e-6 * grid.area, "normal integral {}", total.norm());
    }

    #[test]
    fn radius_two_sphere_curvature() {
        let grid = build(SurfaceShape::Star(StarSurface::sphere(2.0).unwrap()), 2).unwrap();
        for h in &grid.mean_curvature {
            assert!((h - 1.0).abs() < 1e-3);
        }
        let sphere_area = 16.0 * std::f64::consts::PI;
        assert!((grid.area - sphere_area).abs() / sphere_area < 1e-4);
    }

    #[test]
    fn area_converges_fast_on_bumpy_surface() {
        let s = StarSurface::new(1.0, vec![(2, 0, 0.2), (3, 1, 0.1)]).unwrap();
        let errors: Vec<f64> = (1..4)
            .map(|level| {
                let g = build(SurfaceShape::Star(s.clone()), level).unwrap();
                g.area
            })
            .collect();
        // Use the finest level as reference; ratios should be >= 3.5.
        let reference = {
            let g = build(SurfaceShape::Star(s.clone()), 4).unwrap();
            g.area
        };
        let e: Vec<f64> = errors.iter().map(|a| (a - reference).abs()).collect();
        for w in e.windows(2) {
            if w[1] > 1e-12 * reference {
                assert!(w[0] / w[1] >= 3.5, "area convergence ratio {:?}", e);
            }
        }
    }
}
