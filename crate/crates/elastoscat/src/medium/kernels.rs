//! Fundamental solution of the Navier equation, its traction kernels
//! and the far-field kernels of the layer potentials.
//!
//! With z = x - y, r = |z| and zh = z/r the tensor is written as
//!
//!   Phi(x, y) = a(r) I + b(r) zh zh^T,
//!
//! where a and b collect the Helmholtz kernel exp(i kappa_s r)/(4 pi mu r)
//! and the Hessian of the difference kernel
//! (exp(i kappa_s r) - exp(i kappa_p r)) / (4 pi r). The difference part
//! is analytic at r = 0 and is evaluated by a short Taylor series for
//! kappa_s r < 1e-3 to avoid cancellation.

use super::{ElasticMedium, FieldJet, MediumError};
use crate::{cvec, CMat3, CVec3, C64, RVec3};

/// Relative coincidence threshold for kernel evaluations.
const SINGULAR_RTOL: f64 = 1e-12;
/// Switch to the series evaluation of the difference kernel below this
/// value of kappa_s * r.
const SERIES_THRESHOLD: f64 = 1e-3;

/// Selects the time-harmonic kernel or its elastostatic (Kelvin) limit.
/// The static limit drives the strongly singular parts of the boundary
/// operators, whose diagonal is fixed by rigid-motion identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMode {
    Dynamic,
    Static,
}

/// Radial coefficients of the fundamental solution and their first
/// derivatives: Phi = a I + b zh zh^T, with d/dr values `ap`, `bp`.
#[derive(Debug, Clone, Copy)]
pub struct KernelScalars {
    pub a: C64,
    pub b: C64,
    pub ap: C64,
    pub bp: C64,
    pub r: f64,
}

/// Kernel coefficients together with second radial derivatives, needed
/// for gradients of the double-layer potential.
#[derive(Debug, Clone, Copy)]
pub struct KernelScalars2 {
    pub base: KernelScalars,
    pub app: C64,
    pub bpp: C64,
}

/// Coefficients a, b and their first two derivatives at distance r.
pub fn kernel_scalars2(medium: &ElasticMedium, r: f64, mode: KernelMode) -> KernelScalars2 {
    let base = kernel_scalars(medium, r, mode);
    let c4 = 1.0 / (4.0 * std::f64::consts::PI * medium.mu);
    match mode {
        KernelMode::Static => {
            let g2 = medium.mu / (medium.lambda + 2.0 * medium.mu);
            KernelScalars2 {
                base,
                app: C64::new(c4 * (1.0 + g2) / (r * r * r), 0.0),
                bpp: C64::new(c4 * (1.0 - g2) / (r * r * r), 0.0),
            }
        }
        KernelMode::Dynamic => {
            let ks = medium.kappa_s();
            let kp = medium.kappa_p();
            let ks2 = ks * ks;
            let es = C64::new(0.0, ks * r).exp();
            let ep = C64::new(0.0, kp * r).exp();
            let fs = es * C64::new(-1.0, ks * r);
            let fp = ep * C64::new(-1.0, kp * r);
            let (ddd1, ddd2) = if ks * r < SERIES_THRESHOLD {
                difference_series_second(ks, kp, r)
            } else {
                let gs = es * C64::new(3.0 - ks * ks * r * r, -3.0 * ks * r);
                let gp = ep * C64::new(3.0 - kp * kp * r * r, -3.0 * kp * r);
                let hs = es * C64::new(1.0, -ks * r) * (ks * ks);
                let hp = ep * C64::new(1.0, -kp * r) * (kp * kp);
                let ddd1 = (ep * (kp * kp * kp) - es * (ks * ks * ks)) * C64::new(0.0, 1.0)
                    / (ks2 * r * r)
                    + (es * ks2 - ep * (kp * kp)) * 5.0 / (ks2 * r * r * r)
                    + (fs - fp) * 12.0 / (ks2 * r.powi(5));
                let ddd2 = (es * (ks2 * ks2) - ep * (kp * kp * kp * kp)) / (ks2 * r)
                    - (hs - hp) * 5.0 / (ks2 * r * r * r)
                    + (gs - gp) * 12.0 / (ks2 * r.powi(5));
                (ddd1, ddd2)
            };
            // second derivative of the singular term exp(i ks r)/r
            let sing2 = es * C64::new(-ks * ks, 0.0) / r - fs * 2.0 / (r * r * r);
            KernelScalars2 {
                base,
                app: (sing2 + ddd1) * c4,
                bpp: ddd2 * c4,
            }
        }
    }
}

/// Termwise second derivative of the difference-kernel series.
fn difference_series_second(ks: f64, kp: f64, r: f64) -> (C64, C64) {
    let ks2 = ks * ks;
    let mut ddd1 = C64::ZERO;
    let mut ddd2 = C64::ZERO;
    let ius = C64::new(0.0, ks);
    let iup = C64::new(0.0, kp);
    let mut pow_s = ius * ius;
    let mut pow_p = iup * iup;
    let mut factorial = 2.0;
    for n in 2..9u32 {
        let nf = n as f64;
        let diff = pow_s - pow_p;
        let rpow = r.powi(n as i32 - 5);
        let base = diff / (ks2 * factorial);
        ddd1 += base * (nf - 1.0) * (nf - 3.0) * (nf - 4.0) * rpow;
        ddd2 += base * (nf - 1.0) * (nf - 3.0) * (nf - 3.0) * (nf - 4.0) * rpow;
        pow_s *= ius;
        pow_p *= iup;
        factorial *= nf + 1.0;
    }
    (ddd1, ddd2)
}

/// Coefficients a, b, a', b' at distance r.
pub fn kernel_scalars(medium: &ElasticMedium, r: f64, mode: KernelMode) -> KernelScalars {
    let c4 = 1.0 / (4.0 * std::f64::consts::PI * medium.mu);
    match mode {
        KernelMode::Static => {
            let g2 = medium.mu / (medium.lambda + 2.0 * medium.mu);
            let a = C64::new(c4 * (1.0 + g2) / (2.0 * r), 0.0);
            let b = C64::new(c4 * (1.0 - g2) / (2.0 * r), 0.0);
            let ap = C64::new(-c4 * (1.0 + g2) / (2.0 * r * r), 0.0);
            let bp = C64::new(-c4 * (1.0 - g2) / (2.0 * r * r), 0.0);
            KernelScalars { a, b, ap, bp, r }
        }
        KernelMode::Dynamic => {
            let ks = medium.kappa_s();
            let kp = medium.kappa_p();
            let es = C64::new(0.0, ks * r).exp();
            let singular = es / r;
            let dsingular = es * C64::new(-1.0, ks * r) / (r * r);
            let (d1, dd1, d2, dd2) = if ks * r < SERIES_THRESHOLD {
                difference_series(ks, kp, r)
            } else {
                difference_exact(ks, kp, r, es)
            };
            KernelScalars {
                a: (singular + d1) * c4,
                ap: (dsingular + dd1) * c4,
                b: d2 * c4,
                bp: dd2 * c4,
                r,
            }
        }
    }
}

/// Exact closed form of the difference-kernel contributions.
fn difference_exact(ks: f64, kp: f64, r: f64, es: C64) -> (C64, C64, C64, C64) {
    let ep = C64::new(0.0, kp * r).exp();
    let ks2r3 = ks * ks * r * r * r;
    let ks2r4 = ks2r3 * r;
    let fs = es * C64::new(-1.0, ks * r); // E_s (i ks r - 1)
    let fp = ep * C64::new(-1.0, kp * r);
    let gs = es * C64::new(3.0 - ks * ks * r * r, -3.0 * ks * r);
    let gp = ep * C64::new(3.0 - kp * kp * r * r, -3.0 * kp * r);
    let d1 = (fs - fp) / ks2r3;
    let d2 = (gs - gp) / ks2r3;
    // d/dr (E (i k r - 1)) = -k^2 r E ; d/dr (E (3 - 3 i k r - k^2 r^2)) = k^2 r E (1 - i k r)
    let dd1 = (ep * (kp * kp) - es * (ks * ks)) / (ks * ks * r * r) - (fs - fp) * 3.0 / ks2r4;
    let hs = es * C64::new(1.0, -ks * r) * (ks * ks);
    let hp = ep * C64::new(1.0, -kp * r) * (kp * kp);
    let dd2 = (hs - hp) / (ks * ks * r * r) - (gs - gp) * 3.0 / ks2r4;
    (d1, dd1, d2, dd2)
}

/// Series evaluation: with u = i k r,
///   (E_s(u_s - 1) - E_p(u_p - 1))           = sum_{n>=2} (n-1)   (u_s^n - u_p^n)/n!
///   (E_s(3-3u_s+u_s^2) - E_p(3-3u_p+u_p^2)) = sum_{n>=2} (n-1)(n-3)(u_s^n - u_p^n)/n!
/// divided by kappa_s^2 r^3; six terms cover kappa r < 1e-3 to machine
/// precision.
fn difference_series(ks: f64, kp: f64, r: f64) -> (C64, C64, C64, C64) {
    let ks2 = ks * ks;
    let mut d1 = C64::ZERO;
    let mut dd1 = C64::ZERO;
    let mut d2 = C64::ZERO;
    let mut dd2 = C64::ZERO;
    let ius = C64::new(0.0, ks);
    let iup = C64::new(0.0, kp);
    let mut pow_s = ius * ius; // (i ks)^n at n = 2
    let mut pow_p = iup * iup;
    let mut factorial = 2.0;
    for n in 2..8u32 {
        let nf = n as f64;
        let diff = pow_s - pow_p; // (i ks)^n - (i kp)^n
        let rpow = r.powi(n as i32 - 3);
        let rpow_m1 = r.powi(n as i32 - 4);
        let base = diff / (ks2 * factorial);
        d1 += base * (nf - 1.0) * rpow;
        dd1 += base * (nf - 1.0) * (nf - 3.0) * rpow_m1;
        d2 += base * (nf - 1.0) * (nf - 3.0) * rpow;
        dd2 += base * (nf - 1.0) * (nf - 3.0) * (nf - 3.0) * rpow_m1;
        pow_s *= ius;
        pow_p *= iup;
        factorial *= nf + 1.0;
    }
    (d1, dd1, d2, dd2)
}

fn separation(x: &RVec3, y: &RVec3) -> Result<(f64, RVec3), MediumError> {
    let z = x - y;
    let r = z.norm();
    if r <= SINGULAR_RTOL * (1.0 + x.norm() + y.norm()) {
        return Err(MediumError::SingularEvaluation);
    }
    Ok((r, z / r))
}

/// Kupradze tensor Phi(x, y).
pub fn fundamental_solution(
    medium: &ElasticMedium,
    x: &RVec3,
    y: &RVec3,
) -> Result<CMat3, MediumError> {
    let (r, zh) = separation(x, y)?;
    let s = kernel_scalars(medium, r, KernelMode::Dynamic);
    Ok(phi_from_scalars(&s, &zh))
}

/// Assemble Phi = a I + b zh zh^T from precomputed coefficients.
pub fn phi_from_scalars(s: &KernelScalars, zh: &RVec3) -> CMat3 {
    let zc = cvec(zh);
    CMat3::identity() * s.a + zc * zc.transpose() * s.b
}

/// Jet of the field x -> Phi(x, y) q.
pub fn phi_field_jet(
    medium: &ElasticMedium,
    x: &RVec3,
    y: &RVec3,
    q: &RVec3,
) -> Result<FieldJet, MediumError> {
    let (r, zh) = separation(x, y)?;
    let s = kernel_scalars(medium, r, KernelMode::Dynamic);
    let zc = cvec(&zh);
    let qc = cvec(q);
    let zq = zc.dot(&qc); // plain dot, no conjugation wanted on real zh
    let value = qc * s.a + zc * (s.b * zq);
    let b_over_r = s.b / r;
    // J = a' q zh^T + b' (zh.q) zh zh^T + (b/r)[(zh.q) I + zh q^T - 2 (zh.q) zh zh^T]
    let gradient = qc * zc.transpose() * s.ap
        + zc * zc.transpose() * (s.bp * zq - b_over_r * 2.0 * zq)
        + CMat3::identity() * (b_over_r * zq)
        + zc * qc.transpose() * b_over_r;
    Ok(FieldJet::new(value, gradient))
}

/// Traction at x (direction weight m, not necessarily unit) applied to
/// each column of Phi(x, y):
///   T(m, d_x) Phi = [lam (a'+b'+2b/r) + 2 mu b/r] m zh^T
///                 + mu (a'+b/r) [(zh.m) I + zh m^T]
///                 + mu (2b' - 4b/r)(zh.m) zh zh^T
pub fn traction_of_columns_x(
    medium: &ElasticMedium,
    scal: &KernelScalars,
    zh: &RVec3,
    m: &RVec3,
) -> CMat3 {
    let lam = medium.lambda;
    let mu = medium.mu;
    let b_over_r = scal.b / scal.r;
    let zm = zh.dot(m);
    let zc = cvec(zh);
    let mc = cvec(m);
    mc * zc.transpose() * ((scal.ap + scal.bp + b_over_r * 2.0) * lam + b_over_r * (2.0 * mu))
        + (CMat3::identity().scale(zm) + zc * mc.transpose()) * ((scal.ap + b_over_r) * mu)
        + zc * zc.transpose() * ((scal.bp * 2.0 - b_over_r * 4.0) * (zm * mu))
}

/// Traction kernel [T_y Phi(x, y)] with the traction taken at y with
/// normal n_y. Differentiation in y flips the sign of the x-derivative
/// form.
pub fn fundamental_traction(
    medium: &ElasticMedium,
    x: &RVec3,
    y: &RVec3,
    n_y: &RVec3,
) -> Result<CMat3, MediumError> {
    let len = n_y.norm();
    if len == 0.0 {
        return Err(MediumError::InvalidNormal);
    }
    let n = n_y / len;
    let (r, zh) = separation(x, y)?;
    let s = kernel_scalars(medium, r, KernelMode::Dynamic);
    Ok(-traction_of_columns_x(medium, &s, &zh, &n))
}

/// Far-field kernels of the single-layer potential: the pressure and
/// shear amplitudes of int Phi(x, y) psi(y) ds(y) as |x| -> infinity,
///   u_w(x) ~ exp(i kappa_w |x|)/|x| * int K_w(xh, y) psi(y) ds(y).
pub fn far_kernels(medium: &ElasticMedium, xhat: &RVec3, y: &RVec3) -> (CMat3, CMat3) {
    let kp = medium.kappa_p();
    let ks = medium.kappa_s();
    let four_pi = 4.0 * std::f64::consts::PI;
    let xc = cvec(xhat);
    let phase_p = C64::new(0.0, -kp * xhat.dot(y)).exp();
    let phase_s = C64::new(0.0, -ks * xhat.dot(y)).exp();
    let proj = xc * xc.transpose();
    let kp_mat = proj * (phase_p / (four_pi * (medium.lambda + 2.0 * medium.mu)));
    let ks_mat = (CMat3::identity() - proj) * (phase_s / (four_pi * medium.mu));
    (kp_mat, ks_mat)
}

/// Far-field kernels of the double-layer potential, i.e. t[T_y K_w] for
/// the kernels above. Columns of K_w are plane waves in y, so the
/// traction acts in closed form.
pub fn far_traction_kernels(
    medium: &ElasticMedium,
    xhat: &RVec3,
    y: &RVec3,
    n_y: &RVec3,
) -> (CMat3, CMat3) {
    let (kp_mat, ks_mat) = far_kernels(medium, xhat, y);
    let d = -xhat; // propagation direction of exp(-i kappa xh . y)
    let t_p = plane_traction_columns(medium, &kp_mat, &d, n_y, medium.kappa_p());
    let t_s = plane_traction_columns(medium, &ks_mat, &d, n_y, medium.kappa_s());
    (t_p.transpose(), t_s.transpose())
}

/// For a matrix whose column j equals a_j exp(i k d.y) (the phase is
/// already contained in the column values at this y), the traction of
/// column j at y is i k (lam (a_j.d) n + mu ((d.n) a_j + (a_j.n) d)).
fn plane_traction_columns(
    medium: &ElasticMedium,
    cols: &CMat3,
    d: &RVec3,
    n: &RVec3,
    k: f64,
) -> CMat3 {
    let lam = medium.lambda;
    let mu = medium.mu;
    let dc = cvec(d);
    let nc = cvec(n);
    let ik = C64::new(0.0, k);
    let mut out = CMat3::zeros();
    for j in 0..3 {
        let a = CVec3::new(cols[(0, j)], cols[(1, j)], cols[(2, j)]);
        let ad = a.dot(&dc);
        let an = a.dot(&nc);
        let t = (nc * (ad * lam) + (a.scale(d.dot(n)) + dc * an) * C64::new(mu, 0.0)) * ik;
        out.set_column(j, &t);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::{traction, wavenumbers};
    use crate::oracles::fd_jet;

    fn medium() -> ElasticMedium {
        ElasticMedium::new(2.0, 1.0, 1.0, 2.0).unwrap()
    }

    #[test]
    fn fundamental_solution_symmetry() {
        let m = medium();
        let x = RVec3::new(0.3, -0.7, 1.1);
        let y = RVec3::new(-0.2, 0.4, 0.5);
        let phi_xy = fundamental_solution(&m, &x, &y).unwrap();
        let phi_yx = fundamental_solution(&m, &y, &x).unwrap();
        assert!((phi_xy - phi_xy.transpose()).norm() < 1e-15);
        assert!((phi_xy - phi_yx.transpose()).norm() < 1e-15);
    }

    #[test]
    fn coincident_points_raise_singular_error() {
        let m = medium();
        let x = RVec3::new(0.3, 0.3, 0.3);
        assert!(matches!(
            fundamental_solution(&m, &x, &x),
            Err(MediumError::SingularEvaluation)
        ));
    }

    #[test]
    fn series_matches_exact_across_threshold() {
        let m = medium();
        let ks = m.kappa_s();
        // compare both evaluations at a radius near the switch
        for &r in &[4.9e-4 / ks, 5.1e-4 / ks, 2.0e-3 / ks] {
            let (d1s, dd1s, d2s, dd2s) = difference_series(ks, m.kappa_p(), r);
            let es = C64::new(0.0, ks * r).exp();
            let (d1e, dd1e, d2e, dd2e) = difference_exact(ks, m.kappa_p(), r, es);
            assert!((d1s - d1e).norm() <= 1e-8 * d1e.norm(), "d1 at r={r}");
            assert!((d2s - d2e).norm() <= 1e-8 * d2e.norm(), "d2 at r={r}");
            assert!((dd1s - dd1e).norm() <= 1e-6 * dd1e.norm().max(1.0), "dd1 at r={r}");
            assert!((dd2s - dd2e).norm() <= 1e-6 * dd2e.norm().max(1.0), "dd2 at r={r}");
        }
    }

    #[test]
    fn hessian_term_matches_finite_differences_near_origin() {
        // The difference kernel is smooth; check the assembled Hessian
        // term of Phi against central differences of the scalar kernel
        // at r = 1e-3.
        let m = medium();
        let (kp, ks) = wavenumbers(&m);
        let scalar = |p: RVec3| -> C64 {
            let r = p.norm();
            (C64::new(0.0, ks * r).exp() - C64::new(0.0, kp * r).exp())
                / C64::new(4.0 * std::f64::consts::PI * r, 0.0)
        };
        let z = RVec3::new(1e-3, 0.0, 0.0) * std::f64::consts::FRAC_1_SQRT_2;
        let z = z + RVec3::new(0.0, 1e-3, 0.0) * std::f64::consts::FRAC_1_SQRT_2;
        let hess_at = |h: f64| {
            let mut hess = CMat3::zeros();
            for i in 0..3 {
                for j in 0..3 {
                    let mut ei = RVec3::zeros();
                    ei[i] = h;
                    let mut ej = RVec3::zeros();
                    ej[j] = h;
                    let v = if i == j {
                        (scalar(z + ei) - scalar(z) * 2.0 + scalar(z - ei)) / C64::new(h * h, 0.0)
                    } else {
                        (scalar(z + ei + ej) - scalar(z + ei - ej) - scalar(z - ei + ej)
                            + scalar(z - ei - ej))
                            / C64::new(4.0 * h * h, 0.0)
                    };
                    hess[(i, j)] = v;
                }
            }
            hess
        };
        // The scalar is a difference of two O(1/r) kernels, so plain
        // stencils bottom out near 1e-5 relative; one Richardson step at
        // this h reaches well below the 1e-6 target.
        let h = 3.2e-5;
        let hess = (hess_at(0.5 * h).scale(4.0) - hess_at(h)).scale(1.0 / 3.0);
        // Phi = (1/mu)[ g_s I + (1/ks^2) Hess ] ; isolate the Hessian term.
        let x = z;
        let y = RVec3::zeros();
        let phi = fundamental_solution(&m, &x, &y).unwrap();
        let r = z.norm();
        let gs = C64::new(0.0, ks * r).exp() / C64::new(4.0 * std::f64::consts::PI * r, 0.0);
        let hess_from_phi = (phi - CMat3::identity() * (gs / m.mu)) * C64::new(m.mu * ks * ks, 0.0);
        let rel = (hess_from_phi - hess).norm() / hess.norm();
        assert!(rel < 1e-6, "relative Hessian error {rel}");
    }

    #[test]
    fn traction_kernel_matches_fd_jets() {
        let m = medium();
        let y = RVec3::new(0.1, -0.05, 0.2);
        let x = y + RVec3::new(0.3, 0.3, 0.2).normalize() * 0.5;
        let n_y = RVec3::new(0.2, 0.9, -0.1).normalize();
        let t = fundamental_traction(&m, &x, &y, &n_y).unwrap();
        for j in 0..3 {
            let mut q = RVec3::zeros();
            q[j] = 1.0;
            // column j as a function of y, traction via FD jet at y
            let eval = |p: &RVec3| {
                let phi = fundamental_solution(&m, &x, p).unwrap();
                CVec3::new(phi[(0, j)], phi[(1, j)], phi[(2, j)])
            };
            let jet = fd_jet(&eval, &y, 1e-5);
            let tj = traction(&jet, &n_y, &m).unwrap();
            let col = CVec3::new(t[(0, j)], t[(1, j)], t[(2, j)]);
            let rel = (tj - col).norm() / col.norm();
            assert!(rel < 1e-6, "column {j} relative error {rel}");
        }
    }

    #[test]
    fn traction_kernels_are_mutual_transposes() {
        // The K' kernel [T_x Phi(x,y)] equals the transpose of the K
        // kernel t[T_x Phi(y,x)] with the roles of x and y swapped;
        // checked on random pairs.
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let m = medium();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10 {
            let mut v =
                || RVec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let x = v();
            let mut y = v();
            if (x - y).norm() < 0.3 {
                y += RVec3::new(1.0, 1.0, 1.0);
            }
            let n = v().normalize();
            // K' kernel: traction at x with normal n
            let (r, zh) = separation(&x, &y).unwrap();
            let s = kernel_scalars(&m, r, KernelMode::Dynamic);
            let kprime = traction_of_columns_x(&m, &s, &zh, &n);
            // K kernel at (y, x): transpose of the traction on the
            // second argument (= x) with normal n
            let k_swapped = fundamental_traction(&m, &y, &x, &n).unwrap().transpose();
            let rel = (kprime - k_swapped.transpose()).norm() / kprime.norm();
            assert!(rel < 1e-10, "adjoint relation violated: {rel}");
        }
    }

    #[test]
    fn navier_residual_of_columns_is_small() {
        // Finite-difference Navier residual of Phi columns away from the
        // diagonal, relative to the local field size.
        let m = medium();
        let y = RVec3::zeros();
        for &r in &[0.3, 1.0, 3.0] {
            let x = RVec3::new(0.36, -0.48, 0.8).normalize() * r;
            for j in 0..3 {
                let eval = |p: &RVec3| {
                    let phi = fundamental_solution(&m, p, &y).unwrap();
                    CVec3::new(phi[(0, j)], phi[(1, j)], phi[(2, j)])
                };
                let res = crate::oracles::fd_navier_residual(&eval, &m, &x, 1e-4);
                let scale = eval(&x).norm() * m.rho * m.omega * m.omega;
                assert!(res / scale < 1e-5, "residual {res} at r={r}, col {j}");
            }
        }
    }

    #[test]
    fn far_kernel_structure() {
        let m = medium();
        let xhat = RVec3::new(2.0, -1.0, 2.0).normalize();
        let y = RVec3::new(0.3, 0.1, -0.2);
        let (kp, ks) = far_kernels(&m, &xhat, &y);
        let xc = cvec(&xhat);
        // s-kernel rows orthogonal to xhat, p-kernel columns parallel
        assert!((kp * CVec3::new(C64::ONE, C64::ZERO, C64::ZERO)).cross(&xc).norm() < 1e-14);
        assert!((xc.transpose() * ks).norm() < 1e-14);
        let n_y = RVec3::new(0.0, 1.0, 0.0);
        let (dp, ds) = far_traction_kernels(&m, &xhat, &y, &n_y);
        let w = CVec3::new(C64::new(0.3, 0.1), C64::new(-0.2, 0.5), C64::new(0.9, -0.4));
        assert!(((dp * w).cross(&xc)).norm() < 1e-13 * (dp * w).norm().max(1e-30));
        assert!((dp * w).norm() > 0.0);
        assert!((xc.transpose() * (ds * w)).norm() < 1e-13 * (ds * w).norm());
    }
}
