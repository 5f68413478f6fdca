//! Trivariate polynomials and real solid harmonics.
//!
//! Radial profiles and perturbation fields are stored as polynomials in
//! the ambient coordinates. Restricted to the unit sphere these give
//! exact values, gradients and Hessians, which is all the chart
//! calculus needs; the choice of polynomial extension off the sphere is
//! immaterial as long as it is used consistently.

use crate::{RMat3, RVec3};

/// Sparse trivariate polynomial, sum of coeff * x^a y^b z^c.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly3 {
    terms: Vec<(u8, u8, u8, f64)>,
}

impl Poly3 {
    pub fn zero() -> Self {
        Poly3 { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Poly3 {
            terms: vec![(0, 0, 0, c)],
        }
    }

    pub fn monomial(a: u8, b: u8, c: u8, coeff: f64) -> Self {
        Poly3 {
            terms: vec![(a, b, c, coeff)],
        }
    }

    fn compress(mut self) -> Self {
        self.terms.sort_by_key(|t| (t.0, t.1, t.2));
        let mut out: Vec<(u8, u8, u8, f64)> = Vec::with_capacity(self.terms.len());
        for t in self.terms {
            if let Some(last) = out.last_mut() {
                if (last.0, last.1, last.2) == (t.0, t.1, t.2) {
                    last.3 += t.3;
                    continue;
                }
            }
            out.push(t);
        }
        out.retain(|t| t.3 != 0.0);
        Poly3 { terms: out }
    }

    pub fn add(&self, other: &Poly3) -> Poly3 {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Poly3 { terms }.compress()
    }

    pub fn scale(&self, f: f64) -> Poly3 {
        Poly3 {
            terms: self.terms.iter().map(|&(a, b, c, v)| (a, b, c, v * f)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly3) -> Poly3 {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(a1, b1, c1, v1) in &self.terms {
            for &(a2, b2, c2, v2) in &other.terms {
                terms.push((a1 + a2, b1 + b2, c1 + c2, v1 * v2));
            }
        }
        Poly3 { terms }.compress()
    }

    pub fn eval(&self, p: &RVec3) -> f64 {
        let mut acc = 0.0;
        for &(a, b, c, v) in &self.terms {
            acc += v * p.x.powi(a as i32) * p.y.powi(b as i32) * p.z.powi(c as i32);
        }
        acc
    }

    pub fn gradient(&self, p: &RVec3) -> RVec3 {
        let mut g = RVec3::zeros();
        for &(a, b, c, v) in &self.terms {
            let (a, b, c) = (a as i32, b as i32, c as i32);
            if a > 0 {
                g.x += v * a as f64 * p.x.powi(a - 1) * p.y.powi(b) * p.z.powi(c);
            }
            if b > 0 {
                g.y += v * b as f64 * p.x.powi(a) * p.y.powi(b - 1) * p.z.powi(c);
            }
            if c > 0 {
                g.z += v * c as f64 * p.x.powi(a) * p.y.powi(b) * p.z.powi(c - 1);
            }
        }
        g
    }

    pub fn hessian(&self, p: &RVec3) -> RMat3 {
        let mut h = RMat3::zeros();
        for &(a, b, c, v) in &self.terms {
            let (a, b, c) = (a as i32, b as i32, c as i32);
            let pw = |e: i32, base: f64| if e >= 0 { base.powi(e) } else { 0.0 };
            if a >= 2 {
                h[(0, 0)] += v * (a * (a - 1)) as f64 * pw(a - 2, p.x) * pw(b, p.y) * pw(c, p.z);
            }
            if b >= 2 {
                h[(1, 1)] += v * (b * (b - 1)) as f64 * pw(a, p.x) * pw(b - 2, p.y) * pw(c, p.z);
            }
            if c >= 2 {
                h[(2, 2)] += v * (c * (c - 1)) as f64 * pw(a, p.x) * pw(b, p.y) * pw(c - 2, p.z);
            }
            if a >= 1 && b >= 1 {
                let m = v * (a * b) as f64 * pw(a - 1, p.x) * pw(b - 1, p.y) * pw(c, p.z);
                h[(0, 1)] += m;
                h[(1, 0)] += m;
            }
            if a >= 1 && c >= 1 {
                let m = v * (a * c) as f64 * pw(a - 1, p.x) * pw(b, p.y) * pw(c - 1, p.z);
                h[(0, 2)] += m;
                h[(2, 0)] += m;
            }
            if b >= 1 && c >= 1 {
                let m = v * (b * c) as f64 * pw(a, p.x) * pw(b - 1, p.y) * pw(c - 1, p.z);
                h[(1, 2)] += m;
                h[(2, 1)] += m;
            }
        }
        h
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|i| i as f64).product::<f64>().max(1.0)
}

/// Coefficients of the Legendre polynomial P_l, index = power.
fn legendre_coeffs(l: u32) -> Vec<f64> {
    let mut p_prev = vec![1.0];
    if l == 0 {
        return p_prev;
    }
    let mut p = vec![0.0, 1.0];
    for n in 1..l {
        // (n+1) P_{n+1} = (2n+1) c P_n - n P_{n-1}
        let mut next = vec![0.0; n as usize + 2];
        for (k, &v) in p.iter().enumerate() {
            next[k + 1] += (2 * n + 1) as f64 * v;
        }
        for (k, &v) in p_prev.iter().enumerate() {
            next[k] -= n as f64 * v;
        }
        for v in next.iter_mut() {
            *v /= (n + 1) as f64;
        }
        p_prev = p;
        p = next;
    }
    p
}

fn differentiate(coeffs: &[f64], times: u32) -> Vec<f64> {
    let mut c = coeffs.to_vec();
    for _ in 0..times {
        let mut next = vec![0.0; c.len().saturating_sub(1).max(1)];
        for (k, &v) in c.iter().enumerate().skip(1) {
            next[k - 1] = v * k as f64;
        }
        if c.len() <= 1 {
            next = vec![0.0];
        }
        c = next;
    }
    c
}

/// (x^2 + y^2 + z^2)^e expanded into monomials.
fn radius_power(e: u32) -> Poly3 {
    let mut out = Poly3::constant(1.0);
    let r2 = Poly3 {
        terms: vec![(2, 0, 0, 1.0), (0, 2, 0, 1.0), (0, 0, 2, 1.0)],
    };
    for _ in 0..e {
        out = out.mul(&r2);
    }
    out
}

/// Re/Im[(x+iy)^m] as polynomials.
fn sectoral(m: u32, imaginary: bool) -> Poly3 {
    let mut terms = Vec::new();
    for t in 0..=m {
        // i^t contributes to Re when t even, Im when t odd
        let is_im = t % 2 == 1;
        if is_im != imaginary {
            continue;
        }
        let sign = if (t / 2) % 2 == 0 { 1.0 } else { -1.0 };
        terms.push(((m - t) as u8, t as u8, 0u8, sign * binomial(m, t)));
    }
    Poly3 { terms }.compress()
}

/// Real solid harmonic r^l Y_{l,m}(xh) as a homogeneous polynomial.
/// On the unit sphere this evaluates the orthonormal real spherical
/// harmonic (geodesy sign convention, no Condon-Shortley phase).
pub fn real_solid_harmonic(l: u32, m: i32) -> Poly3 {
    let mabs = m.unsigned_abs();
    assert!(mabs <= l, "harmonic order out of range");
    let leg = differentiate(&legendre_coeffs(l), mabs);
    // r^(l-m) * D(z/r) = sum_k d_k z^k (r^2)^((l-m-k)/2)
    let mut zonal = Poly3::zero();
    for (k, &v) in leg.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let rem = l - mabs - k as u32;
        debug_assert!(rem % 2 == 0);
        let term = Poly3::monomial(0, 0, k as u8, v).mul(&radius_power(rem / 2));
        zonal = zonal.add(&term);
    }
    let angular = if m == 0 {
        Poly3::constant(1.0)
    } else {
        sectoral(mabs, m < 0)
    };
    let norm = if m == 0 {
        ((2 * l + 1) as f64 / (4.0 * std::f64::consts::PI)).sqrt()
    } else {
        (2.0 * (2 * l + 1) as f64 / (4.0 * std::f64::consts::PI) * factorial(l - mabs)
            / factorial(l + mabs))
        .sqrt()
    };
    zonal.mul(&angular).scale(norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_values() {
        let y00 = real_solid_harmonic(0, 0);
        assert!((y00.eval(&RVec3::new(0.2, -0.5, 0.8)) - 0.28209479177387814).abs() < 1e-14);

        let y20 = real_solid_harmonic(2, 0);
        // sqrt(5/16pi) (3 z^2 - 1) on the sphere
        let p = RVec3::new(0.0, 0.0, 1.0);
        assert!((y20.eval(&p) - (5.0 / (4.0 * std::f64::consts::PI)).sqrt()).abs() < 1e-14);

        let y22 = real_solid_harmonic(2, 2);
        let p = RVec3::new(1.0, 0.0, 0.0);
        assert!((y22.eval(&p) - (15.0 / (16.0 * std::f64::consts::PI)).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn polynomial_calculus() {
        // d/dx and Hessian of x^2 y + z^3
        let p = Poly3::monomial(2, 1, 0, 1.0).add(&Poly3::monomial(0, 0, 3, 1.0));
        let at = RVec3::new(1.5, -2.0, 0.5);
        let g = p.gradient(&at);
        assert!((g.x - 2.0 * at.x * at.y).abs() < 1e-14);
        assert!((g.y - at.x * at.x).abs() < 1e-14);
        assert!((g.z - 3.0 * at.z * at.z).abs() < 1e-14);
        let h = p.hessian(&at);
        assert!((h[(0, 0)] - 2.0 * at.y).abs() < 1e-14);
        assert!((h[(0, 1)] - 2.0 * at.x).abs() < 1e-14);
        assert!((h[(2, 2)] - 6.0 * at.z).abs() < 1e-14);
    }

    #[test]
    fn solid_harmonics_are_homogeneous_harmonic() {
        // Laplacian of the solid harmonic must vanish identically;
        // check numerically at random points.
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for l in 0..=4u32 {
            for m in -(l as i32)..=(l as i32) {
                let y = real_solid_harmonic(l, m);
                for _ in 0..5 {
                    let p = RVec3::new(
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    );
                    let h = y.hessian(&p);
                    let lap = h[(0, 0)] + h[(1, 1)] + h[(2, 2)];
                    assert!(lap.abs() < 1e-10, "Laplacian of Y_{l}{m} = {lap}");
                }
            }
        }
    }
}
