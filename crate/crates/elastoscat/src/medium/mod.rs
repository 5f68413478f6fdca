//! Physical parameters, incident fields, the elastodynamic fundamental
//! solution and its traction, and far-field kernels.

mod kernels;

pub use kernels::{
    far_kernels, far_traction_kernels, fundamental_solution, fundamental_traction,
    kernel_scalars, kernel_scalars2, phi_field_jet, phi_from_scalars, traction_of_columns_x,
    KernelMode, KernelScalars, KernelScalars2,
};

use crate::{CMat3, CVec3, C64, RVec3};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MediumError {
    #[error("invalid medium: {0}")]
    InvalidMedium(String),
    #[error("singular evaluation: field point coincides with source point")]
    SingularEvaluation,
    #[error("invalid normal: zero length")]
    InvalidNormal,
    #[error("invalid incident field: {0}")]
    InvalidIncident(String),
}

/// Homogeneous isotropic elastic medium at a fixed angular frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticMedium {
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
    pub omega: f64,
}

impl ElasticMedium {
    pub fn new(lambda: f64, mu: f64, rho: f64, omega: f64) -> Result<Self, MediumError> {
        if !(lambda > 0.0) || !(mu > 0.0) {
            return Err(MediumError::InvalidMedium(format!(
                "Lame constants must be positive (lambda={lambda}, mu={mu})"
            )));
        }
        if !(rho > 0.0) {
            return Err(MediumError::InvalidMedium(format!(
                "density must be positive (rho={rho})"
            )));
        }
        if !(omega > 0.0) {
            return Err(MediumError::InvalidMedium(format!(
                "frequency must be positive (omega={omega})"
            )));
        }
        Ok(ElasticMedium {
            lambda,
            mu,
            rho,
            omega,
        })
    }

    /// Longitudinal wavenumber, kappa_p^2 = rho omega^2 / (lambda + 2 mu).
    pub fn kappa_p(&self) -> f64 {
        self.omega * (self.rho / (self.lambda + 2.0 * self.mu)).sqrt()
    }

    /// Transversal wavenumber, kappa_s^2 = rho omega^2 / mu.
    pub fn kappa_s(&self) -> f64 {
        self.omega * (self.rho / self.mu).sqrt()
    }

    /// Impedance coupling weight `alpha * omega * sqrt(rho)`.
    pub fn impedance_weight(&self, alpha: f64) -> f64 {
        alpha * self.omega * self.rho.sqrt()
    }
}

/// Both wavenumbers of a valid medium.
pub fn wavenumbers(medium: &ElasticMedium) -> (f64, f64) {
    (medium.kappa_p(), medium.kappa_s())
}

/// Value and first-derivative data of a vector field at a point.
///
/// `gradient` is the Jacobian with entry `(i, j) = d u_i / d x_j`.
#[derive(Debug, Clone, Copy)]
pub struct FieldJet {
    pub value: CVec3,
    pub gradient: CMat3,
    pub divergence: C64,
    pub curl: CVec3,
}

impl FieldJet {
    /// Builds the jet from value and Jacobian; divergence and curl are
    /// derived so the internal consistency invariants hold by
    /// construction.
    pub fn new(value: CVec3, gradient: CMat3) -> Self {
        let divergence = gradient[(0, 0)] + gradient[(1, 1)] + gradient[(2, 2)];
        let curl = CVec3::new(
            gradient[(2, 1)] - gradient[(1, 2)],
            gradient[(0, 2)] - gradient[(2, 0)],
            gradient[(1, 0)] - gradient[(0, 1)],
        );
        FieldJet {
            value,
            gradient,
            divergence,
            curl,
        }
    }

    pub fn zero() -> Self {
        FieldJet::new(CVec3::zeros(), CMat3::zeros())
    }

    /// Directional derivative du/dn.
    pub fn normal_derivative(&self, n: &RVec3) -> CVec3 {
        self.gradient * crate::cvec(n)
    }
}

/// Alternative traction formulas; they agree on consistent jets and are
/// cross-checked in the tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TractionForm {
    /// sigma(u) n = lambda (div u) n + mu (J + J^T) n
    Stress,
    /// 2 mu M u + (lambda + 2 mu)(div u) n - mu n x curl u
    GunterOne,
    /// mu (du/dn + M u) + (lambda + mu)(div u) n
    GunterTwo,
    /// (lambda + 2 mu) du/dn - lambda M u + (lambda + mu) n x curl u
    GunterThree,
}

fn unit_normal(n: &RVec3) -> Result<RVec3, MediumError> {
    let len = n.norm();
    if len == 0.0 {
        return Err(MediumError::InvalidNormal);
    }
    Ok(n / len)
}

/// Traction derivative T u = sigma(u) n.
pub fn traction(jet: &FieldJet, n: &RVec3, medium: &ElasticMedium) -> Result<CVec3, MediumError> {
    traction_via(jet, n, medium, TractionForm::Stress)
}

pub fn traction_via(
    jet: &FieldJet,
    n: &RVec3,
    medium: &ElasticMedium,
    form: TractionForm,
) -> Result<CVec3, MediumError> {
    let n = unit_normal(n)?;
    let nc = crate::cvec(&n);
    let lam = medium.lambda;
    let mu = medium.mu;
    let dn = jet.normal_derivative(&n);
    let ncurl = nc.cross(&jet.curl);
    Ok(match form {
        TractionForm::Stress => {
            let sym = jet.gradient + jet.gradient.transpose();
            nc * (jet.divergence * lam) + sym * nc * C64::new(mu, 0.0)
        }
        TractionForm::GunterOne => {
            let m = gunter_derivative(jet, &n)?;
            m * C64::new(2.0 * mu, 0.0) + nc * (jet.divergence * (lam + 2.0 * mu))
                - ncurl * C64::new(mu, 0.0)
        }
        TractionForm::GunterTwo => {
            let m = gunter_derivative(jet, &n)?;
            (dn + m) * C64::new(mu, 0.0) + nc * (jet.divergence * (lam + mu))
        }
        TractionForm::GunterThree => {
            let m = gunter_derivative(jet, &n)?;
            dn * C64::new(lam + 2.0 * mu, 0.0) - m * C64::new(lam, 0.0)
                + ncurl * C64::new(lam + mu, 0.0)
        }
    })
}

/// Tangential Gunter derivative M u = du/dn - n div u + n x curl u,
/// equal to J^T n - (div u) n.
pub fn gunter_derivative(jet: &FieldJet, n: &RVec3) -> Result<CVec3, MediumError> {
    let n = unit_normal(n)?;
    let nc = crate::cvec(&n);
    Ok(jet.gradient.transpose() * nc - nc * jet.divergence)
}

/// Incident displacement fields, entire (or source-free away from the
/// source point) solutions of the Navier equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IncidentField {
    /// u(x) = d exp(i kappa_p d.x)
    PressurePlane { direction: RVec3 },
    /// u(x) = q exp(i kappa_s d.x) with q.d = 0
    ShearPlane { direction: RVec3, polarization: RVec3 },
    /// u(x) = Phi(x, x0) q
    PointSource { location: RVec3, strength: RVec3 },
}

impl IncidentField {
    pub fn pressure_plane(direction: RVec3) -> Result<Self, MediumError> {
        let d = unit_normal(&direction)
            .map_err(|_| MediumError::InvalidIncident("zero direction".into()))?;
        Ok(IncidentField::PressurePlane { direction: d })
    }

    pub fn shear_plane(direction: RVec3, polarization: RVec3) -> Result<Self, MediumError> {
        let d = unit_normal(&direction)
            .map_err(|_| MediumError::InvalidIncident("zero direction".into()))?;
        if polarization.norm() == 0.0 {
            return Err(MediumError::InvalidIncident("zero polarization".into()));
        }
        if (polarization.dot(&d)).abs() > 1e-12 * polarization.norm() {
            return Err(MediumError::InvalidIncident(
                "shear polarization must be orthogonal to the direction".into(),
            ));
        }
        Ok(IncidentField::ShearPlane {
            direction: d,
            polarization,
        })
    }

    pub fn point_source(location: RVec3, strength: RVec3) -> Result<Self, MediumError> {
        if strength.norm() == 0.0 {
            return Err(MediumError::InvalidIncident("zero source strength".into()));
        }
        Ok(IncidentField::PointSource { location, strength })
    }

    /// Value and first-derivative jet at `x`.
    pub fn eval(&self, medium: &ElasticMedium, x: &RVec3) -> Result<FieldJet, MediumError> {
        match self {
            IncidentField::PressurePlane { direction: d } => {
                let kp = medium.kappa_p();
                let phase = C64::new(0.0, kp * d.dot(x)).exp();
                let dc = crate::cvec(d);
                let value = dc * phase;
                let gradient = dc * dc.transpose() * (phase * C64::new(0.0, kp));
                Ok(FieldJet::new(value, gradient))
            }
            IncidentField::ShearPlane {
                direction: d,
                polarization: q,
            } => {
                let ks = medium.kappa_s();
                let phase = C64::new(0.0, ks * d.dot(x)).exp();
                let qc = crate::cvec(q);
                let dc = crate::cvec(d);
                let value = qc * phase;
                let gradient = qc * dc.transpose() * (phase * C64::new(0.0, ks));
                Ok(FieldJet::new(value, gradient))
            }
            IncidentField::PointSource { location, strength } => {
                phi_field_jet(medium, x, location, strength)
            }
        }
    }
}

/// Traction of an incident field at a surface point.
pub fn incident_traction(
    field: &IncidentField,
    medium: &ElasticMedium,
    x: &RVec3,
    n: &RVec3,
) -> Result<CVec3, MediumError> {
    let jet = field.eval(medium, x)?;
    traction(&jet, n, medium)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cvec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn medium() -> ElasticMedium {
        ElasticMedium::new(2.0, 1.0, 1.0, 2.0).unwrap()
    }

    #[test]
    fn wavenumbers_match_definitions() {
        let m = ElasticMedium::new(1.0, 1.0, 1.0, 3.0_f64.sqrt()).unwrap();
        assert_relative_eq!(m.kappa_p(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(m.kappa_s(), 3.0_f64.sqrt(), epsilon = 1e-14);

        let m = medium();
        assert_relative_eq!(m.kappa_p(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(m.kappa_s(), 2.0, epsilon = 1e-14);
        assert!(m.kappa_p() < m.kappa_s());
    }

    #[test]
    fn zero_frequency_is_rejected() {
        assert!(matches!(
            ElasticMedium::new(1.0, 1.0, 1.0, 0.0),
            Err(MediumError::InvalidMedium(_))
        ));
        assert!(matches!(
            ElasticMedium::new(-1.0, 1.0, 1.0, 1.0),
            Err(MediumError::InvalidMedium(_))
        ));
    }

    #[test]
    fn traction_of_rigid_motions_vanishes() {
        let m = medium();
        let n = RVec3::new(0.3, -0.5, 0.81).normalize();
        // constant field
        let jet = FieldJet::new(cvec(&RVec3::new(1.0, 2.0, -0.5)), CMat3::zeros());
        assert!(traction(&jet, &n, &m).unwrap().norm() < 1e-15);
        // rigid rotation u = a x x : gradient is antisymmetric
        let a = RVec3::new(0.2, 0.7, -1.0);
        let mut g = CMat3::zeros();
        // u_i = eps_{ijk} a_j x_k -> du_i/dx_k = eps_{ijk} a_j
        g[(0, 1)] = C64::new(-a.z, 0.0);
        g[(0, 2)] = C64::new(a.y, 0.0);
        g[(1, 0)] = C64::new(a.z, 0.0);
        g[(1, 2)] = C64::new(-a.x, 0.0);
        g[(2, 0)] = C64::new(-a.y, 0.0);
        g[(2, 1)] = C64::new(a.x, 0.0);
        let jet = FieldJet::new(CVec3::zeros(), g);
        assert!(traction(&jet, &n, &m).unwrap().norm() < 1e-15);
    }

    #[test]
    fn traction_of_identity_field() {
        // u(x) = x gives T u = (3 lambda + 2 mu) n for any unit n.
        let m = medium();
        let n = RVec3::new(1.0, 2.0, 2.0) / 3.0;
        let jet = FieldJet::new(cvec(&n), CMat3::identity());
        let t = traction(&jet, &n, &m).unwrap();
        let expected = cvec(&n) * C64::new(3.0 * m.lambda + 2.0 * m.mu, 0.0);
        assert!((t - expected).norm() < 1e-14);
    }

    #[test]
    fn gunter_of_identity_field() {
        let n = RVec3::new(0.0, 0.6, 0.8);
        let jet = FieldJet::new(cvec(&n), CMat3::identity());
        let g = gunter_derivative(&jet, &n).unwrap();
        assert!((g + cvec(&n) * C64::new(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn gunter_identity_with_analytic_derivatives() {
        // M u = [grad_G u] n - (div_G u) n where the tangential
        // operators come from the ambient jet: grad_G u_b = P grad u_b,
        // div_G u = tr(P J^T ...). Checked on random polynomial jets at
        // sphere points.
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let mut c = || C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let jet = FieldJet::new(CVec3::new(c(), c(), c()), CMat3::from_fn(|_, _| c()));
            let mut rr = || rng.random_range(-1.0f64..1.0);
            let n = RVec3::new(rr(), rr(), 0.5 + rr().abs()).normalize();
            let nc = cvec(&n);
            let proj = CMat3::identity() - nc * nc.transpose();
            // [grad_G u] has columns P (J^T e_b)
            let tg = proj * jet.gradient.transpose();
            let div_g = tg[(0, 0)] + tg[(1, 1)] + tg[(2, 2)];
            let surface_form = tg * nc - nc * div_g;
            let volume_form = gunter_derivative(&jet, &n).unwrap();
            let scale = jet.gradient.norm().max(1.0);
            assert!(
                (surface_form - volume_form).norm() <= 1e-8 * scale,
                "Gunter identity residual {}",
                (surface_form - volume_form).norm()
            );
        }
    }

    #[test]
    fn plane_wave_jets() {
        let m = medium();
        let d = RVec3::new(0.0, 0.0, 1.0);
        let p = IncidentField::pressure_plane(d).unwrap();
        let jet = p.eval(&m, &RVec3::zeros()).unwrap();
        assert!((jet.value - cvec(&d)).norm() < 1e-15);
        assert!((jet.divergence - C64::new(0.0, m.kappa_p())).norm() < 1e-15);
        assert!(jet.curl.norm() < 1e-15);

        let q = RVec3::new(1.0, 0.0, 0.0);
        let s = IncidentField::shear_plane(d, q).unwrap();
        let jet = s.eval(&m, &RVec3::new(0.3, -0.2, 0.9)).unwrap();
        assert!(jet.divergence.norm() < 1e-14);
    }

    #[test]
    fn shear_polarization_must_be_orthogonal() {
        let d = RVec3::new(0.0, 0.0, 1.0);
        assert!(IncidentField::shear_plane(d, d).is_err());
    }

    #[test]
    fn normals_are_normalized_and_zero_rejected() {
        let m = medium();
        let jet = FieldJet::new(CVec3::zeros(), CMat3::identity());
        let t1 = traction(&jet, &RVec3::new(0.0, 0.0, 2.0), &m).unwrap();
        let t2 = traction(&jet, &RVec3::new(0.0, 0.0, 1.0), &m).unwrap();
        assert!((t1 - t2).norm() < 1e-15);
        assert!(matches!(
            traction(&jet, &RVec3::zeros(), &m),
            Err(MediumError::InvalidNormal)
        ));
    }

    proptest! {
        #[test]
        fn traction_forms_agree(seed in 0u64..400) {
            use rand::prelude::*;
            use rand_chacha::ChaCha8Rng;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut c = || C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let value = CVec3::new(c(), c(), c());
            let gradient = CMat3::from_fn(|_, _| c());
            let jet = FieldJet::new(value, gradient);
            let mut rr = || rng.random_range(-1.0f64..1.0);
            let mut n = RVec3::new(rr(), rr(), rr());
            if n.norm() < 1e-3 { n = RVec3::new(1.0, 0.0, 0.0); }
            n = n.normalize();
            let m = ElasticMedium::new(2.0, 1.0, 1.0, 2.0).unwrap();
            let t0 = traction_via(&jet, &n, &m, TractionForm::Stress).unwrap();
            for form in [TractionForm::GunterOne, TractionForm::GunterTwo, TractionForm::GunterThree] {
                let t = traction_via(&jet, &n, &m, form).unwrap();
                prop_assert!((t - t0).norm() <= 1e-12 * (1.0 + t0.norm()));
            }
        }

        #[test]
        fn jet_divergence_is_trace(seed in 0u64..200) {
            use rand::prelude::*;
            use rand_chacha::ChaCha8Rng;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut c = || C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let gradient = CMat3::from_fn(|_, _| c());
            let jet = FieldJet::new(CVec3::zeros(), gradient);
            let tr = gradient[(0,0)] + gradient[(1,1)] + gradient[(2,2)];
            prop_assert!((jet.divergence - tr).norm() < 1e-15);
        }
    }
}
