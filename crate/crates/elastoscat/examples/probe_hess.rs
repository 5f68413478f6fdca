// scratch probe for the Hessian FD comparison
use elastoscat::medium::*;
use elastoscat::{RVec3, CMat3, C64};

fn main() {
    let m = ElasticMedium::new(2.0, 1.0, 1.0, 2.0).unwrap();
    let (kp, ks) = wavenumbers(&m);
    let scalar = |p: RVec3| -> C64 {
        let r = p.norm();
        (C64::new(0.0, ks * r).exp() - C64::new(0.0, kp * r).exp())
            / C64::new(4.0 * std::f64::consts::PI * r, 0.0)
    };
    let z = RVec3::new(1e-3, 0.0, 0.0) * std::f64::consts::FRAC_1_SQRT_2
        + RVec3::new(0.0, 1e-3, 0.0) * std::f64::consts::FRAC_1_SQRT_2;
    let hess_at = |h: f64| {
        let mut hess = CMat3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let mut ei = RVec3::zeros(); ei[i] = h;
                let mut ej = RVec3::zeros(); ej[j] = h;
                let v = if i == j {
                    (scalar(z + ei) - scalar(z) * 2.0 + scalar(z - ei)) / C64::new(h * h, 0.0)
                } else {
                    (scalar(z + ei + ej) - scalar(z + ei - ej) - scalar(z - ei + ej) + scalar(z - ei - ej)) / C64::new(4.0 * h * h, 0.0)
                };
                hess[(i, j)] = v;
            }
        }
        hess
    };
    for h in [3.2e-5, 1.6e-5, 8e-6, 4e-6, 2e-6, 1e-6] {
        let fd = hess_at(h);
        let rich = (hess_at(0.5*h).scale(4.0) - hess_at(h)).scale(1.0/3.0);
        // kernel side
        let x = z; let y = RVec3::zeros();
        let phi = fundamental_solution(&m, &x, &y).unwrap();
        let r = z.norm();
        let gs = C64::new(0.0, ks * r).exp() / C64::new(4.0 * std::f64::consts::PI * r, 0.0);
        let from_phi = (phi - CMat3::identity() * (gs / m.mu)) * C64::new(m.mu * ks * ks, 0.0);
        println!("h={h:.1e}  |fd|={:.6e} rel(fd)={:.3e} rel(rich)={:.3e}",
            fd.norm(),
            (from_phi - fd).norm() / fd.norm(),
            (from_phi - rich).norm() / rich.norm());
    }
    // What do the scalars look like here?
    let s = kernel_scalars(&m, 1e-3, KernelMode::Dynamic);
    println!("a={:?} b={:?}", s.a, s.b);
    let s2 = kernel_scalars(&m, 0.99e-3/2.0, KernelMode::Dynamic); // series branch
    println!("series branch a={:?} b={:?}", s2.a, s2.b);
}
