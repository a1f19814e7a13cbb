use geovar::finite_dim::*;
use geovar::lie_core::NewtonConfig;
use nalgebra::{Matrix3, Rotation3, Vector3};

fn euler_rhs(inertia: &Vector3<f64>, w: &Vector3<f64>) -> Vector3<f64> {
    inertia.component_mul(w).cross(w).component_div(inertia)
}

fn rk4(inertia: &Vector3<f64>, w: Vector3<f64>, h: f64) -> Vector3<f64> {
    let k1 = euler_rhs(inertia, &w);
    let k2 = euler_rhs(inertia, &(w + k1 * (h / 2.0)));
    let k3 = euler_rhs(inertia, &(w + k2 * (h / 2.0)));
    let k4 = euler_rhs(inertia, &(w + k3 * h));
    w + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

fn so3_defect(r: &Matrix3<f64>) -> f64 {
    (r.transpose() * r - Matrix3::identity()).amax().max((r.determinant() - 1.0).abs())
}

/// Least-squares slope of `y` against its index.
fn slope(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let xm = (n - 1.0) / 2.0;
    let ym = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, v) in y.iter().enumerate() {
        let dx = i as f64 - xm;
        sxy += dx * (v - ym);
        sxx += dx * dx;
    }
    sxy / sxx
}

#[test]
fn single_step_matches_rk4() {
    let inertia = Vector3::new(1.0, 2.0, 3.0);
    let w0 = Vector3::new(1.0, 0.1, 0.1);
    let h = 1e-4;
    let s = rigid_step(&RigidBodyState::new(w0, inertia), h, &NewtonConfig::default()).unwrap();
    // Ω_{k+1} is the velocity a step later, so compare against one RK4 step.
    let reference = rk4(&inertia, w0, h);
    assert!((s.omega - reference).amax() <= 1e-10, "{:e}", (s.omega - reference).amax());
}

#[test]
fn rigid_body_long_run() {
    let h = 0.01;
    let cfg = NewtonConfig::default();
    let mut s = RigidBodyState::new(Vector3::new(1.0, 0.1, 0.1), Vector3::new(1.0, 2.0, 3.0));
    let p0 = spatial_momentum(&s, h);
    let mut energy = Vec::new();
    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        s = rigid_step(&s, h, &cfg).unwrap();
        worst = worst.max((spatial_momentum(&s, h) - p0).amax());
        energy.push(s.energy());
    }
    assert!(worst <= 1e-10, "momentum drift {worst:e}");
    assert!(so3_defect(&s.r) <= 1e-10);
    let e0 = energy[0];
    let amp = energy.iter().map(|e| (e - e0).abs() / e0).fold(0.0, f64::max);
    assert!(amp < 1e-4, "energy oscillation {amp:e}");
    let t = h * energy.len() as f64;
    assert!((slope(&energy) / h).abs() * t / e0 < 1e-6);
}

#[test]
fn spatial_momentum_small_step_limit() {
    let mut s = RigidBodyState::new(Vector3::new(0.4, -1.0, 0.7), Vector3::new(1.0, 2.0, 3.0));
    s.r = *Rotation3::from_euler_angles(0.3, -0.2, 1.1).matrix();
    let exact = s.r * s.body_momentum();
    let e1: f64 = (spatial_momentum(&s, 1e-6) - exact).amax();
    let e2 = (spatial_momentum(&s, 2e-6) - exact).amax();
    assert!(e1 < 1e-5 && (e2 / e1 - 2.0).abs() < 0.05, "{e1:e} {e2:e}");
}

fn lagrange_top(mgl: f64) -> HeavyTopState<f64> {
    let r = *Rotation3::from_euler_angles(0.4, 0.0, 0.0).matrix();
    HeavyTopState {
        body: RigidBodyState { r, omega: Vector3::new(0.3, -0.2, 3.0), inertia: Vector3::new(1.0, 1.0, 2.0) },
        gamma: r.transpose() * Vector3::z(),
        mass: mgl,
        gravity: 1.0,
        length: 1.0,
        chi: Vector3::z(),
    }
}

#[test]
fn zero_torque_top_is_a_rigid_body() {
    let cfg = NewtonConfig::default();
    let mut top = lagrange_top(0.0);
    let mut body = top.body.clone();
    for _ in 0..50 {
        top = heavy_top_step(&top, 0.05, &cfg).unwrap();
        body = rigid_step(&body, 0.05, &cfg).unwrap();
    }
    assert_eq!(top.body, body);
}

#[test]
fn lagrange_top_long_run() {
    let h = 0.01;
    let cfg = NewtonConfig::default();
    let mut s = lagrange_top(1.0);
    let p0 = spatial_momentum(&s.body, h).z;
    let (mut dp, mut dg) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        s = heavy_top_step(&s, h, &cfg).unwrap();
        dp = dp.max((spatial_momentum(&s.body, h).z - p0).abs());
        dg = dg.max((s.gamma.norm() - 1.0).abs());
    }
    assert!(dp <= 1e-10, "e3 momentum drift {dp:e}");
    assert!(dg <= 1e-12, "|Γ| drift {dg:e}");
    // Γ is the spatial vertical seen from the body.
    assert!((s.body.r * s.gamma - Vector3::z()).amax() < 1e-10);
}
