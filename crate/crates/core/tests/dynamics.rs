//! Conservation laws and independent attitude oracles for the hub dynamics.

use nalgebra::{Matrix3, Vector3, Vector4};
use orbitforge::astro::{
    elem2rv, mean_motion_period, mrp_to_dcm, tilde, GravityBody, HubDynamics, MassProperties, SpacecraftState, MU_EARTH,
};
use orbitforge::scenario::reference_orbit;

fn mass(inertia: Matrix3<f64>) -> MassProperties {
    MassProperties { m_hub: 750.0, inertia }
}

fn dcm_gap(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    (a - b).norm()
}

#[test]
fn j2_field_conserves_energy_and_polar_momentum() {
    let mut earth = GravityBody::earth();
    earth.use_j2 = true;
    let bodies = [earth.clone()];
    let hub = HubDynamics::new(&mass(Matrix3::identity() * 100.0), &bodies).unwrap();
    let (r0, v0) = elem2rv(MU_EARTH, &reference_orbit()).unwrap();
    let mut s = SpacecraftState {
        r_cn_n: r0,
        v_cn_n: v0,
        ..Default::default()
    };
    let energy = |s: &SpacecraftState| 0.5 * s.v_cn_n.norm_squared() - earth.potential(&s.r_cn_n);
    let hz = |s: &SpacecraftState| s.r_cn_n.cross(&s.v_cn_n).z;
    let (e0, h0) = (energy(&s), hz(&s));
    let (_, period) = mean_motion_period(MU_EARTH, 7.0e6).unwrap();
    let steps = period.ceil() as usize;
    let mut worst = (0.0f64, 0.0f64);
    for k in 0..steps {
        s = hub.step(&s, k as f64, 1.0).unwrap();
        worst.0 = worst.0.max(((energy(&s) - e0) / e0).abs());
        worst.1 = worst.1.max(((hz(&s) - h0) / h0).abs());
    }
    assert!(worst.0 < 1e-9, "energy drift {:e}", worst.0);
    assert!(worst.1 < 1e-9, "h_z drift {:e}", worst.1);
    // The in-plane momentum is not conserved under J2.
    let h_full = s.r_cn_n.cross(&s.v_cn_n);
    let h_start = r0.cross(&v0);
    assert!((h_full.normalize() - h_start.normalize()).norm() > 1e-6);
}

#[test]
fn torque_free_body_conserves_energy_and_momentum() {
    let inertia = Matrix3::from_diagonal(&Vector3::new(900.0, 800.0, 600.0));
    let hub = HubDynamics::new(&mass(inertia), &[]).unwrap();
    let mut s = SpacecraftState {
        sigma_bn: Vector3::new(0.1, 0.2, -0.3),
        omega_bn_b: Vector3::new(0.05, -0.1, 0.3),
        ..Default::default()
    };
    let t = |s: &SpacecraftState| 0.5 * s.omega_bn_b.dot(&(inertia * s.omega_bn_b));
    // Inertial angular momentum, H_N = [NB] I ω.
    let h_n = |s: &SpacecraftState| mrp_to_dcm(&s.sigma_bn).transpose() * (inertia * s.omega_bn_b);
    let (t0, hn0) = (t(&s), h_n(&s));
    let dt = 0.01;
    for k in 0..20_000 {
        s = hub.step(&s, k as f64 * dt, dt).unwrap();
        assert!(s.sigma_bn.norm() <= 1.0 + 1e-12);
    }
    assert!(((t(&s) - t0) / t0).abs() < 1e-10, "energy {}", t(&s));
    assert!((h_n(&s) - hn0).norm() / hn0.norm() < 1e-9, "momentum {}", h_n(&s));
    assert_eq!(s.r_cn_n, Vector3::zeros());
}

#[test]
fn spherical_body_matches_closed_form_rotation() {
    let hub = HubDynamics::new(&mass(Matrix3::identity() * 500.0), &[]).unwrap();
    let sigma0 = Vector3::new(0.3, -0.1, 0.2);
    let omega = Vector3::new(0.02, 0.05, -0.04);
    let mut s = SpacecraftState {
        sigma_bn: sigma0,
        omega_bn_b: omega,
        ..Default::default()
    };
    let dt = 0.1;
    let steps = 2_000;
    let mut switched = false;
    for k in 0..steps {
        let before = s.sigma_bn;
        s = hub.step(&s, k as f64 * dt, dt).unwrap();
        switched |= (s.sigma_bn - before).norm() > 0.5;
    }
    // Constant body rate about a fixed axis: [BN](t) = R(ê, |ω|t) [BN](0).
    let t = steps as f64 * dt;
    let phi = omega.norm() * t;
    let e = omega.normalize();
    let r = Matrix3::identity() * phi.cos() + (1.0 - phi.cos()) * e * e.transpose() - phi.sin() * tilde(&e);
    let expected = r * mrp_to_dcm(&sigma0);
    assert!(
        phi > std::f64::consts::PI,
        "rotation long enough to cross the shadow set"
    );
    assert!(switched, "the MRP switched to its shadow set");
    assert!(dcm_gap(&mrp_to_dcm(&s.sigma_bn), &expected) < 1e-10);
    assert!((s.omega_bn_b - omega).norm() < 1e-15);
}

/// Euler parameter kinematics with Euler's equations, integrated with its
/// own RK4 loop.
fn quaternion_oracle(
    inertia: &Matrix3<f64>,
    beta0: Vector4<f64>,
    omega0: Vector3<f64>,
    dt: f64,
    steps: usize,
) -> Vector4<f64> {
    let inv = inertia.try_inverse().unwrap();
    let f = |b: &Vector4<f64>, w: &Vector3<f64>| {
        let db = 0.5
            * Vector4::new(
                -b[1] * w[0] - b[2] * w[1] - b[3] * w[2],
                b[0] * w[0] - b[3] * w[1] + b[2] * w[2],
                b[3] * w[0] + b[0] * w[1] - b[1] * w[2],
                -b[2] * w[0] + b[1] * w[1] + b[0] * w[2],
            );
        let dw = inv * (-w.cross(&(inertia * w)));
        (db, dw)
    };
    let (mut b, mut w) = (beta0, omega0);
    for _ in 0..steps {
        let (k1b, k1w) = f(&b, &w);
        let (k2b, k2w) = f(&(b + 0.5 * dt * k1b), &(w + 0.5 * dt * k1w));
        let (k3b, k3w) = f(&(b + 0.5 * dt * k2b), &(w + 0.5 * dt * k2w));
        let (k4b, k4w) = f(&(b + dt * k3b), &(w + dt * k3w));
        b += dt / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
        w += dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        b.normalize_mut();
    }
    b
}

fn quaternion_to_dcm(b: &Vector4<f64>) -> Matrix3<f64> {
    let (b0, b1, b2, b3) = (b[0], b[1], b[2], b[3]);
    Matrix3::new(
        b0 * b0 + b1 * b1 - b2 * b2 - b3 * b3,
        2.0 * (b1 * b2 + b0 * b3),
        2.0 * (b1 * b3 - b0 * b2),
        2.0 * (b1 * b2 - b0 * b3),
        b0 * b0 - b1 * b1 + b2 * b2 - b3 * b3,
        2.0 * (b2 * b3 + b0 * b1),
        2.0 * (b1 * b3 + b0 * b2),
        2.0 * (b2 * b3 - b0 * b1),
        b0 * b0 - b1 * b1 - b2 * b2 + b3 * b3,
    )
}

#[test]
fn tumbling_body_matches_quaternion_oracle() {
    let inertia = Matrix3::from_diagonal(&Vector3::new(900.0, 800.0, 600.0));
    let hub = HubDynamics::new(&mass(inertia), &[]).unwrap();
    let sigma0 = Vector3::new(0.1, 0.2, -0.3);
    let omega0 = Vector3::new(0.001, -0.01, 0.03);
    // σ → β with β0 = (1 − σ²)/(1 + σ²), β_i = 2σ_i/(1 + σ²).
    let s2 = sigma0.norm_squared();
    let beta0 = Vector4::new(
        (1.0 - s2) / (1.0 + s2),
        2.0 * sigma0.x / (1.0 + s2),
        2.0 * sigma0.y / (1.0 + s2),
        2.0 * sigma0.z / (1.0 + s2),
    );
    assert!(dcm_gap(&quaternion_to_dcm(&beta0), &mrp_to_dcm(&sigma0)) < 1e-15);

    let dt = 0.01;
    let steps = 60_000;
    let mut s = SpacecraftState {
        sigma_bn: sigma0,
        omega_bn_b: omega0,
        ..Default::default()
    };
    for k in 0..steps {
        s = hub.step(&s, k as f64 * dt, dt).unwrap();
    }
    let beta = quaternion_oracle(&inertia, beta0, omega0, dt, steps);
    let gap = dcm_gap(&mrp_to_dcm(&s.sigma_bn), &quaternion_to_dcm(&beta));
    assert!(gap < 1e-9, "DCM gap {gap:e}");
}
