//! Modified Rodrigues parameter (MRP) attitude math and Euler's rigid-body
//! equation.
//!
//! Direction cosine matrices follow the frame-mapping convention: `[BN]`
//! maps inertial components into body components.

use nalgebra::{Matrix3, Vector3};

use super::AstroError;

/// Cross-product matrix: `tilde(a) * b == a × b`.
pub fn tilde(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// `σ̇ = ¼[(1 − σ²)I₃ + 2[σ×] + 2σσᵀ] ω`
pub fn attitude_kinematics(sigma: &Vector3<f64>, omega: &Vector3<f64>) -> Vector3<f64> {
    let s2 = sigma.norm_squared();
    let b = Matrix3::identity() * (1.0 - s2) + 2.0 * tilde(sigma) + 2.0 * sigma * sigma.transpose();
    0.25 * b * omega
}

/// `ω̇ = I⁻¹(−ω × Iω + L)`
pub fn rigid_body_dynamics(
    inertia: &Matrix3<f64>,
    omega: &Vector3<f64>,
    torque: &Vector3<f64>,
) -> Result<Vector3<f64>, AstroError> {
    let inv = inertia.try_inverse().ok_or(AstroError::NotPositiveDefinite)?;
    Ok(euler_rate(inertia, &inv, omega, torque))
}

pub(crate) fn euler_rate(
    inertia: &Matrix3<f64>,
    inertia_inv: &Matrix3<f64>,
    omega: &Vector3<f64>,
    torque: &Vector3<f64>,
) -> Vector3<f64> {
    inertia_inv * (torque - omega.cross(&(inertia * omega)))
}

/// Alternate MRP set `−σ/|σ|²` of the same attitude. Zero maps to zero.
pub fn mrp_shadow(sigma: &Vector3<f64>) -> Vector3<f64> {
    let s2 = sigma.norm_squared();
    if s2 == 0.0 {
        *sigma
    } else {
        -sigma / s2
    }
}

/// Switches to the shadow set when `|σ| > 1`.
pub fn mrp_switch(sigma: &Vector3<f64>) -> Vector3<f64> {
    if sigma.norm_squared() > 1.0 {
        mrp_shadow(sigma)
    } else {
        *sigma
    }
}

/// `[BN]` for the MRP `σ_BN`.
pub fn mrp_to_dcm(sigma: &Vector3<f64>) -> Matrix3<f64> {
    let s2 = sigma.norm_squared();
    let st = tilde(sigma);
    let d = (1.0 + s2) * (1.0 + s2);
    Matrix3::identity() + (8.0 * st * st - 4.0 * (1.0 - s2) * st) / d
}

/// Shortest-rotation MRP (`|σ| ≤ 1`) of a rotation matrix, via the Euler
/// parameters with non-negative scalar part.
pub fn dcm_to_mrp(c: &Matrix3<f64>) -> Result<Vector3<f64>, AstroError> {
    let ortho_err = (c * c.transpose() - Matrix3::identity()).abs().max();
    let det_err = (c.determinant() - 1.0).abs();
    let err = ortho_err.max(det_err);
    if !(err <= 1e-9) {
        return Err(AstroError::NotOrthonormal(err));
    }

    let tr = c.trace();
    let sq = [
        0.25 * (1.0 + tr),
        0.25 * (1.0 + 2.0 * c[(0, 0)] - tr),
        0.25 * (1.0 + 2.0 * c[(1, 1)] - tr),
        0.25 * (1.0 + 2.0 * c[(2, 2)] - tr),
    ];
    let largest = (0..4).max_by(|&a, &b| sq[a].total_cmp(&sq[b])).unwrap_or(0);
    let mut b = [0.0; 4];
    b[largest] = sq[largest].sqrt();
    let k = 4.0 * b[largest];
    match largest {
        0 => {
            b[1] = (c[(1, 2)] - c[(2, 1)]) / k;
            b[2] = (c[(2, 0)] - c[(0, 2)]) / k;
            b[3] = (c[(0, 1)] - c[(1, 0)]) / k;
        }
        1 => {
            b[0] = (c[(1, 2)] - c[(2, 1)]) / k;
            b[2] = (c[(0, 1)] + c[(1, 0)]) / k;
            b[3] = (c[(2, 0)] + c[(0, 2)]) / k;
        }
        2 => {
            b[0] = (c[(2, 0)] - c[(0, 2)]) / k;
            b[1] = (c[(0, 1)] + c[(1, 0)]) / k;
            b[3] = (c[(1, 2)] + c[(2, 1)]) / k;
        }
        _ => {
            b[0] = (c[(0, 1)] - c[(1, 0)]) / k;
            b[1] = (c[(2, 0)] + c[(0, 2)]) / k;
            b[2] = (c[(1, 2)] + c[(2, 1)]) / k;
        }
    }
    if b[0] < 0.0 {
        b.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(Vector3::new(b[1], b[2], b[3]) / (1.0 + b[0]))
}

/// MRP of frame B relative to frame R given `σ_BN` and `σ_RN`, so that
/// `[BR] = [BN][RN]ᵀ`. The result is mapped to `|σ| ≤ 1`.
pub fn mrp_relative(sigma_bn: &Vector3<f64>, sigma_rn: &Vector3<f64>) -> Vector3<f64> {
    let compose = |b: &Vector3<f64>, r: &Vector3<f64>| {
        let b2 = b.norm_squared();
        let r2 = r.norm_squared();
        let den = 1.0 + b2 * r2 + 2.0 * b.dot(r);
        let num = (1.0 - r2) * b - (1.0 - b2) * r + 2.0 * b.cross(r);
        (num, den)
    };
    let (mut num, mut den) = compose(sigma_bn, sigma_rn);
    if den.abs() < 1e-6 {
        (num, den) = compose(&mrp_shadow(sigma_bn), sigma_rn);
    }
    mrp_switch(&(num / den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn kinematics_at_identity() {
        let sd = attitude_kinematics(&Vector3::zeros(), &Vector3::new(0.4, 0.0, 0.0));
        assert_eq!(sd, Vector3::new(0.1, 0.0, 0.0));
        let sd = attitude_kinematics(&Vector3::new(0.1, -0.2, 0.3), &Vector3::zeros());
        assert_eq!(sd, Vector3::zeros());
    }

    #[test]
    fn rigid_body_cases() {
        let i = Matrix3::from_diagonal(&Vector3::new(900.0, 800.0, 600.0));
        let spin = rigid_body_dynamics(&i, &Vector3::new(0.0, 0.1, 0.0), &Vector3::zeros()).unwrap();
        assert_eq!(spin, Vector3::zeros());
        let kick = rigid_body_dynamics(&i, &Vector3::zeros(), &Vector3::new(0.0, 0.0, 3.0)).unwrap();
        assert!((kick.z - 3.0 / 600.0).abs() < 1e-18);
        assert!(rigid_body_dynamics(&Matrix3::zeros(), &Vector3::zeros(), &Vector3::zeros()).is_err());
    }

    #[test]
    fn shadow_set() {
        let s = mrp_shadow(&Vector3::new(2.0, 0.0, 0.0));
        assert_eq!(s, Vector3::new(-0.5, 0.0, 0.0));
        let unit = Vector3::new(0.6, 0.8, 0.0);
        assert!((mrp_shadow(&unit).norm() - 1.0).abs() < 1e-15);
        let s = Vector3::new(0.3, -1.2, 0.7);
        assert!((mrp_shadow(&mrp_shadow(&s)) - s).norm() < 1e-15);
        assert_eq!(mrp_shadow(&Vector3::zeros()), Vector3::zeros());
        // Both sets describe the same rotation.
        assert!((mrp_to_dcm(&s) - mrp_to_dcm(&mrp_shadow(&s))).abs().max() < 1e-14);
    }

    #[test]
    fn dcm_of_principal_rotation() {
        // Rotation of the frame by θ about x: [BN] = [[1,0,0],[0,c,s],[0,−s,c]]
        let th: f64 = 0.7;
        let sigma = Vector3::new((th / 4.0).tan(), 0.0, 0.0);
        let c = mrp_to_dcm(&sigma);
        let expected = Matrix3::new(1.0, 0.0, 0.0, 0.0, th.cos(), th.sin(), 0.0, -th.sin(), th.cos());
        assert!((c - expected).abs().max() < 1e-15);
    }

    #[test]
    fn dcm_to_mrp_cases() {
        assert_eq!(dcm_to_mrp(&Matrix3::identity()).unwrap(), Vector3::zeros());
        let flip = Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0));
        let s = dcm_to_mrp(&flip).unwrap();
        assert!((s - Vector3::new(1.0, 0.0, 0.0)).norm() < 1e-15);
        assert!(dcm_to_mrp(&(Matrix3::identity() * 1.01)).is_err());
        let reflect = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        assert!(dcm_to_mrp(&reflect).is_err());
    }

    #[test]
    fn dcm_round_trip_all_branches() {
        let cases = [
            Vector3::new(0.1, 0.2, -0.3),
            Vector3::new(0.95, 0.1, 0.0),
            Vector3::new(0.0, -0.97, 0.1),
            Vector3::new(0.05, 0.1, 0.98),
            Vector3::new(0.0, 0.0, 0.0),
        ];
        for s in cases {
            let back = dcm_to_mrp(&mrp_to_dcm(&s)).unwrap();
            assert!((back - s).norm() < 1e-12, "{s} -> {back}");
        }
        // 180° about an oblique axis lands on the unit sphere.
        let axis = Vector3::new(1.0, 2.0, 2.0).normalize();
        let c = mrp_to_dcm(&(axis * (PI / 4.0).tan()));
        let s = dcm_to_mrp(&c).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
        assert!((mrp_to_dcm(&s) - c).abs().max() < 1e-12);
    }

    #[test]
    fn relative_identities() {
        let s = Vector3::new(0.2, -0.4, 0.1);
        assert!(mrp_relative(&s, &s).norm() < 1e-16);
        assert_eq!(mrp_relative(&s, &Vector3::zeros()), s);
    }

    #[test]
    fn relative_matches_dcm_product() {
        let pairs = [
            (Vector3::new(0.2, -0.4, 0.1), Vector3::new(-0.3, 0.5, 0.6)),
            (Vector3::new(0.9, 0.1, 0.0), Vector3::new(-0.9, -0.1, 0.0)),
            (Vector3::new(0.0, 0.0, 1.0), Vector3::new(0.0, 0.0, -1.0)),
        ];
        for (bn, rn) in pairs {
            let br = mrp_relative(&bn, &rn);
            assert!(br.norm_squared() <= 1.0 + 1e-15);
            let oracle = mrp_to_dcm(&bn) * mrp_to_dcm(&rn).transpose();
            assert!((mrp_to_dcm(&br) - oracle).abs().max() < 1e-12, "{bn} {rn}");
        }
    }
}
