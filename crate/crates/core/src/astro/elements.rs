//! Classical orbital elements and their conversion to inertial state vectors.

use std::f64::consts::TAU;

use nalgebra::{Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use super::AstroError;

/// Eccentricity below which ω is undefined and set to zero.
const E_DEGENERATE: f64 = 1e-12;
/// Inclination (or π − i) below which Ω is undefined and set to zero.
const I_DEGENERATE: f64 = 1e-12;

/// Keplerian elements of an elliptic orbit. Lengths in m, angles in rad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicElements {
    pub a: f64,
    pub e: f64,
    pub i: f64,
    /// Right ascension of the ascending node, Ω.
    pub raan: f64,
    /// Argument of periapsis, ω.
    pub argp: f64,
    /// True anomaly, f.
    pub f: f64,
}

impl ClassicElements {
    pub fn semi_latus_rectum(&self) -> f64 {
        self.a * (1.0 - self.e * self.e)
    }

    /// Orbit radius from the conic equation.
    pub fn radius(&self) -> f64 {
        self.semi_latus_rectum() / (1.0 + self.e * self.f.cos())
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_two_pi(angle: f64) -> f64 {
    let w = angle.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Mean motion `n = sqrt(mu / a³)` in rad/s and period `T = 2π / n` in s.
pub fn mean_motion_period(mu: f64, a: f64) -> Result<(f64, f64), AstroError> {
    if !(mu > 0.0) {
        return Err(AstroError::NonPositive("gravitational parameter"));
    }
    if !(a > 0.0) {
        return Err(AstroError::NonPositive("semi-major axis"));
    }
    let n = (mu / (a * a * a)).sqrt();
    Ok((n, TAU / n))
}

/// Inertial position and velocity from classical elements via the perifocal
/// frame and a 3-1-3 rotation by (Ω, i, ω).
pub fn elem2rv(mu: f64, oe: &ClassicElements) -> Result<(Vector3<f64>, Vector3<f64>), AstroError> {
    if !(mu > 0.0) {
        return Err(AstroError::NonPositive("gravitational parameter"));
    }
    if !(oe.a > 0.0) {
        return Err(AstroError::NonPositive("semi-major axis"));
    }
    if !(0.0..1.0).contains(&oe.e) {
        return Err(AstroError::NotElliptic(oe.e));
    }
    let p = oe.semi_latus_rectum();
    let (sf, cf) = oe.f.sin_cos();
    let r = p / (1.0 + oe.e * cf);
    let vp = (mu / p).sqrt();
    let r_pf = Vector3::new(r * cf, r * sf, 0.0);
    let v_pf = Vector3::new(-vp * sf, vp * (oe.e + cf), 0.0);

    let q = Rotation3::from_axis_angle(&Vector3::z_axis(), oe.raan)
        * Rotation3::from_axis_angle(&Vector3::x_axis(), oe.i)
        * Rotation3::from_axis_angle(&Vector3::z_axis(), oe.argp);
    Ok((q * r_pf, q * v_pf))
}

/// Classical elements from an inertial state.
///
/// Degenerate geometries follow fixed conventions: circular orbits take
/// ω = 0 and measure f from the ascending node; equatorial orbits take Ω = 0
/// and measure from the inertial x axis.
pub fn rv2elem(mu: f64, r: &Vector3<f64>, v: &Vector3<f64>) -> Result<ClassicElements, AstroError> {
    if !(mu > 0.0) {
        return Err(AstroError::NonPositive("gravitational parameter"));
    }
    let r_mag = r.norm();
    if r_mag == 0.0 {
        return Err(AstroError::ZeroRadius);
    }
    let h = r.cross(v);
    let h_mag = h.norm();
    if h_mag <= 1e-12 * r_mag * v.norm().max(f64::MIN_POSITIVE) || h_mag == 0.0 {
        return Err(AstroError::Rectilinear);
    }
    let h_hat = h / h_mag;

    let v2 = v.norm_squared();
    let inv_a = 2.0 / r_mag - v2 / mu;
    if !(inv_a > 0.0) {
        return Err(AstroError::NotElliptic(f64::NAN));
    }
    let a = 1.0 / inv_a;
    let e_vec = ((v2 - mu / r_mag) * r - r.dot(v) * v) / mu;
    let e = e_vec.norm();
    if e >= 1.0 {
        return Err(AstroError::NotElliptic(e));
    }

    let i = h_hat.z.clamp(-1.0, 1.0).acos();
    let node = Vector3::z().cross(&h);
    let equatorial = i < I_DEGENERATE || (std::f64::consts::PI - i) < I_DEGENERATE;
    let (raan, node_hat) = if equatorial {
        (0.0, Vector3::x())
    } else {
        let n_hat = node.normalize();
        (wrap_two_pi(n_hat.y.atan2(n_hat.x)), n_hat)
    };

    // Signed in-plane angle from `from` to `to` about the orbit normal.
    let angle = |from: &Vector3<f64>, to: &Vector3<f64>| wrap_two_pi(h_hat.dot(&from.cross(to)).atan2(from.dot(to)));

    let (argp, f) = if e < E_DEGENERATE {
        (0.0, angle(&node_hat, r))
    } else {
        (angle(&node_hat, &e_vec), angle(&e_vec, r))
    };

    Ok(ClassicElements { a, e, i, raan, argp, f })
}
