//! Point-mass gravity with optional J2 and third-body perturbations.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{AstroError, J2_EARTH, MU_EARTH, MU_SUN, REQ_EARTH};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GravityBody {
    pub name: String,
    /// Gravitational parameter, m³/s².
    pub mu: f64,
    /// Reference equatorial radius, m.
    pub req: f64,
    pub j2: f64,
    pub is_central: bool,
    pub use_j2: bool,
}

impl GravityBody {
    pub fn earth() -> Self {
        GravityBody {
            name: "earth".into(),
            mu: MU_EARTH,
            req: REQ_EARTH,
            j2: J2_EARTH,
            is_central: true,
            use_j2: false,
        }
    }

    pub fn sun() -> Self {
        GravityBody {
            name: "sun".into(),
            mu: MU_SUN,
            req: 695_700_000.0,
            j2: 0.0,
            is_central: false,
            use_j2: false,
        }
    }

    /// J2 perturbing acceleration at `r` (body-centred, equatorial frame).
    pub fn j2_accel(&self, r: &Vector3<f64>) -> Vector3<f64> {
        let r2 = r.norm_squared();
        let r_mag = r2.sqrt();
        let zr2 = r.z * r.z / r2;
        let k = -1.5 * self.j2 * self.mu * self.req * self.req / (r2 * r2);
        let radial = 1.0 - 5.0 * zr2;
        Vector3::new(
            k * radial * r.x / r_mag,
            k * radial * r.y / r_mag,
            k * (3.0 - 5.0 * zr2) * r.z / r_mag,
        )
    }

    /// Gravitational potential (positive convention, `a = ∇U`) including
    /// J2 when enabled.
    pub fn potential(&self, r: &Vector3<f64>) -> f64 {
        let r_mag = r.norm();
        let mut u = self.mu / r_mag;
        if self.use_j2 {
            let s2 = r.z * r.z / (r_mag * r_mag);
            u -= self.mu / r_mag * self.j2 * (self.req / r_mag).powi(2) * 0.5 * (3.0 * s2 - 1.0);
        }
        u
    }
}

/// Total gravitational acceleration at `r`, measured from the central body.
///
/// `positions[k]` is the position of `bodies[k]` relative to the central
/// body; the central body's own entry is ignored. Non-central bodies add the
/// usual third-body differential term.
pub fn gravity_accel(
    bodies: &[GravityBody],
    positions: &[Vector3<f64>],
    r: &Vector3<f64>,
) -> Result<Vector3<f64>, AstroError> {
    let central: Vec<&GravityBody> = bodies.iter().filter(|b| b.is_central).collect();
    if central.len() != 1 {
        return Err(AstroError::CentralBodyCount(central.len()));
    }
    let r_mag = r.norm();
    if r_mag == 0.0 {
        return Err(AstroError::ZeroRadius);
    }
    let c = central[0];
    let mut accel = -c.mu / (r_mag * r_mag * r_mag) * r;
    if c.use_j2 {
        accel += c.j2_accel(r);
    }
    for (body, pos) in bodies.iter().zip(positions) {
        if body.is_central {
            continue;
        }
        let d = pos - r;
        let d_mag = d.norm();
        let p_mag = pos.norm();
        if d_mag == 0.0 || p_mag == 0.0 {
            return Err(AstroError::ZeroRadius);
        }
        accel += body.mu * (d / d_mag.powi(3) - pos / p_mag.powi(3));
    }
    Ok(accel)
}
