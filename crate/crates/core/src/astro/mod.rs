//! Orbital mechanics and rigid-body attitude dynamics.

pub mod attitude;
pub mod elements;
pub mod gravity;
pub mod inertia;
pub mod integrate;
pub mod spacecraft;

use thiserror::Error;

pub use attitude::{
    attitude_kinematics, dcm_to_mrp, mrp_relative, mrp_shadow, mrp_switch, mrp_to_dcm, rigid_body_dynamics, tilde,
};
pub use elements::{elem2rv, mean_motion_period, rv2elem, ClassicElements};
pub use gravity::{gravity_accel, GravityBody};
pub use inertia::{check_inertia, InertiaReport, MassProperties, TriangleViolation};
pub use integrate::rk4_step;
pub use spacecraft::{BodyPositions, ExtForceTorque, HubDynamics, Spacecraft, SpacecraftState};

/// Earth gravitational parameter, m³/s².
pub const MU_EARTH: f64 = 3.986004418e14;
/// Earth reference equatorial radius, m.
pub const REQ_EARTH: f64 = 6378136.3;
/// Earth second zonal harmonic.
pub const J2_EARTH: f64 = 1.0826269e-3;
/// Sun gravitational parameter, m³/s².
pub const MU_SUN: f64 = 1.32712440018e20;
/// Astronomical unit, m.
pub const AU: f64 = 1.495978707e11;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AstroError {
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("eccentricity {0} is not elliptic (need 0 <= e < 1)")]
    NotElliptic(f64),
    #[error("rectilinear or degenerate state: |r x v| is zero")]
    Rectilinear,
    #[error("position vector has zero length")]
    ZeroRadius,
    #[error("gravity field needs exactly one central body, found {0}")]
    CentralBodyCount(usize),
    #[error("matrix is not a proper orthonormal rotation (error {0:.3e})")]
    NotOrthonormal(f64),
    #[error("inertia matrix is not symmetric")]
    Asymmetric,
    #[error("inertia matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("integration step must be positive")]
    NonPositiveStep,
    #[error("non-finite state derivative at t = {0} s")]
    NonFinite(f64),
}
