//! Message payload definitions shared between modules.
//!
//! Every payload is plain value data whose `Default` is the all-zero
//! message that unlinked or unwritten readers observe.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::kernel::SimTime;

/// Spacecraft truth state written by the hub.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SCStatesMsg {
    pub r_bn_n: Vector3<f64>,
    pub v_bn_n: Vector3<f64>,
    pub sigma_bn: Vector3<f64>,
    pub omega_bn_b: Vector3<f64>,
}

/// Commanded body-frame torque.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CmdTorqueBodyMsg {
    pub torque_request_body: Vector3<f64>,
}

/// Force and torque applied to the hub by the external effector.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ForceTorqueMsg {
    pub torque_b: Vector3<f64>,
    pub force_n: Vector3<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NavTransMsg {
    pub time: SimTime,
    pub r_bn_n: Vector3<f64>,
    pub v_bn_n: Vector3<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NavAttMsg {
    pub time: SimTime,
    pub sigma_bn: Vector3<f64>,
    pub omega_bn_b: Vector3<f64>,
}

/// Reference attitude, rate and angular acceleration (inertial components).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AttRefMsg {
    pub sigma_rn: Vector3<f64>,
    pub omega_rn_n: Vector3<f64>,
    pub domega_rn_n: Vector3<f64>,
}

/// Attitude tracking errors and reference motion in body components.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AttGuidMsg {
    pub sigma_br: Vector3<f64>,
    pub omega_br_b: Vector3<f64>,
    pub omega_rn_b: Vector3<f64>,
    pub domega_rn_b: Vector3<f64>,
}

/// Planet state as published by the ephemeris provider.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpicePlanetStateMsg {
    pub planet_name: String,
    pub position_vector: Vector3<f64>,
    pub velocity_vector: Vector3<f64>,
    pub j2000_current: f64,
}

/// Celestial body translational state consumed by guidance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EphemerisMsg {
    pub r_bdy_zero_n: Vector3<f64>,
    pub v_bdy_zero_n: Vector3<f64>,
    pub time_tag: f64,
}
