//! Rigid spacecraft hub and the external force/torque effector.

use std::rc::Rc;

use nalgebra::{Matrix3, SVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::kernel::{ModuleError, SimTime, SysModel};
use crate::messaging::{InputPort, Message};
use crate::msgs::{CmdTorqueBodyMsg, ForceTorqueMsg, SCStatesMsg};

use super::attitude::{attitude_kinematics, euler_rate, mrp_switch};
use super::gravity::{gravity_accel, GravityBody};
use super::inertia::MassProperties;
use super::integrate::rk4_step;
use super::AstroError;

/// Positions of gravitating bodies relative to the central body.
pub trait BodyPositions {
    fn position(&self, body: &str, t_s: f64) -> Vector3<f64>;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SpacecraftState {
    pub r_cn_n: Vector3<f64>,
    pub v_cn_n: Vector3<f64>,
    pub sigma_bn: Vector3<f64>,
    pub omega_bn_b: Vector3<f64>,
}

type StateVec = SVector<f64, 12>;

impl SpacecraftState {
    fn to_vec(self) -> StateVec {
        let mut x = StateVec::zeros();
        x.fixed_rows_mut::<3>(0).copy_from(&self.r_cn_n);
        x.fixed_rows_mut::<3>(3).copy_from(&self.v_cn_n);
        x.fixed_rows_mut::<3>(6).copy_from(&self.sigma_bn);
        x.fixed_rows_mut::<3>(9).copy_from(&self.omega_bn_b);
        x
    }

    fn from_vec(x: &StateVec) -> Self {
        SpacecraftState {
            r_cn_n: x.fixed_rows::<3>(0).into(),
            v_cn_n: x.fixed_rows::<3>(3).into(),
            sigma_bn: x.fixed_rows::<3>(6).into(),
            omega_bn_b: x.fixed_rows::<3>(9).into(),
        }
    }
}

/// Everything the equations of motion need besides the state itself.
pub struct HubDynamics<'a> {
    pub mass: f64,
    pub inertia: Matrix3<f64>,
    pub inertia_inv: Matrix3<f64>,
    pub bodies: &'a [GravityBody],
    pub ephemeris: Option<&'a dyn BodyPositions>,
    pub torque_b: Vector3<f64>,
    pub force_n: Vector3<f64>,
}

impl<'a> HubDynamics<'a> {
    pub fn new(mass: &MassProperties, bodies: &'a [GravityBody]) -> Result<Self, AstroError> {
        let inertia_inv = mass.inertia.try_inverse().ok_or(AstroError::NotPositiveDefinite)?;
        Ok(HubDynamics {
            mass: mass.m_hub,
            inertia: mass.inertia,
            inertia_inv,
            bodies,
            ephemeris: None,
            torque_b: Vector3::zeros(),
            force_n: Vector3::zeros(),
        })
    }

    pub fn gravity(&self, t: f64, r: &Vector3<f64>) -> Result<Vector3<f64>, AstroError> {
        if self.bodies.is_empty() {
            return Ok(Vector3::zeros());
        }
        let positions: Vec<Vector3<f64>> = self
            .bodies
            .iter()
            .map(|b| match (b.is_central, self.ephemeris) {
                (false, Some(eph)) => eph.position(&b.name, t),
                _ => Vector3::zeros(),
            })
            .collect();
        gravity_accel(self.bodies, &positions, r)
    }

    fn derivative(&self, t: f64, x: &StateVec) -> Result<StateVec, AstroError> {
        let s = SpacecraftState::from_vec(x);
        let accel = self.gravity(t, &s.r_cn_n)? + self.force_n / self.mass;
        let sigma_dot = attitude_kinematics(&s.sigma_bn, &s.omega_bn_b);
        let omega_dot = euler_rate(&self.inertia, &self.inertia_inv, &s.omega_bn_b, &self.torque_b);
        Ok(SpacecraftState {
            r_cn_n: s.v_cn_n,
            v_cn_n: accel,
            sigma_bn: sigma_dot,
            omega_bn_b: omega_dot,
        }
        .to_vec())
    }

    /// One RK4 step of the coupled translational and rotational motion with
    /// force and torque held constant. The attitude is mapped back to
    /// `|σ| ≤ 1` afterwards.
    pub fn step(&self, state: &SpacecraftState, t: f64, dt: f64) -> Result<SpacecraftState, AstroError> {
        let x = rk4_step(|tt, xx| self.derivative(tt, xx), &state.to_vec(), t, dt)?;
        let mut next = SpacecraftState::from_vec(&x);
        next.sigma_bn = mrp_switch(&next.sigma_bn);
        Ok(next)
    }
}

/// Rigid hub propagated at its task rate. Reads the applied force/torque
/// once per step and publishes its state after each update.
pub struct Spacecraft {
    pub tag: String,
    pub mass: MassProperties,
    pub init: SpacecraftState,
    pub gravity: Vec<GravityBody>,
    pub ephemeris: Option<Rc<dyn BodyPositions>>,
    pub force_torque_in_msg: InputPort<ForceTorqueMsg>,
    pub sc_state_out_msg: Message<SCStatesMsg>,
    state: SpacecraftState,
    last_update: Option<SimTime>,
}

impl Spacecraft {
    pub fn new(tag: &str, mass: MassProperties) -> Self {
        Spacecraft {
            tag: tag.to_string(),
            mass,
            init: SpacecraftState::default(),
            gravity: Vec::new(),
            ephemeris: None,
            force_torque_in_msg: InputPort::new("forceTorqueInMsg"),
            sc_state_out_msg: Message::new("scStateOutMsg"),
            state: SpacecraftState::default(),
            last_update: None,
        }
    }

    pub fn state(&self) -> SpacecraftState {
        self.state
    }

    fn publish(&self, time: SimTime) {
        self.sc_state_out_msg.write(
            SCStatesMsg {
                r_bn_n: self.state.r_cn_n,
                v_bn_n: self.state.v_cn_n,
                sigma_bn: self.state.sigma_bn,
                omega_bn_b: self.state.omega_bn_b,
            },
            time,
        );
    }
}

impl SysModel for Spacecraft {
    fn model_tag(&self) -> &str {
        &self.tag
    }

    fn reset(&mut self, _time: SimTime) -> Result<(), ModuleError> {
        if !(self.mass.m_hub > 0.0) {
            return Err(ModuleError::Failed("hub mass must be positive".into()));
        }
        HubDynamics::new(&self.mass, &self.gravity).map_err(|e| ModuleError::Failed(e.to_string()))?;
        self.state = self.init;
        self.state.sigma_bn = mrp_switch(&self.state.sigma_bn);
        self.last_update = None;
        self.sc_state_out_msg.clear();
        Ok(())
    }

    fn update_state(&mut self, time: SimTime) -> Result<(), ModuleError> {
        if let Some(prev) = self.last_update.filter(|&p| time > p) {
            let ft = self.force_torque_in_msg.payload();
            let mut dynamics =
                HubDynamics::new(&self.mass, &self.gravity).map_err(|e| ModuleError::Failed(e.to_string()))?;
            dynamics.ephemeris = self.ephemeris.as_deref();
            dynamics.torque_b = ft.torque_b;
            dynamics.force_n = ft.force_n;
            let dt = (time - prev).as_secs_f64();
            self.state = dynamics
                .step(&self.state, prev.as_secs_f64(), dt)
                .map_err(|e| ModuleError::NonFinite(format!("hub `{}`: {e}", self.tag)))?;
        }
        self.last_update = Some(time);
        self.publish(time);
        Ok(())
    }
}

/// Stages commanded torque (plus any constant bias) for the hub.
pub struct ExtForceTorque {
    pub tag: String,
    pub ext_torque_pnt_b: Vector3<f64>,
    pub ext_force_n: Vector3<f64>,
    pub cmd_torque_in_msg: InputPort<CmdTorqueBodyMsg>,
    pub force_torque_out_msg: Message<ForceTorqueMsg>,
}

impl ExtForceTorque {
    pub fn new(tag: &str) -> Self {
        ExtForceTorque {
            tag: tag.to_string(),
            ext_torque_pnt_b: Vector3::zeros(),
            ext_force_n: Vector3::zeros(),
            cmd_torque_in_msg: InputPort::new("cmdTorqueInMsg"),
            force_torque_out_msg: Message::new("forceTorqueOutMsg"),
        }
    }
}

impl SysModel for ExtForceTorque {
    fn model_tag(&self) -> &str {
        &self.tag
    }

    fn reset(&mut self, _time: SimTime) -> Result<(), ModuleError> {
        self.force_torque_out_msg.clear();
        Ok(())
    }

    fn update_state(&mut self, time: SimTime) -> Result<(), ModuleError> {
        let cmd = self.cmd_torque_in_msg.payload();
        self.force_torque_out_msg.write(
            ForceTorqueMsg {
                torque_b: self.ext_torque_pnt_b + cmd.torque_request_body,
                force_n: self.ext_force_n,
            },
            time,
        );
        Ok(())
    }
}
