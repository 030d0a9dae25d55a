//! Flight software: navigation pass-through, attitude reference generation
//! (inertial and Hill-frame pointing), tracking error and MRP feedback
//! control, plus the mode logic that switches gateway messages between
//! reference sources.

use std::cell::Cell;
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::astro::{check_inertia, dcm_to_mrp, mrp_relative, mrp_switch, mrp_to_dcm};
use crate::kernel::{KernelError, ModuleError, ProcessHandle, SimContainer, SimTime, SysModel};
use crate::messaging::{InputPort, Message, MessagingError};
use crate::msgs::{AttGuidMsg, AttRefMsg, CmdTorqueBodyMsg, EphemerisMsg, NavAttMsg, NavTransMsg, SCStatesMsg};

pub const INERTIAL_POINT_TASK: &str = "inertialPointTask";
pub const HILL_POINT_TASK: &str = "hillPointTask";
pub const TRACKING_ERROR_TASK: &str = "trackingErrorTask";
pub const MRP_FEEDBACK_TASK: &str = "mrpFeedbackTask";

pub const FSW_TASKS: [&str; 4] = [
    INERTIAL_POINT_TASK,
    HILL_POINT_TASK,
    TRACKING_ERROR_TASK,
    MRP_FEEDBACK_TASK,
];

#[derive(Debug, Error)]
pub enum FswError {
    #[error("unknown mode `{0}` (valid modes: standby, inertialPoint, hillPoint)")]
    UnknownMode(String),
    #[error("undefined Hill frame: position and velocity are parallel or zero")]
    UndefinedHillFrame,
    #[error("invalid control gains: {0}")]
    Gains(String),
    #[error("invalid inertia for control: {0}")]
    Inertia(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Messaging(#[from] MessagingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FswMode {
    #[default]
    #[serde(rename = "standby")]
    Standby,
    #[serde(rename = "inertialPoint")]
    InertialPoint,
    #[serde(rename = "hillPoint")]
    HillPoint,
}

impl FswMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FswMode::Standby => "standby",
            FswMode::InertialPoint => "inertialPoint",
            FswMode::HillPoint => "hillPoint",
        }
    }
}

impl fmt::Display for FswMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FswMode {
    type Err = FswError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standby" => Ok(FswMode::Standby),
            "inertialPoint" => Ok(FswMode::InertialPoint),
            "hillPoint" => Ok(FswMode::HillPoint),
            other => Err(FswError::UnknownMode(other.to_string())),
        }
    }
}

/// MRP feedback gains. `ki <= 0` disables integral action; the integral
/// clamp is applied with the magnitude of `integral_limit`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlGains {
    pub k: f64,
    pub ki: f64,
    pub p: f64,
    pub integral_limit: f64,
}

impl Default for ControlGains {
    fn default() -> Self {
        // integral_limit = 2 / Ki * 0.1 with Ki = -1, kept as a magnitude
        ControlGains {
            k: 3.5,
            ki: -1.0,
            p: 30.0,
            integral_limit: 0.2,
        }
    }
}

impl ControlGains {
    pub fn validate(&self) -> Result<(), FswError> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(FswError::Gains(format!("K must be positive, got {}", self.k)));
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(FswError::Gains(format!("P must be positive, got {}", self.p)));
        }
        if !self.ki.is_finite() || !self.integral_limit.is_finite() {
            return Err(FswError::Gains("Ki and integral_limit must be finite".into()));
        }
        Ok(())
    }

    pub fn integral_enabled(&self) -> bool {
        self.ki > 0.0
    }
}

/// Truth pass-through. [`SimpleNav`] optionally adds Gaussian errors on top.
pub fn simple_nav_update(sc: &SCStatesMsg, time: SimTime) -> (NavTransMsg, NavAttMsg) {
    (
        NavTransMsg {
            time,
            r_bn_n: sc.r_bn_n,
            v_bn_n: sc.v_bn_n,
        },
        NavAttMsg {
            time,
            sigma_bn: sc.sigma_bn,
            omega_bn_b: sc.omega_bn_b,
        },
    )
}

/// Hill frame `[HN]` with rows î_r, î_θ, î_h for the relative state.
pub fn hill_frame_dcm(r: &Vector3<f64>, v: &Vector3<f64>) -> Result<Matrix3<f64>, FswError> {
    let rn = r.norm();
    let h = r.cross(v);
    if !(rn > 0.0) || !(h.norm() > 1e-12 * rn * v.norm()) {
        return Err(FswError::UndefinedHillFrame);
    }
    let ir = r / rn;
    let ih = h.normalize();
    let it = ih.cross(&ir);
    Ok(Matrix3::from_rows(&[ir.transpose(), it.transpose(), ih.transpose()]))
}

/// Nadir-pointing reference relative to `planet`.
pub fn hill_point_reference(nav: &NavTransMsg, planet: &EphemerisMsg) -> Result<AttRefMsg, FswError> {
    let r = nav.r_bn_n - planet.r_bdy_zero_n;
    let v = nav.v_bn_n - planet.v_bdy_zero_n;
    let hn = hill_frame_dcm(&r, &v)?;
    let sigma_rn = dcm_to_mrp(&hn).map_err(|_| FswError::UndefinedHillFrame)?;
    let r2 = r.norm_squared();
    let omega_rn_n = r.cross(&v) / r2;
    // d/dt (h / r²) with h constant
    let domega_rn_n = -2.0 * r.dot(&v) / r2 * omega_rn_n;
    Ok(AttRefMsg {
        sigma_rn,
        omega_rn_n,
        domega_rn_n,
    })
}

pub fn inertial_point_reference(sigma_r0n: &Vector3<f64>) -> AttRefMsg {
    AttRefMsg {
        sigma_rn: mrp_switch(sigma_r0n),
        omega_rn_n: Vector3::zeros(),
        domega_rn_n: Vector3::zeros(),
    }
}

pub fn attitude_tracking_error(nav: &NavAttMsg, reference: &AttRefMsg) -> AttGuidMsg {
    let bn = mrp_to_dcm(&nav.sigma_bn);
    let omega_rn_b = bn * reference.omega_rn_n;
    AttGuidMsg {
        sigma_br: mrp_relative(&nav.sigma_bn, &reference.sigma_rn),
        omega_br_b: nav.omega_bn_b - omega_rn_b,
        omega_rn_b,
        domega_rn_b: bn * reference.domega_rn_n,
    }
}

/// One evaluation of the MRP feedback law
///
/// `u = −Kσ − P(δω + Ki z) + ω×Iω + I(ω̇_r − ω×ω_r)`
///
/// where `ω = ω_BN`, `ω_r = ω_RN` (body components) and `z` is the clamped
/// integral of `Kσ`. Returns the torque and the updated integral state.
pub fn mrp_feedback_control(
    guid: &AttGuidMsg,
    gains: &ControlGains,
    inertia: &Matrix3<f64>,
    z: &Vector3<f64>,
    dt: f64,
) -> (Vector3<f64>, Vector3<f64>) {
    let omega_bn = guid.omega_br_b + guid.omega_rn_b;
    let z_next = if gains.integral_enabled() {
        let lim = gains.integral_limit.abs();
        (z + gains.k * guid.sigma_br * dt).map(|c| c.clamp(-lim, lim))
    } else {
        Vector3::zeros()
    };
    let mut rate_term = guid.omega_br_b;
    if gains.integral_enabled() {
        rate_term += gains.ki * z_next;
    }
    let u = -gains.k * guid.sigma_br - gains.p * rate_term
        + omega_bn.cross(&(inertia * omega_bn))
        + inertia * (guid.domega_rn_b - omega_bn.cross(&guid.omega_rn_b));
    (u, z_next)
}

/// `V = 2K ln(1 + σᵀσ) + ½ δωᵀ I δω`
pub fn lyapunov(k: f64, inertia: &Matrix3<f64>, guid: &AttGuidMsg) -> f64 {
    let dw = guid.omega_br_b;
    2.0 * k * (1.0 + guid.sigma_br.norm_squared()).ln() + 0.5 * dw.dot(&(inertia * dw))
}

fn check_finite(v: &[Vector3<f64>], what: &str, time: SimTime) -> Result<(), ModuleError> {
    if v.iter().all(|x| x.iter().all(|c| c.is_finite())) {
        Ok(())
    } else {
        Err(ModuleError::NonFinite(format!("{what} at t = {time}")))
    }
}

/// Standard deviations of the optional navigation errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NavNoise {
    pub pos_std: f64,
    pub vel_std: f64,
    pub att_std: f64,
    pub rate_std: f64,
    pub seed: u64,
}

pub struct SimpleNav {
    pub tag: String,
    pub noise: Option<NavNoise>,
    pub sc_state_in_msg: InputPort<SCStatesMsg>,
    pub trans_out_msg: Message<NavTransMsg>,
    pub att_out_msg: Message<NavAttMsg>,
    rng: Option<ChaCha20Rng>,
}

impl SimpleNav {
    pub fn new(tag: &str) -> Self {
        SimpleNav {
            tag: tag.to_string(),
            noise: None,
            sc_state_in_msg: InputPort::new("scStateInMsg"),
            trans_out_msg: Message::new("transOutMsg"),
            att_out_msg: Message::new("attOutMsg"),
            rng: None,
        }
    }
}

impl SysModel for SimpleNav {
    fn model_tag(&self) -> &str {
        &self.tag
    }

    fn reset(&mut self, _time: SimTime) -> Result<(), ModuleError> {
        self.sc_state_in_msg.require_linked()?;
        if let Some(n) = self.noise {
            for (name, s) in [
                ("pos_std", n.pos_std),
                ("vel_std", n.vel_std),
                ("att_std", n.att_std),
                ("rate_std", n.rate_std),
            ] {
                if !(s >= 0.0 && s.is_finite()) {
                    return Err(ModuleError::Failed(format!("navigation noise {name} must be >= 0")));
                }
            }
        }
        self.rng = self.noise.map(|n| ChaCha20Rng::seed_from_u64(n.seed));
        self.trans_out_msg.clear();
        self.att_out_msg.clear();
        Ok(())
    }

    fn update_state(&mut self, time: SimTime) -> Result<(), ModuleError> {
        let (mut trans, mut att) = simple_nav_update(&self.sc_state_in_msg.payload(), time);
        if let (Some(n), Some(rng)) = (self.noise, self.rng.as_mut()) {
            let mut jitter = |std: f64| -> Vector3<f64> {
                match Normal::new(0.0, std) {
                    Ok(d) if std > 0.0 => Vector3::from_fn(|_, _| d.sample(rng)),
                    _ => Vector3::zeros(),
                }
            };
            trans.r_bn_n += jitter(n.pos_std);
            trans.v_bn_n += jitter(n.vel_std);
            att.sigma_bn = mrp_switch(&(att.sigma_bn + jitter(n.att_std)));
            att.omega_bn_b += jitter(n.rate_std);
        }
        self.trans_out_msg.write(trans, time);
        self.att_out_msg.write(att, time);
        Ok(())
    }
}

pub struct InertialPoint {
    pub tag: String,
    pub sigma_r0n: Vector3<f64>,
    pub att_ref_out_msg: Message<AttRefMsg>,
}

impl InertialPoint {
    pub fn new(tag: &str) -> Self {
        InertialPoint {
            tag: tag.to_string(),
            sigma_r0n: Vector3::zeros(),
            att_ref_out_msg: Message::new("attRefOutMsg"),
        }
    }
}

impl SysModel for InertialPoint {
    fn model_tag(&self) -> &str {
        &self.tag
    }

    fn reset(&mut self, _time: SimTime) -> Result<(), ModuleError> {
        self.att_ref_out_msg.clear();
        Ok(())
    }

    fn update_state(&mut self, time: SimTime) -> Result<(), ModuleError> {
        self.att_ref_out_msg
            .write(inertial_point_reference(&self.sigma_r0n), time);
        Ok(())
    }
}

/// Hill-frame pointing. An unlinked celestial body input means the planet
/// sits at the origin.
pub struct HillPoint {
    pub tag: String,
    pub trans_nav_in_msg: InputPort<NavTransMsg>,
    pub cel_body_in_msg: InputPort<EphemerisMsg>,
    pub att_ref_out_msg: Message<AttRefMsg>,
}

impl HillPoint {
    pub fn new(tag: &str) -> Self {
        HillPoint {
            tag: tag.to_string(),
            trans_nav_in_msg: InputPort::new("transNavInMsg"),
            cel_body_in_msg: InputPort::new("celBodyInMsg"),
            att_ref_out_msg: Message::new("attRefOutMsg"),
        }
    }
}

impl SysModel for HillPoint {
    fn model_tag(&self) -> &str {
        &self.tag
    }

    fn reset(&mut self, _time: SimTime) -> Result<(), ModuleError> {
        self.trans_nav_in_msg.require_linked()?;
        self.att_ref_out_msg.clear();
        Ok(())
    }

    fn update_state(&mut self, time: SimTime) -> Result<(), ModuleError> {
        let nav = self.trans_nav_in_msg.payload();
        let planet = self.cel_body_in_msg.payload();
        let reference =
            hill_point_reference(&nav, &planet).map_err(|e| ModuleError::Failed(format!("{e} at t = {time}")))?;
        self.att_ref_out_msg.write(reference, time);
        Ok(())
    }
}

pub struct AttTrackingError {
    pub tag: String,
    pub att_nav_in_msg: InputPort<NavAttMsg>,
    pub att_ref_in_msg: InputPort<AttRefMsg>,
    pub att_guid_out_msg: Message<AttGuidMsg>,
}

impl AttTrackingError {
    pub fn new(tag: &str) -> Self {
        AttTrackingError {
            tag: tag.to_string(),
            att_nav_in_msg: InputPort::new("attNavInMsg"),
            att_ref_in_msg: InputPort::new("attRefInMsg"),
            att_guid_out_msg: Message::new("attGuidOutMsg"),
        }
    }
}

impl SysModel for AttTrackingError {
    fn model_tag(&self) -> &str {
        &self.tag
    }

    fn reset(&mut self, _time: SimTime) -> Result<(), ModuleError> {
        self.att_nav_in_msg.require_linked()?;
        self.att_ref_in_msg.require_linked()?;
        self.att_guid_out_msg.clear();
        Ok(())
    }

    fn update_state(&mut self, time: SimTime) -> Result<(), ModuleError> {
        let guid = attitude_tracking_error(&self.att_nav_in_msg.payload(), &self.att_ref_in_msg.payload());
        self.att_guid_out_msg.write(guid, time);
        Ok(())
    }
}

pub struct MrpFeedback {
    pub tag: String,
    pub gains: ControlGains,
    pub inertia: Matrix3<f64>,
    pub guid_in_msg: InputPort<AttGuidMsg>,
    pub cmd_torque_out_msg: Message<CmdTorqueBodyMsg>,
    integral: Vector3<f64>,
    last_update: Option<SimTime>,
    reset_request: Rc<Cell<bool>>,
}

impl MrpFeedback {
    pub fn new(tag: &str, gains: ControlGains, inertia: Matrix3<f64>) -> Self {
        MrpFeedback {
            tag: tag.to_string(),
            gains,
            inertia,
            guid_in_msg: InputPort::new("guidInMsg"),
            cmd_torque_out_msg: Message::new("cmdTorqueOutMsg"),
            integral: Vector3::zeros(),
            last_update: None,
            reset_request: Rc::new(Cell::new(false)),
        }
    }

    /// Shared flag; setting it zeroes the integral state at the next update.
    pub fn reset_handle(&self) -> Rc<Cell<bool>> {
        Rc::clone(&self.reset_request)
    }

    pub fn integral(&self) -> Vector3<f64> {
        self.integral
    }
}

impl SysModel for MrpFeedback {
    fn model_tag(&self) -> &str {
        &self.tag
    }

    fn reset(&mut self, _time: SimTime) -> Result<(), ModuleError> {
        self.guid_in_msg.require_linked()?;
        self.gains.validate().map_err(|e| ModuleError::Failed(e.to_string()))?;
        let report = check_inertia(&self.inertia).map_err(|e| ModuleError::Failed(e.to_string()))?;
        if let Some(v) = report.violations.first() {
            return Err(ModuleError::Failed(v.to_string()));
        }
        self.integral = Vector3::zeros();
        self.last_update = None;
        self.reset_request.set(false);
        self.cmd_torque_out_msg.clear();
        Ok(())
    }

    fn update_state(&mut self, time: SimTime) -> Result<(), ModuleError> {
        if self.reset_request.replace(false) {
            self.integral = Vector3::zeros();
            self.last_update = None;
        }
        let guid = self.guid_in_msg.payload();
        check_finite(
            &[guid.sigma_br, guid.omega_br_b, guid.omega_rn_b, guid.domega_rn_b],
            "non-finite guidance input",
            time,
        )?;
        let dt = self
            .last_update
            .and_then(|p| time.checked_sub(p))
            .map_or(0.0, SimTime::as_secs_f64);
        let (u, z) = mrp_feedback_control(&guid, &self.gains, &self.inertia, &self.integral, dt);
        check_finite(&[u], "non-finite torque command", time)?;
        self.integral = z;
        self.last_update = Some(time);
        self.cmd_torque_out_msg
            .write(CmdTorqueBodyMsg { torque_request_body: u }, time);
        Ok(())
    }
}

/// Gateway messages that give downstream modules a single input regardless
/// of which upstream module is active.
#[derive(Clone)]
pub struct FswGateways {
    pub att_ref: Message<AttRefMsg>,
    pub att_guid: Message<AttGuidMsg>,
    pub cmd_torque: Message<CmdTorqueBodyMsg>,
}

impl Default for FswGateways {
    fn default() -> Self {
        FswGateways {
            att_ref: Message::gateway("attRefMsg"),
            att_guid: Message::gateway("attGuidMsg"),
            cmd_torque: Message::gateway("cmdTorqueMsg"),
        }
    }
}

impl FswGateways {
    /// Detaches every gateway and writes zero payloads.
    pub fn zero(&self, time: SimTime) {
        // Detaching never creates a cycle.
        let _ = self.att_ref.retarget(None, time);
        let _ = self.att_guid.retarget(None, time);
        let _ = self.cmd_torque.retarget(None, time);
    }
}

/// Navigation inputs the FSW stack subscribes to.
pub struct FswInputs<'a> {
    pub nav_trans: &'a Message<NavTransMsg>,
    pub nav_att: &'a Message<NavAttMsg>,
    pub cel_body: Option<&'a Message<EphemerisMsg>>,
}

/// Flight-software model: one task per algorithm inside the FSW process,
/// all disabled until a mode is selected.
pub struct FswModel {
    pub gateways: FswGateways,
    pub gains: ControlGains,
    mode: FswMode,
    inertial_ref: Message<AttRefMsg>,
    hill_ref: Message<AttRefMsg>,
    guid: Message<AttGuidMsg>,
    cmd: Message<CmdTorqueBodyMsg>,
    integral_reset: Rc<Cell<bool>>,
}

impl FswModel {
    #[allow(clippy::too_many_arguments)]
    pub fn install(
        sim: &mut SimContainer,
        process: ProcessHandle,
        rate: SimTime,
        gateways: FswGateways,
        inputs: FswInputs<'_>,
        gains: ControlGains,
        inertia: Matrix3<f64>,
        sigma_r0n: Vector3<f64>,
    ) -> Result<Self, FswError> {
        gains.validate()?;
        let report = check_inertia(&inertia).map_err(|e| FswError::Inertia(e.to_string()))?;
        if let Some(v) = report.violations.first() {
            return Err(FswError::Inertia(v.to_string()));
        }
        for task in FSW_TASKS {
            sim.create_task(process, task, rate)?;
        }

        let mut inertial = InertialPoint::new("inertial3D");
        inertial.sigma_r0n = sigma_r0n;
        let inertial_ref = inertial.att_ref_out_msg.clone();

        let mut hill = HillPoint::new("hillPoint");
        hill.trans_nav_in_msg.subscribe_to(inputs.nav_trans);
        if let Some(body) = inputs.cel_body {
            hill.cel_body_in_msg.subscribe_to(body);
        }
        let hill_ref = hill.att_ref_out_msg.clone();

        let mut track = AttTrackingError::new("attTrackingError");
        track.att_nav_in_msg.subscribe_to(inputs.nav_att);
        track.att_ref_in_msg.subscribe_to(&gateways.att_ref);
        let guid = track.att_guid_out_msg.clone();

        let mut control = MrpFeedback::new("mrpFeedback", gains, inertia);
        control.guid_in_msg.subscribe_to(&gateways.att_guid);
        let cmd = control.cmd_torque_out_msg.clone();
        let integral_reset = control.reset_handle();

        sim.add_model_to_task(INERTIAL_POINT_TASK, inertial, Some(10))?;
        sim.add_model_to_task(HILL_POINT_TASK, hill, Some(10))?;
        sim.add_model_to_task(TRACKING_ERROR_TASK, track, Some(10))?;
        sim.add_model_to_task(MRP_FEEDBACK_TASK, control, Some(10))?;

        let mut model = FswModel {
            gateways,
            gains,
            mode: FswMode::Standby,
            inertial_ref,
            hill_ref,
            guid,
            cmd,
            integral_reset,
        };
        model.set_mode(sim, FswMode::Standby)?;
        Ok(model)
    }

    pub fn mode(&self) -> FswMode {
        self.mode
    }

    pub fn zero_gateway_msgs(&self, time: SimTime) {
        self.gateways.zero(time);
    }

    /// Enables the tasks of `mode` and points the gateways at the active
    /// modules. Standby disables every FSW task and zeroes the gateways.
    pub fn set_mode(&mut self, sim: &mut SimContainer, mode: FswMode) -> Result<(), FswError> {
        let now = sim.clock();
        let enabled: &[&str] = match mode {
            FswMode::Standby => &[],
            FswMode::InertialPoint => &[INERTIAL_POINT_TASK, TRACKING_ERROR_TASK, MRP_FEEDBACK_TASK],
            FswMode::HillPoint => &[HILL_POINT_TASK, TRACKING_ERROR_TASK, MRP_FEEDBACK_TASK],
        };
        for task in FSW_TASKS {
            if enabled.contains(&task) {
                sim.enable_task(task)?;
            } else {
                sim.disable_task(task)?;
            }
        }
        match mode {
            FswMode::Standby => self.zero_gateway_msgs(now),
            FswMode::InertialPoint | FswMode::HillPoint => {
                let source = if mode == FswMode::HillPoint {
                    &self.hill_ref
                } else {
                    &self.inertial_ref
                };
                self.gateways.att_ref.retarget(Some(source), now)?;
                self.gateways.att_guid.retarget(Some(&self.guid), now)?;
                self.gateways.cmd_torque.retarget(Some(&self.cmd), now)?;
            }
        }
        if mode != self.mode {
            self.integral_reset.set(true);
        }
        self.mode = mode;
        log::debug!("fsw mode -> {mode} at {now}");
        Ok(())
    }
}
