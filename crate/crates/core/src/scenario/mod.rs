//! Scenario assembly: a dynamics model, an optional flight-software model
//! and recorders, built from a [`ScenarioConfig`] and run with the
//! initialise / configure stop / execute / pull pattern.

mod config;
mod export;

use std::path::PathBuf;
use std::rc::Rc;

use nalgebra::Vector3;
use thiserror::Error;

use crate::astro::{rv2elem, AstroError, ExtForceTorque, GravityBody, MassProperties, Spacecraft, SpacecraftState};
use crate::ephem::{
    create_body, ephemeris_state, zero_base_recenter, AnalyticEphemeris, EphemError, EphemerisConverter,
    EphemerisProvider, EpochSpec,
};
use crate::fsw::{FswError, FswGateways, FswInputs, FswMode, FswModel, SimpleNav};
use crate::kernel::{sec2nano, KernelError, SimContainer, SimTime};
use crate::messaging::{sampling_time, MessagingError, Recorder};
use crate::msgs::{AttGuidMsg, CmdTorqueBodyMsg, SCStatesMsg};

pub use config::{
    canonical_parameter, emit_config, load_config, reference_orbit, parameter_dim, parameter_value, set_parameter,
    validate, ConfigIssue, ControlConfig, GravityConfig, LoadedConfig, ScenarioConfig, ScenarioKind, SimulationConfig,
    SpacecraftConfig, REFERENCE_EPOCH, PARAMETERS,
};
pub use export::{
    default_plot, emit_svg_plot, export_csv, export_telemetry_jsonl, render_svg, telemetry_lines, write_csv, PlotSpec,
};

/// Preset scenario documents shipped with the crate.
pub mod presets {
    /// The standalone-script configuration document, list-of-maps shape.
    pub const STANDALONE_CONFIG: &str = include_str!("../../presets/standalone_config.yaml");
    pub const BASIC_ORBIT: &str = include_str!("../../presets/basic_orbit.yaml");
    pub const EARTH_ORBIT: &str = include_str!("../../presets/earth_orbit.yaml");
    pub const SUN_EARTH: &str = include_str!("../../presets/sun_earth.yaml");
    pub const ATTITUDE_CONTROL: &str = include_str!("../../presets/attitude_control.yaml");
}

pub const FSW_PROCESS: &str = "FSWProcess";
pub const LOG_PROCESS: &str = "LogProcess";
pub const LOG_TASK: &str = "logTask";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("YAML parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, message: String },
    #[error("invalid configuration:\n{}", issues_text(.0))]
    Invalid(Vec<ConfigIssue>),
    #[error("unknown scenario kind `{0}` (valid kinds: basicOrbit, earthOrbit, sunEarth, attitudeControl)")]
    UnknownKind(String),
    #[error("no scenario kind given; set `kind` in the config or pass one explicitly")]
    MissingKind,
    #[error("a mode was requested but scenario kind `{0}` has no flight software")]
    ModeWithoutFsw(ScenarioKind),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("parameter `{path}` takes {expected} value(s), got {got}")]
    ParameterShape { path: String, expected: usize, got: usize },
    #[error("scenario has not been executed")]
    NotExecuted,
    #[error("no samples to export")]
    NoSamples,
    #[error("{0}")]
    Mismatch(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Fsw(#[from] FswError),
    #[error(transparent)]
    Astro(#[from] AstroError),
    #[error(transparent)]
    Messaging(#[from] MessagingError),
    #[error(transparent)]
    Ephem(#[from] EphemError),
}

fn issues_text(issues: &[ConfigIssue]) -> String {
    issues.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n")
}

impl ScenarioError {
    /// True for errors caused by the input document or request rather than
    /// by the simulation itself.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            ScenarioError::Parse { .. }
                | ScenarioError::Invalid(_)
                | ScenarioError::UnknownKind(_)
                | ScenarioError::MissingKind
                | ScenarioError::ModeWithoutFsw(_)
                | ScenarioError::UnknownParameter(_)
                | ScenarioError::ParameterShape { .. }
        )
    }
}

/// Recorders attached before initialisation. FSW recorders exist only for
/// scenarios with flight software and share the state recorder's task.
#[derive(Clone)]
pub struct Recorders {
    pub sc_state: Recorder<SCStatesMsg>,
    pub att_guid: Option<Recorder<AttGuidMsg>>,
    pub cmd_torque: Option<Recorder<CmdTorqueBodyMsg>>,
}

pub struct ScenarioInstance {
    pub kind: ScenarioKind,
    pub config: ScenarioConfig,
    pub sim: SimContainer,
    pub fsw: Option<FswModel>,
    pub recorders: Recorders,
    bodies: Vec<String>,
    central: Option<String>,
    epoch: EpochSpec,
    mode_log: Vec<(SimTime, FswMode)>,
    executed: bool,
}

impl ScenarioInstance {
    pub fn body_names(&self) -> &[String] {
        &self.bodies
    }

    pub fn epoch(&self) -> &EpochSpec {
        &self.epoch
    }

    pub fn is_executed(&self) -> bool {
        self.executed
    }

    /// Mode in force at `t`, if the scenario has flight software.
    pub fn mode_at(&self, t: SimTime) -> Option<FswMode> {
        self.fsw.as_ref()?;
        Some(
            self.mode_log
                .iter()
                .take_while(|(start, _)| *start <= t)
                .last()
                .map_or(FswMode::Standby, |(_, m)| *m),
        )
    }

    /// Positions of the configured bodies relative to the central body.
    pub fn body_positions(&self, t: SimTime) -> Result<Vec<(String, Vector3<f64>)>, ScenarioError> {
        let Some(central) = &self.central else {
            return Ok(Vec::new());
        };
        let records = self
            .bodies
            .iter()
            .map(|b| ephemeris_state(b, &self.epoch, t))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(zero_base_recenter(&records, central)?
            .into_iter()
            .map(|r| (r.body, r.r_n))
            .collect())
    }

    pub fn show_execution_order(&self) -> String {
        self.sim.show_execution_order()
    }
}

/// Resolves the kind from an explicit request or the config's `kind` key.
pub fn resolve_kind(config: &ScenarioConfig, requested: Option<ScenarioKind>) -> Result<ScenarioKind, ScenarioError> {
    requested.or(config.kind).ok_or(ScenarioError::MissingKind)
}

fn gravity_bodies(
    config: &ScenarioConfig,
    kind: ScenarioKind,
) -> Result<(Vec<GravityBody>, Option<String>), ScenarioError> {
    let Some(g) = config.gravity_for(kind) else {
        return Ok((Vec::new(), None));
    };
    let mut bodies = Vec::with_capacity(g.bodies.len());
    for name in &g.bodies {
        let mut b = create_body(name)?;
        b.is_central = *name == g.central;
        b.use_j2 = g.use_j2 && b.is_central;
        bodies.push(b);
    }
    Ok((bodies, Some(g.central)))
}

/// Wires the module set of `kind` into a fresh simulation container.
pub fn build_scenario(config: &ScenarioConfig, kind: ScenarioKind) -> Result<ScenarioInstance, ScenarioError> {
    let issues = validate(config);
    if !issues.is_empty() {
        return Err(ScenarioError::Invalid(issues));
    }
    if kind != ScenarioKind::AttitudeControl && config.mode.is_some_and(|m| m != FswMode::Standby) {
        return Err(ScenarioError::ModeWithoutFsw(kind));
    }
    let s = &config.simulation;
    let dt = sec2nano(s.time_step);
    let t_final = sec2nano(s.simulation_time);
    let sampling = match s.num_data_points {
        Some(n) => sampling_time(t_final, dt, n)?,
        None => SimTime::ZERO,
    };
    let epoch = EpochSpec::parse(config.epoch.as_deref().unwrap_or(REFERENCE_EPOCH))?;

    let mut sim = SimContainer::new();
    let dyn_process = sim.create_process(&s.process_name, None)?;
    sim.create_task(dyn_process, &s.task_name, dt)?;

    let sc_cfg = &config.spacecraft;
    let mut hub = Spacecraft::new(
        &sc_cfg.name,
        MassProperties {
            m_hub: sc_cfg.mass,
            inertia: sc_cfg.inertia_matrix(),
        },
    );
    let (r0, v0) = config.initial_translation(kind)?;
    hub.init = SpacecraftState {
        r_cn_n: r0,
        v_cn_n: v0,
        sigma_bn: Vector3::from(sc_cfg.sigma_bn_init),
        omega_bn_b: Vector3::from(sc_cfg.omega_bn_b_init),
    };
    let (gravity, central) = gravity_bodies(config, kind)?;
    if let Some(c) = &central {
        if gravity.iter().any(|b| !b.is_central) {
            hub.ephemeris = Some(Rc::new(AnalyticEphemeris { zero_base: c.clone() }));
        }
    }
    let body_names: Vec<String> = gravity.iter().map(|b| b.name.clone()).collect();
    hub.gravity = gravity;

    let sc_rec = Recorder::new(&hub.sc_state_out_msg, sampling);
    sim.register_model(&sc_cfg.name);
    let task = s.task_name.clone();

    let ephemeris_modules = |sim: &mut SimContainer, priorities: (Option<i64>, Option<i64>)| {
        let central = central.clone().unwrap_or_else(|| "earth".into());
        let names: Vec<&str> = body_names.iter().map(String::as_str).collect();
        let mut spice = EphemerisProvider::new("SpiceInterface", &names, epoch.clone())?;
        spice.zero_base = central.clone();
        let idx = names.iter().position(|n| *n == central).unwrap_or(0);
        let mut converter = EphemerisConverter::new("earthEphem");
        let out = converter.add_spice_input_msg(&spice.planet_state_out_msgs[idx]);
        sim.register_model("SpiceInterface");
        sim.register_model("earthEphem");
        sim.add_model_to_task(&task, spice, priorities.0)?;
        sim.add_model_to_task(&task, converter, priorities.1)?;
        Ok::<_, ScenarioError>(out)
    };

    let mut fsw = None;
    let mut recorders = Recorders {
        sc_state: sc_rec.clone(),
        att_guid: None,
        cmd_torque: None,
    };
    match kind {
        ScenarioKind::BasicOrbit | ScenarioKind::EarthOrbit | ScenarioKind::SunEarth => {
            if sc_cfg.add_to_task {
                sim.add_model_to_task(&task, hub, None)?;
            }
            if kind == ScenarioKind::SunEarth {
                ephemeris_modules(&mut sim, (None, None))?;
            }
            sim.add_recorder_to_task(&task, sc_rec)?;
        }
        ScenarioKind::AttitudeControl => {
            let gateways = FswGateways::default();
            let mut ext = ExtForceTorque::new("externalDisturbance");
            ext.cmd_torque_in_msg.subscribe_to(&gateways.cmd_torque);
            hub.force_torque_in_msg.subscribe_to(&ext.force_torque_out_msg);
            let mut nav = SimpleNav::new("SimpleNavigation");
            nav.sc_state_in_msg.subscribe_to(&hub.sc_state_out_msg);
            let nav_trans = nav.trans_out_msg.clone();
            let nav_att = nav.att_out_msg.clone();

            if sc_cfg.add_to_task {
                sim.add_model_to_task(&task, hub, Some(201))?;
            }
            sim.register_model("SimpleNavigation");
            sim.add_model_to_task(&task, nav, Some(109))?;
            let planet = ephemeris_modules(&mut sim, (Some(200), Some(199)))?;
            sim.register_model("externalDisturbance");
            sim.add_model_to_task(&task, ext, Some(300))?;

            let fsw_process = sim.create_process(FSW_PROCESS, None)?;
            let ControlConfig { gains, sigma_r0n } = config.control.clone();
            let model = FswModel::install(
                &mut sim,
                fsw_process,
                sec2nano(s.fsw_time_step),
                gateways.clone(),
                FswInputs {
                    nav_trans: &nav_trans,
                    nav_att: &nav_att,
                    cel_body: Some(&planet),
                },
                gains,
                sc_cfg.inertia_matrix(),
                Vector3::from(sigma_r0n),
            )?;

            let log_process = sim.create_process(LOG_PROCESS, None)?;
            sim.create_task(log_process, LOG_TASK, dt)?;
            let guid_rec = Recorder::new(&gateways.att_guid, sampling);
            let cmd_rec = Recorder::new(&gateways.cmd_torque, sampling);
            sim.add_recorder_to_task(LOG_TASK, sc_rec)?;
            sim.add_recorder_to_task(LOG_TASK, guid_rec.clone())?;
            sim.add_recorder_to_task(LOG_TASK, cmd_rec.clone())?;
            recorders.att_guid = Some(guid_rec);
            recorders.cmd_torque = Some(cmd_rec);
            fsw = Some(model);
        }
    }

    Ok(ScenarioInstance {
        kind,
        config: config.clone(),
        sim,
        fsw,
        recorders,
        bodies: body_names,
        central,
        epoch,
        mode_log: Vec::new(),
        executed: false,
    })
}

/// Runs the scenario from t = 0 to `stop` (default: the configured
/// simulation time) in `mode` (default: the configured mode) and pulls the
/// outputs.
pub fn run_scenario(
    inst: &mut ScenarioInstance,
    mode: Option<FswMode>,
    stop: Option<SimTime>,
) -> Result<OutputBundle, ScenarioError> {
    let mode = mode.or(inst.config.mode);
    let schedule: Vec<(SimTime, FswMode)> = mode.map(|m| (SimTime::ZERO, m)).into_iter().collect();
    run_with_schedule(inst, &schedule, stop)
}

/// Like [`run_scenario`], switching modes at the listed times. A switch at
/// time t takes effect at the first flight-software firing after t (or at
/// t = 0 for a switch at zero).
pub fn run_with_schedule(
    inst: &mut ScenarioInstance,
    schedule: &[(SimTime, FswMode)],
    stop: Option<SimTime>,
) -> Result<OutputBundle, ScenarioError> {
    if inst.executed {
        return Err(ScenarioError::Mismatch(
            "scenario instances run once; build a new instance to run again".into(),
        ));
    }
    if inst.fsw.is_none() && schedule.iter().any(|(_, m)| *m != FswMode::Standby) {
        return Err(ScenarioError::ModeWithoutFsw(inst.kind));
    }
    let mut schedule = schedule.to_vec();
    schedule.sort_by_key(|(t, _)| *t);
    let stop = stop.unwrap_or_else(|| sec2nano(inst.config.simulation.simulation_time));

    let mut pending = schedule.into_iter().peekable();
    while let Some((_, m)) = pending.next_if(|(t, _)| *t == SimTime::ZERO) {
        apply_mode(inst, m, SimTime::ZERO)?;
    }
    inst.sim.initialize_simulation()?;
    for (t, m) in pending {
        if t > stop {
            break;
        }
        inst.sim.configure_stop_time(t)?;
        inst.sim.execute_simulation()?;
        apply_mode(inst, m, t)?;
    }
    inst.sim.configure_stop_time(stop)?;
    inst.sim.execute_simulation()?;
    inst.executed = true;
    pull_outputs(inst)
}

fn apply_mode(inst: &mut ScenarioInstance, mode: FswMode, t: SimTime) -> Result<(), ScenarioError> {
    if let Some(fsw) = inst.fsw.as_mut() {
        fsw.set_mode(&mut inst.sim, mode)?;
        inst.mode_log.push((t, mode));
    }
    Ok(())
}

/// One named, column-labelled series aligned with [`OutputBundle::times`].
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub key: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

/// Recorded outputs in a fixed key order.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputBundle {
    pub times: Vec<SimTime>,
    pub series: Vec<Series>,
}

impl OutputBundle {
    pub const KEYS: [&'static str; 8] = [
        "r_BN_N",
        "v_BN_N",
        "sigma_BN",
        "omega_BN_B",
        "sigma_BR",
        "omega_BR_B",
        "cmd_torque",
        "elements",
    ];

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_s(&self) -> Vec<f64> {
        self.times.iter().map(|t| t.as_secs_f64()).collect()
    }

    pub fn get(&self, key: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.key == key)
    }

    /// Rows of a three-component series as vectors.
    pub fn vectors(&self, key: &str) -> Option<Vec<Vector3<f64>>> {
        let s = self.get(key)?;
        Some(s.rows.iter().map(|r| Vector3::new(r[0], r[1], r[2])).collect())
    }

    pub fn last(&self, key: &str) -> Option<&[f64]> {
        self.get(key)?.rows.last().map(Vec::as_slice)
    }
}

fn vec_rows<P>(values: &[P], f: impl Fn(&P) -> Vector3<f64>) -> Vec<Vec<f64>> {
    values.iter().map(|p| f(p).as_slice().to_vec()).collect()
}

/// Named time series from the recorders of an executed scenario.
pub fn pull_outputs(inst: &ScenarioInstance) -> Result<OutputBundle, ScenarioError> {
    if !inst.executed {
        return Err(ScenarioError::NotExecuted);
    }
    let samples = inst.recorders.sc_state.samples();
    let times: Vec<SimTime> = samples.iter().map(|(t, _)| *t).collect();
    let sc: Vec<SCStatesMsg> = samples.into_iter().map(|(_, p)| p).collect();
    let mut series = vec![
        Series {
            key: "r_BN_N",
            columns: vec!["rx_m", "ry_m", "rz_m"],
            rows: vec_rows(&sc, |p| p.r_bn_n),
        },
        Series {
            key: "v_BN_N",
            columns: vec!["vx_mps", "vy_mps", "vz_mps"],
            rows: vec_rows(&sc, |p| p.v_bn_n),
        },
        Series {
            key: "sigma_BN",
            columns: vec!["sigma_bn_1", "sigma_bn_2", "sigma_bn_3"],
            rows: vec_rows(&sc, |p| p.sigma_bn),
        },
        Series {
            key: "omega_BN_B",
            columns: vec!["omega_bn_x_radps", "omega_bn_y_radps", "omega_bn_z_radps"],
            rows: vec_rows(&sc, |p| p.omega_bn_b),
        },
    ];

    let check_times = |rec_times: Vec<SimTime>, what: &str| {
        if rec_times == times {
            Ok(())
        } else {
            Err(ScenarioError::Mismatch(format!(
                "{what} recorder sampled {} times, state recorder {}",
                rec_times.len(),
                times.len()
            )))
        }
    };
    if let Some(rec) = &inst.recorders.att_guid {
        check_times(rec.times(), "guidance")?;
        let g = rec.values();
        series.push(Series {
            key: "sigma_BR",
            columns: vec!["sigma_br_1", "sigma_br_2", "sigma_br_3"],
            rows: vec_rows(&g, |p| p.sigma_br),
        });
        series.push(Series {
            key: "omega_BR_B",
            columns: vec!["omega_br_x_radps", "omega_br_y_radps", "omega_br_z_radps"],
            rows: vec_rows(&g, |p| p.omega_br_b),
        });
    }
    if let Some(rec) = &inst.recorders.cmd_torque {
        check_times(rec.times(), "torque")?;
        series.push(Series {
            key: "cmd_torque",
            columns: vec!["tx_nm", "ty_nm", "tz_nm"],
            rows: vec_rows(&rec.values(), |p| p.torque_request_body),
        });
    }
    if let Some(mu) = inst.config.central_mu(inst.kind) {
        let rows = sc
            .iter()
            .map(|p| match rv2elem(mu, &p.r_bn_n, &p.v_bn_n) {
                Ok(oe) => vec![oe.a, oe.e, oe.i, oe.raan, oe.argp, oe.f],
                Err(_) => vec![f64::NAN; 6],
            })
            .collect();
        series.push(Series {
            key: "elements",
            columns: vec!["a_m", "e", "i_rad", "raan_rad", "argp_rad", "f_rad"],
            rows,
        });
    }
    Ok(OutputBundle { times, series })
}
