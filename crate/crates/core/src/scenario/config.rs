//! YAML scenario configuration.
//!
//! Two document shapes are accepted and normalised to the same
//! [`ScenarioConfig`]: plain mappings, and blocks written as lists of
//! single-key maps:
//!
//! ```yaml
//! simulation:
//!   - simulation_time: 1000.0
//!   - time_step:       1.0
//! ```
//!
//! Units are converted at load time. Orbit lengths may be given in km
//! (`a_km`) or m (`a_m`) and angles in degrees (`i_deg`) or radians
//! (`i_rad`). [`emit_config`] writes SI keys only.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use serde_yaml::{Mapping, Value};

use crate::astro::{check_inertia, elem2rv, AstroError, ClassicElements, MU_EARTH};
use crate::ephem::{create_body, EpochSpec};
use crate::fsw::{ControlGains, FswMode};

use super::ScenarioError;

pub const REFERENCE_EPOCH: &str = "2000 Jan 1 11:59:28.000 (UTC)";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    BasicOrbit,
    EarthOrbit,
    SunEarth,
    AttitudeControl,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [
        ScenarioKind::BasicOrbit,
        ScenarioKind::EarthOrbit,
        ScenarioKind::SunEarth,
        ScenarioKind::AttitudeControl,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::BasicOrbit => "basicOrbit",
            ScenarioKind::EarthOrbit => "earthOrbit",
            ScenarioKind::SunEarth => "sunEarth",
            ScenarioKind::AttitudeControl => "attitudeControl",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioKind {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| ScenarioError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub process_name: String,
    pub task_name: String,
    /// Total simulated time, s.
    pub simulation_time: f64,
    /// Dynamics task period, s.
    pub time_step: f64,
    /// Flight-software task period, s.
    pub fsw_time_step: f64,
    pub num_data_points: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacecraftConfig {
    pub name: String,
    pub mass: f64,
    /// Row-major inertia about the centre of mass, kg·m².
    pub inertia: [f64; 9],
    /// Overrides the orbit-derived position when set.
    pub r_cn_n_init: Option<[f64; 3]>,
    /// Overrides the orbit-derived velocity when set.
    pub v_cn_n_init: Option<[f64; 3]>,
    pub sigma_bn_init: [f64; 3],
    pub omega_bn_b_init: [f64; 3],
    /// `false` builds the hub but leaves it out of every task.
    pub add_to_task: bool,
}

impl SpacecraftConfig {
    pub fn inertia_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_row_slice(&self.inertia)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GravityConfig {
    pub bodies: Vec<String>,
    pub central: String,
    pub use_j2: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlConfig {
    pub gains: ControlGains,
    pub sigma_r0n: [f64; 3],
}

impl Default for ControlConfig {
    fn default() -> Self {
        ControlConfig {
            gains: ControlGains::default(),
            sigma_r0n: [0.0; 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub kind: Option<ScenarioKind>,
    pub simulation: SimulationConfig,
    pub spacecraft: SpacecraftConfig,
    pub orbit: Option<ClassicElements>,
    pub gravity: Option<GravityConfig>,
    pub control: ControlConfig,
    pub mode: Option<FswMode>,
    pub epoch: Option<String>,
}

/// Reference low-Earth orbit: a = 7000 km, e = 1e-4, i = 33.3°, Ω = 48.2°, ω = 347.8°, f = 85.3°.
pub fn reference_orbit() -> ClassicElements {
    ClassicElements {
        a: 7000.0 * 1000.0,
        e: 0.0001,
        i: 33.3_f64.to_radians(),
        raan: 48.2_f64.to_radians(),
        argp: 347.8_f64.to_radians(),
        f: 85.3_f64.to_radians(),
    }
}

impl ScenarioConfig {
    /// Gravity setup for `kind`: the configured block, or the kind's default.
    pub fn gravity_for(&self, kind: ScenarioKind) -> Option<GravityConfig> {
        if kind == ScenarioKind::BasicOrbit {
            return None;
        }
        self.gravity.clone().or_else(|| {
            let bodies = match kind {
                ScenarioKind::SunEarth => vec!["sun".to_string(), "earth".to_string()],
                _ => vec!["earth".to_string()],
            };
            Some(GravityConfig {
                bodies,
                central: "earth".into(),
                use_j2: false,
            })
        })
    }

    /// Orbit used for initial conditions: the configured one, or the reference
    /// orbit for kinds with a central body.
    pub fn orbit_for(&self, kind: ScenarioKind) -> Option<ClassicElements> {
        match kind {
            ScenarioKind::BasicOrbit => self.orbit,
            _ => Some(self.orbit.unwrap_or_else(reference_orbit)),
        }
    }

    /// Initial position and velocity after applying explicit overrides.
    pub fn initial_translation(&self, kind: ScenarioKind) -> Result<(Vector3<f64>, Vector3<f64>), AstroError> {
        let (mut r, mut v) = (Vector3::zeros(), Vector3::zeros());
        if let Some(oe) = self.orbit_for(kind) {
            let mu = self.central_mu(kind).unwrap_or(MU_EARTH);
            (r, v) = elem2rv(mu, &oe)?;
        }
        if let Some(ri) = self.spacecraft.r_cn_n_init {
            r = Vector3::from(ri);
        }
        if let Some(vi) = self.spacecraft.v_cn_n_init {
            v = Vector3::from(vi);
        }
        Ok((r, v))
    }

    pub fn central_mu(&self, kind: ScenarioKind) -> Option<f64> {
        let g = self.gravity_for(kind)?;
        create_body(&g.central).ok().map(|b| b.mu)
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            kind: None,
            simulation: SimulationConfig {
                process_name: "simulation_process".into(),
                task_name: "simulation_task".into(),
                simulation_time: 1000.0,
                time_step: 1.0,
                fsw_time_step: 0.5,
                num_data_points: None,
            },
            spacecraft: SpacecraftConfig {
                name: "bsk_sat".into(),
                mass: 750.0,
                inertia: [900.0, 0.0, 0.0, 0.0, 800.0, 0.0, 0.0, 0.0, 700.0],
                r_cn_n_init: None,
                v_cn_n_init: None,
                sigma_bn_init: [0.0; 3],
                omega_bn_b_init: [0.0; 3],
                add_to_task: true,
            },
            orbit: None,
            gravity: None,
            control: ControlConfig::default(),
            mode: None,
            epoch: None,
        }
    }
}

/// A problem located by its dotted YAML path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub config: ScenarioConfig,
    pub warnings: Vec<String>,
}

struct Block<'a> {
    path: &'static str,
    entries: Vec<(String, Value)>,
    used: BTreeSet<String>,
    issues: &'a mut Vec<ConfigIssue>,
}

impl<'a> Block<'a> {
    fn new(path: &'static str, value: Option<&Value>, issues: &'a mut Vec<ConfigIssue>) -> Self {
        let mut entries: Vec<(String, Value)> = Vec::new();
        let mut push = |k: &Value, v: &Value, issues: &mut Vec<ConfigIssue>| match k.as_str() {
            Some(key) if entries.iter().any(|(e, _)| e == key) => issues.push(ConfigIssue {
                path: format!("{path}.{key}"),
                message: "duplicate key".into(),
            }),
            Some(key) => entries.push((key.to_string(), v.clone())),
            None => issues.push(ConfigIssue {
                path: path.into(),
                message: format!("non-string key {k:?}"),
            }),
        };
        match value {
            None | Some(Value::Null) => {}
            Some(Value::Mapping(m)) => m.iter().for_each(|(k, v)| push(k, v, issues)),
            Some(Value::Sequence(items)) => {
                for (idx, item) in items.iter().enumerate() {
                    match item {
                        Value::Mapping(m) if m.len() == 1 => m.iter().for_each(|(k, v)| push(k, v, issues)),
                        _ => issues.push(ConfigIssue {
                            path: format!("{path}[{idx}]"),
                            message: "list entries must be single-key maps".into(),
                        }),
                    }
                }
            }
            Some(_) => issues.push(ConfigIssue {
                path: path.into(),
                message: "expected a mapping or a list of single-key maps".into(),
            }),
        }
        Block {
            path,
            entries,
            used: BTreeSet::new(),
            issues,
        }
    }

    fn issue(&mut self, key: &str, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            path: format!("{}.{key}", self.path),
            message: message.into(),
        });
    }

    /// Value under the first present key among `keys`; more than one is an error.
    fn get(&mut self, keys: &[&str]) -> Option<(String, Value)> {
        let present: Vec<(String, Value)> = self
            .entries
            .iter()
            .filter(|(k, _)| keys.contains(&k.as_str()))
            .cloned()
            .collect();
        for (k, _) in &present {
            self.used.insert(k.clone());
        }
        if present.len() > 1 {
            let names: Vec<&str> = present.iter().map(|(k, _)| k.as_str()).collect();
            self.issue(&present[0].0, format!("conflicting keys: {}", names.join(", ")));
        }
        present.into_iter().next()
    }

    fn f64(&mut self, keys: &[&str]) -> Option<f64> {
        let (key, v) = self.get(keys)?;
        match v.as_f64() {
            Some(x) => Some(x),
            None => {
                self.issue(&key, format!("expected a number, got {}", describe(&v)));
                None
            }
        }
    }

    fn required_f64(&mut self, keys: &[&str]) -> Option<f64> {
        if !self.entries.iter().any(|(k, _)| keys.contains(&k.as_str())) {
            self.issue(keys[0], "missing required key");
            return None;
        }
        self.f64(keys)
    }

    fn string(&mut self, keys: &[&str]) -> Option<String> {
        let (key, v) = self.get(keys)?;
        match v {
            Value::String(s) => Some(s),
            other => {
                self.issue(&key, format!("expected a string, got {}", describe(&other)));
                None
            }
        }
    }

    fn boolean(&mut self, keys: &[&str]) -> Option<bool> {
        let (key, v) = self.get(keys)?;
        match v {
            Value::Bool(b) => Some(b),
            other => {
                self.issue(&key, format!("expected true or false, got {}", describe(&other)));
                None
            }
        }
    }

    fn u64(&mut self, keys: &[&str]) -> Option<u64> {
        let (key, v) = self.get(keys)?;
        match v.as_u64() {
            Some(x) => Some(x),
            None => {
                self.issue(&key, format!("expected a non-negative integer, got {}", describe(&v)));
                None
            }
        }
    }

    fn numbers<const N: usize>(&mut self, keys: &[&str]) -> Option<[f64; N]> {
        let (key, v) = self.get(keys)?;
        let parsed = v
            .as_sequence()
            .filter(|s| s.len() == N)
            .and_then(|s| s.iter().map(Value::as_f64).collect::<Option<Vec<f64>>>());
        match parsed {
            Some(xs) => xs.try_into().ok(),
            None => {
                self.issue(&key, format!("expected a list of {N} numbers"));
                None
            }
        }
    }

    fn strings(&mut self, keys: &[&str]) -> Option<Vec<String>> {
        let (key, v) = self.get(keys)?;
        let parsed = v.as_sequence().and_then(|s| {
            s.iter()
                .map(|x| x.as_str().map(str::to_string))
                .collect::<Option<Vec<_>>>()
        });
        if parsed.is_none() {
            self.issue(&key, "expected a list of names");
        }
        parsed
    }

    /// Length in m from `<stem>_km` or `<stem>_m`.
    fn length(&mut self, stem: &str) -> Option<f64> {
        let km = format!("{stem}_km");
        let m = format!("{stem}_m");
        let (key, _) = self.get(&[&km, &m])?;
        let x = self.f64(&[&key])?;
        Some(if key == km { x * 1000.0 } else { x })
    }

    /// Angle in rad from `<stem>_deg` or `<stem>_rad`.
    fn angle(&mut self, stem: &str) -> Option<f64> {
        let deg = format!("{stem}_deg");
        let rad = format!("{stem}_rad");
        let (key, _) = self.get(&[&deg, &rad])?;
        let x = self.f64(&[&key])?;
        Some(if key == deg { x.to_radians() } else { x })
    }

    fn finish(self, warnings: &mut Vec<String>) {
        for (k, _) in &self.entries {
            if !self.used.contains(k) {
                warnings.push(format!("unknown key `{}.{k}` ignored", self.path));
            }
        }
    }
}

fn describe(v: &Value) -> String {
    match v {
        Value::Null => "null".into(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => n.to_string(),
        Value::String(s) => format!("\"{s}\""),
        Value::Sequence(_) => "a list".into(),
        Value::Mapping(_) => "a mapping".into(),
        Value::Tagged(_) => "a tagged value".into(),
    }
}

const TOP_LEVEL: [&str; 8] = [
    "kind",
    "simulation",
    "spacecraft",
    "orbit",
    "gravity",
    "control",
    "mode",
    "epoch",
];

/// Parses, normalises and validates a scenario document.
pub fn load_config(text: &str) -> Result<LoadedConfig, ScenarioError> {
    let doc: Value = serde_yaml::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.location().map(|l| l.line()),
        message: e.to_string(),
    })?;
    let root = match doc {
        Value::Mapping(m) => m,
        Value::Null => Mapping::new(),
        other => {
            return Err(ScenarioError::Invalid(vec![ConfigIssue {
                path: "<root>".into(),
                message: format!("expected a mapping, got {}", describe(&other)),
            }]))
        }
    };
    let mut issues = Vec::new();
    let mut warnings = Vec::new();
    let mut cfg = ScenarioConfig::default();
    let top = |key: &str| root.get(key);

    for key in root.keys() {
        match key.as_str() {
            Some(k) if TOP_LEVEL.contains(&k) || k == "gravity_bodies" => {}
            Some(k) => warnings.push(format!("unknown key `{k}` ignored")),
            None => warnings.push(format!("non-string top-level key {key:?} ignored")),
        }
    }

    match top("kind") {
        None | Some(Value::Null) => {}
        Some(Value::String(s)) => match s.parse() {
            Ok(k) => cfg.kind = Some(k),
            Err(e) => issues.push(ConfigIssue {
                path: "kind".into(),
                message: e.to_string(),
            }),
        },
        Some(other) => issues.push(ConfigIssue {
            path: "kind".into(),
            message: format!("expected a string, got {}", describe(other)),
        }),
    }
    match top("mode") {
        None | Some(Value::Null) => {}
        Some(Value::String(s)) => match s.parse() {
            Ok(m) => cfg.mode = Some(m),
            Err(e) => issues.push(ConfigIssue {
                path: "mode".into(),
                message: format!("{e}"),
            }),
        },
        Some(other) => issues.push(ConfigIssue {
            path: "mode".into(),
            message: format!("expected a string, got {}", describe(other)),
        }),
    }
    match top("epoch") {
        None | Some(Value::Null) => {}
        Some(Value::String(s)) => cfg.epoch = Some(s.clone()),
        Some(other) => issues.push(ConfigIssue {
            path: "epoch".into(),
            message: format!("expected a string, got {}", describe(other)),
        }),
    }

    {
        let mut b = Block::new("simulation", top("simulation"), &mut issues);
        if top("simulation").is_none() {
            b.issues.push(ConfigIssue {
                path: "simulation".into(),
                message: "missing required key".into(),
            });
        }
        let s = &mut cfg.simulation;
        if let Some(v) = b.string(&["process_name", "simulation_process_name"]) {
            s.process_name = v;
        }
        if let Some(v) = b.string(&["task_name", "simulation_task_name"]) {
            s.task_name = v;
        }
        let unit = b.string(&["simulation_time_unit"]);
        let scale = match unit.as_deref() {
            None | Some("sec" | "s" | "seconds") => Some(1.0),
            Some("min" | "minutes") => Some(60.0),
            Some(other) => {
                b.issue(
                    "simulation_time_unit",
                    format!("unsupported unit `{other}` (use sec or min)"),
                );
                None
            }
        };
        if let Some(t) = b.required_f64(&["simulation_time"]) {
            s.simulation_time = t * scale.unwrap_or(1.0);
        }
        if let Some(v) = b.required_f64(&["time_step"]) {
            s.time_step = v;
        }
        if let Some(v) = b.f64(&["fsw_time_step"]) {
            s.fsw_time_step = v;
        }
        s.num_data_points = b.u64(&["num_data_points"]);
        b.finish(&mut warnings);
    }

    {
        let mut b = Block::new("spacecraft", top("spacecraft"), &mut issues);
        let sc = &mut cfg.spacecraft;
        if let Some(v) = b.string(&["name"]) {
            sc.name = v;
        }
        if let Some(v) = b.f64(&["mass"]) {
            sc.mass = v;
        }
        if let Some(v) = b.numbers::<9>(&["inertia"]) {
            sc.inertia = v;
        }
        sc.r_cn_n_init = b.numbers::<3>(&["r_CN_N_init"]);
        sc.v_cn_n_init = b.numbers::<3>(&["v_CN_N_init"]);
        if let Some(v) = b.numbers::<3>(&["sigma_BN_init"]) {
            sc.sigma_bn_init = v;
        }
        if let Some(v) = b.numbers::<3>(&["omega_BN_B_init"]) {
            sc.omega_bn_b_init = v;
        }
        if let Some(v) = b.boolean(&["add_to_task"]) {
            sc.add_to_task = v;
        }
        b.finish(&mut warnings);
    }

    if let Some(value) = top("orbit").filter(|v| !v.is_null()) {
        let mut b = Block::new("orbit", Some(value), &mut issues);
        let a = b.length("a");
        let e = b.f64(&["e"]);
        let angles = ["i", "raan", "argp", "f"].map(|stem| b.angle(stem));
        let mut missing = Vec::new();
        if a.is_none() {
            missing.push("a_km");
        }
        if e.is_none() {
            missing.push("e");
        }
        for (stem, v) in ["i_deg", "raan_deg", "argp_deg", "f_deg"].iter().zip(&angles) {
            if v.is_none() {
                missing.push(stem);
            }
        }
        let already_reported = b.issues.iter().any(|i| i.path.starts_with("orbit."));
        if missing.is_empty() {
            cfg.orbit = Some(ClassicElements {
                a: a.unwrap_or_default(),
                e: e.unwrap_or_default(),
                i: angles[0].unwrap_or_default(),
                raan: angles[1].unwrap_or_default(),
                argp: angles[2].unwrap_or_default(),
                f: angles[3].unwrap_or_default(),
            });
        } else if !already_reported {
            for key in missing {
                b.issue(key, "missing required key");
            }
        }
        b.finish(&mut warnings);
    }

    let gravity_value = top("gravity").filter(|v| !v.is_null());
    if gravity_value.is_some() || top("gravity_bodies").is_some() {
        let mut g = GravityConfig {
            bodies: vec!["earth".into()],
            central: "earth".into(),
            use_j2: false,
        };
        if let Some(list) = top("gravity_bodies") {
            let mut b = Block::new("<root>", None, &mut issues);
            b.entries.push(("gravity_bodies".into(), list.clone()));
            if let Some(v) = b.strings(&["gravity_bodies"]) {
                g.bodies = v;
            }
        }
        let mut b = Block::new("gravity", gravity_value, &mut issues);
        if let Some(v) = b.strings(&["bodies", "gravity_bodies"]) {
            g.bodies = v;
        }
        g.bodies.iter_mut().for_each(|s| *s = s.to_ascii_lowercase());
        g.central = match b.string(&["central", "central_body"]) {
            Some(c) => c.to_ascii_lowercase(),
            None if g.bodies.iter().any(|x| x == "earth") => "earth".into(),
            None => g.bodies.first().cloned().unwrap_or_default(),
        };
        if let Some(v) = b.boolean(&["use_j2"]) {
            g.use_j2 = v;
        }
        b.finish(&mut warnings);
        cfg.gravity = Some(g);
    }

    {
        let mut b = Block::new("control", top("control"), &mut issues);
        let c = &mut cfg.control;
        if let Some(v) = b.f64(&["K"]) {
            c.gains.k = v;
        }
        if let Some(v) = b.f64(&["Ki"]) {
            c.gains.ki = v;
        }
        if let Some(v) = b.f64(&["P"]) {
            c.gains.p = v;
        }
        if let Some(v) = b.f64(&["integral_limit"]) {
            c.gains.integral_limit = v.abs();
        }
        if let Some(v) = b.numbers::<3>(&["sigma_R0N"]) {
            c.sigma_r0n = v;
        }
        b.finish(&mut warnings);
    }

    issues.extend(validate(&cfg));
    for w in &warnings {
        log::warn!("{w}");
    }
    if issues.is_empty() {
        Ok(LoadedConfig { config: cfg, warnings })
    } else {
        Err(ScenarioError::Invalid(issues))
    }
}

/// Semantic checks on an assembled configuration.
pub fn validate(cfg: &ScenarioConfig) -> Vec<ConfigIssue> {
    let mut out = Vec::new();
    let mut bad = |path: &str, message: String| {
        out.push(ConfigIssue {
            path: path.into(),
            message,
        })
    };
    let s = &cfg.simulation;
    if !(s.time_step > 0.0 && s.time_step.is_finite()) {
        bad("simulation.time_step", format!("must be positive, got {}", s.time_step));
    } else if !(s.simulation_time >= s.time_step && s.simulation_time.is_finite()) {
        bad(
            "simulation.simulation_time",
            format!(
                "must be at least time_step ({} s), got {}",
                s.time_step, s.simulation_time
            ),
        );
    }
    if !(s.fsw_time_step > 0.0 && s.fsw_time_step.is_finite()) {
        bad(
            "simulation.fsw_time_step",
            format!("must be positive, got {}", s.fsw_time_step),
        );
    }
    if let Some(n) = s.num_data_points {
        if n < 2 {
            bad("simulation.num_data_points", format!("must be at least 2, got {n}"));
        }
    }
    if s.process_name.is_empty() {
        bad("simulation.process_name", "must not be empty".into());
    }
    if s.task_name.is_empty() {
        bad("simulation.task_name", "must not be empty".into());
    }

    let sc = &cfg.spacecraft;
    if !(sc.mass > 0.0 && sc.mass.is_finite()) {
        bad("spacecraft.mass", format!("must be positive, got {}", sc.mass));
    }
    if sc.inertia.iter().any(|x| !x.is_finite()) {
        bad("spacecraft.inertia", "entries must be finite".into());
    } else {
        match check_inertia(&sc.inertia_matrix()) {
            Ok(report) => {
                for v in report.violations {
                    bad("spacecraft.inertia", v.to_string());
                }
            }
            Err(e) => bad("spacecraft.inertia", e.to_string()),
        }
    }
    for (key, v) in [
        ("spacecraft.r_CN_N_init", sc.r_cn_n_init),
        ("spacecraft.v_CN_N_init", sc.v_cn_n_init),
        ("spacecraft.sigma_BN_init", Some(sc.sigma_bn_init)),
        ("spacecraft.omega_BN_B_init", Some(sc.omega_bn_b_init)),
    ] {
        if v.is_some_and(|xs| xs.iter().any(|x| !x.is_finite())) {
            bad(key, "entries must be finite".into());
        }
    }

    if let Some(oe) = &cfg.orbit {
        if !(oe.a > 0.0 && oe.a.is_finite()) {
            bad("orbit.a_m", format!("must be positive, got {}", oe.a));
        }
        if !(0.0..1.0).contains(&oe.e) {
            bad("orbit.e", format!("must satisfy 0 <= e < 1, got {}", oe.e));
        }
        for (key, x) in [
            ("orbit.i", oe.i),
            ("orbit.raan", oe.raan),
            ("orbit.argp", oe.argp),
            ("orbit.f", oe.f),
        ] {
            if !x.is_finite() {
                bad(key, "must be finite".into());
            }
        }
    }

    if let Some(g) = &cfg.gravity {
        if g.bodies.is_empty() {
            bad("gravity.bodies", "must list at least one body".into());
        }
        for (idx, b) in g.bodies.iter().enumerate() {
            if let Err(e) = create_body(b) {
                bad(&format!("gravity.bodies[{idx}]"), e.to_string());
            }
        }
        if !g.bodies.contains(&g.central) {
            bad(
                "gravity.central",
                format!("central body `{}` is not in gravity.bodies", g.central),
            );
        }
    }

    if let Err(e) = cfg.control.gains.validate() {
        bad("control", e.to_string());
    }
    if cfg.control.sigma_r0n.iter().any(|x| !x.is_finite()) {
        bad("control.sigma_R0N", "entries must be finite".into());
    }
    if let Some(epoch) = &cfg.epoch {
        if let Err(e) = EpochSpec::parse(epoch) {
            bad("epoch", e.to_string());
        }
    }
    out
}

fn num(x: f64) -> Value {
    Value::from(x)
}

fn list(xs: &[f64]) -> Value {
    Value::Sequence(xs.iter().copied().map(num).collect())
}

fn map(entries: Vec<(&str, Value)>) -> Value {
    let mut m = Mapping::new();
    for (k, v) in entries {
        m.insert(Value::from(k), v);
    }
    Value::Mapping(m)
}

/// Mapping-shaped YAML with SI keys; loads back to an identical config.
pub fn emit_config(cfg: &ScenarioConfig) -> String {
    let mut top: Vec<(&str, Value)> = Vec::new();
    if let Some(k) = cfg.kind {
        top.push(("kind", Value::from(k.as_str())));
    }
    let s = &cfg.simulation;
    let mut sim = vec![
        ("process_name", Value::from(s.process_name.clone())),
        ("task_name", Value::from(s.task_name.clone())),
        ("simulation_time", num(s.simulation_time)),
        ("simulation_time_unit", Value::from("sec")),
        ("time_step", num(s.time_step)),
        ("fsw_time_step", num(s.fsw_time_step)),
    ];
    if let Some(n) = s.num_data_points {
        sim.push(("num_data_points", Value::from(n)));
    }
    top.push(("simulation", map(sim)));

    let sc = &cfg.spacecraft;
    let mut craft = vec![
        ("name", Value::from(sc.name.clone())),
        ("mass", num(sc.mass)),
        ("inertia", list(&sc.inertia)),
    ];
    if let Some(r) = sc.r_cn_n_init {
        craft.push(("r_CN_N_init", list(&r)));
    }
    if let Some(v) = sc.v_cn_n_init {
        craft.push(("v_CN_N_init", list(&v)));
    }
    craft.push(("sigma_BN_init", list(&sc.sigma_bn_init)));
    craft.push(("omega_BN_B_init", list(&sc.omega_bn_b_init)));
    craft.push(("add_to_task", Value::from(sc.add_to_task)));
    top.push(("spacecraft", map(craft)));

    if let Some(oe) = &cfg.orbit {
        top.push((
            "orbit",
            map(vec![
                ("a_m", num(oe.a)),
                ("e", num(oe.e)),
                ("i_rad", num(oe.i)),
                ("raan_rad", num(oe.raan)),
                ("argp_rad", num(oe.argp)),
                ("f_rad", num(oe.f)),
            ]),
        ));
    }
    if let Some(g) = &cfg.gravity {
        top.push((
            "gravity",
            map(vec![
                (
                    "bodies",
                    Value::Sequence(g.bodies.iter().map(|b| Value::from(b.clone())).collect()),
                ),
                ("central", Value::from(g.central.clone())),
                ("use_j2", Value::from(g.use_j2)),
            ]),
        ));
    }
    let c = &cfg.control;
    top.push((
        "control",
        map(vec![
            ("K", num(c.gains.k)),
            ("Ki", num(c.gains.ki)),
            ("P", num(c.gains.p)),
            ("integral_limit", num(c.gains.integral_limit)),
            ("sigma_R0N", list(&c.sigma_r0n)),
        ]),
    ));
    if let Some(m) = cfg.mode {
        top.push(("mode", Value::from(m.as_str())));
    }
    if let Some(e) = &cfg.epoch {
        top.push(("epoch", Value::from(e.clone())));
    }
    serde_yaml::to_string(&map(top)).expect("plain YAML values always serialise")
}

/// Numeric parameters reachable by dotted path, with their dimension.
pub const PARAMETERS: [(&str, usize); 17] = [
    ("spacecraft.mass", 1),
    ("spacecraft.r_CN_N_init", 3),
    ("spacecraft.v_CN_N_init", 3),
    ("spacecraft.sigma_BN_init", 3),
    ("spacecraft.omega_BN_B_init", 3),
    ("orbit.a_m", 1),
    ("orbit.e", 1),
    ("orbit.i_rad", 1),
    ("orbit.raan_rad", 1),
    ("orbit.argp_rad", 1),
    ("orbit.f_rad", 1),
    ("control.K", 1),
    ("control.Ki", 1),
    ("control.P", 1),
    ("control.integral_limit", 1),
    ("control.sigma_R0N", 3),
    ("simulation.simulation_time", 1),
];

/// Legacy attribute-style names accepted for parameter paths.
pub fn canonical_parameter(path: &str) -> &str {
    match path {
        "spacecraft_obj.hub.mHub" => "spacecraft.mass",
        "spacecraft_obj.hub.r_CN_NInit" => "spacecraft.r_CN_N_init",
        "spacecraft_obj.hub.v_CN_NInit" => "spacecraft.v_CN_N_init",
        other => other,
    }
}

pub fn parameter_dim(path: &str) -> Option<usize> {
    let path = canonical_parameter(path);
    PARAMETERS.iter().find(|(p, _)| *p == path).map(|(_, d)| *d)
}

/// Current value of a parameter, resolving orbit-derived initial states for
/// `kind`.
pub fn parameter_value(cfg: &ScenarioConfig, kind: ScenarioKind, path: &str) -> Option<Vec<f64>> {
    let orbit = cfg.orbit_for(kind);
    let v = match canonical_parameter(path) {
        "spacecraft.mass" => vec![cfg.spacecraft.mass],
        "spacecraft.r_CN_N_init" => cfg.initial_translation(kind).ok()?.0.as_slice().to_vec(),
        "spacecraft.v_CN_N_init" => cfg.initial_translation(kind).ok()?.1.as_slice().to_vec(),
        "spacecraft.sigma_BN_init" => cfg.spacecraft.sigma_bn_init.to_vec(),
        "spacecraft.omega_BN_B_init" => cfg.spacecraft.omega_bn_b_init.to_vec(),
        "orbit.a_m" => vec![orbit?.a],
        "orbit.e" => vec![orbit?.e],
        "orbit.i_rad" => vec![orbit?.i],
        "orbit.raan_rad" => vec![orbit?.raan],
        "orbit.argp_rad" => vec![orbit?.argp],
        "orbit.f_rad" => vec![orbit?.f],
        "control.K" => vec![cfg.control.gains.k],
        "control.Ki" => vec![cfg.control.gains.ki],
        "control.P" => vec![cfg.control.gains.p],
        "control.integral_limit" => vec![cfg.control.gains.integral_limit],
        "control.sigma_R0N" => cfg.control.sigma_r0n.to_vec(),
        "simulation.simulation_time" => vec![cfg.simulation.simulation_time],
        _ => return None,
    };
    Some(v)
}

/// Overwrites a parameter. Orbit parameters materialise the kind's default
/// orbit first so that untouched elements keep their values.
pub fn set_parameter(
    cfg: &mut ScenarioConfig,
    kind: ScenarioKind,
    path: &str,
    value: &[f64],
) -> Result<(), ScenarioError> {
    let canonical = canonical_parameter(path);
    let dim = parameter_dim(canonical).ok_or_else(|| ScenarioError::UnknownParameter(path.to_string()))?;
    if value.len() != dim {
        return Err(ScenarioError::ParameterShape {
            path: path.to_string(),
            expected: dim,
            got: value.len(),
        });
    }
    let v3 = || [value[0], value[1], value[2]];
    if canonical.starts_with("orbit.") && cfg.orbit.is_none() {
        cfg.orbit = Some(cfg.orbit_for(kind).unwrap_or_else(reference_orbit));
    }
    let x = value[0];
    match canonical {
        "spacecraft.mass" => cfg.spacecraft.mass = x,
        "spacecraft.r_CN_N_init" => cfg.spacecraft.r_cn_n_init = Some(v3()),
        "spacecraft.v_CN_N_init" => cfg.spacecraft.v_cn_n_init = Some(v3()),
        "spacecraft.sigma_BN_init" => cfg.spacecraft.sigma_bn_init = v3(),
        "spacecraft.omega_BN_B_init" => cfg.spacecraft.omega_bn_b_init = v3(),
        "control.K" => cfg.control.gains.k = x,
        "control.Ki" => cfg.control.gains.ki = x,
        "control.P" => cfg.control.gains.p = x,
        "control.integral_limit" => cfg.control.gains.integral_limit = x.abs(),
        "control.sigma_R0N" => cfg.control.sigma_r0n = v3(),
        "simulation.simulation_time" => cfg.simulation.simulation_time = x,
        orbit_key => {
            let oe = cfg.orbit.as_mut().expect("orbit materialised above");
            match orbit_key {
                "orbit.a_m" => oe.a = x,
                "orbit.e" => oe.e = x,
                "orbit.i_rad" => oe.i = x,
                "orbit.raan_rad" => oe.raan = x,
                "orbit.argp_rad" => oe.argp = x,
                _ => oe.f = x,
            }
        }
    }
    Ok(())
}
