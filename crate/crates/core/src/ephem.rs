//! Analytic ephemerides for the Earth and the Sun.
//!
//! States are expressed in an Earth-centred inertial frame. The Earth sits
//! at the origin; the Sun moves on a circular orbit of radius 1 AU in the
//! ecliptic plane (tilted by the J2000 obliquity about the x axis), with a
//! period of 365.25 days and zero phase at the simulation start.

use std::f64::consts::TAU;

use chrono::NaiveDateTime;
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::astro::{BodyPositions, GravityBody, AU};
use crate::kernel::{ModuleError, SimTime, SysModel};
use crate::messaging::{InputPort, Message};
use crate::msgs::{EphemerisMsg, SpicePlanetStateMsg};

/// Apparent solar period, s.
pub const SUN_PERIOD: f64 = 365.25 * 86400.0;
/// Mean obliquity of the ecliptic at J2000, rad.
pub const OBLIQUITY_J2000: f64 = 23.439_291_1 * std::f64::consts::PI / 180.0;

pub const SUPPORTED_BODIES: [&str; 2] = ["earth", "sun"];

#[derive(Debug, Error, PartialEq)]
pub enum EphemError {
    #[error("unsupported body `{0}` (supported: earth, sun)")]
    UnsupportedBody(String),
    #[error("zero base `{0}` is not among the records")]
    MissingBase(String),
    #[error("cannot parse epoch `{0}`; expected e.g. \"2000 Jan 1 11:59:28.000 (UTC)\"")]
    BadEpoch(String),
}

/// Calendar epoch of the simulation start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochSpec {
    pub utc_string: String,
    /// Seconds past 2000 Jan 1 12:00:00, leap seconds ignored.
    pub offset_seconds: f64,
}

impl EpochSpec {
    /// Parses `YYYY Mon D HH:MM:SS.sss (UTC)`; the zone suffix is optional.
    pub fn parse(text: &str) -> Result<Self, EphemError> {
        let trimmed = text.trim();
        let core = trimmed
            .strip_suffix("(UTC)")
            .or_else(|| trimmed.strip_suffix("UTC"))
            .unwrap_or(trimmed)
            .trim();
        let dt = NaiveDateTime::parse_from_str(core, "%Y %b %d %H:%M:%S%.f")
            .map_err(|_| EphemError::BadEpoch(text.to_string()))?;
        let j2000 =
            NaiveDateTime::parse_from_str("2000 Jan 1 12:00:00", "%Y %b %d %H:%M:%S").expect("constant epoch parses");
        let delta = dt - j2000;
        let offset_seconds = delta.num_milliseconds() as f64 / 1000.0;
        Ok(EpochSpec {
            utc_string: trimmed.to_string(),
            offset_seconds,
        })
    }

    pub fn j2000() -> Self {
        EpochSpec {
            utc_string: "2000 Jan 1 12:00:00.000 (UTC)".into(),
            offset_seconds: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EphemerisRecord {
    pub body: String,
    pub r_n: Vector3<f64>,
    pub v_n: Vector3<f64>,
    pub epoch_offset: SimTime,
}

/// Gravity body with the built-in constants for `name`. The Earth is
/// central by default.
pub fn create_body(name: &str) -> Result<GravityBody, EphemError> {
    match name.to_ascii_lowercase().as_str() {
        "earth" => Ok(GravityBody::earth()),
        "sun" => Ok(GravityBody::sun()),
        _ => Err(EphemError::UnsupportedBody(name.to_string())),
    }
}

fn sun_state(t_s: f64) -> (Vector3<f64>, Vector3<f64>) {
    let rate = TAU / SUN_PERIOD;
    let (s, c) = (rate * t_s).sin_cos();
    let (se, ce) = OBLIQUITY_J2000.sin_cos();
    let r = AU * Vector3::new(c, s * ce, s * se);
    let v = AU * rate * Vector3::new(-s, c * ce, c * se);
    (r, v)
}

/// Earth-centred state of `body` at simulation time `t`.
pub fn ephemeris_state(body: &str, _epoch: &EpochSpec, t: SimTime) -> Result<EphemerisRecord, EphemError> {
    let (r_n, v_n) = match body.to_ascii_lowercase().as_str() {
        "earth" => (Vector3::zeros(), Vector3::zeros()),
        "sun" => sun_state(t.as_secs_f64()),
        _ => return Err(EphemError::UnsupportedBody(body.to_string())),
    };
    Ok(EphemerisRecord {
        body: body.to_ascii_lowercase(),
        r_n,
        v_n,
        epoch_offset: t,
    })
}

/// Subtracts the state of `base` from every record.
pub fn zero_base_recenter(records: &[EphemerisRecord], base: &str) -> Result<Vec<EphemerisRecord>, EphemError> {
    let origin = records
        .iter()
        .find(|r| r.body.eq_ignore_ascii_case(base))
        .ok_or_else(|| EphemError::MissingBase(base.to_string()))?;
    let (r0, v0) = (origin.r_n, origin.v_n);
    Ok(records
        .iter()
        .map(|rec| EphemerisRecord {
            r_n: rec.r_n - r0,
            v_n: rec.v_n - v0,
            ..rec.clone()
        })
        .collect())
}

/// Body positions for the hub's gravity model, relative to `zero_base`.
#[derive(Debug, Clone)]
pub struct AnalyticEphemeris {
    pub zero_base: String,
}

impl BodyPositions for AnalyticEphemeris {
    fn position(&self, body: &str, t_s: f64) -> Vector3<f64> {
        let at = |name: &str| match name.to_ascii_lowercase().as_str() {
            "sun" => sun_state(t_s).0,
            _ => Vector3::zeros(),
        };
        at(body) - at(&self.zero_base)
    }
}

/// Publishes planet states for a fixed list of bodies, recentred on a zero
/// base. Stands in for a SPICE-backed ephemeris interface.
pub struct EphemerisProvider {
    pub tag: String,
    pub epoch: EpochSpec,
    pub zero_base: String,
    bodies: Vec<String>,
    pub planet_state_out_msgs: Vec<Message<SpicePlanetStateMsg>>,
}

impl EphemerisProvider {
    pub fn new(tag: &str, bodies: &[&str], epoch: EpochSpec) -> Result<Self, EphemError> {
        for b in bodies {
            create_body(b)?;
        }
        Ok(EphemerisProvider {
            tag: tag.to_string(),
            epoch,
            zero_base: "earth".into(),
            bodies: bodies.iter().map(|b| b.to_ascii_lowercase()).collect(),
            planet_state_out_msgs: bodies
                .iter()
                .map(|b| Message::new(&format!("{b}PlanetStateOutMsg")))
                .collect(),
        })
    }

    pub fn bodies(&self) -> &[String] {
        &self.bodies
    }

    pub fn records(&self, t: SimTime) -> Result<Vec<EphemerisRecord>, EphemError> {
        let raw = self
            .bodies
            .iter()
            .map(|b| ephemeris_state(b, &self.epoch, t))
            .collect::<Result<Vec<_>, _>>()?;
        zero_base_recenter(&raw, &self.zero_base)
    }
}

impl SysModel for EphemerisProvider {
    fn model_tag(&self) -> &str {
        &self.tag
    }

    fn reset(&mut self, _time: SimTime) -> Result<(), ModuleError> {
        if !self.bodies.iter().any(|b| b.eq_ignore_ascii_case(&self.zero_base)) {
            return Err(ModuleError::Failed(
                EphemError::MissingBase(self.zero_base.clone()).to_string(),
            ));
        }
        self.planet_state_out_msgs.iter().for_each(Message::clear);
        Ok(())
    }

    fn update_state(&mut self, time: SimTime) -> Result<(), ModuleError> {
        let records = self.records(time).map_err(|e| ModuleError::Failed(e.to_string()))?;
        for (rec, msg) in records.into_iter().zip(&self.planet_state_out_msgs) {
            msg.write(
                SpicePlanetStateMsg {
                    planet_name: rec.body,
                    position_vector: rec.r_n,
                    velocity_vector: rec.v_n,
                    j2000_current: self.epoch.offset_seconds + time.as_secs_f64(),
                },
                time,
            );
        }
        Ok(())
    }
}

/// Converts planet-state messages into ephemeris messages, one output per
/// input in the order the inputs were added.
pub struct EphemerisConverter {
    pub tag: String,
    inputs: Vec<InputPort<SpicePlanetStateMsg>>,
    pub ephem_out_msgs: Vec<Message<EphemerisMsg>>,
}

impl EphemerisConverter {
    pub fn new(tag: &str) -> Self {
        EphemerisConverter {
            tag: tag.to_string(),
            inputs: Vec::new(),
            ephem_out_msgs: Vec::new(),
        }
    }

    /// Returns the output message paired with the new input.
    pub fn add_spice_input_msg(&mut self, msg: &Message<SpicePlanetStateMsg>) -> Message<EphemerisMsg> {
        let mut port = InputPort::new(&format!("spiceInMsgs[{}]", self.inputs.len()));
        port.subscribe_to(msg);
        self.inputs.push(port);
        let out = Message::new(&format!("ephemOutMsgs[{}]", self.ephem_out_msgs.len()));
        self.ephem_out_msgs.push(out.clone());
        out
    }
}

impl SysModel for EphemerisConverter {
    fn model_tag(&self) -> &str {
        &self.tag
    }

    fn reset(&mut self, _time: SimTime) -> Result<(), ModuleError> {
        self.ephem_out_msgs.iter().for_each(Message::clear);
        Ok(())
    }

    fn update_state(&mut self, time: SimTime) -> Result<(), ModuleError> {
        for (port, out) in self.inputs.iter().zip(&self.ephem_out_msgs) {
            let p = port.payload();
            out.write(
                EphemerisMsg {
                    r_bdy_zero_n: p.position_vector,
                    v_bdy_zero_n: p.velocity_vector,
                    time_tag: time.as_secs_f64(),
                },
                time,
            );
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::astro::{MU_EARTH, MU_SUN};
    use crate::kernel::{sec2nano, SimContainer};

    #[test]
    fn body_factory() {
        let earth = create_body("earth").unwrap();
        assert_eq!(earth.mu, MU_EARTH);
        assert!(earth.is_central);
        let sun = create_body("sun").unwrap();
        assert_eq!(sun.mu, MU_SUN);
        assert!(!sun.is_central);
        let err = create_body("mars").unwrap_err();
        assert_eq!(err, EphemError::UnsupportedBody("mars".into()));
        assert!(err.to_string().contains("unsupported body"));
        assert!(err.to_string().contains("earth, sun"));
    }

    #[test]
    fn epoch_parsing() {
        let e = EpochSpec::parse("2000 Jan 1 11:59:28.000 (UTC)").unwrap();
        assert_eq!(e.offset_seconds, -32.0);
        let e = EpochSpec::parse("2024 Mar 15 06:30:00.250").unwrap();
        // 8840 days after J2000 noon minus 5.5 h, plus 0.25 s
        assert_eq!(e.offset_seconds, 8839.0 * 86400.0 + 18.5 * 3600.0 + 0.25);
        assert!(EpochSpec::parse("yesterday").is_err());
    }

    #[test]
    fn earth_at_origin_sun_at_one_au() {
        let epoch = EpochSpec::j2000();
        for t in [0.0, 1234.5, 1e7] {
            let e = ephemeris_state("earth", &epoch, sec2nano(t)).unwrap();
            assert_eq!(e.r_n, Vector3::zeros());
        }
        let s = ephemeris_state("sun", &epoch, SimTime::ZERO).unwrap();
        assert_eq!(s.r_n, Vector3::new(AU, 0.0, 0.0));
    }

    #[test]
    fn sun_quarter_period() {
        let epoch = EpochSpec::j2000();
        let s0 = ephemeris_state("sun", &epoch, SimTime::ZERO).unwrap();
        let sq = ephemeris_state("sun", &epoch, sec2nano(SUN_PERIOD / 4.0)).unwrap();
        assert!(s0.r_n.dot(&sq.r_n).abs() / (AU * AU) < 1e-12);
        assert!((sq.r_n.norm() - AU).abs() / AU < 1e-15);
        let speed = TAU * AU / SUN_PERIOD;
        assert!((sq.v_n.norm() - speed).abs() / speed < 1e-14);
    }

    #[test]
    fn sun_orbit_closes() {
        let epoch = EpochSpec::j2000();
        let t = sec2nano(1.0e6);
        let a = ephemeris_state("sun", &epoch, t).unwrap();
        let b = ephemeris_state("sun", &epoch, t + sec2nano(SUN_PERIOD)).unwrap();
        assert!((a.r_n - b.r_n).norm() / AU < 1e-9);
    }

    #[test]
    fn recentering() {
        let epoch = EpochSpec::j2000();
        let t = sec2nano(5.0e6);
        let recs = vec![
            ephemeris_state("sun", &epoch, t).unwrap(),
            ephemeris_state("earth", &epoch, t).unwrap(),
        ];
        let on_earth = zero_base_recenter(&recs, "earth").unwrap();
        assert_eq!(on_earth[1].r_n, Vector3::zeros());
        assert_eq!(on_earth[0].r_n, recs[0].r_n);
        assert_eq!(zero_base_recenter(&on_earth, "earth").unwrap(), on_earth);
        let via_sun = zero_base_recenter(&zero_base_recenter(&recs, "sun").unwrap(), "earth").unwrap();
        for (a, b) in via_sun.iter().zip(&on_earth) {
            assert!((a.r_n - b.r_n).norm() <= 1e-16 * AU);
            assert!((a.v_n - b.v_n).norm() <= 1e-12);
        }
        let on_sun = zero_base_recenter(&recs, "sun").unwrap();
        assert_eq!(on_sun[0].r_n, Vector3::zeros());
        assert_eq!(on_sun[1].r_n, -recs[0].r_n);
        assert_eq!(
            zero_base_recenter(&recs, "moon"),
            Err(EphemError::MissingBase("moon".into()))
        );
    }

    #[test]
    fn provider_and_converter_publish() {
        let provider = EphemerisProvider::new("SpiceInterface", &["sun", "earth"], EpochSpec::j2000()).unwrap();
        let mut conv = EphemerisConverter::new("earthEphem");
        let earth_out = conv.add_spice_input_msg(&provider.planet_state_out_msgs[1]);
        let sun_msg = provider.planet_state_out_msgs[0].clone();
        let mut sim = SimContainer::new();
        let p = sim.create_process("p", None).unwrap();
        sim.create_task(p, "t", sec2nano(10.0)).unwrap();
        sim.add_model_to_task("t", provider, Some(200)).unwrap();
        sim.add_model_to_task("t", conv, Some(199)).unwrap();
        sim.initialize_simulation().unwrap();
        sim.configure_stop_time(sec2nano(20.0)).unwrap();
        sim.execute_simulation().unwrap();
        assert_eq!(earth_out.payload().r_bdy_zero_n, Vector3::zeros());
        assert_eq!(earth_out.payload().time_tag, 20.0);
        let sun = sun_msg.payload();
        assert_eq!(sun.planet_name, "sun");
        assert!((sun.position_vector.norm() - AU).abs() / AU < 1e-15);
    }
}
