//! Modular spacecraft GN&C simulation.
//!
//! The crate is organised the way a flight simulation is assembled:
//!
//! * [`kernel`]: simulation container, processes, tasks and the module lifecycle.
//! * [`messaging`]: typed messages, gateways and sampled recorders.
//! * [`astro`]: orbital elements, gravity, attitude math, RK4 and the spacecraft hub.
//! * [`ephem`]: analytic Earth/Sun ephemerides.
//! * [`fsw`]: navigation, guidance and MRP feedback control.
//! * [`scenario`]: YAML configuration, scenario assembly and exporters.
//! * [`montecarlo`]: seeded dispersion ensembles with an on-disk archive.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod astro;
pub mod ephem;
pub mod fsw;
pub mod kernel;
pub mod messaging;
pub mod montecarlo;
pub mod msgs;
pub mod scenario;
