//! Typed single-writer messages, input ports, gateways and recorders.
//!
//! A [`Message`] is a shared slot holding the latest payload written to it.
//! Modules read through an [`InputPort`] subscribed to a message. A message
//! created with [`Message::gateway`] can be re-pointed at another message at
//! any time; readers then see the new source on their next read.
//!
//! Reading a port that is unlinked, or a message that was never written,
//! yields `P::default()` with `is_written == false`.

use std::cell::RefCell;
use std::rc::Rc;

use thiserror::Error;

use crate::kernel::{ModuleError, SimTime, SysModel};

#[derive(Debug, Error, PartialEq)]
pub enum MessagingError {
    #[error("retargeting gateway `{0}` would create a forwarding cycle")]
    Cycle(String),
    #[error("sampling_time needs at least 2 data points, got {0}")]
    TooFewPoints(u64),
    #[error("simulation time step must be at least 1 ns")]
    ZeroStep,
}

/// Metadata attached to every read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MsgHeader {
    pub write_time: SimTime,
    pub write_count: u64,
}

impl MsgHeader {
    pub fn is_written(&self) -> bool {
        self.write_count > 0
    }
}

struct Slot<P> {
    name: String,
    payload: P,
    header: MsgHeader,
    gateway: bool,
    forward: Option<Message<P>>,
}

/// Shared single-writer message slot. Cloning yields another handle to the
/// same slot.
pub struct Message<P>(Rc<RefCell<Slot<P>>>);

impl<P> Clone for Message<P> {
    fn clone(&self) -> Self {
        Message(self.0.clone())
    }
}

impl<P: Clone + Default + 'static> Message<P> {
    pub fn new(name: &str) -> Self {
        Message(Rc::new(RefCell::new(Slot {
            name: name.to_string(),
            payload: P::default(),
            header: MsgHeader::default(),
            gateway: false,
            forward: None,
        })))
    }

    /// A forwarding slot. Until retargeted it holds a zero payload.
    pub fn gateway(name: &str) -> Self {
        let msg = Self::new(name);
        msg.0.borrow_mut().gateway = true;
        msg
    }

    pub fn name(&self) -> String {
        self.0.borrow().name.clone()
    }

    pub fn is_gateway(&self) -> bool {
        self.0.borrow().gateway
    }

    pub fn same_slot(&self, other: &Message<P>) -> bool {
        Rc::ptr_eq(&self.0, &other.0)
    }

    pub fn write(&self, payload: P, time: SimTime) {
        let mut slot = self.0.borrow_mut();
        slot.payload = payload;
        slot.header.write_time = time;
        slot.header.write_count += 1;
    }

    /// Restores the never-written state.
    pub fn clear(&self) {
        let mut slot = self.0.borrow_mut();
        slot.payload = P::default();
        slot.header = MsgHeader::default();
    }

    /// Latest payload and header, following gateway forwarding.
    pub fn read(&self) -> (P, MsgHeader) {
        let slot = self.0.borrow();
        match &slot.forward {
            Some(src) => src.read(),
            None => (slot.payload.clone(), slot.header),
        }
    }

    pub fn payload(&self) -> P {
        self.read().0
    }

    pub fn header(&self) -> MsgHeader {
        self.read().1
    }

    /// Points a gateway at `source`, or detaches it and writes a zero
    /// payload when `source` is `None`.
    pub fn retarget(&self, source: Option<&Message<P>>, time: SimTime) -> Result<(), MessagingError> {
        if let Some(src) = source {
            if src.forwards_to(self) {
                return Err(MessagingError::Cycle(self.name()));
            }
        }
        {
            let mut slot = self.0.borrow_mut();
            slot.forward = source.cloned();
        }
        if source.is_none() {
            self.write(P::default(), time);
        }
        Ok(())
    }

    pub fn source(&self) -> Option<Message<P>> {
        self.0.borrow().forward.clone()
    }

    fn forwards_to(&self, target: &Message<P>) -> bool {
        if self.same_slot(target) {
            return true;
        }
        match &self.0.borrow().forward {
            Some(next) => next.forwards_to(target),
            None => false,
        }
    }
}

/// Read side of a link. Payload types must match at compile time.
pub struct InputPort<P> {
    name: String,
    target: Option<Message<P>>,
}

impl<P> Clone for InputPort<P> {
    fn clone(&self) -> Self {
        InputPort {
            name: self.name.clone(),
            target: self.target.clone(),
        }
    }
}

impl<P: Clone + Default + 'static> InputPort<P> {
    pub fn new(name: &str) -> Self {
        InputPort {
            name: name.to_string(),
            target: None,
        }
    }

    pub fn subscribe_to(&mut self, msg: &Message<P>) {
        self.target = Some(msg.clone());
    }

    pub fn is_linked(&self) -> bool {
        self.target.is_some()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Fails with [`ModuleError::UnlinkedInput`] naming this port when unlinked.
    pub fn require_linked(&self) -> Result<(), ModuleError> {
        if self.is_linked() {
            Ok(())
        } else {
            Err(ModuleError::UnlinkedInput(self.name.clone()))
        }
    }

    pub fn read(&self) -> (P, MsgHeader) {
        match &self.target {
            Some(msg) => msg.read(),
            None => (P::default(), MsgHeader::default()),
        }
    }

    pub fn payload(&self) -> P {
        self.read().0
    }

    pub fn is_written(&self) -> bool {
        self.read().1.is_written()
    }
}

/// Sampling period that yields about `num_points` samples over `t_final`
/// when the simulation steps at `dt_sim`:
/// `floor(t_final / (dt_sim * (num_points - 1))) * dt_sim`, never below 1 ns.
pub fn sampling_time(t_final: SimTime, dt_sim: SimTime, num_points: u64) -> Result<SimTime, MessagingError> {
    if num_points < 2 {
        return Err(MessagingError::TooFewPoints(num_points));
    }
    if dt_sim == SimTime::ZERO {
        return Err(MessagingError::ZeroStep);
    }
    let denom = dt_sim.nanos() as u128 * (num_points as u128 - 1);
    let steps = t_final.nanos() as u128 / denom;
    let ns = (steps * dt_sim.nanos() as u128).max(1);
    Ok(SimTime::from_nanos(ns as u64))
}

struct RecorderData<P> {
    samples: Vec<(SimTime, P)>,
}

/// Sampled history of a message. Add a clone of the recorder to a task with
/// [`crate::kernel::SimContainer::add_recorder_to_task`] and keep another to
/// read the samples back.
pub struct Recorder<P> {
    tag: String,
    source: Message<P>,
    sampling: SimTime,
    data: Rc<RefCell<RecorderData<P>>>,
}

impl<P> Clone for Recorder<P> {
    fn clone(&self) -> Self {
        Recorder {
            tag: self.tag.clone(),
            source: self.source.clone(),
            sampling: self.sampling,
            data: self.data.clone(),
        }
    }
}

impl<P: Clone + Default + 'static> Recorder<P> {
    /// `sampling == 0` records every firing.
    pub fn new(source: &Message<P>, sampling: SimTime) -> Self {
        Recorder {
            tag: format!("{}Recorder", source.name()),
            source: source.clone(),
            sampling,
            data: Rc::new(RefCell::new(RecorderData { samples: Vec::new() })),
        }
    }

    pub fn sampling(&self) -> SimTime {
        self.sampling
    }

    /// Appends `payload` when at least one sampling period has passed since
    /// the previous sample. The first call always records.
    pub fn record(&self, time: SimTime, payload: P) {
        let mut data = self.data.borrow_mut();
        let due = match data.samples.last() {
            None => true,
            Some((last, _)) => time > *last && time >= *last + self.sampling,
        };
        if due {
            data.samples.push((time, payload));
        }
    }

    pub fn times(&self) -> Vec<SimTime> {
        self.data.borrow().samples.iter().map(|(t, _)| *t).collect()
    }

    pub fn values(&self) -> Vec<P> {
        self.data.borrow().samples.iter().map(|(_, p)| p.clone()).collect()
    }

    pub fn samples(&self) -> Vec<(SimTime, P)> {
        self.data.borrow().samples.clone()
    }

    pub fn len(&self) -> usize {
        self.data.borrow().samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&self) {
        self.data.borrow_mut().samples.clear();
    }
}

impl<P: Clone + Default + 'static> SysModel for Recorder<P> {
    fn model_tag(&self) -> &str {
        &self.tag
    }

    fn reset(&mut self, _time: SimTime) -> Result<(), ModuleError> {
        self.clear();
        Ok(())
    }

    fn update_state(&mut self, time: SimTime) -> Result<(), ModuleError> {
        let payload = self.source.payload();
        self.record(time, payload);
        Ok(())
    }
}
