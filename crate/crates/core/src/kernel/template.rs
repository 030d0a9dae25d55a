//! Minimal reference module used to exercise the lifecycle.

use crate::messaging::{InputPort, Message};

use super::{ModuleError, SimTime, SysModel};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CModuleTemplateMsg {
    pub data_vector: [f64; 3],
}

/// Counts its updates in `dummy` and publishes `input + [dummy, 0, 0]`.
pub struct CModuleTemplate {
    pub tag: String,
    pub dummy: f64,
    pub data_in_msg: InputPort<CModuleTemplateMsg>,
    pub data_out_msg: Message<CModuleTemplateMsg>,
}

impl CModuleTemplate {
    pub fn new(tag: &str) -> Self {
        CModuleTemplate {
            tag: tag.to_string(),
            dummy: 0.0,
            data_in_msg: InputPort::new("dataInMsg"),
            data_out_msg: Message::new("dataOutMsg"),
        }
    }
}

impl SysModel for CModuleTemplate {
    fn model_tag(&self) -> &str {
        &self.tag
    }

    fn reset(&mut self, _time: SimTime) -> Result<(), ModuleError> {
        self.dummy = 0.0;
        self.data_out_msg.clear();
        Ok(())
    }

    fn update_state(&mut self, time: SimTime) -> Result<(), ModuleError> {
        self.dummy += 1.0;
        let input = self.data_in_msg.payload();
        let mut out = input;
        out.data_vector[0] += self.dummy;
        self.data_out_msg.write(out, time);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{sec2nano, SimContainer};

    #[test]
    fn lifecycle_trace() {
        let mut sim = SimContainer::new();
        let p = sim.create_process("dynamicsProcess", None).unwrap();
        sim.create_task(p, "dynamicsTask", sec2nano(5.0)).unwrap();
        let mut module = CModuleTemplate::new("cModuleTemplate");
        module.dummy = -10.0;
        sim.add_model_to_task("dynamicsTask", module, Some(10)).unwrap();
        let dummy = |sim: &SimContainer| sim.find_model::<CModuleTemplate>("cModuleTemplate").unwrap().dummy;
        assert_eq!(dummy(&sim), -10.0);
        sim.initialize_simulation().unwrap();
        assert_eq!(dummy(&sim), 0.0);
        sim.single_step_processes().unwrap();
        assert_eq!(dummy(&sim), 1.0);
    }

    #[test]
    fn chained_templates_pass_data() {
        let a = CModuleTemplate::new("a");
        let mut b = CModuleTemplate::new("b");
        b.data_in_msg.subscribe_to(&a.data_out_msg);
        let b_out = b.data_out_msg.clone();
        let mut sim = SimContainer::new();
        let p = sim.create_process("p", None).unwrap();
        sim.create_task(p, "t", sec2nano(1.0)).unwrap();
        sim.add_model_to_task("t", a, Some(2)).unwrap();
        sim.add_model_to_task("t", b, Some(1)).unwrap();
        sim.initialize_simulation().unwrap();
        sim.single_step_processes().unwrap();
        assert_eq!(b_out.payload().data_vector, [2.0, 0.0, 0.0]);
    }
}
