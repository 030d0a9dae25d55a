//! Fixed-rate execution engine.
//!
//! A [`SimContainer`] owns processes, each process owns tasks, and each task
//! owns an ordered list of modules. Every task fires at integer multiples of
//! its rate starting at t = 0. At one firing time, processes run in priority
//! order, tasks in the order they were created within their process, and
//! modules in task priority order.

mod template;
mod time;

use std::any::Any;
use std::fmt::Write as _;

use thiserror::Error;

pub use template::{CModuleTemplate, CModuleTemplateMsg};
pub use time::{min2nano, sec2nano, SimTime, NANO2SEC, NANOS_PER_SEC};

/// Errors raised by a module's lifecycle hooks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModuleError {
    #[error("required input `{0}` is not linked")]
    UnlinkedInput(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("{0}")]
    Failed(String),
}

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("process `{0}` already exists")]
    DuplicateProcess(String),
    #[error("task `{0}` already exists")]
    DuplicateTask(String),
    #[error("unknown task `{0}`")]
    UnknownTask(String),
    #[error("unknown process handle {0}")]
    UnknownProcess(usize),
    #[error("task `{0}` must have a rate greater than zero")]
    ZeroRate(String),
    #[error("simulation is already initialized; the execution hierarchy is frozen")]
    AlreadyInitialized,
    #[error("simulation has not been initialized")]
    NotInitialized,
    #[error("simulation has no processes")]
    NoProcesses,
    #[error("stop time {stop} is before the current clock {clock}")]
    StopBeforeClock { stop: SimTime, clock: SimTime },
    #[error("invalid time value {0} s")]
    InvalidTime(f64),
    #[error("reset of module `{tag}` failed: {source}")]
    Reset {
        tag: String,
        #[source]
        source: ModuleError,
    },
    #[error("update of module `{tag}` at {time} failed: {source}")]
    Update {
        tag: String,
        time: SimTime,
        #[source]
        source: ModuleError,
    },
}

/// Lifecycle interface implemented by every simulation module.
///
/// `reset` runs once per [`SimContainer::initialize_simulation`];
/// `update_state` runs at every firing of the owning task.
pub trait SysModel: Any {
    fn model_tag(&self) -> &str;

    fn reset(&mut self, time: SimTime) -> Result<(), ModuleError>;

    fn update_state(&mut self, time: SimTime) -> Result<(), ModuleError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProcessHandle(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TaskHandle(usize);

/// Position class of a module inside its task. Lower classes run first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Placement {
    Priority(i64),
    Unprioritized,
    Recorder,
}

impl Placement {
    /// `true` when a module with placement `self` must run before `other`.
    fn runs_before(self, other: Placement) -> bool {
        match (self, other) {
            (Placement::Priority(a), Placement::Priority(b)) => a > b,
            (Placement::Priority(_), _) => true,
            (Placement::Unprioritized, Placement::Recorder) => true,
            _ => false,
        }
    }
}

struct ModuleEntry {
    placement: Placement,
    module: Box<dyn SysModel>,
}

struct Task {
    name: String,
    rate: SimTime,
    enabled: bool,
    next_fire: SimTime,
    modules: Vec<ModuleEntry>,
}

struct Process {
    name: String,
    priority: Option<i64>,
    tasks: Vec<usize>,
}

/// Simulation container: the root of the process → task → module hierarchy.
#[derive(Default)]
pub struct SimContainer {
    processes: Vec<Process>,
    tasks: Vec<Task>,
    registered: Vec<String>,
    clock: SimTime,
    stop_time: Option<SimTime>,
    last_step: Option<SimTime>,
    initialized: bool,
}

impl SimContainer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn create_process(&mut self, name: &str, priority: Option<i64>) -> Result<ProcessHandle, KernelError> {
        if self.initialized {
            return Err(KernelError::AlreadyInitialized);
        }
        if self.processes.iter().any(|p| p.name == name) {
            return Err(KernelError::DuplicateProcess(name.to_string()));
        }
        self.processes.push(Process {
            name: name.to_string(),
            priority,
            tasks: Vec::new(),
        });
        Ok(ProcessHandle(self.processes.len() - 1))
    }

    /// Creates a task with update period `rate` and attaches it to `process`.
    /// Tasks start enabled.
    pub fn create_task(
        &mut self,
        process: ProcessHandle,
        name: &str,
        rate: SimTime,
    ) -> Result<TaskHandle, KernelError> {
        if self.initialized {
            return Err(KernelError::AlreadyInitialized);
        }
        if rate == SimTime::ZERO {
            return Err(KernelError::ZeroRate(name.to_string()));
        }
        if self.tasks.iter().any(|t| t.name == name) {
            return Err(KernelError::DuplicateTask(name.to_string()));
        }
        let proc = self
            .processes
            .get_mut(process.0)
            .ok_or(KernelError::UnknownProcess(process.0))?;
        self.tasks.push(Task {
            name: name.to_string(),
            rate,
            enabled: true,
            next_fire: SimTime::ZERO,
            modules: Vec::new(),
        });
        let idx = self.tasks.len() - 1;
        proc.tasks.push(idx);
        Ok(TaskHandle(idx))
    }

    /// Adds a module to a task. Modules with a priority run in descending
    /// priority order; modules without one run afterwards in insertion order.
    pub fn add_model_to_task<M: SysModel>(
        &mut self,
        task_name: &str,
        module: M,
        priority: Option<i64>,
    ) -> Result<(), KernelError> {
        let placement = match priority {
            Some(p) => Placement::Priority(p),
            None => Placement::Unprioritized,
        };
        self.insert_module(task_name, Box::new(module), placement)
    }

    /// Adds a recorder (or any observer) that runs after every other module of
    /// the task, so it sees all writes made during the same firing.
    pub fn add_recorder_to_task<M: SysModel>(&mut self, task_name: &str, recorder: M) -> Result<(), KernelError> {
        self.insert_module(task_name, Box::new(recorder), Placement::Recorder)
    }

    fn insert_module(
        &mut self,
        task_name: &str,
        module: Box<dyn SysModel>,
        placement: Placement,
    ) -> Result<(), KernelError> {
        if self.initialized {
            return Err(KernelError::AlreadyInitialized);
        }
        let task = self
            .tasks
            .iter_mut()
            .find(|t| t.name == task_name)
            .ok_or_else(|| KernelError::UnknownTask(task_name.to_string()))?;
        let pos = task
            .modules
            .iter()
            .position(|e| placement.runs_before(e.placement))
            .unwrap_or(task.modules.len());
        task.modules.insert(pos, ModuleEntry { placement, module });
        Ok(())
    }

    /// Declares a model tag as part of the simulation. Declared tags that end
    /// up in no task are reported by [`SimContainer::orphan_models`].
    pub fn register_model(&mut self, tag: &str) {
        if !self.registered.iter().any(|t| t == tag) {
            self.registered.push(tag.to_string());
        }
    }

    /// Registered model tags that were never added to a task. Such modules
    /// never run, and nothing else reports it.
    pub fn orphan_models(&self) -> Vec<String> {
        self.registered
            .iter()
            .filter(|tag| {
                !self
                    .tasks
                    .iter()
                    .any(|t| t.modules.iter().any(|e| e.module.model_tag() == tag.as_str()))
            })
            .cloned()
            .collect()
    }

    pub fn enable_task(&mut self, name: &str) -> Result<(), KernelError> {
        let base = match self.last_step {
            Some(t) => t + SimTime::from_nanos(1),
            None => self.clock,
        };
        let task = self.task_mut(name)?;
        if !task.enabled {
            task.enabled = true;
            task.next_fire = base.ceil_to_multiple(task.rate);
        }
        Ok(())
    }

    pub fn disable_task(&mut self, name: &str) -> Result<(), KernelError> {
        self.task_mut(name)?.enabled = false;
        Ok(())
    }

    pub fn is_task_enabled(&self, name: &str) -> Option<bool> {
        self.tasks.iter().find(|t| t.name == name).map(|t| t.enabled)
    }

    fn task_mut(&mut self, name: &str) -> Result<&mut Task, KernelError> {
        self.tasks
            .iter_mut()
            .find(|t| t.name == name)
            .ok_or_else(|| KernelError::UnknownTask(name.to_string()))
    }

    /// Resets every module once at t = 0 and rewinds the clock.
    pub fn initialize_simulation(&mut self) -> Result<(), KernelError> {
        if self.processes.is_empty() {
            return Err(KernelError::NoProcesses);
        }
        self.clock = SimTime::ZERO;
        self.last_step = None;
        let order = self.process_order();
        for p in order {
            for &ti in &self.processes[p].tasks {
                let task = &mut self.tasks[ti];
                task.next_fire = SimTime::ZERO;
                for entry in &mut task.modules {
                    entry.module.reset(SimTime::ZERO).map_err(|source| KernelError::Reset {
                        tag: entry.module.model_tag().to_string(),
                        source,
                    })?;
                }
            }
        }
        self.initialized = true;
        Ok(())
    }

    /// Time of the next pending firing over all enabled tasks.
    pub fn next_event_time(&self) -> Option<SimTime> {
        self.tasks.iter().filter(|t| t.enabled).map(|t| t.next_fire).min()
    }

    /// Advances the clock to the earliest pending firing and runs every task
    /// due at that time. Does nothing when no task is enabled.
    pub fn single_step_processes(&mut self) -> Result<(), KernelError> {
        if !self.initialized {
            return Err(KernelError::NotInitialized);
        }
        let Some(now) = self.next_event_time() else {
            return Ok(());
        };
        self.clock = now;
        self.last_step = Some(now);
        for p in self.process_order() {
            for &ti in &self.processes[p].tasks {
                let task = &mut self.tasks[ti];
                if !task.enabled || task.next_fire != now {
                    continue;
                }
                for entry in &mut task.modules {
                    entry.module.update_state(now).map_err(|source| KernelError::Update {
                        tag: entry.module.model_tag().to_string(),
                        time: now,
                        source,
                    })?;
                }
                task.next_fire += task.rate;
            }
        }
        Ok(())
    }

    pub fn configure_stop_time(&mut self, stop: SimTime) -> Result<(), KernelError> {
        if stop < self.clock {
            return Err(KernelError::StopBeforeClock {
                stop,
                clock: self.clock,
            });
        }
        self.stop_time = Some(stop);
        Ok(())
    }

    /// Steps until every firing at or before the stop time has run, then
    /// parks the clock at the stop time. Without a configured stop time the
    /// current clock is used.
    pub fn execute_simulation(&mut self) -> Result<(), KernelError> {
        if !self.initialized {
            return Err(KernelError::NotInitialized);
        }
        let stop = self.stop_time.unwrap_or(self.clock);
        while let Some(next) = self.next_event_time() {
            if next > stop {
                break;
            }
            self.single_step_processes()?;
        }
        self.clock = self.clock.max(stop);
        Ok(())
    }

    pub fn clock(&self) -> SimTime {
        self.clock
    }

    pub fn stop_time(&self) -> Option<SimTime> {
        self.stop_time
    }

    pub fn is_initialized(&self) -> bool {
        self.initialized
    }

    pub fn process_names(&self) -> Vec<&str> {
        self.process_order()
            .into_iter()
            .map(|p| self.processes[p].name.as_str())
            .collect()
    }

    /// Looks up a module by tag and downcasts it to its concrete type.
    pub fn find_model<T: SysModel>(&self, tag: &str) -> Option<&T> {
        self.tasks
            .iter()
            .flat_map(|t| t.modules.iter())
            .filter(|e| e.module.model_tag() == tag)
            .find_map(|e| (e.module.as_ref() as &dyn Any).downcast_ref::<T>())
    }

    pub fn find_model_mut<T: SysModel>(&mut self, tag: &str) -> Option<&mut T> {
        self.tasks
            .iter_mut()
            .flat_map(|t| t.modules.iter_mut())
            .filter(|e| e.module.model_tag() == tag)
            .find_map(|e| (e.module.as_mut() as &mut dyn Any).downcast_mut::<T>())
    }

    /// Process indices in execution order: prioritized processes by
    /// descending priority, then the rest in creation order.
    fn process_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.processes.len()).collect();
        // Stable sort keeps creation order among equal keys.
        idx.sort_by_key(|&i| match self.processes[i].priority {
            Some(p) => (0, std::cmp::Reverse(p)),
            None => (1, std::cmp::Reverse(0)),
        });
        idx
    }

    /// Text rendering of the execution hierarchy, one node per line with two
    /// spaces of indentation per level.
    pub fn show_execution_order(&self) -> String {
        let mut out = String::from("Execution order\n");
        for p in self.process_order() {
            let proc = &self.processes[p];
            out.push_str(&proc.name);
            if let Some(prio) = proc.priority {
                let _ = write!(out, " [{prio}]");
            }
            out.push('\n');
            for &ti in &proc.tasks {
                let task = &self.tasks[ti];
                let _ = write!(out, "  {} ({:.3} s)", task.name, task.rate.as_secs_f64());
                if !task.enabled {
                    out.push_str(" disabled");
                }
                out.push('\n');
                for entry in &task.modules {
                    let _ = write!(out, "    {}", entry.module.model_tag());
                    if let Placement::Priority(prio) = entry.placement {
                        let _ = write!(out, " [{prio}]");
                    }
                    out.push('\n');
                }
            }
        }
        for orphan in self.orphan_models() {
            let _ = writeln!(out, "orphan {orphan} (not added to any task)");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::RefCell;
    use std::rc::Rc;

    type Log = Rc<RefCell<Vec<(String, u64)>>>;

    struct Probe {
        tag: String,
        log: Log,
        resets: Rc<RefCell<u32>>,
    }

    impl Probe {
        fn new(tag: &str, log: &Log) -> Self {
            Probe {
                tag: tag.to_string(),
                log: log.clone(),
                resets: Rc::new(RefCell::new(0)),
            }
        }
    }

    impl SysModel for Probe {
        fn model_tag(&self) -> &str {
            &self.tag
        }
        fn reset(&mut self, _time: SimTime) -> Result<(), ModuleError> {
            *self.resets.borrow_mut() += 1;
            Ok(())
        }
        fn update_state(&mut self, time: SimTime) -> Result<(), ModuleError> {
            self.log.borrow_mut().push((self.tag.clone(), time.nanos()));
            Ok(())
        }
    }

    fn tags(log: &Log) -> Vec<String> {
        log.borrow().iter().map(|(t, _)| t.clone()).collect()
    }

    #[test]
    fn process_priority_and_insertion_ties() {
        let log: Log = Default::default();
        let mut sim = SimContainer::new();
        let p = sim.create_process("p", Some(1)).unwrap();
        let q = sim.create_process("q", Some(5)).unwrap();
        sim.create_task(p, "tp", sec2nano(1.0)).unwrap();
        sim.create_task(q, "tq", sec2nano(1.0)).unwrap();
        sim.add_model_to_task("tp", Probe::new("P", &log), None).unwrap();
        sim.add_model_to_task("tq", Probe::new("Q", &log), None).unwrap();
        sim.initialize_simulation().unwrap();
        sim.single_step_processes().unwrap();
        assert_eq!(tags(&log), ["Q", "P"]);

        let log: Log = Default::default();
        let mut sim = SimContainer::new();
        let p1 = sim.create_process("p1", None).unwrap();
        let p2 = sim.create_process("p2", None).unwrap();
        sim.create_task(p1, "t1", sec2nano(1.0)).unwrap();
        sim.create_task(p2, "t2", sec2nano(1.0)).unwrap();
        sim.add_model_to_task("t1", Probe::new("A", &log), None).unwrap();
        sim.add_model_to_task("t2", Probe::new("B", &log), None).unwrap();
        sim.initialize_simulation().unwrap();
        sim.single_step_processes().unwrap();
        assert_eq!(tags(&log), ["A", "B"]);
    }

    #[test]
    fn duplicate_names_and_frozen_registry() {
        let mut sim = SimContainer::new();
        let p = sim.create_process("dynamicsProcess", None).unwrap();
        assert!(matches!(
            sim.create_process("dynamicsProcess", None),
            Err(KernelError::DuplicateProcess(_))
        ));
        sim.create_task(p, "t", sec2nano(1.0)).unwrap();
        assert!(matches!(
            sim.create_task(p, "t", sec2nano(2.0)),
            Err(KernelError::DuplicateTask(_))
        ));
        assert!(matches!(
            sim.create_task(p, "z", SimTime::ZERO),
            Err(KernelError::ZeroRate(_))
        ));
        let log: Log = Default::default();
        assert!(matches!(
            sim.add_model_to_task("nope", Probe::new("x", &log), None),
            Err(KernelError::UnknownTask(_))
        ));
        sim.initialize_simulation().unwrap();
        assert!(matches!(
            sim.create_process("late", None),
            Err(KernelError::AlreadyInitialized)
        ));
        assert!(matches!(
            sim.add_model_to_task("t", Probe::new("x", &log), None),
            Err(KernelError::AlreadyInitialized)
        ));
    }

    #[test]
    fn module_priority_order() {
        let log: Log = Default::default();
        let mut sim = SimContainer::new();
        let p = sim.create_process("p", None).unwrap();
        sim.create_task(p, "t", sec2nano(1.0)).unwrap();
        for (tag, prio) in [("A", None), ("B", Some(10)), ("C", None)] {
            sim.add_model_to_task("t", Probe::new(tag, &log), prio).unwrap();
        }
        sim.initialize_simulation().unwrap();
        sim.single_step_processes().unwrap();
        assert_eq!(tags(&log), ["B", "A", "C"]);
    }

    #[test]
    fn recorders_run_last() {
        let log: Log = Default::default();
        let mut sim = SimContainer::new();
        let p = sim.create_process("p", None).unwrap();
        sim.create_task(p, "t", sec2nano(1.0)).unwrap();
        sim.add_recorder_to_task("t", Probe::new("rec", &log)).unwrap();
        sim.add_model_to_task("t", Probe::new("late", &log), None).unwrap();
        sim.add_model_to_task("t", Probe::new("low", &log), Some(-5)).unwrap();
        sim.initialize_simulation().unwrap();
        sim.single_step_processes().unwrap();
        assert_eq!(tags(&log), ["low", "late", "rec"]);
    }

    #[test]
    fn firing_times_two_rates() {
        let log: Log = Default::default();
        let mut sim = SimContainer::new();
        let p = sim.create_process("p", None).unwrap();
        sim.create_task(p, "two", sec2nano(2.0)).unwrap();
        sim.create_task(p, "three", sec2nano(3.0)).unwrap();
        sim.add_model_to_task("two", Probe::new("two", &log), None).unwrap();
        sim.add_model_to_task("three", Probe::new("three", &log), None).unwrap();
        sim.initialize_simulation().unwrap();

        sim.single_step_processes().unwrap();
        assert_eq!(sim.clock(), SimTime::ZERO);
        assert_eq!(log.borrow().len(), 2);
        sim.single_step_processes().unwrap();
        assert_eq!(sim.clock(), sec2nano(2.0));

        sim.configure_stop_time(sec2nano(6.0)).unwrap();
        sim.execute_simulation().unwrap();
        let at = |tag: &str| -> Vec<u64> {
            log.borrow()
                .iter()
                .filter(|(t, _)| t == tag)
                .map(|(_, ns)| ns / NANOS_PER_SEC)
                .collect()
        };
        assert_eq!(at("two"), [0, 2, 4, 6]);
        assert_eq!(at("three"), [0, 3, 6]);
    }

    #[test]
    fn minimum_rate_fires_every_nanosecond() {
        let log: Log = Default::default();
        let mut sim = SimContainer::new();
        let p = sim.create_process("p", None).unwrap();
        sim.create_task(p, "fast", SimTime::from_nanos(1)).unwrap();
        sim.add_model_to_task("fast", Probe::new("m", &log), None).unwrap();
        sim.initialize_simulation().unwrap();
        sim.configure_stop_time(SimTime::from_nanos(9)).unwrap();
        sim.execute_simulation().unwrap();
        let times: Vec<u64> = log.borrow().iter().map(|(_, t)| *t).collect();
        assert_eq!(times, (0..=9).collect::<Vec<_>>());
    }

    #[test]
    fn step_before_init_rejected_and_no_tasks_is_noop() {
        let mut sim = SimContainer::new();
        assert!(matches!(sim.initialize_simulation(), Err(KernelError::NoProcesses)));
        let p = sim.create_process("p", None).unwrap();
        assert!(matches!(sim.single_step_processes(), Err(KernelError::NotInitialized)));
        sim.create_task(p, "t", sec2nano(1.0)).unwrap();
        sim.disable_task("t").unwrap();
        sim.initialize_simulation().unwrap();
        sim.single_step_processes().unwrap();
        assert_eq!(sim.clock(), SimTime::ZERO);
        assert_eq!(sim.next_event_time(), None);
    }

    #[test]
    fn stop_time_rules() {
        let log: Log = Default::default();
        let mut sim = SimContainer::new();
        let p = sim.create_process("p", None).unwrap();
        sim.create_task(p, "t", sec2nano(1.0)).unwrap();
        sim.add_model_to_task("t", Probe::new("m", &log), None).unwrap();
        sim.initialize_simulation().unwrap();
        sim.configure_stop_time(SimTime::ZERO).unwrap();
        sim.execute_simulation().unwrap();
        assert_eq!(log.borrow().len(), 1);
        sim.configure_stop_time(sec2nano(3.5)).unwrap();
        sim.execute_simulation().unwrap();
        assert_eq!(log.borrow().len(), 4);
        assert_eq!(sim.clock(), sec2nano(3.5));
        assert!(matches!(
            sim.configure_stop_time(sec2nano(1.0)),
            Err(KernelError::StopBeforeClock { .. })
        ));
    }

    #[test]
    fn reset_once_per_initialize() {
        let log: Log = Default::default();
        let probe = Probe::new("m", &log);
        let resets = probe.resets.clone();
        let mut sim = SimContainer::new();
        let p = sim.create_process("p", None).unwrap();
        sim.create_task(p, "t", sec2nano(1.0)).unwrap();
        sim.add_model_to_task("t", probe, None).unwrap();
        assert_eq!(*resets.borrow(), 0);
        sim.initialize_simulation().unwrap();
        assert_eq!(*resets.borrow(), 1);
        assert!(log.borrow().is_empty());
        sim.initialize_simulation().unwrap();
        assert_eq!(*resets.borrow(), 2);
    }

    #[test]
    fn reenabled_task_resumes_on_rate_grid() {
        let log: Log = Default::default();
        let mut sim = SimContainer::new();
        let p = sim.create_process("p", None).unwrap();
        sim.create_task(p, "base", sec2nano(1.0)).unwrap();
        sim.create_task(p, "slow", sec2nano(2.0)).unwrap();
        sim.add_model_to_task("base", Probe::new("base", &log), None).unwrap();
        sim.add_model_to_task("slow", Probe::new("slow", &log), None).unwrap();
        sim.disable_task("slow").unwrap();
        sim.initialize_simulation().unwrap();
        sim.configure_stop_time(sec2nano(2.0)).unwrap();
        sim.execute_simulation().unwrap();
        sim.enable_task("slow").unwrap();
        sim.configure_stop_time(sec2nano(6.0)).unwrap();
        sim.execute_simulation().unwrap();
        let slow: Vec<u64> = log
            .borrow()
            .iter()
            .filter(|(t, _)| t == "slow")
            .map(|(_, ns)| ns / NANOS_PER_SEC)
            .collect();
        assert_eq!(slow, [4, 6]);
    }

    #[test]
    fn execution_order_text_and_orphans() {
        let mut sim = SimContainer::new();
        assert_eq!(sim.show_execution_order(), "Execution order\n");
        let log: Log = Default::default();
        let p = sim.create_process("dynamicsProcess", None).unwrap();
        sim.create_task(p, "dynamicsTask", sec2nano(5.0)).unwrap();
        sim.add_model_to_task("dynamicsTask", Probe::new("cModuleTemplate", &log), Some(10))
            .unwrap();
        sim.register_model("cModuleTemplate");
        sim.register_model("lostModule");
        assert_eq!(sim.orphan_models(), ["lostModule"]);
        assert_eq!(
            sim.show_execution_order(),
            "Execution order\n\
             dynamicsProcess\n\
             \x20 dynamicsTask (5.000 s)\n\
             \x20   cModuleTemplate [10]\n\
             orphan lostModule (not added to any task)\n"
        );
    }

    #[test]
    fn update_failure_carries_tag_and_time() {
        struct Failing;
        impl SysModel for Failing {
            fn model_tag(&self) -> &str {
                "failing"
            }
            fn reset(&mut self, _: SimTime) -> Result<(), ModuleError> {
                Ok(())
            }
            fn update_state(&mut self, t: SimTime) -> Result<(), ModuleError> {
                if t >= sec2nano(2.0) {
                    Err(ModuleError::Failed("boom".into()))
                } else {
                    Ok(())
                }
            }
        }
        let mut sim = SimContainer::new();
        let p = sim.create_process("p", None).unwrap();
        sim.create_task(p, "t", sec2nano(1.0)).unwrap();
        sim.add_model_to_task("t", Failing, None).unwrap();
        sim.initialize_simulation().unwrap();
        sim.configure_stop_time(sec2nano(5.0)).unwrap();
        match sim.execute_simulation() {
            Err(KernelError::Update { tag, time, .. }) => {
                assert_eq!(tag, "failing");
                assert_eq!(time, sec2nano(2.0));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
