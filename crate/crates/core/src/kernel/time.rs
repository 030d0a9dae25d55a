//! Integer-nanosecond simulation time.

use std::fmt;
use std::ops::{Add, AddAssign, Sub};

use serde::{Deserialize, Serialize};

use super::KernelError;

pub const NANOS_PER_SEC: u64 = 1_000_000_000;

/// Nanosecond to second conversion factor.
pub const NANO2SEC: f64 = 1e-9;

/// Simulation time in whole nanoseconds since simulation start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub const fn from_nanos(ns: u64) -> Self {
        SimTime(ns)
    }

    pub const fn nanos(self) -> u64 {
        self.0
    }

    /// Seconds to nanoseconds, rounding half away from zero.
    pub fn try_from_secs(secs: f64) -> Result<Self, KernelError> {
        if !secs.is_finite() || secs < 0.0 {
            return Err(KernelError::InvalidTime(secs));
        }
        let ns = (secs * NANOS_PER_SEC as f64).round();
        if ns > u64::MAX as f64 {
            return Err(KernelError::InvalidTime(secs));
        }
        Ok(SimTime(ns as u64))
    }

    /// Panics on negative or non-finite input; use [`SimTime::try_from_secs`]
    /// for values that come from user input.
    pub fn from_secs(secs: f64) -> Self {
        Self::try_from_secs(secs).expect("time in seconds must be finite and non-negative")
    }

    pub fn from_mins(mins: f64) -> Self {
        Self::from_secs(mins * 60.0)
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / NANOS_PER_SEC as f64
    }

    pub fn checked_sub(self, rhs: SimTime) -> Option<SimTime> {
        self.0.checked_sub(rhs.0).map(SimTime)
    }

    /// Smallest multiple of `period` that is `>= self`.
    pub fn ceil_to_multiple(self, period: SimTime) -> SimTime {
        debug_assert!(period.0 > 0);
        let rem = self.0 % period.0;
        if rem == 0 {
            self
        } else {
            SimTime(self.0 - rem + period.0)
        }
    }
}

/// `macros.sec2nano` equivalent.
pub fn sec2nano(secs: f64) -> SimTime {
    SimTime::from_secs(secs)
}

/// `macros.min2nano` equivalent.
pub fn min2nano(mins: f64) -> SimTime {
    SimTime::from_mins(mins)
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl AddAssign for SimTime {
    fn add_assign(&mut self, rhs: SimTime) {
        self.0 += rhs.0;
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 - rhs.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3} s", self.as_secs_f64())
    }
}
