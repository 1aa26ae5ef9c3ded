use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed interval [lo, hi]; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };
    pub const HALF_LINE: Interval = Interval {
        lo: 0.0,
        hi: f64::INFINITY,
    };
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::Contract(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Containment with a relative slack for grid endpoints.
    pub fn contains_approx(&self, x: f64) -> bool {
        let slack = 1e-12 * (1.0 + x.abs());
        x >= self.lo - slack && x <= self.hi + slack
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.contains_approx(other.lo) && self.contains_approx(other.hi)
    }

    pub fn shift(&self, by: f64) -> Interval {
        Interval {
            lo: self.lo + by,
            hi: self.hi + by,
        }
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo < hi).then_some(Interval { lo, hi })
    }

    pub fn check(&self, what: &str, x: f64) -> Result<()> {
        if self.contains_approx(x) {
            Ok(())
        } else {
            Err(Error::domain(what, x, self.lo, self.hi))
        }
    }
}

/// A uniform grid start, start+step, ..., up to stop inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
            return Err(Error::Config(format!("invalid grid {start}:{stop}:{step}")));
        }
        Ok(Grid { start, stop, step })
    }

    /// Parses "start:stop:step".
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!("grid '{s}' is not start:stop:step")));
        }
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("grid '{s}': '{p}' is not a number")))
        };
        Grid::new(num(parts[0])?, num(parts[1])?, num(parts[2])?)
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.start + self.step * i as f64).collect()
    }
}
