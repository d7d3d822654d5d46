//! Evaluation grids given as `start:end:count`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub count: usize,
    /// Geometric instead of uniform spacing.
    pub log: bool,
}

impl Grid {
    pub fn new(start: f64, end: f64, count: usize, log: bool) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() {
            return Err(Error::invalid("grid bounds must be finite"));
        }
        if count == 0 {
            return Err(Error::invalid("grid needs at least one point"));
        }
        if count > 1 && !(end > start) {
            return Err(Error::invalid(format!("grid end {end} must exceed start {start}")));
        }
        if log && !(start > 0.0) {
            return Err(Error::invalid("geometric grid needs a positive start"));
        }
        Ok(Self { start, end, count, log })
    }

    pub fn logarithmic(self) -> Result<Self> {
        Self::new(self.start, self.end, self.count, true)
    }

    /// Grid points, with both end points reproduced exactly.
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = self.count - 1;
        (0..self.count)
            .map(|i| {
                if i == last {
                    self.end
                } else if self.log {
                    let (a, b) = (self.start.ln(), self.end.ln());
                    (a + (b - a) * i as f64 / last as f64).exp()
                } else {
                    self.start + (self.end - self.start) * i as f64 / last as f64
                }
            })
            .collect()
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.end, self.count)?;
        if self.log {
            f.write_str(" (geometric)")?;
        }
        Ok(())
    }
}

impl FromStr for Grid {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::invalid(format!("grid `{s}` is not start:end:count")));
        }
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad grid bound `{p}`")))
        };
        let count = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::invalid(format!("bad grid count `{}`", parts[2])))?;
        Grid::new(num(parts[0])?, num(parts[1])?, count, false)
    }
}
