use std::fmt;
use std::str::FromStr;

use serde::Serialize;

/// An inclusive `start:stop:step` grid. Points are `start + k·step`, never
/// accumulated, so the same string gives bit-identical points everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=count).map(|k| self.start + k as f64 * self.step).collect()
    }
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let parse = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("bad number {p:?} in range {s:?}: {e}"));
        let (start, stop, step) = match parts.as_slice() {
            [a, b, c] => (parse(a)?, parse(b)?, parse(c)?),
            [a, b] => (parse(a)?, parse(b)?, 1.0),
            [a] => {
                let v = parse(a)?;
                (v, v, 1.0)
            }
            _ => return Err(format!("expected start:stop:step, got {s:?}")),
        };
        if !(start.is_finite() && stop.is_finite()) {
            return Err(format!("range bounds must be finite in {s:?}"));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(format!("range step must be positive in {s:?}"));
        }
        if stop < start {
            return Err(format!("range stop is below start in {s:?}"));
        }
        Ok(Range { start, stop, step })
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

/// Control-arm loss for a sweep: fixed, or equal to the detection-arm loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlLoss {
    Fixed(f64),
    Lockstep,
}

impl ControlLoss {
    pub fn at(self, ra_db: f64) -> f64 {
        match self {
            ControlLoss::Fixed(v) => v,
            ControlLoss::Lockstep => ra_db,
        }
    }
}

impl FromStr for ControlLoss {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("lockstep") {
            return Ok(ControlLoss::Lockstep);
        }
        s.parse::<f64>().map(ControlLoss::Fixed).map_err(|_| format!("expected a dB value or \"lockstep\", got {s:?}"))
    }
}

/// Phase argument: a fixed value, or the best point of a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseChoice {
    Value(f64),
    Best,
}

impl FromStr for PhaseChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("best") {
            return Ok(PhaseChoice::Best);
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(PhaseChoice::Value(v)),
            _ => Err(format!("expected a phase in radians or \"best\", got {s:?}")),
        }
    }
}
