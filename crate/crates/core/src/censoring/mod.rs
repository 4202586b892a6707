//! Censored-data schemes and their reduction to censoring intervals.
//!
//! Every scheme is ultimately turned into one [`CensoringInterval`] per
//! observation: either an exactly observed lifetime or a half-open interval
//! `(left, right]` known to contain it. The NPMLE engines only ever see that
//! reduced form (plus the right-censored and current-status fast paths).

mod generate;
mod parse;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generate::{generate, CensoringDesign, Dist, GeneratorParams, Preset};
pub use parse::parse_sample;

/// The censored-data schemes supported by the estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Scheme {
    /// `(V, δ)`: `δ = 1` exact, `δ = 0` right-censored at `V`.
    Right,
    /// `(V, δ)`: `δ = 1` exact, `δ = 2` right-censored, `δ = 3` left-censored.
    Doubly,
    /// Current status `(Y, δ)` with `δ = 1{X ≤ Y}`.
    Interval1,
    /// `(Y, Z, δ)`: `δ = 1` means `Z < X ≤ Y`, `2` means `X > Y`, `3` means `X ≤ Z`.
    Interval2,
    /// Exact observations mixed with current-status observations.
    Partly1,
    /// Exact observations mixed with cell memberships on one shared grid.
    PartlyGeneral,
    /// Fully observed data.
    None,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::Right,
        Scheme::Doubly,
        Scheme::Interval1,
        Scheme::Interval2,
        Scheme::Partly1,
        Scheme::PartlyGeneral,
        Scheme::None,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Right => "right",
            Scheme::Doubly => "doubly",
            Scheme::Interval1 => "interval1",
            Scheme::Interval2 => "interval2",
            Scheme::Partly1 => "partly1",
            Scheme::PartlyGeneral => "partlyGeneral",
            Scheme::None => "none",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| *c != '-' && *c != '_')
            .collect::<String>()
            .to_ascii_lowercase();
        Scheme::ALL
            .into_iter()
            .find(|sch| sch.name().to_ascii_lowercase() == key)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown scheme `{s}`")))
    }
}

/// The information about one lifetime `X ∈ (left, right]`, or `X = left`
/// when `exact` is set. `right` may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensoringInterval {
    pub left: f64,
    pub right: f64,
    pub exact: bool,
}

impl CensoringInterval {
    pub fn exact(x: f64) -> Self {
        Self {
            left: x,
            right: x,
            exact: true,
        }
    }

    /// The half-open interval `(left, right]`.
    pub fn between(left: f64, right: f64) -> Self {
        Self {
            left,
            right,
            exact: false,
        }
    }

    pub fn right_censored(at: f64) -> Self {
        Self::between(at, f64::INFINITY)
    }

    pub fn left_censored(at: f64) -> Self {
        Self::between(0.0, at)
    }

    pub fn contains(&self, x: f64) -> bool {
        if self.exact {
            x == self.left
        } else {
            self.left < x && x <= self.right
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if !self.left.is_finite() || self.left < 0.0 {
            return Err(format!("left end {} must be finite and >= 0", self.left));
        }
        if self.right.is_nan() {
            return Err("right end is NaN".into());
        }
        if self.exact {
            if self.left != self.right {
                return Err("exact interval must have left == right".into());
            }
        } else if !(self.left < self.right) {
            return Err(format!(
                "interval ({}, {}] is empty: need left < right",
                self.left, self.right
            ));
        }
        Ok(())
    }
}

/// One observed record. Which variants are allowed depends on the scheme;
/// see [`CensoredSample::new`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Observation {
    Right {
        v: f64,
        delta: u8,
    },
    Doubly {
        v: f64,
        delta: u8,
    },
    CurrentStatus {
        y: f64,
        delta: u8,
    },
    Case2 {
        y: f64,
        z: f64,
        delta: u8,
    },
    Exact {
        x: f64,
    },
    /// Membership in grid cell `j` (1-based): `Y_{j-1} < X ≤ Y_j`.
    Cell {
        j: usize,
    },
    /// A pre-reduced interval, from the unified `left,right` input format.
    Interval(CensoringInterval),
}

fn check_value(name: &str, v: f64) -> std::result::Result<(), String> {
    if !v.is_finite() || v < 0.0 {
        Err(format!("{name} = {v} must be finite and >= 0"))
    } else {
        Ok(())
    }
}

impl Observation {
    fn validate(&self, scheme: Scheme, grid: Option<&[f64]>) -> std::result::Result<(), String> {
        use Observation::*;
        match (scheme, self) {
            (Scheme::Right, Right { v, delta }) => {
                check_value("v", *v)?;
                if *delta > 1 {
                    return Err(format!("delta = {delta} not in {{0,1}}"));
                }
            }
            (Scheme::Doubly, Doubly { v, delta }) => {
                check_value("v", *v)?;
                if !(1..=3).contains(delta) {
                    return Err(format!("delta = {delta} not in {{1,2,3}}"));
                }
            }
            (Scheme::Interval1 | Scheme::Partly1, CurrentStatus { y, delta }) => {
                check_value("y", *y)?;
                if *delta > 1 {
                    return Err(format!("delta = {delta} not in {{0,1}}"));
                }
            }
            (Scheme::Interval2, Case2 { y, z, delta }) => {
                check_value("y", *y)?;
                check_value("z", *z)?;
                if z >= y {
                    return Err(format!("z = {z} must be < y = {y}"));
                }
                if !(1..=3).contains(delta) {
                    return Err(format!("delta = {delta} not in {{1,2,3}}"));
                }
            }
            (Scheme::None | Scheme::Partly1 | Scheme::PartlyGeneral, Exact { x }) => {
                check_value("x", *x)?;
            }
            (Scheme::PartlyGeneral, Cell { j }) => {
                let n_grid = grid.map_or(0, <[f64]>::len);
                if *j < 1 || *j > n_grid + 1 {
                    return Err(format!("cell index {j} not in 1..={}", n_grid + 1));
                }
            }
            (Scheme::Interval2 | Scheme::Partly1 | Scheme::PartlyGeneral, Interval(iv)) => iv.validate()?,
            (s, o) => return Err(format!("observation {o:?} not allowed under scheme {s}")),
        }
        Ok(())
    }

    /// Reduce to a censoring interval. `grid` is the shared examination grid
    /// for `Cell` observations.
    pub fn to_interval(&self, grid: &[f64]) -> CensoringInterval {
        use Observation::*;
        match *self {
            Right { v, delta: 1 } | Doubly { v, delta: 1 } => CensoringInterval::exact(v),
            Right { v, .. } => CensoringInterval::right_censored(v),
            Doubly { v, delta: 2 } => CensoringInterval::right_censored(v),
            Doubly { v, .. } => CensoringInterval::left_censored(v),
            CurrentStatus { y, delta: 1 } => CensoringInterval::left_censored(y),
            CurrentStatus { y, .. } => CensoringInterval::right_censored(y),
            Case2 { y, z, delta: 1 } => CensoringInterval::between(z, y),
            Case2 { y, delta: 2, .. } => CensoringInterval::right_censored(y),
            Case2 { z, .. } => CensoringInterval::left_censored(z),
            Exact { x } => CensoringInterval::exact(x),
            Cell { j } => {
                let lo = if j >= 2 { grid[j - 2] } else { 0.0 };
                let hi = grid.get(j - 1).copied().unwrap_or(f64::INFINITY);
                CensoringInterval::between(lo, hi)
            }
            Interval(iv) => iv,
        }
    }

    /// Map a unified-format interval onto the native record of `scheme`.
    pub fn from_interval(scheme: Scheme, iv: CensoringInterval) -> std::result::Result<Self, String> {
        iv.validate()?;
        let open_right = iv.right.is_infinite();
        let from_zero = iv.left == 0.0;
        let native = match scheme {
            Scheme::Right if iv.exact => Observation::Right { v: iv.left, delta: 1 },
            Scheme::Right if open_right => Observation::Right { v: iv.left, delta: 0 },
            Scheme::Doubly if iv.exact => Observation::Doubly { v: iv.left, delta: 1 },
            Scheme::Doubly if open_right => Observation::Doubly { v: iv.left, delta: 2 },
            Scheme::Doubly if from_zero => Observation::Doubly { v: iv.right, delta: 3 },
            Scheme::Interval1 if open_right && !iv.exact => Observation::CurrentStatus { y: iv.left, delta: 0 },
            Scheme::Interval1 if from_zero && !iv.exact => Observation::CurrentStatus { y: iv.right, delta: 1 },
            Scheme::None | Scheme::Partly1 | Scheme::PartlyGeneral if iv.exact => Observation::Exact { x: iv.left },
            Scheme::Interval2 | Scheme::Partly1 | Scheme::PartlyGeneral => Observation::Interval(iv),
            _ => {
                return Err(format!(
                    "interval ({}, {}] cannot be expressed under scheme {scheme}",
                    iv.left, iv.right
                ))
            }
        };
        Ok(native)
    }
}

/// A validated collection of observations under one scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensoredSample {
    scheme: Scheme,
    observations: Vec<Observation>,
    grid: Option<Vec<f64>>,
}

impl CensoredSample {
    /// Validate and build a sample. `grid` must be given (strictly increasing,
    /// positive) for `PartlyGeneral` and must be absent otherwise.
    pub fn new(scheme: Scheme, observations: Vec<Observation>, grid: Option<Vec<f64>>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::EmptySample);
        }
        match (scheme, &grid) {
            (Scheme::PartlyGeneral, Some(g)) => {
                if g.iter().any(|y| !y.is_finite() || *y <= 0.0) {
                    return Err(Error::InvalidSample("grid values must be finite and > 0".into()));
                }
                if g.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidSample("grid must be strictly increasing".into()));
                }
            }
            (Scheme::PartlyGeneral, None) => return Err(Error::InvalidSample("partlyGeneral requires a grid".into())),
            (_, Some(_)) => return Err(Error::InvalidSample(format!("scheme {scheme} does not take a grid"))),
            _ => {}
        }
        for (i, obs) in observations.iter().enumerate() {
            obs.validate(scheme, grid.as_deref())
                .map_err(|msg| Error::InvalidSample(format!("observation {}: {msg}", i + 1)))?;
        }
        Ok(Self {
            scheme,
            observations,
            grid,
        })
    }

    pub(crate) fn from_parts_unchecked(scheme: Scheme, observations: Vec<Observation>, grid: Option<Vec<f64>>) -> Self {
        Self {
            scheme,
            observations,
            grid,
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn grid(&self) -> Option<&[f64]> {
        self.grid.as_deref()
    }

    pub fn n(&self) -> usize {
        self.observations.len()
    }

    /// One censoring interval per observation, in sample order.
    pub fn to_intervals(&self) -> Vec<CensoringInterval> {
        let grid = self.grid.as_deref().unwrap_or(&[]);
        self.observations.iter().map(|o| o.to_interval(grid)).collect()
    }

    /// Largest finite value appearing anywhere in the data; the adjusted
    /// NPMLE places its remaining mass there.
    pub fn largest_observation(&self) -> f64 {
        largest_finite_endpoint(&self.to_intervals())
    }
}

pub(crate) fn largest_finite_endpoint(intervals: &[CensoringInterval]) -> f64 {
    intervals
        .iter()
        .flat_map(|iv| [iv.left, iv.right])
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max)
}
