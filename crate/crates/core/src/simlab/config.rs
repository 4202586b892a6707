//! Flat `key = value` study configuration files.
//!
//! ```text
//! # preset table1 at desk scale
//! preset = table1
//! n = 50
//! q = 0.25, 0.5, 0.75
//! methods = 1-WELRCI, 2-WELRCI, QBPCI
//! reps = 500
//! boot_reps = 200
//! seed = 42
//! ```
//!
//! Without a preset, `lifetime` and `scheme` are required, plus the design
//! keys the scheme uses: `censor` (right, doubly; the examination time for
//! interval1 and partly1; the first examination for interval2),
//! `left_slope`/`left_shift` (doubly), `gap` (interval2), `exact_fraction`
//! (partly1, partlyGeneral) and `grid` (partlyGeneral, `;`-separated).
//! Distributions are written `exp:<mean>`, `chisq:<df>`, `uniform:<lo>:<hi>`.

use std::collections::BTreeMap;

use super::{parse_methods, StudyConfig};
use crate::censoring::{CensoringDesign, Dist, GeneratorParams, Preset, Scheme};
use crate::error::{Error, Result};

const KEYS: &[&str] = &[
    "preset",
    "lifetime",
    "scheme",
    "censor",
    "left_slope",
    "left_shift",
    "gap",
    "exact_fraction",
    "grid",
    "n",
    "q",
    "alpha",
    "methods",
    "reps",
    "boot_reps",
    "grid_step",
    "seed",
    "em_tol",
    "em_max_iter",
];

struct Entries {
    values: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn raw(&self, key: &str) -> Option<(usize, &str)> {
        self.values.get(key).map(|(line, v)| (*line, v.as_str()))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((row, v)) => v.parse().map(Some).map_err(|_| Error::Parse {
                row,
                msg: format!("cannot parse `{v}` for `{key}`"),
            }),
        }
    }

    fn require<T: std::str::FromStr>(&self, key: &str, why: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| Error::InvalidParameter(format!("`{key}` is required {why}")))
    }

    fn with_row<T>(&self, key: &str, r: Result<T>) -> Result<T> {
        r.map_err(|e| match (self.raw(key), e) {
            (Some((row, _)), Error::InvalidParameter(msg) | Error::UnknownPreset(msg)) => Error::Parse { row, msg },
            (_, e) => e,
        })
    }
}

fn design(scheme: Scheme, e: &Entries) -> Result<CensoringDesign> {
    let why = format!("for scheme {scheme}");
    let dist = |key: &str| -> Result<Dist> {
        let text: String = e.require(key, &why)?;
        e.with_row(key, text.parse())
    };
    Ok(match scheme {
        Scheme::None => CensoringDesign::None,
        Scheme::Right => CensoringDesign::Right {
            censor: dist("censor")?,
        },
        Scheme::Doubly => CensoringDesign::Doubly {
            censor: dist("censor")?,
            left_slope: e.require("left_slope", &why)?,
            left_shift: e.require("left_shift", &why)?,
        },
        Scheme::Interval1 => CensoringDesign::CurrentStatus { exam: dist("censor")? },
        Scheme::Interval2 => CensoringDesign::Case2 {
            first_exam: dist("censor")?,
            gap: dist("gap")?,
        },
        Scheme::Partly1 => CensoringDesign::Partly1 {
            exact_fraction: e.require("exact_fraction", &why)?,
            exam: dist("censor")?,
        },
        Scheme::PartlyGeneral => {
            let text: String = e.require("grid", &why)?;
            let grid = text
                .split(';')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::InvalidParameter(format!("bad grid `{text}`")));
            CensoringDesign::PartlyGeneral {
                exact_fraction: e.require("exact_fraction", &why)?,
                grid: e.with_row("grid", grid)?,
            }
        }
    })
}

/// Parse a study configuration. Lines are `key = value` (or `key: value`);
/// `#` starts a comment. Unknown or repeated keys are errors.
pub fn parse_config(text: &str) -> Result<StudyConfig> {
    let mut values = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let row = i + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .or_else(|| line.split_once(':'))
            .ok_or_else(|| Error::Parse {
                row,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
        let key = key.trim().to_ascii_lowercase().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Parse {
                row,
                msg: format!("unknown key `{key}`"),
            });
        }
        if values.insert(key.clone(), (row, value.trim().to_string())).is_some() {
            return Err(Error::Parse {
                row,
                msg: format!("key `{key}` given twice"),
            });
        }
    }
    let e = Entries { values };

    let mut config = match e.get::<String>("preset")? {
        Some(name) => {
            let preset: Preset = e.with_row("preset", name.parse())?;
            if e.raw("lifetime").is_some() || e.raw("scheme").is_some() {
                return Err(Error::InvalidParameter(
                    "give either `preset` or `lifetime`/`scheme`, not both".into(),
                ));
            }
            StudyConfig::from_preset(preset)
        }
        None => {
            let lifetime: String = e.require("lifetime", "without a preset")?;
            let lifetime: Dist = e.with_row("lifetime", lifetime.parse())?;
            let scheme: String = e.require("scheme", "without a preset")?;
            let scheme: Scheme = e.with_row("scheme", scheme.parse())?;
            StudyConfig {
                preset: None,
                generator: GeneratorParams {
                    lifetime,
                    design: design(scheme, &e)?,
                },
                alpha: 0.10,
                ..StudyConfig::from_preset(Preset::Table1)
            }
        }
    };

    if let Some(n) = e.get("n")? {
        config.n = n;
    }
    if let Some((row, list)) = e.raw("q") {
        config.q = list
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::Parse {
                row,
                msg: format!("bad quantile list `{list}`"),
            })?;
    }
    if let Some(alpha) = e.get("alpha")? {
        config.alpha = alpha;
    }
    if let Some((_, list)) = e.raw("methods") {
        config.methods = e.with_row("methods", parse_methods(list))?;
    }
    if let Some(reps) = e.get("reps")? {
        config.reps = reps;
    }
    if let Some(b) = e.get("boot_reps")? {
        config.boot_reps = b;
    }
    if let Some(d) = e.get("grid_step")? {
        config.grid_step = Some(d);
    }
    if let Some(seed) = e.get("seed")? {
        config.seed = seed;
    }
    if let Some(tol) = e.get("em_tol")? {
        config.em.tol = tol;
    }
    if let Some(it) = e.get("em_max_iter")? {
        config.em.max_iter = it;
    }
    config.validate()?;
    Ok(config)
}
