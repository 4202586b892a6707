//! Monte Carlo coverage studies.
//!
//! A study draws `reps` independent samples from a generator, computes every
//! requested interval for every quantile level on each sample, and reports
//! coverage of the true quantile and interval lengths. Trial `i` uses only
//! the random sub-streams of `(seed, i)`, so a study's numbers do not depend
//! on how trials are scheduled across threads.

mod config;
mod report;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{bootstrap_percentile_ci, PercentileMethod};
use crate::calibration::DEFAULT_BOOT_REPS;
use crate::censoring::{generate, GeneratorParams, Preset};
use crate::error::{invalid, Error, Result};
use crate::npmle::EmOptions;
use crate::pipeline::{fit_interval, FitOptions};
use crate::rng::{derive_seed, tag};

pub use config::parse_config;
pub use report::{ReportRow, StudyReport, DEGENERATE_FLAG_FRACTION};

/// An interval procedure compared in a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MethodSpec {
    /// Smoothed interval of order `k` (`None`: chosen from the scheme).
    Welrci {
        k: Option<usize>,
    },
    /// Step-function (non-smoothed) interval of order `k`.
    Welrci0 {
        k: Option<usize>,
    },
    Qbpci,
    Sqbpci,
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodSpec::Welrci { k: Some(k) } => write!(f, "{k}-WELRCI"),
            MethodSpec::Welrci { k: None } => f.write_str("WELRCI"),
            MethodSpec::Welrci0 { k: Some(k) } => write!(f, "{k}-WELRCI0"),
            MethodSpec::Welrci0 { k: None } => f.write_str("WELRCI0"),
            MethodSpec::Qbpci => f.write_str("QBPCI"),
            MethodSpec::Sqbpci => f.write_str("SQBPCI"),
        }
    }
}

impl FromStr for MethodSpec {
    type Err = Error;

    /// Accepts `QBPCI`, `SQBPCI`, `WELRCI`, `WELRCI0`, and the order-prefixed
    /// forms `k-WELRCI`, `k-WELRCI0` (case-insensitive).
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (k, name) = match lower.split_once('-') {
            Some((k, name)) => {
                let k: usize = k
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad order in method `{s}`")))?;
                if k > 4 {
                    return invalid(format!("order {k} in `{s}` not in 0..=4"));
                }
                (Some(k), name)
            }
            None => (None, lower.as_str()),
        };
        match (name, k) {
            ("welrci", k) => Ok(MethodSpec::Welrci { k }),
            ("welrci0", k) => Ok(MethodSpec::Welrci0 { k }),
            ("qbpci", None) => Ok(MethodSpec::Qbpci),
            ("sqbpci", None) => Ok(MethodSpec::Sqbpci),
            _ => invalid(format!("unknown method `{s}`")),
        }
    }
}

/// Parse a comma-separated method list.
pub fn parse_methods(list: &str) -> Result<Vec<MethodSpec>> {
    let methods = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<_>>>()?;
    if methods.is_empty() {
        return invalid("method list is empty");
    }
    Ok(methods)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    /// The preset the generator came from, if any.
    pub preset: Option<Preset>,
    pub generator: GeneratorParams,
    pub n: usize,
    pub q: Vec<f64>,
    pub alpha: f64,
    pub methods: Vec<MethodSpec>,
    pub reps: usize,
    pub boot_reps: usize,
    /// Adaptive-grid step for `n^{1/3}` schemes; `None` uses `max(1, n/10)`.
    pub grid_step: Option<usize>,
    pub seed: u64,
    pub em: EmOptions,
}

impl StudyConfig {
    /// Defaults for a preset: its quantile levels and nominal level, the
    /// automatically ordered smoothed interval, 100 trials of size 50.
    pub fn from_preset(preset: Preset) -> Self {
        Self {
            preset: Some(preset),
            generator: preset.params(),
            n: 50,
            q: preset.quantile_levels(),
            alpha: preset.alpha(),
            methods: vec![MethodSpec::Welrci { k: None }],
            reps: 100,
            boot_reps: DEFAULT_BOOT_REPS,
            grid_step: None,
            seed: 0,
            em: EmOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.generator.validate()?;
        if self.n < 1 {
            return invalid("n must be >= 1");
        }
        if self.reps < 1 {
            return invalid("reps must be >= 1");
        }
        if self.q.is_empty() || self.q.iter().any(|q| !(*q > 0.0 && *q < 1.0)) {
            return invalid("q values must be in (0, 1)");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return invalid(format!("alpha = {} not in (0, 1)", self.alpha));
        }
        if self.methods.is_empty() {
            return invalid("no methods requested");
        }
        if self.boot_reps < 2 {
            return invalid("boot_reps must be >= 2");
        }
        if !(self.em.tol > 0.0) || self.em.max_iter == 0 {
            return invalid("EM tolerance must be > 0 and max_iter >= 1");
        }
        Ok(())
    }

    /// True quantile `F₀⁻¹(q)` of the lifetime distribution.
    pub fn true_quantile(&self, q: f64) -> f64 {
        self.generator.lifetime.quantile(q)
    }
}

/// Outcome of one method at one quantile level on one sample. Equality
/// ignores the timing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub q: f64,
    pub method: MethodSpec,
    /// `(lower, upper)`, or `None` when the method failed on this sample.
    pub interval: Option<(f64, f64)>,
    pub hit: Option<bool>,
    pub error: Option<String>,
    #[serde(skip)]
    pub seconds: f64,
}

impl PartialEq for MethodOutcome {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q
            && self.method == other.method
            && self.interval == other.interval
            && self.hit == other.hit
            && self.error == other.error
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub outcomes: Vec<MethodOutcome>,
}

fn run_method(
    config: &StudyConfig,
    sample: &crate::censoring::CensoredSample,
    q: f64,
    method: MethodSpec,
    seed: u64,
) -> Result<(f64, f64)> {
    let fit = |k: Option<usize>, smoothed: bool| -> Result<(f64, f64)> {
        let opts = FitOptions {
            q,
            alpha: config.alpha,
            k,
            smoothed,
            boot_reps: config.boot_reps,
            grid_step: config.grid_step,
            seed,
            em: config.em,
        };
        let out = fit_interval(sample, &opts)?;
        Ok((out.x_l, out.x_u))
    };
    let percentile = |m: PercentileMethod| -> Result<(f64, f64)> {
        let ci = bootstrap_percentile_ci(sample, q, config.alpha, config.boot_reps, seed, m, config.em)?;
        Ok((ci.lo, ci.hi))
    };
    match method {
        MethodSpec::Welrci { k } => fit(k, true),
        MethodSpec::Welrci0 { k } => fit(k, false),
        MethodSpec::Qbpci => percentile(PercentileMethod::Qbpci),
        MethodSpec::Sqbpci => percentile(PercentileMethod::Sqbpci),
    }
}

/// Generate sample `trial_index` and evaluate every `(q, method)` pair on it.
/// Failures are recorded in the outcome rather than returned.
pub fn run_trial(config: &StudyConfig, trial_index: usize) -> Result<TrialRecord> {
    config.validate()?;
    let seed = derive_seed(config.seed, &[tag::TRIAL, trial_index as u64]);
    let sample = generate(&config.generator, config.n, seed)?;
    let mut outcomes = Vec::with_capacity(config.q.len() * config.methods.len());
    for &q in &config.q {
        let theta0 = config.true_quantile(q);
        for &method in &config.methods {
            let start = Instant::now();
            let result = run_method(config, &sample, q, method, seed);
            let seconds = start.elapsed().as_secs_f64();
            outcomes.push(match result {
                Ok((lo, hi)) => MethodOutcome {
                    q,
                    method,
                    interval: Some((lo, hi)),
                    hit: Some(lo <= theta0 && theta0 <= hi),
                    error: None,
                    seconds,
                },
                Err(e) => MethodOutcome {
                    q,
                    method,
                    interval: None,
                    hit: None,
                    error: Some(e.to_string()),
                    seconds,
                },
            });
        }
    }
    Ok(TrialRecord { trial_index, outcomes })
}

/// Run all trials and aggregate per `(q, method)`.
pub fn run_study(config: &StudyConfig) -> Result<StudyReport> {
    config.validate()?;
    let start = Instant::now();
    let trials = (0..config.reps)
        .into_par_iter()
        .map(|i| run_trial(config, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(StudyReport::aggregate(config, &trials, start.elapsed().as_secs_f64()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(preset: Preset) -> StudyConfig {
        StudyConfig {
            n: 40,
            q: vec![0.5],
            reps: 3,
            boot_reps: 40,
            seed: 17,
            ..StudyConfig::from_preset(preset)
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in [
            MethodSpec::Welrci { k: Some(2) },
            MethodSpec::Welrci { k: None },
            MethodSpec::Welrci0 { k: Some(1) },
            MethodSpec::Welrci0 { k: None },
            MethodSpec::Qbpci,
            MethodSpec::Sqbpci,
        ] {
            assert_eq!(m.to_string().parse::<MethodSpec>().unwrap(), m);
        }
        assert_eq!(
            parse_methods("1-welrci, qbpci").unwrap(),
            vec![MethodSpec::Welrci { k: Some(1) }, MethodSpec::Qbpci]
        );
        assert!("7-WELRCI".parse::<MethodSpec>().is_err());
        assert!("2-QBPCI".parse::<MethodSpec>().is_err());
        assert!("bogus".parse::<MethodSpec>().is_err());
    }

    #[test]
    fn true_quantiles_of_presets() {
        let c = StudyConfig::from_preset(Preset::Table1);
        assert!((c.true_quantile(0.5) - 0.693).abs() < 5e-4);
        let c = StudyConfig::from_preset(Preset::Table2);
        assert!((c.true_quantile(0.25) - 0.102).abs() < 5e-4);
    }

    #[test]
    fn trial_is_reproducible() {
        let c = StudyConfig {
            methods: vec![MethodSpec::Welrci { k: Some(1) }, MethodSpec::Qbpci],
            ..small(Preset::Table1)
        };
        let a = run_trial(&c, 2).unwrap();
        let b = run_trial(&c, 2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.outcomes.len(), 2);
        assert_ne!(a.outcomes[0].interval, run_trial(&c, 3).unwrap().outcomes[0].interval);
    }

    #[test]
    fn single_rep_study() {
        let c = StudyConfig {
            reps: 1,
            ..small(Preset::Table1)
        };
        let r = run_study(&c).unwrap();
        let row = &r.rows[0];
        assert!(row.coverage == 0.0 || row.coverage == 100.0);
        assert_eq!(row.sd_length, 0.0);
    }

    #[test]
    fn study_is_deterministic() {
        let c = StudyConfig {
            methods: vec![MethodSpec::Welrci { k: Some(1) }, MethodSpec::Sqbpci],
            ..small(Preset::Table3)
        };
        let a = run_study(&c).unwrap();
        let b = run_study(&c).unwrap();
        assert!(a.same_results(&b));
    }
}
