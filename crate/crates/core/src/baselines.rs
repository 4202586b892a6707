//! Bootstrap percentile intervals for the raw (QBPCI) and smoothed (SQBPCI)
//! quantile estimates.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::censoring::CensoredSample;
use crate::error::{invalid, Error, Result};
use crate::npmle::{fit_npmle, EmOptions};
use crate::resample::{percentile, resample};
use crate::rng::{stream, tag};
use crate::smoothing::smoothed_quantile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PercentileMethod {
    /// Raw quantile `min{W_i : F̂(W_i) ≥ q}`.
    Qbpci,
    /// Smoothed quantile `F̃⁻¹(q)`.
    Sqbpci,
}

impl fmt::Display for PercentileMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PercentileMethod::Qbpci => "QBPCI",
            PercentileMethod::Sqbpci => "SQBPCI",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PercentileCI {
    pub lo: f64,
    pub hi: f64,
    pub method: PercentileMethod,
    pub boot_reps: usize,
    /// Replicates whose NPMLE fit failed.
    pub degenerate: usize,
}

impl PercentileCI {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.lo <= theta && theta <= self.hi
    }
}

/// `[ρ_{α/2}, ρ_{1−α/2}]` of `B` n-of-n bootstrap quantile estimates.
pub fn bootstrap_percentile_ci(
    sample: &CensoredSample,
    q: f64,
    alpha: f64,
    boot_reps: usize,
    seed: u64,
    method: PercentileMethod,
    em: EmOptions,
) -> Result<PercentileCI> {
    if !(q > 0.0 && q < 1.0) {
        return invalid(format!("q = {q} not in (0, 1)"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("alpha = {alpha} not in (0, 1)"));
    }
    if boot_reps < 2 {
        return invalid("percentile intervals need at least 2 bootstrap replicates");
    }
    let stats: Vec<Option<f64>> = (0..boot_reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, &[tag::PERCENTILE, r as u64]);
            let boot = resample(sample, sample.n(), &mut rng);
            let (dist, _) = fit_npmle(&boot, em).ok()?;
            match method {
                PercentileMethod::Qbpci => Some(dist.raw_quantile(q)),
                PercentileMethod::Sqbpci => smoothed_quantile(&dist, q).ok(),
            }
        })
        .collect();
    let degenerate = stats.iter().filter(|s| s.is_none()).count();
    let valid: Vec<f64> = stats.into_iter().flatten().collect();
    if valid.len() * 2 < boot_reps {
        return Err(Error::Degenerate(format!(
            "{degenerate} of {boot_reps} bootstrap replicates are degenerate"
        )));
    }
    Ok(PercentileCI {
        lo: percentile(&valid, alpha / 2.0),
        hi: percentile(&valid, 1.0 - alpha / 2.0),
        method,
        boot_reps,
        degenerate,
    })
}
