//! Single-dataset estimation: calibrate the threshold, then invert the ratio.

use serde::{Deserialize, Serialize};

use crate::calibration::{calibrate, CalibrationOptions, CalibrationResult, GridPoint, DEFAULT_BOOT_REPS};
use crate::censoring::{CensoredSample, Scheme};
use crate::error::Result;
use crate::interval::{welrci, ConfidenceInterval};
use crate::npmle::{fit_npmle, EmOptions, EmReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub q: f64,
    pub alpha: f64,
    /// Expansion order; `None` selects it from the scheme.
    pub k: Option<usize>,
    pub smoothed: bool,
    pub boot_reps: usize,
    pub grid_step: Option<usize>,
    pub seed: u64,
    pub em: EmOptions,
}

impl FitOptions {
    pub fn new(q: f64, alpha: f64) -> Self {
        Self {
            q,
            alpha,
            k: None,
            smoothed: true,
            boot_reps: DEFAULT_BOOT_REPS,
            grid_step: None,
            seed: 0,
            em: EmOptions::default(),
        }
    }

    fn calibration(&self) -> CalibrationOptions {
        CalibrationOptions {
            q: self.q,
            alpha: self.alpha,
            k: self.k,
            boot_reps: self.boot_reps,
            grid_step: self.grid_step,
            seed: self.seed,
            em: self.em,
            smoothed: self.smoothed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub scheme: Scheme,
    pub n: usize,
    /// Number of atoms of the fitted distribution.
    pub m: usize,
    pub smoothed: bool,
    /// `C_n` at the sample size.
    pub cn: f64,
    pub em: EmReport,
    pub degenerate_replicates: usize,
    pub lower_iterations: usize,
    pub upper_iterations: usize,
    pub lower_at_boundary: bool,
    pub upper_at_boundary: bool,
    pub bootstrap_grid: Vec<GridPoint>,
}

/// A calibrated interval with everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutput {
    pub q: f64,
    pub alpha: f64,
    pub k: usize,
    pub c_n: f64,
    pub rho_hat: f64,
    pub theta_hat: f64,
    pub x_l: f64,
    pub x_u: f64,
    pub n_b: Option<usize>,
    pub feasible_range: (f64, f64),
    pub diagnostics: FitDiagnostics,
}

impl FitOutput {
    pub fn length(&self) -> f64 {
        self.x_u - self.x_l
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.x_l <= theta && theta <= self.x_u
    }
}

/// Fit the NPMLE, calibrate `c_n` by the bootstrap suited to the scheme and
/// solve for the interval endpoints.
pub fn fit_interval(sample: &CensoredSample, opts: &FitOptions) -> Result<FitOutput> {
    let (dist, em) = fit_npmle(sample, opts.em)?;
    let cal: CalibrationResult = calibrate(sample, &opts.calibration())?;
    let ci: ConfidenceInterval = welrci(&dist, opts.q, cal.c_n, opts.smoothed)?;
    Ok(FitOutput {
        q: opts.q,
        alpha: opts.alpha,
        k: cal.k,
        c_n: cal.c_n,
        rho_hat: cal.rho_hat,
        theta_hat: ci.theta_hat,
        x_l: ci.x_l,
        x_u: ci.x_u,
        n_b: cal.n_b,
        feasible_range: ci.diagnostics.feasible_range,
        diagnostics: FitDiagnostics {
            scheme: sample.scheme(),
            n: sample.n(),
            m: dist.len(),
            smoothed: opts.smoothed,
            cn: cal.cn,
            em,
            degenerate_replicates: cal.degenerate,
            lower_iterations: ci.diagnostics.lower_iterations,
            upper_iterations: ci.diagnostics.upper_iterations,
            lower_at_boundary: ci.diagnostics.lower_at_boundary,
            upper_at_boundary: ci.diagnostics.upper_at_boundary,
            bootstrap_grid: cal.grid,
        },
    })
}
