//! Bootstrap calibration of the likelihood-ratio threshold.
//!
//! The interval is `{θ : r(θ) ≥ c_n}` with `−2 log c_n = n C_n⁻² ρ̂`, where
//! `ρ̂` estimates the `(1−α)`-quantile of the expansion statistic
//! `A_n^(k) = τ_n(C_n(η̂ − q))`. For `√n`-rate schemes the quantile comes
//! from an ordinary n-of-n bootstrap. For `n^{1/3}`-rate (interval-censored)
//! schemes the bootstrap size `n_b` is chosen adaptively over a grid and the
//! statistic is resampled at size `n_b`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::censoring::{CensoredSample, Scheme};
use crate::error::{invalid, Error, Result};
use crate::npmle::{fit_npmle, DiscreteDistribution, EmOptions};
use crate::resample::{percentile, resample};
use crate::rng::{stream, tag};
use crate::smoothing::{moments, smoothed_cdf, smoothed_quantile, MomentSet};
use crate::welr::{expansion_coefficients, tau, ExpansionCoefficients};

/// Upper end of the adaptive bootstrap grid is `n^GRID_GAMMA`.
pub const GRID_GAMMA: f64 = 0.99;

/// Default number of bootstrap replicates.
pub const DEFAULT_BOOT_REPS: usize = 400;

/// Largest fraction of degenerate replicates tolerated.
const MAX_DEGENERATE_FRACTION: f64 = 0.5;

/// Convergence rate `C_n = n^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSpec {
    pub exponent: f64,
}

impl RateSpec {
    pub const ROOT_N: RateSpec = RateSpec { exponent: 0.5 };
    pub const CUBE_ROOT_N: RateSpec = RateSpec { exponent: 1.0 / 3.0 };

    pub fn value(&self, n: usize) -> f64 {
        (n as f64).powf(self.exponent)
    }

    pub fn is_cube_root(&self) -> bool {
        self.exponent < 0.5
    }
}

pub fn convergence_rate(scheme: Scheme) -> RateSpec {
    match scheme {
        Scheme::Interval1 | Scheme::Interval2 => RateSpec::CUBE_ROOT_N,
        _ => RateSpec::ROOT_N,
    }
}

/// Smallest `k` with `C_n^{-(k+1)} = o(n⁻¹)`: 2 for `√n`, 3 for `n^{1/3}`.
pub fn select_order(scheme: Scheme) -> usize {
    let e = convergence_rate(scheme).exponent;
    (0..=4).find(|&k| (k + 1) as f64 * e > 1.0 + 1e-12).unwrap_or(4)
}

/// `c_n = exp(−½ n C_n⁻² ρ̂)`.
pub fn threshold_from_rho(n: usize, rate: RateSpec, rho_hat: f64) -> f64 {
    let cn = rate.value(n);
    (-0.5 * n as f64 / (cn * cn) * rho_hat).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    pub q: f64,
    pub alpha: f64,
    /// Expansion order; `None` picks [`select_order`].
    pub k: Option<usize>,
    pub boot_reps: usize,
    /// Step `d` of the adaptive grid; `None` uses `max(1, n/10)`.
    pub grid_step: Option<usize>,
    pub seed: u64,
    pub em: EmOptions,
    /// Smoothed (`F̃`) or step (`F̂`) evaluation of the bootstrap d.f.
    pub smoothed: bool,
}

impl CalibrationOptions {
    pub fn new(q: f64, alpha: f64) -> Self {
        Self {
            q,
            alpha,
            k: None,
            boot_reps: DEFAULT_BOOT_REPS,
            grid_step: None,
            seed: 0,
            em: EmOptions::default(),
            smoothed: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q < 1.0) {
            return invalid(format!("q = {} not in (0, 1)", self.q));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return invalid(format!("alpha = {} not in (0, 1)", self.alpha));
        }
        if self.boot_reps < 1 {
            return invalid("boot_reps must be >= 1");
        }
        if let Some(k) = self.k {
            if k > 4 {
                return invalid(format!("k = {k} not in 0..=4"));
            }
        }
        if self.grid_step == Some(0) {
            return invalid("grid step must be >= 1");
        }
        Ok(())
    }
}

/// One point of the adaptive bootstrap-size grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub b: usize,
    /// `(1−α)`-quantile of `[b^{1/3}(η̂* − q)]² / μ̂₂`; NaN when dropped.
    pub xi: f64,
    pub degenerate: usize,
    pub dropped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub k: usize,
    pub rate: RateSpec,
    /// `C_n` at the original sample size.
    pub cn: f64,
    pub rho_hat: f64,
    pub c_n: f64,
    pub n_b: Option<usize>,
    pub theta_hat: f64,
    /// Bootstrap draws of the statistic whose quantile is `ρ̂`.
    pub draws: Vec<f64>,
    /// Replicates excluded at the final resample size.
    pub degenerate: usize,
    pub grid: Vec<GridPoint>,
}

/// Quantities computed once from the original sample.
struct Anchor {
    dist: DiscreteDistribution,
    theta_hat: f64,
    eta_hat: f64,
    mu: MomentSet,
    coeffs: ExpansionCoefficients,
}

impl Anchor {
    fn new(sample: &CensoredSample, opts: &CalibrationOptions) -> Result<Self> {
        let (dist, _) = fit_npmle(sample, opts.em)?;
        let theta_hat = if opts.smoothed {
            smoothed_quantile(&dist, opts.q)?
        } else {
            dist.raw_quantile(opts.q)
        };
        let mu = moments(&dist, theta_hat, opts.q, opts.smoothed);
        if !(mu.mu(2) > 0.0) {
            return Err(Error::Degenerate(format!(
                "second moment vanishes at the quantile estimate {theta_hat}"
            )));
        }
        let coeffs = expansion_coefficients(&mu)?;
        // Smoothed: η̂ = q exactly by construction.
        let eta_hat = if opts.smoothed { opts.q } else { mu.eta_hat };
        Ok(Self {
            dist,
            theta_hat,
            eta_hat,
            mu,
            coeffs,
        })
    }

    /// `η̂*` for one resample, or `None` if the replicate is degenerate.
    fn replicate(&self, sample: &CensoredSample, size: usize, index: usize, opts: &CalibrationOptions) -> Option<f64> {
        let mut rng = stream(opts.seed, &[tag::CALIBRATE, index as u64, size as u64]);
        let boot = resample(sample, size, &mut rng);
        let (dist, _) = fit_npmle(&boot, opts.em).ok()?;
        let mu = moments(&dist, self.theta_hat, opts.q, opts.smoothed);
        if !(mu.mu(2) > 0.0) {
            return None;
        }
        Some(if opts.smoothed {
            smoothed_cdf(&dist, self.theta_hat)
        } else {
            dist.cdf(self.theta_hat)
        })
    }

    /// All `B` replicates at resample size `size`, in replicate order.
    fn replicates(&self, sample: &CensoredSample, size: usize, opts: &CalibrationOptions) -> Vec<Option<f64>> {
        (0..opts.boot_reps)
            .into_par_iter()
            .map(|r| self.replicate(sample, size, r, opts))
            .collect()
    }
}

fn too_degenerate(degenerate: usize, total: usize) -> bool {
    degenerate as f64 > MAX_DEGENERATE_FRACTION * total as f64
}

fn order_for(scheme: Scheme, opts: &CalibrationOptions) -> usize {
    opts.k.unwrap_or_else(|| select_order(scheme))
}

/// n-of-n bootstrap estimate of `ρ̂`.
pub fn calibrate_n_of_n(sample: &CensoredSample, opts: &CalibrationOptions) -> Result<CalibrationResult> {
    opts.validate()?;
    let n = sample.n();
    let rate = convergence_rate(sample.scheme());
    let cn = rate.value(n);
    let k = order_for(sample.scheme(), opts);
    let anchor = Anchor::new(sample, opts)?;

    let etas = anchor.replicates(sample, n, opts);
    let degenerate = etas.iter().filter(|e| e.is_none()).count();
    if too_degenerate(degenerate, etas.len()) {
        return Err(Error::Degenerate(format!(
            "{degenerate} of {} bootstrap replicates are degenerate",
            etas.len()
        )));
    }
    let draws: Vec<f64> = etas
        .into_iter()
        .flatten()
        .map(|eta| tau(cn * (eta - anchor.eta_hat), anchor.mu.mu(2), &anchor.coeffs, cn, k))
        .collect();
    let rho_hat = percentile(&draws, 1.0 - opts.alpha).max(0.0);
    Ok(CalibrationResult {
        k,
        rate,
        cn,
        rho_hat,
        c_n: threshold_from_rho(n, rate, rho_hat),
        n_b: None,
        theta_hat: anchor.theta_hat,
        draws,
        degenerate,
        grid: Vec::new(),
    })
}

/// The adaptive grid `b_0 = ⌈√n⌉, b_j = b_{j−1} + d ≤ n^0.99`.
pub fn bootstrap_size_grid(n: usize, d: usize) -> Vec<usize> {
    let top = (n as f64).powf(GRID_GAMMA);
    let b0 = (n as f64).sqrt().ceil() as usize;
    let d = d.max(1);
    std::iter::successors(Some(b0), |b| Some(b + d))
        .take_while(|&b| b as f64 <= top)
        .collect()
}

/// Default grid step `max(1, ⌊n/10⌋)`.
pub fn default_grid_step(n: usize) -> usize {
    (n / 10).max(1)
}

/// m-of-n bootstrap estimate of `ρ̂` with adaptively chosen `n_b`.
pub fn calibrate_m_of_n(sample: &CensoredSample, opts: &CalibrationOptions) -> Result<CalibrationResult> {
    opts.validate()?;
    let n = sample.n();
    let rate = convergence_rate(sample.scheme());
    let cn = rate.value(n);
    let k = order_for(sample.scheme(), opts);
    let d = opts.grid_step.unwrap_or_else(|| default_grid_step(n));
    let sizes = bootstrap_size_grid(n, d);
    if sizes.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "sample size {n} too small for the adaptive bootstrap grid"
        )));
    }
    let anchor = Anchor::new(sample, opts)?;
    let mu2 = anchor.mu.mu(2);
    let level = 1.0 - opts.alpha;

    let mut grid = Vec::with_capacity(sizes.len());
    let mut kept: Vec<(usize, f64, Vec<f64>, usize)> = Vec::new();
    for b in sizes {
        let etas = anchor.replicates(sample, b, opts);
        let degenerate = etas.iter().filter(|e| e.is_none()).count();
        let valid: Vec<f64> = etas.into_iter().flatten().collect();
        let dropped = too_degenerate(degenerate, opts.boot_reps);
        let xi = if dropped {
            f64::NAN
        } else {
            let scale = (b as f64).cbrt();
            let stats: Vec<f64> = valid
                .iter()
                .map(|eta| (scale * (eta - anchor.eta_hat)).powi(2) / mu2)
                .collect();
            percentile(&stats, level)
        };
        grid.push(GridPoint {
            b,
            xi,
            degenerate,
            dropped,
        });
        if !dropped {
            kept.push((b, xi, valid, degenerate));
        }
    }
    if kept.is_empty() {
        return Err(Error::Degenerate(
            "every bootstrap size on the grid had a majority of degenerate replicates".into(),
        ));
    }

    // argmin_j |ξ_j − ξ_{j−1}|, first (smallest b) on ties.
    let chosen = if kept.len() == 1 {
        0
    } else {
        (1..kept.len())
            .min_by(|&i, &j| {
                let di = (kept[i].1 - kept[i - 1].1).abs();
                let dj = (kept[j].1 - kept[j - 1].1).abs();
                di.total_cmp(&dj).then(i.cmp(&j))
            })
            .expect("at least two grid points")
    };
    let (n_b, _, etas, degenerate) = kept.swap_remove(chosen);
    let scale = (n_b as f64).cbrt();
    let draws: Vec<f64> = etas
        .iter()
        .map(|eta| tau(scale * (eta - anchor.eta_hat), mu2, &anchor.coeffs, cn, k))
        .collect();
    let rho_hat = percentile(&draws, level).max(0.0);
    Ok(CalibrationResult {
        k,
        rate,
        cn,
        rho_hat,
        c_n: threshold_from_rho(n, rate, rho_hat),
        n_b: Some(n_b),
        theta_hat: anchor.theta_hat,
        draws,
        degenerate,
        grid,
    })
}

/// Calibrate with the bootstrap appropriate to the scheme's rate.
pub fn calibrate(sample: &CensoredSample, opts: &CalibrationOptions) -> Result<CalibrationResult> {
    if convergence_rate(sample.scheme()).is_cube_root() {
        calibrate_m_of_n(sample, opts)
    } else {
        calibrate_n_of_n(sample, opts)
    }
}

/// The fitted NPMLE underlying a calibration, for callers that need both.
pub fn fit_for_calibration(sample: &CensoredSample, opts: &CalibrationOptions) -> Result<DiscreteDistribution> {
    Ok(Anchor::new(sample, opts)?.dist)
}
