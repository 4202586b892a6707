//! Confidence interval endpoints by inverting `−2 log r(θ)`.
//!
//! The interval `{θ : r(θ) ≥ c_n}` is a closed interval containing the
//! quantile estimate, so each endpoint is the unique crossing of
//! `−2 log r(θ) = −2 log c_n` on its side of the estimate.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::npmle::DiscreteDistribution;
use crate::smoothing::smoothed_quantile;
use crate::welr::{neg2_log_welr, neg2_log_welr_weights};

/// The open set of `θ` for which the constraint `F̃_p(θ) = q` (or
/// `F_p(θ) = q`) admits a reweighting `p` of the support.
///
/// Smoothed: `(q W_1, W_{m−1} + q (W_m − W_{m−1}))`. Step: `[W_1, W_m)`.
pub fn feasible_range(dist: &DiscreteDistribution, q: f64, smoothed: bool) -> Result<(f64, f64)> {
    if !(q > 0.0 && q < 1.0) {
        return invalid(format!("q = {q} not in (0, 1)"));
    }
    let w = dist.support();
    let m = w.len();
    if m < 2 {
        return Err(Error::Degenerate(format!(
            "a single-atom distribution (at {}) has no feasible range",
            w[0]
        )));
    }
    Ok(if smoothed {
        (q * w[0], w[m - 2] + q * (w[m - 1] - w[m - 2]))
    } else {
        (w[0], w[m - 1])
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalDiagnostics {
    pub feasible_range: (f64, f64),
    pub lower_iterations: usize,
    pub upper_iterations: usize,
    /// The sublevel set reached the feasible boundary on this side.
    pub lower_at_boundary: bool,
    pub upper_at_boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub x_l: f64,
    pub x_u: f64,
    /// Smoothed quantile `F̃⁻¹(q)`, or the raw inverse for the step flavour.
    pub theta_hat: f64,
    pub q: f64,
    pub c_n: f64,
    pub smoothed: bool,
    pub diagnostics: IntervalDiagnostics,
}

impl ConfidenceInterval {
    pub fn length(&self) -> f64 {
        self.x_u - self.x_l
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.x_l <= theta && theta <= self.x_u
    }
}

fn check_threshold(c_n: f64) -> Result<f64> {
    if !(c_n > 0.0 && c_n <= 1.0) {
        return invalid(format!("threshold c_n = {c_n} not in (0, 1]"));
    }
    Ok(-2.0 * c_n.ln())
}

/// Bisect between `outside` (where `below(θ)` is false) and `inside` (where it
/// holds) down to adjacent floating-point numbers. Returns the last inside
/// point and the number of halvings.
fn bisect(mut outside: f64, mut inside: f64, below: impl Fn(f64) -> bool) -> (f64, usize) {
    let mut iterations = 0;
    loop {
        let mid = 0.5 * (outside + inside);
        if mid == outside || mid == inside {
            return (inside, iterations);
        }
        iterations += 1;
        if below(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
}

/// Smoothed (`smoothed = true`) or step-function interval for level `q` at
/// likelihood threshold `c_n`.
pub fn welrci(dist: &DiscreteDistribution, q: f64, c_n: f64, smoothed: bool) -> Result<ConfidenceInterval> {
    if smoothed {
        welrci_smoothed(dist, q, c_n)
    } else {
        welrci_step(dist, q, c_n)
    }
}

fn welrci_smoothed(dist: &DiscreteDistribution, q: f64, c_n: f64) -> Result<ConfidenceInterval> {
    let t = check_threshold(c_n)?;
    let range = feasible_range(dist, q, true)?;
    let theta_hat = smoothed_quantile(dist, q)?;
    let below = |theta: f64| neg2_log_welr(dist, theta, q, true).neg2logr <= t;
    if !below(theta_hat) {
        return Err(Error::Infeasible(format!(
            "the ratio at the quantile estimate {theta_hat} is already below the threshold"
        )));
    }
    let ((x_l, lower_iterations), (x_u, upper_iterations)) = if t == 0.0 {
        ((theta_hat, 0), (theta_hat, 0))
    } else {
        (bisect(range.0, theta_hat, below), bisect(range.1, theta_hat, below))
    };
    let edge = 1e-8 * (range.1 - range.0);
    Ok(ConfidenceInterval {
        x_l,
        x_u,
        theta_hat,
        q,
        c_n,
        smoothed: true,
        diagnostics: IntervalDiagnostics {
            feasible_range: range,
            lower_iterations,
            upper_iterations,
            lower_at_boundary: x_l - range.0 <= edge,
            upper_at_boundary: range.1 - x_u <= edge,
        },
    })
}

/// `−2 log r` on each step segment `[W_j, W_{j+1})`, `j = 1..m−1`, where
/// the weights are constant.
pub fn step_segment_values(dist: &DiscreteDistribution, q: f64) -> Vec<f64> {
    let m = dist.len();
    (1..m)
        .map(|j| {
            let u: Vec<f64> = (0..m).map(|i| if i < j { 1.0 - q } else { -q }).collect();
            neg2_log_welr_weights(dist.masses(), &u, dist.n()).neg2logr
        })
        .collect()
}

fn welrci_step(dist: &DiscreteDistribution, q: f64, c_n: f64) -> Result<ConfidenceInterval> {
    let t = check_threshold(c_n)?;
    let range = feasible_range(dist, q, false)?;
    let w = dist.support();
    let values = step_segment_values(dist, q);
    let centre = (0..values.len())
        .min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)))
        .expect("m >= 2 gives at least one segment");
    if values[centre] > t {
        return Err(Error::Infeasible(format!(
            "no step segment reaches the threshold (smallest ratio {})",
            values[centre]
        )));
    }
    let mut lo = centre;
    while lo > 0 && values[lo - 1] <= t {
        lo -= 1;
    }
    let mut hi = centre;
    while hi + 1 < values.len() && values[hi + 1] <= t {
        hi += 1;
    }
    Ok(ConfidenceInterval {
        x_l: w[lo],
        x_u: w[hi + 1],
        theta_hat: dist.raw_quantile(q),
        q,
        c_n,
        smoothed: false,
        diagnostics: IntervalDiagnostics {
            feasible_range: range,
            lower_iterations: centre - lo,
            upper_iterations: hi - centre,
            lower_at_boundary: lo == 0,
            upper_at_boundary: hi + 1 == values.len(),
        },
    })
}

/// All integer compositions of `total` into `parts` non-negative parts.
fn compositions(total: usize, parts: usize, visit: &mut impl FnMut(&[usize])) {
    fn go(rest: usize, slot: usize, buf: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
        if slot + 1 == buf.len() {
            buf[slot] = rest;
            visit(buf);
            return;
        }
        for v in 0..=rest {
            buf[slot] = v;
            go(rest - v, slot + 1, buf, visit);
        }
    }
    let mut buf = vec![0; parts];
    go(total, 0, &mut buf, visit);
}

/// Reference bounds by enumerating reweightings `p` on a simplex grid of
/// step `grid_step` and keeping those with `Π (p_i/p̂_i)^{n p̂_i} ≥ c_n`.
///
/// Smoothed: min and max of `F̃_p⁻¹(q)` over the kept set. Step flavour: the
/// closure of the step segments `[W_j, W_{j+1})` on which some kept `p` has
/// `F_p(W_j) = q`; this needs `q` to be a multiple of `grid_step`.
/// Only for `m ≤ 4`.
pub fn brute_force_bounds(
    dist: &DiscreteDistribution,
    q: f64,
    c_n: f64,
    grid_step: f64,
    smoothed: bool,
) -> Result<(f64, f64)> {
    let m = dist.len();
    if m > 4 {
        return invalid(format!("brute force is limited to m <= 4 atoms, got {m}"));
    }
    if !(grid_step > 0.0 && grid_step <= 0.1) {
        return invalid(format!("grid step {grid_step} not in (0, 0.1]"));
    }
    check_threshold(c_n)?;
    let log_c = c_n.ln();
    let steps = (1.0 / grid_step).round() as usize;
    let n = dist.n() as f64;
    let p_hat = dist.masses();
    let w = dist.support();

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut record = |p: &[f64]| {
        if smoothed {
            let d = DiscreteDistribution::new(w.to_vec(), p.to_vec(), dist.n())
                .expect("kept reweightings are strictly positive");
            let theta = smoothed_quantile(&d, q).expect("q validated by the caller");
            lo = lo.min(theta);
            hi = hi.max(theta);
        } else {
            let mut cum = 0.0;
            for j in 0..m - 1 {
                cum += p[j];
                if (cum - q).abs() < 1e-9 {
                    lo = lo.min(w[j]);
                    hi = hi.max(w[j + 1]);
                }
            }
        }
    };

    record(p_hat);
    compositions(steps, m, &mut |counts: &[usize]| {
        if counts.contains(&0) {
            return;
        }
        let p: Vec<f64> = counts.iter().map(|&c| c as f64 / steps as f64).collect();
        let log_ratio: f64 = p.iter().zip(p_hat).map(|(pi, ph)| n * ph * (pi / ph).ln()).sum();
        if log_ratio >= log_c {
            record(&p);
        }
    });
    if lo > hi {
        return Err(Error::Infeasible("no grid reweighting satisfies the threshold".into()));
    }
    Ok((lo, hi))
}
