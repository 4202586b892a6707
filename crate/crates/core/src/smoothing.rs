//! Piecewise-linear smoothing of a discrete distribution.
//!
//! `F̃(x) = Σ p_i H_i(W, x)` joins the points `(W_i, F(W_i))` by straight
//! lines, anchored at `(W_0, 0)` with `W_0 = 0`. It is continuous, equals the
//! step function at every support point, is 0 for `x ≤ 0` and 1 for
//! `x ≥ W_m`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::npmle::DiscreteDistribution;

/// `H_i(W, x)` for 1-based `i ∈ 1..=m`, with `W_0 = 0`.
pub fn h_weight(support: &[f64], i: usize, x: f64) -> f64 {
    assert!(
        (1..=support.len()).contains(&i),
        "index {i} outside 1..={}",
        support.len()
    );
    let lo = if i == 1 { 0.0 } else { support[i - 2] };
    let hi = support[i - 1];
    if x <= lo {
        0.0
    } else if x > hi {
        1.0
    } else {
        (x - lo) / (hi - lo)
    }
}

/// Locate `x` relative to the support: returns `k` such that
/// `W_{k-1} < x ≤ W_k` in 1-based terms (0-based index `k`), or `None` if
/// `x ≤ 0` or `x > W_m`.
fn segment(dist: &DiscreteDistribution, x: f64) -> Option<usize> {
    if x <= 0.0 {
        return None;
    }
    let k = dist.support().partition_point(|&w| w < x);
    (k < dist.len()).then_some(k)
}

/// Smoothed distribution function `F̃(x)`.
pub fn smoothed_cdf(dist: &DiscreteDistribution, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let Some(k) = segment(dist, x) else {
        return 1.0;
    };
    let w = dist.support();
    let c = dist.cumulative();
    let (w_prev, c_prev) = if k == 0 { (0.0, 0.0) } else { (w[k - 1], c[k - 1]) };
    if x == w[k] {
        return c[k];
    }
    c_prev + (c[k] - c_prev) * (x - w_prev) / (w[k] - w_prev)
}

/// Smoothed quantile `F̃⁻¹(q)` by exact piecewise-linear inversion.
pub fn smoothed_quantile(dist: &DiscreteDistribution, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return invalid(format!("quantile level {q} not in (0, 1)"));
    }
    let w = dist.support();
    let c = dist.cumulative();
    let k = c.partition_point(|&v| v < q).min(dist.len() - 1);
    if c[k] == q {
        return Ok(w[k]);
    }
    let (w_prev, c_prev) = if k == 0 { (0.0, 0.0) } else { (w[k - 1], c[k - 1]) };
    Ok(w_prev + (q - c_prev) / (c[k] - c_prev) * (w[k] - w_prev))
}

/// The centred weights `U_i`: `H_i(W, θ) − q` (smoothed) or
/// `1{W_i ≤ θ} − q` (indicator flavour).
pub fn u_values(dist: &DiscreteDistribution, theta: f64, q: f64, smoothed: bool) -> Vec<f64> {
    let w = dist.support();
    if smoothed {
        (1..=w.len()).map(|i| h_weight(w, i, theta) - q).collect()
    } else {
        w.iter().map(|&wi| if wi <= theta { 1.0 - q } else { -q }).collect()
    }
}

/// `η̂ = q + Σ p_i U_i` and the central moments `μ̂_k = Σ p_i U_i^k` for
/// `k = 2..=6`, at probe point `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub theta: f64,
    pub q: f64,
    pub eta_hat: f64,
    /// `μ̂_2, …, μ̂_6`.
    pub mu: [f64; 5],
    pub smoothed: bool,
}

impl MomentSet {
    /// `μ̂_k` for `k ∈ 2..=6`.
    pub fn mu(&self, k: usize) -> f64 {
        assert!((2..=6).contains(&k), "moment order {k} not in 2..=6");
        self.mu[k - 2]
    }

    /// `η̂ − q`.
    pub fn deviation(&self) -> f64 {
        self.eta_hat - self.q
    }
}

pub fn moments(dist: &DiscreteDistribution, theta: f64, q: f64, smoothed: bool) -> MomentSet {
    let u = u_values(dist, theta, q, smoothed);
    let mut first = 0.0;
    let mut mu = [0.0; 5];
    for (&p, &ui) in dist.masses().iter().zip(&u) {
        first += p * ui;
        let mut power = ui;
        for m in mu.iter_mut() {
            power *= ui;
            *m += p * power;
        }
    }
    MomentSet {
        theta,
        q,
        eta_hat: q + first,
        mu,
        smoothed,
    }
}
