//! Weighted empirical log-likelihood ratio and its expansion statistics.
//!
//! For a probe `θ` with centred weights `U_i`, the profile ratio is
//! maximised by `p̃_i = p̂_i / (1 + λ₀ U_i)` where `λ₀` solves
//! `g(λ) = Σ p̂_i U_i / (1 + λ U_i) = 0`, giving
//! `−2 log r(θ) = 2n Σ p̂_i log(1 + λ₀ U_i)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::npmle::DiscreteDistribution;
use crate::smoothing::{u_values, MomentSet};

const BRACKET_SHRINK: f64 = 1e-12;
const G_TOL: f64 = 1e-12;
const WIDTH_TOL: f64 = 1e-14;
const MAX_ROOT_ITER: usize = 1000;

/// Result of evaluating `−2 log r(θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelrEvaluation {
    pub lambda0: f64,
    /// `+∞` when `θ` is infeasible (no admissible reweighting exists).
    pub neg2logr: f64,
    pub feasible: bool,
    /// `(−1/U_(m), −1/U_(1))`; meaningless when infeasible.
    pub bracket: (f64, f64),
}

fn g_and_slope(p: &[f64], u: &[f64], lambda: f64) -> (f64, f64) {
    p.iter().zip(u).fold((0.0, 0.0), |(g, dg), (&pi, &ui)| {
        let t = ui / (1.0 + lambda * ui);
        (g + pi * t, dg - pi * t * t)
    })
}

fn u_range(u: &[f64]) -> (f64, f64) {
    u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    })
}

/// Open interval of admissible `λ`: `1 + λ U_i > 0` for every `i`.
pub fn lambda_bracket(u: &[f64]) -> (f64, f64) {
    let (umin, umax) = u_range(u);
    (-1.0 / umax, -1.0 / umin)
}

/// Root of `g(λ) = Σ p_i U_i / (1 + λ U_i)` inside the admissible bracket.
///
/// `g` is strictly decreasing there, running from `+∞` to `−∞`, so the root
/// is unique. Newton steps are taken from `λ = 0` and replaced by bisection
/// whenever they would leave the current sign-change bracket.
pub fn solve_lambda(p: &[f64], u: &[f64]) -> Result<f64> {
    if p.len() != u.len() || p.is_empty() {
        return invalid("masses and weights must be non-empty and of equal length");
    }
    let (umin, umax) = u_range(u);
    if !(umin < 0.0 && umax > 0.0) {
        return Err(Error::Infeasible(format!(
            "weights must take both signs (min {umin}, max {umax})"
        )));
    }
    let (lo0, hi0) = (-1.0 / umax, -1.0 / umin);
    let (mut lo, mut hi) = (lo0 * (1.0 - BRACKET_SHRINK), hi0 * (1.0 - BRACKET_SHRINK));
    let initial_width = hi - lo;

    let mut lambda = 0.0;
    let (mut g, mut dg) = g_and_slope(p, u, lambda);
    for _ in 0..MAX_ROOT_ITER {
        if g.abs() < G_TOL || hi - lo < WIDTH_TOL * initial_width {
            break;
        }
        if g > 0.0 {
            lo = lambda;
        } else {
            hi = lambda;
        }
        let newton = lambda - g / dg;
        lambda = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        (g, dg) = g_and_slope(p, u, lambda);
    }
    Ok(lambda)
}

/// `−2 log r` for masses `p`, weights `u` and sample size `n`.
pub fn neg2_log_welr_weights(p: &[f64], u: &[f64], n: usize) -> WelrEvaluation {
    let bracket = lambda_bracket(u);
    match solve_lambda(p, u) {
        Ok(lambda0) => {
            let s: f64 = p.iter().zip(u).map(|(&pi, &ui)| pi * (lambda0 * ui).ln_1p()).sum();
            WelrEvaluation {
                lambda0,
                neg2logr: (2.0 * n as f64 * s).max(0.0),
                feasible: true,
                bracket,
            }
        }
        Err(_) => WelrEvaluation {
            lambda0: f64::NAN,
            neg2logr: f64::INFINITY,
            feasible: false,
            bracket,
        },
    }
}

/// `−2 log r(θ)` for the quantile level `q` under `dist`.
pub fn neg2_log_welr(dist: &DiscreteDistribution, theta: f64, q: f64, smoothed: bool) -> WelrEvaluation {
    let u = u_values(dist, theta, q, smoothed);
    neg2_log_welr_weights(dist.masses(), &u, dist.n())
}

/// Coefficients `â_1 … â_4` of the expansion of `−2 log r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
}

impl ExpansionCoefficients {
    /// `â_j` for `j ∈ 1..=4`.
    pub fn get(&self, j: usize) -> f64 {
        match j {
            1 => self.a1,
            2 => self.a2,
            3 => self.a3,
            4 => self.a4,
            _ => panic!("expansion coefficient index {j} not in 1..=4"),
        }
    }
}

fn require_positive_mu2(mu: &MomentSet) -> Result<f64> {
    let m2 = mu.mu(2);
    if m2 > 0.0 {
        Ok(m2)
    } else {
        Err(Error::Degenerate(format!("second moment {m2} is not positive")))
    }
}

pub fn expansion_coefficients(mu: &MomentSet) -> Result<ExpansionCoefficients> {
    let m2 = require_positive_mu2(mu)?;
    let (m3, m4, m5, m6) = (mu.mu(3), mu.mu(4), mu.mu(5), mu.mu(6));
    Ok(ExpansionCoefficients {
        a1: 2.0 * m3 / (3.0 * m2 * m2),
        a2: (m3 * m3 - 0.5 * m2 * m4) / m2.powi(4),
        a3: 2.0 * (m3.powi(3) + 0.2 * m2 * m2 * m5 - m2 * m3 * m4) / m2.powi(6),
        a4: (14.0 / 3.0 * m3.powi(4) - m2.powi(3) * m6 / 3.0 + m2 * m2 * m4 * m4 + 2.0 * m2 * m2 * m3 * m5
            - 7.0 * m2 * m3 * m3 * m4)
            / m2.powi(8),
    })
}

fn check_order(k: usize) -> Result<()> {
    if k > 4 {
        return invalid(format!("expansion order {k} not in 0..=4"));
    }
    Ok(())
}

/// `τ(x) = x²/μ̂₂ · (1 + Σ_{j≤k} (â_j / C_n^j) x^j)`.
pub fn tau(x: f64, mu2: f64, coeffs: &ExpansionCoefficients, cn: f64, k: usize) -> f64 {
    let mut correction = 1.0;
    let mut power = 1.0;
    for j in 1..=k {
        power *= x / cn;
        correction += coeffs.get(j) * power;
    }
    x * x / mu2 * correction
}

/// `B_n^(k) = n(η̂−q)²/μ̂₂ · (1 + Σ_{j≤k} â_j (η̂−q)^j)`.
pub fn b_statistic(n: usize, mu: &MomentSet, k: usize) -> Result<f64> {
    check_order(k)?;
    let m2 = require_positive_mu2(mu)?;
    let coeffs = expansion_coefficients(mu)?;
    Ok(n as f64 * tau(mu.deviation(), m2, &coeffs, 1.0, k))
}

/// `A_n^(k) = n⁻¹ C_n² B_n^(k) = τ(C_n(η̂ − q))`.
pub fn expansion_statistic(cn: f64, mu: &MomentSet, k: usize) -> Result<f64> {
    check_order(k)?;
    let m2 = require_positive_mu2(mu)?;
    let coeffs = expansion_coefficients(mu)?;
    Ok(tau(cn * mu.deviation(), m2, &coeffs, cn, k))
}
