//! Adjusted nonparametric MLE of the lifetime distribution.
//!
//! Whatever the censoring scheme, the estimate is a discrete distribution
//! with finitely many atoms `W_1 < … < W_m` and positive masses summing to
//! one. Any mass the raw NPMLE leaves unassigned (beyond the last finite
//! observation) is placed at the largest observed value, making the estimate
//! a proper distribution function.

mod km;
mod pava;
mod turnbull;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::censoring::{CensoredSample, Scheme};
use crate::error::{Error, Result};

pub use km::kaplan_meier;
pub use pava::{isotonic_increasing, pava_current_status};
pub use turnbull::turnbull_em;

/// Atoms lighter than this are dropped (and the rest renormalized).
pub const MASS_FLOOR: f64 = 1e-10;

/// Discrete distribution `Σ p_i 1{W_i ≤ x}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    support: Vec<f64>,
    mass: Vec<f64>,
    #[serde(skip)]
    cumulative: Vec<f64>,
    /// Size of the sample the estimate was computed from.
    n: usize,
}

impl DiscreteDistribution {
    /// Build from explicit atoms. Support must be positive and strictly
    /// increasing, masses positive and summing to one (to within 1e-9; the
    /// masses are then renormalized exactly).
    pub fn new(support: Vec<f64>, mass: Vec<f64>, n: usize) -> Result<Self> {
        if support.is_empty() || support.len() != mass.len() {
            return Err(Error::InvalidParameter(
                "support and masses must be non-empty and of equal length".into(),
            ));
        }
        if support.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::InvalidParameter("support points must be finite and > 0".into()));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("support must be strictly increasing".into()));
        }
        if mass.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(Error::InvalidParameter("masses must be > 0".into()));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("masses sum to {total}, not 1")));
        }
        Ok(Self::assemble(support, mass, n))
    }

    /// Build from unsorted atoms: equal locations are merged by summing
    /// their masses, atoms below [`MASS_FLOOR`] are pruned, and the result
    /// is renormalized.
    pub fn from_atoms(atoms: impl IntoIterator<Item = (f64, f64)>, n: usize) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().filter(|a| a.1 > 0.0).collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (w, p) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == w => last.1 += p,
                _ => merged.push((w, p)),
            }
        }
        merged.retain(|a| a.1 >= MASS_FLOOR);
        if merged.is_empty() {
            return Err(Error::Degenerate("no atoms with positive mass".into()));
        }
        if merged.iter().any(|a| !a.0.is_finite() || a.0 <= 0.0) {
            return Err(Error::Degenerate(
                "estimated distribution puts mass at a non-positive or infinite point".into(),
            ));
        }
        let total: f64 = merged.iter().map(|a| a.1).sum();
        let (support, mass) = merged.into_iter().map(|(w, p)| (w, p / total)).unzip();
        Ok(Self::assemble(support, mass, n))
    }

    fn assemble(support: Vec<f64>, mut mass: Vec<f64>, n: usize) -> Self {
        let total: f64 = mass.iter().sum();
        mass.iter_mut().for_each(|p| *p /= total);
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = mass
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        *cumulative.last_mut().expect("non-empty") = 1.0;
        Self {
            support,
            mass,
            cumulative,
            n,
        }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    /// `F(W_i)` for each support point; the last entry is exactly 1.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Number of atoms `m`.
    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Originating sample size.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    /// Step distribution function `F(x) = Σ_{W_i ≤ x} p_i`.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.support.partition_point(|&w| w <= x);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    /// Right-continuous generalized inverse `min{W_i : F(W_i) ≥ q}`.
    pub fn raw_quantile(&self, q: f64) -> f64 {
        let k = self.cumulative.partition_point(|&c| c < q);
        self.support[k.min(self.len() - 1)]
    }

    /// Same distribution with every support point multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        Self::assemble(self.support.iter().map(|w| w * c).collect(), self.mass.clone(), self.n)
    }

    /// Write the atoms as a `w,p` CSV table.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "w,p")?;
        for (w, p) in self.support.iter().zip(&self.mass) {
            writeln!(out, "{w},{p}")?;
        }
        Ok(())
    }
}

/// Stopping rule for the self-consistency iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmOptions {
    /// Stop once the sup-norm change of the distribution function between
    /// consecutive iterations drops below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EmOptions {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            max_iter: 10_000,
        }
    }
}

/// Convergence summary of an NPMLE fit. Closed-form engines report zero
/// iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmReport {
    pub iterations: usize,
    pub final_sup_change: f64,
    pub converged: bool,
}

impl EmReport {
    pub fn closed_form() -> Self {
        Self {
            iterations: 0,
            final_sup_change: 0.0,
            converged: true,
        }
    }
}

/// Fit the adjusted NPMLE, choosing the engine by scheme: product-limit for
/// right censoring, pool-adjacent-violators for current status data, and
/// the Turnbull self-consistency iteration for everything else.
pub fn fit_npmle(sample: &CensoredSample, options: EmOptions) -> Result<(DiscreteDistribution, EmReport)> {
    match sample.scheme() {
        Scheme::Right => Ok((kaplan_meier(sample)?, EmReport::closed_form())),
        Scheme::Interval1 => Ok((pava_current_status(sample)?, EmReport::closed_form())),
        _ => {
            let (dist, report) = turnbull_em(&sample.to_intervals(), options)?;
            Ok((dist.with_n(sample.n()), report))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::censoring::Observation;

    #[test]
    fn from_atoms_merges_ties_and_prunes() {
        let d = DiscreteDistribution::from_atoms([(2.0, 0.25), (1.0, 0.5), (2.0, 0.25), (3.0, 1e-12)], 4).unwrap();
        assert_eq!(d.support(), &[1.0, 2.0]);
        assert_eq!(d.masses(), &[0.5, 0.5]);
        assert_eq!(d.cumulative(), &[0.5, 1.0]);
    }

    #[test]
    fn new_validates() {
        assert!(DiscreteDistribution::new(vec![1.0, 1.0], vec![0.5, 0.5], 2).is_err());
        assert!(DiscreteDistribution::new(vec![0.0, 1.0], vec![0.5, 0.5], 2).is_err());
        assert!(DiscreteDistribution::new(vec![1.0, 2.0], vec![0.5, 0.6], 2).is_err());
        assert!(DiscreteDistribution::new(vec![1.0, 2.0], vec![1.0, 0.0], 2).is_err());
        assert!(DiscreteDistribution::new(vec![1.0, 2.0], vec![0.5, 0.5], 2).is_ok());
    }

    #[test]
    fn step_cdf_and_raw_quantile() {
        let d = DiscreteDistribution::new(vec![1.0, 2.0, 3.0], vec![0.25, 0.25, 0.5], 4).unwrap();
        assert_eq!(d.cdf(0.5), 0.0);
        assert_eq!(d.cdf(1.0), 0.25);
        assert_eq!(d.cdf(2.5), 0.5);
        assert_eq!(d.cdf(9.0), 1.0);
        assert_eq!(d.raw_quantile(0.25), 1.0);
        assert_eq!(d.raw_quantile(0.26), 2.0);
        assert_eq!(d.raw_quantile(0.5), 2.0);
        assert_eq!(d.raw_quantile(0.9), 3.0);
    }

    #[test]
    fn uncensored_tie_is_collapsed() {
        let s = CensoredSample::new(
            Scheme::None,
            [5.0, 5.0, 7.0].iter().map(|&x| Observation::Exact { x }).collect(),
            None,
        )
        .unwrap();
        let (d, _) = fit_npmle(&s, EmOptions::default()).unwrap();
        assert_eq!(d.support(), &[5.0, 7.0]);
        assert!((d.masses()[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((d.masses()[1] - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(d.n(), 3);
    }

    #[test]
    fn dispatch_right_is_kaplan_meier() {
        let s = CensoredSample::new(
            Scheme::Right,
            vec![
                Observation::Right { v: 1.0, delta: 1 },
                Observation::Right { v: 2.0, delta: 0 },
                Observation::Right { v: 3.0, delta: 1 },
            ],
            None,
        )
        .unwrap();
        let (d, report) = fit_npmle(&s, EmOptions::default()).unwrap();
        assert_eq!(d, kaplan_meier(&s).unwrap());
        assert_eq!(report, EmReport::closed_form());
    }

    #[test]
    fn csv_output() {
        let d = DiscreteDistribution::new(vec![1.0, 2.5], vec![0.5, 0.5], 2).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "w,p\n1,0.5\n2.5,0.5\n");
    }
}
