use super::DiscreteDistribution;
use crate::censoring::{CensoredSample, Observation, Scheme};
use crate::error::{Error, Result};

/// Product-limit estimate for right-censored data, adjusted so that all
/// remaining survival mass sits at the largest observation.
///
/// At tied times deaths are processed before censorings.
pub fn kaplan_meier(sample: &CensoredSample) -> Result<DiscreteDistribution> {
    if sample.scheme() != Scheme::Right {
        return Err(Error::InvalidParameter(format!(
            "kaplan_meier needs right-censored data, got {}",
            sample.scheme()
        )));
    }
    let mut obs: Vec<(f64, bool)> = sample
        .observations()
        .iter()
        .map(|o| match *o {
            Observation::Right { v, delta } => (v, delta == 1),
            _ => unreachable!("validated right-censored sample"),
        })
        .collect();
    if obs.is_empty() {
        return Err(Error::EmptySample);
    }
    // Time ascending, deaths first within a tie.
    obs.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));

    let n = obs.len();
    let largest = obs[n - 1].0;
    let mut at_risk = n as f64;
    let mut survival = 1.0;
    let mut atoms = Vec::new();
    let mut i = 0;
    while i < n {
        let t = obs[i].0;
        let mut deaths = 0usize;
        let mut leaving = 0usize;
        while i < n && obs[i].0 == t {
            deaths += usize::from(obs[i].1);
            leaving += 1;
            i += 1;
        }
        if deaths > 0 {
            let hazard = deaths as f64 / at_risk;
            atoms.push((t, survival * hazard));
            survival *= 1.0 - hazard;
        }
        at_risk -= leaving as f64;
    }
    if survival > 0.0 {
        atoms.push((largest, survival));
    }
    DiscreteDistribution::from_atoms(atoms, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn right(rows: &[(f64, u8)]) -> CensoredSample {
        CensoredSample::new(
            Scheme::Right,
            rows.iter().map(|&(v, delta)| Observation::Right { v, delta }).collect(),
            None,
        )
        .unwrap()
    }

    fn assert_dist(d: &DiscreteDistribution, w: &[f64], p: &[f64]) {
        assert_eq!(d.support(), w);
        for (a, b) in d.masses().iter().zip(p) {
            assert!((a - b).abs() < 1e-12, "{:?} vs {p:?}", d.masses());
        }
    }

    #[test]
    fn censored_middle_observation() {
        let d = kaplan_meier(&right(&[(1.0, 1), (2.0, 0), (3.0, 1)])).unwrap();
        assert_dist(&d, &[1.0, 3.0], &[1.0 / 3.0, 2.0 / 3.0]);
    }

    #[test]
    fn censored_last_observation_gets_remaining_mass() {
        let d = kaplan_meier(&right(&[(1.0, 1), (2.0, 0)])).unwrap();
        assert_dist(&d, &[1.0, 2.0], &[0.5, 0.5]);
    }

    #[test]
    fn uncensored_is_empirical() {
        let d = kaplan_meier(&right(&[(3.0, 1), (1.0, 1), (2.0, 1)])).unwrap();
        assert_dist(&d, &[1.0, 2.0, 3.0], &[1.0 / 3.0; 3]);
    }

    #[test]
    fn deaths_precede_censorings_at_ties() {
        // At t=1: 4 at risk, one death; the tied censoring is still at risk.
        let d = kaplan_meier(&right(&[(1.0, 0), (1.0, 1), (2.0, 1), (3.0, 1)])).unwrap();
        assert_dist(&d, &[1.0, 2.0, 3.0], &[0.25, 0.375, 0.375]);
    }

    #[test]
    fn all_censored_puts_everything_at_the_end() {
        let d = kaplan_meier(&right(&[(1.0, 0), (2.0, 0)])).unwrap();
        assert_dist(&d, &[2.0], &[1.0]);
    }
}
