use super::DiscreteDistribution;
use crate::censoring::{CensoredSample, Observation, Scheme};
use crate::error::{Error, Result};

/// Weighted least-squares non-decreasing fit by pool-adjacent-violators.
pub fn isotonic_increasing(values: &[f64], weights: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), weights.len());
    // Blocks of (weighted mean, total weight, length).
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() >= 2 {
            let (m2, w2, l2) = blocks[blocks.len() - 1];
            let (m1, w1, l1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let tw = w1 + w2;
            *blocks.last_mut().unwrap() = ((m1 * w1 + m2 * w2) / tw, tw, l1 + l2);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, _, len)| std::iter::repeat_n(m, len))
        .collect()
}

/// Current-status NPMLE: the isotonic regression of `δ = 1{X ≤ Y}` on the
/// sorted examination times, with the distribution function forced to one at
/// the largest examination time.
pub fn pava_current_status(sample: &CensoredSample) -> Result<DiscreteDistribution> {
    if sample.scheme() != Scheme::Interval1 {
        return Err(Error::InvalidParameter(format!(
            "pava_current_status needs interval1 data, got {}",
            sample.scheme()
        )));
    }
    let mut obs: Vec<(f64, f64)> = sample
        .observations()
        .iter()
        .map(|o| match *o {
            Observation::CurrentStatus { y, delta } => (y, f64::from(delta)),
            _ => unreachable!("validated current-status sample"),
        })
        .collect();
    if obs.is_empty() {
        return Err(Error::EmptySample);
    }
    obs.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Tied examination times form one design point.
    let mut times = Vec::new();
    let mut means = Vec::new();
    let mut weights = Vec::new();
    for (y, d) in obs {
        if times.last() == Some(&y) {
            let k = times.len() - 1;
            means[k] = (means[k] * weights[k] + d) / (weights[k] + 1.0);
            weights[k] += 1.0;
        } else {
            times.push(y);
            means.push(d);
            weights.push(1.0);
        }
    }
    let fitted = isotonic_increasing(&means, &weights);

    let mut previous = 0.0;
    let mut atoms: Vec<(f64, f64)> = times
        .iter()
        .zip(&fitted)
        .map(|(&t, &f)| {
            let jump = f - previous;
            previous = f;
            (t, jump)
        })
        .collect();
    let last = atoms.len() - 1;
    atoms[last].1 += 1.0 - previous;
    DiscreteDistribution::from_atoms(atoms, sample.n())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn current_status(rows: &[(f64, u8)]) -> CensoredSample {
        CensoredSample::new(
            Scheme::Interval1,
            rows.iter()
                .map(|&(y, delta)| Observation::CurrentStatus { y, delta })
                .collect(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn pava_pools_violators() {
        assert_eq!(isotonic_increasing(&[0.0, 1.0, 0.0], &[1.0; 3]), vec![0.0, 0.5, 0.5]);
        assert_eq!(
            isotonic_increasing(&[3.0, 1.0, 0.5, 4.0], &[1.0, 1.0, 1.0, 2.0]),
            vec![1.5, 1.5, 1.5, 4.0]
        );
    }

    #[test]
    fn middle_violator() {
        let d = pava_current_status(&current_status(&[(1.0, 0), (2.0, 1), (3.0, 0)])).unwrap();
        assert_eq!(d.support(), &[2.0, 3.0]);
        assert_eq!(d.masses(), &[0.5, 0.5]);
    }

    #[test]
    fn already_isotonic() {
        let d = pava_current_status(&current_status(&[(1.0, 0), (2.0, 0), (3.0, 1)])).unwrap();
        assert_eq!(d.support(), &[3.0]);
        assert_eq!(d.masses(), &[1.0]);
    }

    #[test]
    fn all_failed_before_first_exam() {
        let d = pava_current_status(&current_status(&[(2.0, 1), (1.0, 1), (3.0, 1)])).unwrap();
        assert_eq!(d.support(), &[1.0]);
        assert_eq!(d.masses(), &[1.0]);
    }

    #[test]
    fn tied_examination_times_pool() {
        let d = pava_current_status(&current_status(&[(1.0, 1), (1.0, 0), (2.0, 1), (2.0, 1)])).unwrap();
        assert_eq!(d.support(), &[1.0, 2.0]);
        assert_eq!(d.masses(), &[0.5, 0.5]);
    }
}
