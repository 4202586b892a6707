use super::{DiscreteDistribution, EmOptions, EmReport};
use crate::censoring::{largest_finite_endpoint, CensoringInterval};
use crate::error::{Error, Result};

/// Candidate mass points: every exact observation, plus the right endpoint of
/// each innermost interval formed by the non-exact observations. A right
/// endpoint of `+∞` yields a virtual tail candidate.
fn candidates(intervals: &[CensoringInterval]) -> Vec<f64> {
    #[derive(PartialEq, Eq, PartialOrd, Ord, Clone, Copy)]
    enum End {
        // Declared first so that at a shared value `(a, v]` closes before
        // `(v, b]` opens: the two do not intersect.
        Right,
        Left,
    }
    let mut ends: Vec<(f64, End)> = Vec::new();
    let mut points: Vec<f64> = Vec::new();
    for iv in intervals {
        if iv.exact {
            points.push(iv.left);
        } else {
            ends.push((iv.left, End::Left));
            ends.push((iv.right, End::Right));
        }
    }
    ends.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    points.extend(
        ends.windows(2)
            .filter(|w| w[0].1 == End::Left && w[1].1 == End::Right)
            .map(|w| w[1].0),
    );
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
}

/// Self-consistency (EM) iteration for the NPMLE from censoring intervals.
///
/// Iterates until the sup-norm change of the distribution function over the
/// candidate points drops below `options.tol`. Mass left at `+∞` is moved to
/// the largest finite endpoint of the data, and atoms below the mass floor are
/// pruned. Returns [`Error::NotConverged`] if `options.max_iter` is reached.
pub fn turnbull_em(intervals: &[CensoringInterval], options: EmOptions) -> Result<(DiscreteDistribution, EmReport)> {
    if intervals.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(options.tol > 0.0) || options.max_iter == 0 {
        return Err(Error::InvalidParameter("EM needs tol > 0 and max_iter >= 1".into()));
    }
    let support = candidates(intervals);
    let k = support.len();

    // Each observation covers a contiguous run [lo, hi) of candidates.
    let mut ranges: Vec<(usize, usize)> = intervals
        .iter()
        .map(|iv| {
            if iv.exact {
                let lo = support.partition_point(|&c| c < iv.left);
                (lo, lo + 1)
            } else {
                (
                    support.partition_point(|&c| c <= iv.left),
                    support.partition_point(|&c| c <= iv.right),
                )
            }
        })
        .collect();
    ranges.sort_unstable();
    let mut groups: Vec<(usize, usize, f64)> = Vec::new();
    for r in ranges {
        match groups.last_mut() {
            Some(g) if (g.0, g.1) == r => g.2 += 1.0,
            _ => groups.push((r.0, r.1, 1.0)),
        }
    }
    debug_assert!(groups.iter().all(|g| g.0 < g.1));

    let n = intervals.len() as f64;
    let mut p = vec![1.0 / k as f64; k];
    let mut prefix = vec![0.0; k + 1];
    let mut acc = vec![0.0; k + 1];
    let mut report = EmReport {
        iterations: 0,
        final_sup_change: f64::INFINITY,
        converged: false,
    };
    let mut last_loglik = f64::NEG_INFINITY;

    while report.iterations < options.max_iter {
        report.iterations += 1;
        for j in 0..k {
            prefix[j + 1] = prefix[j] + p[j];
        }
        acc.iter_mut().for_each(|a| *a = 0.0);
        let mut loglik = 0.0;
        for &(lo, hi, w) in &groups {
            let denom = prefix[hi] - prefix[lo];
            loglik += w * denom.ln();
            acc[lo] += w / denom;
            acc[hi] -= w / denom;
        }
        debug_assert!(
            loglik >= last_loglik - 1e-9 * loglik.abs().max(1.0),
            "EM log-likelihood decreased: {last_loglik} -> {loglik}"
        );
        last_loglik = loglik;

        let mut running = 0.0;
        let mut f_old = 0.0;
        let mut f_new = 0.0;
        let mut sup: f64 = 0.0;
        for j in 0..k {
            running += acc[j];
            f_old += p[j];
            p[j] *= running / n;
            f_new += p[j];
            sup = sup.max((f_new - f_old).abs());
        }
        report.final_sup_change = sup;
        if sup < options.tol {
            report.converged = true;
            break;
        }
    }
    if !report.converged {
        return Err(Error::NotConverged(report));
    }

    let tail_home = largest_finite_endpoint(intervals);
    let atoms = support
        .iter()
        .zip(&p)
        .map(|(&w, &m)| (if w.is_finite() { w } else { tail_home }, m));
    Ok((DiscreteDistribution::from_atoms(atoms, intervals.len())?, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::censoring::{CensoredSample, Observation, Scheme};
    use crate::npmle::{kaplan_meier, pava_current_status};

    fn tight() -> EmOptions {
        EmOptions {
            tol: 1e-10,
            max_iter: 100_000,
        }
    }

    fn sup_cdf_gap(a: &DiscreteDistribution, b: &DiscreteDistribution) -> f64 {
        a.support()
            .iter()
            .chain(b.support())
            .map(|&x| (a.cdf(x) - b.cdf(x)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn innermost_intervals() {
        let iv = [
            CensoringInterval::between(0.0, 2.0),
            CensoringInterval::between(1.0, 3.0),
            CensoringInterval::right_censored(2.5),
            CensoringInterval::exact(0.5),
        ];
        // (1,2] and (2.5,3] are innermost; (2.5,∞) contributes nothing new.
        assert_eq!(candidates(&iv), vec![0.5, 2.0, 3.0]);
        // Touching intervals do not intersect.
        let iv = [
            CensoringInterval::between(0.0, 1.0),
            CensoringInterval::between(1.0, 2.0),
        ];
        assert_eq!(candidates(&iv), vec![1.0, 2.0]);
        let iv = [CensoringInterval::right_censored(1.0)];
        assert_eq!(candidates(&iv), vec![f64::INFINITY]);
    }

    #[test]
    fn exact_data_converge_immediately() {
        let iv: Vec<_> = [1.0, 2.0, 3.0].iter().map(|&x| CensoringInterval::exact(x)).collect();
        let (d, report) = turnbull_em(&iv, EmOptions::default()).unwrap();
        assert_eq!(d.support(), &[1.0, 2.0, 3.0]);
        for p in d.masses() {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
        assert_eq!(report.iterations, 1);
        assert!(report.converged);
    }

    #[test]
    fn agrees_with_kaplan_meier() {
        let s = CensoredSample::new(
            Scheme::Right,
            [(1.0, 1), (2.0, 0), (3.0, 1)]
                .iter()
                .map(|&(v, delta)| Observation::Right { v, delta })
                .collect(),
            None,
        )
        .unwrap();
        let (em, _) = turnbull_em(&s.to_intervals(), tight()).unwrap();
        let km = kaplan_meier(&s).unwrap();
        assert!(sup_cdf_gap(&em, &km) < 1e-8);
        assert_eq!(em.support(), &[1.0, 3.0]);
    }

    #[test]
    fn agrees_with_pava() {
        let s = CensoredSample::new(
            Scheme::Interval1,
            [(1.0, 0), (2.0, 1), (3.0, 0)]
                .iter()
                .map(|&(y, delta)| Observation::CurrentStatus { y, delta })
                .collect(),
            None,
        )
        .unwrap();
        let (em, _) = turnbull_em(&s.to_intervals(), tight()).unwrap();
        let pava = pava_current_status(&s).unwrap();
        assert!(sup_cdf_gap(&em, &pava) < 1e-6, "{em:?} vs {pava:?}");
    }

    #[test]
    fn doubly_censored_fixed_point() {
        let s = CensoredSample::new(
            Scheme::Doubly,
            vec![
                Observation::Doubly { v: 1.0, delta: 1 },
                Observation::Doubly { v: 3.0, delta: 1 },
                Observation::Doubly { v: 2.0, delta: 3 },
            ],
            None,
        )
        .unwrap();
        let opts = EmOptions::default();
        let iv = s.to_intervals();
        let (d, report) = turnbull_em(&iv, opts).unwrap();
        assert!(report.converged && report.final_sup_change < opts.tol);
        assert!(d.support().iter().all(|w| [1.0, 2.0, 3.0].contains(w)));
        assert!((d.masses().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (j, &w) in d.support().iter().enumerate() {
            let rhs: f64 = iv
                .iter()
                .filter(|i| i.contains(w))
                .map(|i| {
                    let denom: f64 = d
                        .support()
                        .iter()
                        .zip(d.masses())
                        .filter(|(x, _)| i.contains(**x))
                        .map(|(_, p)| p)
                        .sum();
                    d.masses()[j] / denom
                })
                .sum::<f64>()
                / iv.len() as f64;
            assert!((rhs - d.masses()[j]).abs() < 10.0 * opts.tol);
        }
    }

    #[test]
    fn tail_mass_moves_to_largest_endpoint() {
        let iv = [CensoringInterval::exact(1.0), CensoringInterval::right_censored(4.0)];
        let (d, _) = turnbull_em(&iv, tight()).unwrap();
        assert_eq!(d.support(), &[1.0, 4.0]);
        assert!((d.masses()[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn reports_non_convergence() {
        let iv = [
            CensoringInterval::between(0.0, 2.0),
            CensoringInterval::between(0.0, 2.0),
            CensoringInterval::between(1.0, 3.0),
            CensoringInterval::between(2.0, 4.0),
        ];
        let err = turnbull_em(
            &iv,
            EmOptions {
                tol: 1e-300,
                max_iter: 3,
            },
        )
        .unwrap_err();
        match err {
            Error::NotConverged(r) => {
                assert_eq!(r.iterations, 3);
                assert!(!r.converged);
            }
            e => panic!("{e:?}"),
        }
    }
}
