//! Synthetic censored samples for the simulation presets.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Exp, Uniform};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared as ChiSquaredCdf, ContinuousCDF};

use super::{CensoredSample, Observation, Scheme};
use crate::error::{invalid, Error, Result};
use crate::rng::{self, tag, StreamRng};

/// A continuous nonnegative distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "camelCase")]
pub enum Dist {
    /// Exponential with the given mean (not rate).
    Exponential {
        mean: f64,
    },
    ChiSquared {
        df: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
}

impl Dist {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Dist::Exponential { mean } => mean.is_finite() && mean > 0.0,
            Dist::ChiSquared { df } => df.is_finite() && df > 0.0,
            Dist::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi,
        };
        if ok {
            Ok(())
        } else {
            invalid(format!("bad distribution parameters: {self}"))
        }
    }

    pub fn sample(&self, rng: &mut StreamRng) -> f64 {
        match *self {
            Dist::Exponential { mean } => Exp::new(1.0 / mean).expect("validated").sample(rng),
            Dist::ChiSquared { df } => ChiSquared::new(df).expect("validated").sample(rng),
            Dist::Uniform { lo, hi } => Uniform::new(lo, hi).expect("validated").sample(rng),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match *self {
            Dist::Exponential { mean } => -(-x / mean).exp_m1(),
            Dist::ChiSquared { df } => ChiSquaredCdf::new(df).expect("validated").cdf(x),
            Dist::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
        }
    }

    /// The true `q`-quantile `F⁻¹(q)`.
    pub fn quantile(&self, q: f64) -> f64 {
        match *self {
            Dist::Exponential { mean } => -mean * (-q).ln_1p(),
            Dist::ChiSquared { df } => ChiSquaredCdf::new(df).expect("validated").inverse_cdf(q),
            Dist::Uniform { lo, hi } => lo + q * (hi - lo),
        }
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dist::Exponential { mean } => write!(f, "exp:{mean}"),
            Dist::ChiSquared { df } => write!(f, "chisq:{df}"),
            Dist::Uniform { lo, hi } => write!(f, "uniform:{lo}:{hi}"),
        }
    }
}

impl FromStr for Dist {
    type Err = Error;

    /// `exp:<mean>`, `chisq:<df>` or `uniform:<lo>:<hi>`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .and_then(|p| p.trim().parse().ok())
                .ok_or_else(|| Error::InvalidParameter(format!("bad distribution `{s}`")))
        };
        let d = match parts[0].to_ascii_lowercase().as_str() {
            "exp" | "exponential" => Dist::Exponential { mean: num(1)? },
            "chisq" | "chi2" | "chisquared" => Dist::ChiSquared { df: num(1)? },
            "uniform" | "unif" => Dist::Uniform {
                lo: num(1)?,
                hi: num(2)?,
            },
            _ => return invalid(format!("unknown distribution `{s}`")),
        };
        d.validate()?;
        Ok(d)
    }
}

/// How the lifetime is censored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "camelCase")]
pub enum CensoringDesign {
    None,
    Right {
        censor: Dist,
    },
    /// Right censoring at `Y ~ censor`, left censoring at
    /// `Z = left_slope·Y + left_shift`. `Z` may be negative.
    Doubly {
        censor: Dist,
        left_slope: f64,
        left_shift: f64,
    },
    CurrentStatus {
        exam: Dist,
    },
    /// Examination times `Z ~ first_exam` and `Y = Z + gap`.
    Case2 {
        first_exam: Dist,
        gap: Dist,
    },
    /// Each lifetime is observed exactly with probability `exact_fraction`,
    /// otherwise as current status at `Y ~ exam`.
    Partly1 {
        exact_fraction: f64,
        exam: Dist,
    },
    /// Each lifetime is observed exactly with probability `exact_fraction`,
    /// otherwise only its cell on `grid`.
    PartlyGeneral {
        exact_fraction: f64,
        grid: Vec<f64>,
    },
}

impl CensoringDesign {
    pub fn scheme(&self) -> Scheme {
        match self {
            CensoringDesign::None => Scheme::None,
            CensoringDesign::Right { .. } => Scheme::Right,
            CensoringDesign::Doubly { .. } => Scheme::Doubly,
            CensoringDesign::CurrentStatus { .. } => Scheme::Interval1,
            CensoringDesign::Case2 { .. } => Scheme::Interval2,
            CensoringDesign::Partly1 { .. } => Scheme::Partly1,
            CensoringDesign::PartlyGeneral { .. } => Scheme::PartlyGeneral,
        }
    }
}

/// Lifetime distribution plus censoring mechanism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub lifetime: Dist,
    pub design: CensoringDesign,
}

/// The simulation designs of the published study tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Table1,
    Table2,
    Table3,
    Table4,
    Table5,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Table1,
        Preset::Table2,
        Preset::Table3,
        Preset::Table4,
        Preset::Table5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Table1 => "table1",
            Preset::Table2 => "table2",
            Preset::Table3 => "table3",
            Preset::Table4 => "table4",
            Preset::Table5 => "table5",
        }
    }

    pub fn params(self) -> GeneratorParams {
        const EXP1: Dist = Dist::Exponential { mean: 1.0 };
        const EXP3: Dist = Dist::Exponential { mean: 3.0 };
        const CHISQ1: Dist = Dist::ChiSquared { df: 1.0 };
        let doubly = CensoringDesign::Doubly {
            censor: EXP3,
            left_slope: 2.0 / 3.0,
            left_shift: -2.5,
        };
        let (lifetime, design) = match self {
            Preset::Table1 => (EXP1, CensoringDesign::Right { censor: EXP3 }),
            Preset::Table2 => (CHISQ1, CensoringDesign::Right { censor: EXP3 }),
            Preset::Table3 => (EXP1, doubly),
            Preset::Table4 => (CHISQ1, doubly),
            Preset::Table5 => (EXP1, CensoringDesign::CurrentStatus { exam: EXP1 }),
        };
        GeneratorParams { lifetime, design }
    }

    /// Nominal miscoverage: 90% intervals for table1 to table4, 95% for table5.
    pub fn alpha(self) -> f64 {
        match self {
            Preset::Table5 => 0.05,
            _ => 0.10,
        }
    }

    pub fn quantile_levels(self) -> Vec<f64> {
        vec![0.25, 0.5, 0.75]
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

impl From<Preset> for GeneratorParams {
    fn from(p: Preset) -> Self {
        p.params()
    }
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<()> {
        self.lifetime.validate()?;
        match &self.design {
            CensoringDesign::None => {}
            CensoringDesign::Right { censor } => censor.validate()?,
            CensoringDesign::Doubly {
                censor,
                left_slope,
                left_shift,
            } => {
                censor.validate()?;
                // Z < Y must hold for every Y >= 0.
                if !(*left_slope >= 0.0 && *left_slope <= 1.0 && *left_shift < 0.0) {
                    return invalid("doubly design needs 0 <= left_slope <= 1 and left_shift < 0");
                }
            }
            CensoringDesign::CurrentStatus { exam } => exam.validate()?,
            CensoringDesign::Case2 { first_exam, gap } => {
                first_exam.validate()?;
                gap.validate()?;
            }
            CensoringDesign::Partly1 { exact_fraction, exam } => {
                exam.validate()?;
                check_fraction(*exact_fraction)?;
            }
            CensoringDesign::PartlyGeneral { exact_fraction, grid } => {
                check_fraction(*exact_fraction)?;
                if grid.is_empty()
                    || grid.iter().any(|y| !y.is_finite() || *y <= 0.0)
                    || grid.windows(2).any(|w| w[0] >= w[1])
                {
                    return invalid("grid must be non-empty, positive and strictly increasing");
                }
            }
        }
        Ok(())
    }
}

fn check_fraction(f: f64) -> Result<()> {
    if (0.0..=1.0).contains(&f) {
        Ok(())
    } else {
        invalid(format!("exact_fraction {f} not in [0,1]"))
    }
}

/// Draw a sample of size `n`. The result depends only on `(params, n, seed)`.
pub fn generate(params: &GeneratorParams, n: usize, seed: u64) -> Result<CensoredSample> {
    if n < 1 {
        return invalid("sample size must be >= 1");
    }
    params.validate()?;
    let mut rng = rng::stream(seed, &[tag::GENERATE]);
    let lifetime = params.lifetime;
    let draw = |rng: &mut StreamRng| -> Observation {
        let x = lifetime.sample(rng);
        match &params.design {
            CensoringDesign::None => Observation::Exact { x },
            CensoringDesign::Right { censor } => {
                let y = censor.sample(rng);
                if x <= y {
                    Observation::Right { v: x, delta: 1 }
                } else {
                    Observation::Right { v: y, delta: 0 }
                }
            }
            CensoringDesign::Doubly {
                censor,
                left_slope,
                left_shift,
            } => {
                let y = censor.sample(rng);
                let z = left_slope * y + left_shift;
                if x <= z {
                    Observation::Doubly { v: z, delta: 3 }
                } else if x <= y {
                    Observation::Doubly { v: x, delta: 1 }
                } else {
                    Observation::Doubly { v: y, delta: 2 }
                }
            }
            CensoringDesign::CurrentStatus { exam } => {
                let y = exam.sample(rng);
                Observation::CurrentStatus {
                    y,
                    delta: u8::from(x <= y),
                }
            }
            CensoringDesign::Case2 { first_exam, gap } => {
                let z = first_exam.sample(rng);
                let mut y = z + gap.sample(rng);
                if y <= z {
                    y = f64::from_bits(z.to_bits() + 1);
                }
                let delta = if x <= z {
                    3
                } else if x <= y {
                    1
                } else {
                    2
                };
                Observation::Case2 { y, z, delta }
            }
            CensoringDesign::Partly1 { exact_fraction, exam } => {
                if rng.random::<f64>() < *exact_fraction {
                    Observation::Exact { x }
                } else {
                    let y = exam.sample(rng);
                    Observation::CurrentStatus {
                        y,
                        delta: u8::from(x <= y),
                    }
                }
            }
            CensoringDesign::PartlyGeneral { exact_fraction, grid } => {
                if rng.random::<f64>() < *exact_fraction {
                    Observation::Exact { x }
                } else {
                    // Cell j (1-based) holds Y_{j-1} < x <= Y_j.
                    let j = grid.partition_point(|&y| y < x) + 1;
                    Observation::Cell { j }
                }
            }
        }
    };
    let observations: Vec<Observation> = (0..n).map(|_| draw(&mut rng)).collect();
    let grid = match &params.design {
        CensoringDesign::PartlyGeneral { grid, .. } => Some(grid.clone()),
        _ => None,
    };
    Ok(CensoredSample::from_parts_unchecked(
        params.design.scheme(),
        observations,
        grid,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fractions(sample: &CensoredSample) -> [f64; 4] {
        let mut counts = [0usize; 4];
        for o in sample.observations() {
            let d = match *o {
                Observation::Right { delta, .. }
                | Observation::Doubly { delta, .. }
                | Observation::CurrentStatus { delta, .. } => delta,
                _ => unreachable!(),
            };
            counts[d as usize] += 1;
        }
        counts.map(|c| c as f64 / sample.n() as f64)
    }

    #[test]
    fn table1_uncensored_fraction() {
        let s = generate(&Preset::Table1.params(), 100_000, 11).unwrap();
        assert!((fractions(&s)[1] - 0.750).abs() < 0.005);
    }

    #[test]
    fn table3_doubly_fractions() {
        let f = fractions(&generate(&Preset::Table3.params(), 100_000, 12).unwrap());
        assert!((f[1] - 0.560).abs() < 0.006, "{f:?}");
        assert!((f[2] - 0.249).abs() < 0.006, "{f:?}");
        assert!((f[3] - 0.191).abs() < 0.006, "{f:?}");
    }

    #[test]
    fn table5_current_status_fraction() {
        let f = fractions(&generate(&Preset::Table5.params(), 100_000, 13).unwrap());
        assert!((f[1] - 0.500).abs() < 0.005);
    }

    #[test]
    fn same_seed_same_sample() {
        for p in Preset::ALL {
            let a = generate(&p.params(), 200, 99).unwrap();
            let b = generate(&p.params(), 200, 99).unwrap();
            assert_eq!(a, b);
            assert_ne!(a, generate(&p.params(), 200, 100).unwrap());
        }
    }

    #[test]
    fn generated_samples_validate() {
        let designs = [
            CensoringDesign::Case2 {
                first_exam: Dist::Uniform { lo: 0.0, hi: 1.5 },
                gap: Dist::Exponential { mean: 0.5 },
            },
            CensoringDesign::Partly1 {
                exact_fraction: 0.3,
                exam: Dist::Exponential { mean: 1.0 },
            },
            CensoringDesign::PartlyGeneral {
                exact_fraction: 0.3,
                grid: vec![0.25, 0.5, 1.0, 2.0],
            },
        ];
        for design in designs {
            let params = GeneratorParams {
                lifetime: Dist::Exponential { mean: 1.0 },
                design,
            };
            let s = generate(&params, 500, 5).unwrap();
            CensoredSample::new(s.scheme(), s.observations().to_vec(), s.grid().map(<[f64]>::to_vec)).unwrap();
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(generate(&Preset::Table1.params(), 0, 1).is_err());
        assert!(matches!("table9".parse::<Preset>(), Err(Error::UnknownPreset(_))));
        assert!("exp:-1".parse::<Dist>().is_err());
    }

    #[test]
    fn true_quantiles_match_table_headers() {
        let exp = Dist::Exponential { mean: 1.0 };
        let chi = Dist::ChiSquared { df: 1.0 };
        for (q, e, c) in [(0.25, 0.288, 0.102), (0.5, 0.693, 0.455), (0.75, 1.386, 1.323)] {
            assert!((exp.quantile(q) - e).abs() < 5e-4);
            assert!((chi.quantile(q) - c).abs() < 5e-4, "{q}: {}", chi.quantile(q));
            assert!((chi.cdf(chi.quantile(q)) - q).abs() < 1e-9);
        }
    }
}
