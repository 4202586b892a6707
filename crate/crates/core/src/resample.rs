//! Bootstrap resampling and the empirical percentile convention shared by
//! calibration and the percentile baselines.

use rand::Rng;

use crate::censoring::CensoredSample;

/// Draw `size` observations from `sample` with replacement.
pub fn resample<R: Rng + ?Sized>(sample: &CensoredSample, size: usize, rng: &mut R) -> CensoredSample {
    let obs = sample.observations();
    let drawn = (0..size).map(|_| obs[rng.random_range(0..obs.len())]).collect();
    CensoredSample::from_parts_unchecked(sample.scheme(), drawn, sample.grid().map(<[f64]>::to_vec))
}

/// 1-based rank of the empirical `level`-quantile among `len` values:
/// `⌈level · len⌉`, clamped to `1..=len`. A tiny slack keeps e.g.
/// `0.9 · 200` from rounding up to 181.
pub fn percentile_rank(len: usize, level: f64) -> usize {
    ((level * len as f64 - 1e-9).ceil() as usize).clamp(1, len)
}

/// Empirical `level`-quantile of `values`: the `⌈level·B⌉`-th order
/// statistic. Panics on an empty slice.
pub fn percentile(values: &[f64], level: f64) -> f64 {
    assert!(!values.is_empty(), "percentile of an empty sample");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted[percentile_rank(sorted.len(), level) - 1]
}
