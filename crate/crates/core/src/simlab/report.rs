use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{MethodSpec, StudyConfig, TrialRecord};
use crate::error::Result;

/// Rows with more than this fraction of failed trials are flagged.
pub const DEGENERATE_FLAG_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub q: f64,
    pub theta0: f64,
    pub method: String,
    /// Percentage of valid trials whose interval contains `theta0`.
    pub coverage: f64,
    pub avg_length: f64,
    pub sd_length: f64,
    pub valid: usize,
    pub degenerate: usize,
    pub flagged: bool,
    /// Time spent in this method, summed over trials.
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub config: StudyConfig,
    pub rows: Vec<ReportRow>,
    pub wall_seconds: f64,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl StudyReport {
    pub(crate) fn aggregate(config: &StudyConfig, trials: &[TrialRecord], wall_seconds: f64) -> Self {
        let mut rows = Vec::new();
        for &q in &config.q {
            for &method in &config.methods {
                rows.push(Self::row(config, trials, q, method));
            }
        }
        Self {
            config: config.clone(),
            rows,
            wall_seconds,
        }
    }

    fn row(config: &StudyConfig, trials: &[TrialRecord], q: f64, method: MethodSpec) -> ReportRow {
        let outcomes: Vec<_> = trials
            .iter()
            .flat_map(|t| &t.outcomes)
            .filter(|o| o.q == q && o.method == method)
            .collect();
        let lengths: Vec<f64> = outcomes
            .iter()
            .filter_map(|o| o.interval.map(|(lo, hi)| hi - lo))
            .collect();
        let hits = outcomes.iter().filter(|o| o.hit == Some(true)).count();
        let valid = lengths.len();
        let degenerate = outcomes.len() - valid;
        let (avg_length, sd_length) = mean_sd(&lengths);
        ReportRow {
            q,
            theta0: config.true_quantile(q),
            method: method.to_string(),
            coverage: if valid == 0 {
                f64::NAN
            } else {
                100.0 * hits as f64 / valid as f64
            },
            avg_length,
            sd_length,
            valid,
            degenerate,
            flagged: degenerate as f64 > DEGENERATE_FLAG_FRACTION * outcomes.len() as f64,
            wall_seconds: outcomes.iter().map(|o| o.seconds).sum(),
        }
    }

    pub fn row_for(&self, q: f64, method: MethodSpec) -> Option<&ReportRow> {
        let name = method.to_string();
        self.rows.iter().find(|r| r.q == q && r.method == name)
    }

    /// Equality of everything except timings.
    pub fn same_results(&self, other: &StudyReport) -> bool {
        let strip = |r: &ReportRow| ReportRow {
            wall_seconds: 0.0,
            ..r.clone()
        };
        self.config == other.config
            && self.rows.len() == other.rows.len()
            && self.rows.iter().zip(&other.rows).all(|(a, b)| {
                let (a, b) = (strip(a), strip(b));
                // NaN coverage (no valid trials) compares equal to itself here.
                format!("{a:?}") == format!("{b:?}")
            })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self).map_err(|e| crate::error::Error::Io(e.into()))
    }

    /// Fixed-width summary in the layout of a coverage table.
    pub fn to_table(&self) -> String {
        let mut s = format!(
            "{:>6} {:>8} {:>12} {:>9} {:>10} {:>8} {:>6}\n",
            "q", "theta0", "method", "coverage", "length", "(s.d.)", "failed"
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{:>6.2} {:>8.3} {:>12} {:>9.1} {:>10.3} {:>8} {:>6}{}\n",
                r.q,
                r.theta0,
                r.method,
                r.coverage,
                r.avg_length,
                format!("({:.3})", r.sd_length),
                r.degenerate,
                if r.flagged { "  !" } else { "" }
            ));
        }
        s
    }
}
