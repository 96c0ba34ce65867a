//! Per-run records and their aggregation over trials.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use urban_coverage::engine::{Algorithm, SimResult};
use urban_coverage::metrics::Stats;

use crate::error::{CliError, Result};

/// One row of `runs.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub env: String,
    pub algorithm: Algorithm,
    pub agents: usize,
    pub trial: usize,
    pub env_seed: u64,
    pub starts_seed: u64,
    pub control_seed: u64,
    pub probe_seed: u64,
    pub steps: usize,
    pub dt: f64,
    pub probes: usize,
    pub percent_coverage: f64,
    pub mean_visits: f64,
    pub std_visits: f64,
    pub mean_revisit: f64,
    pub std_revisit: f64,
    pub mean_time_spent: f64,
    pub std_time_spent: f64,
}

impl RunRecord {
    pub fn from_result(env: &str, trial: usize, r: &SimResult) -> Self {
        let (c, f) = (&r.config, &r.final_report);
        RunRecord {
            env: env.to_string(),
            algorithm: c.algorithm,
            agents: c.agents,
            trial,
            env_seed: c.seeds.env,
            starts_seed: c.seeds.starts,
            control_seed: c.seeds.control,
            probe_seed: c.seeds.probes,
            steps: c.steps,
            dt: c.dt,
            probes: c.probes,
            percent_coverage: f.percent_coverage,
            mean_visits: f.visits.mean,
            std_visits: f.visits.std,
            mean_revisit: f.revisit.mean,
            std_revisit: f.revisit.std,
            mean_time_spent: f.time_spent.mean,
            std_time_spent: f.time_spent.std,
        }
    }
}

/// One row of `aggregate.csv`: trial mean and population std of each
/// final metric for an (env, algorithm, team size) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub env: String,
    pub algorithm: Algorithm,
    pub agents: usize,
    pub trials: usize,
    pub mean_percent_coverage: f64,
    pub std_percent_coverage: f64,
    pub mean_visits: f64,
    pub std_visits: f64,
    pub mean_revisit: f64,
    pub std_revisit: f64,
    pub mean_time_spent: f64,
    pub std_time_spent: f64,
}

/// Groups records and averages over trials. Runs that disagree on the
/// horizon, step or probe count cannot share a row.
pub fn summarize(records: &[RunRecord]) -> Result<Vec<AggregateRow>> {
    let mut groups: BTreeMap<(String, Algorithm, usize), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.env.clone(), r.algorithm, r.agents)).or_default().push(r);
    }
    let mut rows = Vec::with_capacity(groups.len());
    for ((env, algorithm, agents), rs) in groups {
        let first = rs[0];
        if let Some(r) = rs
            .iter()
            .find(|r| r.steps != first.steps || r.dt != first.dt || r.probes != first.probes)
        {
            return Err(CliError::Incompatible {
                group: format!("{env}/{algorithm}/{agents}"),
                reason: format!(
                    "trial {} has steps={}, dt={}, probes={} but trial {} has steps={}, dt={}, probes={}",
                    r.trial, r.steps, r.dt, r.probes, first.trial, first.steps, first.dt, first.probes
                ),
            });
        }
        let stat = |f: fn(&RunRecord) -> f64| Stats::of(&rs.iter().map(|r| f(r)).collect::<Vec<_>>());
        let cov = stat(|r| r.percent_coverage);
        let vis = stat(|r| r.mean_visits);
        let rev = stat(|r| r.mean_revisit);
        let spent = stat(|r| r.mean_time_spent);
        rows.push(AggregateRow {
            env,
            algorithm,
            agents,
            trials: rs.len(),
            mean_percent_coverage: cov.mean,
            std_percent_coverage: cov.std,
            mean_visits: vis.mean,
            std_visits: vis.std,
            mean_revisit: rev.mean,
            std_revisit: rev.std,
            mean_time_spent: spent.mean,
            std_time_spent: spent.std,
        });
    }
    Ok(rows)
}

pub fn to_csv<T: Serialize, W: Write>(rows: &[T], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r).map_err(|e| CliError::Usage(format!("csv: {e}")))?;
    }
    wr.flush().map_err(|e| CliError::Usage(format!("csv: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(trial: usize, cov: f64, steps: usize) -> RunRecord {
        RunRecord {
            env: "short-low".into(),
            algorithm: Algorithm::Grid,
            agents: 5,
            trial,
            env_seed: 1,
            starts_seed: 2,
            control_seed: 3,
            probe_seed: 4,
            steps,
            dt: 0.1,
            probes: 500,
            percent_coverage: cov,
            mean_visits: 1.0,
            std_visits: 0.0,
            mean_revisit: 2.0,
            std_revisit: 0.0,
            mean_time_spent: 3.0,
            std_time_spent: 0.0,
        }
    }

    #[test]
    fn single_trial_has_zero_spread() {
        let rows = summarize(&[rec(0, 40.0, 100)]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].std_percent_coverage, 0.0);
        assert_eq!(rows[0].mean_percent_coverage, 40.0);
    }

    #[test]
    fn trials_are_averaged() {
        let rows = summarize(&[rec(0, 40.0, 100), rec(1, 60.0, 100)]).unwrap();
        assert_eq!((rows[0].trials, rows[0].mean_percent_coverage, rows[0].std_percent_coverage), (2, 50.0, 10.0));
    }

    #[test]
    fn mismatched_horizons_are_refused() {
        let err = summarize(&[rec(0, 40.0, 100), rec(1, 60.0, 200)]).unwrap_err();
        assert!(matches!(err, CliError::Incompatible { .. }));
    }

    #[test]
    fn records_round_trip_through_csv() {
        let mut buf = Vec::new();
        to_csv(&[rec(0, 40.0, 100)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("env,algorithm,agents,trial"));
        let back: Vec<RunRecord> = csv::Reader::from_reader(text.as_bytes())
            .deserialize()
            .collect::<std::result::Result<_, _>>()
            .unwrap();
        assert_eq!(back, vec![rec(0, 40.0, 100)]);
    }
}
