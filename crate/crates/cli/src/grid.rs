//! Full-factorial experiment grids run on a thread pool.

use std::path::Path;

use rayon::prelude::*;
use urban_coverage::engine::{run, Algorithm, SimConfig};
use urban_coverage::metrics::SERIES_HEADER;

use crate::config::{cell_seeds, resolve_env, ExperimentGrid};
use crate::error::{CliError, Result};
use crate::output::{ArtifactDir, Manifest};
use crate::summary::{summarize, to_csv, AggregateRow, RunRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub env: String,
    pub algorithm: Algorithm,
    pub agents: usize,
    pub trial: usize,
}

/// Cells in a fixed order: env, algorithm, team size, trial.
pub fn cells(grid: &ExperimentGrid) -> Vec<Cell> {
    let mut out = Vec::new();
    for env in &grid.envs {
        for &algorithm in &grid.algorithms {
            for &agents in &grid.teams {
                for trial in 0..grid.trials {
                    out.push(Cell {
                        env: env.clone(),
                        algorithm,
                        agents,
                        trial,
                    });
                }
            }
        }
    }
    out
}

pub fn cell_config(grid: &ExperimentGrid, cell: &Cell) -> Result<SimConfig> {
    let mut c = SimConfig::new(resolve_env(&cell.env)?, cell.algorithm, cell.agents, 0);
    c.seeds = cell_seeds(grid.seed, &cell.env, cell.algorithm, cell.agents, cell.trial);
    grid.sim.apply(&mut c);
    c.validate().map_err(|e| CliError::Usage(format!("{}: {e}", cell.env)))?;
    Ok(c)
}

pub struct GridOutcome {
    pub records: Vec<RunRecord>,
    pub aggregate: Vec<AggregateRow>,
    pub manifest: Manifest,
}

pub fn run_grid(grid: &ExperimentGrid, out_dir: &Path) -> Result<GridOutcome> {
    grid.validate()?;
    let cells = cells(grid);
    // Resolve every config up front so bad input fails before any work.
    let configs = cells.iter().map(|c| cell_config(grid, c)).collect::<Result<Vec<_>>>()?;
    let series_team = grid.series_team();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = grid.jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let results: Vec<Result<(RunRecord, Vec<String>)>> = pool.install(|| {
        cells
            .par_iter()
            .zip(configs.par_iter())
            .map(|(cell, config)| {
                let r = run(config)?;
                let series = if cell.agents == series_team {
                    r.series
                        .iter()
                        .map(|s| {
                            format!(
                                "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                                cell.env,
                                cell.algorithm,
                                cell.agents,
                                cell.trial,
                                s.t,
                                s.percent_coverage,
                                s.visits.mean,
                                s.visits.std,
                                s.revisit.mean,
                                s.revisit.std,
                                s.time_spent.mean,
                                s.time_spent.std
                            )
                        })
                        .collect()
                } else {
                    Vec::new()
                };
                Ok((RunRecord::from_result(&cell.env, cell.trial, &r), series))
            })
            .collect()
    });
    let mut records = Vec::with_capacity(results.len());
    let mut series = format!("env,algorithm,agents,trial,{SERIES_HEADER}\n");
    for r in results {
        let (rec, lines) = r?;
        records.push(rec);
        for l in lines {
            series.push_str(&l);
            series.push('\n');
        }
    }
    let aggregate = summarize(&records)?;

    let mut out = ArtifactDir::create(out_dir)?;
    let mut buf = Vec::new();
    to_csv(&records, &mut buf)?;
    out.put("runs.csv", &buf)?;
    let mut buf = Vec::new();
    to_csv(&aggregate, &mut buf)?;
    out.put("aggregate.csv", &buf)?;
    out.put(&format!("series_n{series_team}.csv"), series.as_bytes())?;
    let echo = toml::to_string(grid).map_err(|e| CliError::Usage(format!("grid echo: {e}")))?;
    out.put("grid.toml", echo.as_bytes())?;
    let manifest = out.finish()?;
    Ok(GridOutcome {
        records,
        aggregate,
        manifest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SimParams;

    #[test]
    fn cells_cover_the_full_product() {
        let g = ExperimentGrid {
            envs: vec!["empty10".into(), "short-low".into()],
            algorithms: vec![Algorithm::Grid, Algorithm::Voronoi, Algorithm::Ergodic],
            teams: vec![1, 3],
            trials: 2,
            seed: 0,
            series_team: None,
            jobs: None,
            out: None,
            sim: SimParams::default(),
        };
        let cs = cells(&g);
        assert_eq!(cs.len(), 2 * 3 * 2 * 2);
        assert_eq!(g.series_team(), 1);
        let c = cell_config(&g, &cs[5]).unwrap();
        assert_eq!(c.agents, cs[5].agents);
    }
}
