//! Run artifacts and the checksum manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use urban_coverage::engine::{Algorithm, SimConfig, SimResult};
use urban_coverage::metrics::{write_series_csv, MetricsReport};
use urban_coverage::partition::{grid_partition, voronoi_partition, Partition};
use urban_coverage::Point2;

use crate::error::{CliError, Result};
use crate::render::{render_svg, Labels};

pub const MANIFEST: &str = "manifest.json";

/// SHA-256 of every artifact in a directory, keyed by file name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub files: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes files into one directory and remembers their digests.
pub struct ArtifactDir {
    dir: PathBuf,
    manifest: Manifest,
}

impl ArtifactDir {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(ArtifactDir {
            dir: dir.to_path_buf(),
            manifest: Manifest::default(),
        })
    }

    pub fn put(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|source| CliError::Write { path, source })?;
        self.manifest.files.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn finish(self) -> Result<Manifest> {
        let path = self.dir.join(MANIFEST);
        let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        std::fs::write(&path, text + "\n").map_err(|source| CliError::Write { path, source })?;
        Ok(self.manifest)
    }
}

/// Everything in `summary.json`. Wall-clock time is left out so that
/// identical configs produce identical bytes.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary<'a> {
    pub config: &'a SimConfig,
    pub env_label: String,
    pub final_report: &'a MetricsReport,
    pub observing_fraction: f64,
}

/// Labels of the final partition for the static planners.
pub fn final_partition(result: &SimResult) -> Result<Option<Partition>> {
    let c = &result.config;
    let extent = result.env.extent;
    let p = match c.algorithm {
        Algorithm::Voronoi => {
            let ends: Vec<Point2> = result
                .paths
                .trajectories
                .iter()
                .filter_map(|t| t.last().map(|s| s.pos.ground()))
                .collect();
            Some(voronoi_partition(&ends, extent, c.cell_size)?)
        }
        Algorithm::Grid => Some(grid_partition(extent, c.agents, c.cell_size)?),
        _ => None,
    };
    Ok(p)
}

fn observing_fraction(result: &SimResult) -> f64 {
    let (mut obs, mut all) = (0usize, 0usize);
    for t in &result.paths.trajectories {
        all += t.len();
        obs += t.samples().iter().filter(|s| s.observing).count();
    }
    if all == 0 {
        0.0
    } else {
        obs as f64 / all as f64
    }
}

pub fn write_run(dir: &Path, result: &SimResult) -> Result<Manifest> {
    let mut out = ArtifactDir::create(dir)?;
    let summary = RunSummary {
        config: &result.config,
        env_label: result.config.env_label(),
        final_report: &result.final_report,
        observing_fraction: observing_fraction(result),
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    out.put("summary.json", (json + "\n").as_bytes())?;

    let mut buf = Vec::new();
    write_series_csv(&result.series, &mut buf)?;
    out.put("metrics.csv", &buf)?;

    for tr in &result.paths.trajectories {
        let mut buf = Vec::new();
        tr.write_csv(&mut buf)?;
        out.put(&format!("traj_{}.csv", tr.agent_id), &buf)?;
    }
    out.put("env.json", (result.env.to_json() + "\n").as_bytes())?;

    let partition = final_partition(result)?;
    if let Some(p) = &partition {
        let mut buf = Vec::new();
        p.write_csv(&mut buf).expect("writing to memory");
        out.put("partition.csv", &buf)?;
    }
    let labels = partition.as_ref().map(|p| Labels {
        grid: p.grid,
        labels: &p.labels,
    });
    let svg = render_svg(&result.env, &result.paths.trajectories, labels);
    out.put("render.svg", svg.as_bytes())?;
    out.finish()
}
