//! TOML configuration for single runs and experiment grids.
//!
//! Keys mirror the engine's `SimConfig` field names; a run file adds the
//! world (`env`), a base `seed` and an output directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use urban_coverage::engine::{Algorithm, EnvSource, Seeds, SimConfig, Spacing};
use urban_coverage::ergodic::Sharing;
use urban_coverage::{EnvFamily, EnvSpec, Environment};

use crate::error::{CliError, Result};

/// Simulation parameters shared by runs and grids. Unset keys keep the
/// engine defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimParams {
    pub steps: Option<usize>,
    pub dt: Option<f64>,
    pub u_max: Option<f64>,
    pub probes: Option<usize>,
    pub probe_radius: Option<f64>,
    pub record_every: Option<usize>,
    pub spacing: Option<Spacing>,
    pub sharing: Option<Sharing>,
    pub modes: Option<usize>,
    pub uniform_lambda: Option<bool>,
    pub cell_size: Option<f64>,
    pub relocate_to_free: Option<bool>,
}

impl SimParams {
    /// Later values win.
    pub fn merged(&self, over: &SimParams) -> SimParams {
        macro_rules! pick {
            ($($f:ident),*) => { SimParams { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(steps, dt, u_max, probes, probe_radius, record_every, spacing, sharing, modes, uniform_lambda, cell_size, relocate_to_free)
    }

    pub fn apply(&self, c: &mut SimConfig) {
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = v; })* };
        }
        set!(steps, dt, u_max, probes, record_every, spacing, sharing, modes, uniform_lambda, cell_size, relocate_to_free);
        if self.probe_radius.is_some() {
            c.probe_radius = self.probe_radius;
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    /// Family name, `emptyN` or a path to an environment JSON file.
    pub env: Option<String>,
    /// Full generator recipe; takes precedence over `env`.
    pub env_spec: Option<EnvSpec>,
    pub algorithm: Option<Algorithm>,
    pub agents: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub sim: SimParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentGrid {
    pub envs: Vec<String>,
    pub algorithms: Vec<Algorithm>,
    pub teams: Vec<usize>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Team size whose full time series is written; defaults to 10 when
    /// present, else the first team size.
    pub series_team: Option<usize>,
    /// Worker threads; available parallelism when unset.
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub sim: SimParams,
}

impl ExperimentGrid {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CliError::Usage(format!("invalid grid: {m}")));
        if self.envs.is_empty() || self.algorithms.is_empty() || self.teams.is_empty() {
            return bad("envs, algorithms and teams must be non-empty");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.teams.contains(&0) {
            return bad("team sizes must be positive");
        }
        if self.jobs == Some(0) {
            return bad("jobs must be positive");
        }
        Ok(())
    }

    pub fn series_team(&self) -> usize {
        self.series_team
            .unwrap_or(if self.teams.contains(&10) { 10 } else { self.teams[0] })
    }
}

pub fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Resolves `--env`: a family name, `emptyN` (an obstacle-free N x N
/// square) or a path to an environment JSON file.
pub fn resolve_env(name: &str) -> Result<EnvSource> {
    if let Ok(family) = name.parse::<EnvFamily>() {
        return Ok(EnvSource::Spec(EnvSpec::preset(family, 0)));
    }
    if let Some(side) = name.strip_prefix("empty") {
        let side: f64 = side
            .parse()
            .map_err(|_| CliError::Usage(format!("bad empty world size in {name:?}")))?;
        if !(side > 0.0) {
            return Err(CliError::Usage(format!("empty world size must be positive: {name:?}")));
        }
        return Ok(EnvSource::Spec(EnvSpec::empty(side)));
    }
    let path = Path::new(name);
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let env = Environment::from_json(&text).map_err(|e| CliError::Usage(format!("{name}: {e}")))?;
    Ok(EnvSource::World(env))
}

/// Flag values; `None` means "not given".
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub env: Option<String>,
    pub algorithm: Option<Algorithm>,
    pub agents: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub sim: SimParams,
}

/// Final run configuration and output directory.
pub fn build_run(file: &RunFile, flags: &RunOverrides) -> Result<(SimConfig, u64, PathBuf)> {
    let env = match (&flags.env, &file.env_spec, &file.env) {
        (Some(name), _, _) => resolve_env(name)?,
        (None, Some(spec), _) => EnvSource::Spec(spec.clone()),
        (None, None, Some(name)) => resolve_env(name)?,
        (None, None, None) => return Err(CliError::Usage("no environment given (--env)".into())),
    };
    let algorithm = flags
        .algorithm
        .or(file.algorithm)
        .ok_or_else(|| CliError::Usage("no algorithm given (--alg)".into()))?;
    let agents = flags.agents.or(file.agents).unwrap_or(1);
    let seed = flags.seed.or(file.seed).unwrap_or(0);
    let out = flags
        .out
        .clone()
        .or_else(|| file.out.clone())
        .ok_or_else(|| CliError::Usage("no output directory given (--out)".into()))?;
    let mut config = SimConfig::new(env, algorithm, agents, seed);
    file.sim.merged(&flags.sim).apply(&mut config);
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok((config, seed, out))
}

/// Stable 64-bit seed from a base seed and a label path, independent of
/// the order in which grid cells are executed.
pub fn derive_seed(base: u64, parts: &[&str]) -> u64 {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

/// Seeds for one grid cell. Worlds and probes depend on the environment
/// and trial only; starting points also on the team size, so every
/// algorithm of a trial sees the same world and the same starts.
pub fn cell_seeds(base: u64, env: &str, algorithm: Algorithm, agents: usize, trial: usize) -> Seeds {
    let (n, t) = (agents.to_string(), trial.to_string());
    Seeds {
        env: derive_seed(base, &[env, &t, "env"]),
        probes: derive_seed(base, &[env, &t, "probes"]),
        starts: derive_seed(base, &[env, &n, &t, "starts"]),
        control: derive_seed(base, &[env, algorithm.name(), &n, &t, "control"]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: RunFile = toml::from_str(
            r#"
            env = "empty10"
            algorithm = "grid"
            agents = 3
            out = "a"
            [sim]
            steps = 50
            dt = 0.2
            "#,
        )
        .unwrap();
        let flags = RunOverrides {
            agents: Some(4),
            sim: SimParams {
                steps: Some(70),
                ..SimParams::default()
            },
            ..RunOverrides::default()
        };
        let (c, _, out) = build_run(&file, &flags).unwrap();
        assert_eq!((c.agents, c.steps, c.dt), (4, 70, 0.2));
        assert_eq!(c.algorithm, Algorithm::Grid);
        assert_eq!(out, PathBuf::from("a"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunFile>("stepz = 3").is_err());
        assert!(toml::from_str::<ExperimentGrid>("envs=[]\nalgorithms=[]\nteams=[]\ntrials=1\nfoo=1").is_err());
    }

    #[test]
    fn env_names_resolve() {
        assert!(matches!(resolve_env("tall-high").unwrap(), EnvSource::Spec(s) if s.family == EnvFamily::TallHigh));
        assert!(matches!(resolve_env("empty12").unwrap(), EnvSource::Spec(s) if s.extent == [12.0, 12.0]));
        assert!(matches!(resolve_env("emptyX"), Err(CliError::Usage(_))));
        assert!(matches!(resolve_env("/no/such/file.json"), Err(CliError::Read { .. })));
    }

    #[test]
    fn seeds_ignore_execution_order_and_share_worlds() {
        let a = cell_seeds(5, "short-low", Algorithm::Voronoi, 10, 2);
        let b = cell_seeds(5, "short-low", Algorithm::Grid, 10, 2);
        assert_eq!((a.env, a.probes, a.starts), (b.env, b.probes, b.starts));
        assert_ne!(a.control, b.control);
        assert_eq!(a, cell_seeds(5, "short-low", Algorithm::Voronoi, 10, 2));
        assert_ne!(a.env, cell_seeds(5, "short-low", Algorithm::Voronoi, 10, 1).env);
    }
}
