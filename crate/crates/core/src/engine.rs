//! Fixed-step simulation: plans or steers a team, samples every agent at
//! `t = k dt` and feeds the probe recorder.
//!
//! Plan-based algorithms are planned up front and replayed by time
//! interpolation (lawnmower cycles loop, the others hold their last
//! position). The obstacle-avoiding ergodic team is stepped closed-loop.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{generate_environment, EnvSpec, Environment};
use crate::ergodic::{multi_ergodic, run_team, variant_team, ErgodicParams, ErgodicVariant, Sharing, Weighting};
use crate::error::{CoverageError, Result};
use crate::geom::Point2;
use crate::lawnmower::{repaired_cycle, LawnmowerParams};
use crate::metrics::{MetricsReport, ProbeSet, DEFAULT_PROBE_COUNT};
use crate::partition::{grid_cover, voronoi_cover, PartitionParams};
use crate::traj::{rotate_cycle, MultiPath, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Lawnmower,
    Ergodic,
    BiasedErgodic,
    AvoidErgodic,
    Voronoi,
    Grid,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Lawnmower,
        Algorithm::Ergodic,
        Algorithm::BiasedErgodic,
        Algorithm::AvoidErgodic,
        Algorithm::Voronoi,
        Algorithm::Grid,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Lawnmower => "lawnmower",
            Algorithm::Ergodic => "ergodic",
            Algorithm::BiasedErgodic => "biased-ergodic",
            Algorithm::AvoidErgodic => "avoid-ergodic",
            Algorithm::Voronoi => "voronoi",
            Algorithm::Grid => "grid",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = CoverageError;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| CoverageError::InvalidParameter(format!("unknown algorithm {s:?}")))
    }
}

/// Where the world comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvSource {
    /// Generated; the environment seed of the run replaces `spec.seed`.
    Spec(EnvSpec),
    World(Environment),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub env: u64,
    pub starts: u64,
    pub control: u64,
    pub probes: u64,
}

impl Seeds {
    /// Four independent streams derived from one base seed.
    pub fn from_base(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Seeds {
            env: rng.next_u64(),
            starts: rng.next_u64(),
            control: rng.next_u64(),
            probes: rng.next_u64(),
        }
    }
}

/// How lawnmower agents are spread along the cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    /// Independent uniform arc-length offsets.
    #[default]
    Random,
    /// Agent `i` of `n` at `i / n` of the cycle length.
    Equal,
}

impl FromStr for Spacing {
    type Err = CoverageError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Spacing::Random),
            "equal" => Ok(Spacing::Equal),
            _ => Err(CoverageError::InvalidParameter(format!("unknown spacing {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub env: EnvSource,
    pub algorithm: Algorithm,
    pub agents: usize,
    pub steps: usize,
    pub dt: f64,
    pub u_max: f64,
    pub seeds: Seeds,
    pub probes: usize,
    /// Defaults to half the sensor radius.
    pub probe_radius: Option<f64>,
    /// A metrics row is kept every this many steps (and at the end).
    pub record_every: usize,
    pub spacing: Spacing,
    pub sharing: Sharing,
    pub modes: usize,
    pub uniform_lambda: bool,
    pub cell_size: f64,
    pub relocate_to_free: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            env: EnvSource::Spec(EnvSpec::empty(10.0)),
            algorithm: Algorithm::Lawnmower,
            agents: 1,
            steps: 15_000,
            dt: 0.1,
            u_max: 1.0,
            seeds: Seeds::from_base(0),
            probes: DEFAULT_PROBE_COUNT,
            probe_radius: None,
            record_every: 100,
            spacing: Spacing::Random,
            sharing: Sharing::Shared,
            modes: 10,
            uniform_lambda: false,
            cell_size: 0.25,
            relocate_to_free: false,
        }
    }
}

impl SimConfig {
    pub fn new(env: EnvSource, algorithm: Algorithm, agents: usize, seed: u64) -> Self {
        SimConfig {
            env,
            algorithm,
            agents,
            seeds: Seeds::from_base(seed),
            ..SimConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CoverageError::InvalidParameter(m.into()));
        if self.steps == 0 {
            return bad("steps must be at least 1");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.u_max > 0.0 && self.u_max.is_finite()) {
            return bad("u_max must be positive");
        }
        if self.agents == 0 {
            return bad("at least one agent is required");
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1");
        }
        if !(self.cell_size > 0.0) {
            return bad("cell_size must be positive");
        }
        Ok(())
    }

    /// Family name of a generated world, `custom` otherwise.
    pub fn env_label(&self) -> String {
        match &self.env {
            EnvSource::Spec(s) => s.family.to_string(),
            EnvSource::World(_) => "custom".into(),
        }
    }

    pub fn environment(&self) -> Result<Environment> {
        match &self.env {
            EnvSource::Spec(s) => generate_environment(&EnvSpec {
                seed: self.seeds.env,
                ..s.clone()
            }),
            EnvSource::World(w) => {
                w.validate()?;
                Ok(w.clone())
            }
        }
    }

    fn ergodic_params(&self, env: &Environment) -> ErgodicParams {
        ErgodicParams {
            k_max: self.modes,
            weighting: if self.uniform_lambda { Weighting::Uniform } else { Weighting::Sobolev },
            u_max: self.u_max,
            dt: self.dt,
            sharing: self.sharing,
            cell_size: self.cell_size,
            optimal_altitude: env.optimal_altitude,
            ..ErgodicParams::default()
        }
    }

    fn partition_params(&self) -> PartitionParams {
        PartitionParams {
            iterations: self.steps,
            step_size: self.u_max * self.dt,
            dt: self.dt,
            u_max: self.u_max,
            cell_size: self.cell_size,
            relocate_to_free: self.relocate_to_free,
            ..PartitionParams::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub config: SimConfig,
    #[serde(skip)]
    pub env: Environment,
    /// Sampled team, `steps + 1` samples per agent at `t = k dt`.
    #[serde(skip)]
    pub paths: MultiPath,
    pub series: Vec<MetricsReport>,
    pub final_report: MetricsReport,
    #[serde(skip)]
    pub wall_clock: Duration,
}

pub enum Placement<'a> {
    RandomFree,
    /// Uniform arc-length positions along a closed path.
    OnCycle(&'a Trajectory),
}

/// `n` starting points, deterministic in `seed`.
pub fn place_agents(env: &Environment, n: usize, mode: Placement<'_>, seed: u64) -> Result<Vec<Point2>> {
    if n == 0 {
        return Err(CoverageError::InvalidParameter("at least one agent is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match mode {
        Placement::RandomFree => {
            let limit = 10_000 * n;
            let mut out = Vec::with_capacity(n);
            let mut attempts = 0;
            while out.len() < n {
                attempts += 1;
                if attempts > limit {
                    return Err(CoverageError::NoFreeSpace);
                }
                let p = Point2::new(rng.gen_range(0.0..=env.extent[0]), rng.gen_range(0.0..=env.extent[1]));
                if !env.obstacle_at(p) {
                    out.push(p);
                }
            }
            Ok(out)
        }
        Placement::OnCycle(cycle) => {
            let offsets = random_offsets(cycle, n, &mut rng);
            offsets
                .into_iter()
                .map(|o| Ok(rotate_cycle(cycle, o)?.first().expect("non-empty").pos.ground()))
                .collect()
        }
    }
}

fn random_offsets(cycle: &Trajectory, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let len = cycle.arc_length();
    (0..n).map(|_| if len > 0.0 { rng.gen_range(0.0..len) } else { 0.0 }).collect()
}

/// Samples `path` at `t = k dt` for `k = 0..=steps`. When `looping`, time
/// wraps around the path's duration; otherwise the last position is held.
pub fn replay(path: &Trajectory, steps: usize, dt: f64, looping: bool) -> Result<Trajectory> {
    let first = path
        .first()
        .ok_or_else(|| CoverageError::InvalidTrajectory("cannot replay an empty path".into()))?;
    let t0 = first.t;
    let period = path.duration();
    let pts = (0..=steps).map(|k| {
        let t = k as f64 * dt;
        let local = if looping && period > 0.0 { t % period } else { t };
        (t, path.position_at(t0 + local).expect("non-empty path"))
    });
    Trajectory::from_points(path.agent_id, path.optimal_altitude, pts)
}

/// Largest sampled 3D speed over all agents.
pub fn max_speed(mp: &MultiPath) -> f64 {
    mp.trajectories
        .iter()
        .flat_map(|tr| tr.samples().windows(2).map(|w| w[0].pos.dist(w[1].pos) / (w[1].t - w[0].t)))
        .fold(0.0, f64::max)
}

fn sampled_team(config: &SimConfig, env: &Environment) -> Result<MultiPath> {
    let n = config.agents;
    let (steps, dt) = (config.steps, config.dt);
    let ctx = |e: CoverageError| e.context(format!("{} with {n} agents", config.algorithm));
    let replay_all = |mp: MultiPath, looping: bool| -> Result<MultiPath> {
        MultiPath::new(
            mp.trajectories
                .iter()
                .map(|p| replay(p, steps, dt, looping))
                .collect::<Result<Vec<_>>>()?,
        )
    };
    let random_starts = || place_agents(env, n, Placement::RandomFree, config.seeds.starts);
    match config.algorithm {
        Algorithm::Lawnmower => {
            let params = LawnmowerParams {
                speed: config.u_max,
                ..LawnmowerParams::default()
            };
            let cycle = repaired_cycle(env, &params).map_err(ctx)?;
            let offsets: Vec<f64> = match config.spacing {
                Spacing::Equal => {
                    let len = cycle.arc_length();
                    (1..=n).map(|i| i as f64 / n as f64 * len).collect()
                }
                Spacing::Random => random_offsets(&cycle, n, &mut ChaCha8Rng::seed_from_u64(config.seeds.starts)),
            };
            let mp = crate::lawnmower::lawnmower_with_offsets(&cycle, &offsets).map_err(ctx)?;
            replay_all(mp, true)
        }
        Algorithm::Ergodic | Algorithm::BiasedErgodic => {
            let variant = if config.algorithm == Algorithm::Ergodic {
                ErgodicVariant::Naive
            } else {
                ErgodicVariant::Biased
            };
            let starts = random_starts().map_err(ctx)?;
            let mp = multi_ergodic(env, &starts, variant, &config.ergodic_params(env), steps, config.seeds.control)
                .map_err(ctx)?;
            replay_all(mp, false)
        }
        Algorithm::AvoidErgodic => {
            let starts = random_starts().map_err(ctx)?;
            let mut team = variant_team(
                env,
                &starts,
                ErgodicVariant::Avoiding,
                &config.ergodic_params(env),
                config.seeds.control,
            )
            .map_err(ctx)?;
            MultiPath::new(run_team(&mut team, steps, env.optimal_altitude).map_err(ctx)?)
        }
        Algorithm::Voronoi => {
            let starts = random_starts().map_err(ctx)?;
            let mp = voronoi_cover(env, &starts, &config.partition_params()).map_err(ctx)?;
            replay_all(mp, false)
        }
        Algorithm::Grid => {
            let starts = random_starts().map_err(ctx)?;
            let mp = grid_cover(env, &starts, &config.partition_params()).map_err(ctx)?;
            replay_all(mp, false)
        }
    }
}

/// Runs one trial. Deterministic in the config, apart from `wall_clock`.
pub fn run(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let started = Instant::now();
    let env = config.environment()?;
    let paths = sampled_team(config, &env)?;
    let mut probes = ProbeSet::sample(&env, config.probes, config.probe_radius, config.seeds.probes)?;
    let mut series = Vec::with_capacity(config.steps / config.record_every + 1);
    let mut team: Vec<(Point2, bool)> = Vec::with_capacity(config.agents);
    for k in 0..config.steps {
        team.clear();
        team.extend(paths.trajectories.iter().map(|tr| {
            let s = tr.samples()[k];
            (s.pos.ground(), s.observing)
        }));
        probes.record_step(k as f64 * config.dt, &team)?;
        let done = k + 1;
        if done % config.record_every == 0 || done == config.steps {
            series.push(probes.report(done as f64 * config.dt)?);
        }
    }
    let final_report = *series.last().expect("at least one step");
    log::debug!(
        "{} on {} with {} agents: {:.1}% coverage",
        config.algorithm,
        config.env_label(),
        config.agents,
        final_report.percent_coverage
    );
    Ok(SimResult {
        config: config.clone(),
        env,
        paths,
        series,
        final_report,
        wall_clock: started.elapsed(),
    })
}

/// First time at which a probe set reaches full coverage under `paths`,
/// recording at every sample.
pub fn time_to_full_coverage(paths: &MultiPath, probes: &ProbeSet) -> Result<Option<f64>> {
    let mut probes = probes.clone();
    let len = paths.trajectories.iter().map(|t| t.len()).min().unwrap_or(0);
    for k in 0..len {
        let t = paths.trajectories[0].samples()[k].t;
        let team: Vec<(Point2, bool)> = paths
            .trajectories
            .iter()
            .map(|tr| (tr.samples()[k].pos.ground(), tr.samples()[k].observing))
            .collect();
        probes.record_step(t, &team)?;
        if probes.report(t)?.percent_coverage >= 100.0 {
            return Ok(Some(t));
        }
    }
    Ok(None)
}
