//! Single- and multi-agent ergodic planners built on a synchronized team
//! stepper.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Environment, DEFAULT_OPTIMAL_ALTITUDE};
use crate::error::{CoverageError, Result};
use crate::geom::Point2;
use crate::traj::{fly_over_buildings, FlyOverParams, MultiPath, Trajectory};

use super::basis::{ModeGrid, Weighting};
use super::control::{avoid_control_step, control_step, repulsive_field};
use super::state::ErgodicState;
use super::target::TargetDistribution;

/// Whether the team shares one set of coefficients or each agent plans
/// against the target alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sharing {
    #[default]
    Shared,
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErgodicVariant {
    /// Vacant target, repaired over buildings afterwards.
    Naive,
    /// Free-space target, repaired afterwards.
    Biased,
    /// Free-space target with the repulsive blend; never repaired.
    Avoiding,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErgodicParams {
    /// Highest mode index on each axis.
    pub k_max: usize,
    pub weighting: Weighting,
    pub lambda_scale: f64,
    pub u_max: f64,
    pub dt: f64,
    /// Influence distance of the repulsive field; twice the sensor radius
    /// when unset.
    pub d_infl: Option<f64>,
    pub sharing: Sharing,
    /// Resolution of the target density grid.
    pub cell_size: f64,
    pub optimal_altitude: f64,
}

impl Default for ErgodicParams {
    fn default() -> Self {
        ErgodicParams {
            k_max: 10,
            weighting: Weighting::Sobolev,
            lambda_scale: 1.0,
            u_max: 1.0,
            dt: 0.1,
            d_infl: None,
            sharing: Sharing::Shared,
            cell_size: 0.25,
            optimal_altitude: DEFAULT_OPTIMAL_ALTITUDE,
        }
    }
}

impl ErgodicParams {
    pub fn mode_grid(&self, extent: [f64; 2]) -> ModeGrid {
        ModeGrid::new([self.k_max, self.k_max], extent, self.weighting).with_lambda_scale(self.lambda_scale)
    }

    fn validate(&self) -> Result<()> {
        if !(self.u_max > 0.0 && self.dt > 0.0 && self.lambda_scale > 0.0 && self.cell_size > 0.0) {
            return Err(CoverageError::InvalidParameter(
                "u_max, dt, lambda_scale and cell_size must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Team stepper. Each step computes every agent's control from the current
/// state, moves all agents, clamps them to the ground rectangle and only
/// then folds the new positions into the coefficients.
#[derive(Debug, Clone)]
pub struct ErgodicTeam {
    modes: ModeGrid,
    states: Vec<ErgodicState>,
    positions: Vec<Point2>,
    extent: [f64; 2],
    obstacles: Option<(Environment, f64)>,
    u_max: f64,
    dt: f64,
    rng: ChaCha8Rng,
}

impl ErgodicTeam {
    /// Plain spectral law; obstacles are ignored.
    pub fn new(modes: ModeGrid, mu: Vec<f64>, starts: &[Point2], params: &ErgodicParams, seed: u64) -> Result<Self> {
        params.validate()?;
        if starts.is_empty() {
            return Err(CoverageError::InvalidParameter("team needs at least one agent".into()));
        }
        if mu.len() != modes.len() {
            return Err(CoverageError::InvalidParameter("one target coefficient per mode is required".into()));
        }
        let extent = modes.extent;
        for p in starts {
            if !(p.x >= 0.0 && p.y >= 0.0 && p.x <= extent[0] && p.y <= extent[1]) {
                return Err(CoverageError::OutOfDomain { x: p.x, y: p.y });
            }
        }
        let states = match params.sharing {
            Sharing::Shared => vec![ErgodicState::new(mu, starts.len())],
            Sharing::Independent => vec![ErgodicState::new(mu, 1); starts.len()],
        };
        Ok(ErgodicTeam {
            modes,
            states,
            positions: starts.to_vec(),
            extent,
            obstacles: None,
            u_max: params.u_max,
            dt: params.dt,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Obstacle-avoiding law over `env`. Starts must be free.
    pub fn avoiding(
        env: &Environment,
        modes: ModeGrid,
        mu: Vec<f64>,
        starts: &[Point2],
        params: &ErgodicParams,
        seed: u64,
    ) -> Result<Self> {
        let mut team = Self::new(modes, mu, starts, params, seed)?;
        for &p in starts {
            if env.point_in_obstacle(p)? {
                return Err(CoverageError::InsideObstacle { x: p.x, y: p.y });
            }
        }
        let d_infl = params.d_infl.unwrap_or(2.0 * env.sensor_radius);
        team.obstacles = Some((env.clone(), d_infl));
        Ok(team)
    }

    pub fn positions(&self) -> &[Point2] {
        &self.positions
    }

    pub fn modes(&self) -> &ModeGrid {
        &self.modes
    }

    pub fn states(&self) -> &[ErgodicState] {
        &self.states
    }

    pub fn t(&self) -> f64 {
        self.states[0].t()
    }

    /// Ergodic metric of the shared state, or the mean over agents when
    /// each agent keeps its own coefficients.
    pub fn metric(&self) -> f64 {
        self.states.iter().map(|s| s.metric(&self.modes)).sum::<f64>() / self.states.len() as f64
    }

    /// Mirrors an overshoot back into the rectangle. Landing exactly on a
    /// wall would zero the normal gradient of every cosine mode and pin the
    /// agent there.
    fn clamp(&self, p: Point2) -> Point2 {
        let fold = |v: f64, l: f64| {
            let r = if v < 0.0 {
                -v
            } else if v > l {
                2.0 * l - v
            } else {
                v
            };
            r.clamp(0.0, l)
        };
        Point2::new(fold(p.x, self.extent[0]), fold(p.y, self.extent[1]))
    }

    pub fn step(&mut self) -> Result<()> {
        let mut controls = Vec::with_capacity(self.positions.len());
        for j in 0..self.positions.len() {
            let x = self.positions[j];
            let state = if self.states.len() == 1 { &self.states[0] } else { &self.states[j] };
            let u = match &self.obstacles {
                None => control_step(state, &self.modes, x, self.u_max, &mut self.rng),
                Some((env, d_infl)) => avoid_control_step(state, &self.modes, env, x, self.u_max, *d_infl, &mut self.rng)?,
            };
            controls.push(u);
        }
        for j in 0..self.positions.len() {
            let x = self.positions[j];
            self.positions[j] = match &self.obstacles {
                None => self.clamp(x + controls[j] * self.dt),
                Some((env, d_infl)) => self.guarded_move(env, *d_infl, x, controls[j])?,
            };
        }
        if self.states.len() == 1 {
            self.states[0].accumulate(&self.modes, &self.positions, self.dt);
        } else {
            for (s, p) in self.states.iter_mut().zip(&self.positions) {
                s.accumulate(&self.modes, std::slice::from_ref(p), self.dt);
            }
        }
        Ok(())
    }

    /// Moves along `u` unless the step would touch a footprint; then tries
    /// the repulsive direction and increasingly rotated headings, and holds
    /// position as a last resort.
    fn guarded_move(&self, env: &Environment, d_infl: f64, x: Point2, u: Point2) -> Result<Point2> {
        let clear = |v: Point2| {
            let p = self.clamp(x + v * self.dt);
            (!env.obstacle_at(p) && env.segment_building_crossings(x, p).is_empty()).then_some(p)
        };
        if let Some(p) = clear(u) {
            return Ok(p);
        }
        let f = repulsive_field(x, env, d_infl)?;
        if f != Point2::ZERO {
            if let Some(p) = clear(f * self.u_max) {
                return Ok(p);
            }
        }
        for k in 1..=12 {
            for sign in [1.0, -1.0] {
                let (s, c) = (sign * k as f64 * 15f64.to_radians()).sin_cos();
                if let Some(p) = clear(Point2::new(c * u.x - s * u.y, s * u.x + c * u.y)) {
                    return Ok(p);
                }
            }
        }
        Ok(x)
    }
}

/// Runs `team` for `steps` steps and returns one planar trajectory per
/// agent with `steps + 1` samples at `t = k dt`.
pub fn run_team(team: &mut ErgodicTeam, steps: usize, optimal_altitude: f64) -> Result<Vec<Trajectory>> {
    let n = team.positions().len();
    let mut points: Vec<Vec<(f64, Point2)>> = (0..n).map(|_| Vec::with_capacity(steps + 1)).collect();
    let dt = team.dt;
    for (j, p) in team.positions().iter().enumerate() {
        points[j].push((0.0, *p));
    }
    for k in 1..=steps {
        team.step()?;
        for (j, p) in team.positions().iter().enumerate() {
            points[j].push((k as f64 * dt, *p));
        }
    }
    points
        .into_iter()
        .enumerate()
        .map(|(j, pts)| Trajectory::planar(j, optimal_altitude, pts))
        .collect()
}

/// One agent descending the ergodic metric of `target` from `start`.
pub fn single_ergodic(
    target: &TargetDistribution,
    params: &ErgodicParams,
    start: Point2,
    steps: usize,
    seed: u64,
) -> Result<Trajectory> {
    if steps == 0 {
        return Err(CoverageError::InvalidParameter("steps must be at least 1".into()));
    }
    let modes = params.mode_grid(target.extent());
    let mu = target.spectral_mu(&modes)?;
    let mut team = ErgodicTeam::new(modes, mu, &[start], params, seed)?;
    Ok(run_team(&mut team, steps, params.optimal_altitude)?.remove(0))
}

/// Like [`single_ergodic`] but with the obstacle-avoiding law over `env`.
pub fn single_erg_avoid_obs(
    target: &TargetDistribution,
    env: &Environment,
    params: &ErgodicParams,
    start: Point2,
    steps: usize,
    seed: u64,
) -> Result<Trajectory> {
    if steps == 0 {
        return Err(CoverageError::InvalidParameter("steps must be at least 1".into()));
    }
    let modes = params.mode_grid(target.extent());
    let mu = target.spectral_mu(&modes)?;
    let mut team = ErgodicTeam::avoiding(env, modes, mu, &[start], params, seed)?;
    Ok(run_team(&mut team, steps, env.optimal_altitude)?.remove(0))
}

/// Builds the team stepper a variant runs on (before any repair).
pub fn variant_team(
    env: &Environment,
    starts: &[Point2],
    variant: ErgodicVariant,
    params: &ErgodicParams,
    seed: u64,
) -> Result<ErgodicTeam> {
    let target = match variant {
        ErgodicVariant::Naive => TargetDistribution::vacant(env, params.cell_size)?,
        ErgodicVariant::Biased | ErgodicVariant::Avoiding => TargetDistribution::free(env, params.cell_size)?,
    };
    let modes = params.mode_grid(env.extent);
    let mu = target.spectral_mu(&modes)?;
    match variant {
        ErgodicVariant::Avoiding => ErgodicTeam::avoiding(env, modes, mu, starts, params, seed),
        _ => ErgodicTeam::new(modes, mu, starts, params, seed),
    }
}

/// Team plan for one of the three ergodic variants. Naive and biased plans
/// are repaired over the buildings; the avoiding plan is returned as flown.
pub fn multi_ergodic(
    env: &Environment,
    starts: &[Point2],
    variant: ErgodicVariant,
    params: &ErgodicParams,
    steps: usize,
    seed: u64,
) -> Result<MultiPath> {
    if steps == 0 {
        return Err(CoverageError::InvalidParameter("steps must be at least 1".into()));
    }
    let mut team = variant_team(env, starts, variant, params, seed)?;
    let planned = run_team(&mut team, steps, env.optimal_altitude)?;
    let paths = match variant {
        ErgodicVariant::Avoiding => planned,
        _ => {
            let fly = FlyOverParams {
                u_max: params.u_max,
                ..FlyOverParams::default()
            };
            planned
                .iter()
                .map(|p| fly_over_buildings(p, env, &fly))
                .collect::<Result<Vec<_>>>()?
        }
    };
    MultiPath::new(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Building;
    use crate::geom::Rect;

    #[test]
    fn one_step_moves_u_max_dt() {
        let env = Environment::empty([1.0, 1.0], 2.0, 0.1).unwrap();
        let target = TargetDistribution::vacant(&env, 0.01).unwrap();
        let p = ErgodicParams::default();
        let tr = single_ergodic(&target, &p, Point2::new(0.5, 0.5), 1, 4).unwrap();
        assert_eq!(tr.len(), 2);
        let d = tr.samples()[0].pos.dist(tr.samples()[1].pos);
        assert!((d - 0.1).abs() < 1e-12);
    }

    #[test]
    fn avoid_without_obstacles_equals_plain() {
        let env = Environment::empty([5.0, 5.0], 2.0, 1.0).unwrap();
        let target = TargetDistribution::free(&env, 0.25).unwrap();
        let p = ErgodicParams::default();
        let start = Point2::new(1.0, 2.0);
        let plain = single_ergodic(&target, &p, start, 300, 9).unwrap();
        let avoid = single_erg_avoid_obs(&target, &env, &p, start, 300, 9).unwrap();
        assert_eq!(plain, avoid);
    }

    #[test]
    fn avoiding_start_inside_building_fails() {
        let env = Environment::with_default_ceiling(
            [10.0, 10.0],
            vec![Building::new(Rect::new(4.0, 4.0, 6.0, 6.0), 5.0)],
            2.0,
            1.0,
        )
        .unwrap();
        let target = TargetDistribution::free(&env, 0.25).unwrap();
        let r = single_erg_avoid_obs(&target, &env, &ErgodicParams::default(), Point2::new(5.0, 5.0), 10, 0);
        assert!(matches!(r, Err(CoverageError::InsideObstacle { .. })));
    }

    #[test]
    fn independent_agents_keep_separate_books() {
        let env = Environment::empty([4.0, 4.0], 2.0, 1.0).unwrap();
        let p = ErgodicParams {
            sharing: Sharing::Independent,
            ..ErgodicParams::default()
        };
        let starts = [Point2::new(1.0, 1.0), Point2::new(3.0, 3.0)];
        let mut team = variant_team(&env, &starts, ErgodicVariant::Naive, &p, 1).unwrap();
        for _ in 0..10 {
            team.step().unwrap();
        }
        assert_eq!(team.states().len(), 2);
        assert!(team.states().iter().all(|s| s.agents() == 1));
    }

    #[test]
    fn single_agent_team_matches_single_planner() {
        let env = Environment::empty([6.0, 6.0], 2.0, 1.0).unwrap();
        let p = ErgodicParams::default();
        let start = Point2::new(2.0, 3.0);
        let mp = multi_ergodic(&env, &[start], ErgodicVariant::Naive, &p, 200, 5).unwrap();
        let target = TargetDistribution::vacant(&env, p.cell_size).unwrap();
        let single = single_ergodic(&target, &p, start, 200, 5).unwrap();
        assert_eq!(mp.trajectories[0], single);
    }
}
