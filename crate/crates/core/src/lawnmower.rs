//! Boustrophedon sweep cycles and the multi-agent rotation scheme.

use crate::env::Environment;
use crate::error::{CoverageError, Result};
use crate::geom::Point2;
use crate::traj::{fly_over_buildings, rotate_cycle, FlyOverParams, MultiPath, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub lane_spacing: f64,
    /// Lane segments in traversal order.
    pub lanes: Vec<(Point2, Point2)>,
    /// Closed planar cycle at the sensing altitude, timed at `speed`.
    pub cycle: Trajectory,
}

/// Back-and-forth lanes along the long axis of the extent, closed into a
/// cycle.
///
/// Lanes run wall to wall; the first and last lanes sit `lane_spacing / 2`
/// from the boundary and the rest are evenly spaced in between. The cycle
/// closes with a straight leg from the end of the last lane back to the
/// start (along the boundary when the lane count is even).
pub fn boustrophedon(
    extent: [f64; 2],
    lane_spacing: f64,
    sensor_radius: f64,
    speed: f64,
    altitude: f64,
) -> Result<SweepPlan> {
    let [l1, l2] = extent;
    if !(lane_spacing > 0.0 && lane_spacing <= 2.0 * sensor_radius && 2.0 * sensor_radius <= l1.min(l2)) {
        return Err(CoverageError::InvalidParameter(format!(
            "boustrophedon needs 0 < spacing ({lane_spacing}) <= 2 r ({}) <= min extent ({})",
            2.0 * sensor_radius,
            l1.min(l2)
        )));
    }
    if !(speed > 0.0) {
        return Err(CoverageError::InvalidParameter(format!("speed {speed} must be positive")));
    }
    let swap = l2 > l1;
    let (long, short) = if swap { (l2, l1) } else { (l1, l2) };
    let to_xy = |u: f64, v: f64| if swap { Point2::new(v, u) } else { Point2::new(u, v) };

    let count = ((short / lane_spacing) - 1e-9).ceil().max(1.0) as usize;
    let offsets: Vec<f64> = if count == 1 {
        vec![0.5 * short]
    } else {
        let gap = (short - lane_spacing) / (count - 1) as f64;
        (0..count).map(|j| 0.5 * lane_spacing + j as f64 * gap).collect()
    };

    let mut lanes = Vec::with_capacity(count);
    let mut route: Vec<Point2> = Vec::with_capacity(2 * count + 1);
    for (j, &v) in offsets.iter().enumerate() {
        let (a, b) = if j % 2 == 0 { (0.0, long) } else { (long, 0.0) };
        let (pa, pb) = (to_xy(a, v), to_xy(b, v));
        lanes.push((pa, pb));
        route.push(pa);
        route.push(pb);
    }
    route.push(route[0]);

    let mut t = 0.0;
    let mut timed = Vec::with_capacity(route.len());
    for (i, p) in route.iter().enumerate() {
        if i > 0 {
            t += route[i - 1].dist(*p) / speed;
        }
        timed.push((t, *p));
    }
    Ok(SweepPlan {
        lane_spacing,
        lanes,
        cycle: Trajectory::planar(0, altitude, timed)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawnmowerParams {
    /// Defaults to twice the sensor radius (tangent footprints).
    pub lane_spacing: Option<f64>,
    pub speed: f64,
    pub fly_over: FlyOverParams,
}

impl Default for LawnmowerParams {
    fn default() -> Self {
        LawnmowerParams {
            lane_spacing: None,
            speed: 1.0,
            fly_over: FlyOverParams::default(),
        }
    }
}

/// Single-agent cycle planned over the vacant footprint, then repaired
/// over the buildings.
pub fn repaired_cycle(env: &Environment, params: &LawnmowerParams) -> Result<Trajectory> {
    let spacing = params.lane_spacing.unwrap_or(2.0 * env.sensor_radius);
    let plan = boustrophedon(env.extent, spacing, env.sensor_radius, params.speed, env.optimal_altitude)?;
    let fly = FlyOverParams {
        u_max: params.speed,
        ..params.fly_over
    };
    fly_over_buildings(&plan.cycle, env, &fly)
}

/// Team of `n` agents on the repaired cycle, agent `i` (1-based) rotated
/// by `i / n` of the cycle length.
pub fn multi_lawnmower(env: &Environment, n: usize, params: &LawnmowerParams) -> Result<MultiPath> {
    if n == 0 {
        return Err(CoverageError::InvalidParameter("team needs at least one agent".into()));
    }
    let cycle = repaired_cycle(env, params)?;
    let len = cycle.arc_length();
    let offsets: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64 * len).collect();
    lawnmower_with_offsets(&cycle, &offsets)
}

/// One rotated copy of `cycle` per arc-length offset.
pub fn lawnmower_with_offsets(cycle: &Trajectory, offsets: &[f64]) -> Result<MultiPath> {
    let paths = offsets
        .iter()
        .enumerate()
        .map(|(i, &o)| {
            let mut p = rotate_cycle(cycle, o)?;
            p.agent_id = i;
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    MultiPath::new(paths)
}
