//! Probe-based coverage metrics.
//!
//! Random free-ground probes carry a small disc. A probe is *seen* while an
//! observing agent's sensor disc overlaps it, and every maximal run of
//! seen steps becomes one visit interval. Coverage, visit counts, revisit
//! gaps and time spent are all folds over those intervals.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::Environment;
use crate::error::{CoverageError, Result};
use crate::geom::Point2;

pub const DEFAULT_PROBE_COUNT: usize = 500;

/// `true` iff the sample is observing and its ground distance to the probe
/// is at most `sensor_radius + probe_radius`.
pub fn sees(probe: Point2, agent: Point2, observing: bool, sensor_radius: f64, probe_radius: f64) -> bool {
    observing && probe.dist(agent) <= sensor_radius + probe_radius
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Stats {
        if values.is_empty() {
            return Stats::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Stats { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub t: f64,
    pub percent_coverage: f64,
    pub visits: Stats,
    pub revisit: Stats,
    pub time_spent: Stats,
}

/// Probe points plus their visit bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSet {
    points: Vec<Point2>,
    probe_radius: f64,
    sensor_radius: f64,
    closed: Vec<Vec<(f64, f64)>>,
    open: Vec<Option<f64>>,
    last_t: Option<f64>,
    buckets: Buckets,
    seen: Vec<bool>,
}

/// Uniform hash grid over the probes so each agent only inspects nearby
/// ones.
#[derive(Debug, Clone, PartialEq)]
struct Buckets {
    size: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<usize>>,
}

impl Buckets {
    fn new(points: &[Point2], size: f64) -> Self {
        let max = points.iter().fold(Point2::ZERO, |m, p| Point2::new(m.x.max(p.x), m.y.max(p.y)));
        let nx = (max.x / size).floor() as usize + 1;
        let ny = (max.y / size).floor() as usize + 1;
        let mut cells = vec![Vec::new(); nx * ny];
        for (i, p) in points.iter().enumerate() {
            let (bx, by) = ((p.x / size).floor() as usize, (p.y / size).floor() as usize);
            cells[by * nx + bx].push(i);
        }
        Buckets { size, nx, ny, cells }
    }

    fn near(&self, p: Point2, mut f: impl FnMut(usize)) {
        let bx = (p.x / self.size).floor() as i64;
        let by = (p.y / self.size).floor() as i64;
        for y in (by - 1).max(0)..=(by + 1).min(self.ny as i64 - 1) {
            for x in (bx - 1).max(0)..=(bx + 1).min(self.nx as i64 - 1) {
                for &i in &self.cells[y as usize * self.nx + x as usize] {
                    f(i);
                }
            }
        }
    }
}

impl ProbeSet {
    pub fn new(points: Vec<Point2>, probe_radius: f64, sensor_radius: f64) -> Result<Self> {
        if !(probe_radius >= 0.0 && sensor_radius > 0.0) {
            return Err(CoverageError::InvalidParameter(
                "probe radius must be non-negative and sensor radius positive".into(),
            ));
        }
        if points.iter().any(|p| !(p.x >= 0.0 && p.y >= 0.0)) {
            return Err(CoverageError::InvalidParameter("probes must have non-negative coordinates".into()));
        }
        let m = points.len();
        let buckets = Buckets::new(&points, sensor_radius + probe_radius);
        Ok(ProbeSet {
            points,
            probe_radius,
            sensor_radius,
            closed: vec![Vec::new(); m],
            open: vec![None; m],
            last_t: None,
            buckets,
            seen: vec![false; m],
        })
    }

    /// `count` probes drawn uniformly over free ground. The probe radius
    /// defaults to half the sensor radius.
    pub fn sample(env: &Environment, count: usize, probe_radius: Option<f64>, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = Vec::with_capacity(count);
        let limit = 1000 * count.max(1);
        let mut attempts = 0;
        while points.len() < count {
            attempts += 1;
            if attempts > limit {
                return Err(CoverageError::NoFreeSpace);
            }
            let p = Point2::new(rng.gen_range(0.0..=env.extent[0]), rng.gen_range(0.0..=env.extent[1]));
            if !env.obstacle_at(p) {
                points.push(p);
            }
        }
        Self::new(points, probe_radius.unwrap_or(0.5 * env.sensor_radius), env.sensor_radius)
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn probe_radius(&self) -> f64 {
        self.probe_radius
    }

    /// Closed intervals of probe `i`, in time order.
    pub fn intervals(&self, i: usize) -> &[(f64, f64)] {
        &self.closed[i]
    }

    pub fn open_since(&self, i: usize) -> Option<f64> {
        self.open[i]
    }

    /// Updates every probe with the team's samples at time `t`; each item
    /// is a ground position and its observing flag.
    pub fn record_step(&mut self, t: f64, team: &[(Point2, bool)]) -> Result<()> {
        if let Some(last) = self.last_t {
            if !(t > last) {
                return Err(CoverageError::NonMonotoneTime { t, last });
            }
        }
        self.last_t = Some(t);
        self.seen.iter_mut().for_each(|s| *s = false);
        let reach = self.sensor_radius + self.probe_radius;
        for &(p, observing) in team {
            if !observing {
                continue;
            }
            let (points, seen) = (&self.points, &mut self.seen);
            self.buckets.near(p, |i| {
                if points[i].dist(p) <= reach {
                    seen[i] = true;
                }
            });
        }
        for i in 0..self.points.len() {
            match (self.seen[i], self.open[i]) {
                (true, None) => self.open[i] = Some(t),
                (false, Some(t0)) => {
                    self.closed[i].push((t0, t));
                    self.open[i] = None;
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Intervals of probe `i` with any open one closed at `t_now`.
    fn intervals_at(&self, i: usize, t_now: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.closed[i]
            .iter()
            .copied()
            .chain(self.open[i].map(|t0| (t0, t_now.max(t0))))
    }

    /// Aggregates over all probes at `t_now`. An open visit counts as a
    /// visit and contributes its elapsed time to time spent.
    pub fn report(&self, t_now: f64) -> Result<MetricsReport> {
        let m = self.points.len();
        if m == 0 {
            return Err(CoverageError::NoProbes);
        }
        let mut visits = Vec::with_capacity(m);
        let mut revisit = Vec::with_capacity(m);
        let mut spent = Vec::with_capacity(m);
        for i in 0..m {
            let iv: Vec<(f64, f64)> = self.intervals_at(i, t_now).collect();
            visits.push(iv.len() as f64);
            spent.push(iv.iter().map(|(a, b)| b - a).sum());
            revisit.push(if iv.len() < 2 {
                0.0
            } else {
                iv.windows(2).map(|w| w[1].0 - w[0].1).sum::<f64>() / (iv.len() - 1) as f64
            });
        }
        let covered = visits.iter().filter(|&&v| v > 0.0).count();
        Ok(MetricsReport {
            t: t_now,
            percent_coverage: 100.0 * covered as f64 / m as f64,
            visits: Stats::of(&visits),
            revisit: Stats::of(&revisit),
            time_spent: Stats::of(&spent),
        })
    }
}

pub const SERIES_HEADER: &str =
    "t,percent_coverage,mean_visits,std_visits,mean_revisit,std_revisit,mean_time_spent,std_time_spent";

pub fn write_series_csv<W: Write>(rows: &[MetricsReport], w: W) -> Result<()> {
    let io = |e: std::io::Error| CoverageError::InvalidParameter(format!("metrics csv: {e}"));
    let mut w = csv::Writer::from_writer(w);
    let header: Vec<&str> = SERIES_HEADER.split(',').collect();
    w.write_record(&header).map_err(|e| io(e.into()))?;
    for r in rows {
        let vals = [
            r.t,
            r.percent_coverage,
            r.visits.mean,
            r.visits.std,
            r.revisit.mean,
            r.revisit.std,
            r.time_spent.mean,
            r.time_spent.std,
        ];
        w.write_record(vals.iter().map(|v| format!("{v:.6}"))).map_err(|e| io(e.into()))?;
    }
    w.flush().map_err(io)
}
