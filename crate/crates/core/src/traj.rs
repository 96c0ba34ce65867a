//! Time-stamped 3D paths, path surgery and the swept-area computation.
//!
//! A sample is *observing* exactly when it sits at the optimal sensing
//! altitude; anything higher is a fly-over manoeuvre with the camera off.

use std::io::{Read, Write};

use crate::env::{Environment, DEFAULT_CLEARANCE};
use crate::error::{CoverageError, Result};
use crate::geom::{GroundGrid, Point2, Point3};

/// Altitude tolerance of the observing flag, meters.
pub const ALTITUDE_TOL: f64 = 1e-9;
/// Positional tolerance for path joins, meters.
pub const JOIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub pos: Point3,
    pub observing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub agent_id: usize,
    /// Sensing altitude `h̃` used to derive the observing flags.
    pub optimal_altitude: f64,
    samples: Vec<Sample>,
}

pub fn is_observing(h: f64, optimal_altitude: f64) -> bool {
    (h - optimal_altitude).abs() <= ALTITUDE_TOL
}

impl Trajectory {
    pub fn new(agent_id: usize, optimal_altitude: f64) -> Self {
        Trajectory {
            agent_id,
            optimal_altitude,
            samples: Vec::new(),
        }
    }

    /// Builds a path from `(t, position)` pairs; observing flags are
    /// derived from altitude.
    pub fn from_points(
        agent_id: usize,
        optimal_altitude: f64,
        points: impl IntoIterator<Item = (f64, Point3)>,
    ) -> Result<Self> {
        let mut tr = Trajectory::new(agent_id, optimal_altitude);
        for (t, p) in points {
            tr.push(t, p)?;
        }
        Ok(tr)
    }

    /// Planar path flown entirely at `h̃`.
    pub fn planar(
        agent_id: usize,
        optimal_altitude: f64,
        points: impl IntoIterator<Item = (f64, Point2)>,
    ) -> Result<Self> {
        Self::from_points(
            agent_id,
            optimal_altitude,
            points.into_iter().map(|(t, p)| (t, p.with_altitude(optimal_altitude))),
        )
    }

    pub fn push(&mut self, t: f64, pos: Point3) -> Result<()> {
        match self.samples.last() {
            None if t < 0.0 => {
                return Err(CoverageError::InvalidTrajectory(format!("first timestamp {t} is negative")))
            }
            Some(last) if t <= last.t => {
                return Err(CoverageError::InvalidTrajectory(format!(
                    "timestamp {t} does not follow {}",
                    last.t
                )))
            }
            _ => {}
        }
        self.samples.push(Sample {
            t,
            pos,
            observing: is_observing(pos.h, self.optimal_altitude),
        });
        Ok(())
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> Option<&Sample> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    pub fn duration(&self) -> f64 {
        match (self.first(), self.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    /// 3D polyline length.
    pub fn arc_length(&self) -> f64 {
        self.samples.windows(2).map(|w| w[0].pos.dist(w[1].pos)).sum()
    }

    pub fn is_closed(&self) -> bool {
        match (self.first(), self.last()) {
            (Some(a), Some(b)) => self.len() > 1 && a.pos.dist(b.pos) <= JOIN_TOL,
            _ => false,
        }
    }

    /// Linear interpolation in time, clamped to the end points.
    pub fn position_at(&self, t: f64) -> Option<Point3> {
        let s = &self.samples;
        let first = s.first()?;
        if t <= first.t {
            return Some(first.pos);
        }
        let last = s.last()?;
        if t >= last.t {
            return Some(last.pos);
        }
        let k = s.partition_point(|x| x.t <= t);
        let (a, b) = (&s[k - 1], &s[k]);
        if a.t == t {
            return Some(a.pos);
        }
        Some(a.pos.lerp(b.pos, (t - a.t) / (b.t - a.t)))
    }

    /// Resamples at `t0, t0 + dt, ...` plus the final timestamp.
    pub fn resample(&self, dt: f64) -> Result<Trajectory> {
        if !(dt > 0.0) {
            return Err(CoverageError::InvalidParameter(format!("dt {dt} must be positive")));
        }
        let mut out = Trajectory::new(self.agent_id, self.optimal_altitude);
        let (Some(a), Some(b)) = (self.first(), self.last()) else {
            return Ok(out);
        };
        let steps = ((b.t - a.t) / dt).floor() as usize;
        for k in 0..=steps {
            let t = a.t + k as f64 * dt;
            out.push(t, self.position_at(t).expect("non-empty"))?;
        }
        if b.t > out.last().expect("non-empty").t + 1e-12 {
            out.push(b.t, b.pos)?;
        }
        Ok(out)
    }

    /// Shifts every timestamp so the path starts at `t0`.
    pub fn rebased(&self, t0: f64) -> Trajectory {
        let shift = self.first().map_or(0.0, |s| t0 - s.t);
        let mut out = self.clone();
        for s in &mut out.samples {
            s.t += shift;
        }
        out
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| CoverageError::InvalidParameter(format!("csv: {e}"));
        wr.write_record(["t", "x", "y", "h", "observing"]).map_err(io)?;
        for s in &self.samples {
            wr.write_record([
                format!("{:.6}", s.t),
                format!("{:.6}", s.pos.x),
                format!("{:.6}", s.pos.y),
                format!("{:.6}", s.pos.h),
                u8::from(s.observing).to_string(),
            ])
            .map_err(io)?;
        }
        wr.flush()
            .map_err(|e| CoverageError::InvalidParameter(format!("csv: {e}")))
    }

    /// Reads a `t,x,y,h,observing` export. Flags are taken from the file.
    pub fn read_csv<R: Read>(agent_id: usize, optimal_altitude: f64, r: R) -> Result<Trajectory> {
        let mut rd = csv::Reader::from_reader(r);
        let mut tr = Trajectory::new(agent_id, optimal_altitude);
        for rec in rd.records() {
            let rec = rec.map_err(|e| CoverageError::InvalidTrajectory(format!("csv: {e}")))?;
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|v| v.trim().parse::<f64>().ok())
                    .ok_or_else(|| CoverageError::InvalidTrajectory(format!("bad field {i} in {rec:?}")))
            };
            let (t, x, y, h) = (num(0)?, num(1)?, num(2)?, num(3)?);
            let observing = matches!(rec.get(4).map(str::trim), Some("1") | Some("true"));
            if tr.last().is_some_and(|l| t <= l.t) {
                return Err(CoverageError::InvalidTrajectory(format!("timestamp {t} out of order")));
            }
            tr.samples.push(Sample {
                t,
                pos: Point3::new(x, y, h),
                observing,
            });
        }
        Ok(tr)
    }
}

/// The team's paths, one per agent.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MultiPath {
    pub trajectories: Vec<Trajectory>,
}

impl MultiPath {
    pub fn new(trajectories: Vec<Trajectory>) -> Result<Self> {
        let mut ids: Vec<usize> = trajectories.iter().map(|t| t.agent_id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(CoverageError::InvalidTrajectory("duplicate agent ids".into()));
        }
        Ok(MultiPath { trajectories })
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn observing_subset(&self) -> MultiPath {
        MultiPath {
            trajectories: self.trajectories.iter().map(observing_subset).collect(),
        }
    }
}

/// Keeps only the samples flown at `h̃`.
pub fn observing_subset(path: &Trajectory) -> Trajectory {
    Trajectory {
        agent_id: path.agent_id,
        optimal_altitude: path.optimal_altitude,
        samples: path.samples.iter().copied().filter(|s| s.observing).collect(),
    }
}

/// Bitmap of free ground cells seen by the team.
#[derive(Debug, Clone, PartialEq)]
pub struct SweptRegion {
    pub grid: GroundGrid,
    pub marked: Vec<bool>,
}

impl SweptRegion {
    pub fn marked_count(&self) -> usize {
        self.marked.iter().filter(|&&m| m).count()
    }

    pub fn area(&self) -> f64 {
        self.marked_count() as f64 * self.grid.cell_area()
    }
}

/// Discretized `(ψ̃ ⊕ B) ∩ χ_search`: a free cell is marked when its center
/// is within the sensor radius of an observing sample.
pub fn swept_area(mp: &MultiPath, env: &Environment, cell_size: f64) -> Result<SweptRegion> {
    if !(cell_size > 0.0) {
        return Err(CoverageError::InvalidParameter(format!("cell size {cell_size} must be positive")));
    }
    let grid = GroundGrid::new(env.extent, cell_size);
    let free = env.free_mask(&grid);
    let mut marked = vec![false; grid.len()];
    let r = env.sensor_radius;
    let r2 = r * r;
    for s in mp.trajectories.iter().flat_map(|t| t.samples.iter()).filter(|s| s.observing) {
        let c = s.pos.ground();
        let (Some((i0, i1)), Some((j0, j1))) =
            (grid.columns_between(c.x - r, c.x + r), grid.rows_between(c.y - r, c.y + r))
        else {
            continue;
        };
        for j in j0..=j1 {
            let dy = grid.y_center(j) - c.y;
            for i in i0..=i1 {
                let dx = grid.x_center(i) - c.x;
                let k = grid.index(i, j);
                if free[k] && dx * dx + dy * dy <= r2 {
                    marked[k] = true;
                }
            }
        }
    }
    Ok(SweptRegion { grid, marked })
}

/// Tuning of the fly-over repair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlyOverParams {
    /// Cruise height above the tallest roof of a crossing, meters.
    pub clearance: f64,
    /// Horizontal distance kept from a footprint while climbing or
    /// descending. Footprints are closed, so the vertical legs must stand
    /// strictly outside them.
    pub standoff: f64,
    /// Speed of the vertical legs, m/s.
    pub u_max: f64,
}

impl Default for FlyOverParams {
    fn default() -> Self {
        FlyOverParams {
            clearance: DEFAULT_CLEARANCE,
            standoff: 1e-3,
            u_max: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: Point2,
    b: Point2,
    ta: f64,
    tb: f64,
    high: bool,
    roof: f64,
}

/// Replaces every building-crossing stretch of a planar path with a climb,
/// a cruise above the roofs and a descent back to `h̃`.
///
/// Only buildings whose roof reaches `h̃` obstruct the sensing altitude.
/// Climbs and descents are vertical, flown at `u_max`, and start
/// `standoff` meters outside the footprint; horizontal timing of the
/// input is preserved and later samples are delayed by the vertical legs.
pub fn fly_over_buildings(path: &Trajectory, env: &Environment, params: &FlyOverParams) -> Result<Trajectory> {
    if !(params.u_max > 0.0 && params.standoff > 0.0 && params.clearance > 0.0) {
        return Err(CoverageError::InvalidParameter(
            "fly-over clearance, standoff and speed must be positive".into(),
        ));
    }
    let h_opt = path.optimal_altitude;
    let obstacles: Vec<(usize, crate::geom::Rect, f64)> = env
        .buildings
        .iter()
        .enumerate()
        .filter(|(_, b)| b.height >= h_opt)
        .map(|(i, b)| (i, b.footprint().inflate(params.standoff), b.height))
        .collect();
    let samples = path.samples();
    if samples.is_empty() {
        return Ok(Trajectory::new(path.agent_id, h_opt));
    }

    let mut pieces: Vec<Piece> = Vec::new();
    if samples.len() == 1 {
        let p = samples[0].pos.ground();
        let roof = roof_at(&obstacles, p);
        pieces.push(Piece {
            a: p,
            b: p,
            ta: samples[0].t,
            tb: samples[0].t,
            high: roof.is_some(),
            roof: roof.unwrap_or(0.0),
        });
    }
    for w in samples.windows(2) {
        split_segment(&obstacles, &w[0], &w[1], &mut pieces);
    }

    // Cruise altitude per maximal run of high pieces.
    let mut cruise = vec![0.0; pieces.len()];
    let mut k = 0;
    while k < pieces.len() {
        if !pieces[k].high {
            k += 1;
            continue;
        }
        let start = k;
        let mut roof = 0.0_f64;
        while k < pieces.len() && pieces[k].high {
            roof = roof.max(pieces[k].roof);
            k += 1;
        }
        let h = roof + params.clearance;
        if h > env.max_altitude + ALTITUDE_TOL {
            let pieces = &pieces;
            let index = (start..k)
                .flat_map(|p| obstacles.iter().filter(move |o| o.2 == pieces[p].roof).map(|o| o.0))
                .next()
                .unwrap_or(0);
            return Err(CoverageError::CeilingTooLow {
                index,
                required: h,
                ceiling: env.max_altitude,
            });
        }
        cruise[start..k].fill(h);
    }

    let mut out = Trajectory::new(path.agent_id, h_opt);
    let mut shift = 0.0;
    let emit = |out: &mut Trajectory, t: f64, p: Point3| -> Result<()> {
        match out.last() {
            Some(l) if t <= l.t + 1e-12 => {
                if l.pos.dist(p) > 1e-9 {
                    return Err(CoverageError::InvalidTrajectory(format!(
                        "fly-over repair produced a jump at t = {t}"
                    )));
                }
                Ok(())
            }
            _ => out.push(t, p),
        }
    };
    let alt = |k: usize| if pieces[k].high { cruise[k] } else { h_opt };
    emit(&mut out, pieces[0].ta, pieces[0].a.with_altitude(alt(0)))?;
    for k in 0..pieces.len() {
        let h = alt(k);
        if k > 0 {
            let prev = alt(k - 1);
            if prev != h {
                let node = pieces[k].a;
                emit(&mut out, pieces[k].ta + shift, node.with_altitude(prev))?;
                shift += (h - prev).abs() / params.u_max;
                emit(&mut out, pieces[k].ta + shift, node.with_altitude(h))?;
            }
        }
        emit(&mut out, pieces[k].ta + shift, pieces[k].a.with_altitude(h))?;
        emit(&mut out, pieces[k].tb + shift, pieces[k].b.with_altitude(h))?;
    }
    Ok(out)
}

fn roof_at(obstacles: &[(usize, crate::geom::Rect, f64)], p: Point2) -> Option<f64> {
    obstacles
        .iter()
        .filter(|o| o.1.contains(p))
        .map(|o| o.2)
        .reduce(f64::max)
}

fn split_segment(
    obstacles: &[(usize, crate::geom::Rect, f64)],
    s0: &Sample,
    s1: &Sample,
    pieces: &mut Vec<Piece>,
) {
    let (p, q) = (s0.pos.ground(), s1.pos.ground());
    let (t0, t1) = (s0.t, s1.t);
    let at = |u: f64| (p.lerp(q, u), t0 + (t1 - t0) * u);
    if p.dist(q) == 0.0 {
        let roof = roof_at(obstacles, p);
        pieces.push(Piece {
            a: p,
            b: q,
            ta: t0,
            tb: t1,
            high: roof.is_some(),
            roof: roof.unwrap_or(0.0),
        });
        return;
    }
    let mut hits: Vec<(f64, f64, f64)> = obstacles
        .iter()
        .filter_map(|o| o.1.clip_segment(p, q).map(|(a, b)| (a, b, o.2)))
        .collect();
    hits.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64, f64)> = Vec::new();
    for (a, b, h) in hits {
        match merged.last_mut() {
            Some(m) if a <= m.1 => {
                m.1 = m.1.max(b);
                m.2 = m.2.max(h);
            }
            _ => merged.push((a, b, h)),
        }
    }
    let mut push = |u0: f64, u1: f64, high: bool, roof: f64| {
        let (a, ta) = at(u0);
        let (b, tb) = at(u1);
        pieces.push(Piece { a, b, ta, tb, high, roof });
    };
    let mut cursor = 0.0;
    for (a, b, h) in merged {
        if a > cursor {
            push(cursor, a, false, 0.0);
        }
        push(a, b, true, h);
        cursor = b;
    }
    if cursor < 1.0 {
        push(cursor, 1.0, false, 0.0);
    }
}

/// Re-parameterizes a closed path to start `offset` meters of arc length
/// further along; timestamps restart at 0.
pub fn rotate_cycle(cycle: &Trajectory, offset: f64) -> Result<Trajectory> {
    if !cycle.is_closed() {
        return Err(CoverageError::InvalidTrajectory("rotate_cycle needs a closed path".into()));
    }
    if !(offset >= 0.0) {
        return Err(CoverageError::InvalidParameter(format!("offset {offset} must be non-negative")));
    }
    let s = cycle.samples();
    let total = cycle.arc_length();
    let base = cycle.rebased(0.0);
    if total == 0.0 {
        return Ok(base);
    }
    let o = offset % total;
    if o == 0.0 {
        return Ok(base);
    }
    // Segment k holds the split point.
    let mut acc = 0.0;
    let mut k = 0;
    let mut frac = 0.0;
    for (i, w) in s.windows(2).enumerate() {
        let len = w[0].pos.dist(w[1].pos);
        if acc + len > o {
            k = i;
            frac = (o - acc) / len;
            break;
        }
        acc += len;
        k = i;
        frac = 1.0;
    }
    let split = s[k].pos.lerp(s[k + 1].pos, frac);
    let seg_dt = s[k + 1].t - s[k].t;

    let mut out = Trajectory::new(cycle.agent_id, cycle.optimal_altitude);
    let mut t = 0.0;
    out.push(0.0, split)?;
    let mut prev_t = s[k].t + frac * seg_dt;
    let mut prev_pos = split;
    let n = s.len();
    // Walk k+1 .. n-1, then wrap through 1 ..= k (index 0 equals n-1).
    let order = (k + 1..n).chain(1..=k);
    for i in order {
        let dt = if i == k + 1 {
            s[i].t - prev_t
        } else {
            let j = if i == 0 { n - 1 } else { i };
            s[j].t - s[j - 1].t
        };
        t += dt;
        if s[i].pos.dist(prev_pos) == 0.0 && dt <= 0.0 {
            continue;
        }
        if t > out.last().expect("non-empty").t {
            out.push(t, s[i].pos)?;
        }
        prev_pos = s[i].pos;
        prev_t = s[i].t;
    }
    // Close back at the split point.
    let tail = frac * seg_dt;
    if tail > 0.0 {
        t += tail;
        out.push(t, split)?;
    }
    Ok(out)
}

/// `a ∘ b`: traverse `a`, then `b` re-timed to start where `a` ends.
pub fn concat(a: &Trajectory, b: &Trajectory) -> Result<Trajectory> {
    let (Some(la), Some(fb)) = (a.last(), b.first()) else {
        return Ok(if a.is_empty() { b.clone() } else { a.clone() });
    };
    if la.pos.dist(fb.pos) > JOIN_TOL {
        return Err(CoverageError::InvalidTrajectory(format!(
            "concat: end point {:?} differs from start point {:?}",
            la.pos, fb.pos
        )));
    }
    let shift = la.t - fb.t;
    let mut out = a.clone();
    for s in &b.samples()[1..] {
        out.push(s.t + shift, s.pos)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Building;
    use crate::geom::Rect;

    fn line(points: &[(f64, f64)], speed: f64, h: f64) -> Trajectory {
        let mut t = 0.0;
        let mut out = Vec::new();
        for (i, &(x, y)) in points.iter().enumerate() {
            if i > 0 {
                let (px, py) = points[i - 1];
                t += (x - px).hypot(y - py) / speed;
            }
            out.push((t, Point2::new(x, y)));
        }
        Trajectory::planar(0, h, out).unwrap()
    }

    fn tower_world() -> Environment {
        Environment::with_default_ceiling(
            [10.0, 10.0],
            vec![Building::new(Rect::new(4.0, 4.0, 6.0, 6.0), 5.0)],
            3.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn observing_subset_cases() {
        let all = line(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)], 1.0, 2.0);
        assert_eq!(observing_subset(&all), all);
        let high = Trajectory::from_points(0, 2.0, [(0.0, Point3::new(0.0, 0.0, 3.0)), (1.0, Point3::new(1.0, 0.0, 3.0))]).unwrap();
        assert!(observing_subset(&high).is_empty());
        let alt = Trajectory::from_points(
            0,
            2.0,
            (0..6).map(|i| (i as f64, Point3::new(i as f64, 0.0, if i % 2 == 0 { 2.0 } else { 4.0 }))),
        )
        .unwrap();
        let sub = observing_subset(&alt);
        assert_eq!(sub.samples().iter().map(|s| s.t).collect::<Vec<_>>(), vec![0.0, 2.0, 4.0]);
    }

    #[test]
    fn timestamps_must_increase() {
        let mut tr = Trajectory::new(0, 1.0);
        tr.push(0.0, Point3::new(0.0, 0.0, 1.0)).unwrap();
        assert!(tr.push(0.0, Point3::new(0.0, 0.0, 1.0)).is_err());
        assert!(Trajectory::new(0, 1.0).push(-1.0, Point3::default()).is_err());
    }

    #[test]
    fn stationary_disc_area() {
        let env = Environment::empty([10.0, 10.0], 2.0, 1.0).unwrap();
        let tr = Trajectory::planar(0, 2.0, [(0.0, Point2::new(5.0, 5.0))]).unwrap();
        let region = swept_area(&MultiPath::new(vec![tr]).unwrap(), &env, 0.02).unwrap();
        assert!((region.area() - std::f64::consts::PI).abs() <= 0.05, "{}", region.area());
    }

    #[test]
    fn hovering_high_sweeps_nothing() {
        let env = Environment::empty([10.0, 10.0], 2.0, 1.0).unwrap();
        let tr = Trajectory::from_points(0, 2.0, [(0.0, Point3::new(5.0, 5.0, 3.0)), (9.0, Point3::new(5.0, 5.0, 3.0))]).unwrap();
        let region = swept_area(&MultiPath::new(vec![tr]).unwrap(), &env, 0.1).unwrap();
        assert_eq!(region.marked_count(), 0);
    }

    #[test]
    fn swept_cells_exclude_buildings() {
        let env = tower_world();
        let tr = Trajectory::planar(0, 3.0, [(0.0, Point2::new(6.5, 5.0))]).unwrap();
        let region = swept_area(&MultiPath::new(vec![tr]).unwrap(), &env, 0.05).unwrap();
        let free = env.free_mask(&region.grid);
        assert!(region.marked_count() > 0);
        assert!(region.marked.iter().zip(&free).all(|(&m, &f)| !m || f));
    }

    #[test]
    fn swept_area_rejects_bad_cell() {
        let env = tower_world();
        assert!(swept_area(&MultiPath::default(), &env, 0.0).is_err());
    }

    #[test]
    fn fly_over_without_crossings_is_identity() {
        let env = tower_world();
        let tr = line(&[(0.0, 1.0), (9.0, 1.0), (9.0, 9.0)], 1.0, 3.0);
        assert_eq!(fly_over_buildings(&tr, &env, &FlyOverParams::default()).unwrap(), tr);
    }

    #[test]
    fn fly_over_profile_across_tower() {
        let env = tower_world();
        let tr = line(&[(0.0, 5.0), (10.0, 5.0)], 1.0, 3.0);
        let out = fly_over_buildings(&tr, &env, &FlyOverParams::default()).unwrap();
        let hs: Vec<f64> = out.samples().iter().map(|s| s.pos.h).collect();
        assert_eq!(hs, vec![3.0, 3.0, 6.0, 6.0, 3.0, 3.0]);
        for s in out.samples() {
            assert_eq!(s.observing, s.pos.h == 3.0);
            assert!(!env.buildings[0].contains_3d(s.pos));
        }
        // Two 3 m vertical legs at 1 m/s.
        assert!((out.duration() - (10.0 + 6.0)).abs() < 1e-9);
    }

    #[test]
    fn grazing_edge_counts_as_crossing() {
        let env = tower_world();
        let tr = line(&[(0.0, 6.0), (10.0, 6.0)], 1.0, 3.0);
        let out = fly_over_buildings(&tr, &env, &FlyOverParams::default()).unwrap();
        assert!(out.samples().iter().any(|s| s.pos.h > 3.0));
        assert_eq!(env.segment_building_crossings(Point2::new(0.0, 6.0), Point2::new(10.0, 6.0)).len(), 1);
    }

    #[test]
    fn fly_over_ceiling_error_names_building() {
        let env = Environment::new(
            [10.0, 10.0],
            vec![Building::new(Rect::new(4.0, 4.0, 6.0, 6.0), 5.0)],
            3.0,
            1.0,
            5.5,
        )
        .unwrap();
        let tr = line(&[(0.0, 5.0), (10.0, 5.0)], 1.0, 3.0);
        match fly_over_buildings(&tr, &env, &FlyOverParams::default()) {
            Err(CoverageError::CeilingTooLow { index, .. }) => assert_eq!(index, 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn path_starting_on_a_roof_starts_high() {
        let env = tower_world();
        let tr = line(&[(5.0, 5.0), (9.0, 5.0)], 1.0, 3.0);
        let out = fly_over_buildings(&tr, &env, &FlyOverParams::default()).unwrap();
        assert_eq!(out.first().unwrap().pos.h, 6.0);
        assert_eq!(out.last().unwrap().pos.h, 3.0);
    }

    fn unit_square() -> Trajectory {
        line(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.0, 0.0)], 1.0, 1.0)
    }

    #[test]
    fn rotate_by_zero_and_full_length() {
        let sq = unit_square();
        assert_eq!(rotate_cycle(&sq, 0.0).unwrap(), sq);
        assert_eq!(rotate_cycle(&sq, 4.0).unwrap(), sq);
    }

    #[test]
    fn rotate_by_one_side_starts_at_next_corner() {
        let r = rotate_cycle(&unit_square(), 1.0).unwrap();
        let pts: Vec<(f64, f64)> = r.samples().iter().map(|s| (s.pos.x, s.pos.y)).collect();
        assert_eq!(pts, vec![(1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(r.first().unwrap().t, 0.0);
        assert!((r.arc_length() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn rotate_mid_edge() {
        let r = rotate_cycle(&unit_square(), 2.5).unwrap();
        let first = r.first().unwrap().pos;
        assert!((first.x - 0.5).abs() < 1e-12 && (first.y - 1.0).abs() < 1e-12);
        assert!(r.is_closed());
        assert!((r.duration() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn rotate_open_path_fails() {
        assert!(rotate_cycle(&line(&[(0.0, 0.0), (1.0, 0.0)], 1.0, 1.0), 0.5).is_err());
    }

    #[test]
    fn concat_cases() {
        let p = line(&[(0.0, 0.0), (1.0, 0.0)], 1.0, 1.0);
        let empty = Trajectory::new(0, 1.0);
        assert_eq!(concat(&p, &empty).unwrap(), p);
        assert_eq!(concat(&empty, &p).unwrap(), p);
        let q = line(&[(1.0, 0.0), (1.0, 1.0)], 1.0, 1.0);
        let pq = concat(&p, &q).unwrap();
        assert_eq!(pq.len(), 3);
        assert_eq!(pq.samples().iter().map(|s| s.t).collect::<Vec<_>>(), vec![0.0, 1.0, 2.0]);
        let far = line(&[(5.0, 0.0), (6.0, 0.0)], 1.0, 1.0);
        assert!(concat(&p, &far).is_err());
    }

    #[test]
    fn csv_header_and_precision() {
        let p = line(&[(0.0, 0.0), (1.0, 0.5)], 1.0, 1.0);
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x,y,h,observing"));
        assert_eq!(lines.next(), Some("0.000000,0.000000,0.000000,1.000000,1"));
        let back = Trajectory::read_csv(0, 1.0, text.as_bytes()).unwrap();
        assert_eq!(back.len(), 2);
    }

    #[test]
    fn position_at_interpolates() {
        let p = line(&[(0.0, 0.0), (2.0, 0.0)], 1.0, 1.0);
        assert_eq!(p.position_at(1.0).unwrap(), Point3::new(1.0, 0.0, 1.0));
        assert_eq!(p.position_at(-1.0).unwrap(), Point3::new(0.0, 0.0, 1.0));
        assert_eq!(p.position_at(5.0).unwrap(), Point3::new(2.0, 0.0, 1.0));
    }
}
