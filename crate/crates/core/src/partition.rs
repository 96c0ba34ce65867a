//! Static coverage by partitioning the ground: Lloyd iteration on a
//! Voronoi labeling and a fixed rectangular tiling.
//!
//! Both partitions are computed on a [`GroundGrid`]; a label per cell
//! names the owning agent.

use std::io::Write;

use crate::env::Environment;
use crate::error::{CoverageError, Result};
use crate::geom::{GroundGrid, Point2};
use crate::traj::{fly_over_buildings, FlyOverParams, MultiPath, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub generators: Vec<Point2>,
    pub grid: GroundGrid,
    /// Owner of every grid cell, row-major.
    pub labels: Vec<usize>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn cell_count(&self, i: usize) -> usize {
        self.labels.iter().filter(|&&l| l == i).count()
    }

    /// Area centroid of every region under uniform density; an empty
    /// region reports its generator.
    pub fn centroids(&self) -> Vec<Point2> {
        let n = self.generators.len();
        let mut sum = vec![(0.0, 0.0, 0usize); n];
        for (idx, &l) in self.labels.iter().enumerate() {
            let c = self.grid.center_of(idx);
            let s = &mut sum[l];
            s.0 += c.x;
            s.1 += c.y;
            s.2 += 1;
        }
        sum.iter()
            .zip(&self.generators)
            .map(|(&(x, y, k), &g)| if k == 0 { g } else { Point2::new(x / k as f64, y / k as f64) })
            .collect()
    }

    pub fn centroid(&self, i: usize) -> Point2 {
        self.centroids()[i]
    }

    /// Row-major label dump with a `label` header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "label")?;
        for l in &self.labels {
            writeln!(w, "{l}")?;
        }
        Ok(())
    }
}

fn check_points(points: &[Point2], extent: [f64; 2]) -> Result<()> {
    if points.is_empty() {
        return Err(CoverageError::InvalidParameter("partition needs at least one generator".into()));
    }
    for p in points {
        if !(p.x >= 0.0 && p.y >= 0.0 && p.x <= extent[0] && p.y <= extent[1]) {
            return Err(CoverageError::OutOfDomain { x: p.x, y: p.y });
        }
    }
    Ok(())
}

fn nearest(sites: &[Point2], c: Point2) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, s) in sites.iter().enumerate() {
        let d = (s.x - c.x).powi(2) + (s.y - c.y).powi(2);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Nearest-generator labeling restricted to the rectangle. Ties go to the
/// lowest index.
pub fn nearest_partition(points: &[Point2], extent: [f64; 2], cell_size: f64) -> Result<Partition> {
    check_points(points, extent)?;
    let grid = GroundGrid::new(extent, cell_size);
    let labels = (0..grid.len()).map(|idx| nearest(points, grid.center_of(idx))).collect();
    Ok(Partition {
        generators: points.to_vec(),
        grid,
        labels,
    })
}

/// Voronoi labeling of the rectangle from the `5n` point set made of the
/// generators and their mirror images across the four walls; cells are
/// kept only where an original generator wins.
pub fn voronoi_partition(points: &[Point2], extent: [f64; 2], cell_size: f64) -> Result<Partition> {
    check_points(points, extent)?;
    let n = points.len();
    let [l1, l2] = extent;
    let mut sites: Vec<Point2> = points.to_vec();
    for p in points {
        sites.push(Point2::new(-p.x, p.y));
        sites.push(Point2::new(2.0 * l1 - p.x, p.y));
        sites.push(Point2::new(p.x, -p.y));
        sites.push(Point2::new(p.x, 2.0 * l2 - p.y));
    }
    let grid = GroundGrid::new(extent, cell_size);
    let mut labels = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        let s = nearest(&sites, grid.center_of(idx));
        if s >= n {
            // A mirror image can only win outside the rectangle.
            return Err(CoverageError::InvalidParameter(format!(
                "cell {idx} was claimed by a reflected generator"
            )));
        }
        labels.push(s);
    }
    Ok(Partition {
        generators: points.to_vec(),
        grid,
        labels,
    })
}

/// Nearest-to-square `rows x cols` tiling with `rows * cols >= n`.
pub fn grid_shape(extent: [f64; 2], n: usize) -> (usize, usize) {
    let mut best = (n, 1);
    let mut best_key = (f64::INFINITY, usize::MAX);
    for c in 1..=n.max(1) {
        let r = n.div_ceil(c);
        let aspect = ((extent[0] / c as f64) / (extent[1] / r as f64)).ln().abs();
        let key = (aspect, r * c - n);
        if key.0 < best_key.0 - 1e-12 || ((key.0 - best_key.0).abs() <= 1e-12 && key.1 < best_key.1) {
            best_key = key;
            best = (r, c);
        }
    }
    best
}

/// Rectangular tiling for `n` agents. Tiles are numbered row-major from
/// the bottom-left; tiles past the `n`-th merge into their left neighbour.
pub fn grid_partition(extent: [f64; 2], n: usize, cell_size: f64) -> Result<Partition> {
    if n == 0 {
        return Err(CoverageError::InvalidParameter("partition needs at least one agent".into()));
    }
    let (rows, cols) = grid_shape(extent, n);
    let grid = GroundGrid::new(extent, cell_size);
    let (w, h) = (extent[0] / cols as f64, extent[1] / rows as f64);
    let labels = (0..grid.len())
        .map(|idx| {
            let c = grid.center_of(idx);
            let col = ((c.x / w) as usize).min(cols - 1);
            let row = ((c.y / h) as usize).min(rows - 1);
            (row * cols + col).min(n - 1)
        })
        .collect();
    let generators = (0..n)
        .map(|t| Point2::new(((t % cols) as f64 + 0.5) * w, ((t / cols) as f64 + 0.5) * h))
        .collect();
    let mut p = Partition { generators, grid, labels };
    p.generators = p.centroids();
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionParams {
    /// Lloyd iterations (one per time step).
    pub iterations: usize,
    /// Largest move per iteration toward the centroid.
    pub step_size: f64,
    pub dt: f64,
    pub u_max: f64,
    pub cell_size: f64,
    /// Stop once no agent moves more than this in an iteration.
    pub tolerance: f64,
    /// Hold at the nearest free cell instead of above a roof.
    pub relocate_to_free: bool,
}

impl Default for PartitionParams {
    fn default() -> Self {
        PartitionParams {
            iterations: 15_000,
            step_size: 0.1,
            dt: 0.1,
            u_max: 1.0,
            cell_size: 0.25,
            tolerance: 1e-9,
            relocate_to_free: false,
        }
    }
}

impl PartitionParams {
    fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.dt > 0.0 && self.u_max > 0.0 && self.cell_size > 0.0) {
            return Err(CoverageError::InvalidParameter(
                "step_size, dt, u_max and cell_size must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Center of the free cell nearest to `p`, or `p` itself when it is free.
pub fn nearest_free_point(env: &Environment, grid: &GroundGrid, mask: &[bool], p: Point2) -> Point2 {
    if !env.obstacle_at(p) {
        return p;
    }
    mask.iter()
        .enumerate()
        .filter(|(_, &f)| f)
        .map(|(idx, _)| grid.center_of(idx))
        .min_by(|a, b| a.dist(p).total_cmp(&b.dist(p)))
        .unwrap_or(p)
}

fn repair_all(paths: Vec<Trajectory>, env: &Environment, u_max: f64) -> Result<MultiPath> {
    let fly = FlyOverParams {
        u_max,
        ..FlyOverParams::default()
    };
    let repaired = paths
        .iter()
        .map(|p| fly_over_buildings(p, env, &fly))
        .collect::<Result<Vec<_>>>()?;
    MultiPath::new(repaired)
}

/// Record of a Lloyd run before repair.
#[derive(Debug, Clone, PartialEq)]
pub struct LloydRun {
    pub paths: Vec<Trajectory>,
    /// Largest single-agent move of each iteration.
    pub movement: Vec<f64>,
    /// Sum of generator-to-centroid distances before each iteration.
    pub residual: Vec<f64>,
    pub final_partition: Partition,
}

/// Lloyd iteration with bounded steps. Each iteration recomputes the
/// partition over the whole rectangle and moves every agent at most
/// `step_size` toward its centroid.
pub fn lloyd(env: &Environment, starts: &[Point2], params: &PartitionParams) -> Result<LloydRun> {
    params.validate()?;
    let mut pos = starts.to_vec();
    let grid = GroundGrid::new(env.extent, params.cell_size);
    let mask = if params.relocate_to_free { env.free_mask(&grid) } else { Vec::new() };
    let mut points: Vec<Vec<(f64, Point2)>> = pos.iter().map(|&p| vec![(0.0, p)]).collect();
    let mut movement = Vec::new();
    let mut residual = Vec::new();
    let mut part = nearest_partition(&pos, env.extent, params.cell_size)?;
    for k in 1..=params.iterations {
        let goals: Vec<Point2> = part
            .centroids()
            .into_iter()
            .map(|c| if params.relocate_to_free { nearest_free_point(env, &grid, &mask, c) } else { c })
            .collect();
        residual.push(pos.iter().zip(&goals).map(|(p, g)| p.dist(*g)).sum());
        let mut max_move: f64 = 0.0;
        for (p, g) in pos.iter_mut().zip(&goals) {
            let d = p.dist(*g);
            let s = d.min(params.step_size);
            if s > 0.0 {
                *p = if s == d { *g } else { p.lerp(*g, s / d) };
            }
            max_move = max_move.max(s);
        }
        movement.push(max_move);
        if max_move <= params.tolerance {
            break;
        }
        for (pts, &p) in points.iter_mut().zip(&pos) {
            pts.push((k as f64 * params.dt, p));
        }
        part = nearest_partition(&pos, env.extent, params.cell_size)?;
    }
    let paths = points
        .into_iter()
        .enumerate()
        .map(|(j, pts)| Trajectory::planar(j, env.optimal_altitude, pts))
        .collect::<Result<Vec<_>>>()?;
    Ok(LloydRun {
        paths,
        movement,
        residual,
        final_partition: part,
    })
}

/// Voronoi coverage: Lloyd iteration from `starts`, then repair over the
/// buildings. An agent whose centroid lies on a footprint ends up hovering
/// above the roof unless `relocate_to_free` is set.
pub fn voronoi_cover(env: &Environment, starts: &[Point2], params: &PartitionParams) -> Result<MultiPath> {
    let run = lloyd(env, starts, params)?;
    repair_all(run.paths, env, params.u_max)
}

/// Grid coverage: one straight flight from each start to its tile
/// centroid, then repair.
pub fn grid_cover(env: &Environment, starts: &[Point2], params: &PartitionParams) -> Result<MultiPath> {
    params.validate()?;
    let part = grid_partition(env.extent, starts.len(), params.cell_size)?;
    let grid = part.grid;
    let mask = if params.relocate_to_free { env.free_mask(&grid) } else { Vec::new() };
    let paths = starts
        .iter()
        .zip(&part.generators)
        .enumerate()
        .map(|(j, (&s, &c))| {
            let goal = if params.relocate_to_free { nearest_free_point(env, &grid, &mask, c) } else { c };
            let d = s.dist(goal);
            let pts = if d > 0.0 { vec![(0.0, s), (d / params.u_max, goal)] } else { vec![(0.0, s)] };
            Trajectory::planar(j, env.optimal_altitude, pts)
        })
        .collect::<Result<Vec<_>>>()?;
    repair_all(paths, env, params.u_max)
}
