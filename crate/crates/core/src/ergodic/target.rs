use std::io::Write;

use crate::env::Environment;
use crate::error::{CoverageError, Result};
use crate::geom::GroundGrid;

use super::basis::ModeGrid;

const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    /// Uniform over the whole rectangle, buildings ignored.
    Vacant,
    /// Uniform over free ground, zero on footprints.
    Free,
    Custom,
}

/// Desired coverage density sampled on a ground grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetDistribution {
    kind: TargetKind,
    extent: [f64; 2],
    grid: GroundGrid,
    density: Vec<f64>,
}

impl TargetDistribution {
    pub fn vacant(env: &Environment, cell_size: f64) -> Result<Self> {
        let grid = GroundGrid::new(env.extent, cell_size);
        let v = 1.0 / env.area();
        Ok(TargetDistribution {
            kind: TargetKind::Vacant,
            extent: env.extent,
            grid,
            density: vec![v; grid.len()],
        })
    }

    pub fn free(env: &Environment, cell_size: f64) -> Result<Self> {
        let grid = GroundGrid::new(env.extent, cell_size);
        let mask = env.free_mask(&grid);
        let free = mask.iter().filter(|&&f| f).count();
        if free == 0 {
            return Err(CoverageError::NoFreeSpace);
        }
        let v = 1.0 / (free as f64 * grid.cell_area());
        Ok(TargetDistribution {
            kind: TargetKind::Free,
            extent: env.extent,
            grid,
            density: mask.iter().map(|&f| if f { v } else { 0.0 }).collect(),
        })
    }

    pub fn custom(extent: [f64; 2], grid: GroundGrid, density: Vec<f64>) -> Result<Self> {
        if density.len() != grid.len() {
            return Err(CoverageError::InvalidParameter(format!(
                "density has {} values for {} cells",
                density.len(),
                grid.len()
            )));
        }
        if density.iter().any(|&d| !(d >= 0.0)) {
            return Err(CoverageError::InvalidParameter("density must be non-negative".into()));
        }
        let t = TargetDistribution {
            kind: TargetKind::Custom,
            extent,
            grid,
            density,
        };
        t.check_normalized()?;
        Ok(t)
    }

    pub fn kind(&self) -> TargetKind {
        self.kind
    }

    pub fn extent(&self) -> [f64; 2] {
        self.extent
    }

    pub fn grid(&self) -> &GroundGrid {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn total_mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.grid.cell_area()
    }

    fn check_normalized(&self) -> Result<()> {
        let m = self.total_mass();
        if (m - 1.0).abs() > NORMALIZATION_TOL {
            return Err(CoverageError::Unnormalized(m));
        }
        Ok(())
    }

    /// `μ_k = ⟨μ, f_k⟩` by midpoint quadrature on the density grid.
    pub fn spectral_mu(&self, modes: &ModeGrid) -> Result<Vec<f64>> {
        self.check_normalized()?;
        if modes.extent != self.extent {
            return Err(CoverageError::InvalidParameter(format!(
                "mode grid extent {:?} differs from target extent {:?}",
                modes.extent, self.extent
            )));
        }
        let g = &self.grid;
        let cos_table = |n: usize, count: usize, step: f64, center: &dyn Fn(usize) -> f64| -> Vec<Vec<f64>> {
            (0..=n)
                .map(|k| (0..count).map(|i| (k as f64 * step * center(i)).cos()).collect())
                .collect()
        };
        let cx = cos_table(modes.k_max[0], g.nx, std::f64::consts::PI / self.extent[0], &|i| g.x_center(i));
        let cy = cos_table(modes.k_max[1], g.ny, std::f64::consts::PI / self.extent[1], &|j| g.y_center(j));
        // Row sums against the x tables first: partial[k1][j].
        let partial: Vec<Vec<f64>> = cx
            .iter()
            .map(|row| {
                (0..g.ny)
                    .map(|j| {
                        let cells = &self.density[j * g.nx..(j + 1) * g.nx];
                        cells.iter().zip(row).map(|(d, c)| d * c).sum()
                    })
                    .collect()
            })
            .collect();
        Ok(modes
            .modes()
            .iter()
            .map(|m| {
                let s: f64 = partial[m.index[0]]
                    .iter()
                    .zip(&cy[m.index[1]])
                    .map(|(p, c)| p * c)
                    .sum();
                s * g.cell_area() / m.h_k
            })
            .collect())
    }

    /// Row-major dump, one value per line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "density")?;
        for d in &self.density {
            writeln!(w, "{d:.9e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Building;
    use crate::ergodic::basis::Weighting;
    use crate::geom::Rect;

    #[test]
    fn uniform_on_unit_square() {
        let env = Environment::empty([1.0, 1.0], 1.0, 0.1).unwrap();
        let t = TargetDistribution::vacant(&env, 0.01).unwrap();
        let modes = ModeGrid::new([6, 6], [1.0, 1.0], Weighting::Sobolev);
        let mu = t.spectral_mu(&modes).unwrap();
        assert!((mu[0] - 1.0).abs() < 1e-12);
        for v in &mu[1..] {
            assert!(v.abs() <= 1e-6, "{v}");
        }
    }

    #[test]
    fn free_target_zero_on_footprints() {
        let env = Environment::with_default_ceiling(
            [1.0, 1.0],
            vec![Building::new(Rect::new(0.2, 0.2, 0.5, 0.6), 3.0)],
            1.0,
            0.1,
        )
        .unwrap();
        let t = TargetDistribution::free(&env, 0.01).unwrap();
        let mask = env.free_mask(t.grid());
        for (d, f) in t.density().iter().zip(mask) {
            assert_eq!(*d == 0.0, !f);
        }
        assert!((t.total_mass() - 1.0).abs() < 1e-9);
        let modes = ModeGrid::new([3, 3], [1.0, 1.0], Weighting::Sobolev);
        let mu = t.spectral_mu(&modes).unwrap();
        assert!((mu[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unnormalized_density_is_rejected() {
        let grid = GroundGrid::new([1.0, 1.0], 0.5);
        assert!(matches!(
            TargetDistribution::custom([1.0, 1.0], grid, vec![2.0; 4]),
            Err(CoverageError::Unnormalized(_))
        ));
        assert!(TargetDistribution::custom([1.0, 1.0], grid, vec![4.0, 0.0, 0.0, 0.0]).is_ok());
    }

    #[test]
    fn fully_built_world_has_no_free_target() {
        let env = Environment::with_default_ceiling(
            [1.0, 1.0],
            vec![Building::new(Rect::new(0.0, 0.0, 1.0, 1.0), 3.0)],
            1.0,
            0.1,
        )
        .unwrap();
        assert_eq!(TargetDistribution::free(&env, 0.1), Err(CoverageError::NoFreeSpace));
    }
}
