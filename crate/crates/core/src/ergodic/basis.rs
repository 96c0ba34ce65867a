//! Cosine basis on the ground rectangle.
//!
//! Mode `(K1', K2')` has wavenumbers `k1 = K1' π / L1`, `k2 = K2' π / L2`
//! and basis function `f_k(x) = cos(k1 x1) cos(k2 x2) / h_k`, where `h_k`
//! makes `f_k` unit-norm on `[0, L1] x [0, L2]`.

use std::f64::consts::PI;

use crate::geom::Point2;

/// How the per-mode weights `Λ_k` are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// `Λ_k = (1 + |k|²)^(-3/2)` with `|k|` the norm of the index pair.
    #[default]
    Sobolev,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub index: [usize; 2],
    pub k: [f64; 2],
    pub h_k: f64,
    /// Unscaled weight; see [`ModeGrid::lambda`].
    pub weight: f64,
}

/// `h_k = (∫∫ cos²(k1 x1) cos²(k2 x2))^(1/2)` in closed form.
pub fn normalizer_h_k(index: [usize; 2], extent: [f64; 2]) -> f64 {
    let a = |i: usize, l: f64| if i == 0 { l } else { 0.5 * l };
    (a(index[0], extent[0]) * a(index[1], extent[1])).sqrt()
}

pub fn basis_f_k(mode: &Mode, x: Point2) -> f64 {
    (mode.k[0] * x.x).cos() * (mode.k[1] * x.y).cos() / mode.h_k
}

pub fn grad_f_k(mode: &Mode, x: Point2) -> Point2 {
    let (s1, c1) = (mode.k[0] * x.x).sin_cos();
    let (s2, c2) = (mode.k[1] * x.y).sin_cos();
    Point2::new(-mode.k[0] * s1 * c2 / mode.h_k, -mode.k[1] * c1 * s2 / mode.h_k)
}

/// The full `(K1 + 1) x (K2 + 1)` set of modes, index-major in `K1'`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid {
    pub k_max: [usize; 2],
    pub extent: [f64; 2],
    pub weighting: Weighting,
    lambda_scale: f64,
    modes: Vec<Mode>,
}

impl ModeGrid {
    pub fn new(k_max: [usize; 2], extent: [f64; 2], weighting: Weighting) -> Self {
        let mut modes = Vec::with_capacity((k_max[0] + 1) * (k_max[1] + 1));
        for i1 in 0..=k_max[0] {
            for i2 in 0..=k_max[1] {
                let index = [i1, i2];
                let weight = match weighting {
                    Weighting::Sobolev => (1.0 + (i1 * i1 + i2 * i2) as f64).powf(-1.5),
                    Weighting::Uniform => 1.0,
                };
                modes.push(Mode {
                    index,
                    k: [i1 as f64 * PI / extent[0], i2 as f64 * PI / extent[1]],
                    h_k: normalizer_h_k(index, extent),
                    weight,
                });
            }
        }
        ModeGrid {
            k_max,
            extent,
            weighting,
            lambda_scale: 1.0,
            modes,
        }
    }

    /// Multiplies every `Λ_k` by `c > 0`.
    pub fn with_lambda_scale(mut self, c: f64) -> Self {
        assert!(c > 0.0, "lambda scale must be positive");
        self.lambda_scale *= c;
        self
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn lambda(&self, k: usize) -> f64 {
        self.lambda_scale * self.modes[k].weight
    }

    fn tables(&self, x: Point2) -> AxisTables {
        let axis = |n: usize, k: f64, v: f64| -> (Vec<f64>, Vec<f64>) {
            (0..=n).map(|i| (i as f64 * k * v).sin_cos()).map(|(s, c)| (c, s)).unzip()
        };
        let (c1, s1) = axis(self.k_max[0], PI / self.extent[0], x.x);
        let (c2, s2) = axis(self.k_max[1], PI / self.extent[1], x.y);
        AxisTables { c1, s1, c2, s2 }
    }

    /// `f_k(x)` for every mode, written into `out`.
    pub fn eval_all(&self, x: Point2, out: &mut [f64]) {
        let t = self.tables(x);
        for (o, m) in out.iter_mut().zip(&self.modes) {
            *o = t.c1[m.index[0]] * t.c2[m.index[1]] / m.h_k;
        }
    }

    /// `Σ_k w_k ∇f_k(x)`.
    pub fn weighted_gradient(&self, w: &[f64], x: Point2) -> Point2 {
        let t = self.tables(x);
        let (mut gx, mut gy) = (0.0, 0.0);
        for (wk, m) in w.iter().zip(&self.modes) {
            let [i1, i2] = m.index;
            let s = wk / m.h_k;
            gx -= s * m.k[0] * t.s1[i1] * t.c2[i2];
            gy -= s * m.k[1] * t.c1[i1] * t.s2[i2];
        }
        Point2::new(gx, gy)
    }
}

struct AxisTables {
    c1: Vec<f64>,
    s1: Vec<f64>,
    c2: Vec<f64>,
    s2: Vec<f64>,
}
