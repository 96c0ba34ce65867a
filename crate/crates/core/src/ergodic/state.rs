use crate::geom::Point2;

use super::basis::ModeGrid;

/// Running spectral bookkeeping for a team (or a single agent).
///
/// `C_k` integrates `f_k` along every agent's path and `M_k = N t μ_k`
/// is the matching target mass, so `S_k = C_k - M_k` measures how far the
/// time average is from the target.
#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicState {
    c: Vec<f64>,
    m: Vec<f64>,
    mu: Vec<f64>,
    t: f64,
    n: usize,
    scratch: Vec<f64>,
}

impl ErgodicState {
    pub fn new(mu: Vec<f64>, n: usize) -> Self {
        let len = mu.len();
        ErgodicState {
            c: vec![0.0; len],
            m: vec![0.0; len],
            mu,
            t: 0.0,
            n,
            scratch: vec![0.0; len],
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn agents(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn m(&self) -> &[f64] {
        &self.m
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn s_k(&self, k: usize) -> f64 {
        self.c[k] - self.m[k]
    }

    /// Adds `f_k(x_j) dt` for every agent position and advances time.
    pub fn accumulate(&mut self, modes: &ModeGrid, positions: &[Point2], dt: f64) {
        if dt == 0.0 {
            return;
        }
        for &p in positions {
            modes.eval_all(p, &mut self.scratch);
            for (c, f) in self.c.iter_mut().zip(&self.scratch) {
                *c += f * dt;
            }
        }
        self.t += dt;
        let scale = self.n as f64 * self.t;
        for (m, mu) in self.m.iter_mut().zip(&self.mu) {
            *m = scale * mu;
        }
    }

    /// Time-averaged coefficients `c_k = C_k / (N t)`; zero before any time
    /// has passed.
    pub fn coefficients(&self) -> Vec<f64> {
        let d = self.n as f64 * self.t;
        if d == 0.0 {
            return vec![0.0; self.c.len()];
        }
        self.c.iter().map(|c| c / d).collect()
    }

    /// `Φ = Σ Λ_k (c_k - μ_k)²`.
    pub fn metric(&self, modes: &ModeGrid) -> f64 {
        self.coefficients()
            .iter()
            .zip(&self.mu)
            .enumerate()
            .map(|(k, (c, mu))| modes.lambda(k) * (c - mu).powi(2))
            .sum()
    }
}
