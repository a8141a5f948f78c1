//! Centered periodic grid on `[−L, L)` with the defect at a node.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    n: usize,
    half_period: f64,
}

impl Grid {
    /// `n` even and at least 8; nodes `xᵢ = (i − n/2) h`, `h = 2L/n`.
    pub fn new(n: usize, half_period: f64) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::Domain(format!("grid size must be even and ≥ 8, got {n}")));
        }
        if !(half_period > 0.0 && half_period.is_finite()) {
            return Err(Error::Domain(format!("half period must be positive, got {half_period}")));
        }
        Ok(Grid { n, half_period })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_period(&self) -> f64 {
        self.half_period
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_period / self.n as f64
    }

    /// Index of the node at `x = 0`.
    pub fn origin(&self) -> usize {
        self.n / 2
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.h()
    }

    /// `|xᵢ|`, computed from the index offset so mirrored nodes agree bitwise.
    pub fn abs_x(&self, i: usize) -> f64 {
        (i as isize - (self.n / 2) as isize).unsigned_abs() as f64 * self.h()
    }

    /// Index of the mirror image of node `i` under `x ↦ −x`.
    pub fn reflect(&self, i: usize) -> usize {
        (self.n - i) % self.n
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// `v − Rv` in the max norm, relative to `max |v|`.
    pub fn reflection_residual(&self, v: &[f64], sign: f64) -> f64 {
        let scale = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        (0..self.n).map(|i| (v[i] - sign * v[self.reflect(i)]).abs()).fold(0.0, f64::max) / scale
    }
}
