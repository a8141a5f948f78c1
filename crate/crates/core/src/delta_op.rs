//! The periodic Laplacian on `[−L, L]` with a δ-interaction of strength `γ`
//! at the origin, i.e. `−Δ_γ = −d²/dx²` on functions with the jump
//! `f′(0+) − f′(0−) = γ f(0)` (formally `−Δ + γδ`).
//!
//! Closed forms are written for general `L`; `γ = +∞` is the Dirichlet
//! condition `f(0) = 0`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI, SQRT_2};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::matrix::CyclicTridiagonal;
use crate::roots::bisect;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Coupling {
    Finite(f64),
    /// `γ = +∞`, the Dirichlet condition at the defect.
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaOperator {
    pub coupling: Coupling,
    pub half_period: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EigenKind {
    /// `cosh(μ(|x|−L))`, eigenvalue `−μ²`.
    NegativeBoundState,
    /// `cos(κ(|x|−L))`, even, eigenvalue `κ²`.
    InteriorRoot,
    /// `sin(κx)`, odd, eigenvalue `κ² = (jπ/L)²`.
    IntegerSine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaEigenpair {
    pub kind: EigenKind,
    pub eigenvalue: f64,
    /// `μ` for the bound state, `κ` otherwise.
    pub wavenumber: f64,
    pub half_period: f64,
}

impl DeltaEigenpair {
    /// Unnormalized eigenfunction at `x ∈ [−L, L]`.
    pub fn eval(&self, x: f64) -> f64 {
        let l = self.half_period;
        match self.kind {
            EigenKind::NegativeBoundState => (self.wavenumber * (x.abs() - l)).cosh(),
            EigenKind::InteriorRoot => (self.wavenumber * (x.abs() - l)).cos(),
            EigenKind::IntegerSine => (self.wavenumber * x).sin(),
        }
    }

    /// Residual of the characteristic equation for this eigenpair and `γ`.
    pub fn characteristic_residual(&self, gamma: f64) -> f64 {
        let l = self.half_period;
        let w = self.wavenumber;
        match self.kind {
            EigenKind::NegativeBoundState => gamma + 2.0 * w * (w * l).tanh(),
            EigenKind::InteriorRoot => gamma * (w * l).cos() - 2.0 * w * (w * l).sin(),
            EigenKind::IntegerSine => (w * l).sin(),
        }
    }
}

impl DeltaOperator {
    pub fn new(coupling: Coupling, half_period: f64) -> Result<Self> {
        if !(half_period > 0.0 && half_period.is_finite()) {
            return Err(Error::Domain(format!("half period must be positive, got {half_period}")));
        }
        if let Coupling::Finite(g) = coupling {
            if !g.is_finite() {
                return Err(Error::Domain(format!("γ must be finite or Dirichlet, got {g}")));
            }
        }
        Ok(DeltaOperator { coupling, half_period })
    }

    pub fn finite(gamma: f64, half_period: f64) -> Result<Self> {
        Self::new(Coupling::Finite(gamma), half_period)
    }

    fn gamma(&self) -> Option<f64> {
        match self.coupling {
            Coupling::Finite(g) => Some(g),
            Coupling::Dirichlet => None,
        }
    }

    /// The unique negative eigenvalue `−μ²`, `γ = −2μ tanh(μL)`; only for `γ < 0`.
    pub fn negative_eigenvalue(&self) -> Result<DeltaEigenpair> {
        let l = self.half_period;
        let g = match self.gamma() {
            Some(g) if g < 0.0 => g,
            _ => return Err(Error::Domain("a negative eigenvalue exists only for γ < 0".into())),
        };
        let f = |mu: f64| 2.0 * mu * (mu * l).tanh() + g;
        let mut hi = 1.0 / l + 0.5 * g.abs();
        while f(hi) <= 0.0 {
            hi *= 2.0;
        }
        let mu = bisect(f, 0.0, hi, 0.0)?;
        Ok(DeltaEigenpair { kind: EigenKind::NegativeBoundState, eigenvalue: -mu * mu, wavenumber: mu, half_period: l })
    }

    /// The first `count` even (transcendental) eigenvalues together with the
    /// first `count` odd integer-sine eigenvalues, ascending.
    ///
    /// For `γ < 0` the roots of `cot(κL) = 2κ/γ` lie in `((j−½)π/L, jπ/L)`,
    /// for `γ > 0` in `(jπ/L, (j+½)π/L)`, `j ≥ 0`. For `γ = +∞` they sit
    /// at `(j+½)π/L`, for `γ = 0` at `jπ/L`.
    pub fn positive_eigenvalues(&self, count: usize) -> Result<Vec<DeltaEigenpair>> {
        let l = self.half_period;
        let mut out = Vec::with_capacity(2 * count);
        let mut push = |kind, w: f64| out.push(DeltaEigenpair { kind, eigenvalue: w * w, wavenumber: w, half_period: l });
        for j in 0..count {
            let kappa = match self.coupling {
                Coupling::Dirichlet => (j as f64 + 0.5) * PI / l,
                Coupling::Finite(g) if g == 0.0 => j as f64 * PI / l,
                Coupling::Finite(g) => {
                    let (a, b) = if g < 0.0 {
                        ((j as f64 + 0.5) * PI, (j as f64 + 1.0) * PI)
                    } else {
                        (j as f64 * PI, (j as f64 + 0.5) * PI)
                    };
                    let s = bisect(|s| g * s.cos() - 2.0 * (s / l) * s.sin(), a, b, 0.0)?;
                    s / l
                }
            };
            push(EigenKind::InteriorRoot, kappa);
            push(EigenKind::IntegerSine, (j + 1) as f64 * PI / l);
        }
        out.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue));
        Ok(out)
    }

    /// The bound state (if any) followed by [`positive_eigenvalues`](Self::positive_eigenvalues).
    pub fn spectrum(&self, count: usize) -> Result<Vec<DeltaEigenpair>> {
        let mut v = Vec::new();
        if matches!(self.gamma(), Some(g) if g < 0.0) {
            v.push(self.negative_eigenvalue()?);
        }
        v.extend(self.positive_eigenvalues(count)?);
        Ok(v)
    }

    /// Second-order periodic finite differences, `2/h²` on the diagonal,
    /// `−1/h²` off it, plus `γ/h` at the defect node.
    pub fn discretize(&self, n: usize) -> Result<CyclicTridiagonal> {
        let g = self
            .gamma()
            .ok_or_else(|| Error::Domain("the Dirichlet coupling has no finite-difference matrix here".into()))?;
        let grid = Grid::new(n, self.half_period)?;
        let h = grid.h();
        let mut diag = vec![2.0 / (h * h); n];
        diag[grid.origin()] += g / h;
        CyclicTridiagonal::new(diag, -1.0 / (h * h))
    }

    /// Applies `(−Δ_γ − k²)⁻¹` to grid samples of `f` by the Krein formula,
    /// convolutions by the trapezoid rule.
    pub fn resolvent_apply(&self, k: Complex64, grid: &Grid, f: &[Complex64]) -> Result<Vec<Complex64>> {
        let l = self.half_period;
        if grid.half_period() != l || f.len() != grid.n() {
            return Err(Error::GridMismatch("resolvent samples do not match the operator".into()));
        }
        let n = grid.n();
        let h = grid.h();
        let kern: Vec<Complex64> =
            (0..n).map(|d| resolvent_kernel(k, grid.abs_x((d + n / 2) % n), l)).collect::<Result<_>>()?;
        // kern[d] = J(d·h) with d taken modulo n
        let j_at = |i: usize, j: usize| kern[(i + n - j) % n];
        let o = grid.origin();
        let ik = Complex64::new(0.0, 1.0) * k;
        let coth = (ik * l).cosh() / (ik * l).sinh();
        let c = match self.coupling {
            Coupling::Finite(g) => 2.0 * ik * g / (4.0 * l * l * (2.0 * ik + g * coth)),
            Coupling::Dirichlet => 2.0 * ik / (4.0 * l * l * coth),
        };
        let pair: Complex64 = (0..n).map(|j| f[j] * j_at(o, j)).sum::<Complex64>() * h;
        Ok((0..n)
            .map(|i| {
                let conv: Complex64 = (0..n).map(|j| j_at(i, j) * f[j]).sum::<Complex64>() * (h / (2.0 * l));
                conv - c * pair * j_at(i, o)
            })
            .collect())
    }
}

/// Whether the nonnegative part of a spectrum strictly alternates between
/// interior roots and the integer-sine values `(jπ/L)²`, starting with a root.
pub fn interleaves(pairs: &[DeltaEigenpair]) -> bool {
    let v: Vec<&DeltaEigenpair> = pairs.iter().filter(|p| p.kind != EigenKind::NegativeBoundState).collect();
    v.iter().enumerate().all(|(i, p)| {
        let kind = if i % 2 == 0 { EigenKind::InteriorRoot } else { EigenKind::IntegerSine };
        p.kind == kind
    }) && v.windows(2).all(|w| w[0].eigenvalue < w[1].eigenvalue)
}

/// Free periodic resolvent kernel `J_k(ξ) = 2L cosh(ik(|ξ|−L)) / (2ik sinh(ikL))`,
/// normalized so that `(1/2L) ∫ J_k(x−y) f(y) dy` inverts `−d²/dx² − k²`.
pub fn resolvent_kernel(k: Complex64, xi: f64, half_period: f64) -> Result<Complex64> {
    let l = half_period;
    let ik = Complex64::new(0.0, 1.0) * k;
    let den = 2.0 * ik * (ik * l).sinh();
    if den.norm() < 1e-13 * (1.0 + k.norm()) {
        return Err(Error::Pole(format!("{k}")));
    }
    let t = xi.abs().min(2.0 * l);
    Ok(2.0 * l * (ik * (t - l)).cosh() / den)
}

const BETA: Complex64 = Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);

/// The deficiency element solving `−g″ = −i g` away from the defect,
/// `g(x) = cosh(β(|x|−L)) / (2β sinh(βL))`, `β = (1+i)/√2`.
pub fn deficiency_element(x: f64, half_period: f64) -> Complex64 {
    let l = half_period;
    (BETA * (x.abs() - l)).cosh() / (2.0 * BETA * (BETA * l).sinh())
}

/// `‖g‖²` on `[−L, L]`, `(√2/4)(sinh √2L + sin √2L)/(cosh √2L − cos √2L)`.
pub fn deficiency_norm_squared(half_period: f64) -> f64 {
    let s = SQRT_2 * half_period;
    SQRT_2 / 4.0 * (s.sinh() + s.sin()) / (s.cosh() - s.cos())
}

/// Grid samples of `g / ‖g‖`.
pub fn deficiency_samples(grid: &Grid) -> Vec<Complex64> {
    let norm = deficiency_norm_squared(grid.half_period()).sqrt();
    (0..grid.n()).map(|i| deficiency_element(grid.x(i), grid.half_period()) / norm).collect()
}

fn strength_parts(theta: f64, half_period: f64) -> (f64, f64) {
    let s = SQRT_2 * half_period;
    let sinh2 = 0.5 * (s.cosh() - s.cos());
    let alpha = 0.5 * theta - FRAC_PI_4;
    let num = -4.0 * sinh2 * (0.5 * theta).cos();
    let den = s.sinh() * alpha.cos() + s.sin() * alpha.sin();
    (num, den)
}

/// Coupling of the self-adjoint extension with parameter `θ`, domain
/// `ψ + λ(g_i + e^{iθ} g_{−i})`:
/// `γ(θ) = −4|sinh βL|² cos(θ/2) / [sinh(√2L) cos(θ/2−π/4) + sin(√2L) sin(θ/2−π/4)]`.
/// Returns [`Coupling::Dirichlet`] at the pole.
pub fn strength_from_theta(theta: f64, half_period: f64) -> Result<Coupling> {
    if !(0.0..2.0 * PI).contains(&theta) {
        return Err(Error::Domain(format!("θ must lie in [0, 2π), got {theta}")));
    }
    let (num, den) = strength_parts(theta, half_period);
    let s = SQRT_2 * half_period;
    if den.abs() <= 1e-15 * (s.sinh().abs() + s.sin().abs()) {
        return Ok(Coupling::Dirichlet);
    }
    Ok(Coupling::Finite(num / den))
}

/// The pole `θ₀ ∈ [0, 2π)` of [`strength_from_theta`].
pub fn theta_pole(half_period: f64) -> f64 {
    let s = SQRT_2 * half_period;
    // sinh(s) cos α + sin(s) sin α = 0 with α = θ/2 − π/4 ∈ [−π/4, 3π/4)
    let mut alpha = (-s.sinh()).atan2(s.sin());
    while alpha < -FRAC_PI_4 {
        alpha += PI;
    }
    while alpha >= 3.0 * FRAC_PI_4 {
        alpha -= PI;
    }
    2.0 * (alpha + FRAC_PI_4)
}

/// Inverse of [`strength_from_theta`], `θ ∈ [0, 2π)`.
pub fn theta_from_strength(coupling: Coupling, half_period: f64) -> Result<f64> {
    let t0 = theta_pole(half_period);
    let g = match coupling {
        Coupling::Dirichlet => return Ok(t0),
        Coupling::Finite(g) => g,
    };
    // on (θ₀ − 2π, θ₀) the map increases from −∞ to +∞
    let f = |t: f64| {
        let (num, den) = strength_parts(t, half_period);
        num / den - g
    };
    let eps = 1e-12;
    let t = bisect(f, t0 - 2.0 * PI + eps, t0 - eps, 0.0)?;
    Ok(if t < 0.0 { t + 2.0 * PI } else { t })
}
