//! Standing-wave profiles `φ` solving
//!
//! ```text
//! −φ″ + ωφ − φ³ = 0 on (−L, 0) ∪ (0, L),   φ′(0+) − φ′(0−) = −Z φ(0),
//! ```
//!
//! periodic with period `2L`. The profile is the dnoidal-peak
//! `φ(ξ) = η₁ dn(η₁|ξ|/√2 ± a; k)` with `η₁² + η₂² = 2ω`,
//! `k² = (η₁² − η₂²)/η₁²`, `+a` for `Z > 0` and `−a` for `Z < 0`.
//! The minimum `η₂` is fixed by the period condition `T∓(η₂) = 2L`.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;

use crate::elliptic::{self, complete_k, incomplete_f, jacobi, Modulus};
use crate::error::{Admissibility, Error, Result};
use crate::grid::Grid;
use crate::roots::bisect;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveParams {
    pub omega: f64,
    pub z: f64,
    pub half_period: f64,
}

/// Which shift sign the profile uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// `Z > 0`, `φ = η₁ dn(η₁|ξ|/√2 + a)`, a peak at the defect.
    Positive,
    /// `Z < 0`, `ζ = η₁ dn(η₁|ξ|/√2 − a)`, a dip at the defect.
    Negative,
    /// `Z = 0`, the translation-invariant dnoidal wave.
    Classical,
}

impl Branch {
    pub fn of(z: f64) -> Branch {
        if z > 0.0 {
            Branch::Positive
        } else if z < 0.0 {
            Branch::Negative
        } else {
            Branch::Classical
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Branch::Positive => 1.0,
            Branch::Negative => -1.0,
            Branch::Classical => 0.0,
        }
    }
}

impl WaveParams {
    pub fn new(omega: f64, z: f64, half_period: f64) -> Self {
        WaveParams { omega, z, half_period }
    }

    pub fn branch(&self) -> Branch {
        Branch::of(self.z)
    }

    /// Checks every existence condition, in the order `L > 0`, `ω > Z²/4`,
    /// `ω > π²/(2L²)`, then `2L > T₀` (`Z > 0`) or `2L > T₁` (`Z < 0`).
    pub fn validate(&self) -> Result<()> {
        let WaveParams { omega, z, half_period: l } = *self;
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::Admissibility(Admissibility::NonPositiveHalfPeriod { half_period: l }));
        }
        if !omega.is_finite() || !z.is_finite() {
            return Err(Error::Domain(format!("non-finite parameters ω={omega}, Z={z}")));
        }
        if omega <= z * z / 4.0 {
            return Err(Error::Admissibility(Admissibility::OmegaBelowDefectBound { omega, bound: z * z / 4.0 }));
        }
        let classical = PI * PI / (2.0 * l * l);
        if omega <= classical {
            return Err(Error::Admissibility(Admissibility::OmegaBelowClassical { omega, bound: classical }));
        }
        let two_l = 2.0 * l;
        if z > 0.0 {
            let t0 = threshold_t0(omega, z);
            if two_l <= t0 {
                return Err(Error::Admissibility(Admissibility::PeriodBelowT0 { two_l, t0 }));
            }
        } else if z < 0.0 {
            let t1 = threshold_t1(omega, z);
            if two_l <= t1 {
                return Err(Error::Admissibility(Admissibility::PeriodBelowT1 { two_l, t1 }));
            }
        }
        Ok(())
    }
}

/// Upper end `θ(ω, Z) = −√2|Z|/4 + sqrt(ω − Z²/8)` of the admissible `η₂` range.
pub fn theta_bound(omega: f64, z: f64) -> f64 {
    -SQRT_2 * z.abs() / 4.0 + (omega - z * z / 8.0).sqrt()
}

/// `λ(ω, Z) = √2|Z|/4 + sqrt(ω − Z²/8)`, the value of `η₁` at `η₂ = θ`.
pub fn lambda_bound(omega: f64, z: f64) -> f64 {
    SQRT_2 * z.abs() / 4.0 + (omega - z * z / 8.0).sqrt()
}

pub fn eta1(eta2: f64, omega: f64) -> f64 {
    (2.0 * omega - eta2 * eta2).sqrt()
}

/// `k′ = η₂/η₁`, so `k² = (2ω − 2η₂²)/(2ω − η₂²)`.
pub fn modulus(eta2: f64, omega: f64) -> Result<Modulus> {
    Modulus::from_complement(eta2 / eta1(eta2, omega))
}

fn discriminant(eta2: f64, omega: f64, z: f64) -> f64 {
    let b = 2.0 * omega - z * z / 2.0;
    let c = 2.0 * eta2 * eta1(eta2, omega);
    let d = (b - c) * (b + c);
    if d < 0.0 && d > -1e-12 * b * b { 0.0 } else { d }
}

/// Peak (`Z > 0`) or dip (`Z < 0`) value `Φ = φ(0)`,
/// `Φ² = [(2ω − Z²/2) + √D]/2`, `D = (2ω − Z²/2)² − 4η₂²(2ω − η₂²)`.
pub fn phi_at_zero(eta2: f64, omega: f64, z: f64) -> Result<f64> {
    let d = discriminant(eta2, omega, z);
    if d < 0.0 {
        return Err(Error::Domain(format!("η₂={eta2} beyond θ(ω,Z)={}", theta_bound(omega, z))));
    }
    Ok(((2.0 * omega - z * z / 2.0 + d.sqrt()) / 2.0).sqrt())
}

/// The shift `a ≥ 0` with `dn(a; k) = Φ/η₁`, computed without cancellation as
/// `a = F(arcsin s, k)`, `s = |Z| / (k sqrt(A + √D))`, `A = 2ω − 2η₂² + Z²/2`.
pub fn shift(eta2: f64, omega: f64, z: f64) -> Result<f64> {
    if z == 0.0 {
        return Ok(0.0);
    }
    let d = discriminant(eta2, omega, z);
    if d < 0.0 {
        return Err(Error::Domain(format!("η₂={eta2} beyond θ(ω,Z)={}", theta_bound(omega, z))));
    }
    let m = modulus(eta2, omega)?;
    let a = 2.0 * omega - 2.0 * eta2 * eta2 + z * z / 2.0;
    let s = (z.abs() / (m.k() * (a + d.sqrt()).sqrt())).min(1.0);
    Ok(if s == 1.0 { complete_k(&m) } else { incomplete_f(s.asin(), &m) })
}

/// Same shift through `dn⁻¹(Φ/η₁; k)` by bisection, kept as a cross-check.
pub fn shift_by_inverse_dn(eta2: f64, omega: f64, z: f64) -> Result<f64> {
    let m = modulus(eta2, omega)?;
    let y = (phi_at_zero(eta2, omega, z)? / eta1(eta2, omega)).clamp(m.kp(), 1.0);
    elliptic::inverse_dn(y, &m)
}

/// `T₋(η₂) = (2√2/η₁)(K(k) − a)`, the period of the `Z > 0` branch.
pub fn period_minus(eta2: f64, omega: f64, z: f64) -> Result<f64> {
    let m = modulus(eta2, omega)?;
    Ok(2.0 * SQRT_2 / eta1(eta2, omega) * (complete_k(&m) - shift(eta2, omega, z)?))
}

/// `T₊(η₂) = (2√2/η₁)(K(k) + a)`, the period of the `Z < 0` branch.
pub fn period_plus(eta2: f64, omega: f64, z: f64) -> Result<f64> {
    let m = modulus(eta2, omega)?;
    Ok(2.0 * SQRT_2 / eta1(eta2, omega) * (complete_k(&m) + shift(eta2, omega, z)?))
}

/// `F(η₂, ω) = 2√2 K(k)/η₁`, the period of the classical dnoidal wave.
pub fn classical_period(eta2: f64, omega: f64) -> Result<f64> {
    let m = modulus(eta2, omega)?;
    Ok(2.0 * SQRT_2 * complete_k(&m) / eta1(eta2, omega))
}

fn threshold_parts(omega: f64, z: f64) -> (f64, f64, f64) {
    let s = (omega - z * z / 8.0).sqrt();
    let lam = lambda_bound(omega, z);
    let m0 = Modulus::from_complement(theta_bound(omega, z) / lam).expect("θ ≤ λ");
    let sn2 = 0.5 + z.abs() / (4.0 * SQRT_2 * s);
    let a0 = if sn2 >= 1.0 { complete_k(&m0) } else { incomplete_f(sn2.sqrt().asin(), &m0) };
    (lam, complete_k(&m0), a0)
}

/// `T₀(ω, Z) = (2√2/λ)(K(k₀) − a₀)`, the infimum of `T₋`. Here
/// `k₀² = √2|Z| s/λ²`, `s = sqrt(ω − Z²/8)` and `sn²(a₀; k₀) = ½ + |Z|/(4√2 s)`.
pub fn threshold_t0(omega: f64, z: f64) -> f64 {
    let (lam, kk, a0) = threshold_parts(omega, z);
    2.0 * SQRT_2 / lam * (kk - a0)
}

/// `T₁(ω, Z) = (2√2/λ)(K(k₀) + a₀)`, the value of `T₊` at `η₂ = θ`.
pub fn threshold_t1(omega: f64, z: f64) -> f64 {
    let (lam, kk, a0) = threshold_parts(omega, z);
    2.0 * SQRT_2 / lam * (kk + a0)
}

/// Period map for the branch of `z`.
pub fn period(eta2: f64, omega: f64, z: f64) -> Result<f64> {
    match Branch::of(z) {
        Branch::Positive => period_minus(eta2, omega, z),
        Branch::Negative => period_plus(eta2, omega, z),
        Branch::Classical => classical_period(eta2, omega),
    }
}

/// Solves the period condition for `η₂ ∈ (0, θ)` by bisection to machine
/// precision.
pub fn solve_eta2(params: &WaveParams) -> Result<f64> {
    params.validate()?;
    let WaveParams { omega, z, half_period: l } = *params;
    let top = theta_bound(omega, z);
    let target = 2.0 * l;
    let f = |e: f64| period(e, omega, z).map(|t| t - target).unwrap_or(f64::NAN);
    let lo = top * 1e-200;
    let hi = top * (1.0 - 1e-15);
    if !(f(lo) > 0.0) {
        return Err(Error::Numerical(format!("period 2L={target} too long to bracket")));
    }
    bisect(f, lo, hi, 0.0)
}

/// A built profile with its parameters and grid samples.
#[derive(Debug, Clone, Serialize)]
pub struct WaveProfile {
    pub params: WaveParams,
    pub branch: Branch,
    pub eta1: f64,
    pub eta2: f64,
    pub modulus: Modulus,
    pub shift: f64,
    pub phi0: f64,
    pub period_residual: f64,
    #[serde(skip)]
    pub grid: Grid,
    #[serde(skip)]
    pub values: Vec<f64>,
}

/// Residuals of a built profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileDiagnostics {
    /// `max |−φ″ + ωφ − φ³|` over grid nodes away from 0.
    pub pde_residual: f64,
    /// `|φ′(0+) − φ′(0−) + Zφ(0)|`.
    pub jump_residual: f64,
    /// `1e−6 (1 + |Z| φ(0))`.
    pub jump_tolerance: f64,
    /// `max(|φ(L) − η₂|, |φ(−L) − η₂|)`.
    pub endpoint_residual: f64,
    /// `max |φ′² − ½(η₁² − φ²)(φ² − η₂²)|` over grid nodes.
    pub quadrature_residual: f64,
    pub period_residual: f64,
}

impl ProfileDiagnostics {
    pub fn all_green(&self) -> bool {
        self.pde_residual < 1e-6
            && self.jump_residual < self.jump_tolerance
            && self.endpoint_residual < 1e-10
            && self.quadrature_residual < 1e-8
            && self.period_residual < 1e-12
    }
}

impl WaveProfile {
    fn arg(&self, xi: f64) -> f64 {
        self.eta1 * xi.abs() / SQRT_2 + self.branch.sign() * self.shift
    }

    fn wrap(&self, xi: f64) -> f64 {
        let l = self.params.half_period;
        if xi.abs() <= l {
            xi
        } else {
            (xi + l).rem_euclid(2.0 * l) - l
        }
    }

    /// `φ(ξ)`, extended periodically.
    pub fn eval(&self, xi: f64) -> f64 {
        let xi = self.wrap(xi);
        self.eta1 * jacobi(self.arg(xi), &self.modulus).dn
    }

    /// `φ′(ξ)` from `dn′ = −k² sn cn`; the right derivative at `ξ = 0`.
    pub fn eval_derivative(&self, xi: f64) -> f64 {
        let xi = self.wrap(xi);
        let j = jacobi(self.arg(xi), &self.modulus);
        let sign = if xi < 0.0 { -1.0 } else { 1.0 };
        -sign * self.eta1 * self.eta1 / SQRT_2 * self.modulus.m() * j.sn * j.cn
    }

    /// Natural length scale `√2/η₁` of the profile.
    pub fn scale(&self) -> f64 {
        SQRT_2 / self.eta1
    }

    pub fn diagnostics(&self) -> ProfileDiagnostics {
        let WaveParams { omega, z, half_period: l } = self.params;
        let ell = self.scale();
        // local differencing steps on the analytic profile
        let d2 = 5e-3 * ell;
        let d1 = 1e-3 * ell;
        let f = |x: f64| self.eval(x);
        let mut pde: f64 = 0.0;
        for i in 0..self.grid.n() {
            let x = self.grid.x(i);
            if x.abs() < 3.0 * d2 {
                continue;
            }
            let lap = (-f(x + 2.0 * d2) + 16.0 * f(x + d2) - 30.0 * f(x) + 16.0 * f(x - d2) - f(x - 2.0 * d2))
                / (12.0 * d2 * d2);
            let v = f(x);
            pde = pde.max((-lap + omega * v - v * v * v).abs());
        }
        let one_sided = |s: f64| {
            let g = |j: f64| f(s * j * d1);
            s * (-25.0 * g(0.0) + 48.0 * g(1.0) - 36.0 * g(2.0) + 16.0 * g(3.0) - 3.0 * g(4.0)) / (12.0 * d1)
        };
        let (right, left) = (one_sided(1.0), one_sided(-1.0));
        let jump_residual = (right - left + z * self.phi0).abs();
        let endpoint_residual = (f(l) - self.eta2).abs().max((f(-l) - self.eta2).abs());
        let (e1, e2) = (self.eta1 * self.eta1, self.eta2 * self.eta2);
        let quadrature_residual = (0..self.grid.n())
            .map(|i| {
                let x = self.grid.x(i);
                let (v, dv) = (f(x), self.eval_derivative(x));
                (dv * dv - 0.5 * (e1 - v * v) * (v * v - e2)).abs()
            })
            .fold(0.0, f64::max);
        ProfileDiagnostics {
            pde_residual: pde,
            jump_residual,
            jump_tolerance: 1e-6 * (1.0 + z.abs() * self.phi0),
            endpoint_residual,
            quadrature_residual,
            period_residual: self.period_residual,
        }
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(0.0, |a: f64, v| a.max(v.abs()))
    }
}

/// Solves for `η₂` and samples the profile on the centered `n`-point grid.
pub fn build_profile(params: &WaveParams, n: usize) -> Result<WaveProfile> {
    let grid = Grid::new(n, params.half_period)?;
    let eta2 = solve_eta2(params)?;
    let WaveParams { omega, z, half_period: l } = *params;
    let modulus = modulus(eta2, omega)?;
    let shift = shift(eta2, omega, z)?;
    let e1 = eta1(eta2, omega);
    let period_residual = (period(eta2, omega, z)? - 2.0 * l).abs();
    let mut p = WaveProfile {
        params: *params,
        branch: params.branch(),
        eta1: e1,
        eta2,
        modulus,
        shift,
        phi0: 0.0,
        period_residual,
        grid,
        values: Vec::new(),
    };
    p.phi0 = if z == 0.0 { e1 } else { phi_at_zero(eta2, omega, z)? };
    p.values = (0..n).map(|i| e1 * jacobi(p.arg(grid.abs_x(i)), &modulus).dn).collect();
    Ok(p)
}

/// One entry of the solitary-limit table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolitaryPoint {
    pub eta2: f64,
    pub shift: f64,
    /// `tanh⁻¹(|Z|/(2√ω))`.
    pub shift_limit: f64,
    /// `sup_{|ξ|≤W} |φ(ξ; η₂) − √(2ω) sech(√ω|ξ| + tanh⁻¹(Z/(2√ω)))|`.
    pub sup_error: f64,
}

/// Tracks the profile towards the line soliton with a defect as `η₂ → 0`,
/// on the window `|ξ| ≤ window`.
pub fn solitary_limit(omega: f64, z: f64, eta2_seq: &[f64], window: f64) -> Result<Vec<SolitaryPoint>> {
    if omega <= z * z / 4.0 {
        return Err(Error::Admissibility(Admissibility::OmegaBelowDefectBound { omega, bound: z * z / 4.0 }));
    }
    let shift_limit = (z.abs() / (2.0 * omega.sqrt())).atanh();
    let c = (z / (2.0 * omega.sqrt())).atanh();
    let sign = Branch::of(z).sign();
    eta2_seq
        .iter()
        .map(|&e2| {
            let a = shift(e2, omega, z)?;
            let m = modulus(e2, omega)?;
            let e1 = eta1(e2, omega);
            let samples = 2001;
            let sup = (0..samples)
                .map(|i| {
                    let xi = -window + 2.0 * window * i as f64 / (samples - 1) as f64;
                    let phi = e1 * jacobi(e1 * xi.abs() / SQRT_2 + sign * a, &m).dn;
                    let sol = (2.0 * omega).sqrt() / (omega.sqrt() * xi.abs() + c).cosh();
                    (phi - sol).abs()
                })
                .fold(0.0, f64::max);
            Ok(SolitaryPoint { eta2: e2, shift: a, shift_limit, sup_error: sup })
        })
        .collect()
}
