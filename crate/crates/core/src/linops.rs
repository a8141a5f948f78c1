//! Linearized operators about a profile `φ`,
//!
//! ```text
//! L₁ = −Δ_{−Z} + ω − 3φ²,   L₂ = −Δ_{−Z} + ω − φ²,
//! ```
//!
//! discretized on the profile grid, and their low-lying spectra.

use serde::Serialize;

use crate::delta_op::DeltaOperator;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::matrix::CyclicTridiagonal;
use crate::quadrature::integrate;
use crate::wave::{build_profile, WaveParams, WaveProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Which {
    L1,
    L2,
}

impl Which {
    fn coefficient(self) -> f64 {
        match self {
            Which::L1 => 3.0,
            Which::L2 => 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LinearizedOperator {
    pub which: Which,
    pub matrix: CyclicTridiagonal,
    pub grid: Grid,
    pub omega: f64,
    pub z: f64,
}

/// Assembles `L₁` or `L₂` on the grid of `profile`.
pub fn assemble(profile: &WaveProfile, which: Which) -> Result<LinearizedOperator> {
    let WaveParams { omega, z, half_period } = profile.params;
    let grid = profile.grid;
    let base = DeltaOperator::finite(-z, half_period)?.discretize(grid.n())?;
    let c = which.coefficient();
    let diag = base.diag().iter().zip(&profile.values).map(|(d, p)| d + omega - c * p * p).collect();
    Ok(LinearizedOperator { which, matrix: CyclicTridiagonal::new(diag, base.off())?, grid, omega, z })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

#[derive(Debug, Clone, Serialize)]
pub struct Eigenpair {
    pub value: f64,
    #[serde(skip)]
    pub vector: Vec<f64>,
    pub parity: Parity,
    pub reflection_residual: f64,
    pub residual: f64,
}

/// Reflection-residual threshold for parity classification.
pub const PARITY_TOL: f64 = 1e-6;

/// The negative-count error band `τ = 10 h (1 + ω)`.
pub fn tau_neg(grid: &Grid, omega: f64) -> f64 {
    10.0 * grid.h() * (1.0 + omega)
}

#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub which: Which,
    pub n: usize,
    pub pairs: Vec<Eigenpair>,
    pub tau_neg: f64,
    /// `#{λ < −τ}`.
    pub n_negative: usize,
    pub n_negative_even: usize,
    /// Eigenvalues with `|λ| ≤ τ`.
    pub band: Vec<f64>,
    /// `#{λ < 0}` from the Sylvester inertia of the full matrix.
    pub inertia_count: usize,
}

impl Spectrum {
    pub fn inconclusive(&self) -> bool {
        !self.band.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }
}

fn classify_parity(grid: &Grid, v: &[f64]) -> (Parity, f64) {
    let even = grid.reflection_residual(v, 1.0);
    let odd = grid.reflection_residual(v, -1.0);
    if even < PARITY_TOL {
        (Parity::Even, even)
    } else if odd < PARITY_TOL {
        (Parity::Odd, odd)
    } else {
        (Parity::Mixed, even.min(odd))
    }
}

fn parity_parts(grid: &Grid, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = grid.n();
    let e = (0..n).map(|i| 0.5 * (v[i] + v[grid.reflect(i)])).collect();
    let o = (0..n).map(|i| 0.5 * (v[i] - v[grid.reflect(i)])).collect();
    (e, o)
}

fn gram_schmidt(vs: Vec<Vec<f64>>, keep: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for mut v in vs {
        for b in &out {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if s > 1e-6 {
            v.iter_mut().for_each(|x| *x /= s);
            out.push(v);
        }
        if out.len() == keep {
            break;
        }
    }
    out
}

/// Lowest `count` eigenpairs of a reflection-symmetric matrix with parity
/// classification; degenerate eigenspaces are split into parity components.
pub fn symmetric_spectrum(matrix: &CyclicTridiagonal, grid: &Grid, count: usize) -> Vec<Eigenpair> {
    let raw = matrix.lowest_eigenpairs(count);
    let (lo, hi) = matrix.spectral_bounds();
    let tol = 1e-9 * lo.abs().max(hi.abs()).max(1.0);
    let mut out = Vec::with_capacity(raw.len());
    let mut i = 0;
    while i < raw.len() {
        let mut j = i + 1;
        while j < raw.len() && raw[j].0 - raw[j - 1].0 < tol {
            j += 1;
        }
        let mut vecs: Vec<Vec<f64>> = raw[i..j].iter().map(|p| p.1.clone()).collect();
        if j - i > 1 {
            let mut evens = Vec::new();
            let mut odds = Vec::new();
            for v in &vecs {
                let (e, o) = parity_parts(grid, v);
                evens.push(e);
                odds.push(o);
            }
            let mut split = gram_schmidt(evens, j - i);
            let rest = j - i - split.len();
            split.extend(gram_schmidt(odds, rest));
            if split.len() == j - i {
                vecs = split;
            }
        }
        for v in vecs {
            let (parity, rr) = classify_parity(grid, &v);
            let av = matrix.apply(&v);
            let value: f64 = av.iter().zip(&v).map(|(a, b)| a * b).sum();
            let residual = matrix.residual(value, &v);
            out.push(Eigenpair { value, vector: v, parity, reflection_residual: rr, residual });
        }
        i = j;
    }
    out.sort_by(|a, b| a.value.total_cmp(&b.value));
    out
}

/// Lowest `count` eigenpairs of the operator with counts against `τ`.
pub fn spectrum(op: &LinearizedOperator, count: usize) -> Spectrum {
    let pairs = symmetric_spectrum(&op.matrix, &op.grid, count);
    let tau = tau_neg(&op.grid, op.omega);
    let inertia_count = op.matrix.count_below(0.0);
    let n_negative = pairs.iter().filter(|p| p.value < -tau).count();
    let n_negative_even = pairs.iter().filter(|p| p.value < -tau && p.parity == Parity::Even).count();
    let band = pairs.iter().filter(|p| p.value.abs() <= tau).map(|p| p.value).collect();
    Spectrum { which: op.which, n: op.grid.n(), pairs, tau_neg: tau, n_negative, n_negative_even, band, inertia_count }
}

/// How many eigenpairs [`count_negative`] inspects.
pub const LOW_COUNT: usize = 8;

/// `n(L)` with the error band.
pub fn count_negative(op: &LinearizedOperator) -> Spectrum {
    spectrum(op, LOW_COUNT)
}

/// Overlap `|⟨v, φ⟩|/(‖v‖‖φ‖)` of an eigenvector with the profile.
pub fn overlap(v: &[f64], w: &[f64]) -> f64 {
    let d: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nw = w.iter().map(|a| a * a).sum::<f64>().sqrt();
    d.abs() / (nv * nw)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KernelVerdict {
    PositiveLimit,
    ZeroLimit,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelEntry {
    pub n: usize,
    pub n_negative: usize,
    /// Smallest `|λ|` above the counted negative eigenvalues.
    pub min_abs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelDiagnostic {
    pub entries: Vec<KernelEntry>,
    /// Ratios `m_n / m_{2n}`.
    pub ratios: Vec<f64>,
    /// Richardson extrapolation of the last two rungs assuming `O(h²)`.
    pub limit: f64,
    pub verdict: KernelVerdict,
}

/// Near-kernel diagnostic of `L₁` along a grid ladder (each rung doubles `n`).
pub fn kernel_diagnostic(params: &WaveParams, ladder: &[usize]) -> Result<KernelDiagnostic> {
    if ladder.len() < 2 {
        return Err(Error::Domain("kernel ladder needs at least two grids".into()));
    }
    let mut entries = Vec::new();
    for &n in ladder {
        let p = build_profile(params, n)?;
        let s = count_negative(&assemble(&p, Which::L1)?);
        let tau = s.tau_neg;
        let k = s.pairs.iter().filter(|e| e.value < -tau).count();
        let min_abs = s.pairs.iter().skip(k).map(|e| e.value.abs()).fold(f64::INFINITY, f64::min);
        entries.push(KernelEntry { n, n_negative: k, min_abs });
    }
    let ratios: Vec<f64> = entries.windows(2).map(|w| w[0].min_abs / w[1].min_abs).collect();
    let (a, b) = (entries[entries.len() - 2].min_abs, entries[entries.len() - 1].min_abs);
    let limit = b + (b - a) / 3.0;
    let zero = ratios.iter().all(|r| (3.0..=5.5).contains(r));
    let settled = entries.windows(2).all(|w| (w[1].min_abs - w[0].min_abs).abs() < 0.1 * w[1].min_abs);
    let verdict = if zero {
        KernelVerdict::ZeroLimit
    } else if settled && limit > 0.0 {
        KernelVerdict::PositiveLimit
    } else {
        KernelVerdict::Undecided
    };
    Ok(KernelDiagnostic { entries, ratios, limit, verdict })
}

/// The odd eigenvalue of `L₁` closest to zero (`Π(Z)`).
pub fn odd_eigenvalue_near_zero(profile: &WaveProfile) -> Result<f64> {
    let s = spectrum(&assemble(profile, Which::L1)?, 6);
    s.pairs
        .iter()
        .filter(|p| p.parity == Parity::Odd)
        .map(|p| p.value)
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))
        .ok_or_else(|| Error::Numerical("no odd eigenvalue among the lowest six".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeRow {
    pub z: f64,
    pub pi_plus: f64,
    pub pi_minus: f64,
    /// `(Π(Z) − Π(−Z))/(2Z)`.
    pub quotient: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SlopeLadder {
    pub rows: Vec<SlopeRow>,
    /// Richardson extrapolation of the last two quotients (error `O(Z²)`).
    pub estimate: f64,
    /// `−(ωφ₀(0)² − φ₀(0)⁴)/‖φ₀′‖²` for the `Z = 0` wave.
    pub closed_form: f64,
    pub monotone: bool,
}

/// `β = −(ωφ₀(0)² − φ₀(0)⁴)/‖φ₀′‖²` from the classical wave at `(ω, L)`.
pub fn beta_closed_form(omega: f64, half_period: f64) -> Result<f64> {
    let p = build_profile(&WaveParams::new(omega, 0.0, half_period), 16)?;
    let grad = 2.0 * integrate(|x| p.eval_derivative(x).powi(2), 0.0, half_period, 64);
    let f0 = p.phi0;
    Ok(-(omega * f0 * f0 - f0.powi(4)) / grad)
}

/// Estimates `β = lim Π(Z)/Z` along a ladder of `|Z|` values halving towards 0.
pub fn second_eigen_slope(omega: f64, half_period: f64, z_ladder: &[f64], n: usize) -> Result<SlopeLadder> {
    if z_ladder.len() < 2 {
        return Err(Error::Domain("slope ladder needs at least two values".into()));
    }
    let mut rows = Vec::new();
    for &z in z_ladder {
        let z = z.abs();
        let pp = odd_eigenvalue_near_zero(&build_profile(&WaveParams::new(omega, z, half_period), n)?)?;
        let pm = odd_eigenvalue_near_zero(&build_profile(&WaveParams::new(omega, -z, half_period), n)?)?;
        rows.push(SlopeRow { z, pi_plus: pp, pi_minus: pm, quotient: (pp - pm) / (2.0 * z) });
    }
    let (r0, r1) = (rows[rows.len() - 2], rows[rows.len() - 1]);
    let ratio = r0.z / r1.z;
    let estimate = (ratio * ratio * r1.quotient - r0.quotient) / (ratio * ratio - 1.0);
    let diffs: Vec<f64> = rows.windows(2).map(|w| w[1].quotient - w[0].quotient).collect();
    let monotone = diffs.iter().all(|d| *d >= 0.0) || diffs.iter().all(|d| *d <= 0.0);
    Ok(SlopeLadder { rows, estimate, closed_form: beta_closed_form(omega, half_period)?, monotone })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LameCheck {
    pub k: f64,
    pub n: usize,
    pub numeric: f64,
    pub exact: f64,
    pub error: f64,
    /// `|⟨v, sn·cn⟩|/(‖v‖‖sn·cn‖)`.
    pub correlation: f64,
}

/// Second periodic eigenvalue of `−Φ″ + 6k² sn²(x) Φ = λΦ` on `[0, 2K]`,
/// against `4 + k²` with eigenfunction `sn·cn`.
pub fn lame_check(k: f64, n: usize) -> Result<LameCheck> {
    use crate::elliptic::{complete_k, jacobi, Modulus};
    let m = Modulus::new(k)?;
    let period = 2.0 * complete_k(&m);
    let h = period / n as f64;
    let x: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let diag = x.iter().map(|&t| 2.0 / (h * h) + 6.0 * k * k * jacobi(t, &m).sn.powi(2)).collect();
    let a = CyclicTridiagonal::new(diag, -1.0 / (h * h))?;
    let pairs = a.lowest_eigenpairs(2);
    let (numeric, v) = (&pairs[1].0, &pairs[1].1);
    let w: Vec<f64> = x.iter().map(|&t| {
        let j = jacobi(t, &m);
        j.sn * j.cn
    }).collect();
    let exact = 4.0 + k * k;
    Ok(LameCheck { k, n, numeric: *numeric, exact, error: (numeric - exact).abs(), correlation: overlap(v, &w) })
}
