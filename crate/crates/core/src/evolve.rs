//! Strang-split time integration of
//!
//! ```text
//! i u_t = (−Δ − Zδ) u − |u|² u
//! ```
//!
//! on the profile grid. The linear substep acts on the even and odd parts of
//! `u` separately, so the reflection symmetry of the discrete operator is kept
//! exactly and even data stays even to the last bit.

use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rustfft::{Fft, FftPlanner};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::delta_op::DeltaOperator;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::matrix::solve_tridiagonal;
use crate::wave::{build_profile, WaveParams, WaveProfile};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: Vec<Complex64>,
    pub grid: Grid,
}

impl State {
    pub fn new(grid: Grid, u: Vec<Complex64>) -> Result<Self> {
        if u.len() != grid.n() {
            return Err(Error::GridMismatch(format!("{} samples on an {}-point grid", u.len(), grid.n())));
        }
        Ok(State { t: 0.0, u, grid })
    }

    /// The standing wave `e^{iθ} φ` at `t = 0`.
    pub fn from_profile(profile: &WaveProfile, theta: f64) -> Self {
        let c = Complex64::from_polar(1.0, theta);
        State { t: 0.0, u: profile.values.iter().map(|&v| c * v).collect(), grid: profile.grid }
    }

    pub fn max_abs(&self) -> f64 {
        self.u.iter().fold(0.0, |a, v| a.max(v.norm()))
    }

    /// `max |u(x) − u(−x)| / 2`.
    pub fn odd_residual(&self) -> f64 {
        (0..self.grid.n()).map(|i| 0.5 * (self.u[i] - self.u[self.grid.reflect(i)]).norm()).fold(0.0, f64::max)
    }
}

/// Linear substep `u ← exp(−iA dt) u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearStep {
    /// Crank–Nicolson, `(1 + iA dt/2)⁻¹ (1 − iA dt/2)`; unitary, `O(n)` per step.
    Cayley,
    /// Exact exponential: dense eigenbasis of the even block, sine transform
    /// on the odd block; `O(n²)` per step.
    Eigen,
}

impl FromStr for LinearStep {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cayley" | "cn" => Ok(LinearStep::Cayley),
            "eigen" | "exact" => Ok(LinearStep::Eigen),
            _ => Err(Error::Domain(format!("unknown linear step '{s}' (cayley|eigen)"))),
        }
    }
}

/// Exact flow of the Dirichlet block `tridiag(o, d, o)` of size `m` through
/// the sine transform, `sin(πjk/(m+1))`, computed by an FFT of length `2(m+1)`.
#[derive(Clone)]
struct SineFlow {
    fft: Arc<dyn Fft<f64>>,
    phases: Vec<Complex64>,
}

impl std::fmt::Debug for SineFlow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SineFlow").field("m", &self.phases.len()).finish()
    }
}

impl SineFlow {
    fn new(m: usize, d: f64, o: f64, dt: f64) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(2 * (m + 1));
        let phases = (1..=m)
            .map(|k| {
                let lam = d + 2.0 * o * (std::f64::consts::PI * k as f64 / (m + 1) as f64).cos();
                Complex64::from_polar(1.0, -lam * dt)
            })
            .collect();
        SineFlow { fft, phases }
    }

    /// `Σ_j v_j sin(πjk/(m+1))` for `k = 1..m`.
    fn transform(&self, v: &[Complex64]) -> Vec<Complex64> {
        let m = v.len();
        let big = 2 * (m + 1);
        let mut x = vec![Complex64::new(0.0, 0.0); big];
        for j in 0..m {
            x[j + 1] = v[j];
            x[big - j - 1] = -v[j];
        }
        self.fft.process(&mut x);
        (1..=m).map(|k| 0.5 * I * x[k]).collect()
    }

    fn apply(&self, v: &mut [Complex64]) {
        let m = v.len();
        let scale = 2.0 / (m + 1) as f64;
        let c: Vec<Complex64> = self.transform(v).iter().zip(&self.phases).map(|(a, p)| a * p * scale).collect();
        v.copy_from_slice(&self.transform(&c));
    }
}

#[derive(Debug, Clone)]
enum Block {
    Sine(SineFlow),
    Cayley { tau: f64, a: [Vec<f64>; 3], left: [Vec<Complex64>; 3] },
    /// `weight` holds `W^{1/2}`.
    Eigen { vectors: DMatrix<f64>, vectors_t: DMatrix<f64>, phases: Vec<Complex64>, weight: Vec<f64> },
}

impl Block {
    /// Tridiagonal `(sub, diag, sup)` of a real block.
    fn new(kind: LinearStep, sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>, weight: Vec<f64>, dt: f64) -> Self {
        let m = diag.len();
        match kind {
            LinearStep::Cayley => {
                let tau = 0.5 * dt;
                let left = [
                    sub.iter().map(|&v| I * tau * v).collect(),
                    diag.iter().map(|&v| Complex64::new(1.0, tau * v)).collect(),
                    sup.iter().map(|&v| I * tau * v).collect(),
                ];
                Block::Cayley { tau, a: [sub, diag, sup], left }
            }
            LinearStep::Eigen => {
                // weight W with W·F symmetric; M = W^{1/2} F W^{−1/2}
                let mut a = DMatrix::zeros(m, m);
                for j in 0..m {
                    a[(j, j)] = diag[j];
                    if j + 1 < m {
                        let s = (sup[j] * sub[j + 1]).sqrt() * sup[j].signum();
                        a[(j, j + 1)] = s;
                        a[(j + 1, j)] = s;
                    }
                }
                let eig = SymmetricEigen::new(a);
                let phases = eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, -l * dt)).collect();
                let vectors_t = eig.eigenvectors.transpose();
                Block::Eigen { vectors: eig.eigenvectors, vectors_t, phases, weight: weight.iter().map(|w| w.sqrt()).collect() }
            }
        }
    }

    fn apply(&self, v: &mut [Complex64]) {
        let m = v.len();
        match self {
            Block::Sine(f) => f.apply(v),
            Block::Cayley { tau, a: [a, b, c], left: [ls, ld, lu] } => {
                let mut r: Vec<Complex64> = (0..m)
                    .map(|j| {
                        let mut av = v[j] * b[j];
                        if j > 0 {
                            av += v[j - 1] * a[j];
                        }
                        if j + 1 < m {
                            av += v[j + 1] * c[j];
                        }
                        v[j] - I * *tau * av
                    })
                    .collect();
                solve_tridiagonal(ls, ld, lu, &mut r);
                v.copy_from_slice(&r);
            }
            Block::Eigen { vectors, vectors_t, phases, weight } => {
                // columns of y: real and imaginary parts of W^{1/2} v
                let y = DMatrix::from_fn(m, 2, |j, c| weight[j] * if c == 0 { v[j].re } else { v[j].im });
                let mut c = vectors_t * y;
                for k in 0..m {
                    let z = Complex64::new(c[(k, 0)], c[(k, 1)]) * phases[k];
                    c[(k, 0)] = z.re;
                    c[(k, 1)] = z.im;
                }
                let x = vectors * c;
                for j in 0..m {
                    v[j] = Complex64::new(x[(j, 0)], x[(j, 1)]) / weight[j];
                }
            }
        }
    }
}

/// Precomputed split-step propagator for fixed `(grid, Z, dt)`.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub grid: Grid,
    pub z: f64,
    pub dt: f64,
    pub kind: LinearStep,
    even: Block,
    odd: Block,
}

impl Propagator {
    pub fn new(grid: Grid, z: f64, dt: f64, kind: LinearStep) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!("dt={dt} must be positive")));
        }
        let a = DeltaOperator::finite(-z, grid.half_period())?.discretize(grid.n())?;
        let half = grid.n() / 2;
        let (d, d0, o) = (a.diag()[0], a.diag()[grid.origin()], a.off());
        // even block on j = 0..=n/2, folded at x = 0 and x = L
        let me = half + 1;
        let mut sub = vec![o; me];
        let mut sup = vec![o; me];
        let mut diag = vec![d; me];
        diag[0] = d0;
        sup[0] = 2.0 * o;
        sub[half] = 2.0 * o;
        sub[0] = 0.0;
        sup[half] = 0.0;
        let mut w = vec![1.0; me];
        w[0] = 0.5;
        w[half] = 0.5;
        let even = Block::new(kind, sub, diag, sup, w, dt);
        // odd block on j = 1..n/2−1 with zero ends
        let mo = half - 1;
        let mut sub = vec![o; mo];
        let mut sup = vec![o; mo];
        sub[0] = 0.0;
        sup[mo - 1] = 0.0;
        let odd = match kind {
            LinearStep::Eigen => Block::Sine(SineFlow::new(mo, d, o, dt)),
            LinearStep::Cayley => Block::new(kind, sub, vec![d; mo], sup, vec![1.0; mo], dt),
        };
        Ok(Propagator { grid, z, dt, kind, even, odd })
    }

    fn nonlinear(&self, u: &mut [Complex64], tau: f64) {
        for v in u.iter_mut() {
            *v *= Complex64::from_polar(1.0, v.norm_sqr() * tau);
        }
    }

    fn linear(&self, u: &mut [Complex64]) {
        let n = self.grid.n();
        let half = n / 2;
        let at = |j: isize| ((half as isize + j).rem_euclid(n as isize)) as usize;
        let mut e: Vec<Complex64> = (0..=half as isize).map(|j| 0.5 * (u[at(j)] + u[at(-j)])).collect();
        let mut o: Vec<Complex64> = (1..half as isize).map(|j| 0.5 * (u[at(j)] - u[at(-j)])).collect();
        self.even.apply(&mut e);
        self.odd.apply(&mut o);
        u[at(0)] = e[0];
        u[at(half as isize)] = e[half];
        for j in 1..half {
            let (a, b) = (e[j], o[j - 1]);
            u[at(j as isize)] = a + b;
            u[at(-(j as isize))] = a - b;
        }
    }

    /// One Strang step: half nonlinear, full linear, half nonlinear.
    pub fn step(&self, state: &mut State) {
        self.nonlinear(&mut state.u, 0.5 * self.dt);
        self.linear(&mut state.u);
        self.nonlinear(&mut state.u, 0.5 * self.dt);
        state.t += self.dt;
    }
}

/// Single step with a freshly assembled Cayley propagator.
pub fn step(state: &State, dt: f64, z: f64) -> Result<State> {
    let p = Propagator::new(state.grid, z, dt, LinearStep::Cayley)?;
    let mut s = state.clone();
    p.step(&mut s);
    Ok(s)
}

/// Charge `Q = ½∫|u|²` and energy
/// `E = ½∫|u′|² − (Z/2)|u(0)|² − ¼∫|u|⁴` on the grid, with forward
/// differences in the gradient term.
pub fn conserved(state: &State, z: f64) -> (f64, f64) {
    let g = state.grid;
    let (n, h) = (g.n(), g.h());
    let u = &state.u;
    let q = 0.5 * h * u.iter().map(|v| v.norm_sqr()).sum::<f64>();
    let grad = (0..n).map(|i| (u[(i + 1) % n] - u[i]).norm_sqr()).sum::<f64>() / h;
    let quartic = h * u.iter().map(|v| v.norm_sqr().powi(2)).sum::<f64>();
    let e = 0.5 * grad - 0.5 * z * u[g.origin()].norm_sqr() - 0.25 * quartic;
    (q, e)
}

fn centered(u: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = u.len();
    (0..n).map(|i| (u[(i + 1) % n] - u[(i + n - 1) % n]) / (2.0 * h)).collect()
}

/// `‖v‖²_{H¹}` with centered differences.
pub fn h1_norm_squared(v: &[Complex64], h: f64) -> f64 {
    let dv = centered(v, h);
    h * v.iter().zip(&dv).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).sum::<f64>()
}

/// `inf_θ ‖u − e^{iθ}φ‖_{H¹}`; the minimizer is the argument of the complex
/// `H¹` pairing `⟨u, φ⟩`.
pub fn orbit_distance(state: &State, reference: &WaveProfile) -> Result<f64> {
    let (theta, _) = optimal_phase(state, reference)?;
    Ok(phase_distance(state, reference, theta))
}

/// `(θ*, ⟨u, φ⟩)` for the orbit projection.
pub fn optimal_phase(state: &State, reference: &WaveProfile) -> Result<(f64, Complex64)> {
    if state.grid != reference.grid {
        return Err(Error::GridMismatch(format!("state n={} vs profile n={}", state.grid.n(), reference.grid.n())));
    }
    let h = state.grid.h();
    let phi: Vec<Complex64> = reference.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let (du, dp) = (centered(&state.u, h), centered(&phi, h));
    let pair: Complex64 = h * state.u.iter().zip(&phi).zip(du.iter().zip(&dp)).map(|((a, b), (c, d))| a * b + c * d).sum::<Complex64>();
    Ok((pair.arg(), pair))
}

/// `‖u − e^{iθ}φ‖_{H¹}` for a fixed phase.
pub fn phase_distance(state: &State, reference: &WaveProfile, theta: f64) -> f64 {
    let c = Complex64::from_polar(1.0, theta);
    let diff: Vec<Complex64> = state.u.iter().zip(&reference.values).map(|(a, &b)| a - c * b).collect();
    h1_norm_squared(&diff, state.grid.h()).sqrt()
}

/// Initial perturbation, applied as `u₀ = φ·(1 + p(x))` or, for the kick,
/// `u₀ = φ·e^{iε cos(πx/L)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Perturbation {
    None,
    /// `ε cos(πx/L)`.
    Even { amplitude: f64 },
    /// `ε sin(πx/L)`.
    Odd { amplitude: f64 },
    /// `ε r(x)`, `r` a seeded random complex trigonometric polynomial of
    /// degree 8 scaled to `max |r| = 1`.
    Random { amplitude: f64 },
    PhaseKick { amplitude: f64 },
}

impl Perturbation {
    pub fn amplitude(&self) -> f64 {
        match *self {
            Perturbation::None => 0.0,
            Perturbation::Even { amplitude }
            | Perturbation::Odd { amplitude }
            | Perturbation::Random { amplitude }
            | Perturbation::PhaseKick { amplitude } => amplitude,
        }
    }

    pub fn is_even(&self) -> bool {
        matches!(self, Perturbation::None | Perturbation::Even { .. } | Perturbation::PhaseKick { .. })
    }

    pub fn apply(&self, profile: &WaveProfile, seed: u64) -> Vec<Complex64> {
        let g = profile.grid;
        let l = g.half_period();
        let k = std::f64::consts::PI / l;
        let phi = &profile.values;
        let n = g.n();
        let one = Complex64::new(1.0, 0.0);
        let factor: Vec<Complex64> = match *self {
            Perturbation::None => vec![one; n],
            Perturbation::Even { amplitude } => (0..n).map(|i| one + amplitude * (k * g.abs_x(i)).cos()).collect(),
            Perturbation::Odd { amplitude } => (0..n).map(|i| one + amplitude * odd_sample(&g, i, k)).collect(),
            Perturbation::PhaseKick { amplitude } => {
                (0..n).map(|i| Complex64::from_polar(1.0, amplitude * (k * g.abs_x(i)).cos())).collect()
            }
            Perturbation::Random { amplitude } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut c = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let modes: Vec<(Complex64, Complex64)> = (0..8).map(|_| (c(), c())).collect();
                let r: Vec<Complex64> = (0..n)
                    .map(|i| {
                        let x = g.x(i);
                        modes
                            .iter()
                            .enumerate()
                            .map(|(m, (a, b))| {
                                let w = k * (m + 1) as f64 * x;
                                a * w.cos() + b * w.sin()
                            })
                            .sum()
                    })
                    .collect();
                let s = r.iter().fold(0.0, |a: f64, v| a.max(v.norm()));
                r.iter().map(|v| one + amplitude * v / s).collect()
            }
        };
        phi.iter().zip(factor).map(|(&p, f)| f * p).collect()
    }
}

/// `sin(πx/L)` with exact antisymmetry between mirrored nodes.
fn odd_sample(g: &Grid, i: usize, k: f64) -> f64 {
    let s = (k * g.abs_x(i)).sin();
    if i < g.origin() {
        -s
    } else {
        s
    }
}

impl FromStr for Perturbation {
    type Err = Error;
    /// `none`, `even:ε`, `odd:ε`, `random:ε`, `phase:ε`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "none" {
            return Ok(Perturbation::None);
        }
        let (kind, amp) = s.split_once(':').ok_or_else(|| Error::Domain(format!("perturbation '{s}' is not kind:amplitude")))?;
        let amplitude: f64 = amp.parse().map_err(|_| Error::Domain(format!("bad amplitude '{amp}'")))?;
        if !amplitude.is_finite() {
            return Err(Error::Domain(format!("bad amplitude '{amp}'")));
        }
        match kind {
            "even" => Ok(Perturbation::Even { amplitude }),
            "odd" => Ok(Perturbation::Odd { amplitude }),
            "random" => Ok(Perturbation::Random { amplitude }),
            "phase" | "kick" => Ok(Perturbation::PhaseKick { amplitude }),
            _ => Err(Error::Domain(format!("unknown perturbation kind '{kind}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolveConfig {
    pub n: usize,
    pub dt: f64,
    pub t_final: f64,
    /// Approximate number of recorded samples after `t = 0`.
    pub records: usize,
    pub linear: LinearStep,
    pub dt_ceiling: f64,
    pub seed: u64,
    /// Blow-up when `max |u| > blowup_factor · max |φ|`.
    pub blowup_factor: f64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            n: 1024,
            dt: 1e-4,
            t_final: 1.0,
            records: 500,
            linear: LinearStep::Eigen,
            dt_ceiling: 1e-2,
            seed: 0x5eed,
            blowup_factor: 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowUp {
    pub t: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolutionTrace {
    pub params: WaveParams,
    pub perturbation: Perturbation,
    pub config: EvolveConfig,
    pub times: Vec<f64>,
    pub charge: Vec<f64>,
    pub energy: Vec<f64>,
    pub orbit_distance: Vec<f64>,
    pub odd_residual: Vec<f64>,
    pub blow_up: Option<BlowUp>,
}

impl EvolutionTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn drift(v: &[f64]) -> f64 {
        let v0 = v[0];
        v.iter().map(|x| (x - v0).abs()).fold(0.0, f64::max) / v0.abs()
    }

    /// `max_t |Q(t) − Q(0)| / |Q(0)|`.
    pub fn charge_drift(&self) -> f64 {
        Self::drift(&self.charge)
    }

    pub fn energy_drift(&self) -> f64 {
        Self::drift(&self.energy)
    }

    /// `max_t d(t) / d(0)`.
    pub fn max_distance_ratio(&self) -> f64 {
        let d0 = self.orbit_distance[0];
        self.orbit_distance.iter().fold(0.0, |a: f64, &d| a.max(d)) / d0
    }

    /// First recorded time with `d(t) > factor · d(0)`.
    pub fn first_exceedance(&self, factor: f64) -> Option<f64> {
        let d0 = self.orbit_distance[0];
        self.times.iter().zip(&self.orbit_distance).find(|(_, &d)| d > factor * d0).map(|(&t, _)| t)
    }

    pub fn max_odd_residual(&self) -> f64 {
        self.odd_residual.iter().fold(0.0, |a: f64, &v| a.max(v))
    }

    /// The trace, or the blow-up as an error.
    pub fn into_result(self) -> Result<Self> {
        match &self.blow_up {
            Some(b) => Err(Error::BlowUp { t: b.t, reason: b.reason.clone() }),
            None => Ok(self),
        }
    }
}

/// `λ_max dt` for the discretized `−∂ₓ² − Zδ`, bounded by `(4/h² + |Z|/h) dt`.
/// Above `π` the exact linear step can resonate with the nonlinear one.
pub fn stiffness(grid: &Grid, z: f64, dt: f64) -> f64 {
    let h = grid.h();
    (4.0 / (h * h) + z.abs() / h) * dt
}

fn check_config(config: &EvolveConfig) -> Result<usize> {
    if !(config.dt > 0.0) || config.dt > config.dt_ceiling {
        return Err(Error::Domain(format!("dt={} outside (0, {}]", config.dt, config.dt_ceiling)));
    }
    if !(config.t_final >= 0.0 && config.t_final.is_finite()) {
        return Err(Error::Domain(format!("T={} must be finite and non-negative", config.t_final)));
    }
    Ok((config.t_final / config.dt).round() as usize)
}

/// Integrates `u₀` against the reference profile, recording `(t, Q, E, d, odd)`.
pub fn evolve_from(
    profile: &WaveProfile,
    u0: Vec<Complex64>,
    perturbation: Perturbation,
    config: &EvolveConfig,
) -> Result<(EvolutionTrace, State)> {
    let steps = check_config(config)?;
    let z = profile.params.z;
    let prop = Propagator::new(profile.grid, z, config.dt, config.linear)?;
    let mut state = State::new(profile.grid, u0)?;
    let every = (steps / config.records.max(1)).max(1);
    let limit = config.blowup_factor * profile.max_value();
    let mut trace = EvolutionTrace {
        params: profile.params,
        perturbation,
        config: *config,
        times: Vec::new(),
        charge: Vec::new(),
        energy: Vec::new(),
        orbit_distance: Vec::new(),
        odd_residual: Vec::new(),
        blow_up: None,
    };
    let record = |trace: &mut EvolutionTrace, s: &State| -> Result<()> {
        let (q, e) = conserved(s, z);
        trace.times.push(s.t);
        trace.charge.push(q);
        trace.energy.push(e);
        trace.orbit_distance.push(orbit_distance(s, profile)?);
        trace.odd_residual.push(s.odd_residual());
        Ok(())
    };
    record(&mut trace, &state)?;
    for k in 1..=steps {
        prop.step(&mut state);
        state.t = k as f64 * config.dt;
        let m = state.max_abs();
        if !m.is_finite() || m > limit {
            let reason = if m.is_finite() { format!("max|u|={m} > {limit}") } else { "non-finite values".to_string() };
            trace.blow_up = Some(BlowUp { t: state.t, reason });
            break;
        }
        if k % every == 0 || k == steps {
            record(&mut trace, &state)?;
        }
    }
    Ok((trace, state))
}

/// Builds `φ` at `config.n`, applies the perturbation and integrates to `T`.
pub fn run_experiment(params: &WaveParams, perturbation: Perturbation, config: &EvolveConfig) -> Result<EvolutionTrace> {
    let profile = build_profile(params, config.n)?;
    let u0 = perturbation.apply(&profile, config.seed);
    Ok(evolve_from(&profile, u0, perturbation, config)?.0)
}

/// `max_x |u(x, T) − e^{iωT} φ(x)|` for unperturbed standing-wave data.
pub fn standing_wave_error(params: &WaveParams, config: &EvolveConfig) -> Result<f64> {
    let profile = build_profile(params, config.n)?;
    let (_, state) = evolve_from(&profile, State::from_profile(&profile, 0.0).u, Perturbation::None, config)?;
    let c = Complex64::from_polar(1.0, params.omega * state.t);
    Ok(state.u.iter().zip(&profile.values).map(|(u, &p)| (u - c * p).norm()).fold(0.0, f64::max))
}

/// Final states at `dt`, `dt/2` against a `dt/16` reference; returns
/// `(e(dt), e(dt/2))` in the max norm.
pub fn self_convergence(params: &WaveParams, config: &EvolveConfig) -> Result<(f64, f64)> {
    let profile = build_profile(params, config.n)?;
    let run = |dt: f64| -> Result<State> {
        let c = EvolveConfig { dt, records: 1, ..*config };
        Ok(evolve_from(&profile, State::from_profile(&profile, 0.0).u, Perturbation::None, &c)?.1)
    };
    let reference = run(config.dt / 16.0)?;
    let err = |s: &State| s.u.iter().zip(&reference.u).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok((err(&run(config.dt)?), err(&run(config.dt / 2.0)?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn profile(w: f64, z: f64, n: usize) -> WaveProfile {
        build_profile(&WaveParams::new(w, z, 0.5), n).unwrap()
    }

    #[test]
    fn zero_stays_zero() {
        let g = Grid::new(64, 0.5).unwrap();
        let mut s = State::new(g, vec![Complex64::new(0.0, 0.0); 64]).unwrap();
        let p = Propagator::new(g, 1.0, 1e-3, LinearStep::Cayley).unwrap();
        for _ in 0..100 {
            p.step(&mut s);
        }
        assert!(s.u.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn standing_wave_phase_advances_by_omega_dt() {
        let p = profile(25.0, 0.0, 512);
        let s0 = State::from_profile(&p, 0.3);
        let dt = 1e-4;
        let s1 = step(&s0, dt, 0.0).unwrap();
        let i = p.grid.origin();
        let dphi = (s1.u[i] / s0.u[i]).arg();
        assert!((dphi - 25.0 * dt).abs() < 1e-3 * 25.0 * dt, "{dphi}");
    }

    #[test]
    fn charge_scales_quadratically() {
        let p = profile(25.0, 1.0, 128);
        let s = State::from_profile(&p, 0.0);
        let c = Complex64::new(0.6, -1.3);
        let t = State { u: s.u.iter().map(|v| c * v).collect(), ..s.clone() };
        let (q, _) = conserved(&s, 1.0);
        let (qc, _) = conserved(&t, 1.0);
        assert!((qc - c.norm_sqr() * q).abs() < 1e-13 * qc);
    }

    #[test]
    fn energy_matches_direct_sums() {
        let p = profile(25.0, 0.0, 256);
        let s = State::from_profile(&p, 0.0);
        let (h, v) = (p.grid.h(), &p.values);
        let n = v.len();
        let grad: f64 = (0..n).map(|i| ((v[(i + 1) % n] - v[i]) / h).powi(2)).sum::<f64>() * h;
        let quartic: f64 = v.iter().map(|x| x.powi(4)).sum::<f64>() * h;
        let (_, e) = conserved(&s, 0.0);
        assert!((e - (0.5 * grad - 0.25 * quartic)).abs() < 1e-12 * grad);
    }

    #[test]
    fn orbit_member_has_zero_distance() {
        let p = profile(25.0, 1.0, 256);
        let d = orbit_distance(&State::from_profile(&p, 0.7), &p).unwrap();
        assert!(d < 1e-12, "{d}");
    }

    #[test]
    fn distance_is_minimal_over_phases() {
        let p = profile(60.0, -0.5, 256);
        let u = Perturbation::Random { amplitude: 0.05 }.apply(&p, 7);
        let s = State::new(p.grid, u).unwrap();
        let d = orbit_distance(&s, &p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let th = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            assert!(d <= phase_distance(&s, &p, th) + 1e-12);
        }
    }

    #[test]
    fn distance_is_linear_in_bump() {
        let p = profile(25.0, 1.0, 256);
        let d = |e: f64| {
            orbit_distance(&State::new(p.grid, Perturbation::Even { amplitude: e }.apply(&p, 0)).unwrap(), &p).unwrap()
        };
        assert!((d(2e-3) / d(1e-3) - 2.0).abs() < 1e-6);
    }

    #[test]
    fn even_data_stays_exactly_even() {
        let p = profile(60.0, -1.0, 128);
        let cfg = EvolveConfig { n: 128, dt: 1e-3, t_final: 2.0, records: 20, ..Default::default() };
        let tr = evolve_from(&p, Perturbation::Even { amplitude: 1e-2 }.apply(&p, 0), Perturbation::Even { amplitude: 1e-2 }, &cfg)
            .unwrap()
            .0;
        assert_eq!(tr.max_odd_residual(), 0.0);
    }

    #[test]
    fn cayley_and_eigen_agree_to_second_order() {
        let p = profile(25.0, 1.0, 64);
        let u0 = Perturbation::Random { amplitude: 0.1 }.apply(&p, 1);
        let run = |kind, dt| {
            let g = Propagator::new(p.grid, 1.0, dt, kind).unwrap();
            let mut s = State::new(p.grid, u0.clone()).unwrap();
            for _ in 0..(0.02 / dt).round() as usize {
                g.step(&mut s);
            }
            s
        };
        let gap = |dt| {
            let (a, b) = (run(LinearStep::Cayley, dt), run(LinearStep::Eigen, dt));
            a.u.iter().zip(&b.u).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
        };
        let (g1, g2) = (gap(2e-5), gap(1e-5));
        assert!(g1 < 1e-2 && (g1 / g2 - 4.0).abs() < 0.5, "{g1} {g2}");
    }

    #[test]
    fn eigen_step_is_unitary_linear_flow() {
        let g = Grid::new(32, 1.0).unwrap();
        let p = Propagator::new(g, 0.0, 0.1, LinearStep::Eigen).unwrap();
        let a = DeltaOperator::finite(0.0, 1.0).unwrap().discretize(32).unwrap();
        let (vals, vecs) = {
            let pairs = a.lowest_eigenpairs(1);
            (pairs[0].0, pairs[0].1.clone())
        };
        let mut u: Vec<Complex64> = vecs.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        p.linear(&mut u);
        for (x, v) in u.iter().zip(&vecs) {
            assert!((x - Complex64::from_polar(1.0, -vals * 0.1) * v).norm() < 1e-12);
        }
    }

    #[test]
    fn linear_step_matches_dense_exponential() {
        let n = 64;
        let g = Grid::new(n, 2.0).unwrap();
        let a = DeltaOperator::finite(-0.5, 2.0).unwrap().discretize(n).unwrap();
        let dense = a.dense_eigen();
        let u0: Vec<Complex64> = (0..n).map(|i| Complex64::new((-(g.x(i)).powi(2)).exp(), 0.3 * g.x(i))).collect();
        let dt = 1e-3;
        let mut want = vec![Complex64::new(0.0, 0.0); n];
        for (lam, v) in &dense {
            let c: Complex64 = v.iter().zip(&u0).map(|(a, b)| b * a).sum();
            for (w, x) in want.iter_mut().zip(v) {
                *w += c * Complex64::from_polar(1.0, -lam * dt) * x;
            }
        }
        let p = Propagator::new(g, 0.5, dt, LinearStep::Eigen).unwrap();
        let mut u = u0.clone();
        p.linear(&mut u);
        let e = u.iter().zip(&want).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(e < 1e-12, "{e}");
    }

    #[test]
    fn cayley_is_second_order_without_defect() {
        let n = 64;
        let g = Grid::new(n, 2.0).unwrap();
        let u0: Vec<Complex64> = (0..n).map(|i| Complex64::new((-(g.x(i)).powi(2)).exp(), 0.0)).collect();
        let err = |dt: f64| {
            let (mut a, mut b) = (u0.clone(), u0.clone());
            Propagator::new(g, 0.0, dt, LinearStep::Cayley).unwrap().linear(&mut a);
            Propagator::new(g, 0.0, dt, LinearStep::Eigen).unwrap().linear(&mut b);
            a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
        };
        let r = err(2e-4) / err(1e-4);
        assert!((r - 8.0).abs() < 0.5, "{r}");
    }

    #[test]
    fn charge_is_conserved() {
        let p = profile(25.0, 1.0, 256);
        let cfg = EvolveConfig { n: 256, dt: 1e-3, t_final: 10.0, records: 50, ..Default::default() };
        let tr = evolve_from(&p, Perturbation::Odd { amplitude: 1e-2 }.apply(&p, 0), Perturbation::Odd { amplitude: 1e-2 }, &cfg)
            .unwrap()
            .0;
        assert!(tr.charge_drift() < 1e-10, "{}", tr.charge_drift());
        assert_eq!(tr.len(), 51);
    }

    #[test]
    fn second_order_in_time() {
        let cfg = EvolveConfig { n: 128, dt: 1e-2, t_final: 1.0, ..Default::default() };
        let (e1, e2) = self_convergence(&WaveParams::new(0.1, 0.3, 16.0), &cfg).unwrap();
        assert!((e1 / e2 - 4.0).abs() < 0.5, "{e1} {e2}");
    }

    #[test]
    fn blow_up_keeps_partial_trace() {
        let p = profile(25.0, 1.0, 64);
        let cfg = EvolveConfig { n: 64, dt: 1e-3, t_final: 1.0, blowup_factor: 1.0, ..Default::default() };
        let (tr, _) = evolve_from(&p, Perturbation::Even { amplitude: 0.5 }.apply(&p, 0), Perturbation::Even { amplitude: 0.5 }, &cfg).unwrap();
        assert!(tr.blow_up.is_some() && !tr.is_empty());
        assert!(matches!(tr.into_result(), Err(Error::BlowUp { .. })));
    }

    #[test]
    fn stiffness_bounds_the_spectrum() {
        let g = Grid::new(64, 1.0).unwrap();
        let a = DeltaOperator::finite(-2.0, 1.0).unwrap().discretize(64).unwrap();
        let top = a.dense_eigen().iter().fold(0.0, |m: f64, e| m.max(e.0.abs()));
        let s = stiffness(&g, 2.0, 1.0);
        assert!(top <= s && s < 1.1 * top);
    }

    #[test]
    fn dt_ceiling_is_enforced() {
        let cfg = EvolveConfig { dt: 0.5, ..Default::default() };
        assert!(run_experiment(&WaveParams::new(25.0, 1.0, 0.5), Perturbation::None, &cfg).is_err());
    }

    #[test]
    fn perturbation_parsing() {
        assert_eq!("even:1e-3".parse::<Perturbation>().unwrap(), Perturbation::Even { amplitude: 1e-3 });
        assert_eq!("odd:0.5".parse::<Perturbation>().unwrap(), Perturbation::Odd { amplitude: 0.5 });
        assert_eq!("phase:2".parse::<Perturbation>().unwrap(), Perturbation::PhaseKick { amplitude: 2.0 });
        assert_eq!("none".parse::<Perturbation>().unwrap(), Perturbation::None);
        assert!("even".parse::<Perturbation>().is_err());
        assert!("wobble:1".parse::<Perturbation>().is_err());
        assert!("odd:nan".parse::<Perturbation>().is_err());
    }

    #[test]
    fn random_perturbation_is_seeded() {
        let p = profile(25.0, 1.0, 64);
        let r = Perturbation::Random { amplitude: 1e-2 };
        assert_eq!(r.apply(&p, 9), r.apply(&p, 9));
        assert_ne!(r.apply(&p, 9), r.apply(&p, 10));
    }
}
