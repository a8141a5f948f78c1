//! Slope condition `d/dω ‖φ_ω‖² > 0` and the index classification
//! comparing `n(L₁)` with `p ∈ {0, 1}`.

use serde::Serialize;

use crate::elliptic::{complete_e, epsilon};
use crate::error::{Error, Result};
use crate::linops::{assemble, count_negative, Spectrum, Which};
use crate::wave::{build_profile, eta1, modulus, shift, solve_eta2, Branch, WaveParams, WaveProfile};

use std::f64::consts::SQRT_2;

/// `‖φ‖²` on `[−L, L]` in closed form, `2√2 η₁ [E(k) ∓ ε(a)]` with `−` on the
/// `Z > 0` window `[a, K]` and `+` on the `Z < 0` window `[−a, K]`.
pub fn norm_squared(profile: &WaveProfile) -> f64 {
    closed_norm(profile.eta1, &profile.modulus, profile.branch.sign() * profile.shift)
}

fn closed_norm(e1: f64, m: &crate::elliptic::Modulus, signed_shift: f64) -> f64 {
    2.0 * SQRT_2 * e1 * (complete_e(m) - epsilon(signed_shift, m))
}

/// `‖φ‖²` from the η₂ solve alone, without sampling a grid.
pub fn norm_squared_at(params: &WaveParams) -> Result<f64> {
    let e2 = solve_eta2(params)?;
    let m = modulus(e2, params.omega)?;
    let a = shift(e2, params.omega, params.z)?;
    Ok(closed_norm(eta1(e2, params.omega), &m, params.branch().sign() * a))
}

/// Trapezoid rule over the periodic grid samples.
pub fn norm_squared_quadrature(profile: &WaveProfile) -> f64 {
    profile.grid.h() * profile.values.iter().map(|v| v * v).sum::<f64>()
}

#[derive(Debug, Clone, Serialize)]
pub struct SlopeEstimate {
    pub omega: f64,
    pub h_omega: f64,
    /// Richardson value with steps `h, h/2`.
    pub value: f64,
    /// Richardson value with steps `h/2, h/4`.
    pub refined: f64,
    /// `|value − refined| / |refined|`.
    pub halving_agreement: f64,
    pub one_sided: bool,
    pub warning: Option<String>,
}

/// Default `h_ω = 10⁻³ ω`.
pub fn default_h_omega(omega: f64) -> f64 {
    1e-3 * omega
}

/// `d/dω ‖φ_ω‖²` by differencing the full solve pipeline with one
/// Richardson level, repeated at `h/2` for the halving check.
pub fn slope(params: &WaveParams, h_omega: f64) -> Result<SlopeEstimate> {
    if !(h_omega > 0.0) {
        return Err(Error::Domain(format!("h_omega={h_omega} must be positive")));
    }
    params.validate()?;
    let WaveParams { omega, z, half_period } = *params;
    let n_at = |w: f64| norm_squared_at(&WaveParams::new(w, z, half_period));
    let central = n_at(omega - h_omega).is_ok() && n_at(omega + h_omega).is_ok();
    let (d, one_sided): (Box<dyn Fn(f64) -> Result<f64>>, bool) = if central {
        (Box::new(|h: f64| Ok((n_at(omega + h)? - n_at(omega - h)?) / (2.0 * h))), false)
    } else {
        let n0 = n_at(omega)?;
        (Box::new(move |h: f64| Ok((-3.0 * n0 + 4.0 * n_at(omega + h)? - n_at(omega + 2.0 * h)?) / (2.0 * h))), true)
    };
    let (d1, d2, d4) = (d(h_omega)?, d(h_omega / 2.0)?, d(h_omega / 4.0)?);
    let value = (4.0 * d2 - d1) / 3.0;
    let refined = (4.0 * d4 - d2) / 3.0;
    let warning = one_sided.then(|| format!("ω−h_ω={} inadmissible, forward stencil used", omega - h_omega));
    Ok(SlopeEstimate {
        omega,
        h_omega,
        value,
        refined,
        halving_agreement: (value - refined).abs() / refined.abs(),
        one_sided,
        warning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    Unstable,
    StableEvenSubspace,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::StableEvenSubspace => "stable_even_subspace",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// `p = 1` when the slope is positive.
pub fn p_index(slope: f64) -> u8 {
    u8::from(slope > 0.0)
}

/// Index arithmetic: stable iff `n = p`, unstable when `n − p` is odd.
pub fn gss_verdict(n: usize, p: u8) -> Verdict {
    let p = p as usize;
    if n == p {
        Verdict::Stable
    } else if n > p && (n - p) % 2 == 1 {
        Verdict::Unstable
    } else {
        Verdict::Inconclusive
    }
}

/// The same arithmetic restricted to even functions; `n_even = p` gives
/// [`Verdict::StableEvenSubspace`].
pub fn even_subspace_verdict(n_even: usize, p: u8) -> Verdict {
    match gss_verdict(n_even, p) {
        Verdict::Stable => Verdict::StableEvenSubspace,
        v => v,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassifyConfig {
    pub n: usize,
    /// `h_ω` as a fraction of `ω`.
    pub h_omega_rel: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig { n: 1024, h_omega_rel: 1e-3 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub params: WaveParams,
    pub branch: Branch,
    pub n_grid: usize,
    pub n_negative: usize,
    pub n_negative_even: usize,
    pub inertia_count: usize,
    pub tau_neg: f64,
    pub low_eigenvalues: Vec<f64>,
    pub p_index: u8,
    pub slope: f64,
    pub slope_detail: SlopeEstimate,
    pub verdict: Verdict,
    pub even_verdict: Option<Verdict>,
    pub caveat: Option<String>,
}

impl StabilityReport {
    /// `unstable + stable_even_subspace` style label.
    pub fn label(&self) -> String {
        match self.even_verdict {
            Some(e) if e != self.verdict => format!("{} + {}", self.verdict.name(), e.name()),
            _ => self.verdict.name().to_string(),
        }
    }
}

pub fn classify(params: &WaveParams) -> Result<StabilityReport> {
    classify_with(params, &ClassifyConfig::default())
}

pub fn classify_with(params: &WaveParams, config: &ClassifyConfig) -> Result<StabilityReport> {
    let profile = build_profile(params, config.n)?;
    let low: Spectrum = count_negative(&assemble(&profile, Which::L1)?);
    let s = slope(params, config.h_omega_rel * params.omega)?;
    let p = p_index(s.value);
    let mut caveat = None;
    let (verdict, even_verdict) = if params.z == 0.0 {
        caveat = Some("Z=0: ker L₁ contains φ′, outside the trivial-kernel hypothesis".to_string());
        (gss_verdict(low.n_negative, p), None)
    } else if s.value <= 0.0 || low.inconclusive() {
        if low.inconclusive() {
            caveat = Some(format!("eigenvalues within τ={} of 0: {:?}", low.tau_neg, low.band));
        } else {
            caveat = Some(format!("slope {} not positive", s.value));
        }
        (Verdict::Inconclusive, None)
    } else {
        let v = gss_verdict(low.n_negative, p);
        let e = (v != Verdict::Stable).then(|| even_subspace_verdict(low.n_negative_even, p));
        (v, e)
    };
    Ok(StabilityReport {
        params: *params,
        branch: profile.branch,
        n_grid: config.n,
        n_negative: low.n_negative,
        n_negative_even: low.n_negative_even,
        inertia_count: low.inertia_count,
        tau_neg: low.tau_neg,
        low_eigenvalues: low.values(),
        p_index: p,
        slope: s.value,
        slope_detail: s,
        verdict,
        even_verdict,
        caveat,
    })
}
