//! Error types shared by all modules.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// A violated existence condition for the standing-wave construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "condition")]
pub enum Admissibility {
    NonPositiveHalfPeriod { half_period: f64 },
    OmegaBelowDefectBound { omega: f64, bound: f64 },
    OmegaBelowClassical { omega: f64, bound: f64 },
    PeriodBelowT0 { two_l: f64, t0: f64 },
    PeriodBelowT1 { two_l: f64, t1: f64 },
}

impl fmt::Display for Admissibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Admissibility::NonPositiveHalfPeriod { half_period } => {
                write!(f, "L ≤ 0 (L={half_period})")
            }
            Admissibility::OmegaBelowDefectBound { omega, bound } => {
                write!(f, "ω ≤ Z²/4 (ω={omega}, Z²/4={bound})")
            }
            Admissibility::OmegaBelowClassical { omega, bound } => {
                write!(f, "ω ≤ π²/(2L²) (ω={omega}, π²/(2L²)={bound})")
            }
            Admissibility::PeriodBelowT0 { two_l, t0 } => {
                write!(f, "2L ≤ T₀(ω,Z)={t0} (2L={two_l})")
            }
            Admissibility::PeriodBelowT1 { two_l, t1 } => {
                write!(f, "2L ≤ T₁(ω,Z)={t1} (2L={two_l})")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid modulus k={0} (need 0 ≤ k ≤ 1)")]
    InvalidModulus(f64),
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("admissibility failure: {0}")]
    Admissibility(Admissibility),
    #[error("no sign change on [{lo}, {hi}] (f(lo)={flo}, f(hi)={fhi})")]
    NoBracket { lo: f64, hi: f64, flo: f64, fhi: f64 },
    #[error("resolvent pole at k={0}")]
    Pole(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("blow-up at t={t}: {reason}")]
    BlowUp { t: f64, reason: String },
}

impl Error {
    pub fn is_admissibility(&self) -> bool {
        matches!(self, Error::Admissibility(_))
    }
}
