//! Fixtures shared by the benchmarks.

use peakwave::evolve::{LinearStep, Propagator};
use peakwave::{State, WaveParams, WaveProfile};

/// The positive-defect reference point.
pub fn reference() -> WaveParams {
    WaveParams::new(20.0, 1.0, 0.5)
}

pub fn profile(n: usize) -> WaveProfile {
    peakwave::wave::build_profile(&reference(), n).expect("reference point is admissible")
}

pub fn propagator(profile: &WaveProfile, dt: f64, kind: LinearStep) -> (Propagator, State) {
    let p = Propagator::new(profile.grid, profile.params.z, dt, kind).expect("valid grid");
    (p, State::from_profile(profile, 0.0))
}
