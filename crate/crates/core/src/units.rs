//! Frequency conventions. Internally every frequency is angular, rad/ns.

use std::f64::consts::PI;

/// rad/ns per cyclic MHz.
pub const RAD_PER_NS_PER_MHZ: f64 = 2.0 * PI * 1e-3;

pub fn mhz(f: f64) -> f64 {
    f * RAD_PER_NS_PER_MHZ
}

pub fn to_mhz(omega: f64) -> f64 {
    omega / RAD_PER_NS_PER_MHZ
}

/// `T_Δ = π/|Δ|`, half the detuning beat period.
pub fn half_beat_time(delta: f64) -> f64 {
    PI / delta.abs()
}

/// `2mπ/|Δ|`, where the first-order exchange term averages out.
pub fn matched_gate_time(delta: f64, m: u32) -> f64 {
    2.0 * m as f64 * PI / delta.abs()
}
