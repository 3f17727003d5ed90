//! Oracle and invariant checks run by `xtalk verify`.

use std::f64::consts::PI;

use crate::error::Result;
use crate::experiments::{gate_fidelity, run_single_gate, single_gate_propagator, RunOptions};
use crate::magnus::{
    dd_second_order_closed_forms, dd_sign_kernel_idle, epsilon_dd1, epsilon_fm1, epsilon_fm2_idle,
    ClosedFormGate,
};
use crate::model::{ControlScheme, GateSpec, SystemParams, Topology};
use crate::operator::{Operator, C64};
use crate::pulse::FmZModulation;
use crate::quadrature::QuadratureConfig;
use crate::units::{matched_gate_time, mhz};

pub const UNITARITY_TOL: f64 = 1e-10;
pub const CLOSED_FORM_PROPAGATOR_TOL: f64 = 1e-8;
pub const QUADRATURE_REL_TOL: f64 = 1e-6;
pub const STEP_HALVING_TOL: f64 = 0.01;
pub const PHASE_TOL: f64 = 1e-12;
/// Infidelities below this are rounding noise for the step-halving check.
pub const INFIDELITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn at_most(name: &'static str, measured: f64, tolerance: f64) -> Self {
        CheckResult {
            name,
            measured,
            tolerance,
            passed: measured <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub params: SystemParams,
    pub run: RunOptions,
    pub quadrature: QuadratureConfig,
    /// FM amplitude used by the propagator checks (rad/ns).
    pub fm_gamma: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            params: SystemParams::new(mhz(50.0), mhz(5.0)).expect("valid defaults"),
            run: RunOptions::default(),
            quadrature: QuadratureConfig::default(),
            fm_gamma: mhz(244.0),
        }
    }
}

fn relative(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Pair CD idle propagator from the static two-level block
/// `[[−Δ/2, J], [J, Δ/2]]` on `{|01⟩, |10⟩}`, taken back to the interaction
/// frame.
pub fn cd_idle_closed_form(params: &SystemParams, gate_time: f64) -> Operator {
    let (d, j, t) = (params.detuning, params.coupling, gate_time);
    let omega = (d * d + 4.0 * j * j).sqrt();
    let (s, c) = (0.5 * omega * t).sin_cos();
    let (dz, dx) = if omega > 0.0 { (d / omega, 2.0 * j / omega) } else { (0.0, 0.0) };
    let lo = C64::from_polar(1.0, -0.5 * d * t);
    let hi = lo.conj();
    let (z, one) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    let off = C64::new(0.0, -s * dx);
    #[rustfmt::skip]
    let m = [
        one, z, z, z,
        z, lo * C64::new(c, s * dz), lo * off, z,
        z, hi * off, hi * C64::new(c, -s * dz), z,
        z, z, z, one,
    ];
    Operator::from_row_major(4, &m).expect("4x4")
}

fn propagator_cases(config: &VerifyConfig, t: f64) -> Vec<(ControlScheme, GateSpec)> {
    let tau = t / 4.0;
    vec![
        (ControlScheme::cd(), GateSpec::idle(t)),
        (ControlScheme::cd(), GateSpec::x(1, t)),
        (ControlScheme::fm(4, config.fm_gamma), GateSpec::idle(t)),
        (ControlScheme::fm(4, config.fm_gamma), GateSpec::x(1, t)),
        (ControlScheme::dd(4, tau / 4.0), GateSpec::idle(t)),
        (ControlScheme::dd(4, tau / 4.0), GateSpec::x(1, t)),
    ]
}

pub fn run_checks(config: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let p = &config.params;
    p.validate()?;
    let t = matched_gate_time(p.detuning, 1);
    let mut out = Vec::new();

    let cases = propagator_cases(config, t);
    let mut unitarity: f64 = 0.0;
    for &(scheme, gate) in &cases {
        let u = single_gate_propagator(p, Topology::Pair, scheme, gate, &config.run)?;
        unitarity = unitarity.max(u.unitarity_residual());
    }
    out.push(CheckResult::at_most("unitarity", unitarity, UNITARITY_TOL));

    let u = single_gate_propagator(p, Topology::Pair, ControlScheme::cd(), GateSpec::idle(t), &config.run)?;
    out.push(CheckResult::at_most(
        "cd-idle-closed-form",
        u.max_abs_diff(&cd_idle_closed_form(p, t)),
        CLOSED_FORM_PROPAGATOR_TOL,
    ));

    let fm0 = FmZModulation::new(0.0, 4, t)?;
    let (cd2, dd2) = dd_second_order_closed_forms(p, ClosedFormGate::Idle);
    out.push(CheckResult::at_most(
        "fm2-idle-zero-gamma-vs-closed-form",
        relative(epsilon_fm2_idle(p, &fm0, &config.quadrature)?, cd2),
        QUADRATURE_REL_TOL,
    ));
    let kernel = dd_sign_kernel_idle(p, 4, t, &config.quadrature)?;
    out.push(CheckResult::at_most(
        "dd-kernel-vs-closed-form",
        relative(kernel, dd2),
        QUADRATURE_REL_TOL,
    ));
    let ratio_err = if cd2 == 0.0 {
        0.0
    } else {
        (kernel / cd2 - ((PI - 4.0) / PI).abs()).abs()
    };
    out.push(CheckResult::at_most("dd-cd-ratio", ratio_err, QUADRATURE_REL_TOL));

    let mut dd1: f64 = 0.0;
    for s in [4, 6, 8] {
        dd1 = dd1.max(epsilon_dd1(p, s, t)?);
    }
    out.push(CheckResult::at_most("dd1-exact", dd1, 1e-14 * p.coupling));
    out.push(CheckResult::at_most(
        "fm1-exact-at-zero-gamma",
        epsilon_fm1(p, &fm0, &config.quadrature)?,
        1e-12 * p.coupling,
    ));

    let target = Operator::identity(4);
    let f = gate_fidelity(&u, &target)?;
    let phased = u.scale(C64::from_polar(1.0, 0.7));
    out.push(CheckResult::at_most(
        "phase-invariance",
        (gate_fidelity(&phased, &target)? - f).abs(),
        PHASE_TOL,
    ));

    let halved = RunOptions {
        step: config.run.step / 2.0,
        ..config.run
    };
    let mut worst: f64 = 0.0;
    for &(scheme, gate) in &cases {
        let a = run_single_gate(p, Topology::Pair, scheme, gate, &config.run)?;
        let b = run_single_gate(p, Topology::Pair, scheme, gate, &halved)?;
        if a.max(b) > INFIDELITY_FLOOR {
            worst = worst.max(relative(a, b));
        }
    }
    out.push(CheckResult::at_most("step-halving", worst, STEP_HALVING_TOL));
    Ok(out)
}
