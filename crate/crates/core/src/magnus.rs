//! First- and second-order Magnus crosstalk-error functionals.
//!
//! Each functional is the sum of the magnitudes of the coefficients of the
//! error operators in the averaged Hamiltonian, in rad/ns. Hermitian-conjugate
//! pairs therefore count twice.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::operator::C64;
use crate::pulse::{FmZModulation, SineEnvelopeDrive, Waveform};
use crate::quadrature::{CompositeRule, QuadratureConfig};

fn modulated_phase(params: &SystemParams, fm: &FmZModulation, t: f64) -> f64 {
    params.detuning * t + 2.0 * fm.accumulated_phase(t)
}

fn e_phase(params: &SystemParams, fm: &FmZModulation, t: f64) -> C64 {
    C64::from_polar(1.0, modulated_phase(params, fm, t))
}

/// `|J/T ∫ e^{iφ}| + |J/T ∫ e^{−iφ}|` with `φ = Δt + 2α(t)`.
///
/// The node count starts at `config.nodes_1d` and doubles until the result
/// settles to 1e-12 relative.
pub fn epsilon_fm1(params: &SystemParams, fm: &FmZModulation, config: &QuadratureConfig) -> Result<f64> {
    let t = fm.duration;
    let eval = |nodes: usize| -> Result<f64> {
        let rule = CompositeRule::uniform(0.0, t, nodes)?;
        let plus = rule.integrate(|s| e_phase(params, fm, s));
        let minus = rule.integrate(|s| e_phase(params, fm, s).conj());
        Ok(params.coupling / t * (plus.norm() + minus.norm()))
    };
    let mut nodes = config.nodes_1d.max(16);
    let mut prev = eval(nodes)?;
    let scale = params.coupling.max(f64::MIN_POSITIVE);
    for _ in 0..12 {
        nodes *= 2;
        let next = eval(nodes)?;
        if (next - prev).abs() <= 1e-12 * next.abs().max(1e-3 * scale) {
            return Ok(next);
        }
        prev = next;
    }
    Ok(prev)
}

/// `∬_{t2<t1} e^{iφ(t1)} e^{−iφ(t2)}` over `[0, T]`.
fn exchange_kernel(params: &SystemParams, fm: &FmZModulation, rule: &CompositeRule) -> C64 {
    rule.triangle_separable(|t| e_phase(params, fm, t), |t| e_phase(params, fm, t).conj())
}

/// `(J²/T) |∬ sin(φ(t1) − φ(t2))|`.
pub fn epsilon_fm2_idle(params: &SystemParams, fm: &FmZModulation, config: &QuadratureConfig) -> Result<f64> {
    let t = fm.duration;
    let rule = CompositeRule::uniform(0.0, t, config.nodes_2d)?;
    let k = exchange_kernel(params, fm, &rule);
    Ok(params.coupling * params.coupling / t * k.im.abs())
}

/// Drive/exchange cross term `|J/T ∬ [Ω(t1)e^{iφ(t2)} − Ω(t2)e^{iφ(t1)}]|`
/// for the sine-envelope π pulse.
fn fm2_drive_cross_term(params: &SystemParams, fm: &FmZModulation, rule: &CompositeRule) -> f64 {
    let drive = SineEnvelopeDrive::pi_pulse(fm.duration, 1);
    let omega = |t: f64| C64::new(drive.sample(t), 0.0);
    let a = rule.triangle_separable(omega, |t| e_phase(params, fm, t));
    let b = rule.triangle_separable(|t| e_phase(params, fm, t), omega);
    params.coupling / fm.duration * (a - b).norm()
}

pub fn epsilon_fm2_x(params: &SystemParams, fm: &FmZModulation, config: &QuadratureConfig) -> Result<f64> {
    let rule = CompositeRule::uniform(0.0, fm.duration, config.nodes_2d)?;
    let k = exchange_kernel(params, fm, &rule);
    let idle = params.coupling * params.coupling / fm.duration * k.im.abs();
    Ok(fm2_drive_cross_term(params, fm, &rule) + idle)
}

/// `ε_X1 + ε_X2 − ε_idle` with `ε_X2 = ε_X1`.
pub fn epsilon_fm2_parallel_xx(
    params: &SystemParams,
    fm: &FmZModulation,
    config: &QuadratureConfig,
) -> Result<f64> {
    let x = epsilon_fm2_x(params, fm, config)?;
    let idle = epsilon_fm2_idle(params, fm, config)?;
    Ok(2.0 * x - idle)
}

/// First-order DD error for ideal pulses and `S` segments of `T/S`.
pub fn epsilon_dd1(params: &SystemParams, segments: usize, gate_time: f64) -> Result<f64> {
    if segments == 0 || segments % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "DD first-order error needs an even segment count, got {segments}"
        )));
    }
    let d = params.detuning;
    let tau = gate_time / segments as f64;
    let mut sum = C64::new(0.0, 0.0);
    for s in 1..=segments {
        let sign = if s % 2 == 1 { 1.0 } else { -1.0 };
        let e1 = C64::from_polar(1.0, d * s as f64 * tau);
        let e0 = C64::from_polar(1.0, d * (s - 1) as f64 * tau);
        sum += (e1 - e0) * sign;
    }
    let sum = sum / C64::new(0.0, d);
    Ok(2.0 * (params.coupling / gate_time * sum).norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedFormGate {
    Idle,
    X,
    ParallelXX,
}

/// `(ε_CD, ε_DD)` second-order errors at the matched time for ideal DD Z-4
/// pulses and the segmented drive.
pub fn dd_second_order_closed_forms(params: &SystemParams, gate: ClosedFormGate) -> (f64, f64) {
    let j = params.coupling;
    let d = params.detuning;
    let cd_idle = 2.0 * (j * j / (2.0 * d)).abs();
    let dd_idle = 2.0 * ((PI - 4.0) / (2.0 * PI) * j * j / d).abs();
    let drive = match gate {
        ClosedFormGate::Idle => 0.0,
        ClosedFormGate::X => 2.0 * (j / 4.0).abs(),
        ClosedFormGate::ParallelXX => 4.0 * (j / 4.0).abs(),
    };
    (cd_idle + drive, dd_idle + drive)
}

/// `(J²/T)|∬ f(t1) f(t2) sin(Δ(t1 − t2))|` with `f = (−1)^{s−1}` in segment
/// `s`: the idle second-order DD error for ideal pulses.
pub fn dd_sign_kernel_idle(
    params: &SystemParams,
    segments: usize,
    gate_time: f64,
    config: &QuadratureConfig,
) -> Result<f64> {
    if segments == 0 {
        return Err(Error::InvalidParameter("segment count must be positive".into()));
    }
    let tau = gate_time / segments as f64;
    let breaks: Vec<f64> = (0..=segments).map(|s| s as f64 * tau).collect();
    let rule = CompositeRule::with_breaks(&breaks, config.nodes_2d)?;
    let sign = |t: f64| {
        let s = ((t / tau).floor() as usize).min(segments - 1);
        if s % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    };
    let d = params.detuning;
    let k = rule.triangle_separable(
        |t| C64::from_polar(sign(t), d * t),
        |t| C64::from_polar(sign(t), -d * t),
    );
    Ok(params.coupling * params.coupling / gate_time * k.im.abs())
}

/// Functionals the γ optimizer can minimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorFunctional {
    Fm1,
    Fm2Idle,
    Fm2X,
    Fm2ParallelXX,
}

impl ErrorFunctional {
    pub fn evaluate(&self, params: &SystemParams, fm: &FmZModulation, config: &QuadratureConfig) -> Result<f64> {
        match self {
            ErrorFunctional::Fm1 => epsilon_fm1(params, fm, config),
            ErrorFunctional::Fm2Idle => epsilon_fm2_idle(params, fm, config),
            ErrorFunctional::Fm2X => epsilon_fm2_x(params, fm, config),
            ErrorFunctional::Fm2ParallelXX => epsilon_fm2_parallel_xx(params, fm, config),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ErrorFunctional::Fm1 => "fm1",
            ErrorFunctional::Fm2Idle => "fm2-idle",
            ErrorFunctional::Fm2X => "fm2-x",
            ErrorFunctional::Fm2ParallelXX => "fm2-xx",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "fm1" => Some(ErrorFunctional::Fm1),
            "fm2-idle" => Some(ErrorFunctional::Fm2Idle),
            "fm2-x" => Some(ErrorFunctional::Fm2X),
            "fm2-xx" => Some(ErrorFunctional::Fm2ParallelXX),
            _ => None,
        }
    }
}
