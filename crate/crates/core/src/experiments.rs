//! Gate fidelities, single gates, gate sequences and J sweeps.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gamma::{corner_average, scan_gamma, GammaGrid};
use crate::magnus::ErrorFunctional;
use crate::model::{
    assemble_sequence, target_unitary, ControlScheme, DriveShape, GateKind, GateSpec,
    Hamiltonian, SystemParams, Topology,
};
use crate::operator::Operator;
use crate::propagate::DEFAULT_STEP;
use crate::quadrature::QuadratureConfig;
use crate::units::{half_beat_time, matched_gate_time, mhz, to_mhz};

/// `|Tr(U†V)| / |Tr(V†V)|`, blind to the global phase of either argument.
pub fn gate_fidelity(u_gate: &Operator, u_ideal: &Operator) -> Result<f64> {
    if u_gate.dim() != u_ideal.dim() {
        return Err(Error::Dimension(format!(
            "cannot compare a {}-dimensional propagator with a {}-dimensional target",
            u_gate.dim(),
            u_ideal.dim()
        )));
    }
    let num = (&u_gate.dagger() * u_ideal).trace().norm();
    let den = (&u_ideal.dagger() * u_ideal).trace().norm();
    Ok(num / den)
}

/// `1 − F`, clamped at 0 against rounding.
pub fn infidelity(u_gate: &Operator, u_ideal: &Operator) -> Result<f64> {
    Ok((1.0 - gate_fidelity(u_gate, u_ideal)?).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Largest integrator step in ns.
    pub step: f64,
    /// Reuse one gate propagator across a sequence when the Hamiltonian
    /// repeats gate to gate.
    pub reuse_periodic: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            step: DEFAULT_STEP,
            reuse_periodic: true,
        }
    }
}

impl RunOptions {
    pub fn with_step(step: f64) -> Self {
        RunOptions {
            step,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequencePoint {
    pub count: usize,
    /// Evaluation time in ns.
    pub time: f64,
    pub infidelity: f64,
}

/// Propagators after `1..=n` gates.
pub fn sequence_propagators(h: &Hamiltonian, options: &RunOptions) -> Result<Vec<Operator>> {
    let t_gate = h.gate().duration;
    let tail = h.tail();
    let n = h.repetitions();
    let head = if tail > 0.0 {
        h.propagate(0.0, tail, options.step)?
    } else {
        Operator::identity(h.dim())
    };
    let mut out = Vec::with_capacity(n);
    let mut u = head;
    if options.reuse_periodic && h.is_gate_periodic() {
        let p = h.propagate(tail, t_gate + tail, options.step)?;
        for _ in 0..n {
            u = &p * &u;
            out.push(u.clone());
        }
    } else {
        for k in 0..n {
            let t0 = k as f64 * t_gate + tail;
            let p = h.propagate(t0, t0 + t_gate, options.step)?;
            u = &p * &u;
            out.push(u.clone());
        }
    }
    Ok(out)
}

fn check_sequence_count(gate: &GateSpec, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("gate count must be >= 1".into()));
    }
    if gate.kind != GateKind::Idle && n % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "X-gate sequences use odd gate counts, got {n}"
        )));
    }
    Ok(())
}

/// Infidelity after `1..=n` gates; X-gate sequences report odd counts only.
pub fn run_sequence(
    params: &SystemParams,
    topology: Topology,
    scheme: ControlScheme,
    gate: GateSpec,
    n: usize,
    options: &RunOptions,
) -> Result<Vec<SequencePoint>> {
    check_sequence_count(&gate, n)?;
    let h = assemble_sequence(params, topology, scheme, gate, n)?;
    let props = sequence_propagators(&h, options)?;
    let mut out = Vec::new();
    for (k, u) in props.iter().enumerate() {
        let count = k + 1;
        if gate.kind != GateKind::Idle && count % 2 == 0 {
            continue;
        }
        let target = target_unitary(&gate, topology, count as u32)?;
        out.push(SequencePoint {
            count,
            time: h.evaluation_time(count),
            infidelity: infidelity(u, &target)?,
        });
    }
    Ok(out)
}

/// Infidelity of one gate, evaluated at `T` (DD: `T + w/2`).
pub fn run_single_gate(
    params: &SystemParams,
    topology: Topology,
    scheme: ControlScheme,
    gate: GateSpec,
    options: &RunOptions,
) -> Result<f64> {
    let h = assemble_sequence(params, topology, scheme, gate, 1)?;
    let u = h.propagate(0.0, h.evaluation_time(1), options.step)?;
    infidelity(&u, &target_unitary(&gate, topology, 1)?)
}

/// Single-gate propagator (for unitarity and oracle checks).
pub fn single_gate_propagator(
    params: &SystemParams,
    topology: Topology,
    scheme: ControlScheme,
    gate: GateSpec,
    options: &RunOptions,
) -> Result<Operator> {
    let h = assemble_sequence(params, topology, scheme, gate, 1)?;
    h.propagate(0.0, h.evaluation_time(1), options.step)
}

/// One curve: `(abscissa, value)` pairs in abscissa order.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelitySeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Infidelity of one gate per coupling value (rad/ns), one series per scheme.
/// Abscissae are reported in cyclic MHz.
pub fn sweep_j(
    params: &SystemParams,
    topology: Topology,
    schemes: &[(String, ControlScheme)],
    gate: GateSpec,
    j_values: &[f64],
    options: &RunOptions,
) -> Result<Vec<FidelitySeries>> {
    if j_values.is_empty() {
        return Err(Error::InvalidParameter("J grid is empty".into()));
    }
    if let Some(j) = j_values.iter().find(|&&j| !(j > 0.0)) {
        return Err(Error::InvalidParameter(format!("J values must be positive, got {j}")));
    }
    let cells: Vec<(usize, f64)> = (0..schemes.len())
        .flat_map(|s| j_values.iter().map(move |&j| (s, j)))
        .collect();
    let values = cells
        .par_iter()
        .map(|&(s, j)| {
            let p = SystemParams {
                coupling: j,
                ..params.clone()
            };
            run_single_gate(&p, topology, schemes[s].1, gate, options)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(schemes
        .iter()
        .enumerate()
        .map(|(s, (label, _))| FidelitySeries {
            label: label.clone(),
            points: j_values
                .iter()
                .zip(&values[s * j_values.len()..(s + 1) * j_values.len()])
                .map(|(&j, &v)| (to_mhz(j), v))
                .collect(),
        })
        .collect())
}

/// FM amplitude: a fixed value or the first local minimum of the functional
/// that matches the gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaChoice {
    Fixed(f64),
    Optimize,
}

/// A scheme as requested by an experiment, before γ is resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeSpec {
    Cd,
    /// The DD drive layout with ideal (zero-width) gaps and no Z pulses.
    CdSegmented { segments: usize },
    Fm { cycles: u32, gamma: GammaChoice },
    /// Pulse width given as a fraction of the segment interval.
    Dd { segments: usize, width_fraction: f64 },
}

impl SchemeSpec {
    pub fn label(&self) -> String {
        match self {
            SchemeSpec::Cd | SchemeSpec::CdSegmented { .. } => "CD".into(),
            SchemeSpec::Fm { cycles, .. } => format!("FM-N{cycles}"),
            SchemeSpec::Dd { segments, .. } => format!("DD-Z{segments}"),
        }
    }
}

/// Functional used to pick γ for a gate: first order away from the matched
/// time, otherwise the second-order idle or X functional.
pub fn gamma_functional(gate: &GateSpec, detuning: f64) -> ErrorFunctional {
    let t_m = matched_gate_time(detuning, 1);
    let ratio = gate.duration / t_m;
    if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
        return ErrorFunctional::Fm1;
    }
    match gate.kind {
        GateKind::Idle => ErrorFunctional::Fm2Idle,
        GateKind::X(_) | GateKind::ParallelXX => ErrorFunctional::Fm2X,
    }
}

/// Settings shared by every cell of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSettings {
    pub run: RunOptions,
    pub gamma_grid: GammaGrid,
    /// Coupling at which γ is optimized (rad/ns).
    pub gamma_coupling: f64,
    pub quadrature: QuadratureConfig,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        ExperimentSettings {
            run: RunOptions::default(),
            gamma_grid: GammaGrid::default(),
            gamma_coupling: mhz(5.0),
            quadrature: QuadratureConfig::default(),
        }
    }
}

/// A scheme with γ resolved; `corner_step` is set when idle FM results are
/// averaged over `γ ± Δγ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedScheme {
    pub label_source: SchemeSpec,
    pub scheme: ControlScheme,
    pub corner_step: Option<f64>,
}

pub fn resolve_scheme(
    spec: &SchemeSpec,
    detuning: f64,
    gate: &GateSpec,
    settings: &ExperimentSettings,
) -> Result<ResolvedScheme> {
    let t = gate.duration;
    let (scheme, corner_step) = match *spec {
        SchemeSpec::Cd => (ControlScheme::cd(), None),
        SchemeSpec::CdSegmented { segments } => (
            ControlScheme::Crosstalk {
                drive: DriveShape::Segmented {
                    segments,
                    width: 0.0,
                },
            },
            None,
        ),
        SchemeSpec::Fm { cycles, gamma } => match gamma {
            GammaChoice::Fixed(g) => (ControlScheme::fm(cycles, g), None),
            GammaChoice::Optimize => {
                let functional = gamma_functional(gate, detuning);
                let p = SystemParams::new(detuning, settings.gamma_coupling)?;
                let scan = scan_gamma(functional, &p, cycles, t, &settings.gamma_grid, &settings.quadrature)?;
                let g = scan.gamma_opt().expect("scan_gamma returns a minimum");
                let corner = (gate.kind == GateKind::Idle).then_some(scan.step);
                (ControlScheme::fm(cycles, g), corner)
            }
        },
        SchemeSpec::Dd {
            segments,
            width_fraction,
        } => {
            if !(width_fraction > 0.0 && width_fraction < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "DD width fraction must lie in (0, 1), got {width_fraction}"
                )));
            }
            let tau = t / segments as f64;
            (ControlScheme::dd(segments, width_fraction * tau), None)
        }
    };
    Ok(ResolvedScheme {
        label_source: *spec,
        scheme,
        corner_step,
    })
}

fn with_gamma(scheme: ControlScheme, gamma: f64) -> ControlScheme {
    match scheme {
        ControlScheme::Fm { cycles, frame, .. } => ControlScheme::Fm {
            cycles,
            amplitude: gamma,
            frame,
        },
        other => other,
    }
}

/// The `(scheme, weight)` runs whose weighted infidelities make up one
/// reported value.
fn corner_runs(r: &ResolvedScheme) -> Vec<(ControlScheme, f64)> {
    match (r.scheme, r.corner_step) {
        (ControlScheme::Fm { amplitude, .. }, Some(step)) => vec![
            (with_gamma(r.scheme, amplitude + step), 0.5),
            (with_gamma(r.scheme, amplitude - step), 0.5),
        ],
        _ => vec![(r.scheme, 1.0)],
    }
}

/// Single-gate infidelity for a resolved scheme, corner-averaged where set.
pub fn run_resolved_gate(
    params: &SystemParams,
    topology: Topology,
    scheme: &ResolvedScheme,
    gate: GateSpec,
    options: &RunOptions,
) -> Result<f64> {
    if let (ControlScheme::Fm { amplitude, .. }, Some(step)) = (scheme.scheme, scheme.corner_step) {
        return corner_average(
            |g| run_single_gate(params, topology, with_gamma(scheme.scheme, g), gate, options),
            amplitude,
            step,
        );
    }
    run_single_gate(params, topology, scheme.scheme, gate, options)
}

/// Sequence infidelities for a resolved scheme, corner-averaged where set.
pub fn run_resolved_sequence(
    params: &SystemParams,
    topology: Topology,
    scheme: &ResolvedScheme,
    gate: GateSpec,
    n: usize,
    options: &RunOptions,
) -> Result<Vec<SequencePoint>> {
    if let (ControlScheme::Fm { amplitude, .. }, Some(step)) = (scheme.scheme, scheme.corner_step) {
        if amplitude - step < -1e-12 * step {
            return Err(Error::InvalidParameter(
                "cannot corner-average below γ = 0".into(),
            ));
        }
    }
    let mut total: Option<Vec<SequencePoint>> = None;
    for (s, weight) in corner_runs(scheme) {
        let pts = run_sequence(params, topology, s, gate, n, options)?;
        total = Some(match total {
            None => pts
                .into_iter()
                .map(|p| SequencePoint {
                    infidelity: weight * p.infidelity,
                    ..p
                })
                .collect(),
            Some(acc) => acc
                .into_iter()
                .zip(pts)
                .map(|(a, p)| SequencePoint {
                    infidelity: a.infidelity + weight * p.infidelity,
                    ..a
                })
                .collect(),
        });
    }
    Ok(total.unwrap_or_default())
}

/// Results of the non-matched gate-time study for one cycle count.
#[derive(Debug, Clone, PartialEq)]
pub struct NonMatchedResult {
    pub cycles: u32,
    pub gamma_opt: f64,
    /// `(count, CD infidelity, FM infidelity)` for odd counts.
    pub sequence: Vec<(usize, f64, f64)>,
}

/// X1 gates at a gate time that is not a multiple of `2π/|Δ|`, with γ from
/// the first-order functional.
pub fn non_matched_study(
    params: &SystemParams,
    gate_time: f64,
    cycles: &[u32],
    n_gates: usize,
    settings: &ExperimentSettings,
) -> Result<Vec<NonMatchedResult>> {
    let t_half = half_beat_time(params.detuning);
    let r = gate_time / (2.0 * t_half);
    if (r - r.round()).abs() < 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "gate time {gate_time} ns is a matched gate time"
        )));
    }
    let gate = GateSpec::x(1, gate_time);
    let cd = run_sequence(params, Topology::Pair, ControlScheme::cd(), gate, n_gates, &settings.run)?;
    let mut out = Vec::new();
    for &n in cycles {
        let spec = SchemeSpec::Fm {
            cycles: n,
            gamma: GammaChoice::Optimize,
        };
        let resolved = resolve_scheme(&spec, params.detuning, &gate, settings)?;
        let fm = run_sequence(params, Topology::Pair, resolved.scheme, gate, n_gates, &settings.run)?;
        let gamma_opt = match resolved.scheme {
            ControlScheme::Fm { amplitude, .. } => amplitude,
            _ => unreachable!("FM spec resolves to FM"),
        };
        out.push(NonMatchedResult {
            cycles: n,
            gamma_opt,
            sequence: cd
                .iter()
                .zip(&fm)
                .map(|(a, b)| (a.count, a.infidelity, b.infidelity))
                .collect(),
        });
    }
    Ok(out)
}

/// `log10(IF_reference / IF_scheme)`.
pub fn orders_of_magnitude(reference: f64, scheme: f64) -> f64 {
    (reference / scheme).log10()
}
