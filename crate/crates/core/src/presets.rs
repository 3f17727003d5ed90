//! Figure-level experiment descriptions and their runner.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::experiments::{
    resolve_scheme, run_resolved_gate, run_resolved_sequence, ExperimentSettings, GammaChoice,
    ResolvedScheme, SchemeSpec,
};
use crate::gamma::scan_gamma;
use crate::magnus::ErrorFunctional;
use crate::model::{assemble_sequence, ControlScheme, GateKind, GateSpec, SystemParams, Topology};
use crate::units::{matched_gate_time, mhz, to_mhz};

#[derive(Debug, Clone, PartialEq)]
pub enum PanelKind {
    /// Single-gate infidelity against gate time (ns).
    TimeScan { coupling: f64, times: Vec<f64> },
    /// Single-gate infidelity against coupling (rad/ns; reported in MHz).
    JSweep { couplings: Vec<f64> },
    /// Infidelity after each gate of a sequence against evaluation time.
    Sequence { coupling: f64, count: usize },
    /// Error functional (rad/ns) against γ (reported in MHz).
    GammaScan {
        functional: ErrorFunctional,
        cycles: Vec<u32>,
        coupling: f64,
    },
    /// Operation-frame control amplitudes (rad/ns) against time.
    Waveforms {
        scheme: SchemeSpec,
        coupling: f64,
        sample_step: f64,
    },
}

impl PanelKind {
    pub fn abscissa(&self) -> &'static str {
        match self {
            PanelKind::TimeScan { .. } => "gate time (ns)",
            PanelKind::JSweep { .. } => "J/2pi (MHz)",
            PanelKind::Sequence { .. } => "time (ns)",
            PanelKind::GammaScan { .. } => "gamma/2pi (MHz)",
            PanelKind::Waveforms { .. } => "time (ns)",
        }
    }

    pub fn value(&self) -> &'static str {
        match self {
            PanelKind::GammaScan { .. } => "error functional (rad/ns)",
            PanelKind::Waveforms { .. } => "control amplitude (rad/ns)",
            _ => "infidelity 1-F",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub id: String,
    pub kind: PanelKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub description: String,
    pub topology: Topology,
    /// rad/ns
    pub detuning: f64,
    pub gate: GateSpec,
    pub schemes: Vec<SchemeSpec>,
    pub panels: Vec<Panel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub panel: String,
    pub series: String,
    pub abscissa: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    /// Sorted by panel, series, abscissa.
    pub rows: Vec<Row>,
    /// `(series, γ in rad/ns)` for every FM scheme after resolution.
    pub gammas: Vec<(String, f64)>,
}

pub fn default_j_grid() -> Vec<f64> {
    (1..=10).map(|k| mhz(k as f64)).collect()
}

fn scheme_params(spec: &ExperimentSpec, coupling: f64) -> Result<SystemParams> {
    SystemParams::new(spec.detuning, coupling)
}

fn resolve_all(spec: &ExperimentSpec, gate: &GateSpec, settings: &ExperimentSettings) -> Result<Vec<ResolvedScheme>> {
    spec.schemes
        .par_iter()
        .map(|s| resolve_scheme(s, spec.detuning, gate, settings))
        .collect()
}

fn check_labels(spec: &ExperimentSpec) -> Result<()> {
    let mut labels: Vec<String> = spec.schemes.iter().map(|s| s.label()).collect();
    labels.sort();
    if labels.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParameter(format!(
            "experiment '{}' has two schemes with the same label",
            spec.name
        )));
    }
    Ok(())
}

pub fn run_experiment(spec: &ExperimentSpec, settings: &ExperimentSettings) -> Result<ExperimentOutput> {
    check_labels(spec)?;
    let resolved = resolve_all(spec, &spec.gate, settings)?;
    let gammas = resolved
        .iter()
        .filter_map(|r| match r.scheme {
            ControlScheme::Fm { amplitude, .. } => Some((r.label_source.label(), amplitude)),
            _ => None,
        })
        .collect();
    let mut rows = Vec::new();
    for panel in &spec.panels {
        rows.extend(run_panel(spec, panel, &resolved, settings)?);
    }
    rows.sort_by(|a, b| {
        a.panel
            .cmp(&b.panel)
            .then_with(|| a.series.cmp(&b.series))
            .then_with(|| a.abscissa.total_cmp(&b.abscissa))
    });
    Ok(ExperimentOutput { rows, gammas })
}

fn run_panel(
    spec: &ExperimentSpec,
    panel: &Panel,
    resolved: &[ResolvedScheme],
    settings: &ExperimentSettings,
) -> Result<Vec<Row>> {
    let row = |series: String, abscissa: f64, value: f64| Row {
        panel: panel.id.clone(),
        series,
        abscissa,
        value,
    };
    match &panel.kind {
        PanelKind::TimeScan { coupling, times } => {
            if times.is_empty() {
                return Err(Error::InvalidParameter("gate-time grid is empty".into()));
            }
            let p = scheme_params(spec, *coupling)?;
            let cells: Vec<(usize, f64)> = (0..spec.schemes.len())
                .flat_map(|s| times.iter().map(move |&t| (s, t)))
                .collect();
            cells
                .par_iter()
                .map(|&(s, t)| {
                    let gate = GateSpec {
                        duration: t,
                        ..spec.gate
                    };
                    let r = resolve_scheme(&spec.schemes[s], spec.detuning, &gate, settings)?;
                    let v = run_resolved_gate(&p, spec.topology, &r, gate, &settings.run)?;
                    Ok(row(spec.schemes[s].label(), t, v))
                })
                .collect()
        }
        PanelKind::JSweep { couplings } => {
            if couplings.is_empty() {
                return Err(Error::InvalidParameter("J grid is empty".into()));
            }
            let cells: Vec<(usize, f64)> = (0..resolved.len())
                .flat_map(|s| couplings.iter().map(move |&j| (s, j)))
                .collect();
            cells
                .par_iter()
                .map(|&(s, j)| {
                    if !(j > 0.0) {
                        return Err(Error::InvalidParameter(format!(
                            "J values must be positive, got {} MHz",
                            to_mhz(j)
                        )));
                    }
                    let p = scheme_params(spec, j)?;
                    let v = run_resolved_gate(&p, spec.topology, &resolved[s], spec.gate, &settings.run)?;
                    Ok(row(resolved[s].label_source.label(), to_mhz(j), v))
                })
                .collect()
        }
        PanelKind::Sequence { coupling, count } => {
            let p = scheme_params(spec, *coupling)?;
            let per_scheme = resolved
                .par_iter()
                .map(|r| run_resolved_sequence(&p, spec.topology, r, spec.gate, *count, &settings.run))
                .collect::<Result<Vec<_>>>()?;
            Ok(resolved
                .iter()
                .zip(per_scheme)
                .flat_map(|(r, pts)| {
                    let label = r.label_source.label();
                    pts.into_iter()
                        .map(move |pt| (label.clone(), pt.time, pt.infidelity))
                })
                .map(|(l, t, v)| row(l, t, v))
                .collect())
        }
        PanelKind::GammaScan {
            functional,
            cycles,
            coupling,
        } => {
            let p = scheme_params(spec, *coupling)?;
            let mut out = Vec::new();
            for &n in cycles {
                let scan = match scan_gamma(*functional, &p, n, spec.gate.duration, &settings.gamma_grid, &settings.quadrature) {
                    Ok(s) => s,
                    Err(Error::NoMinimum { scan, .. }) => *scan,
                    Err(e) => return Err(e),
                };
                for (g, v) in scan.grid.iter().zip(&scan.values) {
                    out.push(row(format!("FM-N{n}"), to_mhz(*g), *v));
                }
            }
            Ok(out)
        }
        PanelKind::Waveforms {
            scheme,
            coupling,
            sample_step,
        } => {
            let p = scheme_params(spec, *coupling)?;
            let r = resolve_scheme(scheme, spec.detuning, &spec.gate, settings)?;
            let h = assemble_sequence(&p, spec.topology, r.scheme, spec.gate, 1)?;
            let t_end = h.evaluation_time(1);
            if !(*sample_step > 0.0) {
                return Err(Error::InvalidParameter("waveform sample step must be positive".into()));
            }
            let n = (t_end / sample_step).round() as usize;
            let mut out = Vec::new();
            for k in 0..=n {
                let t = (k as f64 * sample_step).min(t_end);
                for (name, v) in h.controls(t) {
                    out.push(row(name, t, v));
                }
            }
            Ok(out)
        }
    }
}

/// Preset names with one-line descriptions, in figure order.
pub fn preset_names() -> Vec<(&'static str, &'static str)> {
    vec![
        ("fig2", "pair, CD idle infidelity against gate time"),
        ("fig3b", "pair, idle gate against J: CD and FM N=4/6/8"),
        ("fig3c", "pair, 20 consecutive idle gates: CD and FM N=4/6/8"),
        ("fig4a", "pair, X1 drive and FM N=4 Z2 waveforms"),
        ("fig4b", "pair, X1 gate against J: CD and FM N=4/6/8"),
        ("fig4c", "pair, 21 consecutive X1 gates: CD and FM N=4/6/8"),
        ("fig5", "pair, idle gate under DD Z-4: waveforms, J sweep, 20-gate sequence"),
        ("fig6", "pair, X1 gate under DD Z-4: waveforms, J sweep, 21-gate sequence"),
        ("fig8", "five-qubit star, idle gate under FM N=4/6/8"),
        ("fig9", "five-qubit star, X2 gate under single-site FM N=4/6/8"),
        ("fig10", "five-qubit star, idle gate under DD Z-4"),
        ("fig11", "five-qubit star, X2 gate under DD Z-4"),
        ("fig12", "second-order idle FM error against gamma, N=4/6/8"),
        ("fig13", "second-order X1 FM error against gamma, N=4/6/8"),
        ("fig14", "pair, X2 gate under single-site FM N=4/6/8"),
        ("fig15", "pair, parallel X1X2 under FM N=4/6/8"),
        ("fig16", "first-order FM error against gamma at T = 30 ns, N=4/6/8"),
        ("fig17", "pair, X1 gate at non-matched T = 30 ns under FM N=4/6/8"),
        ("fig18", "pair, X2 gate under single-site DD Z-4"),
        ("fig19", "pair, parallel X1X2 under DD Z-4"),
    ]
}

const DETUNING_MHZ: f64 = 50.0;
const COUPLING_MHZ: f64 = 5.0;

fn fm_schemes() -> Vec<SchemeSpec> {
    let mut v = vec![SchemeSpec::Cd];
    for n in [4, 6, 8] {
        v.push(SchemeSpec::Fm {
            cycles: n,
            gamma: GammaChoice::Optimize,
        });
    }
    v
}

fn dd_schemes(gate: GateKind) -> Vec<SchemeSpec> {
    let cd = match gate {
        GateKind::Idle => SchemeSpec::Cd,
        _ => SchemeSpec::CdSegmented { segments: 4 },
    };
    vec![
        cd,
        SchemeSpec::Dd {
            segments: 4,
            width_fraction: 0.25,
        },
    ]
}

fn panel(id: &str, kind: PanelKind) -> Panel {
    Panel {
        id: id.to_string(),
        kind,
    }
}

fn sequence_count(gate: GateKind) -> usize {
    match gate {
        GateKind::Idle => 20,
        _ => 21,
    }
}

fn waveform_panel(scheme: SchemeSpec) -> Panel {
    panel(
        "a",
        PanelKind::Waveforms {
            scheme,
            coupling: mhz(COUPLING_MHZ),
            sample_step: 0.05,
        },
    )
}

fn standard(
    name: &str,
    topology: Topology,
    gate_kind: GateKind,
    gate_time: f64,
    schemes: Vec<SchemeSpec>,
    panels: &[&str],
    waveform_scheme: SchemeSpec,
) -> ExperimentSpec {
    let count = if gate_time == matched_gate_time(mhz(DETUNING_MHZ), 1) {
        sequence_count(gate_kind)
    } else {
        15
    };
    let mut ps = Vec::new();
    for &id in panels {
        ps.push(match id {
            "a" => waveform_panel(waveform_scheme),
            "b" => panel("b", PanelKind::JSweep { couplings: default_j_grid() }),
            _ => panel(
                "c",
                PanelKind::Sequence {
                    coupling: mhz(COUPLING_MHZ),
                    count,
                },
            ),
        });
    }
    let description = preset_names()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, d)| d.to_string())
        .unwrap_or_default();
    ExperimentSpec {
        name: name.to_string(),
        description,
        topology,
        detuning: mhz(DETUNING_MHZ),
        gate: GateSpec {
            kind: gate_kind,
            duration: gate_time,
        },
        schemes,
        panels: ps,
    }
}

fn gamma_preset(name: &str, functional: ErrorFunctional, gate_time: f64) -> ExperimentSpec {
    let mut spec = standard(name, Topology::Pair, GateKind::Idle, gate_time, vec![], &[], SchemeSpec::Cd);
    spec.gate.kind = match functional {
        ErrorFunctional::Fm2Idle => GateKind::Idle,
        _ => GateKind::X(1),
    };
    spec.panels = vec![panel(
        "a",
        PanelKind::GammaScan {
            functional,
            cycles: vec![4, 6, 8],
            coupling: mhz(COUPLING_MHZ),
        },
    )];
    spec
}

pub fn preset(name: &str) -> Option<ExperimentSpec> {
    let t_m = matched_gate_time(mhz(DETUNING_MHZ), 1);
    let fm4 = |gamma| SchemeSpec::Fm { cycles: 4, gamma };
    let dd = SchemeSpec::Dd {
        segments: 4,
        width_fraction: 0.25,
    };
    let pair = Topology::Pair;
    let star = Topology::FiveQubitStar;
    use GateKind::*;
    let spec = match name {
        "fig2" => {
            let mut s = standard(name, pair, Idle, t_m, vec![SchemeSpec::Cd], &[], SchemeSpec::Cd);
            s.panels = vec![panel(
                "a",
                PanelKind::TimeScan {
                    coupling: mhz(COUPLING_MHZ),
                    times: (4..=120).map(|k| 0.5 * k as f64).collect(),
                },
            )];
            s
        }
        "fig3b" => standard(name, pair, Idle, t_m, fm_schemes(), &["b"], SchemeSpec::Cd),
        "fig3c" => standard(name, pair, Idle, t_m, fm_schemes(), &["c"], SchemeSpec::Cd),
        "fig4a" => standard(name, pair, X(1), t_m, vec![], &["a"], fm4(GammaChoice::Optimize)),
        "fig4b" => standard(name, pair, X(1), t_m, fm_schemes(), &["b"], SchemeSpec::Cd),
        "fig4c" => standard(name, pair, X(1), t_m, fm_schemes(), &["c"], SchemeSpec::Cd),
        "fig5" => standard(name, pair, Idle, t_m, dd_schemes(Idle), &["a", "b", "c"], dd),
        "fig6" => standard(name, pair, X(1), t_m, dd_schemes(X(1)), &["a", "b", "c"], dd),
        "fig8" => standard(name, star, Idle, t_m, fm_schemes(), &["a", "b", "c"], fm4(GammaChoice::Optimize)),
        "fig9" => standard(name, star, X(2), t_m, fm_schemes(), &["a", "b", "c"], fm4(GammaChoice::Optimize)),
        "fig10" => standard(name, star, Idle, t_m, dd_schemes(Idle), &["a", "b", "c"], dd),
        "fig11" => standard(name, star, X(2), t_m, dd_schemes(X(2)), &["a", "b", "c"], dd),
        "fig12" => gamma_preset(name, ErrorFunctional::Fm2Idle, t_m),
        "fig13" => gamma_preset(name, ErrorFunctional::Fm2X, t_m),
        "fig14" => standard(name, pair, X(2), t_m, fm_schemes(), &["a", "b", "c"], fm4(GammaChoice::Optimize)),
        "fig15" => standard(name, pair, ParallelXX, t_m, fm_schemes(), &["a", "b", "c"], fm4(GammaChoice::Optimize)),
        "fig16" => gamma_preset(name, ErrorFunctional::Fm1, 30.0),
        "fig17" => standard(name, pair, X(1), 30.0, fm_schemes(), &["a", "b", "c"], fm4(GammaChoice::Optimize)),
        "fig18" => standard(name, pair, X(2), t_m, dd_schemes(X(2)), &["a", "b", "c"], dd),
        "fig19" => standard(name, pair, ParallelXX, t_m, dd_schemes(ParallelXX), &["a", "b", "c"], dd),
        _ => return None,
    };
    Some(spec)
}
