//! CSV rendering. Numbers use `{:.16e}` so every value round-trips.

use std::fmt::Write as _;

use xtalk_core::experiments::{ExperimentSettings, SchemeSpec, GammaChoice};
use xtalk_core::gamma::GammaScan;
use xtalk_core::presets::{ExperimentOutput, ExperimentSpec, PanelKind};
use xtalk_core::units::to_mhz;

use crate::config::OptimizeRequest;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn list(xs: &[f64], f: impl Fn(f64) -> f64) -> String {
    xs.iter().map(|&x| num(f(x))).collect::<Vec<_>>().join(" ")
}

fn scheme_line(s: &SchemeSpec) -> String {
    match *s {
        SchemeSpec::Cd => "cd".into(),
        SchemeSpec::CdSegmented { segments } => format!("cd-segmented segments={segments} width_ns=0"),
        SchemeSpec::Fm { cycles, gamma } => match gamma {
            GammaChoice::Fixed(g) => format!("fm cycles={cycles} gamma_mhz={}", num(to_mhz(g))),
            GammaChoice::Optimize => format!("fm cycles={cycles} gamma=optimize"),
        },
        SchemeSpec::Dd {
            segments,
            width_fraction,
        } => format!("dd segments={segments} width_fraction={}", num(width_fraction)),
    }
}

fn settings_header(out: &mut String, settings: &ExperimentSettings) {
    let _ = writeln!(out, "# step_ns = {}", num(settings.run.step));
    let _ = writeln!(out, "# reuse_periodic = {}", settings.run.reuse_periodic);
    let _ = writeln!(out, "# gamma_step_mhz = {}", num(to_mhz(settings.gamma_grid.step)));
    let _ = writeln!(out, "# gamma_max_mhz = {}", num(to_mhz(settings.gamma_grid.max)));
    let _ = writeln!(out, "# gamma_coupling_mhz = {}", num(to_mhz(settings.gamma_coupling)));
    let _ = writeln!(out, "# quadrature_nodes_1d = {}", settings.quadrature.nodes_1d);
    let _ = writeln!(out, "# quadrature_nodes_2d = {}", settings.quadrature.nodes_2d);
}

pub fn simulate_csv(spec: &ExperimentSpec, settings: &ExperimentSettings, result: &ExperimentOutput) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# xtalk simulate");
    let _ = writeln!(out, "# experiment = {}", spec.name);
    let _ = writeln!(out, "# description = {}", spec.description);
    let _ = writeln!(out, "# topology = {}", spec.topology.name());
    let _ = writeln!(out, "# detuning_mhz = {}", num(to_mhz(spec.detuning)));
    let _ = writeln!(out, "# gate = {}", spec.gate.label());
    let _ = writeln!(out, "# gate_time_ns = {}", num(spec.gate.duration));
    settings_header(&mut out, settings);
    for s in &spec.schemes {
        let _ = writeln!(out, "# scheme {} = {}", s.label(), scheme_line(s));
    }
    for (label, g) in &result.gammas {
        let _ = writeln!(out, "# resolved {label} gamma_mhz = {}", num(to_mhz(*g)));
    }
    for p in &spec.panels {
        let detail = match &p.kind {
            PanelKind::TimeScan { coupling, times } => format!(
                "time-scan coupling_mhz={} times_ns=[{}]",
                num(to_mhz(*coupling)),
                list(times, |t| t)
            ),
            PanelKind::JSweep { couplings } => format!("j-sweep j_mhz=[{}]", list(couplings, to_mhz)),
            PanelKind::Sequence { coupling, count } => {
                format!("sequence coupling_mhz={} count={count}", num(to_mhz(*coupling)))
            }
            PanelKind::GammaScan {
                functional,
                cycles,
                coupling,
            } => format!(
                "gamma-scan functional={} cycles={:?} coupling_mhz={}",
                functional.name(),
                cycles,
                num(to_mhz(*coupling))
            ),
            PanelKind::Waveforms {
                scheme,
                coupling,
                sample_step,
            } => format!(
                "waveforms scheme=[{}] coupling_mhz={} sample_step_ns={}",
                scheme_line(scheme),
                num(to_mhz(*coupling)),
                num(*sample_step)
            ),
        };
        let _ = writeln!(out, "# panel {} = {}", p.id, detail);
        let _ = writeln!(out, "# panel {} axes = {} ; {}", p.id, p.kind.abscissa(), p.kind.value());
    }
    let _ = writeln!(out, "panel,scheme,abscissa,value");
    for r in &result.rows {
        let _ = writeln!(out, "{},{},{},{}", r.panel, r.series, num(r.abscissa), num(r.value));
    }
    out
}

pub fn optimize_csv(req: &OptimizeRequest, settings: &ExperimentSettings, scans: &[GammaScan]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# xtalk optimize-gamma");
    let _ = writeln!(out, "# functional = {}", req.functional.name());
    let _ = writeln!(out, "# detuning_mhz = {}", num(to_mhz(req.params.detuning)));
    let _ = writeln!(out, "# coupling_mhz = {}", num(to_mhz(req.params.coupling)));
    let _ = writeln!(out, "# gate_time_ns = {}", num(req.gate_time));
    let _ = writeln!(out, "# cycles = {:?}", req.cycles);
    settings_header(&mut out, settings);
    let _ = writeln!(out, "row,cycles,gamma_mhz,epsilon_rad_per_ns");
    for s in scans {
        for (g, v) in s.grid.iter().zip(&s.values) {
            let _ = writeln!(out, "scan,{},{},{}", s.cycles, num(to_mhz(*g)), num(*v));
        }
    }
    for s in scans {
        match s.opt_index {
            Some(i) => {
                let _ = writeln!(out, "optimum,{},{},{}", s.cycles, num(to_mhz(s.grid[i])), num(s.values[i]));
                if s.at_edge() {
                    let _ = writeln!(out, "# N={} optimum sits at the edge of the scanned range", s.cycles);
                }
            }
            None => {
                let _ = writeln!(out, "# N={} no minimum in range", s.cycles);
            }
        }
    }
    out
}
