//! TOML run configuration. Frequencies are cyclic MHz in the file and are
//! converted to rad/ns once, here.

use std::ops::Range;

use serde::Deserialize;
use toml::Spanned;

use xtalk_core::experiments::{ExperimentSettings, GammaChoice, RunOptions, SchemeSpec};
use xtalk_core::magnus::ErrorFunctional;
use xtalk_core::model::{GateKind, GateSpec, SystemParams, Topology};
use xtalk_core::presets::{preset, ExperimentSpec, Panel, PanelKind};
use xtalk_core::quadrature::QuadratureConfig;
use xtalk_core::units::{matched_gate_time, mhz};
use xtalk_core::verify::VerifyConfig;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TimeValue {
    Ns(f64),
    Word(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GammaValue {
    Mhz(f64),
    Word(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeEntry {
    pub kind: String,
    pub cycles: Option<u32>,
    pub gamma_mhz: Option<GammaValue>,
    pub segments: Option<usize>,
    pub width_fraction: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaSection {
    pub step_mhz: Option<Spanned<f64>>,
    pub max_mhz: Option<Spanned<f64>>,
    pub coupling_mhz: Option<Spanned<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub nodes_1d: Option<Spanned<usize>>,
    pub nodes_2d: Option<Spanned<usize>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSection {
    pub functional: Option<Spanned<String>>,
    pub cycles: Option<Spanned<Vec<u32>>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub fm_gamma_mhz: Option<Spanned<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<Spanned<String>>,
    pub topology: Option<Spanned<String>>,
    pub detuning_mhz: Option<Spanned<f64>>,
    pub coupling_mhz: Option<Spanned<f64>>,
    pub j_grid_mhz: Option<Spanned<Vec<f64>>>,
    pub gate: Option<Spanned<String>>,
    pub gate_time_ns: Option<Spanned<TimeValue>>,
    pub repetitions: Option<Spanned<usize>>,
    pub times_ns: Option<Spanned<Vec<f64>>>,
    pub step_ns: Option<Spanned<f64>>,
    pub reuse_periodic: Option<bool>,
    pub output: Option<Spanned<String>>,
    pub schemes: Option<Vec<Spanned<SchemeEntry>>>,
    #[serde(default)]
    pub gamma: GammaSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub optimize: OptimizeSection,
    #[serde(default)]
    pub verify: VerifySection,
}

/// A parsed config together with its source, for line-referenced errors.
pub struct Loaded {
    pub config: RunConfig,
    source: String,
    path: String,
}

fn line_of(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

impl Loaded {
    pub fn empty() -> Self {
        Loaded {
            config: RunConfig::default(),
            source: String::new(),
            path: "<defaults>".into(),
        }
    }

    pub fn parse(source: String, path: &str) -> Result<Self, CliError> {
        match toml::from_str::<RunConfig>(&source) {
            Ok(config) => Ok(Loaded {
                config,
                source,
                path: path.to_string(),
            }),
            Err(e) => {
                let line = e.span().map(|s| line_of(&source, s.start)).unwrap_or(1);
                Err(CliError::validation(format!("{path}:{line}: {}", e.message())))
            }
        }
    }

    pub fn load(path: &str) -> Result<Self, CliError> {
        let source = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read config {path}: {e}")))?;
        Self::parse(source, path)
    }

    fn err(&self, span: Range<usize>, msg: impl std::fmt::Display) -> CliError {
        CliError::validation(format!("{}:{}: {msg}", self.path, line_of(&self.source, span.start)))
    }

    fn positive(&self, v: &Option<Spanned<f64>>, name: &str) -> Result<Option<f64>, CliError> {
        match v {
            Some(s) if !(*s.get_ref() > 0.0) || !s.get_ref().is_finite() => {
                Err(self.err(s.span(), format!("{name} must be positive, got {}", s.get_ref())))
            }
            Some(s) => Ok(Some(*s.get_ref())),
            None => Ok(None),
        }
    }

    fn non_negative(&self, v: &Option<Spanned<f64>>, name: &str) -> Result<Option<f64>, CliError> {
        match v {
            Some(s) if !(*s.get_ref() >= 0.0) || !s.get_ref().is_finite() => {
                Err(self.err(s.span(), format!("{name} must be non-negative, got {}", s.get_ref())))
            }
            Some(s) => Ok(Some(*s.get_ref())),
            None => Ok(None),
        }
    }

    fn grid(&self, v: &Spanned<Vec<f64>>, name: &str) -> Result<Vec<f64>, CliError> {
        if v.get_ref().is_empty() {
            return Err(self.err(v.span(), format!("{name} is empty")));
        }
        if let Some(x) = v.get_ref().iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
            return Err(self.err(v.span(), format!("{name} entries must be positive, got {x}")));
        }
        Ok(v.get_ref().clone())
    }

    pub fn detuning(&self) -> Result<f64, CliError> {
        match &self.config.detuning_mhz {
            Some(s) if *s.get_ref() == 0.0 || !s.get_ref().is_finite() => {
                Err(self.err(s.span(), "detuning_mhz must be finite and non-zero"))
            }
            Some(s) => Ok(mhz(*s.get_ref())),
            None => Ok(mhz(50.0)),
        }
    }

    pub fn coupling(&self) -> Result<Option<f64>, CliError> {
        Ok(self.non_negative(&self.config.coupling_mhz, "coupling_mhz")?.map(mhz))
    }

    pub fn run_options(&self, step_flag: Option<f64>) -> Result<RunOptions, CliError> {
        let mut run = RunOptions::default();
        if let Some(s) = self.positive(&self.config.step_ns, "step_ns")? {
            run.step = s;
        }
        if let Some(s) = step_flag {
            if !(s > 0.0) || !s.is_finite() {
                return Err(CliError::validation(format!("--step must be positive, got {s}")));
            }
            run.step = s;
        }
        if let Some(r) = self.config.reuse_periodic {
            run.reuse_periodic = r;
        }
        Ok(run)
    }

    pub fn settings(&self, step_flag: Option<f64>) -> Result<ExperimentSettings, CliError> {
        let mut s = ExperimentSettings {
            run: self.run_options(step_flag)?,
            ..Default::default()
        };
        let g = &self.config.gamma;
        if let Some(v) = self.positive(&g.step_mhz, "gamma.step_mhz")? {
            s.gamma_grid.step = mhz(v);
        }
        if let Some(v) = self.positive(&g.max_mhz, "gamma.max_mhz")? {
            s.gamma_grid.max = mhz(v);
        }
        if s.gamma_grid.max <= s.gamma_grid.step {
            let span = g.max_mhz.as_ref().or(g.step_mhz.as_ref()).map(|x| x.span()).unwrap_or(0..0);
            return Err(self.err(span, "gamma.max_mhz must exceed gamma.step_mhz"));
        }
        if let Some(v) = self.positive(&g.coupling_mhz, "gamma.coupling_mhz")? {
            s.gamma_coupling = mhz(v);
        }
        s.quadrature = self.quadrature()?;
        Ok(s)
    }

    fn quadrature(&self) -> Result<QuadratureConfig, CliError> {
        let mut q = QuadratureConfig::default();
        let sec = &self.config.quadrature;
        for (field, target, name) in [
            (&sec.nodes_1d, &mut q.nodes_1d, "quadrature.nodes_1d"),
            (&sec.nodes_2d, &mut q.nodes_2d, "quadrature.nodes_2d"),
        ] {
            if let Some(v) = field {
                if *v.get_ref() < 16 {
                    return Err(self.err(v.span(), format!("{name} must be at least 16")));
                }
                *target = *v.get_ref();
            }
        }
        Ok(q)
    }

    pub fn preset_name(&self, flag: Option<&str>) -> Result<Option<String>, CliError> {
        if let Some(name) = flag {
            return Ok(Some(name.to_string()));
        }
        Ok(self.config.preset.as_ref().map(|p| p.get_ref().clone()))
    }

    fn base_spec(&self, flag: Option<&str>) -> Result<Option<ExperimentSpec>, CliError> {
        match self.preset_name(flag)? {
            None => Ok(None),
            Some(name) => match preset(&name) {
                Some(p) => Ok(Some(p)),
                None => {
                    let msg = format!("unknown preset '{name}' (see `xtalk list-presets`)");
                    match (&self.config.preset, flag) {
                        (Some(s), None) => Err(self.err(s.span(), msg)),
                        _ => Err(CliError::validation(msg)),
                    }
                }
            },
        }
    }

    fn topology(&self) -> Result<Option<Topology>, CliError> {
        let Some(t) = &self.config.topology else {
            return Ok(None);
        };
        match t.get_ref().as_str() {
            "pair" => Ok(Some(Topology::Pair)),
            "star5" | "five-qubit-star" => Ok(Some(Topology::FiveQubitStar)),
            other => Err(self.err(t.span(), format!("unknown topology '{other}', expected pair or star5"))),
        }
    }

    fn gate_kind(&self) -> Result<Option<GateKind>, CliError> {
        let Some(g) = &self.config.gate else {
            return Ok(None);
        };
        let s = g.get_ref().to_ascii_lowercase();
        let kind = match s.as_str() {
            "idle" => GateKind::Idle,
            "xx" | "x1x2" => GateKind::ParallelXX,
            _ => match s.strip_prefix('x').and_then(|q| q.parse::<usize>().ok()) {
                Some(q) => GateKind::X(q),
                None => {
                    return Err(self.err(
                        g.span(),
                        format!("unknown gate '{}', expected idle, x<qubit> or xx", g.get_ref()),
                    ))
                }
            },
        };
        Ok(Some(kind))
    }

    fn gate_time(&self, detuning: f64) -> Result<Option<f64>, CliError> {
        let Some(t) = &self.config.gate_time_ns else {
            return Ok(None);
        };
        match t.get_ref() {
            TimeValue::Word(w) if w == "matched" => Ok(Some(matched_gate_time(detuning, 1))),
            TimeValue::Word(w) => Err(self.err(t.span(), format!("gate_time_ns must be a number or \"matched\", got '{w}'"))),
            TimeValue::Ns(v) if *v > 0.0 && v.is_finite() => Ok(Some(*v)),
            TimeValue::Ns(v) => Err(self.err(t.span(), format!("gate_time_ns must be positive, got {v}"))),
        }
    }

    fn scheme(&self, entry: &Spanned<SchemeEntry>) -> Result<SchemeSpec, CliError> {
        let e = entry.get_ref();
        let bad = |msg: String| self.err(entry.span(), msg);
        let segments = |default: usize| -> Result<usize, CliError> {
            let s = e.segments.unwrap_or(default);
            if s == 0 || s % 2 != 0 {
                return Err(bad(format!("segments must be a positive even number, got {s}")));
            }
            Ok(s)
        };
        let unused = |fields: &[(&str, bool)]| -> Result<(), CliError> {
            match fields.iter().find(|(_, set)| *set) {
                Some((name, _)) => Err(bad(format!("scheme '{}' does not take '{name}'", e.kind))),
                None => Ok(()),
            }
        };
        match e.kind.as_str() {
            "cd" => {
                unused(&[
                    ("cycles", e.cycles.is_some()),
                    ("gamma_mhz", e.gamma_mhz.is_some()),
                    ("segments", e.segments.is_some()),
                    ("width_fraction", e.width_fraction.is_some()),
                ])?;
                Ok(SchemeSpec::Cd)
            }
            "cd-segmented" => {
                unused(&[
                    ("cycles", e.cycles.is_some()),
                    ("gamma_mhz", e.gamma_mhz.is_some()),
                    ("width_fraction", e.width_fraction.is_some()),
                ])?;
                Ok(SchemeSpec::CdSegmented { segments: segments(4)? })
            }
            "fm" => {
                unused(&[
                    ("segments", e.segments.is_some()),
                    ("width_fraction", e.width_fraction.is_some()),
                ])?;
                let cycles = e.cycles.ok_or_else(|| bad("fm scheme needs 'cycles'".into()))?;
                if cycles == 0 {
                    return Err(bad("cycles must be positive".into()));
                }
                let gamma = match &e.gamma_mhz {
                    None => GammaChoice::Optimize,
                    Some(GammaValue::Word(w)) if w == "optimize" => GammaChoice::Optimize,
                    Some(GammaValue::Word(w)) => {
                        return Err(bad(format!("gamma_mhz must be a number or \"optimize\", got '{w}'")))
                    }
                    Some(GammaValue::Mhz(g)) if *g >= 0.0 && g.is_finite() => GammaChoice::Fixed(mhz(*g)),
                    Some(GammaValue::Mhz(g)) => return Err(bad(format!("gamma_mhz must be non-negative, got {g}"))),
                };
                Ok(SchemeSpec::Fm { cycles, gamma })
            }
            "dd" => {
                unused(&[("cycles", e.cycles.is_some()), ("gamma_mhz", e.gamma_mhz.is_some())])?;
                let w = e.width_fraction.unwrap_or(0.25);
                if !(w > 0.0 && w < 1.0) {
                    return Err(bad(format!("width_fraction must lie in (0, 1), got {w}")));
                }
                Ok(SchemeSpec::Dd {
                    segments: segments(4)?,
                    width_fraction: w,
                })
            }
            other => Err(bad(format!(
                "unknown scheme kind '{other}', expected cd, cd-segmented, fm or dd"
            ))),
        }
    }

    /// The experiment to simulate: a preset with config overrides, or a
    /// custom experiment built from the config alone.
    pub fn experiment(&self, preset_flag: Option<&str>) -> Result<ExperimentSpec, CliError> {
        let detuning = self.detuning()?;
        let mut spec = match self.base_spec(preset_flag)? {
            Some(p) => p,
            None => ExperimentSpec {
                name: "custom".into(),
                description: "configured experiment".into(),
                topology: Topology::Pair,
                detuning,
                gate: GateSpec::idle(matched_gate_time(detuning, 1)),
                schemes: vec![SchemeSpec::Cd],
                panels: vec![],
            },
        };
        if self.config.detuning_mhz.is_some() {
            let old_matched = matched_gate_time(spec.detuning, 1);
            spec.detuning = detuning;
            if (spec.gate.duration - old_matched).abs() < 1e-12 {
                spec.gate.duration = matched_gate_time(detuning, 1);
            }
        }
        if let Some(t) = self.topology()? {
            spec.topology = t;
        }
        if let Some(k) = self.gate_kind()? {
            spec.gate.kind = k;
        }
        if let (GateKind::X(q), Some(g)) = (spec.gate.kind, &self.config.gate) {
            if q == 0 || q > spec.topology.n_qubits() {
                return Err(self.err(
                    g.span(),
                    format!("gate X{q} targets a qubit outside the {} topology", spec.topology.name()),
                ));
            }
        }
        if let Some(t) = self.gate_time(spec.detuning)? {
            spec.gate.duration = t;
        }
        if let Some(entries) = &self.config.schemes {
            if entries.is_empty() {
                return Err(CliError::validation(format!("{}: schemes list is empty", self.path)));
            }
            spec.schemes = entries.iter().map(|e| self.scheme(e)).collect::<Result<_, _>>()?;
        }
        let coupling = self.coupling()?;
        let mut panels = Vec::new();
        if let Some(g) = &self.config.j_grid_mhz {
            let couplings = self.grid(g, "j_grid_mhz")?.into_iter().map(mhz).collect();
            panels.push(Panel {
                id: "j-sweep".into(),
                kind: PanelKind::JSweep { couplings },
            });
        }
        if let Some(r) = &self.config.repetitions {
            if *r.get_ref() == 0 {
                return Err(self.err(r.span(), "repetitions must be at least 1"));
            }
            panels.push(Panel {
                id: "sequence".into(),
                kind: PanelKind::Sequence {
                    coupling: coupling.unwrap_or(mhz(5.0)),
                    count: *r.get_ref(),
                },
            });
        }
        if let Some(t) = &self.config.times_ns {
            panels.push(Panel {
                id: "time-scan".into(),
                kind: PanelKind::TimeScan {
                    coupling: coupling.unwrap_or(mhz(5.0)),
                    times: self.grid(t, "times_ns")?,
                },
            });
        }
        if !panels.is_empty() {
            spec.panels = panels;
        } else if let Some(c) = coupling {
            for p in &mut spec.panels {
                match &mut p.kind {
                    PanelKind::TimeScan { coupling, .. }
                    | PanelKind::Sequence { coupling, .. }
                    | PanelKind::GammaScan { coupling, .. }
                    | PanelKind::Waveforms { coupling, .. } => *coupling = c,
                    PanelKind::JSweep { .. } => {}
                }
            }
        }
        if spec.panels.is_empty() {
            spec.panels.push(Panel {
                id: "single".into(),
                kind: PanelKind::JSweep {
                    couplings: vec![coupling.unwrap_or(mhz(5.0))],
                },
            });
        }
        if spec.panels.iter().any(|p| matches!(p.kind, PanelKind::JSweep { .. }))
            && spec.schemes.is_empty()
        {
            return Err(CliError::validation("experiment has no schemes to run".into()));
        }
        Ok(spec)
    }

    pub fn output(&self, flag: Option<&str>) -> Option<String> {
        flag.map(str::to_string)
            .or_else(|| self.config.output.as_ref().map(|o| o.get_ref().clone()))
    }

    /// `(functional, cycles, gate time, detuning, coupling)` for a γ scan.
    pub fn optimize_request(
        &self,
        preset_flag: Option<&str>,
        functional_flag: Option<&str>,
        cycles_flag: Option<&[u32]>,
    ) -> Result<OptimizeRequest, CliError> {
        let mut req = OptimizeRequest {
            functional: ErrorFunctional::Fm2Idle,
            cycles: vec![4, 6, 8],
            gate_time: matched_gate_time(self.detuning()?, 1),
            params: SystemParams::new(self.detuning()?, mhz(5.0))
                .map_err(|e| CliError::validation(e.to_string()))?,
        };
        if let Some(p) = self.base_spec(preset_flag)? {
            let scan = p.panels.iter().find_map(|panel| match &panel.kind {
                PanelKind::GammaScan {
                    functional,
                    cycles,
                    coupling,
                } => Some((*functional, cycles.clone(), *coupling)),
                _ => None,
            });
            let Some((f, c, j)) = scan else {
                return Err(CliError::validation(format!(
                    "preset '{}' has no gamma scan; use fig12, fig13 or fig16",
                    p.name
                )));
            };
            req.functional = f;
            req.cycles = c;
            req.params.coupling = j;
            req.params.detuning = p.detuning;
            req.gate_time = p.gate.duration;
        }
        if self.config.detuning_mhz.is_some() {
            req.params.detuning = self.detuning()?;
            req.gate_time = matched_gate_time(req.params.detuning, 1);
        }
        if let Some(t) = self.gate_time(req.params.detuning)? {
            req.gate_time = t;
        }
        if let Some(v) = self.positive(&self.config.gamma.coupling_mhz, "gamma.coupling_mhz")? {
            req.params.coupling = mhz(v);
        }
        if let Some(f) = &self.config.optimize.functional {
            req.functional = ErrorFunctional::from_name(f.get_ref()).ok_or_else(|| {
                self.err(f.span(), format!("unknown functional '{}', expected fm1, fm2-idle, fm2-x or fm2-xx", f.get_ref()))
            })?;
        }
        if let Some(name) = functional_flag {
            req.functional = ErrorFunctional::from_name(name).ok_or_else(|| {
                CliError::validation(format!("unknown functional '{name}', expected fm1, fm2-idle, fm2-x or fm2-xx"))
            })?;
        }
        if let Some(c) = &self.config.optimize.cycles {
            if c.get_ref().is_empty() || c.get_ref().contains(&0) {
                return Err(self.err(c.span(), "optimize.cycles must be a non-empty list of positive counts"));
            }
            req.cycles = c.get_ref().clone();
        }
        if let Some(c) = cycles_flag {
            if c.is_empty() || c.contains(&0) {
                return Err(CliError::validation("--cycles must list positive counts".into()));
            }
            req.cycles = c.to_vec();
        }
        Ok(req)
    }

    pub fn verify_config(&self, step_flag: Option<f64>) -> Result<VerifyConfig, CliError> {
        let params = SystemParams::new(self.detuning()?, self.coupling()?.unwrap_or(mhz(5.0)))
            .map_err(|e| CliError::validation(e.to_string()))?;
        let mut v = VerifyConfig {
            params,
            run: self.run_options(step_flag)?,
            quadrature: self.quadrature()?,
            ..Default::default()
        };
        if let Some(g) = self.non_negative(&self.config.verify.fm_gamma_mhz, "verify.fm_gamma_mhz")? {
            v.fm_gamma = mhz(g);
        }
        Ok(v)
    }
}

#[derive(Debug, Clone)]
pub struct OptimizeRequest {
    pub functional: ErrorFunctional,
    pub cycles: Vec<u32>,
    pub gate_time: f64,
    pub params: SystemParams,
}
