//! Rotating-frame Hamiltonians for the pair and the five-qubit star.
//!
//! The exchange term on the edge between neighbour `j` and centre `c` is
//! `J (e^{iφ(t)} σ_j⁻ σ_c⁺ + h.c.)` with `σ⁺ = |0⟩⟨1|`, `σ⁻ = |1⟩⟨0|` and
//! `φ(t) = Δ t` in the operation frame. `|1⟩` is the upper level, so with
//! `Δ = ω_j − ω_c` this is the usual co-rotating exchange term.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::operator::{embed, embed_pair, pauli, Operator, C64};
use crate::propagate::{propagate, TimeGrid};
use crate::pulse::{
    FmZModulation, ModulatedQuadratureDrive, NascentDeltaTrain, SegmentedDrive,
    SineEnvelopeDrive, Waveform,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topology {
    Pair,
    FiveQubitStar,
}

impl Topology {
    pub fn n_qubits(&self) -> usize {
        match self {
            Topology::Pair => 2,
            Topology::FiveQubitStar => 5,
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits()
    }

    /// Qubit 2 is the centre of the star; in the pair it is the idle qubit.
    pub fn center(&self) -> usize {
        2
    }

    /// `(neighbour, centre)` for every exchange edge.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        match self {
            Topology::Pair => vec![(1, 2)],
            Topology::FiveQubitStar => vec![(1, 2), (3, 2), (4, 2), (5, 2)],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Topology::Pair => "pair",
            Topology::FiveQubitStar => "five-qubit-star",
        }
    }
}

/// Detuning and coupling in rad/ns. All edges share the same values.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub detuning: f64,
    pub coupling: f64,
    /// Edge indices (into [`Topology::edges`]) whose coupling is switched off.
    pub disabled_edges: Vec<usize>,
}

impl SystemParams {
    pub fn new(detuning: f64, coupling: f64) -> Result<Self> {
        let p = SystemParams {
            detuning,
            coupling,
            disabled_edges: Vec::new(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn without_edges(mut self, edges: &[usize]) -> Self {
        self.disabled_edges.extend_from_slice(edges);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.detuning == 0.0 || !self.detuning.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "detuning must be finite and nonzero, got {}",
                self.detuning
            )));
        }
        if !(self.coupling >= 0.0) || !self.coupling.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coupling must be finite and >= 0, got {}",
                self.coupling
            )));
        }
        Ok(())
    }
}

/// Drive envelope used for X gates without suppression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriveShape {
    Sine,
    /// The DD drive layout without the Z pulses.
    Segmented { segments: usize, width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FmFrame {
    /// Integrate in the frame that follows the modulation.
    Modulated,
    /// Integrate in the operation frame with an explicit Z drive.
    Operation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControlScheme {
    Crosstalk {
        drive: DriveShape,
    },
    Fm {
        cycles: u32,
        amplitude: f64,
        frame: FmFrame,
    },
    Dd {
        segments: usize,
        width: f64,
        z_pulses: bool,
    },
}

impl ControlScheme {
    pub fn cd() -> Self {
        ControlScheme::Crosstalk {
            drive: DriveShape::Sine,
        }
    }

    pub fn fm(cycles: u32, amplitude: f64) -> Self {
        ControlScheme::Fm {
            cycles,
            amplitude,
            frame: FmFrame::Modulated,
        }
    }

    pub fn dd(segments: usize, width: f64) -> Self {
        ControlScheme::Dd {
            segments,
            width,
            z_pulses: true,
        }
    }

    pub fn label(&self) -> String {
        match self {
            ControlScheme::Crosstalk { .. } => "CD".into(),
            ControlScheme::Fm { cycles, .. } => format!("FM-N{cycles}"),
            ControlScheme::Dd { segments, .. } => format!("DD-Z{segments}"),
        }
    }

    fn validate(&self, gate_time: f64) -> Result<()> {
        match *self {
            ControlScheme::Crosstalk {
                drive: DriveShape::Segmented { segments, width },
            } => SegmentedDrive::new(segments, gate_time / segments as f64, width, 1).map(|_| ()),
            ControlScheme::Crosstalk { .. } => Ok(()),
            ControlScheme::Fm {
                cycles, amplitude, ..
            } => FmZModulation::new(amplitude, cycles, gate_time).map(|_| ()),
            ControlScheme::Dd {
                segments, width, ..
            } => {
                if segments < 4 || segments % 2 != 0 {
                    return Err(Error::InvalidParameter(format!(
                        "DD needs an even segment count >= 4, got {segments}"
                    )));
                }
                NascentDeltaTrain::new(gate_time / segments as f64, width, segments).map(|_| ())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Idle,
    X(usize),
    ParallelXX,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateSpec {
    pub kind: GateKind,
    pub duration: f64,
}

impl GateSpec {
    pub fn idle(duration: f64) -> Self {
        GateSpec {
            kind: GateKind::Idle,
            duration,
        }
    }

    pub fn x(target: usize, duration: f64) -> Self {
        GateSpec {
            kind: GateKind::X(target),
            duration,
        }
    }

    pub fn parallel_xx(duration: f64) -> Self {
        GateSpec {
            kind: GateKind::ParallelXX,
            duration,
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            GateKind::Idle => "idle".into(),
            GateKind::X(q) => format!("X{q}"),
            GateKind::ParallelXX => "X1X2".into(),
        }
    }

    fn targets(&self, topology: Topology) -> Result<Vec<usize>> {
        let n = topology.n_qubits();
        match self.kind {
            GateKind::Idle => Ok(vec![]),
            GateKind::X(q) if (1..=n).contains(&q) => Ok(vec![q]),
            GateKind::X(q) => Err(Error::InvalidParameter(format!(
                "X target qubit {q} does not exist in the {} topology",
                topology.name()
            ))),
            GateKind::ParallelXX => Ok(vec![1, 2]),
        }
    }
}

/// `Σ_edges σ_j⁻ σ_c⁺` over the enabled edges.
fn exchange_lowering(params: &SystemParams, topology: Topology) -> Operator {
    let n = topology.n_qubits();
    let mut a = Operator::zeros(topology.dim());
    for (k, (j, c)) in topology.edges().into_iter().enumerate() {
        if params.disabled_edges.contains(&k) {
            continue;
        }
        a.add_scaled(
            C64::new(1.0, 0.0),
            &embed_pair(&pauli::minus(), j, &pauli::plus(), c, n),
        );
    }
    a
}

fn exchange_with_phase(coupling: f64, a: &Operator, phase: f64) -> Operator {
    let e = C64::from_polar(coupling, phase);
    let mut h = a.scale(e);
    h.add_scaled(C64::new(1.0, 0.0), &a.dagger().scale(e.conj()));
    h
}

pub fn xy_interaction_operation_frame(params: &SystemParams, topology: Topology, t: f64) -> Operator {
    let a = exchange_lowering(params, topology);
    exchange_with_phase(params.coupling, &a, params.detuning * t)
}

/// Exchange term in the frame following the FM drive on the centre qubit:
/// every edge phase becomes `Δt + 2α(t)`.
pub fn xy_interaction_modulated_frame(
    params: &SystemParams,
    topology: Topology,
    fm: &FmZModulation,
    t: f64,
) -> Operator {
    let a = exchange_lowering(params, topology);
    exchange_with_phase(
        params.coupling,
        &a,
        params.detuning * t + 2.0 * fm.accumulated_phase(t),
    )
}

#[derive(Debug, Clone)]
enum Drive {
    Sine(SineEnvelopeDrive),
    Segmented(SegmentedDrive),
}

impl Drive {
    fn sample(&self, t: f64) -> f64 {
        match self {
            Drive::Sine(d) => d.sample(t),
            Drive::Segmented(d) => d.sample(t),
        }
    }
}

/// A time-dependent Hamiltonian for `repetitions` back-to-back gates.
///
/// Gate controls and the FM phase restart every gate; the exchange phase and
/// the DD pulse train run on absolute time.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    topology: Topology,
    gate: GateSpec,
    scheme: ControlScheme,
    repetitions: usize,
    coupling: f64,
    detuning: f64,
    lowering: Operator,
    lowering_dag: Operator,
    modulation: Option<FmZModulation>,
    explicit_fm_z: bool,
    drives: Vec<(Operator, Drive)>,
    quadrature: Option<(Operator, Operator, ModulatedQuadratureDrive)>,
    z_train: Option<NascentDeltaTrain>,
    center_z: Operator,
}

pub fn assemble_hamiltonian(
    params: &SystemParams,
    topology: Topology,
    scheme: ControlScheme,
    gate: GateSpec,
) -> Result<Hamiltonian> {
    assemble_sequence(params, topology, scheme, gate, 1)
}

pub fn assemble_sequence(
    params: &SystemParams,
    topology: Topology,
    scheme: ControlScheme,
    gate: GateSpec,
    repetitions: usize,
) -> Result<Hamiltonian> {
    params.validate()?;
    if !(gate.duration > 0.0) || !gate.duration.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gate time must be positive, got {}",
            gate.duration
        )));
    }
    if repetitions == 0 {
        return Err(Error::InvalidParameter("repetition count must be >= 1".into()));
    }
    if let Some(&k) = params
        .disabled_edges
        .iter()
        .find(|&&k| k >= topology.edges().len())
    {
        return Err(Error::InvalidParameter(format!(
            "edge {k} does not exist in the {} topology",
            topology.name()
        )));
    }
    scheme.validate(gate.duration)?;
    let targets = gate.targets(topology)?;
    let n = topology.n_qubits();
    let center = topology.center();
    let t_gate = gate.duration;

    let lowering = exchange_lowering(params, topology);
    let mut h = Hamiltonian {
        topology,
        gate,
        scheme,
        repetitions,
        coupling: params.coupling,
        detuning: params.detuning,
        lowering_dag: lowering.dagger(),
        lowering,
        modulation: None,
        explicit_fm_z: false,
        drives: Vec::new(),
        quadrature: None,
        z_train: None,
        center_z: embed(&pauli::z(), center, n),
    };

    match scheme {
        ControlScheme::Crosstalk { drive } => {
            for &q in &targets {
                let d = match drive {
                    DriveShape::Sine => Drive::Sine(SineEnvelopeDrive::pi_pulse(t_gate, q)),
                    DriveShape::Segmented { segments, width } => Drive::Segmented(
                        SegmentedDrive::new(segments, t_gate / segments as f64, width, q)?,
                    ),
                };
                h.drives.push((embed(&pauli::x(), q, n), d));
            }
        }
        ControlScheme::Fm {
            cycles,
            amplitude,
            frame,
        } => {
            let fm = FmZModulation::new(amplitude, cycles, t_gate)?;
            h.modulation = Some(fm);
            for &q in &targets {
                let base = SineEnvelopeDrive::pi_pulse(t_gate, q);
                if q == center && frame == FmFrame::Operation {
                    h.quadrature = Some((
                        embed(&pauli::x(), q, n),
                        embed(&pauli::y(), q, n),
                        ModulatedQuadratureDrive {
                            base,
                            modulation: fm,
                        },
                    ));
                } else {
                    h.drives.push((embed(&pauli::x(), q, n), Drive::Sine(base)));
                }
            }
            h.explicit_fm_z = frame == FmFrame::Operation;
        }
        ControlScheme::Dd {
            segments,
            width,
            z_pulses,
        } => {
            let tau = t_gate / segments as f64;
            for &q in &targets {
                h.drives.push((
                    embed(&pauli::x(), q, n),
                    Drive::Segmented(SegmentedDrive::new(segments, tau, width, q)?),
                ));
            }
            if z_pulses {
                h.z_train = Some(NascentDeltaTrain::new(tau, width, segments * repetitions)?);
            }
        }
    }
    Ok(h)
}

impl Hamiltonian {
    pub fn dim(&self) -> usize {
        self.topology.dim()
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn gate(&self) -> GateSpec {
        self.gate
    }

    pub fn scheme(&self) -> ControlScheme {
        self.scheme
    }

    pub fn repetitions(&self) -> usize {
        self.repetitions
    }

    /// Extra time after the last gate boundary before evaluation: `w/2` when
    /// the DD pulse straddles it, else 0.
    pub fn tail(&self) -> f64 {
        self.z_train.map_or(0.0, |z| 0.5 * z.width)
    }

    /// Evaluation time after `n` gates.
    pub fn evaluation_time(&self, n: usize) -> f64 {
        n as f64 * self.gate.duration + self.tail()
    }

    /// `(gate index, time within the gate)`; `None` past the last gate.
    fn local_time(&self, t: f64) -> Option<f64> {
        let t_gate = self.gate.duration;
        let k = (t / t_gate).floor();
        if k < 0.0 || k >= self.repetitions as f64 {
            return None;
        }
        Some(t - k * t_gate)
    }

    pub fn at(&self, t: f64) -> Operator {
        self.sample(t, None)
    }

    /// Sample for one integrator step of length `dt` centred at `t`. The Z
    /// pulses enter through their exact average over the step, so their
    /// rotation angle carries no quadrature error.
    pub fn at_step(&self, t: f64, dt: f64) -> Operator {
        self.sample(t, Some(dt))
    }

    fn sample(&self, t: f64, dt: Option<f64>) -> Operator {
        let local = self.local_time(t);
        let alpha = match (self.modulation, local) {
            (Some(fm), Some(tl)) => fm.accumulated_phase(tl),
            _ => 0.0,
        };
        let mut phase = self.detuning * t;
        if !self.explicit_fm_z {
            phase += 2.0 * alpha;
        }
        let e = C64::from_polar(self.coupling, phase);
        let mut h = self.lowering.scale(e);
        h.add_scaled(e.conj(), &self.lowering_dag);

        if let Some(tl) = local {
            for (op, d) in &self.drives {
                let a = d.sample(tl);
                if a != 0.0 {
                    h.add_scaled(C64::new(a, 0.0), op);
                }
            }
            if let Some((x, y, q)) = &self.quadrature {
                let (ax, ay) = q.sample_xy(tl);
                h.add_scaled(C64::new(ax, 0.0), x);
                h.add_scaled(C64::new(ay, 0.0), y);
            }
            if self.explicit_fm_z {
                if let Some(fm) = self.modulation {
                    h.add_scaled(C64::new(fm.sample(tl), 0.0), &self.center_z);
                }
            }
        }
        if let Some(z) = &self.z_train {
            let a = match dt {
                Some(dt) => z.integral(t - 0.5 * dt, t + 0.5 * dt) / dt,
                None => z.sample(t),
            };
            if a != 0.0 {
                h.add_scaled(C64::new(0.5 * PI * a, 0.0), &self.center_z);
            }
        }
        h
    }

    /// Operation-frame control amplitudes at `t` (rad/ns), labelled by
    /// channel, e.g. `X1`, `Y2`, `Z2`. Independent of the integration frame.
    pub fn controls(&self, t: f64) -> Vec<(String, f64)> {
        let center = self.topology.center();
        let local = self.local_time(t);
        let mut out = Vec::new();
        for (_, d) in &self.drives {
            let q = match d {
                Drive::Sine(x) => x.target,
                Drive::Segmented(x) => x.target,
            };
            out.push((format!("X{q}"), local.map_or(0.0, |tl| d.sample(tl))));
        }
        if let Some(fm) = self.modulation {
            let drives_center = match self.gate.kind {
                GateKind::X(q) => q == center,
                GateKind::ParallelXX => true,
                GateKind::Idle => false,
            };
            if drives_center {
                let q_drive = ModulatedQuadratureDrive {
                    base: SineEnvelopeDrive::pi_pulse(self.gate.duration, center),
                    modulation: fm,
                };
                let (x, y) = local.map_or((0.0, 0.0), |tl| q_drive.sample_xy(tl));
                out.retain(|(name, _)| *name != format!("X{center}"));
                out.push((format!("X{center}"), x));
                out.push((format!("Y{center}"), y));
            }
            out.push((format!("Z{center}"), local.map_or(0.0, |tl| fm.sample(tl))));
        }
        if let Some(z) = &self.z_train {
            out.push((format!("Z{center}"), 0.5 * PI * z.sample(t)));
        }
        out
    }

    /// Times in `(t_start, t_end)` where some control switches on or off.
    /// The integrator never steps across them, so kinks in the waveforms do
    /// not cost accuracy.
    pub fn breakpoints(&self, t_start: f64, t_end: f64) -> Vec<f64> {
        let t_gate = self.gate.duration;
        let mut pts = Vec::new();
        for k in 0..=self.repetitions {
            pts.push(k as f64 * t_gate);
        }
        for (_, d) in &self.drives {
            if let Drive::Segmented(sd) = d {
                for k in 0..self.repetitions {
                    let base = k as f64 * t_gate;
                    for s in (1..=sd.segments).step_by(2) {
                        pts.push(base + (s - 1) as f64 * sd.interval + 0.5 * sd.width);
                        pts.push(base + s as f64 * sd.interval - 0.5 * sd.width);
                    }
                }
            }
        }
        if let Some(z) = &self.z_train {
            for s in 1..=z.count {
                pts.push(s as f64 * z.interval - 0.5 * z.width);
                pts.push(s as f64 * z.interval + 0.5 * z.width);
            }
        }
        let guard = 1e-9 * t_gate;
        pts.retain(|&t| t > t_start + guard && t < t_end - guard);
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() <= guard);
        pts
    }

    /// `U(t_end, t_start)`, stepping no further than `max_step` and landing
    /// on every breakpoint.
    pub fn propagate(&self, t_start: f64, t_end: f64, max_step: f64) -> Result<Operator> {
        let mut edges = vec![t_start];
        edges.extend(self.breakpoints(t_start, t_end));
        edges.push(t_end);
        let mut u: Option<Operator> = None;
        for w in edges.windows(2) {
            let grid = TimeGrid::with_max_step(w[0], w[1], max_step)?;
            let dt = grid.step();
            let piece = propagate(|t| self.at_step(t, dt), &grid)?;
            u = Some(match u {
                Some(prev) => &piece * &prev,
                None => piece,
            });
        }
        Ok(u.expect("at least one interval"))
    }

    /// True when every gate window sees the same Hamiltonian, so one gate
    /// propagator can be reused for the whole sequence.
    pub fn is_gate_periodic(&self) -> bool {
        let phase = self.detuning * self.gate.duration;
        let wrapped = (phase / (2.0 * PI)).round() * 2.0 * PI;
        self.coupling == 0.0 || (phase - wrapped).abs() < 1e-12 * phase.abs().max(1.0)
    }
}

/// Ideal gate on the full register, `n`-fold repeated.
pub fn target_unitary(gate: &GateSpec, topology: Topology, repetitions: u32) -> Result<Operator> {
    let n = topology.n_qubits();
    let mut u = Operator::identity(topology.dim());
    let minus_i = C64::new(0.0, -1.0);
    for q in gate.targets(topology)? {
        u = &embed(&pauli::x(), q, n).scale(minus_i) * &u;
    }
    Ok(u.pow(repetitions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::mhz;

    fn pair_params() -> SystemParams {
        SystemParams::new(mhz(50.0), mhz(5.0)).unwrap()
    }

    #[test]
    fn zero_coupling_gives_zero_exchange() {
        let p = SystemParams::new(mhz(50.0), 0.0).unwrap();
        let h = xy_interaction_operation_frame(&p, Topology::FiveQubitStar, 3.3);
        assert_eq!(h.max_abs(), 0.0);
    }

    #[test]
    fn exchange_at_zero_and_half_beat() {
        let p = pair_params();
        let j = p.coupling;
        let swap = &embed_pair(&pauli::plus(), 1, &pauli::minus(), 2, 2)
            + &embed_pair(&pauli::minus(), 1, &pauli::plus(), 2, 2);
        let h0 = xy_interaction_operation_frame(&p, Topology::Pair, 0.0);
        assert!(h0.max_abs_diff(&swap.scale_real(j)) < 1e-15);
        let h1 = xy_interaction_operation_frame(&p, Topology::Pair, 10.0);
        assert!(h1.max_abs_diff(&swap.scale_real(-j)) < 1e-15);
    }

    #[test]
    fn star_has_four_edges_on_the_centre() {
        let t = Topology::FiveQubitStar;
        assert_eq!(t.edges().len(), 4);
        assert!(t.edges().iter().all(|&(_, c)| c == 2));
        assert_eq!(Topology::Pair.edges(), vec![(1, 2)]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(SystemParams::new(0.0, 1.0).is_err());
        assert!(SystemParams::new(1.0, -1.0).is_err());
        let p = pair_params();
        let t = Topology::Pair;
        assert!(assemble_hamiltonian(&p, t, ControlScheme::cd(), GateSpec::x(3, 20.0)).is_err());
        assert!(assemble_hamiltonian(&p, t, ControlScheme::dd(5, 1.0), GateSpec::idle(20.0)).is_err());
        assert!(assemble_hamiltonian(&p, t, ControlScheme::dd(4, 6.0), GateSpec::idle(20.0)).is_err());
        assert!(assemble_hamiltonian(&p, t, ControlScheme::fm(0, 1.0), GateSpec::idle(20.0)).is_err());
        assert!(assemble_hamiltonian(&p, t, ControlScheme::cd(), GateSpec::idle(-1.0)).is_err());
        let bad_edge = pair_params().without_edges(&[2]);
        assert!(assemble_hamiltonian(&bad_edge, t, ControlScheme::cd(), GateSpec::idle(20.0)).is_err());
    }

    #[test]
    fn targets() {
        let t = Topology::Pair;
        assert_eq!(target_unitary(&GateSpec::idle(20.0), t, 1).unwrap(), Operator::identity(4));
        let x1 = target_unitary(&GateSpec::x(1, 20.0), t, 1).unwrap();
        let expected = embed(&pauli::x(), 1, 2).scale(C64::new(0.0, -1.0));
        assert!(x1.max_abs_diff(&expected) < 1e-15);
        let xx = target_unitary(&GateSpec::parallel_xx(20.0), t, 1).unwrap();
        let expected = crate::operator::kron(&pauli::x(), &pauli::x()).scale_real(-1.0);
        assert!(xx.max_abs_diff(&expected) < 1e-15);
        let x3 = target_unitary(&GateSpec::x(1, 20.0), t, 3).unwrap();
        assert!(x3.max_abs_diff(&embed(&pauli::x(), 1, 2).scale(C64::new(0.0, 1.0))) < 1e-15);
    }

    #[test]
    fn cd_idle_is_exchange_only() {
        let p = pair_params();
        let h = assemble_hamiltonian(&p, Topology::Pair, ControlScheme::cd(), GateSpec::idle(20.0)).unwrap();
        for t in [0.0, 1.7, 13.1] {
            let direct = xy_interaction_operation_frame(&p, Topology::Pair, t);
            assert!(h.at(t).max_abs_diff(&direct) < 1e-15);
        }
    }

    #[test]
    fn dd_tail_and_periodicity() {
        let p = pair_params();
        let h = assemble_sequence(&p, Topology::Pair, ControlScheme::dd(4, 1.25), GateSpec::idle(20.0), 3).unwrap();
        assert_eq!(h.tail(), 0.625);
        assert_eq!(h.evaluation_time(3), 60.625);
        assert!(h.is_gate_periodic());
        let h = assemble_hamiltonian(&p, Topology::Pair, ControlScheme::cd(), GateSpec::idle(30.0)).unwrap();
        assert!(!h.is_gate_periodic());
    }
}
