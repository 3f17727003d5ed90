use std::f64::consts::PI;

use approx::assert_relative_eq;

use xtalk_core::experiments::{
    run_sequence, run_single_gate, sequence_propagators, single_gate_propagator, RunOptions,
};
use xtalk_core::magnus::{dd_sign_kernel_idle, epsilon_dd1, epsilon_fm1, epsilon_fm2_idle, epsilon_fm2_x};
use xtalk_core::model::{
    assemble_sequence, ControlScheme, DriveShape, FmFrame, GateSpec, SystemParams, Topology,
};
use xtalk_core::operator::{embed, matrix_exp_skew_hermitian, pauli, Operator};
use xtalk_core::pulse::{
    pulse_area, FmZModulation, NascentDeltaTrain, SegmentedDrive, SineEnvelopeDrive, Waveform,
};
use xtalk_core::quadrature::{CompositeRule, QuadratureConfig};
use xtalk_core::units::mhz;

fn params(j: f64) -> SystemParams {
    SystemParams::new(mhz(50.0), mhz(j)).unwrap()
}

fn opts() -> RunOptions {
    RunOptions::default()
}

/// Closed-form CD idle infidelity of the pair: only the single-excitation
/// block evolves, and `|Tr U| = |2 + 2(c cos(ΔT/2) + s (Δ/Ω) sin(ΔT/2))|`.
fn cd_idle_infidelity(d: f64, j: f64, t: f64) -> f64 {
    let omega = (d * d + 4.0 * j * j).sqrt();
    let (s, c) = (0.5 * omega * t).sin_cos();
    let tr = 2.0 + 2.0 * (c * (0.5 * d * t).cos() + s * d / omega * (0.5 * d * t).sin());
    1.0 - tr.abs() / 4.0
}

#[test]
fn cd_idle_matches_two_level_solution() {
    for (j, t) in [(5.0, 20.0), (5.0, 13.5), (9.0, 31.0), (2.0, 10.0)] {
        let p = params(j);
        let got = run_single_gate(&p, Topology::Pair, ControlScheme::cd(), GateSpec::idle(t), &opts()).unwrap();
        let want = cd_idle_infidelity(p.detuning, p.coupling, t);
        assert_relative_eq!(got, want, max_relative = 1e-6);
    }
}

#[test]
fn star_with_outer_edges_removed_reduces_to_pair() {
    let pair = params(5.0);
    let star = params(5.0).without_edges(&[1, 2, 3]);
    for (scheme, gate) in [
        (ControlScheme::cd(), GateSpec::idle(20.0)),
        (ControlScheme::fm(4, mhz(243.27)), GateSpec::x(2, 20.0)),
    ] {
        let a = run_single_gate(&pair, Topology::Pair, scheme, gate, &opts()).unwrap();
        let b = run_single_gate(&star, Topology::FiveQubitStar, scheme, gate, &opts()).unwrap();
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn periodic_reuse_matches_full_propagation() {
    let p = params(5.0);
    for (scheme, gate, n) in [
        (ControlScheme::dd(4, 1.25), GateSpec::idle(20.0), 5),
        (ControlScheme::dd(4, 1.25), GateSpec::x(1, 20.0), 3),
        (ControlScheme::fm(4, mhz(243.27)), GateSpec::x(1, 20.0), 3),
    ] {
        let h = assemble_sequence(&p, Topology::Pair, scheme, gate, n).unwrap();
        assert!(h.is_gate_periodic());
        let reused = sequence_propagators(&h, &opts()).unwrap();
        let honest = sequence_propagators(
            &h,
            &RunOptions {
                reuse_periodic: false,
                ..opts()
            },
        )
        .unwrap();
        for (a, b) in reused.iter().zip(&honest) {
            assert!(a.max_abs_diff(b) < 1e-10);
        }
    }
}

#[test]
fn non_matched_time_is_not_periodic() {
    let h = assemble_sequence(&params(5.0), Topology::Pair, ControlScheme::cd(), GateSpec::x(1, 30.0), 3).unwrap();
    assert!(!h.is_gate_periodic());
}

#[test]
fn fm_without_modulation_is_crosstalk_dynamics() {
    let p = params(5.0);
    for gate in [GateSpec::idle(20.0), GateSpec::x(1, 20.0), GateSpec::x(2, 20.0)] {
        let cd = single_gate_propagator(&p, Topology::Pair, ControlScheme::cd(), gate, &opts()).unwrap();
        let fm = single_gate_propagator(&p, Topology::Pair, ControlScheme::fm(6, 0.0), gate, &opts()).unwrap();
        assert!(cd.max_abs_diff(&fm) < 1e-10);
    }
}

#[test]
fn dd_without_z_pulses_is_segmented_crosstalk() {
    let p = params(5.0);
    let w = 1.25;
    let dd = ControlScheme::Dd {
        segments: 4,
        width: w,
        z_pulses: false,
    };
    let seg = ControlScheme::Crosstalk {
        drive: DriveShape::Segmented { segments: 4, width: w },
    };
    for gate in [GateSpec::idle(20.0), GateSpec::x(1, 20.0)] {
        let a = single_gate_propagator(&p, Topology::Pair, dd, gate, &opts()).unwrap();
        let b = single_gate_propagator(&p, Topology::Pair, seg, gate, &opts()).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-10);
    }
}

#[test]
fn detuning_sign_is_irrelevant_for_cd_and_fm() {
    let plus = params(5.0);
    let minus = SystemParams::new(-mhz(50.0), mhz(5.0)).unwrap();
    for (scheme, gate) in [
        (ControlScheme::cd(), GateSpec::idle(20.0)),
        (ControlScheme::cd(), GateSpec::x(1, 20.0)),
        (ControlScheme::fm(4, mhz(200.34)), GateSpec::idle(20.0)),
        (ControlScheme::fm(4, mhz(243.27)), GateSpec::x(1, 20.0)),
    ] {
        let a = run_single_gate(&plus, Topology::Pair, scheme, gate, &opts()).unwrap();
        let b = run_single_gate(&minus, Topology::Pair, scheme, gate, &opts()).unwrap();
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn waveform_areas_match_quadrature() {
    let waves: Vec<Box<dyn Waveform>> = vec![
        Box::new(SineEnvelopeDrive::pi_pulse(20.0, 1)),
        Box::new(SegmentedDrive::new(4, 5.0, 1.25, 1).unwrap()),
        Box::new(SegmentedDrive::new(6, 20.0 / 6.0, 0.0, 1).unwrap()),
        Box::new(NascentDeltaTrain::new(5.0, 1.25, 4).unwrap()),
        Box::new(FmZModulation::new(mhz(321.0), 6, 20.0).unwrap()),
    ];
    for w in &waves {
        let (a, b) = w.support();
        // breaks every 0.625 ns land on every kink of these shapes
        let n = ((b - a) / 0.625).round() as usize;
        let breaks: Vec<f64> = (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect();
        let rule = CompositeRule::with_breaks(&breaks, 4096).unwrap();
        let numeric = rule.integrate_real(|t| w.sample(t));
        assert!((numeric - w.area()).abs() < 1e-9, "{numeric} vs {}", w.area());
        assert!((pulse_area(w.as_ref()) - w.area()).abs() < 1e-9);
    }
}

#[test]
fn accumulated_phase_differentiates_to_the_drive() {
    let fm = FmZModulation::new(mhz(442.0), 8, 20.0).unwrap();
    let h = 1e-5;
    for k in 1..40 {
        let t = 0.5 * k as f64;
        let d = (fm.accumulated_phase(t + h) - fm.accumulated_phase(t - h)) / (2.0 * h);
        assert!((d - fm.sample(t)).abs() < 1e-6 * fm.amplitude.max(1.0));
    }
    assert!(fm.accumulated_phase(20.0).abs() < 1e-12);
}

#[test]
fn narrow_z_pulse_is_a_half_pi_z_rotation() {
    let p = params(0.0);
    let w = 5.0 / 64.0;
    let h = assemble_sequence(&p, Topology::Pair, ControlScheme::dd(4, w), GateSpec::idle(20.0), 1).unwrap();
    let u = h.propagate(5.0 - w, 5.0 + w, 0.002).unwrap();
    let want = matrix_exp_skew_hermitian(&embed(&pauli::z(), 2, 2), PI / 2.0).unwrap();
    assert!(u.max_abs_diff(&want) < 1e-6);
}

/// Ideal DD idle: crosstalk evolution broken by instantaneous `exp(−iπ/2 σz)`
/// kicks at `sτ`, then run on to the finite-width evaluation time.
fn ideal_dd_idle(p: &SystemParams, w: f64) -> Operator {
    let cd = assemble_sequence(p, Topology::Pair, ControlScheme::cd(), GateSpec::idle(20.0), 1).unwrap();
    let kick = matrix_exp_skew_hermitian(&embed(&pauli::z(), 2, 2), PI / 2.0).unwrap();
    let mut u = Operator::identity(4);
    for s in 0..4 {
        let seg = cd.propagate(5.0 * s as f64, 5.0 * (s + 1) as f64, 0.0005).unwrap();
        u = &kick * &(&seg * &u);
    }
    &cd.propagate(20.0, 20.0 + w / 2.0, 0.0005).unwrap() * &u
}

#[test]
fn finite_width_dd_approaches_ideal_pulses_linearly() {
    let p = params(5.0);
    let residual = |w: f64| {
        let h = assemble_sequence(&p, Topology::Pair, ControlScheme::dd(4, w), GateSpec::idle(20.0), 1).unwrap();
        let u = h.propagate(0.0, h.evaluation_time(1), w / 200.0).unwrap();
        u.max_abs_diff(&ideal_dd_idle(&p, w))
    };
    let r: Vec<f64> = [5.0 / 16.0, 5.0 / 32.0, 5.0 / 64.0].into_iter().map(residual).collect();
    for pair in r.windows(2) {
        let ratio = pair[1] / pair[0];
        assert!((0.4..0.6).contains(&ratio), "{r:?}");
    }
    // residual ≈ 0.49 J w
    let slope = r[2] / (p.coupling * 5.0 / 64.0);
    assert!((0.3..0.7).contains(&slope), "{slope}");
}

#[test]
fn magnus_errors_scale_with_coupling() {
    let q = QuadratureConfig::default();
    let fm = FmZModulation::new(mhz(200.0), 4, 20.0).unwrap();
    let a = epsilon_fm2_idle(&params(2.0), &fm, &q).unwrap();
    let b = epsilon_fm2_idle(&params(6.0), &fm, &q).unwrap();
    assert_relative_eq!(b / a, 9.0, max_relative = 1e-9);
    let a = dd_sign_kernel_idle(&params(2.0), 4, 20.0, &q).unwrap();
    let b = dd_sign_kernel_idle(&params(6.0), 4, 20.0, &q).unwrap();
    assert_relative_eq!(b / a, 9.0, max_relative = 1e-9);
    let fm1 = FmZModulation::new(mhz(100.0), 4, 30.0).unwrap();
    let a = epsilon_fm1(&params(2.0), &fm1, &q).unwrap();
    let b = epsilon_fm1(&params(6.0), &fm1, &q).unwrap();
    assert_relative_eq!(b / a, 3.0, max_relative = 1e-9);
    let x = epsilon_fm2_x(&params(5.0), &fm, &q).unwrap();
    assert!(x > epsilon_fm2_idle(&params(5.0), &fm, &q).unwrap());
}

#[test]
fn dd_first_order_cancels_unless_segments_sit_half_a_period_apart() {
    let p = params(5.0);
    for m in 1..=3 {
        for s in [4, 6, 8] {
            let t = 20.0 * m as f64;
            let tau_phase = p.detuning * t / s as f64;
            let odd_pi = ((tau_phase / PI).round() as i64 % 2 == 1)
                && (tau_phase / PI - (tau_phase / PI).round()).abs() < 1e-9;
            let e = epsilon_dd1(&p, s, t).unwrap() / p.coupling;
            if odd_pi {
                assert_relative_eq!(e, 4.0 / PI, max_relative = 1e-12);
            } else {
                assert!(e <= 1e-14, "S={s} T={t}: {e}");
            }
        }
    }
    assert!(epsilon_dd1(&p, 4, 30.0).unwrap() > 1e-3 * p.coupling);
}

#[test]
fn fm_frames_agree() {
    let p = params(5.0);
    let gate = GateSpec::x(2, 20.0);
    let mut scheme = ControlScheme::fm(4, mhz(243.27));
    let fine = RunOptions::with_step(1e-4);
    let modulated = single_gate_propagator(&p, Topology::Pair, scheme, gate, &fine).unwrap();
    if let ControlScheme::Fm { frame, .. } = &mut scheme {
        *frame = FmFrame::Operation;
    }
    let operation = single_gate_propagator(&p, Topology::Pair, scheme, gate, &fine).unwrap();
    assert!(modulated.max_abs_diff(&operation) < 1e-8);
}

#[test]
fn sequence_reports_odd_counts_for_x_gates() {
    let p = params(5.0);
    let pts = run_sequence(&p, Topology::Pair, ControlScheme::cd(), GateSpec::x(1, 20.0), 7, &opts()).unwrap();
    let counts: Vec<usize> = pts.iter().map(|x| x.count).collect();
    assert_eq!(counts, vec![1, 3, 5, 7]);
    let pts = run_sequence(&p, Topology::Pair, ControlScheme::cd(), GateSpec::idle(20.0), 4, &opts()).unwrap();
    assert_eq!(pts.len(), 4);
    assert!((pts[3].time - 80.0).abs() < 1e-12);
}
