//! Closed-form control waveforms. Times in ns, amplitudes in rad/ns.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A scalar waveform with a known integral.
pub trait Waveform {
    fn sample(&self, t: f64) -> f64;

    /// Closed interval outside of which `sample` is zero.
    fn support(&self) -> (f64, f64);

    /// Exact integral over the support.
    fn area(&self) -> f64;
}

pub fn pulse_area<W: Waveform + ?Sized>(waveform: &W) -> f64 {
    waveform.area()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// `Ω_x sin(πt/T)` on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineEnvelopeDrive {
    pub amplitude: f64,
    pub duration: f64,
    pub axis: Axis,
    pub target: usize,
}

impl SineEnvelopeDrive {
    /// Amplitude `π²/(4T)`, for which the envelope integrates to π/2.
    pub fn pi_pulse(duration: f64, target: usize) -> Self {
        SineEnvelopeDrive {
            amplitude: PI * PI / (4.0 * duration),
            duration,
            axis: Axis::X,
            target,
        }
    }
}

impl Waveform for SineEnvelopeDrive {
    fn sample(&self, t: f64) -> f64 {
        if t < 0.0 || t > self.duration {
            return 0.0;
        }
        self.amplitude * (PI * t / self.duration).sin()
    }

    fn support(&self) -> (f64, f64) {
        (0.0, self.duration)
    }

    fn area(&self) -> f64 {
        2.0 * self.amplitude * self.duration / PI
    }
}

/// Flux modulation `γ sin(2πNt/T)` on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FmZModulation {
    pub amplitude: f64,
    pub cycles: u32,
    pub duration: f64,
}

impl FmZModulation {
    pub fn new(amplitude: f64, cycles: u32, duration: f64) -> Result<Self> {
        if cycles == 0 {
            return Err(Error::InvalidParameter("FM cycle count must be >= 1".into()));
        }
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "FM amplitude must be finite and >= 0, got {amplitude}"
            )));
        }
        if !(duration > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gate time must be positive, got {duration}"
            )));
        }
        Ok(FmZModulation {
            amplitude,
            cycles,
            duration,
        })
    }

    /// `α(t) = (γT/πN) sin²(πNt/T)`, the antiderivative of `sample` from 0.
    pub fn accumulated_phase(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.duration);
        let n = self.cycles as f64;
        let s = (PI * n * t / self.duration).sin();
        self.amplitude * self.duration / (PI * n) * s * s
    }
}

impl Waveform for FmZModulation {
    fn sample(&self, t: f64) -> f64 {
        if t < 0.0 || t > self.duration {
            return 0.0;
        }
        self.amplitude * (2.0 * PI * self.cycles as f64 * t / self.duration).sin()
    }

    fn support(&self) -> (f64, f64) {
        (0.0, self.duration)
    }

    fn area(&self) -> f64 {
        0.0
    }
}

/// Unit-area cosine pulse of width `w` centred at 0.
pub fn nascent_delta(t: f64, width: f64) -> f64 {
    if t.abs() > 0.5 * width {
        return 0.0;
    }
    PI / (2.0 * width) * (PI * t / width).cos()
}

/// `count` nascent-delta pulses centred at `sτ`, `s = 1..=count`.
///
/// Each pulse has unit area; the π/2 rotation coefficient is applied by the
/// Hamiltonian that uses the train.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NascentDeltaTrain {
    pub interval: f64,
    pub width: f64,
    pub count: usize,
}

impl NascentDeltaTrain {
    pub fn new(interval: f64, width: f64, count: usize) -> Result<Self> {
        if !(width > 0.0 && width < interval) {
            return Err(Error::InvalidParameter(format!(
                "pulse width {width} ns must lie in (0, {interval}) ns"
            )));
        }
        Ok(NascentDeltaTrain {
            interval,
            width,
            count,
        })
    }

    /// Exact `∫_{t0}^{t1}` of the train.
    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        let half = 0.5 * self.width;
        let cumulative = |t: f64, c: f64| 0.5 * (PI * (t - c).clamp(-half, half) / self.width).sin();
        let first = ((t0 - half) / self.interval).ceil().max(1.0) as usize;
        let last = (((t1 + half) / self.interval).floor().max(0.0) as usize).min(self.count);
        (first..=last)
            .map(|s| {
                let c = s as f64 * self.interval;
                cumulative(t1, c) - cumulative(t0, c)
            })
            .sum()
    }
}

impl Waveform for NascentDeltaTrain {
    fn sample(&self, t: f64) -> f64 {
        let s = (t / self.interval).round();
        if s < 1.0 || s > self.count as f64 {
            return 0.0;
        }
        nascent_delta(t - s * self.interval, self.width)
    }

    fn support(&self) -> (f64, f64) {
        (
            self.interval - 0.5 * self.width,
            self.count as f64 * self.interval + 0.5 * self.width,
        )
    }

    fn area(&self) -> f64 {
        self.count as f64
    }
}

/// Cosine bursts in the odd segments of an `S`-segment gate, clear of the
/// Z pulses at the segment boundaries.
///
/// The amplitude `π²/(2S(τ−w))` gives each of the `S/2` bursts area `π/S`,
/// so the whole gate rotates by π.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentedDrive {
    pub segments: usize,
    pub interval: f64,
    pub width: f64,
    pub target: usize,
}

impl SegmentedDrive {
    pub fn new(segments: usize, interval: f64, width: f64, target: usize) -> Result<Self> {
        if segments < 2 || segments % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "segment count must be even, got {segments}"
            )));
        }
        if !(width >= 0.0 && width < interval) {
            return Err(Error::InvalidParameter(format!(
                "pulse width {width} ns must lie in [0, {interval}) ns"
            )));
        }
        Ok(SegmentedDrive {
            segments,
            interval,
            width,
            target,
        })
    }

    pub fn amplitude(&self) -> f64 {
        PI * PI / (2.0 * self.segments as f64 * (self.interval - self.width))
    }
}

impl Waveform for SegmentedDrive {
    fn sample(&self, t: f64) -> f64 {
        let tau = self.interval;
        if t < 0.0 || t > self.segments as f64 * tau {
            return 0.0;
        }
        let s = ((t / tau).floor() as usize + 1).min(self.segments);
        if s % 2 == 0 {
            return 0.0;
        }
        let lo = (s - 1) as f64 * tau + 0.5 * self.width;
        let hi = s as f64 * tau - 0.5 * self.width;
        if t < lo || t > hi {
            return 0.0;
        }
        let centre = (s as f64 - 0.5) * tau;
        self.amplitude() * (PI / (tau - self.width) * (t - centre)).cos()
    }

    fn support(&self) -> (f64, f64) {
        (
            0.5 * self.width,
            (self.segments - 1) as f64 * self.interval - 0.5 * self.width,
        )
    }

    fn area(&self) -> f64 {
        // each burst: amplitude * 2(τ−w)/π
        let bursts = (self.segments / 2) as f64;
        bursts * self.amplitude() * 2.0 * (self.interval - self.width) / PI
    }
}

/// `Ω(t)[cos 2α(t) x̂ + sin 2α(t) ŷ]`: a plain x drive seen from the modulated
/// frame, written in the operation frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulatedQuadratureDrive {
    pub base: SineEnvelopeDrive,
    pub modulation: FmZModulation,
}

impl ModulatedQuadratureDrive {
    /// `(x, y)` components in rad/ns.
    pub fn sample_xy(&self, t: f64) -> (f64, f64) {
        let omega = self.base.sample(t);
        let phase = 2.0 * self.modulation.accumulated_phase(t);
        (omega * phase.cos(), omega * phase.sin())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::mhz;

    #[test]
    fn sine_envelope_peak_and_area() {
        let d = SineEnvelopeDrive::pi_pulse(20.0, 1);
        assert!((d.sample(10.0) - PI * PI / 80.0).abs() < 1e-15);
        assert!((d.sample(10.0) - 0.12337).abs() < 1e-5);
        assert!((pulse_area(&d) - PI / 2.0).abs() < 1e-15);
        assert_eq!(d.sample(-1.0), 0.0);
        assert_eq!(d.sample(21.0), 0.0);
    }

    #[test]
    fn fm_phase_endpoints_and_quarter_period() {
        let g = mhz(201.0);
        let fm = FmZModulation::new(g, 4, 20.0).unwrap();
        assert_eq!(fm.sample(0.0), 0.0);
        assert_eq!(fm.accumulated_phase(0.0), 0.0);
        assert!(fm.accumulated_phase(20.0).abs() < 1e-15);
        let quarter = 20.0 / 8.0;
        let expected = g * 20.0 / (PI * 4.0);
        assert!((fm.accumulated_phase(quarter) - expected).abs() < 1e-13);
        assert!(fm.sample(20.0).abs() < 1e-12);
    }

    #[test]
    fn fm_rejects_bad_parameters() {
        assert!(FmZModulation::new(1.0, 0, 20.0).is_err());
        assert!(FmZModulation::new(-1.0, 4, 20.0).is_err());
        assert!(FmZModulation::new(1.0, 4, 0.0).is_err());
    }

    #[test]
    fn nascent_delta_peak_and_support() {
        let w = 1.25;
        assert!((nascent_delta(0.0, w) - PI / (2.0 * w)).abs() < 1e-15);
        assert_eq!(nascent_delta(0.7, w), 0.0);
        let train = NascentDeltaTrain::new(5.0, w, 4).unwrap();
        assert!((train.sample(15.0) - PI / (2.0 * w)).abs() < 1e-15);
        assert_eq!(train.sample(0.0), 0.0);
        assert_eq!(train.sample(25.0), 0.0);
        assert!(train.sample(20.3) > 0.0);
        assert_eq!(pulse_area(&NascentDeltaTrain::new(5.0, w, 1).unwrap()), 1.0);
        assert!(NascentDeltaTrain::new(5.0, 5.0, 4).is_err());
    }

    #[test]
    fn train_integral_is_exact() {
        let train = NascentDeltaTrain::new(5.0, 1.25, 4).unwrap();
        assert!((train.integral(-1.0, 30.0) - 4.0).abs() < 1e-14);
        assert!((train.integral(0.0, 5.0) - 0.5).abs() < 1e-15);
        assert_eq!(train.integral(6.0, 9.0), 0.0);
        let (a, b) = (9.6, 10.2);
        let n = 20000;
        let h = (b - a) / n as f64;
        let mid: f64 = (0..n).map(|k| train.sample(a + (k as f64 + 0.5) * h) * h).sum();
        assert!((train.integral(a, b) - mid).abs() < 1e-8);
    }

    #[test]
    fn segmented_drive_shape() {
        let d = SegmentedDrive::new(4, 5.0, 1.25, 1).unwrap();
        assert!((d.amplitude() - PI * PI / (8.0 * 3.75)).abs() < 1e-15);
        assert!((d.sample(2.5) - d.amplitude()).abs() < 1e-15);
        assert_eq!(d.sample(7.5), 0.0);
        assert_eq!(d.sample(0.5), 0.0);
        assert!((d.sample(12.5) - d.amplitude()).abs() < 1e-15);
        assert!((pulse_area(&d) - PI / 2.0).abs() < 1e-15);
        assert!(SegmentedDrive::new(3, 5.0, 1.0, 1).is_err());
        assert!(SegmentedDrive::new(4, 5.0, 5.0, 1).is_err());
    }

    #[test]
    fn quadrature_drive_reduces_without_modulation() {
        let base = SineEnvelopeDrive::pi_pulse(20.0, 2);
        let q = ModulatedQuadratureDrive {
            base,
            modulation: FmZModulation::new(0.0, 4, 20.0).unwrap(),
        };
        for k in 0..=40 {
            let t = 0.5 * k as f64;
            let (x, y) = q.sample_xy(t);
            assert_eq!(x, base.sample(t));
            assert_eq!(y, 0.0);
        }
    }
}
