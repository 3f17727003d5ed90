//! Time-ordered propagation with the exponential midpoint rule.

use crate::error::{Error, Result};
use crate::operator::{exp_hermitian_unchecked, Operator};

/// Default integrator step in ns.
pub const DEFAULT_STEP: f64 = 0.002;

/// Uniform grid over `[t_start, t_end]` with an integer number of steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    steps: usize,
}

impl TimeGrid {
    /// The interval must be an integer multiple of `step` (to 1e-9 relative).
    pub fn new(t_start: f64, t_end: f64, step: f64) -> Result<Self> {
        Self::check_bounds(t_start, t_end, step)?;
        let ratio = (t_end - t_start) / step;
        let steps = ratio.round();
        if steps < 1.0 || (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::TimeGrid(format!(
                "interval [{t_start}, {t_end}] is not an integer number of {step} ns steps"
            )));
        }
        Ok(TimeGrid {
            t_start,
            t_end,
            steps: steps as usize,
        })
    }

    /// The coarsest uniform grid whose step does not exceed `max_step`.
    pub fn with_max_step(t_start: f64, t_end: f64, max_step: f64) -> Result<Self> {
        Self::check_bounds(t_start, t_end, max_step)?;
        let ratio = (t_end - t_start) / max_step;
        // absorb representation noise so that 20 / 0.002 stays 10000 steps
        let steps = (ratio - 1e-9 * ratio).ceil().max(1.0) as usize;
        Ok(TimeGrid {
            t_start,
            t_end,
            steps,
        })
    }

    fn check_bounds(t_start: f64, t_end: f64, step: f64) -> Result<()> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::TimeGrid(format!("step must be positive, got {step}")));
        }
        if !(t_end > t_start) || !t_start.is_finite() || !t_end.is_finite() {
            return Err(Error::TimeGrid(format!(
                "empty interval [{t_start}, {t_end}]"
            )));
        }
        Ok(())
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step(&self) -> f64 {
        (self.t_end - self.t_start) / self.steps as f64
    }

    pub fn midpoints(&self) -> impl Iterator<Item = f64> + '_ {
        let dt = self.step();
        (0..self.steps).map(move |k| self.t_start + (k as f64 + 0.5) * dt)
    }
}

/// `U(t_end, t_start)` for `i dU/dt = H(t) U`.
///
/// Each step applies `exp(-i H(t_mid) dt)`, so the result is unitary up to
/// rounding regardless of the step size.
pub fn propagate<H>(hamiltonian: H, grid: &TimeGrid) -> Result<Operator>
where
    H: Fn(f64) -> Operator,
{
    let dt = grid.step();
    let mut u: Option<Operator> = None;
    for t in grid.midpoints() {
        let h = hamiltonian(t);
        if !h.is_hermitian() {
            return Err(Error::NotHermitian {
                residual: h.hermiticity_residual(),
                time: Some(t),
            });
        }
        if let Some(prev) = &u {
            if prev.dim() != h.dim() {
                return Err(Error::Dimension(format!(
                    "Hamiltonian sample at t = {t} ns has dimension {}, expected {}",
                    h.dim(),
                    prev.dim()
                )));
            }
        }
        let step = exp_hermitian_unchecked(&h, dt);
        u = Some(match u {
            Some(prev) => &step * &prev,
            None => step,
        });
    }
    // a TimeGrid always has at least one step
    Ok(u.expect("non-empty grid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{pauli, C64};
    use std::f64::consts::PI;

    #[test]
    fn grid_requires_integer_step_count() {
        assert!(TimeGrid::new(0.0, 20.0, 0.002).is_ok());
        assert_eq!(TimeGrid::new(0.0, 20.0, 0.002).unwrap().steps(), 10_000);
        assert!(TimeGrid::new(0.0, 1.0, 0.3).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0.0).is_err());
        assert!(TimeGrid::new(1.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn max_step_grid_divides_interval() {
        let g = TimeGrid::with_max_step(0.0, 20.625, 0.002).unwrap();
        assert_eq!(g.steps(), 10_313);
        assert!(g.step() <= 0.002);
        let g = TimeGrid::with_max_step(0.0, 20.0, 0.002).unwrap();
        assert_eq!(g.steps(), 10_000);
    }

    #[test]
    fn zero_hamiltonian_gives_identity() {
        let grid = TimeGrid::new(0.0, 20.0, 0.01).unwrap();
        let u = propagate(|_| Operator::zeros(4), &grid).unwrap();
        assert_eq!(u, Operator::identity(4));
    }

    #[test]
    fn constant_rabi_drive_flips_the_qubit() {
        let t = 20.0;
        let grid = TimeGrid::new(0.0, t, 0.05).unwrap();
        let h = pauli::x().scale_real(PI / (2.0 * t));
        let u = propagate(|_| h.clone(), &grid).unwrap();
        assert!((u.get(0, 1).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian_sample_with_time() {
        let grid = TimeGrid::new(0.0, 1.0, 0.25).unwrap();
        let err = propagate(
            |t| {
                if t > 0.5 {
                    pauli::plus()
                } else {
                    pauli::z()
                }
            },
            &grid,
        )
        .unwrap_err();
        match err {
            Error::NotHermitian { time: Some(t), .. } => assert!((t - 0.625).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        assert!(err_message_names_time());
    }

    fn err_message_names_time() -> bool {
        let e = Error::NotHermitian {
            residual: 1.0,
            time: Some(0.625),
        };
        e.to_string().contains("t = 0.625 ns")
    }

    #[test]
    fn rejects_dimension_change() {
        let grid = TimeGrid::new(0.0, 1.0, 0.25).unwrap();
        let err = propagate(
            |t| {
                if t > 0.5 {
                    Operator::zeros(4)
                } else {
                    Operator::zeros(2)
                }
            },
            &grid,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    #[test]
    fn time_independent_matches_direct_exponential() {
        let h = &pauli::x().scale_real(0.4) + &pauli::y().scale_real(-0.25);
        let h = &h + &pauli::z().scale_real(0.1);
        let grid = TimeGrid::new(0.0, 7.0, 0.01).unwrap();
        let u = propagate(|_| h.clone(), &grid).unwrap();
        let direct = crate::operator::matrix_exp_skew_hermitian(&h, 7.0).unwrap();
        assert!(u.max_abs_diff(&direct) < 1e-10);
        let _ = C64::new(0.0, 0.0);
    }
}
