//! Grid search for the FM amplitude γ.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::magnus::ErrorFunctional;
use crate::model::SystemParams;
use crate::pulse::FmZModulation;
use crate::quadrature::QuadratureConfig;
use crate::units::{mhz, to_mhz};

/// Relative tolerance for two neighbouring scan values to count as equal.
pub const PLATEAU_TOL: f64 = 1e-12;

/// Uniform grid `0, Δγ, 2Δγ, …` up to `max` (rad/ns).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaGrid {
    pub step: f64,
    pub max: f64,
}

impl Default for GammaGrid {
    fn default() -> Self {
        GammaGrid {
            step: mhz(1.59),
            max: mhz(600.0),
        }
    }
}

impl GammaGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || !(self.max > self.step) {
            return Err(Error::InvalidParameter(format!(
                "gamma grid needs 0 < step < max, got step {} and max {}",
                self.step, self.max
            )));
        }
        let n = (self.max / self.step * (1.0 + 1e-12)).floor() as usize;
        Ok((0..=n).map(|k| k as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaScan {
    pub functional: ErrorFunctional,
    pub cycles: u32,
    pub gate_time: f64,
    pub step: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub opt_index: Option<usize>,
}

impl GammaScan {
    pub fn gamma_opt(&self) -> Option<f64> {
        self.opt_index.map(|i| self.grid[i])
    }

    /// The selected minimum is the last interior point before the range
    /// edge, so a wider range might move it.
    pub fn at_edge(&self) -> bool {
        self.opt_index.is_some_and(|i| i + 2 >= self.grid.len())
    }
}

fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= PLATEAU_TOL * a.abs().max(b.abs())
}

/// Index of the first interior local minimum. A flat run of equal values
/// counts as one point and resolves to its smallest index.
pub fn first_local_minimum(values: &[f64]) -> Option<usize> {
    let n = values.len();
    let mut i = 1;
    while i + 1 < n {
        let mut j = i;
        while j + 1 < n && nearly_equal(values[j + 1], values[i]) {
            j += 1;
        }
        if j + 1 >= n {
            return None;
        }
        if values[i - 1] > values[i] && !nearly_equal(values[i - 1], values[i]) && values[j + 1] > values[i] {
            return Some(i);
        }
        i = j + 1;
    }
    None
}

/// Evaluates the functional on the grid and selects the first local minimum.
///
/// With no interior minimum the error carries the full scan.
pub fn scan_gamma(
    functional: ErrorFunctional,
    params: &SystemParams,
    cycles: u32,
    gate_time: f64,
    grid: &GammaGrid,
    config: &QuadratureConfig,
) -> Result<GammaScan> {
    FmZModulation::new(0.0, cycles, gate_time)?;
    let points = grid.points()?;
    let values = points
        .par_iter()
        .map(|&g| {
            let fm = FmZModulation::new(g, cycles, gate_time)?;
            functional.evaluate(params, &fm, config)
        })
        .collect::<Result<Vec<f64>>>()?;
    let opt_index = first_local_minimum(&values);
    let scan = GammaScan {
        functional,
        cycles,
        gate_time,
        step: grid.step,
        grid: points,
        values,
        opt_index,
    };
    if opt_index.is_none() {
        return Err(Error::NoMinimum {
            max_mhz: to_mhz(grid.max),
            scan: Box::new(scan),
        });
    }
    Ok(scan)
}

/// `(F(γ_opt + Δγ) + F(γ_opt − Δγ)) / 2`.
pub fn corner_averaged_fidelity<F>(simulate: F, scan: &GammaScan) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let g = scan
        .gamma_opt()
        .ok_or_else(|| Error::InvalidParameter("scan has no selected minimum".into()))?;
    corner_average(simulate, g, scan.step)
}

pub fn corner_average<F>(simulate: F, gamma: f64, step: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if gamma - step < -1e-12 * step {
        return Err(Error::InvalidParameter(format!(
            "cannot average at γ − Δγ = {:.4} MHz < 0",
            to_mhz(gamma - step)
        )));
    }
    Ok(0.5 * (simulate(gamma + step)? + simulate((gamma - step).max(0.0))?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_first_minimum() {
        let v = [5.0, 3.0, 4.0, 1.0, 2.0];
        assert_eq!(first_local_minimum(&v), Some(1));
        assert_eq!(first_local_minimum(&[1.0, 2.0, 3.0]), None);
        assert_eq!(first_local_minimum(&[3.0, 2.0, 1.0]), None);
    }

    #[test]
    fn plateau_resolves_to_smallest_index() {
        let v = [5.0, 2.0, 2.0, 2.0, 3.0];
        assert_eq!(first_local_minimum(&v), Some(1));
        // a shelf on the way down is not a minimum
        let v = [5.0, 4.0, 4.0, 1.0, 3.0];
        assert_eq!(first_local_minimum(&v), Some(3));
        // a flat run reaching the edge is not interior
        assert_eq!(first_local_minimum(&[3.0, 1.0, 1.0]), None);
    }

    #[test]
    fn grid_points_are_uniform() {
        let g = GammaGrid::default().points().unwrap();
        assert_eq!(g[0], 0.0);
        assert_eq!(g.len(), 378);
        assert!((g[1] - mhz(1.59)).abs() < 1e-15);
        assert!(GammaGrid { step: 0.0, max: 1.0 }.points().is_err());
    }

    #[test]
    fn corner_average_rules() {
        let constant = corner_average(|_| Ok(0.25), 1.0, 0.1).unwrap();
        assert_eq!(constant, 0.25);
        let linear = corner_average(|g| Ok(2.0 * g + 1.0), 1.0, 0.125).unwrap();
        assert_eq!(linear, 3.0);
        assert!(corner_average(|_| Ok(1.0), 0.05, 0.1).is_err());
    }
}
