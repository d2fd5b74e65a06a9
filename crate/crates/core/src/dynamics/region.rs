//! Maps of the parametric-oscillation region over pump detuning and amplitude.

use super::integrator::{integrate, JumpSchedule, SimulationConfig};
use crate::device::{instability_threshold, OperatingPoint, QubitState};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, Domain};
use num_complex::Complex64;
use rayon::prelude::*;

/// Uniform grid over δ|0⟩/Γ (columns) and ε/Γ (rows), endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionGrid {
    pub delta_min: f64,
    pub delta_max: f64,
    pub delta_points: usize,
    pub epsilon_min: f64,
    pub epsilon_max: f64,
    pub epsilon_points: usize,
}

impl RegionGrid {
    pub fn validate(&self) -> Result<()> {
        if self.delta_points < 2 || self.epsilon_points < 2 {
            return Err(Error::invalid("grid", "need at least 2 points per axis"));
        }
        if !(self.delta_max > self.delta_min && self.epsilon_max > self.epsilon_min) {
            return Err(Error::invalid("grid", "axis ranges must be increasing"));
        }
        if self.epsilon_min < 0.0 {
            return Err(Error::invalid("grid", "ε must be non-negative"));
        }
        Ok(())
    }

    pub fn delta_step(&self) -> f64 {
        (self.delta_max - self.delta_min) / (self.delta_points - 1) as f64
    }

    pub fn epsilon_step(&self) -> f64 {
        (self.epsilon_max - self.epsilon_min) / (self.epsilon_points - 1) as f64
    }

    pub fn delta(&self, column: usize) -> f64 {
        self.delta_min + column as f64 * self.delta_step()
    }

    pub fn epsilon(&self, row: usize) -> f64 {
        self.epsilon_min + row as f64 * self.epsilon_step()
    }

    pub fn len(&self) -> usize {
        self.delta_points * self.epsilon_points
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// (row, column) of a row-major cell index.
    pub fn cell(&self, index: usize) -> (usize, usize) {
        (index / self.delta_points, index % self.delta_points)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub row: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionMap {
    pub grid: RegionGrid,
    pub state: QubitState,
    /// Row-major (ε rows × δ columns) time-averaged |A|²; NaN for failed cells.
    pub photons: Vec<f64>,
    pub failures: Vec<CellFailure>,
}

impl RegionMap {
    pub fn at(&self, row: usize, column: usize) -> f64 {
        self.photons[row * self.grid.delta_points + column]
    }

    /// Cells whose average photon number exceeds `threshold`.
    pub fn mask(&self, threshold: f64) -> Vec<bool> {
        self.photons.iter().map(|&p| p > threshold).collect()
    }
}

/// Operating point for one grid cell: the axis value is δ|0⟩/Γ.
pub fn cell_point(
    template: &OperatingPoint,
    delta_ground_over_gamma: f64,
    epsilon_over_gamma: f64,
) -> OperatingPoint {
    let g = template.gamma;
    OperatingPoint {
        delta: delta_ground_over_gamma * g - template.chi,
        epsilon: epsilon_over_gamma * g,
        ..*template
    }
}

/// Simulate every cell with the qubit held in `state` and average |A|² over the
/// last `averaging_fraction` of each run.
///
/// Cell (r, c) uses the integration seed derived from (`config.rng_seed`, cell
/// index), so the map does not depend on evaluation order.
pub fn map_region(
    grid: &RegionGrid,
    template: &OperatingPoint,
    config: &SimulationConfig,
    state: QubitState,
    averaging_fraction: f64,
) -> Result<RegionMap> {
    grid.validate()?;
    if !(averaging_fraction > 0.0 && averaging_fraction <= 1.0) {
        return Err(Error::invalid("averaging_fraction", "must lie in (0, 1]"));
    }
    let schedule = JumpSchedule::fixed(state);
    let start = config.t_end * (1.0 - averaging_fraction);
    let results: Vec<Result<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|index| {
            let (row, column) = grid.cell(index);
            let point = cell_point(template, grid.delta(column), grid.epsilon(row));
            let cell_config = SimulationConfig {
                rng_seed: derive_seed(config.rng_seed, Domain::RegionMap, index as u64),
                ..config.clone()
            };
            let traj = integrate(&cell_config, &point, &schedule)?;
            Ok(traj.mean_photons(start, config.t_end))
        })
        .collect();

    let mut photons = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Ok(p) => photons.push(p),
            Err(e) => {
                let (row, column) = grid.cell(index);
                failures.push(CellFailure {
                    row,
                    column,
                    message: e.to_string(),
                });
                photons.push(f64::NAN);
            }
        }
    }
    Ok(RegionMap {
        grid: *grid,
        state,
        photons,
        failures,
    })
}

/// Growth rate of a tiny seeded field, measured by integrating the full
/// equation (noise-free) and fitting the slope of ln|A| over the second half of
/// the run. Positive means the zero state is unstable.
pub fn measured_growth_rate(detuning: f64, epsilon: f64, beta: f64, gamma: f64) -> f64 {
    let point = OperatingPoint {
        flux: 0.5,
        delta: detuning,
        epsilon,
        chi: 0.0,
        alpha: 0.0,
        beta,
        gamma,
        gamma0: gamma,
    };
    // Integrate in units of 1/Γ; the field stays tiny so the Kerr term is moot.
    let rate = gamma
        .max(epsilon)
        .max((detuning + beta * epsilon * epsilon / gamma).abs());
    let dt = 0.02 / rate;
    // Growth never exceeds ε; cap the run so a 1e-6 seed cannot overflow.
    let horizon = (40.0 / gamma).min(300.0 / epsilon.max(gamma));
    let config = SimulationConfig {
        dt,
        t_end: horizon,
        seed_noise_photons: 0.0,
        pump_ramp: 0.0,
        sample_interval: dt,
        initial_amplitude: Complex64::new(1e-6, 1e-6),
        ..SimulationConfig::default()
    };
    let traj = integrate(&config, &point, &JumpSchedule::fixed(QubitState::Ground))
        .expect("growth-rate probe uses a resolved step");
    let n = traj.len();
    let half = n / 2;
    // Least-squares slope of ln|A| against t.
    let xs = &traj.times[half..];
    let ys: Vec<f64> = traj.amplitudes[half..]
        .iter()
        .map(|a| a.norm().ln())
        .collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let (sxy, sxx) = xs.iter().zip(&ys).fold((0.0, 0.0), |(sxy, sxx), (x, y)| {
        (sxy + (x - mx) * (y - my), sxx + (x - mx) * (x - mx))
    });
    sxy / sxx
}

/// Onset of oscillation found by bisection on the measured growth rate,
/// starting from the bracket [Γ/2, `epsilon_max`].
pub fn numerical_threshold(
    detuning: f64,
    beta: f64,
    gamma: f64,
    epsilon_max: f64,
    tolerance: f64,
) -> Result<f64> {
    let mut lo = 0.5 * gamma;
    let mut hi = epsilon_max;
    if measured_growth_rate(detuning, lo, beta, gamma) > 0.0
        || measured_growth_rate(detuning, hi, beta, gamma) <= 0.0
    {
        return Err(Error::Degenerate("onset is not bracketed".into()));
    }
    while hi - lo > tolerance * gamma {
        let mid = 0.5 * (lo + hi);
        if measured_growth_rate(detuning, mid, beta, gamma) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Zero-state stability on a grid of (δ/Γ, ε/Γ), from measured growth rates.
pub fn onset_map(grid: &RegionGrid, beta: f64, gamma: f64) -> Result<Vec<bool>> {
    grid.validate()?;
    Ok((0..grid.len())
        .into_par_iter()
        .map(|index| {
            let (row, column) = grid.cell(index);
            measured_growth_rate(
                grid.delta(column) * gamma,
                grid.epsilon(row) * gamma,
                beta,
                gamma,
            ) > 0.0
        })
        .collect())
}

/// Cells where a numerical mask disagrees with the closed-form region by more
/// than one grid cell in ε.
pub fn boundary_mismatches(grid: &RegionGrid, mask: &[bool], beta: f64) -> Vec<(usize, usize)> {
    assert_eq!(mask.len(), grid.len(), "mask must cover the grid");
    let step = grid.epsilon_step();
    let mut out = Vec::new();
    for (index, &masked) in mask.iter().enumerate() {
        let (row, column) = grid.cell(index);
        let d = grid.delta(column);
        let x = grid.epsilon(row);
        let (inside, near) = match instability_threshold(d, beta, 1.0) {
            Ok(b) => (
                b.contains(x),
                (x - b.lower).abs() <= step || (x - b.upper).abs() <= step,
            ),
            Err(_) => (false, false),
        };
        if masked != inside && !near {
            out.push((row, column));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_geometry() {
        let g = RegionGrid {
            delta_min: -8.0,
            delta_max: 4.0,
            delta_points: 4,
            epsilon_min: 0.0,
            epsilon_max: 6.0,
            epsilon_points: 3,
        };
        assert_eq!(g.len(), 12);
        assert_eq!(g.delta(3), 4.0);
        assert_eq!(g.epsilon(2), 6.0);
        assert_eq!(g.cell(5), (1, 1));
        let bad = RegionGrid {
            delta_points: 1,
            ..g
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn growth_rate_matches_linear_analysis() {
        // λ = √(ε² − δ²) − Γ when ε > |δ|.
        let gamma = 1.0;
        for &(d, x) in &[(0.0, 2.0), (1.0, 3.0), (-2.0, 2.5), (0.5, 1.2)] {
            let lambda = measured_growth_rate(d, x, 0.0, gamma);
            let expected = (x * x - d * d).sqrt() - gamma;
            assert!(
                (lambda - expected).abs() < 1e-3,
                "d={d} x={x}: {lambda} vs {expected}"
            );
        }
        assert!(measured_growth_rate(3.0, 2.0, 0.0, gamma) < 0.0);
    }

    #[test]
    fn numerical_threshold_zero_beta() {
        for &d in &[-3.0, 0.0, 1.5] {
            let x = numerical_threshold(d, 0.0, 1.0, 10.0, 1e-6).unwrap();
            assert!((x - (1.0f64 + d * d).sqrt()).abs() < 1e-3, "d={d}: {x}");
        }
    }
}
