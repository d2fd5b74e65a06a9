//! State discrimination over a (δ|0⟩, ε) grid.

use super::analysis::{discrimination, DetectionMode};
use super::cycle::{run_both, CycleConfig};
use crate::chain::DetectionConfig;
use crate::device::{OperatingPoint, QubitParameters};
use crate::dynamics::{cell_point, CellFailure, RegionGrid, SimulationConfig};
use crate::error::Result;
use crate::rng::{derive_seed, Domain};

pub const DEFAULT_SHOTS_PER_CELL: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminationMap {
    pub grid: RegionGrid,
    /// Row-major (ε rows × δ columns); NaN where the cell failed.
    pub discrimination: Vec<f64>,
    pub failures: Vec<CellFailure>,
}

impl DiscriminationMap {
    pub fn at(&self, row: usize, column: usize) -> f64 {
        self.discrimination[row * self.grid.delta_points + column]
    }

    /// (row, column, value) of the best cell, ignoring failed cells.
    pub fn best(&self) -> Option<(usize, usize, f64)> {
        self.discrimination
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_finite())
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, &d)| {
                let (row, column) = self.grid.cell(i);
                (row, column, d)
            })
    }
}

/// Run `cycle.n_shots` cycles per preparation in every cell and record the
/// discrimination. Cells are processed in order; each cell parallelizes over
/// shots. A failing cell is recorded and the sweep continues.
#[allow(clippy::too_many_arguments)]
pub fn discrimination_map(
    grid: &RegionGrid,
    template: &OperatingPoint,
    cycle: &CycleConfig,
    qubit: &QubitParameters,
    det: &DetectionConfig,
    sim: &SimulationConfig,
    mode: DetectionMode,
    rng_seed: u64,
) -> Result<DiscriminationMap> {
    grid.validate()?;
    cycle.validate()?;
    let mut values = Vec::with_capacity(grid.len());
    let mut failures = Vec::new();
    for index in 0..grid.len() {
        let (row, column) = grid.cell(index);
        let point = cell_point(template, grid.delta(column), grid.epsilon(row));
        let seed = derive_seed(rng_seed, Domain::RegionMap, index as u64);
        let outcome =
            run_both(cycle, qubit, &point, det, sim, seed).and_then(|r| discrimination(&r, mode));
        match outcome {
            Ok((d, _)) => values.push(d),
            Err(e) => {
                values.push(f64::NAN);
                failures.push(CellFailure {
                    row,
                    column,
                    message: e.to_string(),
                });
            }
        }
    }
    Ok(DiscriminationMap {
        grid: *grid,
        discrimination: values,
        failures,
    })
}
