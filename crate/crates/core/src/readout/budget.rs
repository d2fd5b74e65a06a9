//! Attribution of readout errors to their drawn causes.

use super::analysis::HistogramAnalysis;
use super::cycle::{fault, ReadoutCycleRecord};
use statrs::function::erf::erfc;
use std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBudget {
    pub relaxation_loss: f64,
    pub preparation_loss: f64,
    pub thermal_loss: f64,
    pub switching_loss: f64,
    /// Misclassified shots with no drawn fault (Monte-Carlo count).
    pub overlap_loss: f64,
    /// Gaussian tail beyond the midpoint for one state, ½·erfc(SNR/√2).
    pub overlap_analytic: f64,
    pub measured_discrimination: f64,
    /// Discrimination plus the relaxation, preparation and thermal losses.
    pub inferred_fidelity: f64,
}

impl ErrorBudget {
    /// Discrimination plus every attributed loss. Equals 1 up to rounding when
    /// the budget was built from the same records as the analysis.
    pub fn accounted(&self) -> f64 {
        self.measured_discrimination
            + self.relaxation_loss
            + self.preparation_loss
            + self.thermal_loss
            + self.switching_loss
            + self.overlap_loss
    }
}

/// Cause of a misclassification: the earliest-acting drawn fault.
fn cause(flags: u8) -> usize {
    [
        fault::PREPARATION,
        fault::THERMAL,
        fault::DECAY,
        fault::SWITCH,
    ]
    .iter()
    .position(|&bit| flags & bit != 0)
    .unwrap_or(4)
}

/// Each misclassified shot is charged to one cause in priority order
/// preparation > thermal > decay > switch > overlap. Losses are fractions of
/// the shots of the shot's own preparation, summed over both preparations, so
/// that discrimination + all losses = 1.
pub fn error_budget(records: &[ReadoutCycleRecord], analysis: &HistogramAnalysis) -> ErrorBudget {
    let mut losses = [0.0; 5];
    for r in records {
        if analysis.classify(r) != r.prepared_state {
            let n = analysis.shots[r.prepared_state.index() as usize] as f64;
            losses[cause(r.fault_flags)] += 1.0 / n;
        }
    }
    let [preparation_loss, thermal_loss, relaxation_loss, switching_loss, overlap_loss] = losses;
    let d = analysis.discrimination;
    ErrorBudget {
        relaxation_loss,
        preparation_loss,
        thermal_loss,
        switching_loss,
        overlap_loss,
        overlap_analytic: 0.5 * erfc(analysis.snr / SQRT_2),
        measured_discrimination: d,
        inferred_fidelity: d + relaxation_loss + preparation_loss + thermal_loss,
    }
}
