//! Monte-Carlo readout cycles and their analysis: histograms, Gaussian fits,
//! SNR, S-curves, state discrimination and the error budget.

mod analysis;
mod budget;
mod cycle;
mod fit;
mod io;
mod map;

pub use analysis::{
    analyze, best_threshold, discrimination, oscillation_axis, project, rectified_analyze,
    DetectionMode, Histogram1d, Histogram2d, HistogramAnalysis, SCurves, HISTOGRAM_BINS, MIN_SHOTS,
    S_CURVE_POINTS,
};
pub use budget::{error_budget, ErrorBudget};
pub use cycle::{fault, run_both, run_cycles, CycleConfig, ReadoutCycleRecord};
pub use fit::{choose_model, fit_peak, GaussianFit, PeakModel};
pub use io::{
    read_records_binary, read_records_text, report_text, write_histogram_2d, write_histograms,
    write_records_binary, write_records_text, write_s_curves, RECORD_HEADER,
};
pub use map::{discrimination_map, DiscriminationMap, DEFAULT_SHOTS_PER_CELL};
