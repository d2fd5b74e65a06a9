//! Closed-form device physics: tuning curves, dispersive shift, nonlinear
//! coefficients, the instability boundary and steady-state amplitudes.
//!
//! Everything here is a pure function of its inputs.

mod nonlinear;
mod operating_point;
mod params;
mod steady_state;
mod threshold;
mod tuning;

pub use nonlinear::{duffing_alpha, nonlinear_shift, pump_induced_beta, NonlinearShift};
pub use operating_point::{OperatingPoint, QubitState};
pub use params::{DeviceParameters, QubitParameters};
pub use steady_state::{drift, steady_state_photons, Regime, Stability, SteadyRoot, SteadyState};
pub use threshold::{
    effective_detuning, instability_threshold, is_unstable, zero_state_growth_rate,
    ThresholdBranches,
};
pub use tuning::{
    bare_resonator_frequency, dispersive_shift, dispersive_shift_at, dressed_resonator_frequency,
    purcell_t1, qubit_frequency, qubit_resonator_detuning, DispersiveShift, DISPERSIVE_RATIO,
    FLUX_GUARD,
};
