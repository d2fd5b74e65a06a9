//! Flux tuning of the resonator and the transmon, and the dispersive coupling
//! between them.

use super::params::DeviceParameters;
use crate::error::{Error, Result};

/// Guard on |cos F| and |sin F| near the singular flux biases.
pub const FLUX_GUARD: f64 = 1e-6;

/// Ratio above which |Δ|/g01 counts as the dispersive regime.
pub const DISPERSIVE_RATIO: f64 = 5.0;

/// Bare resonator frequency ω_r(F) = ω_λ/4 / (1 + γ0/|cos F|).
pub fn bare_resonator_frequency(params: &DeviceParameters, flux: f64) -> Result<f64> {
    let cos = flux.cos().abs();
    if cos <= FLUX_GUARD {
        return Err(Error::Domain {
            what: "bare_resonator_frequency",
            value: flux,
        });
    }
    Ok(params.bare_frequency / (1.0 + params.participation / cos))
}

/// Transmon 0-1 transition frequency ω_a(F') = √(8 E_J |cos F'| E_C) − E_C.
///
/// At cos F' = 0 this returns −E_C, which is outside the physical regime of the
/// approximation.
pub fn qubit_frequency(params: &DeviceParameters, flux: f64) -> f64 {
    let cos = params.transmon_flux(flux).cos().abs();
    (8.0 * params.josephson_energy * cos * params.charging_energy).sqrt() - params.charging_energy
}

/// Qubit-resonator detuning Δ(F) = ω_a(F') − ω_r(F).
pub fn qubit_resonator_detuning(params: &DeviceParameters, flux: f64) -> Result<f64> {
    Ok(qubit_frequency(params, flux) - bare_resonator_frequency(params, flux)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersiveShift {
    /// χ, rad/s. The two qubit states pull the resonator 2χ apart.
    pub chi: f64,
    /// Δ used to evaluate χ.
    pub detuning: f64,
    /// |Δ| > 5 g01. Outside this regime the two-level formula is unreliable;
    /// this is a warning only.
    pub dispersive: bool,
}

/// χ(Δ) = −(g01²/Δ) · E_C / (Δ − E_C).
pub fn dispersive_shift_at(
    coupling: f64,
    charging_energy: f64,
    detuning: f64,
) -> Result<DispersiveShift> {
    let guard = 1e-9 * charging_energy;
    if detuning.abs() <= guard || (detuning - charging_energy).abs() <= guard {
        return Err(Error::Singular {
            what: "dispersive shift (Δ → 0 or Δ → E_C)",
        });
    }
    let chi = -(coupling * coupling / detuning) * (charging_energy / (detuning - charging_energy));
    Ok(DispersiveShift {
        chi,
        detuning,
        dispersive: detuning.abs() > DISPERSIVE_RATIO * coupling,
    })
}

pub fn dispersive_shift(params: &DeviceParameters, flux: f64) -> Result<DispersiveShift> {
    let detuning = qubit_resonator_detuning(params, flux)?;
    dispersive_shift_at(params.coupling, params.charging_energy, detuning)
}

/// Resonator frequency with the qubit in its ground state,
/// ω_r^|0⟩(F) = ω_r(F) − g01²/Δ(F).
pub fn dressed_resonator_frequency(params: &DeviceParameters, flux: f64) -> Result<f64> {
    let bare = bare_resonator_frequency(params, flux)?;
    let detuning = qubit_frequency(params, flux) - bare;
    if detuning.abs() <= 1e-9 * params.charging_energy {
        return Err(Error::Singular {
            what: "dressed resonator frequency (Δ → 0)",
        });
    }
    Ok(bare - params.coupling * params.coupling / detuning)
}

/// Purcell-limited relaxation time T1 ≈ [2Γ0 (g01/Δ)²]⁻¹.
pub fn purcell_t1(external_damping: f64, coupling: f64, detuning: f64) -> Result<f64> {
    if coupling == 0.0 || detuning == 0.0 || external_damping == 0.0 {
        return Err(Error::Singular { what: "Purcell T1" });
    }
    let ratio = coupling / detuning;
    Ok(1.0 / (2.0 * external_damping * ratio * ratio))
}
