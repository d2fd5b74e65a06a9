use crate::error::{Error, Result};
use crate::units::{angular, BOLTZMANN, HBAR, RESISTANCE_QUANTUM};
use serde::{Deserialize, Serialize};

/// Static constants of the qubit + tunable quarter-wave resonator device.
///
/// Energies and rates are angular frequencies (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParameters {
    /// Transmon Josephson energy E_J.
    pub josephson_energy: f64,
    /// Transmon charging energy E_C.
    pub charging_energy: f64,
    /// Qubit-resonator coupling g01.
    pub coupling: f64,
    /// Resonance of the quarter-wave resonator without the SQUID.
    pub bare_frequency: f64,
    /// Inductive participation ratio of the SQUID at zero flux, γ0.
    pub participation: f64,
    /// External (coupling-capacitor) damping rate Γ0.
    pub external_damping: f64,
    /// Internal loss rate Γ_R.
    pub internal_loss: f64,
    /// Transmon flux map F' = F / scale + offset.
    pub flux_map_scale: f64,
    pub flux_map_offset: f64,
    /// Resonator characteristic impedance, ohm.
    pub impedance: f64,
    /// Resistance quantum h/e², ohm.
    pub resistance_quantum: f64,
}

impl DeviceParameters {
    /// Constants of the demonstration device.
    pub fn reference_device() -> Self {
        Self {
            josephson_energy: angular(9.82e9),
            charging_energy: angular(453e6),
            coupling: angular(46e6),
            bare_frequency: angular(5.55e9),
            participation: 0.053,
            external_damping: angular(1.02e6),
            internal_loss: angular(0.30e6),
            flux_map_scale: 8.88,
            flux_map_offset: 0.58,
            impedance: 50.0,
            resistance_quantum: RESISTANCE_QUANTUM,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("josephson_energy", self.josephson_energy),
            ("charging_energy", self.charging_energy),
            ("bare_frequency", self.bare_frequency),
            ("external_damping", self.external_damping),
            ("internal_loss", self.internal_loss),
            ("flux_map_scale", self.flux_map_scale),
            ("impedance", self.impedance),
            ("resistance_quantum", self.resistance_quantum),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(
                    name,
                    format!("must be positive, got {value}"),
                ));
            }
        }
        // g01 = 0 is the decoupled limit and is allowed.
        if !(self.coupling.is_finite() && self.coupling >= 0.0) {
            return Err(Error::invalid(
                "coupling",
                format!("must be non-negative, got {}", self.coupling),
            ));
        }
        if !(self.participation >= 0.0 && self.participation < 1.0) {
            return Err(Error::invalid(
                "participation",
                format!("must lie in [0, 1), got {}", self.participation),
            ));
        }
        if !self.flux_map_offset.is_finite() {
            return Err(Error::invalid("flux_map_offset", "must be finite"));
        }
        Ok(())
    }

    /// Total damping Γ = Γ0 + Γ_R.
    #[inline]
    pub fn total_damping(&self) -> f64 {
        self.external_damping + self.internal_loss
    }

    /// Effective transmon flux F' for resonator flux bias F.
    #[inline]
    pub fn transmon_flux(&self, flux: f64) -> f64 {
        flux / self.flux_map_scale + self.flux_map_offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitParameters {
    /// Energy relaxation time T1, s.
    pub t1: f64,
    /// Ramsey decay time T2*, s.
    pub t2_star: f64,
    /// Effective qubit temperature, K.
    pub temperature: f64,
    /// Qubit transition frequency at the bias point, rad/s.
    pub frequency: f64,
}

impl QubitParameters {
    pub fn reference_qubit() -> Self {
        Self {
            t1: 4.24e-6,
            t2_star: 1.66e-6,
            temperature: 45e-3,
            frequency: angular(4.885e9),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t1 > 0.0) {
            return Err(Error::invalid(
                "t1",
                format!("must be positive, got {}", self.t1),
            ));
        }
        if !(self.t2_star > 0.0 && self.t2_star <= 2.0 * self.t1) {
            return Err(Error::invalid(
                "t2_star",
                format!(
                    "must satisfy 0 < T2* <= 2 T1, got {} with T1 = {}",
                    self.t2_star, self.t1
                ),
            ));
        }
        if !(self.temperature >= 0.0) {
            return Err(Error::invalid("temperature", "must be non-negative"));
        }
        if !(self.frequency > 0.0) {
            return Err(Error::invalid("frequency", "must be positive"));
        }
        Ok(())
    }

    /// Two-level Boltzmann population of the excited state.
    pub fn thermal_population(&self) -> f64 {
        if self.temperature == 0.0 {
            return 0.0;
        }
        let ratio = (-HBAR * self.frequency / (BOLTZMANN * self.temperature)).exp();
        ratio / (1.0 + ratio)
    }
}
