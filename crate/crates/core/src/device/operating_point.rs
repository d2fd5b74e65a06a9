use super::nonlinear::{duffing_alpha, pump_induced_beta};
use super::params::DeviceParameters;
use super::threshold::effective_detuning;
use super::tuning::dispersive_shift;
use crate::error::{Error, Result};
use crate::units::angular;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QubitState {
    Ground,
    Excited,
}

impl QubitState {
    pub fn index(self) -> u8 {
        match self {
            QubitState::Ground => 0,
            QubitState::Excited => 1,
        }
    }

    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            0 => Some(QubitState::Ground),
            1 => Some(QubitState::Excited),
            _ => None,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            QubitState::Ground => QubitState::Excited,
            QubitState::Excited => QubitState::Ground,
        }
    }
}

/// Flux bias and pump settings together with the per-point coefficients that
/// enter the equation of motion. All rates in rad/s.
///
/// `delta` is measured from the qubit-averaged resonance. With χ < 0 the
/// excited qubit pulls the resonator down by 2χ, so half the pump frequency sits
/// further above it: δ|1⟩ − δ|0⟩ = −2χ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    /// Static flux bias F = πΦ_dc/Φ0.
    pub flux: f64,
    /// Pump detuning δ = ω_p/2 − ω_r.
    pub delta: f64,
    /// Pump amplitude ε.
    pub epsilon: f64,
    /// Dispersive shift χ.
    pub chi: f64,
    /// Kerr coefficient per photon.
    pub alpha: f64,
    /// Pump-induced shift coefficient (dimensionless).
    pub beta: f64,
    /// Total damping Γ.
    pub gamma: f64,
    /// External damping Γ0.
    pub gamma0: f64,
}

impl OperatingPoint {
    /// Derive χ, α, β and the damping rates from the device at flux `flux`.
    pub fn from_device(
        params: &DeviceParameters,
        flux: f64,
        delta: f64,
        epsilon: f64,
    ) -> Result<Self> {
        params.validate()?;
        if !(flux.abs() < FRAC_PI_2) {
            return Err(Error::Domain {
                what: "operating point flux bias",
                value: flux,
            });
        }
        let point = Self {
            flux,
            delta,
            epsilon,
            chi: dispersive_shift(params, flux)?.chi,
            alpha: duffing_alpha(params, flux)?,
            beta: pump_induced_beta(params, flux)?,
            gamma: params.total_damping(),
            gamma0: params.external_damping,
        };
        point.validate()?;
        Ok(point)
    }

    /// Same as [`from_device`](Self::from_device) but with the pump detuning given
    /// for the ground-state resonance, δ|0⟩.
    pub fn from_ground_detuning(
        params: &DeviceParameters,
        flux: f64,
        delta_ground: f64,
        epsilon: f64,
    ) -> Result<Self> {
        let mut point = Self::from_device(params, flux, 0.0, epsilon)?;
        point.delta = delta_ground - point.chi;
        Ok(point)
    }

    /// The demonstration point of the reference device: F = 0.185π,
    /// 2χ/2π = −7.258 MHz, α/2π = 27 kHz, β = 7.5e-3, δ|0⟩/Γ = −5.34, ε/Γ = 3.56.
    pub fn reference_point() -> Self {
        let gamma = angular(1.32e6);
        let chi = angular(-7.258e6) / 2.0;
        Self {
            flux: 0.185 * std::f64::consts::PI,
            delta: -5.34 * gamma - chi,
            epsilon: 3.56 * gamma,
            chi,
            alpha: angular(27e3),
            beta: 7.5e-3,
            gamma,
            gamma0: angular(1.02e6),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.flux.abs() < FRAC_PI_2) {
            return Err(Error::Domain {
                what: "operating point flux bias",
                value: self.flux,
            });
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::invalid("epsilon", "must be non-negative"));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid("alpha", "must be non-negative"));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid("beta", "must be non-negative"));
        }
        if !(self.gamma > 0.0 && self.gamma0 > 0.0 && self.gamma0 <= self.gamma) {
            return Err(Error::invalid("gamma", "need 0 < Γ0 <= Γ"));
        }
        if !(self.delta.is_finite() && self.chi.is_finite()) {
            return Err(Error::invalid("delta", "must be finite"));
        }
        Ok(())
    }

    /// Keep δ|0⟩ fixed while replacing χ.
    pub fn with_chi_keeping_ground(mut self, chi: f64) -> Self {
        let ground = self.delta_q0();
        self.chi = chi;
        self.delta = ground - chi;
        self
    }

    /// Detuning seen with the qubit in its ground state, δ + χ.
    pub fn delta_q0(&self) -> f64 {
        self.delta + self.chi
    }

    /// Detuning seen with the qubit excited, δ − χ.
    pub fn delta_q1(&self) -> f64 {
        self.delta - self.chi
    }

    pub fn detuning(&self, state: QubitState) -> f64 {
        match state {
            QubitState::Ground => self.delta_q0(),
            QubitState::Excited => self.delta_q1(),
        }
    }

    /// Detuning including the pump-induced pull at pump amplitude `epsilon`.
    pub fn effective_detuning(&self, state: QubitState, epsilon: f64) -> f64 {
        effective_detuning(self.detuning(state), epsilon, self.beta, self.gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{angular, hertz};
    use std::f64::consts::PI;

    #[test]
    fn detunings_mirror_about_center() {
        let p = DeviceParameters::reference_device();
        for k in 0..20 {
            let d = angular(-8e6 + 0.8e6 * k as f64);
            let point = OperatingPoint::from_device(&p, 0.185 * PI, d, angular(4e6)).unwrap();
            let sum = point.delta_q0() + point.delta_q1();
            assert!(
                (sum - 2.0 * point.delta).abs()
                    <= 4.0 * f64::EPSILON * point.delta.abs().max(point.chi.abs())
            );
            assert!(point.delta_q1() > point.delta_q0());
        }
    }

    #[test]
    fn ground_detuning_constructor() {
        let p = DeviceParameters::reference_device();
        let g = p.total_damping();
        let point =
            OperatingPoint::from_ground_detuning(&p, 0.185 * PI, -5.34 * g, 3.56 * g).unwrap();
        assert!((point.delta_q0() / g + 5.34).abs() < 1e-12);
        let separation = hertz(point.delta_q1() - point.delta_q0());
        assert!((separation - 7.104e6).abs() < 0.01e6, "{separation}");
        let moved = point.with_chi_keeping_ground(angular(-7.258e6) / 2.0);
        assert!((moved.delta_q0() / g + 5.34).abs() < 1e-12);
        assert!((hertz(moved.delta_q1() - moved.delta_q0()) - 7.258e6).abs() < 1e-3);
    }

    #[test]
    fn rejects_flux_outside_branch() {
        let p = DeviceParameters::reference_device();
        assert!(OperatingPoint::from_device(&p, 1.6, 0.0, 1.0).is_err());
        assert!(OperatingPoint::from_device(&p, 0.5, 0.0, -1.0).is_err());
    }
}
