//! TOML run configuration.
//!
//! Frequencies and rates are given in Hz (ordinary, not angular) and converted
//! once in [`Config::resolve`]. Every key is required unless its field is an
//! `Option`; unknown keys are rejected.

use jpo_core::chain::DetectionConfig;
use jpo_core::device::{DeviceParameters, OperatingPoint, QubitParameters};
use jpo_core::dynamics::{InputDrive, RelaxationModel, SimulationConfig};
use jpo_core::readout::CycleConfig;
use jpo_core::units::{angular, hertz, RESISTANCE_QUANTUM};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub device: DeviceSection,
    pub operating_point: OperatingPointSection,
    pub qubit: QubitSection,
    pub detection: DetectionSection,
    pub simulation: SimulationSection,
    pub cycle: CycleSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSection {
    pub josephson_energy_hz: f64,
    pub charging_energy_hz: f64,
    pub coupling_hz: f64,
    pub bare_frequency_hz: f64,
    pub participation: f64,
    pub external_damping_hz: f64,
    pub internal_loss_hz: f64,
    pub flux_map_scale: f64,
    pub flux_map_offset: f64,
    pub impedance_ohm: f64,
    pub resistance_quantum_ohm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatingPointSection {
    /// Flux bias F in units of π.
    pub flux_over_pi: f64,
    /// Pump detuning from the ground-state resonance, in units of Γ.
    pub ground_detuning_over_gamma: f64,
    pub epsilon_over_gamma: f64,
    /// Measured 2χ/2π. Derived from the device when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_chi_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitSection {
    pub t1_s: f64,
    pub t2_star_s: f64,
    pub temperature_k: f64,
    pub frequency_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSection {
    pub added_noise_photons: f64,
    pub if_frequency_hz: f64,
    pub adc_rate_sps: f64,
    pub decimated_rate_sps: f64,
    pub gain_db: f64,
    pub ring_up_delay_s: f64,
    pub sampling_time_s: f64,
    pub resonator_frequency_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relaxation {
    Physical,
    ForceQuiet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub dt_s: f64,
    pub t_end_s: f64,
    pub seed_noise_photons: f64,
    pub pump_ramp_s: f64,
    pub sample_interval_s: f64,
    pub relaxation: Relaxation,
    /// Coherent input |b|, √(photons/s).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_drive_amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_drive_offset_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleSection {
    pub n_shots: usize,
    pub pi_pulse_s: f64,
    pub delay_s: f64,
    pub prep_error_prob: f64,
    /// Boltzmann population of the qubit when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thermal_prob: Option<f64>,
    pub switch_prob: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_override_s: Option<f64>,
}

/// Parameters in the units the simulator uses.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub device: DeviceParameters,
    pub point: OperatingPoint,
    pub qubit: QubitParameters,
    pub detection: DetectionConfig,
    pub simulation: SimulationConfig,
    pub cycle: CycleConfig,
}

/// Derived quantities recorded in the run manifest, in Hz where applicable.
#[derive(Debug, Clone, Serialize)]
pub struct DerivedSnapshot {
    pub gamma_hz: f64,
    pub gamma0_hz: f64,
    pub chi_hz: f64,
    pub alpha_hz: f64,
    pub beta: f64,
    pub delta_hz: f64,
    pub epsilon_hz: f64,
    pub ground_detuning_hz: f64,
    pub excited_detuning_hz: f64,
    pub thermal_probability: f64,
}

impl Default for Config {
    fn default() -> Self {
        let det = DetectionConfig::default();
        let sim = SimulationConfig::default();
        let cycle = CycleConfig::default();
        Self {
            device: DeviceSection {
                josephson_energy_hz: 9.82e9,
                charging_energy_hz: 453e6,
                coupling_hz: 46e6,
                bare_frequency_hz: 5.55e9,
                participation: 0.053,
                external_damping_hz: 1.02e6,
                internal_loss_hz: 0.30e6,
                flux_map_scale: 8.88,
                flux_map_offset: 0.58,
                impedance_ohm: 50.0,
                resistance_quantum_ohm: RESISTANCE_QUANTUM,
            },
            operating_point: OperatingPointSection {
                flux_over_pi: 0.185,
                ground_detuning_over_gamma: -5.34,
                epsilon_over_gamma: 3.56,
                two_chi_hz: Some(-7.258e6),
                alpha_hz: Some(27e3),
                beta: Some(7.5e-3),
            },
            qubit: QubitSection {
                t1_s: 4.24e-6,
                t2_star_s: 1.66e-6,
                temperature_k: 45e-3,
                frequency_hz: 4.885e9,
            },
            detection: DetectionSection {
                added_noise_photons: det.added_noise_photons,
                if_frequency_hz: det.if_frequency,
                adc_rate_sps: det.adc_rate,
                decimated_rate_sps: det.decimated_rate,
                gain_db: det.gain_db,
                ring_up_delay_s: det.ring_up_delay,
                sampling_time_s: det.sampling_time,
                resonator_frequency_hz: hertz(det.resonator_frequency),
            },
            simulation: SimulationSection {
                dt_s: sim.dt,
                t_end_s: sim.t_end,
                seed_noise_photons: sim.seed_noise_photons,
                pump_ramp_s: sim.pump_ramp,
                sample_interval_s: sim.sample_interval,
                relaxation: Relaxation::Physical,
                input_drive_amplitude: None,
                input_drive_offset_hz: None,
            },
            cycle: CycleSection {
                n_shots: cycle.n_shots,
                pi_pulse_s: cycle.pi_pulse,
                delay_s: cycle.delay,
                prep_error_prob: cycle.prep_error_prob,
                thermal_prob: cycle.thermal_prob,
                switch_prob: cycle.switch_prob,
                decay_override_s: cycle.decay_override,
            },
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Convert to simulator units and validate every part.
    pub fn resolve(&self, seed: u64) -> Result<Resolved, String> {
        let d = &self.device;
        let device = DeviceParameters {
            josephson_energy: angular(d.josephson_energy_hz),
            charging_energy: angular(d.charging_energy_hz),
            coupling: angular(d.coupling_hz),
            bare_frequency: angular(d.bare_frequency_hz),
            participation: d.participation,
            external_damping: angular(d.external_damping_hz),
            internal_loss: angular(d.internal_loss_hz),
            flux_map_scale: d.flux_map_scale,
            flux_map_offset: d.flux_map_offset,
            impedance: d.impedance_ohm,
            resistance_quantum: d.resistance_quantum_ohm,
        };
        device.validate().map_err(|e| format!("[device] {e}"))?;

        let op = &self.operating_point;
        let gamma = device.total_damping();
        let mut point = OperatingPoint::from_ground_detuning(
            &device,
            op.flux_over_pi * PI,
            op.ground_detuning_over_gamma * gamma,
            op.epsilon_over_gamma * gamma,
        )
        .map_err(|e| format!("[operating_point] {e}"))?;
        if let Some(two_chi) = op.two_chi_hz {
            point.chi = angular(two_chi) / 2.0;
            point.delta = op.ground_detuning_over_gamma * gamma - point.chi;
        }
        if let Some(alpha) = op.alpha_hz {
            point.alpha = angular(alpha);
        }
        if let Some(beta) = op.beta {
            point.beta = beta;
        }
        point
            .validate()
            .map_err(|e| format!("[operating_point] {e}"))?;

        let q = &self.qubit;
        let qubit = QubitParameters {
            t1: q.t1_s,
            t2_star: q.t2_star_s,
            temperature: q.temperature_k,
            frequency: angular(q.frequency_hz),
        };
        qubit.validate().map_err(|e| format!("[qubit] {e}"))?;

        let t = &self.detection;
        let detection = DetectionConfig {
            added_noise_photons: t.added_noise_photons,
            if_frequency: t.if_frequency_hz,
            adc_rate: t.adc_rate_sps,
            decimated_rate: t.decimated_rate_sps,
            gain_db: t.gain_db,
            ring_up_delay: t.ring_up_delay_s,
            sampling_time: t.sampling_time_s,
            resonator_frequency: angular(t.resonator_frequency_hz),
        };
        detection
            .validate()
            .map_err(|e| format!("[detection] {e}"))?;

        let s = &self.simulation;
        let input_drive = match (s.input_drive_amplitude, s.input_drive_offset_hz) {
            (None, None) => None,
            (Some(amplitude), offset) => Some(InputDrive {
                amplitude,
                frequency_offset: angular(offset.unwrap_or(0.0)),
            }),
            (None, Some(_)) => {
                return Err(
                    "[simulation] input_drive_offset_hz given without input_drive_amplitude".into(),
                )
            }
        };
        let simulation = SimulationConfig {
            dt: s.dt_s,
            t_end: s.t_end_s,
            seed_noise_photons: s.seed_noise_photons,
            rng_seed: seed,
            pump_ramp: s.pump_ramp_s,
            input_drive,
            sample_interval: s.sample_interval_s,
            initial_amplitude: Complex64::new(0.0, 0.0),
            relaxation: match s.relaxation {
                Relaxation::Physical => RelaxationModel::Physical,
                Relaxation::ForceQuiet => RelaxationModel::ForceQuiet,
            },
        };
        simulation
            .validate()
            .map_err(|e| format!("[simulation] {e}"))?;

        let c = &self.cycle;
        let cycle = CycleConfig {
            n_shots: c.n_shots,
            pi_pulse: c.pi_pulse_s,
            delay: c.delay_s,
            prep_error_prob: c.prep_error_prob,
            thermal_prob: c.thermal_prob,
            switch_prob: c.switch_prob,
            decay_override: c.decay_override_s,
            ..CycleConfig::default()
        };
        cycle.validate().map_err(|e| format!("[cycle] {e}"))?;

        Ok(Resolved {
            device,
            point,
            qubit,
            detection,
            simulation,
            cycle,
        })
    }
}

impl Resolved {
    pub fn derived(&self) -> DerivedSnapshot {
        use jpo_core::device::QubitState;
        let p = &self.point;
        DerivedSnapshot {
            gamma_hz: hertz(p.gamma),
            gamma0_hz: hertz(p.gamma0),
            chi_hz: hertz(p.chi),
            alpha_hz: hertz(p.alpha),
            beta: p.beta,
            delta_hz: hertz(p.delta),
            epsilon_hz: hertz(p.epsilon),
            ground_detuning_hz: hertz(p.detuning(QubitState::Ground)),
            excited_detuning_hz: hertz(p.detuning(QubitState::Excited)),
            thermal_probability: self.cycle.thermal_probability(&self.qubit),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_matches_reference_point() {
        let r = Config::default().resolve(0).unwrap();
        let reference = OperatingPoint::reference_point();
        for (a, b) in [
            (r.point.gamma, reference.gamma),
            (r.point.gamma0, reference.gamma0),
            (r.point.chi, reference.chi),
            (r.point.delta, reference.delta),
            (r.point.epsilon, reference.epsilon),
            (r.point.alpha, reference.alpha),
            (r.point.flux, reference.flux),
        ] {
            assert!((a - b).abs() <= 1e-12 * b.abs(), "{a} vs {b}");
        }
        assert_eq!(r.point.beta, reference.beta);
    }

    #[test]
    fn toml_round_trip() {
        let c = Config::default();
        assert_eq!(Config::parse(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let text = Config::default()
            .to_toml()
            .replace("[qubit]", "[qubit]\nt3_s = 1.0");
        let err = Config::parse(&text).unwrap_err();
        assert!(err.contains("t3_s"), "{err}");
    }

    #[test]
    fn missing_key_is_named() {
        let text = Config::default()
            .to_toml()
            .lines()
            .filter(|l| !l.starts_with("t1_s"))
            .collect::<Vec<_>>()
            .join("\n");
        let err = Config::parse(&text).unwrap_err();
        assert!(err.contains("t1_s"), "{err}");
    }

    #[test]
    fn derived_overrides_are_optional() {
        let mut c = Config::default();
        c.operating_point.two_chi_hz = None;
        c.operating_point.alpha_hz = None;
        c.operating_point.beta = None;
        let r = c.resolve(0).unwrap();
        assert!(r.point.chi < 0.0);
        assert!(r.point.alpha > 0.0 && r.point.beta > 0.0);
        // Ground-state detuning is held at the configured multiple of Γ.
        let g = r.point.detuning(jpo_core::device::QubitState::Ground);
        assert!((g / r.point.gamma + 5.34).abs() < 1e-12);
    }
}
