//! Monte-Carlo readout cycles.
//!
//! Timeline of one cycle (t = 0 at pump-on):
//!
//! ```text
//!   π-pulse (τ_π) | delay τ_d | pump on ............................. |
//!                              0        τ_r            τ_r + τ_s
//!                                        [ sampling window ]
//! ```
//!
//! Each shot draws its faults from its own random stream, builds a
//! [`JumpSchedule`], integrates the oscillator and detects the output.

use crate::chain::{detect, DetectionConfig};
use crate::device::{OperatingPoint, QubitParameters, QubitState};
use crate::dynamics::{integrate, JumpSchedule, SimulationConfig};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream, Domain};
use rand::Rng;
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct CycleConfig {
    pub n_shots: usize,
    /// π-pulse plateau τ_π, s.
    pub pi_pulse: f64,
    /// Delay τ_d from the end of the π-pulse to pump-on, s.
    pub delay: f64,
    /// Probability that the π-pulse fails to excite the qubit.
    pub prep_error_prob: f64,
    /// Probability the qubit starts in |1⟩ before the π-pulse. `None` uses the
    /// Boltzmann population of the qubit.
    pub thermal_prob: Option<f64>,
    /// Probability of one phase switch inside the sampling window.
    pub switch_prob: f64,
    pub prepared_state: QubitState,
    /// Fixed decay time (s after pump-on) for every shot that starts in |1⟩,
    /// replacing the exponential draw.
    pub decay_override: Option<f64>,
}

impl Default for CycleConfig {
    fn default() -> Self {
        Self {
            n_shots: 100_000,
            pi_pulse: 52e-9,
            delay: 20e-9,
            prep_error_prob: 0.045,
            thermal_prob: None,
            switch_prob: 0.024,
            prepared_state: QubitState::Excited,
            decay_override: None,
        }
    }
}

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must lie in [0, 1], got {p}")))
    }
}

impl CycleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_shots == 0 {
            return Err(Error::invalid("n_shots", "must be at least 1"));
        }
        if !(self.pi_pulse >= 0.0) || !(self.delay >= 0.0) {
            return Err(Error::invalid("pi_pulse/delay", "must be non-negative"));
        }
        check_probability("prep_error_prob", self.prep_error_prob)?;
        check_probability("switch_prob", self.switch_prob)?;
        if let Some(p) = self.thermal_prob {
            check_probability("thermal_prob", p)?;
        }
        Ok(())
    }

    pub fn thermal_probability(&self, qubit: &QubitParameters) -> f64 {
        self.thermal_prob
            .unwrap_or_else(|| qubit.thermal_population())
    }

    pub fn with_state(&self, state: QubitState) -> Self {
        Self {
            prepared_state: state,
            ..self.clone()
        }
    }
}

/// Fault flag bits, in attribution priority order.
pub mod fault {
    pub const PREPARATION: u8 = 1;
    pub const THERMAL: u8 = 2;
    /// The qubit relaxed before the end of the sampling window.
    pub const DECAY: u8 = 4;
    pub const SWITCH: u8 = 8;
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutCycleRecord {
    pub shot_index: u64,
    pub prepared_state: QubitState,
    /// Qubit state at pump-on, before any decay during the run.
    pub true_state: QubitState,
    pub fault_flags: u8,
    /// Decay time after pump-on, s (negative: before pump-on).
    pub decay_time: Option<f64>,
    pub switch_time: Option<f64>,
    /// Window-mean quadratures, V.
    pub v_i: f64,
    pub v_q: f64,
    /// Rectified window mean |V|, V.
    pub v_abs: f64,
    pub classified: Option<QubitState>,
}

impl ReadoutCycleRecord {
    /// Record with measured voltages only and no fault information, e.g. for
    /// analyzing external data.
    pub fn from_voltages(
        shot_index: u64,
        prepared_state: QubitState,
        v_i: f64,
        v_q: f64,
        v_abs: f64,
    ) -> Self {
        Self {
            shot_index,
            prepared_state,
            true_state: prepared_state,
            fault_flags: 0,
            decay_time: None,
            switch_time: None,
            v_i,
            v_q,
            v_abs,
            classified: None,
        }
    }

    pub fn schedule(&self) -> JumpSchedule {
        JumpSchedule {
            initial_state: Some(self.true_state),
            decay_time: self.decay_time,
            preparation_fault: self.fault_flags & fault::PREPARATION != 0,
            thermal_excited: self.fault_flags & fault::THERMAL != 0,
            phase_switch_times: self.switch_time.into_iter().collect(),
        }
    }
}

/// Random choices for one shot. All five uniforms are drawn in a fixed order so
/// that changing one probability (or T1) leaves the other draws untouched.
fn draw_schedule(
    cycle: &CycleConfig,
    qubit: &QubitParameters,
    det: &DetectionConfig,
    thermal_prob: f64,
    rng: &mut impl Rng,
) -> (JumpSchedule, u8) {
    let u_thermal: f64 = rng.random();
    let u_prep: f64 = rng.random();
    let u_decay: f64 = rng.random();
    let u_switch: f64 = rng.random();
    let u_switch_time: f64 = rng.random();

    let thermal = u_thermal < thermal_prob;
    let mut state = if thermal {
        QubitState::Excited
    } else {
        QubitState::Ground
    };
    let mut prep_fault = false;
    if cycle.prepared_state == QubitState::Excited {
        prep_fault = u_prep < cycle.prep_error_prob;
        if !prep_fault {
            state = state.flipped();
        }
    }

    let decay_time = match state {
        QubitState::Ground => None,
        QubitState::Excited => match cycle.decay_override {
            Some(t) => Some(t),
            // Inverse-CDF draw, measured from the end of the π-pulse.
            None if qubit.t1.is_finite() => Some(-qubit.t1 * (1.0 - u_decay).ln() - cycle.delay),
            None => None,
        },
    };
    let switch_time = (u_switch < cycle.switch_prob)
        .then_some(det.ring_up_delay + u_switch_time * det.sampling_time);

    let mut flags = 0;
    if prep_fault {
        flags |= fault::PREPARATION;
    }
    if thermal {
        flags |= fault::THERMAL;
    }
    if decay_time.is_some_and(|t| t < det.window_end()) {
        flags |= fault::DECAY;
    }
    if switch_time.is_some() {
        flags |= fault::SWITCH;
    }

    let schedule = JumpSchedule {
        initial_state: Some(state),
        decay_time,
        preparation_fault: prep_fault,
        thermal_excited: thermal,
        phase_switch_times: switch_time.into_iter().collect(),
    };
    (schedule, flags)
}

/// Stream key of a shot: preparations get disjoint streams.
fn shot_key(shot: u64, prepared: QubitState) -> u64 {
    shot * 2 + prepared.index() as u64
}

/// Run `cycle.n_shots` readout cycles in parallel. Deterministic for a given
/// `rng_seed`, independent of thread count.
pub fn run_cycles(
    cycle: &CycleConfig,
    qubit: &QubitParameters,
    point: &OperatingPoint,
    det: &DetectionConfig,
    sim: &SimulationConfig,
    rng_seed: u64,
) -> Result<Vec<ReadoutCycleRecord>> {
    cycle.validate()?;
    qubit.validate()?;
    point.validate()?;
    det.validate()?;
    sim.validate()?;
    if sim.t_end < det.window_end() * (1.0 - 1e-12) {
        return Err(Error::WindowExceedsTrajectory {
            start: det.ring_up_delay,
            end: det.window_end(),
            available: sim.t_end,
        });
    }
    let thermal_prob = cycle.thermal_probability(qubit);

    (0..cycle.n_shots as u64)
        .into_par_iter()
        .map(|shot| {
            let key = shot_key(shot, cycle.prepared_state);
            let mut faults = stream(rng_seed, Domain::Faults, key);
            let (schedule, flags) = draw_schedule(cycle, qubit, det, thermal_prob, &mut faults);
            let run = SimulationConfig {
                rng_seed: derive_seed(rng_seed, Domain::Dynamics, key),
                ..sim.clone()
            };
            let wrap = |e: Error| Error::Shot {
                index: shot,
                source: Box::new(e),
            };
            let traj = integrate(&run, point, &schedule).map_err(wrap)?;
            let mut noise = stream(rng_seed, Domain::Detection, key);
            let d = detect(&traj, det, point.gamma0, &mut noise).map_err(wrap)?;
            Ok(ReadoutCycleRecord {
                shot_index: shot,
                prepared_state: cycle.prepared_state,
                true_state: schedule.initial_state.unwrap_or(QubitState::Ground),
                fault_flags: flags,
                decay_time: schedule.decay_time,
                switch_time: schedule.phase_switch_times.first().copied(),
                v_i: d.mean.re,
                v_q: d.mean.im,
                v_abs: d.rectified,
                classified: None,
            })
        })
        .collect()
}

/// Run both preparations with the same configuration.
pub fn run_both(
    cycle: &CycleConfig,
    qubit: &QubitParameters,
    point: &OperatingPoint,
    det: &DetectionConfig,
    sim: &SimulationConfig,
    rng_seed: u64,
) -> Result<Vec<ReadoutCycleRecord>> {
    let mut records = run_cycles(
        &cycle.with_state(QubitState::Ground),
        qubit,
        point,
        det,
        sim,
        rng_seed,
    )?;
    records.extend(run_cycles(
        &cycle.with_state(QubitState::Excited),
        qubit,
        point,
        det,
        sim,
        rng_seed,
    )?);
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet_det() -> DetectionConfig {
        DetectionConfig::default()
    }

    #[test]
    fn fault_draws_follow_probabilities() {
        let cycle = CycleConfig {
            prep_error_prob: 0.3,
            thermal_prob: Some(0.1),
            switch_prob: 0.2,
            ..CycleConfig::default()
        };
        let qubit = QubitParameters::reference_qubit();
        let det = quiet_det();
        let n = 20_000;
        let mut counts = [0usize; 4];
        for k in 0..n {
            let mut rng = stream(3, Domain::Faults, k);
            let (_, flags) = draw_schedule(&cycle, &qubit, &det, 0.1, &mut rng);
            for (bit, c) in counts.iter_mut().enumerate() {
                if flags & (1 << bit) != 0 {
                    *c += 1;
                }
            }
        }
        let frac = |c: usize| c as f64 / n as f64;
        assert!((frac(counts[0]) - 0.3).abs() < 0.015);
        assert!((frac(counts[1]) - 0.1).abs() < 0.01);
        assert!((frac(counts[3]) - 0.2).abs() < 0.012);
    }

    #[test]
    fn ground_preparation_has_no_pulse_faults() {
        let cycle = CycleConfig {
            prep_error_prob: 1.0,
            prepared_state: QubitState::Ground,
            ..CycleConfig::default()
        };
        let qubit = QubitParameters::reference_qubit();
        let mut rng = stream(1, Domain::Faults, 0);
        let (s, flags) = draw_schedule(&cycle, &qubit, &quiet_det(), 0.0, &mut rng);
        assert_eq!(flags & fault::PREPARATION, 0);
        assert_eq!(s.initial_state, Some(QubitState::Ground));
        assert_eq!(s.decay_time, None);
    }

    #[test]
    fn decay_times_are_exponential_from_pulse_end() {
        let cycle = CycleConfig {
            prep_error_prob: 0.0,
            ..CycleConfig::default()
        };
        let qubit = QubitParameters::reference_qubit();
        let n = 20_000;
        let mean: f64 = (0..n)
            .map(|k| {
                let mut rng = stream(5, Domain::Faults, k);
                draw_schedule(&cycle, &qubit, &quiet_det(), 0.0, &mut rng)
                    .0
                    .decay_time
                    .unwrap()
            })
            .sum::<f64>()
            / n as f64;
        let expected = qubit.t1 - cycle.delay;
        assert!(
            (mean - expected).abs() < 4.0 * qubit.t1 / (n as f64).sqrt(),
            "{mean} vs {expected}"
        );
    }

    #[test]
    fn rejects_bad_probabilities() {
        let c = CycleConfig {
            switch_prob: 1.5,
            ..CycleConfig::default()
        };
        assert!(c.validate().is_err());
        let c = CycleConfig {
            n_shots: 0,
            ..CycleConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
