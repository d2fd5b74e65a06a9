//! Fixed-step integration of the slow-amplitude equation
//!
//!   i dA/dt + εA* + δA + α|A|²A + iΓA = √(2Γ0) B(t)
//!
//! in the frame rotating at half the pump frequency. The deterministic part is
//! advanced with classical RK4; an additive complex Gaussian kick is applied after
//! every (sub)step. Qubit decay and phase-switch events split the step at the
//! event time.

use crate::device::{steady_state_photons, OperatingPoint, QubitState};
use crate::error::{Error, Result};
use crate::rng::{stream, Domain};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// What happens to the oscillator when the qubit relaxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RelaxationModel {
    /// The detuning jumps to the ground-state value and the field evolves freely
    /// from wherever it is. This is the physical model; latching emerges from it.
    #[default]
    Physical,
    /// Artificial: the decay also removes the parametric drive, so the field
    /// always rings down to the quiet state.
    ForceQuiet,
}

/// Coherent input B(t) = b e^{−iνt}, with |b|² in photons/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputDrive {
    pub amplitude: f64,
    /// Offset ν from half the pump frequency, rad/s.
    pub frequency_offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    /// Integrator step, s.
    pub dt: f64,
    /// Duration measured from pump-on, s.
    pub t_end: f64,
    /// Fluctuation strength: quiet-state ⟨|A|²⟩ the noise alone would sustain.
    pub seed_noise_photons: f64,
    pub rng_seed: u64,
    /// Linear pump ramp from 0 to ε, s.
    pub pump_ramp: f64,
    pub input_drive: Option<InputDrive>,
    /// Spacing of recorded samples, s. Rounded to a whole number of steps.
    pub sample_interval: f64,
    pub initial_amplitude: Complex64,
    pub relaxation: RelaxationModel,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            dt: 1e-9,
            t_end: 600e-9,
            seed_noise_photons: 0.5,
            rng_seed: 0,
            pump_ramp: 10e-9,
            input_drive: None,
            sample_interval: 4e-9,
            initial_amplitude: Complex64::new(0.0, 0.0),
            relaxation: RelaxationModel::Physical,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", "must be positive"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::invalid("t_end", "must be positive"));
        }
        if !(self.seed_noise_photons >= 0.0) {
            return Err(Error::invalid("seed_noise_photons", "must be non-negative"));
        }
        if !(self.pump_ramp >= 0.0) {
            return Err(Error::invalid("pump_ramp", "must be non-negative"));
        }
        if !(self.sample_interval >= self.dt) {
            return Err(Error::invalid(
                "sample_interval",
                "must be at least one step",
            ));
        }
        if !(self.initial_amplitude.re.is_finite() && self.initial_amplitude.im.is_finite()) {
            return Err(Error::invalid("initial_amplitude", "must be finite"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn steps_per_sample(&self) -> usize {
        ((self.sample_interval / self.dt).round() as usize).max(1)
    }
}

/// Random events imposed on one trajectory. Times are measured from pump-on.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct JumpSchedule {
    /// Qubit state at pump-on (before any decay inside the run).
    pub initial_state: Option<QubitState>,
    /// Time of the |1⟩ → |0⟩ jump; `None` means never. Non-positive values mean
    /// the qubit had already relaxed when the pump came on.
    pub decay_time: Option<f64>,
    pub preparation_fault: bool,
    pub thermal_excited: bool,
    /// Times at which the oscillator phase flips by π.
    pub phase_switch_times: Vec<f64>,
}

impl JumpSchedule {
    /// Qubit fixed in `state` for the whole run.
    pub fn fixed(state: QubitState) -> Self {
        Self {
            initial_state: Some(state),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.decay_time {
            if t.is_nan() {
                return Err(Error::invalid("decay_time", "must not be NaN"));
            }
        }
        if self.phase_switch_times.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("phase_switch_times", "must be finite"));
        }
        Ok(())
    }

    /// State at pump-on after accounting for a decay at or before t = 0.
    pub fn state_at_start(&self) -> QubitState {
        let state = self.initial_state.unwrap_or(QubitState::Excited);
        match (state, self.decay_time) {
            (QubitState::Excited, Some(t)) if t <= 0.0 => QubitState::Ground,
            (s, _) => s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    QubitDecay,
    PhaseSwitch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    /// Sample times, s (pump-on at 0).
    pub times: Vec<f64>,
    /// Field amplitude A in √photon units.
    pub amplitudes: Vec<Complex64>,
    pub qubit_state: Vec<u8>,
    pub events: Vec<Event>,
}

impl Trajectory {
    pub fn photons(&self) -> impl Iterator<Item = f64> + '_ {
        self.amplitudes.iter().map(|a| a.norm_sqr())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Mean |A|² over samples with t in [start, end].
    pub fn mean_photons(&self, start: f64, end: f64) -> f64 {
        let (sum, n) = self
            .times
            .iter()
            .zip(&self.amplitudes)
            .filter(|(t, _)| **t >= start && **t <= end)
            .fold((0.0, 0usize), |(s, n), (_, a)| (s + a.norm_sqr(), n + 1));
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }

    pub fn final_amplitude(&self) -> Complex64 {
        self.amplitudes.last().copied().unwrap_or_default()
    }
}

struct Equation<'a> {
    point: &'a OperatingPoint,
    ramp: f64,
    drive: Option<InputDrive>,
    drive_coupling: f64,
}

impl Equation<'_> {
    #[inline]
    fn pump(&self, t: f64) -> f64 {
        if self.ramp > 0.0 && t < self.ramp {
            self.point.epsilon * (t / self.ramp).max(0.0)
        } else {
            self.point.epsilon
        }
    }

    #[inline]
    fn rhs(&self, t: f64, a: Complex64, detuning: f64, pumped: bool) -> Complex64 {
        let p = self.point;
        let eps = if pumped { self.pump(t) } else { 0.0 };
        let d = detuning + p.beta * eps * eps / p.gamma + p.alpha * a.norm_sqr();
        // i(εA* + d A) − ΓA
        let re = eps * a.im - d * a.im - p.gamma * a.re;
        let im = eps * a.re + d * a.re - p.gamma * a.im;
        let mut out = Complex64::new(re, im);
        if let Some(drive) = self.drive {
            let b = Complex64::from_polar(drive.amplitude, -drive.frequency_offset * t);
            out -= Complex64::i() * self.drive_coupling * b;
        }
        out
    }

    #[inline]
    fn rk4(&self, t: f64, a: Complex64, h: f64, detuning: f64, pumped: bool) -> Complex64 {
        let k1 = self.rhs(t, a, detuning, pumped);
        let k2 = self.rhs(t + 0.5 * h, a + k1 * (0.5 * h), detuning, pumped);
        let k3 = self.rhs(t + 0.5 * h, a + k2 * (0.5 * h), detuning, pumped);
        let k4 = self.rhs(t + h, a + k3 * h, detuning, pumped);
        a + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
    }
}

/// Fastest rate the integrator must resolve, using the steady-state photon
/// number as the Kerr scale.
pub fn fastest_rate(point: &OperatingPoint, initial_photons: f64) -> f64 {
    let mut rate = point.gamma.max(point.epsilon);
    let mut photons = initial_photons;
    for state in [QubitState::Ground, QubitState::Excited] {
        let detuning = point.effective_detuning(state, point.epsilon);
        rate = rate.max(detuning.abs());
        if point.alpha > 0.0 {
            if let Ok(s) = steady_state_photons(detuning, point.epsilon, point.alpha, point.gamma) {
                photons = photons.max(s.roots.first().map_or(0.0, |r| r.photons));
            }
        }
    }
    rate.max(point.alpha * photons)
}

/// Reject step sizes that do not resolve the fastest rate of the problem.
pub fn check_stiffness(config: &SimulationConfig, point: &OperatingPoint) -> Result<()> {
    let rate = fastest_rate(point, config.initial_amplitude.norm_sqr());
    let product = config.dt * rate;
    if product >= 0.1 {
        return Err(Error::Stiffness {
            dt: config.dt,
            rate,
            product,
        });
    }
    Ok(())
}

/// Integrate one trajectory.
///
/// The qubit sits in the schedule's initial state (excited by default) and
/// relaxes to the ground state at `decay_time`, switching the detuning from
/// δ|1⟩ to δ|0⟩. Deterministic given `config.rng_seed`.
pub fn integrate(
    config: &SimulationConfig,
    point: &OperatingPoint,
    schedule: &JumpSchedule,
) -> Result<Trajectory> {
    config.validate()?;
    point.validate()?;
    schedule.validate()?;
    check_stiffness(config, point)?;

    let eq = Equation {
        point,
        ramp: config.pump_ramp,
        drive: config.input_drive,
        drive_coupling: (2.0 * point.gamma0).sqrt(),
    };
    let noise = (point.gamma * config.seed_noise_photons).sqrt();
    let mut rng = stream(config.rng_seed, Domain::Dynamics, 0);

    let n_steps = config.steps();
    let every = config.steps_per_sample();
    let capacity = n_steps / every + 1;
    let mut traj = Trajectory {
        times: Vec::with_capacity(capacity),
        amplitudes: Vec::with_capacity(capacity),
        qubit_state: Vec::with_capacity(capacity),
        events: Vec::new(),
    };

    let t_end = n_steps as f64 * config.dt;
    let mut events: Vec<Event> = schedule
        .phase_switch_times
        .iter()
        .filter(|&&t| t < t_end)
        .map(|&t| Event {
            time: t.max(0.0),
            kind: EventKind::PhaseSwitch,
        })
        .collect();
    let mut state = schedule.state_at_start();
    if state == QubitState::Excited {
        if let Some(t) = schedule.decay_time.filter(|&t| t > 0.0 && t < t_end) {
            events.push(Event {
                time: t,
                kind: EventKind::QubitDecay,
            });
        }
    }
    events.sort_by(|a, b| a.time.total_cmp(&b.time));
    let mut pending = events.iter().peekable();

    let mut a = config.initial_amplitude;
    let mut pumped = true;
    let mut detuning = point.detuning(state);

    let mut apply = |ev: &Event,
                     a: &mut Complex64,
                     state: &mut QubitState,
                     detuning: &mut f64,
                     pumped: &mut bool| {
        match ev.kind {
            EventKind::PhaseSwitch => *a = -*a,
            EventKind::QubitDecay => {
                *state = QubitState::Ground;
                *detuning = point.detuning(QubitState::Ground);
                if config.relaxation == RelaxationModel::ForceQuiet {
                    *pumped = false;
                }
            }
        }
        traj.events.push(*ev);
    };

    // Events at t = 0 act before the first step.
    while let Some(ev) = pending.next_if(|ev| ev.time <= 0.0) {
        apply(ev, &mut a, &mut state, &mut detuning, &mut pumped);
    }

    let mut times = Vec::with_capacity(capacity);
    let mut amps = Vec::with_capacity(capacity);
    let mut states = Vec::with_capacity(capacity);
    times.push(0.0);
    amps.push(a);
    states.push(state.index());

    let substep = |t0: f64,
                   h: f64,
                   a: Complex64,
                   detuning: f64,
                   pumped: bool,
                   rng: &mut rand_chacha::ChaCha8Rng| {
        let mut next = eq.rk4(t0, a, h, detuning, pumped);
        if noise > 0.0 {
            let scale = noise * h.sqrt();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            next += Complex64::new(re, im) * scale;
        }
        next
    };

    for k in 0..n_steps {
        let t0 = k as f64 * config.dt;
        let t1 = (k + 1) as f64 * config.dt;
        let mut t = t0;
        while let Some(ev) = pending.next_if(|ev| ev.time <= t1) {
            if ev.time > t {
                a = substep(t, ev.time - t, a, detuning, pumped, &mut rng);
                t = ev.time;
            }
            apply(ev, &mut a, &mut state, &mut detuning, &mut pumped);
        }
        if t1 > t {
            a = substep(t, t1 - t, a, detuning, pumped, &mut rng);
        }
        if !(a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::NonFinite { time: t1 });
        }
        if (k + 1) % every == 0 {
            times.push(t1);
            amps.push(a);
            states.push(state.index());
        }
    }

    traj.times = times;
    traj.amplitudes = amps;
    traj.qubit_state = states;
    Ok(traj)
}
