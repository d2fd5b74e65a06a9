//! Heterodyne detection at complex baseband.
//!
//! The reflected field is C = B − i√(2Γ0)A. All noise of the amplifier chain is
//! lumped into one additive complex Gaussian term referred to the resonator
//! output, expressed in photons. Detected voltages are scaled so that |V|² is
//! the power at the digitizer in watts.

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::units::{db_to_linear, HBAR, TWO_PI};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Output field of the resonator, in √(photons/s).
pub fn output_field(a: Complex64, b: Complex64, gamma0: f64) -> Complex64 {
    b - Complex64::i() * (2.0 * gamma0).sqrt() * a
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionConfig {
    /// Chain noise referred to the resonator output, photons.
    pub added_noise_photons: f64,
    /// Intermediate frequency, Hz. Kept for bookkeeping; mixing is not simulated.
    pub if_frequency: f64,
    /// Raw sampling rate, S/s.
    pub adc_rate: f64,
    /// Rate after decimation, S/s.
    pub decimated_rate: f64,
    /// Net gain of the chain, dB.
    pub gain_db: f64,
    /// Delay τ_r between pump-on and the start of the sampling window, s.
    pub ring_up_delay: f64,
    /// Width τ_s of the sampling window, s.
    pub sampling_time: f64,
    /// Resonator frequency used for the power scale, rad/s.
    pub resonator_frequency: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            added_noise_photons: 16.1,
            if_frequency: 187.5e6,
            adc_rate: 250e6,
            decimated_rate: 20e6,
            gain_db: 81.0,
            ring_up_delay: 300e-9,
            sampling_time: 300e-9,
            resonator_frequency: TWO_PI * 5.218e9,
        }
    }
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.added_noise_photons >= 0.0 && self.added_noise_photons.is_finite()) {
            return Err(Error::invalid(
                "added_noise_photons",
                "must be finite and non-negative",
            ));
        }
        if !(self.if_frequency >= 0.0) {
            return Err(Error::invalid("if_frequency", "must be non-negative"));
        }
        if !(self.adc_rate > 0.0 && self.adc_rate.is_finite()) {
            return Err(Error::invalid("adc_rate", "must be positive"));
        }
        if !(self.decimated_rate > 0.0 && self.decimated_rate < self.adc_rate) {
            return Err(Error::invalid(
                "decimated_rate",
                format!(
                    "must lie in (0, adc_rate = {}), got {}",
                    self.adc_rate, self.decimated_rate
                ),
            ));
        }
        if !self.gain_db.is_finite() {
            return Err(Error::invalid("gain_db", "must be finite"));
        }
        if !(self.ring_up_delay >= 0.0) {
            return Err(Error::invalid("ring_up_delay", "must be non-negative"));
        }
        if !(self.sampling_time > 0.0) {
            return Err(Error::invalid("sampling_time", "must be positive"));
        }
        if self.window_samples() == 0 {
            return Err(Error::invalid(
                "sampling_time",
                "shorter than one ADC sample",
            ));
        }
        if !(self.resonator_frequency > 0.0) {
            return Err(Error::invalid("resonator_frequency", "must be positive"));
        }
        Ok(())
    }

    /// Number of raw ADC samples inside the sampling window.
    pub fn window_samples(&self) -> usize {
        (self.sampling_time * self.adc_rate).round() as usize
    }

    pub fn window_end(&self) -> f64 {
        self.ring_up_delay + self.sampling_time
    }

    /// Volts per √photon of intracavity amplitude: |V|² = 2(Γ0/2π)ħω_r·G·|A|².
    pub fn voltage_scale(&self, gamma0: f64) -> f64 {
        watts_per_photon(gamma0, self.resonator_frequency, self.gain_db).sqrt()
    }

    /// Per-quadrature SD of the window mean, in √photon units. Chosen so that a
    /// steady field gives SNR² = |A|²/n_add.
    pub fn window_noise_sd(&self) -> f64 {
        (self.added_noise_photons / 4.0).sqrt()
    }

    /// Per-quadrature SD of a single raw ADC sample, in √photon units.
    pub fn sample_noise_sd(&self) -> f64 {
        self.window_noise_sd() * (self.window_samples() as f64).sqrt()
    }
}

/// Power at the digitizer per intracavity photon, W.
pub fn watts_per_photon(gamma0: f64, resonator_frequency: f64, gain_db: f64) -> f64 {
    2.0 * (gamma0 / TWO_PI) * HBAR * resonator_frequency * db_to_linear(gain_db)
}

/// One detected shot. Voltages carry the chain's fixed scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    /// Mean (V_I + iV_Q) over the sampling window.
    pub mean: Complex64,
    /// Mean of |V| over the decimated samples (rectified detection).
    pub rectified: f64,
    /// Decimated samples inside the window.
    pub decimated: Vec<Complex64>,
    /// Number of raw samples behind each decimated sample.
    pub weights: Vec<usize>,
}

fn interpolate(traj: &Trajectory, t: f64, hint: &mut usize) -> Complex64 {
    let times = &traj.times;
    while *hint + 1 < times.len() && times[*hint + 1] <= t {
        *hint += 1;
    }
    let i = *hint;
    if i + 1 >= times.len() || times[i] >= t {
        return traj.amplitudes[i];
    }
    let w = (t - times[i]) / (times[i + 1] - times[i]);
    traj.amplitudes[i] * (1.0 - w) + traj.amplitudes[i + 1] * w
}

/// Sample `traj` over the window [τ_r, τ_r + τ_s] after pump-on at `adc_rate`,
/// add chain noise, decimate by time-binning and average.
///
/// The window mean weights every raw sample equally, so its noise SD per
/// quadrature is exactly [`DetectionConfig::window_noise_sd`] (times the
/// voltage scale) regardless of how the decimation bins split.
pub fn detect<R: Rng + ?Sized>(
    traj: &Trajectory,
    det: &DetectionConfig,
    gamma0: f64,
    rng: &mut R,
) -> Result<Detection> {
    det.validate()?;
    let n = det.window_samples();
    let sample_dt = 1.0 / det.adc_rate;
    let last_needed = det.ring_up_delay + (n - 1) as f64 * sample_dt;
    let available = traj.times.last().copied().unwrap_or(f64::NEG_INFINITY);
    if traj.is_empty() || available < last_needed * (1.0 - 1e-12) {
        return Err(Error::WindowExceedsTrajectory {
            start: det.ring_up_delay,
            end: det.window_end(),
            available,
        });
    }

    let scale = det.voltage_scale(gamma0);
    let noise = det.sample_noise_sd();
    let ratio = det.adc_rate / det.decimated_rate;
    let bins = ((n as f64) / ratio).ceil() as usize;
    let mut sums = vec![Complex64::new(0.0, 0.0); bins];
    let mut weights = vec![0usize; bins];

    let mut hint = traj
        .times
        .partition_point(|&t| t <= det.ring_up_delay)
        .saturating_sub(1);
    for k in 0..n {
        let t = det.ring_up_delay + k as f64 * sample_dt;
        let mut v = interpolate(traj, t, &mut hint);
        if noise > 0.0 {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            v += Complex64::new(re, im) * noise;
        }
        let bin = ((k as f64 / ratio) as usize).min(bins - 1);
        sums[bin] += v;
        weights[bin] += 1;
    }

    let mut total = Complex64::new(0.0, 0.0);
    let mut rectified = 0.0;
    let mut decimated = Vec::with_capacity(bins);
    for (sum, &w) in sums.iter().zip(&weights) {
        total += sum;
        let mean = sum / w as f64;
        rectified += mean.norm() * w as f64;
        decimated.push(mean * scale);
    }
    Ok(Detection {
        mean: total / n as f64 * scale,
        rectified: rectified / n as f64 * scale,
        decimated,
        weights,
    })
}
