//! Power calibration of the measurement chain.
//!
//! A weak probe pulls the resonance down through the Kerr term,
//!
//!   ω_r(P) = ω_r(0) − (2αΓ0/Γ²) · 10^((P − Att − 30)/10) / (ħ ω_r(0)),
//!
//! with P the generator power in dBm. Fitting this line fixes the input
//! attenuation Att; the off-resonant reflection |S11|² then gives the chain gain
//! G = |S11|² + Att, and G converts detected power into intracavity photons.

use crate::device::{dressed_resonator_frequency, duffing_alpha, DeviceParameters};
use crate::error::{Error, Result};
use crate::rng::{stream, Domain};
use crate::units::{angular, hertz, HBAR};
use rand::Rng;
use rand_distr::StandardNormal;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::detection::watts_per_photon;

/// Frequency pull per unit of linear generator power, k in ω = ω0 − k·10^(P/10).
fn pull_per_milliwatt(
    params: &DeviceParameters,
    flux: f64,
    att_db: f64,
    omega0: f64,
) -> Result<f64> {
    let alpha = duffing_alpha(params, flux)?;
    let gamma = params.total_damping();
    Ok(2.0 * alpha * params.external_damping / (gamma * gamma)
        * 10f64.powf(-(att_db + 30.0) / 10.0)
        / (HBAR * omega0))
}

/// Predicted resonant frequency (rad/s) at each probe power (dBm at the generator).
/// The zero-power frequency is the dressed resonance with the qubit in |0⟩.
pub fn duffing_frequency_vs_power(
    params: &DeviceParameters,
    flux: f64,
    att_db: f64,
    probe_powers_dbm: &[f64],
) -> Result<Vec<f64>> {
    let omega0 = dressed_resonator_frequency(params, flux)?;
    let k = pull_per_milliwatt(params, flux, att_db, omega0)?;
    Ok(probe_powers_dbm
        .iter()
        .map(|p| omega0 - k * 10f64.powf(p / 10.0))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttenuationFit {
    pub flux: f64,
    pub attenuation_db: f64,
    /// Fitted zero-power resonance, rad/s.
    pub zero_power_frequency: f64,
    /// RMS frequency residual, rad/s.
    pub residual_rms: f64,
    pub points: usize,
}

/// Least-squares fit of the Kerr pull to (power dBm, frequency rad/s) pairs.
///
/// The model is linear in ω0 and in the slope, so both come from ordinary
/// least squares; Att follows from the slope. Two points determine the line
/// exactly and leave no residual.
pub fn fit_attenuation(
    points: &[(f64, f64)],
    params: &DeviceParameters,
    flux: f64,
) -> Result<AttenuationFit> {
    if points.len() < 2 {
        return Err(Error::Degenerate(format!(
            "need at least two points, got {}",
            points.len()
        )));
    }
    if points.iter().all(|(p, _)| *p == points[0].0) {
        return Err(Error::Degenerate("all probe powers are equal".into()));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(p, _)| 10f64.powf(p / 10.0)).collect();
    // Center both variables: frequencies are ~1e10 while the pull is ~1e5.
    let y_ref = points[0].1;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = points.iter().map(|(_, y)| y - y_ref).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, (_, y)) in xs.iter().zip(points) {
        let dx = x - x_mean;
        sxx += dx * dx;
        sxy += dx * (y - y_ref - y_mean);
    }
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("all probe powers are equal".into()));
    }
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(Error::Fit(format!(
            "resonance does not move down with power (slope {slope:e} rad/s per mW)"
        )));
    }
    let k = -slope;
    let intercept = y_ref + y_mean + k * x_mean;
    let residual_rms = (xs
        .iter()
        .zip(points)
        .map(|(x, (_, y))| (y - (intercept - k * x)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();

    let unit = pull_per_milliwatt(params, flux, 0.0, intercept)?;
    Ok(AttenuationFit {
        flux,
        attenuation_db: 10.0 * (unit / k).log10(),
        zero_power_frequency: intercept,
        residual_rms,
        points: points.len(),
    })
}

/// G = |S11|² + Att, all in dB.
pub fn gain_from_attenuation(s11_sq_db: f64, att_db: f64) -> f64 {
    s11_sq_db + att_db
}

/// Intracavity photons from signal and noise power at the digitizer (W).
pub fn photons_from_power(
    p_signal: f64,
    p_noise: f64,
    gamma0: f64,
    omega_r: f64,
    gain_db: f64,
) -> Result<f64> {
    let net = p_signal - p_noise;
    if net < 0.0 {
        return Err(Error::Domain {
            what: "photons_from_power (net power)",
            value: net,
        });
    }
    Ok(net / watts_per_photon(gamma0, omega_r, gain_db))
}

/// Inverse of [`photons_from_power`] with zero noise power.
pub fn power_from_photons(photons: f64, gamma0: f64, omega_r: f64, gain_db: f64) -> f64 {
    photons * watts_per_photon(gamma0, omega_r, gain_db)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationPoint {
    /// Normalized flux bias F, rad.
    pub flux: f64,
    pub power_dbm: f64,
    pub frequency_hz: f64,
}

/// Flux bias with its (power dBm, frequency Hz) points.
pub type FluxSeries = (f64, Vec<(f64, f64)>);

/// Probe-power series at one or more flux biases.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CalibrationDataset {
    pub points: Vec<CalibrationPoint>,
}

pub const DATASET_HEADER: &str = "flux_bias_F probe_power_dbm resonant_frequency_hz";

impl CalibrationDataset {
    /// Parse whitespace- or comma-separated columns. Lines starting with `#` and
    /// a header line starting with `flux` are skipped.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut points = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with("flux") {
                continue;
            }
            let fields: Vec<&str> = trimmed
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected 3 columns, found {}", fields.len()),
                });
            }
            let mut values = [0.0f64; 3];
            for (v, f) in values.iter_mut().zip(&fields) {
                *v = f.parse().map_err(|_| Error::Parse {
                    line: i + 1,
                    message: format!("`{f}` is not a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line: i + 1,
                        message: format!("`{f}` is not finite"),
                    });
                }
            }
            points.push(CalibrationPoint {
                flux: values[0],
                power_dbm: values[1],
                frequency_hz: values[2],
            });
        }
        if points.is_empty() {
            return Err(Error::Degenerate("calibration dataset has no rows".into()));
        }
        Ok(Self { points })
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{DATASET_HEADER}")?;
        for p in &self.points {
            writeln!(
                out,
                "{:.17e} {:.17e} {:.17e}",
                p.flux, p.power_dbm, p.frequency_hz
            )?;
        }
        Ok(())
    }

    /// Points grouped by flux bias (ascending), each series sorted by power.
    /// Row order in the input does not matter.
    pub fn series(&self) -> Result<Vec<FluxSeries>> {
        let mut sorted = self.points.clone();
        sorted.sort_by(|a, b| {
            a.flux
                .total_cmp(&b.flux)
                .then(a.power_dbm.total_cmp(&b.power_dbm))
        });
        let mut out: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
        for p in sorted {
            let pair = (p.power_dbm, angular(p.frequency_hz));
            match out.last_mut() {
                Some((flux, series)) if *flux == p.flux => {
                    if series.last().is_some_and(|&(prev, _)| prev == p.power_dbm) {
                        return Err(Error::Degenerate(format!(
                            "duplicate probe power {} dBm at flux {}",
                            p.power_dbm, p.flux
                        )));
                    }
                    series.push(pair);
                }
                _ => out.push((p.flux, vec![pair])),
            }
        }
        Ok(out)
    }
}

/// Generate a dataset from the Kerr-pull model. `noise_fraction` adds Gaussian
/// scatter with SD equal to that fraction of each point's frequency pull.
pub fn synthetic_dataset(
    params: &DeviceParameters,
    fluxes: &[f64],
    att_db: f64,
    probe_powers_dbm: &[f64],
    noise_fraction: f64,
    seed: u64,
) -> Result<CalibrationDataset> {
    let mut rng = stream(seed, Domain::Synthetic, 0);
    let mut points = Vec::with_capacity(fluxes.len() * probe_powers_dbm.len());
    for &flux in fluxes {
        let omega0 = dressed_resonator_frequency(params, flux)?;
        let freqs = duffing_frequency_vs_power(params, flux, att_db, probe_powers_dbm)?;
        for (&p, &w) in probe_powers_dbm.iter().zip(&freqs) {
            let z: f64 = rng.sample(StandardNormal);
            let w = w - noise_fraction * (omega0 - w) * z;
            points.push(CalibrationPoint {
                flux,
                power_dbm: p,
                frequency_hz: hertz(w),
            });
        }
    }
    Ok(CalibrationDataset { points })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub fits: Vec<AttenuationFit>,
    pub mean_attenuation_db: f64,
    pub s11_sq_db: f64,
    pub gain_db: f64,
    /// Power at the digitizer per intracavity photon, W.
    pub watts_per_photon: f64,
    pub warnings: Vec<String>,
}

/// Fit every flux series, average Att and derive the gain and photon scale.
pub fn calibrate(
    dataset: &CalibrationDataset,
    params: &DeviceParameters,
    s11_sq_db: f64,
    resonator_frequency: f64,
) -> Result<CalibrationReport> {
    let mut fits = Vec::new();
    let mut warnings = Vec::new();
    for (flux, series) in dataset.series()? {
        if series.len() < 3 {
            warnings.push(format!(
                "flux {flux}: only {} points, fit has no residual degrees of freedom",
                series.len()
            ));
        }
        fits.push(fit_attenuation(&series, params, flux)?);
    }
    let mean = fits.iter().map(|f| f.attenuation_db).sum::<f64>() / fits.len() as f64;
    let gain = gain_from_attenuation(s11_sq_db, mean);
    Ok(CalibrationReport {
        mean_attenuation_db: mean,
        s11_sq_db,
        gain_db: gain,
        watts_per_photon: watts_per_photon(params.external_damping, resonator_frequency, gain),
        fits,
        warnings,
    })
}

impl CalibrationReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for f in &self.fits {
            let _ = writeln!(
                s,
                "[[bias]]\nflux_bias_F = {}\nattenuation_db = {:.6}\nzero_power_frequency_hz = {:.6}\nresidual_rms_hz = {:.6e}\npoints = {}\n",
                f.flux,
                f.attenuation_db,
                hertz(f.zero_power_frequency),
                hertz(f.residual_rms),
                f.points
            );
        }
        let _ = writeln!(s, "mean_attenuation_db = {:.6}", self.mean_attenuation_db);
        let _ = writeln!(s, "s11_sq_db = {:.6}", self.s11_sq_db);
        let _ = writeln!(s, "gain_db = {:.6}", self.gain_db);
        let _ = writeln!(s, "watts_per_photon = {:.6e}", self.watts_per_photon);
        for w in &self.warnings {
            let _ = writeln!(s, "# warning: {w}");
        }
        s
    }
}
