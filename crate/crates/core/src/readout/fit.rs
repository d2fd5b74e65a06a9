//! Dominant-peak Gaussian fit on binned data.
//!
//! Robust median/MAD start, Levenberg–Marquardt on the histogram counts, and
//! iterative trimming to ±3σ around the peak(s) so that a contaminating peak
//! elsewhere does not pull the fit.

use crate::error::{Error, Result};

/// Peak shape fitted to one prepared state's projected voltages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeakModel {
    /// a·exp(−(v−μ)²/2σ²)
    Single,
    /// a·[exp(−(v−μ)²/2σ²) + exp(−(v+μ)²/2σ²)]: the two phase states of the
    /// oscillator project onto ±μ.
    SymmetricPair,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianFit {
    pub model: PeakModel,
    /// Peak height in counts per bin.
    pub amplitude: f64,
    /// Peak center; for [`PeakModel::SymmetricPair`] the non-negative offset.
    pub mean: f64,
    pub sigma: f64,
    /// Width of the bins used in the final pass.
    pub bin_width: f64,
    /// Shots inside the final ±3σ window.
    pub fitted_shots: usize,
    pub trim_passes: usize,
}

const MAD_TO_SIGMA: f64 = 1.482_602_218_505_602;
const TRIM: f64 = 3.0;
const SPAN: f64 = 8.0;
const BINS_PER_SIGMA: f64 = 4.0;
const MAX_BINS: usize = 4001;
const MAX_PASSES: usize = 100;

pub(crate) fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Median and MAD-based σ estimate.
pub(crate) fn robust_location_scale(values: &[f64]) -> (f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = median(&v);
    let mut dev: Vec<f64> = v.iter().map(|x| (x - m).abs()).collect();
    dev.sort_by(f64::total_cmp);
    (m, MAD_TO_SIGMA * median(&dev))
}

/// Pick the pair model when the folded data sits clearly away from zero.
pub fn choose_model(values: &[f64]) -> PeakModel {
    let folded: Vec<f64> = values.iter().map(|x| x.abs()).collect();
    let (m, s) = robust_location_scale(&folded);
    if m > 2.0 * s {
        PeakModel::SymmetricPair
    } else {
        PeakModel::Single
    }
}

/// Signs of the peak centers relative to μ.
fn signs(model: PeakModel) -> &'static [f64] {
    match model {
        PeakModel::Single => &[1.0],
        PeakModel::SymmetricPair => &[1.0, -1.0],
    }
}

fn evaluate(model: PeakModel, p: &[f64; 3], v: f64) -> (f64, [f64; 3]) {
    let [a, mu, sigma] = *p;
    let mut f = 0.0;
    let mut grad = [0.0; 3];
    for &s in signs(model) {
        let d = v - s * mu;
        let e = (-0.5 * d * d / (sigma * sigma)).exp();
        f += a * e;
        grad[0] += e;
        grad[1] += a * e * s * d / (sigma * sigma);
        grad[2] += a * e * d * d / (sigma * sigma * sigma);
    }
    (f, grad)
}

#[allow(clippy::needless_range_loop)]
fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let mut a = [[0.0; 4]; 3];
    for i in 0..3 {
        a[i][..3].copy_from_slice(&m[i]);
        a[i][3] = b[i];
    }
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        for row in 0..3 {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in col..4 {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    Some([a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]])
}

/// Levenberg–Marquardt least squares of `model` to (center, count) pairs.
fn levenberg_marquardt(model: PeakModel, data: &[(f64, f64)], start: [f64; 3]) -> Result<[f64; 3]> {
    let cost = |p: &[f64; 3]| {
        data.iter()
            .map(|&(v, c)| (c - evaluate(model, p, v).0).powi(2))
            .sum::<f64>()
    };
    let mut p = start;
    let mut current = cost(&p);
    let mut lambda = 1e-3;
    for _ in 0..500 {
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for &(v, c) in data {
            let (f, g) = evaluate(model, &p, v);
            let r = c - f;
            for i in 0..3 {
                jtr[i] += g[i] * r;
                for j in 0..3 {
                    jtj[i][j] += g[i] * g[j];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut damped = jtj;
            for (i, row) in damped.iter_mut().enumerate() {
                row[i] += lambda * jtj[i][i].max(1e-300);
            }
            let Some(step) = solve3(damped, jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2]];
            let c = cost(&trial);
            if trial[2] != 0.0 && c.is_finite() && c <= current {
                let done = current - c <= 1e-12 * current.max(f64::MIN_POSITIVE)
                    && step
                        .iter()
                        .zip(&trial)
                        .all(|(s, t)| s.abs() <= 1e-10 * t.abs().max(1e-300));
                p = trial;
                current = c;
                lambda = (lambda / 3.0).max(1e-12);
                improved = true;
                if done {
                    return finish(model, p);
                }
                break;
            }
            lambda *= 2.0;
        }
        if !improved {
            // No downhill step at any damping: at a minimum to machine precision.
            return finish(model, p);
        }
    }
    finish(model, p)
}

fn finish(model: PeakModel, mut p: [f64; 3]) -> Result<[f64; 3]> {
    p[2] = p[2].abs();
    if model == PeakModel::SymmetricPair {
        p[1] = p[1].abs();
    }
    if p.iter().all(|x| x.is_finite()) && p[2] > 0.0 && p[0] > 0.0 {
        Ok(p)
    } else {
        Err(Error::Fit(format!(
            "Gaussian fit diverged (a = {}, μ = {}, σ = {})",
            p[0], p[1], p[2]
        )))
    }
}

/// Fit the dominant peak of `values`.
pub fn fit_peak(values: &[f64], model: PeakModel) -> Result<GaussianFit> {
    if values.len() < 2 {
        return Err(Error::Degenerate("fewer than two values to fit".into()));
    }
    let (mut mu, mut sigma) = match model {
        PeakModel::Single => robust_location_scale(values),
        PeakModel::SymmetricPair => {
            let folded: Vec<f64> = values.iter().map(|x| x.abs()).collect();
            robust_location_scale(&folded)
        }
    };
    if !(sigma > 0.0) {
        return Err(Error::Degenerate(
            "all values fall into a single bin".into(),
        ));
    }

    // The bin grid is fixed by the robust start; only the ±3σ window moves.
    let width = sigma / BINS_PER_SIGMA;
    let (lo, hi) = match model {
        PeakModel::Single => (mu - SPAN * sigma, mu + SPAN * sigma),
        PeakModel::SymmetricPair => (-(mu + SPAN * sigma), mu + SPAN * sigma),
    };
    let bins = (((hi - lo) / width).ceil() as usize).clamp(1, MAX_BINS);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0.0; bins];
    for &x in values {
        if x >= lo && x < hi {
            counts[(((x - lo) / width) as usize).min(bins - 1)] += 1.0;
        }
    }
    let center = |k: usize| lo + (k as f64 + 0.5) * width;

    let mut seen: Vec<Vec<usize>> = Vec::new();
    let mut amplitude = 0.0;
    let mut fitted_shots = 0;
    for pass in 0..=MAX_PASSES {
        let window: Vec<usize> = (0..bins)
            .filter(|&k| {
                signs(model)
                    .iter()
                    .any(|&s| (center(k) - s * mu).abs() <= TRIM * sigma)
            })
            .collect();
        if seen.contains(&window) {
            // Fixed point (or a short cycle between neighbouring windows).
            return Ok(GaussianFit {
                model,
                amplitude,
                mean: mu,
                sigma,
                bin_width: width,
                fitted_shots,
                trim_passes: pass,
            });
        }
        let data: Vec<(f64, f64)> = window.iter().map(|&k| (center(k), counts[k])).collect();
        fitted_shots = data.iter().map(|d| d.1).sum::<f64>() as usize;
        if data.len() < 4 || fitted_shots < 3 {
            return Err(Error::Degenerate(
                "too few populated bins around the peak".into(),
            ));
        }
        let peak = data.iter().map(|d| d.1).fold(0.0, f64::max);
        [amplitude, mu, sigma] = levenberg_marquardt(model, &data, [peak, mu, sigma])?;
        seen.push(window);
    }
    Err(Error::Fit(format!(
        "trimming did not settle after {MAX_PASSES} passes"
    )))
}
