//! Histogram analysis of readout records: projection onto the signal axis,
//! per-state Gaussian fits, SNR, S-curves and state discrimination.

use super::cycle::ReadoutCycleRecord;
use super::fit::{choose_model, fit_peak, GaussianFit, PeakModel};
use crate::device::QubitState;
use crate::error::{Error, Result};

/// Minimum shots per prepared state accepted by [`analyze`].
pub const MIN_SHOTS: usize = 100;
pub const HISTOGRAM_BINS: usize = 101;
pub const S_CURVE_POINTS: usize = 201;

/// Which per-shot quantity is thresholded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionMode {
    /// Window mean of the field, projected onto the oscillation axis.
    Amplitude,
    /// Window mean of |V| over decimated samples.
    Rectified,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram1d {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram1d {
    /// Values outside [lo, hi) land in the end bins, so counts always sum to
    /// the number of values.
    pub fn build(values: impl IntoIterator<Item = f64>, lo: f64, hi: f64, bins: usize) -> Self {
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0; bins];
        for v in values {
            counts[bin_index(v, lo, width, bins)] += 1;
        }
        Self {
            edges: (0..=bins).map(|k| lo + k as f64 * width).collect(),
            counts,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

fn bin_index(v: f64, lo: f64, width: f64, bins: usize) -> usize {
    let k = ((v - lo) / width).floor();
    if k.is_nan() || k < 0.0 {
        0
    } else {
        (k as usize).min(bins - 1)
    }
}

/// Square 2D histogram, counts stored row-major with V_Q as the row index.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram2d {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram2d {
    pub fn build(
        points: impl IntoIterator<Item = (f64, f64)>,
        lo: f64,
        hi: f64,
        bins: usize,
    ) -> Self {
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0; bins * bins];
        for (i, q) in points {
            counts[bin_index(q, lo, width, bins) * bins + bin_index(i, lo, width, bins)] += 1;
        }
        Self {
            edges: (0..=bins).map(|k| lo + k as f64 * width).collect(),
            counts,
        }
    }

    pub fn bins(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Fraction of shots with |x| ≤ V_th, per prepared state.
#[derive(Debug, Clone, PartialEq)]
pub struct SCurves {
    pub thresholds: Vec<f64>,
    pub ground: Vec<f64>,
    pub excited: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramAnalysis {
    pub mode: DetectionMode,
    /// Angle of the oscillation axis in the IQ plane, rad.
    pub rotation: f64,
    /// Shots per prepared state, indexed by [`QubitState::index`].
    pub shots: [usize; 2],
    /// Rotated (V_I, V_Q) per prepared state.
    pub hist2d: [Histogram2d; 2],
    /// Projected value per prepared state.
    pub hist1d: [Histogram1d; 2],
    pub fits: [GaussianFit; 2],
    /// |μ1 − μ0| / (σ1 + σ0).
    pub snr: f64,
    pub s_curves: SCurves,
    pub discrimination: f64,
    /// Optimal threshold on |x|; shots with |x| above it read as |1⟩.
    pub threshold: f64,
    /// Set when the |1⟩ preparation sits closer to the origin than |0⟩, which
    /// flips the decision rule.
    pub inverted: bool,
}

/// Principal axis of the IQ cloud (second moments about the origin).
pub fn oscillation_axis(records: &[ReadoutCycleRecord]) -> f64 {
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for r in records {
        sxx += r.v_i * r.v_i;
        syy += r.v_q * r.v_q;
        sxy += r.v_i * r.v_q;
    }
    0.5 * (2.0 * sxy).atan2(sxx - syy)
}

fn rotate(r: &ReadoutCycleRecord, angle: f64) -> (f64, f64) {
    let (s, c) = angle.sin_cos();
    (r.v_i * c + r.v_q * s, -r.v_i * s + r.v_q * c)
}

/// Signed per-shot value the analysis works on.
pub fn project(r: &ReadoutCycleRecord, mode: DetectionMode, rotation: f64) -> f64 {
    match mode {
        DetectionMode::Amplitude => rotate(r, rotation).0,
        DetectionMode::Rectified => r.v_abs,
    }
}

fn split(records: &[ReadoutCycleRecord]) -> [Vec<&ReadoutCycleRecord>; 2] {
    let mut out = [Vec::new(), Vec::new()];
    for r in records {
        out[r.prepared_state.index() as usize].push(r);
    }
    out
}

/// Best threshold on |x| given sorted magnitudes per preparation. Returns
/// (discrimination, threshold, inverted). Exact over all sample values.
pub fn best_threshold(ground: &[f64], excited: &[f64]) -> (f64, f64, bool) {
    let (n0, n1) = (ground.len() as f64, excited.len() as f64);
    let (mut i0, mut i1) = (0, 0);
    let mut best = (0.0, 0.0, false);
    while i0 < ground.len() || i1 < excited.len() {
        let t = match (ground.get(i0), excited.get(i1)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        while i0 < ground.len() && ground[i0] <= t {
            i0 += 1;
        }
        while i1 < excited.len() && excited[i1] <= t {
            i1 += 1;
        }
        let diff = i0 as f64 / n0 - i1 as f64 / n1;
        if diff.abs() > best.0 {
            best = (diff.abs(), t, diff < 0.0);
        }
    }
    best
}

fn magnitudes(group: &[&ReadoutCycleRecord], mode: DetectionMode, rotation: f64) -> Vec<f64> {
    let mut v: Vec<f64> = group
        .iter()
        .map(|r| project(r, mode, rotation).abs())
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

fn check_counts(groups: &[Vec<&ReadoutCycleRecord>; 2], min: usize) -> Result<()> {
    for (k, g) in groups.iter().enumerate() {
        if g.len() < min {
            return Err(Error::Degenerate(format!(
                "prepared state |{k}⟩ has {} shots, need at least {min}",
                g.len()
            )));
        }
    }
    Ok(())
}

/// Discrimination and threshold only, without fits or histograms.
pub fn discrimination(records: &[ReadoutCycleRecord], mode: DetectionMode) -> Result<(f64, f64)> {
    let groups = split(records);
    check_counts(&groups, 1)?;
    let rotation = oscillation_axis(records);
    let (d, t, _) = best_threshold(
        &magnitudes(&groups[0], mode, rotation),
        &magnitudes(&groups[1], mode, rotation),
    );
    Ok((d, t))
}

fn s_curve(sorted: &[f64], t: f64) -> f64 {
    sorted.partition_point(|&x| x <= t) as f64 / sorted.len() as f64
}

fn analyze_mode(records: &[ReadoutCycleRecord], mode: DetectionMode) -> Result<HistogramAnalysis> {
    let groups = split(records);
    check_counts(&groups, MIN_SHOTS)?;
    let rotation = oscillation_axis(records);

    let mut fits = Vec::with_capacity(2);
    for g in &groups {
        let values: Vec<f64> = g.iter().map(|r| project(r, mode, rotation)).collect();
        let model = match mode {
            DetectionMode::Amplitude => choose_model(&values),
            DetectionMode::Rectified => PeakModel::Single,
        };
        fits.push(fit_peak(&values, model)?);
    }
    let fits = [fits[0], fits[1]];
    let snr = (fits[1].mean - fits[0].mean).abs() / (fits[1].sigma + fits[0].sigma);

    let sorted = [
        magnitudes(&groups[0], mode, rotation),
        magnitudes(&groups[1], mode, rotation),
    ];
    let (discrimination, threshold, inverted) = best_threshold(&sorted[0], &sorted[1]);
    let top = sorted[0]
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(sorted[1].last().copied().unwrap_or(0.0));
    let thresholds: Vec<f64> = (0..S_CURVE_POINTS)
        .map(|k| top * k as f64 / (S_CURVE_POINTS - 1) as f64)
        .collect();
    let s_curves = SCurves {
        ground: thresholds.iter().map(|&t| s_curve(&sorted[0], t)).collect(),
        excited: thresholds.iter().map(|&t| s_curve(&sorted[1], t)).collect(),
        thresholds,
    };

    let span = fits
        .iter()
        .map(|f| f.mean.abs() + 5.0 * f.sigma)
        .fold(0.0, f64::max);
    let (lo1, hi1) = match mode {
        DetectionMode::Amplitude => (-span, span),
        DetectionMode::Rectified => (0.0, span),
    };
    let hist1d = [0, 1].map(|k| {
        Histogram1d::build(
            groups[k].iter().map(|r| project(r, mode, rotation)),
            lo1,
            hi1,
            HISTOGRAM_BINS,
        )
    });
    let hist2d = [0, 1].map(|k| {
        Histogram2d::build(
            groups[k].iter().map(|r| rotate(r, rotation)),
            -span,
            span,
            HISTOGRAM_BINS,
        )
    });

    Ok(HistogramAnalysis {
        mode,
        rotation,
        shots: [groups[0].len(), groups[1].len()],
        hist2d,
        hist1d,
        fits,
        snr,
        s_curves,
        discrimination,
        threshold,
        inverted,
    })
}

/// Analysis on the projected window-mean amplitude.
pub fn analyze(records: &[ReadoutCycleRecord]) -> Result<HistogramAnalysis> {
    analyze_mode(records, DetectionMode::Amplitude)
}

/// Analysis on the rectified window mean |V|. The sign of the field drops out,
/// so a phase switch inside the window no longer shrinks the signal.
pub fn rectified_analyze(records: &[ReadoutCycleRecord]) -> Result<HistogramAnalysis> {
    analyze_mode(records, DetectionMode::Rectified)
}

impl HistogramAnalysis {
    pub fn classify(&self, r: &ReadoutCycleRecord) -> QubitState {
        let far = project(r, self.mode, self.rotation).abs() > self.threshold;
        if far != self.inverted {
            QubitState::Excited
        } else {
            QubitState::Ground
        }
    }

    /// Fill in `classified` on every record.
    pub fn apply(&self, records: &mut [ReadoutCycleRecord]) {
        for r in records {
            r.classified = Some(self.classify(r));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Domain};
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn record(k: u64, prepared: QubitState, v_i: f64, v_q: f64) -> ReadoutCycleRecord {
        ReadoutCycleRecord::from_voltages(k, prepared, v_i, v_q, v_i.hypot(v_q))
    }

    pub(crate) fn synthetic(n: usize, mu: f64, sigma: f64, seed: u64) -> Vec<ReadoutCycleRecord> {
        let mut rng = stream(seed, Domain::Synthetic, 0);
        let mut out = Vec::with_capacity(2 * n);
        for k in 0..n as u64 {
            let g =
                |rng: &mut rand_chacha::ChaCha8Rng| sigma * rng.sample::<f64, _>(StandardNormal);
            let (a, b) = (g(&mut rng), g(&mut rng));
            out.push(record(k, QubitState::Ground, a, b));
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let (a, b) = (g(&mut rng), g(&mut rng));
            out.push(record(k, QubitState::Excited, sign * mu + a, b));
        }
        out
    }

    #[test]
    fn identical_preparations_give_zero_discrimination() {
        let base = synthetic(500, 1.0, 0.25, 1);
        let mut records: Vec<_> = base
            .iter()
            .filter(|r| r.prepared_state == QubitState::Ground)
            .cloned()
            .collect();
        let copies: Vec<_> = records
            .iter()
            .map(|r| ReadoutCycleRecord {
                prepared_state: QubitState::Excited,
                ..r.clone()
            })
            .collect();
        records.extend(copies);
        let a = analyze(&records).unwrap();
        assert_eq!(a.discrimination, 0.0);
    }

    #[test]
    fn histograms_hold_every_shot() {
        let records = synthetic(3000, 1.0, 0.25, 2);
        let a = analyze(&records).unwrap();
        for k in 0..2 {
            assert_eq!(a.hist1d[k].total(), 3000);
            assert_eq!(a.hist2d[k].total(), 3000);
            assert_eq!(a.hist1d[k].counts.len(), HISTOGRAM_BINS);
        }
        assert!(a.fits.iter().all(|f| f.sigma > 0.0));
        assert!((0.0..=1.0).contains(&a.discrimination));
    }

    #[test]
    fn s_curve_endpoints() {
        let records = synthetic(2000, 1.0, 0.25, 3);
        let a = analyze(&records).unwrap();
        let s = &a.s_curves;
        assert_eq!(*s.ground.last().unwrap(), 1.0);
        assert_eq!(*s.excited.last().unwrap(), 1.0);
        assert_eq!(s.ground[0] - s.excited[0], 0.0);
        assert!(s.ground.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn classification_matches_discrimination() {
        let mut records = synthetic(4000, 1.0, 0.3, 4);
        let a = analyze(&records).unwrap();
        a.apply(&mut records);
        let mut wrong = [0usize; 2];
        for r in &records {
            if r.classified != Some(r.prepared_state) {
                wrong[r.prepared_state.index() as usize] += 1;
            }
        }
        let d = 1.0 - wrong[0] as f64 / 4000.0 - wrong[1] as f64 / 4000.0;
        assert!((d - a.discrimination).abs() < 1e-12);
    }

    #[test]
    fn rotation_finds_tilted_axis() {
        let angle: f64 = 0.7;
        let records: Vec<_> = synthetic(3000, 1.0, 0.1, 5)
            .into_iter()
            .map(|r| {
                let (s, c) = angle.sin_cos();
                ReadoutCycleRecord {
                    v_i: r.v_i * c - r.v_q * s,
                    v_q: r.v_i * s + r.v_q * c,
                    ..r
                }
            })
            .collect();
        let a = analyze(&records).unwrap();
        assert!((a.rotation - angle).abs() < 0.01, "{}", a.rotation);
        assert!((a.fits[1].mean - 1.0).abs() < 0.01);
    }

    #[test]
    fn too_few_shots_is_an_error() {
        let records = synthetic(50, 1.0, 0.25, 6);
        assert!(matches!(analyze(&records), Err(Error::Degenerate(_))));
    }
}
