//! Record files, analysis reports and histogram export.
//!
//! Binary records are a sequence of frames, each a little-endian `u32` payload
//! length followed by the payload:
//!
//! | offset | type | field |
//! |-------:|------|-------|
//! | 0  | u64 | shot_index |
//! | 8  | u8  | true_state |
//! | 9  | u8  | fault_flags |
//! | 10 | f64 | decay_time (s, NaN = none) |
//! | 18 | f64 | v_i (V) |
//! | 26 | f64 | v_q (V) |
//! | 34 | u8  | prepared_state |
//! | 35 | f64 | v_abs (V) |
//! | 43 | u8  | classified (255 = unset) |
//! | 44 | f64 | switch_time (s, NaN = none) |
//!
//! Readers accept frames of at least 34 bytes and ignore bytes they do not know.

use super::analysis::{DetectionMode, HistogramAnalysis};
use super::budget::ErrorBudget;
use super::cycle::ReadoutCycleRecord;
use crate::device::QubitState;
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::io::{self, BufRead, Read, Write};

const CORE_LEN: usize = 34;
const FRAME_LEN: usize = 52;

pub const RECORD_HEADER: &str =
    "shot_index prepared_state true_state fault_flags decay_time_s switch_time_s v_i_V v_q_V v_abs_V classified";

fn opt(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

fn from_nan(v: f64) -> Option<f64> {
    (!v.is_nan()).then_some(v)
}

fn state(i: u8, line: usize) -> Result<QubitState> {
    QubitState::from_index(i).ok_or_else(|| Error::Parse {
        line,
        message: format!("qubit state must be 0 or 1, got {i}"),
    })
}

pub fn write_records_text<W: Write>(mut out: W, records: &[ReadoutCycleRecord]) -> io::Result<()> {
    writeln!(out, "{RECORD_HEADER}")?;
    for r in records {
        let classified = r
            .classified
            .map_or("-".to_string(), |s| s.index().to_string());
        writeln!(
            out,
            "{} {} {} {} {:e} {:e} {:e} {:e} {:e} {}",
            r.shot_index,
            r.prepared_state.index(),
            r.true_state.index(),
            r.fault_flags,
            opt(r.decay_time),
            opt(r.switch_time),
            r.v_i,
            r.v_q,
            r.v_abs,
            classified
        )?;
    }
    Ok(())
}

pub fn read_records_text<R: BufRead>(reader: R) -> Result<Vec<ReadoutCycleRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with("shot_index") {
            continue;
        }
        let n = i + 1;
        let f: Vec<&str> = t.split_whitespace().collect();
        if f.len() != 10 {
            return Err(Error::Parse {
                line: n,
                message: format!("expected 10 columns, found {}", f.len()),
            });
        }
        let bad = |what: &str| Error::Parse {
            line: n,
            message: format!("cannot parse {what}"),
        };
        let int = |s: &str, what: &str| s.parse::<u64>().map_err(|_| bad(what));
        let float = |s: &str, what: &str| s.parse::<f64>().map_err(|_| bad(what));
        out.push(ReadoutCycleRecord {
            shot_index: int(f[0], "shot_index")?,
            prepared_state: state(int(f[1], "prepared_state")? as u8, n)?,
            true_state: state(int(f[2], "true_state")? as u8, n)?,
            fault_flags: int(f[3], "fault_flags")? as u8,
            decay_time: from_nan(float(f[4], "decay_time")?),
            switch_time: from_nan(float(f[5], "switch_time")?),
            v_i: float(f[6], "v_i")?,
            v_q: float(f[7], "v_q")?,
            v_abs: float(f[8], "v_abs")?,
            classified: match f[9] {
                "-" => None,
                s => Some(state(int(s, "classified")? as u8, n)?),
            },
        });
    }
    Ok(out)
}

pub fn write_records_binary<W: Write>(
    mut out: W,
    records: &[ReadoutCycleRecord],
) -> io::Result<()> {
    let mut frame = Vec::with_capacity(FRAME_LEN + 4);
    for r in records {
        frame.clear();
        frame.extend_from_slice(&(FRAME_LEN as u32).to_le_bytes());
        frame.extend_from_slice(&r.shot_index.to_le_bytes());
        frame.push(r.true_state.index());
        frame.push(r.fault_flags);
        frame.extend_from_slice(&opt(r.decay_time).to_le_bytes());
        frame.extend_from_slice(&r.v_i.to_le_bytes());
        frame.extend_from_slice(&r.v_q.to_le_bytes());
        frame.push(r.prepared_state.index());
        frame.extend_from_slice(&r.v_abs.to_le_bytes());
        frame.push(r.classified.map_or(255, |s| s.index()));
        frame.extend_from_slice(&opt(r.switch_time).to_le_bytes());
        out.write_all(&frame)?;
    }
    Ok(())
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().expect("slice of 8"))
}

pub fn read_records_binary<R: Read>(mut reader: R) -> Result<Vec<ReadoutCycleRecord>> {
    let mut out = Vec::new();
    let mut len = [0u8; 4];
    let mut payload = Vec::new();
    loop {
        match reader.read_exact(&mut len) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e.into()),
        }
        let n = u32::from_le_bytes(len) as usize;
        let frame = out.len() + 1;
        if n < CORE_LEN {
            return Err(Error::Parse {
                line: frame,
                message: format!("frame of {n} bytes is shorter than the {CORE_LEN}-byte core"),
            });
        }
        payload.resize(n, 0);
        reader.read_exact(&mut payload)?;
        let b = &payload;
        let true_state = state(b[8], frame)?;
        let extended = n >= FRAME_LEN;
        out.push(ReadoutCycleRecord {
            shot_index: u64::from_le_bytes(b[0..8].try_into().expect("slice of 8")),
            true_state,
            fault_flags: b[9],
            decay_time: from_nan(f64_at(b, 10)),
            v_i: f64_at(b, 18),
            v_q: f64_at(b, 26),
            prepared_state: if extended {
                state(b[34], frame)?
            } else {
                true_state
            },
            v_abs: if extended {
                f64_at(b, 35)
            } else {
                f64_at(b, 18).hypot(f64_at(b, 26))
            },
            classified: if extended && b[43] != 255 {
                Some(state(b[43], frame)?)
            } else {
                None
            },
            switch_time: if extended {
                from_nan(f64_at(b, 44))
            } else {
                None
            },
        });
    }
    Ok(out)
}

/// Key = value report of an analysis and, optionally, its error budget.
pub fn report_text(analysis: &HistogramAnalysis, budget: Option<&ErrorBudget>) -> String {
    let mut s = String::new();
    let mode = match analysis.mode {
        DetectionMode::Amplitude => "amplitude",
        DetectionMode::Rectified => "rectified",
    };
    let _ = writeln!(s, "[analysis]");
    let _ = writeln!(s, "mode = \"{mode}\"");
    let _ = writeln!(s, "rotation_rad = {:e}", analysis.rotation);
    let _ = writeln!(s, "shots_ground = {}", analysis.shots[0]);
    let _ = writeln!(s, "shots_excited = {}", analysis.shots[1]);
    for (k, f) in analysis.fits.iter().enumerate() {
        let _ = writeln!(s, "mu{k}_V = {:e}", f.mean);
        let _ = writeln!(s, "sigma{k}_V = {:e}", f.sigma);
    }
    let _ = writeln!(s, "snr = {:.6}", analysis.snr);
    let _ = writeln!(s, "discrimination = {:.6}", analysis.discrimination);
    let _ = writeln!(s, "threshold_V = {:e}", analysis.threshold);
    let _ = writeln!(s, "inverted = {}", analysis.inverted);
    if let Some(b) = budget {
        let _ = writeln!(s, "\n[error_budget]");
        let _ = writeln!(
            s,
            "measured_discrimination = {:.6}",
            b.measured_discrimination
        );
        let _ = writeln!(s, "relaxation_loss = {:.6}", b.relaxation_loss);
        let _ = writeln!(s, "preparation_loss = {:.6}", b.preparation_loss);
        let _ = writeln!(s, "thermal_loss = {:.6}", b.thermal_loss);
        let _ = writeln!(s, "switching_loss = {:.6}", b.switching_loss);
        let _ = writeln!(s, "overlap_loss = {:.6}", b.overlap_loss);
        let _ = writeln!(s, "overlap_analytic = {:e}", b.overlap_analytic);
        let _ = writeln!(s, "inferred_fidelity = {:.6}", b.inferred_fidelity);
        let _ = writeln!(s, "accounted_total = {:.6}", b.accounted());
    }
    s
}

/// 1D histograms of both preparations: bin edges in V and counts.
pub fn write_histograms<W: Write>(mut out: W, analysis: &HistogramAnalysis) -> io::Result<()> {
    writeln!(out, "bin_low_V bin_high_V count_ground count_excited")?;
    let [h0, h1] = &analysis.hist1d;
    for k in 0..h0.counts.len() {
        writeln!(
            out,
            "{:e} {:e} {} {}",
            h0.edges[k],
            h0.edges[k + 1],
            h0.counts[k],
            h1.counts[k]
        )?;
    }
    Ok(())
}

/// 2D histogram of one preparation as (V_I bin center, V_Q bin center, count).
pub fn write_histogram_2d<W: Write>(
    mut out: W,
    analysis: &HistogramAnalysis,
    state: QubitState,
) -> io::Result<()> {
    let h = &analysis.hist2d[state.index() as usize];
    let bins = h.bins();
    let center = |k: usize| 0.5 * (h.edges[k] + h.edges[k + 1]);
    writeln!(out, "v_i_center_V v_q_center_V count")?;
    for q in 0..bins {
        for i in 0..bins {
            writeln!(
                out,
                "{:e} {:e} {}",
                center(i),
                center(q),
                h.counts[q * bins + i]
            )?;
        }
    }
    Ok(())
}

pub fn write_s_curves<W: Write>(mut out: W, analysis: &HistogramAnalysis) -> io::Result<()> {
    let s = &analysis.s_curves;
    writeln!(out, "threshold_V s_ground s_excited separation")?;
    for k in 0..s.thresholds.len() {
        writeln!(
            out,
            "{:e} {:.6} {:.6} {:.6}",
            s.thresholds[k],
            s.ground[k],
            s.excited[k],
            s.ground[k] - s.excited[k]
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<ReadoutCycleRecord> {
        vec![
            ReadoutCycleRecord {
                shot_index: 0,
                prepared_state: QubitState::Excited,
                true_state: QubitState::Excited,
                fault_flags: 4,
                decay_time: Some(1.234_567_890_123e-7),
                switch_time: None,
                v_i: -1.0 / 3.0,
                v_q: 2e-300,
                v_abs: 0.5,
                classified: Some(QubitState::Ground),
            },
            ReadoutCycleRecord {
                shot_index: u64::MAX,
                prepared_state: QubitState::Ground,
                true_state: QubitState::Excited,
                fault_flags: 2,
                decay_time: None,
                switch_time: Some(3.5e-7),
                v_i: 1e-9,
                v_q: -7.25,
                v_abs: 7.25,
                classified: None,
            },
        ]
    }

    #[test]
    fn text_round_trip_is_exact() {
        let mut buf = Vec::new();
        write_records_text(&mut buf, &sample()).unwrap();
        assert_eq!(read_records_text(&buf[..]).unwrap(), sample());
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let mut buf = Vec::new();
        write_records_binary(&mut buf, &sample()).unwrap();
        assert_eq!(buf.len(), 2 * (4 + FRAME_LEN));
        assert_eq!(read_records_binary(&buf[..]).unwrap(), sample());
    }

    #[test]
    fn binary_reader_accepts_core_frames() {
        let mut buf = Vec::new();
        buf.extend_from_slice(&(CORE_LEN as u32).to_le_bytes());
        buf.extend_from_slice(&7u64.to_le_bytes());
        buf.push(1);
        buf.push(0);
        buf.extend_from_slice(&f64::NAN.to_le_bytes());
        buf.extend_from_slice(&3.0f64.to_le_bytes());
        buf.extend_from_slice(&4.0f64.to_le_bytes());
        let r = read_records_binary(&buf[..]).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].shot_index, 7);
        assert_eq!(r[0].v_abs, 5.0);
        assert_eq!(r[0].decay_time, None);
    }

    #[test]
    fn short_frame_is_rejected() {
        let mut buf = Vec::new();
        buf.extend_from_slice(&10u32.to_le_bytes());
        buf.extend_from_slice(&[0; 10]);
        assert!(read_records_binary(&buf[..]).is_err());
    }
}
