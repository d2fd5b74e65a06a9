use super::integrator::Trajectory;
use std::io::{self, Write};

/// Write a trajectory as whitespace-separated columns, one row per recorded
/// sample. `echo` is written verbatim as a `#` comment line before the column
/// header.
pub fn write_trajectory<W: Write>(mut out: W, traj: &Trajectory, echo: &str) -> io::Result<()> {
    for line in echo.lines() {
        writeln!(out, "# {line}")?;
    }
    writeln!(
        out,
        "time_s re_A_sqrt_photons im_A_sqrt_photons photons qubit_state"
    )?;
    for i in 0..traj.len() {
        let a = traj.amplitudes[i];
        writeln!(
            out,
            "{:.6e} {:.9e} {:.9e} {:.9e} {}",
            traj.times[i],
            a.re,
            a.im,
            a.norm_sqr(),
            traj.qubit_state[i]
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn columns_and_header() {
        let traj = Trajectory {
            times: vec![0.0, 1e-9],
            amplitudes: vec![Complex64::new(0.0, 0.0), Complex64::new(3.0, 4.0)],
            qubit_state: vec![1, 0],
            events: Vec::new(),
        };
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &traj, "dt=1e-9\nseed=3").unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# dt=1e-9");
        assert_eq!(lines[1], "# seed=3");
        assert!(lines[2].starts_with("time_s"));
        let last: Vec<&str> = lines[4].split_whitespace().collect();
        assert_eq!(last.len(), 5);
        assert_eq!(last[3].parse::<f64>().unwrap(), 25.0);
        assert_eq!(last[4], "0");
    }
}
