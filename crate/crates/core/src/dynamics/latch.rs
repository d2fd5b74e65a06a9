use super::integrator::Trajectory;
use crate::error::{Error, Result};

/// First time |A|² rises above `fraction × reference_photons` and then stays
/// above it for at least `hold` seconds. `None` if that never happens.
///
/// `reference_photons` is normally the stable steady-state photon number and
/// `hold` is 5/Γ.
pub fn detect_latch(
    traj: &Trajectory,
    fraction: f64,
    reference_photons: f64,
    hold: f64,
) -> Result<Option<f64>> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid("fraction", "must lie in (0, 1)"));
    }
    let level = fraction * reference_photons;
    let mut candidate: Option<f64> = None;
    for (t, a) in traj.times.iter().zip(&traj.amplitudes) {
        if a.norm_sqr() > level {
            let start = *candidate.get_or_insert(*t);
            if t - start >= hold {
                return Ok(Some(start));
            }
        } else {
            candidate = None;
        }
    }
    Ok(None)
}
