//! Physical constants and unit helpers.
//!
//! Internally every frequency and rate is an angular frequency in rad/s.
//! Human-facing values (config files, reports) are ordinary frequencies in Hz.

use std::f64::consts::PI;

pub const TWO_PI: f64 = 2.0 * PI;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Resistance quantum h/e², ohm.
pub const RESISTANCE_QUANTUM: f64 = PLANCK / (ELEMENTARY_CHARGE * ELEMENTARY_CHARGE);

#[inline]
pub fn angular(hz: f64) -> f64 {
    hz * TWO_PI
}

#[inline]
pub fn hertz(angular: f64) -> f64 {
    angular / TWO_PI
}

/// dBm to watts.
#[inline]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resistance_quantum_value() {
        assert!((RESISTANCE_QUANTUM - 25_812.807_45).abs() < 1e-3);
    }

    #[test]
    fn dbm_reference_points() {
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
        assert!((dbm_to_watts(0.0) - 1e-3).abs() < 1e-18);
    }
}
