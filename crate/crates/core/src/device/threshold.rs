//! Instability boundary of the zero-amplitude state.
//!
//! Linearizing the slow-amplitude equation around A = 0 with the pump-induced
//! pull folded into the detuning, δ_eff = δ + βε²/Γ, the zero state grows when
//! ε² > Γ² + δ_eff². Solving the equality for ε gives a lower and an upper branch;
//! at fixed δ the parametric-oscillation region is the open interval between them.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdBranches {
    /// Lower boundary ε_th (rad/s).
    pub lower: f64,
    /// Upper boundary ε_th (rad/s); infinite when β = 0.
    pub upper: f64,
}

impl ThresholdBranches {
    pub fn contains(&self, epsilon: f64) -> bool {
        epsilon > self.lower && epsilon < self.upper
    }
}

/// Detuning including the pump-induced pull, δ + βε²/Γ.
#[inline]
pub fn effective_detuning(delta: f64, epsilon: f64, beta: f64, gamma: f64) -> f64 {
    delta + beta * epsilon * epsilon / gamma
}

/// Growth rate of the fastest linear mode around A = 0 (negative when stable).
pub fn zero_state_growth_rate(delta: f64, epsilon: f64, beta: f64, gamma: f64) -> f64 {
    let d = effective_detuning(delta, epsilon, beta, gamma);
    let disc = epsilon * epsilon - d * d;
    if disc > 0.0 {
        disc.sqrt() - gamma
    } else {
        -gamma
    }
}

pub fn is_unstable(delta: f64, epsilon: f64, beta: f64, gamma: f64) -> bool {
    let d = effective_detuning(delta, epsilon, beta, gamma);
    epsilon * epsilon > gamma * gamma + d * d
}

/// Both branches of the threshold pump amplitude at detuning `delta`.
///
/// Evaluated in a cancellation-free form so the β → 0 limit is accurate:
/// (ε_lo/Γ)² = 2(1 + d²) / (1 − 2βd + √D), (ε_hi/Γ)² = (1 − 2βd + √D) / (2β²),
/// with d = δ/Γ and D = 1 − 4β(β + d).
pub fn instability_threshold(delta: f64, beta: f64, gamma: f64) -> Result<ThresholdBranches> {
    if !(gamma > 0.0) {
        return Err(Error::invalid("gamma", "must be positive"));
    }
    if !(beta >= 0.0) {
        return Err(Error::invalid("beta", "must be non-negative"));
    }
    let d = delta / gamma;
    let discriminant = 1.0 - 4.0 * beta * (beta + d);
    if discriminant < 0.0 {
        return Err(Error::NoBoundary { discriminant });
    }
    let sum = 1.0 - 2.0 * beta * d + discriminant.sqrt();
    let lower = (2.0 * (1.0 + d * d) / sum).sqrt() * gamma;
    let upper = if beta == 0.0 {
        f64::INFINITY
    } else {
        (sum / (2.0 * beta * beta)).sqrt() * gamma
    };
    Ok(ThresholdBranches { lower, upper })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Textbook form, x = (1/(√2β)) √(1 − 2βd ± √D).
    fn direct(d: f64, beta: f64) -> (f64, f64) {
        let disc = (1.0 - 4.0 * beta * (beta + d)).sqrt();
        let lo = (1.0 - 2.0 * beta * d - disc).sqrt() / (2f64.sqrt() * beta);
        let hi = (1.0 - 2.0 * beta * d + disc).sqrt() / (2f64.sqrt() * beta);
        (lo, hi)
    }

    #[test]
    fn matches_textbook_form_at_moderate_beta() {
        for &beta in &[7.5e-3, 0.02, 0.1] {
            for k in 0..25 {
                let d = -8.0 + 0.5 * k as f64;
                if 1.0 - 4.0 * beta * (beta + d) < 0.0 {
                    continue;
                }
                let b = instability_threshold(d, beta, 1.0).unwrap();
                let (lo, hi) = direct(d, beta);
                assert!((b.lower - lo).abs() < 1e-9 * lo, "d={d} beta={beta}");
                assert!((b.upper - hi).abs() < 1e-9 * hi);
            }
        }
    }

    #[test]
    fn small_beta_limit() {
        // Lower branch → √(1 + d²) with a first-order correction β·d.
        let beta = 1e-6;
        // Open interval: at |d| = 1 the β·d term alone sits right on 1e-6.
        for k in 1..20 {
            let d = -1.0 + 0.1 * k as f64;
            let lo = instability_threshold(d, beta, 1.0).unwrap().lower;
            let closed = (1.0 + d * d).sqrt();
            assert!(((lo - closed) / closed).abs() <= 1e-6 + 1e-12, "d={d}");
        }
        for k in 0..=12 {
            let d = -8.0 + k as f64;
            let lo = instability_threshold(d, beta, 1.0).unwrap().lower;
            let closed = (1.0 + d * d).sqrt();
            assert!(
                ((lo - closed) / closed).abs() <= 1.01 * beta * d.abs() + 1e-12,
                "d={d}"
            );
        }
    }

    #[test]
    fn zero_detuning_zero_beta_threshold_is_damping() {
        let gamma = 8.3e6;
        let b = instability_threshold(0.0, 0.0, gamma).unwrap();
        assert!((b.lower - gamma).abs() < 1e-9 * gamma);
        assert!(b.upper.is_infinite());
    }

    #[test]
    fn negative_discriminant_has_no_boundary() {
        let beta = 0.1;
        // D = 1 − 4β(β + d) < 0 for d > 1/(4β) − β = 2.4
        assert!(matches!(
            instability_threshold(3.0, beta, 1.0),
            Err(Error::NoBoundary { .. })
        ));
        assert!(instability_threshold(2.3, beta, 1.0).is_ok());
    }

    #[test]
    fn skew_extends_region_to_red_detuning() {
        let beta = 7.5e-3;
        for k in 0..=24 {
            let d = -8.0 + 0.5 * k as f64;
            let skewed = instability_threshold(d, beta, 1.0).unwrap().lower;
            let symmetric = (1.0 + d * d).sqrt();
            if d < 0.0 {
                assert!(skewed < symmetric, "d={d}");
            } else if d > 0.0 {
                assert!(skewed > symmetric, "d={d}");
            }
        }
    }

    proptest! {
        #[test]
        fn branches_bound_the_unstable_interval(
            d in -8.0f64..4.0,
            x in 0.0f64..200.0,
            beta in 0.0f64..0.02,
        ) {
            let b = instability_threshold(d, beta, 1.0).unwrap();
            // Skip points numerically on a branch.
            let margin = 1e-7 * (1.0 + x);
            prop_assume!((x - b.lower).abs() > margin && (x - b.upper).abs() > margin);
            prop_assert_eq!(b.contains(x), is_unstable(d, x, beta, 1.0));
            prop_assert_eq!(b.contains(x), zero_state_growth_rate(d, x, beta, 1.0) > 0.0);
        }
    }
}
