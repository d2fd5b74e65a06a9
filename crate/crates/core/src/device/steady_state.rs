//! Fixed points of the slow-amplitude equation without input drive.
//!
//! Setting Ȧ = 0 with A = r e^{iθ} gives ε sin 2θ = Γ and
//! α r² = −δ ± √(ε² − Γ²), where δ is the (effective) detuning. The "+" root is
//! stable and the "−" root, when positive, is a saddle between the zero state
//! and the oscillating state.

use crate::error::{Error, Result};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyRoot {
    /// |A|², photons.
    pub photons: f64,
    /// cos 2θ of the fixed-point phase; sin 2θ = Γ/ε.
    pub cos_two_theta: f64,
    pub stability: Stability,
}

impl SteadyRoot {
    /// The two π-shifted fixed-point amplitudes r e^{iθ} and −r e^{iθ}.
    pub fn amplitudes(&self, epsilon: f64, gamma: f64) -> [Complex64; 2] {
        let two_theta = (gamma / epsilon).atan2(self.cos_two_theta);
        let a = Complex64::from_polar(self.photons.sqrt(), 0.5 * two_theta);
        [a, -a]
    }
}

/// Number and kind of fixed points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Zero state unstable, one oscillating state (bistable in phase).
    Oscillating,
    /// Zero state stable alongside an oscillating state and a saddle.
    Tristable,
    /// Exactly at the boundary: the oscillating root has zero amplitude.
    Marginal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub zero: Stability,
    /// Non-negative roots, highest amplitude first.
    pub roots: Vec<SteadyRoot>,
    pub regime: Regime,
}

impl SteadyState {
    /// The stable oscillating photon number.
    pub fn stable_photons(&self) -> f64 {
        self.roots
            .iter()
            .find(|r| r.stability == Stability::Stable)
            .map_or(0.0, |r| r.photons)
    }
}

/// Steady-state photon numbers for detuning `delta`, pump `epsilon`,
/// Kerr coefficient `alpha` (> 0) and damping `gamma`.
pub fn steady_state_photons(
    delta: f64,
    epsilon: f64,
    alpha: f64,
    gamma: f64,
) -> Result<SteadyState> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha", "must be positive"));
    }
    if !(gamma > 0.0) {
        return Err(Error::invalid("gamma", "must be positive"));
    }
    if !(epsilon >= gamma) {
        return Err(Error::BelowThreshold);
    }
    let s = (epsilon * epsilon - gamma * gamma).sqrt();
    let mut roots = Vec::with_capacity(2);
    for sign in [1.0, -1.0] {
        let photons = (-delta + sign * s) / alpha;
        if photons < 0.0 {
            continue;
        }
        // d/dn of (δ + αn)² + Γ² − ε² is 2α(δ + αn) = 2α(±s).
        let stability = if sign > 0.0 {
            Stability::Stable
        } else {
            Stability::Unstable
        };
        roots.push(SteadyRoot {
            photons,
            cos_two_theta: -(delta + alpha * photons) / epsilon,
            stability,
        });
        if s == 0.0 {
            break;
        }
    }
    if roots.is_empty() {
        return Err(Error::BelowThreshold);
    }
    let zero = if epsilon * epsilon > gamma * gamma + delta * delta {
        Stability::Unstable
    } else {
        Stability::Stable
    };
    let regime = match (zero, roots.len()) {
        (Stability::Unstable, _) => Regime::Oscillating,
        (Stability::Stable, 2) => Regime::Tristable,
        _ => Regime::Marginal,
    };
    Ok(SteadyState {
        zero,
        roots,
        regime,
    })
}

/// Right-hand side Ȧ of the slow-amplitude equation with B = 0.
pub fn drift(a: Complex64, delta: f64, epsilon: f64, alpha: f64, gamma: f64) -> Complex64 {
    let i = Complex64::i();
    i * (epsilon * a.conj() + (delta + alpha * a.norm_sqr()) * a) - gamma * a
}
