use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

use serde::{Deserialize, Serialize};

use super::{qubit, PureState};
use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};

/// Five-angle parametrization of a three-qubit GHZ-class state,
///
/// `√K (c_δ |000⟩ + s_δ e^{iφ} |φ_A φ_B φ_C⟩)` with `|φ_X⟩ = c_X|0⟩ + s_X|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhzClassForm {
    pub delta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub phi: f64,
}

impl GhzClassForm {
    /// Validates δ ∈ (0, π/4], α, β, γ ∈ (0, π/2], φ ∈ [0, 2π).
    pub fn new(delta: f64, alpha: f64, beta: f64, gamma: f64, phi: f64) -> Result<Self> {
        const EPS: f64 = 1e-12;
        let check = |name, value: f64, hi: f64, range| {
            if value.is_finite() && value > 0.0 && value <= hi + EPS {
                Ok(value.min(hi))
            } else {
                Err(Error::Domain { name, value, range })
            }
        };
        let delta = check("delta", delta, FRAC_PI_4, "(0, π/4]")?;
        let alpha = check("alpha", alpha, FRAC_PI_2, "(0, π/2]")?;
        let beta = check("beta", beta, FRAC_PI_2, "(0, π/2]")?;
        let gamma = check("gamma", gamma, FRAC_PI_2, "(0, π/2]")?;
        if !phi.is_finite() || !(0.0..TAU).contains(&phi) {
            return Err(Error::Domain { name: "phi", value: phi, range: "[0, 2π)" });
        }
        Ok(Self { delta, alpha, beta, gamma, phi })
    }

    /// Equal-weight form (δ = π/4) with local overlaps `⟨0|φ_X⟩ = c_X`.
    pub fn from_overlaps(overlaps: [f64; 3], phi: f64) -> Result<Self> {
        Self::from_overlaps_delta(overlaps, FRAC_PI_4, phi)
    }

    pub fn from_overlaps_delta(overlaps: [f64; 3], delta: f64, phi: f64) -> Result<Self> {
        for &o in &overlaps {
            if !(0.0..1.0).contains(&o) {
                return Err(Error::Domain { name: "overlap", value: o, range: "[0, 1)" });
            }
        }
        Self::new(delta, overlaps[0].acos(), overlaps[1].acos(), overlaps[2].acos(), phi)
    }

    /// The symmetric family used in most worked examples.
    pub fn symmetric(overlap: f64, phi: f64) -> Result<Self> {
        Self::from_overlaps([overlap; 3], phi)
    }

    /// The GHZ point of the family.
    pub fn ghz() -> Self {
        Self { delta: FRAC_PI_4, alpha: FRAC_PI_2, beta: FRAC_PI_2, gamma: FRAC_PI_2, phi: 0.0 }
    }

    pub fn overlaps(&self) -> [f64; 3] {
        [self.alpha.cos(), self.beta.cos(), self.gamma.cos()]
    }

    /// `t = 2 c_δ s_δ c_α c_β c_γ cos φ`, the recurring cross term.
    pub fn cross_term(&self) -> f64 {
        let [a, b, g] = self.overlaps();
        2.0 * self.delta.cos() * self.delta.sin() * a * b * g * self.phi.cos()
    }

    pub fn k(&self) -> f64 {
        1.0 / (1.0 + self.cross_term())
    }

    /// True when the local overlaps all vanish and the weights are equal.
    pub fn is_ghz_point(&self) -> bool {
        self.overlaps().iter().all(|o| o.abs() < 1e-12) && (self.delta - FRAC_PI_4).abs() < 1e-12
    }

    pub fn local_vectors(&self) -> [Vec<C64>; 3] {
        [qubit(self.alpha), qubit(self.beta), qubit(self.gamma)]
    }

    pub fn to_state(&self) -> PureState {
        let k = self.k().sqrt();
        let [va, vb, vc] = self.local_vectors();
        let second = C64::from_polar(k * self.delta.sin(), self.phi);
        let mut amps = vec![ZERO; 8];
        amps[0] += k * self.delta.cos();
        for i in 0..2 {
            for j in 0..2 {
                for l in 0..2 {
                    amps[4 * i + 2 * j + l] += second * va[i] * vb[j] * vc[l];
                }
            }
        }
        PureState::new(vec![2, 2, 2], amps).expect("form expands to a finite state")
    }
}

/// Maps any real angle into `[0, 2π)`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}
