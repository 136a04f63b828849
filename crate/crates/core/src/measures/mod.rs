//! Interference term, normalization and 3-tangle, plus the largest 3-tangle a
//! GHZ-class state can carry at a given interference value.

pub mod oracle;

pub use oracle::{brute_force_max_tangle, OracleConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::{GhzClassForm, PureState, TwoTermDecomposition};

pub fn interference_term(d: &TwoTermDecomposition) -> f64 {
    d.interference()
}

pub fn normalization(d: &TwoTermDecomposition) -> f64 {
    d.normalization()
}

/// Residual 3-tangle `4|d₁ − 2d₂ + 4d₃|` of a three-qubit state.
pub fn three_tangle(state: &PureState) -> Result<f64> {
    if !state.is_qubits(3) {
        return Err(Error::Shape(format!("3-tangle needs three qubits, got {:?}", state.dims())));
    }
    let a = |i: usize, j: usize, k: usize| state.amplitude(&[i, j, k]);
    let (a000, a001, a010, a011) = (a(0, 0, 0), a(0, 0, 1), a(0, 1, 0), a(0, 1, 1));
    let (a100, a101, a110, a111) = (a(1, 0, 0), a(1, 0, 1), a(1, 1, 0), a(1, 1, 1));
    let d1 =
        a000 * a000 * a111 * a111 + a001 * a001 * a110 * a110 + a010 * a010 * a101 * a101 + a100 * a100 * a011 * a011;
    let d2 = a000 * a111 * a011 * a100
        + a000 * a111 * a101 * a010
        + a000 * a111 * a110 * a001
        + a011 * a100 * a101 * a010
        + a011 * a100 * a110 * a001
        + a101 * a010 * a110 * a001;
    let d3 = a000 * a110 * a101 * a011 + a111 * a001 * a010 * a100;
    Ok(4.0 * (d1 - 2.0 * d2 + 4.0 * d3).norm())
}

/// Closed-form 3-tangle of a GHZ-class form.
pub fn three_tangle_ghz_form(form: &GhzClassForm) -> f64 {
    let (sa, sb, sg) = (form.alpha.sin(), form.beta.sin(), form.gamma.sin());
    let (sd, cd) = (form.delta.sin(), form.delta.cos());
    let denom = 1.0 + form.cross_term();
    4.0 * (sa * sb * sg * sd * cd).powi(2) / (denom * denom)
}

/// Closed-form interference term `t/(1+t)` of a GHZ-class form.
pub fn interference_ghz_form(form: &GhzClassForm) -> f64 {
    let t = form.cross_term();
    t / (1.0 + t)
}

/// The largest 3-tangle compatible with a given interference value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangleBudget {
    pub interference: f64,
    pub max_tangle: f64,
    pub a_param: f64,
}

/// `(1 − a²)³ / (1 + a³)²` with `a = cbrt(I / (1 − I))`.
///
/// The maximum sits at equal weights and equal local overlaps `|a|`, with the
/// sign of the interference carried by the relative phase.
pub fn max_tangle_given_interference(interference: f64) -> Result<TangleBudget> {
    if !interference.is_finite() || interference >= 0.5 {
        return Err(Error::Domain { name: "interference", value: interference, range: "(-∞, 1/2)" });
    }
    let a = (interference / (1.0 - interference)).cbrt();
    let max_tangle = if a <= -1.0 {
        0.0
    } else {
        let num = (1.0 - a * a).powi(3);
        let den = (1.0 + a * a * a).powi(2);
        (num / den).clamp(0.0, 1.0)
    };
    Ok(TangleBudget { interference, max_tangle, a_param: a })
}
