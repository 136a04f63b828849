//! JSON wire formats and number formatting shared with the command-line tool.
//!
//! Complex numbers travel as `[re, im]` pairs; matrices as lists of rows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, C64};
use crate::protocols::{TargetSpec, Term};
use crate::states::PureState;

/// Formats with ten significant digits, switching to exponent notation for
/// very large or very small magnitudes.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..=12).contains(&exp) {
        let decimals = (9 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.9e}")
    }
}

pub type WireComplex = [f64; 2];
pub type WireMatrix = Vec<Vec<WireComplex>>;

pub fn to_wire(z: C64) -> WireComplex {
    [z.re, z.im]
}

pub fn from_wire(w: WireComplex) -> C64 {
    c(w[0], w[1])
}

pub fn matrix_to_wire(m: &CMatrix) -> WireMatrix {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|col| to_wire(m[(r, col)])).collect()).collect()
}

pub fn matrix_from_wire(w: &WireMatrix) -> Result<CMatrix> {
    let rows = w.len();
    let cols = w.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 || w.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse("matrix rows must be nonempty and of equal length".into()));
    }
    Ok(CMatrix::from_fn(rows, cols, |r, col| from_wire(w[r][col])))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct WireState {
    dims: Vec<usize>,
    amplitudes: Vec<WireComplex>,
}

pub fn state_to_json(state: &PureState) -> String {
    let w =
        WireState { dims: state.dims().to_vec(), amplitudes: state.amplitudes().iter().map(|&z| to_wire(z)).collect() };
    serde_json::to_string_pretty(&w).expect("state serializes")
}

pub fn state_from_json(text: &str) -> Result<PureState> {
    let w: WireState = serde_json::from_str(text).map_err(json_error)?;
    PureState::new(w.dims, w.amplitudes.into_iter().map(from_wire).collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct WireTerm {
    coeff: WireComplex,
    vectors: Vec<Vec<WireComplex>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct WireTarget {
    terms: Vec<WireTerm>,
}

pub fn target_to_json(spec: &TargetSpec) -> String {
    let w = WireTarget {
        terms: spec
            .terms()
            .iter()
            .map(|t| WireTerm {
                coeff: to_wire(t.coeff),
                vectors: t.vectors.iter().map(|v| v.iter().map(|&z| to_wire(z)).collect()).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&w).expect("target serializes")
}

pub fn target_from_json(text: &str) -> Result<TargetSpec> {
    let w: WireTarget = serde_json::from_str(text).map_err(json_error)?;
    let terms = w
        .terms
        .into_iter()
        .map(|t| Term {
            coeff: from_wire(t.coeff),
            vectors: t.vectors.into_iter().map(|v| v.into_iter().map(from_wire).collect()).collect(),
        })
        .collect();
    TargetSpec::new(terms)
}

/// serde_json messages already end with the line and column.
pub(crate) fn json_error(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}
