//! Upper bounds on the success probability of GHZ-class conversions.
//!
//! Interference values are signed throughout: `x` is the interference term at
//! which undecided branches are stopped, not its magnitude.

mod curve;
mod golden;

pub use curve::{combined_bound_curve, BoundCurve, CurveRecord, CURVE_HEADER};
pub use golden::golden_section_min;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{interference_ghz_form, max_tangle_given_interference, three_tangle_ghz_form};
use crate::states::GhzClassForm;

/// Interference gap below which initial and target are treated as equal.
pub const EQUAL_INTERFERENCE_TOL: f64 = 1e-12;
/// Stopping interference never reaches 1/2, where the tangle budget vanishes.
pub const X_CEILING: f64 = 0.5 - 1e-9;
const GRID_POINTS: usize = 2048;
const GOLDEN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    Theorem1,
    Failure,
    InterferenceTangle,
    TangleRatio,
    Combined,
}

impl fmt::Display for BoundMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Theorem1 => "theorem1",
            Self::Failure => "failure",
            Self::InterferenceTangle => "interference_tangle",
            Self::TangleRatio => "tangle_ratio",
            Self::Combined => "combined",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub value: f64,
    pub method: BoundMethod,
    pub argmin_x: Option<f64>,
    pub diagnostics: BTreeMap<String, f64>,
    /// Set when the bound carries no information (value 1 by construction).
    pub trivial: bool,
}

impl BoundResult {
    fn new(value: f64, method: BoundMethod) -> Self {
        Self {
            value: value.clamp(0.0, 1.0),
            method,
            argmin_x: None,
            diagnostics: BTreeMap::new(),
            trivial: value >= 1.0,
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.diagnostics.insert(key.to_string(), value);
        self
    }
}

/// Phase-flip bound for conversions starting from the GHZ state:
/// `min{1, (1 + t)/(1 − t)}` with `t = 2c_δ s_δ c_α c_β c_γ cos φ`.
pub fn upper_bound_theorem1(target: &GhzClassForm) -> BoundResult {
    let t = target.cross_term();
    let ratio = (1.0 + t) / (1.0 - t);
    BoundResult::new(ratio.min(1.0), BoundMethod::Theorem1)
        .with("k", 1.0 / (1.0 + t))
        .with("k_flipped", 1.0 / (1.0 - t))
}

/// Bound from the failure branches alone when undecided branches are
/// stopped a distance `y` beyond the initial (zero) interference.
pub fn failure_bound(target_i: f64, y: f64) -> Result<f64> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::Domain { name: "y", value: y, range: "(0, ∞)" });
    }
    if target_i > 0.0 {
        Ok(y / (target_i + y))
    } else if target_i < 0.0 {
        Ok(y / (y - target_i))
    } else {
        Err(Error::Domain { name: "target interference", value: target_i, range: "≠ 0" })
    }
}

/// The pieces of the interference + 3-tangle bound at one stopping value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarPs {
    pub p_as: f64,
    pub p_u: f64,
    pub p_m: f64,
    pub pbar: f64,
}

/// `p̄ = p_as + p_u · p_m` at stopping interference `x`.
pub fn bar_p_s(initial_i: f64, target_i: f64, target_tangle: f64, x: f64) -> Result<BarPs> {
    if !(target_tangle > 0.0) {
        return Err(Error::NotGhzClass(format!("target 3-tangle {target_tangle} is not positive")));
    }
    if !x.is_finite() || x >= 0.5 {
        return Err(Error::Domain { name: "x", value: x, range: "(-∞, 1/2)" });
    }
    let p_m = (max_tangle_given_interference(x)?.max_tangle / target_tangle).min(1.0);
    if (target_i - initial_i).abs() <= EQUAL_INTERFERENCE_TOL {
        return Ok(BarPs { p_as: 1.0, p_u: 0.0, p_m, pbar: 1.0 });
    }
    let far_side = if target_i > initial_i { x <= initial_i } else { x >= initial_i };
    if !far_side {
        return Err(Error::Precondition(format!(
            "stopping interference {x} lies between initial {initial_i} and target {target_i}"
        )));
    }
    let p_as = ((initial_i - x) / (target_i - x)).clamp(0.0, 1.0);
    let p_u = 1.0 - p_as;
    Ok(BarPs { p_as, p_u, p_m, pbar: (p_as + p_u * p_m).clamp(0.0, 1.0) })
}

/// Maps the compact search variable `a ∈ [0, 1)` to a stopping interference.
///
/// Below the initial value `a³ = y/(1+y)` with `y = initial − x`; above it the
/// map is linear onto `[initial, 1/2)`.
pub(crate) fn stopping_interference(initial_i: f64, target_i: f64, a: f64) -> f64 {
    if target_i > initial_i {
        let a3 = a * a * a;
        initial_i - a3 / (1.0 - a3)
    } else {
        initial_i + a * (X_CEILING - initial_i)
    }
}

/// Minimum of `p̄_s` over the admissible stopping interferences.
pub fn upper_bound_interference_tangle(initial_i: f64, target_i: f64, target_tangle: f64) -> Result<BoundResult> {
    if !(target_tangle > 0.0) {
        return Err(Error::NotGhzClass(format!("target 3-tangle {target_tangle} is not positive")));
    }
    if !(initial_i < X_CEILING) {
        return Err(Error::Domain { name: "initial interference", value: initial_i, range: "(-∞, 1/2)" });
    }
    if (target_i - initial_i).abs() <= EQUAL_INTERFERENCE_TOL {
        let mut r = BoundResult::new(1.0, BoundMethod::InterferenceTangle);
        r.trivial = true;
        return Ok(r);
    }

    let upper = target_i > initial_i;
    let a_max = if upper { 1.0 - 1e-12 } else { 1.0 };
    let objective = |a: f64| {
        let x = stopping_interference(initial_i, target_i, a);
        bar_p_s(initial_i, target_i, target_tangle, x).map_or(f64::INFINITY, |b| b.pbar)
    };
    let step = 1.0 / GRID_POINTS as f64;
    let grid: Vec<f64> =
        (0..GRID_POINTS).map(|k| if upper { k as f64 * step } else { k as f64 / (GRID_POINTS - 1) as f64 }).collect();
    let (k_best, _) =
        grid.iter()
            .map(|&a| objective(a))
            .enumerate()
            .fold((0, f64::INFINITY), |best, (k, v)| if v < best.1 { (k, v) } else { best });
    let lo = grid[k_best.saturating_sub(1)];
    let hi = grid.get(k_best + 1).copied().unwrap_or(a_max).min(a_max);
    let (a_star, _) = golden_section_min(objective, lo, hi, GOLDEN_TOL);
    let x = stopping_interference(initial_i, target_i, a_star);
    let parts = bar_p_s(initial_i, target_i, target_tangle, x)?;

    let mut r = BoundResult::new(parts.pbar, BoundMethod::InterferenceTangle)
        .with("p_as", parts.p_as)
        .with("p_u", parts.p_u)
        .with("p_m", parts.p_m)
        .with("a", a_star)
        .with("initial_interference", initial_i)
        .with("target_interference", target_i)
        .with("target_tangle", target_tangle);
    r.argmin_x = Some(x);
    Ok(r)
}

/// `min(1, τ_initial / τ_target)`: 3-tangle cannot grow on average.
pub fn tangle_ratio_bound(initial_tangle: f64, target_tangle: f64) -> Result<BoundResult> {
    if !(target_tangle > 0.0) {
        return Err(Error::NotGhzClass(format!("target 3-tangle {target_tangle} is not positive")));
    }
    Ok(BoundResult::new((initial_tangle / target_tangle).min(1.0), BoundMethod::TangleRatio)
        .with("initial_tangle", initial_tangle)
        .with("target_tangle", target_tangle))
}

/// Starting point of a conversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Initial {
    Ghz,
    Form(GhzClassForm),
}

impl Initial {
    pub fn is_ghz(&self) -> bool {
        match self {
            Self::Ghz => true,
            Self::Form(f) => f.is_ghz_point(),
        }
    }

    pub fn interference(&self) -> f64 {
        match self {
            Self::Ghz => 0.0,
            Self::Form(f) => interference_ghz_form(f),
        }
    }

    pub fn tangle(&self) -> f64 {
        match self {
            Self::Ghz => 1.0,
            Self::Form(f) => three_tangle_ghz_form(f),
        }
    }
}

/// Every applicable upper bound, in a fixed order.
pub fn upper_bounds(initial: &Initial, target: &GhzClassForm) -> Result<Vec<BoundResult>> {
    let target_i = interference_ghz_form(target);
    let target_tau = three_tangle_ghz_form(target);
    let mut out = Vec::with_capacity(3);
    if initial.is_ghz() {
        out.push(upper_bound_theorem1(target));
    }
    out.push(upper_bound_interference_tangle(initial.interference(), target_i, target_tau)?);
    out.push(tangle_ratio_bound(initial.tangle(), target_tau)?);
    Ok(out)
}

/// Smallest of [`upper_bounds`]; ties keep the earlier method.
pub fn best_upper_bound(initial: &Initial, target: &GhzClassForm) -> Result<BoundResult> {
    let all = upper_bounds(initial, target)?;
    Ok(all.into_iter().reduce(|best, r| if r.value < best.value { r } else { best }).expect("at least two bounds"))
}
