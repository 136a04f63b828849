use serde::{Deserialize, Serialize};

use super::{bar_p_s, X_CEILING};
use crate::error::{Error, Result};
use crate::io::format_sig;

pub const CURVE_HEADER: &str = "x,p_as,p_u,p_m,pbar_s,pU,pbar_tau,p_bound";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub x: f64,
    pub p_as: f64,
    pub p_u: f64,
    pub p_m: f64,
    pub pbar_s: f64,
    /// Failure-branch bound at this stopping point.
    pub p_upper: f64,
    /// Running minimum of `pbar_s` from the start of the sweep.
    pub pbar_tau: f64,
    pub p_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub initial_interference: f64,
    pub target_interference: f64,
    pub target_tangle: f64,
    pub records: Vec<CurveRecord>,
}

impl BoundCurve {
    /// Largest `p_bound` over the sampled records.
    pub fn max_p_bound(&self) -> f64 {
        self.records.iter().map(|r| r.p_bound).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str(CURVE_HEADER);
        out.push('\n');
        for r in &self.records {
            let fields = [r.x, r.p_as, r.p_u, r.p_m, r.pbar_s, r.p_upper, r.pbar_tau, r.p_bound];
            let line: Vec<String> = fields.iter().map(|&v| format_sig(v)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Samples the combined bound `min(p^U, running-min p̄_s)` along a grid of
/// distances `z ≥ 0` between the stopping interference and the initial one.
pub fn combined_bound_curve(initial_i: f64, target_i: f64, target_tangle: f64, z_grid: &[f64]) -> Result<BoundCurve> {
    let mut records = Vec::with_capacity(z_grid.len());
    let mut running = f64::INFINITY;
    let mut last_z = f64::NEG_INFINITY;
    for &z in z_grid {
        if !(z >= 0.0) || !z.is_finite() {
            return Err(Error::Domain { name: "z", value: z, range: "[0, ∞)" });
        }
        if z < last_z {
            return Err(Error::Precondition("z grid must be nondecreasing".into()));
        }
        last_z = z;
        let x = if target_i > initial_i { initial_i - z } else { (initial_i + z).min(X_CEILING) };
        let b = bar_p_s(initial_i, target_i, target_tangle, x)?;
        running = running.min(b.pbar);
        records.push(CurveRecord {
            x,
            p_as: b.p_as,
            p_u: b.p_u,
            p_m: b.p_m,
            pbar_s: b.pbar,
            p_upper: b.p_as,
            pbar_tau: running,
            p_bound: b.p_as.min(running),
        });
    }
    Ok(BoundCurve { initial_interference: initial_i, target_interference: target_i, target_tangle, records })
}
