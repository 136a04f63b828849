use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use slocc_core::bounds::Initial;
use slocc_core::io::{state_from_json, target_from_json};
use slocc_core::linalg;
use slocc_core::measures::three_tangle_ghz_form;
use slocc_core::protocols::TargetSpec;
use slocc_core::states::{ghz_form_from_two_term, two_term_from_state, GhzClassForm, PureState, TwoTermDecomposition};

use crate::DEFAULT_SEED;

/// Targets with a smaller 3-tangle are treated as outside the GHZ class.
pub const MIN_TANGLE: f64 = 1e-9;

#[derive(Args, Clone)]
pub struct TargetArgs {
    /// Equal local overlaps on all three parties.
    #[arg(long, conflicts_with_all = ["target_overlaps", "target"])]
    pub sym_overlap: Option<f64>,
    /// Local overlaps `a,b,c` of the three parties.
    #[arg(long, value_delimiter = ',', conflicts_with = "target")]
    pub target_overlaps: Option<Vec<f64>>,
    /// State or term-list JSON, or `random` for a Haar-random three-qubit state.
    #[arg(long)]
    pub target: Option<String>,
    /// Relative phase; accepts numbers and forms like `pi`, `2pi/3`, `-pi/4`.
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "0")]
    pub phi: f64,
    /// Weight angle of the first term.
    #[arg(long, value_parser = parse_angle, default_value = "pi/4")]
    pub delta: f64,
}

#[derive(Args, Clone)]
pub struct InitialArgs {
    /// Local overlaps `a,b,c` of the initial state; GHZ when omitted.
    #[arg(long, value_delimiter = ',', conflicts_with = "initial")]
    pub overlaps: Option<Vec<f64>>,
    /// Relative phase of the initial state.
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "0")]
    pub initial_phi: f64,
    #[arg(long, value_parser = parse_angle, default_value = "pi/4")]
    pub initial_delta: f64,
    /// Initial state JSON.
    #[arg(long)]
    pub initial: Option<String>,
}

/// A target as read from the command line.
pub enum TargetInput {
    Form(GhzClassForm),
    State(PureState),
    Terms(TargetSpec),
}

pub fn parse_angle(text: &str) -> Result<f64, String> {
    let t = text.trim().to_ascii_lowercase().replace(['π'], "pi");
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().map_err(|_| format!("bad angle `{text}`"))?),
        None => (t.as_str(), 1.0),
    };
    let Some(factor) = num.strip_suffix("pi") else {
        return Err(format!("bad angle `{text}`"));
    };
    let factor = match factor.trim().trim_end_matches('*') {
        "" | "+" => 1.0,
        "-" => -1.0,
        f => f.parse::<f64>().map_err(|_| format!("bad angle `{text}`"))?,
    };
    Ok(factor * PI / den)
}

/// `SLOCC_SEED` wins over `--seed`; decimal or `0x` hex.
pub fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    match std::env::var("SLOCC_SEED") {
        Ok(v) if !v.trim().is_empty() => {
            let v = v.trim();
            let parsed = match v.strip_prefix("0x") {
                Some(hex) => u64::from_str_radix(hex, 16),
                None => v.parse(),
            };
            parsed.with_context(|| format!("SLOCC_SEED `{v}` is not an unsigned integer"))
        }
        _ => Ok(flag.unwrap_or(DEFAULT_SEED)),
    }
}

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn load_state(path: &Path) -> Result<PureState> {
    let text = read_file(path)?;
    state_from_json(&text).with_context(|| format!("in {}", path.display()))
}

pub fn haar_state(seed: u64) -> PureState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PureState::new(vec![2, 2, 2], linalg::random_unit_vector(8, &mut rng)).expect("unit vector")
}

fn three(values: &[f64], flag: &str) -> Result<[f64; 3]> {
    match values {
        &[a, b, c] => Ok([a, b, c]),
        _ => bail!("{flag} expects three comma-separated values, got {}", values.len()),
    }
}

fn wrap(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl TargetArgs {
    pub fn read(&self, seed: u64) -> Result<TargetInput> {
        if let Some(c) = self.sym_overlap {
            return Ok(TargetInput::Form(GhzClassForm::from_overlaps_delta([c; 3], self.delta, wrap(self.phi))?));
        }
        if let Some(o) = &self.target_overlaps {
            let o = three(o, "--target-overlaps")?;
            return Ok(TargetInput::Form(GhzClassForm::from_overlaps_delta(o, self.delta, wrap(self.phi))?));
        }
        match self.target.as_deref() {
            None => bail!("no target given; use --sym-overlap, --target-overlaps or --target"),
            Some("random") => Ok(TargetInput::State(haar_state(seed))),
            Some(path) => {
                let path = Path::new(path);
                let text = read_file(path)?;
                let value: Value =
                    serde_json::from_str(&text).map_err(|e| anyhow!("invalid JSON in {}: {e}", path.display()))?;
                if value.get("terms").is_some() {
                    Ok(TargetInput::Terms(target_from_json(&text)?))
                } else {
                    Ok(TargetInput::State(state_from_json(&text).with_context(|| format!("in {}", path.display()))?))
                }
            }
        }
    }

    /// The target in five-angle form, rejecting states outside the GHZ class.
    pub fn form(&self, seed: u64) -> Result<GhzClassForm> {
        let form = match self.read(seed)? {
            TargetInput::Form(f) => f,
            TargetInput::State(s) => form_of_state(&s)?,
            TargetInput::Terms(spec) => form_of_state(&spec.to_state())?,
        };
        let tau = three_tangle_ghz_form(&form);
        if tau <= MIN_TANGLE {
            bail!("target 3-tangle {tau:e} is not above {MIN_TANGLE:e}; the bounds apply only to GHZ-class targets");
        }
        Ok(form)
    }
}

pub fn form_of_state(state: &PureState) -> Result<GhzClassForm> {
    let d = two_term_from_state(state)?;
    Ok(ghz_form_from_two_term(&d)?)
}

/// Two-term decomposition of a target given in any supported form.
pub fn two_term(input: &TargetInput) -> Result<TwoTermDecomposition> {
    match input {
        TargetInput::Form(f) => Ok(slocc_core::states::two_term_of(f)),
        TargetInput::State(s) => Ok(two_term_from_state(s)?),
        TargetInput::Terms(spec) => {
            if spec.terms().len() != 2 {
                bail!("expected a two-term target, got {} terms", spec.terms().len());
            }
            let [a, b] = [&spec.terms()[0], &spec.terms()[1]];
            Ok(TwoTermDecomposition::normalized(a.coeff, b.coeff, a.vectors.clone(), b.vectors.clone())?)
        }
    }
}

impl InitialArgs {
    pub fn read(&self) -> Result<Initial> {
        if let Some(o) = &self.overlaps {
            let o = three(o, "--overlaps")?;
            return Ok(Initial::Form(GhzClassForm::from_overlaps_delta(
                o,
                self.initial_delta,
                wrap(self.initial_phi),
            )?));
        }
        match &self.initial {
            None => Ok(Initial::Ghz),
            Some(path) => Ok(Initial::Form(form_of_state(&load_state(Path::new(path))?)?)),
        }
    }
}

/// Parses `n,m` into a GHZ state of `n` parties with `m` levels.
pub fn parse_ghz(text: &str) -> Result<PureState> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [n, m] = parts.as_slice() else {
        bail!("--ghz expects `parties,levels`, got `{text}`");
    };
    let n: usize = n.parse().with_context(|| format!("bad party count `{n}`"))?;
    let m: usize = m.parse().with_context(|| format!("bad level count `{m}`"))?;
    if n < 2 || m < 2 {
        bail!("--ghz needs at least 2 parties and 2 levels");
    }
    Ok(PureState::ghz(n, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("0.5").unwrap(), 0.5);
        assert!((parse_angle("2pi/3").unwrap() - 2.0 * PI / 3.0).abs() < 1e-15);
        assert!((parse_angle("-pi/4").unwrap() + FRAC_PI_4).abs() < 1e-15);
        assert!(parse_angle("tau").is_err());
    }
}
