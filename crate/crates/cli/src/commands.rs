use std::path::Path;

use anyhow::{anyhow, bail, Result};
use serde_json::{json, Value};
use slocc_core::bounds::{combined_bound_curve, upper_bounds, BoundMethod, BoundResult};
use slocc_core::io::{matrix_to_wire, state_to_json};
use slocc_core::linalg::C64;
use slocc_core::locc_sim::{
    protocol_from_json, protocol_to_json, run_protocol, trace_from_json, trace_to_json,
    verify_interference_conservation, verify_normalization_conservation, BranchLabel, ExecutionTrace, ProtocolTree,
};
use slocc_core::measures::{
    brute_force_max_tangle, interference_ghz_form, max_tangle_given_interference, three_tangle, three_tangle_ghz_form,
    OracleConfig,
};
use slocc_core::protocols::{
    four_step_protocol, general_lower_bound, ghz3_to_any_3qubit, orthogonal_two_term_protocol, TargetSpec, SUCCESS_TOL,
};
use slocc_core::states::{
    acin_decompose, is_ghz_class, two_term_from_state, GhzClassForm, PureState, TwoTermDecomposition,
};

use crate::inputs::{form_of_state, haar_state, load_state, parse_ghz, read_file, two_term, TargetInput};
use crate::output::{round_floats, write_file, Output};
use crate::{
    BoundArgs, CurveArgs, DecomposeArgs, LowerArgs, MethodChoice, OracleArgs, SimulateArgs, StartArgs, VerifyArgs,
};

fn rounded(mut value: Value, passed: bool) -> Output {
    round_floats(&mut value, &["trace", "state"]);
    Output::json(value, passed)
}

fn complex(z: C64) -> Value {
    json!([z.re, z.im])
}

fn form_json(form: &GhzClassForm) -> Value {
    json!({
        "delta": form.delta,
        "alpha": form.alpha,
        "beta": form.beta,
        "gamma": form.gamma,
        "phi": form.phi,
        "overlaps": form.overlaps(),
        "interference": interference_ghz_form(form),
        "tangle": three_tangle_ghz_form(form),
    })
}

fn bound_json(r: &BoundResult) -> Value {
    json!({
        "method": r.method.to_string(),
        "value": r.value,
        "argmin_x": r.argmin_x,
        "trivial": r.trivial,
        "diagnostics": r.diagnostics,
    })
}

pub fn bound(args: &BoundArgs, seed: u64) -> Result<Output> {
    let target = args.target.form(seed)?;
    let initial = args.initial.read()?;
    let all = upper_bounds(&initial, &target)?;
    let best = all.iter().reduce(|b, r| if r.value < b.value { r } else { b }).expect("at least two bounds");
    let wanted = match args.method {
        MethodChoice::Best => best.method,
        MethodChoice::Theorem1 => BoundMethod::Theorem1,
        MethodChoice::InterferenceTangle => BoundMethod::InterferenceTangle,
        MethodChoice::TangleRatio => BoundMethod::TangleRatio,
    };
    let chosen = all
        .iter()
        .find(|r| r.method == wanted)
        .ok_or_else(|| anyhow!("the {wanted} bound applies only when starting from the GHZ state"))?;
    Ok(rounded(
        json!({
            "target": form_json(&target),
            "initial": { "interference": initial.interference(), "tangle": initial.tangle() },
            "method": chosen.method.to_string(),
            "value": chosen.value,
            "argmin_x": chosen.argmin_x,
            "best": { "method": best.method.to_string(), "value": best.value },
            "bounds": all.iter().map(bound_json).collect::<Vec<_>>(),
        }),
        true,
    ))
}

fn success_probability(initial: &PureState, tree: &ProtocolTree, target: &PureState) -> Result<f64> {
    let mut trace = run_protocol(initial, tree)?;
    trace.label_against(target, SUCCESS_TOL);
    Ok(trace.probability_of(BranchLabel::Success))
}

pub fn lower(args: &LowerArgs, seed: u64) -> Result<Output> {
    let input = args.target.read(seed)?;
    let (method, report) = if args.ghz3 {
        let state = match &input {
            TargetInput::Form(f) => f.to_state(),
            TargetInput::State(s) => s.clone(),
            TargetInput::Terms(spec) => spec.to_state(),
        };
        let tree = ghz3_to_any_3qubit(&state)?;
        let p = success_probability(&PureState::ghz(3, 3), &tree, &state)?;
        ("ghz3", json_report(1.0, p, None, None, None, &tree))
    } else if args.general {
        let spec = match &input {
            TargetInput::Terms(spec) => spec.clone(),
            other => TargetSpec::from_two_term(&two_term(other)?)?,
        };
        let r = general_lower_bound(&spec)?;
        ("general", json_report(r.closed_form, r.simulated, None, None, Some(r.final_party), &r.protocol))
    } else if args.orthogonal {
        let d = two_term(&input)?;
        let tree = orthogonal_two_term_protocol(&d)?;
        let spec = TargetSpec::from_two_term(&d)?;
        let p = success_probability(&spec.initial_state(), &tree, &d.to_state())?;
        ("orthogonal", json_report(1.0, p, None, None, None, &tree))
    } else {
        let d = two_term(&input)?;
        let r = four_step_protocol(&d, args.party)?;
        let json =
            json_report(r.closed_form, r.simulated, r.baseline, r.baseline_simulated, Some(r.final_party), &r.protocol);
        ("four_step", json)
    };
    let (mut value, tree) = report;
    value["method"] = json!(method);
    if let Some(path) = &args.protocol_out {
        write_file(path, &protocol_to_json(&tree))?;
    }
    Ok(rounded(value, true))
}

fn json_report(
    closed_form: f64,
    simulated: f64,
    baseline: Option<f64>,
    baseline_simulated: Option<f64>,
    final_party: Option<usize>,
    tree: &ProtocolTree,
) -> (Value, ProtocolTree) {
    let value = json!({
        "closed_form": closed_form,
        "simulated": simulated,
        "baseline": baseline,
        "baseline_simulated": baseline_simulated,
        "final_party": final_party,
        "leaves": tree.leaf_count(),
        "depth": tree.depth(),
    });
    (value, tree.clone())
}

fn start_state(args: &StartArgs) -> Result<PureState> {
    match &args.initial {
        Some(p) => load_state(p),
        None => parse_ghz(&args.ghz),
    }
}

/// Two-term decompositions against which conservation is checked.
///
/// A GHZ state on `m` levels is checked against every pair of its basis
/// terms; other three-qubit states against their own decomposition.
fn decompositions(state: &PureState) -> Result<Vec<TwoTermDecomposition>> {
    let dims = state.dims().to_vec();
    let m = dims[0];
    if dims.iter().all(|&d| d == m) && state.inner(&PureState::ghz(dims.len(), m))?.norm() > 1.0 - 1e-12 {
        let mut out = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                out.push(TwoTermDecomposition::basis_pair(&dims, i, j)?);
            }
        }
        return Ok(out);
    }
    if state.is_qubits(3) {
        return Ok(vec![two_term_from_state(state)?]);
    }
    Ok(Vec::new())
}

struct Conservation {
    interference: f64,
    normalization: f64,
    max_weighted_normalization: f64,
    /// Largest `pN − N_initial` over branches and decompositions.
    weighted_normalization_excess: f64,
}

fn conservation(trace: &ExecutionTrace, decomps: &[TwoTermDecomposition]) -> Result<Option<Conservation>> {
    if decomps.is_empty() {
        return Ok(None);
    }
    let branches = trace.branches();
    let mut c = Conservation {
        interference: 0.0,
        normalization: 0.0,
        max_weighted_normalization: f64::NEG_INFINITY,
        weighted_normalization_excess: f64::NEG_INFINITY,
    };
    for d in decomps {
        c.interference = c.interference.max(verify_interference_conservation(&branches, d)?);
        let (res, max_pn) = verify_normalization_conservation(&branches, d)?;
        c.normalization = c.normalization.max(res);
        c.max_weighted_normalization = c.max_weighted_normalization.max(max_pn);
        c.weighted_normalization_excess = c.weighted_normalization_excess.max(max_pn - d.normalization());
    }
    Ok(Some(c))
}

fn conservation_json(c: &Option<Conservation>) -> Value {
    match c {
        None => Value::Null,
        Some(c) => json!({
            "interference_residual": c.interference,
            "normalization_residual": c.normalization,
            "max_weighted_normalization": c.max_weighted_normalization,
        }),
    }
}

pub fn simulate(args: &SimulateArgs) -> Result<Output> {
    let tree = protocol_from_json(&read_file(&args.protocol)?)?;
    let initial = start_state(&args.start)?;
    let mut trace = run_protocol(&initial, &tree)?;
    if let Some(p) = &args.target {
        trace.label_against(&load_state(p)?, args.tol);
    }
    let cons = conservation(&trace, &decompositions(&initial)?)?;
    let trace_value: Value = serde_json::from_str(&trace_to_json(&trace))?;
    Ok(rounded(
        json!({
            "total_probability": trace.total_probability,
            "success_probability": trace.probability_of(BranchLabel::Success),
            "completeness_residual": tree.max_completeness_residual(),
            "conservation": conservation_json(&cons),
            "trace": trace_value,
        }),
        true,
    ))
}

pub fn verify(args: &VerifyArgs) -> Result<Output> {
    let text = read_file(&args.trace)?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| anyhow!("invalid JSON in {}: {e}", args.trace.display()))?;
    let trace_text = match value.get("trace") {
        Some(inner) => serde_json::to_string(inner)?,
        None => text,
    };
    let mut trace = trace_from_json(&trace_text)?;
    if let Some(p) = &args.target {
        trace.label_against(&load_state(p)?, args.tol);
    }
    let initial = start_state(&args.start)?;
    let dims_match =
        trace.leaves.iter().all(|l| l.branch.operators.iter().map(|m| m.ncols()).eq(initial.dims().iter().copied()));
    if !dims_match {
        bail!("trace operators do not act on an initial state with dims {:?}", initial.dims());
    }
    let total = trace.leaves.iter().map(|l| l.probability).sum::<f64>();
    let cons = conservation(&trace, &decompositions(&initial)?)?;
    let mut checks = vec![("total_probability", (total - 1.0).abs())];
    if let Some(c) = &cons {
        checks.push(("interference_conservation", c.interference));
        checks.push(("normalization_conservation", c.normalization));
        checks.push(("weighted_normalization_excess", c.weighted_normalization_excess.max(0.0)));
    }
    let passed = checks.iter().all(|(_, r)| *r <= args.tol);
    let report: Vec<Value> =
        checks.iter().map(|(name, r)| json!({ "check": name, "residual": r, "passed": *r <= args.tol })).collect();
    Ok(rounded(
        json!({
            "passed": passed,
            "tolerance": args.tol,
            "success_probability": trace.probability_of(BranchLabel::Success),
            "checks": report,
        }),
        passed,
    ))
}

pub fn curve(args: &CurveArgs, seed: u64) -> Result<Output> {
    if args.points < 2 {
        bail!("--points must be at least 2");
    }
    if !(args.z_max.is_finite() && args.z_max > 0.0) {
        bail!("--z-max must be positive");
    }
    let target = args.target.form(seed)?;
    let initial = args.initial.read()?;
    let grid: Vec<f64> = (0..args.points).map(|k| args.z_max * k as f64 / (args.points - 1) as f64).collect();
    let curve = combined_bound_curve(
        initial.interference(),
        interference_ghz_form(&target),
        three_tangle_ghz_form(&target),
        &grid,
    )?;
    Ok(Output { text: curve.to_csv(), passed: true })
}

pub fn oracle(args: &OracleArgs, seed: u64) -> Result<Output> {
    let samples: f64 =
        args.samples.trim().parse().map_err(|_| anyhow!("--samples `{}` is not a number", args.samples))?;
    if !(samples.is_finite() && samples >= 1.0 && samples.fract() == 0.0) {
        bail!("--samples must be a positive integer");
    }
    let config = OracleConfig { samples: samples as usize, seed, chunks: args.chunks };
    let closed = max_tangle_given_interference(args.interference)?.max_tangle;
    let sampled = brute_force_max_tangle(args.interference, config)?;
    let excess = sampled - closed;
    let passed = excess <= 1e-9 && closed - sampled <= args.tol;
    Ok(rounded(
        json!({
            "interference": args.interference,
            "closed_form": closed,
            "oracle": sampled,
            "gap": closed - sampled,
            "samples": config.samples,
            "chunks": config.chunks,
            "seed": seed,
            "passed": passed,
        }),
        passed,
    ))
}

pub fn decompose(args: &DecomposeArgs, seed: u64) -> Result<Output> {
    let state = if args.state == "random" { haar_state(seed) } else { load_state(Path::new(&args.state))? };
    let acin = acin_decompose(&state)?;
    let overlap = acin.reconstruct().inner(&state)?.norm();
    let l = acin.lambdas;
    let ghz_class = is_ghz_class(&state);
    let form = if ghz_class { form_of_state(&state).ok() } else { None };
    let unitaries: Vec<Value> = acin
        .local_unitaries
        .iter()
        .map(|u| serde_json::to_value(matrix_to_wire(u)).expect("matrix serializes"))
        .collect();
    let two_term_value = if ghz_class {
        two_term_from_state(&state).ok().map(|d| {
            json!({
                "coefficients": [complex(d.coeff_a()), complex(d.coeff_b())],
                "local_overlaps": d.local_overlaps().into_iter().map(complex).collect::<Vec<_>>(),
                "interference": d.interference(),
                "normalization": d.normalization(),
            })
        })
    } else {
        None
    };
    let state_value: Value = serde_json::from_str(&state_to_json(&state))?;
    Ok(rounded(
        json!({
            "state": state_value,
            "lambdas": l,
            "phase": acin.phase,
            "local_unitaries": unitaries,
            "reconstruction_residual": 1.0 - overlap,
            "tangle": three_tangle(&state)?,
            "tangle_from_lambdas": 4.0 * l[0] * l[0] * l[4] * l[4],
            "ghz_class": ghz_class,
            "two_term": two_term_value,
            "ghz_form": form.as_ref().map(form_json),
        }),
        true,
    ))
}
