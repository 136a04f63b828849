//! Constructive protocols from the generalized GHZ state, each returned as a
//! [`ProtocolTree`] together with its closed-form success probability.
//!
//! All protocols share one skeleton. The coefficients are equalized first.
//! Each non-final party then applies a sign-pattern POVM that writes its
//! target vectors into the terms; the sign left by an outcome is undone by a
//! diagonal unitary on the final party, which still holds the computational
//! basis. The final party finishes either deterministically, repairing signs
//! with reflections on witness parties, or probabilistically with a single
//! filtering POVM.

mod target;

pub use target::{TargetSpec, Term};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, diagonal, real, CMatrix, C64, ONE, ZERO};
use crate::locc_sim::{run_protocol, BranchLabel, LocalOperator, Measurement, ProtocolTree};
use crate::states::{acin_decompose, LocalVector, PureState, TwoTermDecomposition};

/// Overlap magnitude treated as exact orthogonality.
pub const ORTHOGONAL_TOL: f64 = 1e-10;
/// Overlap with the target required of a success leaf.
pub const SUCCESS_TOL: f64 = 1e-9;

/// Lower-bound protocol plus the numbers it achieves.
#[derive(Debug, Clone)]
pub struct LowerBoundReport {
    pub closed_form: f64,
    pub simulated: f64,
    /// The printed one-round baseline; only defined for equal-weight,
    /// zero-phase tripartite targets.
    pub baseline: Option<f64>,
    /// Success probability of the one-round baseline POVM, by simulation.
    pub baseline_simulated: Option<f64>,
    pub final_party: usize,
    pub protocol: ProtocolTree,
}

/// Summary of the n-party orthogonality test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orthogonality {
    pub satisfied: bool,
    /// The one term allowed to have no witness.
    pub exempt_term: Option<usize>,
    /// For each term, a party whose vector is orthogonal to that party's
    /// vector in every other (nonzero) term.
    pub witnesses: Vec<Option<usize>>,
}

/// One-round baseline `(1 + c_α c_β c_γ)³ / ((1+c_α)(1+c_β)(1+c_γ))`.
pub fn chitambar_baseline(overlaps: [f64; 3]) -> Result<f64> {
    for &o in &overlaps {
        if !(0.0..1.0).contains(&o) {
            return Err(Error::Domain { name: "overlap", value: o, range: "[0, 1)" });
        }
    }
    let prod: f64 = overlaps.iter().product();
    let den: f64 = overlaps.iter().map(|o| 1.0 + o).product();
    Ok((1.0 + prod).powi(3) / den)
}

/// Equalization followed by one filtering POVM `{K_j/‖K_j‖, √(1 − K_j†K_j/‖K_j‖²)}`
/// on every party, where `K_j` maps `|i⟩` to the party's vector in term `i`.
pub fn chitambar_protocol(target: &TwoTermDecomposition) -> Result<ProtocolTree> {
    let spec = TargetSpec::from_two_term(target)?;
    let mut tree = ProtocolTree::Leaf;
    for party in (0..spec.parties()).rev() {
        let ops = filter_pair(&spec.party_matrix(party))?;
        let mut node = ProtocolTree::measure(Measurement::new(party, ops)?);
        if let ProtocolTree::Node(n) = &mut node {
            n.children[0] = tree;
        }
        tree = node;
    }
    Ok(equalize_coefficients(spec.parties(), spec.coefficients())?.then(&tree))
}

/// Deterministic conversion of `(1/√m) Σ|i…i⟩` into `Σ cᵢ|i…i⟩`.
///
/// Party 0 measures `M_k = diag(c_{(i+k) mod m})`; outcome `k` is followed by
/// the cyclic relabeling `|i⟩ → |i+k mod m⟩` on every party.
pub fn equalize_coefficients(parties: usize, coeffs: &[C64]) -> Result<ProtocolTree> {
    let m = coeffs.len();
    if m < 2 {
        return Err(Error::Precondition(format!("need at least two terms, got {m}")));
    }
    if parties == 0 {
        return Err(Error::Precondition("need at least one party".into()));
    }
    let norm: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition(format!("coefficients have squared norm {norm}")));
    }
    let ops: Vec<CMatrix> =
        (0..m).map(|k| diagonal(&(0..m).map(|i| coeffs[(i + k) % m]).collect::<Vec<_>>())).collect();
    let corrections = (0..m)
        .map(|k| {
            if k == 0 {
                return Vec::new();
            }
            let shift = CMatrix::from_fn(m, m, |r, col| if r == (col + k) % m { ONE } else { ZERO });
            (0..parties).map(|p| LocalOperator::new(p, shift.clone())).collect()
        })
        .collect();
    ProtocolTree::measure_with(Measurement::new(0, ops)?, corrections)
}

/// Sign pattern `s ∈ {+1} × {±1}^{m−1}` with index `idx`.
fn signs(m: usize, idx: usize) -> Vec<f64> {
    (0..m).map(|i| if i > 0 && (idx >> (i - 1)) & 1 == 1 { -1.0 } else { 1.0 }).collect()
}

/// `{(1/√2^{m−1}) Σᵢ sᵢ |kᵢ⟩⟨i|}` over all sign patterns; complete whenever
/// the columns `kᵢ` are unit vectors.
pub fn sign_pattern_povm(columns: &CMatrix) -> Vec<CMatrix> {
    let m = columns.ncols();
    let scale = 1.0 / ((1usize << (m - 1)) as f64).sqrt();
    (0..1usize << (m - 1))
        .map(|idx| {
            let s = signs(m, idx);
            CMatrix::from_fn(columns.nrows(), m, |r, i| columns[(r, i)] * (scale * s[i]))
        })
        .collect()
}

/// Equalization plus sign-pattern rounds on every party except `final_party`.
fn distribute(spec: &TargetSpec, final_party: usize) -> Result<ProtocolTree> {
    let m = spec.terms().len();
    let mut tree = equalize_coefficients(spec.parties(), spec.coefficients())?;
    for party in (0..spec.parties()).filter(|&p| p != final_party) {
        let ops = sign_pattern_povm(&spec.party_matrix(party));
        let corrections = (0..ops.len())
            .map(|idx| {
                if idx == 0 {
                    Vec::new()
                } else {
                    let s: Vec<C64> = signs(m, idx).into_iter().map(real).collect();
                    vec![LocalOperator::new(final_party, diagonal(&s))]
                }
            })
            .collect();
        let round = ProtocolTree::measure_with(Measurement::new(party, ops)?, corrections)?;
        tree = tree.then(&round);
    }
    Ok(tree)
}

/// `{K/‖K‖, √(1 − K†K/‖K‖²)}`, dropping the second operator when it vanishes.
fn filter_pair(k: &CMatrix) -> Result<Vec<CMatrix>> {
    let norm = linalg::operator_norm(k);
    if norm <= 0.0 {
        return Err(Error::Precondition("zero filtering operator".into()));
    }
    let first = k * real(1.0 / norm);
    let rest = linalg::identity(k.ncols()) - first.adjoint() * &first;
    let second = linalg::psd_sqrt(&rest);
    Ok(if linalg::max_abs(&second) < 1e-14 { vec![first] } else { vec![first, second] })
}

/// Checks the sufficient condition for a deterministic protocol: all terms
/// but one have a party whose vector is orthogonal to that party's vector in
/// every other term. Zero-coefficient terms are ignored.
pub fn orthogonality_condition(spec: &TargetSpec) -> Orthogonality {
    let terms = spec.terms();
    let live: Vec<bool> = spec.coefficients().iter().map(|c| c.norm() > 1e-14).collect();
    let witnesses: Vec<Option<usize>> = (0..terms.len())
        .map(|i| {
            (0..spec.parties()).find(|&j| {
                (0..terms.len())
                    .filter(|&l| l != i && live[l])
                    .all(|l| linalg::inner(&terms[i].vectors[j], &terms[l].vectors[j]).norm() < ORTHOGONAL_TOL)
            })
        })
        .collect();
    let missing: Vec<usize> = (0..terms.len()).filter(|&i| live[i] && witnesses[i].is_none()).collect();
    let (satisfied, exempt_term) = match missing.as_slice() {
        [] => (true, Some(0)),
        [p] => (true, Some(*p)),
        _ => (false, None),
    };
    Orthogonality { satisfied, exempt_term, witnesses }
}

/// Deterministic protocol from the `m`-level GHZ state when the
/// orthogonality condition holds.
pub fn nparty_orthogonal_protocol(spec: &TargetSpec) -> Result<ProtocolTree> {
    nparty_orthogonal_with_final(spec, 0)
}

fn nparty_orthogonal_with_final(spec: &TargetSpec, final_party: usize) -> Result<ProtocolTree> {
    let cond = orthogonality_condition(spec);
    let Some(exempt) = cond.exempt_term.filter(|_| cond.satisfied) else {
        return Err(Error::Precondition(
            "orthogonality condition fails: more than one term lacks a witness party".into(),
        ));
    };
    if final_party >= spec.parties() {
        return Err(Error::PartyIndex { index: final_party, parties: spec.parties() });
    }
    let m = spec.terms().len();
    let live: Vec<bool> = spec.coefficients().iter().map(|c| c.norm() > 1e-14).collect();
    let ops = sign_pattern_povm(&spec.party_matrix(final_party));
    let corrections = (0..ops.len())
        .map(|idx| {
            let s = signs(m, idx);
            (0..m)
                .filter(|&i| i != exempt && live[i] && s[i] != s[exempt])
                .map(|i| {
                    let w = cond.witnesses[i].expect("every non-exempt live term has a witness");
                    let v = &spec.terms()[i].vectors[w];
                    let reflection = linalg::identity(v.len())
                        - CMatrix::from_fn(v.len(), v.len(), |r, col| v[r] * v[col].conj() * 2.0);
                    LocalOperator::new(w, reflection)
                })
                .collect()
        })
        .collect();
    let last = ProtocolTree::measure_with(Measurement::new(final_party, ops)?, corrections)?;
    Ok(distribute(spec, final_party)?.then(&last))
}

/// Deterministic protocol for a two-term target with an orthogonal party.
pub fn orthogonal_two_term_protocol(target: &TwoTermDecomposition) -> Result<ProtocolTree> {
    let party = target.local_overlaps().iter().position(|k| k.norm() < ORTHOGONAL_TOL).ok_or_else(|| {
        Error::Precondition("no party has orthogonal term vectors; use the four-step protocol".into())
    })?;
    nparty_orthogonal_with_final(&TargetSpec::from_two_term(target)?, party)
}

/// Closed form `(1 + I/N) / (1 + |⟨a_f|b_f⟩|)` of the four-step protocol.
pub fn four_step_probability(target: &TwoTermDecomposition, party: usize) -> Result<f64> {
    let overlaps = target.local_overlaps();
    let lambda = overlaps.get(party).ok_or(Error::PartyIndex { index: party, parties: overlaps.len() })?.norm();
    Ok((1.0 + target.interference() / target.normalization()) / (1.0 + lambda))
}

/// The four-step protocol: equalize, write the non-final parties' vectors,
/// then filter on the party with the smallest local overlap.
pub fn four_step_protocol(target: &TwoTermDecomposition, party: Option<usize>) -> Result<LowerBoundReport> {
    let overlaps: Vec<f64> = target.local_overlaps().iter().map(|k| k.norm()).collect();
    if let Some(j) = overlaps.iter().position(|&l| l >= 1.0 - 1e-12) {
        return Err(Error::NotGhzClass(format!("terms coincide on party {j}")));
    }
    let f = match party {
        Some(p) if p >= overlaps.len() => return Err(Error::PartyIndex { index: p, parties: overlaps.len() }),
        Some(p) => p,
        None => (0..overlaps.len()).min_by(|&a, &b| overlaps[a].total_cmp(&overlaps[b])).expect("at least one party"),
    };
    let spec = TargetSpec::from_two_term(target)?;
    let tree = distribute(&spec, f)?.then(&ProtocolTree::measure(Measurement::new(f, four_step_filter(target, f))?));
    let closed_form = four_step_probability(target, f)?;
    let simulated = simulate_success(&spec, &tree)?;

    let baseline = equal_weight_overlaps(target).map(chitambar_baseline).transpose()?;
    let baseline_simulated =
        if target.parties() == 3 { Some(simulate_success(&spec, &chitambar_protocol(target)?)?) } else { None };
    Ok(LowerBoundReport { closed_form, simulated, baseline, baseline_simulated, final_party: f, protocol: tree })
}

/// `M₁ = K/√(1+λ)` and `M₂ = √(λ/(1+λ)) |a_f⟩(1, −e^{iθ})` with
/// `λe^{iθ} = ⟨a_f|b_f⟩`.
fn four_step_filter(target: &TwoTermDecomposition, f: usize) -> Vec<CMatrix> {
    let a = &target.term_a()[f];
    let b = &target.term_b()[f];
    let k = linalg::inner(a, b);
    let lambda = k.norm();
    let phase = if lambda > 0.0 { k / lambda } else { ONE };
    let m1 = linalg::matrix_from_columns(a.len(), &[a.clone(), b.clone()]) * real(1.0 / (1.0 + lambda).sqrt());
    if lambda < 1e-15 {
        return vec![m1];
    }
    let row = [ONE, -phase];
    let scale = (lambda / (1.0 + lambda)).sqrt();
    let m2 = CMatrix::from_fn(a.len(), 2, |r, col| a[r] * row[col] * scale);
    vec![m1, m2]
}

/// Overlaps `(c_A, c_B, c_C)` when the target is an equal-weight, zero-phase
/// three-party state, the family the printed baseline refers to.
fn equal_weight_overlaps(target: &TwoTermDecomposition) -> Option<[f64; 3]> {
    if target.parties() != 3 {
        return None;
    }
    let (a, b) = (target.coeff_a(), target.coeff_b());
    let z = a.conj() * b * target.overlap();
    let equal = (a.norm() - b.norm()).abs() < 1e-9;
    let real_positive = z.norm() < 1e-15 || (z.im.abs() < 1e-9 * z.norm() && z.re > 0.0);
    let o = target.local_overlaps();
    (equal && real_positive).then(|| [o[0].norm(), o[1].norm(), o[2].norm()])
}

/// Runs `tree` from the matching GHZ state; returns the success probability.
fn simulate_success(spec: &TargetSpec, tree: &ProtocolTree) -> Result<f64> {
    let mut trace = run_protocol(&spec.initial_state(), tree)?;
    trace.label_against(&spec.to_state(), SUCCESS_TOL);
    Ok(trace.probability_of(BranchLabel::Success))
}

/// Lower bound `max_f 1/(γ²‖K_f‖²)`, where `K_f` has the final party's
/// term vectors as columns and the coefficients are normalized to unit ℓ².
///
/// Parties whose term vectors are linearly dependent are skipped.
pub fn general_lower_bound(spec: &TargetSpec) -> Result<LowerBoundReport> {
    let gamma_sq = spec.gamma() * spec.gamma();
    let mut best: Option<(usize, f64)> = None;
    for f in 0..spec.parties() {
        let Some(tri) = spec.triangular_matrix(f) else { continue };
        let norm = linalg::operator_norm(&tri);
        let p = 1.0 / (gamma_sq * norm * norm);
        if best.is_none_or(|(_, b)| p > b) {
            best = Some((f, p));
        }
    }
    let Some((f, closed_form)) = best else {
        return Err(Error::Precondition("term vectors are linearly dependent at every party".into()));
    };
    let filter = filter_pair(&spec.party_matrix(f))?;
    let tree = distribute(spec, f)?.then(&ProtocolTree::measure(Measurement::new(f, filter)?));
    let simulated = simulate_success(spec, &tree)?;
    Ok(LowerBoundReport {
        closed_form: closed_form.min(1.0),
        simulated,
        baseline: None,
        baseline_simulated: None,
        final_party: f,
        protocol: tree,
    })
}

/// Regroups any three-qubit state into three product terms meeting the
/// orthogonality condition, starting from its generalized Schmidt form.
pub fn ghz3_terms(target: &PureState) -> Result<TargetSpec> {
    let acin = acin_decompose(target)?;
    let l = acin.lambdas;
    let mu = l[1] * l[1] + l[2] * l[2];
    let w = if mu > 1e-24 {
        let n = mu.sqrt();
        let w0 = C64::from_polar(l[1], acin.phase) / n;
        let w1 = real(l[2] / n);
        CMatrix::from_row_slice(2, 2, &[w0.conj(), w1.conj(), -w1, w0])
    } else {
        linalg::identity(2)
    };
    let canonical = acin.canonical_state();
    let psi = canonical.apply_local_unitaries(&[linalg::identity(2), linalg::identity(2), w.clone()])?;
    let a = |i, j, k| psi.amplitude(&[i, j, k]);
    let stray = [a(0, 1, 0), a(0, 1, 1), a(1, 0, 1)].iter().map(|z| z.norm()).fold(0.0, f64::max);
    if stray > 1e-10 {
        return Err(Error::Numerical(format!("regrouping left weight {stray:e} outside the terms")));
    }
    let e0: LocalVector = vec![ONE, ZERO];
    let e1: LocalVector = vec![ZERO, ONE];
    let split = |v: LocalVector| -> (C64, LocalVector) {
        let n = linalg::vec_norm(&v);
        if n < 1e-14 {
            (ZERO, vec![ONE, ZERO])
        } else {
            (real(n), v.into_iter().map(|z| z / n).collect())
        }
    };
    let (c0, v0) = split(vec![a(0, 0, 0), a(0, 0, 1)]);
    let (c2, v2) = split(vec![a(1, 1, 0), a(1, 1, 1)]);
    let c1 = a(1, 0, 0);
    let raw =
        [(c0, [e0.clone(), e0.clone(), v0]), (c1, [e1.clone(), e0.clone(), e0.clone()]), (c2, [e1.clone(), e1, v2])];
    // Push the local unitaries into the term vectors.
    let u = &acin.local_unitaries;
    let locals = [u[0].clone(), u[1].clone(), &u[2] * w.adjoint()];
    let terms = raw
        .into_iter()
        .map(|(coeff, vecs)| Term {
            coeff,
            vectors: vecs.iter().zip(&locals).map(|(v, m)| linalg::mat_vec(m, v)).collect(),
        })
        .collect();
    TargetSpec::padded(terms)
}

/// Deterministic conversion from `(|000⟩+|111⟩+|222⟩)/√3` to any three-qubit state.
pub fn ghz3_to_any_3qubit(target: &PureState) -> Result<ProtocolTree> {
    nparty_orthogonal_protocol(&ghz3_terms(target)?)
}
