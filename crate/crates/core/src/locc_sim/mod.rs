//! Exact simulation of tensor-product Kraus branches and multi-round
//! protocols, with the verifiers for completeness, the two conservation laws,
//! branch classification and success-branch structure.

mod json;
mod stop;

pub use json::{protocol_from_json, protocol_to_json, trace_from_json, trace_to_json};
pub use stop::{stop_and_reconstruct, StopReconstruct};

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::states::{
    apply_local, equal_up_to_global_phase, numeric_rank, reduced_density, LocalVector, PureState, TwoTermDecomposition,
    RANK_TOL,
};

/// Completeness tolerance for measurements.
pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Branches at or below this probability are not followed further.
pub const ZERO_PROBABILITY: f64 = 1e-14;

/// An operator acting on a single party.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperator {
    pub party: usize,
    pub matrix: CMatrix,
}

impl LocalOperator {
    pub fn new(party: usize, matrix: CMatrix) -> Self {
        Self { party, matrix }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchLabel {
    Success,
    Failure,
    Undecided,
    Unlabeled,
}

impl fmt::Display for BranchLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Success => "success",
            Self::Failure => "failure",
            Self::Undecided => "undecided",
            Self::Unlabeled => "unlabeled",
        })
    }
}

/// `O = O_0 ⊗ O_1 ⊗ … ⊗ O_{n-1}`, one operator per party.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausBranch {
    pub operators: Vec<CMatrix>,
    pub label: BranchLabel,
}

impl KrausBranch {
    pub fn new(operators: Vec<CMatrix>) -> Self {
        Self { operators, label: BranchLabel::Unlabeled }
    }

    pub fn identity(dims: &[usize]) -> Self {
        Self::new(dims.iter().map(|&d| linalg::identity(d)).collect())
    }

    /// Identity everywhere except `matrix` on `party`.
    pub fn local(dims: &[usize], party: usize, matrix: CMatrix) -> Result<Self> {
        if party >= dims.len() {
            return Err(Error::PartyIndex { index: party, parties: dims.len() });
        }
        let mut b = Self::identity(dims);
        b.operators[party] = matrix;
        Ok(b)
    }

    pub fn parties(&self) -> usize {
        self.operators.len()
    }

    /// Left-multiplies `op` onto the operator of its party.
    fn then(&mut self, op: &LocalOperator) -> Result<()> {
        let current =
            self.operators.get(op.party).ok_or(Error::PartyIndex { index: op.party, parties: self.operators.len() })?;
        if op.matrix.ncols() != current.nrows() {
            return Err(Error::Shape(format!(
                "operator with {} columns after party {} output of dimension {}",
                op.matrix.ncols(),
                op.party,
                current.nrows()
            )));
        }
        self.operators[op.party] = &op.matrix * current;
        Ok(())
    }

    /// Image of a product vector, party by party.
    pub fn apply_product(&self, vectors: &[LocalVector]) -> Result<Vec<LocalVector>> {
        if vectors.len() != self.operators.len() {
            return Err(Error::Shape(format!(
                "{} local vectors for a {}-party branch",
                vectors.len(),
                self.operators.len()
            )));
        }
        self.operators
            .iter()
            .zip(vectors)
            .enumerate()
            .map(|(j, (m, v))| {
                if m.ncols() != v.len() {
                    Err(Error::Shape(format!(
                        "party {j}: operator has {} columns, vector has {} entries",
                        m.ncols(),
                        v.len()
                    )))
                } else {
                    Ok(linalg::mat_vec(m, v))
                }
            })
            .collect()
    }
}

/// A measurement performed by one party.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub party: usize,
    pub operators: Vec<CMatrix>,
}

impl Measurement {
    pub fn new(party: usize, operators: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = operators.first() else {
            return Err(Error::Shape("measurement needs at least one operator".into()));
        };
        let d_in = first.ncols();
        if operators.iter().any(|m| m.ncols() != d_in || m.nrows() == 0) {
            return Err(Error::Shape("measurement operators act on different spaces".into()));
        }
        Ok(Self { party, operators })
    }

    pub fn input_dim(&self) -> usize {
        self.operators[0].ncols()
    }

    /// Full tensor branches with identities on the other parties.
    pub fn branches(&self, dims: &[usize]) -> Result<Vec<KrausBranch>> {
        self.operators.iter().map(|m| KrausBranch::local(dims, self.party, m.clone())).collect()
    }
}

/// `max |Σ O†O − 1|` over entries.
pub fn check_completeness(m: &Measurement) -> f64 {
    let d = m.input_dim();
    let sum = m.operators.iter().fold(CMatrix::zeros(d, d), |acc, o| acc + o.adjoint() * o);
    linalg::max_abs(&(sum - linalg::identity(d)))
}

/// Completeness residual of a set of full tensor branches.
pub fn branch_set_completeness(branches: &[KrausBranch]) -> Result<f64> {
    let Some(first) = branches.first() else {
        return Err(Error::Shape("empty branch set".into()));
    };
    let dims: Vec<usize> = first.operators.iter().map(|m| m.ncols()).collect();
    let total: usize = dims.iter().product();
    let mut sum = CMatrix::zeros(total, total);
    for b in branches {
        let in_dims: Vec<usize> = b.operators.iter().map(|m| m.ncols()).collect();
        if in_dims != dims {
            return Err(Error::Shape("branches act on different input spaces".into()));
        }
        let mut acc = CMatrix::from_element(1, 1, linalg::ONE);
        for m in &b.operators {
            acc = acc.kronecker(&(m.adjoint() * m));
        }
        sum += acc;
    }
    Ok(linalg::max_abs(&(sum - linalg::identity(total))))
}

/// Result of applying one branch to a state.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchOutcome {
    pub probability: f64,
    /// `None` when the probability is at or below [`ZERO_PROBABILITY`].
    pub state: Option<PureState>,
}

pub fn apply_branch(state: &PureState, branch: &KrausBranch) -> Result<BranchOutcome> {
    if branch.parties() != state.parties() {
        return Err(Error::Shape(format!("{}-party branch on a {}-party state", branch.parties(), state.parties())));
    }
    let mut dims = state.dims().to_vec();
    let mut amps = state.amplitudes().to_vec();
    for (party, m) in branch.operators.iter().enumerate() {
        (dims, amps) = apply_local(&dims, &amps, party, m)?;
    }
    let probability = amps.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let state = if probability > ZERO_PROBABILITY { Some(PureState::new(dims, amps)?) } else { None };
    Ok(BranchOutcome { probability, state })
}

/// A node measures, then each outcome applies its corrections and continues
/// with the matching child.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolNode {
    pub measurement: Measurement,
    pub children: Vec<ProtocolTree>,
    pub corrections: Vec<Vec<LocalOperator>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProtocolTree {
    Leaf,
    Node(Box<ProtocolNode>),
}

impl ProtocolTree {
    /// A single measurement whose outcomes all end in leaves.
    pub fn measure(measurement: Measurement) -> Self {
        let n = measurement.operators.len();
        Self::Node(Box::new(ProtocolNode {
            measurement,
            children: vec![Self::Leaf; n],
            corrections: vec![Vec::new(); n],
        }))
    }

    /// Like [`ProtocolTree::measure`] with per-outcome corrections.
    pub fn measure_with(measurement: Measurement, corrections: Vec<Vec<LocalOperator>>) -> Result<Self> {
        let n = measurement.operators.len();
        if corrections.len() != n {
            return Err(Error::Shape(format!("{} correction lists for {n} outcomes", corrections.len())));
        }
        Ok(Self::Node(Box::new(ProtocolNode { measurement, children: vec![Self::Leaf; n], corrections })))
    }

    /// A one-outcome node that applies local unitaries deterministically.
    pub fn unitary(ops: Vec<LocalOperator>) -> Result<Self> {
        let Some(first) = ops.first() else {
            return Ok(Self::Leaf);
        };
        let d = first.matrix.ncols();
        let m = Measurement::new(first.party, vec![linalg::identity(d)])?;
        Self::measure_with(m, vec![ops])
    }

    /// Grafts `next` onto every leaf.
    pub fn then(self, next: &ProtocolTree) -> ProtocolTree {
        match self {
            Self::Leaf => next.clone(),
            Self::Node(mut node) => {
                node.children = node.children.into_iter().map(|c| c.then(next)).collect();
                Self::Node(node)
            }
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Self::Leaf)
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Self::Leaf => 1,
            Self::Node(n) => n.children.iter().map(Self::leaf_count).sum(),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Self::Leaf => 0,
            Self::Node(n) => 1 + n.children.iter().map(Self::node_count).sum::<usize>(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Self::Leaf => 0,
            Self::Node(n) => 1 + n.children.iter().map(Self::depth).max().unwrap_or(0),
        }
    }

    /// Worst completeness residual over all nodes (0 for a bare leaf).
    pub fn max_completeness_residual(&self) -> f64 {
        match self {
            Self::Leaf => 0.0,
            Self::Node(n) => n
                .children
                .iter()
                .map(Self::max_completeness_residual)
                .fold(check_completeness(&n.measurement), f64::max),
        }
    }

    /// Checks arity and completeness of every node.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Leaf => Ok(()),
            Self::Node(n) => {
                let k = n.measurement.operators.len();
                if n.children.len() != k || n.corrections.len() != k {
                    return Err(Error::Shape(format!(
                        "node with {k} outcomes has {} children and {} correction lists",
                        n.children.len(),
                        n.corrections.len()
                    )));
                }
                let residual = check_completeness(&n.measurement);
                if !(residual < COMPLETENESS_TOL) {
                    return Err(Error::Incomplete { residual, tolerance: COMPLETENESS_TOL });
                }
                n.children.iter().try_for_each(Self::validate)
            }
        }
    }
}

/// One terminal branch of an executed protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceLeaf {
    pub probability: f64,
    pub state: Option<PureState>,
    pub path: Vec<usize>,
    pub label: BranchLabel,
    /// Product of every operator applied along the path.
    pub branch: KrausBranch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionTrace {
    pub leaves: Vec<TraceLeaf>,
    pub total_probability: f64,
}

impl ExecutionTrace {
    pub fn branches(&self) -> Vec<KrausBranch> {
        self.leaves.iter().map(|l| l.branch.clone()).collect()
    }

    /// Total probability of leaves carrying `label`.
    pub fn probability_of(&self, label: BranchLabel) -> f64 {
        self.leaves.iter().filter(|l| l.label == label).map(|l| l.probability).sum()
    }

    /// Labels every leaf against `target`.
    pub fn label_against(&mut self, target: &PureState, tol: f64) {
        for leaf in &mut self.leaves {
            let label = match &leaf.state {
                Some(s) => classify_branch(s, target, tol),
                None => BranchLabel::Failure,
            };
            leaf.label = label;
            leaf.branch.label = label;
        }
    }
}

/// Executes a protocol tree exactly; nodes are validated first.
pub fn run_protocol(state: &PureState, tree: &ProtocolTree) -> Result<ExecutionTrace> {
    tree.validate()?;
    let start = KrausBranch::identity(state.dims());
    let leaves = walk(state.dims().to_vec(), state.amplitudes().to_vec(), start, Vec::new(), tree)?;
    let total_probability = leaves.iter().map(|l| l.probability).sum();
    Ok(ExecutionTrace { leaves, total_probability })
}

fn walk(
    dims: Vec<usize>,
    amps: Vec<C64>,
    branch: KrausBranch,
    path: Vec<usize>,
    tree: &ProtocolTree,
) -> Result<Vec<TraceLeaf>> {
    let probability: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    let node = match tree {
        ProtocolTree::Node(node) if probability > ZERO_PROBABILITY => node,
        _ => {
            let state = if probability > ZERO_PROBABILITY { Some(PureState::new(dims, amps)?) } else { None };
            return Ok(vec![TraceLeaf { probability, state, path, label: BranchLabel::Unlabeled, branch }]);
        }
    };
    let party = node.measurement.party;
    let per_child: Vec<Vec<TraceLeaf>> = node
        .measurement
        .operators
        .par_iter()
        .enumerate()
        .map(|(k, op)| {
            let (mut d, mut a) = apply_local(&dims, &amps, party, op)?;
            let mut b = branch.clone();
            b.then(&LocalOperator::new(party, op.clone()))?;
            for corr in &node.corrections[k] {
                (d, a) = apply_local(&d, &a, corr.party, &corr.matrix)?;
                b.then(corr)?;
            }
            let mut p = path.clone();
            p.push(k);
            walk(d, a, b, p, &node.children[k])
        })
        .collect::<Result<_>>()?;
    Ok(per_child.into_iter().flatten().collect())
}

/// Success if equal to the target up to phase, failure if some party's
/// reduced state has rank one, undecided otherwise.
pub fn classify_branch(state: &PureState, target: &PureState, tol: f64) -> BranchLabel {
    if equal_up_to_global_phase(state, target, tol).unwrap_or(false) {
        return BranchLabel::Success;
    }
    let product_cut =
        (0..state.parties()).any(|p| reduced_density(state, p).is_ok_and(|rho| numeric_rank(&rho, RANK_TOL) <= 1));
    if product_cut {
        BranchLabel::Failure
    } else {
        BranchLabel::Undecided
    }
}

/// Unnormalized `(p·I, p·N)` of one branch acting on a two-term state.
///
/// `p·I = Re(α*β⟨O a|O b⟩)` and `p·N = (|α|²‖O a‖² + |β|²‖O b‖²)/2`, so
/// `p = p·I + p·N` and zero-probability branches are handled exactly.
pub fn branch_numerators(branch: &KrausBranch, initial: &TwoTermDecomposition) -> Result<(f64, f64)> {
    let a = branch.apply_product(initial.term_a())?;
    let b = branch.apply_product(initial.term_b())?;
    let cross: C64 = a.iter().zip(&b).map(|(u, v)| linalg::inner(u, v)).product();
    let norm_a: f64 = a.iter().map(|u| linalg::vec_norm(u).powi(2)).product();
    let norm_b: f64 = b.iter().map(|v| linalg::vec_norm(v).powi(2)).product();
    let (ca, cb) = (initial.coeff_a(), initial.coeff_b());
    let pi = (ca.conj() * cb * cross).re;
    let pn = 0.5 * (ca.norm_sqr() * norm_a + cb.norm_sqr() * norm_b);
    Ok((pi, pn))
}

/// Interference term of the state left by one branch.
pub fn branch_interference(branch: &KrausBranch, initial: &TwoTermDecomposition) -> Result<f64> {
    let (pi, pn) = branch_numerators(branch, initial)?;
    let p = pi + pn;
    if p <= ZERO_PROBABILITY {
        return Err(Error::ZeroProbability);
    }
    Ok(pi / p)
}

/// `|Σ pᵢIᵢ − I_initial|`.
pub fn verify_interference_conservation(branches: &[KrausBranch], initial: &TwoTermDecomposition) -> Result<f64> {
    let mut sum = 0.0;
    for b in branches {
        sum += branch_numerators(b, initial)?.0;
    }
    Ok((sum - initial.interference()).abs())
}

/// `(|Σ pᵢNᵢ − N_initial|, max pᵢNᵢ)`.
pub fn verify_normalization_conservation(
    branches: &[KrausBranch],
    initial: &TwoTermDecomposition,
) -> Result<(f64, f64)> {
    let mut sum = 0.0;
    let mut max_weighted = f64::NEG_INFINITY;
    for b in branches {
        let pn = branch_numerators(b, initial)?.1;
        sum += pn;
        max_weighted = max_weighted.max(pn);
    }
    Ok(((sum - initial.normalization()).abs(), max_weighted))
}

/// How a success branch maps the two initial terms onto the target's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermMapping {
    Parallel,
    Swapped,
}

const STRUCTURE_TOL: f64 = 1e-9;

/// Checks that a success branch sends each initial product term onto a
/// target product term, either term-by-term or crossed.
pub fn validate_success_structure(
    branch: &KrausBranch,
    initial: &TwoTermDecomposition,
    target: &TwoTermDecomposition,
) -> Result<TermMapping> {
    let a = branch.apply_product(initial.term_a())?;
    let b = branch.apply_product(initial.term_b())?;
    let fits = |images: &[LocalVector], targets: &[LocalVector]| -> f64 {
        images.iter().zip(targets).map(|(u, v)| parallel_residual(u, v)).fold(0.0, f64::max)
    };
    let parallel = fits(&a, target.term_a()).max(fits(&b, target.term_b()));
    let swapped = fits(&a, target.term_b()).max(fits(&b, target.term_a()));
    if parallel < STRUCTURE_TOL {
        Ok(TermMapping::Parallel)
    } else if swapped < STRUCTURE_TOL {
        Ok(TermMapping::Swapped)
    } else {
        Err(Error::StructuralViolation(parallel.min(swapped)))
    }
}

/// Relative distance of `u` from the line through unit vector `v`; a zero
/// image counts as a complete miss.
fn parallel_residual(u: &[C64], v: &[C64]) -> f64 {
    let n = linalg::vec_norm(u);
    if n < 1e-12 || u.len() != v.len() {
        return f64::INFINITY;
    }
    let proj = linalg::inner(v, u);
    let rest: Vec<C64> = u.iter().zip(v).map(|(x, y)| x - proj * y).collect();
    linalg::vec_norm(&rest) / n
}
