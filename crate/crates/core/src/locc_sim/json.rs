use serde::{Deserialize, Serialize};

use super::{
    BranchLabel, ExecutionTrace, KrausBranch, LocalOperator, Measurement, ProtocolNode, ProtocolTree, TraceLeaf,
};
use crate::error::Result;
use crate::io::{from_wire, json_error, matrix_from_wire, matrix_to_wire, to_wire, WireComplex, WireMatrix};
use crate::states::PureState;

#[derive(Serialize, Deserialize)]
struct WireMeasurement {
    party: usize,
    operators: Vec<WireMatrix>,
}

#[derive(Serialize, Deserialize)]
struct WireLocal {
    party: usize,
    matrix: WireMatrix,
}

/// A leaf is `null`; a node carries its measurement, children and
/// per-outcome corrections.
#[derive(Serialize, Deserialize)]
struct WireTree {
    node: WireMeasurement,
    children: Vec<Option<WireTree>>,
    #[serde(default)]
    corrections: Vec<Vec<WireLocal>>,
}

fn tree_to_wire(tree: &ProtocolTree) -> Option<WireTree> {
    match tree {
        ProtocolTree::Leaf => None,
        ProtocolTree::Node(n) => Some(WireTree {
            node: WireMeasurement {
                party: n.measurement.party,
                operators: n.measurement.operators.iter().map(matrix_to_wire).collect(),
            },
            children: n.children.iter().map(tree_to_wire).collect(),
            corrections: n
                .corrections
                .iter()
                .map(|list| {
                    list.iter().map(|op| WireLocal { party: op.party, matrix: matrix_to_wire(&op.matrix) }).collect()
                })
                .collect(),
        }),
    }
}

fn tree_from_wire(w: Option<WireTree>) -> Result<ProtocolTree> {
    let Some(w) = w else {
        return Ok(ProtocolTree::Leaf);
    };
    let operators = w.node.operators.iter().map(matrix_from_wire).collect::<Result<Vec<_>>>()?;
    let measurement = Measurement::new(w.node.party, operators)?;
    let k = measurement.operators.len();
    let mut corrections = w
        .corrections
        .into_iter()
        .map(|list| {
            list.into_iter()
                .map(|op| Ok(LocalOperator::new(op.party, matrix_from_wire(&op.matrix)?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    if corrections.is_empty() {
        corrections = vec![Vec::new(); k];
    }
    let children = w.children.into_iter().map(tree_from_wire).collect::<Result<Vec<_>>>()?;
    Ok(ProtocolTree::Node(Box::new(ProtocolNode { measurement, children, corrections })))
}

pub fn protocol_to_json(tree: &ProtocolTree) -> String {
    serde_json::to_string(&tree_to_wire(tree)).expect("protocol serializes")
}

/// Parses a protocol; arity and completeness are checked when it is run.
pub fn protocol_from_json(text: &str) -> Result<ProtocolTree> {
    let w: Option<WireTree> = serde_json::from_str(text).map_err(json_error)?;
    tree_from_wire(w)
}

#[derive(Serialize, Deserialize)]
struct WireState {
    dims: Vec<usize>,
    amplitudes: Vec<WireComplex>,
}

#[derive(Serialize, Deserialize)]
struct WireLeaf {
    path: Vec<usize>,
    probability: f64,
    label: BranchLabel,
    state: Option<WireState>,
    branch: Vec<WireMatrix>,
}

#[derive(Serialize, Deserialize)]
struct WireTrace {
    total_probability: f64,
    leaves: Vec<WireLeaf>,
}

pub fn trace_to_json(trace: &ExecutionTrace) -> String {
    let w = WireTrace {
        total_probability: trace.total_probability,
        leaves: trace
            .leaves
            .iter()
            .map(|l| WireLeaf {
                path: l.path.clone(),
                probability: l.probability,
                label: l.label,
                state: l.state.as_ref().map(|s| WireState {
                    dims: s.dims().to_vec(),
                    amplitudes: s.amplitudes().iter().map(|&z| to_wire(z)).collect(),
                }),
                branch: l.branch.operators.iter().map(matrix_to_wire).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&w).expect("trace serializes")
}

pub fn trace_from_json(text: &str) -> Result<ExecutionTrace> {
    let w: WireTrace = serde_json::from_str(text).map_err(json_error)?;
    let leaves = w
        .leaves
        .into_iter()
        .map(|l| {
            let state = match l.state {
                Some(s) => Some(PureState::new(s.dims, s.amplitudes.into_iter().map(from_wire).collect())?),
                None => None,
            };
            let operators = l.branch.iter().map(matrix_from_wire).collect::<Result<Vec<_>>>()?;
            Ok(TraceLeaf {
                probability: l.probability,
                state,
                path: l.path,
                label: l.label,
                branch: KrausBranch { operators, label: l.label },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExecutionTrace { leaves, total_probability: w.total_probability })
}
