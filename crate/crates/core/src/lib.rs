//! Probability bounds and exact protocol simulation for stochastic LOCC
//! transformations between GHZ-class multipartite pure states.
//!
//! The crate is organised bottom-up:
//!
//! * [`states`]: pure-state tensors, the five-angle GHZ-class form, two-term
//!   decompositions and the Acín canonical form for three qubits.
//! * [`measures`]: interference term, normalization, 3-tangle and the maximal
//!   3-tangle compatible with a given interference value.
//! * [`bounds`]: upper bounds on conversion probability and bound curves.
//! * [`locc_sim`]: Kraus-branch simulation, protocol trees and the
//!   conservation-law verifiers.
//! * [`protocols`]: constructive protocols that give lower bounds.
//! * [`io`]: JSON formats and number formatting shared with the CLI.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod io;
pub mod linalg;
pub mod locc_sim;
pub mod measures;
pub mod protocols;
pub mod states;

pub use error::{Error, Result};
pub use linalg::{CMatrix, C64};
