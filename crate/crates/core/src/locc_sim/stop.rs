use super::{check_completeness, LocalOperator, Measurement, ProtocolNode, ProtocolTree, COMPLETENESS_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_function, psd_sqrt, CMatrix};

/// Eigenvalue floor for the operator whose inverse square root is taken.
const CONDITION_TOL: f64 = 1e-12;
const COMMUTATOR_TOL: f64 = 1e-9;

/// A two-outcome measurement split into a partial "stopped" measurement and
/// a reconstructing one.
#[derive(Debug, Clone, PartialEq)]
pub struct StopReconstruct {
    pub x: f64,
    /// `{√(1−e^{−2x}) M′₁, √(1+e^{−2x}) M′(x)}`.
    pub stopped: Measurement,
    /// `{R₁, R₂}`, applied after the second stopped outcome.
    pub reconstruct: Measurement,
    /// Polar unitaries with `Mᵢ = Uᵢ M′ᵢ`.
    pub unitaries: [CMatrix; 2],
    /// Positive parts `M′ᵢ`.
    pub positive: [CMatrix; 2],
}

impl StopReconstruct {
    /// `(‖R₁S₂ − e^{−x}M′₁‖, ‖R₂S₂ − M′₂‖)` in max-abs norm.
    pub fn identity_residuals(&self) -> (f64, f64) {
        let s2 = &self.stopped.operators[1];
        let r1 = &self.reconstruct.operators[0];
        let r2 = &self.reconstruct.operators[1];
        let first = linalg::max_abs(&(r1 * s2 - &self.positive[0] * linalg::real((-self.x).exp())));
        let second = linalg::max_abs(&(r2 * s2 - &self.positive[1]));
        (first, second)
    }

    /// Tree realizing the original measurement: outcome 1 is reached via
    /// paths `[0]` and `[1, 0]`, outcome 2 via `[1, 1]`.
    pub fn composite_tree(&self) -> ProtocolTree {
        let party = self.stopped.party;
        let fix = |k: usize| vec![LocalOperator::new(party, self.unitaries[k].clone())];
        let second = ProtocolTree::Node(Box::new(ProtocolNode {
            measurement: self.reconstruct.clone(),
            children: vec![ProtocolTree::Leaf, ProtocolTree::Leaf],
            corrections: vec![fix(0), fix(1)],
        }));
        ProtocolTree::Node(Box::new(ProtocolNode {
            measurement: self.stopped.clone(),
            children: vec![ProtocolTree::Leaf, second],
            corrections: vec![fix(0), Vec::new()],
        }))
    }

    /// Maps a leaf path of [`StopReconstruct::composite_tree`] to the original outcome.
    pub fn original_outcome(path: &[usize]) -> usize {
        match path {
            [0] | [1, 0] => 0,
            _ => 1,
        }
    }
}

/// Splits `{M₁, M₂}` at stopping parameter `x ≥ 0`.
///
/// With `M′ᵢ` the positive polar parts (which commute because
/// `M′₁² + M′₂² = 1`), the stopped pair is
/// `{√(1−e^{−2x}) M′₁, √(1+e^{−2x}) M′(x)}` with
/// `M′(x) = √((1 + tanh x (M′₂² − M′₁²))/2)`, and the reconstructing pair is
/// `Rᵢ = √((1 ∓ tanh x) D⁻¹) M′ᵢ` with `D = 1 + tanh x (M′₂² − M′₁²)`.
pub fn stop_and_reconstruct(m: &Measurement, x: f64) -> Result<StopReconstruct> {
    if m.operators.len() != 2 {
        return Err(Error::Shape(format!("stop-and-reconstruct needs two outcomes, got {}", m.operators.len())));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain { name: "x", value: x, range: "[0, ∞)" });
    }
    if m.operators.iter().any(|o| o.nrows() != o.ncols()) {
        return Err(Error::Shape("stop-and-reconstruct needs square operators".into()));
    }
    let residual = check_completeness(m);
    if residual >= COMPLETENESS_TOL {
        return Err(Error::Incomplete { residual, tolerance: COMPLETENESS_TOL });
    }
    let (u1, p1) = linalg::polar(&m.operators[0])?;
    let (u2, p2) = linalg::polar(&m.operators[1])?;
    let commutator = linalg::commutator_norm(&p1, &p2);
    if commutator > COMMUTATOR_TOL {
        return Err(Error::Precondition(format!("positive parts do not commute (residual {commutator:e})")));
    }

    let d = m.input_dim();
    let t = x.tanh();
    let e2 = (-2.0 * x).exp();
    let sq1 = &p1 * &p1;
    let sq2 = &p2 * &p2;
    let denom = linalg::identity(d) + (&sq2 - &sq1) * linalg::real(t);
    let (eig, _) = linalg::hermitian_eigen(&denom);
    if eig[0] <= CONDITION_TOL {
        return Err(Error::IllConditioned(eig[0]));
    }
    let m_x = psd_sqrt(&(&denom * linalg::real(0.5)));
    let stopped =
        Measurement::new(m.party, vec![&p1 * linalg::real((1.0 - e2).sqrt()), m_x * linalg::real((1.0 + e2).sqrt())])?;
    let inv = hermitian_function(&denom, |v| 1.0 / v);
    let r1 = psd_sqrt(&(&inv * linalg::real(1.0 - t))) * &p1;
    let r2 = psd_sqrt(&(&inv * linalg::real(1.0 + t))) * &p2;
    let reconstruct = Measurement::new(m.party, vec![r1, r2])?;
    Ok(StopReconstruct { x, stopped, reconstruct, unitaries: [u1, u2], positive: [p1, p2] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diagonal, identity, real, ONE};
    use crate::locc_sim::{apply_branch, run_protocol};
    use crate::states::PureState;

    #[test]
    fn degenerate_split() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let m = Measurement::new(0, vec![identity(2) * real(h), identity(2) * real(h)]).unwrap();
        for x in [0.0, 0.3, 2.0] {
            let s = stop_and_reconstruct(&m, x).unwrap();
            let mx = &s.stopped.operators[1] * real(1.0 / (1.0 + (-2.0 * x).exp()).sqrt());
            assert!(linalg::max_abs(&(mx - identity(2) * real(h))) < 1e-12);
        }
    }

    #[test]
    fn diagonal_identities() {
        let m =
            Measurement::new(0, vec![diagonal(&[real(0.8), real(0.6)]), diagonal(&[real(0.6), real(0.8)])]).unwrap();
        let s = stop_and_reconstruct(&m, 0.5).unwrap();
        let (a, b) = s.identity_residuals();
        assert!(a < 1e-12 && b < 1e-12);
        assert!(check_completeness(&s.stopped) < 1e-12);
        assert!(check_completeness(&s.reconstruct) < 1e-12);
    }

    #[test]
    fn composite_reproduces_statistics() {
        let m =
            Measurement::new(1, vec![diagonal(&[real(0.8), real(0.6)]), diagonal(&[real(0.6), real(0.8)])]).unwrap();
        let s = stop_and_reconstruct(&m, 1.0).unwrap();
        let state = PureState::ghz(3, 2);
        let trace = run_protocol(&state, &s.composite_tree()).unwrap();
        let mut p = [0.0; 2];
        for leaf in &trace.leaves {
            p[StopReconstruct::original_outcome(&leaf.path)] += leaf.probability;
        }
        for (k, op) in m.branches(&[2, 2, 2]).unwrap().iter().enumerate() {
            let expect = apply_branch(&state, op).unwrap().probability;
            assert!((p[k] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let m = Measurement::new(0, vec![diagonal(&[ONE, ONE])]).unwrap();
        assert!(stop_and_reconstruct(&m, 0.5).is_err());
        let m2 =
            Measurement::new(0, vec![diagonal(&[real(0.8), real(0.6)]), diagonal(&[real(0.6), real(0.8)])]).unwrap();
        assert!(stop_and_reconstruct(&m2, -0.1).is_err());
        let incomplete =
            Measurement::new(0, vec![diagonal(&[real(0.8), real(0.6)]), diagonal(&[real(0.6), real(0.6)])]).unwrap();
        assert!(matches!(stop_and_reconstruct(&incomplete, 0.5), Err(Error::Incomplete { .. })));
    }
}
