//! Multipartite pure states and the canonical forms used throughout the crate.
//!
//! Amplitudes are stored row-major with party 0 as the slowest index, so the
//! amplitude of `|i_0 i_1 … i_{n-1}⟩` lives at `Σ_j i_j · stride_j` where
//! `stride_j = ∏_{k>j} d_k`.

mod acin;
mod form;
mod two_term;

pub use acin::{acin_decompose, AcinForm};
pub use form::GhzClassForm;
pub use two_term::{ghz_form_from_two_term, two_term_from_state, two_term_of, TwoTermDecomposition};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, C64, ONE, ZERO};

/// A local state vector of a single party.
pub type LocalVector = Vec<C64>;

/// Default absolute tolerance on singular values when counting rank.
pub const RANK_TOL: f64 = 1e-9;

/// Default 3-tangle threshold separating the GHZ class from everything else.
pub const CLASS_TOL: f64 = 1e-9;

/// Dense amplitude tensor of an `n`-party pure state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    dims: Vec<usize>,
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Builds a state from raw amplitudes and normalizes it.
    pub fn new(dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Shape(format!("invalid local dimensions {dims:?}")));
        }
        let total: usize = dims.iter().product();
        if amplitudes.len() != total {
            return Err(Error::Shape(format!(
                "{} amplitudes for dimensions {dims:?} (expected {total})",
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parse("non-finite amplitude".into()));
        }
        let norm = linalg::vec_norm(&amplitudes);
        if norm < 1e-300 {
            return Err(Error::Precondition("zero vector cannot be normalized".into()));
        }
        let amplitudes = amplitudes.into_iter().map(|z| z / norm).collect();
        Ok(Self { dims, amplitudes })
    }

    /// Tensor product of local vectors (normalized afterwards).
    pub fn product(vectors: &[LocalVector]) -> Result<Self> {
        let dims: Vec<usize> = vectors.iter().map(Vec::len).collect();
        let mut amps = vec![ONE];
        for v in vectors {
            amps = amps.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect();
        }
        Self::new(dims, amps)
    }

    /// Computational basis state `|i_0 i_1 …⟩`.
    pub fn basis(dims: &[usize], indices: &[usize]) -> Result<Self> {
        if dims.len() != indices.len() || indices.iter().zip(dims).any(|(i, d)| i >= d) {
            return Err(Error::Shape(format!("basis index {indices:?} for dims {dims:?}")));
        }
        let mut amps = vec![ZERO; dims.iter().product()];
        amps[flat_index(dims, indices)] = ONE;
        Self::new(dims.to_vec(), amps)
    }

    /// `(1/√m) Σ_i |i i … i⟩` on `parties` parties of dimension `levels`.
    pub fn ghz(parties: usize, levels: usize) -> Self {
        let dims = vec![levels; parties];
        let mut amps = vec![ZERO; levels.pow(parties as u32)];
        for i in 0..levels {
            amps[flat_index(&dims, &vec![i; parties])] = ONE;
        }
        Self::new(dims, amps).expect("GHZ state is well formed")
    }

    /// `(|001⟩ + |010⟩ + |100⟩)/√3`.
    pub fn w() -> Self {
        let mut amps = vec![ZERO; 8];
        amps[1] = ONE;
        amps[2] = ONE;
        amps[4] = ONE;
        Self::new(vec![2, 2, 2], amps).expect("W state is well formed")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, indices: &[usize]) -> C64 {
        self.amplitudes[flat_index(&self.dims, indices)]
    }

    pub fn norm(&self) -> f64 {
        linalg::vec_norm(&self.amplitudes)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.dims != other.dims {
            return Err(Error::Shape(format!("cannot compare states with dims {:?} and {:?}", self.dims, other.dims)));
        }
        Ok(linalg::inner(&self.amplitudes, &other.amplitudes))
    }

    pub fn is_qubits(&self, parties: usize) -> bool {
        self.dims.len() == parties && self.dims.iter().all(|&d| d == 2)
    }

    /// Applies one local operator per party and renormalizes.
    pub fn apply_local_unitaries(&self, unitaries: &[CMatrix]) -> Result<PureState> {
        if unitaries.len() != self.parties() {
            return Err(Error::Shape(format!("{} operators for {} parties", unitaries.len(), self.parties())));
        }
        let mut dims = self.dims.clone();
        let mut amps = self.amplitudes.clone();
        for (party, u) in unitaries.iter().enumerate() {
            let (d, a) = apply_local(&dims, &amps, party, u)?;
            dims = d;
            amps = a;
        }
        PureState::new(dims, amps)
    }
}

pub(crate) fn flat_index(dims: &[usize], indices: &[usize]) -> usize {
    indices.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i)
}

/// Applies `matrix` (d_out × d_in) to party `party` of an unnormalized tensor.
pub(crate) fn apply_local(
    dims: &[usize],
    amps: &[C64],
    party: usize,
    matrix: &CMatrix,
) -> Result<(Vec<usize>, Vec<C64>)> {
    if party >= dims.len() {
        return Err(Error::PartyIndex { index: party, parties: dims.len() });
    }
    let d_in = dims[party];
    if matrix.ncols() != d_in {
        return Err(Error::Shape(format!(
            "operator with {} columns on party {party} of dimension {d_in}",
            matrix.ncols()
        )));
    }
    let d_out = matrix.nrows();
    let outer: usize = dims[..party].iter().product();
    let inner: usize = dims[party + 1..].iter().product();
    let mut out = vec![ZERO; outer * d_out * inner];
    for o in 0..outer {
        for r in 0..d_out {
            for col in 0..d_in {
                let m = matrix[(r, col)];
                if m == ZERO {
                    continue;
                }
                let src = (o * d_in + col) * inner;
                let dst = (o * d_out + r) * inner;
                for i in 0..inner {
                    out[dst + i] += m * amps[src + i];
                }
            }
        }
    }
    let mut new_dims = dims.to_vec();
    new_dims[party] = d_out;
    Ok((new_dims, out))
}

/// Reduced density matrix of one party.
pub fn reduced_density(state: &PureState, party: usize) -> Result<CMatrix> {
    let dims = state.dims();
    if party >= dims.len() {
        return Err(Error::PartyIndex { index: party, parties: dims.len() });
    }
    let d = dims[party];
    let outer: usize = dims[..party].iter().product();
    let inner: usize = dims[party + 1..].iter().product();
    let amps = state.amplitudes();
    Ok(CMatrix::from_fn(d, d, |r, s| {
        let mut acc = ZERO;
        for o in 0..outer {
            for i in 0..inner {
                acc += amps[(o * d + r) * inner + i] * amps[(o * d + s) * inner + i].conj();
            }
        }
        acc
    }))
}

/// Number of singular values strictly above `tol`.
pub fn numeric_rank(matrix: &CMatrix, tol: f64) -> usize {
    linalg::singular_values(matrix).into_iter().filter(|&s| s > tol).count()
}

/// True iff the state is a three-qubit state with 3-tangle above `CLASS_TOL`.
pub fn is_ghz_class(state: &PureState) -> bool {
    crate::measures::three_tangle(state).is_ok_and(|t| t > CLASS_TOL)
}

/// `|⟨s1|s2⟩| ≥ 1 − tol`.
pub fn equal_up_to_global_phase(s1: &PureState, s2: &PureState, tol: f64) -> Result<bool> {
    Ok(s1.inner(s2)?.norm() >= 1.0 - tol)
}

/// `cos θ |0⟩ + sin θ |1⟩`.
pub fn qubit(theta: f64) -> LocalVector {
    vec![c(theta.cos(), 0.0), c(theta.sin(), 0.0)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_unitary, real};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ghz_reductions_are_maximally_mixed() {
        let ghz = PureState::ghz(3, 2);
        for p in 0..3 {
            let rho = reduced_density(&ghz, p).unwrap();
            assert!((rho[(0, 0)].re - 0.5).abs() < 1e-15);
            assert!((rho[(1, 1)].re - 0.5).abs() < 1e-15);
            assert!(rho[(0, 1)].norm() < 1e-15);
        }
    }

    #[test]
    fn product_state_has_rank_one_reductions() {
        let s = PureState::basis(&[2, 2, 2], &[0, 0, 0]).unwrap();
        for p in 0..3 {
            let rho = reduced_density(&s, p).unwrap();
            assert_eq!(numeric_rank(&rho, RANK_TOL), 1);
            assert!((rho[(0, 0)].re - 1.0).abs() < 1e-15);
        }
        assert!(!is_ghz_class(&s));
    }

    #[test]
    fn classification_of_fixtures() {
        assert!(is_ghz_class(&PureState::ghz(3, 2)));
        assert!(!is_ghz_class(&PureState::w()));
    }

    #[test]
    fn reduced_density_rejects_bad_party() {
        let ghz = PureState::ghz(3, 2);
        assert!(matches!(reduced_density(&ghz, 3), Err(Error::PartyIndex { .. })));
    }

    #[test]
    fn global_phase_comparison() {
        let ghz = PureState::ghz(3, 2);
        let phase = C64::from_polar(1.0, std::f64::consts::FRAC_PI_3);
        let rotated = PureState::new(vec![2, 2, 2], ghz.amplitudes().iter().map(|z| z * phase).collect()).unwrap();
        assert!(equal_up_to_global_phase(&ghz, &rotated, 1e-12).unwrap());

        let mut minus = ghz.amplitudes().to_vec();
        minus[7] = -minus[7];
        let minus = PureState::new(vec![2, 2, 2], minus).unwrap();
        assert!(!equal_up_to_global_phase(&ghz, &minus, 1e-9).unwrap());

        let mut nudged = ghz.amplitudes().to_vec();
        nudged[3] += real(1e-12);
        let nudged = PureState::new(vec![2, 2, 2], nudged).unwrap();
        assert!(equal_up_to_global_phase(&ghz, &nudged, 1e-9).unwrap());

        let other = PureState::ghz(2, 2);
        assert!(equal_up_to_global_phase(&ghz, &other, 1e-9).is_err());
    }

    #[test]
    fn local_unitaries_preserve_reduced_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let amps = linalg::random_unit_vector(8, &mut rng);
        let s = PureState::new(vec![2, 2, 2], amps).unwrap();
        let rotated = s
            .apply_local_unitaries(&[linalg::identity(2), random_unitary(2, &mut rng), random_unitary(2, &mut rng)])
            .unwrap();
        let (a, _) = linalg::hermitian_eigen(&reduced_density(&s, 0).unwrap());
        let (b, _) = linalg::hermitian_eigen(&reduced_density(&rotated, 0).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn apply_local_changes_dimension() {
        let ghz = PureState::ghz(2, 3);
        let iso = CMatrix::from_fn(2, 3, |r, col| if r == col.min(1) { ONE } else { ZERO });
        let (dims, amps) = apply_local(ghz.dims(), ghz.amplitudes(), 1, &iso).unwrap();
        assert_eq!(dims, vec![3, 2]);
        assert_eq!(amps.len(), 6);
    }
}
