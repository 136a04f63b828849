use crate::error::{Error, Result};
use crate::linalg::{self, real, CMatrix, C64, ZERO};
use crate::states::{LocalVector, PureState, TwoTermDecomposition};

/// One product term `c |k_1⟩ ⊗ … ⊗ |k_n⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: C64,
    pub vectors: Vec<LocalVector>,
}

/// Target state `γ Σᵢ cᵢ |k_{1,i} … k_{n,i}⟩` with unit local vectors,
/// coefficients of unit ℓ² norm and `γ` restoring the state norm.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpec {
    terms: Vec<Term>,
    coefficients: Vec<C64>,
    dims: Vec<usize>,
    gamma: f64,
}

impl TargetSpec {
    /// At least two terms, all with nonzero coefficients. Local vectors are
    /// normalized, their norms absorbed into the coefficients.
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        if terms.len() < 2 {
            return Err(Error::Precondition(format!("need at least two terms, got {}", terms.len())));
        }
        let spec = Self::padded(terms)?;
        if spec.coefficients.iter().any(|c| c.norm() < 1e-14) {
            return Err(Error::Precondition("every term needs a nonzero coefficient".into()));
        }
        Ok(spec)
    }

    /// Like [`TargetSpec::new`] but zero-coefficient terms are kept; they
    /// still occupy a level of the initial GHZ state.
    pub fn padded(terms: Vec<Term>) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::Precondition("target has no terms".into()))?;
        let dims: Vec<usize> = first.vectors.iter().map(Vec::len).collect();
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Shape("every party needs a nonempty local vector".into()));
        }
        let mut normalized = Vec::with_capacity(terms.len());
        for (i, t) in terms.into_iter().enumerate() {
            let shape: Vec<usize> = t.vectors.iter().map(Vec::len).collect();
            if shape != dims {
                return Err(Error::Shape(format!("term {i} has local dimensions {shape:?}, expected {dims:?}")));
            }
            let mut coeff = t.coeff;
            let mut vectors = Vec::with_capacity(dims.len());
            for (j, v) in t.vectors.into_iter().enumerate() {
                let n = linalg::vec_norm(&v);
                if !(n > 1e-14 && n.is_finite()) {
                    return Err(Error::Precondition(format!("term {i} has a zero vector on party {j}")));
                }
                coeff *= n;
                vectors.push(v.into_iter().map(|z| z / n).collect());
            }
            normalized.push(Term { coeff, vectors });
        }
        let total: f64 = normalized.iter().map(|t| t.coeff.norm_sqr()).sum::<f64>().sqrt();
        if !(total > 1e-14 && total.is_finite()) {
            return Err(Error::Precondition("all coefficients vanish".into()));
        }
        for t in &mut normalized {
            t.coeff /= total;
        }
        let mut spec =
            Self { coefficients: normalized.iter().map(|t| t.coeff).collect(), terms: normalized, dims, gamma: 1.0 };
        let norm_sq = spec.raw_norm_sq();
        if norm_sq < 1e-24 {
            return Err(Error::Precondition("terms cancel to the zero vector".into()));
        }
        spec.gamma = 1.0 / norm_sq.sqrt();
        Ok(spec)
    }

    pub fn from_two_term(d: &TwoTermDecomposition) -> Result<Self> {
        Self::new(vec![
            Term { coeff: d.coeff_a(), vectors: d.term_a().to_vec() },
            Term { coeff: d.coeff_b(), vectors: d.term_b().to_vec() },
        ])
    }

    /// `‖Σᵢ cᵢ |k_i⟩‖²` from the Gram matrix of the product terms.
    fn raw_norm_sq(&self) -> f64 {
        let mut total = 0.0;
        for a in &self.terms {
            for b in &self.terms {
                let overlap: C64 = a.vectors.iter().zip(&b.vectors).map(|(u, v)| linalg::inner(u, v)).product();
                total += (a.coeff.conj() * b.coeff * overlap).re;
            }
        }
        total
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    /// `(1/√m) Σᵢ |i…i⟩` over as many levels as there are terms.
    pub fn initial_state(&self) -> PureState {
        PureState::ghz(self.parties(), self.terms.len())
    }

    /// Matrix whose columns are the party's vectors in each term.
    pub fn party_matrix(&self, party: usize) -> CMatrix {
        let cols: Vec<LocalVector> = self.terms.iter().map(|t| t.vectors[party].clone()).collect();
        linalg::matrix_from_columns(self.dims[party], &cols)
    }

    /// Upper-triangular `A` with `K = Q A` from Gram–Schmidt on the party's
    /// term vectors, or `None` when they are linearly dependent.
    pub fn triangular_matrix(&self, party: usize) -> Option<CMatrix> {
        let m = self.terms.len();
        let mut basis: Vec<LocalVector> = Vec::with_capacity(m);
        let mut a = CMatrix::from_element(m, m, ZERO);
        for (i, t) in self.terms.iter().enumerate() {
            let mut v = t.vectors[party].clone();
            for (r, q) in basis.iter().enumerate() {
                let proj = linalg::inner(q, &v);
                a[(r, i)] = proj;
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= proj * y;
                }
            }
            let n = linalg::vec_norm(&v);
            if n < 1e-10 {
                return None;
            }
            a[(i, i)] = real(n);
            basis.push(v.into_iter().map(|z| z / n).collect());
        }
        Some(a)
    }

    pub fn to_state(&self) -> PureState {
        let size: usize = self.dims.iter().product();
        let mut amps = vec![ZERO; size];
        for t in &self.terms {
            let p = PureState::product(&t.vectors).expect("unit local vectors");
            for (acc, z) in amps.iter_mut().zip(p.amplitudes()) {
                *acc += t.coeff * z * self.gamma;
            }
        }
        PureState::new(self.dims.clone(), amps).expect("target is nonzero")
    }
}
