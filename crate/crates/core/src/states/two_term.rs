use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::form::wrap_phase;
use super::{GhzClassForm, LocalVector, PureState, CLASS_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, real, CMatrix, C64, ONE, ZERO};

const UNIT_TOL: f64 = 1e-10;

/// `(1/√2)(α |a_1 b_1 …⟩ + β |a_2 b_2 …⟩)` with unit local vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoTermDecomposition {
    coeff_a: C64,
    coeff_b: C64,
    term_a: Vec<LocalVector>,
    term_b: Vec<LocalVector>,
    overlap: C64,
}

impl TwoTermDecomposition {
    /// Checks unit local vectors and the normalization identity `N + I = 1`.
    pub fn new(coeff_a: C64, coeff_b: C64, term_a: Vec<LocalVector>, term_b: Vec<LocalVector>) -> Result<Self> {
        let d = Self::unchecked(coeff_a, coeff_b, term_a, term_b)?;
        let total = d.normalization() + d.interference();
        if (total - 1.0).abs() > UNIT_TOL {
            return Err(Error::Precondition(format!("two-term state has squared norm {total}, expected 1")));
        }
        Ok(d)
    }

    /// Like [`TwoTermDecomposition::new`] but rescales the coefficients so the
    /// represented state has unit norm.
    pub fn normalized(coeff_a: C64, coeff_b: C64, term_a: Vec<LocalVector>, term_b: Vec<LocalVector>) -> Result<Self> {
        let mut d = Self::unchecked(coeff_a, coeff_b, term_a, term_b)?;
        let total = d.normalization() + d.interference();
        if total <= 1e-300 {
            return Err(Error::Precondition("two-term state is the zero vector".into()));
        }
        let s = total.sqrt();
        d.coeff_a /= s;
        d.coeff_b /= s;
        Ok(d)
    }

    fn unchecked(coeff_a: C64, coeff_b: C64, term_a: Vec<LocalVector>, term_b: Vec<LocalVector>) -> Result<Self> {
        if term_a.is_empty() || term_a.len() != term_b.len() {
            return Err(Error::Shape(format!("terms cover {} and {} parties", term_a.len(), term_b.len())));
        }
        for (j, (a, b)) in term_a.iter().zip(&term_b).enumerate() {
            if a.len() != b.len() || a.is_empty() {
                return Err(Error::Shape(format!("party {j}: local dimensions differ")));
            }
            for v in [a, b] {
                let n = linalg::vec_norm(v);
                if (n - 1.0).abs() > UNIT_TOL {
                    return Err(Error::Precondition(format!("party {j}: local vector has norm {n}")));
                }
            }
        }
        let overlap = term_a.iter().zip(&term_b).map(|(a, b)| linalg::inner(a, b)).product();
        Ok(Self { coeff_a, coeff_b, term_a, term_b, overlap })
    }

    /// Two orthogonal computational-basis terms `|i i …⟩`, `|j j …⟩` with α = β = 1.
    pub fn basis_pair(dims: &[usize], i: usize, j: usize) -> Result<Self> {
        let unit = |d: usize, k: usize| -> LocalVector { (0..d).map(|r| if r == k { ONE } else { ZERO }).collect() };
        if i == j || dims.iter().any(|&d| i >= d || j >= d) {
            return Err(Error::Shape(format!("basis pair ({i}, {j}) for dims {dims:?}")));
        }
        Self::new(ONE, ONE, dims.iter().map(|&d| unit(d, i)).collect(), dims.iter().map(|&d| unit(d, j)).collect())
    }

    pub fn coeff_a(&self) -> C64 {
        self.coeff_a
    }
    pub fn coeff_b(&self) -> C64 {
        self.coeff_b
    }
    pub fn term_a(&self) -> &[LocalVector] {
        &self.term_a
    }
    pub fn term_b(&self) -> &[LocalVector] {
        &self.term_b
    }
    /// `k = ∏_j ⟨a_j|b_j⟩`.
    pub fn overlap(&self) -> C64 {
        self.overlap
    }
    pub fn parties(&self) -> usize {
        self.term_a.len()
    }
    pub fn dims(&self) -> Vec<usize> {
        self.term_a.iter().map(Vec::len).collect()
    }

    /// Per-party overlaps `⟨a_j|b_j⟩`.
    pub fn local_overlaps(&self) -> Vec<C64> {
        self.term_a.iter().zip(&self.term_b).map(|(a, b)| linalg::inner(a, b)).collect()
    }

    /// `Re(α* β k)`.
    pub fn interference(&self) -> f64 {
        (self.coeff_a.conj() * self.coeff_b * self.overlap).re
    }

    /// `(|α|² + |β|²)/2`.
    pub fn normalization(&self) -> f64 {
        0.5 * (self.coeff_a.norm_sqr() + self.coeff_b.norm_sqr())
    }

    pub fn to_state(&self) -> PureState {
        let a = PureState::product(&self.term_a).expect("unit local vectors");
        let b = PureState::product(&self.term_b).expect("unit local vectors");
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let amps =
            a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| s * (self.coeff_a * x + self.coeff_b * y)).collect();
        PureState::new(self.dims(), amps).expect("two-term state is nonzero")
    }

    /// Same state with the roles of the two terms exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            coeff_a: self.coeff_b,
            coeff_b: self.coeff_a,
            term_a: self.term_b.clone(),
            term_b: self.term_a.clone(),
            overlap: self.overlap.conj(),
        }
    }
}

/// Two-term decomposition of a GHZ-class form.
pub fn two_term_of(form: &GhzClassForm) -> TwoTermDecomposition {
    let scale = (2.0 * form.k()).sqrt();
    let e0 = vec![ONE, ZERO];
    let [va, vb, vc] = form.local_vectors();
    TwoTermDecomposition::normalized(
        real(scale * form.delta.cos()),
        C64::from_polar(scale * form.delta.sin(), form.phi),
        vec![e0.clone(), e0.clone(), e0],
        vec![va, vb, vc],
    )
    .expect("form terms are unit vectors")
}

/// Recovers the unique product-term pair of a three-qubit GHZ-class state.
///
/// Writing `ψ = |0⟩T₀ + |1⟩T₁`, the dual vectors `u` for which `u₀T₀ + u₁T₁`
/// drops to rank one are the roots of a quadratic whose discriminant is the
/// hyperdeterminant; each root isolates one term.
pub fn two_term_from_state(state: &PureState) -> Result<TwoTermDecomposition> {
    if !state.is_qubits(3) {
        return Err(Error::Shape(format!("expected three qubits, got dims {:?}", state.dims())));
    }
    let tangle = crate::measures::three_tangle(state)?;
    if tangle <= CLASS_TOL {
        return Err(Error::NotGhzClass(format!("3-tangle {tangle:e} is not above {CLASS_TOL:e}")));
    }
    let amps = state.amplitudes();
    let t0 = CMatrix::from_row_slice(2, 2, &amps[0..4]);
    let t1 = CMatrix::from_row_slice(2, 2, &amps[4..8]);
    let (qa, qb, qc) = quadratic(&t0, &t1);
    let disc = (qb * qb - 4.0 * qa * qc).sqrt();
    let q = if (qb + disc).norm() >= (qb - disc).norm() { -(qb + disc) / 2.0 } else { -(qb - disc) / 2.0 };
    let roots = [[qa, q], [q, qc]];

    let mut products = Vec::with_capacity(2);
    for r in 0..2 {
        let u = roots[r];
        let block = &t0 * u[0] + &t1 * u[1];
        let svd = block.svd(true, true);
        let (bu, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let k = if svd.singular_values[0] >= svd.singular_values[1] { 0 } else { 1 };
        let b: LocalVector = vec![bu[(0, k)], bu[(1, k)]];
        let cvec: LocalVector = vec![vt[(k, 0)], vt[(k, 1)]];
        let other = roots[1 - r];
        let a = normalize(vec![other[1], -other[0]]);
        products.push(vec![a, b, cvec]);
    }

    let p1 = PureState::product(&products[0])?;
    let p2 = PureState::product(&products[1])?;
    let g12 = p1.inner(&p2)?;
    let r1 = p1.inner(state)?;
    let r2 = p2.inner(state)?;
    let det = ONE - g12 * g12.conj();
    if det.norm() < 1e-14 {
        return Err(Error::Numerical("product terms are parallel".into()));
    }
    let x = (r1 - g12 * r2) / det;
    let y = (r2 - g12.conj() * r1) / det;
    let residual: f64 = amps
        .iter()
        .zip(p1.amplitudes().iter().zip(p2.amplitudes()))
        .map(|(s, (a, b))| (s - x * a - y * b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if residual > 1e-8 {
        return Err(Error::Numerical(format!("two-term reconstruction residual {residual:e}")));
    }
    let s2 = std::f64::consts::SQRT_2;
    let [pa, pb]: [Vec<LocalVector>; 2] = products.try_into().expect("two roots");
    let d = TwoTermDecomposition::normalized(x * s2, y * s2, pa, pb)?;
    Ok(if d.coeff_a.norm() < d.coeff_b.norm() { d.swapped() } else { d })
}

/// Coefficients `(a, b, c)` of `det(T₀ + z T₁) = a z² + b z + c`.
pub(crate) fn quadratic(t0: &CMatrix, t1: &CMatrix) -> (C64, C64, C64) {
    let det = |m: &CMatrix| m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let b = t0[(0, 0)] * t1[(1, 1)] + t1[(0, 0)] * t0[(1, 1)] - t0[(0, 1)] * t1[(1, 0)] - t1[(0, 1)] * t0[(1, 0)];
    (det(t1), b, det(t0))
}

fn normalize(v: Vec<C64>) -> Vec<C64> {
    let n = linalg::vec_norm(&v);
    v.into_iter().map(|z| z / n).collect()
}

/// Five-angle form locally equivalent to a three-qubit two-term decomposition.
pub fn ghz_form_from_two_term(d: &TwoTermDecomposition) -> Result<GhzClassForm> {
    if d.dims() != [2, 2, 2] {
        return Err(Error::Shape(format!("expected three qubits, got dims {:?}", d.dims())));
    }
    let d = if d.coeff_a.norm() < d.coeff_b.norm() { d.swapped() } else { d.clone() };
    if d.coeff_b.norm() < 1e-12 {
        return Err(Error::NotGhzClass("second term has zero weight".into()));
    }
    let overlaps = d.local_overlaps();
    let mut angles = [0.0; 3];
    for (j, k) in overlaps.iter().enumerate() {
        let m = k.norm();
        if m >= 1.0 - 1e-12 {
            return Err(Error::NotGhzClass(format!("terms coincide on party {j}")));
        }
        angles[j] = m.acos().min(FRAC_PI_2);
    }
    let delta = (d.coeff_b.norm() / d.coeff_a.norm()).atan();
    let z = d.coeff_a.conj() * d.coeff_b * d.overlap;
    let phi = if d.overlap.norm() < 1e-15 { 0.0 } else { wrap_phase(z.arg()) };
    GhzClassForm::new(delta, angles[0], angles[1], angles[2], phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_unitary;
    use crate::states::equal_up_to_global_phase;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn ghz_point_has_unit_coefficients() {
        let d = two_term_of(&GhzClassForm::ghz());
        assert!((d.coeff_a() - ONE).norm() < 1e-14);
        assert!((d.coeff_b() - ONE).norm() < 1e-14);
        assert!(d.overlap().norm() < 1e-15);
    }

    #[test]
    fn symmetric_half_overlap() {
        let d = two_term_of(&GhzClassForm::symmetric(0.5, 0.0).unwrap());
        assert!((d.overlap() - real(0.125)).norm() < 1e-14);
        assert!((d.normalization() - (1.0 - d.interference())).abs() < 1e-14);
    }

    #[test]
    fn phase_flipped_interference() {
        let d = two_term_of(&GhzClassForm::symmetric(0.5, PI).unwrap());
        assert!((d.interference() + 8.0 / 7.0 * 0.125).abs() < 1e-14);
    }

    #[test]
    fn state_round_trip_through_two_terms() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let form = GhzClassForm::new(0.6, 1.0, 0.7, 1.3, 2.0).unwrap();
        let s = form.to_state();
        let rotated = s
            .apply_local_unitaries(&[
                random_unitary(2, &mut rng),
                random_unitary(2, &mut rng),
                random_unitary(2, &mut rng),
            ])
            .unwrap();
        let d = two_term_from_state(&rotated).unwrap();
        assert!(equal_up_to_global_phase(&d.to_state(), &rotated, 1e-12).unwrap());
        let back = ghz_form_from_two_term(&d).unwrap();
        assert!((back.delta - form.delta).abs() < 1e-8);
        assert!((back.alpha - form.alpha).abs() < 1e-8);
        assert!((back.beta - form.beta).abs() < 1e-8);
        assert!((back.gamma - form.gamma).abs() < 1e-8);
        assert!((back.phi - form.phi).abs() < 1e-8);
    }

    #[test]
    fn w_state_has_no_two_term_form() {
        assert!(matches!(two_term_from_state(&PureState::w()), Err(Error::NotGhzClass(_))));
    }

    #[test]
    fn constructor_rejects_bad_norms() {
        let e0 = vec![ONE, ZERO];
        let e1 = vec![ZERO, ONE];
        let bad = TwoTermDecomposition::new(ONE, real(2.0), vec![e0.clone(); 3], vec![e1.clone(); 3]);
        assert!(bad.is_err());
        let ok = TwoTermDecomposition::normalized(ONE, real(2.0), vec![e0; 3], vec![e1; 3]).unwrap();
        assert!((ok.normalization() + ok.interference() - 1.0).abs() < 1e-14);
    }
}
