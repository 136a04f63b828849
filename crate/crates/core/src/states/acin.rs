use std::f64::consts::PI;

use super::two_term::quadratic;
use super::PureState;
use crate::error::{Error, Result};
use crate::linalg::{self, diagonal, real, CMatrix, C64, ONE, ZERO};

const ZERO_TOL: f64 = 1e-12;

/// Generalized Schmidt form of a three-qubit state,
///
/// `λ₀|000⟩ + λ₁e^{iφ}|100⟩ + λ₂|101⟩ + λ₃|110⟩ + λ₄|111⟩`,
/// together with the local unitaries that map it back onto the original state.
#[derive(Debug, Clone, PartialEq)]
pub struct AcinForm {
    pub lambdas: [f64; 5],
    pub phase: f64,
    /// `U_A, U_B, U_C` with `state = (U_A ⊗ U_B ⊗ U_C) · canonical`.
    pub local_unitaries: Vec<CMatrix>,
}

impl AcinForm {
    pub fn canonical_state(&self) -> PureState {
        let l = self.lambdas;
        let mut amps = vec![ZERO; 8];
        amps[0] = real(l[0]);
        amps[4] = C64::from_polar(l[1], self.phase);
        amps[5] = real(l[2]);
        amps[6] = real(l[3]);
        amps[7] = real(l[4]);
        PureState::new(vec![2, 2, 2], amps).expect("lambdas are normalized")
    }

    /// Applies the stored local unitaries to the canonical state.
    pub fn reconstruct(&self) -> PureState {
        self.canonical_state().apply_local_unitaries(&self.local_unitaries).expect("three 2×2 unitaries")
    }
}

struct Candidate {
    lambdas: [f64; 5],
    phase: f64,
    residual: f64,
    /// Maps the original state onto the canonical one.
    forward: [CMatrix; 3],
}

/// Computes the generalized Schmidt decomposition of a three-qubit state.
///
/// Party A is rotated so that its first block has vanishing determinant (a
/// root of a quadratic), the rank-one block is diagonalized on B and C, and
/// the remaining freedom is spent making every amplitude but `|100⟩` real.
/// Of the two roots, the one giving a phase in `[0, π]` is kept.
pub fn acin_decompose(state: &PureState) -> Result<AcinForm> {
    if !state.is_qubits(3) {
        return Err(Error::Shape(format!("expected three qubits, got dims {:?}", state.dims())));
    }
    let amps = state.amplitudes();
    let t0 = CMatrix::from_row_slice(2, 2, &amps[0..4]);
    let t1 = CMatrix::from_row_slice(2, 2, &amps[4..8]);
    let (qa, qb, qc) = quadratic(&t0, &t1);
    let scale = qa.norm().max(qb.norm()).max(qc.norm());

    let mut duals: Vec<[C64; 2]> = Vec::new();
    if scale < ZERO_TOL {
        // Both blocks are already rank one or parallel; any rotation works.
        duals.push([ONE, ZERO]);
        duals.push([ZERO, ONE]);
    } else {
        let disc = (qb * qb - 4.0 * qa * qc).sqrt();
        let q = if (qb + disc).norm() >= (qb - disc).norm() { -(qb + disc) / 2.0 } else { -(qb - disc) / 2.0 };
        if q.norm() > ZERO_TOL * scale {
            duals.push([qa, q]);
            duals.push([q, qc]);
        } else {
            // b and the discriminant both vanish: a double root at z = 0 or ∞.
            duals.push(if qa.norm() >= qc.norm() { [ONE, ZERO] } else { [ZERO, ONE] });
        }
    }

    let mut candidates: Vec<Candidate> = duals.iter().filter_map(|u| canonicalize(state, *u)).collect();
    if candidates.is_empty() {
        return Err(Error::Numerical("no usable rotation for party A".into()));
    }
    let best_residual = candidates.iter().map(|c| c.residual).fold(f64::INFINITY, f64::min);
    let tol = 1e-9_f64.max(10.0 * best_residual);
    candidates.retain(|c| c.residual <= tol);
    let chosen = candidates.iter().position(|c| c.phase <= PI + 1e-12).unwrap_or(0);
    let chosen = candidates.swap_remove(chosen);
    let local_unitaries = chosen.forward.iter().map(|m| m.adjoint()).collect();
    Ok(AcinForm {
        lambdas: chosen.lambdas,
        phase: if chosen.phase - PI <= 1e-12 { chosen.phase.min(PI) } else { chosen.phase },
        local_unitaries,
    })
}

fn canonicalize(state: &PureState, u: [C64; 2]) -> Option<Candidate> {
    let norm = (u[0].norm_sqr() + u[1].norm_sqr()).sqrt();
    if norm < 1e-300 {
        return None;
    }
    let (u0, u1) = (u[0] / norm, u[1] / norm);
    let ua = CMatrix::from_row_slice(2, 2, &[u0, u1, -u1.conj(), u0.conj()]);
    let rotated = apply(state, &[ua.clone(), linalg::identity(2), linalg::identity(2)]);
    let top = CMatrix::from_row_slice(2, 2, &rotated[0..4]);

    let (ub, uc) = if top.iter().all(|z| z.norm() < ZERO_TOL) {
        // Party A factorizes out; Schmidt-decompose the B-C block instead.
        let bottom = CMatrix::from_row_slice(2, 2, &rotated[4..8]);
        let svd = bottom.svd(true, true);
        (svd.u?.adjoint(), svd.v_t?.conjugate())
    } else {
        let svd = top.svd(true, true);
        (svd.u?.adjoint(), svd.v_t?.conjugate())
    };
    let s = apply(state, &[ua.clone(), ub.clone(), uc.clone()]);

    let theta = |z: C64| if z.norm() > ZERO_TOL { z.arg() } else { 0.0 };
    let present = |z: C64| z.norm() > ZERO_TOL;
    let (a100, a101, a110, a111) = (s[4], s[5], s[6], s[7]);
    // Phases applied to |1⟩ of A, B, C; |0⟩ phases stay fixed so λ₀ stays real.
    let (pa, pb, pc);
    if s[0].norm() < ZERO_TOL {
        // A-product case: B-C block is diagonal after the SVD above.
        pa = -theta(a100);
        pb = 0.0;
        pc = -theta(a111) - pa;
    } else if !present(a101) {
        pa = -theta(a100);
        pb = -theta(a110) - pa;
        pc = -theta(a111) - pa - pb;
    } else if !present(a110) {
        pa = -theta(a100);
        pc = -theta(a101) - pa;
        pb = -theta(a111) - pa - pc;
    } else if !present(a111) {
        pa = -theta(a100);
        pc = -theta(a101) - pa;
        pb = -theta(a110) - pa;
    } else {
        pc = theta(a110) - theta(a111);
        pb = theta(a101) - theta(a111);
        pa = -theta(a101) - pc;
    }
    let phase_matrix = |p: f64| diagonal(&[ONE, C64::from_polar(1.0, p)]);
    let forward = [phase_matrix(pa) * ua, phase_matrix(pb) * ub, phase_matrix(pc) * uc];
    let f = apply(state, &forward);
    // Global phase: make λ₀ (or the first present amplitude) real positive.
    let anchor = [0usize, 5, 6, 7, 4].into_iter().map(|i| f[i]).find(|z| z.norm() > ZERO_TOL).unwrap_or(ONE);
    let g = C64::from_polar(1.0, -anchor.arg());
    let forward = [forward[0].clone() * g, forward[1].clone(), forward[2].clone()];
    let f: Vec<C64> = f.iter().map(|z| z * g).collect();

    let residual = (f[1].norm_sqr() + f[2].norm_sqr() + f[3].norm_sqr()).sqrt()
        + [0usize, 5, 6, 7].iter().map(|&i| f[i].im.abs()).sum::<f64>();
    let lambdas = [f[0].norm(), f[4].norm(), f[5].norm(), f[6].norm(), f[7].norm()];
    let meaningful = lambdas[1..].iter().all(|&l| l > ZERO_TOL);
    // With any of λ₁…λ₄ zero the |100⟩ amplitude was already made real above.
    let phase = if meaningful { f[4].arg().rem_euclid(2.0 * PI) } else { 0.0 };
    let check = apply(state, &forward);
    let residual = residual.max((check[1].norm_sqr() + check[2].norm_sqr() + check[3].norm_sqr()).sqrt());
    Some(Candidate { lambdas, phase, residual, forward })
}

fn apply(state: &PureState, ops: &[CMatrix]) -> Vec<C64> {
    let mut dims = state.dims().to_vec();
    let mut amps = state.amplitudes().to_vec();
    for (p, m) in ops.iter().enumerate() {
        let (d, a) = super::apply_local(&dims, &amps, p, m).expect("2×2 operators on qubits");
        dims = d;
        amps = a;
    }
    amps
}
