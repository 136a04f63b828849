#![allow(clippy::approx_constant)]

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use slocc_core::linalg::{self, c, real, CMatrix, C64, ZERO};
use slocc_core::measures::{
    interference_ghz_form, interference_term, max_tangle_given_interference, normalization, three_tangle,
    three_tangle_ghz_form,
};
use slocc_core::states::{
    acin_decompose, ghz_form_from_two_term, reduced_density, two_term_from_state, two_term_of, GhzClassForm, PureState,
    TwoTermDecomposition,
};

/// Two-qubit reduced state of parties `keep` from a three-qubit state.
fn reduced_pair(state: &PureState, keep: [usize; 2]) -> CMatrix {
    let traced = 3 - keep[0] - keep[1];
    let mut rho = CMatrix::zeros(4, 4);
    for t in 0..2 {
        let amp = |i: usize, j: usize| {
            let mut idx = [0; 3];
            idx[keep[0]] = i;
            idx[keep[1]] = j;
            idx[traced] = t;
            state.amplitude(&idx)
        };
        for r in 0..4 {
            for col in 0..4 {
                rho[(r, col)] += amp(r / 2, r % 2) * amp(col / 2, col % 2).conj();
            }
        }
    }
    rho
}

/// Wootters concurrence of a rank-two two-qubit state.
fn concurrence(rho: &CMatrix) -> f64 {
    let yy = CMatrix::from_fn(4, 4, |r, col| {
        // σ_y ⊗ σ_y is real and anti-diagonal with signs (−1, 1, 1, −1).
        if r + col == 3 {
            if r == 0 || r == 3 {
                real(-1.0)
            } else {
                real(1.0)
            }
        } else {
            ZERO
        }
    });
    let tilde = &yy * rho.map(|z| z.conj()) * &yy;
    let s = linalg::hermitian_function(rho, |v| if v > 1e-12 { v.sqrt() } else { 0.0 });
    let (eig, _) = linalg::hermitian_eigen(&(&s * tilde * &s));
    let mut l: Vec<f64> = eig.into_iter().map(|v| v.max(0.0).sqrt()).collect();
    l.sort_by(|a, b| b.total_cmp(a));
    // Two-party marginals of a pure three-qubit state have rank at most two,
    // so only the two largest roots survive.
    (l[0] - l[1]).max(0.0)
}

/// `4 det ρ_A − C²_AB − C²_AC`.
fn tangle_oracle(state: &PureState) -> f64 {
    let rho_a = reduced_density(state, 0).unwrap();
    let det = (rho_a[(0, 0)] * rho_a[(1, 1)] - rho_a[(0, 1)] * rho_a[(1, 0)]).re;
    let cab = concurrence(&reduced_pair(state, [0, 1]));
    let cac = concurrence(&reduced_pair(state, [0, 2]));
    4.0 * det - cab * cab - cac * cac
}

fn arb_form() -> impl Strategy<Value = GhzClassForm> {
    let h = std::f64::consts::FRAC_PI_2;
    (0.02..std::f64::consts::FRAC_PI_4, 0.02..h, 0.02..h, 0.02..h, 0.0..std::f64::consts::TAU)
        .prop_map(|(d, a, b, g, p)| GhzClassForm::new(d, a, b, g, p).unwrap())
}

fn arb_complex() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| c(re, im))
}

#[test]
fn fixture_tangles() {
    assert!((tangle_oracle(&PureState::ghz(3, 2)) - 1.0).abs() < 1e-12);
    assert!(tangle_oracle(&PureState::w()).abs() < 1e-12);
    assert!(three_tangle(&PureState::w()).unwrap().abs() < 1e-12);
    let sym = GhzClassForm::symmetric(0.5, 0.0).unwrap();
    assert!((three_tangle_ghz_form(&sym) - 0.75f64.powi(3) / 1.125f64.powi(2)).abs() < 1e-12);
}

#[test]
fn example_two_values() {
    let phi = GhzClassForm::from_overlaps([0.2, 0.4, 0.8], 0.0).unwrap();
    let psi = GhzClassForm::from_overlaps([0.4, 0.4, 0.4], 0.0).unwrap();
    let t = 0.064;
    for f in [&phi, &psi] {
        assert!((interference_ghz_form(f) - t / (1.0 + t)).abs() < 1e-12);
        assert!((tangle_oracle(&f.to_state()) - three_tangle_ghz_form(f)).abs() < 1e-10);
    }
    let expect_phi = (1.0 - 0.04) * (1.0 - 0.16) * (1.0 - 0.64) / (1.0 + t).powi(2);
    assert!((three_tangle_ghz_form(&phi) - expect_phi).abs() < 1e-12);
    assert!((three_tangle_ghz_form(&phi) - 0.2565).abs() < 5e-4);
    assert!((three_tangle_ghz_form(&psi) - 0.5235).abs() < 5e-4);
}

#[test]
fn acin_fixtures_reconstruct() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = vec![real(h), real(h)];
    for s in [PureState::ghz(3, 2), PureState::w(), PureState::product(&[plus.clone(), plus.clone(), plus]).unwrap()] {
        let f = acin_decompose(&s).unwrap();
        assert!((f.reconstruct().inner(&s).unwrap().norm() - 1.0).abs() < 1e-10);
        assert!((0.0..=std::f64::consts::PI).contains(&f.phase));
        assert!(f.lambdas.iter().all(|&l| l >= 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn normalization_plus_interference_is_one(
        a in arb_complex(), b in arb_complex(), seed in any::<u64>()
    ) {
        prop_assume!(a.norm() + b.norm() > 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ta: Vec<_> = (0..3).map(|_| linalg::random_unit_vector(2, &mut rng)).collect();
        let tb: Vec<_> = (0..3).map(|_| linalg::random_unit_vector(2, &mut rng)).collect();
        let d = TwoTermDecomposition::normalized(a, b, ta, tb).unwrap();
        prop_assert!((normalization(&d) + interference_term(&d) - 1.0).abs() < 1e-12);
        prop_assert!((d.to_state().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_forms_match_tensor_level(form in arb_form()) {
        let state = form.to_state();
        let tau = three_tangle_ghz_form(&form);
        prop_assert!((three_tangle(&state).unwrap() - tau).abs() < 1e-9);
        prop_assert!((tangle_oracle(&state) - tau).abs() < 1e-9);
        let d = two_term_from_state(&state).unwrap();
        prop_assert!((interference_term(&d) - interference_ghz_form(&form)).abs() < 1e-9);
        prop_assert!((interference_term(&two_term_of(&form)) - interference_ghz_form(&form)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tangle_is_local_unitary_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = PureState::new(vec![2, 2, 2], linalg::random_unit_vector(8, &mut rng)).unwrap();
        let us: Vec<_> = (0..3).map(|_| linalg::random_unitary(2, &mut rng)).collect();
        let t = s.apply_local_unitaries(&us).unwrap();
        prop_assert!((three_tangle(&s).unwrap() - three_tangle(&t).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn tangle_never_exceeds_budget(form in arb_form()) {
        let i = interference_ghz_form(&form);
        prop_assume!(i < 0.5 - 1e-6);
        let budget = max_tangle_given_interference(i).unwrap();
        prop_assert!(three_tangle_ghz_form(&form) <= budget.max_tangle + 1e-12);
    }

    #[test]
    fn two_term_round_trip(form in arb_form()) {
        let d = two_term_from_state(&form.to_state()).unwrap();
        prop_assert!((d.to_state().inner(&form.to_state()).unwrap().norm() - 1.0).abs() < 1e-9);
        let back = ghz_form_from_two_term(&d).unwrap();
        prop_assert!((three_tangle_ghz_form(&back) - three_tangle_ghz_form(&form)).abs() < 1e-9);
        prop_assert!((interference_ghz_form(&back) - interference_ghz_form(&form)).abs() < 1e-9);
    }

    #[test]
    fn acin_reconstructs_random_states(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = PureState::new(vec![2, 2, 2], linalg::random_unit_vector(8, &mut rng)).unwrap();
        let f = acin_decompose(&s).unwrap();
        prop_assert!((f.reconstruct().inner(&s).unwrap().norm() - 1.0).abs() < 1e-9);
        // The tangle of the canonical form is 4λ₀²λ₄².
        let l = f.lambdas;
        prop_assert!((4.0 * l[0] * l[0] * l[4] * l[4] - three_tangle(&s).unwrap()).abs() < 1e-9);
    }
}
