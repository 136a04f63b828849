use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slocc_core::linalg::{self, diagonal, real, CMatrix, C64, ONE, ZERO};
use slocc_core::locc_sim::{
    apply_branch, branch_interference, branch_numerators, check_completeness, run_protocol, stop_and_reconstruct,
    validate_success_structure, verify_interference_conservation, verify_normalization_conservation, KrausBranch,
    Measurement, ProtocolTree, StopReconstruct, TermMapping,
};
use slocc_core::states::{two_term_of, GhzClassForm, PureState, TwoTermDecomposition};
use slocc_core::Error;

fn ghz_pair() -> TwoTermDecomposition {
    TwoTermDecomposition::basis_pair(&[2, 2, 2], 0, 1).unwrap()
}

/// `|0⟩ ↦ first`, `|1⟩ ↦ second` on each party, the first party also
/// carrying the target weights.
fn product_branch(form: &GhzClassForm, swapped: bool, scale: f64) -> KrausBranch {
    let e0 = vec![ONE, ZERO];
    let weights = [real(form.delta.cos()), C64::from_polar(form.delta.sin(), form.phi)];
    let ops = form
        .local_vectors()
        .into_iter()
        .enumerate()
        .map(|(j, v)| {
            let (first, second) = if swapped { (v, e0.clone()) } else { (e0.clone(), v) };
            let mut m = linalg::matrix_from_columns(2, &[first, second]);
            if j == 0 {
                let w = if swapped { [weights[1], weights[0]] } else { weights };
                m *= diagonal(&w) * real(scale);
            }
            m
        })
        .collect();
    KrausBranch::new(ops)
}

#[test]
fn phase_flip_branches() {
    let form = GhzClassForm::symmetric(0.5, 0.0).unwrap();
    let target = two_term_of(&form);
    let flipped = PureState::new(
        vec![2, 2, 2],
        (0..8)
            .map(|i| match i {
                0 => real(1.0),
                7 => real(-1.0),
                _ => ZERO,
            })
            .collect(),
    )
    .unwrap();
    for (swapped, mapping) in [(false, TermMapping::Parallel), (true, TermMapping::Swapped)] {
        let o = 0.7;
        let branch = product_branch(&form, swapped, o);
        assert_eq!(validate_success_structure(&branch, &ghz_pair(), &target).unwrap(), mapping);
        let out = apply_branch(&PureState::ghz(3, 2), &branch).unwrap();
        let k = 1.0 / (1.0 + form.cross_term());
        let k_flip = 1.0 / (1.0 - form.cross_term());
        // Each branch type succeeds with probability o²/(2K) and acts on the
        // phase-flipped GHZ state with probability o²/(2K′).
        assert!((out.probability - o * o / (2.0 * k)).abs() < 1e-12);
        let on_flip = apply_branch(&flipped, &branch).unwrap();
        assert!((on_flip.probability - o * o / (2.0 * k_flip)).abs() < 1e-12);
        let s = out.state.unwrap();
        assert!((s.inner(&target.to_state()).unwrap().norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn failure_projector_is_not_a_success_structure() {
    let branch = KrausBranch::local(&[2, 2, 2], 1, diagonal(&[ONE, ZERO])).unwrap();
    let target = two_term_of(&GhzClassForm::symmetric(0.5, 0.0).unwrap());
    assert!(matches!(validate_success_structure(&branch, &ghz_pair(), &target), Err(Error::StructuralViolation(_))));
}

fn random_two_outcome(rng: &mut impl Rng, party: usize) -> Measurement {
    // M₁ = U₁ √E, M₂ = U₂ √(1 − E) with 0 < E < 1.
    let v = linalg::random_unitary(2, rng);
    let e = [0.05 + 0.9 * rng.random::<f64>(), 0.05 + 0.9 * rng.random::<f64>()];
    let p1 = &v * diagonal(&[real(e[0].sqrt()), real(e[1].sqrt())]) * v.adjoint();
    let p2 = &v * diagonal(&[real((1.0 - e[0]).sqrt()), real((1.0 - e[1]).sqrt())]) * v.adjoint();
    Measurement::new(party, vec![linalg::random_unitary(2, rng) * p1, linalg::random_unitary(2, rng) * p2]).unwrap()
}

#[test]
fn stop_and_reconstruct_on_random_measurements() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for trial in 0..100 {
        let party = trial % 3;
        let m = random_two_outcome(&mut rng, party);
        let input = PureState::new(vec![2, 2, 2], linalg::random_unit_vector(8, &mut rng)).unwrap();
        for x in [0.1, 0.5, 2.0] {
            let s = stop_and_reconstruct(&m, x).unwrap();
            let (r1, r2) = s.identity_residuals();
            assert!(r1 < 1e-10 && r2 < 1e-10, "residuals {r1:e} {r2:e}");
            assert!(check_completeness(&s.stopped) < 1e-12);
            assert!(check_completeness(&s.reconstruct) < 1e-10);
            assert!(linalg::commutator_norm(&s.positive[0], &s.positive[1]) < 1e-12);

            let trace = run_protocol(&input, &s.composite_tree()).unwrap();
            let mut p = [0.0; 2];
            let mut maps = [CMatrix::zeros(2, 2), CMatrix::zeros(2, 2)];
            for leaf in &trace.leaves {
                let k = StopReconstruct::original_outcome(&leaf.path);
                p[k] += leaf.probability;
                let op = &leaf.branch.operators[party];
                maps[k] += op.adjoint() * op;
            }
            for k in 0..2 {
                let direct = apply_branch(&input, &m.branches(&[2, 2, 2]).unwrap()[k]).unwrap().probability;
                assert!((p[k] - direct).abs() < 1e-9);
                let effect = m.operators[k].adjoint() * &m.operators[k];
                assert!(linalg::max_abs(&(&maps[k] - effect)) < 1e-10);
            }
        }
    }
}

#[test]
fn stopped_branch_interference_is_continuous() {
    let form = GhzClassForm::symmetric(0.5, 0.0).unwrap();
    let initial = two_term_of(&form);
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..3 {
        let m = random_two_outcome(&mut rng, 0);
        let interference = |x: f64| {
            let s = stop_and_reconstruct(&m, x).unwrap();
            let b = &s.stopped.branches(&[2, 2, 2]).unwrap()[1];
            branch_interference(b, &initial).unwrap()
        };
        let dx = 1e-3;
        let mut prev = interference(0.0);
        for k in 1..=3000 {
            let x = k as f64 * dx;
            let cur = interference(x);
            let slope = (interference(x - dx + dx / 10.0) - interference(x - dx)).abs() / (dx / 10.0);
            assert!((cur - prev).abs() <= 10.0 * dx * slope + 1e-12, "jump at x = {x}");
            prev = cur;
        }
    }
}

#[test]
fn stop_and_reconstruct_errors() {
    let m = Measurement::new(0, vec![diagonal(&[ONE, real(0.6)]), diagonal(&[ZERO, real(0.8)])]).unwrap();
    // D = 1 + tanh x (M′₂² − M′₁²) has eigenvalue 1 − tanh x on |0⟩.
    let large = stop_and_reconstruct(&m, 40.0);
    assert!(matches!(large, Err(Error::IllConditioned(_))), "{large:?}");
    assert!(stop_and_reconstruct(&m, 1.0).is_ok());
}

fn arb_form() -> impl Strategy<Value = GhzClassForm> {
    let h = std::f64::consts::FRAC_PI_2;
    (0.05..std::f64::consts::FRAC_PI_4, 0.05..h, 0.05..h, 0.05..h, 0.0..std::f64::consts::TAU)
        .prop_map(|(d, a, b, g, p)| GhzClassForm::new(d, a, b, g, p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_measurement_chains_conserve(form in arb_form(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let initial = two_term_of(&form);
        let first = random_two_outcome(&mut rng, 0);
        let second = random_two_outcome(&mut rng, 2);
        let tree = ProtocolTree::measure(first).then(&ProtocolTree::measure(second));
        let trace = run_protocol(&initial.to_state(), &tree).unwrap();
        prop_assert!((trace.total_probability - 1.0).abs() < 1e-9);
        let branches = trace.branches();
        prop_assert!(verify_interference_conservation(&branches, &initial).unwrap() < 1e-9);
        let (res, max_pn) = verify_normalization_conservation(&branches, &initial).unwrap();
        prop_assert!(res < 1e-9);
        // Branch weights are nonnegative and sum to N, so none exceeds it; N
        // itself exceeds 1 when the initial interference is negative.
        prop_assert!(max_pn <= initial.normalization() + 1e-12);
        for (leaf, b) in trace.leaves.iter().zip(&branches) {
            let (pi, pn) = branch_numerators(b, &initial).unwrap();
            prop_assert!((pi + pn - leaf.probability).abs() < 1e-12);
        }
    }

    #[test]
    fn protocol_json_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tree = ProtocolTree::measure(random_two_outcome(&mut rng, 1))
            .then(&ProtocolTree::measure(random_two_outcome(&mut rng, 0)));
        let text = slocc_core::locc_sim::protocol_to_json(&tree);
        prop_assert_eq!(slocc_core::locc_sim::protocol_from_json(&text).unwrap(), tree);
    }
}

#[test]
fn weighted_normalization_can_exceed_one() {
    // Nearly coinciding terms with destructive interference: N > 1.
    let form = GhzClassForm::new(0.6242923175150916, 0.05, 0.05, 0.05, 2.7049452016028392).unwrap();
    let initial = two_term_of(&form);
    assert!(initial.normalization() > 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let tree = ProtocolTree::measure(random_two_outcome(&mut rng, 0))
        .then(&ProtocolTree::measure(random_two_outcome(&mut rng, 2)));
    let trace = run_protocol(&initial.to_state(), &tree).unwrap();
    let (res, max_pn) = verify_normalization_conservation(&trace.branches(), &initial).unwrap();
    assert!(res < 1e-9);
    assert!(max_pn <= initial.normalization() + 1e-12);
}
