use everett::cat::{
    basis_invariance_check, build_phi_observer, build_record_unitary, cat_basis, cat_branch_measures,
    definite_blank, definite_closed_form, joint_label, observe_superposition, phi_observer_candidate,
    seeded_invariance_trials, uprime_on_definite, CatRecord, CatState, SuperpositionParams,
};
use everett::hilbert::{Amplitude, SquareMatrix};
use everett::Error;
use proptest::prelude::*;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

fn params() -> impl Strategy<Value = SuperpositionParams> {
    (0.0f64..1.0, 0.0..2.0 * PI, 0.0..2.0 * PI).prop_map(|(a_sq, pa, pb)| {
        SuperpositionParams::new(
            Amplitude::from_polar(a_sq.sqrt(), pa),
            Amplitude::from_polar((1.0 - a_sq).sqrt(), pb),
        )
        .unwrap()
    })
}

fn balanced() -> impl Strategy<Value = SuperpositionParams> {
    (0.0..2.0 * PI, 0.0..2.0 * PI).prop_map(|(pa, pb)| {
        SuperpositionParams::new(
            Amplitude::from_polar(FRAC_1_SQRT_2, pa),
            Amplitude::from_polar(FRAC_1_SQRT_2, pb),
        )
        .unwrap()
    })
}

fn measure(p: &SuperpositionParams, r: CatRecord) -> f64 {
    cat_branch_measures(&observe_superposition(p).unwrap()).get(&r).map_or(0.0, |m| m.linear())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn observation_is_the_superposed_closed_form(p in params()) {
        let s = observe_superposition(&p).unwrap();
        for label in cat_basis() {
            let expected = if label == joint_label(CatState::Live, CatRecord::RecLive) {
                p.a()
            } else if label == joint_label(CatState::Dead, CatRecord::RecDead) {
                p.b()
            } else {
                Amplitude::new(0.0, 0.0)
            };
            prop_assert!((s.amplitude(&label) - expected).norm() < 1e-12);
        }
        prop_assert_eq!(s.amplitude(&joint_label(CatState::Live, CatRecord::RecDead)), Amplitude::new(0.0, 0.0));
        prop_assert_eq!(s.amplitude(&joint_label(CatState::Dead, CatRecord::RecLive)), Amplitude::new(0.0, 0.0));
    }

    #[test]
    fn record_branch_measures_are_moduli(p in params()) {
        prop_assert!((measure(&p, CatRecord::RecLive) - p.a().norm_sqr()).abs() < 1e-12);
        prop_assert!((measure(&p, CatRecord::RecDead) - p.b().norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn uprime_matches_closed_form_when_balanced(p in balanced()) {
        for which in CatState::ALL {
            let applied = uprime_on_definite(&p, which).unwrap();
            let closed = definite_closed_form(&p, which).unwrap();
            for label in cat_basis() {
                prop_assert!((applied.amplitude(&label) - closed.amplitude(&label)).norm() < 1e-10);
            }
            let m = cat_branch_measures(&applied);
            prop_assert!((m[&CatRecord::RecPlus].linear() - 0.5).abs() < 1e-10);
            prop_assert!((m[&CatRecord::RecMinus].linear() - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn unbalanced_uprime_is_obstructed(p in params()) {
        let overlap = p.a().norm_sqr() - p.b().norm_sqr();
        prop_assume!(overlap.abs() > 1e-6 && p.a().norm() > 1e-6 && p.b().norm() > 1e-6);
        match build_phi_observer(&p) {
            Err(Error::NoUnitaryCompletion { overlap: o }) => prop_assert!((o - overlap).abs() < 1e-12),
            other => prop_assert!(false, "expected obstruction, got {:?}", other.map(|_| ())),
        }
        let mut candidate = phi_observer_candidate(&p).unwrap();
        prop_assert!(!candidate.is_unitary(1e-10));
    }

    #[test]
    fn measures_survive_basis_rotation(p in params(), seed in any::<u64>()) {
        for r in seeded_invariance_trials(&p, seed, 5).unwrap() {
            prop_assert!(r.max_deviation <= 1e-10);
            prop_assert!(r.invariant);
        }
    }
}

#[test]
fn record_unitary_keeps_definite_states_definite() {
    let u = build_record_unitary();
    for cat in CatState::ALL {
        let out = u.apply(&definite_blank(cat)).unwrap();
        let m = cat_branch_measures(&out);
        assert_eq!(m.len(), 1);
        assert_eq!(m[&CatRecord::of(cat)].linear(), 1.0);
    }
}

#[test]
fn observation_with_thirty_percent_live() {
    let p = SuperpositionParams::from_a_sq(0.3).unwrap();
    assert!((measure(&p, CatRecord::RecLive) - 0.3).abs() < 1e-12);
    assert!((measure(&p, CatRecord::RecDead) - 0.7).abs() < 1e-12);
}

#[test]
fn obstruction_value_at_thirty_percent() {
    let p = SuperpositionParams::from_a_sq(0.3).unwrap();
    match uprime_on_definite(&p, CatState::Live) {
        Err(Error::NoUnitaryCompletion { overlap }) => assert!((overlap + 0.4).abs() < 1e-12),
        other => panic!("unexpected {:?}", other.map(|_| ())),
    }
}

#[test]
fn uprime_sends_phi_states_to_definite_records() {
    let p = SuperpositionParams::from_a_sq(0.5).unwrap();
    let u = build_phi_observer(&p).unwrap();
    assert!(u.unitarity_residual() <= 1e-10);
    let plus = everett::cat::superposed_blank(&p, 1.0).unwrap();
    let minus = everett::cat::superposed_blank(&p, -1.0).unwrap();
    let mp = cat_branch_measures(&u.apply(&plus).unwrap());
    let mm = cat_branch_measures(&u.apply(&minus).unwrap());
    assert!((mp[&CatRecord::RecPlus].linear() - 1.0).abs() < 1e-12);
    assert!((mm[&CatRecord::RecMinus].linear() - 1.0).abs() < 1e-12);
}

#[test]
fn identity_rotation_has_zero_deviation() {
    let p = SuperpositionParams::from_a_sq(0.3).unwrap();
    let r = basis_invariance_check(&p, &SquareMatrix::identity(2)).unwrap();
    assert_eq!(r.max_deviation, 0.0);
}

#[test]
fn non_unitary_rotation_rejected() {
    let p = SuperpositionParams::from_a_sq(0.3).unwrap();
    let m = SquareMatrix::from_fn(2, |_, _| Amplitude::new(1.0, 0.0));
    assert!(matches!(basis_invariance_check(&p, &m), Err(Error::InvalidBasisTransform { .. })));
}

#[test]
fn zero_component_rejected_by_uprime() {
    let p = SuperpositionParams::from_a_sq(1.0).unwrap();
    assert!(matches!(build_phi_observer(&p), Err(Error::InvalidParams(_))));
}
