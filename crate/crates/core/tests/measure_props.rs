use everett::hilbert::{Amplitude, BasisLabel, Roles, StateVector, Symbol};
use everett::measure::{coeff_measure, subset_measure, verify_additivity, MeasureValue, SubsetSelector};
use everett::Error;
use proptest::prelude::*;

const DIM: u16 = 8;

fn alphabet() -> Vec<Symbol> {
    (1..=DIM).map(Symbol::Outcome).collect()
}

fn label(i: u16) -> BasisLabel {
    BasisLabel::object_only(vec![Symbol::Outcome(i + 1)])
}

fn amps() -> impl Strategy<Value = Vec<Amplitude>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), DIM as usize)
        .prop_map(|v| v.into_iter().map(|(re, im)| Amplitude::new(re, im)).collect::<Vec<_>>())
        .prop_filter("nonzero", |v| v.iter().map(|a| a.norm_sqr()).sum::<f64>() > 1e-6)
}

fn build(amps: &[Amplitude]) -> StateVector {
    StateVector::new((0..DIM).map(label).zip(amps.iter().copied()), Roles::object(alphabet())).unwrap()
}

/// Assigns each basis index a part in `0..parts`.
fn partition(assign: &[usize], parts: usize) -> Vec<SubsetSelector> {
    (0..parts)
        .map(|k| {
            SubsetSelector::labels(
                (0..DIM).filter(|&i| assign[i as usize] % parts == k).map(label),
            )
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn additive_on_partitions(
        a in amps(),
        assign in prop::collection::vec(0usize..8, DIM as usize),
        parts in 1usize..6,
    ) {
        let s = build(&a);
        let p = partition(&assign, parts);
        prop_assert!(verify_additivity(&s, &p).unwrap());
        let sum: f64 = p.iter().map(|sel| subset_measure(&s, sel).linear()).sum();
        prop_assert!((sum - 1.0).abs() < 1e-10);
    }

    #[test]
    fn total_measure_is_one(a in amps()) {
        let s = build(&a);
        prop_assert!((subset_measure(&s, &SubsetSelector::All).linear() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn quarter_turn_phases_leave_measure_unchanged(re in -1e3f64..1e3, im in -1e3f64..1e3, k in 0usize..4) {
        let x = Amplitude::new(re, im);
        let turn = [Amplitude::new(1.0, 0.0), Amplitude::i(), Amplitude::new(-1.0, 0.0), -Amplitude::i()][k];
        prop_assert_eq!(coeff_measure(x * turn).linear(), coeff_measure(x).linear());
    }

    #[test]
    fn arbitrary_phase_changes_measure_by_rounding_only(re in -1e3f64..1e3, im in -1e3f64..1e3, theta in 0.0f64..6.3) {
        let x = Amplitude::new(re, im);
        let m = coeff_measure(x).linear();
        let rotated = coeff_measure(x * Amplitude::from_polar(1.0, theta)).linear();
        prop_assert!((rotated - m).abs() <= 8.0 * f64::EPSILON * m);
    }

    #[test]
    fn complement_sums_to_one(a in amps(), keep in prop::collection::vec(any::<bool>(), DIM as usize)) {
        let s = build(&a);
        let sel = SubsetSelector::labels((0..DIM).filter(|&i| keep[i as usize]).map(label));
        let m = subset_measure(&s, &sel);
        let c = subset_measure(&s, &sel.clone().complement());
        prop_assert!((m.linear() + c.linear() - 1.0).abs() < 1e-12);
        prop_assert!((m.complement().linear() - c.linear()).abs() < 1e-12);
    }

    #[test]
    fn log_and_linear_views_agree(x in 1e-300f64..1.0) {
        let m = MeasureValue::from_linear(x);
        prop_assert!((MeasureValue::from_log(m.log()).linear() - x).abs() <= 4.0 * f64::EPSILON * x);
    }
}

#[test]
fn overlapping_parts_are_rejected() {
    let s = build(&vec![Amplitude::new(1.0, 0.0); DIM as usize]);
    let p = vec![
        SubsetSelector::labels([label(0), label(1)]),
        SubsetSelector::labels((1..DIM).map(label)),
    ];
    assert!(matches!(verify_additivity(&s, &p), Err(Error::Partition(_))));
}

#[test]
fn uncovered_support_is_rejected() {
    let s = build(&vec![Amplitude::new(1.0, 0.0); DIM as usize]);
    let p = vec![SubsetSelector::labels([label(0)])];
    assert!(matches!(verify_additivity(&s, &p), Err(Error::Partition(_))));
}

#[test]
fn uniform_state_subset() {
    let s = build(&vec![Amplitude::new(1.0, 0.0); DIM as usize]);
    let m = subset_measure(&s, &SubsetSelector::labels([label(2), label(5)]));
    assert!((m.linear() - 0.25).abs() < 1e-15);
}
