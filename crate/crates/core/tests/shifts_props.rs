use posinorm::chains::chain_profile;
use posinorm::numeric::{ComplexMatrix, ToleranceContext};
use posinorm::shifts::*;
use proptest::prelude::*;

fn closed_form_kinds() -> Vec<WeightSequence> {
    vec![
        WeightSequence::constant(2.5).unwrap(),
        WeightSequence::power_law(1.5).unwrap(),
        WeightSequence::power_law(-0.5).unwrap(),
        WeightSequence::power_law(-2.0).unwrap(),
        WeightSequence::reciprocal(),
        WeightSequence::geometric(0.5).unwrap(),
        WeightSequence::geometric(-0.8).unwrap(),
        WeightSequence::geometric(3.0).unwrap(),
    ]
}

fn matrix_power(m: &ComplexMatrix, n: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::identity(m.rows());
    for _ in 0..n {
        p = &p * m;
    }
    p
}

#[test]
fn reciprocal_central_binomials() {
    let w = WeightSequence::reciprocal();
    let expected = [2.0, 6.0, 20.0, 70.0, 252.0];
    for (i, e) in expected.iter().enumerate() {
        let v = shift_power_sup(&w, i + 1, 1000).unwrap();
        assert!(v.closed_form && !v.infinite);
        assert_eq!(v.sup_value, *e);
        assert_eq!(v.bound_n_squared, 2f64.powi(((i + 1) * (i + 1)) as i32));
        assert!(v.bound_holds);
    }
}

#[test]
fn bound_chain_holds_for_every_closed_form() {
    for w in closed_form_kinds() {
        for n in 1..=5 {
            let v = shift_power_sup(&w, n, 2000).unwrap();
            assert!(v.bound_holds, "{w} n={n}: {v:?}");
            if !v.infinite {
                assert!(v.sup_value <= v.step_bound * (1.0 + 1e-12));
                assert!(v.step_bound <= v.bound_n_squared * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn posinormality_follows_finiteness() {
    for w in closed_form_kinds() {
        let p = shift_posinormal(&w, 2, 2000).unwrap();
        assert_eq!(p.posinormal, !p.verdict.infinite, "{w}");
    }
    let geo = shift_posinormal(&WeightSequence::geometric(0.5).unwrap(), 1, 100).unwrap();
    assert!(geo.posinormal);
    assert!((geo.verdict.sup_value - 2.0).abs() < 1e-12);
}

#[test]
fn explicit_periodic_lists_are_estimates() {
    let w = WeightSequence::explicit(vec![1.0, 2.0]).unwrap();
    let v = shift_power_sup(&w, 1, 500).unwrap();
    assert!(!v.closed_form);
    assert!((v.sup_value - 2.0).abs() < 1e-12);
}

#[test]
fn zero_weights_are_rejected() {
    assert!(matches!(
        WeightSequence::explicit(vec![1.0, 0.0, 1.0]),
        Err(ShiftError::ZeroWeight { .. })
    ));
    assert!(WeightSequence::constant(0.0).is_err());
    assert!(WeightSequence::geometric(0.0).is_err());
}

#[test]
fn gram_diagonals_match_dense_truncation() {
    let len = 64;
    for w in [
        WeightSequence::reciprocal(),
        WeightSequence::power_law(0.5).unwrap(),
        WeightSequence::geometric(0.9).unwrap(),
    ] {
        let s = build_shift_truncation(&w, len).unwrap();
        for n in 1..=3 {
            let sn = matrix_power(&s, n);
            let range = &sn * &sn.adjoint();
            let domain = &sn.adjoint() * &sn;
            let g = shift_gram_diagonals(&w, n, len).unwrap();
            for i in 0..len {
                assert!(
                    (range.get(i, i).re - g.range_side[i]).abs()
                        <= 1e-12 * g.range_side[i].max(1.0)
                );
                if i + n < len {
                    assert!(
                        (domain.get(i, i).re - g.domain_side[i]).abs()
                            <= 1e-12 * g.domain_side[i].max(1.0),
                        "{w} n={n} i={i}"
                    );
                }
            }
        }
    }
}

#[test]
fn truncation_ranks_strictly_decrease() {
    let s = build_shift_truncation(&WeightSequence::reciprocal(), 12).unwrap();
    let p = chain_profile(&s, &ToleranceContext::default(), 12).unwrap();
    for w in p.range_ranks.windows(2) {
        assert!(w[1] < w[0] || w[0] == 0);
    }
    assert_eq!(p.range_ranks[12], 0);
    let b = build_shift_truncation(&WeightSequence::bilateral_reciprocal(), 4).unwrap();
    assert_eq!(b.rows(), 9);
}

proptest! {
    #[test]
    fn constant_shift_is_isometric_up_to_scale(c in 0.1f64..10.0, n in 1usize..6) {
        let v = shift_power_sup(&WeightSequence::constant(c).unwrap(), n, 100).unwrap();
        prop_assert_eq!(v.sup_value, 1.0);
        prop_assert!(v.bound_holds);
    }

    #[test]
    fn geometric_sup_matches_formula(r in 0.2f64..0.95, n in 1usize..4) {
        let v = shift_power_sup(&WeightSequence::geometric(r).unwrap(), n, 100).unwrap();
        let expected = r.powi(-((n * n) as i32));
        prop_assert!((v.sup_value - expected).abs() <= 1e-10 * expected);
    }

    #[test]
    fn horizon_scan_never_exceeds_closed_form(p in 0.1f64..2.0, n in 1usize..4) {
        let w = WeightSequence::power_law(-p).unwrap();
        let exact = shift_power_sup(&w, n, 10).unwrap().sup_value;
        let scanned = scan_window_log_sup(&w, n, 300).exp();
        prop_assert!(scanned <= exact * (1.0 + 1e-10));
    }
}
