use posinorm::harness::*;
use posinorm::numeric::ToleranceContext;
use proptest::prelude::*;

fn tol() -> ToleranceContext {
    ToleranceContext::default()
}

fn matrices(g: &Generated) -> Vec<&posinorm::numeric::ComplexMatrix> {
    match &g.instance {
        Instance::Single(t) => vec![t],
        Instance::Pair { s, t } => vec![s, t],
    }
}

#[test]
fn runs_are_deterministic() {
    for suite in Suite::ALL {
        let a = run_suite(suite, 30, 6, 11, &tol()).unwrap();
        let b = run_suite(suite, 30, 6, 11, &tol()).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert!(a.passed, "{suite}: {:?}", a.failures);
    }
}

#[test]
fn trial_seeds_depend_on_suite_seed_and_index() {
    let s = trial_seed(Suite::Douglas, 1, 0);
    assert_ne!(s, trial_seed(Suite::Douglas, 1, 1));
    assert_ne!(s, trial_seed(Suite::Douglas, 2, 0));
    assert_ne!(s, trial_seed(Suite::T3, 1, 0));
    assert_eq!(s, trial_seed(Suite::Douglas, 1, 0));
}

#[test]
fn replay_reproduces_a_trial() {
    for suite in Suite::ALL {
        let seed = trial_seed(suite, 5, 3);
        let a = replay(suite, seed, 8, &tol()).unwrap();
        let b = replay(suite, seed, 8, &tol()).unwrap();
        assert_eq!(a.filtered, b.filtered);
        assert_eq!(a.resampled, b.resampled);
        assert_eq!(a.failures.len(), b.failures.len());
    }
}

#[test]
fn suite_names_round_trip() {
    for suite in Suite::ALL {
        assert_eq!(suite.name().parse::<Suite>().unwrap(), suite);
    }
    assert_eq!(
        parse_suite_selection("all").unwrap().len(),
        Suite::ALL.len()
    );
    assert!(parse_suite_selection("bogus").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_norms_stay_in_band(kind_ix in 0usize..GeneratorKind::ALL.len(), dim in 2usize..12, seed in any::<u64>()) {
        let kind = GeneratorKind::ALL[kind_ix];
        let g = generate(kind, dim, seed);
        // the zero matrix is a deliberate edge case; anything else sits in the band
        for m in matrices(&g) {
            prop_assert!(m.is_square());
            prop_assert_eq!(m.rows(), dim);
            let norm = m.spectral_norm().unwrap();
            prop_assert!(norm == 0.0 || (0.1..=10.0).contains(&norm), "{} norm {}", kind.name(), norm);
        }
    }

    #[test]
    fn generation_is_seed_stable(kind_ix in 0usize..GeneratorKind::ALL.len(), dim in 2usize..8, seed in any::<u64>()) {
        let kind = GeneratorKind::ALL[kind_ix];
        let (a, b) = (generate(kind, dim, seed), generate(kind, dim, seed));
        for (x, y) in matrices(&a).into_iter().zip(matrices(&b)) {
            prop_assert_eq!(x.max_abs_diff(y), 0.0);
        }
    }
}
