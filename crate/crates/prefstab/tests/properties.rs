mod common;

use prefstab::rational::qr;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn payoff_is_multilinear_and_matches_correlated(seed in any::<u64>()) {
        let r = common::multilinear_case(seed);
        prop_assert!(r.is_ok(), "{:?}", r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn unobserved_fitness_equals_aggregate_payoff(seed in any::<u64>()) {
        let r = common::balanced_p0_case(seed);
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn status_weights_sum_to_one(num in 0i64..=60, den in 1i64..=60) {
        prop_assume!(num <= den);
        let r = common::status_weight_case(&qr(num, den));
        prop_assert!(r.is_ok(), "{:?}", r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn partial_fitness_recovers_extremes(seed in any::<u64>()) {
        let r = common::partial_extremes_case(seed);
        prop_assert!(r.is_ok(), "{:?}", r);
    }
}

#[test]
fn every_corpus_certificate_matches_direct_fitness() {
    let certs = common::corpus_certificates();
    assert!(certs.len() >= 8, "only {} certificates", certs.len());
    for (c, cert) in &certs {
        common::certificate_case(c, cert).unwrap();
    }
}
