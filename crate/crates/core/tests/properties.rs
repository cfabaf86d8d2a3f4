mod common;

use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn support_monotone(seed in any::<u64>()) {
        common::support_monotone(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn support_bound(seed in any::<u64>()) {
        common::support_bound(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn non_dominance(seed in any::<u64>()) {
        common::non_dominance(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn canonical_quotient(seed in any::<u64>()) {
        common::canonical_quotient(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn instantiates_monotone(seed in any::<u64>()) {
        common::instantiates_monotone(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn deterministic_output(seed in any::<u64>()) {
        common::deterministic_output(seed).map_err(TestCaseError::fail)?;
    }
}
