mod support;

use corelog::ocel::{round_trip, to_ocel, write_json, EncodeMode, OcelFormat};
use corelog::validation::is_strictly_valid;
use proptest::prelude::*;
use support::arb_valid_log;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn strictly_valid_logs_survive_both_formats(log in arb_valid_log()) {
        prop_assert!(is_strictly_valid(&log));
        let expected = log.canonicalize();
        for format in OcelFormat::ALL {
            let back = round_trip(&log, format, EncodeMode::Strict).unwrap();
            prop_assert_eq!(&back, &expected, "{}", format);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encoding_is_deterministic(log in arb_valid_log()) {
        let write = |l: &corelog::model::CoreLog| {
            let mut out = Vec::new();
            write_json(&to_ocel(l).unwrap(), &mut out).unwrap();
            out
        };
        prop_assert_eq!(write(&log), write(&log.canonicalize()));
    }
}
