use std::collections::BTreeSet;

use c2u_core::normalize::{filter_noise, normalize};
use c2u_core::synth::{synthetic_ir, SynthSpec};
use c2u_core::ProjectIr;
use proptest::prelude::*;

fn spec() -> impl Strategy<Value = (SynthSpec, u64)> {
    (0usize..120, 0usize..60, 0.0f64..0.4, any::<u64>()).prop_map(|(classes, functions, noise_ratio, seed)| {
        (SynthSpec { classes, functions, noise_ratio, ..SynthSpec::default() }, seed)
    })
}

fn all_names(ir: &ProjectIr) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for c in &ir.classes {
        out.insert(c.name.clone());
        out.extend(c.methods.iter().map(|m| m.name.clone()));
        out.extend(c.attributes.iter().map(|a| a.name.clone()));
    }
    out.extend(ir.functions.iter().map(|f| f.name.clone()));
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn normalize_is_idempotent((spec, seed) in spec()) {
        let once = normalize(synthetic_ir(&spec, seed));
        let twice = normalize(once.clone());
        prop_assert_eq!(&once, &twice);
        prop_assert!(once.normalized);
        once.validate().unwrap();
    }

    #[test]
    fn visibilities_become_canonical((spec, seed) in spec()) {
        let ir = normalize(synthetic_ir(&spec, seed));
        for c in &ir.classes {
            prop_assert!(c.visibility.is_canonical());
            prop_assert!(c.methods.iter().all(|m| m.visibility.is_canonical()));
            prop_assert!(c.attributes.iter().all(|a| a.visibility.is_canonical()));
        }
    }

    #[test]
    fn only_noise_filtering_removes_elements((spec, seed) in spec()) {
        let raw = synthetic_ir(&spec, seed);
        let filtered = filter_noise(raw.clone()).element_count();
        let normalized = normalize(raw.clone()).element_count();
        prop_assert!(normalized <= raw.element_count());
        prop_assert_eq!(normalized, filtered);
    }

    #[test]
    fn no_names_are_invented((spec, seed) in spec()) {
        let raw = synthetic_ir(&spec, seed);
        let ir = normalize(raw.clone());
        let before = all_names(&raw);
        prop_assert!(all_names(&ir).is_subset(&before));
        let raw_targets: Vec<&String> = raw.classes.iter().flat_map(|c| c.extends.iter().chain(&c.implements)).collect();
        for c in &ir.classes {
            for t in c.extends.iter().chain(&c.implements) {
                prop_assert!(raw_targets.iter().any(|r| r.contains(t.as_str())), "invented target {}", t);
            }
        }
    }
}
