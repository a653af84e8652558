use std::collections::BTreeSet;
use std::time::Instant;

use c2u_core::normalize::normalize;
use c2u_core::synth::{synthetic_ir, SynthSpec};
use c2u_core::view::{byte_budget, generate_view, is_represented, rank_elements, select_elements, ScoreWeights};
use c2u_core::{DiagramType, ProjectIr};
use proptest::prelude::*;

fn fuzzed_ir() -> impl Strategy<Value = ProjectIr> {
    (0usize..2500, 0usize..40, 0usize..30, 0usize..6, any::<u64>()).prop_map(|(n, methods, annotation, infra, seed)| {
        let spec = SynthSpec {
            max_methods: methods,
            max_annotation_len: annotation,
            infra_entries: infra,
            ..SynthSpec::with_elements(n)
        };
        normalize(synthetic_ir(&spec, seed))
    })
}

fn every_view_holds(ir: &ProjectIr) -> Result<(), TestCaseError> {
    let names: BTreeSet<&str> = ir.element_names().collect();
    for dt in DiagramType::ALL {
        let view = generate_view(ir, dt).unwrap();
        let bytes = view.to_canonical_json();
        prop_assert!(view.byte_size <= byte_budget(dt), "{dt}: {} > {}", view.byte_size, byte_budget(dt));
        prop_assert_eq!(bytes.len(), view.byte_size);
        prop_assert_eq!(&bytes, &generate_view(ir, dt).unwrap().to_canonical_json());

        for name in view.element_names() {
            prop_assert!(names.contains(name), "{} not in IR", name);
        }

        let ranked = rank_elements(ir, dt, &ScoreWeights::default());
        let retained: BTreeSet<&str> = view.element_names().into_iter().collect();
        let k = view.element_budget.min(ranked.len());
        if k > 0 && k < ranked.len() {
            let cutoff = ranked[k - 1].score.score;
            for r in ranked.iter().filter(|r| r.score.score > cutoff && is_represented(dt, r.element)) {
                prop_assert!(retained.contains(r.element.name()), "{} dropped despite score {}", r.element.name(), r.score.score);
            }
        }

        let full: BTreeSet<_> = select_elements(ir, dt, k).iter().map(|r| (r.element.name(), r.element.kind())).collect();
        let half: BTreeSet<_> = select_elements(ir, dt, k.div_ceil(2)).iter().map(|r| (r.element.name(), r.element.kind())).collect();
        prop_assert!(half.is_subset(&full));
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn views_respect_budget_and_invariants(ir in fuzzed_ir()) {
        every_view_holds(&ir)?;
    }
}

#[test]
fn large_ir_is_shrunk_under_budget() {
    let spec = SynthSpec { max_methods: 30, max_attributes: 20, max_annotation_len: 60, ..SynthSpec::with_elements(6000) };
    let ir = normalize(synthetic_ir(&spec, 1));
    assert!(ir.to_canonical_json().len() > 5_000_000);
    for dt in DiagramType::ALL {
        let view = generate_view(&ir, dt).unwrap();
        assert!(view.byte_size <= byte_budget(dt));
        if dt != DiagramType::Deployment {
            assert!(view.shrink_iterations > 0, "{dt} should need shrinking");
        }
    }
}

#[test]
fn empty_ir_gives_empty_views() {
    let ir = normalize(ProjectIr::new("empty"));
    for dt in DiagramType::ALL {
        let view = generate_view(&ir, dt).unwrap();
        assert!(view.element_names().is_empty());
        assert_eq!(view.shrink_iterations, 0);
    }
}

#[test]
fn five_thousand_elements_compact_quickly() {
    let ir = normalize(synthetic_ir(&SynthSpec::with_elements(5000), 42));
    let mut times: Vec<f64> = (0..20)
        .map(|_| {
            let t = Instant::now();
            generate_view(&ir, DiagramType::Class).unwrap();
            t.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(f64::total_cmp);
    assert!(times[10] < 0.05, "median {:.1} ms", times[10] * 1e3);
}
