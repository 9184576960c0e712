//! Property suites for the bounded-transform pipeline, checked against the
//! reference interpreter on the pre-transform AST.

use pnpchain_core::bits::Bits;
use pnpchain_core::jash::{
    complexity_bound, execute, parse, transform_bounded, validate, HaltReason, NoData,
};
use pnpchain_core::testing::{generate_program, reference_execute, SplitMix64};
use pnpchain_core::workloads;

fn meta_for_props(seed: u64) -> pnpchain_core::JashMeta {
    let mut meta = workloads::collatz_meta(8 + seed % 25);
    meta.n = 1 + (seed % 12) as u8;
    meta.m = 1 + (seed % 6) as u8;
    meta.dnf_sentinel = Bits::ones(usize::from(meta.m)).unwrap();
    meta
}

/// Transform soundness: on every generated while-program and arg, the
/// bounded rewrite agrees with the reference interpreter — equal res when
/// every loop halts within the cap, the dnf sentinel otherwise.
#[test]
fn transform_agrees_with_reference_on_random_programs() {
    let mut rng = SplitMix64(0x7061706572);
    let mut dnf_seen = 0u32;
    let mut halt_seen = 0u32;
    for case in 0..1200u64 {
        let prog = generate_program(&mut rng);
        let meta = meta_for_props(case);
        let bounded = transform_bounded(&prog, &meta).unwrap();
        let report = validate(&bounded, &meta);
        assert!(
            report.is_ok(),
            "case {case}: transformed program failed validation: {report}\n{}",
            bounded.source_text()
        );

        for _ in 0..3 {
            let arg_value = rng.below(meta.arg_count());
            let arg = Bits::from_value(arg_value, usize::from(meta.n)).unwrap();
            let expected = reference_execute(&prog, &meta, &arg);
            let actual = execute(&bounded, &meta, &arg, &NoData).unwrap_or_else(|e| {
                panic!("case {case}: execution failed: {e}\n{}", bounded.source_text())
            });
            assert_eq!(
                actual.res,
                expected.res,
                "case {case} arg {arg_value}: res mismatch\noriginal:\n{}\nbounded:\n{}",
                prog.source_text(),
                bounded.source_text()
            );
            if expected.dnf {
                assert_eq!(actual.res, meta.dnf_sentinel);
                assert_eq!(actual.halted_by, HaltReason::Sentinel);
                dnf_seen += 1;
            } else {
                halt_seen += 1;
            }
        }
    }
    // The corpus must exercise both outcomes to mean anything.
    assert!(dnf_seen > 50, "only {dnf_seen} dnf outcomes");
    assert!(halt_seen > 50, "only {halt_seen} halting outcomes");
}

/// Bound soundness: steps_used never exceeds the static bound, over the same
/// corpus, and executions are bit-identical across repeat runs.
#[test]
fn steps_stay_within_the_static_bound() {
    let mut rng = SplitMix64(0x626f756e64);
    for case in 0..1200u64 {
        let prog = generate_program(&mut rng);
        let meta = meta_for_props(case);
        let bounded = transform_bounded(&prog, &meta).unwrap();
        let bound = complexity_bound(&bounded, &meta);
        for _ in 0..3 {
            let arg_value = rng.below(meta.arg_count());
            let arg = Bits::from_value(arg_value, usize::from(meta.n)).unwrap();
            let out = execute(&bounded, &meta, &arg, &NoData).unwrap();
            assert!(
                u128::from(out.steps_used) <= bound.worst_case_steps,
                "case {case}: {} steps exceed bound {}\n{}",
                out.steps_used,
                bound.worst_case_steps,
                bounded.source_text()
            );
            assert_eq!(out, execute(&bounded, &meta, &arg, &NoData).unwrap());
        }
    }
}

/// Validator totality: the transform output of any parseable program (with
/// an output statement) validates, even when the input mixes loop kinds.
#[test]
fn transform_output_always_validates() {
    let mut rng = SplitMix64(0x746f74616c);
    for case in 0..400u64 {
        let prog = generate_program(&mut rng);
        let meta = meta_for_props(case);
        let bounded = transform_bounded(&prog, &meta).unwrap();
        let report = validate(&bounded, &meta);
        assert!(report.is_ok(), "case {case}: {report}");
        // And the canonical print of the transformed program reparses to it.
        let reparsed = parse(bounded.source_text()).unwrap();
        assert_eq!(reparsed, bounded);
    }
}
