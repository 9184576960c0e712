//! Grammar and packing invariants driven by proptest.

use proptest::prelude::*;

use pnpchain_core::bits::Bits;
use pnpchain_core::digest::Digest;
use pnpchain_core::docking::DockingSpace;
use pnpchain_core::jash::parse;
use pnpchain_core::ledger::Submission;
use pnpchain_core::testing::{generate_program, SplitMix64};

proptest! {
    /// parse(print(ast)) is structurally the identity.
    #[test]
    fn print_parse_round_trip(seed in any::<u64>()) {
        let prog = generate_program(&mut SplitMix64(seed));
        let reparsed = parse(prog.source_text()).unwrap();
        prop_assert_eq!(&reparsed, &prog);
        // Printing is a fixed point.
        prop_assert_eq!(reparsed.source_text(), prog.source_text());
    }

    #[test]
    fn bits_value_round_trip(value in any::<u64>(), width in 1usize..=63) {
        let masked = if width == 63 { value & ((1 << 63) - 1) } else { value & ((1u64 << width) - 1) };
        let bits = Bits::from_value(value, width).unwrap();
        prop_assert_eq!(bits.value(), masked);
        prop_assert_eq!(bits.len(), width);
        prop_assert_eq!(Bits::new(bits.as_str()).unwrap(), bits);
    }

    #[test]
    fn packing_preserves_the_value(value in any::<u64>(), width in 1usize..=63) {
        let bits = Bits::from_value(value, width).unwrap();
        let bytes = bits.to_bytes();
        prop_assert_eq!(bytes.len(), width.div_ceil(8));
        let unpacked = bytes.iter().fold(0u64, |acc, b| acc << 8 | u64::from(*b));
        prop_assert_eq!(unpacked, bits.value());
    }

    /// The submitted proof recomputes from the plain results.
    #[test]
    fn proofs_recompute(arg in any::<u64>(), res in any::<u64>(), aw in 1usize..=63, rw in 1usize..=63) {
        let sub = Submission::new(
            "m",
            Bits::from_value(arg, aw).unwrap(),
            Bits::from_value(res, rw).unwrap(),
            0,
        );
        prop_assert!(sub.proof_is_consistent());
        prop_assert_eq!(
            sub.proof,
            Digest::of_parts(&[&sub.arg.to_bytes(), &sub.res.to_bytes()])
        );
    }

    /// Pair encoding is a bijection on every space that fits the arg width.
    #[test]
    fn docking_codes_are_unique(peptides in 1u64..=40, receptors in 1u64..=40) {
        let space = DockingSpace::new(peptides, receptors).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for n_p in 0..peptides {
            for n_r in 0..receptors {
                let b = space.encode(n_p, n_r).unwrap();
                prop_assert_eq!(space.decode(&b).unwrap(), (n_p, n_r));
                prop_assert!(seen.insert(b.value()));
                prop_assert_eq!(b.len(), usize::from(space.arg_width()));
            }
        }
    }
}
