//! Bundled example workloads: the bounded Collatz probe, its unbounded
//! while-loop form, the cellular-docking jash with its data bundle, and the
//! classic SHA-256 problem.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::bits::Bits;
use crate::digest::Digest;
use crate::docking::{DockingError, DockingSpace, CODE_DNF};
use crate::jash::{parse, ClassicProblem, JashProgram};
use crate::meta::{DataBundle, ExecMode, JashMeta};

/// Collatz in its natural unbounded form. Rejected by validation; feed it
/// through `transform_bounded` to get a publishable program.
pub const UNBOUNDED_COLLATZ_SOURCE: &str = "\
b = argval
while (b != 1) {
    if (b % 2 == 0) { b = b / 2 } else { b = 3 * b + 1 }
}
output 0b001
";

/// Hand-bounded Collatz: checks the fixed point before the budget guard, so
/// arg 1 terminates for every s >= 1. Emits `001` on termination and the
/// `111` sentinel when the loop budget runs out.
pub const COLLATZ_SOURCE: &str = "\
b = argval
for (i = 1; i <= s; i++) {
    if (b == 1) { break }
    if (i == s) { output 0b111 exit }
    if (b % 2 == 0) { b = b / 2 } else { b = 3 * b + 1 }
}
output 0b001
";

pub fn collatz_meta(s: u64) -> JashMeta {
    JashMeta {
        jash_id: format!("collatz-s{s}"),
        n: 16,
        max_arg: None,
        m: 3,
        s,
        mode: ExecMode::Optimal,
        importance: 0.5,
        dnf_sentinel: Bits::new("111").unwrap(),
        data_sha256: None,
        data_record_size: None,
    }
}

pub fn make_collatz_jash(s: u64) -> (JashProgram, JashMeta) {
    let prog = parse(COLLATZ_SOURCE).expect("bundled source parses");
    (prog, collatz_meta(s))
}

/// A docking workload: program, meta, and the generated data bundle.
#[derive(Debug, Clone)]
pub struct DockingWorkload {
    pub space: DockingSpace,
    pub program: JashProgram,
    pub meta: JashMeta,
    pub data: DataBundle,
}

const DOCKING_RECORD_SIZE: u32 = 8;

/// Builds the docking jash for an `n_p`-by-`n_r` pair space. The real
/// matcher chemistry is out of scope; each pair's record is a seeded digest
/// slice and its parity stands in for the binds / does-not-bind outcome.
/// Args beyond the pair space answer the `10` code.
pub fn make_docking_jash(
    peptides: u64,
    receptors: u64,
    seed: u64,
) -> Result<DockingWorkload, DockingError> {
    let space = DockingSpace::new(peptides, receptors)?;
    let pairs = space.pair_count();

    let mut data = Vec::with_capacity(pairs as usize * DOCKING_RECORD_SIZE as usize);
    for pair in 0..pairs {
        let record = Digest::of_parts(&[&seed.to_be_bytes(), &pair.to_be_bytes()]);
        data.extend_from_slice(&record.0[..DOCKING_RECORD_SIZE as usize]);
    }
    let data = DataBundle::new(data);

    let source = format!(
        "v = argval
if (v >= {pairs}) {{ output 0b{CODE_DNF} exit }}
p = data(0, 8)
p = p ^ (p >> 32)
p = p ^ (p >> 16)
p = p ^ (p >> 8)
p = p ^ (p >> 4)
p = p ^ (p >> 2)
p = p ^ (p >> 1)
if ((p & 1) == 1) {{ output 0b01 exit }}
output 0b00
"
    );
    let program = parse(&source).expect("generated source parses");

    let meta = JashMeta {
        jash_id: format!("docking-{peptides}x{receptors}-{seed}"),
        n: space.arg_width(),
        max_arg: if pairs < 1 << space.arg_width() {
            Some(pairs - 1)
        } else {
            None
        },
        m: 2,
        s: 1,
        mode: ExecMode::Full,
        importance: 0.5,
        dnf_sentinel: Bits::new(CODE_DNF).unwrap(),
        data_sha256: Some(data.sha256),
        data_record_size: Some(DOCKING_RECORD_SIZE),
    };

    Ok(DockingWorkload {
        space,
        program,
        meta,
        data,
    })
}

/// Meta for a classic SHA-256 problem: 20-bit nonces, 63-bit results.
pub fn classic_meta(jash_id: &str) -> JashMeta {
    JashMeta {
        jash_id: String::from(jash_id),
        n: 20,
        max_arg: None,
        m: 63,
        s: 1,
        mode: ExecMode::Optimal,
        importance: 0.0,
        dnf_sentinel: Bits::ones(63).unwrap(),
        data_sha256: None,
        data_record_size: None,
    }
}

/// The builtin SHA-256 jash bound to a block's header digest.
pub fn make_classic_jash(header: Digest, jash_id: &str, n: u8, m: u8) -> (ClassicProblem, JashMeta) {
    let mut meta = classic_meta(jash_id);
    meta.n = n;
    meta.m = m;
    meta.dnf_sentinel = Bits::ones(usize::from(m)).unwrap();
    (ClassicProblem::new(header), meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jash::{execute, validate, BundleWindows, HaltReason, NoData};

    /// Plain u64 Collatz iteration count to reach 1, the independent oracle
    /// for the bundled program.
    pub(crate) fn collatz_steps(mut v: u64, cap: u64) -> Option<u64> {
        if v == 0 {
            return None;
        }
        let mut steps = 0;
        while v != 1 {
            v = if v % 2 == 0 { v / 2 } else { 3 * v + 1 };
            steps += 1;
            if steps > cap {
                return None;
            }
        }
        Some(steps)
    }

    fn run_collatz(arg_value: u64, s: u64) -> (Bits, HaltReason) {
        let (prog, meta) = make_collatz_jash(s);
        let arg = Bits::from_value(arg_value, 16).unwrap();
        let out = execute(&prog, &meta, &arg, &NoData).unwrap();
        (out.res, out.halted_by)
    }

    #[test]
    fn collatz_37_terminates_in_21_iterations() {
        assert_eq!(collatz_steps(37, 1000), Some(21));
        let (res, _) = run_collatz(37, 30);
        assert_eq!(res.as_str(), "001");
        // The break fires on iteration steps+1, so s = 22 is the minimum.
        let (res, _) = run_collatz(37, 22);
        assert_eq!(res.as_str(), "001");
        let (res, halted) = run_collatz(37, 21);
        assert_eq!(res.as_str(), "111");
        assert_eq!(halted, HaltReason::Sentinel);
    }

    #[test]
    fn collatz_37_small_budget_hits_sentinel() {
        let (res, halted) = run_collatz(37, 10);
        assert_eq!(res.as_str(), "111");
        assert_eq!(halted, HaltReason::Sentinel);
    }

    #[test]
    fn collatz_fixed_point_is_immediate() {
        for s in [1, 2, 5, 100] {
            let (res, halted) = run_collatz(1, s);
            assert_eq!(res.as_str(), "001");
            assert_eq!(halted, HaltReason::OutputStmt);
        }
    }

    #[test]
    fn collatz_program_validates() {
        let (prog, meta) = make_collatz_jash(30);
        assert!(validate(&prog, &meta).is_ok());
    }

    #[test]
    fn docking_outputs_stay_in_the_code_set() {
        let wl = make_docking_jash(5, 10, 7).unwrap();
        assert!(validate(&wl.program, &wl.meta).is_ok());
        let provider = BundleWindows {
            bytes: &wl.data.bytes,
            record_size: wl.meta.data_record_size,
        };
        let mut saw = [false; 2];
        for value in 0..wl.meta.arg_count() {
            let arg = Bits::from_value(value, usize::from(wl.meta.n)).unwrap();
            let out = execute(&wl.program, &wl.meta, &arg, &provider).unwrap();
            match out.res.as_str() {
                "01" => saw[0] = true,
                "00" => saw[1] = true,
                other => panic!("unexpected outcome code {other}"),
            }
        }
        assert!(saw[0] && saw[1], "parity predicate should produce both codes");
    }

    #[test]
    fn docking_without_max_arg_answers_dnf_past_the_space() {
        let mut wl = make_docking_jash(5, 10, 7).unwrap();
        wl.meta.max_arg = None;
        // Pad the bundle so windows exist for the padding args.
        let records = 1usize << wl.meta.n;
        wl.data.bytes.resize(records * 8, 0);
        let provider = BundleWindows {
            bytes: &wl.data.bytes,
            record_size: wl.meta.data_record_size,
        };
        let arg = Bits::from_value(53, usize::from(wl.meta.n)).unwrap();
        let out = execute(&wl.program, &wl.meta, &arg, &provider).unwrap();
        assert_eq!(out.res.as_str(), CODE_DNF);
        assert_eq!(out.halted_by, HaltReason::Sentinel);
    }

    #[test]
    fn classic_jash_matches_reference_digest() {
        let header = Digest::ZERO;
        let (problem, meta) = make_classic_jash(header, "classic-t", 24, 8);
        let arg = Bits::new("011000010110001001100011").unwrap();
        let expected = Digest::of_parts(&[&[0u8; 32], b"abc"]);
        let out = problem.execute(&meta, &arg).unwrap();
        assert_eq!(out.res.value(), u64::from(expected.0[0]));
        assert_eq!(problem.execute(&meta, &arg).unwrap().res, out.res);
    }
}
