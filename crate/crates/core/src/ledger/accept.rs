//! Proof-of-useful-work acceptance rules for the three block modes.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::digest::Digest;
use crate::meta::JashMeta;

/// A miner's claimed result for one arg.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Submission {
    pub miner_id: String,
    pub arg: Bits,
    pub res: Bits,
    /// `SHA-256(arg_bytes ‖ res_bytes)`: the hashed result submitted
    /// alongside the plain one.
    pub proof: Digest,
    pub logical_time: u64,
}

impl Submission {
    pub fn proof_of(arg: &Bits, res: &Bits) -> Digest {
        Digest::of_parts(&[&arg.to_bytes(), &res.to_bytes()])
    }

    pub fn new(miner_id: &str, arg: Bits, res: Bits, logical_time: u64) -> Submission {
        let proof = Submission::proof_of(&arg, &res);
        Submission {
            miner_id: String::from(miner_id),
            arg,
            res,
            proof,
            logical_time,
        }
    }

    /// Structural self-consistency: the proof recomputes from arg and res.
    pub fn proof_is_consistent(&self) -> bool {
        Submission::proof_of(&self.arg, &self.res) == self.proof
    }
}

/// Count of leading 0 bits of an MSB-first bit string.
pub fn leading_zeros(bits: &Bits) -> u32 {
    bits.leading_zeros()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AcceptError {
    #[error("no verified submissions in the window")]
    NoSubmissions,
    #[error("coverage incomplete: {} args missing (first missing: {})",
            missing.len(), missing.first().copied().unwrap_or(0))]
    IncompleteCoverage { missing: Vec<u64> },
    #[error("no submission met the difficulty threshold")]
    NoQualifyingSubmission,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimalOutcome {
    pub winner: Submission,
    pub rewards: Vec<(String, u64)>,
}

/// Lowest verified res wins; ties break by lowest arg value, then earliest
/// logical time, then lexicographic miner id. The whole reward goes to the
/// winner. `verify` re-executes a submission and is consulted once per entry.
pub fn accept_optimal(
    submissions: &[Submission],
    _meta: &JashMeta,
    reward: u64,
    mut verify: impl FnMut(&Submission) -> bool,
) -> Result<OptimalOutcome, AcceptError> {
    let winner = submissions
        .iter()
        .filter(|sub| verify(sub))
        .min_by_key(|sub| {
            (
                sub.res.value(),
                sub.arg.value(),
                sub.logical_time,
                sub.miner_id.clone(),
            )
        })
        .ok_or(AcceptError::NoSubmissions)?
        .clone();
    let rewards = alloc::vec![(winner.miner_id.clone(), reward)];
    Ok(OptimalOutcome { winner, rewards })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FullOutcome {
    /// SHA-256 of the canonical result-set file.
    pub results_root: Digest,
    /// The canonical result-set file itself, one entry per valid arg.
    pub result_set_bytes: Vec<u8>,
    pub rewards: Vec<(String, u64)>,
    /// Miner whose credited proof had the most leading zeros.
    pub bonus_miner: String,
}

/// Credits the first verified submission of every valid arg, pays the
/// leading-zeros bonus, and splits the rest evenly across credited
/// submissions.
///
/// Reward arithmetic in integer units: the bonus winner takes ⌊R/2⌋, the
/// remaining R−⌊R/2⌋ is divided by the number of credited submissions with
/// the remainder going to the bonus winner, so every block pays out exactly
/// R.
pub fn accept_full(
    submissions: &[Submission],
    meta: &JashMeta,
    reward: u64,
    mut verify: impl FnMut(&Submission) -> bool,
) -> Result<FullOutcome, AcceptError> {
    // First verified submission per arg, by (logical_time, miner_id).
    let mut credited: BTreeMap<u64, &Submission> = BTreeMap::new();
    for sub in submissions {
        if !meta.is_valid_arg_value(sub.arg.value()) || !verify(sub) {
            continue;
        }
        let entry = credited.entry(sub.arg.value()).or_insert(sub);
        if (sub.logical_time, &sub.miner_id) < ((*entry).logical_time, &(*entry).miner_id) {
            *entry = sub;
        }
    }

    let missing: Vec<u64> = (0..=meta.arg_limit())
        .filter(|v| !credited.contains_key(v))
        .collect();
    if !missing.is_empty() {
        return Err(AcceptError::IncompleteCoverage { missing });
    }

    // Bonus: most leading zeros in the proof digest; ties by lowest digest,
    // then earliest submission.
    let bonus = credited
        .values()
        .min_by_key(|sub| {
            (
                core::cmp::Reverse(sub.proof.leading_zero_bits()),
                sub.proof,
                sub.logical_time,
                sub.miner_id.clone(),
            )
        })
        .expect("coverage checked above");
    let bonus_miner = bonus.miner_id.clone();

    let bonus_pool = reward / 2;
    let base_pool = reward - bonus_pool;
    let credit_count = credited.len() as u64;
    let per_credit = base_pool / credit_count;
    let remainder = base_pool % credit_count;

    let mut totals: BTreeMap<String, u64> = BTreeMap::new();
    *totals.entry(bonus_miner.clone()).or_insert(0) += bonus_pool + remainder;
    for sub in credited.values() {
        *totals.entry(sub.miner_id.clone()).or_insert(0) += per_credit;
    }
    totals.retain(|_, amount| *amount > 0);
    let rewards: Vec<(String, u64)> = totals.into_iter().collect();

    let pairs: Vec<(u64, Bits)> = credited
        .iter()
        .map(|(arg, sub)| (*arg, sub.res.clone()))
        .collect();
    let result_set_bytes = result_set_to_json(&pairs);
    let results_root = Digest::of(&result_set_bytes);

    Ok(FullOutcome {
        results_root,
        result_set_bytes,
        rewards,
        bonus_miner,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicOutcome {
    pub winner: Submission,
    /// Recomputed `SHA-256(header ‖ nonce_bytes)` of the winner.
    pub digest: Digest,
    pub rewards: Vec<(String, u64)>,
}

/// First submission (by logical time, then miner id) whose recomputed digest
/// clears `difficulty_t` leading zero bits wins the whole reward.
pub fn accept_classic(
    submissions: &[Submission],
    header: &Digest,
    meta: &JashMeta,
    difficulty_t: u32,
    reward: u64,
) -> Result<ClassicOutcome, AcceptError> {
    let problem = crate::jash::ClassicProblem::new(*header);
    let mut best: Option<(&Submission, Digest)> = None;
    for sub in submissions {
        if sub.arg.len() != usize::from(meta.n) || !sub.proof_is_consistent() {
            continue;
        }
        let digest = problem.digest_for(&sub.arg);
        if digest.leading_zero_bits() < difficulty_t {
            continue;
        }
        // res must be the digest prefix the builtin jash would return.
        if sub.res != crate::jash::digest_prefix_bits(&digest, usize::from(meta.m)) {
            continue;
        }
        let better = match &best {
            None => true,
            Some((cur, _)) => {
                (sub.logical_time, &sub.miner_id) < (cur.logical_time, &cur.miner_id)
            }
        };
        if better {
            best = Some((sub, digest));
        }
    }
    let (winner, digest) = best.ok_or(AcceptError::NoQualifyingSubmission)?;
    Ok(ClassicOutcome {
        winner: winner.clone(),
        digest,
        rewards: alloc::vec![(winner.miner_id.clone(), reward)],
    })
}

/// One line of the exported result set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultEntry {
    /// Arg value in lowercase hex, no prefix.
    pub arg_hex: String,
    pub res_bits: String,
}

/// Canonical result-set file: a JSON array sorted by arg value.
pub fn result_set_to_json(pairs: &[(u64, Bits)]) -> Vec<u8> {
    let mut sorted: Vec<&(u64, Bits)> = pairs.iter().collect();
    sorted.sort_by_key(|(arg, _)| *arg);
    let entries: Vec<ResultEntry> = sorted
        .into_iter()
        .map(|(arg, res)| ResultEntry {
            arg_hex: alloc::format!("{arg:x}"),
            res_bits: String::from(res.as_str()),
        })
        .collect();
    serde_json::to_vec(&entries).expect("result entries serialize")
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ResultSetError {
    #[error("result set is not valid JSON")]
    Json,
    #[error("entry {0} has an invalid arg or res field")]
    BadEntry(usize),
}

pub fn result_set_from_json(bytes: &[u8]) -> Result<Vec<(u64, Bits)>, ResultSetError> {
    let entries: Vec<ResultEntry> =
        serde_json::from_slice(bytes).map_err(|_| ResultSetError::Json)?;
    entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let arg = u64::from_str_radix(&e.arg_hex, 16).map_err(|_| ResultSetError::BadEntry(i))?;
            let res = Bits::new(&e.res_bits).map_err(|_| ResultSetError::BadEntry(i))?;
            Ok((arg, res))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workloads;

    fn meta_n4() -> JashMeta {
        let mut meta = workloads::collatz_meta(10);
        meta.n = 4;
        meta.m = 4;
        meta.dnf_sentinel = Bits::ones(4).unwrap();
        meta
    }

    fn sub(miner: &str, arg: u64, res: u64, t: u64) -> Submission {
        Submission::new(
            miner,
            Bits::from_value(arg, 4).unwrap(),
            Bits::from_value(res, 4).unwrap(),
            t,
        )
    }

    #[test]
    fn optimal_takes_the_minimum_res() {
        let subs = [sub("a", 0, 0b0110, 1), sub("b", 1, 0b0010, 2), sub("c", 2, 0b1000, 3)];
        let out = accept_optimal(&subs, &meta_n4(), 1000, |_| true).unwrap();
        assert_eq!(out.winner.res.as_str(), "0010");
        assert_eq!(out.rewards, [(String::from("b"), 1000)]);
    }

    #[test]
    fn optimal_ties_break_on_arg_then_time_then_miner() {
        let subs = [sub("a", 5, 3, 1), sub("b", 3, 3, 2)];
        let out = accept_optimal(&subs, &meta_n4(), 10, |_| true).unwrap();
        assert_eq!(out.winner.arg.value(), 3);

        let subs = [sub("z", 3, 3, 5), sub("y", 3, 3, 4)];
        let out = accept_optimal(&subs, &meta_n4(), 10, |_| true).unwrap();
        assert_eq!(out.winner.miner_id, "y");

        let subs = [sub("z", 3, 3, 5), sub("y", 3, 3, 5)];
        let out = accept_optimal(&subs, &meta_n4(), 10, |_| true).unwrap();
        assert_eq!(out.winner.miner_id, "y");
    }

    #[test]
    fn optimal_disqualifies_unverified_submissions() {
        let good = sub("honest", 2, 0b0100, 2);
        let forged = sub("cheat", 1, 0b0000, 1);
        let subs = [forged.clone(), good.clone()];
        let out =
            accept_optimal(&subs, &meta_n4(), 10, |s| s.miner_id != "cheat").unwrap();
        assert_eq!(out.winner, good);
        assert!(matches!(
            accept_optimal(&subs, &meta_n4(), 10, |_| false),
            Err(AcceptError::NoSubmissions)
        ));
    }

    #[test]
    fn full_single_miner_collects_everything() {
        let mut meta = meta_n4();
        meta.max_arg = None; // 16 args
        let subs: Vec<Submission> = (0..16).map(|a| sub("solo", a, a ^ 5, a)).collect();
        let out = accept_full(&subs, &meta, 100, |_| true).unwrap();
        assert_eq!(out.rewards, [(String::from("solo"), 100)]);
        let pairs = result_set_from_json(&out.result_set_bytes).unwrap();
        assert_eq!(pairs.len(), 16);
        assert_eq!(Digest::of(&out.result_set_bytes), out.results_root);
    }

    #[test]
    fn full_split_matches_the_documented_arithmetic() {
        let mut meta = meta_n4();
        meta.max_arg = None;
        // 16 distinct first-submitters; miner ids m00..m15.
        let subs: Vec<Submission> = (0..16u64)
            .map(|a| sub(&alloc::format!("m{a:02}"), a, a, a))
            .collect();
        let out = accept_full(&subs, &meta, 100, |_| true).unwrap();
        let bonus = out.bonus_miner.clone();
        let total: u64 = out.rewards.iter().map(|(_, v)| v).sum();
        assert_eq!(total, 100);
        // Bonus winner: 50 + 3 + remainder 2 = 55; everyone else 3.
        for (miner, amount) in &out.rewards {
            if *miner == bonus {
                assert_eq!(*amount, 55);
            } else {
                assert_eq!(*amount, 3);
            }
        }
        assert_eq!(out.rewards.len(), 16);
    }

    #[test]
    fn full_first_submission_per_arg_is_credited() {
        let mut meta = meta_n4();
        meta.max_arg = Some(1); // args {0, 1}
        let subs = [
            sub("late", 0, 7, 9),
            sub("early", 0, 7, 2),
            sub("tie_b", 1, 1, 4),
            sub("tie_a", 1, 1, 4),
        ];
        let out = accept_full(&subs, &meta, 10, |_| true).unwrap();
        let winners: Vec<&str> = out.rewards.iter().map(|(m, _)| m.as_str()).collect();
        assert!(winners.contains(&"early"));
        assert!(winners.contains(&"tie_a"));
        assert!(!winners.contains(&"late"));
        assert!(!winners.contains(&"tie_b"));
    }

    #[test]
    fn full_reports_missing_args() {
        let mut meta = meta_n4();
        meta.max_arg = None;
        let subs: Vec<Submission> = (0..15).map(|a| sub("solo", a, a, a)).collect();
        match accept_full(&subs, &meta, 100, |_| true) {
            Err(AcceptError::IncompleteCoverage { missing }) => assert_eq!(missing, [15]),
            other => panic!("expected IncompleteCoverage, got {other:?}"),
        }
    }

    #[test]
    fn classic_first_qualifier_wins() {
        let header = Digest::of(b"h");
        let meta = workloads::classic_meta("c");
        let problem = crate::jash::ClassicProblem::new(header);
        // Build honest submissions for a few nonces; t=0 so all qualify.
        let subs: Vec<Submission> = (0..4u64)
            .map(|v| {
                let arg = Bits::from_value(v, 20).unwrap();
                let res = crate::jash::digest_prefix_bits(&problem.digest_for(&arg), 63);
                Submission::new(&alloc::format!("m{v}"), arg, res, 10 - v)
            })
            .collect();
        let out = accept_classic(&subs, &header, &meta, 0, 1000).unwrap();
        assert_eq!(out.winner.miner_id, "m3"); // earliest logical time
        assert_eq!(out.rewards, [(String::from("m3"), 1000)]);

        // t = 8 requires a 0x00 first digest byte.
        let qualifying: Vec<Submission> = (0..100_000u64)
            .filter_map(|v| {
                let arg = Bits::from_value(v, 20).unwrap();
                let d = problem.digest_for(&arg);
                (d.leading_zero_bits() >= 8).then(|| {
                    let res = crate::jash::digest_prefix_bits(&d, 63);
                    Submission::new("q", arg, res, v)
                })
            })
            .take(1)
            .collect();
        let out = accept_classic(&qualifying, &header, &meta, 8, 1000).unwrap();
        assert_eq!(out.digest.0[0], 0x00);
    }

    #[test]
    fn classic_rejects_forged_results() {
        let header = Digest::of(b"h");
        let meta = workloads::classic_meta("c");
        let arg = Bits::from_value(7, 20).unwrap();
        let forged = Submission::new("liar", arg, Bits::zeros(63).unwrap(), 1);
        assert!(matches!(
            accept_classic(&[forged], &header, &meta, 0, 10),
            Err(AcceptError::NoQualifyingSubmission)
        ));
    }

    #[test]
    fn result_set_json_round_trips_sorted() {
        let pairs = [
            (2u64, Bits::new("01").unwrap()),
            (0, Bits::new("10").unwrap()),
            (1, Bits::new("00").unwrap()),
        ];
        let bytes = result_set_to_json(&pairs);
        let back = result_set_from_json(&bytes).unwrap();
        assert_eq!(
            back,
            [
                (0, Bits::new("10").unwrap()),
                (1, Bits::new("00").unwrap()),
                (2, Bits::new("01").unwrap()),
            ]
        );
        let text = core::str::from_utf8(&bytes).unwrap();
        assert!(text.starts_with(r#"[{"arg_hex":"0","res_bits":"10"}"#));
    }
}
