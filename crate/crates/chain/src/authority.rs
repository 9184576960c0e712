//! The Runtime Authority: reviews submitted jashes, keeps the prioritized
//! queue, publishes one problem per block, and aggregates result sets. All
//! mutating commands run through one serialized state machine.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use pnpchain_core::jash::{
    complexity_bound, parse, validate, ComplexityBound, JashFn, Violation,
};
use pnpchain_core::ledger::{Block, BlockMode};
use pnpchain_core::publish::{classic_publication, PublishedJash};
use pnpchain_core::{Bits, Digest, JashMeta};

use crate::store::{ArtifactKind, ArtifactStore, StoreError, StoredBundle};

/// Fixed seed for review sampling; identical submissions review identically.
pub const REVIEW_SEED: u64 = 0x52756e41757468;
/// Random valid args executed per review.
pub const REVIEW_SAMPLES: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewReport {
    /// Parses and validates; publication requires it.
    pub compiles: bool,
    /// Validator findings when `compiles` is false (parse failures carry a
    /// message instead).
    pub violations: Vec<Violation>,
    pub parse_error: Option<String>,
    pub bound: ComplexityBound,
    pub mean_steps: f64,
    pub stddev_steps: f64,
    pub priority: f64,
    pub vetoed: bool,
}

impl ReviewReport {
    fn rejected(vetoed: bool, violations: Vec<Violation>, parse_error: Option<String>) -> Self {
        ReviewReport {
            compiles: false,
            violations,
            parse_error,
            bound: ComplexityBound {
                worst_case_steps: 0,
                degree_c: 0,
            },
            mean_steps: 0.0,
            stddev_steps: 0.0,
            priority: 0.0,
            vetoed,
        }
    }
}

/// Reviews a submission: parse + validate, static bound, and runtime
/// estimation over `REVIEW_SAMPLES` random valid args under the fixed seed.
///
/// Priority is `importance / (1 + log2(1 + E))` with
/// `E = mean_steps · arg_count + d/1024`, clamped to [0, 1]: monotone up in
/// importance, down in expected total cost and data size.
pub fn review(
    source: &str,
    meta: &JashMeta,
    data: Option<&[u8]>,
    importance: f64,
    vetoed: bool,
) -> ReviewReport {
    let program = match parse(source) {
        Ok(p) => p,
        Err(e) => return ReviewReport::rejected(vetoed, Vec::new(), Some(e.to_string())),
    };
    let validation = validate(&program, meta);
    if !validation.is_ok() {
        return ReviewReport::rejected(vetoed, validation.violations, None);
    }

    let bound = complexity_bound(&program, meta);
    let provider = StoredBundle::from_bytes(data.map(<[u8]>::to_vec), meta.data_record_size);
    let mut rng = ChaCha12Rng::seed_from_u64(REVIEW_SEED);
    let mut steps = Vec::with_capacity(REVIEW_SAMPLES);
    for _ in 0..REVIEW_SAMPLES {
        let arg_value = rng.random_range(0..meta.arg_count());
        let arg = Bits::from_value(arg_value, usize::from(meta.n)).expect("meta validated");
        match pnpchain_core::jash::execute(&program, meta, &arg, &provider) {
            Ok(out) => steps.push(out.steps_used as f64),
            // A jash whose data bundle cannot serve its own valid args is
            // unusable; report it as non-compiling.
            Err(_) => return ReviewReport::rejected(vetoed, Vec::new(), None),
        }
    }
    let mean_steps = steps.iter().sum::<f64>() / steps.len() as f64;
    let variance =
        steps.iter().map(|x| (x - mean_steps).powi(2)).sum::<f64>() / steps.len() as f64;
    let stddev_steps = variance.sqrt();

    let d = data.map_or(0.0, |b| b.len() as f64);
    let expected_total = mean_steps * meta.arg_count() as f64 + d / 1024.0;
    let priority = (importance / (1.0 + (1.0 + expected_total).log2())).clamp(0.0, 1.0);

    ReviewReport {
        compiles: true,
        violations: Vec::new(),
        parse_error: None,
        bound,
        mean_steps,
        stddev_steps,
        priority,
        vetoed,
    }
}

/// The canonical submission record: what a researcher hands the authority.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmissionRecord {
    pub source_id: Digest,
    pub meta: JashMeta,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub data_id: Option<Digest>,
    pub importance: f64,
    pub veto: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueEntry {
    #[serde(flatten)]
    pub record: SubmissionRecord,
    pub report: ReviewReport,
    pub submit_order: u64,
}

impl QueueEntry {
    pub fn jash_id(&self) -> &str {
        &self.record.meta.jash_id
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SubmitError {
    #[error("importance {0} outside [0, 1]")]
    ImportanceOutOfRange(f64),
    #[error("jash id `{0}` was already submitted or published")]
    DuplicateJashId(String),
    #[error("meta names a data checksum but no data bundle was supplied")]
    MissingData,
    #[error("data bundle digest {actual} does not match the meta's {expected}")]
    DataChecksumMismatch { expected: Digest, actual: Digest },
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubmitOutcome {
    pub source_id: Digest,
    pub data_id: Option<Digest>,
    pub report: ReviewReport,
    /// False when vetoed or non-compiling; such jashes never publish.
    pub enqueued: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum AggregateError {
    #[error("block is not sealed; close it before aggregating")]
    BlockNotClosed,
    #[error("block {0} carries no aggregatable results")]
    NothingToAggregate(u64),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Serialized RA state: queue, publications, and aggregated result ids.
#[derive(Debug, Default, Serialize, Deserialize)]
pub struct RuntimeAuthority {
    queue: Vec<QueueEntry>,
    published: BTreeMap<u64, PublishedJash>,
    published_ids: BTreeSet<String>,
    results: BTreeMap<String, Digest>,
    next_order: u64,
}

impl RuntimeAuthority {
    pub fn new() -> Self {
        RuntimeAuthority::default()
    }

    /// Stores the artifacts, reviews the jash, and enqueues it unless it is
    /// vetoed or fails review.
    pub fn submit(
        &mut self,
        store: &mut ArtifactStore,
        source: &str,
        meta: &JashMeta,
        data: Option<&[u8]>,
        importance: f64,
        veto: bool,
    ) -> Result<SubmitOutcome, SubmitError> {
        if !(0.0..=1.0).contains(&importance) {
            return Err(SubmitError::ImportanceOutOfRange(importance));
        }
        let jash_id = meta.jash_id.clone();
        if self.published_ids.contains(&jash_id)
            || self.queue.iter().any(|e| e.jash_id() == jash_id)
        {
            return Err(SubmitError::DuplicateJashId(jash_id));
        }
        match (meta.data_sha256, data) {
            (Some(expected), Some(bytes)) => {
                let actual = Digest::of(bytes);
                if actual != expected {
                    return Err(SubmitError::DataChecksumMismatch { expected, actual });
                }
            }
            (Some(_), None) => return Err(SubmitError::MissingData),
            _ => {}
        }

        let report = review(source, meta, data, importance, veto);
        let source_id = store.put(ArtifactKind::JashSource, source.as_bytes())?;
        store.put(ArtifactKind::Meta, meta.to_canonical_json().as_bytes())?;
        let data_id = match data {
            Some(bytes) => Some(store.put(ArtifactKind::Data, bytes)?),
            None => None,
        };

        let enqueued = report.compiles && !report.vetoed;
        if enqueued {
            self.queue.push(QueueEntry {
                record: SubmissionRecord {
                    source_id,
                    meta: meta.clone(),
                    data_id,
                    importance,
                    veto,
                },
                report: report.clone(),
                submit_order: self.next_order,
            });
            self.next_order += 1;
        }
        Ok(SubmitOutcome {
            source_id,
            data_id,
            report,
            enqueued,
        })
    }

    /// Publishable entries, highest priority first; the sort is stable so
    /// equal priorities keep submission order.
    pub fn prioritized(&self) -> Vec<&QueueEntry> {
        let mut entries: Vec<&QueueEntry> = self
            .queue
            .iter()
            .filter(|e| e.report.compiles && !e.report.vetoed)
            .collect();
        entries.sort_by(|a, b| {
            b.report
                .priority
                .partial_cmp(&a.report.priority)
                .expect("priorities are clamped finite values")
                .then(a.submit_order.cmp(&b.submit_order))
        });
        entries
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    /// Pops the head of the prioritized queue for this height, or falls back
    /// to a classic SHA-256 problem when the queue is empty.
    pub fn publish_next(&mut self, height: u64, prev_hash: &Digest) -> PublishedJash {
        assert!(
            !self.published.contains_key(&height),
            "height {height} already has a publication"
        );
        let mut head: Option<usize> = None;
        for (i, e) in self.queue.iter().enumerate() {
            if !e.report.compiles || e.report.vetoed {
                continue;
            }
            head = match head {
                None => Some(i),
                Some(b) => {
                    let cur = &self.queue[b];
                    let better = e.report.priority > cur.report.priority
                        || (e.report.priority == cur.report.priority
                            && e.submit_order < cur.submit_order);
                    Some(if better { i } else { b })
                }
            };
        }
        let publication = match head {
            Some(at) => {
                let entry = self.queue.remove(at);
                PublishedJash {
                    jash_id: entry.jash_id().to_string(),
                    block_height: height,
                    mode: BlockMode::from(entry.record.meta.mode),
                    meta: entry.record.meta,
                    source_id: Some(entry.record.source_id),
                    data_id: entry.record.data_id,
                    classic_header: None,
                }
            }
            None => return self.publish_classic(height, prev_hash),
        };
        self.published_ids.insert(publication.jash_id.clone());
        self.published.insert(height, publication.clone());
        publication
    }

    /// Publishes the classic SHA-256 fallback problem for a height.
    pub fn publish_classic(&mut self, height: u64, prev_hash: &Digest) -> PublishedJash {
        assert!(
            !self.published.contains_key(&height),
            "height {height} already has a publication"
        );
        let publication = classic_publication(prev_hash, height);
        self.published_ids.insert(publication.jash_id.clone());
        self.published.insert(height, publication.clone());
        publication
    }

    /// Forgets a publication that never produced a block (an optimal window
    /// that closed empty) and requeues the entry at the front.
    pub fn withdraw(&mut self, publication: PublishedJash) {
        self.published.remove(&publication.block_height);
        self.published_ids.remove(&publication.jash_id);
        if let (Some(source_id), BlockMode::Optimal | BlockMode::Full) =
            (publication.source_id, publication.mode)
        {
            self.queue.insert(
                0,
                QueueEntry {
                    record: SubmissionRecord {
                        source_id,
                        meta: publication.meta.clone(),
                        data_id: publication.data_id,
                        importance: publication.meta.importance,
                        veto: false,
                    },
                    // Requeued entries keep publishing first.
                    report: ReviewReport {
                        priority: 1.0,
                        ..review_placeholder()
                    },
                    submit_order: 0,
                },
            );
        }
    }

    pub fn publication(&self, height: u64) -> Option<&PublishedJash> {
        self.published.get(&height)
    }

    pub fn publications(&self) -> impl Iterator<Item = &PublishedJash> {
        self.published.values()
    }

    /// The executable form of a publication, resolved from the store.
    pub fn resolve(
        &self,
        store: &ArtifactStore,
        publication: &PublishedJash,
    ) -> Result<JashFn, StoreError> {
        match publication.classic_problem() {
            Some(problem) => Ok(JashFn::Classic(problem)),
            None => {
                let id = publication.source_id.expect("non-classic has a source");
                let source = store.get(&id)?;
                let source = String::from_utf8(source)
                    .map_err(|_| StoreError::NotFound(id))?;
                let program = parse(&source).map_err(|_| StoreError::NotFound(id))?;
                Ok(JashFn::Program(program))
            }
        }
    }

    /// Stores the canonical result set of a closed block and records it for
    /// the submitting researcher.
    pub fn aggregate(
        &mut self,
        store: &mut ArtifactStore,
        block: &Block,
        full_result_set: Option<&[u8]>,
    ) -> Result<Digest, AggregateError> {
        if block.block_hash != block.compute_hash() {
            return Err(AggregateError::BlockNotClosed);
        }
        let bytes = match (block.mode, full_result_set) {
            (BlockMode::Full, Some(bytes)) => bytes.to_vec(),
            (BlockMode::Full, None) => {
                return Err(AggregateError::NothingToAggregate(block.height))
            }
            _ => {
                let (Some(arg), Some(res)) = (&block.winner_arg, &block.winner_res) else {
                    return Err(AggregateError::NothingToAggregate(block.height));
                };
                pnpchain_core::ledger::result_set_to_json(&[(arg.value(), res.clone())])
            }
        };
        let id = store.put(ArtifactKind::ResultSet, &bytes)?;
        if let Some(root) = block.results_root {
            debug_assert_eq!(id, root, "full-mode result set must hash to the block root");
        }
        self.results.insert(block.jash_id.clone(), id);
        Ok(id)
    }

    pub fn result_set(&self, jash_id: &str) -> Option<Digest> {
        self.results.get(jash_id).copied()
    }
}

fn review_placeholder() -> ReviewReport {
    ReviewReport {
        compiles: true,
        violations: Vec::new(),
        parse_error: None,
        bound: ComplexityBound {
            worst_case_steps: 1,
            degree_c: 0,
        },
        mean_steps: 0.0,
        stddev_steps: 0.0,
        priority: 1.0,
        vetoed: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pnpchain_core::workloads;

    #[test]
    fn review_of_bounded_collatz() {
        let meta = workloads::collatz_meta(100);
        let report = review(workloads::COLLATZ_SOURCE, &meta, None, 0.5, false);
        assert!(report.compiles);
        assert!(report.mean_steps > 0.0);
        assert!(report.mean_steps <= report.bound.worst_case_steps as f64);
        assert!(report.priority > 0.0 && report.priority <= 1.0);
        // Same inputs, same report.
        assert_eq!(
            report,
            review(workloads::COLLATZ_SOURCE, &meta, None, 0.5, false)
        );
    }

    #[test]
    fn review_rejects_the_while_form() {
        let meta = workloads::collatz_meta(100);
        let report = review(workloads::UNBOUNDED_COLLATZ_SOURCE, &meta, None, 0.5, false);
        assert!(!report.compiles);
        assert_eq!(report.violations, [Violation::WhileForbidden]);
        assert_eq!(report.priority, 0.0);
    }

    #[test]
    fn priority_is_monotone_in_importance() {
        let meta = workloads::collatz_meta(30);
        let hi = review(workloads::COLLATZ_SOURCE, &meta, None, 1.0, false);
        let lo = review(workloads::COLLATZ_SOURCE, &meta, None, 0.5, false);
        assert!(hi.priority > lo.priority);
    }

    fn submit_collatz(
        ra: &mut RuntimeAuthority,
        store: &mut ArtifactStore,
        id: &str,
        s: u64,
        importance: f64,
        veto: bool,
    ) -> SubmitOutcome {
        let mut meta = workloads::collatz_meta(s);
        meta.jash_id = id.to_string();
        ra.submit(store, workloads::COLLATZ_SOURCE, &meta, None, importance, veto)
            .unwrap()
    }

    #[test]
    fn prioritize_orders_by_importance_and_keeps_stability() {
        let mut ra = RuntimeAuthority::new();
        let mut store = ArtifactStore::in_memory();
        submit_collatz(&mut ra, &mut store, "low", 30, 0.5, false);
        submit_collatz(&mut ra, &mut store, "high", 30, 1.0, false);
        submit_collatz(&mut ra, &mut store, "tie-a", 30, 0.7, false);
        submit_collatz(&mut ra, &mut store, "tie-b", 30, 0.7, false);
        let order: Vec<&str> = ra.prioritized().iter().map(|e| e.jash_id()).collect();
        assert_eq!(order, ["high", "tie-a", "tie-b", "low"]);
    }

    #[test]
    fn vetoed_and_broken_jashes_never_enqueue() {
        let mut ra = RuntimeAuthority::new();
        let mut store = ArtifactStore::in_memory();
        let out = submit_collatz(&mut ra, &mut store, "vetoed", 30, 0.9, true);
        assert!(!out.enqueued);
        assert!(out.report.vetoed);

        let meta = workloads::collatz_meta(30);
        let out = ra
            .submit(&mut store, workloads::UNBOUNDED_COLLATZ_SOURCE, &meta, None, 0.9, false)
            .unwrap();
        assert!(!out.enqueued);
        assert_eq!(ra.queue_len(), 0);
        assert!(ra.prioritized().is_empty());
    }

    #[test]
    fn publish_pops_the_head_and_falls_back_to_classic() {
        let mut ra = RuntimeAuthority::new();
        let mut store = ArtifactStore::in_memory();
        submit_collatz(&mut ra, &mut store, "only", 30, 1.0, false);
        let p1 = ra.publish_next(1, &Digest::ZERO);
        assert_eq!(p1.jash_id, "only");
        assert_eq!(ra.queue_len(), 0);
        let p2 = ra.publish_next(2, &Digest::of(b"b1"));
        assert_eq!(p2.mode, BlockMode::Classic);
        let p3 = ra.publish_next(3, &Digest::of(b"b2"));
        assert_ne!(p2.classic_header, p3.classic_header);
        assert_ne!(p2.jash_id, p3.jash_id);
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let mut ra = RuntimeAuthority::new();
        let mut store = ArtifactStore::in_memory();
        submit_collatz(&mut ra, &mut store, "dup", 30, 1.0, false);
        let mut meta = workloads::collatz_meta(30);
        meta.jash_id = "dup".to_string();
        assert!(matches!(
            ra.submit(&mut store, workloads::COLLATZ_SOURCE, &meta, None, 0.5, false),
            Err(SubmitError::DuplicateJashId(_))
        ));
    }

    #[test]
    fn importance_range_is_enforced() {
        let mut ra = RuntimeAuthority::new();
        let mut store = ArtifactStore::in_memory();
        let meta = workloads::collatz_meta(30);
        assert!(matches!(
            ra.submit(&mut store, workloads::COLLATZ_SOURCE, &meta, None, 1.5, false),
            Err(SubmitError::ImportanceOutOfRange(_))
        ));
    }

    #[test]
    fn data_checksum_is_checked_at_submission() {
        let mut ra = RuntimeAuthority::new();
        let mut store = ArtifactStore::in_memory();
        let wl = workloads::make_docking_jash(3, 3, 1).unwrap();
        let mut tampered = wl.data.bytes.clone();
        tampered[0] ^= 1;
        assert!(matches!(
            ra.submit(
                &mut store,
                wl.program.source_text(),
                &wl.meta,
                Some(&tampered),
                0.5,
                false
            ),
            Err(SubmitError::DataChecksumMismatch { .. })
        ));
        let ok = ra
            .submit(
                &mut store,
                wl.program.source_text(),
                &wl.meta,
                Some(&wl.data.bytes),
                0.5,
                false,
            )
            .unwrap();
        assert!(ok.enqueued);
    }

    #[test]
    fn state_round_trips_through_json() {
        let mut ra = RuntimeAuthority::new();
        let mut store = ArtifactStore::in_memory();
        submit_collatz(&mut ra, &mut store, "keep", 30, 0.8, false);
        ra.publish_next(1, &Digest::ZERO);
        let json = serde_json::to_string(&ra).unwrap();
        let back: RuntimeAuthority = serde_json::from_str(&json).unwrap();
        assert_eq!(back.queue_len(), ra.queue_len());
        assert_eq!(back.publication(1), ra.publication(1));
    }
}
