//! Deterministic discrete-event simulation of the miner network.
//!
//! A single event loop drives publication, fetching, mining, submission, and
//! block closure. Events are processed in (tick, sequence) order; processing
//! an event only schedules events at strictly later ticks; every random draw
//! comes from one seeded stream in processing order. Identical config and
//! seed therefore reproduce the chain and the event log bit for bit.
//!
//! Messages between the authority and miners are delayed by 1 plus a seeded
//! integer in [0, 4] ticks. Closure grace periods are sized to that bound so
//! acceptance never races in-flight submissions.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use pnpchain_core::jash::{DataWindowProvider, JashFn};
use pnpchain_core::ledger::{
    accept_classic, accept_full, accept_optimal, AcceptError, Block, BlockMode, Submission,
};
use pnpchain_core::publish::PublishedJash;
use pnpchain_core::{Bits, Digest, JashMeta};

use crate::authority::RuntimeAuthority;
use crate::store::{ArtifactStore, StoredBundle};

/// Maximum message latency in ticks: 1 + jitter in [0, 4].
const MAX_LATENCY: u64 = 5;
/// Classic blocks close this long after the first qualifying arrival, so
/// every submission with an earlier logical time has landed.
const CLASSIC_GRACE: u64 = MAX_LATENCY + 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    ScanAscending,
    ScanRandom { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinerSpec {
    pub id: String,
    pub hash_rate: u64,
    pub strategy: Strategy,
}

/// Dishonest behaviors for tests: keyed by (miner id, height) and, for
/// submission faults, the arg value to corrupt.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FaultPlan {
    /// Number of fetches that arrive corrupted before one succeeds.
    pub failed_fetches: BTreeMap<(String, u64), u32>,
    /// Submit a flipped res for this arg.
    pub wrong_res: BTreeSet<(String, u64, u64)>,
    /// Submit a corrupted proof for this arg.
    pub wrong_proof: BTreeSet<(String, u64, u64)>,
    /// Send this arg's submission twice.
    pub replay: BTreeSet<(String, u64, u64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub miners: Vec<MinerSpec>,
    pub blocks: u64,
    /// Optimal-mode submission window in ticks.
    pub window_ticks: u64,
    /// Leading-zero-bit threshold for classic blocks.
    pub difficulty_t: u32,
    #[serde(skip)]
    pub faults: FaultPlan,
}

impl SimConfig {
    pub fn equal_miners(count: u64, hash_rate: u64) -> Vec<MinerSpec> {
        (0..count)
            .map(|i| MinerSpec {
                id: format!("m{i}"),
                hash_rate,
                strategy: Strategy::ScanAscending,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Publish,
    Fetch,
    Result,
    CloseBlock,
}

/// One line of the event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoggedEvent {
    pub tick: u64,
    pub seq: u64,
    pub kind: EventKind,
    pub payload: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockStats {
    pub height: u64,
    pub mode: BlockMode,
    pub close_tick: u64,
    /// Submissions received inside the window.
    pub received: u64,
    /// Classic only: trials up to and including the winning nonce, in
    /// generation order.
    pub trials: Option<u64>,
}

#[derive(Debug)]
pub struct SimOutput {
    pub chain: Vec<Block>,
    pub events: Vec<LoggedEvent>,
    pub stats: Vec<BlockStats>,
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("simulation stalled at height {height} after {blocks_closed} blocks (no events remain)")]
    Stall { height: u64, blocks_closed: u64 },
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("simulation internal error: {0}")]
    Internal(String),
}

/// How miners divide the valid arg space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgAssignment {
    /// Half-open contiguous range `[start, end)`.
    Range { start: u64, end: u64 },
    /// `first, first + step, …` below `limit`.
    Stride { first: u64, step: u64, limit: u64 },
}

impl ArgAssignment {
    pub fn len(&self) -> u64 {
        match *self {
            ArgAssignment::Range { start, end } => end.saturating_sub(start),
            ArgAssignment::Stride { first, step, limit } => {
                if first >= limit {
                    0
                } else {
                    (limit - first).div_ceil(step)
                }
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The i-th assigned arg in ascending order.
    pub fn get(&self, i: u64) -> Option<u64> {
        if i >= self.len() {
            return None;
        }
        Some(match *self {
            ArgAssignment::Range { start, .. } => start + i,
            ArgAssignment::Stride { first, step, .. } => first + i * step,
        })
    }
}

/// Full mode slices `[0, arg_count)` into contiguous ranges proportional to
/// hash rate; optimal and classic modes interleave, miner k taking args
/// congruent to k modulo the miner count.
pub fn partition_args(arg_count: u64, mode: BlockMode, miners: &[MinerSpec]) -> Vec<ArgAssignment> {
    assert!(!miners.is_empty(), "partitioning requires at least one miner");
    match mode {
        BlockMode::Full => {
            let total_rate: u128 = miners.iter().map(|m| u128::from(m.hash_rate)).sum();
            let mut cut = 0u64;
            let mut cum = 0u128;
            miners
                .iter()
                .map(|m| {
                    cum += u128::from(m.hash_rate);
                    let end = (u128::from(arg_count) * cum / total_rate) as u64;
                    let range = ArgAssignment::Range { start: cut, end };
                    cut = end;
                    range
                })
                .collect()
        }
        BlockMode::Optimal | BlockMode::Classic => {
            let step = miners.len() as u64;
            (0..step)
                .map(|k| ArgAssignment::Stride {
                    first: k,
                    step,
                    limit: arg_count,
                })
                .collect()
        }
    }
}

/// A miner's traversal order over its assignment.
enum WorkOrder {
    Ascending(ArgAssignment),
    Shuffled(Vec<u64>),
}

impl WorkOrder {
    fn new(assignment: ArgAssignment, strategy: &Strategy, height: u64) -> WorkOrder {
        match strategy {
            Strategy::ScanAscending => WorkOrder::Ascending(assignment),
            Strategy::ScanRandom { seed } => {
                let mut args: Vec<u64> = (0..assignment.len())
                    .map(|i| assignment.get(i).unwrap())
                    .collect();
                let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(height));
                // Fisher-Yates.
                for i in (1..args.len()).rev() {
                    let j = rng.random_range(0..=i);
                    args.swap(i, j);
                }
                WorkOrder::Shuffled(args)
            }
        }
    }

    fn get(&self, i: u64) -> Option<u64> {
        match self {
            WorkOrder::Ascending(a) => a.get(i),
            WorkOrder::Shuffled(v) => v.get(i as usize).copied(),
        }
    }
}

struct InFlight {
    arg: Bits,
    res: Bits,
    remaining_steps: u64,
}

/// Per-miner mining state for the open block. Work is budgeted at
/// `hash_rate` steps per tick; an execution spanning ticks completes on the
/// tick its cumulative budget is reached.
struct MinerWork {
    order: WorkOrder,
    cursor: u64,
    in_flight: Option<InFlight>,
}

impl MinerWork {
    fn new(order: WorkOrder) -> Self {
        MinerWork {
            order,
            cursor: 0,
            in_flight: None,
        }
    }

    fn exhausted(&self) -> bool {
        self.in_flight.is_none() && self.order.get(self.cursor).is_none()
    }

    /// Runs one tick of budget; returns the (arg, res) pairs completed.
    fn tick(
        &mut self,
        mut budget: u64,
        meta: &JashMeta,
        jashfn: &JashFn,
        provider: &dyn DataWindowProvider,
    ) -> Vec<(Bits, Bits)> {
        let mut done = Vec::new();
        while budget > 0 {
            let work = match self.in_flight.take() {
                Some(w) => w,
                None => {
                    let Some(arg_value) = self.order.get(self.cursor) else {
                        break;
                    };
                    self.cursor += 1;
                    let arg = Bits::from_value(arg_value, usize::from(meta.n))
                        .expect("assignment stays within the meta's width");
                    match jashfn.execute(meta, &arg, provider) {
                        Ok(out) => InFlight {
                            arg,
                            res: out.res,
                            remaining_steps: out.steps_used.max(1),
                        },
                        // An unservable arg (data window missing) produces
                        // nothing; skip it and keep mining.
                        Err(_) => continue,
                    }
                }
            };
            let spent = work.remaining_steps.min(budget);
            budget -= spent;
            if work.remaining_steps > spent {
                self.in_flight = Some(InFlight {
                    remaining_steps: work.remaining_steps - spent,
                    ..work
                });
            } else {
                done.push((work.arg, work.res));
            }
        }
        done
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Ev {
    Publish { height: u64, force_classic: bool },
    Fetch { miner: usize, height: u64 },
    Work { miner: usize, height: u64 },
    Result { height: u64, sub: Submission, gen_index: u64 },
    Close { height: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Scheduled {
    tick: u64,
    seq: u64,
    ev: Ev,
}

impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.tick, self.seq).cmp(&(other.tick, other.seq))
    }
}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

struct OpenBlock {
    height: u64,
    publication: PublishedJash,
    jashfn: JashFn,
    bundle: Option<Vec<u8>>,
    publish_tick: u64,
    expected_results: u64,
    received: u64,
    /// Verified submissions with their generation index.
    subs: Vec<(Submission, u64)>,
    verified_args: BTreeSet<u64>,
    close_scheduled: bool,
    classic_qualified: bool,
}

impl OpenBlock {
    fn provider(&self) -> StoredBundle {
        StoredBundle::from_bytes(self.bundle.clone(), self.publication.meta.data_record_size)
    }
}

/// Runs the event loop until `config.blocks` blocks close. The authority
/// queue supplies publications; classic problems fill in when it runs dry.
pub fn run_simulation(
    config: &SimConfig,
    reward: u64,
    ra: &mut RuntimeAuthority,
    store: &mut ArtifactStore,
) -> Result<SimOutput, SimError> {
    validate_config(config)?;

    let mut sim = Sim {
        config,
        reward,
        ra,
        store,
        rng: ChaCha12Rng::seed_from_u64(config.seed),
        queue: BinaryHeap::new(),
        next_seq: 0,
        chain: vec![Block::genesis()],
        events: Vec::new(),
        stats: Vec::new(),
        open: None,
        workers: Vec::new(),
        gen_counter: 0,
        log_seq: 0,
        fetch_failure_counts: BTreeMap::new(),
    };
    sim.schedule(1, Ev::Publish { height: 1, force_classic: false });

    while sim.chain.len() as u64 <= config.blocks {
        let Some(Reverse(next)) = sim.queue.pop() else {
            return Err(SimError::Stall {
                height: sim.chain.len() as u64,
                blocks_closed: sim.chain.len() as u64 - 1,
            });
        };
        sim.process(next)?;
    }

    Ok(SimOutput {
        chain: sim.chain,
        events: sim.events,
        stats: sim.stats,
    })
}

fn validate_config(config: &SimConfig) -> Result<(), SimError> {
    if config.blocks == 0 {
        return Err(SimError::Config("blocks must be at least 1".into()));
    }
    if config.window_ticks == 0 {
        return Err(SimError::Config("window_ticks must be at least 1".into()));
    }
    let mut ids = BTreeSet::new();
    for m in &config.miners {
        if m.hash_rate == 0 {
            return Err(SimError::Config(format!("miner {} has hash_rate 0", m.id)));
        }
        if !ids.insert(&m.id) {
            return Err(SimError::Config(format!("duplicate miner id {}", m.id)));
        }
    }
    Ok(())
}

struct Sim<'a> {
    config: &'a SimConfig,
    reward: u64,
    ra: &'a mut RuntimeAuthority,
    store: &'a mut ArtifactStore,
    rng: ChaCha12Rng,
    queue: BinaryHeap<Reverse<Scheduled>>,
    next_seq: u64,
    chain: Vec<Block>,
    events: Vec<LoggedEvent>,
    stats: Vec<BlockStats>,
    open: Option<OpenBlock>,
    workers: Vec<Option<MinerWork>>,
    gen_counter: u64,
    log_seq: u64,
    fetch_failure_counts: BTreeMap<(usize, u64), u32>,
}

impl Sim<'_> {
    fn schedule(&mut self, tick: u64, ev: Ev) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Reverse(Scheduled { tick, seq, ev }));
    }

    fn latency(&mut self) -> u64 {
        1 + self.rng.random_range(0..MAX_LATENCY)
    }

    fn log(&mut self, tick: u64, kind: EventKind, payload: serde_json::Value) {
        let seq = self.log_seq;
        self.log_seq += 1;
        self.events.push(LoggedEvent {
            tick,
            seq,
            kind,
            payload,
        });
    }

    fn process(&mut self, event: Scheduled) -> Result<(), SimError> {
        let Scheduled { tick, ev, .. } = event;
        match ev {
            Ev::Publish {
                height,
                force_classic,
            } => self.on_publish(tick, height, force_classic),
            Ev::Fetch { miner, height } => self.on_fetch(tick, miner, height),
            Ev::Work { miner, height } => self.on_work(tick, miner, height),
            Ev::Result {
                height,
                sub,
                gen_index,
            } => self.on_result(tick, height, sub, gen_index),
            Ev::Close { height } => self.on_close(tick, height),
        }
    }

    fn on_publish(&mut self, tick: u64, height: u64, force_classic: bool) -> Result<(), SimError> {
        let prev_hash = self.chain.last().expect("genesis present").block_hash;
        let publication = if force_classic {
            self.ra.publish_classic(height, &prev_hash)
        } else {
            self.ra.publish_next(height, &prev_hash)
        };
        let jashfn = self
            .ra
            .resolve(self.store, &publication)
            .map_err(|e| SimError::Internal(format!("cannot resolve publication: {e}")))?;
        let bundle = match (publication.data_id, publication.meta.data_sha256) {
            (Some(id), Some(expected)) => {
                let bytes = self
                    .store
                    .get(&id)
                    .map_err(|e| SimError::Internal(format!("cannot fetch bundle: {e}")))?;
                if Digest::of(&bytes) != expected {
                    return Err(SimError::Internal("published bundle fails its checksum".into()));
                }
                Some(bytes)
            }
            _ => None,
        };

        self.log(
            tick,
            EventKind::Publish,
            serde_json::json!({
                "height": height,
                "jash_id": publication.jash_id,
                "mode": publication.mode.name(),
                "source_id": publication.source_id.map(|d| d.to_hex()),
                "data_id": publication.data_id.map(|d| d.to_hex()),
            }),
        );

        let expected_results = publication.meta.arg_count();
        self.open = Some(OpenBlock {
            height,
            publication,
            jashfn,
            bundle,
            publish_tick: tick,
            expected_results,
            received: 0,
            subs: Vec::new(),
            verified_args: BTreeSet::new(),
            close_scheduled: false,
            classic_qualified: false,
        });
        self.workers = self.config.miners.iter().map(|_| None).collect();
        self.gen_counter = 0;

        for miner in 0..self.config.miners.len() {
            let delay = self.latency();
            self.schedule(tick + delay, Ev::Fetch { miner, height });
        }
        // Optimal windows also close on the clock.
        if self.open.as_ref().unwrap().publication.mode == BlockMode::Optimal {
            self.schedule(tick + self.config.window_ticks, Ev::Close { height });
        }
        Ok(())
    }

    fn on_fetch(&mut self, tick: u64, miner: usize, height: u64) -> Result<(), SimError> {
        let Some(open) = &self.open else { return Ok(()) };
        if open.height != height {
            return Ok(());
        }
        let spec = &self.config.miners[miner];
        let fault_key = (spec.id.clone(), height);
        let corrupted = {
            let plan = &self.config.faults.failed_fetches;
            plan.get(&fault_key).copied().unwrap_or(0) > self.fetch_failures(miner, height)
        };

        let ok = !corrupted;
        self.log(
            tick,
            EventKind::Fetch,
            serde_json::json!({
                "miner_id": spec.id,
                "height": height,
                "jash_id": open.jash_id(),
                "ok": ok,
            }),
        );
        if !ok {
            self.record_fetch_failure(miner, height);
            // Checksum mismatch: retry next tick.
            self.schedule(tick + 1, Ev::Fetch { miner, height });
            return Ok(());
        }

        let open = self.open.as_ref().unwrap();
        let assignments = partition_args(
            open.publication.meta.arg_count(),
            open.publication.mode,
            &self.config.miners,
        );
        let order = WorkOrder::new(assignments[miner], &spec.strategy, height);
        self.workers[miner] = Some(MinerWork::new(order));
        self.schedule(tick + 1, Ev::Work { miner, height });
        Ok(())
    }

    fn on_work(&mut self, tick: u64, miner: usize, height: u64) -> Result<(), SimError> {
        let Some(open) = &self.open else { return Ok(()) };
        if open.height != height {
            return Ok(());
        }
        let Some(worker) = self.workers[miner].as_mut() else {
            return Ok(());
        };
        let spec = &self.config.miners[miner];
        let provider = open.provider();
        let completed = worker.tick(
            spec.hash_rate,
            &open.publication.meta,
            &open.jashfn,
            &provider,
        );
        let more = !worker.exhausted();

        for (arg, mut res) in completed {
            let arg_value = arg.value();
            let fault_key = (spec.id.clone(), height, arg_value);
            if self.config.faults.wrong_res.contains(&fault_key) {
                let flipped = res.value() ^ 1;
                res = Bits::from_value(flipped, res.len()).unwrap();
            }
            let mut sub = Submission::new(&spec.id, arg, res, tick);
            if self.config.faults.wrong_proof.contains(&fault_key) {
                let mut bytes = sub.proof.0;
                bytes[0] ^= 0xff;
                sub.proof = Digest(bytes);
            }
            let gen_index = self.gen_counter;
            self.gen_counter += 1;
            let delay = self.latency();
            self.schedule(
                tick + delay,
                Ev::Result {
                    height,
                    sub: sub.clone(),
                    gen_index,
                },
            );
            if self.config.faults.replay.contains(&fault_key) {
                let delay = self.latency();
                self.schedule(
                    tick + delay,
                    Ev::Result {
                        height,
                        sub,
                        gen_index,
                    },
                );
            }
        }

        if more {
            self.schedule(tick + 1, Ev::Work { miner, height });
        }
        Ok(())
    }

    fn on_result(
        &mut self,
        tick: u64,
        height: u64,
        sub: Submission,
        gen_index: u64,
    ) -> Result<(), SimError> {
        self.log(
            tick,
            EventKind::Result,
            serde_json::json!({
                "miner_id": sub.miner_id,
                "height": height,
                "arg": sub.arg.as_str(),
                "res": sub.res.as_str(),
                "proof": sub.proof.to_hex(),
                "logical_time": sub.logical_time,
            }),
        );
        let Some(open) = self.open.as_mut() else {
            return Ok(());
        };
        if open.height != height {
            return Ok(()); // landed after its block closed
        }
        open.received += 1;

        let verified = {
            let provider = open.provider();
            sub.proof_is_consistent()
                && open
                    .jashfn
                    .execute(&open.publication.meta, &sub.arg, &provider)
                    .map(|out| out.res == sub.res)
                    .unwrap_or(false)
        };
        if verified {
            open.verified_args.insert(sub.arg.value());
            open.subs.push((sub, gen_index));
        }

        let mode = open.publication.mode;
        let all_args_covered =
            open.verified_args.len() as u64 == open.publication.meta.arg_count();
        let all_received = open.received >= open.expected_results;
        let should_close = match mode {
            BlockMode::Full => all_args_covered,
            BlockMode::Optimal => all_received,
            BlockMode::Classic => {
                if !open.classic_qualified && verified {
                    let problem = open
                        .publication
                        .classic_problem()
                        .expect("classic publication has a header");
                    let sub = &open.subs.last().expect("just pushed").0;
                    if problem.digest_for(&sub.arg).leading_zero_bits()
                        >= self.config.difficulty_t
                    {
                        open.classic_qualified = true;
                    }
                }
                open.classic_qualified
            }
        };
        if should_close && !open.close_scheduled {
            open.close_scheduled = true;
            let delay = if mode == BlockMode::Classic {
                CLASSIC_GRACE
            } else {
                1
            };
            self.schedule(tick + delay, Ev::Close { height });
        }
        Ok(())
    }

    fn on_close(&mut self, tick: u64, height: u64) -> Result<(), SimError> {
        let Some(open) = &self.open else { return Ok(()) };
        if open.height != height {
            return Ok(());
        }
        let open = self.open.take().expect("checked above");
        let subs: Vec<Submission> = open.subs.iter().map(|(s, _)| s.clone()).collect();
        let meta = &open.publication.meta;
        let prev_hash = self.chain.last().unwrap().block_hash;

        let mode = open.publication.mode;
        let (winner_arg, winner_res, results_root, rewards, full_bytes, trials) = match mode {
            BlockMode::Optimal => {
                match accept_optimal(&subs, meta, self.reward, |_| true) {
                    Ok(out) => (
                        Some(out.winner.arg.clone()),
                        Some(out.winner.res.clone()),
                        None,
                        out.rewards,
                        None,
                        None,
                    ),
                    Err(AcceptError::NoSubmissions) => {
                        // No usable work arrived: this height falls back to
                        // classic rules and the jash returns to the queue.
                        self.ra.withdraw(open.publication);
                        self.schedule(
                            tick + 1,
                            Ev::Publish {
                                height,
                                force_classic: true,
                            },
                        );
                        return Ok(());
                    }
                    Err(e) => return Err(SimError::Internal(format!("optimal close: {e}"))),
                }
            }
            BlockMode::Full => {
                let out = accept_full(&subs, meta, self.reward, |_| true)
                    .map_err(|e| SimError::Internal(format!("full close: {e}")))?;
                (
                    None,
                    None,
                    Some(out.results_root),
                    out.rewards,
                    Some(out.result_set_bytes),
                    None,
                )
            }
            BlockMode::Classic => {
                let header = open
                    .publication
                    .classic_header
                    .expect("classic publication has a header");
                let out = accept_classic(&subs, &header, meta, self.config.difficulty_t, self.reward)
                    .map_err(|e| SimError::Internal(format!("classic close: {e}")))?;
                let winner_gen = open
                    .subs
                    .iter()
                    .filter(|(s, _)| s == &out.winner)
                    .map(|(_, g)| *g)
                    .min()
                    .expect("winner came from subs");
                let trials = open
                    .subs
                    .iter()
                    .filter(|(_, g)| *g <= winner_gen)
                    .count() as u64;
                (
                    Some(out.winner.arg.clone()),
                    Some(out.winner.res.clone()),
                    None,
                    out.rewards,
                    None,
                    Some(trials),
                )
            }
        };

        let block = Block {
            height,
            prev_hash,
            jash_id: open.publication.jash_id.clone(),
            mode,
            winner_arg,
            winner_res,
            results_root,
            rewards,
            logical_timestamp: tick,
            block_hash: Digest::ZERO,
        }
        .sealed();

        self.ra
            .aggregate(self.store, &block, full_bytes.as_deref())
            .map_err(|e| SimError::Internal(format!("aggregate: {e}")))?;

        self.log(
            tick,
            EventKind::CloseBlock,
            serde_json::json!({
                "height": height,
                "jash_id": block.jash_id,
                "mode": mode.name(),
                "winner_arg": block.winner_arg.as_ref().map(Bits::as_str),
                "winner_res": block.winner_res.as_ref().map(Bits::as_str),
                "results_root": block.results_root.map(|d| d.to_hex()),
                "rewards": block.rewards,
                "block_hash": block.block_hash.to_hex(),
            }),
        );
        self.stats.push(BlockStats {
            height,
            mode,
            close_tick: tick,
            received: open.received,
            trials,
        });
        self.chain.push(block);

        if (self.chain.len() as u64) <= self.config.blocks {
            self.schedule(
                tick + 1,
                Ev::Publish {
                    height: height + 1,
                    force_classic: false,
                },
            );
        }
        Ok(())
    }

    fn fetch_failures(&self, miner: usize, height: u64) -> u32 {
        self.fetch_failure_counts
            .get(&(miner, height))
            .copied()
            .unwrap_or(0)
    }

    fn record_fetch_failure(&mut self, miner: usize, height: u64) {
        *self
            .fetch_failure_counts
            .entry((miner, height))
            .or_insert(0) += 1;
    }
}

impl OpenBlock {
    fn jash_id(&self) -> &str {
        &self.publication.jash_id
    }
}
