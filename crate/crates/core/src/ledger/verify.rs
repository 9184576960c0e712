//! Full-chain verification by re-execution.
//!
//! Walks the chain from genesis and checks, per block: height continuity,
//! hash linkage, block-hash recomputation, reward conservation, and the
//! proof of useful work itself — the optimal or classic winner is
//! re-executed, and a full block's entire result set is refetched from the
//! store, its root recomputed, and every pair re-executed.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::bits::Bits;
use crate::digest::Digest;
use crate::jash::{
    digest_prefix_bits, execute, parse, validate, BundleWindows, JashProgram, NoData,
};
use crate::ledger::accept::result_set_from_json;
use crate::ledger::block::{Block, BlockMode};
use crate::meta::JashMeta;
use crate::publish::{classic_header, classic_jash_id, PublishedJash};

/// Read access to everything verification needs besides the blocks.
pub trait ChainContext {
    fn reward_per_block(&self) -> u64;
    /// Leading-zero-bit threshold for classic blocks.
    fn difficulty_bits(&self) -> u32;
    /// The publication record for a height; classic fallback blocks are
    /// recomputed from chain position and need none.
    fn publication(&self, height: u64) -> Option<PublishedJash>;
    /// Fetch a stored payload by content digest.
    fn artifact(&self, id: &Digest) -> Option<Vec<u8>>;
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("block {height} invalid: {check}: {detail}")]
pub struct ChainInvalid {
    pub height: u64,
    pub check: Check,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Genesis,
    HeightContinuity,
    HashLinkage,
    BlockHash,
    RewardConservation,
    Publication,
    Artifact,
    SourceValidity,
    WinnerFields,
    ReExecution,
    Difficulty,
    ResultSet,
    Coverage,
}

impl core::fmt::Display for Check {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Check::Genesis => "genesis form",
            Check::HeightContinuity => "height continuity",
            Check::HashLinkage => "hash linkage",
            Check::BlockHash => "block hash recomputation",
            Check::RewardConservation => "reward conservation",
            Check::Publication => "publication record",
            Check::Artifact => "artifact fetch",
            Check::SourceValidity => "source validity",
            Check::WinnerFields => "winner fields",
            Check::ReExecution => "re-execution",
            Check::Difficulty => "difficulty threshold",
            Check::ResultSet => "result set integrity",
            Check::Coverage => "result coverage",
        })
    }
}

fn fail(height: u64, check: Check, detail: impl Into<String>) -> ChainInvalid {
    ChainInvalid {
        height,
        check,
        detail: detail.into(),
    }
}

/// Ok, or the lowest failing height and the check that failed.
pub fn verify_chain(chain: &[Block], ctx: &impl ChainContext) -> Result<(), ChainInvalid> {
    let Some(genesis) = chain.first() else {
        return Err(fail(0, Check::Genesis, "chain is empty"));
    };
    if *genesis != Block::genesis() {
        return Err(fail(0, Check::Genesis, "genesis block is not canonical"));
    }

    for (i, block) in chain.iter().enumerate().skip(1) {
        let height = i as u64;
        verify_block(block, &chain[i - 1], height, ctx)?;
    }
    Ok(())
}

fn verify_block(
    block: &Block,
    parent: &Block,
    height: u64,
    ctx: &impl ChainContext,
) -> Result<(), ChainInvalid> {
    if block.height != height {
        return Err(fail(
            height,
            Check::HeightContinuity,
            format!("stored height {} at position {height}", block.height),
        ));
    }
    if block.prev_hash != parent.block_hash {
        return Err(fail(height, Check::HashLinkage, "prev_hash does not match parent"));
    }
    if block.compute_hash() != block.block_hash {
        return Err(fail(height, Check::BlockHash, "stored hash does not recompute"));
    }
    let reward = u128::from(ctx.reward_per_block());
    if block.reward_total() != reward {
        return Err(fail(
            height,
            Check::RewardConservation,
            format!("rewards sum to {}, expected {reward}", block.reward_total()),
        ));
    }

    match block.mode {
        BlockMode::Classic => verify_classic(block, parent, height, ctx),
        BlockMode::Optimal => verify_optimal(block, height, ctx),
        BlockMode::Full => verify_full(block, height, ctx),
    }
}

fn winner_of(block: &Block, height: u64) -> Result<(&Bits, &Bits), ChainInvalid> {
    match (&block.winner_arg, &block.winner_res) {
        (Some(arg), Some(res)) => Ok((arg, res)),
        _ => Err(fail(height, Check::WinnerFields, "winner arg/res missing")),
    }
}

fn verify_classic(
    block: &Block,
    parent: &Block,
    height: u64,
    ctx: &impl ChainContext,
) -> Result<(), ChainInvalid> {
    let header = classic_header(&parent.block_hash, height);
    if block.jash_id != classic_jash_id(&header) {
        return Err(fail(height, Check::Publication, "classic jash id does not recompute"));
    }
    if block.results_root.is_some() {
        return Err(fail(height, Check::WinnerFields, "classic block carries a results root"));
    }
    let (arg, res) = winner_of(block, height)?;
    let meta = crate::workloads::classic_meta(&block.jash_id);
    if arg.len() != usize::from(meta.n) {
        return Err(fail(height, Check::ReExecution, "winner nonce has the wrong width"));
    }
    let digest = crate::jash::ClassicProblem::new(header).digest_for(arg);
    if *res != digest_prefix_bits(&digest, usize::from(meta.m)) {
        return Err(fail(height, Check::ReExecution, "winner res does not recompute"));
    }
    if digest.leading_zero_bits() < ctx.difficulty_bits() {
        return Err(fail(
            height,
            Check::Difficulty,
            format!(
                "digest has {} leading zero bits, needs {}",
                digest.leading_zero_bits(),
                ctx.difficulty_bits()
            ),
        ));
    }
    Ok(())
}

struct ResolvedJash {
    meta: JashMeta,
    program: JashProgram,
    data: Option<Vec<u8>>,
}

fn resolve_publication(
    block: &Block,
    height: u64,
    expected_mode: BlockMode,
    ctx: &impl ChainContext,
) -> Result<ResolvedJash, ChainInvalid> {
    let publication = ctx
        .publication(height)
        .ok_or_else(|| fail(height, Check::Publication, "no publication record"))?;
    if publication.jash_id != block.jash_id
        || publication.block_height != height
        || publication.mode != expected_mode
    {
        return Err(fail(height, Check::Publication, "publication does not match block"));
    }
    let source_id = publication
        .source_id
        .ok_or_else(|| fail(height, Check::Publication, "publication has no source"))?;
    let source = fetch(ctx, &source_id, height)?;
    let source = core::str::from_utf8(&source)
        .map_err(|_| fail(height, Check::SourceValidity, "source is not utf-8"))?;
    let program =
        parse(source).map_err(|e| fail(height, Check::SourceValidity, format!("{e}")))?;
    let meta = publication.meta.clone();
    let report = validate(&program, &meta);
    if !report.is_ok() {
        return Err(fail(height, Check::SourceValidity, format!("{report}")));
    }

    let data = match (publication.data_id, meta.data_sha256) {
        (Some(data_id), Some(expected)) => {
            if data_id != expected {
                return Err(fail(height, Check::ResultSet, "data id differs from meta checksum"));
            }
            Some(fetch(ctx, &data_id, height)?)
        }
        (None, None) => None,
        _ => return Err(fail(height, Check::Publication, "data id and meta checksum disagree")),
    };
    Ok(ResolvedJash {
        meta,
        program,
        data,
    })
}

/// Every fetch re-verifies the digest before the payload is used.
fn fetch(ctx: &impl ChainContext, id: &Digest, height: u64) -> Result<Vec<u8>, ChainInvalid> {
    let bytes = ctx
        .artifact(id)
        .ok_or_else(|| fail(height, Check::Artifact, format!("artifact {id} missing")))?;
    if Digest::of(&bytes) != *id {
        return Err(fail(height, Check::Artifact, format!("artifact {id} corrupt")));
    }
    Ok(bytes)
}

fn execute_pair(
    resolved: &ResolvedJash,
    arg: &Bits,
    height: u64,
) -> Result<Bits, ChainInvalid> {
    let run = match &resolved.data {
        Some(bytes) => execute(
            &resolved.program,
            &resolved.meta,
            arg,
            &BundleWindows {
                bytes,
                record_size: resolved.meta.data_record_size,
            },
        ),
        None => execute(&resolved.program, &resolved.meta, arg, &NoData),
    };
    run.map(|out| out.res)
        .map_err(|e| fail(height, Check::ReExecution, format!("{e}")))
}

fn verify_optimal(block: &Block, height: u64, ctx: &impl ChainContext) -> Result<(), ChainInvalid> {
    if block.results_root.is_some() {
        return Err(fail(height, Check::WinnerFields, "optimal block carries a results root"));
    }
    let (arg, res) = winner_of(block, height)?;
    let resolved = resolve_publication(block, height, BlockMode::Optimal, ctx)?;
    let recomputed = execute_pair(&resolved, arg, height)?;
    if recomputed != *res {
        return Err(fail(height, Check::ReExecution, "winner res does not recompute"));
    }
    Ok(())
}

fn verify_full(block: &Block, height: u64, ctx: &impl ChainContext) -> Result<(), ChainInvalid> {
    if block.winner_arg.is_some() || block.winner_res.is_some() {
        return Err(fail(height, Check::WinnerFields, "full block carries winner fields"));
    }
    let root = block
        .results_root
        .ok_or_else(|| fail(height, Check::WinnerFields, "full block lacks a results root"))?;
    let resolved = resolve_publication(block, height, BlockMode::Full, ctx)?;

    let bytes = fetch(ctx, &root, height)?; // digest check doubles as root recomputation
    let pairs = result_set_from_json(&bytes)
        .map_err(|e| fail(height, Check::ResultSet, format!("{e}")))?;

    let expected_count = resolved.meta.arg_count();
    if pairs.len() as u64 != expected_count {
        return Err(fail(
            height,
            Check::Coverage,
            format!("{} results, expected {expected_count}", pairs.len()),
        ));
    }
    for (i, (arg_value, res)) in pairs.iter().enumerate() {
        if *arg_value != i as u64 {
            return Err(fail(
                height,
                Check::Coverage,
                format!("entry {i} is arg {arg_value}, expected {i}"),
            ));
        }
        let arg = Bits::from_value(*arg_value, usize::from(resolved.meta.n))
            .map_err(|_| fail(height, Check::Coverage, "arg width invalid"))?;
        let recomputed = execute_pair(&resolved, &arg, height)?;
        if recomputed != *res {
            return Err(fail(
                height,
                Check::ReExecution,
                format!("res for arg {arg_value} does not recompute"),
            ));
        }
    }
    Ok(())
}
