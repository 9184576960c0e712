//! Blocks and their canonical byte form.
//!
//! Canonical serialization is fixed field order with big-endian 8-byte
//! integers and 4-byte length prefixes on variable-length fields; the block
//! hash is SHA-256 of everything except the hash itself. A chain file is a
//! sequence of serialized blocks, each preceded by a big-endian 4-byte
//! length.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::digest::Digest;
use crate::meta::ExecMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockMode {
    Full,
    Optimal,
    Classic,
}

impl From<ExecMode> for BlockMode {
    fn from(mode: ExecMode) -> Self {
        match mode {
            ExecMode::Full => BlockMode::Full,
            ExecMode::Optimal => BlockMode::Optimal,
        }
    }
}

impl BlockMode {
    fn code(self) -> u8 {
        match self {
            BlockMode::Full => 0,
            BlockMode::Optimal => 1,
            BlockMode::Classic => 2,
        }
    }

    fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(BlockMode::Full),
            1 => Some(BlockMode::Optimal),
            2 => Some(BlockMode::Classic),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BlockMode::Full => "full",
            BlockMode::Optimal => "optimal",
            BlockMode::Classic => "classic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub height: u64,
    pub prev_hash: Digest,
    pub jash_id: String,
    pub mode: BlockMode,
    pub winner_arg: Option<Bits>,
    pub winner_res: Option<Bits>,
    pub results_root: Option<Digest>,
    /// Coinbase rewards, ordered by miner id; amounts sum to the per-block
    /// reward exactly.
    pub rewards: Vec<(String, u64)>,
    pub logical_timestamp: u64,
    pub block_hash: Digest,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BlockDecodeError {
    #[error("block record truncated")]
    Truncated,
    #[error("block record has {0} trailing bytes")]
    TrailingBytes(usize),
    #[error("unknown mode code {0}")]
    BadMode(u8),
    #[error("invalid bit string field")]
    BadBits,
    #[error("invalid utf-8 in string field")]
    BadUtf8,
    #[error("length prefix exceeds record size")]
    BadLength,
}

impl Block {
    /// The fixed height-0 block every chain starts from.
    pub fn genesis() -> Block {
        Block {
            height: 0,
            prev_hash: Digest::ZERO,
            jash_id: String::new(),
            mode: BlockMode::Classic,
            winner_arg: None,
            winner_res: None,
            results_root: None,
            rewards: Vec::new(),
            logical_timestamp: 0,
            block_hash: Digest::ZERO,
        }
        .sealed()
    }

    /// Recomputes `block_hash` from the other fields.
    pub fn sealed(mut self) -> Block {
        self.block_hash = self.compute_hash();
        self
    }

    pub fn compute_hash(&self) -> Digest {
        Digest::of(&self.preimage())
    }

    /// Canonical serialization of every field except the hash.
    pub fn preimage(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(128);
        out.extend_from_slice(&self.height.to_be_bytes());
        out.extend_from_slice(self.prev_hash.as_bytes());
        put_bytes(&mut out, self.jash_id.as_bytes());
        out.push(self.mode.code());
        put_opt_bits(&mut out, &self.winner_arg);
        put_opt_bits(&mut out, &self.winner_res);
        match &self.results_root {
            None => out.push(0),
            Some(root) => {
                out.push(1);
                out.extend_from_slice(root.as_bytes());
            }
        }
        out.extend_from_slice(&(self.rewards.len() as u32).to_be_bytes());
        for (miner, amount) in &self.rewards {
            put_bytes(&mut out, miner.as_bytes());
            out.extend_from_slice(&amount.to_be_bytes());
        }
        out.extend_from_slice(&self.logical_timestamp.to_be_bytes());
        out
    }

    /// Preimage plus the stored hash: the chain-file record body.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.preimage();
        out.extend_from_slice(self.block_hash.as_bytes());
        out
    }

    /// Decodes one record body; requires exact consumption.
    pub fn from_bytes(bytes: &[u8]) -> Result<Block, BlockDecodeError> {
        let mut r = Reader { bytes, at: 0 };
        let height = r.u64()?;
        let prev_hash = Digest(r.array()?);
        let jash_id = r.string()?;
        let mode =
            BlockMode::from_code(r.u8()?).ok_or_else(|| BlockDecodeError::BadMode(bytes[r.at - 1]))?;
        let winner_arg = r.opt_bits()?;
        let winner_res = r.opt_bits()?;
        let results_root = if r.u8()? == 1 {
            Some(Digest(r.array()?))
        } else {
            None
        };
        let count = r.u32()? as usize;
        let mut rewards = Vec::new();
        for _ in 0..count {
            let miner = r.string()?;
            let amount = r.u64()?;
            rewards.push((miner, amount));
        }
        let logical_timestamp = r.u64()?;
        let block_hash = Digest(r.array()?);
        if r.at != bytes.len() {
            return Err(BlockDecodeError::TrailingBytes(bytes.len() - r.at));
        }
        Ok(Block {
            height,
            prev_hash,
            jash_id,
            mode,
            winner_arg,
            winner_res,
            results_root,
            rewards,
            logical_timestamp,
            block_hash,
        })
    }

    pub fn reward_total(&self) -> u128 {
        self.rewards.iter().map(|(_, a)| u128::from(*a)).sum()
    }
}

fn put_bytes(out: &mut Vec<u8>, bytes: &[u8]) {
    out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
    out.extend_from_slice(bytes);
}

fn put_opt_bits(out: &mut Vec<u8>, bits: &Option<Bits>) {
    match bits {
        None => out.push(0),
        Some(b) => {
            out.push(1);
            put_bytes(out, b.as_str().as_bytes());
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn take(&mut self, len: usize) -> Result<&[u8], BlockDecodeError> {
        let end = self.at.checked_add(len).ok_or(BlockDecodeError::BadLength)?;
        if end > self.bytes.len() {
            return Err(BlockDecodeError::Truncated);
        }
        let slice = &self.bytes[self.at..end];
        self.at = end;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8, BlockDecodeError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, BlockDecodeError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, BlockDecodeError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], BlockDecodeError> {
        Ok(self.take(N)?.try_into().unwrap())
    }

    fn string(&mut self) -> Result<String, BlockDecodeError> {
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        core::str::from_utf8(bytes)
            .map(String::from)
            .map_err(|_| BlockDecodeError::BadUtf8)
    }

    fn opt_bits(&mut self) -> Result<Option<Bits>, BlockDecodeError> {
        if self.u8()? == 0 {
            return Ok(None);
        }
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        let text = core::str::from_utf8(bytes).map_err(|_| BlockDecodeError::BadUtf8)?;
        Bits::new(text).map(Some).map_err(|_| BlockDecodeError::BadBits)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("chain file invalid at block index {index}: {cause}")]
pub struct ChainDecodeError {
    pub index: u64,
    pub cause: BlockDecodeError,
}

/// Frames blocks into a chain file image: 4-byte big-endian length, then the
/// record body, repeated.
pub fn encode_chain(blocks: &[Block]) -> Vec<u8> {
    let mut out = Vec::new();
    for block in blocks {
        let body = block.to_bytes();
        out.extend_from_slice(&(body.len() as u32).to_be_bytes());
        out.extend_from_slice(&body);
    }
    out
}

pub fn decode_chain(bytes: &[u8]) -> Result<Vec<Block>, ChainDecodeError> {
    let mut blocks = Vec::new();
    let mut at = 0usize;
    let mut index = 0u64;
    while at < bytes.len() {
        let fail = |cause| ChainDecodeError { index, cause };
        if at + 4 > bytes.len() {
            return Err(fail(BlockDecodeError::Truncated));
        }
        let len = u32::from_be_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
        at += 4;
        let end = at.checked_add(len).ok_or_else(|| fail(BlockDecodeError::BadLength))?;
        if end > bytes.len() {
            return Err(fail(BlockDecodeError::Truncated));
        }
        blocks.push(Block::from_bytes(&bytes[at..end]).map_err(fail)?);
        at = end;
        index += 1;
    }
    Ok(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Block {
        Block {
            height: 3,
            prev_hash: Digest::of(b"parent"),
            jash_id: String::from("collatz-s30"),
            mode: BlockMode::Optimal,
            winner_arg: Some(Bits::new("0000000000100101").unwrap()),
            winner_res: Some(Bits::new("001").unwrap()),
            results_root: None,
            rewards: alloc::vec![(String::from("m0"), 1000)],
            logical_timestamp: 42,
            block_hash: Digest::ZERO,
        }
        .sealed()
    }

    #[test]
    fn hash_covers_every_field() {
        let block = sample();
        assert_eq!(block.compute_hash(), block.block_hash);
        let mut tampered = block.clone();
        tampered.logical_timestamp += 1;
        assert_ne!(tampered.compute_hash(), block.block_hash);
    }

    #[test]
    fn reordering_rewards_changes_the_hash() {
        let mut block = sample();
        block.rewards = alloc::vec![
            (String::from("a"), 400),
            (String::from("b"), 600),
        ];
        let block = block.sealed();
        let mut reordered = block.clone();
        reordered.rewards.swap(0, 1);
        assert_ne!(reordered.compute_hash(), block.block_hash);
    }

    #[test]
    fn byte_round_trip() {
        for block in [Block::genesis(), sample()] {
            let bytes = block.to_bytes();
            assert_eq!(Block::from_bytes(&bytes).unwrap(), block);
        }
    }

    #[test]
    fn decode_rejects_damage() {
        let block = sample();
        let bytes = block.to_bytes();
        assert!(matches!(
            Block::from_bytes(&bytes[..bytes.len() - 1]),
            Err(BlockDecodeError::Truncated)
        ));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(
            Block::from_bytes(&extra),
            Err(BlockDecodeError::TrailingBytes(1))
        ));
        let mut bad_mode = bytes.clone();
        // Mode byte sits after height (8), prev (32), and the id field.
        let id_len = block.jash_id.len();
        bad_mode[8 + 32 + 4 + id_len] = 9;
        assert!(matches!(
            Block::from_bytes(&bad_mode),
            Err(BlockDecodeError::BadMode(9))
        ));
    }

    #[test]
    fn chain_framing_round_trips() {
        let chain = alloc::vec![Block::genesis(), sample()];
        let bytes = encode_chain(&chain);
        assert_eq!(decode_chain(&bytes).unwrap(), chain);
    }

    #[test]
    fn chain_decode_reports_the_failing_index() {
        let chain = alloc::vec![Block::genesis(), sample()];
        let mut bytes = encode_chain(&chain);
        let n = bytes.len();
        bytes.truncate(n - 3);
        let err = decode_chain(&bytes).unwrap_err();
        assert_eq!(err.index, 1);
    }

    #[test]
    fn genesis_is_stable() {
        assert_eq!(Block::genesis(), Block::genesis());
        assert_eq!(Block::genesis().prev_hash, Digest::ZERO);
        assert_eq!(Block::genesis().height, 0);
    }
}
