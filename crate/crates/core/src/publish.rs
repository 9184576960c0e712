//! Publication records binding a jash to a block height, plus the derivation
//! of classic fallback problems from chain position.

use alloc::format;
use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::digest::Digest;
use crate::jash::ClassicProblem;
use crate::ledger::block::BlockMode;
use crate::meta::JashMeta;
use crate::workloads;

/// Exactly one of these exists per block height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedJash {
    pub jash_id: String,
    pub block_height: u64,
    pub mode: BlockMode,
    pub meta: JashMeta,
    /// Store digest of the source text; absent for builtin classic problems.
    pub source_id: Option<Digest>,
    /// Store digest of the data bundle, when the jash has one.
    pub data_id: Option<Digest>,
    /// Header digest of a classic problem; recomputable from the chain.
    pub classic_header: Option<Digest>,
}

const CLASSIC_TAG: &[u8] = b"pnpchain-classic";

/// Header digest of the classic problem at a height. Depends on the parent
/// hash, so consecutive fallback blocks pose distinct problems.
pub fn classic_header(prev_hash: &Digest, height: u64) -> Digest {
    Digest::of_parts(&[CLASSIC_TAG, prev_hash.as_bytes(), &height.to_be_bytes()])
}

pub fn classic_jash_id(header: &Digest) -> String {
    format!("classic-{}", &header.to_hex()[..16])
}

/// The complete fallback publication for a height.
pub fn classic_publication(prev_hash: &Digest, height: u64) -> PublishedJash {
    let header = classic_header(prev_hash, height);
    let jash_id = classic_jash_id(&header);
    let meta = workloads::classic_meta(&jash_id);
    PublishedJash {
        jash_id,
        block_height: height,
        mode: BlockMode::Classic,
        meta,
        source_id: None,
        data_id: None,
        classic_header: Some(header),
    }
}

impl PublishedJash {
    pub fn classic_problem(&self) -> Option<ClassicProblem> {
        self.classic_header.map(ClassicProblem::new)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn consecutive_classic_problems_differ() {
        let a = classic_publication(&Digest::ZERO, 1);
        let b = classic_publication(&Digest::of(b"block-1"), 2);
        assert_ne!(a.classic_header, b.classic_header);
        assert_ne!(a.jash_id, b.jash_id);
        // Same position, same problem.
        assert_eq!(a, classic_publication(&Digest::ZERO, 1));
    }

    #[test]
    fn classic_meta_is_the_fallback_shape() {
        let p = classic_publication(&Digest::ZERO, 3);
        assert_eq!(p.meta.n, 20);
        assert_eq!(p.meta.m, 63);
        assert_eq!(p.mode, BlockMode::Classic);
        assert!(p.source_id.is_none());
    }
}
