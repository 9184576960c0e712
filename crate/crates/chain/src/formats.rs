//! On-disk formats: the chain file, the JSONL event log, and chain
//! verification wired to a store and authority state.

use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use pnpchain_core::ledger::{decode_chain, encode_chain, verify_chain, Block, ChainInvalid, Check};
use pnpchain_core::publish::PublishedJash;
use pnpchain_core::Digest;

use crate::authority::RuntimeAuthority;
use crate::sim::LoggedEvent;
use crate::store::ArtifactStore;

pub fn write_chain_file(path: &Path, blocks: &[Block]) -> io::Result<()> {
    fs::write(path, encode_chain(blocks))
}

#[derive(Debug, thiserror::Error)]
pub enum ChainFileError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("chain file invalid at height {height}: {cause}")]
    Decode {
        height: u64,
        cause: pnpchain_core::ledger::BlockDecodeError,
    },
}

pub fn read_chain_file(path: &Path) -> Result<Vec<Block>, ChainFileError> {
    let bytes = fs::read(path)?;
    decode_chain(&bytes).map_err(|e| ChainFileError::Decode {
        height: e.index,
        cause: e.cause,
    })
}

pub fn write_event_log(path: &Path, events: &[LoggedEvent]) -> io::Result<()> {
    let mut out = Vec::new();
    for event in events {
        serde_json::to_writer(&mut out, event).expect("events serialize");
        out.push(b'\n');
    }
    fs::write(path, out)
}

pub fn read_event_log(path: &Path) -> io::Result<Vec<LoggedEvent>> {
    let file = fs::File::open(path)?;
    let mut events = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let event = serde_json::from_str(&line)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        events.push(event);
    }
    Ok(events)
}

/// Chain verification context over the store and the authority's
/// publication records.
pub struct VerifyContext<'a> {
    pub store: &'a ArtifactStore,
    pub authority: &'a RuntimeAuthority,
    pub reward: u64,
    pub difficulty_t: u32,
}

impl pnpchain_core::ledger::ChainContext for VerifyContext<'_> {
    fn reward_per_block(&self) -> u64 {
        self.reward
    }

    fn difficulty_bits(&self) -> u32 {
        self.difficulty_t
    }

    fn publication(&self, height: u64) -> Option<PublishedJash> {
        self.authority.publication(height).cloned()
    }

    fn artifact(&self, id: &Digest) -> Option<Vec<u8>> {
        self.store.get(id).ok()
    }
}

/// Verifies a chain-file image end to end; framing damage reports the height
/// of the record it breaks.
pub fn verify_chain_bytes(bytes: &[u8], ctx: &VerifyContext<'_>) -> Result<(), ChainInvalid> {
    let chain = decode_chain(bytes).map_err(|e| ChainInvalid {
        height: e.index,
        check: Check::BlockHash,
        detail: format!("record does not decode: {}", e.cause),
    })?;
    verify_chain(&chain, ctx)
}

/// Authority state persisted between CLI invocations.
pub fn load_authority(path: &Path) -> io::Result<RuntimeAuthority> {
    match fs::read(path) {
        Ok(bytes) => serde_json::from_slice(&bytes)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(RuntimeAuthority::new()),
        Err(e) => Err(e),
    }
}

pub fn save_authority(path: &Path, ra: &RuntimeAuthority) -> io::Result<()> {
    let mut out = serde_json::to_vec_pretty(ra).expect("authority state serializes");
    out.push(b'\n');
    let mut file = fs::File::create(path)?;
    file.write_all(&out)
}
