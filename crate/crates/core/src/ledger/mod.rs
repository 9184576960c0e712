//! The blockchain: block structure, acceptance rules per mode, and
//! verification by re-execution.

pub mod accept;
pub mod block;
pub mod verify;

pub use accept::{
    accept_classic, accept_full, accept_optimal, leading_zeros, result_set_from_json,
    result_set_to_json, AcceptError, ClassicOutcome, FullOutcome, OptimalOutcome, ResultEntry,
    Submission,
};
pub use block::{
    decode_chain, encode_chain, Block, BlockDecodeError, BlockMode, ChainDecodeError,
};
pub use verify::{verify_chain, ChainContext, ChainInvalid, Check};

/// Constant per-block reward in integer coin units.
pub const BLOCK_REWARD: u64 = 1000;
