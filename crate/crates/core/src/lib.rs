//! Core algorithms for pnpchain: the jash-mini language (parsing, validation,
//! the while-to-bounded-for rewrite, static step bounds, and a deterministic
//! interpreter), the ledger acceptance and verification rules, and the bundled
//! workload generators.
//!
//! Everything here is a pure function of its inputs and runs without `std`
//! (allocation only). IO, the runtime-authority loop, the network simulation,
//! and the CLI live in the companion `pnpchain` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod bits;
pub mod digest;
pub mod docking;
pub mod jash;
pub mod ledger;
pub mod meta;
pub mod publish;
pub mod workloads;

#[cfg(feature = "testing")]
pub mod testing;

pub use bits::Bits;
pub use digest::Digest;
pub use meta::{ExecMode, JashMeta};
