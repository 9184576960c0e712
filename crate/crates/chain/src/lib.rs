//! Runtime authority, simulated fileshare, deterministic miner-network
//! simulation, and file formats for pnpchain. The pure language and ledger
//! rules live in `pnpchain-core`.

pub mod authority;
pub mod cli;
pub mod formats;
pub mod sim;
pub mod store;

pub use authority::{review, ReviewReport, RuntimeAuthority, SubmissionRecord};
pub use sim::{
    partition_args, run_simulation, ArgAssignment, BlockStats, EventKind, FaultPlan, LoggedEvent,
    MinerSpec, SimConfig, SimError, SimOutput, Strategy,
};
pub use store::{ArtifactKind, ArtifactStore, StoreError, StoredBundle};
