//! Operator command line: submit jashes, run the authority + miner
//! simulation, verify chains, and export result sets.
//!
//! Exit codes are a stable contract: 0 success, 1 domain rejection or an
//! invalid chain, 2 usage error, 3 simulation stall.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use pnpchain_core::ledger::BLOCK_REWARD;
use pnpchain_core::workloads;
use pnpchain_core::JashMeta;

use crate::authority::{RuntimeAuthority, SubmitError};
use crate::formats::{
    load_authority, read_chain_file, save_authority, verify_chain_bytes, write_chain_file,
    write_event_log, VerifyContext,
};
use crate::sim::{run_simulation, SimConfig, SimError};
use crate::store::ArtifactStore;

pub const EXIT_OK: u8 = 0;
pub const EXIT_REJECTED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_STALL: u8 = 3;

const DEFAULT_MINER_HASH_RATE: u64 = 32;

#[derive(Parser)]
#[command(
    name = "pnpchain",
    about = "Bounded-computation proof-of-useful-work chain, simulated at desk scale",
    version
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args)]
pub struct GlobalOpts {
    /// Optional JSON config file; flags win over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Artifact store directory (env PNPCHAIN_STORE overrides the config).
    #[arg(long, global = true)]
    pub store: Option<PathBuf>,
    /// Chain file path.
    #[arg(long, global = true)]
    pub chain: Option<PathBuf>,
    /// Per-block reward in coin units.
    #[arg(long, global = true)]
    pub reward: Option<u64>,
    /// Optimal-mode submission window in ticks.
    #[arg(long, global = true)]
    pub window: Option<u64>,
    /// Classic difficulty: required leading zero bits.
    #[arg(long, global = true)]
    pub difficulty: Option<u32>,
}

#[derive(Subcommand)]
pub enum Command {
    /// Review a jash and enqueue it for publication.
    Submit(SubmitArgs),
    /// Run the simulation until the requested number of blocks close.
    Run(RunArgs),
    /// Re-verify a chain file end to end.
    Verify,
    /// Export the aggregated result set of a published jash.
    Results(ResultsArgs),
    /// Pretty-print one block of the chain file.
    Show(ShowArgs),
}

#[derive(Args)]
pub struct SubmitArgs {
    /// Jash source file.
    pub source: Option<PathBuf>,
    /// Meta JSON file.
    pub meta: Option<PathBuf>,
    /// Data bundle named by the meta's checksum.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Generate source, meta, and data from a workload manifest instead.
    #[arg(long, conflicts_with_all = ["source", "meta", "data"])]
    pub manifest: Option<PathBuf>,
    /// Overrides the meta's importance.
    #[arg(long)]
    pub importance: Option<f64>,
    /// Operator veto: review only, never publish.
    #[arg(long)]
    pub veto: bool,
}

#[derive(Args)]
pub struct RunArgs {
    /// Blocks to close.
    #[arg(long)]
    pub blocks: u64,
    /// Number of equal miners (ignored when --sim-config is given).
    #[arg(long, default_value_t = 4)]
    pub miners: u64,
    /// Steps each miner executes per tick.
    #[arg(long, default_value_t = DEFAULT_MINER_HASH_RATE)]
    pub hash_rate: u64,
    /// Simulation seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Full simulation config file (miners, window, difficulty).
    #[arg(long)]
    pub sim_config: Option<PathBuf>,
    /// Event log path.
    #[arg(long, default_value = "events.jsonl")]
    pub log: PathBuf,
}

#[derive(Args)]
pub struct ResultsArgs {
    pub jash_id: String,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ShowArgs {
    #[arg(long)]
    pub height: u64,
}

/// File-config shape mirroring the global flags.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    pub store_dir: Option<PathBuf>,
    pub chain_file: Option<PathBuf>,
    pub seed: Option<u64>,
    pub reward: Option<u64>,
    pub window_ticks: Option<u64>,
    pub difficulty_t: Option<u32>,
}

/// Effective settings after merging flags, environment, config, defaults.
pub struct Settings {
    pub store_dir: PathBuf,
    pub chain_file: PathBuf,
    pub seed: u64,
    pub reward: u64,
    pub window_ticks: u64,
    pub difficulty_t: u32,
}

fn usage_error(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(EXIT_USAGE)
}

fn resolve_settings(global: &GlobalOpts) -> Result<Settings, String> {
    let file: CliConfig = match &global.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            serde_json::from_str(&text)
                .map_err(|e| format!("config {} is invalid: {e}", path.display()))?
        }
        None => CliConfig::default(),
    };
    let env_store = std::env::var_os("PNPCHAIN_STORE").map(PathBuf::from);
    Ok(Settings {
        store_dir: global
            .store
            .clone()
            .or(env_store)
            .or(file.store_dir)
            .unwrap_or_else(|| PathBuf::from("store")),
        chain_file: global
            .chain
            .clone()
            .or(file.chain_file)
            .unwrap_or_else(|| PathBuf::from("chain.bin")),
        seed: file.seed.unwrap_or(0),
        reward: global.reward.or(file.reward).unwrap_or(BLOCK_REWARD),
        window_ticks: global.window.or(file.window_ticks).unwrap_or(10_000),
        difficulty_t: global.difficulty.or(file.difficulty_t).unwrap_or(8),
    })
}

fn authority_path(settings: &Settings) -> PathBuf {
    settings.store_dir.join("authority.json")
}

fn open_state(settings: &Settings) -> Result<(ArtifactStore, RuntimeAuthority), String> {
    let store = ArtifactStore::at_dir(&settings.store_dir)
        .map_err(|e| format!("cannot open store {}: {e}", settings.store_dir.display()))?;
    let ra = load_authority(&authority_path(settings))
        .map_err(|e| format!("cannot load authority state: {e}"))?;
    Ok((store, ra))
}

fn persist_state(settings: &Settings, ra: &RuntimeAuthority) -> Result<(), String> {
    save_authority(&authority_path(settings), ra)
        .map_err(|e| format!("cannot save authority state: {e}"))
}

pub fn run(cli: Cli) -> ExitCode {
    let settings = match resolve_settings(&cli.global) {
        Ok(s) => s,
        Err(e) => return usage_error(e),
    };
    match cli.command {
        Command::Submit(args) => cmd_submit(&settings, args),
        Command::Run(args) => cmd_run(&settings, args),
        Command::Verify => cmd_verify(&settings),
        Command::Results(args) => cmd_results(&settings, args),
        Command::Show(args) => cmd_show(&settings, args),
    }
}

/// Workload manifest: names a bundled generator and its parameters.
#[derive(Debug, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
enum WorkloadManifest {
    Collatz { s: u64 },
    Docking { peptides: u64, receptors: u64, seed: u64 },
}

struct SubmissionInput {
    source: String,
    meta: JashMeta,
    data: Option<Vec<u8>>,
}

fn load_submission_input(args: &SubmitArgs) -> Result<SubmissionInput, String> {
    if let Some(path) = &args.manifest {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read manifest {}: {e}", path.display()))?;
        let manifest: WorkloadManifest =
            serde_json::from_str(&text).map_err(|e| format!("manifest invalid: {e}"))?;
        return Ok(match manifest {
            WorkloadManifest::Collatz { s } => {
                let (program, meta) = workloads::make_collatz_jash(s);
                SubmissionInput {
                    source: program.source_text().to_string(),
                    meta,
                    data: None,
                }
            }
            WorkloadManifest::Docking {
                peptides,
                receptors,
                seed,
            } => {
                let wl = workloads::make_docking_jash(peptides, receptors, seed)
                    .map_err(|e| format!("docking manifest invalid: {e}"))?;
                SubmissionInput {
                    source: wl.program.source_text().to_string(),
                    meta: wl.meta,
                    data: Some(wl.data.bytes),
                }
            }
        });
    }

    let (Some(source_path), Some(meta_path)) = (&args.source, &args.meta) else {
        return Err("submit needs SOURCE and META files (or --manifest)".into());
    };
    let source = fs::read_to_string(source_path)
        .map_err(|e| format!("cannot read source {}: {e}", source_path.display()))?;
    let meta_text = fs::read_to_string(meta_path)
        .map_err(|e| format!("cannot read meta {}: {e}", meta_path.display()))?;
    let meta = JashMeta::from_json(&meta_text).map_err(|e| format!("meta invalid: {e}"))?;
    let data = match &args.data {
        Some(path) => Some(
            fs::read(path).map_err(|e| format!("cannot read data {}: {e}", path.display()))?,
        ),
        None => None,
    };
    Ok(SubmissionInput { source, meta, data })
}

fn cmd_submit(settings: &Settings, args: SubmitArgs) -> ExitCode {
    let input = match load_submission_input(&args) {
        Ok(i) => i,
        Err(e) => return usage_error(e),
    };
    let importance = args.importance.unwrap_or(input.meta.importance);
    if !(0.0..=1.0).contains(&importance) {
        return usage_error(format!("importance {importance} outside [0, 1]"));
    }

    let (mut store, mut ra) = match open_state(settings) {
        Ok(s) => s,
        Err(e) => return usage_error(e),
    };
    let outcome = match ra.submit(
        &mut store,
        &input.source,
        &input.meta,
        input.data.as_deref(),
        importance,
        args.veto,
    ) {
        Ok(outcome) => outcome,
        Err(e @ SubmitError::ImportanceOutOfRange(_)) | Err(e @ SubmitError::MissingData) => {
            return usage_error(e)
        }
        Err(e) => {
            eprintln!("rejected: {e}");
            return ExitCode::from(EXIT_REJECTED);
        }
    };

    let report = &outcome.report;
    println!("jash_id:     {}", input.meta.jash_id);
    println!("source_id:   {}", outcome.source_id);
    if let Some(data_id) = outcome.data_id {
        println!("data_id:     {data_id}");
    }
    println!("compiles:    {}", report.compiles);
    if let Some(err) = &report.parse_error {
        println!("parse error: {err}");
    }
    for violation in &report.violations {
        println!("violation:   {violation}");
    }
    if report.compiles {
        println!(
            "bound:       {} worst-case steps, degree c = {}",
            report.bound.worst_case_steps, report.bound.degree_c
        );
        println!(
            "runtime:     mean {:.1} steps, stddev {:.1}",
            report.mean_steps, report.stddev_steps
        );
        println!("priority:    {:.6}", report.priority);
    }
    println!("vetoed:      {}", report.vetoed);

    if let Err(e) = persist_state(settings, &ra) {
        return usage_error(e);
    }
    if outcome.enqueued {
        println!("enqueued for publication");
        ExitCode::from(EXIT_OK)
    } else {
        println!("not enqueued");
        ExitCode::from(EXIT_REJECTED)
    }
}

fn load_sim_config(settings: &Settings, args: &RunArgs) -> Result<SimConfig, String> {
    let mut config = match &args.sim_config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| format!("cannot read sim config {}: {e}", path.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("sim config invalid: {e}"))?
        }
        None => SimConfig {
            seed: settings.seed,
            miners: SimConfig::equal_miners(args.miners, args.hash_rate),
            blocks: args.blocks,
            window_ticks: settings.window_ticks,
            difficulty_t: settings.difficulty_t,
            faults: Default::default(),
        },
    };
    config.blocks = args.blocks;
    config.seed = args.seed;
    Ok(config)
}

fn cmd_run(settings: &Settings, args: RunArgs) -> ExitCode {
    let config = match load_sim_config(settings, &args) {
        Ok(c) => c,
        Err(e) => return usage_error(e),
    };
    let (mut store, mut ra) = match open_state(settings) {
        Ok(s) => s,
        Err(e) => return usage_error(e),
    };

    let output = match run_simulation(&config, settings.reward, &mut ra, &mut store) {
        Ok(out) => out,
        Err(e @ SimError::Stall { .. }) => {
            eprintln!("stalled: {e}");
            return ExitCode::from(EXIT_STALL);
        }
        Err(SimError::Config(msg)) => return usage_error(msg),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_REJECTED);
        }
    };

    for block in output.chain.iter().skip(1) {
        let winner = match (&block.winner_arg, &block.winner_res) {
            (Some(arg), Some(res)) => format!("arg {} res {}", arg, res),
            _ => format!(
                "results_root {}",
                block
                    .results_root
                    .map(|d| d.to_hex())
                    .unwrap_or_else(|| "-".into())
            ),
        };
        let rewards: Vec<String> = block
            .rewards
            .iter()
            .map(|(m, a)| format!("{m}:{a}"))
            .collect();
        println!(
            "block {:>3}  {:<8} {:<12} {} rewards [{}]",
            block.height,
            block.mode.name(),
            block.jash_id,
            winner,
            rewards.join(", ")
        );
    }

    if let Err(e) = write_chain_file(&settings.chain_file, &output.chain) {
        return usage_error(format!("cannot write chain file: {e}"));
    }
    if let Err(e) = write_event_log(&args.log, &output.events) {
        return usage_error(format!("cannot write event log: {e}"));
    }
    if let Err(e) = persist_state(settings, &ra) {
        return usage_error(e);
    }

    // The freshly written chain must verify; exit code reflects it.
    let ctx = VerifyContext {
        store: &store,
        authority: &ra,
        reward: settings.reward,
        difficulty_t: settings.difficulty_t,
    };
    let bytes = match fs::read(&settings.chain_file) {
        Ok(b) => b,
        Err(e) => return usage_error(format!("cannot reread chain file: {e}")),
    };
    match verify_chain_bytes(&bytes, &ctx) {
        Ok(()) => {
            println!(
                "{} blocks closed; chain written to {} and verified",
                output.chain.len() - 1,
                settings.chain_file.display()
            );
            ExitCode::from(EXIT_OK)
        }
        Err(e) => {
            eprintln!("chain failed verification: {e}");
            ExitCode::from(EXIT_REJECTED)
        }
    }
}

fn cmd_verify(settings: &Settings) -> ExitCode {
    let bytes = match fs::read(&settings.chain_file) {
        Ok(b) => b,
        Err(e) => {
            return usage_error(format!(
                "cannot read chain file {}: {e}",
                settings.chain_file.display()
            ))
        }
    };
    let (store, ra) = match open_state(settings) {
        Ok(s) => s,
        Err(e) => return usage_error(e),
    };
    let ctx = VerifyContext {
        store: &store,
        authority: &ra,
        reward: settings.reward,
        difficulty_t: settings.difficulty_t,
    };
    match verify_chain_bytes(&bytes, &ctx) {
        Ok(()) => {
            println!("ok");
            ExitCode::from(EXIT_OK)
        }
        Err(e) => {
            println!("invalid at height {}: {}: {}", e.height, e.check, e.detail);
            ExitCode::from(EXIT_REJECTED)
        }
    }
}

fn cmd_results(settings: &Settings, args: ResultsArgs) -> ExitCode {
    let (store, ra) = match open_state(settings) {
        Ok(s) => s,
        Err(e) => return usage_error(e),
    };
    let Some(id) = ra.result_set(&args.jash_id) else {
        return usage_error(format!("unknown jash_id `{}`", args.jash_id));
    };
    let bytes = match store.get(&id) {
        Ok(b) => b,
        Err(e) => return usage_error(format!("result set missing from store: {e}")),
    };
    match &args.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &bytes) {
                return usage_error(format!("cannot write {}: {e}", path.display()));
            }
            println!("wrote {} ({} bytes)", path.display(), bytes.len());
        }
        None => {
            let text = String::from_utf8_lossy(&bytes);
            println!("{text}");
        }
    }
    ExitCode::from(EXIT_OK)
}

fn cmd_show(settings: &Settings, args: ShowArgs) -> ExitCode {
    let chain = match read_chain_file(&settings.chain_file) {
        Ok(c) => c,
        Err(e) => return usage_error(e),
    };
    let Some(block) = chain.iter().find(|b| b.height == args.height) else {
        return usage_error(format!("no block at height {}", args.height));
    };
    println!("height:            {}", block.height);
    println!("mode:              {}", block.mode.name());
    println!("jash_id:           {}", block.jash_id);
    println!("prev_hash:         {}", block.prev_hash);
    println!("block_hash:        {}", block.block_hash);
    if let Some(arg) = &block.winner_arg {
        println!("winner_arg:        {arg}");
    }
    if let Some(res) = &block.winner_res {
        println!("winner_res:        {res}");
    }
    if let Some(root) = &block.results_root {
        println!("results_root:      {root}");
    }
    println!("logical_timestamp: {}", block.logical_timestamp);
    for (miner, amount) in &block.rewards {
        println!("reward:            {miner} {amount}");
    }
    ExitCode::from(EXIT_OK)
}

pub fn main_entry() -> ExitCode {
    run(Cli::parse())
}
