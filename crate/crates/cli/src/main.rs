//! `paidata`: chain node, storage provider and wallet in one binary.
//!
//! Every subcommand accepts `--json`. Exit codes are listed in [`error`].

mod commands;
mod config;
mod error;
mod wallet_file;

use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use paidata_core::{Address, ContentId, PublicKey};

use crate::config::{CliConfig, Overrides};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "paidata", version, about = "PAI Data node, provider and wallet")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// TOML configuration file.
    #[arg(long, global = true, env = "PAIDATA_CONFIG")]
    config: Option<PathBuf>,
    /// Wallet key file.
    #[arg(long, global = true, env = "PAIDATA_WALLET")]
    wallet: Option<PathBuf>,
    /// Local chain data directory (used when --node is not given).
    #[arg(long, global = true)]
    chain_dir: Option<PathBuf>,
    /// Chain node URL, e.g. http://127.0.0.1:7000.
    #[arg(long, global = true)]
    node: Option<String>,
    /// Provider URL, or file:<dir> for an in-process store. Repeatable.
    #[arg(long = "provider", global = true)]
    providers: Vec<String>,
    /// Value of grant/revoke subject outputs.
    #[arg(long, global = true)]
    dust: Option<u64>,
    /// Chunk size for providers started or opened by this process.
    #[arg(long, global = true)]
    chunk_size: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Chain node: serve, mine, scan, submit.
    #[command(subcommand)]
    Node(NodeCmd),
    /// Storage provider service.
    #[command(subcommand)]
    Provider(ProviderCmd),
    /// Key management and balances.
    #[command(subcommand)]
    Wallet(WalletCmd),
    /// Store, share, retrieve and revoke documents.
    #[command(subcommand)]
    Data(DataCmd),
    /// Queries over the chain-derived custody ledger.
    #[command(subcommand)]
    Custody(CustodyCmd),
}

#[derive(Debug, Subcommand)]
enum NodeCmd {
    /// Serve the chain API; prints the listening URL on stdout.
    Start {
        #[arg(long, default_value = "127.0.0.1:7000")]
        listen: SocketAddr,
    },
    /// Mine blocks from the mempool.
    Mine {
        /// Coinbase recipient; defaults to the wallet address.
        #[arg(long)]
        to: Option<Address>,
        /// Timestamp of the first block mined.
        #[arg(long)]
        timestamp: Option<u64>,
        #[arg(long, default_value_t = 1)]
        count: u32,
    },
    /// List PAI Data records in a height range.
    Scan {
        #[arg(long, default_value_t = 0)]
        from: u64,
        /// Defaults to the tip.
        #[arg(long)]
        to: Option<u64>,
    },
    /// Submit a hex-encoded serialized transaction.
    Submit {
        #[arg(long)]
        tx: String,
    },
    /// Show the tip block.
    Tip,
}

#[derive(Debug, Subcommand)]
enum ProviderCmd {
    /// Serve the provider API; prints the listening URL on stdout.
    Start {
        #[arg(long, default_value = "127.0.0.1:7100")]
        listen: SocketAddr,
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Maximum total stored bytes.
        #[arg(long)]
        capacity: Option<u64>,
        /// Maximum request body for uploads.
        #[arg(long, default_value_t = 64 << 20)]
        max_upload_bytes: usize,
    },
}

#[derive(Debug, Subcommand)]
enum WalletCmd {
    /// Create a key pair and write it to --wallet (if given).
    New {
        /// Derive the key deterministically from this seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Replace an existing wallet file.
        #[arg(long)]
        force: bool,
    },
    /// Spendable balance, unconfirmed change included.
    Balance,
    /// Address and public key.
    Address,
}

#[derive(Debug, Args)]
struct PaymentArgs {
    /// Pay the storage provider at this address.
    #[arg(long, requires = "pay_amount")]
    pay_to: Option<Address>,
    #[arg(long, requires = "pay_to")]
    pay_amount: Option<u64>,
}

impl PaymentArgs {
    fn get(&self) -> Option<(Address, u64)> {
        self.pay_to.zip(self.pay_amount)
    }
}

#[derive(Debug, Subcommand)]
enum DataCmd {
    /// Encrypt a file to yourself, host it, and commit a Store record.
    Store {
        #[arg(long)]
        file: PathBuf,
        /// Prepend a signed ownership claim naming this claimant.
        #[arg(long)]
        claimant: Option<String>,
        #[command(flatten)]
        payment: PaymentArgs,
    },
    /// Encrypt a file to a recipient, host it, and commit a Grant record.
    Share {
        #[arg(long)]
        file: PathBuf,
        /// Recipient public key (33-byte compressed, hex).
        #[arg(long, value_parser = parse_pubkey)]
        to: PublicKey,
        #[arg(long)]
        claimant: Option<String>,
        #[command(flatten)]
        payment: PaymentArgs,
    },
    /// Fetch, verify and decrypt a document.
    Retrieve {
        #[arg(long)]
        id: ContentId,
        /// Output file; without it the bytes go to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Keep an ownership-claim header instead of stripping it.
        #[arg(long)]
        raw: bool,
    },
    /// Commit a Revoke record for a recipient address.
    Revoke {
        #[arg(long)]
        id: ContentId,
        #[arg(long)]
        addr: Address,
        /// Also delete the blob from every configured provider.
        #[arg(long)]
        delete: bool,
        /// Submit even if the local ledger says we are not the owner.
        #[arg(long)]
        force: bool,
    },
}

#[derive(Debug, Subcommand)]
enum CustodyCmd {
    /// Every store/grant/revoke event for a content id.
    History {
        #[arg(long)]
        id: ContentId,
    },
    /// Owner, Granted, Revoked or NoRelation.
    Access {
        #[arg(long)]
        id: ContentId,
        /// Defaults to the wallet address.
        #[arg(long)]
        addr: Option<Address>,
    },
    /// Height, timestamp and txid of the first Store of a content id.
    Proof {
        #[arg(long)]
        id: ContentId,
    },
}

fn parse_pubkey(s: &str) -> Result<PublicKey, String> {
    s.parse().map_err(|e: paidata_core::CryptoError| e.to_string())
}

/// What a command prints: JSON for `--json`, text otherwise.
pub struct Output {
    pub json: serde_json::Value,
    pub text: String,
}

impl Output {
    pub fn new(json: serde_json::Value, text: impl Into<String>) -> Self {
        Self { json, text: text.into() }
    }
}

fn run(cli: Cli) -> Result<Option<Output>, CliError> {
    let cfg = CliConfig::load(Overrides {
        config: cli.config,
        chain_dir: cli.chain_dir,
        node: cli.node,
        providers: cli.providers,
        wallet: cli.wallet,
        dust: cli.dust,
        chunk_size: cli.chunk_size,
        json: cli.json,
    })?;
    commands::dispatch(&cfg, cli.command)
}

fn main() {
    let cli = Cli::parse();
    let json = cli.json;
    match run(cli) {
        Ok(Some(out)) => {
            let mut stdout = std::io::stdout().lock();
            let _ = if json {
                writeln!(stdout, "{}", out.json)
            } else if out.text.is_empty() {
                Ok(())
            } else {
                writeln!(stdout, "{}", out.text)
            };
        }
        Ok(None) => {}
        Err(err) => {
            if json {
                eprintln!(
                    "{}",
                    serde_json::json!({ "error": err.kind(), "message": err.to_string(), "exit_code": err.exit_code() })
                );
            } else {
                eprintln!("error: {err}");
            }
            std::process::exit(err.exit_code());
        }
    }
}
