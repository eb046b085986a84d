//! CLI errors and their process exit codes.
//!
//! | Code | Meaning                                                   |
//! |------|-----------------------------------------------------------|
//! | 0    | success                                                   |
//! | 2    | invalid command line (reported by the argument parser)    |
//! | 3    | configuration or argument value error, missing wallet     |
//! | 4    | local file I/O error                                      |
//! | 10   | chain rejected a transaction or query                     |
//! | 11   | chain node unreachable                                    |
//! | 20   | provider error not covered below                          |
//! | 21   | provider storage full                                     |
//! | 22   | provider refused a delete (not the submitter)             |
//! | 23   | no provider reachable                                     |
//! | 30   | insufficient funds                                        |
//! | 31   | decryption failed: not the intended recipient             |
//! | 32   | provider served bytes that do not match the content id    |
//! | 33   | wallet is not the owner of the content                    |
//! | 34   | content not found on any provider                         |
//! | 40   | content id unknown to the custody ledger                  |
//! | 41   | custody replay error                                      |
//! | 42   | malformed ownership-claim header                          |
//! | 43   | no store event, so no proof of existence                  |

use std::path::PathBuf;

use paidata_core::custody::CustodyError;
use paidata_core::{ChainError, ProviderError, WorkflowError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Workflow(#[from] WorkflowError),
    #[error("chain: {0}")]
    Chain(#[from] ChainError),
    #[error("provider: {0}")]
    Provider(#[from] ProviderError),
    #[error("custody: {0}")]
    Custody(#[from] CustodyError),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Chain(e) => chain_code(e),
            CliError::Provider(e) => provider_code(e),
            CliError::Custody(e) => custody_code(e),
            CliError::Workflow(e) => match e {
                WorkflowError::ChainRejected(c) => chain_code(c),
                WorkflowError::Provider(p) => provider_code(p),
                WorkflowError::ProviderUnavailable(_) => 23,
                WorkflowError::InsufficientFunds { .. } => 30,
                WorkflowError::AuthFailure => 31,
                WorkflowError::ChunkMismatch { .. } => 32,
                WorkflowError::NotOwner => 33,
                WorkflowError::NotFound => 34,
                WorkflowError::Custody(c) => custody_code(c),
                WorkflowError::Claim(_) => 42,
            },
        }
    }

    /// Short machine-readable name used in `--json` error output.
    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            3 => "config",
            4 => "io",
            10 => "chain_rejected",
            11 => "chain_unavailable",
            21 => "storage_full",
            22 => "unauthorized",
            23 => "provider_unavailable",
            30 => "insufficient_funds",
            31 => "auth_failure",
            32 => "chunk_mismatch",
            33 => "not_owner",
            34 => "not_found",
            40 => "unknown_content",
            41 => "custody",
            42 => "claim",
            43 => "no_store_event",
            _ => "provider",
        }
    }
}

fn chain_code(err: &ChainError) -> i32 {
    match err {
        ChainError::Unavailable(_) => 11,
        _ => 10,
    }
}

fn provider_code(err: &ProviderError) -> i32 {
    match err {
        ProviderError::StorageFull { .. } => 21,
        ProviderError::Unauthorized => 22,
        ProviderError::Unavailable(_) => 23,
        ProviderError::NotFound => 34,
        _ => 20,
    }
}

fn custody_code(err: &CustodyError) -> i32 {
    match err {
        CustodyError::UnknownContent(_) => 40,
        CustodyError::NoStoreEvent(_) => 43,
        _ => 41,
    }
}
