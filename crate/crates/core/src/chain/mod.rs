//! A deterministic single-producer UTXO chain with a FIFO mempool.
//!
//! There is no proof of work and no reorganization. Every block is validated
//! in full when connected, both when freshly mined and when replayed from disk.

mod block;
mod shared;
mod state;
mod store;

pub use block::Block;
pub use shared::SharedChain;
pub use state::{Chain, ChainParams, DataRecord, TipInfo, Utxo};

use crate::codec::{Transaction, TxCodecError};
use crate::ids::{Address, OutPoint, Txid};

/// Base units minted by every coinbase.
pub const BLOCK_SUBSIDY: u64 = 50_000_000;

/// Serialized over HTTP as `{"error": "<snake_case variant>", "detail": ...}`.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, serde::Serialize, serde::Deserialize)]
#[serde(tag = "error", content = "detail", rename_all = "snake_case")]
pub enum ChainError {
    #[error("invalid signature on input {input}")]
    InvalidSignature { input: usize },
    #[error("input {input} public key does not own the spent output")]
    PubkeyMismatch { input: usize },
    #[error("unknown input {0}")]
    UnknownInput(OutPoint),
    #[error("double spend of {0}")]
    DoubleSpend(OutPoint),
    #[error("outputs exceed inputs or value overflow")]
    ValueOverflow,
    #[error("transaction has more than one data output")]
    TooManyDataOutputs,
    #[error("data output of {0} bytes exceeds the relay limit")]
    DataTooLarge(usize),
    #[error("non-coinbase transaction without inputs")]
    NoInputs,
    #[error("invalid coinbase: {0}")]
    BadCoinbase(String),
    #[error("block timestamp {got} precedes parent timestamp {parent}")]
    TimestampRegression { parent: u64, got: u64 },
    #[error("block does not extend the tip: {0}")]
    BadLink(String),
    #[error("height range {from}..={to} outside 0..={tip}")]
    RangeOutOfBounds { from: u64, to: u64, tip: u64 },
    #[error("malformed transaction: {0}")]
    Codec(String),
    #[error("chain storage: {0}")]
    Storage(String),
    #[error("chain node unavailable: {0}")]
    Unavailable(String),
}

impl From<TxCodecError> for ChainError {
    fn from(err: TxCodecError) -> Self {
        match err {
            TxCodecError::TooManyDataOutputs => ChainError::TooManyDataOutputs,
            other => ChainError::Codec(other.to_string()),
        }
    }
}

impl From<std::io::Error> for ChainError {
    fn from(err: std::io::Error) -> Self {
        ChainError::Storage(err.to_string())
    }
}

/// What wallets and the custody ledger need from a chain node, local or remote.
pub trait ChainAccess: Send + Sync {
    fn submit_tx(&self, tx: &Transaction) -> Result<Txid, ChainError>;

    /// Outputs owned by `address` that are unspent once the mempool is applied.
    fn spendable_utxos(&self, address: &Address) -> Result<Vec<Utxo>, ChainError>;

    fn scan_data_outputs(&self, from_height: u64, to_height: u64) -> Result<Vec<DataRecord>, ChainError>;

    fn tip(&self) -> Result<TipInfo, ChainError>;

    /// Height of the block containing `txid`, if mined.
    fn tx_height(&self, txid: &Txid) -> Result<Option<u64>, ChainError>;

    fn scan_all(&self) -> Result<Vec<DataRecord>, ChainError> {
        let tip = self.tip()?;
        self.scan_data_outputs(0, tip.height)
    }
}
