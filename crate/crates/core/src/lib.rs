//! PAI Data: storage and sharing transactions that commit encrypted content
//! to a UTXO chain through OP_RETURN envelopes.
//!
//! The crate is organized by role:
//!
//! - [`codec`]: envelope and transaction wire formats
//! - [`crypto`]: keys, signatures, hashing and sealing to a recipient
//! - [`chain`]: the simulated blockchain, mempool and scans
//! - [`provider`]: the content-addressed storage provider
//! - [`custody`]: grant/revoke state replayed from chain data outputs
//! - [`workflows`]: store, share, retrieve and revoke end to end
//! - [`http`]: JSON-over-HTTP services and clients for the node and provider

pub mod chain;
pub mod codec;
pub mod crypto;
pub mod custody;
pub mod http;
pub mod ids;
pub mod provider;
pub mod workflows;

pub use chain::{Block, Chain, ChainAccess, ChainError, ChainParams, DataRecord, SharedChain, BLOCK_SUBSIDY};
pub use codec::{OpKind, PayloadEnvelope, Transaction, TxInput, TxOutput};
pub use crypto::{CryptoError, KeyPair, PublicKey, SealedBlob};
pub use custody::{AccessStatus, CustodyLedger, ExistenceProof};
pub use provider::{ContentManifest, ProviderApi, ProviderConfig, ProviderError, ProviderStore};
pub use workflows::{StoreReceipt, Wallet, WorkflowError};
pub use ids::{Address, BlockHash, ContentId, OutPoint, Txid};
