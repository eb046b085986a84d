//! End-to-end submitter and recipient flows: store, share, retrieve, revoke.

pub mod claim;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chain::{ChainAccess, ChainError};
use crate::codec::{OpKind, PayloadEnvelope, Transaction, TxInput, TxOutput};
use crate::crypto::{self, hash_blob, open, seal, KeyPair, PublicKey, SealedBlob};
use crate::custody::{CustodyError, CustodyLedger};
use crate::ids::{Address, ContentId, Txid};
use crate::provider::{sign_delete_request, ContentManifest, DeleteAck, ProviderApi, ProviderError};

/// Value of the output that names a grant or revoke subject.
pub const DEFAULT_DUST: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WorkflowError {
    #[error("insufficient funds: need {needed}, have {available}")]
    InsufficientFunds { needed: u64, available: u64 },
    #[error("no provider reachable: {0}")]
    ProviderUnavailable(String),
    #[error("provider error: {0}")]
    Provider(ProviderError),
    #[error("chain rejected transaction: {0}")]
    ChainRejected(ChainError),
    #[error("content not found on any provider")]
    NotFound,
    #[error("provider served bytes that do not match the content id (chunk {index:?})")]
    ChunkMismatch { index: Option<u64> },
    #[error("cannot decrypt: not the intended recipient or blob tampered")]
    AuthFailure,
    #[error("wallet is not the owner of this content")]
    NotOwner,
    #[error("custody: {0}")]
    Custody(CustodyError),
    #[error("claim header: {0}")]
    Claim(#[from] claim::ClaimError),
}

impl From<ChainError> for WorkflowError {
    fn from(err: ChainError) -> Self {
        WorkflowError::ChainRejected(err)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreReceipt {
    pub content_id: ContentId,
    pub txid: Txid,
    pub manifest: ContentManifest,
    pub provider: String,
    /// Block height once mined.
    pub height: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderDeletion {
    pub provider: String,
    pub deleted: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevokeReceipt {
    pub txid: Txid,
    pub content_id: ContentId,
    pub recipient: Address,
    pub deletions: Vec<ProviderDeletion>,
}

/// A key pair plus the chain node and providers it talks to. Change always
/// returns to the wallet's own address.
#[derive(Clone)]
pub struct Wallet {
    keypair: KeyPair,
    chain: Arc<dyn ChainAccess>,
    providers: Vec<Arc<dyn ProviderApi>>,
    dust: u64,
}

impl Wallet {
    pub fn new(keypair: KeyPair, chain: Arc<dyn ChainAccess>, providers: Vec<Arc<dyn ProviderApi>>) -> Self {
        Self {
            keypair,
            chain,
            providers,
            dust: DEFAULT_DUST,
        }
    }

    pub fn with_dust(mut self, dust: u64) -> Self {
        self.dust = dust;
        self
    }

    pub fn keypair(&self) -> &KeyPair {
        &self.keypair
    }

    pub fn public_key(&self) -> &PublicKey {
        self.keypair.public()
    }

    pub fn address(&self) -> Address {
        self.keypair.address()
    }

    pub fn balance(&self) -> Result<u64, WorkflowError> {
        Ok(self
            .chain
            .spendable_utxos(&self.address())?
            .iter()
            .map(|u| u.amount)
            .sum())
    }

    /// Seals `plaintext` to this wallet's own key, hosts it, and commits a
    /// `Store` envelope on chain.
    pub fn store_data(
        &self,
        plaintext: &[u8],
        provider_payment: Option<(Address, u64)>,
    ) -> Result<StoreReceipt, WorkflowError> {
        let blob = seal(plaintext, self.public_key()).to_bytes();
        let (manifest, provider) = self.upload(&blob)?;
        let mut outputs = Vec::new();
        if let Some((address, amount)) = provider_payment {
            outputs.push(TxOutput::value(address, amount));
        }
        let txid = self.submit(PayloadEnvelope::new(OpKind::Store, manifest.content_id), outputs)?;
        Ok(StoreReceipt {
            content_id: manifest.content_id,
            txid,
            manifest,
            provider,
            height: None,
        })
    }

    /// `store_data` with an authorship claim header in front of the document.
    pub fn store_claimed(
        &self,
        document: &[u8],
        claimant: &str,
        provider_payment: Option<(Address, u64)>,
    ) -> Result<StoreReceipt, WorkflowError> {
        let bytes = claim::attach_claim(document, claimant, &self.keypair)?;
        self.store_data(&bytes, provider_payment)
    }

    /// Seals `plaintext` to `recipient`, hosts it, and commits a `Grant`
    /// envelope with a dust output addressed to the recipient.
    pub fn share_data(
        &self,
        plaintext: &[u8],
        recipient: &PublicKey,
        provider_payment: Option<(Address, u64)>,
    ) -> Result<StoreReceipt, WorkflowError> {
        let blob = seal(plaintext, recipient).to_bytes();
        let (manifest, provider) = self.upload(&blob)?;
        let mut outputs = vec![TxOutput::value(recipient.address(), self.dust)];
        if let Some((address, amount)) = provider_payment {
            outputs.push(TxOutput::value(address, amount));
        }
        let txid = self.submit(PayloadEnvelope::new(OpKind::Grant, manifest.content_id), outputs)?;
        Ok(StoreReceipt {
            content_id: manifest.content_id,
            txid,
            manifest,
            provider,
            height: None,
        })
    }

    /// Fetches, verifies and decrypts content from the first provider that has it.
    pub fn retrieve_data(&self, content_id: &ContentId) -> Result<Vec<u8>, WorkflowError> {
        let mut mismatch = None;
        let mut unavailable = None;
        for provider in &self.providers {
            match fetch_verified(provider.as_ref(), content_id) {
                Ok(blob) => {
                    let sealed = SealedBlob::from_bytes(&blob).map_err(|_| WorkflowError::AuthFailure)?;
                    return open(&sealed, &self.keypair).map_err(|_| WorkflowError::AuthFailure);
                }
                Err(WorkflowError::NotFound) => {}
                Err(WorkflowError::ProviderUnavailable(msg)) => unavailable = Some(msg),
                Err(err @ WorkflowError::ChunkMismatch { .. }) => mismatch = Some(err),
                Err(err) => return Err(err),
            }
        }
        Err(match (mismatch, unavailable) {
            (Some(err), _) => err,
            (None, Some(msg)) if self.providers.len() == 1 => WorkflowError::ProviderUnavailable(msg),
            _ => WorkflowError::NotFound,
        })
    }

    /// Publishes a `Revoke` for `recipient`. Refuses unless the custody
    /// ledger names this wallet as owner. With `also_delete_from_providers`,
    /// every configured provider is then asked to drop the content; those
    /// outcomes are reported, never fatal.
    pub fn revoke_access(
        &self,
        content_id: &ContentId,
        recipient: &Address,
        also_delete_from_providers: bool,
    ) -> Result<RevokeReceipt, WorkflowError> {
        let ledger = self.custody()?;
        if ledger.owner(content_id).ok().flatten() != Some(self.address()) {
            return Err(WorkflowError::NotOwner);
        }
        self.revoke_unchecked(content_id, recipient, also_delete_from_providers)
    }

    /// `revoke_access` without the local owner check. The chain accepts it;
    /// the ledger decides whether it has any effect.
    pub fn revoke_unchecked(
        &self,
        content_id: &ContentId,
        recipient: &Address,
        also_delete_from_providers: bool,
    ) -> Result<RevokeReceipt, WorkflowError> {
        let txid = self.submit(
            PayloadEnvelope::new(OpKind::Revoke, *content_id),
            vec![TxOutput::value(*recipient, self.dust)],
        )?;
        let deletions = if also_delete_from_providers {
            self.delete_from_providers(content_id)
        } else {
            Vec::new()
        };
        Ok(RevokeReceipt {
            txid,
            content_id: *content_id,
            recipient: *recipient,
            deletions,
        })
    }

    pub fn delete_from_providers(&self, content_id: &ContentId) -> Vec<ProviderDeletion> {
        let signature = sign_delete_request(content_id, &self.keypair).to_bytes();
        self.providers
            .iter()
            .map(|p| {
                let result: Result<DeleteAck, ProviderError> =
                    p.delete_content(content_id, self.public_key(), &signature);
                ProviderDeletion {
                    provider: p.endpoint(),
                    deleted: result.as_ref().is_ok_and(|a| a.deleted),
                    error: result.err().map(|e| e.to_string()),
                }
            })
            .collect()
    }

    /// Custody state rebuilt from a full chain scan.
    pub fn custody(&self) -> Result<CustodyLedger, WorkflowError> {
        let records = self.chain.scan_all()?;
        CustodyLedger::rebuild(&records).map_err(WorkflowError::Custody)
    }

    /// Fills in the receipt's block height if its transaction has been mined.
    pub fn confirm(&self, receipt: &mut StoreReceipt) -> Result<Option<u64>, WorkflowError> {
        receipt.height = self.chain.tx_height(&receipt.txid)?;
        Ok(receipt.height)
    }

    fn upload(&self, blob: &[u8]) -> Result<(ContentManifest, String), WorkflowError> {
        let mut last_unavailable = String::from("no providers configured");
        let mut last_error = None;
        for provider in &self.providers {
            match provider.upload(blob, self.public_key()) {
                Ok(manifest) => {
                    if manifest.content_id != ContentId(hash_blob(blob)) {
                        last_error = Some(ProviderError::Protocol("manifest does not match uploaded bytes".into()));
                        continue;
                    }
                    return Ok((manifest, provider.endpoint()));
                }
                Err(ProviderError::Unavailable(msg)) => last_unavailable = msg,
                Err(err) => last_error = Some(err),
            }
        }
        Err(match last_error {
            Some(err) => WorkflowError::Provider(err),
            None => WorkflowError::ProviderUnavailable(last_unavailable),
        })
    }

    /// Builds, signs and submits `Data(envelope) || outputs || change`.
    fn submit(&self, envelope: PayloadEnvelope, outputs: Vec<TxOutput>) -> Result<Txid, WorkflowError> {
        let needed = outputs
            .iter()
            .try_fold(0u64, |acc, o| acc.checked_add(o.amount()))
            .ok_or(WorkflowError::ChainRejected(ChainError::ValueOverflow))?;
        let mut utxos = self.chain.spendable_utxos(&self.address())?;
        utxos.sort_by(|a, b| b.amount.cmp(&a.amount).then(a.outpoint.cmp(&b.outpoint)));

        let mut selected = Vec::new();
        let mut total = 0u64;
        for utxo in utxos {
            if total >= needed && !selected.is_empty() {
                break;
            }
            total = total.saturating_add(utxo.amount);
            selected.push(utxo);
        }
        if selected.is_empty() || total < needed {
            return Err(WorkflowError::InsufficientFunds {
                needed,
                available: total,
            });
        }

        let mut tx = Transaction {
            inputs: selected
                .iter()
                .map(|u| TxInput::unsigned(u.outpoint, *self.public_key()))
                .collect(),
            outputs: Vec::with_capacity(outputs.len() + 2),
            lock_time: 0,
        };
        tx.outputs.push(TxOutput::Data(envelope.encode().to_vec()));
        tx.outputs.extend(outputs);
        if total > needed {
            tx.outputs.push(TxOutput::value(self.address(), total - needed));
        }
        for i in 0..tx.inputs.len() {
            let digest = tx.signing_digest(i).map_err(|e| WorkflowError::ChainRejected(e.into()))?;
            tx.inputs[i].signature = crypto::sign(&digest, &self.keypair).to_bytes().to_vec();
        }
        Ok(self.chain.submit_tx(&tx)?)
    }
}

/// Downloads every chunk, checking each against the manifest and the whole
/// against `content_id`.
fn fetch_verified(provider: &dyn ProviderApi, content_id: &ContentId) -> Result<Vec<u8>, WorkflowError> {
    let lift = |err: ProviderError| match err {
        ProviderError::NotFound => WorkflowError::NotFound,
        ProviderError::Unavailable(msg) => WorkflowError::ProviderUnavailable(msg),
        ProviderError::IndexOutOfRange { index, .. } => WorkflowError::ChunkMismatch { index: Some(index) },
        other => WorkflowError::Provider(other),
    };
    let manifest = provider.get_manifest(content_id).map_err(lift)?;
    if manifest.content_id != *content_id || !manifest.is_consistent() {
        return Err(WorkflowError::ChunkMismatch { index: None });
    }
    let mut blob = Vec::with_capacity(manifest.total_length as usize);
    for index in 0..manifest.chunk_count() {
        let chunk = provider.get_chunk(content_id, index as u64).map_err(lift)?;
        if !manifest.verify_chunk(index, &chunk) {
            return Err(WorkflowError::ChunkMismatch {
                index: Some(index as u64),
            });
        }
        blob.extend_from_slice(&chunk);
    }
    if ContentId(hash_blob(&blob)) != *content_id {
        return Err(WorkflowError::ChunkMismatch { index: None });
    }
    Ok(blob)
}
