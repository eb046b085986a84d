//! The storage provider: content-addressed chunk storage behind a four-call API
//! (upload, manifest, chunk, delete).

mod manifest;
mod store;

pub use manifest::ContentManifest;
pub use store::{ProviderConfig, ProviderStore, StoredEntry};

use serde::{Deserialize, Serialize};

use crate::crypto::{self, hash_parts, KeyPair, PublicKey, Signature};
use crate::ids::ContentId;

/// 256 KiB.
pub const DEFAULT_CHUNK_SIZE: usize = 262_144;

/// Serialized over HTTP as `{"error": "<snake_case variant>", "detail": ...}`.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "error", content = "detail", rename_all = "snake_case")]
pub enum ProviderError {
    #[error("empty blob")]
    EmptyBlob,
    #[error("storage full: {needed} more bytes exceed capacity {capacity}")]
    StorageFull { capacity: u64, needed: u64 },
    /// Never stored or deleted; deliberately indistinguishable.
    #[error("content not found")]
    NotFound,
    #[error("chunk index {index} out of range ({count} chunks)")]
    IndexOutOfRange { index: u64, count: u64 },
    #[error("unauthorized delete request")]
    Unauthorized,
    #[error("provider storage: {0}")]
    Io(String),
    #[error("provider unavailable: {0}")]
    Unavailable(String),
    #[error("bad provider response: {0}")]
    Protocol(String),
}

impl From<std::io::Error> for ProviderError {
    fn from(err: std::io::Error) -> Self {
        ProviderError::Io(err.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeleteAck {
    pub content_id: ContentId,
    /// False when the content was already absent.
    pub deleted: bool,
}

/// Digest a submitter signs to authorize deletion: `SHA-256(content_id || "DELETE")`.
pub fn delete_request_digest(content_id: &ContentId) -> [u8; 32] {
    hash_parts([content_id.as_bytes().as_slice(), b"DELETE"])
}

pub fn sign_delete_request(content_id: &ContentId, key: &KeyPair) -> Signature {
    crypto::sign(&delete_request_digest(content_id), key)
}

/// The provider API, served in-process or over HTTP.
pub trait ProviderApi: Send + Sync {
    fn upload(&self, blob: &[u8], submitter: &PublicKey) -> Result<ContentManifest, ProviderError>;

    fn get_manifest(&self, content_id: &ContentId) -> Result<ContentManifest, ProviderError>;

    fn get_chunk(&self, content_id: &ContentId, index: u64) -> Result<Vec<u8>, ProviderError>;

    fn delete_content(
        &self,
        content_id: &ContentId,
        requester: &PublicKey,
        signature: &[u8],
    ) -> Result<DeleteAck, ProviderError>;

    /// Human-readable label for reports.
    fn endpoint(&self) -> String;
}

impl<T: ProviderApi + ?Sized> ProviderApi for std::sync::Arc<T> {
    fn upload(&self, blob: &[u8], submitter: &PublicKey) -> Result<ContentManifest, ProviderError> {
        (**self).upload(blob, submitter)
    }

    fn get_manifest(&self, content_id: &ContentId) -> Result<ContentManifest, ProviderError> {
        (**self).get_manifest(content_id)
    }

    fn get_chunk(&self, content_id: &ContentId, index: u64) -> Result<Vec<u8>, ProviderError> {
        (**self).get_chunk(content_id, index)
    }

    fn delete_content(
        &self,
        content_id: &ContentId,
        requester: &PublicKey,
        signature: &[u8],
    ) -> Result<DeleteAck, ProviderError> {
        (**self).delete_content(content_id, requester, signature)
    }

    fn endpoint(&self) -> String {
        (**self).endpoint()
    }
}
