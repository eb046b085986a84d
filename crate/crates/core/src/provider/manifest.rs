use serde::{Deserialize, Serialize};

use crate::crypto::hash_blob;
use crate::ids::{ChunkDigest, ContentId};

/// Torrent-file analog: enough to fetch a blob piecewise and verify every piece.
///
/// JSON form:
///
/// ```json
/// {"content_id": "<64 hex>", "total_length": 262145, "chunk_size": 262144,
///  "chunk_digests": ["<64 hex>", "<64 hex>"]}
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContentManifest {
    pub content_id: ContentId,
    pub total_length: u64,
    pub chunk_size: u64,
    pub chunk_digests: Vec<ChunkDigest>,
}

impl ContentManifest {
    /// Builds the manifest for `blob`. `blob` must be non-empty and `chunk_size` positive.
    pub fn build(blob: &[u8], chunk_size: usize) -> Self {
        assert!(chunk_size > 0, "chunk size must be positive");
        Self {
            content_id: ContentId(hash_blob(blob)),
            total_length: blob.len() as u64,
            chunk_size: chunk_size as u64,
            chunk_digests: blob
                .chunks(chunk_size)
                .map(|c| ChunkDigest(hash_blob(c)))
                .collect(),
        }
    }

    pub fn chunk_count(&self) -> usize {
        self.chunk_digests.len()
    }

    /// Length of chunk `index`; only the last chunk may be short.
    pub fn chunk_len(&self, index: usize) -> Option<u64> {
        if index >= self.chunk_count() {
            return None;
        }
        let start = index as u64 * self.chunk_size;
        Some((self.total_length - start).min(self.chunk_size))
    }

    pub fn verify_chunk(&self, index: usize, bytes: &[u8]) -> bool {
        self.chunk_len(index) == Some(bytes.len() as u64)
            && self.chunk_digests[index] == ChunkDigest(hash_blob(bytes))
    }

    /// Structural consistency: chunk count matches length and chunk size.
    pub fn is_consistent(&self) -> bool {
        self.chunk_size > 0
            && self.total_length > 0
            && self.chunk_count() as u64 == self.total_length.div_ceil(self.chunk_size)
    }
}
