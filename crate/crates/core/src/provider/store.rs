//! Disk-backed content store.
//!
//! ```text
//! <data_dir>/objects/<content_id>/manifest.json
//! <data_dir>/objects/<content_id>/entry.json
//! <data_dir>/objects/<content_id>/chunk-<index>
//! <data_dir>/staging/...            (uploads in progress)
//! ```
//!
//! Uploads are staged and renamed into place; deletes unlink the index entry
//! before removing files, both under the index write lock, so readers never
//! observe a half-written or half-deleted object.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::RwLock;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::{delete_request_digest, ContentManifest, DeleteAck, ProviderApi, ProviderError, DEFAULT_CHUNK_SIZE};
use crate::crypto::{self, PublicKey};
use crate::ids::ContentId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub data_dir: PathBuf,
    /// Total blob bytes the provider accepts; `None` is unbounded.
    pub capacity_bytes: Option<u64>,
    pub chunk_size: usize,
}

impl ProviderConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        Self {
            data_dir: data_dir.into(),
            capacity_bytes: None,
            chunk_size: DEFAULT_CHUNK_SIZE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredEntry {
    pub manifest: ContentManifest,
    /// The only key allowed to delete this content.
    pub submitter_pubkey: PublicKey,
    pub stored_at: u64,
}

#[derive(Debug, Default)]
struct Index {
    entries: HashMap<ContentId, StoredEntry>,
    used_bytes: u64,
}

pub struct ProviderStore {
    config: ProviderConfig,
    index: RwLock<Index>,
    staging_seq: AtomicU64,
}

const MANIFEST_FILE: &str = "manifest.json";
const ENTRY_FILE: &str = "entry.json";

fn chunk_file(index: u64) -> String {
    format!("chunk-{index}")
}

impl ProviderStore {
    /// Opens the store, reloading every complete object under `data_dir`.
    pub fn open(config: ProviderConfig) -> Result<Self, ProviderError> {
        if config.chunk_size == 0 {
            return Err(ProviderError::Io("chunk size must be positive".into()));
        }
        let objects = config.data_dir.join("objects");
        let staging = config.data_dir.join("staging");
        fs::create_dir_all(&objects)?;
        if staging.exists() {
            fs::remove_dir_all(&staging)?;
        }
        fs::create_dir_all(&staging)?;

        let mut index = Index::default();
        for dir in fs::read_dir(&objects)? {
            let dir = dir?.path();
            match load_entry(&dir) {
                Ok(entry) => {
                    index.used_bytes += entry.manifest.total_length;
                    index.entries.insert(entry.manifest.content_id, entry);
                }
                Err(err) => {
                    tracing::warn!("discarding unreadable object {}: {err}", dir.display());
                    fs::remove_dir_all(&dir)?;
                }
            }
        }
        Ok(Self {
            config,
            index: RwLock::new(index),
            staging_seq: AtomicU64::new(0),
        })
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.config
    }

    fn object_dir(&self, content_id: &ContentId) -> PathBuf {
        self.config.data_dir.join("objects").join(content_id.to_hex())
    }

    pub fn used_bytes(&self) -> u64 {
        self.index.read().unwrap_or_else(|p| p.into_inner()).used_bytes
    }

    pub fn entry(&self, content_id: &ContentId) -> Option<StoredEntry> {
        self.index
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .entries
            .get(content_id)
            .cloned()
    }

    pub fn content_ids(&self) -> Vec<ContentId> {
        let mut ids: Vec<_> = self
            .index
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .entries
            .keys()
            .copied()
            .collect();
        ids.sort();
        ids
    }

    pub fn upload(&self, blob: &[u8], submitter: &PublicKey) -> Result<ContentManifest, ProviderError> {
        if blob.is_empty() {
            return Err(ProviderError::EmptyBlob);
        }
        let manifest = ContentManifest::build(blob, self.config.chunk_size);

        let mut index = self.index.write().unwrap_or_else(|p| p.into_inner());
        if let Some(existing) = index.entries.get(&manifest.content_id) {
            return Ok(existing.manifest.clone());
        }
        if let Some(capacity) = self.config.capacity_bytes {
            if index.used_bytes.saturating_add(manifest.total_length) > capacity {
                return Err(ProviderError::StorageFull {
                    capacity,
                    needed: manifest.total_length,
                });
            }
        }

        let entry = StoredEntry {
            manifest: manifest.clone(),
            submitter_pubkey: *submitter,
            stored_at: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let seq = self.staging_seq.fetch_add(1, Ordering::Relaxed);
        let staged = self
            .config
            .data_dir
            .join("staging")
            .join(format!("{}-{seq}", manifest.content_id));
        let result = write_object(&staged, &entry, blob, self.config.chunk_size)
            .and_then(|()| fs::rename(&staged, self.object_dir(&manifest.content_id)).map_err(Into::into));
        if let Err(err) = result {
            let _ = fs::remove_dir_all(&staged);
            return Err(err);
        }
        index.used_bytes += manifest.total_length;
        index.entries.insert(manifest.content_id, entry);
        Ok(manifest)
    }

    pub fn get_manifest(&self, content_id: &ContentId) -> Result<ContentManifest, ProviderError> {
        self.entry(content_id)
            .map(|e| e.manifest)
            .ok_or(ProviderError::NotFound)
    }

    pub fn get_chunk(&self, content_id: &ContentId, index: u64) -> Result<Vec<u8>, ProviderError> {
        let guard = self.index.read().unwrap_or_else(|p| p.into_inner());
        let entry = guard.entries.get(content_id).ok_or(ProviderError::NotFound)?;
        let count = entry.manifest.chunk_count() as u64;
        if index >= count {
            return Err(ProviderError::IndexOutOfRange { index, count });
        }
        Ok(fs::read(self.object_dir(content_id).join(chunk_file(index)))?)
    }

    /// Removes content when `signature` is the recorded submitter's signature
    /// over [`delete_request_digest`]. Absent content acknowledges with `deleted: false`.
    pub fn delete_content(
        &self,
        content_id: &ContentId,
        requester: &PublicKey,
        signature: &[u8],
    ) -> Result<DeleteAck, ProviderError> {
        let mut index = self.index.write().unwrap_or_else(|p| p.into_inner());
        let Some(entry) = index.entries.get(content_id) else {
            return Ok(DeleteAck {
                content_id: *content_id,
                deleted: false,
            });
        };
        if entry.submitter_pubkey != *requester
            || !crypto::verify(&delete_request_digest(content_id), signature, requester)
        {
            return Err(ProviderError::Unauthorized);
        }
        let entry = index.entries.remove(content_id).expect("checked above");
        index.used_bytes -= entry.manifest.total_length;
        fs::remove_dir_all(self.object_dir(content_id))?;
        Ok(DeleteAck {
            content_id: *content_id,
            deleted: true,
        })
    }
}

fn write_object(dir: &Path, entry: &StoredEntry, blob: &[u8], chunk_size: usize) -> Result<(), ProviderError> {
    fs::create_dir_all(dir)?;
    for (i, chunk) in blob.chunks(chunk_size).enumerate() {
        fs::write(dir.join(chunk_file(i as u64)), chunk)?;
    }
    let manifest = serde_json::to_vec_pretty(&entry.manifest).map_err(|e| ProviderError::Io(e.to_string()))?;
    fs::write(dir.join(MANIFEST_FILE), manifest)?;
    let meta = serde_json::to_vec_pretty(entry).map_err(|e| ProviderError::Io(e.to_string()))?;
    fs::write(dir.join(ENTRY_FILE), meta)?;
    Ok(())
}

fn load_entry(dir: &Path) -> Result<StoredEntry, ProviderError> {
    let raw = fs::read(dir.join(ENTRY_FILE))?;
    let entry: StoredEntry = serde_json::from_slice(&raw).map_err(|e| ProviderError::Io(e.to_string()))?;
    let name_matches = dir
        .file_name()
        .and_then(|n| n.to_str())
        .is_some_and(|n| n == entry.manifest.content_id.to_hex());
    if !name_matches || !entry.manifest.is_consistent() {
        return Err(ProviderError::Io("inconsistent manifest".into()));
    }
    for i in 0..entry.manifest.chunk_count() as u64 {
        if !dir.join(chunk_file(i)).is_file() {
            return Err(ProviderError::Io(format!("missing chunk {i}")));
        }
    }
    Ok(entry)
}

impl ProviderApi for ProviderStore {
    fn upload(&self, blob: &[u8], submitter: &PublicKey) -> Result<ContentManifest, ProviderError> {
        ProviderStore::upload(self, blob, submitter)
    }

    fn get_manifest(&self, content_id: &ContentId) -> Result<ContentManifest, ProviderError> {
        ProviderStore::get_manifest(self, content_id)
    }

    fn get_chunk(&self, content_id: &ContentId, index: u64) -> Result<Vec<u8>, ProviderError> {
        ProviderStore::get_chunk(self, content_id, index)
    }

    fn delete_content(
        &self,
        content_id: &ContentId,
        requester: &PublicKey,
        signature: &[u8],
    ) -> Result<DeleteAck, ProviderError> {
        ProviderStore::delete_content(self, content_id, requester, signature)
    }

    fn endpoint(&self) -> String {
        format!("local:{}", self.config.data_dir.display())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::{hash_blob, KeyPair};
    use crate::provider::sign_delete_request;

    fn store(dir: &Path) -> ProviderStore {
        ProviderStore::open(ProviderConfig::new(dir)).unwrap()
    }

    fn files_under(dir: &Path) -> Vec<PathBuf> {
        let mut out = Vec::new();
        let mut stack = vec![dir.to_path_buf()];
        while let Some(d) = stack.pop() {
            for e in fs::read_dir(&d).unwrap() {
                let p = e.unwrap().path();
                if p.is_dir() {
                    stack.push(p);
                } else {
                    out.push(p);
                }
            }
        }
        out
    }

    #[test]
    fn empty_blob_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let s = store(dir.path());
        assert_eq!(s.upload(&[], KeyPair::from_seed(1).public()), Err(ProviderError::EmptyBlob));
    }

    #[test]
    fn upload_and_fetch() {
        let dir = tempfile::tempdir().unwrap();
        let s = store(dir.path());
        let blob: Vec<u8> = (0..262_145u32).map(|i| (i % 251) as u8).collect();
        let m = s.upload(&blob, KeyPair::from_seed(1).public()).unwrap();
        assert_eq!(m.content_id, ContentId(hash_blob(&blob)));
        assert_eq!(m.chunk_count(), 2);
        assert_eq!(s.get_manifest(&m.content_id).unwrap(), m);

        let mut joined = Vec::new();
        for i in 0..2 {
            let chunk = s.get_chunk(&m.content_id, i).unwrap();
            assert!(m.verify_chunk(i as usize, &chunk));
            joined.extend(chunk);
        }
        assert_eq!(joined, blob);
        assert_eq!(
            s.get_chunk(&m.content_id, 2),
            Err(ProviderError::IndexOutOfRange { index: 2, count: 2 })
        );
        assert_eq!(s.get_manifest(&ContentId([0; 32])), Err(ProviderError::NotFound));
        assert_eq!(s.get_chunk(&ContentId([0; 32]), 0), Err(ProviderError::NotFound));
    }

    #[test]
    fn upload_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        let s = store(dir.path());
        let key = KeyPair::from_seed(1);
        let a = s.upload(b"same bytes", key.public()).unwrap();
        let files = files_under(dir.path()).len();
        let b = s.upload(b"same bytes", KeyPair::from_seed(2).public()).unwrap();
        assert_eq!(a, b);
        assert_eq!(files_under(dir.path()).len(), files);
        assert_eq!(s.used_bytes(), 10);
        assert_eq!(s.entry(&a.content_id).unwrap().submitter_pubkey, *key.public());
    }

    #[test]
    fn capacity_enforced() {
        let dir = tempfile::tempdir().unwrap();
        let s = ProviderStore::open(ProviderConfig {
            capacity_bytes: Some(10),
            ..ProviderConfig::new(dir.path())
        })
        .unwrap();
        let key = KeyPair::from_seed(1);
        s.upload(&[1; 8], key.public()).unwrap();
        assert_eq!(
            s.upload(&[2; 3], key.public()),
            Err(ProviderError::StorageFull { capacity: 10, needed: 3 })
        );
    }

    #[test]
    fn delete_requires_submitter_signature() {
        let dir = tempfile::tempdir().unwrap();
        let s = store(dir.path());
        let alice = KeyPair::from_seed(1);
        let mallory = KeyPair::from_seed(3);
        let id = s.upload(&[5; 1000], alice.public()).unwrap().content_id;

        let sig = sign_delete_request(&id, &mallory).to_bytes();
        assert_eq!(s.delete_content(&id, mallory.public(), &sig), Err(ProviderError::Unauthorized));
        // Alice's key with somebody else's signature.
        assert_eq!(s.delete_content(&id, alice.public(), &sig), Err(ProviderError::Unauthorized));
        assert!(s.get_manifest(&id).is_ok());

        let sig = sign_delete_request(&id, &alice).to_bytes();
        assert!(s.delete_content(&id, alice.public(), &sig).unwrap().deleted);
        assert_eq!(s.get_manifest(&id), Err(ProviderError::NotFound));
        assert!(!s.delete_content(&id, alice.public(), &sig).unwrap().deleted);
        assert!(!dir.path().join("objects").join(id.to_hex()).exists());
        assert_eq!(s.used_bytes(), 0);
    }

    #[test]
    fn reopen_restores_index() {
        let dir = tempfile::tempdir().unwrap();
        let key = KeyPair::from_seed(1);
        let m = store(dir.path()).upload(&[9; 600_000], key.public()).unwrap();
        let s = store(dir.path());
        assert_eq!(s.get_manifest(&m.content_id).unwrap(), m);
        assert_eq!(s.used_bytes(), 600_000);
    }
}
