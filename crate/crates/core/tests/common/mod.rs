#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use paidata_core::chain::{ChainParams, SharedChain};
use paidata_core::provider::{ProviderApi, ProviderConfig, ProviderStore};
use paidata_core::{KeyPair, Wallet};

/// In-process chain, one disk-backed provider, and helpers to fund and mine.
pub struct Harness {
    pub chain: SharedChain,
    pub provider: Arc<ProviderStore>,
    pub provider_dir: tempfile::TempDir,
    next_ts: std::cell::Cell<u64>,
}

impl Harness {
    pub fn new() -> Self {
        Self::with_config(|c| c)
    }

    pub fn with_config(f: impl FnOnce(ProviderConfig) -> ProviderConfig) -> Self {
        let provider_dir = tempfile::tempdir().unwrap();
        let provider = Arc::new(ProviderStore::open(f(ProviderConfig::new(provider_dir.path()))).unwrap());
        Self {
            chain: SharedChain::in_memory(ChainParams::default()),
            provider,
            provider_dir,
            next_ts: std::cell::Cell::new(1_600_000_000),
        }
    }

    pub fn wallet(&self, seed: u64) -> Wallet {
        let providers: Vec<Arc<dyn ProviderApi>> = vec![self.provider.clone()];
        Wallet::new(KeyPair::from_seed(seed), Arc::new(self.chain.clone()), providers)
    }

    /// Mines one block with a deterministic, strictly increasing timestamp.
    pub fn mine(&self, reward_to: &Wallet) -> u64 {
        let ts = self.next_ts.get();
        self.next_ts.set(ts + 600);
        self.chain.mine_block(reward_to.address(), Some(ts)).unwrap().height
    }

    pub fn provider_files(&self) -> Vec<PathBuf> {
        files_under(self.provider_dir.path())
    }
}

pub fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p);
            }
        }
    }
    out.sort();
    out
}

pub fn contains_subslice(haystack: &[u8], needle: &[u8]) -> bool {
    needle.is_empty() || haystack.windows(needle.len()).any(|w| w == needle)
}
