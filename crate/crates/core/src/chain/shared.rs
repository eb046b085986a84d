use std::path::Path;
use std::sync::{Arc, RwLock, RwLockReadGuard, RwLockWriteGuard};

use super::{Chain, ChainAccess, ChainError, ChainParams, DataRecord, TipInfo, Utxo};
use crate::codec::Transaction;
use crate::ids::{Address, Txid};

/// Thread-safe handle to a local chain. Mutations are serialized behind a
/// write lock; queries share a read lock.
#[derive(Clone)]
pub struct SharedChain {
    inner: Arc<RwLock<Chain>>,
}

impl SharedChain {
    pub fn new(chain: Chain) -> Self {
        Self {
            inner: Arc::new(RwLock::new(chain)),
        }
    }

    pub fn in_memory(params: ChainParams) -> Self {
        Self::new(Chain::in_memory(params))
    }

    pub fn open(dir: impl AsRef<Path>, params: ChainParams) -> Result<Self, ChainError> {
        Chain::open(dir, params).map(Self::new)
    }

    pub fn read(&self) -> RwLockReadGuard<'_, Chain> {
        self.inner.read().unwrap_or_else(|p| p.into_inner())
    }

    pub fn write(&self) -> RwLockWriteGuard<'_, Chain> {
        self.inner.write().unwrap_or_else(|p| p.into_inner())
    }

    pub fn mine_block(&self, reward_to: Address, timestamp: Option<u64>) -> Result<TipInfo, ChainError> {
        let mut chain = self.write();
        chain.mine_block(reward_to, timestamp)?;
        Ok(chain.tip_info())
    }
}

impl ChainAccess for SharedChain {
    fn submit_tx(&self, tx: &Transaction) -> Result<Txid, ChainError> {
        self.write().submit_tx(tx.clone())
    }

    fn spendable_utxos(&self, address: &Address) -> Result<Vec<Utxo>, ChainError> {
        Ok(self.read().spendable_utxos(address))
    }

    fn scan_data_outputs(&self, from_height: u64, to_height: u64) -> Result<Vec<DataRecord>, ChainError> {
        self.read().scan_data_outputs(from_height, to_height)
    }

    fn tip(&self) -> Result<TipInfo, ChainError> {
        Ok(self.read().tip_info())
    }

    fn tx_height(&self, txid: &Txid) -> Result<Option<u64>, ChainError> {
        Ok(self.read().tx_location(txid).map(|(h, _)| h))
    }
}
