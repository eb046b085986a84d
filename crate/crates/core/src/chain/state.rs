use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::store::ChainStore;
use super::{Block, ChainError, BLOCK_SUBSIDY};
use crate::codec::{decode_envelope, EnvelopeError, PayloadEnvelope, Transaction, TxOutput, MAX_OP_RETURN_LEN};
use crate::crypto;
use crate::ids::{Address, BlockHash, OutPoint, Txid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainParams {
    pub subsidy: u64,
    pub genesis_timestamp: u64,
}

impl Default for ChainParams {
    fn default() -> Self {
        Self {
            subsidy: BLOCK_SUBSIDY,
            genesis_timestamp: 1_500_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utxo {
    pub outpoint: OutPoint,
    pub address: Address,
    pub amount: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TipInfo {
    pub height: u64,
    pub hash: BlockHash,
    pub timestamp: u64,
}

/// One decoded PAI Data output found by a chain scan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataRecord {
    pub height: u64,
    pub tx_index: u32,
    pub txid: Txid,
    pub timestamp: u64,
    /// Input owners in input order, deduplicated.
    pub sender_addresses: Vec<Address>,
    /// Value-output addresses in output order.
    pub output_addresses: Vec<Address>,
    pub envelope: PayloadEnvelope,
}

/// Unspent outputs plus every outpoint ever consumed.
#[derive(Debug, Clone, Default)]
struct UtxoSet {
    unspent: HashMap<OutPoint, (Address, u64)>,
    spent: HashSet<OutPoint>,
}

impl UtxoSet {
    /// Checks a non-coinbase transaction against this set and returns its fee.
    fn validate(&self, tx: &Transaction) -> Result<u64, ChainError> {
        if tx.inputs.is_empty() {
            return Err(ChainError::NoInputs);
        }
        if tx.data_outputs().count() > 1 {
            return Err(ChainError::TooManyDataOutputs);
        }
        if let Some(big) = tx.data_outputs().find(|d| d.len() > MAX_OP_RETURN_LEN) {
            return Err(ChainError::DataTooLarge(big.len()));
        }
        let mut seen = HashSet::with_capacity(tx.inputs.len());
        let mut value_in = 0u64;
        for (i, input) in tx.inputs.iter().enumerate() {
            if self.spent.contains(&input.prev) || !seen.insert(input.prev) {
                return Err(ChainError::DoubleSpend(input.prev));
            }
            let (owner, amount) = self
                .unspent
                .get(&input.prev)
                .ok_or(ChainError::UnknownInput(input.prev))?;
            if input.pubkey.address() != *owner {
                return Err(ChainError::PubkeyMismatch { input: i });
            }
            let digest = tx.signing_digest(i)?;
            if !crypto::verify(&digest, &input.signature, &input.pubkey) {
                return Err(ChainError::InvalidSignature { input: i });
            }
            value_in = value_in.checked_add(*amount).ok_or(ChainError::ValueOverflow)?;
        }
        let value_out = tx.total_output_value().ok_or(ChainError::ValueOverflow)?;
        value_in.checked_sub(value_out).ok_or(ChainError::ValueOverflow)
    }

    fn apply(&mut self, tx: &Transaction, txid: Txid) {
        for input in &tx.inputs {
            self.unspent.remove(&input.prev);
            self.spent.insert(input.prev);
        }
        for (index, output) in tx.outputs.iter().enumerate() {
            if let TxOutput::Value { address, amount } = output {
                let outpoint = OutPoint {
                    txid,
                    index: index as u32,
                };
                self.unspent.insert(outpoint, (*address, *amount));
            }
        }
    }

    fn owned_by(&self, address: &Address) -> Vec<Utxo> {
        let mut out: Vec<Utxo> = self
            .unspent
            .iter()
            .filter(|(_, (owner, _))| owner == address)
            .map(|(outpoint, (address, amount))| Utxo {
                outpoint: *outpoint,
                address: *address,
                amount: *amount,
            })
            .collect();
        out.sort_by_key(|u| u.outpoint);
        out
    }
}

struct MempoolEntry {
    tx: Transaction,
    txid: Txid,
    fee: u64,
}

/// Chain state: blocks, the confirmed UTXO set, and the mempool.
///
/// `pending` is the confirmed set with every mempool transaction applied in
/// order, so chained unconfirmed spends validate and FIFO mining stays valid.
pub struct Chain {
    params: ChainParams,
    blocks: Vec<Block>,
    confirmed: UtxoSet,
    pending: UtxoSet,
    mempool: Vec<MempoolEntry>,
    tx_locations: HashMap<Txid, (u64, u32)>,
    store: Option<ChainStore>,
}

impl Chain {
    pub fn genesis(params: &ChainParams) -> Block {
        Block::new(0, BlockHash::default(), params.genesis_timestamp, Vec::new())
            .expect("empty block serializes")
    }

    pub fn in_memory(params: ChainParams) -> Self {
        Self {
            blocks: vec![Self::genesis(&params)],
            params,
            confirmed: UtxoSet::default(),
            pending: UtxoSet::default(),
            mempool: Vec::new(),
            tx_locations: HashMap::new(),
            store: None,
        }
    }

    /// Opens (or creates) a file-backed chain in `dir`, replaying every stored
    /// block from genesis with full validation.
    pub fn open(dir: impl AsRef<Path>, params: ChainParams) -> Result<Self, ChainError> {
        let store = ChainStore::open(dir.as_ref())?;
        let mut chain = Self::in_memory(params);
        let blocks = store.read_blocks()?;
        if blocks.is_empty() {
            store.append_block(&chain.blocks[0])?;
        } else {
            if blocks[0].hash() != chain.blocks[0].hash() {
                return Err(ChainError::Storage("stored genesis does not match chain parameters".into()));
            }
            for block in blocks.into_iter().skip(1) {
                chain.connect_block(block)?;
            }
        }
        for tx in store.read_mempool()? {
            if let Err(err) = chain.submit_tx(tx) {
                tracing::warn!("dropping stored mempool transaction: {err}");
            }
        }
        chain.store = Some(store);
        Ok(chain)
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn tip(&self) -> &Block {
        self.blocks.last().expect("genesis always present")
    }

    pub fn tip_info(&self) -> TipInfo {
        let tip = self.tip();
        TipInfo {
            height: tip.height(),
            hash: tip.hash(),
            timestamp: tip.timestamp(),
        }
    }

    pub fn block(&self, height: u64) -> Option<&Block> {
        self.blocks.get(usize::try_from(height).ok()?)
    }

    pub fn mempool(&self) -> impl Iterator<Item = &Transaction> {
        self.mempool.iter().map(|e| &e.tx)
    }

    pub fn tx_location(&self, txid: &Txid) -> Option<(u64, u32)> {
        self.tx_locations.get(txid).copied()
    }

    /// Validates `tx` against the tip plus mempool and enqueues it.
    pub fn submit_tx(&mut self, tx: Transaction) -> Result<Txid, ChainError> {
        let txid = tx.txid()?;
        let fee = self.pending.validate(&tx)?;
        self.pending.apply(&tx, txid);
        self.mempool.push(MempoolEntry { tx, txid, fee });
        self.persist_mempool()?;
        Ok(txid)
    }

    /// Mines the whole mempool, FIFO, into a new block whose coinbase pays
    /// the subsidy plus collected fees to `reward_to`.
    ///
    /// Without an explicit timestamp, uses `max(parent + 1, wall clock)`.
    pub fn mine_block(&mut self, reward_to: Address, timestamp: Option<u64>) -> Result<&Block, ChainError> {
        let parent = self.tip_info();
        let timestamp = match timestamp {
            Some(ts) if ts < parent.timestamp => {
                return Err(ChainError::TimestampRegression {
                    parent: parent.timestamp,
                    got: ts,
                })
            }
            Some(ts) => ts,
            None => {
                let now = SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0);
                now.max(parent.timestamp + 1)
            }
        };
        let height = parent.height + 1;
        let fees = self
            .mempool
            .iter()
            .try_fold(0u64, |acc, e| acc.checked_add(e.fee))
            .ok_or(ChainError::ValueOverflow)?;
        let reward = self.params.subsidy.checked_add(fees).ok_or(ChainError::ValueOverflow)?;
        let coinbase = Transaction {
            inputs: Vec::new(),
            outputs: vec![TxOutput::value(reward_to, reward)],
            lock_time: height,
        };
        let mut txs = Vec::with_capacity(self.mempool.len() + 1);
        txs.push(coinbase);
        txs.extend(self.mempool.iter().map(|e| e.tx.clone()));
        let block = Block::new(height, parent.hash, timestamp, txs)?;
        self.connect_block(block)?;
        if let Some(store) = &self.store {
            store.append_block(self.tip())?;
        }
        self.persist_mempool()?;
        Ok(self.tip())
    }

    /// Validates `block` in full against the tip and applies it atomically.
    /// Clears the mempool and resets the pending view on success.
    pub fn connect_block(&mut self, block: Block) -> Result<(), ChainError> {
        let parent = self.tip_info();
        if block.height() != parent.height + 1 {
            return Err(ChainError::BadLink("height".into()));
        }
        if block.prev_hash() != parent.hash {
            return Err(ChainError::BadLink("prev_hash".into()));
        }
        if block.timestamp() < parent.timestamp {
            return Err(ChainError::TimestampRegression {
                parent: parent.timestamp,
                got: block.timestamp(),
            });
        }

        let mut working = self.confirmed.clone();
        let mut fees = 0u64;
        let txs = block.transactions();
        let coinbase_present = txs.first().is_some_and(Transaction::is_coinbase);
        for (i, (tx, txid)) in txs.iter().zip(block.txids()).enumerate() {
            if i == 0 && coinbase_present {
                continue;
            }
            let fee = working.validate(tx)?;
            fees = fees.checked_add(fee).ok_or(ChainError::ValueOverflow)?;
            working.apply(tx, *txid);
        }
        if coinbase_present {
            let coinbase = &txs[0];
            if coinbase.lock_time != block.height() {
                return Err(ChainError::BadCoinbase("lock_time must equal block height".into()));
            }
            if coinbase.data_outputs().next().is_some() {
                return Err(ChainError::BadCoinbase("data output in coinbase".into()));
            }
            let expected = self.params.subsidy.checked_add(fees).ok_or(ChainError::ValueOverflow)?;
            if coinbase.total_output_value() != Some(expected) {
                return Err(ChainError::BadCoinbase("must pay exactly subsidy plus fees".into()));
            }
            working.apply(coinbase, block.txids()[0]);
        } else if fees != 0 {
            return Err(ChainError::BadCoinbase("fees collected without a coinbase".into()));
        }

        for (i, txid) in block.txids().iter().enumerate() {
            self.tx_locations.insert(*txid, (block.height(), i as u32));
        }
        self.confirmed = working;
        self.blocks.push(block);

        // Anything still valid on top of the new tip stays queued.
        let leftover = std::mem::take(&mut self.mempool);
        self.pending = self.confirmed.clone();
        for entry in leftover {
            if self.tx_locations.contains_key(&entry.txid) {
                continue;
            }
            match self.pending.validate(&entry.tx) {
                Ok(fee) => {
                    self.pending.apply(&entry.tx, entry.txid);
                    self.mempool.push(MempoolEntry { fee, ..entry });
                }
                Err(err) => tracing::debug!("evicting {}: {err}", entry.txid),
            }
        }
        Ok(())
    }

    fn persist_mempool(&self) -> Result<(), ChainError> {
        if let Some(store) = &self.store {
            store.write_mempool(self.mempool.iter().map(|e| &e.tx))?;
        }
        Ok(())
    }

    pub fn balance(&self, address: &Address) -> u64 {
        self.list_utxos(address).iter().map(|u| u.amount).sum()
    }

    /// Confirmed unspent outputs at the tip.
    pub fn list_utxos(&self, address: &Address) -> Vec<Utxo> {
        self.confirmed.owned_by(address)
    }

    /// Unspent outputs after applying the mempool.
    pub fn spendable_utxos(&self, address: &Address) -> Vec<Utxo> {
        self.pending.owned_by(address)
    }

    /// Sum over the confirmed UTXO set.
    pub fn total_unspent(&self) -> u128 {
        self.confirmed.unspent.values().map(|(_, a)| u128::from(*a)).sum()
    }

    pub fn blocks_mined(&self) -> u64 {
        self.blocks
            .iter()
            .filter(|b| b.transactions().first().is_some_and(Transaction::is_coinbase))
            .count() as u64
    }

    /// Every decodable PAI Data output in `from_height..=to_height`, in
    /// `(height, tx_index)` order. Foreign OP_RETURN payloads are skipped.
    pub fn scan_data_outputs(&self, from_height: u64, to_height: u64) -> Result<Vec<DataRecord>, ChainError> {
        let tip = self.tip().height();
        if from_height > to_height || to_height > tip {
            return Err(ChainError::RangeOutOfBounds {
                from: from_height,
                to: to_height,
                tip,
            });
        }
        let mut records = Vec::new();
        for block in &self.blocks[from_height as usize..=to_height as usize] {
            for (tx_index, (tx, txid)) in block.transactions().iter().zip(block.txids()).enumerate() {
                let Some(payload) = tx.data_outputs().next() else {
                    continue;
                };
                let envelope = match decode_envelope(payload) {
                    Ok(env) => env,
                    Err(EnvelopeError::BadMagic) => continue,
                    Err(err) => {
                        tracing::warn!("skipping malformed envelope in {txid}: {err}");
                        continue;
                    }
                };
                let mut sender_addresses: Vec<Address> = Vec::new();
                for input in &tx.inputs {
                    let addr = input.pubkey.address();
                    if !sender_addresses.contains(&addr) {
                        sender_addresses.push(addr);
                    }
                }
                let output_addresses = tx
                    .outputs
                    .iter()
                    .filter_map(|o| match o {
                        TxOutput::Value { address, .. } => Some(*address),
                        TxOutput::Data(_) => None,
                    })
                    .collect();
                records.push(DataRecord {
                    height: block.height(),
                    tx_index: tx_index as u32,
                    txid: *txid,
                    timestamp: block.timestamp(),
                    sender_addresses,
                    output_addresses,
                    envelope,
                });
            }
        }
        Ok(records)
    }
}

impl std::fmt::Debug for Chain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Chain")
            .field("tip", &self.tip_info())
            .field("mempool", &self.mempool.len())
            .finish_non_exhaustive()
    }
}
