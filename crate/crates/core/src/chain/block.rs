use crate::codec::varint;
use crate::codec::{deserialize_tx, serialize_tx, Transaction, TxCodecError};
use crate::crypto::hash_blob;
use crate::ids::{BlockHash, Txid};

/// A mined block. Immutable once built; the hash is computed at construction.
///
/// Serialization: `varint(height) || prev_hash(32) || varint(timestamp) ||
/// varint(n_tx) || (varint(len) || tx)*`. The block hash is SHA-256 of that.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    height: u64,
    prev_hash: BlockHash,
    timestamp: u64,
    transactions: Vec<Transaction>,
    txids: Vec<Txid>,
    hash: BlockHash,
}

impl Block {
    pub fn new(
        height: u64,
        prev_hash: BlockHash,
        timestamp: u64,
        transactions: Vec<Transaction>,
    ) -> Result<Self, TxCodecError> {
        let mut bytes = Vec::new();
        varint::write(&mut bytes, height);
        bytes.extend_from_slice(prev_hash.as_bytes());
        varint::write(&mut bytes, timestamp);
        varint::write(&mut bytes, transactions.len() as u64);
        let mut txids = Vec::with_capacity(transactions.len());
        for tx in &transactions {
            let raw = serialize_tx(tx)?;
            txids.push(Txid(hash_blob(&raw)));
            varint::write(&mut bytes, raw.len() as u64);
            bytes.extend_from_slice(&raw);
        }
        Ok(Self {
            height,
            prev_hash,
            timestamp,
            transactions,
            txids,
            hash: BlockHash(hash_blob(&bytes)),
        })
    }

    pub fn height(&self) -> u64 {
        self.height
    }

    pub fn prev_hash(&self) -> BlockHash {
        self.prev_hash
    }

    pub fn timestamp(&self) -> u64 {
        self.timestamp
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.transactions
    }

    pub fn txids(&self) -> &[Txid] {
        &self.txids
    }

    pub fn hash(&self) -> BlockHash {
        self.hash
    }

    pub fn serialize(&self) -> Vec<u8> {
        let mut bytes = Vec::new();
        varint::write(&mut bytes, self.height);
        bytes.extend_from_slice(self.prev_hash.as_bytes());
        varint::write(&mut bytes, self.timestamp);
        varint::write(&mut bytes, self.transactions.len() as u64);
        for tx in &self.transactions {
            let raw = serialize_tx(tx).expect("serialized at construction");
            varint::write(&mut bytes, raw.len() as u64);
            bytes.extend_from_slice(&raw);
        }
        bytes
    }

    pub fn deserialize(bytes: &[u8]) -> Result<Self, TxCodecError> {
        let mut rest = bytes;
        let next_varint = |rest: &mut &[u8]| -> Result<u64, TxCodecError> {
            let (v, used) = varint::read(rest)?;
            *rest = &rest[used..];
            Ok(v)
        };
        let height = next_varint(&mut rest)?;
        if rest.len() < 32 {
            return Err(TxCodecError::Truncated);
        }
        let prev_hash = BlockHash::from_slice(&rest[..32]).expect("length checked");
        rest = &rest[32..];
        let timestamp = next_varint(&mut rest)?;
        let n = next_varint(&mut rest)?;
        let mut transactions = Vec::new();
        for _ in 0..n {
            let len = usize::try_from(next_varint(&mut rest)?).map_err(|_| TxCodecError::Truncated)?;
            if len > rest.len() {
                return Err(TxCodecError::Truncated);
            }
            transactions.push(deserialize_tx(&rest[..len])?);
            rest = &rest[len..];
        }
        if !rest.is_empty() {
            return Err(TxCodecError::TrailingBytes);
        }
        Self::new(height, prev_hash, timestamp, transactions)
    }
}
