//! Simplified UTXO transaction format.
//!
//! Layout (all integers unsigned LEB128, all byte fields length-prefixed):
//!
//! ```text
//! tx      = varint(n_in) input* varint(n_out) output* varint(lock_time)
//! input   = varint(32) prev_txid varint(prev_index) varint(33) pubkey varint(len) signature
//! output  = 0x00 varint(20) address varint(amount)        ; Value
//!         | 0x01 varint(len) payload                      ; Data (OP_RETURN)
//! ```
//!
//! The txid is SHA-256 of the full serialization, signatures included.

use super::varint::{self, VarintError};
use crate::crypto::{hash_blob, PublicKey, PUBLIC_KEY_LEN};
use crate::ids::{Address, OutPoint, Txid};

pub const OUTPUT_TAG_VALUE: u8 = 0x00;
pub const OUTPUT_TAG_DATA: u8 = 0x01;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxInput {
    pub prev: OutPoint,
    pub pubkey: PublicKey,
    /// Compact signature, or empty while unsigned.
    pub signature: Vec<u8>,
}

impl TxInput {
    pub fn unsigned(prev: OutPoint, pubkey: PublicKey) -> Self {
        Self {
            prev,
            pubkey,
            signature: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TxOutput {
    Value { address: Address, amount: u64 },
    /// Unspendable OP_RETURN payload; carries no value.
    Data(Vec<u8>),
}

impl TxOutput {
    pub fn value(address: Address, amount: u64) -> Self {
        TxOutput::Value { address, amount }
    }

    pub fn amount(&self) -> u64 {
        match self {
            TxOutput::Value { amount, .. } => *amount,
            TxOutput::Data(_) => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Transaction {
    pub inputs: Vec<TxInput>,
    pub outputs: Vec<TxOutput>,
    /// Coinbases carry their block height here so every coinbase txid is unique.
    pub lock_time: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TxCodecError {
    #[error("transaction has more than one data output")]
    TooManyDataOutputs,
    #[error("input index {index} out of range for {count} inputs")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("truncated transaction")]
    Truncated,
    #[error("trailing bytes after transaction")]
    TrailingBytes,
    #[error("bad varint: {0}")]
    Varint(#[from] VarintError),
    #[error("field {field} has length {got}, expected {expected}")]
    FieldLength {
        field: &'static str,
        got: u64,
        expected: usize,
    },
    #[error("unknown output tag {0:#04x}")]
    BadOutputTag(u8),
    #[error("invalid public key in input")]
    BadPublicKey,
}

impl Transaction {
    pub fn is_coinbase(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn data_outputs(&self) -> impl Iterator<Item = &[u8]> {
        self.outputs.iter().filter_map(|o| match o {
            TxOutput::Data(payload) => Some(payload.as_slice()),
            TxOutput::Value { .. } => None,
        })
    }

    pub fn total_output_value(&self) -> Option<u64> {
        self.outputs
            .iter()
            .try_fold(0u64, |acc, o| acc.checked_add(o.amount()))
    }

    pub fn serialize(&self) -> Result<Vec<u8>, TxCodecError> {
        serialize_tx(self)
    }

    pub fn txid(&self) -> Result<Txid, TxCodecError> {
        compute_txid(self)
    }

    pub fn signing_digest(&self, input_index: usize) -> Result<[u8; 32], TxCodecError> {
        digest_for_signing(self, input_index)
    }
}

fn write_bytes(out: &mut Vec<u8>, bytes: &[u8]) {
    varint::write(out, bytes.len() as u64);
    out.extend_from_slice(bytes);
}

fn write_tx(out: &mut Vec<u8>, tx: &Transaction, strip_signatures: bool) -> Result<(), TxCodecError> {
    if tx.data_outputs().count() > 1 {
        return Err(TxCodecError::TooManyDataOutputs);
    }
    varint::write(out, tx.inputs.len() as u64);
    for input in &tx.inputs {
        write_bytes(out, input.prev.txid.as_bytes());
        varint::write(out, u64::from(input.prev.index));
        write_bytes(out, &input.pubkey.to_bytes());
        write_bytes(out, if strip_signatures { &[] } else { &input.signature });
    }
    varint::write(out, tx.outputs.len() as u64);
    for output in &tx.outputs {
        match output {
            TxOutput::Value { address, amount } => {
                out.push(OUTPUT_TAG_VALUE);
                write_bytes(out, address.as_bytes());
                varint::write(out, *amount);
            }
            TxOutput::Data(payload) => {
                out.push(OUTPUT_TAG_DATA);
                write_bytes(out, payload);
            }
        }
    }
    varint::write(out, tx.lock_time);
    Ok(())
}

/// Canonical serialization. Equal transactions always produce equal bytes.
pub fn serialize_tx(tx: &Transaction) -> Result<Vec<u8>, TxCodecError> {
    let mut out = Vec::with_capacity(64 + 140 * tx.inputs.len() + 48 * tx.outputs.len());
    write_tx(&mut out, tx, false)?;
    Ok(out)
}

pub fn compute_txid(tx: &Transaction) -> Result<Txid, TxCodecError> {
    Ok(Txid(hash_blob(&serialize_tx(tx)?)))
}

/// SHA-256 over the serialization with every signature emptied, followed by
/// `varint(input_index)`.
pub fn digest_for_signing(tx: &Transaction, input_index: usize) -> Result<[u8; 32], TxCodecError> {
    if input_index >= tx.inputs.len() {
        return Err(TxCodecError::IndexOutOfRange {
            index: input_index,
            count: tx.inputs.len(),
        });
    }
    let mut out = Vec::new();
    write_tx(&mut out, tx, true)?;
    varint::write(&mut out, input_index as u64);
    Ok(hash_blob(&out))
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn varint(&mut self) -> Result<u64, TxCodecError> {
        let (value, used) = varint::read(self.buf)?;
        self.buf = &self.buf[used..];
        Ok(value)
    }

    fn take(&mut self, n: u64) -> Result<&'a [u8], TxCodecError> {
        let n = usize::try_from(n).map_err(|_| TxCodecError::Truncated)?;
        if n > self.buf.len() {
            return Err(TxCodecError::Truncated);
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn byte(&mut self) -> Result<u8, TxCodecError> {
        Ok(self.take(1)?[0])
    }

    fn bytes(&mut self) -> Result<&'a [u8], TxCodecError> {
        let len = self.varint()?;
        self.take(len)
    }

    fn fixed(&mut self, field: &'static str, expected: usize) -> Result<&'a [u8], TxCodecError> {
        let len = self.varint()?;
        if len != expected as u64 {
            return Err(TxCodecError::FieldLength {
                field,
                got: len,
                expected,
            });
        }
        self.take(len)
    }

    /// Length prefix for a list; each element needs at least `min_size` bytes.
    fn count(&mut self, min_size: usize) -> Result<usize, TxCodecError> {
        let n = self.varint()?;
        if n.saturating_mul(min_size as u64) > self.buf.len() as u64 {
            return Err(TxCodecError::Truncated);
        }
        Ok(n as usize)
    }
}

/// Strict inverse of [`serialize_tx`].
pub fn deserialize_tx(bytes: &[u8]) -> Result<Transaction, TxCodecError> {
    let mut r = Reader { buf: bytes };
    let n_in = r.count(4)?;
    let mut inputs = Vec::with_capacity(n_in);
    for _ in 0..n_in {
        let txid = Txid::from_slice(r.fixed("prev_txid", 32)?).expect("length checked");
        let index = u32::try_from(r.varint()?).map_err(|_| TxCodecError::FieldLength {
            field: "prev_index",
            got: u64::MAX,
            expected: 4,
        })?;
        let pubkey = PublicKey::from_bytes(r.fixed("pubkey", PUBLIC_KEY_LEN)?)
            .map_err(|_| TxCodecError::BadPublicKey)?;
        let signature = r.bytes()?.to_vec();
        inputs.push(TxInput {
            prev: OutPoint { txid, index },
            pubkey,
            signature,
        });
    }
    let n_out = r.count(2)?;
    let mut outputs = Vec::with_capacity(n_out);
    for _ in 0..n_out {
        match r.byte()? {
            OUTPUT_TAG_VALUE => {
                let address = Address::from_slice(r.fixed("address", 20)?).expect("length checked");
                let amount = r.varint()?;
                outputs.push(TxOutput::Value { address, amount });
            }
            OUTPUT_TAG_DATA => outputs.push(TxOutput::Data(r.bytes()?.to_vec())),
            tag => return Err(TxCodecError::BadOutputTag(tag)),
        }
    }
    let lock_time = r.varint()?;
    if !r.buf.is_empty() {
        return Err(TxCodecError::TrailingBytes);
    }
    let tx = Transaction {
        inputs,
        outputs,
        lock_time,
    };
    if tx.data_outputs().count() > 1 {
        return Err(TxCodecError::TooManyDataOutputs);
    }
    Ok(tx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::KeyPair;

    fn sample() -> Transaction {
        let key = KeyPair::from_seed(5);
        Transaction {
            inputs: vec![TxInput {
                prev: OutPoint {
                    txid: Txid([3; 32]),
                    index: 1,
                },
                pubkey: *key.public(),
                signature: vec![9; 64],
            }],
            outputs: vec![
                TxOutput::Data(vec![1, 2, 3]),
                TxOutput::value(Address([4; 20]), 1000),
            ],
            lock_time: 0,
        }
    }

    #[test]
    fn value_only_round_trip() {
        let tx = Transaction {
            inputs: vec![],
            outputs: vec![TxOutput::value(Address([1; 20]), 50_000_000)],
            lock_time: 1,
        };
        let bytes = serialize_tx(&tx).unwrap();
        assert_eq!(deserialize_tx(&bytes).unwrap(), tx);
    }

    #[test]
    fn two_data_outputs_rejected() {
        let mut tx = sample();
        tx.outputs.push(TxOutput::Data(vec![]));
        assert_eq!(serialize_tx(&tx), Err(TxCodecError::TooManyDataOutputs));
        assert_eq!(compute_txid(&tx), Err(TxCodecError::TooManyDataOutputs));
    }

    #[test]
    fn signing_digest_properties() {
        let tx = sample();
        assert_eq!(digest_for_signing(&tx, 0), digest_for_signing(&tx, 0));

        let mut two = tx.clone();
        two.inputs.push(two.inputs[0].clone());
        assert_ne!(
            digest_for_signing(&two, 0).unwrap(),
            digest_for_signing(&two, 1).unwrap()
        );

        let mut resigned = tx.clone();
        resigned.inputs[0].signature = vec![0xaa; 70];
        assert_eq!(
            digest_for_signing(&tx, 0).unwrap(),
            digest_for_signing(&resigned, 0).unwrap()
        );
        assert_ne!(compute_txid(&tx).unwrap(), compute_txid(&resigned).unwrap());

        assert_eq!(
            digest_for_signing(&tx, 1),
            Err(TxCodecError::IndexOutOfRange { index: 1, count: 1 })
        );
    }

    #[test]
    fn strict_decoding() {
        let bytes = serialize_tx(&sample()).unwrap();
        let mut long = bytes.clone();
        long.push(0);
        assert_eq!(deserialize_tx(&long), Err(TxCodecError::TrailingBytes));
        for cut in 0..bytes.len() {
            assert!(deserialize_tx(&bytes[..cut]).is_err(), "prefix {cut} decoded");
        }
    }

    #[test]
    fn bad_output_tag() {
        let tx = Transaction {
            inputs: vec![],
            outputs: vec![TxOutput::Data(vec![])],
            lock_time: 0,
        };
        let mut bytes = serialize_tx(&tx).unwrap();
        // [n_in=0][n_out=1][tag]...
        bytes[2] = 0x07;
        assert_eq!(deserialize_tx(&bytes), Err(TxCodecError::BadOutputTag(7)));
    }
}
