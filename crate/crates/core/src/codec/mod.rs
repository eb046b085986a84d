//! Byte-exact wire formats: the OP_RETURN data envelope and the transaction
//! serialization from which transaction ids and signing digests are derived.

mod envelope;
mod tx;
pub mod varint;

pub use envelope::{
    decode_envelope, encode_envelope, EnvelopeError, OpKind, PayloadEnvelope, ENVELOPE_LEN,
    ENVELOPE_MAGIC, ENVELOPE_VERSION, MAX_OP_RETURN_LEN,
};
pub use tx::{
    compute_txid, deserialize_tx, digest_for_signing, serialize_tx, Transaction, TxCodecError,
    TxInput, TxOutput, OUTPUT_TAG_DATA, OUTPUT_TAG_VALUE,
};
