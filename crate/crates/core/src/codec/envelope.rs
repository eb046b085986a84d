use crate::ids::ContentId;

/// `"PAID"`.
pub const ENVELOPE_MAGIC: [u8; 4] = *b"PAID";
pub const ENVELOPE_VERSION: u8 = 0x01;
/// magic (4) + version (1) + op (1) + content id (32).
pub const ENVELOPE_LEN: usize = 38;
/// Standard relay limit for OP_RETURN payloads.
pub const MAX_OP_RETURN_LEN: usize = 80;

const _: () = assert!(ENVELOPE_LEN <= MAX_OP_RETURN_LEN);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Store,
    Grant,
    Revoke,
}

impl OpKind {
    pub const fn to_byte(self) -> u8 {
        match self {
            OpKind::Store => 0x00,
            OpKind::Grant => 0x01,
            OpKind::Revoke => 0x02,
        }
    }

    pub const fn from_byte(byte: u8) -> Option<Self> {
        match byte {
            0x00 => Some(OpKind::Store),
            0x01 => Some(OpKind::Grant),
            0x02 => Some(OpKind::Revoke),
            _ => None,
        }
    }
}

impl std::fmt::Display for OpKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OpKind::Store => "store",
            OpKind::Grant => "grant",
            OpKind::Revoke => "revoke",
        })
    }
}

/// The payload carried by a PAI Data OP_RETURN output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct PayloadEnvelope {
    pub op: OpKind,
    pub content_id: ContentId,
}

impl PayloadEnvelope {
    pub fn new(op: OpKind, content_id: ContentId) -> Self {
        Self { op, content_id }
    }

    pub fn encode(&self) -> [u8; ENVELOPE_LEN] {
        encode_envelope(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum EnvelopeError {
    /// Not a PAI Data payload at all. Scanners skip these.
    #[error("not a PAI Data payload")]
    BadMagic,
    #[error("unsupported envelope version {0:#04x}")]
    BadVersion(u8),
    #[error("unknown operation byte {0:#04x}")]
    BadOpKind(u8),
    #[error("envelope must be {ENVELOPE_LEN} bytes, got {0}")]
    BadLength(usize),
}

/// `magic || version || op || content_id`, always 38 bytes.
pub fn encode_envelope(env: &PayloadEnvelope) -> [u8; ENVELOPE_LEN] {
    let mut out = [0u8; ENVELOPE_LEN];
    out[..4].copy_from_slice(&ENVELOPE_MAGIC);
    out[4] = ENVELOPE_VERSION;
    out[5] = env.op.to_byte();
    out[6..].copy_from_slice(env.content_id.as_bytes());
    out
}

/// Strict inverse of [`encode_envelope`]. Checks run magic, version, op, then exact length.
pub fn decode_envelope(bytes: &[u8]) -> Result<PayloadEnvelope, EnvelopeError> {
    if bytes.len() < 4 || bytes[..4] != ENVELOPE_MAGIC {
        return Err(EnvelopeError::BadMagic);
    }
    if bytes.len() < 6 {
        return Err(EnvelopeError::BadLength(bytes.len()));
    }
    if bytes[4] != ENVELOPE_VERSION {
        return Err(EnvelopeError::BadVersion(bytes[4]));
    }
    let op = OpKind::from_byte(bytes[5]).ok_or(EnvelopeError::BadOpKind(bytes[5]))?;
    if bytes.len() != ENVELOPE_LEN {
        return Err(EnvelopeError::BadLength(bytes.len()));
    }
    let content_id = ContentId::from_slice(&bytes[6..]).expect("length checked");
    Ok(PayloadEnvelope { op, content_id })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hex_of(env: PayloadEnvelope) -> String {
        hex::encode(encode_envelope(&env))
    }

    #[test]
    fn golden_store_zero_id() {
        let env = PayloadEnvelope::new(OpKind::Store, ContentId::new([0u8; 32]));
        assert_eq!(hex_of(env), format!("504149440100{}", "00".repeat(32)));
    }

    #[test]
    fn golden_grant_ff_id() {
        let env = PayloadEnvelope::new(OpKind::Grant, ContentId::new([0xff; 32]));
        assert_eq!(hex_of(env), format!("504149440101{}", "ff".repeat(32)));
    }

    #[test]
    fn golden_revoke_empty_digest() {
        // sha256("") from an independent tool.
        let id: ContentId = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
            .parse()
            .unwrap();
        assert_eq!(
            hex_of(PayloadEnvelope::new(OpKind::Revoke, id)),
            "504149440102e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn length_fits_relay_limit() {
        assert_eq!(ENVELOPE_LEN, 38);
    }

    #[test]
    fn decode_errors() {
        let good = encode_envelope(&PayloadEnvelope::new(OpKind::Store, ContentId::new([7; 32])));
        assert_eq!(decode_envelope(&good[..37]), Err(EnvelopeError::BadLength(37)));

        let mut magic = good;
        magic[..4].copy_from_slice(&[0x50, 0x41, 0x49, 0x43]);
        assert_eq!(decode_envelope(&magic), Err(EnvelopeError::BadMagic));

        let mut version = good;
        version[4] = 0x02;
        assert_eq!(decode_envelope(&version), Err(EnvelopeError::BadVersion(2)));

        let mut op = good;
        op[5] = 0x03;
        assert_eq!(decode_envelope(&op), Err(EnvelopeError::BadOpKind(3)));

        let mut long = good.to_vec();
        long.push(0);
        assert_eq!(decode_envelope(&long), Err(EnvelopeError::BadLength(39)));

        assert_eq!(decode_envelope(b""), Err(EnvelopeError::BadMagic));
        assert_eq!(decode_envelope(b"PAID"), Err(EnvelopeError::BadLength(4)));
    }

    #[test]
    fn op_bytes() {
        for byte in 0u8..=255 {
            match OpKind::from_byte(byte) {
                Some(op) => assert_eq!(op.to_byte(), byte),
                None => assert!(byte > 2),
            }
        }
    }

    fn any_op() -> impl Strategy<Value = OpKind> {
        prop_oneof![Just(OpKind::Store), Just(OpKind::Grant), Just(OpKind::Revoke)]
    }

    proptest! {
        #[test]
        fn round_trip(op in any_op(), id: [u8; 32]) {
            let env = PayloadEnvelope::new(op, ContentId::new(id));
            prop_assert_eq!(decode_envelope(&encode_envelope(&env)), Ok(env));
        }

        #[test]
        fn header_mutations_rejected(op in any_op(), id: [u8; 32], pos in 0usize..6, xor in 1u8..=255) {
            let mut bytes = encode_envelope(&PayloadEnvelope::new(op, ContentId::new(id)));
            bytes[pos] ^= xor;
            // Mutating the op byte can land on another valid op; that is a valid encoding.
            if pos == 5 && OpKind::from_byte(bytes[5]).is_some() {
                return Ok(());
            }
            prop_assert!(decode_envelope(&bytes).is_err());
        }
    }
}
