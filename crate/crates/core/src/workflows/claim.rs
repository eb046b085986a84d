//! Optional authorship claim prepended to a document before sealing.
//!
//! ```text
//! "PAIC" || u16be(len) || claimant (UTF-8, len bytes) || pubkey (33) || signature (64) || document
//! ```
//!
//! The signature is over `SHA-256(document)` by the claimant key, so a claim
//! can be checked by whoever decrypts the blob.

use crate::crypto::{self, hash_blob, KeyPair, PublicKey, Signature, PUBLIC_KEY_LEN, SIGNATURE_LEN};

pub const CLAIM_MAGIC: [u8; 4] = *b"PAIC";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClaimError {
    #[error("claimant name longer than 65535 bytes")]
    ClaimantTooLong,
    #[error("truncated claim header")]
    Truncated,
    #[error("claimant is not valid UTF-8")]
    BadClaimant,
    #[error("invalid key or signature in claim header")]
    BadKey,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct OwnershipClaim {
    pub claimant: String,
    pub public_key: PublicKey,
    #[serde(serialize_with = "ser_sig")]
    pub signature: Signature,
}

fn ser_sig<S: serde::Serializer>(sig: &Signature, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&sig.to_hex())
}

impl OwnershipClaim {
    pub fn verify(&self, document: &[u8]) -> bool {
        crypto::verify(&hash_blob(document), &self.signature.to_bytes(), &self.public_key)
    }
}

pub fn attach_claim(document: &[u8], claimant: &str, key: &KeyPair) -> Result<Vec<u8>, ClaimError> {
    let name = claimant.as_bytes();
    let len = u16::try_from(name.len()).map_err(|_| ClaimError::ClaimantTooLong)?;
    let signature = crypto::sign(&hash_blob(document), key);
    let mut out = Vec::with_capacity(4 + 2 + name.len() + PUBLIC_KEY_LEN + SIGNATURE_LEN + document.len());
    out.extend_from_slice(&CLAIM_MAGIC);
    out.extend_from_slice(&len.to_be_bytes());
    out.extend_from_slice(name);
    out.extend_from_slice(&key.public().to_bytes());
    out.extend_from_slice(&signature.to_bytes());
    out.extend_from_slice(document);
    Ok(out)
}

/// Splits a claim header off `bytes`. `None` when the bytes carry no header.
pub fn detach_claim(bytes: &[u8]) -> Option<Result<(OwnershipClaim, &[u8]), ClaimError>> {
    let rest = bytes.strip_prefix(&CLAIM_MAGIC[..])?;
    Some(parse_claim(rest))
}

fn parse_claim(rest: &[u8]) -> Result<(OwnershipClaim, &[u8]), ClaimError> {
    if rest.len() < 2 {
        return Err(ClaimError::Truncated);
    }
    let len = u16::from_be_bytes([rest[0], rest[1]]) as usize;
    let rest = &rest[2..];
    if rest.len() < len + PUBLIC_KEY_LEN + SIGNATURE_LEN {
        return Err(ClaimError::Truncated);
    }
    let claimant = std::str::from_utf8(&rest[..len])
        .map_err(|_| ClaimError::BadClaimant)?
        .to_owned();
    let rest = &rest[len..];
    let public_key = PublicKey::from_bytes(&rest[..PUBLIC_KEY_LEN]).map_err(|_| ClaimError::BadKey)?;
    let rest = &rest[PUBLIC_KEY_LEN..];
    let signature = Signature::from_slice(&rest[..SIGNATURE_LEN]).map_err(|_| ClaimError::BadKey)?;
    Ok((
        OwnershipClaim {
            claimant,
            public_key,
            signature,
        },
        &rest[SIGNATURE_LEN..],
    ))
}
