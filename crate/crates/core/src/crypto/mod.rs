//! Keys, hashing, signatures and encrypt-to-recipient sealing over secp256k1.

mod keys;
mod seal;

pub use keys::{KeyPair, PublicKey, Signature, PUBLIC_KEY_LEN, SIGNATURE_LEN};
pub use seal::{open, seal, seal_with_rng, SealedBlob, NONCE_LEN, SEAL_OVERHEAD, TAG_LEN};

use sha2::{Digest, Sha256};

use crate::ids::Address;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CryptoError {
    /// Wrong recipient key or a modified blob. The two cases are not distinguished.
    #[error("authentication failed")]
    AuthFailure,
    #[error("malformed sealed blob: {0}")]
    MalformedBlob(&'static str),
    #[error("malformed signature")]
    MalformedSignature,
    #[error("malformed public key")]
    MalformedPublicKey,
    #[error("malformed secret key")]
    MalformedSecretKey,
}

/// SHA-256 of `bytes`.
pub fn hash_blob(bytes: &[u8]) -> [u8; 32] {
    Sha256::digest(bytes).into()
}

/// Streams several slices through one SHA-256 instance.
pub fn hash_parts<'a>(parts: impl IntoIterator<Item = &'a [u8]>) -> [u8; 32] {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update(part);
    }
    hasher.finalize().into()
}

pub(crate) fn address_of(public: &PublicKey) -> Address {
    let digest = hash_blob(&public.to_bytes());
    let mut out = [0u8; 20];
    out.copy_from_slice(&digest[..20]);
    Address(out)
}

/// Signs a 32-byte digest. Nonces follow RFC 6979, so signatures are deterministic.
pub fn sign(digest: &[u8; 32], key: &KeyPair) -> Signature {
    key.sign_digest(digest)
}

/// Verifies a raw 64-byte compact signature. Anything malformed is simply `false`.
pub fn verify(digest: &[u8; 32], signature: &[u8], public: &PublicKey) -> bool {
    match Signature::from_slice(signature) {
        Ok(sig) => public.verify_digest(digest, &sig),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_vectors() {
        assert_eq!(
            hex::encode(hash_blob(b"")),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(
            hex::encode(hash_blob(b"abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert_eq!(hash_parts([&b"a"[..], b"bc"]), hash_blob(b"abc"));
    }

    #[test]
    fn sign_verify_round_trip() {
        let alice = KeyPair::from_seed(1);
        let bob = KeyPair::from_seed(2);
        let digest = hash_blob(b"transaction body");
        let sig = sign(&digest, &alice);
        assert!(verify(&digest, &sig.to_bytes(), alice.public()));
        assert!(!verify(&digest, &sig.to_bytes(), bob.public()));

        let mut other = digest;
        other[0] ^= 1;
        assert!(!verify(&other, &sig.to_bytes(), alice.public()));
        assert!(!verify(&digest, &sig.to_bytes()[..63], alice.public()));
    }

    #[test]
    fn signatures_are_deterministic() {
        let key = KeyPair::from_seed(9);
        let digest = hash_blob(b"fixture");
        assert_eq!(sign(&digest, &key), sign(&digest, &key));
    }

    #[test]
    fn malformed_signature_decode() {
        assert_eq!(
            Signature::from_slice(&[0u8; 10]),
            Err(CryptoError::MalformedSignature)
        );
        // r = s = 0 is out of range.
        assert_eq!(
            Signature::from_slice(&[0u8; 64]),
            Err(CryptoError::MalformedSignature)
        );
    }
}
