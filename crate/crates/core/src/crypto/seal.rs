//! Hybrid encryption to a recipient public key.
//!
//! Ephemeral ECDH on secp256k1, HKDF-SHA256 to a 256-bit key, then
//! ChaCha20-Poly1305. Wire form:
//!
//! ```text
//! ephemeral_pubkey (33, compressed) || nonce (12) || tag (16) || ciphertext
//! ```
//!
//! The ephemeral key is bound as associated data.

use chacha20poly1305::aead::AeadInPlace;
use chacha20poly1305::{ChaCha20Poly1305, Key, KeyInit, Nonce, Tag};
use k256::ecdh::diffie_hellman;
use k256::SecretKey;
use rand::rngs::OsRng;
use rand::{CryptoRng, RngCore};
use sha2::Sha256;

use super::{CryptoError, KeyPair, PublicKey, PUBLIC_KEY_LEN};

pub const NONCE_LEN: usize = 12;
pub const TAG_LEN: usize = 16;
/// Bytes added on top of the plaintext length.
pub const SEAL_OVERHEAD: usize = PUBLIC_KEY_LEN + NONCE_LEN + TAG_LEN;

const KDF_INFO: &[u8] = b"paidata/seal/v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SealedBlob {
    pub ephemeral_public_key: [u8; PUBLIC_KEY_LEN],
    pub nonce: [u8; NONCE_LEN],
    pub auth_tag: [u8; TAG_LEN],
    pub ciphertext: Vec<u8>,
}

impl SealedBlob {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(SEAL_OVERHEAD + self.ciphertext.len());
        out.extend_from_slice(&self.ephemeral_public_key);
        out.extend_from_slice(&self.nonce);
        out.extend_from_slice(&self.auth_tag);
        out.extend_from_slice(&self.ciphertext);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        if bytes.len() < SEAL_OVERHEAD {
            return Err(CryptoError::MalformedBlob("shorter than fixed header"));
        }
        let (eph, rest) = bytes.split_at(PUBLIC_KEY_LEN);
        let (nonce, rest) = rest.split_at(NONCE_LEN);
        let (tag, ciphertext) = rest.split_at(TAG_LEN);
        Ok(Self {
            ephemeral_public_key: eph.try_into().expect("split length"),
            nonce: nonce.try_into().expect("split length"),
            auth_tag: tag.try_into().expect("split length"),
            ciphertext: ciphertext.to_vec(),
        })
    }
}

fn derive_cipher(secret: &SecretKey, peer: &PublicKey, eph: &[u8], recipient: &[u8]) -> ChaCha20Poly1305 {
    let shared = diffie_hellman(secret.to_nonzero_scalar(), peer.inner().as_affine());
    let mut salt = Vec::with_capacity(2 * PUBLIC_KEY_LEN);
    salt.extend_from_slice(eph);
    salt.extend_from_slice(recipient);
    let hkdf = shared.extract::<Sha256>(Some(&salt));
    let mut key = [0u8; 32];
    hkdf.expand(KDF_INFO, &mut key)
        .expect("32 bytes is a valid HKDF-SHA256 output length");
    ChaCha20Poly1305::new(Key::from_slice(&key))
}

/// Encrypts `plaintext` so that only the holder of `recipient`'s secret key can open it.
pub fn seal(plaintext: &[u8], recipient: &PublicKey) -> SealedBlob {
    seal_with_rng(plaintext, recipient, &mut OsRng)
}

pub fn seal_with_rng<R: RngCore + CryptoRng>(
    plaintext: &[u8],
    recipient: &PublicKey,
    rng: &mut R,
) -> SealedBlob {
    let ephemeral = SecretKey::random(&mut *rng);
    let eph_public = PublicKey::from_bytes(
        ephemeral.public_key().to_sec1_bytes().as_ref(),
    )
    .expect("freshly derived key is valid");
    let eph_bytes = eph_public.to_bytes();
    let recipient_bytes = recipient.to_bytes();

    let mut nonce = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce);

    let cipher = derive_cipher(&ephemeral, recipient, &eph_bytes, &recipient_bytes);
    let mut ciphertext = plaintext.to_vec();
    let tag = cipher
        .encrypt_in_place_detached(Nonce::from_slice(&nonce), &eph_bytes, &mut ciphertext)
        .expect("plaintext within ChaCha20-Poly1305 limits");

    SealedBlob {
        ephemeral_public_key: eph_bytes,
        nonce,
        auth_tag: tag.into(),
        ciphertext,
    }
}

/// Decrypts a blob sealed to `recipient`'s public key.
pub fn open(blob: &SealedBlob, recipient: &KeyPair) -> Result<Vec<u8>, CryptoError> {
    let eph = PublicKey::from_bytes(&blob.ephemeral_public_key)
        .map_err(|_| CryptoError::AuthFailure)?;
    let cipher = derive_cipher(
        recipient.secret(),
        &eph,
        &blob.ephemeral_public_key,
        &recipient.public().to_bytes(),
    );
    let mut plaintext = blob.ciphertext.clone();
    cipher
        .decrypt_in_place_detached(
            Nonce::from_slice(&blob.nonce),
            &blob.ephemeral_public_key,
            &mut plaintext,
            Tag::from_slice(&blob.auth_tag),
        )
        .map_err(|_| CryptoError::AuthFailure)?;
    Ok(plaintext)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_including_empty() {
        let bob = KeyPair::from_seed(2);
        for msg in [&b""[..], b"x", b"hello provider"] {
            let blob = seal(msg, bob.public());
            assert_eq!(open(&blob, &bob).unwrap(), msg);
            let parsed = SealedBlob::from_bytes(&blob.to_bytes()).unwrap();
            assert_eq!(parsed, blob);
        }
    }

    #[test]
    fn sealing_is_randomized() {
        let bob = KeyPair::from_seed(2);
        let a = seal(b"same message", bob.public());
        let b = seal(b"same message", bob.public());
        assert_ne!(a.to_bytes(), b.to_bytes());
        assert_ne!(a.ciphertext, b"same message");
    }

    #[test]
    fn wrong_key_fails() {
        let alice = KeyPair::from_seed(1);
        let bob = KeyPair::from_seed(2);
        let blob = seal(b"for bob", bob.public());
        assert_eq!(open(&blob, &alice), Err(CryptoError::AuthFailure));
    }

    #[test]
    fn every_single_bit_flip_is_rejected() {
        let bob = KeyPair::from_seed(2);
        let bytes = seal(b"short fixture", bob.public()).to_bytes();
        for bit in 0..bytes.len() * 8 {
            let mut tampered = bytes.clone();
            tampered[bit / 8] ^= 1 << (bit % 8);
            let blob = SealedBlob::from_bytes(&tampered).unwrap();
            assert_eq!(open(&blob, &bob), Err(CryptoError::AuthFailure), "bit {bit}");
        }
    }

    #[test]
    fn truncation_is_rejected() {
        let bob = KeyPair::from_seed(2);
        let bytes = seal(b"truncate me", bob.public()).to_bytes();
        assert!(matches!(
            SealedBlob::from_bytes(&bytes[..SEAL_OVERHEAD - 1]),
            Err(CryptoError::MalformedBlob(_))
        ));
        let cut = SealedBlob::from_bytes(&bytes[..bytes.len() - 1]).unwrap();
        assert_eq!(open(&cut, &bob), Err(CryptoError::AuthFailure));
    }

    #[test]
    fn self_sealing_is_plain_seal() {
        let alice = KeyPair::from_seed(1);
        let blob = seal(b"my own notes", alice.public());
        assert_eq!(open(&blob, &alice).unwrap(), b"my own notes");
    }
}
