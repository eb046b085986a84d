mod common;

use std::sync::Arc;

use common::{contains_subslice, Harness};
use paidata_core::chain::ChainAccess;
use paidata_core::codec::OpKind;
use paidata_core::crypto::hash_blob;
use paidata_core::custody::EventEffect;
use paidata_core::provider::{ProviderApi, ProviderError, ProviderStore, ProviderConfig};
use paidata_core::workflows::claim::detach_claim;
use paidata_core::{AccessStatus, ContentId, KeyPair, Wallet, WorkflowError, BLOCK_SUBSIDY};

#[test]
fn store_and_retrieve_own_document() {
    let h = Harness::new();
    let alice = h.wallet(1);
    h.mine(&alice);

    let doc = vec![0x42u8; 1024];
    let mut receipt = alice.store_data(&doc, None).unwrap();
    assert_eq!(alice.confirm(&mut receipt).unwrap(), None);
    let height = h.mine(&alice);
    assert_eq!(alice.confirm(&mut receipt).unwrap(), Some(height));

    let ledger = alice.custody().unwrap();
    assert_eq!(ledger.query_access(&receipt.content_id, &alice.address()).unwrap(), AccessStatus::Owner);
    assert_eq!(alice.retrieve_data(&receipt.content_id).unwrap(), doc);

    // The content id is the hash of whatever the provider actually holds.
    let manifest = h.provider.get_manifest(&receipt.content_id).unwrap();
    let mut held = Vec::new();
    for i in 0..manifest.chunk_count() as u64 {
        held.extend(h.provider.get_chunk(&receipt.content_id, i).unwrap());
    }
    assert_eq!(ContentId(hash_blob(&held)), receipt.content_id);
    assert_eq!(manifest, receipt.manifest);

    let proof = ledger.proof_of_existence(&receipt.content_id).unwrap();
    assert_eq!((proof.height, proof.txid), (height, receipt.txid));
}

#[test]
fn provider_payment_reaches_provider() {
    let h = Harness::new();
    let alice = h.wallet(1);
    let provider_addr = KeyPair::from_seed(500).address();
    h.mine(&alice);
    alice.store_data(b"pay the host", Some((provider_addr, 1000))).unwrap();
    h.mine(&alice);
    assert_eq!(h.chain.read().balance(&provider_addr), 1000);
    assert_eq!(alice.balance().unwrap(), 2 * BLOCK_SUBSIDY - 1000);
}

#[test]
fn share_grant_retrieve_then_revoke_with_delete() {
    let h = Harness::new();
    let alice = h.wallet(1);
    let bob = h.wallet(2);
    let carol = h.wallet(3);
    h.mine(&alice);

    let doc = b"medical record for bob".to_vec();
    let receipt = alice.share_data(&doc, bob.public_key(), None).unwrap();
    h.mine(&alice);
    let id = receipt.content_id;

    let ledger = bob.custody().unwrap();
    assert_eq!(ledger.query_access(&id, &bob.address()).unwrap(), AccessStatus::Granted);
    assert_eq!(ledger.query_access(&id, &alice.address()).unwrap(), AccessStatus::Owner);
    assert_eq!(bob.retrieve_data(&id).unwrap(), doc);
    assert_eq!(alice.retrieve_data(&id), Err(WorkflowError::AuthFailure));
    assert_eq!(carol.retrieve_data(&id), Err(WorkflowError::AuthFailure));

    for file in h.provider_files() {
        let bytes = std::fs::read(file).unwrap();
        assert!(!contains_subslice(&bytes, b"medical record"));
    }

    let revoke = alice.revoke_access(&id, &bob.address(), true).unwrap();
    assert_eq!(revoke.deletions.len(), 1);
    assert!(revoke.deletions[0].deleted);
    h.mine(&alice);

    let ledger = bob.custody().unwrap();
    assert_eq!(ledger.query_access(&id, &bob.address()).unwrap(), AccessStatus::Revoked);
    let ops: Vec<_> = ledger.history(&id).unwrap().iter().map(|e| e.event.op).collect();
    assert_eq!(ops, [OpKind::Grant, OpKind::Revoke]);
    assert_eq!(h.provider.get_manifest(&id), Err(ProviderError::NotFound));
    assert_eq!(bob.retrieve_data(&id), Err(WorkflowError::NotFound));
}

#[test]
fn non_owner_revoke_is_guarded_and_ineffective_on_chain() {
    let h = Harness::new();
    let alice = h.wallet(1);
    let bob = h.wallet(2);
    let mallory = h.wallet(4);
    h.mine(&alice);
    h.mine(&mallory);

    let id = alice.share_data(b"x", bob.public_key(), None).unwrap().content_id;
    h.mine(&alice);

    assert_eq!(
        mallory.revoke_access(&id, &bob.address(), true),
        Err(WorkflowError::NotOwner)
    );
    let forced = mallory.revoke_unchecked(&id, &bob.address(), true).unwrap();
    assert!(forced.deletions[0].error.as_deref().unwrap().contains("unauthorized"));
    h.mine(&alice);

    let ledger = alice.custody().unwrap();
    assert_eq!(ledger.query_access(&id, &bob.address()).unwrap(), AccessStatus::Granted);
    assert_eq!(ledger.history(&id).unwrap().last().unwrap().effect, EventEffect::Unauthorized);
    assert!(h.provider.get_manifest(&id).is_ok());
}

#[test]
fn revoking_a_never_granted_address_is_recorded_noop() {
    let h = Harness::new();
    let alice = h.wallet(1);
    h.mine(&alice);
    let id = alice.store_data(b"solo", None).unwrap().content_id;
    h.mine(&alice);
    let stranger = KeyPair::from_seed(9).address();
    alice.revoke_access(&id, &stranger, false).unwrap();
    h.mine(&alice);
    let ledger = alice.custody().unwrap();
    let hist = ledger.history(&id).unwrap();
    assert_eq!(hist.len(), 2);
    assert_eq!(hist[1].effect, EventEffect::NoOp);
    assert!(ledger.active_grants(&id).unwrap().is_empty());
}

#[test]
fn corrupted_chunk_is_detected() {
    let h = Harness::new();
    let alice = h.wallet(1);
    h.mine(&alice);
    let doc = vec![7u8; 300_000];
    let id = alice.store_data(&doc, None).unwrap().content_id;

    let chunk = h
        .provider_dir
        .path()
        .join("objects")
        .join(id.to_hex())
        .join("chunk-1");
    let mut bytes = std::fs::read(&chunk).unwrap();
    bytes[5] ^= 0x01;
    std::fs::write(&chunk, bytes).unwrap();

    assert_eq!(
        alice.retrieve_data(&id),
        Err(WorkflowError::ChunkMismatch { index: Some(1) })
    );
}

#[test]
fn insufficient_funds_and_missing_provider() {
    let h = Harness::new();
    let poor = h.wallet(8);
    assert!(matches!(
        poor.store_data(b"doc", None),
        Err(WorkflowError::InsufficientFunds { .. })
    ));

    let lonely = Wallet::new(KeyPair::from_seed(1), Arc::new(h.chain.clone()), vec![]);
    h.mine(&lonely);
    assert!(matches!(
        lonely.store_data(b"doc", None),
        Err(WorkflowError::ProviderUnavailable(_))
    ));
}

#[test]
fn full_provider_surfaces_storage_error() {
    let h = Harness::with_config(|c| ProviderConfig {
        capacity_bytes: Some(100),
        ..c
    });
    let alice = h.wallet(1);
    h.mine(&alice);
    assert!(matches!(
        alice.store_data(&[0u8; 200], None),
        Err(WorkflowError::Provider(ProviderError::StorageFull { .. }))
    ));
}

#[test]
fn falls_back_to_second_provider_for_retrieval() {
    let h = Harness::new();
    let second_dir = tempfile::tempdir().unwrap();
    let second = Arc::new(ProviderStore::open(ProviderConfig::new(second_dir.path())).unwrap());
    let chain: Arc<dyn ChainAccess> = Arc::new(h.chain.clone());

    let uploader = Wallet::new(KeyPair::from_seed(1), chain.clone(), vec![second.clone() as Arc<dyn ProviderApi>]);
    h.mine(&uploader);
    let id = uploader.store_data(b"only on the second host", None).unwrap().content_id;

    let reader = Wallet::new(
        KeyPair::from_seed(1),
        chain,
        vec![h.provider.clone() as Arc<dyn ProviderApi>, second as Arc<dyn ProviderApi>],
    );
    assert_eq!(reader.retrieve_data(&id).unwrap(), b"only on the second host");
}

#[test]
fn ownership_claim_header_survives_round_trip() {
    let h = Harness::new();
    let alice = h.wallet(1);
    h.mine(&alice);
    let id = alice.store_claimed(b"chapter one", "Alice Author", None).unwrap().content_id;
    let plain = alice.retrieve_data(&id).unwrap();
    let (claim, doc) = detach_claim(&plain).unwrap().unwrap();
    assert_eq!(doc, b"chapter one");
    assert_eq!(claim.claimant, "Alice Author");
    assert!(claim.verify(doc));
}

#[test]
fn unconfirmed_change_can_be_spent() {
    let h = Harness::new();
    let alice = h.wallet(1);
    h.mine(&alice);
    for i in 0..5u8 {
        alice.store_data(&[i; 10], None).unwrap();
    }
    h.mine(&alice);
    assert_eq!(alice.custody().unwrap().contents().count(), 5);
}
