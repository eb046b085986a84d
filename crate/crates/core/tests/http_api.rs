use std::sync::Arc;

use paidata_core::chain::{ChainAccess, ChainParams};
use paidata_core::http::{chain_router, provider_router, HttpProvider, RemoteChain, ServerHandle};
use paidata_core::provider::{sign_delete_request, ProviderApi, ProviderConfig};
use paidata_core::{
    AccessStatus, ChainError, ContentId, KeyPair, ProviderError, ProviderStore, SharedChain, Wallet, WorkflowError,
    BLOCK_SUBSIDY,
};

fn localhost() -> std::net::SocketAddr {
    "127.0.0.1:0".parse().unwrap()
}

struct Services {
    chain: ServerHandle,
    provider: ServerHandle,
    _dir: tempfile::TempDir,
}

fn start() -> Services {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(ProviderStore::open(ProviderConfig::new(dir.path())).unwrap());
    Services {
        chain: ServerHandle::spawn(chain_router(SharedChain::in_memory(ChainParams::default())), localhost()).unwrap(),
        provider: ServerHandle::spawn(provider_router(store, 64 << 20), localhost()).unwrap(),
        _dir: dir,
    }
}

fn remote_wallet(s: &Services, seed: u64) -> Wallet {
    Wallet::new(
        KeyPair::from_seed(seed),
        Arc::new(RemoteChain::new(&s.chain.url())),
        vec![Arc::new(HttpProvider::new(&s.provider.url())) as Arc<dyn ProviderApi>],
    )
}

#[test]
fn provider_round_trip_over_http() {
    let s = start();
    let client = HttpProvider::new(&s.provider.url());
    let owner = KeyPair::from_seed(1);
    let blob: Vec<u8> = (0..600_000u32).map(|i| (i % 251) as u8).collect();

    let manifest = client.upload(&blob, owner.public()).unwrap();
    assert_eq!(client.get_manifest(&manifest.content_id).unwrap(), manifest);
    let mut fetched = Vec::new();
    for i in 0..manifest.chunk_count() as u64 {
        fetched.extend(client.get_chunk(&manifest.content_id, i).unwrap());
    }
    assert_eq!(fetched, blob);

    let count = manifest.chunk_count() as u64;
    assert_eq!(
        client.get_chunk(&manifest.content_id, count),
        Err(ProviderError::IndexOutOfRange { index: count, count })
    );
    assert_eq!(client.upload(&[], owner.public()), Err(ProviderError::EmptyBlob));

    let stranger = KeyPair::from_seed(2);
    let bad_sig = sign_delete_request(&manifest.content_id, &stranger);
    assert_eq!(
        client.delete_content(&manifest.content_id, stranger.public(), &bad_sig.to_bytes()),
        Err(ProviderError::Unauthorized)
    );
    let sig = sign_delete_request(&manifest.content_id, &owner);
    assert!(client.delete_content(&manifest.content_id, owner.public(), &sig.to_bytes()).unwrap().deleted);
    assert_eq!(client.get_manifest(&manifest.content_id), Err(ProviderError::NotFound));
}

#[test]
fn provider_status_codes() {
    let s = start();
    let http = reqwest::blocking::Client::new();
    let missing = ContentId([0xab; 32]);
    let resp = http.get(format!("{}/content/{missing}/manifest", s.provider.url())).send().unwrap();
    assert_eq!(resp.status().as_u16(), 404);
    let body: serde_json::Value = resp.json().unwrap();
    assert_eq!(body["error"], "not_found");
    assert!(body["message"].is_string());

    let resp = http.get(format!("{}/content/nothex/manifest", s.provider.url())).send().unwrap();
    assert_eq!(resp.status().as_u16(), 400);
}

#[test]
fn unreachable_provider_is_unavailable() {
    let client = HttpProvider::new("127.0.0.1:9");
    assert!(matches!(client.get_manifest(&ContentId([0; 32])), Err(ProviderError::Unavailable(_))));
    let chain = RemoteChain::new("127.0.0.1:9");
    assert!(matches!(chain.tip(), Err(ChainError::Unavailable(_))));
}

#[test]
fn chain_api_round_trip() {
    let s = start();
    let chain = RemoteChain::new(&s.chain.url());
    let miner = KeyPair::from_seed(1);
    let tip = chain.mine_block(miner.address(), Some(1_600_000_000)).unwrap();
    assert_eq!(tip.height, 1);
    assert_eq!(chain.tip().unwrap(), tip);
    assert_eq!(chain.list_utxos(&miner.address()).unwrap().len(), 1);
    assert_eq!(chain.spendable_utxos(&miner.address()).unwrap()[0].amount, BLOCK_SUBSIDY);

    assert!(matches!(
        chain.mine_block(miner.address(), Some(1_500_000_000)),
        Err(ChainError::TimestampRegression { .. })
    ));
    assert!(matches!(
        chain.scan_data_outputs(0, 9),
        Err(ChainError::RangeOutOfBounds { .. })
    ));
}

#[test]
fn full_workflow_over_http() {
    let s = start();
    let alice = remote_wallet(&s, 1);
    let bob = remote_wallet(&s, 2);
    let node = RemoteChain::new(&s.chain.url());
    node.mine_block(alice.address(), None).unwrap();

    let doc = b"shared over the wire".to_vec();
    let receipt = alice.share_data(&doc, bob.public_key(), None).unwrap();
    node.mine_block(alice.address(), None).unwrap();
    assert_eq!(node.tx_height(&receipt.txid).unwrap(), Some(2));

    assert_eq!(bob.retrieve_data(&receipt.content_id).unwrap(), doc);
    assert_eq!(
        bob.custody().unwrap().query_access(&receipt.content_id, &bob.address()).unwrap(),
        AccessStatus::Granted
    );

    alice.revoke_access(&receipt.content_id, &bob.address(), true).unwrap();
    node.mine_block(alice.address(), None).unwrap();
    assert_eq!(
        bob.custody().unwrap().query_access(&receipt.content_id, &bob.address()).unwrap(),
        AccessStatus::Revoked
    );
    assert_eq!(bob.retrieve_data(&receipt.content_id), Err(WorkflowError::NotFound));
}

#[test]
fn rejected_tx_surfaces_chain_error() {
    let s = start();
    let alice = remote_wallet(&s, 1);
    let node = RemoteChain::new(&s.chain.url());
    node.mine_block(alice.address(), None).unwrap();

    let utxo = node.spendable_utxos(&alice.address()).unwrap()[0].clone();
    let key = KeyPair::from_seed(1);
    let mut tx = paidata_core::Transaction {
        inputs: vec![paidata_core::TxInput::unsigned(utxo.outpoint, *key.public())],
        outputs: vec![paidata_core::TxOutput::value(alice.address(), BLOCK_SUBSIDY)],
        lock_time: 0,
    };
    let digest = tx.signing_digest(0).unwrap();
    tx.inputs[0].signature = paidata_core::crypto::sign(&digest, &key).to_bytes().to_vec();
    node.submit_tx(&tx).unwrap();
    assert!(matches!(node.submit_tx(&tx), Err(ChainError::DoubleSpend(_))));
}
