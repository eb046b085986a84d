use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use paidata_core::chain::{ChainAccess, TipInfo};
use paidata_core::codec::deserialize_tx;
use paidata_core::http::{chain_router, provider_router, serve_blocking, HttpProvider, RemoteChain};
use paidata_core::provider::ProviderApi;
use paidata_core::workflows::claim::{attach_claim, detach_claim};
use paidata_core::{
    Address, ChainError, ChainParams, CustodyLedger, KeyPair, ProviderConfig, ProviderStore, SharedChain,
    Wallet,
};
use serde_json::json;

use crate::config::{CliConfig, ProviderTarget};
use crate::error::CliError;
use crate::{wallet_file, Command, CustodyCmd, DataCmd, NodeCmd, Output, ProviderCmd, WalletCmd};

const DEFAULT_CHAIN_DIR: &str = "paidata-chain";
const DEFAULT_PROVIDER_DIR: &str = "paidata-provider";

enum ChainHandle {
    Remote(RemoteChain),
    Local(SharedChain),
}

impl ChainHandle {
    fn open(cfg: &CliConfig) -> Result<Self, CliError> {
        if let Some(url) = &cfg.node {
            Ok(ChainHandle::Remote(RemoteChain::new(url)))
        } else if let Some(dir) = &cfg.chain_dir {
            Ok(ChainHandle::Local(SharedChain::open(dir, ChainParams::default())?))
        } else {
            Err(CliError::config("no chain configured: pass --node or --chain-dir"))
        }
    }

    fn access(&self) -> Arc<dyn ChainAccess> {
        match self {
            ChainHandle::Remote(c) => Arc::new(c.clone()),
            ChainHandle::Local(c) => Arc::new(c.clone()),
        }
    }

    fn mine(&self, to: Address, timestamp: Option<u64>) -> Result<TipInfo, ChainError> {
        match self {
            ChainHandle::Remote(c) => c.mine_block(to, timestamp),
            ChainHandle::Local(c) => c.mine_block(to, timestamp),
        }
    }
}

fn wallet_path(cfg: &CliConfig) -> Result<&Path, CliError> {
    cfg.wallet
        .as_deref()
        .ok_or_else(|| CliError::config("no wallet configured: pass --wallet or set PAIDATA_WALLET"))
}

fn load_key(cfg: &CliConfig) -> Result<KeyPair, CliError> {
    wallet_file::load(wallet_path(cfg)?)
}

fn providers(cfg: &CliConfig) -> Result<Vec<Arc<dyn ProviderApi>>, CliError> {
    cfg.providers
        .iter()
        .map(|target| -> Result<Arc<dyn ProviderApi>, CliError> {
            Ok(match target {
                ProviderTarget::Http(url) => Arc::new(HttpProvider::new(url)),
                ProviderTarget::Local(dir) => Arc::new(ProviderStore::open(ProviderConfig {
                    data_dir: dir.clone(),
                    capacity_bytes: cfg.provider_capacity,
                    chunk_size: cfg.chunk_size,
                })?),
            })
        })
        .collect()
}

fn open_wallet(cfg: &CliConfig) -> Result<(Wallet, ChainHandle), CliError> {
    let key = load_key(cfg)?;
    let chain = ChainHandle::open(cfg)?;
    let wallet = Wallet::new(key, chain.access(), providers(cfg)?).with_dust(cfg.dust);
    Ok((wallet, chain))
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

fn to_json<T: serde::Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("output types serialize")
}

fn announce(cfg: &CliConfig, role: &str, addr: std::net::SocketAddr) {
    let url = format!("http://{addr}");
    let mut stdout = std::io::stdout().lock();
    let _ = if cfg.json {
        writeln!(stdout, "{}", json!({ "role": role, "url": url }))
    } else {
        writeln!(stdout, "{role} listening on {url}")
    };
    let _ = stdout.flush();
}

fn init_logging() {
    let _ = tracing_subscriber::fmt().with_writer(std::io::stderr).try_init();
}

pub fn dispatch(cfg: &CliConfig, command: Command) -> Result<Option<Output>, CliError> {
    match command {
        Command::Node(cmd) => node(cfg, cmd),
        Command::Provider(cmd) => provider(cfg, cmd),
        Command::Wallet(cmd) => wallet(cfg, cmd).map(Some),
        Command::Data(cmd) => data(cfg, cmd),
        Command::Custody(cmd) => custody(cfg, cmd).map(Some),
    }
}

fn node(cfg: &CliConfig, cmd: NodeCmd) -> Result<Option<Output>, CliError> {
    match cmd {
        NodeCmd::Start { listen } => {
            init_logging();
            let dir = cfg.chain_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_CHAIN_DIR));
            let chain = SharedChain::open(&dir, ChainParams::default())?;
            serve_blocking(chain_router(chain), listen, |addr| announce(cfg, "node", addr))
                .map_err(|e| CliError::io(listen.to_string(), e))?;
            Ok(None)
        }
        NodeCmd::Mine { to, timestamp, count } => {
            let to = match to {
                Some(a) => a,
                None => load_key(cfg)?.address(),
            };
            let chain = ChainHandle::open(cfg)?;
            let mut mined = Vec::new();
            for i in 0..count {
                mined.push(chain.mine(to, if i == 0 { timestamp } else { None })?);
            }
            let text = mined
                .iter()
                .map(|t| format!("block {} {} at {}", t.height, t.hash, t.timestamp))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Some(Output::new(json!({ "reward_to": to, "blocks": mined }), text)))
        }
        NodeCmd::Scan { from, to } => {
            let chain = ChainHandle::open(cfg)?.access();
            let to = match to {
                Some(t) => t,
                None => chain.tip()?.height,
            };
            let records = chain.scan_data_outputs(from, to)?;
            let text = records
                .iter()
                .map(|r| {
                    format!(
                        "{}:{} {} {} {}",
                        r.height, r.tx_index, r.txid, r.envelope.op, r.envelope.content_id
                    )
                })
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Some(Output::new(to_json(&records), text)))
        }
        NodeCmd::Submit { tx } => {
            let raw = hex::decode(tx.trim()).map_err(|_| CliError::config("--tx is not hex"))?;
            let tx = deserialize_tx(&raw).map_err(ChainError::from)?;
            let txid = ChainHandle::open(cfg)?.access().submit_tx(&tx)?;
            Ok(Some(Output::new(json!({ "txid": txid }), txid.to_hex())))
        }
        NodeCmd::Tip => {
            let tip = ChainHandle::open(cfg)?.access().tip()?;
            let text = format!("height {} hash {} timestamp {}", tip.height, tip.hash, tip.timestamp);
            Ok(Some(Output::new(to_json(&tip), text)))
        }
    }
}

fn provider(cfg: &CliConfig, cmd: ProviderCmd) -> Result<Option<Output>, CliError> {
    match cmd {
        ProviderCmd::Start {
            listen,
            data_dir,
            capacity,
            max_upload_bytes,
        } => {
            init_logging();
            let data_dir = data_dir
                .or_else(|| cfg.provider_dir.clone())
                .unwrap_or_else(|| PathBuf::from(DEFAULT_PROVIDER_DIR));
            let store = ProviderStore::open(ProviderConfig {
                data_dir,
                capacity_bytes: capacity.or(cfg.provider_capacity),
                chunk_size: cfg.chunk_size,
            })?;
            serve_blocking(provider_router(Arc::new(store), max_upload_bytes), listen, |addr| {
                announce(cfg, "provider", addr)
            })
            .map_err(|e| CliError::io(listen.to_string(), e))?;
            Ok(None)
        }
    }
}

fn wallet(cfg: &CliConfig, cmd: WalletCmd) -> Result<Output, CliError> {
    match cmd {
        WalletCmd::New { seed, force } => {
            let key = KeyPair::new(seed);
            let file = wallet_file::WalletFile::from_keypair(&key);
            match &cfg.wallet {
                Some(path) => {
                    wallet_file::save(path, &key, force)?;
                    let text = format!("address {}\npublic_key {}\nsaved to {}", file.address, file.public_key, path.display());
                    Ok(Output::new(
                        json!({ "address": file.address, "public_key": file.public_key, "path": path }),
                        text,
                    ))
                }
                None => {
                    let text = format!(
                        "address {}\npublic_key {}\nsecret_key {}\n(not saved: pass --wallet to write a key file)",
                        file.address, file.public_key, file.secret_key
                    );
                    Ok(Output::new(to_json(&file), text))
                }
            }
        }
        WalletCmd::Address => {
            let key = load_key(cfg)?;
            let text = format!("address {}\npublic_key {}", key.address(), key.public().to_hex());
            Ok(Output::new(
                json!({ "address": key.address(), "public_key": key.public() }),
                text,
            ))
        }
        WalletCmd::Balance => {
            let (wallet, _) = open_wallet(cfg)?;
            let balance = wallet.balance()?;
            Ok(Output::new(
                json!({ "address": wallet.address(), "balance": balance }),
                balance.to_string(),
            ))
        }
    }
}

fn with_claim(plaintext: Vec<u8>, claimant: Option<String>, key: &KeyPair) -> Result<Vec<u8>, CliError> {
    match claimant {
        Some(name) => Ok(attach_claim(&plaintext, &name, key).map_err(paidata_core::WorkflowError::from)?),
        None => Ok(plaintext),
    }
}

fn data(cfg: &CliConfig, cmd: DataCmd) -> Result<Option<Output>, CliError> {
    match cmd {
        DataCmd::Store { file, claimant, payment } => {
            let (wallet, _) = open_wallet(cfg)?;
            let plaintext = with_claim(read_file(&file)?, claimant, wallet.keypair())?;
            let receipt = wallet.store_data(&plaintext, payment.get())?;
            let text = format!("content_id {}\ntxid {}\nprovider {}", receipt.content_id, receipt.txid, receipt.provider);
            Ok(Some(Output::new(to_json(&receipt), text)))
        }
        DataCmd::Share {
            file,
            to,
            claimant,
            payment,
        } => {
            let (wallet, _) = open_wallet(cfg)?;
            let plaintext = with_claim(read_file(&file)?, claimant, wallet.keypair())?;
            let receipt = wallet.share_data(&plaintext, &to, payment.get())?;
            let mut json = to_json(&receipt);
            json["recipient"] = to_json(&to.address());
            let text = format!(
                "content_id {}\ntxid {}\nprovider {}\nrecipient {}",
                receipt.content_id,
                receipt.txid,
                receipt.provider,
                to.address()
            );
            Ok(Some(Output::new(json, text)))
        }
        DataCmd::Retrieve { id, out, raw } => {
            let (wallet, _) = open_wallet(cfg)?;
            let plaintext = wallet.retrieve_data(&id)?;
            let (claim, document) = match (raw, detach_claim(&plaintext)) {
                (false, Some(parsed)) => {
                    let (claim, doc) = parsed.map_err(paidata_core::WorkflowError::from)?;
                    let verified = claim.verify(doc);
                    (Some(json!({ "claimant": claim.claimant, "public_key": claim.public_key, "verified": verified })), doc)
                }
                _ => (None, plaintext.as_slice()),
            };
            match out {
                Some(path) => {
                    std::fs::write(&path, document).map_err(|e| CliError::io(&path, e))?;
                    let mut text = format!("wrote {} bytes to {}", document.len(), path.display());
                    if let Some(c) = &claim {
                        text.push_str(&format!("\nclaim by {} (verified: {})", c["claimant"], c["verified"]));
                    }
                    Ok(Some(Output::new(
                        json!({ "content_id": id, "bytes": document.len(), "out": path, "claim": claim }),
                        text,
                    )))
                }
                None if cfg.json => Ok(Some(Output::new(
                    json!({ "content_id": id, "bytes": document.len(), "data_hex": hex::encode(document), "claim": claim }),
                    "",
                ))),
                None => {
                    let mut stdout = std::io::stdout().lock();
                    stdout
                        .write_all(document)
                        .and_then(|_| stdout.flush())
                        .map_err(|e| CliError::io("<stdout>", e))?;
                    Ok(None)
                }
            }
        }
        DataCmd::Revoke { id, addr, delete, force } => {
            let (wallet, _) = open_wallet(cfg)?;
            let receipt = if force {
                wallet.revoke_unchecked(&id, &addr, delete)?
            } else {
                wallet.revoke_access(&id, &addr, delete)?
            };
            let mut text = format!("txid {}\nrevoked {} from {}", receipt.txid, receipt.recipient, receipt.content_id);
            for d in &receipt.deletions {
                match &d.error {
                    Some(err) => text.push_str(&format!("\n{}: delete failed: {err}", d.provider)),
                    None => text.push_str(&format!("\n{}: deleted {}", d.provider, d.deleted)),
                }
            }
            Ok(Some(Output::new(to_json(&receipt), text)))
        }
    }
}

fn ledger(cfg: &CliConfig) -> Result<CustodyLedger, CliError> {
    let records = ChainHandle::open(cfg)?.access().scan_all()?;
    Ok(CustodyLedger::rebuild(&records)?)
}

fn custody(cfg: &CliConfig, cmd: CustodyCmd) -> Result<Output, CliError> {
    match cmd {
        CustodyCmd::History { id } => {
            let ledger = ledger(cfg)?;
            let history = ledger.history(&id)?;
            let text = history
                .iter()
                .map(|h| {
                    let subject = h.event.subject.map(|s| s.to_hex()).unwrap_or_else(|| "-".into());
                    format!(
                        "{}:{} {} {} -> {} {:?}",
                        h.event.height, h.event.tx_index, h.event.op, h.event.actor, subject, h.effect
                    )
                })
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Output::new(
                json!({ "content_id": id, "owner": ledger.owner(&id)?, "events": history }),
                text,
            ))
        }
        CustodyCmd::Access { id, addr } => {
            let addr = match addr {
                Some(a) => a,
                None => load_key(cfg)?.address(),
            };
            let status = ledger(cfg)?.query_access(&id, &addr)?;
            Ok(Output::new(
                json!({ "content_id": id, "address": addr, "status": status }),
                status.to_string(),
            ))
        }
        CustodyCmd::Proof { id } => {
            let proof = ledger(cfg)?.proof_of_existence(&id)?;
            let text = format!("height {} timestamp {} txid {}", proof.height, proof.timestamp, proof.txid);
            let mut json = to_json(&proof);
            json["content_id"] = to_json(&id);
            Ok(Output::new(json, text))
        }
    }
}

