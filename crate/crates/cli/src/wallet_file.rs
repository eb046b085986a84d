//! Wallet key file: `{"secret_key": hex, "public_key": hex, "address": hex}`.

use std::path::Path;

use paidata_core::KeyPair;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Serialize, Deserialize)]
pub struct WalletFile {
    pub secret_key: String,
    pub public_key: String,
    pub address: String,
}

impl WalletFile {
    pub fn from_keypair(key: &KeyPair) -> Self {
        Self {
            secret_key: hex::encode(key.secret_bytes()),
            public_key: key.public().to_hex(),
            address: key.address().to_hex(),
        }
    }

    pub fn keypair(&self) -> Result<KeyPair, CliError> {
        let secret = hex::decode(self.secret_key.trim())
            .map_err(|_| CliError::config("wallet secret_key is not hex"))?;
        let key = KeyPair::from_secret_bytes(&secret).map_err(|e| CliError::config(format!("wallet: {e}")))?;
        if key.public().to_hex() != self.public_key.trim().to_ascii_lowercase() {
            return Err(CliError::config("wallet public_key does not match secret_key"));
        }
        Ok(key)
    }
}

pub fn load(path: &Path) -> Result<KeyPair, CliError> {
    if !path.exists() {
        return Err(CliError::config(format!(
            "wallet file {} does not exist (create one with `paidata wallet new`)",
            path.display()
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file: WalletFile =
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    file.keypair()
}

pub fn save(path: &Path, key: &KeyPair, overwrite: bool) -> Result<(), CliError> {
    if path.exists() && !overwrite {
        return Err(CliError::config(format!(
            "wallet file {} already exists (pass --force to replace it)",
            path.display()
        )));
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let text = serde_json::to_string_pretty(&WalletFile::from_keypair(key)).expect("wallet file serializes");
    write_private(path, text.as_bytes()).map_err(|e| CliError::io(path, e))
}

#[cfg(unix)]
fn write_private(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    use std::io::Write;
    use std::os::unix::fs::OpenOptionsExt;
    let mut f = std::fs::OpenOptions::new()
        .write(true)
        .create(true)
        .truncate(true)
        .mode(0o600)
        .open(path)?;
    f.write_all(bytes)
}

#[cfg(not(unix))]
fn write_private(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    std::fs::write(path, bytes)
}
