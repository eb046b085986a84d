//! Settings merged from a TOML file and command-line flags.
//!
//! ```toml
//! chain_dir = "chain"                       # local chain data directory
//! node = "http://127.0.0.1:7000"            # remote chain node (wins over chain_dir)
//! providers = ["http://127.0.0.1:7100"]     # or "file:<dir>" for an in-process store
//! wallet = "alice.json"
//! dust = 1000
//! chunk_size = 262144
//! provider_dir = "provider-data"            # used by `provider start`
//! provider_capacity = 1073741824
//! ```
//!
//! Relative paths in the file are resolved against the file's directory;
//! relative paths on the command line against the working directory.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    chain_dir: Option<PathBuf>,
    node: Option<String>,
    #[serde(default)]
    providers: Vec<String>,
    wallet: Option<PathBuf>,
    dust: Option<u64>,
    chunk_size: Option<usize>,
    provider_dir: Option<PathBuf>,
    provider_capacity: Option<u64>,
}

#[derive(Debug, Clone)]
pub enum ProviderTarget {
    Http(String),
    Local(PathBuf),
}

#[derive(Debug, Clone)]
pub struct CliConfig {
    pub chain_dir: Option<PathBuf>,
    pub node: Option<String>,
    pub providers: Vec<ProviderTarget>,
    pub wallet: Option<PathBuf>,
    pub dust: u64,
    pub chunk_size: usize,
    pub provider_dir: Option<PathBuf>,
    pub provider_capacity: Option<u64>,
    pub json: bool,
}

/// Flag values that override the file.
#[derive(Debug, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub chain_dir: Option<PathBuf>,
    pub node: Option<String>,
    pub providers: Vec<String>,
    pub wallet: Option<PathBuf>,
    pub dust: Option<u64>,
    pub chunk_size: Option<usize>,
    pub json: bool,
}

fn absolute(base: &Path, path: PathBuf) -> PathBuf {
    if path.is_absolute() {
        path
    } else {
        base.join(path)
    }
}

fn parse_target(base: &Path, raw: &str) -> ProviderTarget {
    match raw.strip_prefix("file:") {
        Some(dir) => ProviderTarget::Local(absolute(base, PathBuf::from(dir))),
        None => ProviderTarget::Http(raw.to_owned()),
    }
}

impl CliConfig {
    pub fn load(flags: Overrides) -> Result<Self, CliError> {
        let cwd = std::env::current_dir().map_err(|e| CliError::io(".", e))?;
        let (file, file_base) = match &flags.config {
            Some(path) => {
                let path = absolute(&cwd, path.clone());
                let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                let parsed: FileConfig = toml::from_str(&text)
                    .map_err(|e| CliError::config(format!("{}: {}", path.display(), e.message())))?;
                let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| cwd.clone());
                (parsed, base)
            }
            None => (FileConfig::default(), cwd.clone()),
        };

        let providers = if flags.providers.is_empty() {
            file.providers.iter().map(|p| parse_target(&file_base, p)).collect()
        } else {
            flags.providers.iter().map(|p| parse_target(&cwd, p)).collect()
        };

        let chunk_size = flags
            .chunk_size
            .or(file.chunk_size)
            .unwrap_or(paidata_core::provider::DEFAULT_CHUNK_SIZE);
        if chunk_size == 0 {
            return Err(CliError::config("chunk_size must be positive"));
        }

        Ok(Self {
            chain_dir: flags
                .chain_dir
                .map(|p| absolute(&cwd, p))
                .or_else(|| file.chain_dir.map(|p| absolute(&file_base, p))),
            node: flags.node.or(file.node),
            providers,
            wallet: flags
                .wallet
                .map(|p| absolute(&cwd, p))
                .or_else(|| file.wallet.map(|p| absolute(&file_base, p))),
            dust: flags.dust.or(file.dust).unwrap_or(paidata_core::workflows::DEFAULT_DUST),
            chunk_size,
            provider_dir: file.provider_dir.map(|p| absolute(&file_base, p)),
            provider_capacity: file.provider_capacity,
            json: flags.json,
        })
    }
}
