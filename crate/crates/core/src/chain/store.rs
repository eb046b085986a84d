//! Append-only block file plus a rewritten mempool snapshot.
//!
//! Both files are sequences of frames: `u32 little-endian length || bytes`.

use std::fs::{self, File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::{Block, ChainError};
use crate::codec::{deserialize_tx, serialize_tx, Transaction};

const BLOCKS_FILE: &str = "blocks.dat";
const MEMPOOL_FILE: &str = "mempool.dat";

pub(crate) struct ChainStore {
    dir: PathBuf,
}

fn read_frames(path: &Path) -> Result<Vec<Vec<u8>>, ChainError> {
    let mut bytes = Vec::new();
    match File::open(path) {
        Ok(mut f) => {
            f.read_to_end(&mut bytes)?;
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    }
    let mut frames = Vec::new();
    let mut rest = bytes.as_slice();
    while !rest.is_empty() {
        if rest.len() < 4 {
            return Err(ChainError::Storage(format!("{} ends mid-frame", path.display())));
        }
        let len = u32::from_le_bytes(rest[..4].try_into().expect("4 bytes")) as usize;
        rest = &rest[4..];
        if rest.len() < len {
            return Err(ChainError::Storage(format!("{} ends mid-frame", path.display())));
        }
        frames.push(rest[..len].to_vec());
        rest = &rest[len..];
    }
    Ok(frames)
}

fn frame(out: &mut Vec<u8>, bytes: &[u8]) {
    out.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
    out.extend_from_slice(bytes);
}

impl ChainStore {
    pub(crate) fn open(dir: &Path) -> Result<Self, ChainError> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub(crate) fn read_blocks(&self) -> Result<Vec<Block>, ChainError> {
        read_frames(&self.dir.join(BLOCKS_FILE))?
            .iter()
            .map(|raw| Block::deserialize(raw).map_err(|e| ChainError::Storage(format!("bad block: {e}"))))
            .collect()
    }

    pub(crate) fn append_block(&self, block: &Block) -> Result<(), ChainError> {
        let mut buf = Vec::new();
        frame(&mut buf, &block.serialize());
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.dir.join(BLOCKS_FILE))?;
        file.write_all(&buf)?;
        file.sync_data()?;
        Ok(())
    }

    pub(crate) fn read_mempool(&self) -> Result<Vec<Transaction>, ChainError> {
        read_frames(&self.dir.join(MEMPOOL_FILE))?
            .iter()
            .map(|raw| deserialize_tx(raw).map_err(|e| ChainError::Storage(format!("bad mempool tx: {e}"))))
            .collect()
    }

    pub(crate) fn write_mempool<'a>(&self, txs: impl Iterator<Item = &'a Transaction>) -> Result<(), ChainError> {
        let mut buf = Vec::new();
        for tx in txs {
            frame(&mut buf, &serialize_tx(tx)?);
        }
        let tmp = self.dir.join(format!("{MEMPOOL_FILE}.tmp"));
        fs::write(&tmp, &buf)?;
        fs::rename(&tmp, self.dir.join(MEMPOOL_FILE))?;
        Ok(())
    }
}
