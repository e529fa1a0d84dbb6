//! Content-addressed document store and the proof-of-existence registry.
//!
//! The store plays the role of an off-chain file network: documents are
//! addressed by their SHA-256 digest and only the digest is anchored in
//! protocol state. The registry records when a digest was first seen.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::env::Tx;
use crate::error::{Error, Result};
use crate::hash::{sha256, ContentHash};
use crate::types::{Address, Timestamp};

pub const DEFAULT_MAX_CONTENT: usize = 16 * 1024 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoERecord {
    pub hash: ContentHash,
    pub first_seen: Timestamp,
    pub submitter: Address,
}

/// Append-only map from content hash to its first notarization.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoeRegistry {
    records: BTreeMap<ContentHash, PoERecord>,
}

impl PoeRegistry {
    /// Registers `hash` if unseen; otherwise returns the existing record untouched.
    pub fn notarize(&mut self, tx: &mut Tx, hash: ContentHash) -> PoERecord {
        if let Some(existing) = self.records.get(&hash) {
            return *existing;
        }
        let record = PoERecord {
            hash,
            first_seen: tx.now(),
            submitter: tx.sender(),
        };
        self.records.insert(hash, record);
        tx.emit(
            "PoE",
            [
                ("hash", hash.to_string()),
                ("first_seen", record.first_seen.to_string()),
                ("submitter", record.submitter.to_string()),
            ],
        );
        record
    }

    pub fn record(&self, hash: &ContentHash) -> Option<&PoERecord> {
        self.records.get(hash)
    }

    /// `(true, first_seen)` for notarized hashes, `(false, 0)` otherwise.
    pub fn verify_existence(&self, hash: &ContentHash) -> (bool, Timestamp) {
        match self.records.get(hash) {
            Some(r) => (true, r.first_seen),
            None => (false, Timestamp(0)),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Local content-addressed blob store.
///
/// Blobs are reference counted so cloning the store is cheap.
#[derive(Debug, Clone)]
pub struct ContentStore {
    max_size: usize,
    blobs: BTreeMap<ContentHash, Arc<[u8]>>,
}

impl Default for ContentStore {
    fn default() -> Self {
        ContentStore::new(DEFAULT_MAX_CONTENT)
    }
}

impl ContentStore {
    pub fn new(max_size: usize) -> Self {
        ContentStore {
            max_size,
            blobs: BTreeMap::new(),
        }
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    pub fn put(&mut self, content: &[u8]) -> Result<ContentHash> {
        if content.len() > self.max_size {
            return Err(Error::ContentTooLarge {
                size: content.len(),
                max: self.max_size,
            });
        }
        let hash = sha256(content);
        self.blobs.entry(hash).or_insert_with(|| Arc::from(content));
        Ok(hash)
    }

    pub fn get(&self, hash: &ContentHash) -> Result<&[u8]> {
        self.blobs.get(hash).map(|b| &b[..]).ok_or(Error::NotFound)
    }

    pub fn contains(&self, hash: &ContentHash) -> bool {
        self.blobs.contains_key(hash)
    }

    pub fn len(&self) -> usize {
        self.blobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blobs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ContentHash, &[u8])> {
        self.blobs.iter().map(|(h, b)| (h, &b[..]))
    }

    /// Writes every blob to `dir/<hex digest>`.
    pub fn export_dir(&self, dir: &Path) -> io::Result<usize> {
        fs::create_dir_all(dir)?;
        for (hash, blob) in &self.blobs {
            fs::write(dir.join(hex::encode(hash.as_bytes())), blob)?;
        }
        Ok(self.blobs.len())
    }

    /// Loads files named by their hex digest, rejecting any whose content
    /// does not hash to its name. Other files are ignored.
    pub fn import_dir(&mut self, dir: &Path) -> io::Result<usize> {
        let mut loaded = 0;
        for entry in fs::read_dir(dir)? {
            let entry = entry?;
            let name = entry.file_name();
            let Some(name) = name.to_str() else { continue };
            let Ok(expected) = format!("0x{name}").parse::<ContentHash>() else {
                continue;
            };
            let bytes = fs::read(entry.path())?;
            let got = self
                .put(&bytes)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
            if got != expected {
                return Err(io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("{name}: content hashes to {got}"),
                ));
            }
            loaded += 1;
        }
        Ok(loaded)
    }
}

impl PartialEq for ContentStore {
    fn eq(&self, other: &Self) -> bool {
        self.max_size == other.max_size && self.blobs.keys().eq(other.blobs.keys())
    }
}
