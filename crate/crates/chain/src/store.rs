//! Content-addressed artifact store: the simulated fileshare.
//!
//! Payloads are keyed by their SHA-256 digest. The store is in-memory with
//! an optional directory backing (`store/<first2hex>/<fullhex>`, digests in
//! lowercase hex). Every fetch re-verifies the digest before returning.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use pnpchain_core::jash::DataError;
use pnpchain_core::meta::{window_range, JashMeta};
use pnpchain_core::{Bits, Digest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    JashSource,
    Meta,
    Data,
    ResultSet,
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("payload is empty")]
    EmptyPayload,
    #[error("artifact {0} not found")]
    NotFound(Digest),
    #[error("artifact {id} is corrupt: content hashes to {actual}")]
    Corrupt { id: Digest, actual: Digest },
    #[error("data bundle digest {actual} does not match the meta's {expected}")]
    ChecksumMismatch { expected: Digest, actual: Digest },
    #[error("meta has no data_record_size; windowed access is undefined")]
    MissingRecordSize,
    #[error("meta has no data_sha256; there is no bundle to window")]
    MissingChecksum,
    #[error("window for arg value {arg_value} is outside the {bundle_len}-byte bundle")]
    WindowOutOfRange { arg_value: u64, bundle_len: u64 },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Append-only content-addressed storage. Puts of identical content are
/// idempotent.
#[derive(Debug, Default)]
pub struct ArtifactStore {
    dir: Option<PathBuf>,
    items: BTreeMap<Digest, (ArtifactKind, Vec<u8>)>,
}

impl ArtifactStore {
    pub fn in_memory() -> Self {
        ArtifactStore::default()
    }

    /// Directory-backed store; existing artifacts are picked up lazily.
    pub fn at_dir(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(ArtifactStore {
            dir: Some(dir),
            items: BTreeMap::new(),
        })
    }

    fn path_of(dir: &Path, id: &Digest) -> PathBuf {
        let hex = id.to_hex();
        dir.join(&hex[..2]).join(&hex)
    }

    pub fn put(&mut self, kind: ArtifactKind, payload: &[u8]) -> Result<Digest, StoreError> {
        if payload.is_empty() {
            return Err(StoreError::EmptyPayload);
        }
        let id = Digest::of(payload);
        if let Some(dir) = &self.dir {
            let path = Self::path_of(dir, &id);
            if !path.exists() {
                fs::create_dir_all(path.parent().unwrap())?;
                fs::write(&path, payload)?;
            }
        }
        self.items
            .entry(id)
            .or_insert_with(|| (kind, payload.to_vec()));
        Ok(id)
    }

    /// Number of distinct artifacts cached in memory.
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, id: &Digest) -> bool {
        self.items.contains_key(id)
            || self
                .dir
                .as_deref()
                .is_some_and(|d| Self::path_of(d, id).exists())
    }

    /// Fetches and re-verifies a payload.
    pub fn get(&self, id: &Digest) -> Result<Vec<u8>, StoreError> {
        if let Some((_, payload)) = self.items.get(id) {
            // In-memory copies were hashed on put; verify anyway so a
            // corrupted backing file can never hide behind the cache.
            return verify_payload(*id, payload.clone());
        }
        let Some(dir) = &self.dir else {
            return Err(StoreError::NotFound(*id));
        };
        let path = Self::path_of(dir, id);
        match fs::read(&path) {
            Ok(payload) => verify_payload(*id, payload),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Err(StoreError::NotFound(*id)),
            Err(e) => Err(e.into()),
        }
    }

    /// The `record_size` bytes at offset `value(arg) * record_size`, after
    /// checking the bundle against the meta's checksum.
    pub fn get_window(
        &self,
        data_id: &Digest,
        arg: &Bits,
        meta: &JashMeta,
    ) -> Result<Vec<u8>, StoreError> {
        let record_size = meta.data_record_size.ok_or(StoreError::MissingRecordSize)?;
        let expected = meta.data_sha256.ok_or(StoreError::MissingChecksum)?;
        let bundle = self.get(data_id)?;
        let actual = Digest::of(&bundle);
        if actual != expected {
            return Err(StoreError::ChecksumMismatch { expected, actual });
        }
        let arg_value = arg.value();
        let (start, end) = window_range(arg_value, record_size, bundle.len() as u64).ok_or(
            StoreError::WindowOutOfRange {
                arg_value,
                bundle_len: bundle.len() as u64,
            },
        )?;
        Ok(bundle[start as usize..end as usize].to_vec())
    }
}

fn verify_payload(id: Digest, payload: Vec<u8>) -> Result<Vec<u8>, StoreError> {
    let actual = Digest::of(&payload);
    if actual != id {
        return Err(StoreError::Corrupt { id, actual });
    }
    Ok(payload)
}

/// Window provider backed by a fetched-and-verified bundle, for executing a
/// published jash against store data.
pub struct StoredBundle {
    bytes: Option<Vec<u8>>,
    record_size: Option<u32>,
}

impl StoredBundle {
    /// Resolves the meta's bundle out of the store once, up front.
    pub fn fetch(
        store: &ArtifactStore,
        meta: &JashMeta,
        data_id: Option<&Digest>,
    ) -> Result<Self, StoreError> {
        let bytes = match (data_id, meta.data_sha256) {
            (Some(id), Some(expected)) => {
                let bundle = store.get(id)?;
                let actual = Digest::of(&bundle);
                if actual != expected {
                    return Err(StoreError::ChecksumMismatch { expected, actual });
                }
                Some(bundle)
            }
            _ => None,
        };
        Ok(StoredBundle {
            bytes,
            record_size: meta.data_record_size,
        })
    }

    pub fn from_bytes(bytes: Option<Vec<u8>>, record_size: Option<u32>) -> Self {
        StoredBundle { bytes, record_size }
    }
}

impl pnpchain_core::jash::DataWindowProvider for StoredBundle {
    fn window(&self, arg_value: u64) -> Result<Option<Vec<u8>>, DataError> {
        let Some(bytes) = &self.bytes else {
            return Ok(None);
        };
        match self.record_size {
            None => Ok(Some(bytes.clone())),
            Some(record_size) => {
                let (start, end) = window_range(arg_value, record_size, bytes.len() as u64)
                    .ok_or(DataError::WindowOutOfRange {
                        arg_value,
                        record_size,
                        bundle_len: bytes.len() as u64,
                    })?;
                Ok(Some(bytes[start as usize..end as usize].to_vec()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn put_is_content_addressed_and_idempotent() {
        let mut store = ArtifactStore::in_memory();
        let id = store.put(ArtifactKind::Data, b"abc").unwrap();
        assert_eq!(
            id.to_hex(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        let again = store.put(ArtifactKind::Data, b"abc").unwrap();
        assert_eq!(id, again);
        assert_eq!(store.len(), 1);
        assert_eq!(store.get(&id).unwrap(), b"abc");
    }

    #[test]
    fn empty_payload_is_rejected() {
        let mut store = ArtifactStore::in_memory();
        assert!(matches!(
            store.put(ArtifactKind::Data, b""),
            Err(StoreError::EmptyPayload)
        ));
    }

    #[test]
    fn directory_layout_and_reload() {
        let dir = tempfile::tempdir().unwrap();
        let id = {
            let mut store = ArtifactStore::at_dir(dir.path()).unwrap();
            store.put(ArtifactKind::JashSource, b"output 1").unwrap()
        };
        let hex = id.to_hex();
        let path = dir.path().join(&hex[..2]).join(&hex);
        assert!(path.exists());
        // A fresh handle on the same directory serves the artifact.
        let store = ArtifactStore::at_dir(dir.path()).unwrap();
        assert!(store.contains(&id));
        assert_eq!(store.get(&id).unwrap(), b"output 1");
    }

    #[test]
    fn tampered_backing_file_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = ArtifactStore::at_dir(dir.path()).unwrap();
        let id = store.put(ArtifactKind::Data, &[7u8; 64]).unwrap();
        let hex = id.to_hex();
        let path = dir.path().join(&hex[..2]).join(&hex);
        let mut bytes = fs::read(&path).unwrap();
        bytes[10] ^= 0x01;
        fs::write(&path, &bytes).unwrap();
        let fresh = ArtifactStore::at_dir(dir.path()).unwrap();
        assert!(matches!(fresh.get(&id), Err(StoreError::Corrupt { .. })));
    }

    fn windowed_meta(bundle: &[u8], record_size: u32) -> JashMeta {
        let mut meta = pnpchain_core::workloads::collatz_meta(1);
        meta.data_sha256 = Some(Digest::of(bundle));
        meta.data_record_size = Some(record_size);
        meta
    }

    #[test]
    fn windows_are_linear_records() {
        let bundle: Vec<u8> = (0u8..64).collect();
        let mut store = ArtifactStore::in_memory();
        let id = store.put(ArtifactKind::Data, &bundle).unwrap();
        let meta = windowed_meta(&bundle, 16);
        let arg = Bits::from_value(2, 16).unwrap();
        let window = store.get_window(&id, &arg, &meta).unwrap();
        assert_eq!(window, (32u8..48).collect::<Vec<_>>());

        let arg = Bits::from_value(4, 16).unwrap();
        assert!(matches!(
            store.get_window(&id, &arg, &meta),
            Err(StoreError::WindowOutOfRange { arg_value: 4, .. })
        ));
    }

    #[test]
    fn window_checksum_mismatch_is_detected() {
        let bundle: Vec<u8> = (0u8..64).collect();
        let mut tampered = bundle.clone();
        tampered[0] ^= 0x80;
        let mut store = ArtifactStore::in_memory();
        let id = store.put(ArtifactKind::Data, &tampered).unwrap();
        // Meta still names the original bundle.
        let meta = windowed_meta(&bundle, 16);
        let arg = Bits::from_value(0, 16).unwrap();
        assert!(matches!(
            store.get_window(&id, &arg, &meta),
            Err(StoreError::ChecksumMismatch { .. })
        ));
    }
}
