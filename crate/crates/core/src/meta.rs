//! The meta file that accompanies every jash: widths, the loop cap `s`,
//! execution mode, and the optional data-bundle description.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bits::{Bits, MAX_WIDTH};
use crate::digest::Digest;

/// Execution mode requested by the researcher.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecMode {
    /// Every valid arg is computed and aggregated.
    Full,
    /// The lowest res wins.
    Optimal,
}

/// Sidecar metadata for a jash function.
///
/// The canonical JSON form carries exactly these field names; unknown keys
/// are rejected. `dnf_sentinel` may be omitted in a meta file, in which case
/// it defaults to the all-ones m-bit string.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JashMeta {
    pub jash_id: String,
    pub n: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_arg: Option<u64>,
    pub m: u8,
    pub s: u64,
    pub mode: ExecMode,
    pub importance: f64,
    pub dnf_sentinel: Bits,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_sha256: Option<Digest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_record_size: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetaError {
    #[error("arg width n={n} out of range 1..={MAX_WIDTH}")]
    ArgWidth { n: u8 },
    #[error("res width m={m} out of range 1..={MAX_WIDTH}")]
    ResWidth { m: u8 },
    #[error("loop cap s must be at least 1")]
    LoopCap,
    #[error("importance {importance} outside [0, 1]")]
    Importance { importance: f64 },
    #[error("max_arg {max_arg} must satisfy 0 < max_arg < 2^{n}")]
    MaxArg { max_arg: u64, n: u8 },
    #[error("dnf_sentinel has {got} bits, expected m={m}")]
    SentinelWidth { got: usize, m: u8 },
    #[error("data_record_size must be at least 1")]
    RecordSize,
    #[error("meta file is not valid JSON: {0}")]
    Json(String),
}

impl<'de> serde::Deserialize<'de> for JashMeta {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = MetaFile::deserialize(deserializer)?;
        JashMeta::try_from(raw).map_err(serde::de::Error::custom)
    }
}

/// Raw file shape: like [`JashMeta`] but with `dnf_sentinel` optional.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaFile {
    jash_id: String,
    n: u8,
    #[serde(default)]
    max_arg: Option<u64>,
    m: u8,
    s: u64,
    mode: ExecMode,
    importance: f64,
    #[serde(default)]
    dnf_sentinel: Option<Bits>,
    #[serde(default)]
    data_sha256: Option<Digest>,
    #[serde(default)]
    data_record_size: Option<u32>,
}

impl JashMeta {
    /// Checks every field invariant.
    pub fn validate(&self) -> Result<(), MetaError> {
        if self.n == 0 || usize::from(self.n) > MAX_WIDTH {
            return Err(MetaError::ArgWidth { n: self.n });
        }
        if self.m == 0 || usize::from(self.m) > MAX_WIDTH {
            return Err(MetaError::ResWidth { m: self.m });
        }
        if self.s == 0 {
            return Err(MetaError::LoopCap);
        }
        if !(0.0..=1.0).contains(&self.importance) {
            return Err(MetaError::Importance {
                importance: self.importance,
            });
        }
        if let Some(max_arg) = self.max_arg {
            if max_arg == 0 || max_arg >= 1u64 << self.n {
                return Err(MetaError::MaxArg {
                    max_arg,
                    n: self.n,
                });
            }
        }
        if self.dnf_sentinel.len() != usize::from(self.m) {
            return Err(MetaError::SentinelWidth {
                got: self.dnf_sentinel.len(),
                m: self.m,
            });
        }
        if self.data_record_size == Some(0) {
            return Err(MetaError::RecordSize);
        }
        Ok(())
    }

    /// Parses and validates the canonical JSON form. An omitted
    /// `dnf_sentinel` defaults to all ones; unknown keys are rejected.
    pub fn from_json(text: &str) -> Result<Self, MetaError> {
        let raw: MetaFile =
            serde_json::from_str(text).map_err(|e| MetaError::Json(alloc::format!("{e}")))?;
        JashMeta::try_from(raw)
    }

    /// Canonical JSON: fixed field order, absent optionals omitted.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("meta serializes")
    }

    /// Number of valid args: `max_arg + 1` when bounded, else `2^n`.
    pub fn arg_count(&self) -> u64 {
        match self.max_arg {
            Some(max) => max + 1,
            None => 1u64 << self.n,
        }
    }

    /// Largest valid arg value.
    pub fn arg_limit(&self) -> u64 {
        self.arg_count() - 1
    }

    pub fn is_valid_arg_value(&self, value: u64) -> bool {
        value <= self.arg_limit()
    }
}

impl TryFrom<MetaFile> for JashMeta {
    type Error = MetaError;

    fn try_from(raw: MetaFile) -> Result<Self, MetaError> {
        if raw.m == 0 || usize::from(raw.m) > MAX_WIDTH {
            return Err(MetaError::ResWidth { m: raw.m });
        }
        let meta = JashMeta {
            jash_id: raw.jash_id,
            n: raw.n,
            max_arg: raw.max_arg,
            m: raw.m,
            s: raw.s,
            mode: raw.mode,
            importance: raw.importance,
            dnf_sentinel: raw
                .dnf_sentinel
                .unwrap_or_else(|| Bits::ones(usize::from(raw.m)).unwrap()),
            data_sha256: raw.data_sha256,
            data_record_size: raw.data_record_size,
        };
        meta.validate()?;
        Ok(meta)
    }
}

/// Slice bounds of the data window for one arg: records of `record_size`
/// bytes indexed linearly by arg value.
pub fn window_range(
    arg_value: u64,
    record_size: u32,
    bundle_len: u64,
) -> Option<(u64, u64)> {
    let start = arg_value.checked_mul(u64::from(record_size))?;
    let end = start.checked_add(u64::from(record_size))?;
    if end > bundle_len {
        return None;
    }
    Some((start, end))
}

/// Data bundle circulated alongside a jash.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataBundle {
    pub bytes: Vec<u8>,
    pub sha256: Digest,
}

impl DataBundle {
    pub fn new(bytes: Vec<u8>) -> Self {
        let sha256 = Digest::of(&bytes);
        DataBundle { bytes, sha256 }
    }

    /// Size in bytes (the symbol `d`).
    pub fn size(&self) -> u64 {
        self.bytes.len() as u64
    }
}
