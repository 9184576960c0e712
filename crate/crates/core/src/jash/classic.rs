//! The builtin SHA-256 jash used for back-compatible "classic" blocks.

use crate::bits::Bits;
use crate::digest::Digest;
use crate::meta::JashMeta;

use super::interp::{check_arg, ExecError, ExecResult, HaltReason};

/// A jash whose result is the leading `m` bits of
/// `SHA-256(header ‖ arg_bytes)`. It bypasses the AST interpreter but honors
/// the same execute contract; one evaluation costs one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ClassicProblem {
    pub header: Digest,
}

impl ClassicProblem {
    pub fn new(header: Digest) -> Self {
        ClassicProblem { header }
    }

    /// Full digest for a nonce; acceptance counts its leading zero bits.
    pub fn digest_for(&self, arg: &Bits) -> Digest {
        Digest::of_parts(&[self.header.as_bytes(), &arg.to_bytes()])
    }

    pub fn execute(&self, meta: &JashMeta, arg: &Bits) -> Result<ExecResult, ExecError> {
        check_arg(meta, arg)?;
        let digest = self.digest_for(arg);
        let res = digest_prefix_bits(&digest, usize::from(meta.m));
        let halted_by = if res == meta.dnf_sentinel {
            HaltReason::Sentinel
        } else {
            HaltReason::OutputStmt
        };
        Ok(ExecResult {
            res,
            steps_used: 1,
            halted_by,
        })
    }
}

/// The leading `m` bits of a digest, MSB first.
pub fn digest_prefix_bits(digest: &Digest, m: usize) -> Bits {
    let mut value = 0u64;
    for i in 0..m {
        let bit = digest.0[i / 8] >> (7 - i % 8) & 1;
        value = value << 1 | u64::from(bit);
    }
    Bits::from_value(value, m).expect("m validated by the meta")
}
