//! Pair-space encoding for the cellular-docking workload: peptide/receptor
//! index pairs map bijectively onto n-bit args.

use crate::bits::Bits;

/// Outcome code for a binding pair.
pub const CODE_BINDS: &str = "01";
/// Outcome code for a non-binding pair.
pub const CODE_NO_BIND: &str = "00";
/// Outcome code when the matcher did not finish (also the docking meta's
/// dnf sentinel).
pub const CODE_DNF: &str = "10";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DockingError {
    #[error("peptide and receptor counts must be at least 1")]
    EmptySpace,
    #[error("pair space of {pairs} exceeds the 63-bit arg limit")]
    SpaceTooLarge { pairs: u128 },
    #[error("pair index ({n_p}, {n_r}) outside the {peptides}x{receptors} space")]
    IndexOutOfRange {
        n_p: u64,
        n_r: u64,
        peptides: u64,
        receptors: u64,
    },
    #[error("arg value {value} is outside the pair space of {pairs}")]
    ValueOutOfSpace { value: u64, pairs: u64 },
}

/// The space of peptide-receptor pairs and its arg width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DockingSpace {
    peptides: u64,
    receptors: u64,
}

impl DockingSpace {
    pub fn new(peptides: u64, receptors: u64) -> Result<Self, DockingError> {
        if peptides == 0 || receptors == 0 {
            return Err(DockingError::EmptySpace);
        }
        let pairs = u128::from(peptides) * u128::from(receptors);
        if pairs > 1 << 63 {
            return Err(DockingError::SpaceTooLarge { pairs });
        }
        Ok(DockingSpace {
            peptides,
            receptors,
        })
    }

    pub fn peptides(&self) -> u64 {
        self.peptides
    }

    pub fn receptors(&self) -> u64 {
        self.receptors
    }

    pub fn pair_count(&self) -> u64 {
        self.peptides * self.receptors
    }

    /// Smallest width with `2^n >= pair_count`, at least 1.
    pub fn arg_width(&self) -> u8 {
        let pairs = self.pair_count();
        if pairs <= 2 {
            1
        } else {
            (64 - (pairs - 1).leading_zeros()) as u8
        }
    }

    /// `b = (n_r mod N_r + n_p * N_r)`, left-zero-padded to the arg width.
    pub fn encode(&self, n_p: u64, n_r: u64) -> Result<Bits, DockingError> {
        if n_p >= self.peptides || n_r >= self.receptors {
            return Err(DockingError::IndexOutOfRange {
                n_p,
                n_r,
                peptides: self.peptides,
                receptors: self.receptors,
            });
        }
        let value = n_r % self.receptors + n_p * self.receptors;
        Ok(Bits::from_value(value, usize::from(self.arg_width())).expect("width fits"))
    }

    /// Inverse of [`encode`](Self::encode).
    pub fn decode(&self, b: &Bits) -> Result<(u64, u64), DockingError> {
        let value = b.value();
        if value >= self.pair_count() {
            return Err(DockingError::ValueOutOfSpace {
                value,
                pairs: self.pair_count(),
            });
        }
        Ok((value / self.receptors, value % self.receptors))
    }
}
