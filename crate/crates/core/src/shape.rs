use alloc::vec::Vec;
use core::fmt;

use crate::error::{input_err, resource_err, Result};

/// Default cap on the number of amplitudes a dense state may hold (2^26).
pub const DEFAULT_DENSE_CAP: u64 = 1 << 26;

/// Default cap on the number of GHZ labels `d^n` that may be enumerated.
pub const DEFAULT_LABEL_CAP: u64 = 1_000_000;

/// Qudit dimension `d` and photon count `n`.
///
/// Fixes the composite space of `2n` qudits. Basis indices are mixed-radix
/// numbers with the spatial qudit of photon 0 most significant and the OAM
/// qudit of photon `n - 1` least significant.
///
/// Two shapes compare equal when `d` and `n` agree; the caps are policy and
/// do not change the space.
#[derive(Clone, Copy, Debug)]
pub struct SystemShape {
    d: u32,
    n: usize,
    dense_cap: u64,
    label_cap: u64,
}

impl SystemShape {
    pub fn new(d: u32, n: usize) -> Result<Self> {
        Self::with_caps(d, n, DEFAULT_DENSE_CAP, DEFAULT_LABEL_CAP)
    }

    pub fn with_caps(d: u32, n: usize, dense_cap: u64, label_cap: u64) -> Result<Self> {
        if d < 2 {
            return Err(input_err!("qudit dimension must be at least 2, got {d}"));
        }
        if n < 2 {
            return Err(input_err!("photon count must be at least 2, got {n}"));
        }
        let qudits = u32::try_from(2 * n).map_err(|_| resource_err!("photon count {n} too large"))?;
        if u64::from(d).checked_pow(qudits).is_none() {
            return Err(resource_err!(
                "basis of {d}^{qudits} states does not fit a 64-bit index"
            ));
        }
        Ok(Self { d, n, dense_cap, label_cap })
    }

    #[inline]
    pub fn d(&self) -> u32 {
        self.d
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dense_cap(&self) -> u64 {
        self.dense_cap
    }

    pub fn label_cap(&self) -> u64 {
        self.label_cap
    }

    /// Number of qudits in the composite space (`2n`).
    #[inline]
    pub fn qudits(&self) -> usize {
        2 * self.n
    }

    /// `d^(2n)`, the full dimension of the composite space.
    pub fn dimension(&self) -> u64 {
        u64::from(self.d).pow(self.qudits() as u32)
    }

    /// `d^n`, the dimension of one register.
    pub fn register_dimension(&self) -> u64 {
        u64::from(self.d).pow(self.n as u32)
    }

    /// Number of GHZ labels, which equals `d^n`.
    pub fn label_count(&self) -> u64 {
        self.register_dimension()
    }

    pub fn dense_feasible(&self) -> bool {
        self.dimension() <= self.dense_cap
    }

    pub(crate) fn check_dense(&self) -> Result<usize> {
        let dim = self.dimension();
        if dim > self.dense_cap {
            return Err(resource_err!(
                "dense state needs {dim} amplitudes, cap is {}",
                self.dense_cap
            ));
        }
        usize::try_from(dim).map_err(|_| resource_err!("dense state of {dim} amplitudes"))
    }

    pub(crate) fn check_labels(&self) -> Result<u64> {
        let count = self.label_count();
        if count > self.label_cap {
            return Err(resource_err!(
                "{count} labels exceed the enumeration cap {}",
                self.label_cap
            ));
        }
        Ok(count)
    }

    /// Place value of qudit `q` (0-based over the `2n` qudits).
    #[inline]
    pub(crate) fn stride(&self, q: usize) -> u64 {
        u64::from(self.d).pow((self.qudits() - 1 - q) as u32)
    }

    /// Split a basis index into (spatial levels, OAM levels).
    pub fn decompose(&self, index: u64) -> (Vec<u32>, Vec<u32>) {
        let mut levels = alloc::vec![0u32; self.qudits()];
        let d = u64::from(self.d);
        let mut rest = index;
        for slot in levels.iter_mut().rev() {
            *slot = (rest % d) as u32;
            rest /= d;
        }
        let oam = levels.split_off(self.n);
        (levels, oam)
    }

    /// Basis index of the tuple `(spatial; oam)`.
    pub fn compose(&self, spatial: &[u32], oam: &[u32]) -> Result<u64> {
        self.check_levels(spatial, "spatial")?;
        self.check_levels(oam, "oam")?;
        Ok(self.compose_unchecked(spatial.iter().chain(oam)))
    }

    pub(crate) fn compose_unchecked<'a>(&self, levels: impl Iterator<Item = &'a u32>) -> u64 {
        let d = u64::from(self.d);
        levels.fold(0u64, |acc, &l| acc * d + u64::from(l))
    }

    /// Index of a register tuple within its own `d^n` register space.
    pub(crate) fn register_index(&self, levels: &[u32]) -> u64 {
        self.compose_unchecked(levels.iter())
    }

    pub(crate) fn check_levels(&self, levels: &[u32], what: &str) -> Result<()> {
        if levels.len() != self.n {
            return Err(input_err!(
                "{what} tuple has {} entries, expected {}",
                levels.len(),
                self.n
            ));
        }
        if let Some(bad) = levels.iter().find(|&&l| l >= self.d) {
            return Err(input_err!("{what} level {bad} out of range for d = {}", self.d));
        }
        Ok(())
    }
}

impl PartialEq for SystemShape {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.n == other.n
    }
}

impl Eq for SystemShape {}

impl fmt::Display for SystemShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d={}, n={}", self.d, self.n)
    }
}
