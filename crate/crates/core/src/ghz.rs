//! The GHZ family `|psi_x^k>` on the spatial register, the OAM auxiliary
//! state and the hyperentangled inputs of the protocol.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;

use crate::error::{input_err, Error, Result};
use crate::shape::SystemShape;
use crate::state::StateVector;

/// Names one of the `d^n` GHZ states: parity offsets `x` (length `n - 1`)
/// and phase index `k`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GhzLabel {
    pub x: Vec<u32>,
    pub k: u32,
}

impl GhzLabel {
    pub fn new(x: Vec<u32>, k: u32) -> Self {
        Self { x, k }
    }

    pub fn validate(&self, shape: &SystemShape) -> Result<()> {
        if self.x.len() + 1 != shape.n() {
            return Err(input_err!(
                "label has {} parity entries, expected {}",
                self.x.len(),
                shape.n() - 1
            ));
        }
        let d = shape.d();
        if let Some(bad) = self.x.iter().chain(core::iter::once(&self.k)).find(|&&v| v >= d) {
            return Err(input_err!("label entry {bad} out of range for d = {d}"));
        }
        Ok(())
    }

    /// Spatial tuple `(j, j+x_1, ..., j+x_{n-1}) mod d`.
    pub fn support_tuple(&self, d: u32, j: u32) -> Vec<u32> {
        core::iter::once(j)
            .chain(self.x.iter().map(|&x| (j + x) % d))
            .collect()
    }
}

/// `x_1,...,x_{n-1}:k`
impl fmt::Display for GhzLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.x.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ":{}", self.k)
    }
}

impl FromStr for GhzLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (xs, k) = s
            .split_once(':')
            .ok_or_else(|| input_err!("label {s:?} must look like x1,x2,...:k"))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| input_err!("label entry {t:?} is not a level"))
        };
        let x = if xs.trim().is_empty() {
            Vec::new()
        } else {
            xs.split(',').map(parse).collect::<Result<_>>()?
        };
        Ok(Self { x, k: parse(k)? })
    }
}

/// `(1/sqrt d) sum_j e^{2 pi i j k / d} |j, j+x_1, ..., j+x_{n-1}>` on the
/// spatial register, OAM register all zeros.
pub fn ghz_spatial(shape: SystemShape, label: &GhzLabel) -> Result<StateVector> {
    label.validate(&shape)?;
    let d = shape.d();
    let amp = 1.0 / libm::sqrt(f64::from(d));
    let zeros = alloc::vec![0u32; shape.n()];
    let terms = (0..d).map(|j| {
        let phase = (u64::from(j) * u64::from(label.k)) % u64::from(d);
        let spatial = label.support_tuple(d, j);
        let index = shape.compose_unchecked(spatial.iter().chain(&zeros));
        (index, Complex64::cis(2.0 * PI * phase as f64 / f64::from(d)) * amp)
    });
    StateVector::from_indexed(shape, terms)
}

/// `(1/sqrt d) sum_j |j, j, ..., j>` on the OAM register, spatial all zeros.
pub fn oam_auxiliary(shape: SystemShape) -> StateVector {
    let zeros = alloc::vec![0u32; shape.n()];
    let terms = (0..shape.d()).map(|j| {
        let oam = alloc::vec![j; shape.n()];
        (shape.compose_unchecked(zeros.iter().chain(&oam)), Complex64::new(1.0, 0.0))
    });
    StateVector::from_indexed(shape, terms).expect("d nonzero terms")
}

/// `|psi_x^k> (x) |phi_0>`.
pub fn hyper_initial(shape: SystemShape, label: &GhzLabel) -> Result<StateVector> {
    StateVector::tensor(&ghz_spatial(shape, label)?, &oam_auxiliary(shape))
}

/// All `d^n` labels, `x` lexicographic then `k`.
pub fn all_labels(shape: SystemShape) -> Result<Vec<GhzLabel>> {
    let count = shape.check_labels()?;
    let d = shape.d();
    let mut out = Vec::with_capacity(count as usize);
    let mut x = alloc::vec![0u32; shape.n() - 1];
    loop {
        for k in 0..d {
            out.push(GhzLabel::new(x.clone(), k));
        }
        // odometer increment, last entry fastest
        let mut pos = x.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            x[pos] += 1;
            if x[pos] < d {
                break;
            }
            x[pos] = 0;
        }
    }
}
