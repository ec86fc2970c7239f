//! Protocol unitaries: the path-control gate between the two DOFs of one
//! photon and the `d`-dimensional QFT on the spatial qudits.
//!
//! Gates act on one qudit's index axis at a time; no `d^(2n)` operator is
//! ever built. Output keeps the representation of the input.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{input_err, Result};
use crate::state::{Representation, StateVector};

/// `d x d` QFT with entry `(j, z) = exp(2 pi i z j / d) / sqrt(d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QftMatrix {
    d: u32,
    entries: Vec<Complex64>,
}

impl QftMatrix {
    pub fn new(d: u32) -> Result<Self> {
        if d < 2 {
            return Err(input_err!("QFT dimension must be at least 2, got {d}"));
        }
        let scale = 1.0 / libm::sqrt(f64::from(d));
        let dd = u64::from(d);
        let entries = (0..dd)
            .flat_map(|j| (0..dd).map(move |z| (j * z) % dd))
            .map(|m| Complex64::cis(2.0 * PI * m as f64 / f64::from(d)) * scale)
            .collect();
        Ok(Self { d, entries })
    }

    pub fn dim(&self) -> u32 {
        self.d
    }

    /// Coefficient of output level `row` for input level `col`.
    #[inline]
    pub fn entry(&self, row: u32, col: u32) -> Complex64 {
        self.entries[(row * self.d + col) as usize]
    }

    /// Image of the basis vector `|z>`.
    pub fn column(&self, z: u32) -> Vec<Complex64> {
        (0..self.d).map(|j| self.entry(j, z)).collect()
    }

    /// Conjugate transpose (the inverse transform).
    pub fn adjoint(&self) -> Self {
        let d = self.d;
        let entries = (0..d)
            .flat_map(|r| (0..d).map(move |c| (r, c)))
            .map(|(r, c)| self.entry(c, r).conj())
            .collect();
        Self { d, entries }
    }

    /// Largest entrywise deviation of `M^dagger M` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let d = self.d;
        let mut worst = 0.0f64;
        for a in 0..d {
            for b in 0..d {
                let dot: Complex64 = (0..d).map(|j| self.entry(j, a).conj() * self.entry(j, b)).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).norm());
            }
        }
        worst
    }
}

pub fn qft_matrix(d: u32) -> Result<QftMatrix> {
    QftMatrix::new(d)
}

/// Apply a `d x d` matrix to qudit `q` of the composite space.
fn apply_single_qudit(s: &StateVector, q: usize, m: &QftMatrix) -> StateVector {
    let shape = s.shape();
    let d = u64::from(shape.d());
    let stride = shape.stride(q);
    match s.dense_slice() {
        Some(amps) => {
            let mut out = alloc::vec![Complex64::zero(); amps.len()];
            let block = stride * d;
            let mut column = alloc::vec![Complex64::zero(); d as usize];
            for base in (0..amps.len() as u64).step_by(block as usize) {
                for offset in 0..stride {
                    let start = base + offset;
                    for (z, slot) in column.iter_mut().enumerate() {
                        *slot = amps[(start + z as u64 * stride) as usize];
                    }
                    if column.iter().all(|a| a.is_zero()) {
                        continue;
                    }
                    for j in 0..d {
                        let acc: Complex64 = column
                            .iter()
                            .enumerate()
                            .map(|(z, a)| m.entry(j as u32, z as u32) * a)
                            .sum();
                        out[(start + j * stride) as usize] = acc;
                    }
                }
            }
            StateVector::from_parts_dense(shape, out)
        }
        None => {
            let mut out: BTreeMap<u64, Complex64> = BTreeMap::new();
            for (index, amp) in s.nonzeros() {
                let z = (index / stride) % d;
                let base = index - z * stride;
                for j in 0..d {
                    *out.entry(base + j * stride).or_insert_with(Complex64::zero) +=
                        m.entry(j as u32, z as u32) * amp;
                }
            }
            StateVector::from_parts_sparse(shape, out)
        }
    }
}

/// QFT on the spatial qudit of every photon; the OAM register is untouched.
pub fn apply_qft_spatial_all(s: &StateVector) -> StateVector {
    let m = QftMatrix::new(s.shape().d()).expect("shape guarantees d >= 2");
    apply_spatial_all(s, &m)
}

/// Inverse of [`apply_qft_spatial_all`].
pub fn apply_inverse_qft_spatial_all(s: &StateVector) -> StateVector {
    let m = QftMatrix::new(s.shape().d()).expect("shape guarantees d >= 2").adjoint();
    apply_spatial_all(s, &m)
}

fn apply_spatial_all(s: &StateVector, m: &QftMatrix) -> StateVector {
    (0..s.shape().n()).fold(s.clone(), |acc, photon| apply_single_qudit(&acc, photon, m))
}

/// Path control on one photon: `|j1>^S |j2>^O -> |j1>^S |j1 + j2 mod d>^O`.
pub fn path_control(s: &StateVector, photon: usize) -> Result<StateVector> {
    let shape = s.shape();
    if photon >= shape.n() {
        return Err(input_err!(
            "photon index {photon} out of range for n = {}",
            shape.n()
        ));
    }
    let d = u64::from(shape.d());
    let spatial_stride = shape.stride(photon);
    let oam_stride = shape.stride(shape.n() + photon);
    let target = |index: u64| {
        let j1 = (index / spatial_stride) % d;
        let j2 = (index / oam_stride) % d;
        index - j2 * oam_stride + ((j1 + j2) % d) * oam_stride
    };
    Ok(match s.representation() {
        Representation::Dense => {
            let amps = s.dense_slice().expect("dense");
            let mut out = alloc::vec![Complex64::zero(); amps.len()];
            for (i, &a) in amps.iter().enumerate() {
                out[target(i as u64) as usize] = a;
            }
            StateVector::from_parts_dense(shape, out)
        }
        Representation::Sparse => {
            let out = s.nonzeros().map(|(i, a)| (target(i), a)).collect();
            StateVector::from_parts_sparse(shape, out)
        }
    })
}

/// Path control on every photon. The per-photon gates touch distinct OAM
/// qudits and commute.
pub fn apply_path_control_all(s: &StateVector) -> StateVector {
    apply_path_control_in_order(s, 0..s.shape().n()).expect("indices in range")
}

/// Path control applied photon by photon in the given order.
pub fn apply_path_control_in_order<I>(s: &StateVector, order: I) -> Result<StateVector>
where
    I: IntoIterator<Item = usize>,
{
    order
        .into_iter()
        .try_fold(s.clone(), |acc, photon| path_control(&acc, photon))
}
