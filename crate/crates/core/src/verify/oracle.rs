//! Naive dense reference simulation.
//!
//! Shares no state-manipulation code with the optimized pipeline: it keeps an
//! explicit `d^(2n)` amplitude array, evaluates the GHZ and auxiliary
//! formulas pointwise, applies path control as a full basis permutation and
//! the spatial QFT as one `d^n x d^n` matrix, and sums probabilities
//! directly.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{resource_err, Result};
use crate::ghz::GhzLabel;
use crate::shape::SystemShape;

/// Outcome probabilities from the dense oracle, keyed by level tuples.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OracleOutcomes {
    pub oam: BTreeMap<Vec<u32>, f64>,
    pub spatial: BTreeMap<Vec<u32>, f64>,
    /// Keyed by (spatial levels, OAM levels).
    pub joint: BTreeMap<(Vec<u32>, Vec<u32>), f64>,
}

struct Digits {
    d: usize,
    len: usize,
}

impl Digits {
    fn split(&self, mut index: usize) -> Vec<usize> {
        let mut out = alloc::vec![0; self.len];
        for i in (0..self.len).rev() {
            out[i] = index % self.d;
            index /= self.d;
        }
        out
    }

    fn join(&self, digits: &[usize]) -> usize {
        let mut index = 0;
        for &x in digits {
            index = index * self.d + x;
        }
        index
    }
}

pub fn brute_force_oracle(shape: SystemShape, label: &GhzLabel) -> Result<OracleOutcomes> {
    label.validate(&shape)?;
    if shape.dimension() > shape.dense_cap() {
        return Err(resource_err!(
            "dense oracle needs {} amplitudes, cap is {}",
            shape.dimension(),
            shape.dense_cap()
        ));
    }
    let d = shape.d() as usize;
    let n = shape.n();
    let full = Digits { d, len: 2 * n };
    let reg = Digits { d, len: n };
    let dim = shape.dimension() as usize;
    let reg_dim = shape.register_dimension() as usize;
    let inv_sqrt_d = 1.0 / libm::sqrt(d as f64);

    // |psi_x^k> (x) |phi_0>, evaluated at every basis tuple
    let mut amps = alloc::vec![Complex64::new(0.0, 0.0); dim];
    for (index, amp) in amps.iter_mut().enumerate() {
        let digits = full.split(index);
        let (sp, oam) = digits.split_at(n);
        let j = sp[0];
        let on_ghz = (1..n).all(|i| sp[i] == (j + label.x[i - 1] as usize) % d);
        let on_aux = oam.iter().all(|&o| o == oam[0]);
        if on_ghz && on_aux {
            let angle = 2.0 * PI * (j as f64) * f64::from(label.k) / d as f64;
            *amp = Complex64::new(libm::cos(angle), libm::sin(angle)) * inv_sqrt_d * inv_sqrt_d;
        }
    }

    // path control on every photon, as one permutation of the basis
    let permutation: Vec<usize> = (0..dim)
        .map(|index| {
            let mut digits = full.split(index);
            for p in 0..n {
                digits[n + p] = (digits[n + p] + digits[p]) % d;
            }
            full.join(&digits)
        })
        .collect();
    let mut permuted = alloc::vec![Complex64::new(0.0, 0.0); dim];
    for (index, &target) in permutation.iter().enumerate() {
        permuted[target] = amps[index];
    }

    // QFT on the whole spatial register as a single matrix
    let scale = libm::pow(d as f64, -(n as f64) / 2.0);
    let mut qft = alloc::vec![Complex64::new(0.0, 0.0); reg_dim * reg_dim];
    for row in 0..reg_dim {
        let r = reg.split(row);
        for col in 0..reg_dim {
            let c = reg.split(col);
            let dot: usize = r.iter().zip(&c).map(|(a, b)| a * b).sum();
            let angle = 2.0 * PI * dot as f64 / d as f64;
            qft[row * reg_dim + col] = Complex64::new(libm::cos(angle), libm::sin(angle)) * scale;
        }
    }
    let mut final_amps = alloc::vec![Complex64::new(0.0, 0.0); dim];
    for col in 0..reg_dim {
        for o in 0..reg_dim {
            let a = permuted[col * reg_dim + o];
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for row in 0..reg_dim {
                final_amps[row * reg_dim + o] += qft[row * reg_dim + col] * a;
            }
        }
    }

    let mut out = OracleOutcomes::default();
    for (index, a) in final_amps.iter().enumerate() {
        let p = a.norm_sqr();
        if p <= crate::SUPPORT_EPS {
            continue;
        }
        let sp: Vec<u32> = reg.split(index / reg_dim).into_iter().map(|v| v as u32).collect();
        let oam: Vec<u32> = reg.split(index % reg_dim).into_iter().map(|v| v as u32).collect();
        *out.spatial.entry(sp.clone()).or_insert(0.0) += p;
        *out.oam.entry(oam.clone()).or_insert(0.0) += p;
        out.joint.insert((sp, oam), p);
    }
    Ok(out)
}
