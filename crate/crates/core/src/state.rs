//! Multi-qudit state vectors over the spatial and OAM registers.
//!
//! A [`StateVector`] is immutable once built. It is stored either as a dense
//! array of `d^(2n)` amplitudes or as a sparse ordered map from basis index to
//! amplitude. Constructors pick the representation automatically (sparse when
//! the number of nonzeros is at most `d * n^2`); gates keep the representation
//! of their input.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{input_err, Error, Result};
use crate::shape::SystemShape;
use crate::ZERO_EPS;

/// Rank-one acceptance tolerance for [`StateVector::factor_across_registers`].
pub const FACTOR_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Dense,
    Sparse,
}

#[derive(Clone, Debug)]
enum Storage {
    Dense(Vec<Complex64>),
    Sparse(BTreeMap<u64, Complex64>),
}

#[derive(Clone, Debug)]
pub struct StateVector {
    shape: SystemShape,
    storage: Storage,
}

impl StateVector {
    /// The computational basis state `|spatial; oam>`.
    pub fn basis_state(shape: SystemShape, spatial: &[u32], oam: &[u32]) -> Result<Self> {
        let index = shape.compose(spatial, oam)?;
        let mut map = BTreeMap::new();
        map.insert(index, Complex64::new(1.0, 0.0));
        Ok(Self::auto(shape, map))
    }

    /// Normalized superposition of `(spatial, oam, amplitude)` terms.
    ///
    /// Terms on the same tuple add coherently.
    pub fn superpose<'a, I>(shape: SystemShape, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a [u32], &'a [u32], Complex64)>,
    {
        let mut indexed = Vec::new();
        for (spatial, oam, amp) in terms {
            indexed.push((shape.compose(spatial, oam)?, amp));
        }
        if indexed.is_empty() {
            return Err(input_err!("superposition needs at least one term"));
        }
        Self::from_indexed(shape, indexed)
    }

    /// Normalized state from `(basis index, amplitude)` pairs.
    pub fn from_indexed<I>(shape: SystemShape, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, Complex64)>,
    {
        let dim = shape.dimension();
        let mut map: BTreeMap<u64, Complex64> = BTreeMap::new();
        for (index, amp) in terms {
            if index >= dim {
                return Err(input_err!("basis index {index} out of range ({dim} states)"));
            }
            *map.entry(index).or_insert_with(Complex64::zero) += amp;
        }
        let norm = libm::sqrt(map.values().map(|a| a.norm_sqr()).sum::<f64>());
        if !(norm > ZERO_EPS) {
            return Err(Error::Degenerate);
        }
        let map = map
            .into_iter()
            .map(|(i, a)| (i, a / norm))
            .filter(|(_, a)| a.norm() >= ZERO_EPS)
            .collect();
        Ok(Self::auto(shape, map))
    }

    /// Normalized state from a full dense amplitude array.
    pub fn from_dense(shape: SystemShape, amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = shape.check_dense()?;
        if amplitudes.len() != len {
            return Err(input_err!(
                "dense array has {} amplitudes, expected {len}",
                amplitudes.len()
            ));
        }
        let norm = libm::sqrt(amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>());
        if !(norm > ZERO_EPS) {
            return Err(Error::Degenerate);
        }
        let amplitudes = amplitudes.into_iter().map(|a| a / norm).collect();
        Ok(Self { shape, storage: Storage::Dense(amplitudes) })
    }

    fn auto(shape: SystemShape, map: BTreeMap<u64, Complex64>) -> Self {
        let sparse_limit = shape.d() as usize * shape.n() * shape.n();
        if map.len() > sparse_limit && shape.dense_feasible() {
            Self::dense_from_map(shape, &map)
        } else {
            Self { shape, storage: Storage::Sparse(map) }
        }
    }

    fn dense_from_map(shape: SystemShape, map: &BTreeMap<u64, Complex64>) -> Self {
        let mut amps = alloc::vec![Complex64::zero(); shape.dimension() as usize];
        for (&i, &a) in map {
            amps[i as usize] = a;
        }
        Self { shape, storage: Storage::Dense(amps) }
    }

    /// Wrap already-normalized data produced by a unitary gate.
    pub(crate) fn from_parts_dense(shape: SystemShape, amps: Vec<Complex64>) -> Self {
        Self { shape, storage: Storage::Dense(amps) }
    }

    pub(crate) fn from_parts_sparse(shape: SystemShape, mut map: BTreeMap<u64, Complex64>) -> Self {
        map.retain(|_, a| a.norm() >= ZERO_EPS);
        Self { shape, storage: Storage::Sparse(map) }
    }

    pub fn shape(&self) -> SystemShape {
        self.shape
    }

    pub fn representation(&self) -> Representation {
        match self.storage {
            Storage::Dense(_) => Representation::Dense,
            Storage::Sparse(_) => Representation::Sparse,
        }
    }

    pub(crate) fn dense_slice(&self) -> Option<&[Complex64]> {
        match &self.storage {
            Storage::Dense(v) => Some(v),
            Storage::Sparse(_) => None,
        }
    }

    /// Amplitude of basis index `index` (zero when absent or out of range).
    pub fn amplitude(&self, index: u64) -> Complex64 {
        match &self.storage {
            Storage::Dense(v) => v.get(index as usize).copied().unwrap_or_else(Complex64::zero),
            Storage::Sparse(m) => m.get(&index).copied().unwrap_or_else(Complex64::zero),
        }
    }

    pub fn amplitude_at(&self, spatial: &[u32], oam: &[u32]) -> Result<Complex64> {
        Ok(self.amplitude(self.shape.compose(spatial, oam)?))
    }

    /// Basis states with magnitude at least [`ZERO_EPS`], in index order.
    pub fn nonzeros(&self) -> NonZeros<'_> {
        match &self.storage {
            Storage::Dense(v) => NonZeros::Dense(v.iter().enumerate()),
            Storage::Sparse(m) => NonZeros::Sparse(m.iter()),
        }
    }

    pub fn nonzero_count(&self) -> usize {
        self.nonzeros().count()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.nonzeros().map(|(_, a)| a.norm_sqr()).sum()
    }

    /// `<a|b>`, conjugate-linear in `a`.
    pub fn inner_product(a: &Self, b: &Self) -> Result<Complex64> {
        if a.shape != b.shape {
            return Err(input_err!("shape mismatch: {} vs {}", a.shape, b.shape));
        }
        // iterate the sparser side
        let (first, second, swapped) = if a.nonzero_count() <= b.nonzero_count() {
            (a, b, false)
        } else {
            (b, a, true)
        };
        let sum: Complex64 = first
            .nonzeros()
            .map(|(i, x)| x.conj() * second.amplitude(i))
            .sum();
        Ok(if swapped { sum.conj() } else { sum })
    }

    /// `|<a|b>|^2`.
    pub fn fidelity(a: &Self, b: &Self) -> Result<f64> {
        Self::inner_product(a, b).map(|c| c.norm_sqr())
    }

    /// The same state multiplied by a global phase `e^{i theta}`.
    pub fn with_global_phase(&self, theta: f64) -> Self {
        let phase = Complex64::cis(theta);
        let storage = match &self.storage {
            Storage::Dense(v) => Storage::Dense(v.iter().map(|a| a * phase).collect()),
            Storage::Sparse(m) => Storage::Sparse(m.iter().map(|(&i, a)| (i, a * phase)).collect()),
        };
        Self { shape: self.shape, storage }
    }

    pub fn to_representation(&self, target: Representation) -> Result<Self> {
        match (&self.storage, target) {
            (Storage::Dense(_), Representation::Dense) | (Storage::Sparse(_), Representation::Sparse) => {
                Ok(self.clone())
            }
            (Storage::Sparse(m), Representation::Dense) => {
                self.shape.check_dense()?;
                Ok(Self::dense_from_map(self.shape, m))
            }
            (Storage::Dense(_), Representation::Sparse) => Ok(Self {
                shape: self.shape,
                storage: Storage::Sparse(self.nonzeros().collect()),
            }),
        }
    }

    /// Split a basis index into (spatial register index, OAM register index).
    #[inline]
    pub fn split_index(&self, index: u64) -> (u64, u64) {
        let reg = self.shape.register_dimension();
        (index / reg, index % reg)
    }

    /// Product of a spatial-register state and an OAM-register state.
    ///
    /// `spatial` must be supported on OAM level tuple all-zero and `oam` on the
    /// all-zero spatial tuple, which is how standalone register states are
    /// represented.
    pub fn tensor(spatial: &Self, oam: &Self) -> Result<Self> {
        if spatial.shape != oam.shape {
            return Err(input_err!("shape mismatch: {} vs {}", spatial.shape, oam.shape));
        }
        let shape = spatial.shape;
        let reg = shape.register_dimension();
        let left: Vec<(u64, Complex64)> = spatial.nonzeros().collect();
        let right: Vec<(u64, Complex64)> = oam.nonzeros().collect();
        if left.iter().any(|&(i, _)| i % reg != 0) {
            return Err(input_err!("spatial factor has support on a nonzero OAM tuple"));
        }
        if right.iter().any(|&(i, _)| i >= reg) {
            return Err(input_err!("OAM factor has support on a nonzero spatial tuple"));
        }
        let terms = left
            .iter()
            .flat_map(|&(r, a)| right.iter().map(move |&(c, b)| (r + c, a * b)));
        Self::from_indexed(shape, terms)
    }

    /// Factor the state as `spatial (x) oam` if its Schmidt rank across the
    /// register bipartition is one.
    ///
    /// The test computes the largest singular value of the `d^n x d^n`
    /// amplitude matrix by alternating power iteration and accepts when
    /// `1 - sigma_max^2 <= 1e-9`. The OAM factor is phase-fixed so that its
    /// first nonzero amplitude is real and positive; the remaining global
    /// phase goes to the spatial factor. Both factors are returned as
    /// standalone register states (other register all zeros).
    pub fn factor_across_registers(&self) -> Option<(Self, Self)> {
        let reg = self.shape.register_dimension();
        let entries: Vec<(u64, u64, Complex64)> = self
            .nonzeros()
            .map(|(i, a)| (i / reg, i % reg, a))
            .collect();
        let &(pivot_row, _, _) = entries
            .iter()
            .max_by(|x, y| x.2.norm_sqr().total_cmp(&y.2.norm_sqr()))?;

        // v starts as the pivot row; u, v are unit vectors with s ~ u (x) v.
        let mut v: BTreeMap<u64, Complex64> = entries
            .iter()
            .filter(|e| e.0 == pivot_row)
            .map(|&(_, c, a)| (c, a))
            .collect();
        normalize_map(&mut v)?;
        let mut u = BTreeMap::new();
        let mut sigma_sqr = 0.0;
        for _ in 0..64 {
            u.clear();
            for &(r, c, a) in &entries {
                if let Some(vc) = v.get(&c) {
                    *u.entry(r).or_insert_with(Complex64::zero) += a * vc.conj();
                }
            }
            normalize_map(&mut u)?;
            let mut next_v: BTreeMap<u64, Complex64> = BTreeMap::new();
            for &(r, c, a) in &entries {
                if let Some(ur) = u.get(&r) {
                    *next_v.entry(c).or_insert_with(Complex64::zero) += a * ur.conj();
                }
            }
            let estimate = next_v.values().map(|x| x.norm_sqr()).sum::<f64>();
            normalize_map(&mut next_v)?;
            v = next_v;
            let settled = (estimate - sigma_sqr).abs() <= 1e-15;
            sigma_sqr = estimate;
            if settled {
                break;
            }
        }
        let total = self.norm_sqr();
        if total - sigma_sqr > FACTOR_TOL * total {
            return None;
        }

        // overlap = <u (x) v | s>, so s ~ overlap * u (x) v
        let overlap: Complex64 = entries
            .iter()
            .filter_map(|&(r, c, a)| Some(u.get(&r)?.conj() * v.get(&c)?.conj() * a))
            .sum();
        let first_v = v.values().find(|x| x.norm() >= ZERO_EPS).copied()?;
        let v_phase = first_v / first_v.norm();
        let u_phase = overlap / overlap.norm() * v_phase;
        let spatial = u.into_iter().map(|(r, x)| (r * reg, x * u_phase));
        let oam = v.into_iter().map(|(c, x)| (c, x / v_phase));
        Some((
            Self::from_indexed(self.shape, spatial).ok()?,
            Self::from_indexed(self.shape, oam).ok()?,
        ))
    }
}

fn normalize_map(map: &mut BTreeMap<u64, Complex64>) -> Option<()> {
    let norm = libm::sqrt(map.values().map(|x| x.norm_sqr()).sum::<f64>());
    if !(norm > 0.0) {
        return None;
    }
    for x in map.values_mut() {
        *x /= norm;
    }
    Some(())
}

/// Iterator over `(basis index, amplitude)` pairs above [`ZERO_EPS`].
pub enum NonZeros<'a> {
    Dense(core::iter::Enumerate<core::slice::Iter<'a, Complex64>>),
    Sparse(alloc::collections::btree_map::Iter<'a, u64, Complex64>),
}

impl Iterator for NonZeros<'_> {
    type Item = (u64, Complex64);

    fn next(&mut self) -> Option<Self::Item> {
        match self {
            NonZeros::Dense(it) => it
                .find(|(_, a)| a.norm() >= ZERO_EPS)
                .map(|(i, &a)| (i as u64, a)),
            NonZeros::Sparse(it) => it
                .find(|(_, a)| a.norm() >= ZERO_EPS)
                .map(|(&i, &a)| (i, a)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn shape(d: u32, n: usize) -> SystemShape {
        SystemShape::new(d, n).unwrap()
    }

    #[test]
    fn basis_state_has_single_amplitude() {
        let s = StateVector::basis_state(shape(3, 3), &[0, 0, 0], &[0, 0, 0]).unwrap();
        assert_eq!(s.nonzeros().collect::<Vec<_>>(), vec![(0, c(1.0, 0.0))]);

        let sh = shape(2, 2);
        let s = StateVector::basis_state(sh, &[1, 0], &[0, 1]).unwrap();
        // (1,0,0,1) in base 2 is 9
        assert_eq!(s.nonzeros().collect::<Vec<_>>(), vec![(9, c(1.0, 0.0))]);
    }

    #[test]
    fn basis_state_rejects_bad_levels() {
        let sh = shape(3, 3);
        assert!(matches!(
            StateVector::basis_state(sh, &[0, 0, 3], &[0, 0, 0]),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            StateVector::basis_state(sh, &[0, 0], &[0, 0, 0]),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn superpose_normalizes() {
        let sh = shape(3, 3);
        let z = [0u32, 0, 0];
        let s = StateVector::superpose(
            sh,
            [
                (&[0u32, 0, 0][..], &z[..], c(1.0, 0.0)),
                (&[1, 1, 1][..], &z[..], c(1.0, 0.0)),
                (&[2, 2, 2][..], &z[..], c(1.0, 0.0)),
            ],
        )
        .unwrap();
        assert_eq!(s.nonzero_count(), 3);
        for (_, a) in s.nonzeros() {
            assert!((a - c(1.0 / 3f64.sqrt(), 0.0)).norm() < 1e-15);
        }

        let single = StateVector::superpose(sh, [(&z[..], &z[..], c(5.0, 0.0))]).unwrap();
        assert!((single.amplitude(0) - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn superpose_zero_vector_is_degenerate() {
        let sh = shape(3, 3);
        let z = [0u32, 0, 0];
        let r = StateVector::superpose(
            sh,
            [(&z[..], &z[..], c(1.0, 0.0)), (&z[..], &z[..], c(-1.0, 0.0))],
        );
        assert_eq!(r.unwrap_err(), Error::Degenerate);
        assert!(matches!(
            StateVector::superpose(sh, core::iter::empty()),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn inner_product_shape_mismatch() {
        let a = StateVector::basis_state(shape(2, 2), &[0, 0], &[0, 0]).unwrap();
        let b = StateVector::basis_state(shape(3, 2), &[0, 0], &[0, 0]).unwrap();
        assert!(matches!(StateVector::inner_product(&a, &b), Err(Error::Input(_))));
    }

    #[test]
    fn inner_product_is_conjugate_linear_in_first() {
        let sh = shape(2, 2);
        let z = [0u32, 0];
        let a = StateVector::superpose(sh, [(&z[..], &z[..], c(0.0, 1.0))]).unwrap();
        let b = StateVector::basis_state(sh, &z, &z).unwrap();
        let ip = StateVector::inner_product(&a, &b).unwrap();
        assert!((ip - c(0.0, -1.0)).norm() < 1e-15);
        let ip = StateVector::inner_product(&b, &a).unwrap();
        assert!((ip - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn representation_conversion() {
        let sh = shape(2, 2);
        let uniform = StateVector::from_dense(sh, vec![c(1.0, 0.0); 16]).unwrap();
        assert_eq!(uniform.representation(), Representation::Dense);
        let sparse = uniform.to_representation(Representation::Sparse).unwrap();
        assert_eq!(sparse.representation(), Representation::Sparse);
        assert_eq!(sparse.nonzero_count(), 16);
        let back = sparse.to_representation(Representation::Dense).unwrap();
        for i in 0..16 {
            assert!((back.amplitude(i) - uniform.amplitude(i)).norm() <= 1e-15);
        }
    }

    #[test]
    fn dense_conversion_respects_cap() {
        let sh = shape(4, 8);
        let s = StateVector::basis_state(sh, &[0; 8], &[0; 8]).unwrap();
        assert!(matches!(
            s.to_representation(Representation::Dense),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn maximally_entangled_across_registers_does_not_factor() {
        let sh = shape(3, 2);
        let terms: Vec<(Vec<u32>, Vec<u32>)> =
            (0..3).map(|j| (vec![j, 0], vec![j, 0])).collect();
        let s = StateVector::superpose(
            sh,
            terms.iter().map(|(a, b)| (&a[..], &b[..], c(1.0, 0.0))),
        )
        .unwrap();
        assert!(s.factor_across_registers().is_none());
    }

    #[test]
    fn product_state_factors_with_phase_on_spatial() {
        let sh = shape(2, 2);
        let z = [0u32, 0];
        let spatial = StateVector::superpose(
            sh,
            [
                (&[0u32, 1][..], &z[..], c(1.0, 0.0)),
                (&[1, 0][..], &z[..], Complex64::cis(PI / 3.0)),
            ],
        )
        .unwrap();
        let oam = StateVector::superpose(
            sh,
            [
                (&z[..], &[0u32, 0][..], Complex64::cis(0.7)),
                (&z[..], &[1, 1][..], c(0.0, 2.0)),
            ],
        )
        .unwrap();
        let product = StateVector::tensor(&spatial, &oam).unwrap();
        let (fs, fo) = product.factor_across_registers().unwrap();
        // OAM factor canonical phase: first nonzero is real positive
        let first = fo.nonzeros().next().unwrap().1;
        assert!(first.im.abs() < 1e-15 && first.re > 0.0);
        let rebuilt = StateVector::tensor(&fs, &fo).unwrap();
        // exact amplitudes, not just fidelity
        for (i, a) in product.nonzeros() {
            assert!((rebuilt.amplitude(i) - a).norm() < 1e-12);
        }
        assert!(StateVector::fidelity(&fs, &spatial).unwrap() > 1.0 - 1e-12);
        assert!(StateVector::fidelity(&fo, &oam).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn tensor_rejects_misplaced_factors() {
        let sh = shape(2, 2);
        let a = StateVector::basis_state(sh, &[0, 0], &[1, 0]).unwrap();
        let b = StateVector::basis_state(sh, &[0, 0], &[0, 0]).unwrap();
        assert!(matches!(StateVector::tensor(&a, &b), Err(Error::Input(_))));
        assert!(matches!(StateVector::tensor(&b, &StateVector::basis_state(sh, &[1, 0], &[0, 0]).unwrap()), Err(Error::Input(_))));
    }

    #[test]
    fn global_phase_keeps_fidelity() {
        let sh = shape(2, 2);
        let s = StateVector::from_dense(sh, (0..16).map(|i| c(i as f64, 1.0)).collect()).unwrap();
        let t = s.with_global_phase(1.234);
        assert!((StateVector::fidelity(&s, &t).unwrap() - 1.0).abs() < 1e-12);
    }
}
