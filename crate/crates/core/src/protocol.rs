//! Measurement pipeline and decoders.
//!
//! Parity stage: path control on every photon copies the spatial parity
//! offsets into the OAM register, where a readout `(o_1, ..., o_n)` gives
//! `x_m = o_{m+1} - o_1 mod d`. Phase stage: a QFT on every spatial qudit
//! moves the relative phase into the level sum, so a spatial readout
//! `(j, y_1, ..., y_{n-1})` gives `k = -(j + sum y) mod d`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{input_err, Error, Result};
use crate::gates::{apply_path_control_all, apply_qft_spatial_all};
use crate::ghz::{hyper_initial, GhzLabel};
use crate::shape::SystemShape;
use crate::state::StateVector;
use crate::SUPPORT_EPS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Register {
    Spatial,
    Oam,
}

impl fmt::Display for Register {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Register::Spatial => "spatial",
            Register::Oam => "oam",
        })
    }
}

/// Levels read out from one register, one per photon.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Outcome {
    pub register: Register,
    pub levels: Vec<u32>,
}

impl Outcome {
    pub fn new(register: Register, levels: Vec<u32>) -> Self {
        Self { register, levels }
    }

    pub fn validate(&self, shape: &SystemShape) -> Result<()> {
        shape.check_levels(&self.levels, match self.register {
            Register::Spatial => "spatial outcome",
            Register::Oam => "oam outcome",
        })
    }
}

/// Born-rule distribution over one register's outcomes.
///
/// Keeps the measured state so that post-measurement states can be
/// produced on demand.
#[derive(Clone, Debug)]
pub struct OutcomeDistribution {
    register: Register,
    entries: BTreeMap<Outcome, f64>,
    source: StateVector,
}

impl OutcomeDistribution {
    pub fn register(&self) -> Register {
        self.register
    }

    pub fn entries(&self) -> &BTreeMap<Outcome, f64> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn probability(&self, outcome: &Outcome) -> f64 {
        self.entries.get(outcome).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    /// Renormalized projection of the measured state onto `outcome`.
    pub fn collapsed(&self, outcome: &Outcome) -> Result<StateVector> {
        if outcome.register != self.register {
            return Err(input_err!(
                "outcome is for the {} register, distribution is over {}",
                outcome.register,
                self.register
            ));
        }
        let shape = self.source.shape();
        outcome.validate(&shape)?;
        let target = shape.register_index(&outcome.levels);
        let register = self.register;
        let kept = self
            .source
            .nonzeros()
            .filter(|&(i, _)| register_part(&self.source, register, i) == target);
        StateVector::from_indexed(shape, kept)
    }
}

fn register_part(s: &StateVector, register: Register, index: u64) -> u64 {
    let (spatial, oam) = s.split_index(index);
    match register {
        Register::Spatial => spatial,
        Register::Oam => oam,
    }
}

fn register_levels(shape: &SystemShape, mut index: u64) -> Vec<u32> {
    let d = u64::from(shape.d());
    let mut levels = alloc::vec![0u32; shape.n()];
    for slot in levels.iter_mut().rev() {
        *slot = (index % d) as u32;
        index /= d;
    }
    levels
}

/// Measure one register of `s` in the computational basis.
pub fn measure_register(s: &StateVector, register: Register) -> OutcomeDistribution {
    let shape = s.shape();
    let mut by_index: BTreeMap<u64, f64> = BTreeMap::new();
    for (i, a) in s.nonzeros() {
        *by_index.entry(register_part(s, register, i)).or_insert(0.0) += a.norm_sqr();
    }
    let entries = by_index
        .into_iter()
        .filter(|&(_, p)| p > SUPPORT_EPS)
        .map(|(i, p)| (Outcome::new(register, register_levels(&shape, i)), p))
        .collect();
    OutcomeDistribution { register, entries, source: s.clone() }
}

/// Joint distribution of (spatial outcome, OAM outcome) pairs.
pub fn measure_joint(s: &StateVector) -> BTreeMap<(Outcome, Outcome), f64> {
    let shape = s.shape();
    let mut out = BTreeMap::new();
    for (i, a) in s.nonzeros() {
        let (spatial, oam) = s.split_index(i);
        let key = (
            Outcome::new(Register::Spatial, register_levels(&shape, spatial)),
            Outcome::new(Register::Oam, register_levels(&shape, oam)),
        );
        *out.entry(key).or_insert(0.0) += a.norm_sqr();
    }
    out.retain(|_, p| *p > SUPPORT_EPS);
    out
}

/// Seedable outcome sampler (ChaCha8).
#[derive(Clone, Debug)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn draw(&mut self, dist: &OutcomeDistribution) -> Outcome {
        let target = self.rng.gen::<f64>() * dist.total();
        let mut acc = 0.0;
        let mut last = None;
        for (outcome, &p) in dist.entries() {
            acc += p;
            if target < acc {
                return outcome.clone();
            }
            last = Some(outcome);
        }
        last.expect("distribution of a normalized state is nonempty").clone()
    }
}

/// `shots` independent draws from the register distribution of `s`.
pub fn sample_register(s: &StateVector, register: Register, shots: usize, seed: u64) -> Vec<Outcome> {
    let dist = measure_register(s, register);
    let mut sampler = Sampler::new(seed);
    (0..shots).map(|_| sampler.draw(&dist)).collect()
}

/// Parity offsets from an OAM outcome: `x_m = o_{m+1} - o_1 mod d`.
pub fn decode_parity(shape: &SystemShape, outcome: &Outcome) -> Result<Vec<u32>> {
    if outcome.register != Register::Oam {
        return Err(input_err!("parity is decoded from an OAM outcome"));
    }
    outcome.validate(shape)?;
    let d = shape.d();
    let first = outcome.levels[0];
    Ok(outcome.levels[1..].iter().map(|&o| (o + d - first) % d).collect())
}

/// Phase index from a post-QFT spatial outcome: `k = -(sum of levels) mod d`.
pub fn decode_phase(shape: &SystemShape, outcome: &Outcome) -> Result<u32> {
    if outcome.register != Register::Spatial {
        return Err(input_err!("phase is decoded from a spatial outcome"));
    }
    outcome.validate(shape)?;
    let d = u64::from(shape.d());
    let sum = outcome.levels.iter().map(|&l| u64::from(l)).sum::<u64>() % d;
    Ok(((d - sum) % d) as u32)
}

pub fn decode(shape: &SystemShape, oam: &Outcome, spatial: &Outcome) -> Result<GhzLabel> {
    Ok(GhzLabel::new(decode_parity(shape, oam)?, decode_phase(shape, spatial)?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub oam_outcome: Outcome,
    pub spatial_outcome: Outcome,
    pub decoded: GhzLabel,
    /// Probability of this outcome pair for the prepared state.
    pub probability: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    Sampled { seed: u64 },
}

/// Prepare `label`, run both stages and decode.
///
/// Exhaustive mode returns every outcome pair with nonzero probability;
/// sampled mode returns a single record.
pub fn run_protocol(shape: SystemShape, label: &GhzLabel, mode: Mode) -> Result<Vec<MeasurementRecord>> {
    match mode {
        Mode::Exhaustive => run_exhaustive(shape, label),
        Mode::Sampled { seed } => {
            let mut runner = SampledRun::new(shape, label)?;
            Ok(alloc::vec![runner.shot(&mut Sampler::new(seed))])
        }
    }
}

/// Exhaustive run using the register factorization after path control: the
/// joint distribution is the product of the OAM distribution of the OAM
/// factor and the spatial distribution of the QFT'd spatial factor.
pub fn run_exhaustive(shape: SystemShape, label: &GhzLabel) -> Result<Vec<MeasurementRecord>> {
    shape.check_labels()?;
    let controlled = apply_path_control_all(&hyper_initial(shape, label)?);
    let (spatial, oam) = controlled.factor_across_registers().ok_or(Error::NotFactorizable)?;
    let oam_dist = measure_register(&oam, Register::Oam);
    let spatial_dist = measure_register(&apply_qft_spatial_all(&spatial), Register::Spatial);
    let mut records = Vec::with_capacity(oam_dist.len() * spatial_dist.len());
    for (o, &po) in oam_dist.entries() {
        for (s, &ps) in spatial_dist.entries() {
            records.push(MeasurementRecord {
                oam_outcome: o.clone(),
                spatial_outcome: s.clone(),
                decoded: decode(&shape, o, s)?,
                probability: po * ps,
            });
        }
    }
    Ok(records)
}

/// Sequential sampling for one prepared label: read OAM, collapse, apply
/// the QFT to the collapsed state, read spatial.
///
/// Post-collapse spatial distributions are cached per OAM outcome, so
/// repeated shots do not repeat the QFT.
#[derive(Clone, Debug)]
pub struct SampledRun {
    shape: SystemShape,
    oam_dist: OutcomeDistribution,
    spatial_dists: BTreeMap<Outcome, OutcomeDistribution>,
}

impl SampledRun {
    pub fn new(shape: SystemShape, label: &GhzLabel) -> Result<Self> {
        let controlled = apply_path_control_all(&hyper_initial(shape, label)?);
        Ok(Self {
            shape,
            oam_dist: measure_register(&controlled, Register::Oam),
            spatial_dists: BTreeMap::new(),
        })
    }

    pub fn shot(&mut self, sampler: &mut Sampler) -> MeasurementRecord {
        let oam = sampler.draw(&self.oam_dist);
        let p_oam = self.oam_dist.probability(&oam);
        let oam_dist = &self.oam_dist;
        let spatial_dist = self.spatial_dists.entry(oam.clone()).or_insert_with(|| {
            let collapsed = oam_dist.collapsed(&oam).expect("sampled outcome has support");
            measure_register(&apply_qft_spatial_all(&collapsed), Register::Spatial)
        });
        let spatial = sampler.draw(spatial_dist);
        let probability = p_oam * spatial_dist.probability(&spatial);
        let decoded = decode(&self.shape, &oam, &spatial).expect("outcomes drawn from this shape");
        MeasurementRecord { oam_outcome: oam, spatial_outcome: spatial, decoded, probability }
    }
}

/// Joint outcome distribution with the OAM readout before the QFT:
/// sum over OAM outcomes of `p(o) * p(s | o)` with the QFT applied to the
/// collapsed state.
pub fn joint_oam_first(shape: SystemShape, label: &GhzLabel) -> Result<BTreeMap<(Outcome, Outcome), f64>> {
    let controlled = apply_path_control_all(&hyper_initial(shape, label)?);
    let oam_dist = measure_register(&controlled, Register::Oam);
    let mut out = BTreeMap::new();
    for (o, &po) in oam_dist.entries() {
        let after = apply_qft_spatial_all(&oam_dist.collapsed(o)?);
        for (s, &ps) in measure_register(&after, Register::Spatial).entries() {
            out.insert((s.clone(), o.clone()), po * ps);
        }
    }
    Ok(out)
}

/// Joint outcome distribution with the QFT applied before either readout.
pub fn joint_qft_first(shape: SystemShape, label: &GhzLabel) -> Result<BTreeMap<(Outcome, Outcome), f64>> {
    let controlled = apply_path_control_all(&hyper_initial(shape, label)?);
    Ok(measure_joint(&apply_qft_spatial_all(&controlled)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn shape(d: u32, n: usize) -> SystemShape {
        SystemShape::new(d, n).unwrap()
    }

    fn oam(levels: &[u32]) -> Outcome {
        Outcome::new(Register::Oam, levels.to_vec())
    }

    fn spatial(levels: &[u32]) -> Outcome {
        Outcome::new(Register::Spatial, levels.to_vec())
    }

    #[test]
    fn parity_decoding() {
        let sh = shape(3, 3);
        assert_eq!(decode_parity(&sh, &oam(&[0, 0, 1])).unwrap(), vec![0, 1]);
        assert_eq!(decode_parity(&sh, &oam(&[2, 0, 2])).unwrap(), vec![1, 0]);
        for d in 2..7 {
            let sh = shape(d, 4);
            for j in 0..d {
                assert_eq!(decode_parity(&sh, &oam(&[j; 4])).unwrap(), vec![0; 3]);
            }
        }
    }

    #[test]
    fn phase_decoding() {
        let sh = shape(3, 3);
        assert_eq!(decode_phase(&sh, &spatial(&[0, 1, 2])).unwrap(), 0);
        assert_eq!(decode_phase(&sh, &spatial(&[0, 0, 2])).unwrap(), 1);
        assert_eq!(decode_phase(&shape(4, 3), &spatial(&[1, 2, 3])).unwrap(), 2);
    }

    #[test]
    fn decoders_check_register_and_levels() {
        let sh = shape(3, 3);
        assert!(decode_parity(&sh, &spatial(&[0, 0, 1])).is_err());
        assert!(decode_phase(&sh, &oam(&[0, 0, 1])).is_err());
        assert!(decode_parity(&sh, &oam(&[0, 0])).is_err());
        assert!(decode_phase(&sh, &spatial(&[0, 0, 3])).is_err());
    }

    #[test]
    fn basis_state_is_deterministic() {
        let sh = shape(3, 2);
        let s = StateVector::basis_state(sh, &[2, 1], &[0, 2]).unwrap();
        let d = measure_register(&s, Register::Spatial);
        assert_eq!(d.len(), 1);
        assert!((d.probability(&spatial(&[2, 1])) - 1.0).abs() < 1e-15);
        let d = measure_register(&s, Register::Oam);
        assert!((d.probability(&oam(&[0, 2])) - 1.0).abs() < 1e-15);
        let shots = sample_register(&s, Register::Oam, 100, 3);
        assert_eq!(shots.len(), 100);
        assert!(shots.iter().all(|o| o == &oam(&[0, 2])));
    }

    #[test]
    fn collapse_renormalizes() {
        let sh = shape(3, 3);
        let label = GhzLabel::new(vec![0, 1], 2);
        let s = apply_path_control_all(&hyper_initial(sh, &label).unwrap());
        let dist = measure_register(&s, Register::Oam);
        let c = dist.collapsed(&oam(&[1, 1, 2])).unwrap();
        assert!((c.norm_sqr() - 1.0).abs() < 1e-12);
        assert_eq!(c.nonzero_count(), 3);
        assert!(dist.collapsed(&spatial(&[1, 1, 2])).is_err());
        // no support
        assert_eq!(dist.collapsed(&oam(&[0, 0, 0])).unwrap_err(), Error::Degenerate);
    }

    #[test]
    fn same_seed_same_samples() {
        let sh = shape(3, 3);
        let label = GhzLabel::new(vec![0, 1], 0);
        let s = apply_path_control_all(&hyper_initial(sh, &label).unwrap());
        let a = sample_register(&s, Register::Oam, 50, 11);
        let b = sample_register(&s, Register::Oam, 50, 11);
        assert_eq!(a, b);
        let c = sample_register(&s, Register::Oam, 50, 12);
        assert_ne!(a, c);
    }

    #[test]
    fn sampled_mode_decodes_input() {
        let sh = shape(3, 3);
        let label = GhzLabel::new(vec![2, 1], 1);
        let a = run_protocol(sh, &label, Mode::Sampled { seed: 5 }).unwrap();
        let b = run_protocol(sh, &label, Mode::Sampled { seed: 5 }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].decoded, label);
    }

    #[test]
    fn exhaustive_bell_case() {
        let sh = shape(2, 2);
        let label = GhzLabel::new(vec![1], 1);
        let records = run_exhaustive(sh, &label).unwrap();
        assert_eq!(records.len(), 4);
        assert!(records.iter().all(|r| r.decoded == label));
        let total: f64 = records.iter().map(|r| r.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
