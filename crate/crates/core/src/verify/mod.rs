//! Exhaustive verification over every label of a shape.
//!
//! [`verify_shape`] runs all per-label checks, the Gram-matrix check and,
//! when the dense state fits the cap, the comparison against the naive
//! [`oracle`]. Per-label work is independent; [`verify_shape_with`] lets the
//! caller supply the label map (for example a thread pool) and a clock.

pub mod oracle;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::time::Duration;

use crate::error::{Error, Result};
use crate::gates::{apply_path_control_all, apply_qft_spatial_all};
use crate::ghz::{all_labels, ghz_spatial, hyper_initial, GhzLabel};
use crate::protocol::{joint_oam_first, joint_qft_first, run_exhaustive};
use crate::shape::SystemShape;
use crate::state::StateVector;
use crate::SUPPORT_EPS;


pub use oracle::{brute_force_oracle, OracleOutcomes};

/// Default `(d, n)` verification grid.
pub const DEFAULT_GRID: [(u32, usize); 8] =
    [(2, 2), (2, 3), (2, 5), (3, 2), (3, 3), (3, 4), (4, 3), (5, 3)];

pub const ORTHONORMALITY_TOL: f64 = 1e-12;
pub const NORM_TOL: f64 = 1e-12;
pub const FACTOR_FIDELITY_TOL: f64 = 1e-9;
pub const INVARIANCE_TOL: f64 = 1e-12;
pub const PROBABILITY_TOL: f64 = 1e-9;
pub const ORACLE_TOL: f64 = 1e-10;

/// Monotonic time source for check runtimes.
pub trait Clock: Sync {
    fn now(&self) -> Duration;
}

/// Clock that always reads zero; runtimes come out as zero.
pub struct NoClock;

impl Clock for NoClock {
    fn now(&self) -> Duration {
        Duration::ZERO
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub skipped: bool,
    pub worst_deviation: f64,
    pub runtime: Duration,
    pub detail: String,
}

/// Outcome probabilities for one register, keyed by level tuple.
pub type LevelDistribution = BTreeMap<Vec<u32>, f64>;

/// Everything measured for one label.
#[derive(Clone, Debug)]
pub struct LabelResult {
    pub label: GhzLabel,
    pub oam: LevelDistribution,
    pub spatial: LevelDistribution,
    pub confusions: usize,
    pub phase_violations: usize,
    /// `None` when the post-control state failed to factor.
    pub factor_infidelity: Option<f64>,
    pub invariance_infidelity: Option<f64>,
    pub norm_deviation: f64,
    pub uniformity_deviation: f64,
    pub stage_order_deviation: f64,
    /// `None` when the dense oracle was skipped.
    pub oracle_deviation: Option<f64>,
    pub timings: BTreeMap<&'static str, Duration>,
    pub error: Option<Error>,
}

/// Per-label outcome counts kept in the report.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelSummary {
    pub label: GhzLabel,
    pub distinguished: bool,
    pub oam_outcomes: usize,
    pub spatial_outcomes: usize,
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub shape: SystemShape,
    pub labels_total: usize,
    pub labels_distinguished: usize,
    /// Sorted by label.
    pub labels: Vec<LabelSummary>,
    pub checks: Vec<CheckResult>,
    pub dense_checks_skipped: bool,
    /// Parity class `x` -> OAM outcomes (any `k`).
    pub parity_table: BTreeMap<Vec<u32>, LevelDistribution>,
    /// Phase index `k` -> spatial outcomes (any `x`).
    pub phase_table: BTreeMap<u32, LevelDistribution>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn worst_deviation(&self) -> f64 {
        self.checks
            .iter()
            .filter(|c| !c.skipped)
            .map(|c| c.worst_deviation)
            .fold(0.0, f64::max)
    }
}

fn timed<T>(clock: &dyn Clock, timings: &mut BTreeMap<&'static str, Duration>, name: &'static str, f: impl FnOnce() -> T) -> T {
    let start = clock.now();
    let out = f();
    *timings.entry(name).or_default() += clock.now().saturating_sub(start);
    out
}

fn max_prob_deviation<K: Ord>(a: &BTreeMap<K, f64>, b: &BTreeMap<K, f64>) -> f64 {
    if a.len() != b.len() || a.keys().zip(b.keys()).any(|(x, y)| x != y) {
        return f64::INFINITY;
    }
    a.values().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Run every per-label check for `label`.
pub fn check_label(shape: SystemShape, label: &GhzLabel, clock: &dyn Clock) -> LabelResult {
    let mut result = LabelResult {
        label: label.clone(),
        oam: BTreeMap::new(),
        spatial: BTreeMap::new(),
        confusions: 0,
        phase_violations: 0,
        factor_infidelity: None,
        invariance_infidelity: None,
        norm_deviation: 0.0,
        uniformity_deviation: 0.0,
        stage_order_deviation: 0.0,
        oracle_deviation: None,
        timings: BTreeMap::new(),
        error: None,
    };
    if let Err(e) = fill_label(shape, label, clock, &mut result) {
        result.error = Some(e);
    }
    result
}

fn fill_label(shape: SystemShape, label: &GhzLabel, clock: &dyn Clock, r: &mut LabelResult) -> Result<()> {
    let d = shape.d();
    let mut timings = BTreeMap::new();

    let (spatial_ghz, controlled, after_qft) = timed(clock, &mut timings, "norm_preservation", || {
        let ghz = ghz_spatial(shape, label)?;
        let initial = hyper_initial(shape, label)?;
        let controlled = apply_path_control_all(&initial);
        let after = apply_qft_spatial_all(&controlled);
        r.norm_deviation = [&ghz, &initial, &controlled, &after]
            .iter()
            .map(|s| (s.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max);
        Ok::<_, Error>((ghz, controlled, after))
    })?;
    drop(after_qft);

    timed(clock, &mut timings, "factorization", || {
        if let Some((sp, oam)) = controlled.factor_across_registers() {
            let rebuilt = StateVector::tensor(&sp, &oam)?;
            r.factor_infidelity = Some(1.0 - StateVector::fidelity(&rebuilt, &controlled)?);
            r.invariance_infidelity = Some(1.0 - StateVector::fidelity(&sp, &spatial_ghz)?);
        }
        Ok::<_, Error>(())
    })?;

    let records = timed(clock, &mut timings, "completeness", || run_exhaustive(shape, label))?;
    for rec in &records {
        if rec.probability <= SUPPORT_EPS {
            continue;
        }
        if rec.decoded != *label {
            r.confusions += 1;
        }
        let sum: u64 = rec.spatial_outcome.levels.iter().map(|&l| u64::from(l)).sum();
        if (sum + u64::from(label.k)) % u64::from(d) != 0 {
            r.phase_violations += 1;
        }
        *r.oam.entry(rec.oam_outcome.levels.clone()).or_insert(0.0) += rec.probability;
        *r.spatial.entry(rec.spatial_outcome.levels.clone()).or_insert(0.0) += rec.probability;
    }

    let d_f = f64::from(d);
    let n = shape.n() as i32;
    r.uniformity_deviation = if r.oam.len() != d as usize
        || r.spatial.len() as u64 != shape.register_dimension() / u64::from(d)
    {
        f64::INFINITY
    } else {
        let oam_dev = r.oam.values().map(|p| (p - 1.0 / d_f).abs());
        let sp_dev = r.spatial.values().map(|p| (p - libm::pow(d_f, f64::from(1 - n))).abs());
        oam_dev.chain(sp_dev).fold(0.0, f64::max)
    };

    r.stage_order_deviation = timed(clock, &mut timings, "stage_order", || {
        let a = joint_oam_first(shape, label)?;
        let b = joint_qft_first(shape, label)?;
        Ok::<_, Error>(max_prob_deviation(&a, &b))
    })?;

    if shape.dense_feasible() {
        r.oracle_deviation = Some(timed(clock, &mut timings, "oracle_equivalence", || {
            let oracle = brute_force_oracle(shape, label)?;
            let pipeline: BTreeMap<(Vec<u32>, Vec<u32>), f64> = records
                .iter()
                .filter(|rec| rec.probability > SUPPORT_EPS)
                .map(|rec| {
                    (
                        (rec.spatial_outcome.levels.clone(), rec.oam_outcome.levels.clone()),
                        rec.probability,
                    )
                })
                .collect();
            Ok::<_, Error>(max_prob_deviation(&pipeline, &oracle.joint))
        })?);
    }
    r.timings = timings;
    Ok(())
}

fn gram_deviation(shape: SystemShape, labels: &[GhzLabel]) -> Result<f64> {
    let states = labels
        .iter()
        .map(|l| ghz_spatial(shape, l))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for (i, a) in states.iter().enumerate() {
        for (j, b) in states.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            let ip = StateVector::inner_product(a, b)?;
            worst = worst.max((ip - target).norm());
        }
    }
    Ok(worst)
}

/// Verify `shape` sequentially without timing.
pub fn verify_shape(shape: SystemShape) -> Result<VerificationReport> {
    verify_shape_with(shape, &NoClock, |labels, check| labels.iter().map(check).collect())
}

/// Verify `shape`, mapping labels through `map_labels`.
///
/// `map_labels` receives all labels and the per-label check; results may
/// come back in any order.
pub fn verify_shape_with<C, M>(shape: SystemShape, clock: &C, map_labels: M) -> Result<VerificationReport>
where
    C: Clock,
    M: FnOnce(&[GhzLabel], &(dyn Fn(&GhzLabel) -> LabelResult + Sync)) -> Vec<LabelResult>,
{
    let labels = all_labels(shape)?;
    let start = clock.now();
    let gram = gram_deviation(shape, &labels)?;
    let gram_time = clock.now().saturating_sub(start);

    let check = |l: &GhzLabel| check_label(shape, l, clock);
    let mut results = map_labels(&labels, &check);
    results.sort_by(|a, b| a.label.cmp(&b.label));
    if results.len() != labels.len() || results.iter().zip(&labels).any(|(r, l)| &r.label != l) {
        return Err(Error::Inconsistent(alloc::format!(
            "label map returned {} results for {} labels",
            results.len(),
            labels.len()
        )));
    }
    Ok(assemble(shape, gram, gram_time, &results))
}

fn assemble(shape: SystemShape, gram: f64, gram_time: Duration, results: &[LabelResult]) -> VerificationReport {
    let time_of = |name: &str| -> Duration {
        results.iter().filter_map(|r| r.timings.get(name)).sum()
    };
    let errors: Vec<&LabelResult> = results.iter().filter(|r| r.error.is_some()).collect();
    let error_detail = errors
        .first()
        .map(|r| alloc::format!("label {} failed: {}", r.label, r.error.as_ref().unwrap()))
        .unwrap_or_default();

    let fold_opt = |f: &dyn Fn(&LabelResult) -> Option<f64>| -> f64 {
        results
            .iter()
            .map(|r| f(r).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    };
    let fold = |f: &dyn Fn(&LabelResult) -> f64| -> f64 { results.iter().map(f).fold(0.0, f64::max) };

    let confusions: usize = results.iter().map(|r| r.confusions).sum();
    let violations: usize = results.iter().map(|r| r.phase_violations).sum();
    let labels: Vec<LabelSummary> = results
        .iter()
        .map(|r| LabelSummary {
            label: r.label.clone(),
            distinguished: r.error.is_none() && r.confusions == 0 && !r.oam.is_empty(),
            oam_outcomes: r.oam.len(),
            spatial_outcomes: r.spatial.len(),
        })
        .collect();
    let distinguished = labels.iter().filter(|l| l.distinguished).count();

    let mut checks = Vec::new();
    let mut push = |name: &'static str, worst: f64, tol: f64, runtime: Duration, detail: String| {
        checks.push(CheckResult {
            name,
            passed: worst <= tol && errors.is_empty(),
            skipped: false,
            worst_deviation: worst,
            runtime,
            detail,
        });
    };
    push(
        "orthonormality",
        gram,
        ORTHONORMALITY_TOL,
        gram_time,
        alloc::format!("{0}x{0} Gram matrix vs identity", results.len()),
    );
    push(
        "norm_preservation",
        fold(&|r| r.norm_deviation),
        NORM_TOL,
        time_of("norm_preservation"),
        String::from("|norm^2 - 1| after each stage"),
    );
    push(
        "factorization",
        fold_opt(&|r| r.factor_infidelity),
        FACTOR_FIDELITY_TOL,
        time_of("factorization"),
        String::from("post-control state is spatial (x) OAM"),
    );
    push(
        "spatial_invariance",
        fold_opt(&|r| r.invariance_infidelity),
        INVARIANCE_TOL,
        Duration::ZERO,
        String::from("spatial factor equals the input GHZ state"),
    );
    push(
        "phase_constraint",
        violations as f64,
        0.0,
        Duration::ZERO,
        alloc::format!("{violations} spatial outcomes with (sum + k) mod d != 0"),
    );
    push(
        "completeness",
        confusions as f64,
        0.0,
        time_of("completeness"),
        alloc::format!(
            "{distinguished}/{} states distinguished, {confusions} confusions{}",
            results.len(),
            if error_detail.is_empty() { String::new() } else { alloc::format!("; {error_detail}") }
        ),
    );
    push(
        "outcome_uniformity",
        fold(&|r| r.uniformity_deviation),
        PROBABILITY_TOL,
        Duration::ZERO,
        String::from("d OAM outcomes at 1/d, d^(n-1) spatial outcomes at d^-(n-1)"),
    );
    push(
        "stage_order",
        fold(&|r| r.stage_order_deviation),
        ORACLE_TOL,
        time_of("stage_order"),
        String::from("OAM readout before vs after the QFT"),
    );
    let dense_skipped = !shape.dense_feasible();
    if dense_skipped {
        checks.push(CheckResult {
            name: "oracle_equivalence",
            passed: true,
            skipped: true,
            worst_deviation: 0.0,
            runtime: Duration::ZERO,
            detail: alloc::format!("skipped: {} amplitudes exceed dense cap", shape.dimension()),
        });
    } else {
        push(
            "oracle_equivalence",
            fold_opt(&|r| r.oracle_deviation),
            ORACLE_TOL,
            time_of("oracle_equivalence"),
            String::from("sparse pipeline vs naive dense simulation"),
        );
    }

    let (parity_table, phase_table) = tables_from_results(results);
    VerificationReport {
        shape,
        labels_total: results.len(),
        labels_distinguished: distinguished,
        labels,
        checks,
        dense_checks_skipped: dense_skipped,
        parity_table,
        phase_table,
    }
}

type Tables = (BTreeMap<Vec<u32>, LevelDistribution>, BTreeMap<u32, LevelDistribution>);

fn tables_from_results(results: &[LabelResult]) -> Tables {
    let mut parity = BTreeMap::new();
    let mut phase = BTreeMap::new();
    for r in results {
        parity.entry(r.label.x.clone()).or_insert_with(|| r.oam.clone());
        phase.entry(r.label.k).or_insert_with(|| r.spatial.clone());
    }
    (parity, phase)
}

fn support(dist: &LevelDistribution) -> BTreeSet<&Vec<u32>> {
    dist.keys().collect()
}

/// Parity class -> OAM outcome distribution, checked to be the same for
/// every `k` in the class.
pub fn parity_table(shape: SystemShape) -> Result<BTreeMap<Vec<u32>, LevelDistribution>> {
    let results = label_distributions(shape)?;
    let mut table: BTreeMap<Vec<u32>, LevelDistribution> = BTreeMap::new();
    for (label, oam, _) in results {
        match table.get(&label.x) {
            None => {
                table.insert(label.x.clone(), oam);
            }
            Some(existing) => consistent(existing, &oam, &label)?,
        }
    }
    Ok(table)
}

/// Phase index -> spatial outcome distribution, checked to be the same for
/// every parity class.
pub fn phase_table(shape: SystemShape) -> Result<BTreeMap<u32, LevelDistribution>> {
    let results = label_distributions(shape)?;
    let mut table: BTreeMap<u32, LevelDistribution> = BTreeMap::new();
    for (label, _, spatial) in results {
        match table.get(&label.k) {
            None => {
                table.insert(label.k, spatial);
            }
            Some(existing) => consistent(existing, &spatial, &label)?,
        }
    }
    Ok(table)
}

fn consistent(a: &LevelDistribution, b: &LevelDistribution, label: &GhzLabel) -> Result<()> {
    if support(a) != support(b) || max_prob_deviation(a, b) > PROBABILITY_TOL {
        return Err(Error::Inconsistent(alloc::format!(
            "outcomes for label {label} differ from its table row"
        )));
    }
    Ok(())
}

fn label_distributions(shape: SystemShape) -> Result<Vec<(GhzLabel, LevelDistribution, LevelDistribution)>> {
    all_labels(shape)?
        .into_iter()
        .map(|label| {
            let mut oam = BTreeMap::new();
            let mut spatial = BTreeMap::new();
            for rec in run_exhaustive(shape, &label)? {
                *oam.entry(rec.oam_outcome.levels).or_insert(0.0) += rec.probability;
                *spatial.entry(rec.spatial_outcome.levels).or_insert(0.0) += rec.probability;
            }
            Ok((label, oam, spatial))
        })
        .collect()
}

/// OAM detection table for `d = 3`, `n = 3`.
pub fn reproduce_table1() -> Result<BTreeMap<Vec<u32>, LevelDistribution>> {
    parity_table(SystemShape::new(3, 3)?)
}

/// Spatial detection table for `d = 3`, `n = 3`.
pub fn reproduce_table2() -> Result<BTreeMap<u32, LevelDistribution>> {
    phase_table(SystemShape::new(3, 3)?)
}

/// Outcome sets only, for comparisons that ignore probabilities.
pub fn outcome_set(dist: &LevelDistribution) -> BTreeSet<Vec<u32>> {
    dist.keys().cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn small_shapes_pass() {
        for (d, n) in [(2, 2), (3, 2), (2, 3)] {
            let report = verify_shape(SystemShape::new(d, n).unwrap()).unwrap();
            assert!(report.passed(), "{:?}", report.checks);
            assert_eq!(report.labels_distinguished, report.labels_total);
            assert!(!report.dense_checks_skipped);
        }
    }

    #[test]
    fn dense_checks_skipped_over_cap() {
        let sh = SystemShape::with_caps(3, 3, 100, crate::DEFAULT_LABEL_CAP).unwrap();
        let report = verify_shape(sh).unwrap();
        assert!(report.dense_checks_skipped);
        assert!(report.check("oracle_equivalence").unwrap().skipped);
        assert!(report.passed());
    }

    #[test]
    fn short_label_map_is_rejected() {
        let sh = SystemShape::new(2, 2).unwrap();
        let r = verify_shape_with(sh, &NoClock, |labels, check| labels[..1].iter().map(check).collect());
        assert!(matches!(r, Err(Error::Inconsistent(_))));
    }

    #[test]
    fn table1_row_00() {
        let t = reproduce_table1().unwrap();
        assert_eq!(
            outcome_set(&t[&vec![0, 0]]),
            [vec![0, 0, 0], vec![1, 1, 1], vec![2, 2, 2]].into_iter().collect()
        );
    }
}
