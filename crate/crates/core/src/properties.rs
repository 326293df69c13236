//! Executable checks of the coherence-measure requirements:
//!
//! - C1: vanishes on incoherent states.
//! - C1': nonzero on every coherent state.
//! - C2a: non-increasing under incoherent channels.
//! - C2b: non-increasing on average under post-selected incoherent operations.
//! - C3: convex.
//!
//! Slack is reported in the measure's units and is positive when the
//! inequality is violated. Only exactly computable measures are checked for
//! monotonicity; the optimizer-based roof returns upper estimates that can
//! manufacture violations.

use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{apply_channel, apply_selective, is_incoherent_kraus_set, random_incoherent_kraus, KrausSet};
use crate::error::{Error, Result};
use crate::measures::{c_l1, exact_value, MeasureId};
use crate::rng;
use crate::roof::{optimize_roof, RoofConfig};
use crate::state::{random_density, random_incoherent, DensityMatrix, ProbabilityVector};

/// Allowed slack for exactly evaluated measures.
pub const EXACT_SLACK_TOL: f64 = 1e-9;
/// Allowed convexity slack for the qubit roof.
pub const ROOF_SLACK_TOL: f64 = 1e-6;
/// C1': randomness must exceed this whenever `C_l1 > FAITHFUL_COHERENCE`.
pub const FAITHFUL_FLOOR: f64 = 1e-6;
pub const FAITHFUL_COHERENCE: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PropertyId {
    C1,
    #[serde(rename = "C1'")]
    C1Prime,
    C2a,
    C2b,
    C3,
}

impl std::fmt::Display for PropertyId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PropertyId::C1 => "C1",
            PropertyId::C1Prime => "C1'",
            PropertyId::C2a => "C2a",
            PropertyId::C2b => "C2b",
            PropertyId::C3 => "C3",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub sample: usize,
    pub dim: usize,
    pub slack: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyReport {
    pub property: PropertyId,
    pub measure: MeasureId,
    pub passed: bool,
    /// Largest slack seen, recorded on pass too.
    pub worst_slack: f64,
    pub samples: usize,
    /// Worst offending sample when failed.
    pub witness: Option<Witness>,
}

impl PropertyReport {
    fn empty(property: PropertyId, measure: MeasureId) -> Self {
        Self { property, measure, passed: true, worst_slack: f64::NEG_INFINITY, samples: 0, witness: None }
    }

    fn single(property: PropertyId, measure: MeasureId, slack: f64, tol: f64) -> Self {
        let mut r = Self::empty(property, measure);
        r.record(0, 0, slack, tol, String::new);
        r
    }

    fn record(&mut self, sample: usize, dim: usize, slack: f64, tol: f64, detail: impl FnOnce() -> String) {
        self.samples += 1;
        let failed = !(slack <= tol);
        if slack > self.worst_slack || slack.is_nan() {
            self.worst_slack = slack;
            if failed {
                self.witness = Some(Witness { sample, dim, slack, detail: detail() });
            }
        }
        if failed {
            self.passed = false;
        }
    }
}

fn slack_tolerance(measure: MeasureId, dim: usize) -> f64 {
    if measure == MeasureId::RoofRandomness && dim == 2 {
        ROOF_SLACK_TOL
    } else {
        EXACT_SLACK_TOL
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityReport {
    /// `C(Phi(rho)) - C(rho)`.
    pub c2a_slack: f64,
    /// `sum_n p_n C(rho_n) - C(rho)`.
    pub c2b_slack: f64,
    pub passed: bool,
}

/// C2a and C2b for one state and one incoherent Kraus set.
pub fn check_monotonicity(measure: MeasureId, rho: &DensityMatrix, ks: &KrausSet) -> Result<MonotonicityReport> {
    if !is_incoherent_kraus_set(ks) {
        return Err(Error::InvalidInput("Kraus set is not incoherent".into()));
    }
    let before = exact_value(measure, rho)?.value;
    let after = exact_value(measure, &apply_channel(rho, ks)?)?.value;
    let mut average = 0.0;
    for outcome in apply_selective(rho, ks)? {
        average += outcome.probability * exact_value(measure, &outcome.state)?.value;
    }
    let c2a_slack = after - before;
    let c2b_slack = average - before;
    Ok(MonotonicityReport {
        c2a_slack,
        c2b_slack,
        passed: c2a_slack <= EXACT_SLACK_TOL && c2b_slack <= EXACT_SLACK_TOL,
    })
}

/// C3 for one ensemble: slack `C(sum q_k rho_k) - sum q_k C(rho_k)`.
pub fn check_convexity(measure: MeasureId, ensemble: &[(f64, DensityMatrix)]) -> Result<PropertyReport> {
    if ensemble.is_empty() {
        return Err(Error::InvalidInput("empty ensemble".into()));
    }
    let mixed = DensityMatrix::mixture(ensemble)?;
    let mut average = 0.0;
    for (q, rho) in ensemble {
        average += q * exact_value(measure, rho)?.value;
    }
    let slack = exact_value(measure, &mixed)?.value - average;
    Ok(PropertyReport::single(PropertyId::C3, measure, slack, slack_tolerance(measure, mixed.dim())))
}

/// C1 for one incoherent state: slack is the measure value itself.
///
/// The roof on `d > 2` is evaluated with the eigen-decomposition start only,
/// which is already optimal for diagonal states.
pub fn check_vanishing(measure: MeasureId, delta: &DensityMatrix) -> Result<PropertyReport> {
    if !delta.is_incoherent(0.0) {
        return Err(Error::InvalidInput("state is not incoherent".into()));
    }
    let value = measure_value(measure, delta)?;
    Ok(PropertyReport::single(PropertyId::C1, measure, value, EXACT_SLACK_TOL))
}

fn measure_value(measure: MeasureId, rho: &DensityMatrix) -> Result<f64> {
    if measure == MeasureId::RoofRandomness && rho.dim() > 2 {
        let cfg = RoofConfig { restarts: 1, ..RoofConfig::default() };
        return Ok(optimize_roof(rho, &cfg)?.value);
    }
    Ok(exact_value(measure, rho)?.value)
}

/// C1' on one qubit: slack is `FAITHFUL_FLOOR - R` when `C_l1` exceeds
/// [`FAITHFUL_COHERENCE`], and `-inf` (vacuous) otherwise; passes when
/// negative.
pub fn check_faithfulness(measure: MeasureId, rho: &DensityMatrix) -> Result<PropertyReport> {
    let slack = faithfulness_slack(measure, rho)?;
    Ok(PropertyReport::single(PropertyId::C1Prime, measure, slack, 0.0))
}

fn faithfulness_slack(measure: MeasureId, rho: &DensityMatrix) -> Result<f64> {
    if c_l1(rho).value <= FAITHFUL_COHERENCE {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(FAITHFUL_FLOOR - exact_value(measure, rho)?.value)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteConfig {
    /// Largest dimension for measures defined beyond qubits.
    pub max_dim: usize,
    /// Samples per (property, measure).
    pub samples: usize,
    pub seed: u64,
    pub measures: Vec<MeasureId>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            max_dim: 6,
            samples: 1000,
            seed: 0,
            measures: vec![MeasureId::RelEnt, MeasureId::L1, MeasureId::QubitAnalytic],
        }
    }
}

fn qubit_only(measure: MeasureId) -> bool {
    matches!(measure, MeasureId::QubitAnalytic | MeasureId::RoofRandomness)
}

/// Properties applicable to each measure: C1' only for the randomness
/// measures, monotonicity and convexity only where exact.
fn properties_for(measure: MeasureId) -> Vec<PropertyId> {
    let mut props = vec![PropertyId::C1];
    if qubit_only(measure) {
        props.push(PropertyId::C1Prime);
    }
    props.extend([PropertyId::C2a, PropertyId::C2b, PropertyId::C3]);
    props
}

struct Sample {
    dim: usize,
    slacks: Vec<(PropertyId, f64)>,
    detail: String,
}

fn sample_seed(base: u64, tag: u64, index: usize) -> u64 {
    rng::substream(base, (tag << 40) | index as u64).next_u64()
}

fn run_sample(cfg: &SuiteConfig, measure: MeasureId, tag: u64, index: usize) -> Result<Sample> {
    let seed = sample_seed(cfg.seed, tag, index);
    let dims = if qubit_only(measure) { 1 } else { cfg.max_dim - 1 };
    let dim = 2 + index % dims;
    let rank = 1 + (index / dims) % dim;
    let mut slacks = Vec::new();

    let delta = random_incoherent(dim, seed);
    // The optimizer path is the expensive one; thin it out beyond qubits.
    if !(measure == MeasureId::RoofRandomness && dim > 2 && !index.is_multiple_of(10)) {
        slacks.push((PropertyId::C1, measure_value(measure, &delta)?));
    }

    let rho = random_density(dim, rank, seed ^ 0x5eed)?;
    if qubit_only(measure) {
        slacks.push((PropertyId::C1Prime, faithfulness_slack(measure, &rho)?));
    }

    let ks = random_incoherent_kraus(dim, 1 + index % 4, seed ^ 0xc4a7)?;
    let mono = check_monotonicity(measure, &rho, &ks)?;
    slacks.push((PropertyId::C2a, mono.c2a_slack));
    slacks.push((PropertyId::C2b, mono.c2b_slack));

    let parts = 2 + index % 2;
    let ensemble: Vec<(f64, DensityMatrix)> = if parts == 2 {
        (0..2).map(|k| Ok((0.5, random_density(dim, 1 + (index + k) % dim, seed ^ (0xe0 + k as u64))?))).collect::<Result<_>>()?
    } else {
        let weights = random_incoherent(parts, seed ^ 0xf00d).diagonal();
        let weights = ProbabilityVector::new(renormalize(weights.as_slice())).expect("renormalized");
        weights
            .as_slice()
            .iter()
            .enumerate()
            .map(|(k, &q)| Ok((q, random_density(dim, 1 + (index + k) % dim, seed ^ (0xe0 + k as u64))?)))
            .collect::<Result<_>>()?
    };
    slacks.push((PropertyId::C3, check_convexity(measure, &ensemble)?.worst_slack));

    Ok(Sample { dim, slacks, detail: format!("sample seed {seed}, rank {rank}, {} Kraus operators", ks.len()) })
}

fn renormalize(p: &[f64]) -> Vec<f64> {
    let total: f64 = p.iter().sum();
    p.iter().map(|x| x / total).collect()
}

/// Seeded sweep of every applicable property for every selected measure.
/// Samples run in parallel; aggregation is in sample order.
pub fn run_property_suite(cfg: &SuiteConfig) -> Result<Vec<PropertyReport>> {
    if cfg.max_dim < 2 {
        return Err(Error::InvalidConfig("max_dim must be at least 2".into()));
    }
    let mut reports = Vec::new();
    for (tag, &measure) in cfg.measures.iter().enumerate() {
        let samples: Vec<Sample> = (0..cfg.samples)
            .into_par_iter()
            .map(|i| run_sample(cfg, measure, tag as u64, i))
            .collect::<Result<_>>()?;
        for property in properties_for(measure) {
            let mut report = PropertyReport::empty(property, measure);
            for (i, s) in samples.iter().enumerate() {
                for &(p, slack) in &s.slacks {
                    if p != property || slack == f64::NEG_INFINITY {
                        continue;
                    }
                    let tol = match property {
                        PropertyId::C1Prime => 0.0,
                        PropertyId::C3 => slack_tolerance(measure, s.dim),
                        _ => EXACT_SLACK_TOL,
                    };
                    report.record(i, s.dim, slack, tol, || s.detail.clone());
                }
            }
            reports.push(report);
        }
    }
    Ok(reports)
}
