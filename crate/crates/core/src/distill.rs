//! Coherence distillation of pure qubit states.
//!
//! `N` copies of `a|0> + b|1>` are measured by the number `k` of excited
//! qubits. Outcome `k` leaves an equal-weight superposition over the
//! `D_k = C(N, k)` strings of weight `k`, i.e. a maximally coherent state of
//! dimension `D_k`. Repeating over `M` groups and projecting the product onto
//! a `2^r`-dimensional subspace with `r = floor(log2 prod D_k)` yields `r`
//! copies of `|Psi_2>`.
//!
//! Two modes:
//!
//! - [`distill_exact`] materializes the `2^N` state vector (small `N`).
//! - [`distill_simulate`] keeps only `log2 D_k` bookkeeping and scales to
//!   `N * M ~ 10^4` and beyond.

use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::factorial::ln_binomial;
use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::measures::r_pure;
use crate::rng;
use crate::roof::{optimize_roof, optimize_roof_with_starts, RoofConfig};
use crate::state::{CVector, DensityMatrix, PureState, C64};

/// Default cap on `N` for the state-vector mode (`2^20` amplitudes).
pub const EXACT_MAX_COPIES: usize = 20;
/// Largest `d^copies` accepted by [`regularized_roof_estimate`].
pub const REGULARIZED_MAX_DIM: usize = 16;
/// Absorbs log-gamma rounding when `prod D_k` is an exact power of two.
const FLOOR_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GroupOutcome {
    pub k: usize,
    pub probability: f64,
    /// `log2 C(N, k)`.
    pub log2_dk: f64,
}

fn log2_binomial(n: usize, k: usize) -> f64 {
    ln_binomial(n as u64, k as u64) / LN_2
}

/// `p_k = C(N,k) p0^(N-k) (1-p0)^k` for `k = 0..=N`, evaluated in log space.
pub fn binomial_outcome_distribution(n: usize, p0: f64) -> Result<Vec<GroupOutcome>> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&p0) {
        return Err(Error::InvalidProbability(format!("p0 = {p0}")));
    }
    let (ln_a, ln_b) = (p0.ln(), (1.0 - p0).ln());
    Ok((0..=n)
        .map(|k| {
            let ln_binom = ln_binomial(n as u64, k as u64);
            // 0 * ln 0 is taken as 0 so the degenerate ends give p = 1.
            let term = |count: usize, ln_p: f64| if count == 0 { 0.0 } else { count as f64 * ln_p };
            let probability = (ln_binom + term(n - k, ln_a) + term(k, ln_b)).exp();
            GroupOutcome { k, probability, log2_dk: ln_binom / LN_2 }
        })
        .collect())
}

fn qubit_amplitudes(psi: &PureState) -> Result<(C64, C64)> {
    if psi.dim() != 2 {
        return Err(Error::DimensionNot2(psi.dim()));
    }
    let a = psi.amplitudes();
    Ok((a[0], a[1]))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactOutcome {
    pub k: usize,
    /// `||P_k psi^N||^2`.
    pub probability: f64,
    /// Renormalized `P_k psi^N` over all `2^N` strings; `None` when `P_k` annihilates the input.
    #[serde(skip)]
    pub state: Option<CVector>,
    /// Largest deviation of a nonzero amplitude magnitude from `1/sqrt(C(N,k))`.
    pub magnitude_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactRun {
    pub n: usize,
    /// `psi^N`, indexed by bit strings with the first copy most significant.
    #[serde(skip)]
    pub amplitudes: CVector,
    pub outcomes: Vec<ExactOutcome>,
}

impl ExactRun {
    /// Draws `shots` weight measurements; returns counts per `k`.
    pub fn sample_outcomes(&self, shots: usize, seed: u64) -> Vec<usize> {
        let cdf = cumulative(self.outcomes.iter().map(|o| o.probability));
        let mut rng = rng::seeded(seed);
        let mut counts = vec![0; self.outcomes.len()];
        for _ in 0..shots {
            counts[invert_cdf(&cdf, rng.random())] += 1;
        }
        counts
    }
}

/// Builds `psi^N`, applies each weight projector and renormalizes.
pub fn distill_exact(psi: &PureState, n: usize) -> Result<ExactRun> {
    distill_exact_with_limit(psi, n, EXACT_MAX_COPIES)
}

pub fn distill_exact_with_limit(psi: &PureState, n: usize, max_copies: usize) -> Result<ExactRun> {
    qubit_amplitudes(psi)?;
    if n == 0 {
        return Err(Error::InvalidInput("N must be at least 1".into()));
    }
    if n > max_copies {
        return Err(Error::TooLarge(format!("2^{n} amplitudes exceed the limit of 2^{max_copies}")));
    }
    let mut amplitudes = psi.amplitudes().clone();
    for _ in 1..n {
        amplitudes = amplitudes.kronecker(psi.amplitudes());
    }

    let mut outcomes = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut projected = CVector::zeros(amplitudes.len());
        for (x, z) in amplitudes.iter().enumerate() {
            if x.count_ones() as usize == k {
                projected[x] = *z;
            }
        }
        let probability = projected.norm_squared();
        let (state, magnitude_defect) = if probability > 0.0 {
            let state = projected.unscale(probability.sqrt());
            let target = 2f64.powf(-0.5 * log2_binomial(n, k));
            let defect = state
                .iter()
                .enumerate()
                .filter(|(x, _)| x.count_ones() as usize == k)
                .map(|(_, z)| (z.norm() - target).abs())
                .fold(0.0, f64::max);
            (Some(state), defect)
        } else {
            (None, 0.0)
        };
        outcomes.push(ExactOutcome { k, probability, state, magnitude_defect });
    }
    Ok(ExactRun { n, amplitudes, outcomes })
}

fn cumulative(ps: impl Iterator<Item = f64>) -> Vec<f64> {
    ps.scan(0.0, |acc, p| {
        *acc += p;
        Some(*acc)
    })
    .collect()
}

/// Smallest index with `u < cdf[i]`; rounding mass at the top goes to the last
/// outcome with nonzero probability.
fn invert_cdf(cdf: &[f64], u: f64) -> usize {
    let i = cdf.partition_point(|&c| c <= u);
    if i < cdf.len() {
        return i;
    }
    let last = cdf[cdf.len() - 1];
    cdf.iter().position(|&c| c >= last).unwrap_or(cdf.len() - 1)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistillationReport {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    /// Randomness of one input copy.
    pub input_randomness: f64,
    /// Sampled outcome of each group, in group order.
    pub outcomes: Vec<GroupOutcome>,
    /// `sum_j log2 D_{k_j}`.
    pub total_log2_d: f64,
    /// Extracted copies of `|Psi_2>`.
    pub r: u64,
    /// `r / (N M)`.
    #[serde(rename = "yield")]
    pub yield_per_copy: f64,
    /// `N M R(psi) - r`.
    pub loss_actual: f64,
    /// `M log2 N + 1`.
    pub loss_bound: f64,
    pub within_bound: bool,
}

/// Bookkeeping simulation of `M` groups of `N` copies. Group `j` draws its
/// outcome from its own substream, so the result does not depend on
/// scheduling.
pub fn distill_simulate(psi: &PureState, n: usize, m: usize, seed: u64) -> Result<DistillationReport> {
    qubit_amplitudes(psi)?;
    if n == 0 || m == 0 {
        return Err(Error::InvalidInput("N and M must be at least 1".into()));
    }
    let p0 = psi.amplitudes()[0].norm_sqr();
    let dist = binomial_outcome_distribution(n, p0.clamp(0.0, 1.0))?;
    let cdf = cumulative(dist.iter().map(|o| o.probability));
    let outcomes: Vec<GroupOutcome> = (0..m)
        .into_par_iter()
        .map(|j| dist[invert_cdf(&cdf, rng::substream(seed, j as u64).random())])
        .collect();

    let total_log2_d: f64 = outcomes.iter().map(|o| o.log2_dk).sum();
    let r = (total_log2_d + FLOOR_SLACK).floor().max(0.0) as u64;
    let input_randomness = r_pure(psi).value;
    let copies = (n * m) as f64;
    let loss_actual = copies * input_randomness - r as f64;
    let loss_bound = m as f64 * (n as f64).log2() + 1.0;
    Ok(DistillationReport {
        n,
        m,
        seed,
        input_randomness,
        outcomes,
        total_log2_d,
        r,
        yield_per_copy: r as f64 / copies,
        loss_actual,
        loss_bound,
        within_bound: loss_actual <= loss_bound,
    })
}

/// `(loss_actual, loss_bound)` of a report.
pub fn coherence_loss_ledger(report: &DistillationReport) -> (f64, f64) {
    (report.loss_actual, report.loss_bound)
}

/// Per-copy roof of `rho^{copies}` for `copies` in `{1, 2}`.
///
/// The two-copy run is warm-started from the product of the single-copy
/// optimum, so it never exceeds twice the single-copy estimate.
pub fn regularized_roof_estimate(rho: &DensityMatrix, copies: usize, config: &RoofConfig) -> Result<f64> {
    if !(1..=2).contains(&copies) {
        return Err(Error::InvalidInput(format!("copies must be 1 or 2, got {copies}")));
    }
    let d = rho.dim();
    if d.checked_pow(copies as u32).is_none_or(|dn| dn > REGULARIZED_MAX_DIM) {
        return Err(Error::TooLarge(format!("{d}^{copies} exceeds {REGULARIZED_MAX_DIM}")));
    }
    let single = optimize_roof(rho, config)?;
    if copies == 1 {
        return Ok(single.value);
    }
    let warm = single.best_decomposition.tensor(&single.best_decomposition);
    let joint = optimize_roof_with_starts(&rho.tensor(rho), config, &[warm])?;
    Ok(joint.value / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{is_incoherent_kraus_set, projection_partition_kraus};
    use crate::measures::r_qubit_analytic;
    use crate::state::{binary_entropy, bloch_to_density, random_incoherent, BlochVector};

    fn exact_binomial(n: u64, k: u64) -> u128 {
        (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
    }

    #[test]
    fn distribution_matches_direct_expansion() {
        for n in 1..=30usize {
            for p0 in [0.0, 0.1, 0.5, 0.8, 0.9, 1.0] {
                let dist = binomial_outcome_distribution(n, p0).unwrap();
                assert_eq!(dist.len(), n + 1);
                let total: f64 = dist.iter().map(|o| o.probability).sum();
                assert!((total - 1.0).abs() < 1e-10);
                for o in &dist {
                    let c = exact_binomial(n as u64, o.k as u64) as f64;
                    let direct = c * p0.powi((n - o.k) as i32) * (1.0 - p0).powi(o.k as i32);
                    assert!((o.probability - direct).abs() < 1e-12, "n={n} p0={p0} k={}", o.k);
                    assert!((o.log2_dk - c.log2()).abs() < 1e-9);
                }
            }
        }
        let p: Vec<f64> = binomial_outcome_distribution(3, 0.9).unwrap().iter().map(|o| o.probability).collect();
        for (a, b) in p.iter().zip([0.729, 0.243, 0.027, 0.001]) {
            assert!((a - b).abs() < 1e-12);
        }
        let fair = binomial_outcome_distribution(2, 0.5).unwrap();
        assert!((fair[1].probability - 0.5).abs() < 1e-15 && (fair[1].log2_dk - 1.0).abs() < 1e-12);
        assert!(binomial_outcome_distribution(0, 0.5).is_err());
        assert!(binomial_outcome_distribution(3, 1.5).is_err());
    }

    #[test]
    fn huge_groups_do_not_overflow() {
        let dist = binomial_outcome_distribution(5000, 0.3).unwrap();
        let total: f64 = dist.iter().map(|o| o.probability).sum();
        assert!((total - 1.0).abs() < 1e-10);
        assert!(dist.iter().all(|o| o.log2_dk.is_finite()));
    }

    #[test]
    fn exact_tensor_power_and_outcome_states() {
        let psi = PureState::from_slice(&[C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        let run = distill_exact(&psi, 5).unwrap();
        for (x, z) in run.amplitudes.iter().enumerate() {
            // First copy is the most significant bit; only the weight matters.
            let w = x.count_ones() as i32;
            let expected = C64::new(0.6, 0.0).powi(5 - w) * C64::new(0.0, 0.8).powi(w);
            assert!((z - expected).norm() < 1e-12);
        }
        for o in &run.outcomes {
            assert!(o.magnitude_defect < 1e-10);
            let state = o.state.as_ref().unwrap();
            let probs: Vec<f64> = state.iter().map(|z| z.norm_sqr()).filter(|&p| p > 0.0).collect();
            let r = crate::state::entropy_bits(probs);
            assert!((r - (exact_binomial(5, o.k as u64) as f64).log2()).abs() < 1e-9);
        }
    }

    #[test]
    fn exact_examples() {
        let run = distill_exact(&PureState::qubit_from_population(0.8).unwrap(), 2).unwrap();
        assert!((run.outcomes[1].probability - 0.32).abs() < 1e-12);
        let s = run.outcomes[1].state.as_ref().unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s[1].re - h).abs() < 1e-12 && (s[2].re - h).abs() < 1e-12);

        let run = distill_exact(&PureState::maximally_coherent(2), 4).unwrap();
        assert!((run.outcomes[2].probability - 6.0 / 16.0).abs() < 1e-12);
        let s = run.outcomes[2].state.as_ref().unwrap();
        assert_eq!(s.iter().filter(|z| z.norm() > 0.0).count(), 6);

        let run = distill_exact(&PureState::basis(2, 0), 3).unwrap();
        assert!(run.outcomes[1].state.is_none());
        assert!(matches!(distill_exact(&PureState::basis(2, 0), 21), Err(Error::TooLarge(_))));
        assert!(matches!(distill_exact(&PureState::basis(3, 0), 2), Err(Error::DimensionNot2(3))));
    }

    #[test]
    fn exact_frequencies_within_three_sigma() {
        // 130 outcomes at 0.27% two-sided each: about 0.35 excursions expected.
        let shots = 10_000;
        let mut outcomes = 0;
        let mut excursions = Vec::new();
        for n in 1..=10usize {
            for p0 in [0.5, 0.8] {
                let run = distill_exact(&PureState::qubit_from_population(p0).unwrap(), n).unwrap();
                let counts = run.sample_outcomes(shots, 100 + n as u64);
                for o in binomial_outcome_distribution(n, p0).unwrap() {
                    let f = counts[o.k] as f64 / shots as f64;
                    let sigma = (o.probability * (1.0 - o.probability) / shots as f64).sqrt();
                    outcomes += 1;
                    if (f - o.probability).abs() > 3.0 * sigma + 1e-12 {
                        excursions.push((n, p0, o.k));
                    }
                    assert!((f - o.probability).abs() <= 5.0 * sigma + 1e-12, "n={n} p0={p0} k={}", o.k);
                }
            }
        }
        assert_eq!(outcomes, 130);
        assert!(excursions.len() <= 2, "{excursions:?}");
    }

    #[test]
    fn simulate_incoherent_and_deterministic() {
        let r = distill_simulate(&PureState::basis(2, 0), 50, 20, 1).unwrap();
        assert_eq!(r.r, 0);
        assert_eq!(r.yield_per_copy, 0.0);
        assert_eq!(coherence_loss_ledger(&r).0, 0.0);
        let psi = PureState::qubit_from_population(0.8).unwrap();
        assert_eq!(distill_simulate(&psi, 50, 200, 9).unwrap(), distill_simulate(&psi, 50, 200, 9).unwrap());
        assert!(distill_simulate(&psi, 0, 3, 0).is_err());
    }

    #[test]
    fn floor_of_total_dimension() {
        // N=2 from |+>: every outcome has D in {1, 2}, so r counts the k=1 groups.
        let r = distill_simulate(&PureState::maximally_coherent(2), 2, 500, 4).unwrap();
        let ones = r.outcomes.iter().filter(|o| o.k == 1).count() as u64;
        assert_eq!(r.r, ones);
        assert!(2f64.powf(r.r as f64) <= 2f64.powf(r.total_log2_d) * (1.0 + 1e-9));
        assert!(r.total_log2_d < (r.r + 1) as f64);
    }

    /// Expected per-copy yield `E[log2 C(N,k)] / N`, without the floor.
    fn expected_yield(n: usize, p0: f64) -> f64 {
        binomial_outcome_distribution(n, p0).unwrap().iter().map(|o| o.probability * o.log2_dk).sum::<f64>() / n as f64
    }

    #[test]
    fn yield_tracks_binomial_expectation() {
        for p0 in [0.5, 0.8] {
            let mut last = 0.0;
            for n in [10, 50, 200] {
                let mean: f64 =
                    (0..5).map(|s| distill_simulate(&PureState::qubit_from_population(p0).unwrap(), n, 200, s).unwrap().yield_per_copy).sum::<f64>() / 5.0;
                assert!((mean - expected_yield(n, p0)).abs() < 0.01, "p0={p0} n={n}: {mean}");
                assert!(mean <= binary_entropy(p0) + 1e-12);
                assert!(mean > last);
                last = mean;
            }
        }
    }

    #[test]
    fn loss_never_negative_and_bounded_for_large_groups() {
        let psi = PureState::qubit_from_population(0.8).unwrap();
        for seed in 0..20 {
            for n in [1, 2, 3, 10, 50, 200] {
                let r = distill_simulate(&psi, n, 200, seed).unwrap();
                assert!(r.loss_actual >= -1e-9);
                // The outcome entropy is at most log2(N + 1) per group.
                assert!(r.loss_actual <= 200.0 * ((n + 1) as f64).log2() + 1.0);
                if n >= 10 {
                    assert!(r.within_bound, "n={n} seed={seed}");
                }
            }
        }
        // log2 N per group undercounts for tiny groups: N = 1 distills nothing,
        // and N = 2 loses H(0.64, 0.32, 0.04) = 1.12 bits per group on average.
        assert!(!distill_simulate(&psi, 1, 10, 0).unwrap().within_bound);
        assert!(!distill_simulate(&psi, 2, 200, 0).unwrap().within_bound);
    }

    #[test]
    fn ledger_example_two_copies_of_plus() {
        let plus = PureState::maximally_coherent(2);
        let seed = (0..).find(|&s| distill_simulate(&plus, 2, 1, s).unwrap().outcomes[0].k == 1).unwrap();
        let r = distill_simulate(&plus, 2, 1, seed).unwrap();
        assert_eq!(r.r, 1);
        assert!((r.loss_actual - 1.0).abs() < 1e-12);
        assert!((r.loss_bound - 2.0).abs() < 1e-12);
    }

    #[test]
    fn weight_partition_is_incoherent() {
        for n in 1..=6usize {
            let mut blocks = vec![Vec::new(); n + 1];
            for x in 0..1usize << n {
                blocks[x.count_ones() as usize].push(x);
            }
            let ks = projection_partition_kraus(&blocks, 1 << n).unwrap();
            assert!(is_incoherent_kraus_set(&ks));
            // Step 3 projection onto the first 2^r strings plus its complement.
            let r = 2usize.min(n);
            let head: Vec<usize> = (0..1 << r).collect();
            let tail: Vec<usize> = (1 << r..1 << n).collect();
            let parts = if tail.is_empty() { vec![head] } else { vec![head, tail] };
            assert!(is_incoherent_kraus_set(&projection_partition_kraus(&parts, 1 << n).unwrap()));
        }
    }

    #[test]
    fn regularized_estimates() {
        let cfg = RoofConfig { restarts: 4, ..RoofConfig::default() };
        let psi = PureState::qubit_from_population(0.7).unwrap();
        let v = regularized_roof_estimate(&DensityMatrix::from_pure(&psi), 2, &cfg).unwrap();
        assert!((v - binary_entropy(0.7)).abs() < 1e-6);
        let delta = random_incoherent(3, 1);
        assert!(regularized_roof_estimate(&delta, 2, &cfg).unwrap().abs() < 1e-9);
        let rho = bloch_to_density(&BlochVector::new(0.6, 0.0, 0.0).unwrap());
        let analytic = r_qubit_analytic(&rho).unwrap().value;
        assert!((analytic - 0.4690).abs() < 1e-4);
        assert!(regularized_roof_estimate(&rho, 2, &cfg).unwrap() <= analytic + 1e-6);
        assert!(matches!(regularized_roof_estimate(&random_incoherent(5, 0), 2, &cfg), Err(Error::TooLarge(_))));
        assert!(regularized_roof_estimate(&rho, 3, &cfg).is_err());
    }
}
