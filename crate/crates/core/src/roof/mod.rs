//! Convex-roof evaluation of the intrinsic randomness
//! `R(rho) = min sum_e p_e H(|<i|psi_e>|^2)` over pure-state ensembles.
//!
//! Every size-`m` ensemble of a rank-`r` state arises from an `m x r`
//! isometry `W` acting on the eigen-decomposition `{lambda_j, |v_j>}`:
//!
//! ```text
//! |psi~_e> = sum_j W_ej sqrt(lambda_j) |v_j>,   p_e = <psi~_e|psi~_e>
//! ```
//!
//! [`optimize_roof`] searches over `W` with multi-start local descent on the
//! unitary orbit; the reported value is always the objective of an explicit
//! decomposition and therefore an upper bound on the true roof.
//! [`brute_force_roof_qubit`] is an independent grid search for qubits.

mod brute;
mod optimizer;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::r_pure;
use crate::rng;
use crate::state::{eigh, random_complex_matrix, CMatrix, CVector, DensityMatrix, PureState, C64};

pub use brute::brute_force_roof_qubit;

/// Eigenvalues at or below this are excluded from the ensemble support.
pub const RANK_THRESHOLD: f64 = 1e-10;
/// Ensemble members lighter than this are dropped.
pub const MIN_WEIGHT: f64 = 1e-12;
const ISOMETRY_TOL: f64 = 1e-10;
const RECONSTRUCTION_TOL: f64 = 1e-8;
const WEIGHT_SUM_TOL: f64 = 1e-10;

/// Weighted pure-state ensemble `{(p_e, |psi_e>)}` of a target state.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    elements: Vec<(f64, PureState)>,
    target_dim: usize,
}

impl Decomposition {
    /// Validates weights and that the ensemble mixes to `target`.
    pub fn new(elements: Vec<(f64, PureState)>, target: &DensityMatrix) -> Result<Self> {
        let d = target.dim();
        if elements.is_empty() {
            return Err(Error::InvalidInput("empty decomposition".into()));
        }
        if let Some((_, psi)) = elements.iter().find(|(_, psi)| psi.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: psi.dim() });
        }
        if let Some((p, _)) = elements.iter().find(|(p, _)| !(*p >= 0.0)) {
            return Err(Error::InvalidProbability(format!("weight {p} is negative")));
        }
        let total: f64 = elements.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidProbability(format!("weights sum to {total}")));
        }
        let decomp = Self { elements, target_dim: d };
        let err = (decomp.mixture() - target.matrix()).camax();
        if err > RECONSTRUCTION_TOL {
            return Err(Error::InvalidInput(format!(
                "ensemble does not reproduce the target state (max entry error {err:e})"
            )));
        }
        Ok(decomp)
    }

    /// Builds the ensemble from unnormalized member vectors stored as rows.
    pub(crate) fn from_rows(x: &CMatrix) -> Self {
        let d = x.ncols();
        let mut elements: Vec<(f64, PureState)> = x
            .row_iter()
            .filter_map(|row| {
                let p = row.norm_squared();
                (p >= MIN_WEIGHT).then(|| {
                    let v = CVector::from_iterator(d, row.iter().copied());
                    (p, PureState::normalized(v).expect("nonzero row"))
                })
            })
            .collect();
        let total: f64 = elements.iter().map(|(p, _)| p).sum();
        for (p, _) in &mut elements {
            *p /= total;
        }
        Self { elements, target_dim: d }
    }

    pub fn elements(&self) -> &[(f64, PureState)] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    /// `sum_e p_e |psi_e><psi_e|`.
    pub fn mixture(&self) -> CMatrix {
        let d = self.target_dim;
        let mut m = CMatrix::zeros(d, d);
        for (p, psi) in &self.elements {
            let a = psi.amplitudes();
            m += (a * a.adjoint()).scale(*p);
        }
        m
    }

    /// Product ensemble `{(p_e q_f, |psi_e> |phi_f>)}`.
    pub fn tensor(&self, other: &Decomposition) -> Decomposition {
        let elements = self
            .elements
            .iter()
            .flat_map(|(p, a)| other.elements.iter().map(move |(q, b)| (p * q, a.tensor(b))))
            .collect();
        Decomposition { elements, target_dim: self.target_dim * other.target_dim }
    }
}

/// `sum_e p_e R(|psi_e>)`.
pub fn roof_objective(decomp: &Decomposition) -> f64 {
    decomp.elements.iter().map(|(p, psi)| p * r_pure(psi).value).sum()
}

/// Support of a state: `S[j, i] = sqrt(lambda_j) <i|v_j>` over eigenvalues
/// above [`RANK_THRESHOLD`], so that ensemble rows are `X = W S`.
#[derive(Clone, Debug)]
pub(crate) struct Support {
    pub scaled: CMatrix,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl Support {
    pub fn of(rho: &DensityMatrix) -> Self {
        let eig = eigh(rho.matrix());
        let r = eig.values.iter().filter(|&&l| l > RANK_THRESHOLD).count();
        let d = rho.dim();
        let scaled =
            CMatrix::from_fn(r, d, |j, i| eig.vectors[(i, j)].scale(eig.values[j].sqrt()));
        Self {
            scaled,
            eigenvalues: eig.values[..r].to_vec(),
            eigenvectors: eig.vectors.columns(0, r).into_owned(),
        }
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }
}

fn isometry_defect(w: &CMatrix) -> f64 {
    let gram = w.adjoint() * w;
    (gram - CMatrix::identity(w.ncols(), w.ncols())).camax()
}

/// Ensemble generated by the isometry `w` (`m x rank`) from the
/// eigen-decomposition of `rho`.
pub fn decomposition_from_isometry(rho: &DensityMatrix, w: &CMatrix) -> Result<Decomposition> {
    let support = Support::of(rho);
    if w.ncols() != support.rank() {
        return Err(Error::RankMismatch { expected: support.rank(), found: w.ncols() });
    }
    let defect = isometry_defect(w);
    if defect > ISOMETRY_TOL {
        return Err(Error::NotIsometry(defect));
    }
    Ok(Decomposition::from_rows(&(w * &support.scaled)))
}

/// Inverse of [`decomposition_from_isometry`]: `W_ej = <v_j|psi~_e> / sqrt(lambda_j)`,
/// padded with zero rows to `m` and re-orthonormalized.
pub fn isometry_from_decomposition(
    rho: &DensityMatrix,
    decomp: &Decomposition,
    m: usize,
) -> Result<CMatrix> {
    if decomp.target_dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: decomp.target_dim() });
    }
    if decomp.len() > m {
        return Err(Error::InvalidConfig(format!(
            "decomposition has {} members but the ensemble size is {m}",
            decomp.len()
        )));
    }
    let support = Support::of(rho);
    let r = support.rank();
    let mut w = CMatrix::zeros(m, r);
    for (e, (p, psi)) in decomp.elements().iter().enumerate() {
        let tilde = psi.amplitudes().scale(p.sqrt());
        for j in 0..r {
            let overlap = support.eigenvectors.column(j).dotc(&tilde);
            w[(e, j)] = overlap.unscale(support.eigenvalues[j].sqrt());
        }
    }
    Ok(polar_orthonormalize(&w))
}

/// Closest isometry `W (W^dag W)^{-1/2}`.
pub(crate) fn polar_orthonormalize(w: &CMatrix) -> CMatrix {
    let eig = eigh(&(w.adjoint() * w));
    let n = w.ncols();
    let mut inv_sqrt = CMatrix::zeros(n, n);
    for k in 0..n {
        let v = eig.vectors.column(k);
        inv_sqrt += (v * v.adjoint()).scale(1.0 / eig.values[k].max(1e-300).sqrt());
    }
    w * inv_sqrt
}

fn random_isometry(m: usize, r: usize, rng: &mut rng::Rng) -> CMatrix {
    polar_orthonormalize(&random_complex_matrix(m, r, rng))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoofConfig {
    /// Ensemble size `m`; `None` means `rank^2`.
    pub ensemble_size: Option<usize>,
    /// Number of descent runs. The first starts from the eigen-decomposition,
    /// the rest from random isometries.
    pub restarts: usize,
    pub max_iterations: usize,
    /// Gradient-norm threshold for convergence.
    pub tolerance: f64,
    /// Central-difference step.
    pub fd_step: f64,
    pub seed: u64,
}

impl Default for RoofConfig {
    fn default() -> Self {
        Self {
            ensemble_size: None,
            restarts: 16,
            max_iterations: 2000,
            tolerance: 1e-8,
            fd_step: 1e-6,
            seed: 0,
        }
    }
}

impl RoofConfig {
    pub fn ensemble_size_for(&self, rank: usize) -> usize {
        self.ensemble_size.unwrap_or(rank * rank)
    }

    fn validate(&self, rank: usize) -> Result<()> {
        let m = self.ensemble_size_for(rank);
        if m < rank {
            return Err(Error::InvalidConfig(format!("ensemble size {m} below rank {rank}")));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("at least one restart is required".into()));
        }
        if !(self.tolerance > 0.0) || !(self.fd_step > 0.0) {
            return Err(Error::InvalidConfig("tolerance and step must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct RoofResult {
    pub value: f64,
    pub best_decomposition: Decomposition,
    /// Whether the best run met the convergence criterion.
    pub converged: bool,
    pub restarts_used: usize,
    /// Final objective of every run, in start order.
    pub restart_values: Vec<f64>,
    /// Start index of the winning run.
    pub best_restart: usize,
    pub iterations: usize,
}

/// Minimizes the ensemble-average randomness over decompositions of `rho`.
pub fn optimize_roof(rho: &DensityMatrix, config: &RoofConfig) -> Result<RoofResult> {
    optimize_roof_with_starts(rho, config, &[])
}

/// Like [`optimize_roof`], with extra starting ensembles tried before the
/// eigen-decomposition and the random starts.
pub fn optimize_roof_with_starts(
    rho: &DensityMatrix,
    config: &RoofConfig,
    warm_starts: &[Decomposition],
) -> Result<RoofResult> {
    let support = Support::of(rho);
    let r = support.rank();
    config.validate(r)?;

    if r == 1 {
        let v = CVector::from_iterator(rho.dim(), support.scaled.row(0).iter().copied());
        let decomp = Decomposition {
            elements: vec![(1.0, PureState::normalized(v)?)],
            target_dim: rho.dim(),
        };
        let value = roof_objective(&decomp);
        return Ok(RoofResult {
            value,
            best_decomposition: decomp,
            converged: true,
            restarts_used: 1,
            restart_values: vec![value],
            best_restart: 0,
            iterations: 0,
        });
    }

    let m = config.ensemble_size_for(r);
    let mut starts = warm_starts
        .iter()
        .map(|d| isometry_from_decomposition(rho, d, m))
        .collect::<Result<Vec<_>>>()?;
    let mut eigen_start = CMatrix::zeros(m, r);
    for j in 0..r {
        eigen_start[(j, j)] = C64::new(1.0, 0.0);
    }
    starts.push(eigen_start);
    for k in 1..config.restarts {
        starts.push(random_isometry(m, r, &mut rng::substream(config.seed, k as u64)));
    }

    let settings = optimizer::Settings {
        max_iterations: config.max_iterations,
        tolerance: config.tolerance,
        fd_step: config.fd_step,
    };
    let runs: Vec<optimizer::LocalMinimum> = starts
        .into_par_iter()
        .map(|w| optimizer::descend(w, &support.scaled, &settings))
        .collect();

    let restart_values: Vec<f64> = runs.iter().map(|run| run.value).collect();
    let best_restart = (0..runs.len())
        .min_by(|&a, &b| restart_values[a].total_cmp(&restart_values[b]).then(a.cmp(&b)))
        .expect("at least one start");
    let best = &runs[best_restart];
    let best_decomposition = Decomposition::from_rows(&best.rows);
    Ok(RoofResult {
        value: roof_objective(&best_decomposition).max(0.0),
        best_decomposition,
        converged: best.converged,
        restarts_used: runs.len(),
        restart_values,
        best_restart,
        iterations: best.iterations,
    })
}

/// Ensemble given directly by the eigen-decomposition.
pub fn eigen_decomposition(rho: &DensityMatrix) -> Decomposition {
    Decomposition::from_rows(&Support::of(rho).scaled)
}
