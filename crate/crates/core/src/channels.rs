//! Kraus-operator channels, with emphasis on incoherent ones.
//!
//! A Kraus set is incoherent when every column of every operator has at most
//! one nonzero entry: each `K_n` then maps basis states to (multiples of)
//! basis states, so `K_n delta K_n^dag` stays diagonal for diagonal `delta`.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng;
use crate::state::{random_complex_matrix, CMatrix, DensityMatrix, ONE, ZERO};

/// Completeness tolerance on `sum_n K_n^dag K_n = I`.
pub const TRACE_PRESERVATION_TOL: f64 = 1e-10;
/// Entries at or below this magnitude count as zero in the structure test.
pub const STRUCTURE_TOL: f64 = 1e-12;
/// Selective outcomes with probability at or below this are omitted.
pub const MIN_OUTCOME_PROBABILITY: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct KrausSet {
    operators: Vec<CMatrix>,
    dim: usize,
}

impl KrausSet {
    /// Checks shapes only; see [`KrausSet::is_trace_preserving`] and
    /// [`is_incoherent_kraus_set`].
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::InvalidInput("empty Kraus set".into()))?;
        let dim = first.nrows();
        for k in &operators {
            let (rows, cols) = k.shape();
            if rows != cols {
                return Err(Error::NotSquare { rows, cols });
            }
            if rows != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: rows });
            }
        }
        Ok(Self { operators, dim })
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// `max |(sum_n K_n^dag K_n - I)_ij|`.
    pub fn completeness_defect(&self) -> f64 {
        let mut total = CMatrix::zeros(self.dim, self.dim);
        for k in &self.operators {
            total += k.adjoint() * k;
        }
        (total - CMatrix::identity(self.dim, self.dim)).camax()
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.completeness_defect() <= TRACE_PRESERVATION_TOL
    }

    /// Every column of every operator has at most one entry above
    /// [`STRUCTURE_TOL`].
    pub fn has_incoherent_structure(&self) -> bool {
        self.operators.iter().all(|k| {
            k.column_iter()
                .all(|col| col.iter().filter(|z| z.norm() > STRUCTURE_TOL).count() <= 1)
        })
    }

    /// Completely dephasing channel `{|i><i|}`.
    pub fn dephasing(d: usize) -> Self {
        let ops = (0..d)
            .map(|i| {
                let mut k = CMatrix::zeros(d, d);
                k[(i, i)] = ONE;
                k
            })
            .collect();
        Self { operators: ops, dim: d }
    }

    pub fn identity(d: usize) -> Self {
        Self { operators: vec![CMatrix::identity(d, d)], dim: d }
    }

    /// Single permutation operator `|perm[j]><j|`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let d = perm.len();
        let mut seen = vec![false; d];
        for &p in perm {
            if p >= d || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidInput(format!("{perm:?} is not a permutation")));
            }
        }
        let mut k = CMatrix::zeros(d, d);
        for (j, &i) in perm.iter().enumerate() {
            k[(i, j)] = ONE;
        }
        Ok(Self { operators: vec![k], dim: d })
    }
}

/// Trace preserving and structurally incoherent.
pub fn is_incoherent_kraus_set(ks: &KrausSet) -> bool {
    ks.is_trace_preserving() && ks.has_incoherent_structure()
}

/// Random incoherent Kraus set.
///
/// Each operator is a random row permutation times a random complex diagonal,
/// so `sum_n K_n^dag K_n` is diagonal; rescaling every column by the inverse
/// square root of that diagonal makes the set exactly trace preserving.
pub fn random_incoherent_kraus(d: usize, n_ops: usize, seed: u64) -> Result<KrausSet> {
    if d == 0 || n_ops == 0 {
        return Err(Error::InvalidInput("need d >= 1 and n_ops >= 1".into()));
    }
    let mut rng = rng::seeded(seed);
    let mut ops = Vec::with_capacity(n_ops);
    for _ in 0..n_ops {
        let mut rows: Vec<usize> = (0..d).collect();
        rows.shuffle(&mut rng);
        let weights = random_complex_matrix(d, 1, &mut rng);
        let mut k = CMatrix::zeros(d, d);
        for j in 0..d {
            k[(rows[j], j)] = weights[j];
        }
        ops.push(k);
    }
    for j in 0..d {
        let norm2: f64 = ops.iter().map(|k| k.column(j).norm_squared()).sum();
        let scale = 1.0 / norm2.sqrt();
        for k in &mut ops {
            k.column_mut(j).scale_mut(scale);
        }
    }
    Ok(KrausSet { operators: ops, dim: d })
}

/// Projectors `P_alpha = sum_{i in I_alpha} |i><i|` for a partition of the
/// (0-based) basis indices `0..d`.
pub fn projection_partition_kraus(partition: &[Vec<usize>], d: usize) -> Result<KrausSet> {
    let mut owner = vec![None; d];
    for (alpha, block) in partition.iter().enumerate() {
        if block.is_empty() {
            return Err(Error::NotAPartition(format!("block {alpha} is empty")));
        }
        for &i in block {
            if i >= d {
                return Err(Error::NotAPartition(format!("index {i} out of range for d = {d}")));
            }
            if let Some(prev) = owner[i].replace(alpha) {
                return Err(Error::NotAPartition(format!(
                    "index {i} appears in blocks {prev} and {alpha}"
                )));
            }
        }
    }
    if let Some(i) = owner.iter().position(Option::is_none) {
        return Err(Error::NotAPartition(format!("index {i} is not covered")));
    }
    let ops = partition
        .iter()
        .map(|block| {
            let mut p = CMatrix::zeros(d, d);
            for &i in block {
                p[(i, i)] = ONE;
            }
            p
        })
        .collect();
    Ok(KrausSet { operators: ops, dim: d })
}

fn check_compatible(rho: &DensityMatrix, ks: &KrausSet) -> Result<()> {
    if rho.dim() != ks.dim() {
        return Err(Error::DimensionMismatch { expected: ks.dim(), found: rho.dim() });
    }
    let defect = ks.completeness_defect();
    if defect > TRACE_PRESERVATION_TOL {
        return Err(Error::NotTracePreserving(defect));
    }
    Ok(())
}

/// `Phi(rho) = sum_n K_n rho K_n^dag`.
pub fn apply_channel(rho: &DensityMatrix, ks: &KrausSet) -> Result<DensityMatrix> {
    check_compatible(rho, ks)?;
    let d = rho.dim();
    let mut out = CMatrix::from_element(d, d, ZERO);
    for k in ks.operators() {
        out += k * rho.matrix() * k.adjoint();
    }
    Ok(DensityMatrix::from_hermitian_unchecked(out))
}

#[derive(Clone, Debug)]
pub struct SelectiveOutcome {
    /// Index of the Kraus operator.
    pub index: usize,
    pub probability: f64,
    pub state: DensityMatrix,
}

/// Post-selected outcomes `p_n = Tr K_n rho K_n^dag`,
/// `rho_n = K_n rho K_n^dag / p_n`, omitting `p_n <= 1e-12`.
pub fn apply_selective(rho: &DensityMatrix, ks: &KrausSet) -> Result<Vec<SelectiveOutcome>> {
    check_compatible(rho, ks)?;
    Ok(ks
        .operators()
        .iter()
        .enumerate()
        .filter_map(|(index, k)| {
            let unnormalized = k * rho.matrix() * k.adjoint();
            let p = unnormalized.trace().re;
            (p > MIN_OUTCOME_PROBABILITY).then(|| SelectiveOutcome {
                index,
                probability: p,
                state: DensityMatrix::from_hermitian_unchecked(unnormalized.unscale(p)),
            })
        })
        .collect())
}
