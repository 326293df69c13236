//! Finite-dimensional quantum states in a fixed computational basis.
//!
//! [`DensityMatrix`], [`PureState`], [`ProbabilityVector`] and
//! [`BlochVector`] are validated on construction and immutable afterwards.
//! Entropies are in bits; eigenvalues in `[-1e-10, 0)` count as zero.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default tolerance for Hermiticity, trace and positivity checks.
pub const VALIDATION_TOL: f64 = 1e-10;
/// Tolerance on `|sum |a_i|^2 - 1|` for pure states.
pub const NORM_TOL: f64 = 1e-12;
/// Tolerance on `|sum p_i - 1|` for probability vectors.
pub const PROB_TOL: f64 = 1e-12;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: CMatrix,
}

/// Hermitian eigen-decomposition. Only the Hermitian part of `m` is used.
pub fn eigh(m: &CMatrix) -> HermitianEigen {
    let n = m.nrows();
    let sym = hermitian_part(m);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    HermitianEigen { values, vectors }
}

pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// `-sum p log2 p` over the positive entries.
pub(crate) fn entropy_bits<I: IntoIterator<Item = f64>>(ps: I) -> f64 {
    ps.into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

/// Binary entropy `H(p) = -p log2 p - (1-p) log2 (1-p)`.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_bits([p, 1.0 - p])
}

fn complex_gaussian(rng: &mut rng::Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

pub(crate) fn random_complex_matrix(rows: usize, cols: usize, rng: &mut rng::Rng) -> CMatrix {
    // Column-major fill keeps the draw order independent of nalgebra internals.
    let mut m = CMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}

// ---------------------------------------------------------------------------
// ProbabilityVector

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidProbability("empty vector".into()));
        }
        if let Some(bad) = p.iter().find(|x| !(**x >= 0.0)) {
            return Err(Error::InvalidProbability(format!("entry {bad} is negative or NaN")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidProbability(format!("entries sum to {total}")));
        }
        Ok(Self(p))
    }

    /// Clamps negative rounding noise to zero; the caller guarantees the sum.
    pub(crate) fn from_unchecked(p: Vec<f64>) -> Self {
        Self(p.into_iter().map(|x| x.max(0.0)).collect())
    }

    pub fn uniform(d: usize) -> Self {
        Self(vec![1.0 / d as f64; d])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Min-entropy `-log2 max_i p_i`.
    pub fn min_entropy(&self) -> f64 {
        let pmax = self.0.iter().copied().fold(0.0, f64::max);
        -pmax.log2()
    }
}

/// Shannon entropy in bits with `0 log 0 = 0`.
pub fn shannon_entropy(p: &ProbabilityVector) -> f64 {
    entropy_bits(p.0.iter().copied())
}

// ---------------------------------------------------------------------------
// PureState

/// Unit-norm amplitude vector `|psi> = sum_i a_i |i>`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidInput("pure state of dimension 0".into()));
        }
        let defect = (amplitudes.norm_squared() - 1.0).abs();
        if defect > NORM_TOL {
            return Err(Error::NotNormalized(defect));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if amplitudes.is_empty() || !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidInput("cannot normalize a zero vector".into()));
        }
        Ok(Self { amplitudes: amplitudes.unscale(norm) })
    }

    pub fn from_slice(amplitudes: &[C64]) -> Result<Self> {
        Self::new(CVector::from_column_slice(amplitudes))
    }

    pub fn basis(d: usize, i: usize) -> Self {
        assert!(i < d, "basis index {i} out of range for dimension {d}");
        let mut a = CVector::zeros(d);
        a[i] = ONE;
        Self { amplitudes: a }
    }

    /// Equal superposition `|Psi_d> = d^{-1/2} sum_i |i>`.
    pub fn maximally_coherent(d: usize) -> Self {
        assert!(d > 0);
        let a = C64::new(1.0 / (d as f64).sqrt(), 0.0);
        Self { amplitudes: CVector::from_element(d, a) }
    }

    /// Qubit `sqrt(p0)|0> + sqrt(1-p0)|1>` with real non-negative amplitudes.
    pub fn qubit_from_population(p0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p0) {
            return Err(Error::InvalidInput(format!("population {p0} outside [0, 1]")));
        }
        Ok(Self {
            amplitudes: CVector::from_vec(vec![
                C64::new(p0.sqrt(), 0.0),
                C64::new((1.0 - p0).sqrt(), 0.0),
            ]),
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// Born probabilities `|a_i|^2` in the computational basis.
    pub fn probabilities(&self) -> ProbabilityVector {
        ProbabilityVector::from_unchecked(self.amplitudes.iter().map(|a| a.norm_sqr()).collect())
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState { amplitudes: self.amplitudes.kronecker(&other.amplitudes) }
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

// ---------------------------------------------------------------------------
// DensityMatrix

/// Hermitian, unit-trace, positive semidefinite `d x d` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

/// Checks the density-matrix invariants at tolerance `tol`.
///
/// Violations are reported in the order Hermiticity, trace, positivity.
pub fn validate_density(m: CMatrix, tol: f64) -> Result<DensityMatrix> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(Error::InvalidInput("density matrix of dimension 0".into()));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    let mut herm = 0.0f64;
    for i in 0..rows {
        for j in 0..rows {
            herm = herm.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    if herm > tol {
        return Err(Error::NotHermitian(herm));
    }
    let trace_defect = (m.trace() - ONE).norm();
    if trace_defect > tol {
        return Err(Error::TraceNotOne(trace_defect));
    }
    let h = hermitian_part(&m);
    let min_eig = eigh(&h).values.last().copied().unwrap_or(0.0);
    if min_eig < -tol {
        return Err(Error::NotPSD(min_eig));
    }
    Ok(DensityMatrix { m: h })
}

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        validate_density(m, VALIDATION_TOL)
    }

    /// Wraps a matrix known to be a state up to rounding (e.g. a channel
    /// output); only the Hermitian part is kept.
    pub(crate) fn from_hermitian_unchecked(m: CMatrix) -> Self {
        Self { m: hermitian_part(&m) }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let a = psi.amplitudes();
        Self { m: a * a.adjoint() }
    }

    /// Incoherent state `sum_i p_i |i><i|`.
    pub fn incoherent(p: &ProbabilityVector) -> Self {
        let diag = CVector::from_iterator(p.len(), p.as_slice().iter().map(|&x| C64::new(x, 0.0)));
        Self { m: CMatrix::from_diagonal(&diag) }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::incoherent(&ProbabilityVector::uniform(d))
    }

    pub fn maximally_coherent(d: usize) -> Self {
        Self::from_pure(&PureState::maximally_coherent(d))
    }

    /// Convex mixture `sum_k q_k rho_k`.
    pub fn mixture(ensemble: &[(f64, DensityMatrix)]) -> Result<Self> {
        let weights = ProbabilityVector::new(ensemble.iter().map(|(q, _)| *q).collect())?;
        let d = ensemble[0].1.dim();
        let mut m = CMatrix::zeros(d, d);
        for (q, rho) in weights.as_slice().iter().zip(ensemble.iter().map(|(_, r)| r)) {
            if rho.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: rho.dim() });
            }
            m += rho.matrix().scale(*q);
        }
        Ok(Self::from_hermitian_unchecked(m))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    /// Diagonal in the computational basis as a probability vector.
    pub fn diagonal(&self) -> ProbabilityVector {
        ProbabilityVector::from_unchecked((0..self.dim()).map(|i| self.m[(i, i)].re).collect())
    }

    pub fn eigen(&self) -> HermitianEigen {
        eigh(&self.m)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigen().values
    }

    /// Number of eigenvalues above `threshold`.
    pub fn rank(&self, threshold: f64) -> usize {
        self.eigenvalues().iter().filter(|&&l| l > threshold).count()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        Self::from_hermitian_unchecked(self.m.kronecker(&other.m))
    }

    /// `N`-fold tensor power.
    pub fn tensor_power(&self, copies: usize) -> DensityMatrix {
        assert!(copies >= 1);
        let mut out = self.clone();
        for _ in 1..copies {
            out = out.tensor(self);
        }
        out
    }

    pub fn is_incoherent(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| i == j || self.m[(i, j)].norm() <= tol))
    }
}

/// Removes all off-diagonal entries in the computational basis.
pub fn dephase(rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::incoherent(&rho.diagonal())
}

/// `S(rho) = -Tr rho log2 rho`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_bits(rho.eigenvalues())
}

// ---------------------------------------------------------------------------
// Bloch sphere

/// Qubit Bloch vector with `|n| <= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    x: f64,
    y: f64,
    z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !(norm * norm <= 1.0 + VALIDATION_TOL) {
            return Err(Error::BlochOutOfBall(norm));
        }
        Ok(Self { x, y, z })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn components(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Length of the component orthogonal to the z axis.
    pub fn transverse(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// `rho = (I + n_x X + n_y Y + n_z Z) / 2`.
pub fn bloch_to_density(n: &BlochVector) -> DensityMatrix {
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new((1.0 + n.z) / 2.0, 0.0),
            C64::new(n.x / 2.0, -n.y / 2.0),
            C64::new(n.x / 2.0, n.y / 2.0),
            C64::new((1.0 - n.z) / 2.0, 0.0),
        ],
    );
    DensityMatrix { m }
}

pub fn density_to_bloch(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::DimensionNot2(rho.dim()));
    }
    let m = rho.matrix();
    Ok(BlochVector {
        x: 2.0 * m[(1, 0)].re,
        y: 2.0 * m[(1, 0)].im,
        z: m[(0, 0)].re - m[(1, 1)].re,
    })
}

// ---------------------------------------------------------------------------
// Random states

/// Haar-random pure state from a normalized complex Gaussian vector.
pub fn haar_random_pure(d: usize, seed: u64) -> PureState {
    assert!(d > 0, "dimension must be positive");
    let mut rng = rng::seeded(seed);
    let g = random_complex_matrix(d, 1, &mut rng);
    PureState::normalized(g.column(0).into_owned()).expect("Gaussian vector is nonzero")
}

/// Random mixed state `G G^dag / Tr(G G^dag)` with `G` a `d x rank` complex
/// Gaussian matrix.
pub fn random_density(d: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    if d == 0 || rank == 0 || rank > d {
        return Err(Error::InvalidInput(format!("need 1 <= rank <= d, got rank {rank}, d {d}")));
    }
    let mut rng = rng::seeded(seed);
    let g = random_complex_matrix(d, rank, &mut rng);
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    Ok(DensityMatrix::from_hermitian_unchecked(w.unscale(tr)))
}

/// Random incoherent state with a Dirichlet(1, ..., 1) diagonal.
pub fn random_incoherent(d: usize, seed: u64) -> DensityMatrix {
    use rand_distr::Exp1;
    let mut rng = rng::seeded(seed);
    let draws: Vec<f64> = (0..d).map(|_| Exp1.sample(&mut rng)).collect();
    let total: f64 = draws.iter().sum();
    DensityMatrix::incoherent(&ProbabilityVector::from_unchecked(
        draws.into_iter().map(|x| x / total).collect(),
    ))
}
