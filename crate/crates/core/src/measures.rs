//! Closed-form coherence quantifiers.
//!
//! Entropy-based values are in bits; the l1 measure is dimensionless.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{
    binary_entropy, dephase, shannon_entropy, von_neumann_entropy, BlochVector,
    CMatrix, DensityMatrix, PureState, C64,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureId {
    /// Relative entropy of coherence.
    RelEnt,
    /// Sum of off-diagonal magnitudes.
    L1,
    /// Intrinsic randomness (convex roof of the outcome entropy).
    RoofRandomness,
    /// Exact qubit intrinsic randomness from the coherence concurrence.
    QubitAnalytic,
}

impl MeasureId {
    pub const ALL: [MeasureId; 4] =
        [MeasureId::RelEnt, MeasureId::L1, MeasureId::RoofRandomness, MeasureId::QubitAnalytic];

    pub fn name(self) -> &'static str {
        match self {
            MeasureId::RelEnt => "rel-ent",
            MeasureId::L1 => "l1",
            MeasureId::RoofRandomness => "roof-randomness",
            MeasureId::QubitAnalytic => "qubit-analytic",
        }
    }

    /// Whether values are bounded by `log2 d` (all but l1).
    pub fn is_entropic(self) -> bool {
        !matches!(self, MeasureId::L1)
    }
}

impl fmt::Display for MeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MeasureId::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown measure '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureValue {
    pub value: f64,
    pub measure: MeasureId,
}

impl MeasureValue {
    fn new(measure: MeasureId, value: f64) -> Self {
        Self { value, measure }
    }
}

/// `S(rho_diag) - S(rho)`, the minimum of `S(rho || delta)` over incoherent
/// `delta` (attained at `delta = rho_diag`).
pub fn c_rel_ent(rho: &DensityMatrix) -> MeasureValue {
    let gap = von_neumann_entropy(&dephase(rho)) - von_neumann_entropy(rho);
    MeasureValue::new(MeasureId::RelEnt, gap.max(0.0))
}

/// `sum_{i != j} |rho_ij|`.
pub fn c_l1(rho: &DensityMatrix) -> MeasureValue {
    let m = rho.matrix();
    let d = rho.dim();
    let mut total = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                total += m[(i, j)].norm();
            }
        }
    }
    MeasureValue::new(MeasureId::L1, total)
}

/// Shannon entropy of the computational-basis outcome distribution.
pub fn r_pure(psi: &PureState) -> MeasureValue {
    MeasureValue::new(MeasureId::RoofRandomness, shannon_entropy(&psi.probabilities()))
}

fn require_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 2 {
        return Err(Error::DimensionNot2(rho.dim()));
    }
    Ok(())
}

fn sigma_x() -> CMatrix {
    let (z, o) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    CMatrix::from_row_slice(2, 2, &[z, o, o, z])
}

/// `M = rho sigma_x rho^* sigma_x`, with `rho^*` the entrywise conjugate.
pub fn concurrence_matrix(rho: &DensityMatrix) -> Result<CMatrix> {
    require_qubit(rho)?;
    let sx = sigma_x();
    let m = rho.matrix();
    Ok(m * &sx * m.conjugate() * &sx)
}

/// Eigenvalues `eta_1 >= eta_2 >= 0` of [`concurrence_matrix`].
///
/// They are the roots of `x^2 - Tr(M) x + det(M)`; `det(M) = det(rho)^2`
/// is taken from the factorization, which avoids cancellation in the
/// entries of `M` for nearly pure states.
pub fn concurrence_eigenvalues(rho: &DensityMatrix) -> Result<[f64; 2]> {
    let trace = concurrence_matrix(rho)?.trace().re;
    let det = qubit_det(rho);
    let disc = (trace * trace - 4.0 * det * det).max(0.0).sqrt();
    Ok([((trace + disc) / 2.0).max(0.0), ((trace - disc) / 2.0).max(0.0)])
}

fn qubit_det(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    (m[(0, 0)].re * m[(1, 1)].re - m[(0, 1)].norm_sqr()).max(0.0)
}

/// Coherence concurrence `C_z = |sqrt(eta_1) - sqrt(eta_2)|`.
///
/// Evaluated as `sqrt(eta_1 + eta_2 - 2 sqrt(eta_1 eta_2))` with
/// `sqrt(eta_1 eta_2) = det(rho)`; the two forms are equal but this one does
/// not lose digits when the eigenvalues nearly coincide.
pub fn coherence_concurrence_qubit(rho: &DensityMatrix) -> Result<f64> {
    let trace = concurrence_matrix(rho)?.trace().re;
    Ok((trace - 2.0 * qubit_det(rho)).max(0.0).sqrt())
}

/// Bloch-sphere form `sqrt(n_x^2 + n_y^2)`.
pub fn concurrence_from_bloch(n: &BlochVector) -> f64 {
    n.transverse()
}

/// `H((1 + sqrt(1 - C^2)) / 2)`.
pub fn randomness_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    binary_entropy((1.0 + (1.0 - c * c).sqrt()) / 2.0)
}

/// Exact intrinsic randomness of a qubit.
pub fn r_qubit_analytic(rho: &DensityMatrix) -> Result<MeasureValue> {
    let c = coherence_concurrence_qubit(rho)?;
    Ok(MeasureValue::new(MeasureId::QubitAnalytic, randomness_from_concurrence(c)))
}

/// Evaluates `measure` where an exact value exists.
///
/// The roof measure is exact only on qubits (through the analytic formula);
/// other dimensions need the optimizer in [`crate::roof`] and are rejected.
pub fn exact_value(measure: MeasureId, rho: &DensityMatrix) -> Result<MeasureValue> {
    match measure {
        MeasureId::RelEnt => Ok(c_rel_ent(rho)),
        MeasureId::L1 => Ok(c_l1(rho)),
        MeasureId::QubitAnalytic => r_qubit_analytic(rho),
        MeasureId::RoofRandomness if rho.dim() == 2 => {
            Ok(MeasureValue::new(MeasureId::RoofRandomness, r_qubit_analytic(rho)?.value))
        }
        MeasureId::RoofRandomness => {
            Err(Error::NonExactMeasure { measure: measure.to_string(), dim: rho.dim() })
        }
    }
}
