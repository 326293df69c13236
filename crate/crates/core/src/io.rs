//! JSON state files.
//!
//! ```json
//! { "dim": 2, "entries": [[0.5, 0.0], [0.5, 0.0], [0.5, 0.0], [0.5, 0.0]] }
//! { "dim": 2, "amplitudes": [[0.7071067811865476, 0.0], [0.0, 0.7071067811865476]] }
//! { "dim": 2, "bloch": [0.6, 0.0, 0.0] }
//! ```
//!
//! Exactly one of `entries` (row-major `[re, im]` pairs), `amplitudes` or
//! `bloch` (qubits only) must be present. An optional `decomposition` lists
//! `{ "weight": w, "amplitudes": [...] }` members that must mix to the state.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roof::Decomposition;
use crate::state::{bloch_to_density, validate_density, BlochVector, CMatrix, CVector, DensityMatrix, PureState, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionEntry {
    pub weight: f64,
    pub amplitudes: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bloch: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<Vec<DecompositionEntry>>,
}

/// A parsed and validated state.
#[derive(Clone, Debug, PartialEq)]
pub enum LoadedState {
    Density(DensityMatrix),
    Pure(PureState),
}

impl LoadedState {
    pub fn dim(&self) -> usize {
        match self {
            LoadedState::Density(rho) => rho.dim(),
            LoadedState::Pure(psi) => psi.dim(),
        }
    }

    pub fn density(&self) -> DensityMatrix {
        match self {
            LoadedState::Density(rho) => rho.clone(),
            LoadedState::Pure(psi) => DensityMatrix::from_pure(psi),
        }
    }

    pub fn pure(&self) -> Option<&PureState> {
        match self {
            LoadedState::Pure(psi) => Some(psi),
            LoadedState::Density(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateDocument {
    pub state: LoadedState,
    pub decomposition: Option<Decomposition>,
}

fn complex(pairs: &[[f64; 2]]) -> Vec<C64> {
    pairs.iter().map(|&[re, im]| C64::new(re, im)).collect()
}

fn pairs<'a>(zs: impl IntoIterator<Item = &'a C64>) -> Vec<[f64; 2]> {
    zs.into_iter().map(|z| [z.re, z.im]).collect()
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Amplitudes normalized to within `tol`, then renormalized exactly.
fn pure_from_pairs(dim: usize, amplitudes: &[[f64; 2]], tol: f64) -> Result<PureState> {
    check_len(dim, amplitudes.len())?;
    let v = CVector::from_vec(complex(amplitudes));
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("non-finite amplitude".into()));
    }
    let defect = (v.norm_squared() - 1.0).abs();
    if defect > tol {
        return Err(Error::NotNormalized(defect));
    }
    PureState::normalized(v)
}

impl StateFile {
    /// Validates the file at tolerance `tol`.
    pub fn load(&self, tol: f64) -> Result<StateDocument> {
        if self.dim == 0 {
            return Err(Error::Format("dim must be positive".into()));
        }
        let given = [self.entries.is_some(), self.amplitudes.is_some(), self.bloch.is_some()];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(Error::Format("exactly one of entries, amplitudes, bloch is required".into()));
        }
        let state = if let Some(entries) = &self.entries {
            check_len(self.dim * self.dim, entries.len())?;
            let m = CMatrix::from_row_slice(self.dim, self.dim, &complex(entries));
            LoadedState::Density(validate_density(m, tol)?)
        } else if let Some(amplitudes) = &self.amplitudes {
            LoadedState::Pure(pure_from_pairs(self.dim, amplitudes, tol)?)
        } else {
            if self.dim != 2 {
                return Err(Error::DimensionNot2(self.dim));
            }
            let [x, y, z] = self.bloch.expect("checked above");
            LoadedState::Density(bloch_to_density(&BlochVector::new(x, y, z)?))
        };
        let decomposition = match &self.decomposition {
            None => None,
            Some(members) => {
                let elements = members
                    .iter()
                    .map(|e| Ok((e.weight, pure_from_pairs(self.dim, &e.amplitudes, tol)?)))
                    .collect::<Result<Vec<_>>>()?;
                Some(Decomposition::new(elements, &state.density())?)
            }
        };
        Ok(StateDocument { state, decomposition })
    }

    pub fn from_density(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        let d = rho.dim();
        let entries = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| [m[(i, j)].re, m[(i, j)].im]);
        Self { dim: d, entries: Some(entries.collect()), ..Self::default() }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self { dim: psi.dim(), amplitudes: Some(pairs(psi.amplitudes().iter())), ..Self::default() }
    }

    pub fn with_decomposition(mut self, decomp: &Decomposition) -> Self {
        self.decomposition = Some(
            decomp
                .elements()
                .iter()
                .map(|(w, psi)| DecompositionEntry { weight: *w, amplitudes: pairs(psi.amplitudes().iter()) })
                .collect(),
        );
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state files always serialize")
    }
}

pub fn parse_state(text: &str, tol: f64) -> Result<StateDocument> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    file.load(tol)
}

pub fn read_state_file(path: &Path, tol: f64) -> Result<StateDocument> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    parse_state(&text, tol)
}
