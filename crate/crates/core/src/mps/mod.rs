//! Matrix product states over qubits.
//!
//! A state of `Q` qubits is stored as `Q` cores `A^n` of shape
//! `(dim a^{n-1}, 2, dim a^n)` with `dim a^0 = dim a^Q = 1`, so that
//!
//! ```text
//! A(j_1, ..., j_Q) = sum_{a} A^1[a^0, j_1, a^1] A^2[a^1, j_2, a^2] ... A^Q[a^{Q-1}, j_Q, a^Q]
//! ```
//!
//! States produced by this module are right-canonical: for every core,
//! `sum_{j, r} A[l, j, r] conj(A[l', j, r]) = delta_{l l'}`, and core 1 carries
//! the unit norm of the whole state.

mod amplitude;
mod decompose;
mod entropy;
mod truncate;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

pub use amplitude::{fidelity, AmplitudeVector, NORM_TOLERANCE};
pub use decompose::{bond_spectra, decompose};
pub use entropy::{mean_normalized_bipartite_entropy, EntropyReport};
pub use truncate::{apply_truncation, next_truncation, TruncationStep};

/// Right-canonical residual accepted when building a state flagged canonical.
pub const CANONICAL_TOLERANCE: f64 = 1e-10;

pub const MPS_SCHEMA: &str = "mpsprep-mps/1";

/// One MPS core, stored in C order over `(left, physical, right)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Core {
    left: usize,
    right: usize,
    data: Vec<C64>,
}

impl Core {
    pub fn new(left: usize, right: usize, data: Vec<C64>) -> Result<Self> {
        if left == 0 || right == 0 || data.len() != left * 2 * right {
            return Err(Error::CorruptMps(format!(
                "core of shape ({left}, 2, {right}) with {} entries",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::CorruptMps("non-finite core entry".into()));
        }
        Ok(Self { left, right, data })
    }

    pub fn left_dim(&self) -> usize {
        self.left
    }

    pub fn right_dim(&self) -> usize {
        self.right
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, left: usize, physical: usize, right: usize) -> C64 {
        self.data[(left * 2 + physical) * self.right + right]
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        for z in &mut self.data {
            *z *= factor;
        }
    }

    /// `left x (2 * right)` view with columns ordered `(j, r)`.
    pub(crate) fn left_unfolding(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.left, 2 * self.right, &self.data)
    }

    /// `(2 * left) x right` view with rows ordered `(l, j)`.
    pub(crate) fn right_unfolding(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(2 * self.left, self.right, &self.data)
    }

    pub(crate) fn from_left_unfolding(m: &DMatrix<C64>) -> Self {
        debug_assert_eq!(m.ncols() % 2, 0);
        Self {
            left: m.nrows(),
            right: m.ncols() / 2,
            data: row_major(m),
        }
    }

    pub(crate) fn from_right_unfolding(m: &DMatrix<C64>) -> Self {
        debug_assert_eq!(m.nrows() % 2, 0);
        Self {
            left: m.nrows() / 2,
            right: m.ncols(),
            data: row_major(m),
        }
    }
}

pub(crate) fn row_major(m: &DMatrix<C64>) -> Vec<C64> {
    m.transpose().as_slice().to_vec()
}

#[derive(Clone, Debug, PartialEq)]
pub struct MpsState {
    cores: Vec<Core>,
    right_canonical: bool,
    truncation_log: Vec<TruncationStep>,
}

impl MpsState {
    /// Validates shapes and bond-dimension bounds; when `right_canonical` is
    /// set the orthonormality relations must hold to `CANONICAL_TOLERANCE`.
    pub fn new(
        cores: Vec<Core>,
        right_canonical: bool,
        truncation_log: Vec<TruncationStep>,
    ) -> Result<Self> {
        let q = cores.len();
        if q == 0 {
            return Err(Error::CorruptMps("no cores".into()));
        }
        if cores[0].left != 1 || cores[q - 1].right != 1 {
            return Err(Error::CorruptMps("boundary bonds must have dimension 1".into()));
        }
        for (n, pair) in cores.windows(2).enumerate() {
            if pair[0].right != pair[1].left {
                return Err(Error::CorruptMps(format!(
                    "core {} has right dimension {} but core {} has left dimension {}",
                    n + 1,
                    pair[0].right,
                    n + 2,
                    pair[1].left
                )));
            }
        }
        let state = Self {
            cores,
            right_canonical,
            truncation_log,
        };
        state.check_bond_bounds()?;
        if right_canonical {
            let residual = verify_right_canonical(&state);
            if residual > CANONICAL_TOLERANCE {
                return Err(Error::CorruptMps(format!(
                    "flagged right-canonical but residual is {residual:.3e}"
                )));
            }
        }
        Ok(state)
    }

    fn check_bond_bounds(&self) -> Result<()> {
        let q = self.num_qubits();
        let dims = self.full_bond_dims();
        for (n, &d) in dims.iter().enumerate().take(q).skip(1) {
            let exponent = n.min(q - n);
            if exponent < usize::BITS as usize && d > 1usize << exponent {
                return Err(Error::CorruptMps(format!(
                    "bond {n} has dimension {d} above the rank bound 2^{exponent}"
                )));
            }
        }
        for n in 1..=q {
            if dims[n] > 2 * dims[n - 1] {
                return Err(Error::CorruptMps(format!(
                    "bond {n} dimension {} exceeds twice bond {} dimension {}",
                    dims[n],
                    n - 1,
                    dims[n - 1]
                )));
            }
            if self.right_canonical && dims[n - 1] > 2 * dims[n] {
                return Err(Error::CorruptMps(format!(
                    "bond {} dimension {} exceeds twice bond {n} dimension {}",
                    n - 1,
                    dims[n - 1],
                    dims[n]
                )));
            }
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.cores.len()
    }

    pub fn cores(&self) -> &[Core] {
        &self.cores
    }

    pub fn is_right_canonical(&self) -> bool {
        self.right_canonical
    }

    pub fn truncation_log(&self) -> &[TruncationStep] {
        &self.truncation_log
    }

    /// `[dim a^1, ..., dim a^{Q-1}]`.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.cores[..self.cores.len() - 1]
            .iter()
            .map(|c| c.right)
            .collect()
    }

    /// `[dim a^0, ..., dim a^Q]`, including the trivial boundary bonds.
    pub fn full_bond_dims(&self) -> Vec<usize> {
        std::iter::once(1)
            .chain(self.cores.iter().map(|c| c.right))
            .collect()
    }

    pub fn to_json_string(&self) -> Result<String> {
        let doc = MpsDocument {
            schema: MPS_SCHEMA.to_string(),
            num_qubits: self.num_qubits(),
            bond_dims: self.bond_dims(),
            right_canonical: self.right_canonical,
            cores: self.cores.clone(),
            truncation_log: self.truncation_log.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: MpsDocument = serde_json::from_str(text)
            .map_err(|e| Error::BadInput(format!("MPS file: {e}")))?;
        if doc.schema != MPS_SCHEMA {
            return Err(Error::BadInput(format!("unknown MPS schema {:?}", doc.schema)));
        }
        let cores = doc
            .cores
            .into_iter()
            .map(|c| Core::new(c.left, c.right, c.data))
            .collect::<Result<Vec<_>>>()?;
        let state = Self::new(cores, doc.right_canonical, doc.truncation_log)?;
        if state.num_qubits() != doc.num_qubits || state.bond_dims() != doc.bond_dims {
            return Err(Error::CorruptMps(
                "declared num_qubits/bond_dims disagree with the cores".into(),
            ));
        }
        Ok(state)
    }
}

/// On-disk form of an [`MpsState`]; complex numbers are `[re, im]` pairs.
#[derive(Serialize, Deserialize)]
struct MpsDocument {
    schema: String,
    num_qubits: usize,
    bond_dims: Vec<usize>,
    right_canonical: bool,
    cores: Vec<Core>,
    #[serde(default)]
    truncation_log: Vec<TruncationStep>,
}

/// Contracts all cores into the amplitude vector (`j_1` most significant).
pub fn reconstruct(mps: &MpsState) -> Result<AmplitudeVector> {
    let mut acc = DMatrix::<C64>::from_element(1, 1, C64::new(1.0, 0.0));
    for (n, core) in mps.cores.iter().enumerate() {
        if acc.ncols() != core.left {
            return Err(Error::CorruptMps(format!(
                "bond mismatch entering core {}",
                n + 1
            )));
        }
        // (prefix x left) * (left x 2*right), then fold j into the prefix.
        let next = &acc * core.left_unfolding();
        let rows = acc.nrows() * 2;
        acc = DMatrix::from_row_slice(rows, core.right, &row_major(&next));
    }
    if acc.ncols() != 1 {
        return Err(Error::CorruptMps("last core has a non-trivial right bond".into()));
    }
    AmplitudeVector::new(acc.as_slice().to_vec())
}

/// Largest deviation from the right-canonical relations.
///
/// Cores `2..=Q` are compared against the identity on their left bond; core 1
/// is compared against the scalar 1.
pub fn verify_right_canonical(mps: &MpsState) -> f64 {
    mps.cores
        .iter()
        .map(|core| {
            let m = core.left_unfolding();
            let gram = &m * m.adjoint();
            let mut worst = 0.0_f64;
            for r in 0..gram.nrows() {
                for c in 0..gram.ncols() {
                    let target = if r == c { 1.0 } else { 0.0 };
                    worst = worst.max((gram[(r, c)] - C64::new(target, 0.0)).norm());
                }
            }
            worst
        })
        .fold(0.0, f64::max)
}
