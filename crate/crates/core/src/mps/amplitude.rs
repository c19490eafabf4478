use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Normalization tolerance for amplitude vectors.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Expansion coefficients `A(j_1, ..., j_Q)` of a `Q`-qubit state.
///
/// Index `i` encodes `(j_1, ..., j_Q)` with `j_1` as the most significant bit,
/// i.e. `i = sum_n j_n * 2^(Q - n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl AmplitudeVector {
    /// Wraps raw amplitudes; the length must be `2^Q` with `Q >= 1`.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::BadInput(format!(
                "amplitude vector length {len} is not a power of two >= 2"
            )));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::BadInput("amplitude vector has non-finite entries".into()));
        }
        Ok(Self {
            num_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn basis_state(num_qubits: usize, index: usize) -> Self {
        assert!(num_qubits >= 1 && index < 1 << num_qubits);
        let mut amps = vec![C64::new(0.0, 0.0); 1 << num_qubits];
        amps[index] = C64::new(1.0, 0.0);
        Self { num_qubits, amps }
    }

    /// Tensor product of single-qubit states `(a_n, b_n)`, qubit 1 first.
    pub fn product_state(qubits: &[(C64, C64)]) -> Result<Self> {
        let mut amps = vec![C64::new(1.0, 0.0)];
        for &(a, b) in qubits {
            amps = amps.iter().flat_map(|&z| [z * a, z * b]).collect();
        }
        Self::new(amps)
    }

    /// `(|0...0> + |1...1>) / sqrt(2)`.
    pub fn ghz(num_qubits: usize) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![C64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = C64::new(h, 0.0);
        *amps.last_mut().unwrap() = C64::new(h, 0.0);
        Self { num_qubits, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::BadInput("cannot normalize the zero vector".into()));
        }
        Ok(Self {
            num_qubits: self.num_qubits,
            amps: self.amps.iter().map(|z| z / norm).collect(),
        })
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Parses a JSON array of real numbers or `[re, im]` pairs.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let entries: Vec<AmplitudeEntry> = serde_json::from_str(text)
            .map_err(|e| Error::BadInput(format!("amplitude file: {e}")))?;
        Self::new(entries.into_iter().map(C64::from).collect())
    }

    /// Serializes as a JSON array of `[re, im]` pairs.
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.amps)?)
    }
}

#[derive(Deserialize, Serialize)]
#[serde(untagged)]
enum AmplitudeEntry {
    Real(f64),
    Complex([f64; 2]),
}

impl From<AmplitudeEntry> for C64 {
    fn from(e: AmplitudeEntry) -> Self {
        match e {
            AmplitudeEntry::Real(re) => C64::new(re, 0.0),
            AmplitudeEntry::Complex([re, im]) => C64::new(re, im),
        }
    }
}

/// Squared overlap `|<a|b>|^2`.
pub fn fidelity(a: &AmplitudeVector, b: &AmplitudeVector) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let overlap: C64 = a
        .amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(overlap.norm_sqr())
}
