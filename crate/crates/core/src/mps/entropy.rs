use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::AmplitudeVector;
use crate::error::{Error, Result};
use crate::linalg::{singular_values, ComplexMatrix, RANK_TOLERANCE};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    /// `S(rho_n) / min(n, Q - n)` for cuts `n = 1..Q`.
    pub per_cut: Vec<f64>,
    /// Average of `per_cut`.
    pub mean: f64,
}

/// Mean normalized bipartite von Neumann entropy (base 2) over the contiguous
/// cuts `{j_1..j_n} | {j_{n+1}..j_Q}`.
pub fn mean_normalized_bipartite_entropy(target: &AmplitudeVector) -> Result<EntropyReport> {
    let q = target.num_qubits();
    if q < 2 {
        return Err(Error::Undefined(
            "bipartite entropy needs at least two qubits".into(),
        ));
    }
    let mut per_cut = Vec::with_capacity(q - 1);
    for n in 1..q {
        let m = DMatrix::from_row_slice(1 << n, 1 << (q - n), target.amplitudes());
        let sigma = singular_values(&ComplexMatrix::new(m)?)?;
        let largest = sigma.iter().cloned().fold(0.0, f64::max);
        let weights: Vec<f64> = sigma
            .iter()
            .filter(|&&s| s > RANK_TOLERANCE * largest)
            .map(|s| s * s)
            .collect();
        let total: f64 = weights.iter().sum();
        let entropy: f64 = weights
            .iter()
            .map(|w| w / total)
            .map(|p| if p > 0.0 { -p * p.log2() } else { 0.0 })
            .sum();
        // Clamp so an exactly pure cut reports +0 rather than -0.
        per_cut.push((entropy / n.min(q - n) as f64).max(0.0));
    }
    let mean = per_cut.iter().sum::<f64>() / per_cut.len() as f64;
    Ok(EntropyReport { per_cut, mean })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_state_is_zero() {
        let r = mean_normalized_bipartite_entropy(&AmplitudeVector::basis_state(5, 19)).unwrap();
        assert_eq!(r.mean, 0.0);
        assert!(r.per_cut.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn bell_is_one() {
        let r = mean_normalized_bipartite_entropy(&AmplitudeVector::ghz(2)).unwrap();
        assert!((r.mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ghz4_is_five_sixths() {
        let r = mean_normalized_bipartite_entropy(&AmplitudeVector::ghz(4)).unwrap();
        assert!((r.mean - 5.0 / 6.0).abs() < 1e-12);
        assert!((r.per_cut[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_qubit_is_undefined() {
        assert!(matches!(
            mean_normalized_bipartite_entropy(&AmplitudeVector::basis_state(1, 0)),
            Err(Error::Undefined(_))
        ));
    }
}
