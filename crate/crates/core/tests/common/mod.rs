#![allow(dead_code)]

use mpsprep::linalg::C64;
use mpsprep::mps::AmplitudeVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Normalized state with complex entries uniform on the unit square.
pub fn random_state(num_qubits: usize, seed: u64) -> AmplitudeVector {
    let mut rng = rng(seed);
    let amps = (0..1usize << num_qubits)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    AmplitudeVector::new(amps).unwrap().normalized().unwrap()
}

/// Tensor product of random single-qubit states, qubit 1 first.
pub fn random_product_state(num_qubits: usize, seed: u64) -> AmplitudeVector {
    let mut rng = rng(seed);
    let qubits: Vec<(C64, C64)> = (0..num_qubits)
        .map(|_| {
            let theta: f64 = rng.random_range(0.0..std::f64::consts::PI);
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            (
                C64::new((theta / 2.0).cos(), 0.0),
                C64::from_polar((theta / 2.0).sin(), phi),
            )
        })
        .collect();
    AmplitudeVector::product_state(&qubits).unwrap()
}

/// Independent oracle: the `min(rows, cols)` singular values of the
/// row-major unfolding, from the eigenvalues of the smaller Gram matrix.
pub fn unfolding_singular_values(v: &AmplitudeVector, split: usize) -> Vec<f64> {
    let q = v.num_qubits();
    let rows = 1usize << split;
    let cols = 1usize << (q - split);
    let m = nalgebra::DMatrix::from_row_slice(rows, cols, v.amplitudes());
    let gram = if rows <= cols {
        &m * m.adjoint()
    } else {
        m.adjoint() * &m
    };
    let mut s: Vec<f64> = gram
        .symmetric_eigenvalues()
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// `|<a|b>|^2` computed directly.
pub fn overlap_sq(a: &AmplitudeVector, b: &AmplitudeVector) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| x.conj() * y)
        .sum::<C64>()
        .norm_sqr()
}
