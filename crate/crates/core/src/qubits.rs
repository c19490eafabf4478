//! Qubit numbering shared by circuit synthesis and simulation.
//!
//! Qubits are numbered `1..=Q`. In a state index, qubit 1 is the most
//! significant bit, matching `j_1` in [`crate::mps::AmplitudeVector`]. Inside
//! a gate acting on qubits `start..start + width`, qubit `start` is the least
//! significant bit of the gate's local basis index and higher qubits follow in
//! increasing significance.

/// Bit position of `qubit` in a full state index.
pub const fn state_bit(qubit: usize, num_qubits: usize) -> usize {
    num_qubits - qubit
}

/// Bit position of `qubit` in the local index of a gate starting at `start`.
pub const fn gate_bit(qubit: usize, start: usize) -> usize {
    qubit - start
}

/// State-index offset contributed by every local basis index of a gate.
pub fn gate_offsets(start: usize, width: usize, num_qubits: usize) -> Vec<usize> {
    (0..1usize << width)
        .map(|local| {
            (start..start + width)
                .filter(|&q| local >> gate_bit(q, start) & 1 == 1)
                .map(|q| 1usize << state_bit(q, num_qubits))
                .sum()
        })
        .collect()
}

/// Local index on a gate starting at qubit `n` that carries `j_n` on qubit
/// `n` and the bond index on the qubits above it.
pub const fn embed_output(bond_index: usize, physical: usize, start: usize) -> usize {
    (bond_index << gate_bit(start + 1, start)) | (physical << gate_bit(start, start))
}
