//! Exact statevector simulation of contiguous multi-qubit gates.

use std::io::Write;

use crate::circuit::{Circuit, GateOp};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::mps::{fidelity, AmplitudeVector};
use crate::qubits::{gate_offsets, state_bit};

/// Norm drift tolerated after a gate application.
pub const NORM_DRIFT_TOLERANCE: f64 = 1e-9;

/// Register state; indices follow the same convention as [`AmplitudeVector`].
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(num_qubits: usize) -> Self {
        assert!(num_qubits >= 1, "empty register");
        let mut amps = vec![C64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = C64::new(1.0, 0.0);
        Self { num_qubits, amps }
    }

    pub fn from_amplitudes(v: &AmplitudeVector) -> Self {
        Self {
            num_qubits: v.num_qubits(),
            amps: v.amplitudes().to_vec(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn to_amplitudes(&self) -> AmplitudeVector {
        AmplitudeVector::new(self.amps.clone()).expect("state vector has a valid length")
    }

    /// Multiplies the gate's `2^d` block into every coset of the qubits it
    /// acts on.
    pub fn apply_gate(&mut self, gate: &GateOp) -> Result<()> {
        let q = self.num_qubits;
        if gate.start_qubit() == 0 || gate.end_qubit() > q {
            return Err(Error::SpanError {
                start: gate.start_qubit(),
                end: gate.end_qubit(),
                num_qubits: q,
            });
        }
        let offsets = gate_offsets(gate.start_qubit(), gate.width(), q);
        let span_mask: usize = (gate.start_qubit()..=gate.end_qubit())
            .map(|qubit| 1usize << state_bit(qubit, q))
            .sum();
        let m = gate.matrix().as_matrix();
        let dim = offsets.len();
        let mut block = vec![C64::new(0.0, 0.0); dim];
        let mut out = vec![C64::new(0.0, 0.0); dim];

        for base in (0..self.amps.len()).filter(|i| i & span_mask == 0) {
            let mut any = false;
            for (slot, &off) in block.iter_mut().zip(&offsets) {
                *slot = self.amps[base + off];
                any |= slot.re != 0.0 || slot.im != 0.0;
            }
            if !any {
                continue;
            }
            for (r, o) in out.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (c, x) in block.iter().enumerate() {
                    acc += m[(r, c)] * x;
                }
                *o = acc;
            }
            for (&value, &off) in out.iter().zip(&offsets) {
                self.amps[base + off] = value;
            }
        }
        debug_assert!(
            (self.norm() - 1.0).abs() < NORM_DRIFT_TOLERANCE || self.norm() == 0.0,
            "norm drifted to {}",
            self.norm()
        );
        Ok(())
    }
}

/// Returns a copy of `state` with `gate` applied.
pub fn apply_gate(state: &StateVector, gate: &GateOp) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply_gate(gate)?;
    Ok(out)
}

/// Applies the gates of `c` in order to `|0...0>`.
pub fn run(c: &Circuit) -> Result<StateVector> {
    let mut state = StateVector::zero(c.num_qubits());
    for gate in c.gates() {
        state.apply_gate(gate)?;
    }
    Ok(state)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verification {
    pub fidelity: f64,
    /// `|amp|^2` of the simulated output state.
    pub probabilities: Vec<f64>,
    pub target_probabilities: Vec<f64>,
}

/// Simulates `c` and compares the output with `target`.
pub fn verify(c: &Circuit, target: &AmplitudeVector) -> Result<Verification> {
    if c.num_qubits() != target.num_qubits() {
        return Err(Error::DimensionMismatch {
            left: c.num_qubits(),
            right: target.num_qubits(),
        });
    }
    let state = run(c)?;
    Ok(Verification {
        fidelity: fidelity(&state.to_amplitudes(), target)?,
        probabilities: state.probabilities(),
        target_probabilities: target.probabilities(),
    })
}

/// Writes `index,bitstring,probability[,target]` rows for plotting.
pub fn write_probabilities_csv<W: Write>(
    writer: W,
    num_qubits: usize,
    probabilities: &[f64],
    target: Option<&[f64]>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["index", "bitstring", "probability"];
    if target.is_some() {
        header.push("target_probability");
    }
    w.write_record(&header)?;
    for (i, p) in probabilities.iter().enumerate() {
        let mut row = vec![
            i.to_string(),
            format!("{i:0num_qubits$b}"),
            crate::report::format_sig(*p),
        ];
        if let Some(t) = target {
            row.push(crate::report::format_sig(t[i]));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
