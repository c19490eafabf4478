//! Single-layer sequential circuits built from right-canonical MPS.
//!
//! Gate `n` acts on qubits `n..n + d_n` with `d_n = 1 + ceil(log2 dim a^n)`.
//! Its input basis index is the bond index `a^{n-1}` left on those qubits by
//! gate `n - 1` (untouched qubits above it are still `|0>`), and its output
//! index is `2 a^n + j_n`: the final value of qubit `n` plus the next bond
//! index on the qubits above. Bit significance inside a gate is defined in
//! [`crate::qubits`].

use std::collections::BTreeMap;

use log::warn;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{complete_to_unitary, ComplexMatrix, C64};
use crate::mps::{decompose, verify_right_canonical, AmplitudeVector, MpsState};
use crate::qubits::embed_output;

pub const CIRCUIT_SCHEMA: &str = "mpsprep-circuit/1";

/// Unitarity residual accepted when a gate is constructed.
pub const UNITARY_TOLERANCE: f64 = 1e-8;

/// Right-canonical residual required before synthesis.
pub const SYNTHESIS_CANONICAL_TOLERANCE: f64 = 1e-8;

/// Gates wider than this are synthesized with a warning.
pub const WIDE_GATE_WARNING: usize = 10;

/// A `2^width x 2^width` unitary on qubits `start_qubit..start_qubit + width`.
#[derive(Clone, Debug, PartialEq)]
pub struct GateOp {
    start_qubit: usize,
    width: usize,
    matrix: ComplexMatrix,
}

impl GateOp {
    pub fn new(start_qubit: usize, matrix: ComplexMatrix) -> Result<Self> {
        let dim = matrix.rows();
        if dim != matrix.cols() || dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidCircuit(format!(
                "gate matrix of shape {}x{} is not 2^d x 2^d",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if start_qubit == 0 {
            return Err(Error::InvalidCircuit("qubits are numbered from 1".into()));
        }
        let residual = matrix.unitarity_residual();
        if residual > UNITARY_TOLERANCE {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self {
            start_qubit,
            width: dim.trailing_zeros() as usize,
            matrix,
        })
    }

    pub fn start_qubit(&self) -> usize {
        self.start_qubit
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Last qubit the gate touches.
    pub fn end_qubit(&self) -> usize {
        self.start_qubit + self.width - 1
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// Analytic count of two-qubit entangling gates per gate width.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum CostModel {
    #[default]
    /// 0 for one qubit, 3 for two, `ceil(23/48 4^d - 3/2 2^d + 4/3)` above.
    GenericUnitary,
    /// `costs[d - 1]` for width `d`; widths past the table use `GenericUnitary`.
    Table { costs: Vec<u64> },
}

impl CostModel {
    pub fn gate_cost(&self, width: usize) -> u64 {
        match self {
            Self::GenericUnitary => generic_unitary_cost(width),
            Self::Table { costs } => costs
                .get(width.wrapping_sub(1))
                .copied()
                .unwrap_or_else(|| generic_unitary_cost(width)),
        }
    }
}

fn generic_unitary_cost(width: usize) -> u64 {
    match width {
        0 | 1 => 0,
        2 => 3,
        d => {
            // (23 * 4^d - 72 * 2^d + 64) / 48, rounded up, in exact integers.
            let d = d as u32;
            let numerator = 23u128 * 4u128.pow(d) + 64 - 72u128 * 2u128.pow(d);
            numerator.div_ceil(48) as u64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitMetadata {
    pub widths: Vec<usize>,
    pub width_histogram: BTreeMap<usize, usize>,
    /// Layers after packing gates on disjoint qubits as early as possible.
    pub depth_estimate: usize,
    /// Number of gates in the sequential chain.
    pub sequential_depth: usize,
    pub entangling_cost: u64,
    pub cost_model: CostModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bond_dims: Option<Vec<usize>>,
}

/// Ordered gates `G^[1] ... G^[Q]`; gate 1 is applied first.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<GateOp>,
    metadata: CircuitMetadata,
}

impl Circuit {
    /// Checks the ansatz shape: `Q` gates, gate `n` starting on qubit `n`,
    /// spans inside the register and `d_{n-1} - 1 <= d_n`.
    pub fn new(num_qubits: usize, gates: Vec<GateOp>, cost_model: CostModel) -> Result<Self> {
        if num_qubits == 0 || gates.len() != num_qubits {
            return Err(Error::InvalidCircuit(format!(
                "{} gates for a {num_qubits}-qubit register",
                gates.len()
            )));
        }
        for (i, gate) in gates.iter().enumerate() {
            if gate.start_qubit != i + 1 {
                return Err(Error::InvalidCircuit(format!(
                    "gate {} starts on qubit {}",
                    i + 1,
                    gate.start_qubit
                )));
            }
            if gate.end_qubit() > num_qubits {
                return Err(Error::SpanError {
                    start: gate.start_qubit,
                    end: gate.end_qubit(),
                    num_qubits,
                });
            }
        }
        for (i, pair) in gates.windows(2).enumerate() {
            if pair[0].width > pair[1].width + 1 {
                return Err(Error::InvalidCircuit(format!(
                    "gate {} has width {} but gate {} only {}",
                    i + 1,
                    pair[0].width,
                    i + 2,
                    pair[1].width
                )));
            }
        }

        let widths: Vec<usize> = gates.iter().map(|g| g.width).collect();
        let mut width_histogram = BTreeMap::new();
        for &w in &widths {
            *width_histogram.entry(w).or_insert(0) += 1;
        }
        let metadata = CircuitMetadata {
            entangling_cost: widths.iter().map(|&w| cost_model.gate_cost(w)).sum(),
            depth_estimate: packed_depth(&gates, num_qubits),
            sequential_depth: gates.len(),
            widths,
            width_histogram,
            cost_model,
            bond_dims: None,
        };
        Ok(Self {
            num_qubits,
            gates,
            metadata,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn metadata(&self) -> &CircuitMetadata {
        &self.metadata
    }

    pub fn widths(&self) -> &[usize] {
        &self.metadata.widths
    }

    pub fn depth_estimate(&self) -> usize {
        self.metadata.depth_estimate
    }

    pub fn to_json_string(&self) -> Result<String> {
        let doc = CircuitDocument {
            schema: CIRCUIT_SCHEMA.to_string(),
            num_qubits: self.num_qubits,
            gates: self
                .gates
                .iter()
                .map(|g| GateDocument {
                    start_qubit: g.start_qubit,
                    width: g.width,
                    matrix: g.matrix.to_row_major(),
                })
                .collect(),
            metadata: Some(self.metadata.clone()),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Parses the circuit interchange format. Derived metadata is recomputed;
    /// only the cost model and bond dimensions are taken from the file.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: CircuitDocument = serde_json::from_str(text)
            .map_err(|e| Error::BadInput(format!("circuit file: {e}")))?;
        if doc.schema != CIRCUIT_SCHEMA {
            return Err(Error::BadInput(format!(
                "unknown circuit schema {:?}",
                doc.schema
            )));
        }
        let mut gates = Vec::with_capacity(doc.gates.len());
        for g in doc.gates {
            let dim = 1usize << g.width;
            let matrix = ComplexMatrix::from_row_major(dim, dim, &g.matrix)
                .map_err(|e| Error::BadInput(format!("gate on qubit {}: {e}", g.start_qubit)))?;
            gates.push(GateOp::new(g.start_qubit, matrix)?);
        }
        let (cost_model, bond_dims) = match doc.metadata {
            Some(m) => (m.cost_model, m.bond_dims),
            None => (CostModel::default(), None),
        };
        let mut circuit = Self::new(doc.num_qubits, gates, cost_model)?;
        circuit.metadata.bond_dims = bond_dims;
        Ok(circuit)
    }
}

#[derive(Serialize, Deserialize)]
struct CircuitDocument {
    schema: String,
    num_qubits: usize,
    gates: Vec<GateDocument>,
    #[serde(default)]
    metadata: Option<CircuitMetadata>,
}

#[derive(Serialize, Deserialize)]
struct GateDocument {
    start_qubit: usize,
    width: usize,
    /// Row-major `[re, im]` pairs.
    matrix: Vec<C64>,
}

/// Each gate goes one layer after the latest gate sharing a qubit with it.
fn packed_depth(gates: &[GateOp], num_qubits: usize) -> usize {
    let mut busy_until = vec![0usize; num_qubits + 1];
    let mut depth = 0;
    for g in gates {
        let span = g.start_qubit..=g.end_qubit().min(num_qubits);
        let layer = 1 + span.clone().map(|q| busy_until[q]).max().unwrap_or(0);
        for q in span {
            busy_until[q] = layer;
        }
        depth = depth.max(layer);
    }
    depth
}

fn ceil_log2(x: usize) -> usize {
    debug_assert!(x >= 1);
    (usize::BITS - (x - 1).leading_zeros()) as usize
}

/// `d_n = 1 + ceil(log2 dim a^n)` for `n < Q` and `d_Q = 1`.
pub fn gate_widths(mps: &MpsState) -> Vec<usize> {
    mps.bond_dims()
        .iter()
        .map(|&dim| 1 + ceil_log2(dim))
        .chain(std::iter::once(1))
        .collect()
}

/// Embeds each core of a right-canonical MPS into the first columns of a
/// unitary and completes the rest.
pub fn synthesize(mps: &MpsState) -> Result<Circuit> {
    let residual = verify_right_canonical(mps);
    if !mps.is_right_canonical() || residual > SYNTHESIS_CANONICAL_TOLERANCE {
        return Err(Error::NotCanonical { residual });
    }
    let q = mps.num_qubits();
    let widths = gate_widths(mps);
    for (n, pair) in widths.windows(2).enumerate() {
        assert!(
            pair[0] <= pair[1] + 1,
            "width chain broken between gates {} and {}: {:?}",
            n + 1,
            n + 2,
            widths
        );
    }
    if let Some(&max) = widths.iter().max() {
        if max > WIDE_GATE_WARNING {
            warn!("synthesizing a {max}-qubit gate; dense {0}x{0} unitaries are large", 1usize << max);
        }
    }

    let gates = mps
        .cores()
        .par_iter()
        .zip(widths.par_iter())
        .enumerate()
        .map(|(i, (core, &width))| {
            let start = i + 1;
            let dim = 1usize << width;
            let mut columns = DMatrix::<C64>::zeros(dim, core.left_dim());
            for a in 0..core.left_dim() {
                for j in 0..2 {
                    for r in 0..core.right_dim() {
                        columns[(embed_output(r, j, start), a)] = core.get(a, j, r);
                    }
                }
            }
            let unitary = complete_to_unitary(&ComplexMatrix::new(columns)?)?;
            GateOp::new(start, unitary)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut circuit = Circuit::new(q, gates, CostModel::default())?;
    circuit.metadata.bond_dims = Some(mps.bond_dims());
    Ok(circuit)
}

/// Single layer of at most two-qubit gates: the decomposition is capped at
/// bond dimension 2 everywhere before synthesis.
pub fn capped_baseline(target: &AmplitudeVector) -> Result<Circuit> {
    synthesize(&capped_mps(target)?)
}

pub(crate) fn capped_mps(target: &AmplitudeVector) -> Result<MpsState> {
    let q = target.num_qubits();
    if q < 2 {
        return Err(Error::Undefined("capped baseline needs at least two qubits".into()));
    }
    decompose(target, Some(&vec![2; q - 1]))
}

pub fn entangling_cost(c: &Circuit) -> u64 {
    let model = &c.metadata.cost_model;
    c.gates.iter().map(|g| model.gate_cost(g.width)).sum()
}

/// Leading-order CNOT count `2^Q` of isometric state preparation.
pub fn isometry_reference_cost(num_qubits: usize) -> u64 {
    1u64 << num_qubits
}
