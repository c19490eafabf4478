//! Fidelity-threshold sweeps and method comparisons over target corpora.

mod targets;

pub use targets::{
    corpus, generate, sparse_nonzero_count, Corpus, TargetKind, TargetSpec, MAX_QUBITS,
    MIN_QUBITS, SPARSE_CORPUS_MIN_SPARSITY,
};

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{capped_mps, isometry_reference_cost, synthesize, Circuit};
use crate::error::{Error, Result};
use crate::mps::{
    apply_truncation, decompose, fidelity, mean_normalized_bipartite_entropy, next_truncation,
    reconstruct, AmplitudeVector, MpsState,
};
use crate::report::format_sig;
use crate::sim;

/// Rounding slack when comparing a fidelity against a threshold.
pub const FIDELITY_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Greedy truncation of the exact decomposition.
    Adaptive,
    /// Bond dimension capped at 2, then greedy truncation within the cap.
    Capped2,
    /// Exact isometric preparation, costed analytically.
    IsometryRef,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Adaptive, Method::Capped2, Method::IsometryRef];

    pub fn name(self) -> &'static str {
        match self {
            Method::Adaptive => "adaptive",
            Method::Capped2 => "capped2",
            Method::IsometryRef => "isometry_ref",
        }
    }

    /// Human-readable label. The capped baseline is only the single-layer
    /// member of the multi-layer cap-2 family.
    pub fn label(self) -> &'static str {
        match self {
            Method::Adaptive => "adaptive",
            Method::Capped2 => "capped-2 single layer",
            Method::IsometryRef => "isometry reference",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Point on a greedy truncation path chosen for one threshold.
#[derive(Clone, Debug)]
pub struct Selection {
    pub mps: MpsState,
    /// Fidelity of the MPS contraction with the target.
    pub fidelity: f64,
    pub truncations: usize,
    /// False when even the start of the path misses the threshold.
    pub feasible: bool,
}

fn check_threshold(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 && t <= 1.0 {
        Ok(())
    } else {
        Err(Error::BadInput(format!("fidelity threshold {t} outside (0, 1]")))
    }
}

/// Walks the greedy truncation path from `start` once and returns, for each
/// threshold, the last state whose fidelity stays at or above it.
///
/// A threshold of 1 never truncates. Thresholds the start state misses are
/// reported with the start state and `feasible = false`.
pub fn select_along_path(
    target: &AmplitudeVector,
    start: &MpsState,
    thresholds: &[f64],
) -> Result<Vec<Selection>> {
    for &t in thresholds {
        check_threshold(t)?;
    }
    let f0 = fidelity(&reconstruct(start)?, target)?;
    let at_start = |feasible| Selection {
        mps: start.clone(),
        fidelity: f0,
        truncations: 0,
        feasible,
    };
    let mut out: Vec<Option<Selection>> = vec![None; thresholds.len()];
    let mut pending = Vec::new();
    for (i, &t) in thresholds.iter().enumerate() {
        if f0 + FIDELITY_SLACK < t {
            out[i] = Some(at_start(false));
        } else if t >= 1.0 {
            out[i] = Some(at_start(true));
        } else {
            pending.push(i);
        }
    }

    let mut current = start.clone();
    let mut f_current = f0;
    let mut count = 0;
    while !pending.is_empty() {
        let Some(step) = next_truncation(&current) else {
            break;
        };
        let candidate = apply_truncation(&current, &step)?;
        let f = fidelity(&reconstruct(&candidate)?, target)?;
        pending.retain(|&i| {
            if f + FIDELITY_SLACK < thresholds[i] {
                out[i] = Some(Selection {
                    mps: current.clone(),
                    fidelity: f_current,
                    truncations: count,
                    feasible: true,
                });
                false
            } else {
                true
            }
        });
        current = candidate;
        f_current = f;
        count += 1;
    }
    for i in pending {
        out[i] = Some(Selection {
            mps: current.clone(),
            fidelity: f_current,
            truncations: count,
            feasible: true,
        });
    }
    Ok(out.into_iter().map(|s| s.expect("every threshold resolved")).collect())
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub circuit: Circuit,
    pub selection: Selection,
    /// Fidelity of the simulated circuit output with the target.
    pub achieved_fidelity: f64,
}

/// Greedily truncates the exact decomposition of `target` while the fidelity
/// stays at or above `f_min`, then synthesizes and simulates the result.
pub fn sweep_to_threshold(target: &AmplitudeVector, f_min: f64) -> Result<SweepOutcome> {
    let start = decompose(target, None)?;
    let selection = select_along_path(target, &start, &[f_min])?
        .pop()
        .expect("one threshold");
    finish(target, selection)
}

fn finish(target: &AmplitudeVector, selection: Selection) -> Result<SweepOutcome> {
    let circuit = synthesize(&selection.mps)?;
    let achieved_fidelity = sim::verify(&circuit, target)?.fidelity;
    Ok(SweepOutcome {
        circuit,
        selection,
        achieved_fidelity,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub spec: TargetSpec,
    pub entropy: f64,
    pub method: Method,
    pub threshold: f64,
    pub achieved_fidelity: f64,
    pub width_histogram: BTreeMap<usize, usize>,
    pub entangling_cost: u64,
    /// Not reported for the analytic isometry reference.
    pub depth_estimate: Option<usize>,
    pub truncation_count: usize,
    pub feasible: bool,
}

impl BenchRecord {
    /// Record for a synthesized outcome of `method`.
    pub fn from_outcome(
        spec: &TargetSpec,
        entropy: f64,
        method: Method,
        threshold: f64,
        outcome: &SweepOutcome,
    ) -> Self {
        let meta = outcome.circuit.metadata();
        Self {
            spec: spec.clone(),
            entropy,
            method,
            threshold,
            achieved_fidelity: outcome.achieved_fidelity,
            width_histogram: meta.width_histogram.clone(),
            entangling_cost: meta.entangling_cost,
            depth_estimate: Some(meta.depth_estimate),
            truncation_count: outcome.selection.truncations,
            feasible: outcome.selection.feasible,
        }
    }

    fn isometry_reference(spec: &TargetSpec, entropy: f64, threshold: f64) -> Self {
        Self {
            spec: spec.clone(),
            entropy,
            method: Method::IsometryRef,
            threshold,
            achieved_fidelity: 1.0,
            width_histogram: BTreeMap::new(),
            entangling_cost: isometry_reference_cost(spec.num_qubits),
            depth_estimate: None,
            truncation_count: 0,
            feasible: true,
        }
    }
}

/// Runs every method at every threshold on every target.
///
/// Records come out grouped per target as threshold-major triples
/// (adaptive, capped2, isometry_ref), then stably sorted by entropy, so the
/// result does not depend on `jobs`.
pub fn compare(
    specs: &[TargetSpec],
    thresholds: &[f64],
    jobs: Option<usize>,
) -> Result<Vec<BenchRecord>> {
    if thresholds.is_empty() {
        return Err(Error::BadInput("no fidelity thresholds given".into()));
    }
    for &t in thresholds {
        check_threshold(t)?;
    }
    for spec in specs {
        spec.validate()?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::BadInput(format!("thread pool: {e}")))?;
    let groups = pool.install(|| {
        specs
            .par_iter()
            .map(|spec| bench_one(spec, thresholds))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut records: Vec<BenchRecord> = groups.into_iter().flatten().collect();
    records.sort_by(|a, b| a.entropy.total_cmp(&b.entropy));
    Ok(records)
}

fn bench_one(spec: &TargetSpec, thresholds: &[f64]) -> Result<Vec<BenchRecord>> {
    let target = generate(spec)?;
    let entropy = mean_normalized_bipartite_entropy(&target)?.mean;
    log::debug!("{} {} entropy {entropy:.4}", spec.kind_name(), spec.params_string());
    let adaptive = select_along_path(&target, &decompose(&target, None)?, thresholds)?;
    let capped = select_along_path(&target, &capped_mps(&target)?, thresholds)?;
    let mut records = Vec::with_capacity(3 * thresholds.len());
    for ((&t, a), c) in thresholds.iter().zip(adaptive).zip(capped) {
        let a = finish(&target, a)?;
        records.push(BenchRecord::from_outcome(spec, entropy, Method::Adaptive, t, &a));
        let c = finish(&target, c)?;
        records.push(BenchRecord::from_outcome(spec, entropy, Method::Capped2, t, &c));
        records.push(BenchRecord::isometry_reference(spec, entropy, t));
    }
    Ok(records)
}

pub const CSV_HEADER: [&str; 12] = [
    "kind",
    "num_qubits",
    "params",
    "entropy",
    "method",
    "threshold",
    "fidelity",
    "cost",
    "depth",
    "histogram",
    "truncations",
    "feasible",
];

/// `width:count` pairs joined by `;`.
pub fn histogram_string(h: &BTreeMap<usize, usize>) -> String {
    h.iter()
        .map(|(w, c)| format!("{w}:{c}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn rounded(x: f64) -> f64 {
    format_sig(x).parse().expect("formatted float parses")
}

#[derive(Serialize)]
struct BenchRow<'a> {
    kind: &'a str,
    num_qubits: usize,
    params: String,
    entropy: f64,
    method: &'a str,
    threshold: f64,
    fidelity: f64,
    cost: u64,
    depth: Option<usize>,
    histogram: String,
    truncations: usize,
    feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl<'a> From<&'a BenchRecord> for BenchRow<'a> {
    fn from(r: &'a BenchRecord) -> Self {
        Self {
            kind: r.spec.kind_name(),
            num_qubits: r.spec.num_qubits,
            params: r.spec.params_string(),
            entropy: rounded(r.entropy),
            method: r.method.name(),
            threshold: rounded(r.threshold),
            fidelity: rounded(r.achieved_fidelity),
            cost: r.entangling_cost,
            depth: r.depth_estimate,
            histogram: histogram_string(&r.width_histogram),
            truncations: r.truncation_count,
            feasible: r.feasible,
            seed: None,
        }
    }
}

/// One row per record; floats carry nine significant digits. A run seed, when
/// given, is appended as a trailing `seed` column.
pub fn write_csv<W: Write>(records: &[BenchRecord], run_seed: Option<u64>, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = CSV_HEADER.to_vec();
    if run_seed.is_some() {
        header.push("seed");
    }
    w.write_record(&header)?;
    for r in records {
        let row = BenchRow::from(r);
        let mut fields = vec![
            row.kind.to_string(),
            row.num_qubits.to_string(),
            row.params,
            format_sig(r.entropy),
            row.method.to_string(),
            format_sig(r.threshold),
            format_sig(r.achieved_fidelity),
            row.cost.to_string(),
            row.depth.map(|d| d.to_string()).unwrap_or_default(),
            row.histogram,
            row.truncations.to_string(),
            row.feasible.to_string(),
        ];
        if let Some(seed) = run_seed {
            fields.push(seed.to_string());
        }
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

/// Same columns as [`write_csv`], as a JSON array of objects.
pub fn write_json<W: Write>(records: &[BenchRecord], run_seed: Option<u64>, mut writer: W) -> Result<()> {
    let rows: Vec<BenchRow> = records
        .iter()
        .map(|r| BenchRow {
            seed: run_seed,
            ..BenchRow::from(r)
        })
        .collect();
    serde_json::to_writer_pretty(&mut writer, &rows)?;
    writeln!(writer)?;
    Ok(())
}
