use serde::{Deserialize, Serialize};

use super::decompose::{centre_at, right_canonicalize};
use super::{bond_spectra, Core, MpsState};
use crate::error::{Error, Result};
use crate::linalg::C64;

/// Removal of the smallest Schmidt coefficient across one bond.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationStep {
    /// Bond index `n` in `1..Q`.
    pub bond: usize,
    pub old_rank: usize,
    pub new_rank: usize,
    /// Dropped singular value divided by the largest one at the same bond.
    pub dropped_relative_sigma: f64,
    /// Frobenius norm of the discarded component of the (unit-norm) state.
    pub local_frobenius_error: f64,
}

/// Bond dimensions after lowering `bond` by one stay compatible with a
/// right-canonical state: `dim a^{n-1} <= 2 dim a^n` and
/// `dim a^n <= 2 dim a^{n-1}` at every bond.
fn feasible_after(full_dims: &[usize], bond: usize) -> bool {
    let mut dims = full_dims.to_vec();
    dims[bond] -= 1;
    dims.windows(2)
        .all(|w| w[0] <= 2 * w[1] && w[1] <= 2 * w[0])
}

/// Picks the feasible bond whose smallest Schmidt coefficient is smallest
/// relative to the largest one across that bond. Spectra are recomputed from
/// the current state. Returns `None` once every bond has dimension 1, or when
/// the state is not flagged right-canonical.
pub fn next_truncation(mps: &MpsState) -> Option<TruncationStep> {
    if !mps.is_right_canonical() {
        return None;
    }
    let full_dims = mps.full_bond_dims();
    if full_dims.iter().all(|&d| d == 1) {
        return None;
    }
    let spectra = bond_spectra(mps).ok()?;
    let mut best: Option<TruncationStep> = None;
    for (i, spectrum) in spectra.iter().enumerate() {
        let bond = i + 1;
        let rank = full_dims[bond];
        if rank <= 1 || !feasible_after(&full_dims, bond) {
            continue;
        }
        let dropped = spectrum[rank - 1];
        let ratio = (dropped / spectrum[0]).clamp(0.0, 1.0);
        if best
            .as_ref()
            .is_none_or(|b| ratio < b.dropped_relative_sigma)
        {
            best = Some(TruncationStep {
                bond,
                old_rank: rank,
                new_rank: rank - 1,
                dropped_relative_sigma: ratio,
                local_frobenius_error: dropped,
            });
        }
    }
    best
}

/// Drops the smallest Schmidt coefficient at `step.bond`, renormalizes, and
/// restores right-canonical form.
pub fn apply_truncation(mps: &MpsState, step: &TruncationStep) -> Result<MpsState> {
    let q = mps.num_qubits();
    let n = step.bond;
    if n == 0 || n >= q {
        return Err(Error::StaleStep {
            bond: n,
            expected: step.old_rank,
            found: 0,
        });
    }
    let found = mps.bond_dims()[n - 1];
    if found != step.old_rank || step.new_rank + 1 != step.old_rank || step.new_rank == 0 {
        return Err(Error::StaleStep {
            bond: n,
            expected: step.old_rank,
            found,
        });
    }
    if !mps.is_right_canonical() {
        return Err(Error::NotCanonical {
            residual: super::verify_right_canonical(mps),
        });
    }

    let centred = centre_at(mps, n)?;
    let spectrum = &centred.centre.s;
    let keep = step.new_rank;
    let kept_norm = spectrum[..keep].iter().map(|s| s * s).sum::<f64>().sqrt();
    let dropped = spectrum[keep];

    let mut cores = centred.left_cores;
    let mut centre = centred.centre.u.as_matrix().columns(0, keep).into_owned();
    for (j, mut col) in centre.column_iter_mut().enumerate() {
        col *= C64::new(spectrum[j] / kept_norm, 0.0);
    }
    debug_assert_eq!(centre.nrows(), 2 * centred.centre_left);
    cores.push(Core::from_right_unfolding(&centre));

    let vh = centred.centre.vh.as_matrix().rows(0, keep).into_owned();
    let next = vh * mps.cores()[n].left_unfolding();
    cores.push(Core::from_left_unfolding(&next));
    cores.extend(mps.cores()[n + 1..].iter().cloned());

    right_canonicalize(&mut cores, n - 1)?;

    let mut log = mps.truncation_log().to_vec();
    log.push(TruncationStep {
        bond: n,
        old_rank: step.old_rank,
        new_rank: keep,
        dropped_relative_sigma: (dropped / spectrum[0]).clamp(0.0, 1.0),
        local_frobenius_error: dropped,
    });
    MpsState::new(cores, true, log)
}
