use nalgebra::DMatrix;

use super::{row_major, AmplitudeVector, Core, MpsState, NORM_TOLERANCE};
use crate::error::{Error, Result};
use crate::linalg::{svd, ComplexMatrix, SvdResult, C64};

fn svd_of(m: DMatrix<C64>) -> Result<SvdResult> {
    svd(&ComplexMatrix::new(m)?)
}

/// `u[:, ..k] * diag(s[..k])`.
fn scaled_left(res: &SvdResult, k: usize) -> DMatrix<C64> {
    let mut out = res.u.as_matrix().columns(0, k).into_owned();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col *= C64::new(res.s[j], 0.0);
    }
    out
}

/// `diag(s[..k]) * vh[..k, :]`.
fn scaled_right(res: &SvdResult, k: usize) -> DMatrix<C64> {
    let mut out = res.vh.as_matrix().rows(0, k).into_owned();
    for (j, mut row) in out.row_iter_mut().enumerate() {
        row *= C64::new(res.s[j], 0.0);
    }
    out
}

/// Largest bond dimension the unfolding at bond `n` can have.
fn rank_bound(n: usize, q: usize) -> usize {
    let exponent = n.min(q - n);
    if exponent >= usize::BITS as usize - 1 {
        usize::MAX
    } else {
        1 << exponent
    }
}

fn check_caps(q: usize, caps: &[usize]) -> Result<Vec<usize>> {
    if caps.len() != q - 1 {
        return Err(Error::InfeasibleRanks(format!(
            "{} caps given for {} bonds",
            caps.len(),
            q - 1
        )));
    }
    if let Some(n) = caps.iter().position(|&c| c == 0) {
        return Err(Error::InfeasibleRanks(format!("bond {} capped at 0", n + 1)));
    }
    let mut effective = vec![1usize];
    effective.extend(
        caps.iter()
            .enumerate()
            .map(|(i, &c)| c.min(rank_bound(i + 1, q))),
    );
    effective.push(1);
    for n in 1..=q {
        if effective[n - 1] > 2 * effective[n] {
            return Err(Error::InfeasibleRanks(format!(
                "bond {} allows {} but bond {n} only {}; a right-canonical state needs dim a^(n-1) <= 2 dim a^n",
                n - 1,
                effective[n - 1],
                effective[n]
            )));
        }
    }
    Ok(effective)
}

/// Tensor-train decomposition of `target` into a right-canonical MPS.
///
/// SVDs run left to right; at bond `n` only the `rank_caps[n-1]` largest
/// singular values are kept (all numerically non-zero ones without caps). The
/// result is renormalized and brought into right-canonical form by a
/// right-to-left sweep.
pub fn decompose(target: &AmplitudeVector, rank_caps: Option<&[usize]>) -> Result<MpsState> {
    let norm = target.norm();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm });
    }
    let q = target.num_qubits();
    let caps = match rank_caps {
        Some(caps) => Some(check_caps(q, caps)?),
        None => None,
    };

    let mut cores = Vec::with_capacity(q);
    let mut left = 1usize;
    // B(a^{n-1}, j_n; j_{n+1}, ..., j_Q) in row-major order.
    let mut rest: Vec<C64> = target.amplitudes().to_vec();
    for n in 1..q {
        let cols = rest.len() / (2 * left);
        let res = svd_of(DMatrix::from_row_slice(2 * left, cols, &rest))?;
        let mut keep = res.rank().max(1);
        if let Some(caps) = &caps {
            keep = keep.min(caps[n]);
        }
        let u = res.u.as_matrix().columns(0, keep).into_owned();
        cores.push(Core::from_right_unfolding(&u));
        rest = row_major(&scaled_right(&res, keep));
        left = keep;
    }
    cores.push(Core::new(left, 1, rest)?);

    let kept_norm = cores[q - 1]
        .data()
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if kept_norm == 0.0 {
        return Err(Error::NumericalFailure("truncated state has zero norm".into()));
    }
    cores[q - 1].scale(1.0 / kept_norm);

    right_canonicalize(&mut cores, q - 1)?;
    MpsState::new(cores, true, vec![])
}

/// Sweeps right to left from core index `from` (0-based) down to core 0,
/// leaving cores `1..=from` right-orthonormal and core 0 at unit norm. Cores
/// after `from` must already be right-orthonormal.
pub(crate) fn right_canonicalize(cores: &mut [Core], from: usize) -> Result<()> {
    for m in (1..=from).rev() {
        let res = svd_of(cores[m].left_unfolding())?;
        let keep = res.rank().max(1);
        cores[m] = Core::from_left_unfolding(&res.vh.as_matrix().rows(0, keep).into_owned());
        let carry = scaled_left(&res, keep);
        let prev = cores[m - 1].right_unfolding() * carry;
        cores[m - 1] = Core::from_right_unfolding(&prev);
    }
    let norm = cores[0]
        .data()
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if norm == 0.0 {
        return Err(Error::NumericalFailure("state collapsed to zero norm".into()));
    }
    cores[0].scale(1.0 / norm);
    Ok(())
}

/// Result of moving the orthogonality centre of a right-canonical state to
/// bond `bond` (1-based).
pub(crate) struct CentredState {
    /// Left-orthonormal cores `1..bond`.
    pub left_cores: Vec<Core>,
    /// SVD of core `bond` with everything to its left absorbed, as a
    /// `(2 * left) x right` matrix. Its singular values are the Schmidt
    /// coefficients across the bond.
    pub centre: SvdResult,
    /// Left dimension of core `bond` after the sweep.
    pub centre_left: usize,
}

pub(crate) fn centre_at(mps: &MpsState, bond: usize) -> Result<CentredState> {
    let mut left_cores = Vec::with_capacity(bond);
    let mut carry = DMatrix::<C64>::from_element(1, 1, C64::new(1.0, 0.0));
    for n in 0..bond {
        let core = &mps.cores()[n];
        let absorbed = &carry * core.left_unfolding();
        let rows = carry.nrows() * 2;
        let m = DMatrix::from_row_slice(rows, core.right_dim(), &row_major(&absorbed));
        let res = svd_of(m)?;
        if n + 1 == bond {
            return Ok(CentredState {
                left_cores,
                centre: res,
                centre_left: carry.nrows(),
            });
        }
        let k = res.s.len();
        left_cores.push(Core::from_right_unfolding(
            &res.u.as_matrix().columns(0, k).into_owned(),
        ));
        carry = scaled_right(&res, k);
    }
    unreachable!("bond index {bond} outside 1..Q")
}

/// Schmidt spectra across bonds `1..Q`, each sorted descending and truncated
/// to the bond dimension.
pub fn bond_spectra(mps: &MpsState) -> Result<Vec<Vec<f64>>> {
    let dims = mps.bond_dims();
    let mut spectra = Vec::with_capacity(dims.len());
    let mut carry = DMatrix::<C64>::from_element(1, 1, C64::new(1.0, 0.0));
    for (n, &dim) in dims.iter().enumerate() {
        let core = &mps.cores()[n];
        let absorbed = &carry * core.left_unfolding();
        let rows = carry.nrows() * 2;
        let res = svd_of(DMatrix::from_row_slice(rows, dim, &row_major(&absorbed)))?;
        let k = res.s.len();
        spectra.push(res.s[..k.min(dim)].to_vec());
        carry = scaled_right(&res, k);
    }
    Ok(spectra)
}
