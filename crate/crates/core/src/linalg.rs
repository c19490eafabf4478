//! Dense complex linear algebra used by the MPS and circuit layers.
//!
//! Everything here works on small dense matrices (at most a few hundred rows
//! at desk scale). Multi-index tensors follow the C convention: the rightmost
//! index increments first, so reshaping a tensor into a matrix is a pure
//! reinterpretation of the flat buffer.

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use ndarray_linalg::{JobSvd, SVDDC};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Singular values below `RANK_TOLERANCE * s[0]` count as zero.
pub const RANK_TOLERANCE: f64 = 1e-12;
/// Residual above which a completion candidate is kept.
pub const COMPLETION_RESIDUAL: f64 = 1e-8;
/// Tolerance used when accepting a matrix as having orthonormal columns.
pub const ISOMETRY_TOLERANCE: f64 = 1e-8;

/// Dense complex matrix with at least one row and one column and only finite
/// entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::InvalidMatrix(format!(
                "empty shape {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        Ok(Self(m))
    }

    /// Builds a matrix from entries listed row by row.
    pub fn from_row_major(rows: usize, cols: usize, data: &[C64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidMatrix(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(rows, cols, data))
    }

    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "identity of dimension 0");
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "zero-sized matrix");
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn to_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for r in 0..self.rows() {
            for c in 0..self.cols() {
                out.push(self.0[(r, c)]);
            }
        }
        out
    }

    /// `max |(M†M - I)_ij|`: zero exactly when the columns are orthonormal.
    pub fn isometry_residual(&self) -> f64 {
        let gram = self.0.adjoint() * &self.0;
        max_deviation_from_identity(&gram)
    }

    /// `max |(M M† - I)_ij|`: zero exactly when the rows are orthonormal.
    pub fn coisometry_residual(&self) -> f64 {
        let gram = &self.0 * self.0.adjoint();
        max_deviation_from_identity(&gram)
    }

    /// Unitarity residual; infinite for non-square matrices.
    pub fn unitarity_residual(&self) -> f64 {
        if self.rows() != self.cols() {
            return f64::INFINITY;
        }
        self.isometry_residual()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn max_deviation_from_identity(gram: &DMatrix<C64>) -> f64 {
    let mut worst = 0.0_f64;
    for r in 0..gram.nrows() {
        for c in 0..gram.ncols() {
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((gram[(r, c)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Thin SVD `m = u · diag(s) · vh` with `s` sorted in descending order.
#[derive(Clone, Debug)]
pub struct SvdResult {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub vh: ComplexMatrix,
}

impl SvdResult {
    /// Number of singular values above `RANK_TOLERANCE` relative to the largest.
    pub fn rank(&self) -> usize {
        let cutoff = RANK_TOLERANCE * self.s.first().copied().unwrap_or(0.0);
        self.s.iter().take_while(|&&v| v > cutoff).count()
    }

    /// Best rank-`k` approximation `u_k · diag(s_k) · vh_k`.
    pub fn low_rank(&self, k: usize) -> ComplexMatrix {
        let k = k.min(self.s.len());
        let u = self.u.as_matrix().columns(0, k);
        let vh = self.vh.as_matrix().rows(0, k);
        let mut scaled = u.into_owned();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= C64::new(self.s[j], 0.0);
        }
        ComplexMatrix(scaled * vh)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.low_rank(self.s.len())
    }
}

/// Thin singular value decomposition.
///
/// The gauge is fixed so that the largest-magnitude entry of every left
/// singular vector is real and positive (first such entry on ties), with the
/// matching row of `vh` counter-rotated. Equal singular values keep the
/// backend's relative order.
pub fn svd(m: &ComplexMatrix) -> Result<SvdResult> {
    if m.0.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidMatrix("non-finite entry".into()));
    }
    let (u, values, vh) = lapack_svd(&m.0, JobSvd::Some)?;
    let (u, vh) = u.zip(vh).ok_or_else(|| {
        Error::NumericalFailure("SVD returned no singular vectors".into())
    })?;

    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));

    let k = order.len();
    let mut u_sorted = DMatrix::<C64>::zeros(u.nrows(), k);
    let mut vh_sorted = DMatrix::<C64>::zeros(k, vh.ncols());
    let mut s = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        let col = u.column(src);
        let pivot = col
            .iter()
            .enumerate()
            .fold((0, -1.0_f64), |best, (i, z)| {
                if z.norm() > best.1 {
                    (i, z.norm())
                } else {
                    best
                }
            })
            .0;
        let p = col[pivot];
        let phase = if p.norm() > 0.0 {
            p.conj() / p.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        u_sorted.set_column(dst, &(col * phase));
        vh_sorted.set_row(dst, &(vh.row(src) * phase.conj()));
        s.push(values[src].max(0.0));
    }

    Ok(SvdResult {
        u: ComplexMatrix(u_sorted),
        s,
        vh: ComplexMatrix(vh_sorted),
    })
}

/// Singular values of `m` in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if m.0.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidMatrix("non-finite entry".into()));
    }
    let mut s = lapack_svd(&m.0, JobSvd::None)?.1;
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

type LapackSvd = (Option<DMatrix<C64>>, Vec<f64>, Option<DMatrix<C64>>);

// Divide-and-conquer LAPACK driver. nalgebra's own SVD misreports singular
// values of some rank-deficient matrices (e.g. constant 2 x 16).
fn lapack_svd(m: &DMatrix<C64>, job: JobSvd) -> Result<LapackSvd> {
    let a = Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)]);
    let (u, s, vt) = a.svddc(job).map_err(|e| {
        Error::NumericalFailure(format!("SVD of {}x{} failed: {e}", m.nrows(), m.ncols()))
    })?;
    let back = |x: Array2<C64>| DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[[i, j]]);
    Ok((u.map(back), s.to_vec(), vt.map(back)))
}

/// Per-axis dimensions of a dense tensor stored rightmost-index-fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiIndexLayout {
    axis_dims: Vec<usize>,
}

impl MultiIndexLayout {
    pub fn new(axis_dims: Vec<usize>) -> Result<Self> {
        if axis_dims.is_empty() || axis_dims.contains(&0) {
            return Err(Error::InvalidMatrix(format!("bad tensor shape {axis_dims:?}")));
        }
        Ok(Self { axis_dims })
    }

    pub fn axis_dims(&self) -> &[usize] {
        &self.axis_dims
    }

    pub fn len(&self) -> usize {
        self.axis_dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.axis_dims.len());
        index
            .iter()
            .zip(&self.axis_dims)
            .fold(0, |acc, (&i, &d)| {
                debug_assert!(i < d);
                acc * d + i
            })
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.axis_dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.axis_dims).rev() {
            *slot = flat % d;
            flat /= d;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    layout: MultiIndexLayout,
    data: Vec<C64>,
}

impl DenseTensor {
    pub fn new(axis_dims: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        let layout = MultiIndexLayout::new(axis_dims)?;
        if layout.len() != data.len() {
            return Err(Error::InvalidMatrix(format!(
                "{} entries for shape {:?}",
                data.len(),
                layout.axis_dims()
            )));
        }
        Ok(Self { layout, data })
    }

    pub fn layout(&self) -> &MultiIndexLayout {
        &self.layout
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, index: &[usize]) -> C64 {
        self.data[self.layout.flat_index(index)]
    }

    /// Matrix whose rows run over axes `..split` and columns over `split..`.
    pub fn unfold(&self, split: usize) -> Result<ComplexMatrix> {
        let dims = self.layout.axis_dims();
        if split == 0 || split >= dims.len() {
            return Err(Error::InvalidSplit {
                split,
                axes: dims.len(),
            });
        }
        let rows: usize = dims[..split].iter().product();
        let cols: usize = dims[split..].iter().product();
        ComplexMatrix::from_row_major(rows, cols, &self.data)
    }

    /// Inverse of [`DenseTensor::unfold`].
    pub fn refold(m: &ComplexMatrix, axis_dims: Vec<usize>, split: usize) -> Result<Self> {
        if split == 0 || split >= axis_dims.len() {
            return Err(Error::InvalidSplit {
                split,
                axes: axis_dims.len(),
            });
        }
        let rows: usize = axis_dims[..split].iter().product();
        let cols: usize = axis_dims[split..].iter().product();
        if rows != m.rows() || cols != m.cols() {
            return Err(Error::InvalidMatrix(format!(
                "{}x{} matrix cannot refold to {axis_dims:?} at split {split}",
                m.rows(),
                m.cols()
            )));
        }
        Self::new(axis_dims, m.to_row_major())
    }
}

/// Extends `k` orthonormal columns of length `D` to a `D x D` unitary.
///
/// The first `k` columns of the result are `partial` unchanged. The standard
/// basis vectors are projected against everything accepted so far (modified
/// Gram-Schmidt, two passes), candidates with residual below
/// `COMPLETION_RESIDUAL` are discarded, and survivors are taken in
/// standard-basis order.
pub fn complete_to_unitary(partial: &ComplexMatrix) -> Result<ComplexMatrix> {
    let dim = partial.rows();
    let k = partial.cols();
    let residual = partial.isometry_residual();
    if k > dim || residual > ISOMETRY_TOLERANCE {
        return Err(Error::NotIsometry { residual });
    }
    if k == dim {
        return Ok(partial.clone());
    }

    let mut basis: Vec<DVector<C64>> = partial
        .0
        .column_iter()
        .map(|c| c.into_owned())
        .collect();
    let mut out = DMatrix::<C64>::zeros(dim, dim);
    out.columns_mut(0, k).copy_from(&partial.0);

    let mut filled = k;
    for i in 0..dim {
        if filled == dim {
            break;
        }
        let mut v = DVector::<C64>::zeros(dim);
        v[i] = C64::new(1.0, 0.0);
        for _ in 0..2 {
            for q in &basis {
                let overlap = q.dotc(&v);
                v.axpy(-overlap, q, C64::new(1.0, 0.0));
            }
        }
        let norm = v.norm();
        if norm < COMPLETION_RESIDUAL {
            continue;
        }
        v.unscale_mut(norm);
        out.set_column(filled, &v);
        basis.push(v);
        filled += 1;
    }
    if filled != dim {
        return Err(Error::NumericalFailure(format!(
            "completion produced {filled} of {dim} columns"
        )));
    }
    Ok(ComplexMatrix(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_matrices_have_rank_one() {
        for (r, c) in [(2, 4), (4, 2), (2, 16), (16, 2), (8, 8)] {
            let v = C64::new(1.0 / ((r * c) as f64).sqrt(), 0.0);
            let m = ComplexMatrix::new(DMatrix::from_element(r, c, v)).unwrap();
            let res = svd(&m).unwrap();
            assert!((res.s[0] - 1.0).abs() < 1e-14, "{r}x{c}: {:?}", res.s);
            assert_eq!(res.rank(), 1);
            assert_eq!(singular_values(&m).unwrap().len(), r.min(c));
        }
    }

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
        let data: Vec<C64> = (0..rows * cols)
            .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        ComplexMatrix::from_row_major(rows, cols, &data).unwrap()
    }

    fn random_isometry(rng: &mut ChaCha8Rng, dim: usize, k: usize) -> ComplexMatrix {
        let m = random_matrix(rng, dim, k);
        let q = m.into_inner().qr().q();
        ComplexMatrix::new(q.columns(0, k).into_owned()).unwrap()
    }

    #[test]
    fn identity_svd() {
        let r = svd(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(r.s, vec![1.0, 1.0]);
        let product = ComplexMatrix::new(r.u.as_matrix() * r.vh.as_matrix()).unwrap();
        assert!(product.unitarity_residual() < 1e-12);
    }

    #[test]
    fn diagonal_svd() {
        let m = ComplexMatrix::from_row_major(
            2,
            2,
            &[C64::new(3.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
        )
        .unwrap();
        let r = svd(&m).unwrap();
        assert!((r.s[0] - 3.0).abs() < 1e-14);
        assert!(r.s[1].abs() < 1e-14);
        assert_eq!(r.rank(), 1);
    }

    #[test]
    fn random_svd_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_matrix(&mut rng, 8, 8);
        let r = svd(&m).unwrap();
        let diff = r.reconstruct().into_inner() - m.as_matrix();
        assert!(diff.norm() < 1e-10);
        assert!(r.u.isometry_residual() < 1e-10);
        assert!(r.vh.coisometry_residual() < 1e-10);
        assert!(r.s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn svd_gauge_is_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_matrix(&mut rng, 6, 4);
        let r = svd(&m).unwrap();
        for c in 0..r.u.cols() {
            let col = r.u.as_matrix().column(c);
            let (idx, _) = col
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                .unwrap();
            assert!(col[idx].im.abs() < 1e-14);
            assert!(col[idx].re > 0.0);
        }
        // A global phase on the input leaves u unchanged.
        let rotated = ComplexMatrix::new(m.as_matrix() * C64::from_polar(1.0, 0.7)).unwrap();
        let r2 = svd(&rotated).unwrap();
        assert!((r.u.as_matrix() - r2.u.as_matrix()).norm() < 1e-10);
    }

    #[test]
    fn wide_and_tall_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (rows, cols) in [(2, 64), (64, 2), (1, 5), (5, 1)] {
            let m = random_matrix(&mut rng, rows, cols);
            let r = svd(&m).unwrap();
            assert_eq!(r.s.len(), rows.min(cols));
            assert!((r.reconstruct().into_inner() - m.as_matrix()).norm() < 1e-10);
        }
    }

    #[test]
    fn rejects_non_finite() {
        let mut m = DMatrix::<C64>::zeros(2, 2);
        m[(0, 0)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(ComplexMatrix::new(m), Err(Error::InvalidMatrix(_))));
    }

    #[test]
    fn unfold_follows_c_order() {
        let data: Vec<C64> = (0..8).map(|i| C64::new(i as f64, 0.0)).collect();
        let t = DenseTensor::new(vec![2, 2, 2], data).unwrap();
        let m = t.unfold(1).unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 4));
        for j1 in 0..2 {
            for j2 in 0..2 {
                for j3 in 0..2 {
                    assert_eq!(m.get(j1, 2 * j2 + j3), t.get(&[j1, j2, j3]));
                }
            }
        }
        let m2 = t.unfold(2).unwrap();
        assert_eq!((m2.rows(), m2.cols()), (4, 2));
        assert_eq!(m2.get(3, 1), t.get(&[1, 1, 1]));
        assert!(matches!(t.unfold(0), Err(Error::InvalidSplit { .. })));
        assert!(matches!(t.unfold(3), Err(Error::InvalidSplit { .. })));
    }

    #[test]
    fn multi_index_round_trip() {
        let layout = MultiIndexLayout::new(vec![3, 2, 4]).unwrap();
        for flat in 0..layout.len() {
            assert_eq!(layout.flat_index(&layout.multi_index(flat)), flat);
        }
        assert_eq!(layout.flat_index(&[1, 0, 2]), 10);
    }

    #[test]
    fn completion_of_square_unitary_is_identity_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = random_isometry(&mut rng, 4, 4);
        assert_eq!(complete_to_unitary(&u).unwrap(), u);
    }

    #[test]
    fn completion_of_basis_column() {
        let mut data = vec![C64::new(0.0, 0.0); 4];
        data[0] = C64::new(1.0, 0.0);
        let col = ComplexMatrix::from_row_major(4, 1, &data).unwrap();
        let g = complete_to_unitary(&col).unwrap();
        assert!(g.unitarity_residual() < 1e-10);
        assert_eq!(g.get(0, 0), C64::new(1.0, 0.0));
        for c in 1..4 {
            assert!(g.get(0, c).norm() < 1e-15);
        }
    }

    #[test]
    fn completion_of_plus_state() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let col = ComplexMatrix::from_row_major(2, 1, &[C64::new(h, 0.0), C64::new(h, 0.0)]).unwrap();
        let g = complete_to_unitary(&col).unwrap();
        assert!(g.unitarity_residual() < 1e-10);
        let det = g.get(0, 0) * g.get(1, 1) - g.get(0, 1) * g.get(1, 0);
        assert!((det.norm() - 1.0).abs() < 1e-12);
        assert_eq!(g.get(0, 0), C64::new(h, 0.0));
        assert_eq!(g.get(1, 0), C64::new(h, 0.0));
    }

    #[test]
    fn completion_rejects_non_isometry() {
        let col = ComplexMatrix::from_row_major(2, 1, &[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        assert!(matches!(complete_to_unitary(&col), Err(Error::NotIsometry { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn eckart_young_tail(seed in any::<u64>(), rows in 1usize..12, cols in 1usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_matrix(&mut rng, rows, cols);
            let r = svd(&m).unwrap();
            for k in 0..=r.s.len() {
                let err = (m.as_matrix() - r.low_rank(k).as_matrix()).norm_squared();
                let tail: f64 = r.s[k..].iter().map(|s| s * s).sum();
                prop_assert!((err - tail).abs() <= 1e-9 * m.frobenius_norm().powi(2));
            }
        }

        #[test]
        fn completion_is_unitary(seed in any::<u64>(), log_dim in 0u32..7, frac in 0.0f64..1.0) {
            let dim = 1usize << log_dim;
            let k = ((dim as f64 * frac) as usize).clamp(1, dim);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let iso = random_isometry(&mut rng, dim, k);
            let g = complete_to_unitary(&iso).unwrap();
            prop_assert!(g.unitarity_residual() < 1e-10);
            for c in 0..k {
                for r in 0..dim {
                    prop_assert_eq!(g.get(r, c), iso.get(r, c));
                }
            }
            // Deterministic for a fixed input.
            prop_assert_eq!(complete_to_unitary(&iso).unwrap(), g);
        }

        #[test]
        fn unfold_refold_exact(seed in any::<u64>(), axes in proptest::collection::vec(1usize..5, 2..6)) {
            let len: usize = axes.iter().product();
            prop_assume!(len <= 1024);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data: Vec<C64> = (0..len).map(|_| C64::new(rng.random(), rng.random())).collect();
            let t = DenseTensor::new(axes.clone(), data).unwrap();
            for split in 1..axes.len() {
                let m = t.unfold(split).unwrap();
                prop_assert_eq!(&DenseTensor::refold(&m, axes.clone(), split).unwrap(), &t);
            }
        }
    }
}
