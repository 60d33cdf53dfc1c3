//! Small dense-matrix helpers shared across modules.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Nonzero pattern of a dense matrix, row by row, in column order.
pub type SparseRows = Vec<Vec<(usize, f64)>>;

pub fn sparse_rows(m: &DMatrix<f64>) -> SparseRows {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .filter_map(|j| {
                    let w = m[(i, j)];
                    (w != 0.0).then_some((j, w))
                })
                .collect()
        })
        .collect()
}

/// `out_i = Σ_j w_ij · rows_j`, skipping structural zeros.
///
/// The accumulator starts from the first product rather than from zero so a
/// single unit weight reproduces its operand bit for bit.
pub fn mix(weights: &SparseRows, rows: &[DVector<f64>]) -> Vec<DVector<f64>> {
    weights
        .iter()
        .map(|row| {
            let mut it = row.iter();
            let &(j0, w0) = it.next().expect("weight row without entries");
            let mut acc = &rows[j0] * w0;
            for &(j, w) in it {
                acc.axpy(w, &rows[j], 1.0);
            }
            acc
        })
        .collect()
}

pub fn standard_normal_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample(StandardNormal))
}

pub fn standard_normal_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Haar-ish random orthogonal matrix from the QR factor of a Gaussian matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<f64> {
    let g = standard_normal_matrix(dim, dim, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

pub fn max_abs_asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Sum of a list of equally sized vectors.
pub fn sum_rows(rows: &[DVector<f64>]) -> DVector<f64> {
    let mut acc = DVector::zeros(rows.first().map_or(0, |r| r.len()));
    for r in rows {
        acc += r;
    }
    acc
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().min()
}

pub fn max_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().max()
}
