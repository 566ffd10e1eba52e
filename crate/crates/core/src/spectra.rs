//! Hermitian spectrum computations shared by the memory- and work-cost
//! routines.
//!
//! Matrices here are Gram matrices and their weighted variants: Hermitian,
//! positive semidefinite up to numerical noise, often real, and for
//! truncated renewal generators large but of low numerical rank. The
//! entry point dispatches between a diagonal fast path, dense symmetric
//! eigendecomposition, and a pivoted-Cholesky low-rank factorization for
//! large matrices.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::xlg;

/// Eigenvalues below `-1e-9` make a claimed-PSD matrix invalid.
pub const PSD_EIG_TOL: f64 = -1e-9;
/// Rank counts eigenvalues above `RANK_REL_CUTOFF * lambda_max`.
pub const RANK_REL_CUTOFF: f64 = 1e-10;
/// Entropy sums run over eigenvalues at or above this clip.
pub const ENTROPY_EIG_CLIP: f64 = 1e-12;

/// Dense eigendecomposition is used up to this dimension; above it the
/// pivoted-Cholesky low-rank path takes over.
const DENSE_EIGEN_MAX: usize = 600;

/// Relative trace tolerance at which the pivoted Cholesky stops; the
/// dropped PSD remainder perturbs every eigenvalue by at most this much
/// (Weyl), which is far below all reporting tolerances.
const CHOLESKY_TRACE_TOL: f64 = 1e-14;

fn is_effectively_real(m: &DMatrix<Complex64>) -> bool {
    let scale = 1.0 + m.iter().fold(0.0, |a: f64, z| a.max(z.re.abs()));
    m.iter().all(|z| z.im.abs() < 1e-13 * scale)
}

fn is_effectively_diagonal_real(m: &DMatrix<f64>) -> bool {
    let scale = 1.0 + m.diagonal().amax();
    let n = m.nrows();
    for j in 0..n {
        for i in 0..n {
            if i != j && m[(i, j)].abs() > 1e-14 * scale {
                return false;
            }
        }
    }
    true
}

/// Eigenvalues of a real symmetric matrix, sorted descending.
pub fn eigenvalues_real(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Shape(format!("{}x{} matrix is not square", n, m.ncols())));
    }
    let mut vals = if n == 0 {
        Vec::new()
    } else if is_effectively_diagonal_real(m) {
        m.diagonal().iter().copied().collect()
    } else if n <= DENSE_EIGEN_MAX {
        SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect()
    } else {
        pivoted_cholesky_spectrum(m)?
    };
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(vals)
}

/// Eigenvalues of a Hermitian matrix, sorted descending. Real input is
/// detected and routed through the cheaper real path.
pub fn eigenvalues_complex(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Shape(format!("{}x{} matrix is not square", n, m.ncols())));
    }
    if is_effectively_real(m) {
        return eigenvalues_real(&m.map(|z| z.re));
    }
    if n > DENSE_EIGEN_MAX {
        return Err(Error::Resource(format!(
            "dense Hermitian eigendecomposition of complex {n}x{n} matrix exceeds the supported size"
        )));
    }
    let mut vals: Vec<f64> =
        SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(vals)
}

/// Rejects spectra of matrices that are not PSD within tolerance.
pub fn check_psd(spectrum: &[f64]) -> Result<()> {
    if let Some(&min) = spectrum.last() {
        if min < PSD_EIG_TOL {
            return Err(Error::Spectrum(min));
        }
    }
    Ok(())
}

/// Von Neumann entropy in bits from a spectrum (eigenvalues >= 1e-12).
pub fn entropy_of_spectrum(spectrum: &[f64]) -> f64 {
    -spectrum.iter().filter(|&&l| l >= ENTROPY_EIG_CLIP).map(|&l| xlg(l)).sum::<f64>()
}

/// Numerical rank: eigenvalues above `1e-10 * lambda_max`.
pub fn rank_of_spectrum(spectrum: &[f64]) -> usize {
    let max = spectrum.first().copied().unwrap_or(0.0);
    if max <= 0.0 {
        return 0;
    }
    spectrum.iter().filter(|&&l| l > RANK_REL_CUTOFF * max).count()
}

/// `out[(i, j)] = sqrt(w_i w_j) m[(i, j)]` for real matrices.
pub fn scale_by_weights_real(m: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let roots: Vec<f64> = w.iter().map(|&x| x.max(0.0).sqrt()).collect();
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| roots[i] * roots[j] * m[(i, j)])
}

/// `out[(i, j)] = sqrt(w_i w_j) m[(i, j)]` for Hermitian matrices.
pub fn scale_by_weights_complex(m: &DMatrix<Complex64>, w: &[f64]) -> DMatrix<Complex64> {
    let roots: Vec<f64> = w.iter().map(|&x| x.max(0.0).sqrt()).collect();
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].scale(roots[i] * roots[j]))
}

/// Low-rank factor of a PSD matrix by diagonally pivoted Cholesky, then the
/// spectrum of the small factor Gram. Stops once the remaining trace falls
/// below `CHOLESKY_TRACE_TOL * trace`; a pivot below `PSD_EIG_TOL * scale`
/// is a spectrum error.
fn pivoted_cholesky_spectrum(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    let mut d: Vec<f64> = m.diagonal().iter().copied().collect();
    let trace: f64 = d.iter().sum();
    let scale = d.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);
    let stop = CHOLESKY_TRACE_TOL * trace.max(1e-300);
    let mut factors: Vec<Vec<f64>> = Vec::new();
    let mut used = vec![false; n];

    loop {
        let mut pivot = usize::MAX;
        let mut dmax = f64::NEG_INFINITY;
        let mut remaining = 0.0;
        for i in 0..n {
            if !used[i] {
                remaining += d[i];
                if d[i] > dmax {
                    dmax = d[i];
                    pivot = i;
                }
            }
        }
        if let Some(&bad) = d.iter().find(|&&v| v < PSD_EIG_TOL * scale) {
            return Err(Error::Spectrum(bad));
        }
        if pivot == usize::MAX || remaining <= stop || dmax <= 1e-16 * scale {
            break;
        }
        used[pivot] = true;
        let root = dmax.sqrt();
        let mut col = vec![0.0; n];
        for i in 0..n {
            let mut v = m[(i, pivot)];
            for f in &factors {
                v -= f[i] * f[pivot];
            }
            col[i] = v / root;
        }
        for i in 0..n {
            d[i] -= col[i] * col[i];
        }
        factors.push(col);
    }

    // spectrum of sum_t f_t f_t^T equals spectrum of the r x r Gram of factors
    let r = factors.len();
    if r == 0 {
        return Ok(vec![0.0; n.min(1)]);
    }
    let gram = DMatrix::from_fn(r, r, |s, t| {
        factors[s].iter().zip(&factors[t]).map(|(a, b)| a * b).sum::<f64>()
    });
    let mut vals: Vec<f64> =
        SymmetricEigen::new(gram).eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(vals)
}

/// Embedding factor of a PSD Gram matrix via its eigendecomposition:
/// returns the rank x n matrix `A = sqrt(L+) V^dagger` restricted to
/// eigenvalues above the rank cutoff, so that `A^dagger A` reproduces the
/// input. Column s is the memory state vector of state s in an orthonormal
/// basis.
pub fn psd_embedding(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Shape(format!("{}x{} matrix is not square", n, m.ncols())));
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let lmax = eig.eigenvalues[order[0]];
    if let Some(&min) = eig
        .eigenvalues
        .iter()
        .min_by(|a, b| a.partial_cmp(b).unwrap())
    {
        if min < PSD_EIG_TOL {
            return Err(Error::Spectrum(min));
        }
    }
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&i| eig.eigenvalues[i] > RANK_REL_CUTOFF * lmax.max(0.0))
        .collect();
    let mut a = DMatrix::<Complex64>::zeros(kept.len(), n);
    for (row, &i) in kept.iter().enumerate() {
        let root = eig.eigenvalues[i].max(0.0).sqrt();
        for col in 0..n {
            a[(row, col)] = eig.eigenvectors[(col, i)].conj().scale(root);
        }
    }
    Ok(a)
}
