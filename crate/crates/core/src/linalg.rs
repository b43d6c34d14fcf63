//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Result of orthonormalising the rows of `e`: `e = lower * orthonormal`,
/// with `lower` lower-triangular with a positive diagonal and the rows of
/// `orthonormal` orthonormal.
#[derive(Clone, Debug)]
pub struct RowGramSchmidt {
    pub lower: DMatrix<f64>,
    pub orthonormal: DMatrix<f64>,
}

/// Gram–Schmidt on the rows of `e`, applied twice per row for stability.
///
/// A row whose residual falls below `rank_tol` times its own norm is treated
/// as linearly dependent on the previous ones and reported as an error.
pub fn gram_schmidt_rows(e: &DMatrix<f64>, rank_tol: f64) -> Result<RowGramSchmidt> {
    let (m, n) = e.shape();
    if m > n {
        return Err(Error::DiagonalDegeneracy(format!(
            "{m} functionals on a space of dimension {n}"
        )));
    }
    let mut lower = DMatrix::<f64>::zeros(m, m);
    let mut q = DMatrix::<f64>::zeros(m, n);
    for i in 0..m {
        let row = e.row(i).transpose();
        let norm0 = row.norm();
        let mut v = row.clone();
        for _pass in 0..2 {
            for j in 0..i {
                let qj = q.row(j).transpose();
                let c = qj.dot(&v);
                lower[(i, j)] += c;
                v.axpy(-c, &qj, 1.0);
            }
        }
        let r = v.norm();
        if !(r > rank_tol * norm0.max(f64::MIN_POSITIVE)) {
            return Err(Error::DiagonalDegeneracy(format!(
                "functional {i} is dependent on the previous ones (residual {r:e}, norm {norm0:e})"
            )));
        }
        lower[(i, i)] = r;
        q.set_row(i, &(v / r).transpose());
    }
    Ok(RowGramSchmidt {
        lower,
        orthonormal: q,
    })
}

/// Orthogonal projector onto the kernel of the row space of `e`
/// (`I - Q^T Q` with `Q` an orthonormal basis of the rows).
pub fn kernel_projector(e: &DMatrix<f64>, rank_tol: f64) -> Result<DMatrix<f64>> {
    let gs = gram_schmidt_rows(e, rank_tol)?;
    let n = e.ncols();
    Ok(DMatrix::identity(n, n) - gs.orthonormal.transpose() * &gs.orthonormal)
}

/// Determinant of a small dense row-major `n × n` matrix by Gaussian
/// elimination with partial pivoting. The slice is used as scratch space.
pub fn det_in_place<T: Scalar>(m: &mut [T], n: usize) -> T {
    debug_assert_eq!(m.len(), n * n);
    let mut det = T::one();
    for col in 0..n {
        let mut piv = col;
        let mut best = m[col * n + col].modulus();
        for r in col + 1..n {
            let v = m[r * n + col].modulus();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return T::zero();
        }
        if piv != col {
            for c in 0..n {
                m.swap(col * n + c, piv * n + c);
            }
            det = -det;
        }
        let p = m[col * n + col];
        det *= p;
        for r in col + 1..n {
            let f = m[r * n + col] / p;
            if f != T::zero() {
                for c in col..n {
                    let sub = f * m[col * n + c];
                    m[r * n + c] -= sub;
                }
            }
        }
    }
    det
}

pub fn det<T: Scalar>(m: &[T], n: usize) -> T {
    match n {
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        3 => {
            m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
                + m[2] * (m[3] * m[7] - m[4] * m[6])
        }
        _ => {
            let mut scratch = m.to_vec();
            det_in_place(&mut scratch, n)
        }
    }
}

/// Determinant of a row-major `n × n` matrix that is exactly alternating in
/// the rows: rows are put in a canonical order first, so swapping two rows of
/// the input flips the sign of the result bit for bit.
pub fn det_alternating<T: Scalar>(m: &[T], n: usize) -> T {
    let key = |r: usize| -> Vec<(f64, f64)> {
        m[r * n..(r + 1) * n]
            .iter()
            .map(|v| (v.re(), v.im()))
            .collect()
    };
    let cmp = |a: &Vec<(f64, f64)>, b: &Vec<(f64, f64)>| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    };
    let keys: Vec<_> = (0..n).map(key).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cmp(&keys[a], &keys[b]));
    if order
        .windows(2)
        .any(|w| cmp(&keys[w[0]], &keys[w[1]]).is_eq())
    {
        return T::zero();
    }
    let mut sorted = Vec::with_capacity(n * n);
    for &r in &order {
        sorted.extend_from_slice(&m[r * n..(r + 1) * n]);
    }
    let value = det(&sorted, n);
    if permutation_is_odd(&order) {
        -value
    } else {
        value
    }
}

fn permutation_is_odd(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    let mut odd = false;
    for start in 0..perm.len() {
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        if len > 0 && len % 2 == 0 {
            odd = !odd;
        }
    }
    odd
}

pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Checks `m` is PSD up to `slack * max(trace, tiny)`.
pub fn check_psd(m: &DMatrix<f64>, slack: f64) -> Result<()> {
    let trace: f64 = m.diagonal().iter().map(|v| v.abs()).sum();
    let min = min_eigenvalue(m);
    if min < -slack * trace.max(f64::MIN_POSITIVE) {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: min,
        });
    }
    Ok(())
}

/// A factor `L` with `L L^T = m` for a PSD matrix; negative eigenvalues
/// produced by rounding are clamped to zero.
pub fn psd_factor(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let mut sym = m.clone();
    symmetrize(&mut sym);
    let eig = SymmetricEigen::new(sym);
    let mut f = eig.eigenvectors;
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        let s = lambda.max(0.0).sqrt();
        f.column_mut(j).scale_mut(s);
    }
    f
}

/// `log det m` for a symmetric positive definite matrix.
pub fn spd_log_det(m: &DMatrix<f64>) -> Result<f64> {
    let mut sym = m.clone();
    symmetrize(&mut sym);
    let chol = sym.cholesky().ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l_dirty();
    let mut acc = 0.0;
    for i in 0..l.nrows() {
        let d = l[(i, i)];
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        acc += 2.0 * d.ln();
    }
    Ok(acc)
}

/// Least-squares line fit `y = intercept + slope x`; returns
/// `(slope, intercept, rms residual)`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    (slope, intercept, (rss / n).sqrt())
}

pub fn dvector_from(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_schmidt_reconstructs_rows() {
        let e = DMatrix::from_row_slice(
            3,
            4,
            &[1.0, 2.0, 0.0, 1.0, 0.5, -1.0, 3.0, 0.0, 2.0, 0.0, 1.0, 1.0],
        );
        let gs = gram_schmidt_rows(&e, 1e-12).unwrap();
        let back = &gs.lower * &gs.orthonormal;
        assert!((back - &e).amax() < 1e-12);
        let qqt = &gs.orthonormal * gs.orthonormal.transpose();
        assert!((qqt - DMatrix::<f64>::identity(3, 3)).amax() < 1e-12);
        for i in 0..3 {
            assert!(gs.lower[(i, i)] > 0.0);
            for j in i + 1..3 {
                assert_eq!(gs.lower[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn gram_schmidt_flags_dependent_rows() {
        let e = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert!(matches!(
            gram_schmidt_rows(&e, 1e-12),
            Err(Error::DiagonalDegeneracy(_))
        ));
    }

    #[test]
    fn determinant_matches_nalgebra() {
        let m = [
            2.0, -1.0, 0.5, 3.0, 1.0, 4.0, 0.0, 2.0, -2.0, 1.0, 1.0, 1.0, 0.3, 0.0, 2.0, 5.0,
        ];
        let na = DMatrix::from_row_slice(4, 4, &m).determinant();
        assert!((det(&m, 4) - na).abs() < 1e-12);
        let m3 = &m[..9];
        let na3 = DMatrix::from_row_slice(3, 3, m3).determinant();
        assert!((det(m3, 3) - na3).abs() < 1e-12);
    }

    #[test]
    fn psd_factor_reproduces_matrix() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 1.0]);
        let f = psd_factor(&m);
        assert!((&f * f.transpose() - m).amax() < 1e-12);
    }

    #[test]
    fn line_fit_exact() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 1.5 - 2.0 * x).collect();
        let (s, i, r) = fit_line(&xs, &ys);
        assert!((s + 2.0).abs() < 1e-12 && (i - 1.5).abs() < 1e-12 && r < 1e-12);
    }
}
