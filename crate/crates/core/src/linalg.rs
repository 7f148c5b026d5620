//! Small dense linear-algebra helpers shared by the Markov-chain and
//! absorption-inverse code.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub fn ones(n: usize) -> DVector<f64> {
    DVector::from_element(n, 1.0)
}

pub fn diag(v: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_diagonal(v)
}

pub fn col_sums(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(m.ncols(), m.column_iter().map(|c| c.sum()))
}

/// Induced matrix 1-norm: the largest absolute column sum.
pub fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn vec_norm1(v: &DVector<f64>) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Scales column `j` of `m` by `1 / d[j]`, i.e. returns `m * diag(d)^-1`.
pub fn scale_columns_inv(m: &DMatrix<f64>, d: &DVector<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col /= d[j];
    }
    out
}

/// Scales row `i` of `m` by `d[i]`, i.e. returns `diag(d) * m`.
pub fn scale_rows(m: &DMatrix<f64>, d: &DVector<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        row *= d[i];
    }
    out
}

pub fn invert(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let inv = m
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NonConvergent("matrix is singular".into()))?;
    if inv.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonConvergent("inverse has non-finite entries".into()));
    }
    // reject inverses of numerically singular matrices
    let resid = norm1(&(m * &inv - DMatrix::identity(m.nrows(), m.nrows())));
    if resid > 1e-6 {
        return Err(Error::NonConvergent(format!(
            "inverse residual {resid:e} indicates a numerically singular matrix"
        )));
    }
    Ok(inv)
}

pub fn solve(m: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let x = m
        .clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::NonConvergent("linear system is singular".into()))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonConvergent("solution has non-finite entries".into()));
    }
    let resid = vec_norm1(&(m * &x - b));
    if resid > 1e-8 * (1.0 + vec_norm1(b)) {
        return Err(Error::NonConvergent(format!(
            "solve residual {resid:e} indicates a numerically singular system"
        )));
    }
    Ok(x)
}

pub fn solve_matrix(m: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let x = m
        .clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::NonConvergent("linear system is singular".into()))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonConvergent("solution has non-finite entries".into()));
    }
    Ok(x)
}

/// Solves `m x = 0` subject to `sum(x) = 1` by replacing the last equation of
/// the system with the normalization row. Fails if the kernel is not
/// one-dimensional.
pub fn normalized_kernel_vector(m: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = m.nrows();
    let mut bordered = m.clone();
    bordered.row_mut(n - 1).fill(1.0);
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let x = solve(&bordered, &rhs)?;
    let resid = vec_norm1(&(m * &x));
    if resid > 1e-9 * (1.0 + norm1(m)) {
        return Err(Error::NonConvergent(format!(
            "kernel residual {resid:e}; kernel is not one-dimensional"
        )));
    }
    Ok(x)
}

/// Singular value decomposition `m = U diag(s) Vᵀ` with `s` decreasing.
/// `U` is `rows × cols` (thin), `V` is square. Columns of `U` belonging to
/// zero singular values are left as zero vectors.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
}

/// One-sided Jacobi SVD. nalgebra's bidiagonal routine can return factors
/// that do not reproduce singular Laplacians, so everything that needs
/// subspaces goes through this instead. Cost is fine for dense n ≤ a few hundred.
pub fn svd(m: &DMatrix<f64>) -> Svd {
    let (rows, cols) = m.shape();
    // pad short matrices with zero rows so every column can be orthogonalized
    let mut a = DMatrix::zeros(rows.max(cols), cols);
    a.view_mut((0, 0), (rows, cols)).copy_from(m);
    let mut v = DMatrix::<f64>::identity(cols, cols);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dot(&a.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = c * t;
                for mat in [&mut a, &mut v] {
                    for i in 0..mat.nrows() {
                        let (xp, xq) = (mat[(i, p)], mat[(i, q)]);
                        mat[(i, p)] = c * xp - sn * xq;
                        mat[(i, q)] = sn * xp + c * xq;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = (0..cols).map(|k| a.column(k).norm()).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let mut u = DMatrix::zeros(rows, cols);
    let mut s = DVector::zeros(cols);
    let mut vs = DMatrix::zeros(cols, cols);
    for (k, &j) in order.iter().enumerate() {
        s[k] = norms[j];
        if norms[j] > 0.0 {
            u.column_mut(k).copy_from(&(a.column(j).rows(0, rows) / norms[j]));
        }
        vs.column_mut(k).copy_from(&v.column(j));
    }
    Svd { u, s, v: vs }
}

fn numerical_rank(s: &DVector<f64>, rel_tol: f64) -> usize {
    let smax = s.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * smax).count()
}

/// Numerical rank from singular values relative to the largest one.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    numerical_rank(&svd(m).s, rel_tol)
}

/// Orthonormal basis of the null space of `m` (columns of the result).
pub fn null_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let d = svd(m);
    let r = numerical_rank(&d.s, rel_tol);
    d.v.columns(r, m.ncols() - r).into_owned()
}

/// Orthonormal basis of the column space of `m`.
pub fn range_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let d = svd(m);
    let r = numerical_rank(&d.s, rel_tol).min(m.nrows());
    d.u.columns(0, r).into_owned()
}

/// Spectral radius via the eigenvalues of the (generally non-symmetric) matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}
