//! Dense complex matrix helpers shared by every layer.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix; all system data lives in this type.
pub type ComplexMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerance for Hermitian-tagged inputs (max |M - M*|).
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Default relative tolerance for SVD rank decisions.
pub const RANK_TOL: f64 = 1e-9;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn zeros(r: usize, c: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(r, c)
}

pub fn eye(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// Builds a complex matrix from real rows.
pub fn from_real_rows(rows: &[&[f64]]) -> ComplexMatrix {
    let r = rows.len();
    let cols = rows.first().map_or(0, |row| row.len());
    ComplexMatrix::from_fn(r, cols, |i, j| c(rows[i][j], 0.0))
}

pub fn real_diag(d: &[f64]) -> ComplexMatrix {
    let n = d.len();
    ComplexMatrix::from_fn(n, n, |i, j| if i == j { c(d[i], 0.0) } else { ZERO })
}

pub fn scalar(v: Complex64) -> ComplexMatrix {
    ComplexMatrix::from_element(1, 1, v)
}

pub fn fro(m: &ComplexMatrix) -> f64 {
    m.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.norm()))
}

/// Largest singular value (0 for empty matrices).
pub fn norm2(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().cloned().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Count of singular values above `tol * sigma_max`.
pub fn numerical_rank(m: &ComplexMatrix, tol: f64) -> usize {
    let s = singular_values(m);
    let Some(&smax) = s.first() else {
        return 0;
    };
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > tol * smax).count()
}

/// `(M + M*) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

pub fn asymmetry(m: &ComplexMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Validates that `m` is square and Hermitian within [`HERMITIAN_TOL`]
/// (relative to its magnitude) and returns its Hermitian part.
pub fn require_hermitian(m: &ComplexMatrix, what: &str) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("{what} must be square")));
    }
    let asym = asymmetry(m);
    if asym > HERMITIAN_TOL * (1.0 + max_abs(m)) {
        return Err(Error::NotHermitian(asym));
    }
    Ok(hermitian_part(m))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut ev: Vec<f64> = hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

pub fn lambda_max(m: &ComplexMatrix) -> f64 {
    hermitian_eigenvalues(m)
        .last()
        .copied()
        .unwrap_or(f64::NEG_INFINITY)
}

/// `M^p` for Hermitian positive definite `M`, eigenvalues floored at 1e-12.
pub fn hermitian_power(m: &ComplexMatrix, p: f64) -> ComplexMatrix {
    let n = m.nrows();
    if n == 0 {
        return zeros(0, 0);
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut d = zeros(n, n);
    for i in 0..n {
        d[(i, i)] = c(eig.eigenvalues[i].max(1e-12).powf(p), 0.0);
    }
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Inverse with a reciprocal-condition guard.
pub fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("inverse of non-square matrix".into()));
    }
    if m.nrows() == 0 {
        return Ok(zeros(0, 0));
    }
    if rcond(m) < 1e-14 {
        return Err(Error::IllPosed);
    }
    m.clone().try_inverse().ok_or(Error::IllPosed)
}

/// Solves `M x = rhs` with partial-pivot LU; errors when `M` is numerically singular.
pub fn solve(m: &ComplexMatrix, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
    if m.nrows() == 0 {
        return Ok(zeros(0, rhs.ncols()));
    }
    if rcond(m) < 1e-14 {
        return Err(Error::IllPosed);
    }
    m.clone().lu().solve(rhs).ok_or(Error::IllPosed)
}

/// `sigma_min / sigma_max` (1 for empty, 0 for the zero matrix).
pub fn rcond(m: &ComplexMatrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        (Some(_), _) => 0.0,
        _ => 1.0,
    }
}

/// Stacks blocks given row-wise; every block in a row must share the row count,
/// and each block column must agree in width. `None` entries are zero blocks
/// whose sizes are inferred from their neighbours.
pub fn block(rows: &[usize], cols: &[usize], blocks: &[&[Option<&ComplexMatrix>]]) -> ComplexMatrix {
    let total_r: usize = rows.iter().sum();
    let total_c: usize = cols.iter().sum();
    let mut out = zeros(total_r, total_c);
    let mut r0 = 0;
    for (bi, &h) in rows.iter().enumerate() {
        let mut c0 = 0;
        for (bj, &w) in cols.iter().enumerate() {
            if let Some(Some(b)) = blocks.get(bi).and_then(|row| row.get(bj)) {
                debug_assert_eq!((b.nrows(), b.ncols()), (h, w), "block ({bi},{bj})");
                out.view_mut((r0, c0), (h, w)).copy_from(b);
            }
            c0 += w;
        }
        r0 += h;
    }
    out
}

pub fn hstack(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    debug_assert_eq!(a.nrows(), b.nrows());
    block(&[a.nrows()], &[a.ncols(), b.ncols()], &[&[Some(a), Some(b)]])
}

pub fn vstack(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    debug_assert_eq!(a.ncols(), b.ncols());
    block(&[a.nrows(), b.nrows()], &[a.ncols()], &[&[Some(a)], &[Some(b)]])
}

pub fn block_diag(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    block(
        &[a.nrows(), b.nrows()],
        &[a.ncols(), b.ncols()],
        &[&[Some(a), None], &[None, Some(b)]],
    )
}

pub fn sub(m: &ComplexMatrix, r0: usize, c0: usize, h: usize, w: usize) -> ComplexMatrix {
    m.view((r0, c0), (h, w)).into_owned()
}

/// Unitary `U` (rows x rows) whose leading `rank` columns span the range of
/// `m` and whose trailing columns span its orthogonal complement.
///
/// The range comes from one-sided Jacobi: nalgebra's complex SVD returns
/// inaccurate singular vectors for some rank-deficient inputs.
pub fn range_split(m: &ComplexMatrix, tol: f64) -> (ComplexMatrix, usize) {
    let r = m.nrows();
    if r == 0 {
        return (zeros(0, 0), 0);
    }
    let w = orthogonal_columns(m);
    let mut norms: Vec<(f64, usize)> = (0..w.ncols()).map(|j| (w.column(j).norm(), j)).collect();
    norms.sort_by(|a, b| b.0.total_cmp(&a.0));
    let smax = norms.first().map_or(0.0, |p| p.0);
    let rank = if smax == 0.0 { 0 } else { norms.iter().filter(|p| p.0 > tol * smax).count().min(r) };
    let mut lead = zeros(r, rank);
    for (new, &(norm, old)) in norms.iter().take(rank).enumerate() {
        lead.set_column(new, &(w.column(old) / Complex64::new(norm, 0.0)));
    }
    // QR of [U_r, I] keeps span(U_r) in front and supplies the complement.
    let q = hstack(&lead, &eye(r)).qr().q();
    (q, rank)
}

/// `m V` for a unitary `V` that makes the columns mutually orthogonal
/// (Hestenes one-sided Jacobi).
fn orthogonal_columns(m: &ComplexMatrix) -> ComplexMatrix {
    let mut a = m.clone();
    let n = a.ncols();
    for _ in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.norm();
                if g == 0.0 || g <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotating a_q by the phase of gamma makes the pair real.
                let phase = gamma.conj() / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                let ap = a.column(p).clone_owned();
                let aq = a.column(q) * phase;
                a.set_column(p, &(&ap * Complex64::new(cs, 0.0) - &aq * Complex64::new(sn, 0.0)));
                a.set_column(q, &(&ap * Complex64::new(sn, 0.0) + &aq * Complex64::new(cs, 0.0)));
            }
        }
        if !rotated {
            break;
        }
    }
    a
}

/// Orthonormal basis of the right null space of `m`.
pub fn null_space(m: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let n = m.ncols();
    if m.nrows() == 0 {
        return eye(n);
    }
    let (v, rank) = range_split(&m.adjoint(), tol);
    sub(&v, 0, rank, n, n - rank)
}
