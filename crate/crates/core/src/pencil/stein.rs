//! Generalized Stein equations `E* X E - A* X A + H = 0`.

use num_complex::Complex64;

use super::qz::{qz, GeneralizedSchur};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ZERO};

/// Above this order the triangular back-substitution replaces the
/// Kronecker-vectorized solve.
const KRONECKER_MAX_ORDER: usize = 10;

/// Relative size below which an operator eigenvalue
/// `conj(b_i) b_j - conj(a_i) a_j` counts as zero.
const SOLVABILITY_TOL: f64 = 1e-12;

/// Solves `E* X E - A* X A + C* C = 0`.
pub fn solve_stein(e: &ComplexMatrix, a: &ComplexMatrix, c: &ComplexMatrix) -> Result<ComplexMatrix> {
    if c.ncols() != a.ncols() {
        return Err(Error::DimensionMismatch("C must have as many columns as A".into()));
    }
    solve_stein_hermitian(e, a, &(c.adjoint() * c))
}

/// Solves `E* X E - A* X A + H = 0` for Hermitian `H`; the result is
/// symmetrized.
pub fn solve_stein_hermitian(e: &ComplexMatrix, a: &ComplexMatrix, h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = check_dims(e, a, h)?;
    if n == 0 {
        return Ok(linalg::zeros(0, 0));
    }
    let g = qz(a, e)?;
    check_solvable(&g)?;
    let x = if n <= KRONECKER_MAX_ORDER {
        kronecker(e, a, h)?
    } else {
        triangular(&g, h)
    };
    Ok(linalg::hermitian_part(&x))
}

/// Reference path: dense solve of the n²×n² vectorized operator.
pub fn solve_stein_kronecker(e: &ComplexMatrix, a: &ComplexMatrix, h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = check_dims(e, a, h)?;
    if n == 0 {
        return Ok(linalg::zeros(0, 0));
    }
    let g = qz(a, e)?;
    check_solvable(&g)?;
    Ok(linalg::hermitian_part(&kronecker(e, a, h)?))
}

fn check_dims(e: &ComplexMatrix, a: &ComplexMatrix, h: &ComplexMatrix) -> Result<usize> {
    let n = a.nrows();
    if !a.is_square() || e.shape() != a.shape() || h.shape() != a.shape() {
        return Err(Error::DimensionMismatch("Stein equation needs square E, A, H of one size".into()));
    }
    Ok(n)
}

fn check_solvable(g: &GeneralizedSchur) -> Result<()> {
    let pairs = g.pairs();
    for &(ai, bi) in &pairs {
        for &(aj, bj) in &pairs {
            let coef = bi.conj() * bj - ai.conj() * aj;
            let scale = bi.norm() * bj.norm() + ai.norm() * aj.norm();
            if scale == 0.0 || coef.norm() <= SOLVABILITY_TOL * scale {
                return Err(Error::SteinSingular);
            }
        }
    }
    Ok(())
}

fn kronecker(e: &ComplexMatrix, a: &ComplexMatrix, h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.nrows();
    let nn = n * n;
    // vec(M* X M) = (M^T ⊗ M*) vec(X), column-major vec.
    let mut op = linalg::zeros(nn, nn);
    for q in 0..n {
        for p in 0..n {
            let (ep, ap) = (e[(p, q)], a[(p, q)]);
            for j in 0..n {
                for i in 0..n {
                    // (M^T)_{qp} (M*)_{ij} with (M*)_{ij} = conj(M_{ji})
                    op[(q * n + i, p * n + j)] += ep * e[(j, i)].conj() - ap * a[(j, i)].conj();
                }
            }
        }
    }
    let rhs = ComplexMatrix::from_iterator(nn, 1, h.iter().map(|v| -v));
    let x = op.lu().solve(&rhs).ok_or(Error::SteinSingular)?;
    Ok(ComplexMatrix::from_iterator(n, n, x.iter().cloned()))
}

/// Fast path on the generalized Schur form: with `A = QSZ*`, `E = QTZ*` and
/// `Y = Q* X Q`, solve `T* Y T - S* Y S = -Z* H Z` entry by entry.
fn triangular(g: &GeneralizedSchur, h: &ComplexMatrix) -> ComplexMatrix {
    let n = g.order();
    let rhs = -(g.z.adjoint() * h * &g.z);
    let (s, t) = (&g.s, &g.t);
    let mut y = linalg::zeros(n, n);
    // Partial products P = Y T and R = Y S, filled as columns of Y complete
    // row by row: (T* Y T)_{ij} = sum_k conj(T_ki) (Y T)_kj.
    for i in 0..n {
        for j in 0..n {
            let mut acc = ZERO;
            for k in 0..=i {
                let tk = t[(k, i)].conj();
                let sk = s[(k, i)].conj();
                if tk == ZERO && sk == ZERO {
                    continue;
                }
                for l in 0..=j {
                    if k == i && l == j {
                        continue;
                    }
                    let ykl = y[(k, l)];
                    acc += tk * ykl * t[(l, j)] - sk * ykl * s[(l, j)];
                }
            }
            let coef: Complex64 = t[(i, i)].conj() * t[(j, j)] - s[(i, i)].conj() * s[(j, j)];
            y[(i, j)] = (rhs[(i, j)] - acc) / coef;
        }
    }
    &g.q * y * g.q.adjoint()
}
