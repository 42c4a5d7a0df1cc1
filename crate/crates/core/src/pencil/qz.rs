//! Complex QZ: Hessenberg-triangular reduction, single-shift QZ sweeps and
//! reordering of the generalized Schur form by adjacent swaps.
//!
//! Conventions: `A = Q S Z*`, `E = Q T Z*` with `S`, `T` upper triangular and
//! `Q`, `Z` unitary. The generalized eigenvalues are `S[i,i] / T[i,i]`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{eye, fro, ComplexMatrix, ZERO};

/// Relative threshold on `|beta| / (|alpha| + |beta|)` below which an
/// eigenvalue is reported as infinite.
pub const EIG_INF_TOL: f64 = 1e-12;

/// Maximum tolerated loss of accuracy in a single adjacent swap.
pub const SWAP_TOL: f64 = 1e-8;

const ULP: f64 = f64::EPSILON;

#[derive(Debug, Clone)]
pub struct GeneralizedSchur {
    pub s: ComplexMatrix,
    pub t: ComplexMatrix,
    pub q: ComplexMatrix,
    pub z: ComplexMatrix,
}

impl GeneralizedSchur {
    pub fn order(&self) -> usize {
        self.s.nrows()
    }

    /// `(alpha_i, beta_i)` pairs from the diagonals.
    pub fn pairs(&self) -> Vec<(Complex64, Complex64)> {
        (0..self.order())
            .map(|i| (self.s[(i, i)], self.t[(i, i)]))
            .collect()
    }
}

pub fn is_infinite(alpha: Complex64, beta: Complex64) -> bool {
    let scale = alpha.norm() + beta.norm();
    scale == 0.0 || beta.norm() <= EIG_INF_TOL * scale
}

/// 2x2 unitary `U` with `U [a; b] = [r; 0]`.
fn left_rot(a: Complex64, b: Complex64) -> [[Complex64; 2]; 2] {
    let nrm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if nrm == 0.0 {
        return [[Complex64::new(1.0, 0.0), ZERO], [ZERO, Complex64::new(1.0, 0.0)]];
    }
    [
        [a.conj() / nrm, b.conj() / nrm],
        [-b / nrm, a / nrm],
    ]
}

/// 2x2 unitary `W` with `[a b] W = [0 r]`.
fn right_rot(a: Complex64, b: Complex64) -> [[Complex64; 2]; 2] {
    let nrm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if nrm == 0.0 {
        return [[Complex64::new(1.0, 0.0), ZERO], [ZERO, Complex64::new(1.0, 0.0)]];
    }
    [[b / nrm, a.conj() / nrm], [-a / nrm, b.conj() / nrm]]
}

fn apply_left(m: &mut ComplexMatrix, i: usize, k: usize, u: &[[Complex64; 2]; 2], cols: std::ops::Range<usize>) {
    for col in cols {
        let x = m[(i, col)];
        let y = m[(k, col)];
        m[(i, col)] = u[0][0] * x + u[0][1] * y;
        m[(k, col)] = u[1][0] * x + u[1][1] * y;
    }
}

fn apply_right(m: &mut ComplexMatrix, i: usize, k: usize, w: &[[Complex64; 2]; 2], rows: std::ops::Range<usize>) {
    for row in rows {
        let x = m[(row, i)];
        let y = m[(row, k)];
        m[(row, i)] = x * w[0][0] + y * w[1][0];
        m[(row, k)] = x * w[0][1] + y * w[1][1];
    }
}

fn adjoint2(u: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    [
        [u[0][0].conj(), u[1][0].conj()],
        [u[0][1].conj(), u[1][1].conj()],
    ]
}

struct Work {
    s: ComplexMatrix,
    t: ComplexMatrix,
    q: ComplexMatrix,
    z: ComplexMatrix,
    n: usize,
}

impl Work {
    /// Left rotation on rows (i, i+1) of S and T starting at column `from`.
    fn rot_rows(&mut self, i: usize, u: &[[Complex64; 2]; 2], s_from: usize, t_from: usize) {
        let n = self.n;
        apply_left(&mut self.s, i, i + 1, u, s_from..n);
        apply_left(&mut self.t, i, i + 1, u, t_from..n);
        apply_right(&mut self.q, i, i + 1, &adjoint2(u), 0..n);
    }

    /// Right rotation on columns (i, i+1) of S and T for rows `0..s_to`, `0..t_to`.
    fn rot_cols(&mut self, i: usize, w: &[[Complex64; 2]; 2], s_to: usize, t_to: usize) {
        let n = self.n;
        apply_right(&mut self.s, i, i + 1, w, 0..s_to);
        apply_right(&mut self.t, i, i + 1, w, 0..t_to);
        apply_right(&mut self.z, i, i + 1, w, 0..n);
    }
}

/// Generalized Schur decomposition of the pencil `A - zE`.
pub fn qz(a: &ComplexMatrix, e: &ComplexMatrix) -> Result<GeneralizedSchur> {
    let n = a.nrows();
    if !a.is_square() || e.nrows() != n || e.ncols() != n {
        return Err(Error::DimensionMismatch("QZ needs square A and E of equal size".into()));
    }
    let mut w = Work {
        s: a.clone(),
        t: e.clone(),
        q: eye(n),
        z: eye(n),
        n,
    };
    if n == 0 {
        return Ok(GeneralizedSchur { s: w.s, t: w.t, q: w.q, z: w.z });
    }
    if !a.iter().chain(e.iter()).all(|x| x.re.is_finite() && x.im.is_finite()) {
        return Err(Error::DimensionMismatch("non-finite pencil entries".into()));
    }
    triangularize_e(&mut w);
    hessenberg_triangular(&mut w);
    qz_sweeps(&mut w)?;
    Ok(GeneralizedSchur { s: w.s, t: w.t, q: w.q, z: w.z })
}

/// Makes T upper triangular with Givens rotations from the left.
fn triangularize_e(w: &mut Work) {
    let n = w.n;
    for col in 0..n {
        for row in (col + 1..n).rev() {
            let b = w.t[(row, col)];
            if b == ZERO {
                continue;
            }
            let u = left_rot(w.t[(row - 1, col)], b);
            w.rot_rows(row - 1, &u, 0, col);
            w.t[(row, col)] = ZERO;
        }
    }
}

fn hessenberg_triangular(w: &mut Work) {
    let n = w.n;
    if n < 3 {
        return;
    }
    for col in 0..n - 2 {
        for row in (col + 2..n).rev() {
            let u = left_rot(w.s[(row - 1, col)], w.s[(row, col)]);
            w.rot_rows(row - 1, &u, col, row - 1);
            w.s[(row, col)] = ZERO;
            let v = right_rot(w.t[(row, row - 1)], w.t[(row, row)]);
            w.rot_cols(row - 1, &v, n, row + 1);
            w.t[(row, row - 1)] = ZERO;
        }
    }
}

/// Eigenvalue of the trailing 2x2 pencil closest to `S[l,l] / T[l,l]`.
fn wilkinson_shift(w: &Work, l: usize) -> Complex64 {
    let (a, b, c, d) = (w.s[(l - 1, l - 1)], w.s[(l - 1, l)], w.s[(l, l - 1)], w.s[(l, l)]);
    let (p, q, r) = (w.t[(l - 1, l - 1)], w.t[(l - 1, l)], w.t[(l, l)]);
    let target = d / r;
    // (a - lp)(d - lr) - (b - lq) c = 0
    let qa = p * r;
    let qb = -(a * r + d * p - q * c);
    let qc = a * d - b * c;
    if qa.norm() == 0.0 {
        return target;
    }
    let disc = (qb * qb - 4.0 * qa * qc).sqrt();
    let den1 = -qb + disc;
    let den2 = -qb - disc;
    let big = if den1.norm() >= den2.norm() { den1 } else { den2 };
    if big.norm() == 0.0 {
        return target;
    }
    let r1 = big / (2.0 * qa);
    let r2 = 2.0 * qc / big;
    if (r1 - target).norm() <= (r2 - target).norm() {
        r1
    } else {
        r2
    }
}

fn qz_sweeps(w: &mut Work) -> Result<()> {
    let n = w.n;
    let atol = ULP * fro(&w.s).max(f64::MIN_POSITIVE);
    let btol = ULP * fro(&w.t).max(f64::MIN_POSITIVE);
    let max_iter = 60 * n.max(1);
    let mut iter = 0usize;
    let mut since_deflation = 0usize;
    let mut eshift = ZERO;
    let mut ilast = n - 1;

    'outer: while ilast > 0 {
        if w.s[(ilast, ilast - 1)].norm() <= atol {
            w.s[(ilast, ilast - 1)] = ZERO;
            ilast -= 1;
            since_deflation = 0;
            eshift = ZERO;
            continue;
        }
        if w.t[(ilast, ilast)].norm() <= btol {
            // Infinite eigenvalue at the bottom: rotate it off.
            w.t[(ilast, ilast)] = ZERO;
            let v = right_rot(w.s[(ilast, ilast - 1)], w.s[(ilast, ilast)]);
            w.rot_cols(ilast - 1, &v, ilast + 1, ilast + 1);
            w.s[(ilast, ilast - 1)] = ZERO;
            ilast -= 1;
            since_deflation = 0;
            eshift = ZERO;
            continue;
        }

        // Locate the top of the unreduced block, handling zero T diagonals.
        let mut j = ilast - 1;
        let ifirst = loop {
            let top = j == 0 || w.s[(j, j - 1)].norm() <= atol;
            if j > 0 && top {
                w.s[(j, j - 1)] = ZERO;
            }
            if w.t[(j, j)].norm() <= btol {
                w.t[(j, j)] = ZERO;
                if top {
                    // Split a 1x1 block with an infinite eigenvalue off at row j.
                    for jch in j..ilast {
                        let u = left_rot(w.s[(jch, jch)], w.s[(jch + 1, jch)]);
                        w.rot_rows(jch, &u, jch, jch + 1);
                        w.s[(jch + 1, jch)] = ZERO;
                        if w.t[(jch + 1, jch + 1)].norm() > btol {
                            continue 'outer;
                        }
                        w.t[(jch + 1, jch + 1)] = ZERO;
                    }
                } else {
                    // Chase the zero down to T[ilast, ilast].
                    for jch in j..ilast {
                        let u = left_rot(w.t[(jch, jch + 1)], w.t[(jch + 1, jch + 1)]);
                        w.rot_rows(jch, &u, jch - 1, jch + 1);
                        w.t[(jch + 1, jch + 1)] = ZERO;
                        let v = right_rot(w.s[(jch + 1, jch - 1)], w.s[(jch + 1, jch)]);
                        w.rot_cols(jch - 1, &v, jch + 2, jch + 1);
                        w.s[(jch + 1, jch - 1)] = ZERO;
                    }
                }
                continue 'outer;
            }
            if top {
                break j;
            }
            j -= 1;
        };

        iter += 1;
        since_deflation += 1;
        if iter > max_iter {
            return Err(Error::NoConvergence);
        }

        let shift = if since_deflation.is_multiple_of(10) {
            eshift += w.s[(ilast, ilast - 1)] / w.t[(ilast - 1, ilast - 1)];
            eshift
        } else {
            wilkinson_shift(w, ilast)
        };

        let x = w.s[(ifirst, ifirst)] - shift * w.t[(ifirst, ifirst)];
        let y = w.s[(ifirst + 1, ifirst)];
        for jc in ifirst..ilast {
            let u = if jc == ifirst {
                left_rot(x, y)
            } else {
                left_rot(w.s[(jc, jc - 1)], w.s[(jc + 1, jc - 1)])
            };
            let from = if jc == ifirst { jc } else { jc - 1 };
            w.rot_rows(jc, &u, from, jc);
            if jc > ifirst {
                w.s[(jc + 1, jc - 1)] = ZERO;
            }
            let v = right_rot(w.t[(jc + 1, jc)], w.t[(jc + 1, jc + 1)]);
            let s_to = (jc + 3).min(ilast + 1);
            w.rot_cols(jc, &v, s_to, jc + 2);
            w.t[(jc + 1, jc)] = ZERO;
        }
    }
    Ok(())
}

/// Swaps the adjacent diagonal entries at positions `j`, `j + 1`.
pub fn swap_adjacent(g: &mut GeneralizedSchur, j: usize) -> Result<()> {
    let n = g.order();
    let (s11, s12, s22) = (g.s[(j, j)], g.s[(j, j + 1)], g.s[(j + 1, j + 1)]);
    let (t11, t12, t22) = (g.t[(j, j)], g.t[(j, j + 1)], g.t[(j + 1, j + 1)]);
    let f = s22 * t11 - t22 * s11;
    let gg = s22 * t12 - t22 * s12;
    let scale = (s11.norm() + s12.norm() + s22.norm() + t11.norm() + t12.norm() + t22.norm()).max(f64::MIN_POSITIVE);
    if f.norm() <= ULP * scale * scale {
        // Equal eigenvalues: nothing to exchange.
        return Ok(());
    }
    // Right eigenvector of the (s22, t22) eigenvalue is [g; -f].
    let (x1, x2) = (gg, -f);
    let nrm = (x1.norm_sqr() + x2.norm_sqr()).sqrt();
    let (x1, x2) = (x1 / nrm, x2 / nrm);
    let v = [[x1, -x2.conj()], [x2, x1.conj()]];
    apply_right(&mut g.s, j, j + 1, &v, 0..j + 2);
    apply_right(&mut g.t, j, j + 1, &v, 0..j + 2);
    apply_right(&mut g.z, j, j + 1, &v, 0..n);

    let use_s = s22.norm() * t11.norm() >= s11.norm() * t22.norm();
    let (a, b) = if use_s {
        (g.s[(j, j)], g.s[(j + 1, j)])
    } else {
        (g.t[(j, j)], g.t[(j + 1, j)])
    };
    let u = left_rot(a, b);
    apply_left(&mut g.s, j, j + 1, &u, j..n);
    apply_left(&mut g.t, j, j + 1, &u, j..n);
    apply_right(&mut g.q, j, j + 1, &adjoint2(&u), 0..n);

    let resid = g.s[(j + 1, j)].norm().max(g.t[(j + 1, j)].norm());
    if resid > SWAP_TOL * scale {
        return Err(Error::ReorderingFailure(resid / scale));
    }
    g.s[(j + 1, j)] = ZERO;
    g.t[(j + 1, j)] = ZERO;
    Ok(())
}

/// Moves the selected eigenvalues to the leading block, preserving their
/// relative order. Returns the size of the leading block.
pub fn reorder(g: &mut GeneralizedSchur, select: &[bool]) -> Result<usize> {
    let n = g.order();
    debug_assert_eq!(select.len(), n);
    let mut sel = select.to_vec();
    let mut k = 0;
    for i in 0..n {
        if !sel[i] {
            continue;
        }
        let mut pos = i;
        while pos > k {
            swap_adjacent(g, pos - 1)?;
            sel.swap(pos - 1, pos);
            pos -= 1;
        }
        k += 1;
    }
    Ok(k)
}
