//! Conversion from descriptor realizations to centered ones.

use num_complex::Complex64;

use super::{Center, CenteredRealization, DescriptorRealization, POLE_CLEARANCE_TOL};
use crate::error::{Error, Result};
use crate::linalg;
use crate::pencil::{self, MatrixPencil};

/// Rank threshold used when compressing `E` and the non-dynamic rows of `A`.
const COMPRESS_TOL: f64 = 1e-10;

/// Rewrites `D + C (zE - A)^{-1} B` as a centered realization at `z0`.
///
/// The transfer matrix is unchanged. When `E` is singular the order drops by
/// `n - rank(E)`: the non-dynamic states are eliminated after row- and
/// column-compressing the pencil.
pub fn from_descriptor(desc: &DescriptorRealization, z0: Complex64) -> Result<CenteredRealization> {
    let center = Center::from_z0(z0)?;
    let n = desc.order();
    if n == 0 {
        return Ok(CenteredRealization::static_gain(desc.d.clone(), center));
    }
    let (a, e) = (desc.pencil.a(), desc.pencil.e());
    let spec = pencil::generalized_spectrum(&desc.pencil)?;
    if spec.finite.iter().any(|l| (l - z0).norm() <= POLE_CLEARANCE_TOL) {
        return Err(Error::CenterIsPole);
    }

    let r = linalg::numerical_rank(e, COMPRESS_TOL);
    let (u, v) = if r == n {
        (linalg::eye(n), linalg::eye(n))
    } else {
        // Rows r.. of U E vanish.
        let (ue, _) = linalg::range_split(e, COMPRESS_TOL);
        let u = ue.adjoint();
        let bottom = linalg::sub(&(&u * a), r, 0, n - r, n);
        // Columns r.. of V span the row space of the bottom block.
        let (vr, rank_b) = linalg::range_split(&bottom.adjoint(), COMPRESS_TOL);
        if rank_b < n - r {
            return Err(Error::DeflationRankFailure);
        }
        let mut v = linalg::zeros(n, n);
        v.view_mut((0, 0), (n, r)).copy_from(&vr.view((0, n - r), (n, r)));
        v.view_mut((0, r), (n, n - r)).copy_from(&vr.view((0, 0), (n, n - r)));
        (u, v)
    };

    let at = &u * a * &v;
    let mut et = &u * e * &v;
    et.view_mut((r, 0), (n - r, n)).fill(linalg::ZERO);
    let shifted = a - e * z0;
    let bhat = v.adjoint() * linalg::solve(&shifted, &desc.b).map_err(|_| Error::CenterIsPole)?;
    let ct = &desc.c * &v;

    let a1 = linalg::sub(&at, 0, 0, r, r);
    let e1 = linalg::sub(&et, 0, 0, r, r);
    let e12 = linalg::sub(&et, 0, r, r, n - r);
    let m = desc.b.ncols();
    let b1 = linalg::sub(&bhat, 0, 0, r, m);
    let b2 = linalg::sub(&bhat, r, 0, n - r, m);
    let c1 = linalg::sub(&ct, 0, 0, ct.nrows(), r);
    let c2 = linalg::sub(&ct, 0, r, ct.nrows(), n - r);

    let bc = -(&e1 * &b1 + &e12 * &b2) / center.beta();
    let dc = &desc.d - &c1 * &b1 - &c2 * &b2;
    balance(&CenteredRealization::new(MatrixPencil::new(a1, e1)?, bc, c1, dc, center)?)
}

/// Diagonal state scaling by powers of two that evens out the row norms of
/// `B` against the column norms of `C`. A pole close to the center makes `B`
/// large, and left alone that swamps regularity tests on interconnections.
fn balance(sys: &CenteredRealization) -> Result<CenteredRealization> {
    let n = sys.order();
    let mut s = vec![1.0; n];
    for (i, si) in s.iter_mut().enumerate() {
        let rb = sys.b().row(i).norm();
        let cc = sys.c().column(i).norm();
        if rb > 0.0 && cc > 0.0 {
            *si = (0.5 * (rb / cc).log2()).round().exp2();
        }
    }
    if s.iter().all(|&v| v == 1.0) {
        return Ok(sys.clone());
    }
    let v = linalg::real_diag(&s);
    let u = linalg::real_diag(&s.iter().map(|x| 1.0 / x).collect::<Vec<_>>());
    sys.transform(&u, &v)
}
