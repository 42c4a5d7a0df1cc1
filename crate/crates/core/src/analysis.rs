//! System-level tests: stabilizability and detectability, the inner test,
//! the bounded-real lemma, H-infinity norm and Popov-function negativity.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::pencil::{self, MatrixPencil};
use crate::realization::CenteredRealization;
use crate::riccati::{self, PopovStructure};

/// Relative rank threshold for the stabilizability tests.
pub const RANK_TOL: f64 = 1e-9;

/// Residual threshold for the inner and bounded-real certificates.
pub const CERT_TOL: f64 = 1e-8;

/// Default grid for the initial lower bound of the norm.
pub const NORM_GRID: usize = 256;

const MAX_BISECTIONS: usize = 128;

/// `(A - zE, B)` is stabilizable when `[A - zE, B]` has full row rank at every
/// finite eigenvalue outside the open disk, and `[E, B]` has full row rank.
pub fn check_stabilizable(pencil: &MatrixPencil, b: &ComplexMatrix) -> Result<bool> {
    let n = pencil.order();
    if b.nrows() != n {
        return Err(Error::DimensionMismatch("B must have n rows".into()));
    }
    if n == 0 {
        return Ok(true);
    }
    let spec = pencil::generalized_spectrum(pencil)?;
    if linalg::numerical_rank(&linalg::hstack(pencil.e(), b), RANK_TOL) < n {
        return Ok(false);
    }
    for &z in &spec.finite {
        if z.norm() >= 1.0 - 1e-10 && linalg::numerical_rank(&linalg::hstack(&pencil.at(z), b), RANK_TOL) < n {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `(C, A - zE)` is detectable when `(A* - zE*, C*)` is stabilizable.
pub fn check_detectable(c: &ComplexMatrix, pencil: &MatrixPencil) -> Result<bool> {
    check_stabilizable(&pencil.adjoint(), &c.adjoint())
}

#[derive(Debug, Clone)]
pub struct InnerReport {
    pub is_unitary: bool,
    pub is_inner: bool,
    /// Solution of `E*XE - A*XA + C*C = 0`.
    pub x: ComplexMatrix,
    /// Normalized residuals of the Stein equation and of `D*C + B*XM = 0`.
    pub residuals: (f64, f64),
    /// Deviation `max|D*D - I|`.
    pub feedthrough_error: f64,
    /// The characterization assumes a minimal realization; this is not
    /// checked and is always reported as a caller assertion.
    pub minimality_assumed: bool,
}

pub fn is_inner(sys: &CenteredRealization) -> Result<InnerReport> {
    let m = sys.inputs();
    let d = sys.d();
    let feedthrough_error = linalg::max_abs(&(d.adjoint() * d - linalg::eye(m)));
    let x = pencil::solve_stein(sys.e(), sys.a(), sys.c())?;
    let xn = 1.0 + linalg::fro(&x);
    let r1 = linalg::fro(&(sys.e().adjoint() * &x * sys.e() - sys.a().adjoint() * &x * sys.a() + sys.c().adjoint() * sys.c())) / xn;
    let r2 = linalg::fro(&(d.adjoint() * sys.c() + sys.b().adjoint() * &x * sys.properness_matrix())) / xn;
    let is_unitary = feedthrough_error <= CERT_TOL && r1 <= CERT_TOL && r2 <= CERT_TOL;
    let negative = sys.order() == 0 || linalg::lambda_max(&x) < -1e-10 * linalg::norm2(&x);
    let is_inner = is_unitary && negative && sys.is_stable()?;
    Ok(InnerReport {
        is_unitary,
        is_inner,
        x,
        residuals: (r1, r2),
        feedthrough_error,
        minimality_assumed: true,
    })
}

/// Witness of the bounded-real property.
#[derive(Debug, Clone)]
pub struct BrlCertificate {
    pub x: ComplexMatrix,
    pub v: ComplexMatrix,
    pub w: ComplexMatrix,
}

impl BrlCertificate {
    /// Largest normalized residual of
    /// `D*D - I = -V*V`, `M*XB + C*D = -W*V`, `E*XE - A*XA + C*C = -W*W`.
    pub fn residual(&self, sys: &CenteredRealization) -> f64 {
        let (x, v, w) = (&self.x, &self.v, &self.w);
        let d = sys.d();
        let xn = 1.0 + linalg::fro(x);
        let r1 = linalg::fro(&(d.adjoint() * d - linalg::eye(sys.inputs()) + v.adjoint() * v));
        let r2 = linalg::fro(
            &(sys.properness_matrix().adjoint() * x * sys.b() + sys.c().adjoint() * d + w.adjoint() * v),
        ) / xn;
        let r3 = linalg::fro(
            &(sys.e().adjoint() * x * sys.e() - sys.a().adjoint() * x * sys.a()
                + sys.c().adjoint() * sys.c()
                + w.adjoint() * w),
        ) / xn;
        r1.max(r2).max(r3)
    }
}

/// `(A - zE, B; C*C, C*D, D*D - I)`.
pub fn brl_structure(sys: &CenteredRealization) -> Result<PopovStructure> {
    let (c, d) = (sys.c(), sys.d());
    PopovStructure::new(
        sys.pencil().clone(),
        sys.b().clone(),
        c.adjoint() * c,
        c.adjoint() * d,
        d.adjoint() * d - linalg::eye(sys.inputs()),
        sys.center(),
    )
}

/// Bounded-real test: stable with norm below 1.
///
/// Solver failures are reported as `false`. Stability of the pencil is also
/// required so that non-minimal realizations with hidden unstable modes are
/// not certified.
pub fn bounded_real(sys: &CenteredRealization) -> Result<(bool, Option<BrlCertificate>)> {
    let m = sys.inputs();
    let d = sys.d();
    let r = d.adjoint() * d - linalg::eye(m);
    if m > 0 && linalg::lambda_max(&r) >= 0.0 {
        return Ok((false, None));
    }
    if !sys.is_stable()? {
        return Ok((false, None));
    }
    let sigma = match brl_structure(sys) {
        Ok(s) => s,
        Err(_) => return Ok((false, None)),
    };
    let sol = match riccati::solve_ddtare(&sigma) {
        Ok(s) => s,
        Err(_) => return Ok((false, None)),
    };
    if sys.order() > 0 && linalg::lambda_max(&sol.x) > 1e-8 * linalg::norm2(&sol.x).max(1.0) {
        return Ok((false, None));
    }
    let v = linalg::hermitian_power(&(-r), 0.5);
    let w = -(&v * &sol.f);
    Ok((true, Some(BrlCertificate { x: sol.x, v, w })))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormResult {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
}

/// Singular values of `G(e^{j theta})`, descending.
pub fn sigma_at(sys: &CenteredRealization, theta: f64) -> Result<Vec<f64>> {
    Ok(linalg::singular_values(&sys.evaluate(Complex64::from_polar(1.0, theta))?))
}

/// Maximum of `sigma_max(G(e^{j theta}))` over `points` equally spaced angles
/// starting at 0. Grid points that hit a pole are skipped.
pub fn grid_norm(sys: &CenteredRealization, points: usize) -> f64 {
    (0..points)
        .filter_map(|k| sigma_at(sys, TAU * k as f64 / points as f64).ok())
        .map(|s| s.first().copied().unwrap_or(0.0))
        .fold(0.0, f64::max)
}

/// H-infinity norm by bisection on the bounded-real lemma.
pub fn hinf_norm(sys: &CenteredRealization, tol: f64) -> Result<NormResult> {
    if sys.order() == 0 {
        let v = linalg::singular_values(sys.d()).first().copied().unwrap_or(0.0);
        return Ok(NormResult {
            value: v,
            lower: v,
            upper: v,
            iterations: 0,
        });
    }
    if !sys.is_stable()? {
        return Err(Error::UnstableSystem);
    }
    let passes = |gamma: f64| -> Result<bool> { Ok(bounded_real(&sys.scale_output(1.0 / gamma))?.0) };
    let mut lower = grid_norm(sys, NORM_GRID);
    let mut upper = if lower > 0.0 { 2.0 * lower } else { 1e-12 };
    let mut iterations = 0;
    let mut doublings = 0;
    while !passes(upper)? {
        lower = lower.max(upper);
        upper *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::NoConvergence);
        }
    }
    while upper - lower > tol * lower.max(1.0) {
        if iterations >= MAX_BISECTIONS {
            return Err(Error::NoConvergence);
        }
        let mid = 0.5 * (lower + upper);
        if passes(mid)? {
            upper = mid;
        } else {
            lower = mid;
        }
        iterations += 1;
    }
    Ok(NormResult {
        value: 0.5 * (lower + upper),
        lower,
        upper,
        iterations,
    })
}

/// One-sided grid check of `Pi(e^{j theta}) < 0`.
pub fn popov_negative(sigma: &PopovStructure, grid_points: usize) -> Result<bool> {
    if !pencil::generalized_spectrum(sigma.pencil())?.is_stable() {
        return Err(Error::UnstableOpenLoop);
    }
    Ok(popov_max_eigenvalue(sigma, grid_points)? < -1e-8)
}

/// `max_theta lambda_max(Pi(e^{j theta}))` on the grid.
pub fn popov_max_eigenvalue(sigma: &PopovStructure, grid_points: usize) -> Result<f64> {
    let pi = riccati::popov_function(sigma);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..grid_points {
        let z = Complex64::from_polar(1.0, TAU * k as f64 / grid_points as f64);
        let v = pi.evaluate(z)?;
        worst = worst.max(linalg::lambda_max(&v));
    }
    Ok(worst)
}
