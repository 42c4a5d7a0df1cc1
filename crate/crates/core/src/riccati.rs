//! Popov structures `(A - zE, B; Q, L, R)`, their Popov functions and
//! symplectic pencils, and the stabilizing solution of the descriptor
//! discrete-time algebraic Riccati equation
//!
//! `E*XE - A*XA + Q - (M*XB + L) R^{-1} (L* + B*XM) = 0`, `M = alpha E - beta A`.

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::pencil::{self, MatrixPencil};
use crate::realization::{Center, CenteredRealization};

/// Normalized residual accepted without refinement.
pub const RESIDUAL_TOL: f64 = 1e-8;

const MAX_NEWTON_STEPS: usize = 20;
const MAX_DAMPING_HALVINGS: u32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct PopovStructure {
    pencil: MatrixPencil,
    b: ComplexMatrix,
    q: ComplexMatrix,
    l: ComplexMatrix,
    r: ComplexMatrix,
    center: Center,
}

impl PopovStructure {
    /// `B`, `L` are `n x m`; `Q`, `R` are symmetrized after the Hermitian check.
    pub fn new(
        pencil: MatrixPencil,
        b: ComplexMatrix,
        q: ComplexMatrix,
        l: ComplexMatrix,
        r: ComplexMatrix,
        center: Center,
    ) -> Result<Self> {
        let n = pencil.order();
        let m = r.nrows();
        if b.shape() != (n, m) || l.shape() != (n, m) || q.shape() != (n, n) || r.shape() != (m, m) {
            return Err(Error::DimensionMismatch(format!(
                "Popov structure: n={n}, m={m}, B {:?}, Q {:?}, L {:?}, R {:?}",
                b.shape(),
                q.shape(),
                l.shape(),
                r.shape()
            )));
        }
        let q = linalg::require_hermitian(&q, "Q")?;
        let r = linalg::require_hermitian(&r, "R")?;
        let s = linalg::singular_values(&r);
        if m > 0 && s[m - 1] <= 1e-10 * s[0] {
            return Err(Error::SingularR);
        }
        Ok(Self { pencil, b, q, l, r, center })
    }

    pub fn pencil(&self) -> &MatrixPencil {
        &self.pencil
    }
    pub fn a(&self) -> &ComplexMatrix {
        self.pencil.a()
    }
    pub fn e(&self) -> &ComplexMatrix {
        self.pencil.e()
    }
    pub fn b(&self) -> &ComplexMatrix {
        &self.b
    }
    pub fn q(&self) -> &ComplexMatrix {
        &self.q
    }
    pub fn l(&self) -> &ComplexMatrix {
        &self.l
    }
    pub fn r(&self) -> &ComplexMatrix {
        &self.r
    }
    pub fn center(&self) -> Center {
        self.center
    }
    pub fn order(&self) -> usize {
        self.pencil.order()
    }
    pub fn inputs(&self) -> usize {
        self.r.nrows()
    }

    /// `alpha E - beta A`.
    pub fn m(&self) -> ComplexMatrix {
        self.center.properness_matrix(&self.pencil)
    }

    /// Diagonal power-of-two state scaling `A -> S A T`, `E -> S E T`,
    /// `B -> S B`, `Q -> T Q T`, `L -> T L`.
    fn scaled(&self, s: &[f64], t: &[f64]) -> Self {
        let sd = diag(s);
        let td = diag(t);
        Self {
            pencil: MatrixPencil::new(&sd * self.a() * &td, &sd * self.e() * &td).expect("same shape"),
            b: &sd * &self.b,
            q: &td * &self.q * &td,
            l: &td * &self.l,
            r: self.r.clone(),
            center: self.center,
        }
    }
}

fn diag(v: &[f64]) -> ComplexMatrix {
    linalg::real_diag(v)
}

#[derive(Debug, Clone)]
pub struct RiccatiSolution {
    pub x: ComplexMatrix,
    /// Stabilizing feedback `F = -R^{-1}(B*XM + L*)`.
    pub f: ComplexMatrix,
    pub residual: f64,
    /// `(A + alpha B F) - z (E + beta B F)`.
    pub closed_loop: MatrixPencil,
    pub newton_steps: usize,
}

/// Realization of the Popov function, order `2n`.
pub fn popov_function(sigma: &PopovStructure) -> CenteredRealization {
    let n = sigma.order();
    let (al, be) = (sigma.center.alpha(), sigma.center.beta());
    let a = linalg::block(
        &[n, n],
        &[n, n],
        &[&[Some(sigma.a()), None], &[Some(&(&sigma.q * al)), Some(&sigma.e().adjoint())]],
    );
    let e = linalg::block(
        &[n, n],
        &[n, n],
        &[&[Some(sigma.e()), None], &[Some(&(&sigma.q * be)), Some(&sigma.a().adjoint())]],
    );
    let b = linalg::vstack(&sigma.b, &sigma.l);
    let c = linalg::hstack(&sigma.l.adjoint(), &sigma.b.adjoint());
    CenteredRealization::from_parts_unchecked(
        MatrixPencil::new(a, e).expect("square blocks"),
        b,
        c,
        sigma.r.clone(),
        sigma.center,
    )
}

/// System pencil of the Popov function realization, size `2n + m`.
pub fn symplectic_pencil(sigma: &PopovStructure) -> MatrixPencil {
    let n = sigma.order();
    let m = sigma.inputs();
    let (al, be) = (sigma.center.alpha(), sigma.center.beta());
    let ea = sigma.e().adjoint();
    let aa = sigma.a().adjoint();
    let lad = sigma.l.adjoint();
    let bad = sigma.b.adjoint();
    let sizes = [n, n, m];
    let mm = linalg::block(
        &sizes,
        &sizes,
        &[
            &[Some(sigma.a()), None, Some(&(&sigma.b * al))],
            &[Some(&(&sigma.q * al)), Some(&ea), Some(&(&sigma.l * al))],
            &[Some(&lad), Some(&bad), Some(&sigma.r)],
        ],
    );
    let nn = linalg::block(
        &sizes,
        &sizes,
        &[
            &[Some(sigma.e()), None, Some(&(&sigma.b * be))],
            &[Some(&(&sigma.q * be)), Some(&aa), Some(&(&sigma.l * be))],
            &[None, None, None],
        ],
    );
    MatrixPencil::new(mm, nn).expect("square blocks")
}

/// Left-hand side of the Riccati equation at `x`.
pub fn riccati_residual_matrix(sigma: &PopovStructure, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let m = sigma.m();
    let g = m.adjoint() * x * &sigma.b + &sigma.l;
    let rinv_gs = linalg::solve(&sigma.r, &g.adjoint())?;
    Ok(sigma.e().adjoint() * x * sigma.e() - sigma.a().adjoint() * x * sigma.a() + &sigma.q - g * rinv_gs)
}

/// `‖Ric(X)‖_F / (1 + ‖X‖_F)`.
pub fn riccati_residual(sigma: &PopovStructure, x: &ComplexMatrix) -> f64 {
    if x.shape() != (sigma.order(), sigma.order()) {
        return f64::INFINITY;
    }
    match riccati_residual_matrix(sigma, x) {
        Ok(r) => linalg::fro(&r) / (1.0 + linalg::fro(x)),
        Err(_) => f64::INFINITY,
    }
}

/// `F = -R^{-1}(B*XM + L*)`.
pub fn feedback(sigma: &PopovStructure, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rhs = sigma.b.adjoint() * x * sigma.m() + sigma.l.adjoint();
    Ok(-linalg::solve(&sigma.r, &rhs)?)
}

/// `(A + alpha B F) - z (E + beta B F)`.
pub fn closed_loop(sigma: &PopovStructure, f: &ComplexMatrix) -> MatrixPencil {
    let bf = &sigma.b * f;
    MatrixPencil::new(sigma.a() + &bf * sigma.center.alpha(), sigma.e() + &bf * sigma.center.beta())
        .expect("same shape")
}

/// Stabilizing solution of the Riccati equation of `sigma`.
///
/// The stable deflating subspace `[V1; V2; V3]` of the symplectic pencil
/// satisfies `V2 = X M V1` and `V3 = F V1`, which gives `X = V2 (M V1)^{-1}`.
/// The candidate is accepted after a residual and closed-loop stability
/// check, and refined by Newton steps otherwise.
pub fn solve_ddtare(sigma: &PopovStructure) -> Result<RiccatiSolution> {
    let n = sigma.order();
    if n == 0 {
        let f = linalg::zeros(sigma.inputs(), 0);
        return Ok(RiccatiSolution {
            x: linalg::zeros(0, 0),
            closed_loop: MatrixPencil::empty(),
            f,
            residual: 0.0,
            newton_steps: 0,
        });
    }
    let (s, t) = balance(sigma.a(), sigma.e());
    let scaled = sigma.scaled(&s, &t);
    let xs = deflation_candidate(&scaled)?;
    let sd = diag(&s);
    let x0 = linalg::hermitian_part(&(&sd * xs * &sd));
    refine(sigma, x0)
}

fn deflation_candidate(sigma: &PopovStructure) -> Result<ComplexMatrix> {
    let n = sigma.order();
    let defl = pencil::ordered_stable_deflation(&symplectic_pencil(sigma)).map_err(|e| match e {
        Error::SingularPencil => Error::NoStabilizingSolution("symplectic pencil is singular".into()),
        other => other,
    })?;
    if defl.circle_violation {
        return Err(Error::NoStabilizingSolution(
            "symplectic pencil has eigenvalues on the unit circle".into(),
        ));
    }
    if defl.stable_count != n {
        return Err(Error::NoStabilizingSolution(format!(
            "stable deflating subspace has dimension {} instead of {n}",
            defl.stable_count
        )));
    }
    let v1 = linalg::sub(&defl.basis, 0, 0, n, n);
    let v2 = linalg::sub(&defl.basis, n, 0, n, n);
    let mv1 = sigma.m() * v1;
    if linalg::rcond(&mv1) < 1e-12 {
        return Err(Error::NoStabilizingSolution("coupling block is rank deficient".into()));
    }
    // X (M V1) = V2  <=>  (M V1)* X* = V2*.
    let xa = linalg::solve(&mv1.adjoint(), &v2.adjoint())?.adjoint();
    Ok(linalg::hermitian_part(&xa))
}

fn is_acceptable(sigma: &PopovStructure, x: &ComplexMatrix) -> Result<Option<RiccatiSolution>> {
    let residual = riccati_residual(sigma, x);
    if residual.is_nan() || residual > RESIDUAL_TOL {
        return Ok(None);
    }
    let f = feedback(sigma, x)?;
    let cl = closed_loop(sigma, &f);
    if !pencil::generalized_spectrum(&cl).map(|s| s.is_stable()).unwrap_or(false) {
        return Ok(None);
    }
    Ok(Some(RiccatiSolution {
        x: x.clone(),
        f,
        residual,
        closed_loop: cl,
        newton_steps: 0,
    }))
}

/// Newton iteration: `Ric(X + D) = Ric(X) + E_F* D E_F - A_F* D A_F + O(D^2)`
/// with the closed-loop pair `(A_F, E_F)` at `X`.
fn refine(sigma: &PopovStructure, x0: ComplexMatrix) -> Result<RiccatiSolution> {
    let mut x = x0;
    let mut res = riccati_residual(sigma, &x);
    for step in 0..=MAX_NEWTON_STEPS {
        if let Some(mut sol) = is_acceptable(sigma, &x)? {
            sol.newton_steps = step;
            return Ok(sol);
        }
        if step == MAX_NEWTON_STEPS {
            break;
        }
        let f = feedback(sigma, &x)?;
        let cl = closed_loop(sigma, &f);
        let h = riccati_residual_matrix(sigma, &x)?;
        let delta = match pencil::solve_stein_hermitian(cl.e(), cl.a(), &h) {
            Ok(d) => d,
            Err(_) => break,
        };
        let mut improved = false;
        for k in 0..=MAX_DAMPING_HALVINGS {
            let cand = linalg::hermitian_part(&(&x + &delta * linalg::c(0.5f64.powi(k as i32), 0.0)));
            let r = riccati_residual(sigma, &cand);
            if r < res {
                x = cand;
                res = r;
                improved = true;
                break;
            }
        }
        if !improved {
            break;
        }
    }
    Err(Error::NoStabilizingSolution(format!(
        "verification failed after refinement (residual {res:.3e})"
    )))
}

/// Power-of-two row and column scalings equilibrating `|A| + |E|`.
fn balance(a: &ComplexMatrix, e: &ComplexMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.nrows();
    let mag = ComplexMatrix::from_fn(n, n, |i, j| linalg::c(a[(i, j)].norm() + e[(i, j)].norm(), 0.0));
    let mut s = vec![1.0; n];
    let mut t = vec![1.0; n];
    for _ in 0..6 {
        for i in 0..n {
            let norm: f64 = (0..n).map(|j| mag[(i, j)].re * t[j]).sum();
            if norm > 0.0 {
                s[i] = pow2(1.0 / norm);
            }
        }
        for j in 0..n {
            let norm: f64 = (0..n).map(|i| mag[(i, j)].re * s[i]).sum();
            if norm > 0.0 {
                t[j] = pow2(1.0 / norm);
            }
        }
    }
    (s, t)
}

fn pow2(v: f64) -> f64 {
    2f64.powi(v.log2().round().clamp(-40.0, 40.0) as i32)
}

/// `S(z) = (A - zE, B; -F, I)` with `Pi = S^# R S`.
#[derive(Debug, Clone)]
pub struct SpectralFactor {
    pub s: CenteredRealization,
    pub r: ComplexMatrix,
}

pub fn spectral_factor(sigma: &PopovStructure, sol: &RiccatiSolution) -> Result<SpectralFactor> {
    if !pencil::generalized_spectrum(sigma.pencil())?.is_stable() {
        return Err(Error::UnstableOpenLoop);
    }
    let m = sigma.inputs();
    let s = CenteredRealization::new(sigma.pencil().clone(), sigma.b.clone(), -&sol.f, linalg::eye(m), sigma.center)?;
    Ok(SpectralFactor { s, r: sigma.r.clone() })
}
