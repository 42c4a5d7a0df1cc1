//! Matrix pencils `A - zE`: regularity, generalized spectra, ordered stable
//! deflating subspaces and generalized Stein equations.

pub mod qz;
mod stein;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};

pub use qz::{GeneralizedSchur, EIG_INF_TOL};
pub use stein::{solve_stein, solve_stein_hermitian, solve_stein_kronecker};

/// Seed for the regularity sampling points.
pub const REGULARITY_SEED: u64 = 0x5EED;

/// Distance to the unit circle below which an eigenvalue is flagged.
pub const ON_CIRCLE_TOL: f64 = 1e-8;

/// Regular square pencil `A - zE`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPencil {
    a: ComplexMatrix,
    e: ComplexMatrix,
}

impl MatrixPencil {
    /// Builds a pencil after checking shapes. Regularity is checked by the
    /// numerical routines that need it, not here.
    pub fn new(a: ComplexMatrix, e: ComplexMatrix) -> Result<Self> {
        if !a.is_square() || a.shape() != e.shape() {
            return Err(Error::DimensionMismatch(format!(
                "pencil needs square A, E of equal size (got {:?} and {:?})",
                a.shape(),
                e.shape()
            )));
        }
        Ok(Self { a, e })
    }

    pub fn empty() -> Self {
        Self {
            a: linalg::zeros(0, 0),
            e: linalg::zeros(0, 0),
        }
    }

    pub fn a(&self) -> &ComplexMatrix {
        &self.a
    }

    pub fn e(&self) -> &ComplexMatrix {
        &self.e
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    /// `A - zE` at a point.
    pub fn at(&self, z: Complex64) -> ComplexMatrix {
        &self.a - &self.e * z
    }

    /// Conjugate-transposed pencil `A* - zE*`.
    pub fn adjoint(&self) -> Self {
        Self {
            a: self.a.adjoint(),
            e: self.e.adjoint(),
        }
    }

    pub fn is_regular(&self) -> bool {
        self.is_regular_with_seed(REGULARITY_SEED)
    }

    /// `det(A - zE)` is a polynomial of degree at most n, so it vanishes
    /// identically iff it vanishes at n + 1 distinct points.
    pub fn is_regular_with_seed(&self, seed: u64) -> bool {
        let n = self.order();
        if n == 0 {
            return true;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = linalg::norm2(&self.a) + linalg::norm2(&self.e);
        if scale == 0.0 {
            return false;
        }
        (0..=n).any(|_| {
            let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let z = Complex64::from_polar(1.0, theta);
            let s = linalg::singular_values(&self.at(z));
            let smin = s.last().copied().unwrap_or(0.0);
            smin > 1e-13 * scale * n as f64
        })
    }

    pub fn require_regular(&self) -> Result<()> {
        if self.is_regular() {
            Ok(())
        } else {
            Err(Error::SingularPencil)
        }
    }
}

/// Generalized eigenvalues of a regular pencil.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub finite: Vec<Complex64>,
    pub infinite_count: usize,
    pub on_circle_tol: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.finite.len() + self.infinite_count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every eigenvalue finite and strictly inside the unit disk, with a
    /// 1e-10 numerical guard.
    pub fn is_stable(&self) -> bool {
        self.infinite_count == 0 && self.finite.iter().all(|l| l.norm() < 1.0 - 1e-10)
    }

    pub fn touches_circle(&self) -> bool {
        self.finite
            .iter()
            .any(|l| (l.norm() - 1.0).abs() <= self.on_circle_tol)
    }

    pub fn spectral_radius(&self) -> f64 {
        if self.infinite_count > 0 {
            return f64::INFINITY;
        }
        self.finite.iter().fold(0.0, |acc, l| acc.max(l.norm()))
    }
}

pub fn generalized_spectrum(pencil: &MatrixPencil) -> Result<Spectrum> {
    pencil.require_regular()?;
    let g = qz::qz(pencil.a(), pencil.e())?;
    Ok(spectrum_of(&g))
}

pub(crate) fn spectrum_of(g: &GeneralizedSchur) -> Spectrum {
    let mut finite = Vec::new();
    let mut infinite_count = 0;
    for (alpha, beta) in g.pairs() {
        if qz::is_infinite(alpha, beta) {
            infinite_count += 1;
        } else {
            finite.push(alpha / beta);
        }
    }
    Spectrum {
        finite,
        infinite_count,
        on_circle_tol: ON_CIRCLE_TOL,
    }
}

/// Right deflating subspace of the eigenvalues in the open unit disk.
#[derive(Debug, Clone)]
pub struct DeflationResult {
    pub stable_count: usize,
    /// Orthonormal columns spanning the right deflating subspace.
    pub basis: ComplexMatrix,
    /// Orthonormal columns `W` with `A·basis = W·Â`, `E·basis = W·Ê`.
    pub left_basis: ComplexMatrix,
    pub a_hat: ComplexMatrix,
    pub e_hat: ComplexMatrix,
    pub circle_violation: bool,
    /// Full reordered spectrum (stable eigenvalues first).
    pub spectrum: Spectrum,
}

pub fn ordered_stable_deflation(pencil: &MatrixPencil) -> Result<DeflationResult> {
    pencil.require_regular()?;
    let mut g = qz::qz(pencil.a(), pencil.e())?;
    let select: Vec<bool> = g
        .pairs()
        .iter()
        .map(|&(al, be)| !qz::is_infinite(al, be) && al.norm() < be.norm())
        .collect();
    let spectrum = spectrum_of(&g);
    let circle_violation = spectrum.touches_circle();
    let k = qz::reorder(&mut g, &select)?;
    let n = g.order();
    Ok(DeflationResult {
        stable_count: k,
        basis: linalg::sub(&g.z, 0, 0, n, k),
        left_basis: linalg::sub(&g.q, 0, 0, n, k),
        a_hat: linalg::sub(&g.s, 0, 0, k, k),
        e_hat: linalg::sub(&g.t, 0, 0, k, k),
        circle_violation,
        spectrum: spectrum_of(&g),
    })
}

/// SVD-based rank with relative threshold `tol`.
pub fn numerical_rank(m: &ComplexMatrix, tol: f64) -> usize {
    linalg::numerical_rank(m, tol)
}
