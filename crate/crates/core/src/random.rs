//! Seeded generators for random systems, used by property tests and by the
//! sampled checks of the command-line tool.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::linalg::{self, ComplexMatrix};
use crate::pencil::{self, MatrixPencil};
use crate::realization::{Center, CenteredRealization, DescriptorRealization};
use crate::riccati::PopovStructure;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries uniform in `[-1, 1]`, with an imaginary part when `complex`.
pub fn matrix(rng: &mut SeededRng, rows: usize, cols: usize, complex: bool) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re = rng.random_range(-1.0..1.0);
        let im = if complex { rng.random_range(-1.0..1.0) } else { 0.0 };
        Complex64::new(re, im)
    })
}

pub fn unit_point(rng: &mut SeededRng) -> Complex64 {
    Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
}

/// Random center on the unit circle; `z0 = 1` when `complex` is false.
pub fn center(rng: &mut SeededRng, complex: bool) -> Center {
    if complex {
        Center::from_z0(unit_point(rng)).expect("unit-circle point")
    } else {
        Center::unit()
    }
}

/// Well-conditioned `I + 0.4 G / sqrt(n)`.
fn near_identity(rng: &mut SeededRng, n: usize, complex: bool) -> ComplexMatrix {
    let s = 0.4 / (n.max(1) as f64).sqrt();
    linalg::eye(n) + matrix(rng, n, n, complex) * Complex64::new(s, 0.0)
}

/// Pencil `T A0 S - z T S` whose eigenvalues are those of `A0`, scaled to
/// spectral radius `radius`.
pub fn pencil_with_radius(rng: &mut SeededRng, n: usize, radius: f64, complex: bool) -> Result<MatrixPencil> {
    let a0 = matrix(rng, n, n, complex);
    let rho = pencil::generalized_spectrum(&MatrixPencil::new(a0.clone(), linalg::eye(n))?)?.spectral_radius();
    let a0 = if rho > 0.0 { a0 * Complex64::new(radius / rho, 0.0) } else { a0 };
    let t = near_identity(rng, n, complex);
    let s = near_identity(rng, n, complex);
    MatrixPencil::new(&t * a0 * &s, &t * &s)
}

/// Stable system with spectral radius drawn from `[0.1, max_radius]`.
pub fn stable_system(
    rng: &mut SeededRng,
    n: usize,
    m: usize,
    p: usize,
    max_radius: f64,
    complex: bool,
) -> Result<CenteredRealization> {
    let radius = rng.random_range(0.1..max_radius);
    let pencil = pencil_with_radius(rng, n, radius, complex)?;
    let center = center(rng, complex);
    CenteredRealization::new(
        pencil,
        matrix(rng, n, m, complex),
        matrix(rng, p, n, complex),
        matrix(rng, p, m, complex),
        center,
    )
}

/// Descriptor system with `finite` dynamic states (spectral radius up to 1.5)
/// and one nilpotent Jordan block per entry of `nilpotent`, hidden behind
/// random equivalence transformations.
pub fn descriptor_system(
    rng: &mut SeededRng,
    finite: usize,
    nilpotent: &[usize],
    m: usize,
    p: usize,
    complex: bool,
) -> Result<DescriptorRealization> {
    let n = finite + nilpotent.iter().sum::<usize>();
    let mut a = linalg::eye(n);
    let mut e = linalg::eye(n);
    if finite > 0 {
        let radius = rng.random_range(0.2..1.5);
        let j = pencil_with_radius(rng, finite, radius, complex)?;
        let ej = linalg::inverse(j.e())?;
        a.view_mut((0, 0), (finite, finite)).copy_from(&(ej * j.a()));
    }
    let mut start = finite;
    for &k in nilpotent {
        for i in start..start + k {
            e[(i, i)] = linalg::ZERO;
            if i + 1 < start + k {
                e[(i, i + 1)] = Complex64::new(rng.random_range(0.5..1.5), 0.0);
            }
        }
        start += k;
    }
    let t = near_identity(rng, n, complex);
    let s = near_identity(rng, n, complex);
    DescriptorRealization::new(
        MatrixPencil::new(&t * a * &s, &t * e * &s)?,
        matrix(rng, n, m, complex),
        matrix(rng, p, n, complex),
        matrix(rng, p, m, complex),
    )
}

/// Structure with a stable pencil, `R < 0` and random `Q`, `L`. The weights
/// are scaled by a random factor so that both negative and indefinite Popov
/// functions occur.
pub fn popov_structure(rng: &mut SeededRng, n: usize, m: usize, complex: bool) -> Result<PopovStructure> {
    let radius = rng.random_range(0.1..0.9);
    let pencil = pencil_with_radius(rng, n, radius, complex)?;
    let b = matrix(rng, n, m, complex);
    let g = matrix(rng, n, n, complex);
    let weight = Complex64::new(rng.random_range(0.0..0.6), 0.0);
    let q = (&g + g.adjoint()) * weight;
    let l = matrix(rng, n, m, complex) * weight;
    let h = matrix(rng, m, m, complex);
    let r = -(linalg::eye(m) + &h * h.adjoint() * Complex64::new(0.5, 0.0));
    PopovStructure::new(pencil, b, q, l, r, center(rng, complex))
}
