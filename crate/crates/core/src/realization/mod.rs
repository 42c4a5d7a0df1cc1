//! Centered and descriptor realizations of discrete-time transfer matrices.
//!
//! A centered realization represents
//! `G(z) = D + C (zE - A)^{-1} B (alpha - beta z)` with `|alpha| = 1`,
//! `beta = conj(alpha)` and center `z0 = alpha / beta = alpha^2` on the unit
//! circle, so that `G(z0) = D`. Improper and polynomial systems are covered
//! by singular `E`.

mod convert;
mod interconnect;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::pencil::{self, MatrixPencil, Spectrum};

pub use convert::from_descriptor;
pub use interconnect::{append, close_loops, d22_loop_shift, gamma_scale, lft_lower, star_product};

/// Minimum distance between the center and any finite pole.
pub const POLE_CLEARANCE_TOL: f64 = 1e-8;

/// Reciprocal condition number of `zE - A` below which evaluation fails.
pub const EVAL_TOL: f64 = 1e-13;

/// The pair `(alpha, beta)` fixing the center `z0 = alpha / beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Center {
    alpha: Complex64,
    beta: Complex64,
}

impl Center {
    pub fn new(alpha: Complex64) -> Result<Self> {
        if !(alpha.re.is_finite() && alpha.im.is_finite()) || (alpha.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidCenter(format!("|alpha| = {} is not 1", alpha.norm())));
        }
        Ok(Self { alpha, beta: alpha.conj() })
    }

    /// Center at `z0` on the unit circle, `alpha` the principal square root.
    pub fn from_z0(z0: Complex64) -> Result<Self> {
        if !(z0.re.is_finite() && z0.im.is_finite()) || (z0.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidCenter(format!("|z0| = {} is not 1", z0.norm())));
        }
        let alpha = z0.sqrt();
        Self::new(alpha / alpha.norm())
    }

    /// `z0 = 1`, `alpha = beta = 1`.
    pub fn unit() -> Self {
        Self {
            alpha: linalg::ONE,
            beta: linalg::ONE,
        }
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    pub fn z0(&self) -> Complex64 {
        self.alpha / self.beta
    }

    /// Center of the conjugate-transposed (dual) realization: `alpha` and
    /// `beta` exchanged, `z0` conjugated.
    pub fn dual(&self) -> Self {
        Self {
            alpha: self.beta,
            beta: self.alpha,
        }
    }

    /// `alpha - beta z`.
    pub fn weight(&self, z: Complex64) -> Complex64 {
        self.alpha - self.beta * z
    }

    /// `alpha E - beta A`.
    pub fn properness_matrix(&self, pencil: &MatrixPencil) -> ComplexMatrix {
        pencil.e() * self.alpha - pencil.a() * self.beta
    }

    pub fn approx_eq(&self, other: &Center) -> bool {
        (self.alpha - other.alpha).norm() <= 1e-12 && (self.beta - other.beta).norm() <= 1e-12
    }
}

/// Centered realization `(A - zE, B; C, D)` with center data.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredRealization {
    pencil: MatrixPencil,
    b: ComplexMatrix,
    c: ComplexMatrix,
    d: ComplexMatrix,
    center: Center,
}

impl CenteredRealization {
    /// Checks dimensions and properness at the center (`alpha E - beta A`
    /// invertible).
    pub fn new(pencil: MatrixPencil, b: ComplexMatrix, c: ComplexMatrix, d: ComplexMatrix, center: Center) -> Result<Self> {
        let n = pencil.order();
        if b.nrows() != n || c.ncols() != n || d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "realization blocks: n={n}, B {:?}, C {:?}, D {:?}",
                b.shape(),
                c.shape(),
                d.shape()
            )));
        }
        let sys = Self { pencil, b, c, d, center };
        if n > 0 {
            let m = center.properness_matrix(&sys.pencil);
            let scale = linalg::norm2(sys.pencil.a()) + linalg::norm2(sys.pencil.e());
            let smin = linalg::singular_values(&m).last().copied().unwrap_or(0.0);
            if smin <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::CenterIsPole);
            }
        }
        Ok(sys)
    }

    pub fn from_matrices(
        a: ComplexMatrix,
        e: ComplexMatrix,
        b: ComplexMatrix,
        c: ComplexMatrix,
        d: ComplexMatrix,
        center: Center,
    ) -> Result<Self> {
        Self::new(MatrixPencil::new(a, e)?, b, c, d, center)
    }

    /// Order-zero system with transfer matrix `D`.
    pub fn static_gain(d: ComplexMatrix, center: Center) -> Self {
        Self {
            pencil: MatrixPencil::empty(),
            b: linalg::zeros(0, d.ncols()),
            c: linalg::zeros(d.nrows(), 0),
            d,
            center,
        }
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
    pub fn c(&self) -> &ComplexMatrix {
        &self.c
    }
    pub fn d(&self) -> &ComplexMatrix {
        &self.d
    }
    pub fn center(&self) -> Center {
        self.center
    }
    pub fn order(&self) -> usize {
        self.pencil.order()
    }
    pub fn inputs(&self) -> usize {
        self.d.ncols()
    }
    pub fn outputs(&self) -> usize {
        self.d.nrows()
    }

    /// `alpha E - beta A`.
    pub fn properness_matrix(&self) -> ComplexMatrix {
        self.center.properness_matrix(&self.pencil)
    }

    /// Best-effort McMillan degree: the order of this realization, which is an
    /// upper bound (no minimality reduction is attempted).
    pub fn degree_upper_bound(&self) -> usize {
        self.order()
    }

    /// Spectral check that no finite pole lies within
    /// [`POLE_CLEARANCE_TOL`] of the center.
    pub fn check_center_clearance(&self) -> Result<()> {
        let spec = pencil::generalized_spectrum(&self.pencil)?;
        let z0 = self.center.z0();
        if spec.finite.iter().any(|l| (l - z0).norm() <= POLE_CLEARANCE_TOL) {
            return Err(Error::CenterIsPole);
        }
        Ok(())
    }

    pub fn poles(&self) -> Result<Spectrum> {
        pencil::generalized_spectrum(&self.pencil)
    }

    /// `G(z) = D + C (zE - A)^{-1} B (alpha - beta z)`.
    pub fn evaluate(&self, z: Complex64) -> Result<ComplexMatrix> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::EvalAtPole);
        }
        if self.order() == 0 {
            return Ok(self.d.clone());
        }
        let m = &self.pencil.e().clone() * z - self.pencil.a();
        if linalg::rcond(&m) < EVAL_TOL {
            return Err(Error::EvalAtPole);
        }
        let x = m.lu().solve(&self.b).ok_or(Error::EvalAtPole)?;
        Ok(&self.d + &self.c * x * self.center.weight(z))
    }

    /// `G^#(z) = G(1 / conj(z))*`.
    pub fn evaluate_sharp(&self, z: Complex64) -> Result<ComplexMatrix> {
        if z.norm() == 0.0 {
            return Err(Error::EvalAtPole);
        }
        Ok(self.evaluate(linalg::ONE / z.conj())?.adjoint())
    }

    pub fn is_stable(&self) -> Result<bool> {
        Ok(self.poles()?.is_stable())
    }

    /// Applies the state-space equivalence `(U A V - z U E V, U B; C V, D)`.
    pub fn transform(&self, u: &ComplexMatrix, v: &ComplexMatrix) -> Result<Self> {
        Self::from_matrices(
            u * self.a() * v,
            u * self.e() * v,
            u * &self.b,
            &self.c * v,
            self.d.clone(),
            self.center,
        )
    }

    /// Scales the outputs: `(A - zE, B; k C, k D)`.
    pub fn scale_output(&self, k: f64) -> Self {
        Self {
            pencil: self.pencil.clone(),
            b: self.b.clone(),
            c: &self.c * linalg::c(k, 0.0),
            d: &self.d * linalg::c(k, 0.0),
            center: self.center,
        }
    }

    /// Keeps the listed inputs and outputs, in the given order.
    pub fn select(&self, inputs: &[usize], outputs: &[usize]) -> Self {
        let n = self.order();
        let b = ComplexMatrix::from_fn(n, inputs.len(), |i, j| self.b[(i, inputs[j])]);
        let c = ComplexMatrix::from_fn(outputs.len(), n, |i, j| self.c[(outputs[i], j)]);
        let d = ComplexMatrix::from_fn(outputs.len(), inputs.len(), |i, j| self.d[(outputs[i], inputs[j])]);
        Self {
            pencil: self.pencil.clone(),
            b,
            c,
            d,
            center: self.center,
        }
    }

    pub(crate) fn from_parts_unchecked(
        pencil: MatrixPencil,
        b: ComplexMatrix,
        c: ComplexMatrix,
        d: ComplexMatrix,
        center: Center,
    ) -> Self {
        Self { pencil, b, c, d, center }
    }
}

/// Descriptor realization `G(z) = D + C (zE - A)^{-1} B` (center at infinity).
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorRealization {
    pub pencil: MatrixPencil,
    pub b: ComplexMatrix,
    pub c: ComplexMatrix,
    pub d: ComplexMatrix,
}

impl DescriptorRealization {
    pub fn new(pencil: MatrixPencil, b: ComplexMatrix, c: ComplexMatrix, d: ComplexMatrix) -> Result<Self> {
        let n = pencil.order();
        if b.nrows() != n || c.ncols() != n || d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::DimensionMismatch("descriptor realization blocks".into()));
        }
        pencil.require_regular()?;
        Ok(Self { pencil, b, c, d })
    }

    pub fn order(&self) -> usize {
        self.pencil.order()
    }

    pub fn evaluate(&self, z: Complex64) -> Result<ComplexMatrix> {
        if self.order() == 0 {
            return Ok(self.d.clone());
        }
        let m = self.pencil.e() * z - self.pencil.a();
        if linalg::rcond(&m) < EVAL_TOL {
            return Err(Error::EvalAtPole);
        }
        let x = m.lu().solve(&self.b).ok_or(Error::EvalAtPole)?;
        Ok(&self.d + &self.c * x)
    }
}

/// Channel widths of a two-port `[[T11, T12], [T21, T22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Partition {
    pub m1: usize,
    pub m2: usize,
    pub p1: usize,
    pub p2: usize,
}

/// A centered realization with inputs split `(m1, m2)` and outputs `(p1, p2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedPlant {
    pub sys: CenteredRealization,
    pub part: Partition,
}

impl PartitionedPlant {
    pub fn new(sys: CenteredRealization, part: Partition) -> Result<Self> {
        if part.m1 + part.m2 != sys.inputs() || part.p1 + part.p2 != sys.outputs() {
            return Err(Error::DimensionMismatch(format!(
                "partition {part:?} does not match a {}x{} system",
                sys.outputs(),
                sys.inputs()
            )));
        }
        Ok(Self { sys, part })
    }

    /// Builds the realization `(A - zE, [B1 B2]; [C1; C2], [[D11, D12], [D21, D22]])`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_blocks(
        pencil: MatrixPencil,
        b1: &ComplexMatrix,
        b2: &ComplexMatrix,
        c1: &ComplexMatrix,
        c2: &ComplexMatrix,
        d11: &ComplexMatrix,
        d12: &ComplexMatrix,
        d21: &ComplexMatrix,
        d22: &ComplexMatrix,
        center: Center,
    ) -> Result<Self> {
        let part = Partition {
            m1: b1.ncols(),
            m2: b2.ncols(),
            p1: c1.nrows(),
            p2: c2.nrows(),
        };
        if b1.nrows() != b2.nrows() || c1.ncols() != c2.ncols() {
            return Err(Error::DimensionMismatch("plant B/C blocks".into()));
        }
        if d11.shape() != (part.p1, part.m1)
            || d12.shape() != (part.p1, part.m2)
            || d21.shape() != (part.p2, part.m1)
            || d22.shape() != (part.p2, part.m2)
        {
            return Err(Error::DimensionMismatch("plant D blocks".into()));
        }
        let b = linalg::hstack(b1, b2);
        let c = linalg::vstack(c1, c2);
        let d = linalg::block(
            &[part.p1, part.p2],
            &[part.m1, part.m2],
            &[&[Some(d11), Some(d12)], &[Some(d21), Some(d22)]],
        );
        Self::new(CenteredRealization::new(pencil, b, c, d, center)?, part)
    }

    pub fn order(&self) -> usize {
        self.sys.order()
    }
    pub fn center(&self) -> Center {
        self.sys.center()
    }
    pub fn pencil(&self) -> &MatrixPencil {
        self.sys.pencil()
    }
    pub fn b1(&self) -> ComplexMatrix {
        linalg::sub(self.sys.b(), 0, 0, self.order(), self.part.m1)
    }
    pub fn b2(&self) -> ComplexMatrix {
        linalg::sub(self.sys.b(), 0, self.part.m1, self.order(), self.part.m2)
    }
    pub fn c1(&self) -> ComplexMatrix {
        linalg::sub(self.sys.c(), 0, 0, self.part.p1, self.order())
    }
    pub fn c2(&self) -> ComplexMatrix {
        linalg::sub(self.sys.c(), self.part.p1, 0, self.part.p2, self.order())
    }
    pub fn d11(&self) -> ComplexMatrix {
        linalg::sub(self.sys.d(), 0, 0, self.part.p1, self.part.m1)
    }
    pub fn d12(&self) -> ComplexMatrix {
        linalg::sub(self.sys.d(), 0, self.part.m1, self.part.p1, self.part.m2)
    }
    pub fn d21(&self) -> ComplexMatrix {
        linalg::sub(self.sys.d(), self.part.p1, 0, self.part.p2, self.part.m1)
    }
    pub fn d22(&self) -> ComplexMatrix {
        linalg::sub(self.sys.d(), self.part.p1, self.part.m1, self.part.p2, self.part.m2)
    }

    /// `T11` as a realization of its own.
    pub fn t11(&self) -> CenteredRealization {
        let ins: Vec<usize> = (0..self.part.m1).collect();
        let outs: Vec<usize> = (0..self.part.p1).collect();
        self.sys.select(&ins, &outs)
    }

    /// Standard form used by the synthesis formulas: `D11 = 0`, `D22 = 0`.
    pub fn require_standard_form(&self) -> Result<()> {
        let scale = 1.0 + linalg::max_abs(self.sys.d());
        if linalg::max_abs(&self.d11()) > 1e-12 * scale {
            return Err(Error::HypothesisViolated("D11 must be zero".into()));
        }
        if linalg::max_abs(&self.d22()) > 1e-12 * scale {
            return Err(Error::HypothesisViolated("D22 must be zero (apply a loop shift)".into()));
        }
        Ok(())
    }
}
