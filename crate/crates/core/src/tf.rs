//! Scalar transfer functions: coefficient extraction from realizations and
//! the reverse direction for proper ones.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::pencil::{self, MatrixPencil};
use crate::realization::{from_descriptor, CenteredRealization, DescriptorRealization};

/// Leading coefficients below this fraction of the largest one are dropped.
const TRIM_TOL: f64 = 1e-10;

/// `num(z) / den(z)`, coefficients in descending powers, `den` monic.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    pub num: Vec<Complex64>,
    pub den: Vec<Complex64>,
}

fn horner(p: &[Complex64], z: Complex64) -> Complex64 {
    p.iter().fold(linalg::ZERO, |acc, &c| acc * z + c)
}

/// Monic polynomial with the given roots, descending powers.
pub fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut p = vec![linalg::ONE];
    for &r in roots {
        let mut next = vec![linalg::ZERO; p.len() + 1];
        for (i, &c) in p.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * r;
        }
        p = next;
    }
    p
}

fn trim(mut p: Vec<Complex64>) -> Vec<Complex64> {
    let scale = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let lead = p.iter().take_while(|c| c.norm() <= TRIM_TOL * scale).count();
    p.drain(..lead.min(p.len().saturating_sub(1)));
    if p.is_empty() {
        p.push(linalg::ZERO);
    }
    p
}

impl TransferFunction {
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        horner(&self.num, z) / horner(&self.den, z)
    }

    pub fn num_degree(&self) -> usize {
        self.num.len() - 1
    }

    pub fn den_degree(&self) -> usize {
        self.den.len() - 1
    }

    /// Coefficients of a SISO realization. The denominator collects every
    /// finite pole of the pencil, so uncontrollable or unobservable modes
    /// appear as common factors.
    pub fn from_realization(sys: &CenteredRealization) -> Result<Self> {
        if sys.inputs() != 1 || sys.outputs() != 1 {
            return Err(Error::DimensionMismatch(format!(
                "transfer function needs a 1x1 system, got {}x{}",
                sys.outputs(),
                sys.inputs()
            )));
        }
        let spec = sys.poles()?;
        let den = poly_from_roots(&spec.finite);
        let degree = spec.finite.len() + spec.infinite_count;
        let n = degree + 1;
        let radius = 1.0 + spec.finite.iter().map(|l| l.norm()).fold(1.0, f64::max);
        // An irrational phase offset keeps the samples off poles and zeros
        // that sit on rational angles.
        let phase = 0.5 / (n as f64 + std::f64::consts::SQRT_2);
        let mut samples = Vec::with_capacity(n);
        for k in 0..n {
            let theta = 2.0 * std::f64::consts::PI * (k as f64 + phase) / n as f64;
            let z = Complex64::from_polar(radius, theta);
            samples.push(sys.evaluate(z)?[(0, 0)] * horner(&den, z));
        }
        // p(z_k) = sum_j c_j radius^j e^{i j theta_k}: invert the DFT.
        let mut ascending = vec![linalg::ZERO; n];
        for (j, coeff) in ascending.iter_mut().enumerate() {
            let mut acc = linalg::ZERO;
            for (k, s) in samples.iter().enumerate() {
                let theta = 2.0 * std::f64::consts::PI * (k as f64 + phase) / n as f64;
                acc += s * Complex64::from_polar(1.0, -(j as f64) * theta);
            }
            *coeff = acc / (n as f64 * radius.powi(j as i32));
        }
        ascending.reverse();
        Ok(TransferFunction { num: trim(ascending), den })
    }

    /// Controllable canonical realization of a proper transfer function,
    /// centered at `z0`.
    pub fn realize(&self, z0: Complex64) -> Result<CenteredRealization> {
        let lead = *self.den.first().ok_or_else(|| Error::DimensionMismatch("empty denominator".into()))?;
        if lead.norm() == 0.0 {
            return Err(Error::DimensionMismatch("denominator has a zero leading coefficient".into()));
        }
        let den: Vec<Complex64> = self.den.iter().map(|c| c / lead).collect();
        let num = trim(self.num.clone());
        let n = den.len() - 1;
        if num.len() > den.len() {
            return Err(Error::DimensionMismatch("transfer function is improper".into()));
        }
        let mut padded = vec![linalg::ZERO; den.len() - num.len()];
        padded.extend(num.iter().map(|c| c / lead));
        let d = padded[0];
        let mut a = linalg::zeros(n, n);
        for i in 0..n.saturating_sub(1) {
            a[(i, i + 1)] = linalg::ONE;
        }
        let mut c = linalg::zeros(1, n);
        for j in 0..n {
            // den = z^n + a_1 z^{n-1} + ... + a_n, last row of A is -a_n .. -a_1.
            a[(n - 1, j)] = -den[n - j];
            c[(0, j)] = padded[n - j] - d * den[n - j];
        }
        let mut b = linalg::zeros(n, 1);
        if n > 0 {
            b[(n - 1, 0)] = linalg::ONE;
        }
        let desc = DescriptorRealization::new(MatrixPencil::new(a, linalg::eye(n))?, b, c, linalg::scalar(d))?;
        from_descriptor(&desc, z0)
    }
}

/// Finite poles of a SISO realization with multiplicity, sorted by real part.
pub fn sorted_poles(sys: &CenteredRealization) -> Result<Vec<Complex64>> {
    let mut p = pencil::generalized_spectrum(sys.pencil())?.finite;
    p.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(p)
}

/// Largest entrywise gap relative to the reference coefficient `b`.
pub fn max_relative_gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).norm() / y.norm().max(f64::MIN_POSITIVE)).fold(0.0, f64::max)
}
