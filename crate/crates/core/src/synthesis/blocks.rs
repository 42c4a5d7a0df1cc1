//! Reductions behind the generator: the inner/outer split of the plant and
//! the one-block, two-block and dual two-block generators.

use super::{d12_gram, d21_gram, ControllerGenerator, SynthesisData};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::pencil::{self, MatrixPencil};
use crate::realization::{Center, Partition, PartitionedPlant};
use crate::riccati::PopovStructure;

/// `T = T_I ⊗ T_O` with `T_I` inner.
pub fn inner_outer_factors(plant: &PartitionedPlant, data: &SynthesisData) -> Result<(PartitionedPlant, PartitionedPlant)> {
    let Partition { m1, m2, p1, .. } = plant.part;
    let center = plant.center();
    let gram = d12_gram(plant)?;
    let half = linalg::hermitian_power(&gram, 0.5);
    let ihalf = linalg::hermitian_power(&gram, -0.5);
    let (b1, b2) = (plant.b1(), plant.b2());
    let (f1, f2) = (&data.f1, &data.f2);

    let b2f2 = &b2 * f2;
    let t_i = PartitionedPlant::from_blocks(
        MatrixPencil::new(plant.sys.a() + &b2f2 * center.alpha(), plant.sys.e() + &b2f2 * center.beta())?,
        &b1,
        &(&b2 * &ihalf),
        &(plant.c1() + plant.d12() * f2),
        &-f1,
        &linalg::zeros(p1, m1),
        &(plant.d12() * &ihalf),
        &linalg::eye(m1),
        &linalg::zeros(m1, m2),
        center,
    )?;

    let b1f1 = &b1 * f1;
    let t_o = PartitionedPlant::from_blocks(
        MatrixPencil::new(plant.sys.a() + &b1f1 * center.alpha(), plant.sys.e() + &b1f1 * center.beta())?,
        &b1,
        &b2,
        &-(&half * f2),
        &(plant.c2() + plant.d21() * f1),
        &linalg::zeros(m2, m1),
        &half,
        &plant.d21(),
        &linalg::zeros(plant.part.p2, m2),
        center,
    )?;
    Ok((t_i, t_o))
}

fn square_inverse(m: &ComplexMatrix, what: &str) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::AssumptionViolated(format!("{what} must be square")));
    }
    linalg::inverse(m).map_err(|_| Error::AssumptionViolated(format!("{what} must be invertible")))
}

/// `A - zE + K (alpha - beta z)` as a pencil.
fn shifted(plant: &PartitionedPlant, k: &ComplexMatrix) -> Result<MatrixPencil> {
    let center = plant.center();
    MatrixPencil::new(plant.sys.a() + k * center.alpha(), plant.sys.e() + k * center.beta())
}

fn require_stable(p: &MatrixPencil, what: &str) -> Result<()> {
    let stable = pencil::generalized_spectrum(p).map(|s| s.is_stable()).unwrap_or(false);
    if stable {
        Ok(())
    } else {
        Err(Error::AssumptionViolated(format!("{what}: zeros are not all stable")))
    }
}

/// Generator for square invertible `D12`, `D21` with stable zeros of `T12`
/// and `T21`; `T ⊗ C1 = [[0, I], [I, 0]]`.
pub fn one_block_generator(plant: &PartitionedPlant) -> Result<PartitionedPlant> {
    plant.require_standard_form()?;
    let d12i = square_inverse(&plant.d12(), "D12")?;
    let d21i = square_inverse(&plant.d21(), "D21")?;
    let (b1, b2, c1, c2) = (plant.b1(), plant.b2(), plant.c1(), plant.c2());
    let k12 = &b2 * &d12i * &c1;
    let k21 = &b1 * &d21i * &c2;
    require_stable(&shifted(plant, &-&k12)?, "T12")?;
    require_stable(&shifted(plant, &-&k21)?, "T21")?;
    let Partition { m1, m2, .. } = plant.part;
    PartitionedPlant::from_blocks(
        shifted(plant, &-(k12 + k21))?,
        &(&b1 * &d21i),
        &(&b2 * &d12i),
        &-(&d12i * &c1),
        &-(&d21i * &c2),
        &linalg::zeros(m2, m1),
        &d12i,
        &d21i,
        &linalg::zeros(m1, m2),
        plant.center(),
    )
}

/// Generator for square invertible `D21` with stable zeros of `T21`, given
/// the stabilizing solution `X` of the control equation and `F2`.
pub fn two_block_generator(plant: &PartitionedPlant, x: &ComplexMatrix, f2: &ComplexMatrix) -> Result<PartitionedPlant> {
    plant.require_standard_form()?;
    let d21i = square_inverse(&plant.d21(), "D21")?;
    let gram = d12_gram(plant).map_err(|e| Error::AssumptionViolated(e.to_string()))?;
    let ihalf = linalg::hermitian_power(&gram, -0.5);
    let (b1, b2, c2) = (plant.b1(), plant.b2(), plant.c2());
    let k21 = &b1 * &d21i * &c2;
    require_stable(&shifted(plant, &-&k21)?, "T21")?;
    let m = plant.sys.properness_matrix();
    let Partition { m1, m2, .. } = plant.part;
    PartitionedPlant::from_blocks(
        shifted(plant, &(&b2 * f2 - k21))?,
        &(&b1 * &d21i),
        &(&b2 * &ihalf),
        f2,
        &-(&d21i * &c2 + b1.adjoint() * x * &m),
        &linalg::zeros(m2, m1),
        &ihalf,
        &d21i,
        &linalg::zeros(m1, m2),
        plant.center(),
    )
}

/// Dual filter structure `(A* - zE*, [C1* C2*]; B1B1*, [0, B1D21*], diag(-I, D21D21*))`
/// with the exchanged center.
pub fn build_sigma_o(plant: &PartitionedPlant) -> Result<PopovStructure> {
    let Partition { p1, p2, .. } = plant.part;
    let n = plant.order();
    let gram21 = d21_gram(plant)?;
    let b1 = plant.b1();
    let l = linalg::hstack(&linalg::zeros(n, p1), &(&b1 * plant.d21().adjoint()));
    let r = linalg::block(&[p1, p2], &[p1, p2], &[&[Some(&-linalg::eye(p1)), None], &[None, Some(&gram21)]]);
    PopovStructure::new(
        plant.pencil().adjoint(),
        plant.sys.c().adjoint(),
        &b1 * b1.adjoint(),
        l,
        r,
        Center::dual(&plant.center()),
    )
}

/// Generator for square invertible `D12` with stable zeros of `T12`, given
/// the stabilizing solution `Y` of the dual filter equation.
pub fn dual_two_block_generator(plant: &PartitionedPlant, y: &ComplexMatrix) -> Result<PartitionedPlant> {
    plant.require_standard_form()?;
    let d12i = square_inverse(&plant.d12(), "D12")?;
    let gram21 = d21_gram(plant).map_err(|e| Error::AssumptionViolated(e.to_string()))?;
    let g21_ihalf = linalg::hermitian_power(&gram21, -0.5);
    let (b2, c1, c2) = (plant.b2(), plant.c1(), plant.c2());
    let k12 = &b2 * &d12i * &c1;
    require_stable(&shifted(plant, &-&k12)?, "T12")?;
    let m = plant.sys.properness_matrix();
    let h2 = -linalg::solve(&gram21, &(plant.b1() * plant.d21().adjoint() + &m * y * c2.adjoint()).adjoint())?.adjoint();
    let Partition { m2, p2, .. } = plant.part;
    // Control output row is +D12^{-1} C1: with the opposite sign the central
    // member is -K0 and the loop is not stabilized.
    PartitionedPlant::from_blocks(
        shifted(plant, &(&h2 * &c2 - k12))?,
        &h2,
        &(-(&b2 * &d12i) - &m * y * c1.adjoint()),
        &(&d12i * &c1),
        &(&g21_ihalf * &c2),
        &linalg::zeros(m2, p2),
        &d12i,
        &g21_ihalf,
        &linalg::zeros(p2, m2),
        plant.center(),
    )
}

impl ControllerGenerator {
    pub fn order(&self) -> usize {
        self.gen.order()
    }
}
