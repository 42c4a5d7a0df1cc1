//! Suboptimal H-infinity output-feedback synthesis: hypothesis checks, the
//! two Riccati equations, the controller generator and the parametrization
//! of all controllers achieving a closed-loop norm below 1.

mod blocks;

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::analysis::{self, NormResult};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::pencil::{self, MatrixPencil, Spectrum};
use crate::realization::{self, CenteredRealization, Partition, PartitionedPlant};
use crate::riccati::{self, PopovStructure, RiccatiSolution};

pub use blocks::{build_sigma_o, dual_two_block_generator, inner_outer_factors, one_block_generator, two_block_generator};

/// Grid used for the invariant-zero hypotheses.
pub const HYPOTHESIS_GRID: usize = 720;

/// Relative rank threshold for the hypotheses.
pub const HYPOTHESIS_RANK_TOL: f64 = 1e-8;

/// Sign tolerance for `X <= 0`: `lambda_max <= SIGN_TOL * max(1, ‖X‖)`.
pub const SIGN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub h1_stab: bool,
    pub h1_detect: bool,
    pub h2: bool,
    pub h3: bool,
    /// Smallest relative `sigma_{n+m2}` of the control-channel system pencil
    /// over the grid.
    pub worst_h2_sigma_min: f64,
    /// Smallest relative `sigma_{n+p2}` of the measurement-channel pencil.
    pub worst_h3_sigma_min: f64,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.h1_stab && self.h1_detect && self.h2 && self.h3
    }
}

/// Minimum over the grid (and the center) of the relative singular value
/// `sigma_k / sigma_max` of `[[A - zE, B (alpha - beta z)], [C, D]]`.
fn worst_rank_margin(plant: &PartitionedPlant, b: &ComplexMatrix, c: &ComplexMatrix, d: &ComplexMatrix) -> f64 {
    let n = plant.order();
    let k = n + d.ncols();
    if d.nrows() < d.ncols() {
        return 0.0;
    }
    let center = plant.center();
    let pencil = plant.pencil();
    let points = (0..HYPOTHESIS_GRID)
        .map(|j| Complex64::from_polar(1.0, TAU * j as f64 / HYPOTHESIS_GRID as f64))
        .chain(std::iter::once(center.z0()));
    let mut worst = f64::INFINITY;
    for z in points {
        let top = linalg::hstack(&pencil.at(z), &(b * center.weight(z)));
        let bottom = linalg::hstack(c, d);
        let s = linalg::singular_values(&linalg::vstack(&top, &bottom));
        let margin = if s.is_empty() || s[0] == 0.0 {
            if k == 0 {
                1.0
            } else {
                0.0
            }
        } else if k == 0 {
            1.0
        } else {
            s[k - 1] / s[0]
        };
        worst = worst.min(margin);
    }
    worst
}

pub fn check_hypotheses(plant: &PartitionedPlant) -> HypothesisReport {
    let pencil = plant.pencil();
    let h1_stab = analysis::check_stabilizable(pencil, &plant.b2()).unwrap_or(false);
    let h1_detect = analysis::check_detectable(&plant.c2(), pencil).unwrap_or(false);
    let worst_h2 = worst_rank_margin(plant, &plant.b2(), &plant.c1(), &plant.d12());
    let worst_h3 = worst_rank_margin(plant, &plant.b1(), &plant.c2(), &plant.d21());
    let rank_d12 = linalg::numerical_rank(&plant.d12(), HYPOTHESIS_RANK_TOL);
    let rank_d21 = linalg::numerical_rank(&plant.d21(), HYPOTHESIS_RANK_TOL);
    HypothesisReport {
        h1_stab,
        h1_detect,
        h2: worst_h2 > HYPOTHESIS_RANK_TOL && rank_d12 == plant.part.m2,
        h3: worst_h3 > HYPOTHESIS_RANK_TOL && rank_d21 == plant.part.p2,
        worst_h2_sigma_min: worst_h2,
        worst_h3_sigma_min: worst_h3,
    }
}

fn d12_gram(plant: &PartitionedPlant) -> Result<ComplexMatrix> {
    let d12 = plant.d12();
    if linalg::numerical_rank(&d12, HYPOTHESIS_RANK_TOL) < plant.part.m2 {
        return Err(Error::HypothesisViolated("D12 must have full column rank".into()));
    }
    Ok(d12.adjoint() * d12)
}

fn d21_gram(plant: &PartitionedPlant) -> Result<ComplexMatrix> {
    let d21 = plant.d21();
    if linalg::numerical_rank(&d21, HYPOTHESIS_RANK_TOL) < plant.part.p2 {
        return Err(Error::HypothesisViolated("D21 must have full row rank".into()));
    }
    Ok(&d21 * d21.adjoint())
}

/// `(A - zE, [B1 B2]; C1*C1, [0, C1*D12], diag(-I, D12*D12))`.
pub fn build_sigma_c(plant: &PartitionedPlant) -> Result<PopovStructure> {
    let Partition { m1, m2, .. } = plant.part;
    let n = plant.order();
    let gram = d12_gram(plant)?;
    let c1 = plant.c1();
    let l = linalg::hstack(&linalg::zeros(n, m1), &(c1.adjoint() * plant.d12()));
    let r = linalg::block(&[m1, m2], &[m1, m2], &[&[Some(&-linalg::eye(m1)), None], &[None, Some(&gram)]]);
    PopovStructure::new(plant.pencil().clone(), plant.sys.b().clone(), c1.adjoint() * &c1, l, r, plant.center())
}

/// Everything the controller formulas need from the two Riccati equations.
#[derive(Debug, Clone)]
pub struct SynthesisData {
    pub sigma_c: PopovStructure,
    pub x: ComplexMatrix,
    pub f1: ComplexMatrix,
    pub f2: ComplexMatrix,
    pub sigma_cross: PopovStructure,
    pub z: ComplexMatrix,
    pub c_f: ComplexMatrix,
    pub b_z: ComplexMatrix,
    pub x_solution: RiccatiSolution,
    pub z_solution: RiccatiSolution,
}

impl SynthesisData {
    /// `[F1; F2]`.
    pub fn f_c(&self) -> ComplexMatrix {
        linalg::vstack(&self.f1, &self.f2)
    }
}

fn require_nonpositive(x: &ComplexMatrix, what: &str) -> Result<()> {
    if x.nrows() == 0 {
        return Ok(());
    }
    let lmax = linalg::lambda_max(x);
    if lmax > SIGN_TOL * linalg::norm2(x).max(1.0) {
        return Err(Error::SignConditionFailed(format!("{what} has eigenvalue {lmax:.3e} > 0")));
    }
    Ok(())
}

/// `F1 = B1*XM`, `F2 = -(D12*D12)^{-1}(D12*C1 + B2*XM)`.
pub fn state_feedback(plant: &PartitionedPlant, x: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let m = plant.sys.properness_matrix();
    let gram = d12_gram(plant)?;
    let f1 = plant.b1().adjoint() * x * &m;
    let f2 = -linalg::solve(&gram, &(plant.d12().adjoint() * plant.c1() + plant.b2().adjoint() * x * &m))?;
    Ok((f1, f2))
}

/// Filter structure on the dual pencil `(A + alpha B1 F1 - z(E + beta B1 F1))*`,
/// carried with the exchanged center so that its `alpha E - beta A` equals
/// `(alpha E - beta A)*` of the plant.
pub fn build_sigma_cross(plant: &PartitionedPlant, f1: &ComplexMatrix, f2: &ComplexMatrix) -> Result<PopovStructure> {
    let Partition { m2, p2, .. } = plant.part;
    let n = plant.order();
    let center = plant.center();
    let gram12 = d12_gram(plant)?;
    let gram21 = d21_gram(plant)?;
    let b1 = plant.b1();
    let b1f1 = &b1 * f1;
    let a_o = plant.sys.a() + &b1f1 * center.alpha();
    let e_o = plant.sys.e() + &b1f1 * center.beta();
    let c_f = plant.c2() + plant.d21() * f1;
    let top = -(linalg::hermitian_power(&gram12, 0.5) * f2);
    let b = linalg::vstack(&top, &c_f).adjoint();
    let l = linalg::hstack(&linalg::zeros(n, m2), &(&b1 * plant.d21().adjoint()));
    let r = linalg::block(&[m2, p2], &[m2, p2], &[&[Some(&-linalg::eye(m2)), None], &[None, Some(&gram21)]]);
    PopovStructure::new(
        MatrixPencil::new(a_o.adjoint(), e_o.adjoint())?,
        b,
        &b1 * b1.adjoint(),
        l,
        r,
        center.dual(),
    )
}

/// `B_Z = -(B1 D21* + M Z C_F*)(D21 D21*)^{-1}`.
pub fn filter_gain(plant: &PartitionedPlant, z: &ComplexMatrix, c_f: &ComplexMatrix) -> Result<ComplexMatrix> {
    let gram21 = d21_gram(plant)?;
    let m = plant.sys.properness_matrix();
    let lhs = plant.b1() * plant.d21().adjoint() + m * z * c_f.adjoint();
    // Y G = lhs  <=>  G Y* = lhs*  (G Hermitian).
    Ok(-linalg::solve(&gram21, &lhs.adjoint())?.adjoint())
}

/// Solves the control and filter Riccati equations.
pub fn solve_central_pair(plant: &PartitionedPlant) -> Result<SynthesisData> {
    plant.require_standard_form()?;
    let sigma_c = build_sigma_c(plant)?;
    d21_gram(plant)?;
    let x_solution = riccati::solve_ddtare(&sigma_c)?;
    let x = x_solution.x.clone();
    require_nonpositive(&x, "X")?;
    let (f1, f2) = state_feedback(plant, &x)?;
    let sigma_cross = build_sigma_cross(plant, &f1, &f2)?;
    let z_solution = riccati::solve_ddtare(&sigma_cross)?;
    let z = z_solution.x.clone();
    require_nonpositive(&z, "Z")?;
    let c_f = plant.c2() + plant.d21() * &f1;
    let b_z = filter_gain(plant, &z, &c_f)?;
    Ok(SynthesisData {
        sigma_c,
        x,
        f1,
        f2,
        sigma_cross,
        z,
        c_f,
        b_z,
        x_solution,
        z_solution,
    })
}

/// Two-port generator of all suboptimal controllers. Inputs are
/// `[y2 (p2), aux (m2)]`, outputs `[u2 (m2), aux (p2)]`; a parameter `Q`
/// (`m2 x p2`) closes the auxiliary channel.
#[derive(Debug, Clone)]
pub struct ControllerGenerator {
    pub gen: PartitionedPlant,
    pub data: SynthesisData,
}

pub fn synthesize(plant: &PartitionedPlant) -> Result<ControllerGenerator> {
    let data = solve_central_pair(plant)?;
    let gen = generator_from_data(plant, &data)?;
    Ok(ControllerGenerator { gen, data })
}

/// Assembles the generator from the Riccati data.
pub fn generator_from_data(plant: &PartitionedPlant, data: &SynthesisData) -> Result<PartitionedPlant> {
    let Partition { m2, p2, .. } = plant.part;
    let center = plant.center();
    let m = plant.sys.properness_matrix();
    let gram12 = d12_gram(plant)?;
    let gram21 = d21_gram(plant)?;
    let g12_half = linalg::hermitian_power(&gram12, 0.5);
    let g12_ihalf = linalg::hermitian_power(&gram12, -0.5);
    let g21_ihalf = linalg::hermitian_power(&gram21, -0.5);
    let k = plant.sys.b() * data.f_c() + &data.b_z * &data.c_f;
    let a = plant.sys.a() + &k * center.alpha();
    let e = plant.sys.e() + &k * center.beta();
    let aux_in = -(plant.b2() * &g12_ihalf) + &m * &data.z * data.f2.adjoint() * &g12_half;
    let out_y = &g21_ihalf * &data.c_f;
    PartitionedPlant::from_blocks(
        MatrixPencil::new(a, e)?,
        &data.b_z,
        &aux_in,
        &-&data.f2,
        &out_y,
        &linalg::zeros(m2, p2),
        &g12_ihalf,
        &g21_ihalf,
        &linalg::zeros(p2, m2),
        center,
    )
}

/// The `Q = 0` member: the generator's `(1,1)` subsystem.
pub fn central_controller(gen: &ControllerGenerator) -> CenteredRealization {
    gen.gen.t11()
}

/// Whether `D12*[C1 D12] = [0 I]` and `[B1; D21] D21* = [0; I]` within `tol`.
pub fn satisfies_normalizing_conditions(plant: &PartitionedPlant, tol: f64) -> bool {
    let d12 = plant.d12();
    let d21 = plant.d21();
    let a = d12.adjoint() * plant.c1();
    let b = d12.adjoint() * &d12 - linalg::eye(plant.part.m2);
    let c = plant.b1() * d21.adjoint();
    let d = &d21 * d21.adjoint() - linalg::eye(plant.part.p2);
    [a, b, c, d].iter().all(|m| linalg::max_abs(m) <= tol)
}

/// Closed-form central controller valid under the normalizing conditions.
pub fn normalized_central_controller(plant: &PartitionedPlant, data: &SynthesisData) -> Result<CenteredRealization> {
    let center = plant.center();
    let m = plant.sys.properness_matrix();
    let (b1, b2, c2) = (plant.b1(), plant.b2(), plant.c2());
    let x = &data.x;
    let z = &data.z;
    let k = (&b1 * b1.adjoint() * x - &b2 * b2.adjoint() * x) * &m - &m * z * c2.adjoint() * &c2;
    let a = plant.sys.a() + &k * center.alpha();
    let e = plant.sys.e() + &k * center.beta();
    CenteredRealization::from_matrices(
        a,
        e,
        -(&m * z * c2.adjoint()),
        b2.adjoint() * x * &m,
        linalg::zeros(plant.part.m2, plant.part.p2),
        center,
    )
}

/// `K = F_l(C, Q)`. With `verify`, `Q` must be stable with norm below 1.
pub fn parametrize(gen: &ControllerGenerator, q: &CenteredRealization, verify: bool) -> Result<CenteredRealization> {
    if verify {
        let ok = match analysis::hinf_norm(q, 1e-6) {
            Ok(n) => n.upper < 1.0 || n.value < 1.0,
            Err(Error::UnstableSystem) => false,
            Err(e) => return Err(e),
        };
        if !ok {
            return Err(Error::QNotContractive);
        }
    }
    realization::lft_lower(&gen.gen, q)
}

/// Outcome of closing the loop.
#[derive(Debug, Clone)]
pub struct ClosedLoopReport {
    pub stable: bool,
    pub norm: Option<NormResult>,
    pub poles: Spectrum,
    pub closed_loop: CenteredRealization,
}

impl ClosedLoopReport {
    /// Stable with norm strictly below `gamma`.
    pub fn meets(&self, gamma: f64) -> bool {
        self.stable && self.norm.map(|n| n.value < gamma).unwrap_or(false)
    }
}

pub fn verify_closed_loop(plant: &PartitionedPlant, k: &CenteredRealization) -> Result<ClosedLoopReport> {
    let g = realization::lft_lower(plant, k)?;
    let poles = pencil::generalized_spectrum(g.pencil())?;
    let stable = poles.is_stable();
    let norm = if stable { Some(analysis::hinf_norm(&g, 1e-6)?) } else { None };
    Ok(ClosedLoopReport {
        stable,
        norm,
        poles,
        closed_loop: g,
    })
}

/// Smallest `gamma` in `[lo, hi]` (to `resolution`) for which synthesis on the
/// scaled plant succeeds, or `None` when `hi` itself is infeasible.
pub fn gamma_bisection(plant: &PartitionedPlant, lo: f64, hi: f64, resolution: f64) -> Result<Option<f64>> {
    let feasible = |g: f64| -> Result<bool> {
        match synthesize(&realization::gamma_scale(plant, g)?) {
            Ok(_) => Ok(true),
            Err(e) if e.is_infeasibility() => Ok(false),
            Err(Error::IllPosed) | Err(Error::SteinSingular) | Err(Error::ReorderingFailure(_)) => Ok(false),
            Err(e) => Err(e),
        }
    };
    if !feasible(hi)? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (lo, hi);
    if feasible(lo)? {
        return Ok(Some(lo));
    }
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Maximum deviation between two systems over `points` unit-circle samples
/// offset from the grid origin.
pub fn pointwise_distance(a: &CenteredRealization, b: &CenteredRealization, points: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for j in 0..points {
        let z = Complex64::from_polar(1.0, TAU * (j as f64 + 0.37) / points as f64);
        worst = worst.max(linalg::max_abs(&(a.evaluate(z)? - b.evaluate(z)?)));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, eye, from_real_rows, zeros};
    use crate::realization::{star_product, Center};

    fn f16() -> PartitionedPlant {
        let a = from_real_rows(&[
            &[0.906488, 0.0816012, -0.0005, 0.0],
            &[0.0741349, 0.90121, -0.000708383, 0.0],
            &[0.0, 0.0, 0.132655, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
        ]);
        PartitionedPlant::from_blocks(
            MatrixPencil::new(a, linalg::real_diag(&[1.0, 1.0, 1.0, 0.0])).unwrap(),
            &from_real_rows(&[&[-0.0015], &[-0.0096], &[0.8673], &[1.0]]),
            &from_real_rows(&[&[0.0095], &[0.0004], &[0.0], &[-1.0]]),
            &from_real_rows(&[&[1.0, 0.0, 0.0, 1.0], &[0.0, 1.0, 0.0, -1.0]]),
            &from_real_rows(&[&[0.0, 0.0, 1.0, -5.0]]),
            &zeros(2, 1),
            &from_real_rows(&[&[-1.0], &[1.0]]),
            &eye(1),
            &zeros(1, 1),
            Center::unit(),
        )
        .unwrap()
    }

    /// Stable two-state plant with `p1 = 2`, `m1 = m2 = p2 = 1`.
    fn small(c1: ComplexMatrix, d12: ComplexMatrix, b1: ComplexMatrix, d21: ComplexMatrix) -> PartitionedPlant {
        PartitionedPlant::from_blocks(
            MatrixPencil::new(from_real_rows(&[&[0.5, 0.2], &[0.0, -0.3]]), eye(2)).unwrap(),
            &b1,
            &from_real_rows(&[&[0.0], &[1.0]]),
            &c1,
            &from_real_rows(&[&[1.0, 0.5]]),
            &zeros(2, b1.ncols()),
            &d12,
            &d21,
            &zeros(1, 1),
            Center::from_z0(Complex64::from_polar(1.0, 0.3)).unwrap(),
        )
        .unwrap()
    }

    fn two_block_plant() -> PartitionedPlant {
        small(
            from_real_rows(&[&[0.3, 0.1], &[0.0, 0.0]]),
            from_real_rows(&[&[0.0], &[1.0]]),
            from_real_rows(&[&[0.1], &[0.05]]),
            eye(1),
        )
    }

    #[test]
    fn f16_hypotheses_and_sigma_c() {
        let plant = f16();
        assert!(check_hypotheses(&plant).all_pass());
        let sigma = build_sigma_c(&plant).unwrap();
        assert!(linalg::max_abs(&(sigma.r() - linalg::real_diag(&[-1.0, 2.0]))) < 1e-15);
        assert!(!satisfies_normalizing_conditions(&plant, 1e-10));
    }

    #[test]
    fn rank_deficient_feedthrough_fails_hypotheses() {
        let base = two_block_plant();
        let no_d12 = small(base.c1(), zeros(2, 1), base.b1(), eye(1));
        let r = check_hypotheses(&no_d12);
        assert!(!r.h2);
        assert!(r.worst_h2_sigma_min < 1e-12);
        let no_noise = small(base.c1(), base.d12(), zeros(2, 1), zeros(1, 1));
        assert!(!check_hypotheses(&no_noise).h3);
        assert!(matches!(build_sigma_c(&no_d12), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn zero_performance_output_gives_zero_solution() {
        let plant = small(zeros(2, 2), from_real_rows(&[&[1.0], &[0.0]]), from_real_rows(&[&[0.3], &[0.1]]), eye(1));
        let sigma = build_sigma_c(&plant).unwrap();
        assert_eq!(linalg::max_abs(sigma.q()), 0.0);
        assert_eq!(linalg::max_abs(sigma.l()), 0.0);
        let data = solve_central_pair(&plant).unwrap();
        assert!(linalg::max_abs(&data.x) < 1e-12);
        assert!(linalg::max_abs(&data.f_c()) < 1e-12);
    }

    #[test]
    fn generator_structure() {
        let plant = f16();
        let gen = synthesize(&plant).unwrap();
        assert_eq!(linalg::max_abs(&gen.gen.d11()), 0.0);
        assert!(gen.gen.center().approx_eq(&plant.center()));
        assert_eq!((gen.gen.part.m2, gen.gen.part.p2), (1, 1));
        let d = &gen.data;
        let c_f = plant.c2() + plant.d21() * &d.f1;
        assert_eq!(c_f, d.c_f);
        assert_eq!(filter_gain(&plant, &d.z, &d.c_f).unwrap(), d.b_z);
        assert!(d.x_solution.residual <= 1e-8 && d.z_solution.residual <= 1e-8);
        assert!(linalg::lambda_max(&d.x) <= SIGN_TOL * linalg::norm2(&d.x).max(1.0));
    }

    #[test]
    fn central_and_parametrized_controllers_on_f16() {
        let plant = f16();
        let gen = synthesize(&plant).unwrap();
        let k0 = central_controller(&gen);
        let q0 = CenteredRealization::static_gain(zeros(1, 1), plant.center());
        assert!(pointwise_distance(&k0, &parametrize(&gen, &q0, true).unwrap(), 16).unwrap() < 1e-12);
        let rep = verify_closed_loop(&plant, &k0).unwrap();
        assert!(rep.stable);
        assert!((rep.norm.unwrap().value - 0.4533).abs() < 1e-3);

        let half = CenteredRealization::static_gain(linalg::scalar(c(0.5, 0.0)), plant.center());
        let k = parametrize(&gen, &half, true).unwrap();
        assert!(verify_closed_loop(&plant, &k).unwrap().meets(1.0));

        let big = CenteredRealization::static_gain(linalg::scalar(c(1.5, 0.0)), plant.center());
        assert_eq!(parametrize(&gen, &big, true).unwrap_err(), Error::QNotContractive);

        let open = verify_closed_loop(&plant, &q0).unwrap();
        assert!(!open.stable && open.norm.is_none());
    }

    #[test]
    fn normalized_plant_matches_closed_form() {
        let plant = PartitionedPlant::from_blocks(
            MatrixPencil::new(from_real_rows(&[&[0.5, 0.2], &[0.0, -0.3]]), eye(2)).unwrap(),
            &from_real_rows(&[&[0.3, 0.0], &[0.1, 0.0]]),
            &from_real_rows(&[&[0.0], &[1.0]]),
            &from_real_rows(&[&[0.4, 0.2], &[0.0, 0.0]]),
            &from_real_rows(&[&[1.0, 0.5]]),
            &zeros(2, 2),
            &from_real_rows(&[&[0.0], &[1.0]]),
            &from_real_rows(&[&[0.0, 1.0]]),
            &zeros(1, 1),
            Center::from_z0(c(-1.0, 0.0)).unwrap(),
        )
        .unwrap();
        assert!(satisfies_normalizing_conditions(&plant, 1e-10));
        let gen = synthesize(&plant).unwrap();
        let closed = normalized_central_controller(&plant, &gen.data).unwrap();
        assert!(pointwise_distance(&central_controller(&gen), &closed, 16).unwrap() <= 1e-8);
    }

    #[test]
    fn inner_outer_split_and_dual_step_on_f16() {
        let plant = f16();
        let gen = synthesize(&plant).unwrap();
        let (t_i, t_o) = inner_outer_factors(&plant, &gen.data).unwrap();
        let joined = star_product(&t_i, &t_o).unwrap();
        assert!(pointwise_distance(&joined.sys, &plant.sys, 32).unwrap() <= 1e-8);
        assert!(analysis::is_inner(&t_i.sys).unwrap().is_inner);

        let h = check_hypotheses(&t_o);
        assert!(h.h3);
        let sigma_o = build_sigma_o(&t_o).unwrap();
        let cross = &gen.data.sigma_cross;
        for (x, y) in [(sigma_o.a(), cross.a()), (sigma_o.e(), cross.e()), (sigma_o.b(), cross.b()), (sigma_o.r(), cross.r())] {
            assert!(linalg::max_abs(&(x - y)) < 1e-12);
        }
        let y = riccati::solve_ddtare(&sigma_o).unwrap().x;
        assert!(linalg::max_abs(&(&y - &gen.data.z)) < 1e-8);
        let c3 = dual_two_block_generator(&t_o, &y).unwrap();
        assert!(pointwise_distance(&c3.sys, &gen.gen.sys, 32).unwrap() <= 1e-6);
    }

    #[test]
    fn one_block_pass_through() {
        let center = Center::unit();
        let swap = from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let static_plant = PartitionedPlant::new(CenteredRealization::static_gain(swap.clone(), center), Partition { m1: 1, m2: 1, p1: 1, p2: 1 }).unwrap();
        let gen = one_block_generator(&static_plant).unwrap();
        assert_eq!(gen.sys.d(), &swap);

        let plant = PartitionedPlant::from_blocks(
            MatrixPencil::new(from_real_rows(&[&[0.3, 0.1], &[0.0, -0.2]]), eye(2)).unwrap(),
            &from_real_rows(&[&[0.2], &[0.1]]),
            &from_real_rows(&[&[0.1], &[0.3]]),
            &from_real_rows(&[&[0.5, 0.2]]),
            &from_real_rows(&[&[0.1, -0.4]]),
            &zeros(1, 1),
            &from_real_rows(&[&[2.0]]),
            &from_real_rows(&[&[1.5]]),
            &zeros(1, 1),
            center,
        )
        .unwrap();
        let gen = one_block_generator(&plant).unwrap();
        let target = CenteredRealization::static_gain(swap, center);
        assert!(pointwise_distance(&star_product(&plant, &gen).unwrap().sys, &target, 32).unwrap() <= 1e-9);

        // T12 has its zero at 1.7.
        let bad = PartitionedPlant::from_blocks(
            plant.pencil().clone(),
            &plant.b1(),
            &from_real_rows(&[&[5.0], &[0.0]]),
            &from_real_rows(&[&[0.8, 0.0]]),
            &plant.c2(),
            &zeros(1, 1),
            &from_real_rows(&[&[2.0]]),
            &from_real_rows(&[&[1.5]]),
            &zeros(1, 1),
            center,
        )
        .unwrap();
        assert!(matches!(one_block_generator(&bad), Err(Error::AssumptionViolated(_))));
    }

    #[test]
    fn two_block_reduces_to_one_block_without_performance_output() {
        let plant = PartitionedPlant::from_blocks(
            MatrixPencil::new(from_real_rows(&[&[0.3, 0.1], &[0.0, -0.2]]), eye(2)).unwrap(),
            &from_real_rows(&[&[0.2], &[0.1]]),
            &from_real_rows(&[&[0.1], &[0.3]]),
            &zeros(1, 2),
            &from_real_rows(&[&[0.1, -0.4]]),
            &zeros(1, 1),
            &eye(1),
            &from_real_rows(&[&[1.5]]),
            &zeros(1, 1),
            Center::unit(),
        )
        .unwrap();
        let data = solve_central_pair(&plant).unwrap();
        assert!(linalg::max_abs(&data.x) < 1e-12);
        let c2 = two_block_generator(&plant, &data.x, &data.f2).unwrap();
        let c1 = one_block_generator(&plant).unwrap();
        assert!(pointwise_distance(&c2.sys, &c1.sys, 16).unwrap() < 1e-10);
    }

    #[test]
    fn two_block_controllers_are_admissible() {
        let plant = two_block_plant();
        let data = solve_central_pair(&plant).unwrap();
        let gen = two_block_generator(&plant, &data.x, &data.f2).unwrap();
        for q in [0.0, 0.5, -0.9, 0.3] {
            let q = CenteredRealization::static_gain(linalg::scalar(c(q, 0.0)), plant.center());
            let k = realization::lft_lower(&gen, &q).unwrap();
            assert!(verify_closed_loop(&plant, &k).unwrap().meets(1.0));
        }
    }

    #[test]
    fn gamma_bisection_brackets_f16_level() {
        let g = gamma_bisection(&f16(), 0.01, 2.0, 1e-3).unwrap().unwrap();
        assert!(g <= 1.0 && g > 0.01);
        assert!(synthesize(&realization::gamma_scale(&f16(), 0.01).unwrap()).unwrap_err().is_infeasibility());
    }
}
