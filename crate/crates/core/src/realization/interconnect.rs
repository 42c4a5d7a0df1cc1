//! Interconnections of centered realizations sharing one center.

use super::{CenteredRealization, Partition, PartitionedPlant};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::pencil::MatrixPencil;

/// Well-posedness threshold on `rcond(I - D_ff)`.
const WELL_POSED_TOL: f64 = 1e-12;

/// Block-diagonal juxtaposition: inputs `[u1, u2]`, outputs `[y1, y2]`.
pub fn append(s1: &CenteredRealization, s2: &CenteredRealization) -> Result<CenteredRealization> {
    if !s1.center().approx_eq(&s2.center()) {
        return Err(Error::CenterMismatch);
    }
    let pencil = MatrixPencil::new(
        linalg::block_diag(s1.a(), s2.a()),
        linalg::block_diag(s1.e(), s2.e()),
    )?;
    Ok(CenteredRealization::from_parts_unchecked(
        pencil,
        linalg::block_diag(s1.b(), s2.b()),
        linalg::block_diag(s1.c(), s2.c()),
        linalg::block_diag(s1.d(), s2.d()),
        s1.center(),
    ))
}

/// Closes the loops `u[inputs[k]] = y[outputs[k]]`. The remaining inputs and
/// outputs keep their relative order.
///
/// Properness at the center is preserved: `alpha E - beta A` is unchanged by
/// the feedback terms.
pub fn close_loops(sys: &CenteredRealization, inputs: &[usize], outputs: &[usize]) -> Result<CenteredRealization> {
    if inputs.len() != outputs.len()
        || inputs.iter().any(|&i| i >= sys.inputs())
        || outputs.iter().any(|&o| o >= sys.outputs())
    {
        return Err(Error::DimensionMismatch("feedback index lists".into()));
    }
    let ext_in: Vec<usize> = (0..sys.inputs()).filter(|i| !inputs.contains(i)).collect();
    let ext_out: Vec<usize> = (0..sys.outputs()).filter(|o| !outputs.contains(o)).collect();
    let n = sys.order();
    let k = inputs.len();
    let pick = |m: &ComplexMatrix, rows: &[usize], cols: &[usize]| {
        ComplexMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
    };
    let all_n: Vec<usize> = (0..n).collect();
    let b_e = pick(sys.b(), &all_n, &ext_in);
    let b_f = pick(sys.b(), &all_n, inputs);
    let c_e = pick(sys.c(), &ext_out, &all_n);
    let c_f = pick(sys.c(), outputs, &all_n);
    let d_ee = pick(sys.d(), &ext_out, &ext_in);
    let d_ef = pick(sys.d(), &ext_out, inputs);
    let d_fe = pick(sys.d(), outputs, &ext_in);
    let d_ff = pick(sys.d(), outputs, inputs);

    let loop_matrix = linalg::eye(k) - d_ff;
    if k > 0 && linalg::rcond(&loop_matrix) < WELL_POSED_TOL {
        return Err(Error::IllPosed);
    }
    let phi = linalg::inverse(&loop_matrix)?;
    let center = sys.center();
    let bpc = &b_f * &phi * &c_f;
    let a = sys.a() + &bpc * center.alpha();
    let e = sys.e() + &bpc * center.beta();
    let b = b_e + &b_f * &phi * &d_fe;
    let c = c_e + &d_ef * &phi * &c_f;
    let d = d_ee + &d_ef * &phi * &d_fe;
    Ok(CenteredRealization::from_parts_unchecked(
        MatrixPencil::new(a, e)?,
        b,
        c,
        d,
        center,
    ))
}

/// Lower fractional transformation `F_l(T, K) = T11 + T12 K (I - T22 K)^{-1} T21`
/// with `K` of size `m2 x p2`.
pub fn lft_lower(t: &PartitionedPlant, k: &CenteredRealization) -> Result<CenteredRealization> {
    let Partition { m1, m2, p1, p2 } = t.part;
    if k.outputs() != m2 || k.inputs() != p2 {
        return Err(Error::DimensionMismatch(format!(
            "controller must be {m2}x{p2}, got {}x{}",
            k.outputs(),
            k.inputs()
        )));
    }
    let joint = append(&t.sys, k)?;
    // Inputs [u1, u2, uK], outputs [y1, y2, yK].
    let ins: Vec<usize> = (m1..m1 + m2).chain(m1 + m2..m1 + m2 + p2).collect();
    let outs: Vec<usize> = (p1 + p2..p1 + p2 + m2).chain(p1..p1 + p2).collect();
    close_loops(&joint, &ins, &outs)
}

/// Redheffer star product: the `(m1, p1)` channel of `c` is attached to the
/// `(p2, m2)` channel of `t`. The result has inputs `[w_t, w_c]` and outputs
/// `[z_t, z_c]` partitioned as `(t.m1, c.m2, t.p1, c.p2)`.
pub fn star_product(t: &PartitionedPlant, c: &PartitionedPlant) -> Result<PartitionedPlant> {
    let pt = t.part;
    let pc = c.part;
    if pc.m1 != pt.p2 || pc.p1 != pt.m2 {
        return Err(Error::DimensionMismatch("star product channel sizes".into()));
    }
    let joint = append(&t.sys, &c.sys)?;
    let mt = pt.m1 + pt.m2;
    let ptot = pt.p1 + pt.p2;
    // t.u2 <- c.y1 and c.u1 <- t.y2.
    let ins: Vec<usize> = (pt.m1..mt).chain(mt..mt + pc.m1).collect();
    let outs: Vec<usize> = (ptot..ptot + pc.p1).chain(pt.p1..ptot).collect();
    let sys = close_loops(&joint, &ins, &outs)?;
    PartitionedPlant::new(
        sys,
        Partition {
            m1: pt.m1,
            m2: pc.m2,
            p1: pt.p1,
            p2: pc.p2,
        },
    )
}

/// Absorbs a nonzero `D22` into the controller: `K' = K (I + D22 K)^{-1}`, so
/// that `F_l(T, K') ` equals the loop with the plant's `D22` removed.
pub fn d22_loop_shift(k: &CenteredRealization, d22: &ComplexMatrix) -> Result<CenteredRealization> {
    let (m2, p2) = (k.outputs(), k.inputs());
    if d22.shape() != (p2, m2) {
        return Err(Error::DimensionMismatch("D22 must be p2 x m2".into()));
    }
    // Static block: inputs [v, w], outputs [v - D22 w, w].
    let ds = linalg::block(
        &[p2, m2],
        &[p2, m2],
        &[&[Some(&linalg::eye(p2)), Some(&-d22)], &[None, Some(&linalg::eye(m2))]],
    );
    let stat = CenteredRealization::static_gain(ds, k.center());
    let joint = append(k, &stat)?;
    // Inputs [eK, v, w], outputs [uK, e, w].
    let ins: Vec<usize> = (0..p2).chain(2 * p2..2 * p2 + m2).collect();
    let outs: Vec<usize> = (m2..m2 + p2).chain(0..m2).collect();
    close_loops(&joint, &ins, &outs)
}

/// Scales the exogenous input by `1 / gamma`: `B1`, `D11` and `D21` divided.
pub fn gamma_scale(t: &PartitionedPlant, gamma: f64) -> Result<PartitionedPlant> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::DimensionMismatch(format!("gamma must be positive, got {gamma}")));
    }
    let m1 = t.part.m1;
    let mut b = t.sys.b().clone();
    let mut d = t.sys.d().clone();
    let inv = linalg::c(1.0 / gamma, 0.0);
    for j in 0..m1 {
        b.column_mut(j).scale_mut(1.0 / gamma);
        for i in 0..d.nrows() {
            d[(i, j)] *= inv;
        }
    }
    let sys = CenteredRealization::from_parts_unchecked(
        t.sys.pencil().clone(),
        b,
        t.sys.c().clone(),
        d,
        t.center(),
    );
    PartitionedPlant::new(sys, t.part)
}
