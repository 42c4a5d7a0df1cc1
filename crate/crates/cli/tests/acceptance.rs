//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::f64::consts::TAU;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use hinf_cli::io::SystemFile;
use hinf_core::analysis;
use hinf_core::linalg::{self, c, ComplexMatrix};
use hinf_core::pencil::MatrixPencil;
use hinf_core::random::{self, SeededRng};
use hinf_core::realization::{self, Center, CenteredRealization, DescriptorRealization, PartitionedPlant};
use hinf_core::riccati::{self, PopovStructure};
use hinf_core::synthesis;
use hinf_core::tf::{self, TransferFunction};
use num_complex::Complex64;
use rand::Rng;
use serde_json::Value;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn f16() -> PartitionedPlant {
    SystemFile::read(&fixture("f16.json")).unwrap().partitioned(c(1.0, 0.0)).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn circle(k: usize, points: usize) -> Complex64 {
    Complex64::from_polar(1.0, TAU * (k as f64 + 0.29) / points as f64)
}

fn reals(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn real_rows(v: &Value) -> Vec<Vec<f64>> {
    v.as_array().unwrap().iter().map(reals).collect()
}

/// Largest `|m - r| / (1 + |r|)` over the reference entries.
fn mixed_gap(m: &ComplexMatrix, reference: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, row) in reference.iter().enumerate() {
        for (j, &r) in row.iter().enumerate() {
            worst = worst.max((m[(i, j)] - c(r, 0.0)).norm() / (1.0 + r.abs()));
        }
    }
    worst
}

fn abs_gap(m: &ComplexMatrix, reference: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, row) in reference.iter().enumerate() {
        for (j, &r) in row.iter().enumerate() {
            worst = worst.max((m[(i, j)] - c(r, 0.0)).norm());
        }
    }
    worst
}

fn f16_golden() -> Outcome {
    let expected: Value = serde_json::from_str(&std::fs::read_to_string(fixture("f16_expected.json")).unwrap()).unwrap();
    let start = Instant::now();
    let plant = f16();
    ensure(synthesis::check_hypotheses(&plant).all_pass(), || "hypotheses fail".into())?;
    let gen = synthesis::synthesize(&plant).map_err(|e| e.to_string())?;
    let d = &gen.data;
    let k0 = synthesis::central_controller(&gen);
    let rep = synthesis::verify_closed_loop(&plant, &k0).map_err(|e| e.to_string())?;
    let k = TransferFunction::from_realization(&k0).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();

    let res = d.x_solution.residual.max(d.z_solution.residual);
    ensure(res <= 1e-8, || format!("Riccati residual {res:.2e}"))?;
    let gx = mixed_gap(&d.x, &real_rows(&expected["X"]));
    let gz = mixed_gap(&d.z, &real_rows(&expected["Z"]));
    ensure(gx <= 1e-3 && gz <= 1e-3, || format!("X gap {gx:.2e}, Z gap {gz:.2e}"))?;
    let gf = abs_gap(&d.f_c(), &real_rows(&expected["F_c"]));
    ensure(gf <= 1e-3, || format!("F_c gap {gf:.2e}"))?;

    let to_c = |v: Vec<f64>| v.into_iter().map(|x| c(x, 0.0)).collect::<Vec<_>>();
    let gnum = tf::max_relative_gap(&k.num, &to_c(reals(&expected["controller_num"])));
    let gden = tf::max_relative_gap(&k.den, &to_c(reals(&expected["controller_den"])));
    ensure(gnum <= 1e-2 && gden <= 1e-2, || format!("K coefficient gaps {gnum:.2e} / {gden:.2e}"))?;

    ensure(rep.stable, || "closed loop unstable".into())?;
    let norm = rep.norm.as_ref().unwrap().value;
    let target = expected["norm"].as_f64().unwrap();
    ensure((norm - target).abs() <= 1e-3, || format!("norm {norm}"))?;

    // Each printed root is paired with its nearest eigenvalue, closest pairs
    // first. Unpaired eigenvalues must be cancelled in the transfer function.
    let printed = reals(&expected["closed_loop_poles"]);
    let eig = rep.poles.finite.clone();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, &r) in printed.iter().enumerate() {
        for (j, l) in eig.iter().enumerate() {
            pairs.push(((l - c(r, 0.0)).norm(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut row_used, mut col_used) = (vec![false; printed.len()], vec![false; eig.len()]);
    let mut worst_pole: f64 = 0.0;
    for (dist, i, j) in pairs {
        if !row_used[i] && !col_used[j] {
            worst_pole = worst_pole.max(dist);
            row_used[i] = true;
            col_used[j] = true;
        }
    }
    ensure(worst_pole <= 1e-3, || format!("pole gap {worst_pole:.2e}"))?;
    let g = &rep.closed_loop;
    let mut hidden = Vec::new();
    for (l, _) in eig.iter().zip(&col_used).filter(|(_, u)| !**u) {
        let h = 1e-7;
        let residue = linalg::norm2(&g.evaluate(l + c(h, h)).map_err(|e| e.to_string())?) * h;
        ensure(residue < 1e-5, || format!("extra mode {l} is not cancelled"))?;
        hidden.push(format!("{:.5}", l.re));
    }
    ensure(elapsed < 2.0, || format!("took {elapsed:.2}s"))?;
    Ok(format!(
        "norm {norm:.9}, X/Z gap {:.1e}, K gap {:.1e}, poles within {worst_pole:.1e} plus {} cancelled modes [{}], {elapsed:.2}s",
        gx.max(gz),
        gnum.max(gden),
        hidden.len(),
        hidden.join(", ")
    ))
}

fn scalar_oracle(e: f64, a: f64, b: f64, q: f64, l: f64, r: f64) -> Option<f64> {
    let m = e - a;
    let a2 = -(m * b).powi(2) / r;
    let a1 = e * e - a * a - 2.0 * m * b * l / r;
    let a0 = q - l * l / r;
    let disc = a1 * a1 - 4.0 * a2 * a0;
    if disc < 0.0 || a2.abs() < 1e-6 {
        return None;
    }
    let t = -0.5 * (a1 + a1.signum() * disc.sqrt());
    let roots = [t / a2, a0 / t];
    let pole = |x: f64| {
        let f = -(b * x * m + l) / r;
        (a + b * f) / (e + b * f)
    };
    let stabilizing: Vec<f64> = roots.iter().copied().filter(|&x| x.is_finite() && pole(x).abs() < 1.0 - 1e-3).collect();
    let marginal = roots.iter().any(|&x| (pole(x).abs() - 1.0).abs() <= 1e-3);
    (stabilizing.len() == 1 && !marginal && stabilizing[0].abs() < 1e3).then(|| stabilizing[0])
}

fn scalar_riccati() -> Outcome {
    let mut rng = random::seeded(0x5CA1);
    let (mut passed, mut worst): (usize, f64) = (0, 0.0);
    let mut checked = 0;
    while checked < 200 {
        let mut draw = |lo: f64, hi: f64| rng.random_range(lo..hi);
        let (e, a, b, q, l) = (draw(0.2, 1.5), draw(-2.0, 2.0), draw(-1.0, 1.0), draw(-1.0, 1.0), draw(-1.0, 1.0));
        let r = draw(0.2, 2.0) * if draw(0.0, 1.0) < 0.5 { -1.0 } else { 1.0 };
        if (e - a).abs() < 0.05 {
            continue;
        }
        let Some(x) = scalar_oracle(e, a, b, q, l, r) else { continue };
        checked += 1;
        let s = |v: f64| linalg::scalar(c(v, 0.0));
        let sigma = PopovStructure::new(MatrixPencil::new(s(a), s(e)).unwrap(), s(b), s(q), s(l), s(r), Center::unit()).unwrap();
        if let Ok(sol) = riccati::solve_ddtare(&sigma) {
            let gap = (sol.x[(0, 0)] - x).norm();
            worst = worst.max(gap);
            if gap <= 1e-8 {
                passed += 1;
            }
        }
    }
    ensure(passed == 200, || format!("{passed}/200 match, worst gap {worst:.2e}"))?;
    Ok(format!("200/200 within 1e-8 (worst {worst:.1e})"))
}

fn popov_solvability() -> Outcome {
    let mut rng = random::seeded(0x9090);
    let (mut trials, mut solvable, mut worst_sf): (usize, usize, f64) = (0, 0, 0.0);
    while trials < 100 {
        let n = rng.random_range(1..6);
        let m = rng.random_range(1..3);
        let complex = rng.random_bool(0.5);
        let sigma = random::popov_structure(&mut rng, n, m, complex).unwrap();
        let lmax = analysis::popov_max_eigenvalue(&sigma, 512).map_err(|e| e.to_string())?;
        if lmax.abs() <= 1e-6 {
            continue;
        }
        trials += 1;
        let solved = riccati::solve_ddtare(&sigma);
        ensure(solved.is_ok() == (lmax < 0.0), || format!("trial {trials}: lambda_max {lmax:.3e}, solvable {}", solved.is_ok()))?;
        if let Ok(sol) = solved {
            solvable += 1;
            let sf = riccati::spectral_factor(&sigma, &sol).map_err(|e| e.to_string())?;
            let pi = riccati::popov_function(&sigma);
            for k in 0..64 {
                let z = circle(k, 64);
                let s = sf.s.evaluate(z).map_err(|e| e.to_string())?;
                let gap = pi.evaluate(z).unwrap() - sf.s.evaluate_sharp(z).unwrap() * &sf.r * s;
                worst_sf = worst_sf.max(linalg::norm2(&gap));
            }
        }
    }
    ensure(worst_sf <= 1e-8, || format!("spectral factor gap {worst_sf:.2e}"))?;
    Ok(format!("100 trials agree ({solvable} solvable), spectral factor gap {worst_sf:.1e}"))
}

fn bounded_real_lemma() -> Outcome {
    let mut rng = random::seeded(0xB41);
    let (mut trials, mut inside, mut worst_res): (usize, usize, f64) = (0, 0, 0.0);
    while trials < 100 {
        let n = rng.random_range(1..7);
        let complex = rng.random_bool(0.5);
        let sys = random::stable_system(&mut rng, n, 2, 2, 0.9, complex).unwrap();
        let grid = analysis::grid_norm(&sys, 4096);
        let scale = rng.random_range(0.5..1.5) / grid.max(1e-12);
        let sys = sys.scale_output(scale);
        let grid = grid * scale;
        if (grid - 1.0).abs() <= 1e-3 {
            continue;
        }
        trials += 1;
        let (ok, cert) = analysis::bounded_real(&sys).map_err(|e| e.to_string())?;
        ensure(ok == (grid < 1.0), || format!("trial {trials}: grid norm {grid}, lemma says {ok}"))?;
        if let Some(cert) = cert {
            inside += 1;
            worst_res = worst_res.max(cert.residual(&sys));
            let top = linalg::lambda_max(&cert.x);
            ensure(top <= 1e-8 * linalg::norm2(&cert.x).max(1.0), || format!("certificate X has eigenvalue {top:.2e}"))?;
        }
    }
    ensure(worst_res <= 1e-8, || format!("certificate residual {worst_res:.2e}"))?;
    Ok(format!("100 trials agree ({inside} contractive), certificate residual {worst_res:.1e}"))
}

fn poly_z() -> DescriptorRealization {
    let r = |rows: &[&[f64]]| linalg::from_real_rows(rows);
    DescriptorRealization::new(
        MatrixPencil::new(linalg::eye(2), r(&[&[0.0, 1.0], &[0.0, 0.0]])).unwrap(),
        r(&[&[0.0], &[1.0]]),
        r(&[&[-1.0, 0.0]]),
        linalg::zeros(1, 1),
    )
    .unwrap()
}

fn conversion() -> Outcome {
    let mut rng = random::seeded(0xC0);
    let (mut trials, mut worst): (usize, f64) = (0, 0.0);
    while trials < 100 {
        let desc = if trials == 0 {
            poly_z()
        } else {
            let finite = rng.random_range(0..4);
            let blocks: Vec<usize> = (0..rng.random_range(0..3)).map(|_| rng.random_range(1..3)).collect();
            let complex = rng.random_bool(0.5);
            random::descriptor_system(&mut rng, finite, &blocks, 2, 2, complex).unwrap()
        };
        let z0 = random::unit_point(&mut rng);
        let cen = match realization::from_descriptor(&desc, z0) {
            Ok(s) => s,
            Err(hinf_core::Error::CenterIsPole) => continue,
            Err(e) => return Err(e.to_string()),
        };
        trials += 1;
        ensure(cen.order() <= desc.order(), || format!("order grew from {} to {}", desc.order(), cen.order()))?;
        let mut points = 0;
        while points < 32 {
            let z = Complex64::from_polar(rng.random_range(0.3..2.0), rng.random_range(0.0..TAU));
            let (Ok(g1), Ok(g2)) = (desc.evaluate(z), cen.evaluate(z)) else { continue };
            worst = worst.max(linalg::norm2(&(&g1 - &g2)) / (1.0 + linalg::norm2(&g1)));
            points += 1;
        }
    }
    ensure(worst <= 1e-9, || format!("relative gap {worst:.2e}"))?;
    Ok(format!("100 systems incl. G(z) = z, 32 points each, relative gap {worst:.1e}"))
}

fn f16_factorization() -> Outcome {
    let plant = f16();
    let gen = synthesis::synthesize(&plant).map_err(|e| e.to_string())?;
    let (t_i, t_o) = synthesis::inner_outer_factors(&plant, &gen.data).map_err(|e| e.to_string())?;
    let joined = realization::star_product(&t_i, &t_o).map_err(|e| e.to_string())?;
    let gap = synthesis::pointwise_distance(&joined.sys, &plant.sys, 32).map_err(|e| e.to_string())?;
    let inner = analysis::is_inner(&t_i.sys).map_err(|e| e.to_string())?;
    let res = inner.residuals.0.max(inner.residuals.1);
    ensure(gap <= 1e-8, || format!("T_I * T_O differs from T by {gap:.2e}"))?;
    ensure(inner.is_inner && res <= 1e-8, || format!("inner residuals {:?}", inner.residuals))?;
    Ok(format!("factorization gap {gap:.1e}, inner residual {res:.1e}"))
}

/// `k b / (z - a)` scaled to norm `target`.
fn first_order(rng: &mut SeededRng, target: f64, center: Center) -> CenteredRealization {
    let a: f64 = rng.random_range(-0.9..0.9);
    let b: f64 = rng.random_range(0.2..1.0);
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let peak = b / (1.0 - a.abs());
    TransferFunction { num: vec![c(sign * target * b / peak, 0.0)], den: vec![c(1.0, 0.0), c(-a, 0.0)] }
        .realize(center.z0())
        .unwrap()
}

fn parametrization() -> Outcome {
    let plant = f16();
    let gen = synthesis::synthesize(&plant).map_err(|e| e.to_string())?;
    let center = plant.center();
    let mut rng = random::seeded(0x0A7);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let q = if i % 2 == 0 {
            CenteredRealization::static_gain(linalg::scalar(c(rng.random_range(-0.95..0.95), 0.0)), center)
        } else {
            let target = rng.random_range(0.05..0.95);
            first_order(&mut rng, target, center)
        };
        let k = synthesis::parametrize(&gen, &q, true).map_err(|e| format!("sample {i}: {e}"))?;
        let rep = synthesis::verify_closed_loop(&plant, &k).map_err(|e| e.to_string())?;
        ensure(rep.meets(1.0), || format!("sample {i}: closed loop {:?}", rep.norm.map(|n| n.value)))?;
        worst = worst.max(rep.norm.unwrap().value);
    }
    for target in [1.1, 1.25, 1.5, 1.75, 2.0] {
        let q = CenteredRealization::static_gain(linalg::scalar(c(target, 0.0)), center);
        let k = synthesis::parametrize(&gen, &q, false).map_err(|e| e.to_string())?;
        let rep = synthesis::verify_closed_loop(&plant, &k).map_err(|e| e.to_string())?;
        ensure(!rep.meets(1.0), || format!("Q = {target} still meets the bound"))?;
    }
    Ok(format!("50 contractive parameters admissible (largest norm {worst:.4}), 5 non-contractive rejected"))
}

fn norm_computation() -> Outcome {
    let center = Center::unit();
    let d = linalg::from_real_rows(&[&[0.3, 0.0], &[0.0, -0.8]]);
    let r = analysis::hinf_norm(&CenteredRealization::static_gain(d, center), 1e-10).map_err(|e| e.to_string())?;
    ensure((r.value - 0.8).abs() <= 1e-12, || format!("static norm {}", r.value))?;

    let pole = TransferFunction { num: vec![c(1.0, 0.0)], den: vec![c(1.0, 0.0), c(-0.5, 0.0)] };
    let sys = pole.realize(c(-1.0, 0.0)).map_err(|e| e.to_string())?;
    let r = analysis::hinf_norm(&sys, 1e-8).map_err(|e| e.to_string())?;
    ensure((r.value - 2.0).abs() <= 1e-6, || format!("1/(z - 0.5) norm {}", r.value))?;
    ensure(r.lower <= r.value && r.value <= r.upper && r.upper - r.lower <= 1e-6, || format!("bracket {r:?}"))?;

    let mut rng = random::seeded(0x40);
    for _ in 0..20 {
        let n = rng.random_range(1..5);
        let sys = random::stable_system(&mut rng, n, 2, 2, 0.9, true).unwrap();
        let r = analysis::hinf_norm(&sys, 1e-8).map_err(|e| e.to_string())?;
        let grid = analysis::grid_norm(&sys, 1024);
        ensure(r.lower <= r.value && r.value <= r.upper, || format!("bracket {r:?}"))?;
        ensure(grid <= r.upper * (1.0 + 1e-9) && r.upper - r.lower <= 1e-8 * r.lower.max(1.0), || format!("grid {grid} vs {r:?}"))?;
    }
    let unstable = TransferFunction { num: vec![c(1.0, 0.0)], den: vec![c(1.0, 0.0), c(-1.5, 0.0)] };
    let err = analysis::hinf_norm(&unstable.realize(c(-1.0, 0.0)).unwrap(), 1e-8);
    ensure(err.is_err(), || "unstable system has a norm".into())?;
    Ok("static 0.8 exact, 1/(z - 0.5) = 2 within 1e-6, 20 random brackets hold".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("F-16 golden regression", f16_golden),
        ("scalar Riccati oracle", scalar_riccati),
        ("Popov negativity vs solvability", popov_solvability),
        ("bounded real lemma vs grid", bounded_real_lemma),
        ("descriptor conversion fidelity", conversion),
        ("F-16 inner-outer factorization", f16_factorization),
        ("controller parametrization", parametrization),
        ("H-infinity norm computation", norm_computation),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail}", i + 1);
            }
        }
    }
    println!("{}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
