use std::f64::consts::TAU;
use std::io::Write;
use std::path::Path;

use hinf_core::analysis;
use hinf_core::linalg;
use hinf_core::pencil::{self, MatrixPencil};
use hinf_core::realization::{self, CenteredRealization, DescriptorRealization, PartitionedPlant};
use hinf_core::synthesis;
use num_complex::Complex64;

use crate::format::{self, sig};
use crate::io::{System, SystemFile};
use crate::{exit, CliError, Cli, Command};

type Outcome = Result<i32, CliError>;

fn emit(out: &mut dyn Write, text: std::fmt::Arguments) -> Result<(), CliError> {
    out.write_fmt(text).map_err(|e| CliError::Input(format!("cannot write output: {e}")))
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => { emit($out, format_args!("{}\n", format_args!($($arg)*)))? };
}

pub fn dispatch(cli: &Cli, out: &mut dyn Write) -> Outcome {
    let z0 = cli.z0;
    match &cli.command {
        Command::Convert { input, output } => convert(input, output, z0, out),
        Command::Check { plant } => check(plant, z0, out),
        Command::Synth { plant, gamma, output, central, bisect } => {
            synth(plant, *gamma, output.as_deref(), central.as_deref(), *bisect, z0, out)
        }
        Command::Verify { plant, controller, gamma, output } => verify(plant, controller, *gamma, output.as_deref(), z0, out),
        Command::Sigma { system, points, output } => sigma(system, *points, output.as_deref(), z0, out),
        Command::Norm { system, tol } => norm(system, *tol, z0, out),
        Command::Eval { system, point } => eval(system, *point, z0, out),
        Command::Poles { system } => poles(system, z0, out),
    }
}

/// `D + C (zE - A)^{-1} B (alpha - beta z)` as a plain descriptor system of
/// order `n + m`, with the input copied into non-dynamic states.
fn as_descriptor(sys: &CenteredRealization) -> Result<DescriptorRealization, CliError> {
    let (n, m) = (sys.order(), sys.inputs());
    let center = sys.center();
    let zero_nm = linalg::zeros(m, n);
    let a = linalg::block(
        &[n, m],
        &[n, m],
        &[&[Some(sys.a()), Some(&(sys.b() * center.alpha()))], &[Some(&zero_nm), Some(&-linalg::eye(m))]],
    );
    let e = linalg::block(&[n, m], &[n, m], &[&[Some(sys.e()), Some(&(sys.b() * center.beta()))], &[None, None]]);
    let b = linalg::vstack(&linalg::zeros(n, m), &linalg::eye(m));
    let c = linalg::hstack(sys.c(), &linalg::zeros(sys.outputs(), m));
    Ok(DescriptorRealization::new(MatrixPencil::new(a, e)?, b, c, sys.d().clone())?)
}

fn convert(input: &Path, output: &Path, z0: Complex64, out: &mut dyn Write) -> Outcome {
    let file = SystemFile::read(input)?;
    let sys = match file.system()? {
        System::Descriptor(d) => realization::from_descriptor(&d, z0)?,
        System::Centered(s) if (s.center().z0() - z0).norm() <= 1e-15 => s,
        System::Centered(s) => realization::from_descriptor(&as_descriptor(&s)?, z0)?,
    };
    let part = file.partition.map(|p| hinf_core::realization::Partition { m1: p.m1, m2: p.m2, p1: p.p1, p2: p.p2 });
    SystemFile::from_centered(&sys, part).write(output)?;
    say!(out, "order {}", sys.order());
    say!(out, "z0 {}", format::complex(sys.center().z0()));
    say!(out, "D =");
    emit(out, format_args!("{}", format::matrix(sys.d())))?;
    Ok(exit::SUCCESS)
}

fn check(path: &Path, z0: Complex64, out: &mut dyn Write) -> Outcome {
    let plant = SystemFile::read(path)?.partitioned(z0)?;
    let r = synthesis::check_hypotheses(&plant);
    say!(out, "h1 stabilizable {}", r.h1_stab);
    say!(out, "h1 detectable {}", r.h1_detect);
    say!(out, "h2 {} (worst relative sigma {})", r.h2, sig(r.worst_h2_sigma_min, 6));
    say!(out, "h3 {} (worst relative sigma {})", r.h3, sig(r.worst_h3_sigma_min, 6));
    Ok(if r.all_pass() { exit::SUCCESS } else { exit::FAILURE })
}

fn closed_loop_line(plant: &PartitionedPlant, k: &CenteredRealization) -> Result<(bool, Option<f64>, String), CliError> {
    let rep = synthesis::verify_closed_loop(plant, k)?;
    let norm = rep.norm.map(|n| n.value);
    let text = match norm {
        Some(v) if rep.stable => format!("stable, norm {}", sig(v, 9)),
        _ => "unstable".to_string(),
    };
    Ok((rep.stable, norm, text))
}

fn synth(
    path: &Path,
    gamma: f64,
    output: Option<&Path>,
    central: Option<&Path>,
    bisect: bool,
    z0: Complex64,
    out: &mut dyn Write,
) -> Outcome {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(CliError::Input("gamma must be positive".into()));
    }
    let plant = SystemFile::read(path)?.partitioned(z0)?;
    plant.require_standard_form()?;
    let scaled = realization::gamma_scale(&plant, gamma)?;
    let hyp = synthesis::check_hypotheses(&scaled);
    if !hyp.all_pass() {
        say!(out, "hypotheses fail: h1 {} {}, h2 {}, h3 {}", hyp.h1_stab, hyp.h1_detect, hyp.h2, hyp.h3);
        return Ok(exit::FAILURE);
    }
    let gen = match synthesis::synthesize(&scaled) {
        Ok(g) => g,
        Err(e) if e.is_infeasibility() => {
            say!(out, "infeasible at gamma {}: {e}", sig(gamma, 9));
            return Ok(exit::FAILURE);
        }
        Err(e) => return Err(e.into()),
    };
    let d = &gen.data;
    say!(out, "gamma {}", sig(gamma, 9));
    say!(out, "X residual {}", sig(d.x_solution.residual, 3));
    say!(out, "Z residual {}", sig(d.z_solution.residual, 3));
    say!(out, "lambda_max(X) {}", sig(linalg::lambda_max(&d.x), 6));
    say!(out, "lambda_max(Z) {}", sig(linalg::lambda_max(&d.z), 6));
    say!(out, "generator order {}", gen.order());
    let k0 = synthesis::central_controller(&gen);
    let (_, _, line) = closed_loop_line(&plant, &k0)?;
    say!(out, "central closed loop: {line}");
    if let Some(p) = output {
        SystemFile::from_plant(&gen.gen).write(p)?;
    }
    if let Some(p) = central {
        SystemFile::from_centered(&k0, None).write(p)?;
    }
    if bisect {
        match synthesis::gamma_bisection(&plant, 1e-3 * gamma, gamma, 1e-3)? {
            Some(g) => say!(out, "smallest feasible gamma {}", sig(g, 6)),
            None => say!(out, "no feasible gamma up to {}", sig(gamma, 9)),
        }
    }
    Ok(exit::SUCCESS)
}

fn verify(plant: &Path, controller: &Path, gamma: f64, output: Option<&Path>, z0: Complex64, out: &mut dyn Write) -> Outcome {
    let plant = SystemFile::read(plant)?.partitioned(z0)?;
    let k = SystemFile::read(controller)?.centered(plant.center().z0())?;
    if (k.outputs(), k.inputs()) != (plant.part.m2, plant.part.p2) {
        return Err(CliError::Input(format!(
            "controller is {}x{}, the plant needs {}x{}",
            k.outputs(),
            k.inputs(),
            plant.part.m2,
            plant.part.p2
        )));
    }
    let rep = synthesis::verify_closed_loop(&plant, &k)?;
    if let Some(p) = output {
        SystemFile::from_centered(&rep.closed_loop, None).write(p)?;
    }
    let mut moduli: Vec<f64> = rep.poles.finite.iter().map(|l| l.norm()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    let listed: Vec<String> = moduli.iter().map(|m| sig(*m, 6)).collect();
    let infinite = rep.poles.infinite_count;
    let (Some(norm), true) = (rep.norm, rep.stable) else {
        say!(out, "unstable");
        say!(out, "pole moduli {}{}", listed.join(" "), if infinite > 0 { format!(" (+{infinite} at infinity)") } else { String::new() });
        return Ok(exit::FAILURE);
    };
    say!(out, "stable, norm {}", sig(norm.value, 9));
    say!(out, "pole moduli {}", listed.join(" "));
    if norm.value < gamma {
        Ok(exit::SUCCESS)
    } else {
        say!(out, "norm is not below gamma {}", sig(gamma, 9));
        Ok(exit::FAILURE)
    }
}

/// CSV of the singular values at `points` equally spaced angles from 0.
pub fn sigma_table(sys: &CenteredRealization, points: usize) -> Result<String, CliError> {
    let k = sys.inputs().min(sys.outputs());
    let mut csv = String::from("theta");
    for i in 1..=k {
        csv.push_str(&format!(",sigma_{i}"));
    }
    csv.push('\n');
    for j in 0..points {
        let theta = TAU * j as f64 / points as f64;
        let s = analysis::sigma_at(sys, theta)?;
        csv.push_str(&sig(theta, 9));
        for v in s.iter().take(k) {
            csv.push(',');
            csv.push_str(&sig(*v, 9));
        }
        csv.push('\n');
    }
    Ok(csv)
}

fn sigma(path: &Path, points: usize, output: Option<&Path>, z0: Complex64, out: &mut dyn Write) -> Outcome {
    if points == 0 {
        return Err(CliError::Input("--points must be positive".into()));
    }
    let sys = SystemFile::read(path)?.centered(z0)?;
    let csv = sigma_table(&sys, points)?;
    match output {
        Some(p) => std::fs::write(p, csv).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
        None => emit(out, format_args!("{csv}"))?,
    }
    Ok(exit::SUCCESS)
}

fn norm(path: &Path, tol: f64, z0: Complex64, out: &mut dyn Write) -> Outcome {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(CliError::Input("--tol must be positive".into()));
    }
    let sys = SystemFile::read(path)?.centered(z0)?;
    match analysis::hinf_norm(&sys, tol) {
        Ok(r) => {
            say!(out, "{}", sig(r.value, 9));
            Ok(exit::SUCCESS)
        }
        Err(hinf_core::Error::UnstableSystem) => {
            say!(out, "unstable");
            Ok(exit::FAILURE)
        }
        Err(e) => Err(e.into()),
    }
}

fn eval(path: &Path, point: Complex64, z0: Complex64, out: &mut dyn Write) -> Outcome {
    let sys = SystemFile::read(path)?.centered(z0)?;
    let g = sys.evaluate(point)?;
    emit(out, format_args!("{}", format::matrix(&g)))?;
    Ok(exit::SUCCESS)
}

fn poles(path: &Path, z0: Complex64, out: &mut dyn Write) -> Outcome {
    let sys = SystemFile::read(path)?.centered(z0)?;
    let spec = pencil::generalized_spectrum(sys.pencil())?;
    let mut finite = spec.finite.clone();
    finite.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(a.re.total_cmp(&b.re)).then(a.im.total_cmp(&b.im)));
    for l in &finite {
        say!(out, "{}  |{}|", format::complex(*l), sig(l.norm(), 9));
    }
    say!(out, "infinite {}", spec.infinite_count);
    say!(out, "stable {}", spec.is_stable());
    Ok(exit::SUCCESS)
}
