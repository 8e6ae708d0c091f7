use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::json;

use naimark::fmt_f64;
use naimark::grid::GridSpec;
use naimark::heterodyne::{feasible_phase, noise_budget, HeterodyneSpec, DEFAULT_PHASE_BINS};
use naimark::measurement::{
    auto_grid, empirical_moments, outcome_density, predicted_moments, sample_outcomes, MomentReport, OutcomeMoments,
    Preparation,
};
use naimark::network::{build_mixing_matrix, compose_plan, decompose as plan_for, max_deviation, reduce_gamma, GammaParam};
use naimark::states::{quad_stats, StatePrep};
use naimark_oracle::{verify_suite, TruncationSpec};

use crate::config::{GridChoice, RunArgs, RunConfig};
use crate::CliError;

/// Decomposition residual above which `decompose` reports a numerical failure.
const RECOMPOSE_TOL: f64 = 1e-12;

/// Largest cutoff accepted by `verify`; memory grows as `(n_max + 1)^6`.
const MAX_VERIFY_NMAX: usize = 20;

const DEFAULT_OUT: &str = "naimark-out";

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn out_dir(cfg: &RunConfig, default: Option<&str>) -> Result<Option<PathBuf>, CliError> {
    let dir = cfg.out().or_else(|| default.map(PathBuf::from));
    if let Some(d) = &dir {
        fs::create_dir_all(d)?;
    }
    Ok(dir)
}

fn describe_gamma(g: &GammaParam) -> String {
    format!(
        "gamma = {}{:+}i -> reduced {} (phase {}, swapped {}, scale {})",
        g.raw.re, g.raw.im, g.reduced, g.phase, g.swapped, g.scale
    )
}

pub fn decompose(args: &RunArgs, as_json: bool) -> Result<(), CliError> {
    let cfg = RunConfig::load(args)?;
    let g = reduce_gamma(cfg.gamma()?)?;
    let m = build_mixing_matrix(g.reduced)?;
    let plan = plan_for(g.reduced)?;
    let residual = max_deviation(&compose_plan(&plan)?.entries, &m.entries);
    let unitarity = m.unitarity_deviation();
    let decoupled = m.kappa == 0.0;
    let doc = json!({
        "gamma": g,
        "mixing_matrix": m,
        "plan": plan,
        "recomposition_residual": residual,
        "unitarity_deviation": unitarity,
        "ancilla_decoupled": decoupled,
    });
    if as_json {
        println!("{}", serde_json::to_string_pretty(&doc).expect("json value"));
    } else {
        println!("{}", describe_gamma(&g));
        println!("kappa = {}", fmt_f64(m.kappa));
        println!("mixing matrix:\n{m}");
        println!("theta12 = {}", fmt_f64(plan.theta12));
        println!("theta13 = {}", fmt_f64(plan.theta13));
        println!("theta23 = {}", fmt_f64(plan.theta23));
        println!("pi rotation on mode: {:?}", plan.pi_rotation_mode);
        println!("stage order (leftmost first): {:?}", plan.ordering);
        println!("recomposition residual = {residual:e}");
        println!("unitarity deviation = {unitarity:e}");
        if decoupled {
            println!("kappa = 0: ancilla mode 3 decouples; the network reduces to a two-mode beam splitter");
        }
    }
    if let Some(dir) = out_dir(&cfg, None)? {
        write_json(&dir.join("decompose.json"), &doc)?;
    }
    if residual > RECOMPOSE_TOL || unitarity > RECOMPOSE_TOL {
        return Err(CliError::Numerical(format!(
            "recomposition residual {residual:e} or unitarity deviation {unitarity:e} exceeds {RECOMPOSE_TOL:e}"
        )));
    }
    Ok(())
}

/// `R^dag rho R` with `R = exp(i phi N)`: coherent amplitudes and quadrature
/// means rotate by `-phi`.
pub fn rotate_prep(prep: StatePrep, phi: f64) -> Result<StatePrep, CliError> {
    if phi == 0.0 {
        return Ok(prep);
    }
    Ok(match prep {
        StatePrep::Vacuum | StatePrep::NumberDiagonal(_) => prep,
        StatePrep::Coherent(b) => StatePrep::Coherent(b * Complex64::from_polar(1.0, -phi)),
        StatePrep::Gaussian(_) => {
            let s = quad_stats(&prep);
            let (c, sn) = (phi.cos(), phi.sin());
            // (q, p) -> (c q + s p, -s q + c p)
            let mq = c * s.mean_q + sn * s.mean_p;
            let mp = -sn * s.mean_q + c * s.mean_p;
            let vq = c * c * s.var_q + 2.0 * c * sn * s.cov_qp + sn * sn * s.var_p;
            let vp = sn * sn * s.var_q - 2.0 * c * sn * s.cov_qp + c * c * s.var_p;
            let cv = -c * sn * s.var_q + (c * c - sn * sn) * s.cov_qp + c * sn * s.var_p;
            StatePrep::gaussian(mq, mp, vq, vp, cv)?
        }
    })
}

fn preparation(cfg: &RunConfig, phase: f64) -> Result<Preparation, CliError> {
    let rho2 = rotate_prep(cfg.prep("rho2")?, phase)?;
    Ok(Preparation::new(cfg.prep("rho1")?, rho2, cfg.prep("sigma")?)?)
}

fn grid_spec(cfg: &RunConfig, prep: &Preparation, gamma: f64) -> Result<GridSpec, CliError> {
    Ok(match cfg.grid()? {
        GridChoice::Auto => auto_grid(prep, gamma)?,
        GridChoice::Fixed(s) => s,
    })
}

pub fn simulate(args: &RunArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(args)?;
    let g = reduce_gamma(cfg.gamma()?)?;
    if g.swapped {
        return Err(CliError::Config(format!(
            "|gamma| = {} > 1: simulate gamma = {} with the preparations of modes 1 and 2 exchanged",
            g.scale,
            1.0 / g.scale
        )));
    }
    let samples = cfg.usize_or("samples", 0)?;
    let seed = cfg.seed()?;
    if samples > 0 && seed.is_none() {
        return Err(CliError::Config("--seed is required when --samples > 0".into()));
    }
    let prep = preparation(&cfg, g.phase)?;
    let gamma = g.reduced;
    let spec = grid_spec(&cfg, &prep, gamma)?;
    let grid = outcome_density(&prep, gamma, &spec)?;
    let predicted = predicted_moments(&prep, gamma)?;
    let measured = empirical_moments(&grid)?;
    let dir = out_dir(&cfg, Some(DEFAULT_OUT))?.expect("default output directory");

    let mut w = BufWriter::new(File::create(dir.join("density.csv"))?);
    grid.write_csv(&mut w)?;
    w.flush()?;

    let sampled = match seed.filter(|_| samples > 0) {
        Some(seed) => {
            let draws = sample_outcomes(&grid, samples, seed)?;
            let mut w = BufWriter::new(File::create(dir.join("samples.csv"))?);
            writeln!(w, "x,y")?;
            for s in &draws {
                writeln!(w, "{},{}", fmt_f64(s.re), fmt_f64(s.im))?;
            }
            w.flush()?;
            Some(OutcomeMoments::from_samples(&draws))
        }
        None => None,
    };
    let report = MomentReport {
        predicted,
        measured: Some(measured),
        sampled,
    };
    fs::write(dir.join("moments.json"), report.to_json() + "\n")?;

    println!("{}", describe_gamma(&g));
    if g.phase != 0.0 {
        println!("gamma phase {} absorbed into mode 2: rho2 rotated by {}", g.phase, -g.phase);
    }
    println!(
        "grid x in [{}, {}], y in [{}, {}], {} x {}",
        spec.x_min, spec.x_max, spec.y_min, spec.y_max, spec.nx, spec.ny
    );
    println!("mass = {}", fmt_f64(grid.mass()));
    println!(
        "predicted mean = ({}, {}), var = ({}, {})",
        fmt_f64(predicted.mean_x),
        fmt_f64(predicted.mean_y),
        fmt_f64(predicted.var_q1),
        fmt_f64(predicted.var_p2)
    );
    println!(
        "measured  mean = ({}, {}), var = ({}, {})",
        fmt_f64(measured.mean_q1),
        fmt_f64(measured.mean_p2),
        fmt_f64(measured.var_q1),
        fmt_f64(measured.var_p2)
    );
    if let Some(s) = sampled {
        println!(
            "sampled   mean = ({}, {}), var = ({}, {}) from {samples} draws",
            fmt_f64(s.mean_q1),
            fmt_f64(s.mean_p2),
            fmt_f64(s.var_q1),
            fmt_f64(s.var_p2)
        );
    }
    println!("wrote {}", dir.display());
    Ok(())
}

pub fn verify(args: &RunArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(args)?;
    let g = reduce_gamma(cfg.gamma()?)?;
    let n_max = cfg.usize_or("nmax", 12)?;
    let buffer = cfg.usize_or("buffer", 3)?;
    if n_max > MAX_VERIFY_NMAX {
        return Err(CliError::Config(format!(
            "n_max {n_max} exceeds {MAX_VERIFY_NMAX}; the dense oracle needs (n_max + 1)^6 complex entries"
        )));
    }
    let trunc = match TruncationSpec::new(n_max, buffer) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("warning: {e}; running with a diagnostic truncation, checks near the cutoff are expected to fail");
            TruncationSpec::diagnostic(n_max, buffer)?
        }
    };
    println!("{}", describe_gamma(&g));
    let report = verify_suite(g.reduced, &trunc)?;
    for c in &report.checks {
        println!(
            "[{}] {}: max deviation {:e} (tolerance {:e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.check,
            c.max_deviation,
            c.tolerance
        );
    }
    for n in &report.notices {
        println!("note: {n}");
    }
    if g.reduced == 1.0 {
        println!("note: gamma = 1 gives kappa = 0, so normality of T = a1 + a2^dag is exact");
    }
    if let Some(dir) = out_dir(&cfg, None)? {
        write_json(&dir.join("verify.json"), &report)?;
    }
    let failed = report.checks.iter().filter(|c| !c.pass).count();
    if failed > 0 {
        return Err(CliError::Numerical(format!("{failed} of {} checks failed", report.checks.len())));
    }
    println!("all {} checks passed", report.checks.len());
    Ok(())
}

pub fn heterodyne(args: &RunArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(args)?;
    let spec = HeterodyneSpec::new(cfg.f64_value("omega1")?, cfg.f64_value("omegaI")?)?;
    let prep = preparation(&cfg, 0.0)?;
    let budget = noise_budget(&spec, &prep)?;
    let gc = budget.gamma_caves;
    let grid = grid_spec(&cfg, &prep, gc)?;
    let bins = cfg.usize_or("bins", DEFAULT_PHASE_BINS)?;
    let phase = feasible_phase(&prep, gc, &grid, bins)?;

    println!("gamma_C = {}", fmt_f64(gc));
    println!("[y_C, y_C^dag] = {}", fmt_f64(budget.commutator));
    println!("added noise at gamma_C: q {}, p {}", fmt_f64(budget.added_q), fmt_f64(budget.added_p));
    println!(
        "excess vs standard heterodyne: q {}, p {}",
        fmt_f64(budget.excess_vs_standard_q),
        fmt_f64(budget.excess_vs_standard_p)
    );
    if spec.omega_intermediate() == 0.0 {
        println!("omega_I = 0: gamma_C = 1 and the Caves and standard branches are identical");
    }
    if budget.no_added_noise {
        println!("verdict: no added noise vs standard heterodyne");
    } else {
        println!("verdict: positive excess noise vs standard heterodyne");
    }
    println!(
        "phase: circular mean {}, circular variance {}",
        fmt_f64(phase.circular_mean),
        fmt_f64(phase.circular_variance)
    );
    if let Some(dir) = out_dir(&cfg, None)? {
        let mut w = BufWriter::new(File::create(dir.join("phase.csv"))?);
        phase.write_csv(&mut w)?;
        w.flush()?;
        let doc = json!({
            "spec": spec,
            "noise_budget": budget,
            "phase": phase.summary_json(),
        });
        write_json(&dir.join("heterodyne.json"), &doc)?;
    }
    Ok(())
}
