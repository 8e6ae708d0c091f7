//! Brute-force checks of the `naimark` crate in a truncated three-mode Fock
//! space.
//!
//! Everything here is built from ladder operators and matrix exponentials
//! and shares no formulas with the phase-space code it verifies, apart from
//! the mixing matrix and the stage plan it is asked to realize.
//!
//! Identities hold only away from the cutoff. Checks are restricted to a safe
//! subspace `n <= n_max - buffer`, per mode for identities of `T`, and on the
//! total photon number for the network unitary, which conserves it.

pub mod defect;
pub mod density;
pub mod error;
pub mod fock;
pub mod identities;
pub mod prep;
pub mod report;
pub mod special;
pub mod unitary;

use serde::Serialize;

use naimark::grid::GridSpec;
use naimark::measurement::{predicted_moments, Preparation};
use naimark::states::StatePrep;
use naimark::Complex64;

pub use defect::{identity_defect, DefectMatrix, QuadratureSpec};
pub use density::joint_density_oracle;
pub use error::{Error, Result};
pub use fock::{FockOperator, TruncationSpec};
pub use identities::{operator_t, relative_number_checks, PolarOutcome};
pub use report::CheckReport;
pub use unitary::build_unitary;

/// L1 bound between oracle and phase-space densities.
pub const DENSITY_L1_TOL: f64 = 1e-2;

/// Grid points per axis for oracle density comparisons.
pub const ORACLE_GRID_POINTS: usize = 64;

/// Outcome of [`verify_suite`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub gamma: f64,
    pub n_max: usize,
    pub buffer: usize,
    pub checks: Vec<CheckReport>,
    pub notices: Vec<String>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Grid of `ORACLE_GRID_POINTS` per axis covering the predicted mean +- 6
/// sigma.
pub fn oracle_grid(prep: &Preparation, gamma: f64) -> Result<GridSpec> {
    let m = predicted_moments(prep, gamma)?;
    let (hx, hy) = (6.0 * m.var_q1.sqrt(), 6.0 * m.var_p2.sqrt());
    Ok(GridSpec::new(
        m.mean_x - hx,
        m.mean_x + hx,
        m.mean_y - hy,
        m.mean_y + hy,
        ORACLE_GRID_POINTS,
        ORACLE_GRID_POINTS,
    )?)
}

/// L1 distance between the oracle and the FFT density on [`oracle_grid`].
pub fn density_equivalence(prep: &Preparation, u: &FockOperator, gamma: f64) -> Result<f64> {
    let spec = oracle_grid(prep, gamma)?;
    let oracle = density::joint_density_with(prep, u, &spec)?;
    let fft = naimark::measurement::outcome_density(prep, gamma, &spec)?;
    Ok(oracle.l1_distance(&fft))
}

fn suite_preps() -> Vec<(&'static str, Preparation)> {
    let vac = StatePrep::Vacuum;
    vec![
        ("all vacuum", Preparation::vacuum()),
        ("number(1) signal", Preparation::signal_only(StatePrep::number(1))),
        (
            "coherent(0.6, 0.3) x coherent(-0.4) x thermal(0.3)",
            Preparation::new(
                StatePrep::Coherent(Complex64::new(0.6, 0.3)),
                StatePrep::Coherent(Complex64::new(-0.4, 0.0)),
                StatePrep::thermal(0.3).expect("valid thermal parameter"),
            )
            .expect("zero-mean ancilla"),
        ),
        ("vacuum x number(1) x vacuum", Preparation::new(vac.clone(), StatePrep::number(1), vac).expect("zero-mean ancilla")),
    ]
}

/// Runs every oracle check for canonical `gamma`.
pub fn verify_suite(gamma: f64, trunc: &TruncationSpec) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let mut notices = Vec::new();

    let u = unitary::plan_unitary(&naimark::network::decompose(gamma)?, trunc.n_max)?;
    checks.push(CheckReport::new(
        "unitarity U^dag U = 1",
        gamma,
        trunc,
        unitary::unitarity_deviation(&u),
        unitary::UNITARITY_TOL,
    ));
    let heis = unitary::heisenberg_deviation(&u, gamma, trunc)?;
    checks.push(CheckReport::new(
        "heisenberg U^dag a U = M a",
        gamma,
        trunc,
        heis,
        unitary::HEISENBERG_TOL,
    ));
    checks.push(identities::normality_check(gamma, trunc)?);
    let rel = relative_number_checks(gamma, trunc)?;
    checks.push(rel.shift);
    match rel.polar {
        PolarOutcome::Checked(p) => {
            notices.push(format!(
                "polar: rank {} of {}; (V^dag V + V V^dag)/2 - 1 reaches {:e} on the safe subspace (V is a partial isometry on the truncated space)",
                p.rank, p.dim, p.cos_sin_defect
            ));
            checks.push(p.isometry);
            checks.push(p.shift);
        }
        PolarOutcome::Skipped { notice } => notices.push(notice),
    }

    if gamma < 1.0 {
        let quad = QuadratureSpec::for_cutoff(trunc.n_max);
        let dev = match identity_defect(gamma, trunc.n_max, &quad) {
            Ok(m) => m.max_deviation(),
            Err(e) => {
                notices.push(format!("identity defect: {e}"));
                f64::NAN
            }
        };
        checks.push(CheckReport::new("identity defect", gamma, trunc, dev, defect::DEFECT_TOL));
    } else {
        notices.push("identity defect skipped: gamma = 1 has no defect (Z is already normal)".into());
    }

    for (name, prep) in suite_preps() {
        let dev = match density_equivalence(&prep, &u, gamma) {
            Ok(l1) => l1,
            Err(e) => {
                notices.push(format!("density {name}: {e}"));
                f64::NAN
            }
        };
        checks.push(CheckReport::new(format!("density L1 ({name})"), gamma, trunc, dev, DENSITY_L1_TOL));
    }

    Ok(SuiteReport {
        gamma,
        n_max: trunc.n_max,
        buffer: trunc.buffer,
        checks,
        notices,
    })
}
