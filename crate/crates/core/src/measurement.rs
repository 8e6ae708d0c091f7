//! Outcome statistics of the Naimark-extended measurement.
//!
//! The network output quadratures are
//!
//! ```text
//! Q1 = (q1 + gamma q2 + kappa q3)/sqrt2,   P2 = (p1 - gamma p2 - kappa p3)/sqrt2
//! ```
//!
//! so an outcome `tau = Q1 + i P2` is `z1 + gamma z2^* + kappa z3^*` in terms of
//! the phase-space variables `zk = (qk + i pk)/sqrt2` of the input modes. The
//! moment generating function `Xi(l) = Tr[rho exp(l T^dag - l^* T)]` factorizes
//! into `chi1(l) chi2(-gamma l^*) chi3(-kappa l^*)`, and the outcome density is
//!
//! ```text
//! K(x, y) = (1/pi^2) int du dv exp(2i(u y - v x)) Xi(u + iv).
//! ```

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{convolve_valid, invert_characteristic, ExtendedGrid, GridSpec, OutcomeGrid};
use crate::network::{check_canonical_gamma, kappa};
use crate::states::{char_fn, quad_stats, wigner, QuadStats, StatePrep};

/// Mass tolerance for outcome grids.
pub const MASS_TOL: f64 = 1e-3;

/// Half-width, in predicted standard deviations, the grid must cover around
/// the predicted mean.
pub const COVERAGE_SIGMAS: f64 = 3.0;

/// Half-width of automatically chosen grids.
pub const AUTO_SIGMAS: f64 = 6.0;

pub const AUTO_POINTS: usize = 256;

const ANCILLA_MEAN_TOL: f64 = 1e-12;

/// Smallest gamma accepted by the Wigner-convolution path.
pub const MIN_CONVOLUTION_GAMMA: f64 = 1e-3;

/// Product preparation `rho1 (x) rho2 (x) sigma` of modes 1, 2 and the ancilla.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Preparation {
    rho1: StatePrep,
    rho2: StatePrep,
    sigma: StatePrep,
}

impl Preparation {
    /// Rejects ancilla states with non-zero quadrature means, which would bias
    /// the first moments of the outcome.
    pub fn new(rho1: StatePrep, rho2: StatePrep, sigma: StatePrep) -> Result<Self> {
        let s = quad_stats(&sigma);
        if s.mean_q.abs() > ANCILLA_MEAN_TOL || s.mean_p.abs() > ANCILLA_MEAN_TOL {
            return Err(Error::AncillaMean {
                mean_q: s.mean_q,
                mean_p: s.mean_p,
            });
        }
        Ok(Preparation { rho1, rho2, sigma })
    }

    pub fn vacuum() -> Self {
        Preparation {
            rho1: StatePrep::Vacuum,
            rho2: StatePrep::Vacuum,
            sigma: StatePrep::Vacuum,
        }
    }

    /// `rho1` on mode 1 with both other modes in the vacuum.
    pub fn signal_only(rho1: StatePrep) -> Self {
        Preparation {
            rho1,
            rho2: StatePrep::Vacuum,
            sigma: StatePrep::Vacuum,
        }
    }

    pub fn rho1(&self) -> &StatePrep {
        &self.rho1
    }

    pub fn rho2(&self) -> &StatePrep {
        &self.rho2
    }

    pub fn sigma(&self) -> &StatePrep {
        &self.sigma
    }
}

/// `Xi(l) = chi1(l) chi2(-gamma l^*) chi3(-kappa l^*)`.
pub fn moment_generating_fn(prep: &Preparation, gamma: f64, lambda: Complex64) -> Result<Complex64> {
    check_canonical_gamma(gamma)?;
    Ok(mgf_unchecked(prep, gamma, kappa(gamma), lambda))
}

fn mgf_unchecked(prep: &Preparation, gamma: f64, kappa: f64, lambda: Complex64) -> Complex64 {
    let conj = lambda.conj();
    char_fn(&prep.rho1, lambda) * char_fn(&prep.rho2, -gamma * conj) * char_fn(&prep.sigma, -kappa * conj)
}

/// Predicted first and second moments of `(Q1, P2)` and of the intrinsic
/// quadratures `X = (q1 + gamma q2)/sqrt2`, `Y = (p1 - gamma p2)/sqrt2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredictedMoments {
    pub gamma: f64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub cov_xy: f64,
    /// `(1 - gamma^2) <q3^2> / 2`.
    pub added_q: f64,
    /// `(1 - gamma^2) <p3^2> / 2`.
    pub added_p: f64,
    /// `-(1 - gamma^2) <{q3, p3}>/4`.
    pub added_cov: f64,
    pub var_q1: f64,
    pub var_p2: f64,
    pub cov_q1p2: f64,
}

pub fn predicted_moments(prep: &Preparation, gamma: f64) -> Result<PredictedMoments> {
    check_canonical_gamma(gamma)?;
    let (s1, s2, s3) = (quad_stats(&prep.rho1), quad_stats(&prep.rho2), quad_stats(&prep.sigma));
    let g2 = gamma * gamma;
    let k2 = 1.0 - g2;
    let mean_x = (s1.mean_q + gamma * s2.mean_q) / SQRT_2;
    let mean_y = (s1.mean_p - gamma * s2.mean_p) / SQRT_2;
    let var_x = 0.5 * (s1.var_q + g2 * s2.var_q);
    let var_y = 0.5 * (s1.var_p + g2 * s2.var_p);
    let cov_xy = 0.5 * (s1.cov_qp - g2 * s2.cov_qp);
    // sigma has zero mean, so its central moments are the raw ones.
    let added_q = 0.5 * k2 * s3.var_q;
    let added_p = 0.5 * k2 * s3.var_p;
    let added_cov = -0.5 * k2 * s3.cov_qp;
    Ok(PredictedMoments {
        gamma,
        mean_x,
        mean_y,
        var_x,
        var_y,
        cov_xy,
        added_q,
        added_p,
        added_cov,
        var_q1: var_x + added_q,
        var_p2: var_y + added_p,
        cov_q1p2: cov_xy + added_cov,
    })
}

/// Measured means, variances and covariance of `(Q1, P2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomeMoments {
    pub mean_q1: f64,
    pub mean_p2: f64,
    pub var_q1: f64,
    pub var_p2: f64,
    pub cov_q1p2: f64,
}

impl OutcomeMoments {
    pub fn from_samples(samples: &[Complex64]) -> Self {
        let n = samples.len() as f64;
        let mean: Complex64 = samples.iter().sum::<Complex64>() / n;
        let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
        for s in samples {
            let d = s - mean;
            vx += d.re * d.re;
            vy += d.im * d.im;
            cxy += d.re * d.im;
        }
        OutcomeMoments {
            mean_q1: mean.re,
            mean_p2: mean.im,
            var_q1: vx / n,
            var_p2: vy / n,
            cov_q1p2: cxy / n,
        }
    }
}

/// Predicted moments alongside measured ones from a grid and, optionally,
/// from samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub predicted: PredictedMoments,
    pub measured: Option<OutcomeMoments>,
    pub sampled: Option<OutcomeMoments>,
}

impl MomentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Default grid: predicted mean +- 6 sigma per coordinate, 256 x 256.
pub fn auto_grid(prep: &Preparation, gamma: f64) -> Result<GridSpec> {
    let m = predicted_moments(prep, gamma)?;
    let (sx, sy) = (m.var_q1.sqrt(), m.var_p2.sqrt());
    GridSpec::new(
        m.mean_x - AUTO_SIGMAS * sx,
        m.mean_x + AUTO_SIGMAS * sx,
        m.mean_y - AUTO_SIGMAS * sy,
        m.mean_y + AUTO_SIGMAS * sy,
        AUTO_POINTS,
        AUTO_POINTS,
    )
}

fn check_coverage(spec: &GridSpec, m: &PredictedMoments) -> Result<()> {
    let (sx, sy) = (m.var_q1.sqrt(), m.var_p2.sqrt());
    let covered = spec.x_min <= m.mean_x - COVERAGE_SIGMAS * sx
        && spec.x_max >= m.mean_x + COVERAGE_SIGMAS * sx
        && spec.y_min <= m.mean_y - COVERAGE_SIGMAS * sy
        && spec.y_max >= m.mean_y + COVERAGE_SIGMAS * sy;
    if covered {
        Ok(())
    } else {
        Err(Error::Coverage {
            x_min: m.mean_x - AUTO_SIGMAS * sx,
            x_max: m.mean_x + AUTO_SIGMAS * sx,
            y_min: m.mean_y - AUTO_SIGMAS * sy,
            y_max: m.mean_y + AUTO_SIGMAS * sy,
        })
    }
}

/// Outcome density `K(tau)` by 2-D FFT inversion of `Xi`.
pub fn outcome_density(prep: &Preparation, gamma: f64, spec: &GridSpec) -> Result<OutcomeGrid> {
    spec.validate()?;
    let predicted = predicted_moments(prep, gamma)?;
    check_coverage(spec, &predicted)?;
    let k = kappa(gamma);
    // Xi(u + iv) = E[exp(2i(vQ - uP))]; matching exp(-i(wx Q + wy P)) gives
    // u = wy/2, v = -wx/2.
    let (values, imag) = invert_characteristic(spec, |wx, wy| {
        mgf_unchecked(prep, gamma, k, Complex64::new(0.5 * wy, -0.5 * wx))
    });
    let grid = OutcomeGrid::from_values(*spec, values, imag);
    grid.check_mass(MASS_TOL)?;
    Ok(grid)
}

/// Discrete kernel `g(w) = W(w^*/s)/s^2`, the density of `s z^*` for `z`
/// distributed by the Wigner function of `prep`. Normalized to unit discrete
/// mass. Returns the samples and the half-sizes in nodes.
fn scaled_wigner_kernel(prep: &StatePrep, s: f64, dx: f64, dy: f64) -> (Vec<f64>, usize, usize) {
    let st: QuadStats = quad_stats(prep);
    let (cx, cy) = (s * st.mean_q / SQRT_2, -s * st.mean_p / SQRT_2);
    let sigma = s * (st.var_q.max(st.var_p) / 2.0).sqrt();
    let hx = ((cx.abs() + 10.0 * sigma) / dx).ceil() as usize;
    let hy = ((cy.abs() + 10.0 * sigma) / dy).ceil() as usize;
    let (nx, ny) = (2 * hx + 1, 2 * hy + 1);
    let mut k = vec![0.0; nx * ny];
    for a in 0..nx {
        let wx = (a as f64 - hx as f64) * dx;
        for b in 0..ny {
            let wy = (b as f64 - hy as f64) * dy;
            k[a * ny + b] = wigner(prep, Complex64::new(wx / s, -wy / s)) / (s * s);
        }
    }
    let total: f64 = k.iter().sum::<f64>() * dx * dy;
    for v in k.iter_mut() {
        *v *= dx * dy / total;
    }
    (k, hx, hy)
}

/// `H = W1 * g2` sampled on the grid grown by `(ex, ey)` nodes per side.
fn h_extended(
    rho1: &StatePrep,
    rho2: &StatePrep,
    gamma: f64,
    spec: &GridSpec,
    ex: usize,
    ey: usize,
) -> Result<(ExtendedGrid, Vec<f64>)> {
    check_canonical_gamma(gamma)?;
    if gamma < MIN_CONVOLUTION_GAMMA {
        return Err(Error::RescalingOverflow { gamma });
    }
    let (dx, dy) = (spec.dx(), spec.dy());
    let (k2, hx, hy) = scaled_wigner_kernel(rho2, gamma, dx, dy);
    let src = spec.extended(ex + hx, ey + hy);
    let w1 = src.sample(|x, y| wigner(rho1, Complex64::new(x, y)));
    let h = convolve_valid(&w1, src.nx, src.ny, &k2, 2 * hx + 1, 2 * hy + 1);
    Ok((spec.extended(ex, ey), h))
}

/// `H(tau) = W1 * (W2(tau^*/gamma)/gamma^2)`: the outcome density before
/// the ancilla contribution. Not clamped; `H` may be negative for
/// non-classical inputs.
pub fn h_density(rho1: &StatePrep, rho2: &StatePrep, gamma: f64, spec: &GridSpec) -> Result<OutcomeGrid> {
    spec.validate()?;
    let (_, values) = h_extended(rho1, rho2, gamma, spec, 0, 0)?;
    let pre_clamp_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(OutcomeGrid {
        spec: *spec,
        density: values,
        pre_clamp_min,
        imag_residual: 0.0,
    })
}

/// `K = H * (W3(tau^*/kappa)/kappa^2)` by direct Wigner convolutions, the
/// independent counterpart of [`outcome_density`].
pub fn convolution_density(prep: &Preparation, gamma: f64, spec: &GridSpec) -> Result<OutcomeGrid> {
    spec.validate()?;
    let k = kappa(gamma);
    check_canonical_gamma(gamma)?;
    let values = if k == 0.0 {
        h_extended(&prep.rho1, &prep.rho2, gamma, spec, 0, 0)?.1
    } else {
        let (k3, hx, hy) = scaled_wigner_kernel(&prep.sigma, k, spec.dx(), spec.dy());
        let (ext, h) = h_extended(&prep.rho1, &prep.rho2, gamma, spec, hx, hy)?;
        convolve_valid(&h, ext.nx, ext.ny, &k3, 2 * hx + 1, 2 * hy + 1)
    };
    Ok(OutcomeGrid::from_values(*spec, values, 0.0))
}

/// Means, variances and covariance by trapezoid integration of the grid.
pub fn empirical_moments(grid: &OutcomeGrid) -> Result<OutcomeMoments> {
    let mass = grid.check_mass(MASS_TOL)?;
    let mean_x = grid.integrate(|x, _| x) / mass;
    let mean_y = grid.integrate(|_, y| y) / mass;
    let var_x = grid.integrate(|x, _| (x - mean_x).powi(2)) / mass;
    let var_y = grid.integrate(|_, y| (y - mean_y).powi(2)) / mass;
    let cov = grid.integrate(|x, y| (x - mean_x) * (y - mean_y)) / mass;
    Ok(OutcomeMoments {
        mean_q1: mean_x,
        mean_p2: mean_y,
        var_q1: var_x,
        var_p2: var_y,
        cov_q1p2: cov,
    })
}

/// I.i.d. outcomes drawn by inverse CDF over grid cells, each cell centered
/// on a node, followed by uniform jitter within the cell.
pub fn sample_outcomes(grid: &OutcomeGrid, n: usize, seed: u64) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(Error::domain("sample count", "n must be at least 1"));
    }
    let spec = &grid.spec;
    let mut cdf = Vec::with_capacity(grid.density.len());
    let mut total = 0.0;
    for d in &grid.density {
        total += d.max(0.0);
        cdf.push(total);
    }
    if !(total > 0.0) {
        return Err(Error::Mass { mass: 0.0, tol: MASS_TOL });
    }
    let (dx, dy) = (spec.dx(), spec.dy());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|_| {
            let u = rng.random::<f64>() * total;
            let idx = cdf.partition_point(|c| *c <= u).min(cdf.len() - 1);
            let (i, j) = (idx / spec.ny, idx % spec.ny);
            let jx = rng.random::<f64>() - 0.5;
            let jy = rng.random::<f64>() - 0.5;
            Complex64::new(spec.x(i) + jx * dx, spec.y(j) + jy * dy)
        })
        .collect();
    Ok(samples)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseExcessReport {
    pub gamma: f64,
    /// `var(Q1) - var(X)`.
    pub excess_q: f64,
    /// `var(P2) - var(Y)`.
    pub excess_p: f64,
    pub strictly_positive: bool,
    /// `var(Q1) var(P2)`.
    pub measured_product: f64,
    /// `var(X) var(Y)`.
    pub intrinsic_product: f64,
    /// `|<[X, Y]>|^2 = ((1 - gamma^2)/2)^2`, the joint-measurement lower bound
    /// on `var(Q1) var(P2)`.
    pub joint_bound: f64,
    pub satisfies_joint_bound: bool,
}

pub fn noise_excess_check(prep: &Preparation, gamma: f64) -> Result<NoiseExcessReport> {
    let m = predicted_moments(prep, gamma)?;
    let excess_q = m.var_q1 - m.var_x;
    let excess_p = m.var_p2 - m.var_y;
    let commutator = 0.5 * (1.0 - gamma * gamma);
    let measured_product = m.var_q1 * m.var_p2;
    let joint_bound = commutator * commutator;
    Ok(NoiseExcessReport {
        gamma,
        excess_q,
        excess_p,
        strictly_positive: excess_q > 0.0 && excess_p > 0.0,
        measured_product,
        intrinsic_product: m.var_x * m.var_y,
        joint_bound,
        satisfies_joint_bound: measured_product >= joint_bound,
    })
}
