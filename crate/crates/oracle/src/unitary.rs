//! The network unitary on the truncated three-mode space.
//!
//! Each two-mode stage is `B_jk(theta) = exp(theta (a_j^dag a_k - a_j a_k^dag))`,
//! whose Heisenberg action is the real rotation block of
//! [`naimark::network::su2_block`]. The generator conserves `n_j + n_k`, so
//! it is exponentiated block by block; within a block the truncated generator
//! coincides with the untruncated one whenever `n_j + n_k <= n_max`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use naimark::network::{build_mixing_matrix, decompose, Stage, Su2Plan};

use crate::error::{Error, Result};
use crate::fock::{total_number_safe, FockOperator, TruncationSpec};

pub const MODES: usize = 3;

/// Tolerance of the Heisenberg-action check.
pub const HEISENBERG_TOL: f64 = 1e-8;

pub const UNITARITY_TOL: f64 = 1e-10;

/// `exp(theta (a_j^dag a_k - a_j a_k^dag))` on the three-mode space.
pub fn two_mode_stage(theta: f64, j: usize, k: usize, n_max: usize) -> Result<FockOperator> {
    if j == k || !(1..=MODES).contains(&j) || !(1..=MODES).contains(&k) {
        return Err(Error::Domain(format!("invalid mode pair ({j}, {k})")));
    }
    let d = n_max + 1;
    let mut triplets = Vec::new();
    let probe = FockOperator::zeros(n_max, MODES);
    let spectator = 6 - j - k;
    for total in 0..=2 * n_max {
        // block states (n_j, n_k) with n_j + n_k = total
        let lo = total.saturating_sub(n_max);
        let hi = total.min(n_max);
        let size = hi - lo + 1;
        let mut gen = DMatrix::<f64>::zeros(size, size);
        for (col, nj) in (lo..=hi).enumerate() {
            let nk = total - nj;
            // a_j^dag a_k |nj, nk> = sqrt((nj + 1) nk) |nj + 1, nk - 1>
            if nj < hi {
                gen[(col + 1, col)] += theta * (((nj + 1) * nk) as f64).sqrt();
            }
            // a_j a_k^dag |nj, nk> = sqrt(nj (nk + 1)) |nj - 1, nk + 1>
            if nj > lo {
                gen[(col - 1, col)] -= theta * ((nj * (nk + 1)) as f64).sqrt();
            }
        }
        let block = gen.exp();
        for s in 0..d {
            let index = |nj: usize| {
                let mut occ = [0; MODES];
                occ[j - 1] = nj;
                occ[k - 1] = total - nj;
                occ[spectator - 1] = s;
                probe.index(&occ)
            };
            for (r, nr) in (lo..=hi).enumerate() {
                for (c, nc) in (lo..=hi).enumerate() {
                    let v = block[(r, c)];
                    if v != 0.0 {
                        triplets.push((index(nr), index(nc), Complex64::new(v, 0.0)));
                    }
                }
            }
        }
    }
    Ok(FockOperator::from_triplets(n_max, MODES, triplets))
}

/// `exp(i pi N_mode)`.
pub fn pi_rotation(mode: usize, n_max: usize) -> Result<FockOperator> {
    if !(1..=MODES).contains(&mode) {
        return Err(Error::Domain(format!("invalid mode {mode}")));
    }
    Ok(FockOperator::diagonal(n_max, MODES, |occ| {
        Complex64::new(if occ[mode - 1] % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
    }))
}

/// Product of the plan's stages in its recorded order.
pub fn plan_unitary(plan: &Su2Plan, n_max: usize) -> Result<FockOperator> {
    let mut u = FockOperator::identity(n_max, MODES);
    for stage in &plan.ordering {
        let s = match *stage {
            Stage::PiRotation { mode } => pi_rotation(mode, n_max)?,
            Stage::TwoMode { j, k } => two_mode_stage(plan.angle(j, k), j, k, n_max)?,
        };
        u = u.mul(&s);
    }
    Ok(u)
}

/// Largest deviation of `U^dag a_k U` from `sum_l M_kl a_l` over `k`, on basis
/// states of total photon number at most `n_max - buffer`.
pub fn heisenberg_deviation(u: &FockOperator, gamma: f64, trunc: &TruncationSpec) -> Result<f64> {
    let m = build_mixing_matrix(gamma)?;
    let n = u.n_max();
    let ud = u.adjoint();
    let ladders = (1..=MODES)
        .map(|k| FockOperator::annihilation(n, MODES, k))
        .collect::<Result<Vec<_>>>()?;
    let safe = total_number_safe(trunc);
    let mut worst: f64 = 0.0;
    for k in 0..MODES {
        let lhs = ud.mul(&ladders[k]).mul(u);
        let mut rhs = FockOperator::zeros(n, MODES);
        for (l, a) in ladders.iter().enumerate() {
            rhs = rhs.add_scaled(a, m.entries[k][l]);
        }
        worst = worst.max(lhs.sub(&rhs).max_abs_on(&safe));
    }
    Ok(worst)
}

/// `max |U^dag U - 1|` over the whole truncated space.
pub fn unitarity_deviation(u: &FockOperator) -> f64 {
    u.adjoint()
        .mul(u)
        .sub(&FockOperator::identity(u.n_max(), u.modes()))
        .max_abs()
}

/// The network unitary for canonical `gamma`, checked against the mixing
/// matrix on the safe subspace.
pub fn build_unitary(gamma: f64, trunc: &TruncationSpec) -> Result<FockOperator> {
    let u = plan_unitary(&decompose(gamma)?, trunc.n_max)?;
    let dev = heisenberg_deviation(&u, gamma, trunc)?;
    if dev.is_nan() || dev > HEISENBERG_TOL {
        return Err(Error::Accuracy {
            check: "heisenberg",
            deviation: dev,
            tolerance: HEISENBERG_TOL,
        });
    }
    Ok(u)
}
