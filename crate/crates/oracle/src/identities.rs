//! Operator identities of `T = a1 + gamma a2^dag + kappa a3^dag` and the
//! relative number operator `N = N1 - N2 - N3`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use naimark::network::kappa;

use crate::error::{Error, Result};
use crate::fock::{per_mode_safe, FockOperator, TruncationSpec};
use crate::report::CheckReport;
use crate::unitary::MODES;

pub const IDENTITY_TOL: f64 = 1e-8;

pub const POLAR_ISOMETRY_TOL: f64 = 1e-6;

/// Eigenvalues of `T^dag T` above this fraction of the largest span the
/// range of `|T|`.
pub const RANGE_REL: f64 = 1e-9;

/// Eigenvalues below this fraction of the largest are treated as kernel.
/// Anything in between makes the polar check ambiguous.
pub const KERNEL_REL: f64 = 1e-13;

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Domain(format!("gamma = {gamma} outside (0, 1]")));
    }
    Ok(())
}

/// `a1 + gamma a2^dag + kappa a3^dag` on the truncated three-mode space.
pub fn operator_t(gamma: f64, trunc: &TruncationSpec) -> Result<FockOperator> {
    check_gamma(gamma)?;
    let n = trunc.n_max;
    let a1 = FockOperator::annihilation(n, MODES, 1)?;
    let a2d = FockOperator::creation(n, MODES, 2)?;
    let a3d = FockOperator::creation(n, MODES, 3)?;
    let t = a1.add_scaled(&a2d, Complex64::new(gamma, 0.0));
    let k = kappa(gamma);
    Ok(if k == 0.0 {
        t
    } else {
        t.add_scaled(&a3d, Complex64::new(k, 0.0))
    })
}

/// `N1 - N2 - N3`.
pub fn relative_number(trunc: &TruncationSpec) -> FockOperator {
    FockOperator::diagonal(trunc.n_max, MODES, |o| Complex64::new(o[0] as f64 - o[1] as f64 - o[2] as f64, 0.0))
}

/// `max |[T, T^dag]|` on the safe subspace.
pub fn normality_check(gamma: f64, trunc: &TruncationSpec) -> Result<CheckReport> {
    let t = operator_t(gamma, trunc)?;
    let dev = t.commutator(&t.adjoint()).max_abs_on(per_mode_safe(trunc));
    Ok(CheckReport::new("normality [T, T^dag] = 0", gamma, trunc, dev, IDENTITY_TOL))
}

/// `max |[T, N] - T|` on the safe subspace.
pub fn shift_check(gamma: f64, trunc: &TruncationSpec) -> Result<CheckReport> {
    let t = operator_t(gamma, trunc)?;
    let n = relative_number(trunc);
    let dev = t.commutator(&n).sub(&t).max_abs_on(per_mode_safe(trunc));
    Ok(CheckReport::new("[T, N] = T", gamma, trunc, dev, IDENTITY_TOL))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarSummary {
    /// `max |V^dag V - P|` with `P` the projector onto the range of `|T|`.
    pub isometry: CheckReport,
    /// `max |V N - N V - V|` on the safe subspace.
    pub shift: CheckReport,
    /// `max |(V^dag V + V V^dag)/2 - 1|` on the safe subspace, i.e. the
    /// defect of `C^2 + S^2 = 1` for `C = (V + V^dag)/2`, `S = (V - V^dag)/2i`.
    /// Informational: the truncated `T` has a kernel, so `V` is only a partial
    /// isometry and this is not expected to vanish.
    pub cos_sin_defect: f64,
    pub rank: usize,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PolarOutcome {
    Checked(PolarSummary),
    Skipped { notice: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelativeNumberReport {
    pub shift: CheckReport,
    pub polar: PolarOutcome,
}

impl RelativeNumberReport {
    pub fn pass(&self) -> bool {
        self.shift.pass
            && match &self.polar {
                PolarOutcome::Checked(p) => p.isometry.pass && p.shift.pass,
                PolarOutcome::Skipped { .. } => true,
            }
    }
}

/// `[T, N] = T` and the polar decomposition `T = V |T|`.
pub fn relative_number_checks(gamma: f64, trunc: &TruncationSpec) -> Result<RelativeNumberReport> {
    let shift = shift_check(gamma, trunc)?;
    let t = operator_t(gamma, trunc)?;
    let polar = polar_outcome(&t, gamma, trunc);
    Ok(RelativeNumberReport { shift, polar })
}

fn polar_outcome(t: &FockOperator, gamma: f64, trunc: &TruncationSpec) -> PolarOutcome {
    // T maps the sector N = k to N = k - 1, so T^dag T is block diagonal.
    let mut sectors: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for i in 0..t.dim() {
        let o = t.occupations(i);
        sectors.entry(o[0] as i64 - o[1] as i64 - o[2] as i64).or_default().push(i);
    }
    let td = t.adjoint();
    let ttt = td.mul(t);
    let mut eig = Vec::new();
    for idx in sectors.values() {
        let block = DMatrix::from_fn(idx.len(), idx.len(), |r, c| ttt.get(idx[r], idx[c]).re);
        eig.push(SymmetricEigen::new(block));
    }
    let lmax = eig.iter().flat_map(|e| e.eigenvalues.iter().copied()).fold(0.0, f64::max);
    let ambiguous = eig
        .iter()
        .flat_map(|e| e.eigenvalues.iter().copied())
        .filter(|&l| l > KERNEL_REL * lmax && l <= RANGE_REL * lmax)
        .count();
    if ambiguous > 0 || lmax == 0.0 {
        return PolarOutcome::Skipped {
            notice: format!(
                "|T| numerically singular: {ambiguous} eigenvalues of T^dag T between {KERNEL_REL:e} and {RANGE_REL:e} of the largest; polar check skipped"
            ),
        };
    }

    let mut triplets = Vec::new();
    let mut iso_dev: f64 = 0.0;
    let mut rank = 0;
    for (idx, e) in sectors.values().zip(&eig) {
        let keep: Vec<usize> = (0..idx.len()).filter(|&c| e.eigenvalues[c] > RANGE_REL * lmax).collect();
        rank += keep.len();
        if keep.is_empty() {
            continue;
        }
        let q = DMatrix::from_fn(idx.len(), keep.len(), |r, c| e.eigenvectors[(r, keep[c])]);
        let inv_sqrt = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            keep.len(),
            keep.iter().map(|&c| 1.0 / e.eigenvalues[c].sqrt()),
        ));
        let rows = target_rows(&td, idx);
        let t_block = DMatrix::from_fn(rows.len(), idx.len(), |r, c| t.get(rows[r], idx[c]).re);
        let v_block = &t_block * &q * inv_sqrt * q.transpose();
        let proj = &q * q.transpose();
        let gram = v_block.transpose() * &v_block;
        iso_dev = iso_dev.max((gram - proj).amax());
        for r in 0..rows.len() {
            for c in 0..idx.len() {
                let v = v_block[(r, c)];
                if v != 0.0 {
                    triplets.push((rows[r], idx[c], Complex64::new(v, 0.0)));
                }
            }
        }
    }
    let v = FockOperator::from_triplets(t.n_max(), MODES, triplets);
    let n = relative_number(trunc);
    let safe = per_mode_safe(trunc);
    let shift_dev = v.mul(&n).sub(&n.mul(&v)).sub(&v).max_abs_on(&safe);
    let vd = v.adjoint();
    let cs = vd
        .mul(&v)
        .add(&v.mul(&vd))
        .scale(Complex64::new(0.5, 0.0))
        .sub(&FockOperator::identity(t.n_max(), MODES))
        .max_abs_on(&safe);
    PolarOutcome::Checked(PolarSummary {
        isometry: CheckReport::new("polar V^dag V = P_range", gamma, trunc, iso_dev, POLAR_ISOMETRY_TOL),
        shift: CheckReport::new("polar [V, N] = V", gamma, trunc, shift_dev, IDENTITY_TOL),
        cos_sin_defect: cs,
        rank,
        dim: t.dim(),
    })
}

/// Row indices reached by `T` from the given columns, sorted. Takes `T^dag`.
fn target_rows(td: &FockOperator, cols: &[usize]) -> Vec<usize> {
    let mut rows: Vec<usize> = cols.iter().flat_map(|&c| td.row(c).iter().map(|e| e.0)).collect();
    rows.sort_unstable();
    rows.dedup();
    rows
}
