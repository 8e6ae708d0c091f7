//! Failure of the eigenstates of `Z = a1 + gamma a2^dag` to resolve the
//! identity.
//!
//! With `|gamma>> = sqrt(1 - gamma^2) sum_n gamma^n |n, n>` and
//! `|z>>_gamma = D1(z) |gamma>>`, completeness of displaced number states gives
//!
//! ```text
//! int d^2z/pi |z>>_gamma <<z| = (1 - gamma^2) 1 (x) gamma^(2 N2).
//! ```
//!
//! The integral is evaluated with Gauss-Legendre nodes in `t = |z|^2` times
//! uniform angular nodes.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::{displacement_elements, gauss_legendre};

pub const DEFECT_TOL: f64 = 1e-4;

/// Largest tolerated `|1 - int d^2z/pi |<j|D(z)|n>|^2|`.
pub const MASS_DEFICIT_BOUND: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec {
    /// Disk radius squared.
    pub radius_sq: f64,
    pub radial: usize,
    pub angular: usize,
}

impl QuadratureSpec {
    /// Radius well past where displaced number states up to `n_max` have
    /// support, with enough angular nodes to integrate the phases exactly.
    pub fn for_cutoff(n_max: usize) -> Self {
        let n = n_max as f64;
        QuadratureSpec {
            radius_sq: 2.0 * n + 10.0 * (2.0 * n + 1.0).sqrt() + 20.0,
            radial: 200,
            angular: 4 * n_max + 8,
        }
    }
}

/// Integrated operator on the two-mode space `n1, n2 <= n_max`, row-major
/// over `(n1, n2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectMatrix {
    pub gamma: f64,
    pub n_max: usize,
    pub entries: Vec<Complex64>,
    /// Worst displaced-state mass deficit of the quadrature.
    pub mass_deficit: f64,
}

impl DefectMatrix {
    pub fn dim(&self) -> usize {
        (self.n_max + 1) * (self.n_max + 1)
    }

    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim() + col]
    }

    /// `(1 - gamma^2) gamma^(2 n2)` on the diagonal.
    pub fn expected(&self, row: usize, col: usize) -> f64 {
        if row != col {
            return 0.0;
        }
        let n2 = row % (self.n_max + 1);
        (1.0 - self.gamma * self.gamma) * self.gamma.powi(2 * n2 as i32)
    }

    pub fn max_deviation(&self) -> f64 {
        let d = self.dim();
        (0..d * d)
            .map(|k| (self.entries[k] - self.expected(k / d, k % d)).norm())
            .fold(0.0, f64::max)
    }
}

/// `int d^2z/pi |z>>_gamma <<z|` over `|z|^2 <= quad.radius_sq`.
pub fn identity_defect(gamma: f64, n_max: usize, quad: &QuadratureSpec) -> Result<DefectMatrix> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Domain(format!("gamma = {gamma} outside (0, 1)")));
    }
    if quad.radial == 0 || quad.angular == 0 || !(quad.radius_sq > 0.0) {
        return Err(Error::Domain(format!("degenerate quadrature {quad:?}")));
    }
    let d = n_max + 1;
    let dim = d * d;
    let (ts, wts) = gauss_legendre(quad.radial, 0.0, quad.radius_sq);
    // d^2z/pi = dt dphi / (2 pi), uniform phi weights 2 pi / M
    let nodes: Vec<(Complex64, f64)> = ts
        .iter()
        .zip(&wts)
        .flat_map(|(&t, &w)| {
            (0..quad.angular).map(move |k| {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / quad.angular as f64;
                (Complex64::from_polar(t.sqrt(), phi), w / quad.angular as f64)
            })
        })
        .collect();

    let (acc, mass) = nodes
        .par_iter()
        .fold(
            || (vec![Complex64::new(0.0, 0.0); dim * dim], vec![0.0; dim]),
            |(mut acc, mut mass), &(z, w)| {
                // f[(j1, j2)] = <j1|D(z)|j2>
                let f = displacement_elements(n_max, z);
                for (a, fa) in f.iter().enumerate() {
                    mass[a] += w * fa.norm_sqr();
                    let wa = fa * w;
                    let row = &mut acc[a * dim..(a + 1) * dim];
                    for (slot, fb) in row.iter_mut().zip(&f) {
                        *slot += wa * fb.conj();
                    }
                }
                (acc, mass)
            },
        )
        .reduce(
            || (vec![Complex64::new(0.0, 0.0); dim * dim], vec![0.0; dim]),
            |(mut a, mut ma), (b, mb)| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                ma.iter_mut().zip(&mb).for_each(|(x, y)| *x += y);
                (a, ma)
            },
        );

    let deficit = mass.iter().map(|m| (1.0 - m).abs()).fold(0.0, f64::max);
    if deficit > MASS_DEFICIT_BOUND {
        return Err(Error::MassDeficit {
            radius_sq: quad.radius_sq,
            deficit,
            bound: MASS_DEFICIT_BOUND,
        });
    }
    let g2 = gamma * gamma;
    let entries = acc
        .into_iter()
        .enumerate()
        .map(|(k, v)| {
            let (j2, k2) = ((k / dim) % d, (k % dim) % d);
            v * (1.0 - g2) * gamma.powi((j2 + k2) as i32)
        })
        .collect();
    Ok(DefectMatrix {
        gamma,
        n_max,
        entries,
        mass_deficit: deficit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_geometric_diagonal() {
        let m = identity_defect(0.5, 4, &QuadratureSpec::for_cutoff(4)).unwrap();
        assert!(m.max_deviation() < 1e-10, "{}", m.max_deviation());
        assert!((m.at(0, 0).re - 0.75).abs() < 1e-10);
    }

    #[test]
    fn small_disk_is_rejected() {
        let q = QuadratureSpec {
            radius_sq: 4.0,
            ..QuadratureSpec::for_cutoff(4)
        };
        assert!(matches!(identity_defect(0.5, 4, &q), Err(Error::MassDeficit { .. })));
    }

    #[test]
    fn domain() {
        let q = QuadratureSpec::for_cutoff(2);
        assert!(identity_defect(1.0, 2, &q).is_err());
        assert!(identity_defect(0.0, 2, &q).is_err());
    }

    #[test]
    fn defect_vanishes_as_gamma_approaches_one() {
        let q = QuadratureSpec::for_cutoff(3);
        let near = identity_defect(0.999, 3, &q).unwrap();
        for r in 0..near.dim() {
            assert!(near.at(r, r).re < 2.1e-3);
        }
    }
}
