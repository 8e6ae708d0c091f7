//! Single-mode preparations as truncated density matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use naimark::states::StatePrep;

use crate::error::{Error, Result};
use crate::special::displacement_elements;

/// Photon mass allowed beyond the cutoff.
pub const REPRESENTABILITY_BOUND: f64 = 1e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Density matrix of one mode restricted to `n <= n_max`, row-major, not
/// renormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeDensity {
    pub n_max: usize,
    pub rho: Vec<Complex64>,
}

impl ModeDensity {
    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn at(&self, m: usize, n: usize) -> Complex64 {
        self.rho[m * self.dim() + n]
    }

    /// Photon-number probabilities `p_n`, `n <= n_max`.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.at(n, n).re).collect()
    }

    /// Mass beyond the cutoff.
    pub fn tail(&self) -> f64 {
        (1.0 - self.populations().iter().sum::<f64>()).max(0.0)
    }
}

/// Truncated density matrix of `prep`.
pub fn mode_density(prep: &StatePrep, n_max: usize) -> Result<ModeDensity> {
    let d = n_max + 1;
    let rho = match prep {
        StatePrep::Vacuum => {
            let mut rho = vec![ZERO; d * d];
            rho[0] = Complex64::new(1.0, 0.0);
            rho
        }
        StatePrep::Coherent(alpha) => {
            let amp = coherent_amplitudes(*alpha, n_max);
            outer(&amp, &amp)
        }
        StatePrep::NumberDiagonal(w) => {
            let mut rho = vec![ZERO; d * d];
            for (n, p) in w.as_slice().iter().enumerate().take(d) {
                rho[n * d + n] = Complex64::new(*p, 0.0);
            }
            rho
        }
        StatePrep::Gaussian(g) => gaussian_density(&g.stats(), n_max)?,
    };
    Ok(ModeDensity { n_max, rho })
}

fn coherent_amplitudes(alpha: Complex64, n_max: usize) -> Vec<Complex64> {
    let mut amp = Vec::with_capacity(n_max + 1);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..=n_max {
        amp.push(c);
        c *= alpha / ((n + 1) as f64).sqrt();
    }
    amp
}

fn outer(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y.conj())).collect()
}

/// `D R S rho_th S^dag R^dag D^dag` built in a larger space and cut down.
///
/// With `V = R diag(nu e^{-2r}, nu e^{2r}) R^T` the thermal state has
/// symplectic eigenvalue `nu`, the squeezer is `exp(r (a^2 - a^dag^2)/2)`
/// and the rotation is `exp(i theta N)`.
fn gaussian_density(s: &naimark::states::QuadStats, n_max: usize) -> Result<Vec<Complex64>> {
    let (vq, vp, c) = (s.var_q, s.var_p, s.cov_qp);
    let half_tr = 0.5 * (vq + vp);
    let disc = (0.25 * (vq - vp).powi(2) + c * c).sqrt();
    let (lmin, lmax) = (half_tr - disc, half_tr + disc);
    let nu = (lmin * lmax).sqrt();
    let r = 0.25 * (lmax / lmin).ln();
    // eigenvector of the smaller eigenvalue
    let theta = if c != 0.0 {
        (lmin - vq).atan2(c)
    } else if vq <= vp {
        0.0
    } else {
        std::f64::consts::FRAC_PI_2
    };
    let nbar = (nu - 0.5).max(0.0);
    let alpha = Complex64::new(s.mean_q, s.mean_p) / 2f64.sqrt();

    let mean_n = (nbar + 0.5) * (2.0 * r).cosh() - 0.5 + alpha.norm_sqr();
    let big = (n_max + 40).max((8.0 * mean_n + 20.0 * mean_n.sqrt() + 40.0) as usize);
    if big > 600 {
        return Err(Error::Domain(format!(
            "Gaussian preparation with mean photon number {mean_n:.3} is too large for the oracle"
        )));
    }
    let db = big + 1;

    // thermal populations
    let mut th = DMatrix::<Complex64>::zeros(db, db);
    let ratio = nbar / (nbar + 1.0);
    let mut p = 1.0 / (nbar + 1.0);
    for n in 0..db {
        th[(n, n)] = Complex64::new(p, 0.0);
        p *= ratio;
    }

    let mut gen = DMatrix::<f64>::zeros(db, db);
    for n in 0..db - 2 {
        // (a^2 - a^dag^2) r/2
        let v = 0.5 * r * (((n + 1) * (n + 2)) as f64).sqrt();
        gen[(n, n + 2)] += v;
        gen[(n + 2, n)] -= v;
    }
    let sq = gen.exp().map(|v| Complex64::new(v, 0.0));
    let rot = DMatrix::<Complex64>::from_fn(db, db, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, theta * i as f64)
        } else {
            ZERO
        }
    });
    let disp_elems = displacement_elements(big, alpha);
    let disp = DMatrix::<Complex64>::from_fn(db, db, |i, j| disp_elems[i * db + j]);
    let u = disp * rot * sq;
    let full = &u * th * u.adjoint();
    let d = n_max + 1;
    Ok((0..d * d).map(|k| full[(k / d, k % d)]).collect())
}

/// Short label used in representability errors.
pub fn label(prep: &StatePrep) -> String {
    match prep {
        StatePrep::Vacuum => "vacuum".into(),
        StatePrep::Coherent(a) => format!("coherent({}, {})", a.re, a.im),
        StatePrep::NumberDiagonal(w) => format!("number-diagonal(mean {:.4})", w.mean_number()),
        StatePrep::Gaussian(g) => {
            let s = g.stats();
            format!("gaussian({}, {}, {}, {}, {})", s.mean_q, s.mean_p, s.var_q, s.var_p, s.cov_qp)
        }
    }
}

/// Checks each mode's tail and the tail of the total photon number of the
/// product state. The network conserves the total number and is exact only
/// on states with `N1 + N2 + N3 <= n_max`.
pub fn check_representable(modes: &[(&StatePrep, &ModeDensity)], n_max: usize) -> Result<()> {
    for (prep, m) in modes {
        let tail = m.tail();
        if tail > REPRESENTABILITY_BOUND {
            return Err(Error::Representability {
                prep: label(prep),
                n_max,
                tail,
                bound: REPRESENTABILITY_BOUND,
            });
        }
    }
    let mut dist = vec![1.0];
    for (_, m) in modes {
        let p = m.populations();
        let mut next = vec![0.0; (dist.len() + p.len() - 1).min(n_max + 1)];
        for (i, a) in dist.iter().enumerate() {
            for (j, b) in p.iter().enumerate() {
                if i + j <= n_max {
                    next[i + j] += a * b;
                }
            }
        }
        dist = next;
    }
    let tail = (1.0 - dist.iter().sum::<f64>()).max(0.0);
    if tail > REPRESENTABILITY_BOUND {
        let names: Vec<String> = modes.iter().map(|(p, _)| label(p)).collect();
        return Err(Error::Representability {
            prep: format!("total photon number of [{}]", names.join(", ")),
            n_max,
            tail,
            bound: REPRESENTABILITY_BOUND,
        });
    }
    Ok(())
}
