//! Single-mode preparations.
//!
//! Quadratures follow `q = (a + a^dag)/sqrt2`, `p = i(a^dag - a)/sqrt2`, so
//! `[q, p] = i` and the vacuum variance is 1/2. The phase-space variable is
//! `z = (q + ip)/sqrt2`, the displacement is `D(l) = exp(l a^dag - l^* a)` and
//! the characteristic function is `chi(l) = Tr[rho D(l)]`. Wigner functions are
//! normalized to unit integral over `d^2 z = dx dy` and satisfy
//! `W(z) = (1/pi^2) int d^2l exp(l^* z - l z^*) chi(l)`.

use std::f64::consts::{FRAC_2_PI, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Tail mass tolerated when truncating a number-diagonal recipe.
pub const TAIL_BOUND: f64 = 1e-12;

const NORMALIZATION_TOL: f64 = 1e-12;

/// Photon-number weights `p_m`, non-negative and summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Weights(Vec<f64>);

impl Weights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidState("empty weight vector".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidState(format!("weight {w} is negative or not finite")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidState(format!("weights sum to {total}, not 1")));
        }
        Ok(Weights(weights))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn mean_number(&self) -> f64 {
        self.0.iter().enumerate().map(|(m, p)| m as f64 * p).sum()
    }
}

/// Gaussian single-mode state given by its quadrature moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianMoments {
    mean_q: f64,
    mean_p: f64,
    var_q: f64,
    var_p: f64,
    cov_qp: f64,
}

impl GaussianMoments {
    pub fn new(mean_q: f64, mean_p: f64, var_q: f64, var_p: f64, cov_qp: f64) -> Result<Self> {
        let all = [mean_q, mean_p, var_q, var_p, cov_qp];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidState("non-finite Gaussian moment".into()));
        }
        let det = var_q * var_p - cov_qp * cov_qp;
        if var_q <= 0.0 || var_p <= 0.0 || det <= 0.0 {
            return Err(Error::InvalidState(format!(
                "covariance [[{var_q}, {cov_qp}], [{cov_qp}, {var_p}]] is not positive definite"
            )));
        }
        if det < 0.25 - 1e-12 {
            return Err(Error::InvalidState(format!(
                "covariance determinant {det} violates the uncertainty bound 1/4"
            )));
        }
        Ok(GaussianMoments {
            mean_q,
            mean_p,
            var_q,
            var_p,
            cov_qp,
        })
    }

    pub fn stats(&self) -> QuadStats {
        QuadStats {
            mean_q: self.mean_q,
            mean_p: self.mean_p,
            var_q: self.var_q,
            var_p: self.var_p,
            cov_qp: self.cov_qp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum StatePrep {
    Vacuum,
    Coherent(Complex64),
    NumberDiagonal(Weights),
    Gaussian(GaussianMoments),
}

/// First and second quadrature moments. Variances are central; the
/// covariance is the symmetrized one, `<{q, p}>/2 - <q><p>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadStats {
    pub mean_q: f64,
    pub mean_p: f64,
    pub var_q: f64,
    pub var_p: f64,
    pub cov_qp: f64,
}

impl StatePrep {
    pub fn number(m: usize) -> Self {
        let mut w = vec![0.0; m + 1];
        w[m] = 1.0;
        StatePrep::NumberDiagonal(Weights(w))
    }

    pub fn weights(weights: Vec<f64>) -> Result<Self> {
        Weights::new(weights).map(StatePrep::NumberDiagonal)
    }

    pub fn gaussian(mean_q: f64, mean_p: f64, var_q: f64, var_p: f64, cov_qp: f64) -> Result<Self> {
        GaussianMoments::new(mean_q, mean_p, var_q, var_p, cov_qp).map(StatePrep::Gaussian)
    }

    /// Thermal state with `p_m = (1 - z^2) z^{2m}`.
    pub fn thermal(z: f64) -> Result<Self> {
        make_weights(&WeightRecipe::new(RecipeKind::Thermal(z)))
    }

    /// Invariant under phase-space rotations, so that `chi(l)` and `W(z)`
    /// depend on `|l|`, `|z|` only.
    pub fn is_rotation_invariant(&self) -> bool {
        match self {
            StatePrep::Vacuum | StatePrep::NumberDiagonal(_) => true,
            StatePrep::Coherent(a) => *a == Complex64::new(0.0, 0.0),
            StatePrep::Gaussian(g) => {
                g.mean_q == 0.0 && g.mean_p == 0.0 && g.var_q == g.var_p && g.cov_qp == 0.0
            }
        }
    }
}

/// `chi(l) = Tr[rho D(l)]`.
pub fn char_fn(prep: &StatePrep, lambda: Complex64) -> Complex64 {
    let x = lambda.norm_sqr();
    match prep {
        StatePrep::Vacuum => Complex64::new((-0.5 * x).exp(), 0.0),
        StatePrep::Coherent(alpha) => {
            (Complex64::new(-0.5 * x, 0.0) + lambda * alpha.conj() - lambda.conj() * alpha).exp()
        }
        StatePrep::NumberDiagonal(w) => {
            Complex64::new((-0.5 * x).exp() * laguerre_weighted_sum(w.as_slice(), x), 0.0)
        }
        StatePrep::Gaussian(g) => {
            // D(l) = exp(i (k_q q + k_p p)) with k_q = sqrt2 Im l, k_p = -sqrt2 Re l.
            let kq = SQRT_2 * lambda.im;
            let kp = -SQRT_2 * lambda.re;
            let phase = kq * g.mean_q + kp * g.mean_p;
            let quad = g.var_q * kq * kq + 2.0 * g.cov_qp * kq * kp + g.var_p * kp * kp;
            Complex64::from_polar((-0.5 * quad).exp(), phase)
        }
    }
}

/// `sum_m c_m L_m(x)` by the upward three-term recurrence.
pub fn laguerre_weighted_sum(weights: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    let (mut prev, mut cur) = (0.0, 1.0);
    for (m, c) in weights.iter().enumerate() {
        if m == 1 {
            prev = 1.0;
            cur = 1.0 - x;
        } else if m > 1 {
            let k = (m - 1) as f64;
            let next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
            prev = cur;
            cur = next;
        }
        acc += c * cur;
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RecipeKind {
    Number(usize),
    /// `z = exp(-beta hbar omega / 2)`.
    Thermal(f64),
    PhaseDiagonal(Complex64),
    PoissonDiagonal(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightRecipe {
    pub kind: RecipeKind,
    /// Highest retained photon number; `None` picks the smallest cutoff whose
    /// tail mass is below [`TAIL_BOUND`].
    pub cutoff: Option<usize>,
}

impl WeightRecipe {
    pub fn new(kind: RecipeKind) -> Self {
        WeightRecipe { kind, cutoff: None }
    }

    pub fn with_cutoff(kind: RecipeKind, cutoff: usize) -> Self {
        WeightRecipe {
            kind,
            cutoff: Some(cutoff),
        }
    }
}

fn geometric_weights(r: f64, cutoff: Option<usize>) -> Result<Vec<f64>> {
    // p_m = (1 - r) r^m, tail beyond c is r^{c+1}.
    if r == 0.0 {
        let n = cutoff.unwrap_or(0) + 1;
        let mut w = vec![0.0; n];
        w[0] = 1.0;
        return Ok(w);
    }
    let cutoff = match cutoff {
        Some(c) => {
            let tail = r.powi(c as i32 + 1);
            if tail >= TAIL_BOUND {
                return Err(Error::Truncation {
                    cutoff: c,
                    tail,
                    bound: TAIL_BOUND,
                });
            }
            c
        }
        None => (TAIL_BOUND.ln() / r.ln()).ceil() as usize,
    };
    Ok((0..=cutoff).map(|m| (1.0 - r) * r.powi(m as i32)).collect())
}

fn poisson_weights(mean: f64, cutoff: Option<usize>) -> Result<Vec<f64>> {
    let term = |m: usize| {
        let lgamma: f64 = (1..=m).map(|k| (k as f64).ln()).sum();
        if mean == 0.0 {
            if m == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            (-mean + m as f64 * mean.ln() - lgamma).exp()
        }
    };
    let tail_after = |c: usize| -> f64 {
        // Terms past the mode decrease geometrically; sum until negligible.
        let mut tail = 0.0;
        let mut m = c + 1;
        loop {
            let t = term(m);
            tail += t;
            if m as f64 > mean && t <= 1e-18 * tail.max(1e-280) {
                break;
            }
            m += 1;
        }
        tail
    };
    let cutoff = match cutoff {
        Some(c) => {
            let tail = tail_after(c);
            if tail >= TAIL_BOUND {
                return Err(Error::Truncation {
                    cutoff: c,
                    tail,
                    bound: TAIL_BOUND,
                });
            }
            c
        }
        None => {
            let mut c = mean.floor() as usize;
            while tail_after(c) >= TAIL_BOUND {
                c += 1;
            }
            c
        }
    };
    Ok((0..=cutoff).map(term).collect())
}

/// Number-diagonal weights from one of the closed-form recipes, truncated and
/// renormalized.
pub fn make_weights(recipe: &WeightRecipe) -> Result<StatePrep> {
    let raw = match recipe.kind {
        RecipeKind::Number(m) => {
            let n = recipe.cutoff.unwrap_or(m);
            if n < m {
                return Err(Error::Truncation {
                    cutoff: n,
                    tail: 1.0,
                    bound: TAIL_BOUND,
                });
            }
            let mut w = vec![0.0; n + 1];
            w[m] = 1.0;
            w
        }
        RecipeKind::Thermal(z) => {
            if !(0.0..1.0).contains(&z) {
                return Err(Error::domain("thermal z", format!("{z} not in [0, 1)")));
            }
            geometric_weights(z * z, recipe.cutoff)?
        }
        RecipeKind::PhaseDiagonal(z) => {
            let r = z.norm_sqr();
            if !(r < 1.0) {
                return Err(Error::domain("phase z", format!("|{z}| >= 1")));
            }
            geometric_weights(r, recipe.cutoff)?
        }
        RecipeKind::PoissonDiagonal(a2) => {
            if !(a2 >= 0.0) || !a2.is_finite() {
                return Err(Error::domain("poisson |alpha|^2", format!("{a2} < 0")));
            }
            poisson_weights(a2, recipe.cutoff)?
        }
    };
    let total: f64 = raw.iter().sum();
    StatePrep::weights(raw.iter().map(|w| w / total).collect())
}

pub fn quad_stats(prep: &StatePrep) -> QuadStats {
    match prep {
        StatePrep::Vacuum => QuadStats {
            mean_q: 0.0,
            mean_p: 0.0,
            var_q: 0.5,
            var_p: 0.5,
            cov_qp: 0.0,
        },
        StatePrep::Coherent(a) => QuadStats {
            mean_q: SQRT_2 * a.re,
            mean_p: SQRT_2 * a.im,
            var_q: 0.5,
            var_p: 0.5,
            cov_qp: 0.0,
        },
        StatePrep::NumberDiagonal(w) => {
            let v = w.mean_number() + 0.5;
            QuadStats {
                mean_q: 0.0,
                mean_p: 0.0,
                var_q: v,
                var_p: v,
                cov_qp: 0.0,
            }
        }
        StatePrep::Gaussian(g) => g.stats(),
    }
}

/// Wigner function over `z = x + iy`, unit integral.
pub fn wigner(prep: &StatePrep, z: Complex64) -> f64 {
    match prep {
        StatePrep::Vacuum => FRAC_2_PI * (-2.0 * z.norm_sqr()).exp(),
        StatePrep::Coherent(a) => FRAC_2_PI * (-2.0 * (z - a).norm_sqr()).exp(),
        StatePrep::NumberDiagonal(w) => {
            let r2 = z.norm_sqr();
            let signed: Vec<f64> = w
                .as_slice()
                .iter()
                .enumerate()
                .map(|(m, p)| if m % 2 == 0 { *p } else { -*p })
                .collect();
            FRAC_2_PI * (-2.0 * r2).exp() * laguerre_weighted_sum(&signed, 4.0 * r2)
        }
        StatePrep::Gaussian(g) => {
            // In z coordinates the mean is m/sqrt2 and the covariance V/2.
            let (sxx, syy, sxy) = (g.var_q / 2.0, g.var_p / 2.0, g.cov_qp / 2.0);
            let det = sxx * syy - sxy * sxy;
            let dx = z.re - g.mean_q / SQRT_2;
            let dy = z.im - g.mean_p / SQRT_2;
            let quad = (syy * dx * dx - 2.0 * sxy * dx * dy + sxx * dy * dy) / det;
            (-0.5 * quad).exp() / (2.0 * PI * det.sqrt())
        }
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("'{s}' is not a number")))
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_f64).collect()
}

/// Parses a complex number written as `re`, `re,im`, `a+bi` or `a-bi`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let s = s.trim();
    if s.contains(',') {
        let v = parse_list(s)?;
        return match v.as_slice() {
            [re, im] => Ok(Complex64::new(*re, *im)),
            _ => Err(Error::Parse(format!("'{s}' is not 're,im'"))),
        };
    }
    if let Some(body) = s.strip_suffix('i') {
        // Split at the last sign that is not part of an exponent.
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
        return match split {
            Some(i) => {
                let im = match &body[i..] {
                    "+" => 1.0,
                    "-" => -1.0,
                    t => parse_f64(t)?,
                };
                Ok(Complex64::new(parse_f64(&body[..i])?, im))
            }
            None => {
                let im = match body {
                    "" | "+" => 1.0,
                    "-" => -1.0,
                    t => parse_f64(t)?,
                };
                Ok(Complex64::new(0.0, im))
            }
        };
    }
    Ok(Complex64::new(parse_f64(s)?, 0.0))
}

impl FromStr for StatePrep {
    type Err = Error;

    /// `vacuum`, `coherent:re,im`, `number:m`, `thermal:z`, `phase:z`
    /// (`z` real or `re,im`), `poisson:a2`, `weights:p0,p1,...` and
    /// `gaussian:mean_q,mean_p,var_q,var_p,cov_qp`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a.trim())),
            None => (s, None),
        };
        let need = || arg.ok_or_else(|| Error::Parse(format!("'{kind}' needs an argument")));
        match kind {
            "vacuum" => Ok(StatePrep::Vacuum),
            "coherent" => Ok(StatePrep::Coherent(parse_complex(need()?)?)),
            "number" => {
                let m = need()?
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad photon number in '{s}'")))?;
                Ok(StatePrep::number(m))
            }
            "thermal" => make_weights(&WeightRecipe::new(RecipeKind::Thermal(parse_f64(need()?)?))),
            "phase" => make_weights(&WeightRecipe::new(RecipeKind::PhaseDiagonal(parse_complex(
                need()?,
            )?))),
            "poisson" => make_weights(&WeightRecipe::new(RecipeKind::PoissonDiagonal(parse_f64(
                need()?,
            )?))),
            "weights" => StatePrep::weights(parse_list(need()?)?),
            "gaussian" => match parse_list(need()?)?.as_slice() {
                [mq, mp, vq, vp, c] => StatePrep::gaussian(*mq, *mp, *vq, *vp, *c),
                _ => Err(Error::Parse(format!("'{s}' needs five Gaussian moments"))),
            },
            other => Err(Error::Parse(format!("unknown preparation '{other}'"))),
        }
    }
}

impl fmt::Display for StatePrep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatePrep::Vacuum => write!(f, "vacuum"),
            StatePrep::Coherent(a) => write!(f, "coherent:{},{}", a.re, a.im),
            StatePrep::NumberDiagonal(w) => {
                let parts: Vec<String> = w.as_slice().iter().map(|p| p.to_string()).collect();
                write!(f, "weights:{}", parts.join(","))
            }
            StatePrep::Gaussian(g) => write!(
                f,
                "gaussian:{},{},{},{},{}",
                g.mean_q, g.mean_p, g.var_q, g.var_p, g.cov_qp
            ),
        }
    }
}
