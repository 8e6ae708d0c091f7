//! Oscillator eigenfunctions, displacement matrix elements and Gauss-Legendre
//! nodes.

use std::f64::consts::PI;

use num_complex::Complex64;

/// `psi_n(x)` for `n = 0..=n_max`, the position wavefunctions of `|n>` with
/// `q = (a + a^dag)/sqrt2`.
pub fn hermite_functions(n_max: usize, x: f64) -> Vec<f64> {
    let mut psi = vec![0.0; n_max + 1];
    psi[0] = PI.powf(-0.25) * (-0.5 * x * x).exp();
    if n_max >= 1 {
        psi[1] = 2f64.sqrt() * x * psi[0];
    }
    for n in 1..n_max {
        let nf = n as f64;
        psi[n + 1] = (2.0 / (nf + 1.0)).sqrt() * x * psi[n] - (nf / (nf + 1.0)).sqrt() * psi[n - 1];
    }
    psi
}

/// Momentum wavefunctions `<p|n> = (-i)^n psi_n(p)`.
pub fn momentum_functions(n_max: usize, p: f64) -> Vec<Complex64> {
    const PHASES: [Complex64; 4] = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
    ];
    hermite_functions(n_max, p)
        .into_iter()
        .enumerate()
        .map(|(n, v)| PHASES[n % 4] * v)
        .collect()
}

/// Generalized Laguerre polynomials `L_k^(alpha)(x)` for `k = 0..=n`.
pub fn assoc_laguerre(n: usize, alpha: f64, x: f64) -> Vec<f64> {
    let mut l = vec![1.0; n + 1];
    if n >= 1 {
        l[1] = 1.0 + alpha - x;
    }
    for k in 1..n {
        let kf = k as f64;
        l[k + 1] = ((2.0 * kf + 1.0 + alpha - x) * l[k] - (kf + alpha) * l[k - 1]) / (kf + 1.0);
    }
    l
}

/// `<m| D(z) |n>` for `m, n <= n_max`, row-major. `D(z) = exp(z a^dag - z^* a)`.
pub fn displacement_elements(n_max: usize, z: Complex64) -> Vec<Complex64> {
    let d = n_max + 1;
    let x = z.norm_sqr();
    let env = (-0.5 * x).exp();
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    // log n! for the square-root prefactors
    let mut log_fact = vec![0.0; d];
    for k in 1..d {
        log_fact[k] = log_fact[k - 1] + (k as f64).ln();
    }
    for diff in 0..d {
        let lag = assoc_laguerre(n_max - diff, diff as f64, x);
        let up = z.powu(diff as u32);
        let down = (-z.conj()).powu(diff as u32);
        for lo in 0..d - diff {
            let hi = lo + diff;
            let pref = (0.5 * (log_fact[lo] - log_fact[hi])).exp() * env * lag[lo];
            out[hi * d + lo] = up * pref;
            if diff > 0 {
                out[lo * d + hi] = down * pref;
            }
        }
    }
    out
}

/// Gauss-Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = mid - half * x;
        nodes[n - 1 - i] = mid + half * x;
        weights[i] = half * w;
        weights[n - 1 - i] = half * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
