//! Frequency-asymmetric heterodyne detection.
//!
//! When the signal frequency `w1` is not much larger than the intermediate
//! frequency `wI`, the filtered photocurrent measures
//! `sqrt(1 + wI/w1) a1 + sqrt(1 - wI/w1) a2^dag`, which up to normalization is
//! `Z` with `gamma_C = sqrt((w1 - wI)/(w1 + wI))`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, OutcomeGrid};
use crate::measurement::{self, predicted_moments, PredictedMoments, Preparation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeterodyneSpec {
    omega_signal: f64,
    omega_intermediate: f64,
}

impl HeterodyneSpec {
    pub fn new(omega_signal: f64, omega_intermediate: f64) -> Result<Self> {
        if !omega_signal.is_finite() || omega_signal <= 0.0 {
            return Err(Error::domain("omega_signal", format!("{omega_signal} must be positive")));
        }
        if !(omega_intermediate >= 0.0) || omega_intermediate >= omega_signal {
            return Err(Error::domain(
                "omega_intermediate",
                format!("{omega_intermediate} not in [0, omega_signal = {omega_signal})"),
            ));
        }
        Ok(HeterodyneSpec {
            omega_signal,
            omega_intermediate,
        })
    }

    pub fn omega_signal(&self) -> f64 {
        self.omega_signal
    }

    pub fn omega_intermediate(&self) -> f64 {
        self.omega_intermediate
    }

    /// `[y_C, y_C^dag] = 2 wI / w1`.
    pub fn commutator(&self) -> f64 {
        2.0 * self.omega_intermediate / self.omega_signal
    }
}

pub fn caves_gamma(spec: &HeterodyneSpec) -> f64 {
    let (w1, wi) = (spec.omega_signal, spec.omega_intermediate);
    ((w1 - wi) / (w1 + wi)).sqrt()
}

/// Tolerance below which two moment predictions count as identical.
pub const BUDGET_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseBudget {
    pub gamma_caves: f64,
    pub commutator: f64,
    pub caves: PredictedMoments,
    pub standard: PredictedMoments,
    /// Ancilla noise added at `gamma_C`, per quadrature.
    pub added_q: f64,
    pub added_p: f64,
    /// Caves minus standard measured variances.
    pub excess_vs_standard_q: f64,
    pub excess_vs_standard_p: f64,
    /// Means, variances and covariance agree within [`BUDGET_TOL`].
    pub no_added_noise: bool,
}

/// Compares the Caves-type measurement at `gamma_C` with standard
/// heterodyne (`gamma = 1`) on the same preparation.
pub fn noise_budget(spec: &HeterodyneSpec, prep: &Preparation) -> Result<NoiseBudget> {
    let gamma_caves = caves_gamma(spec);
    let caves = predicted_moments(prep, gamma_caves)?;
    let standard = predicted_moments(prep, 1.0)?;
    let pairs = [
        (caves.mean_x, standard.mean_x),
        (caves.mean_y, standard.mean_y),
        (caves.var_q1, standard.var_q1),
        (caves.var_p2, standard.var_p2),
        (caves.cov_q1p2, standard.cov_q1p2),
    ];
    Ok(NoiseBudget {
        gamma_caves,
        commutator: spec.commutator(),
        caves,
        standard,
        added_q: caves.added_q,
        added_p: caves.added_p,
        excess_vs_standard_q: caves.var_q1 - standard.var_q1,
        excess_vs_standard_p: caves.var_p2 - standard.var_p2,
        no_added_noise: pairs.iter().all(|(a, b)| (a - b).abs() <= BUDGET_TOL),
    })
}

/// Distribution of the outcome argument `arg tau` over equal bins on
/// `(-pi, pi]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseReport {
    pub theta: Vec<f64>,
    pub probability: Vec<f64>,
    pub circular_mean: f64,
    pub circular_variance: f64,
}

impl PhaseReport {
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "theta,prob")?;
        for (t, p) in self.theta.iter().zip(&self.probability) {
            writeln!(w, "{},{}", crate::fmt_f64(*t), crate::fmt_f64(*p))?;
        }
        Ok(())
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "bins": self.theta.len(),
            "circular_mean": self.circular_mean,
            "circular_variance": self.circular_variance,
        })
    }
}

pub const DEFAULT_PHASE_BINS: usize = 360;

/// `P(theta_k) ~ int_0^inf K(r e^{i theta_k}) r dr`, by the trapezoid rule
/// along rays with the grid interpolated bilinearly.
pub fn phase_distribution(grid: &OutcomeGrid, n_bins: usize) -> Result<PhaseReport> {
    if n_bins == 0 {
        return Err(Error::domain("phase bins", "need at least one bin"));
    }
    grid.check_mass(measurement::MASS_TOL)?;
    let s = &grid.spec;
    let dr = 0.5 * s.dx().min(s.dy());
    let r_max = [s.x_min, s.x_max]
        .iter()
        .flat_map(|x| [s.y_min, s.y_max].map(|y| x.hypot(y)))
        .fold(0.0, f64::max);
    let steps = (r_max / dr).ceil() as usize;
    let theta: Vec<f64> = (0..n_bins)
        .map(|k| -PI + (k as f64 + 0.5) * 2.0 * PI / n_bins as f64)
        .collect();
    let raw: Vec<f64> = theta
        .iter()
        .map(|t| {
            let (sin, cos) = t.sin_cos();
            // Integrand vanishes at r = 0, so the trapezoid endpoint is zero.
            let mut acc = 0.0;
            for i in 1..=steps {
                let r = i as f64 * dr;
                let w = if i == steps { 0.5 } else { 1.0 };
                acc += w * r * grid.interpolate(r * cos, r * sin);
            }
            acc * dr
        })
        .collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Mass { mass: 0.0, tol: measurement::MASS_TOL });
    }
    let probability: Vec<f64> = raw.iter().map(|p| p / total).collect();
    let resultant: Complex64 = theta
        .iter()
        .zip(&probability)
        .map(|(t, p)| Complex64::from_polar(*p, *t))
        .sum();
    Ok(PhaseReport {
        theta,
        probability,
        circular_mean: resultant.arg(),
        circular_variance: 1.0 - resultant.norm(),
    })
}

/// Phase distribution of the outcomes for `prep` at `gamma`.
pub fn feasible_phase(prep: &Preparation, gamma: f64, spec: &GridSpec, n_bins: usize) -> Result<PhaseReport> {
    let grid = measurement::outcome_density(prep, gamma, spec)?;
    phase_distribution(&grid, n_bins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::auto_grid;
    use crate::states::StatePrep;
    use approx::assert_abs_diff_eq;

    #[test]
    fn caves_gamma_examples() {
        assert_eq!(caves_gamma(&HeterodyneSpec::new(5.0, 0.0).unwrap()), 1.0);
        let g = caves_gamma(&HeterodyneSpec::new(11.0, 1.0).unwrap());
        assert_abs_diff_eq!(g, (10.0f64 / 12.0).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(g, 0.912871, epsilon = 1e-6);
        let near = caves_gamma(&HeterodyneSpec::new(1.0, 1.0 - 1e-9).unwrap());
        assert!(near > 0.0 && near < 1e-4);
    }

    #[test]
    fn spec_domain() {
        assert!(HeterodyneSpec::new(1.0, 1.0).is_err());
        assert!(HeterodyneSpec::new(1.0, 2.0).is_err());
        assert!(HeterodyneSpec::new(0.0, 0.0).is_err());
        assert!(HeterodyneSpec::new(1.0, -0.1).is_err());
    }

    #[test]
    fn caves_gamma_monotone_and_scale_invariant() {
        let mut last = 1.0 + 1e-12;
        for i in 0..100 {
            let wi = i as f64 * 0.099;
            let g = caves_gamma(&HeterodyneSpec::new(10.0, wi).unwrap());
            assert!(g < last);
            last = g;
            let scaled = caves_gamma(&HeterodyneSpec::new(10.0 * 3.7, wi * 3.7).unwrap());
            assert_abs_diff_eq!(g, scaled, epsilon = 1e-15);
        }
    }

    #[test]
    fn vacuum_ancillas_add_no_noise() {
        let spec = HeterodyneSpec::new(11.0, 1.0).unwrap();
        let prep = Preparation::signal_only(StatePrep::Coherent(Complex64::new(1.0, 2.0)));
        let b = noise_budget(&spec, &prep).unwrap();
        assert!(b.no_added_noise);
        assert_abs_diff_eq!(b.commutator, 2.0 / 11.0, epsilon = 1e-15);
    }

    #[test]
    fn thermal_ancilla_adds_noise() {
        let spec = HeterodyneSpec::new(11.0, 1.0).unwrap();
        let sigma = StatePrep::thermal(0.5).unwrap();
        let prep = Preparation::new(StatePrep::Vacuum, StatePrep::Vacuum, sigma).unwrap();
        let b = noise_budget(&spec, &prep).unwrap();
        assert!(!b.no_added_noise);
        assert!(b.added_q > b.standard.added_q);
        assert_eq!(b.standard.added_q, 0.0);
    }

    #[test]
    fn small_offset_budget() {
        let spec = HeterodyneSpec::new(1.0, 1e-3).unwrap();
        let g = caves_gamma(&spec);
        assert_abs_diff_eq!(g, (0.999f64 / 1.001).sqrt(), epsilon = 1e-15);
        let sigma = StatePrep::thermal(0.5).unwrap();
        let dq3 = crate::states::quad_stats(&sigma).var_q;
        let prep = Preparation::new(StatePrep::Vacuum, StatePrep::Vacuum, sigma).unwrap();
        let b = noise_budget(&spec, &prep).unwrap();
        // Vacuum mode 2: difference is (1 - g^2)(dq3 - 1/2)/2.
        let k2 = 1.0 - g * g;
        assert_abs_diff_eq!(k2, 2e-3 / 1.001, epsilon = 1e-15);
        assert_abs_diff_eq!(b.excess_vs_standard_q, 0.5 * k2 * (dq3 - 0.5), epsilon = 1e-14);
    }

    #[test]
    fn identical_branches_without_offset() {
        let spec = HeterodyneSpec::new(3.0, 0.0).unwrap();
        let prep = Preparation::new(StatePrep::number(2), StatePrep::thermal(0.2).unwrap(), StatePrep::thermal(0.6).unwrap()).unwrap();
        let b = noise_budget(&spec, &prep).unwrap();
        assert_eq!(b.caves, b.standard);
        assert!(b.no_added_noise);
    }

    #[test]
    fn coherent_phase_mean() {
        let phi = 0.7;
        let prep = Preparation::signal_only(StatePrep::Coherent(Complex64::from_polar(3.0, phi)));
        let g = 0.9;
        let report = feasible_phase(&prep, g, &auto_grid(&prep, g).unwrap(), DEFAULT_PHASE_BINS).unwrap();
        assert_abs_diff_eq!(report.circular_mean, phi, epsilon = 1e-3);
        assert_abs_diff_eq!(report.probability.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn vacuum_phase_is_uniform() {
        let prep = Preparation::vacuum();
        let report = feasible_phase(&prep, 0.6, &auto_grid(&prep, 0.6).unwrap(), DEFAULT_PHASE_BINS).unwrap();
        let u = 1.0 / DEFAULT_PHASE_BINS as f64;
        for p in &report.probability {
            assert_abs_diff_eq!(*p, u, epsilon = 1e-6);
        }
    }

    #[test]
    fn phase_narrows_with_amplitude() {
        let mut last = f64::INFINITY;
        for amp in [1.0, 2.0, 4.0] {
            let prep = Preparation::signal_only(StatePrep::Coherent(Complex64::new(amp, 0.0)));
            let r = feasible_phase(&prep, 0.5, &auto_grid(&prep, 0.5).unwrap(), 180).unwrap();
            assert!(r.circular_variance < last);
            last = r.circular_variance;
        }
    }
}
