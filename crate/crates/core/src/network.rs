//! The three-mode linear network realizing the minimal Naimark extension.
//!
//! Mode labels are 1-based throughout (`1`, `2` for the signal modes, `3` for
//! the ancilla). A [`MixingMatrix`] `M` is the Heisenberg action of the network
//! unitary `U`: `U^dag a_k U = sum_l M[k][l] a_l`. Products of unitaries map to
//! products of matrices in the same order, so `U = U_a U_b` has matrix
//! `M_a M_b`.
//!
//! The factorization used here is
//!
//! ```text
//! M = P2 . R13(theta13) . R23(theta23) . R12(theta12)
//! ```
//!
//! with `P2 = diag(1, -1, 1)` the pi-rotation on mode 2 and `Rjk` the real
//! rotation block `[[cos, sin], [-sin, cos]]` on modes `(j, k)`. The order and
//! signs were fixed by matching the closed-form matrix numerically; the
//! regression tests below freeze them.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::fmt;

use num_complex::Complex64;
use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::{Error, Result};

pub type Mat3 = [[Complex64; 3]; 3];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn identity3() -> Mat3 {
    let mut m = [[ZERO; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ONE;
    }
    m
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn adjoint(a: &Mat3) -> Mat3 {
    let mut c = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[j][i].conj();
        }
    }
    c
}

/// Largest entrywise modulus of `a - b`.
pub fn max_deviation(a: &Mat3, b: &Mat3) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            d = d.max((a[i][j] - b[i][j]).norm());
        }
    }
    d
}

/// Complex amplification parameter together with its reduction to the
/// canonical range `0 < gamma <= 1`.
///
/// `Z_gamma = R^dag Z_|gamma| R` with `R` a phase rotation on mode 2, and for
/// `|gamma| > 1`, up to swapping the mode labels, `Z_gamma = gamma
/// Z^dag_{1/gamma}`. The multiplicative constant does not change the
/// measurement scheme.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GammaParam {
    pub raw: Complex64,
    pub reduced: f64,
    /// `arg gamma` in `(-pi, pi]`.
    pub phase: f64,
    pub swapped: bool,
    pub scale: f64,
}

impl GammaParam {
    /// Reassembles the raw parameter from the reduction record.
    pub fn recover(&self) -> Complex64 {
        let magnitude = if self.swapped { self.scale } else { self.reduced };
        Complex64::from_polar(magnitude, self.phase)
    }

    pub fn is_normal(&self) -> bool {
        self.reduced == 1.0
    }
}

pub fn reduce_gamma(gamma: Complex64) -> Result<GammaParam> {
    if !gamma.re.is_finite() || !gamma.im.is_finite() {
        return Err(Error::domain("gamma", format!("{gamma} is not finite")));
    }
    let magnitude = gamma.norm();
    if magnitude == 0.0 {
        return Err(Error::DegenerateGamma);
    }
    let mut phase = gamma.im.atan2(gamma.re);
    if phase <= -PI {
        phase = PI;
    }
    let (reduced, swapped, scale) = if magnitude > 1.0 {
        (1.0 / magnitude, true, magnitude)
    } else {
        (magnitude, false, 1.0)
    };
    Ok(GammaParam {
        raw: gamma,
        reduced,
        phase,
        swapped,
        scale,
    })
}

pub(crate) fn check_canonical_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma > 0.0 && gamma <= 1.0 {
        Ok(())
    } else if gamma == 0.0 {
        Err(Error::DegenerateGamma)
    } else {
        Err(Error::domain(
            "gamma",
            format!("{gamma} not in (0, 1]; reduce it first"),
        ))
    }
}

/// `kappa = sqrt(1 - gamma^2)`, the ancilla coupling.
pub fn kappa(gamma: f64) -> f64 {
    (1.0 - gamma * gamma).max(0.0).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingMatrix {
    pub entries: Mat3,
    pub gamma: f64,
    pub kappa: f64,
}

impl MixingMatrix {
    /// `max |M M^dag - 1|`.
    pub fn unitarity_deviation(&self) -> f64 {
        max_deviation(&mat_mul(&self.entries, &adjoint(&self.entries)), &identity3())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix serializes")
    }
}

impl Serialize for MixingMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let flat: Vec<[f64; 2]> = self
            .entries
            .iter()
            .flatten()
            .map(|z| [z.re, z.im])
            .collect();
        let mut s = serializer.serialize_struct("MixingMatrix", 3)?;
        s.serialize_field("gamma", &self.gamma)?;
        s.serialize_field("kappa", &self.kappa)?;
        s.serialize_field("entries", &flat)?;
        s.end()
    }
}

impl fmt::Display for MixingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.entries {
            let cells: Vec<String> = row
                .iter()
                .map(|z| format!("{:+.12}{:+.12}i", z.re, z.im))
                .collect();
            writeln!(f, "[ {} ]", cells.join("  "))?;
        }
        Ok(())
    }
}

pub fn build_mixing_matrix(gamma: f64) -> Result<MixingMatrix> {
    check_canonical_gamma(gamma)?;
    let k = kappa(gamma);
    let r = FRAC_1_SQRT_2;
    let c = |v: f64| Complex64::new(v, 0.0);
    // Third row is (m1, m2, m3)/sqrt2 with m1 = 0, m2 = -sqrt(2) kappa,
    // m3 = sqrt(2) gamma.
    let entries = [
        [c(r), c(r * gamma), c(r * k)],
        [c(r), c(-r * gamma), c(-r * k)],
        [c(0.0), c(-r * SQRT_2 * k), c(r * SQRT_2 * gamma)],
    ];
    Ok(MixingMatrix {
        entries,
        gamma,
        kappa: k,
    })
}

/// One factor of the network, listed in operator-product order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Stage {
    /// `exp(i pi N_mode)`.
    PiRotation { mode: usize },
    /// Real two-mode rotation on modes `(j, k)`, `j < k`.
    TwoMode { j: usize, k: usize },
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Su2Plan {
    pub theta12: f64,
    pub theta13: f64,
    pub theta23: f64,
    pub pi_rotation_mode: Option<usize>,
    /// Operator product order, leftmost first. The rightmost stage acts on
    /// the input state first.
    pub ordering: Vec<Stage>,
}

impl Su2Plan {
    /// All angles zero and no pi-rotation.
    pub fn empty() -> Self {
        Su2Plan {
            theta12: 0.0,
            theta13: 0.0,
            theta23: 0.0,
            pi_rotation_mode: None,
            ordering: vec![
                Stage::TwoMode { j: 1, k: 3 },
                Stage::TwoMode { j: 2, k: 3 },
                Stage::TwoMode { j: 1, k: 2 },
            ],
        }
    }

    pub fn angle(&self, j: usize, k: usize) -> f64 {
        match (j.min(k), j.max(k)) {
            (1, 2) => self.theta12,
            (1, 3) => self.theta13,
            (2, 3) => self.theta23,
            _ => panic!("no two-mode stage on modes ({j}, {k})"),
        }
    }
}

/// Real rotation angles whose cosines are given by the closed-form
/// decomposition.
pub fn decompose(gamma: f64) -> Result<Su2Plan> {
    check_canonical_gamma(gamma)?;
    let g2 = gamma * gamma;
    let angle = |cos_sq: f64| cos_sq.clamp(0.0, 1.0).sqrt().acos();
    let mut plan = Su2Plan::empty();
    plan.theta23 = angle((1.0 + g2) / 2.0);
    plan.theta13 = angle(2.0 * g2 / (1.0 + g2));
    plan.theta12 = angle(g2 / (1.0 + g2));
    plan.pi_rotation_mode = Some(2);
    plan.ordering.insert(0, Stage::PiRotation { mode: 2 });
    Ok(plan)
}

fn check_mode(m: usize) -> Result<()> {
    if (1..=3).contains(&m) {
        Ok(())
    } else {
        Err(Error::domain("mode", format!("{m} not in {{1, 2, 3}}")))
    }
}

/// Identity except for the `(j, k)` block `[[cos, sin], [-sin, cos]]`.
pub fn su2_block(theta: f64, j: usize, k: usize) -> Result<MixingMatrix> {
    check_mode(j)?;
    check_mode(k)?;
    if j == k {
        return Err(Error::domain("mode pair", format!("j = k = {j}")));
    }
    let (s, c) = theta.sin_cos();
    let mut entries = identity3();
    let (jj, kk) = (j - 1, k - 1);
    entries[jj][jj] = Complex64::new(c, 0.0);
    entries[jj][kk] = Complex64::new(s, 0.0);
    entries[kk][jj] = Complex64::new(-s, 0.0);
    entries[kk][kk] = Complex64::new(c, 0.0);
    Ok(MixingMatrix {
        entries,
        gamma: f64::NAN,
        kappa: f64::NAN,
    })
}

fn pi_rotation(mode: usize) -> Result<Mat3> {
    check_mode(mode)?;
    let mut m = identity3();
    m[mode - 1][mode - 1] = -ONE;
    Ok(m)
}

/// Multiplies the stage matrices in the plan's recorded order.
pub fn compose_plan(plan: &Su2Plan) -> Result<MixingMatrix> {
    let mut acc = identity3();
    for stage in &plan.ordering {
        let m = match *stage {
            Stage::PiRotation { mode } => pi_rotation(mode)?,
            Stage::TwoMode { j, k } => su2_block(plan.angle(j, k), j, k)?.entries,
        };
        acc = mat_mul(&acc, &m);
    }
    // Recover gamma from the third row: M33 = gamma.
    let gamma = acc[2][2].re;
    Ok(MixingMatrix {
        entries: acc,
        gamma,
        kappa: kappa(gamma),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn reduce_unit_modulus() {
        let g = reduce_gamma(Complex64::new(0.0, 1.0)).unwrap();
        assert_eq!(g.reduced, 1.0);
        assert_abs_diff_eq!(g.phase, FRAC_PI_2, epsilon = 1e-15);
        assert!(!g.swapped);
        assert_eq!(g.scale, 1.0);
    }

    #[test]
    fn reduce_large_gamma_swaps_modes() {
        let g = reduce_gamma(Complex64::new(2.0, 0.0)).unwrap();
        assert_eq!(g.reduced, 0.5);
        assert_eq!(g.phase, 0.0);
        assert!(g.swapped);
        assert_eq!(g.scale, 2.0);
    }

    #[test]
    fn reduce_canonical_is_identity() {
        let g = reduce_gamma(Complex64::new(0.5, 0.0)).unwrap();
        assert_eq!((g.reduced, g.phase, g.swapped, g.scale), (0.5, 0.0, false, 1.0));
        assert_eq!(g.recover(), Complex64::new(0.5, 0.0));
    }

    #[test]
    fn reduce_rejects_zero_and_nan() {
        assert_eq!(reduce_gamma(Complex64::new(0.0, 0.0)), Err(Error::DegenerateGamma));
        assert!(matches!(
            reduce_gamma(Complex64::new(f64::NAN, 0.0)),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn reduce_negative_real_axis_phase_is_pi() {
        let g = reduce_gamma(Complex64::new(-0.3, -0.0)).unwrap();
        assert_eq!(g.phase, PI);
    }

    #[test]
    fn unit_gamma_decouples_ancilla() {
        let m = build_mixing_matrix(1.0).unwrap();
        assert_eq!(m.kappa, 0.0);
        let row3: Vec<f64> = m.entries[2].iter().map(|z| z.re).collect();
        assert_abs_diff_eq!(row3[0], 0.0);
        assert_abs_diff_eq!(row3[1], 0.0);
        assert_abs_diff_eq!(row3[2], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn third_row_at_gamma_0_6() {
        let m = build_mixing_matrix(0.6).unwrap();
        assert_abs_diff_eq!(m.kappa, 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(m.entries[2][0].re, 0.0);
        assert_abs_diff_eq!(m.entries[2][1].re, -0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(m.entries[2][2].re, 0.6, epsilon = 1e-15);
        assert!(m.unitarity_deviation() < 1e-12);
    }

    #[test]
    fn unitary_at_gamma_0_3() {
        assert!(build_mixing_matrix(0.3).unwrap().unitarity_deviation() < 1e-12);
    }

    #[test]
    fn mixing_matrix_domain() {
        assert_eq!(build_mixing_matrix(0.0), Err(Error::DegenerateGamma));
        assert!(build_mixing_matrix(1.5).is_err());
        assert!(build_mixing_matrix(-0.2).is_err());
        assert!(decompose(f64::NAN).is_err());
    }

    #[test]
    fn decompose_limits() {
        let p = decompose(1.0).unwrap();
        assert_abs_diff_eq!(p.theta23, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.theta13, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.theta12, FRAC_PI_4, epsilon = 1e-15);

        let p = decompose(1e-6).unwrap();
        assert_abs_diff_eq!(p.theta23, FRAC_PI_4, epsilon = 1e-9);
        assert_abs_diff_eq!(p.theta13, FRAC_PI_2, epsilon = 1e-5);
        assert_abs_diff_eq!(p.theta12, FRAC_PI_2, epsilon = 1e-5);
    }

    #[test]
    fn su2_block_cases() {
        let id = su2_block(0.0, 1, 2).unwrap();
        assert_eq!(max_deviation(&id.entries, &identity3()), 0.0);

        let swap = su2_block(FRAC_PI_2, 1, 2).unwrap();
        assert_abs_diff_eq!(swap.entries[0][1].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(swap.entries[1][0].re, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(swap.entries[0][0].re, 0.0, epsilon = 1e-15);

        let half = su2_block(FRAC_PI_4, 1, 2).unwrap();
        for (i, j, v) in [(0, 0, 1.0), (0, 1, 1.0), (1, 0, -1.0), (1, 1, 1.0)] {
            assert_abs_diff_eq!(half.entries[i][j].re, v * FRAC_1_SQRT_2, epsilon = 1e-15);
        }
        assert_eq!(half.entries[2][2], ONE);

        assert!(su2_block(0.1, 2, 2).is_err());
        assert!(su2_block(0.1, 0, 2).is_err());
    }

    #[test]
    fn empty_plan_is_identity() {
        let m = compose_plan(&Su2Plan::empty()).unwrap();
        assert_eq!(max_deviation(&m.entries, &identity3()), 0.0);
    }

    /// Freezes the stage order and sign convention.
    #[test]
    fn stage_convention_regression() {
        let p = decompose(0.6).unwrap();
        assert_eq!(
            p.ordering,
            vec![
                Stage::PiRotation { mode: 2 },
                Stage::TwoMode { j: 1, k: 3 },
                Stage::TwoMode { j: 2, k: 3 },
                Stage::TwoMode { j: 1, k: 2 },
            ]
        );
        for g in [0.6, 1.0, 0.3, 0.9] {
            let composed = compose_plan(&decompose(g).unwrap()).unwrap();
            let direct = build_mixing_matrix(g).unwrap();
            assert!(max_deviation(&composed.entries, &direct.entries) < 1e-12, "gamma {g}");
        }
    }

    #[test]
    fn json_layout() {
        let m = build_mixing_matrix(0.6).unwrap();
        let v: serde_json::Value = serde_json::from_str(&m.to_json()).unwrap();
        assert_eq!(v["gamma"], 0.6);
        assert_eq!(v["entries"].as_array().unwrap().len(), 9);
        assert_eq!(v["entries"][7][0].as_f64().unwrap(), m.entries[2][1].re);
    }

    proptest! {
        #[test]
        fn reduction_round_trips(re in -5.0f64..5.0, im in -5.0f64..5.0) {
            prop_assume!(re.hypot(im) > 1e-9);
            let z = Complex64::new(re, im);
            let g = reduce_gamma(z).unwrap();
            prop_assert!(g.reduced > 0.0 && g.reduced <= 1.0);
            prop_assert!(g.phase > -PI && g.phase <= PI);
            prop_assert!(g.scale > 0.0);
            prop_assert!((g.recover() - z).norm() <= 4.0 * f64::EPSILON * z.norm());
        }

        #[test]
        fn unitary_and_recomposes(g in 1e-6f64..=1.0) {
            let m = build_mixing_matrix(g).unwrap();
            prop_assert!(m.unitarity_deviation() < 1e-12);
            let r = FRAC_1_SQRT_2;
            let k = kappa(g);
            let rows = [[r, r * g, r * k], [r, -r * g, -r * k]];
            for (i, row) in rows.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    prop_assert_eq!(m.entries[i][j], Complex64::new(*v, 0.0));
                }
            }
            let plan = decompose(g).unwrap();
            for t in [plan.theta12, plan.theta13, plan.theta23] {
                prop_assert!((0.0..=FRAC_PI_2).contains(&t));
            }
            let composed = compose_plan(&plan).unwrap();
            prop_assert!(max_deviation(&composed.entries, &m.entries) < 1e-12);
        }

        #[test]
        fn continuous_in_gamma(g in 0.01f64..0.99, dg in -1e-7f64..1e-7) {
            let a = build_mixing_matrix(g).unwrap();
            let b = build_mixing_matrix(g + dg).unwrap();
            prop_assert!(max_deviation(&a.entries, &b.entries) < 1e-5);
        }
    }
}
