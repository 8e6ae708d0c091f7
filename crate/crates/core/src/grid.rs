//! Rectangular outcome grids.
//!
//! Grid nodes are `x_j = x_min + j dx`, `j = 0..nx`, with `dx = (x_max -
//! x_min)/(nx - 1)`; likewise in `y`. Densities are stored row-major in `x`:
//! index `ix * ny + iy`.
//!
//! Densities are recovered from a characteristic function `F(w) = int f(r)
//! exp(-i w.r) d^2r` by `f(r) = (2 pi)^-2 int F(w) exp(i w.r) d^2w`, sampled
//! on the reciprocal grid `w_k = (k - n/2) dw`, `dw = 2 pi / (n dx)`. Shifting
//! `x_j` by `x_min` and `w_k` by `-n/2` turns the sum into an unnormalized
//! inverse DFT times `(-1)^j` and a phase `exp(i w_k x_min)` on the input.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Self> {
        let spec = GridSpec {
            x_min,
            x_max,
            y_min,
            y_max,
            nx,
            ny,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Square grid `[-half, half]^2` with `n` points per side.
    pub fn square(half: f64, n: usize) -> Result<Self> {
        GridSpec::new(-half, half, -half, half, n, n)
    }

    pub fn validate(&self) -> Result<()> {
        let bounds = [self.x_min, self.x_max, self.y_min, self.y_max];
        if bounds.iter().any(|v| !v.is_finite()) || self.x_max <= self.x_min || self.y_max <= self.y_min {
            return Err(Error::domain("grid bounds", format!("{self:?}")));
        }
        for n in [self.nx, self.ny] {
            if n < 4 || !n.is_power_of_two() {
                return Err(Error::domain("grid size", format!("{n} is not a power of two >= 4")));
            }
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_min + j as f64 * self.dy()
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The grid grown by `hx`, `hy` nodes on each side, same spacing.
    pub(crate) fn extended(&self, hx: usize, hy: usize) -> ExtendedGrid {
        ExtendedGrid {
            x0: self.x_min - hx as f64 * self.dx(),
            y0: self.y_min - hy as f64 * self.dy(),
            dx: self.dx(),
            dy: self.dy(),
            nx: self.nx + 2 * hx,
            ny: self.ny + 2 * hy,
        }
    }
}

/// Arbitrary-size grid used for convolution intermediates.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ExtendedGrid {
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
    pub nx: usize,
    pub ny: usize,
}

impl ExtendedGrid {
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64 + Sync) -> Vec<f64> {
        (0..self.nx * self.ny)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / self.ny, idx % self.ny);
                f(self.x0 + i as f64 * self.dx, self.y0 + j as f64 * self.dy)
            })
            .collect()
    }
}

/// A sampled probability density of outcomes `tau = x + iy`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeGrid {
    pub spec: GridSpec,
    /// Clamped to be non-negative.
    pub density: Vec<f64>,
    /// Minimum before clamping.
    pub pre_clamp_min: f64,
    /// Largest imaginary residue left by the inverse transform.
    pub imag_residual: f64,
}

impl OutcomeGrid {
    pub fn from_values(spec: GridSpec, mut values: Vec<f64>, imag_residual: f64) -> Self {
        assert_eq!(values.len(), spec.len());
        let pre_clamp_min = values.iter().copied().fold(f64::INFINITY, f64::min);
        for v in values.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        OutcomeGrid {
            spec,
            density: values,
            pre_clamp_min,
            imag_residual,
        }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.density[i * self.spec.ny + j]
    }

    /// Trapezoid weights `w_i w_j dx dy`.
    fn trapezoid_weight(&self, i: usize, j: usize) -> f64 {
        let edge = |k: usize, n: usize| if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        edge(i, self.spec.nx) * edge(j, self.spec.ny) * self.spec.dx() * self.spec.dy()
    }

    /// `int f(x, y) K(x, y) dx dy` by the 2-D trapezoid rule.
    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.spec.nx {
            let x = self.spec.x(i);
            for j in 0..self.spec.ny {
                acc += self.trapezoid_weight(i, j) * self.at(i, j) * f(x, self.spec.y(j));
            }
        }
        acc
    }

    pub fn mass(&self) -> f64 {
        self.integrate(|_, _| 1.0)
    }

    pub fn check_mass(&self, tol: f64) -> Result<f64> {
        let mass = self.mass();
        if (mass - 1.0).abs() > tol {
            return Err(Error::Mass { mass, tol });
        }
        Ok(mass)
    }

    /// Largest pointwise difference to another grid on the same nodes.
    pub fn max_abs_diff(&self, other: &OutcomeGrid) -> f64 {
        assert_eq!(self.spec, other.spec, "grids differ");
        self.density
            .iter()
            .zip(&other.density)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `sum |a - b| dx dy`.
    pub fn l1_distance(&self, other: &OutcomeGrid) -> f64 {
        assert_eq!(self.spec, other.spec, "grids differ");
        self.density
            .iter()
            .zip(&other.density)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.spec.dx()
            * self.spec.dy()
    }

    /// Bilinear interpolation; zero outside the grid.
    pub fn interpolate(&self, x: f64, y: f64) -> f64 {
        let s = &self.spec;
        let fx = (x - s.x_min) / s.dx();
        let fy = (y - s.y_min) / s.dy();
        if !(0.0..=(s.nx - 1) as f64).contains(&fx) || !(0.0..=(s.ny - 1) as f64).contains(&fy) {
            return 0.0;
        }
        let i = (fx.floor() as usize).min(s.nx - 2);
        let j = (fy.floor() as usize).min(s.ny - 2);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        (1.0 - tx) * (1.0 - ty) * self.at(i, j)
            + tx * (1.0 - ty) * self.at(i + 1, j)
            + (1.0 - tx) * ty * self.at(i, j + 1)
            + tx * ty * self.at(i + 1, j + 1)
    }

    /// CSV with columns `x,y,density`.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "x,y,density")?;
        for i in 0..self.spec.nx {
            let x = crate::fmt_f64(self.spec.x(i));
            for j in 0..self.spec.ny {
                writeln!(
                    w,
                    "{x},{},{}",
                    crate::fmt_f64(self.spec.y(j)),
                    crate::fmt_f64(self.at(i, j))
                )?;
            }
        }
        Ok(())
    }
}

/// Frequencies `w_k = (k - n/2) dw` paired with a grid of `n` nodes spaced `d`.
fn frequencies(n: usize, d: f64) -> Vec<f64> {
    let dw = 2.0 * PI / (n as f64 * d);
    (0..n).map(|k| (k as f64 - (n / 2) as f64) * dw).collect()
}

/// In-place 2-D FFT of a row-major `nx x ny` array.
fn fft2(data: &mut [Complex64], nx: usize, ny: usize, direction: FftDirection) {
    let mut planner = FftPlanner::new();
    let row_fft = planner.plan_fft(ny, direction);
    data.par_chunks_mut(ny).for_each(|row| row_fft.process(row));
    let col_fft = planner.plan_fft(nx, direction);
    let mut cols = vec![Complex64::new(0.0, 0.0); nx * ny];
    for i in 0..nx {
        for j in 0..ny {
            cols[j * nx + i] = data[i * ny + j];
        }
    }
    cols.par_chunks_mut(nx).for_each(|col| col_fft.process(col));
    for i in 0..nx {
        for j in 0..ny {
            data[i * ny + j] = cols[j * nx + i];
        }
    }
}

/// Samples `f(x, y)` from its characteristic function
/// `cf(wx, wy) = int f exp(-i(wx x + wy y)) dx dy`.
///
/// Returns the real part and the largest imaginary residue.
pub fn invert_characteristic(
    spec: &GridSpec,
    cf: impl Fn(f64, f64) -> Complex64 + Sync,
) -> (Vec<f64>, f64) {
    let (nx, ny) = (spec.nx, spec.ny);
    let wx = frequencies(nx, spec.dx());
    let wy = frequencies(ny, spec.dy());
    let mut data: Vec<Complex64> = (0..nx * ny)
        .into_par_iter()
        .map(|idx| {
            let (k, l) = (idx / ny, idx % ny);
            let shift = Complex64::from_polar(1.0, wx[k] * spec.x_min + wy[l] * spec.y_min);
            cf(wx[k], wy[l]) * shift
        })
        .collect();
    fft2(&mut data, nx, ny, FftDirection::Inverse);
    let norm = (wx[1] - wx[0]) * (wy[1] - wy[0]) / (4.0 * PI * PI);
    let mut imag: f64 = 0.0;
    let values = data
        .iter()
        .enumerate()
        .map(|(idx, z)| {
            let (j, m) = (idx / ny, idx % ny);
            let sign = if (j + m) % 2 == 0 { 1.0 } else { -1.0 };
            let v = z * sign * norm;
            imag = imag.max(v.im.abs());
            v.re
        })
        .collect();
    (values, imag)
}

/// "Valid" 2-D linear convolution: `out[i][j] = sum_{a,b} f[i + 2hx - a][j + 2hy - b]
/// k[a][b]` where `k` is `(2hx+1) x (2hy+1)` and `f` is `(nx + 2hx) x (ny + 2hy)`.
/// Output is `nx x ny`.
pub(crate) fn convolve_valid(
    f: &[f64],
    fnx: usize,
    fny: usize,
    kernel: &[f64],
    knx: usize,
    kny: usize,
) -> Vec<f64> {
    let px = (fnx + knx - 1).next_power_of_two();
    let py = (fny + kny - 1).next_power_of_two();
    let embed = |src: &[f64], sx: usize, sy: usize| {
        let mut buf = vec![Complex64::new(0.0, 0.0); px * py];
        for i in 0..sx {
            for j in 0..sy {
                buf[i * py + j] = Complex64::new(src[i * sy + j], 0.0);
            }
        }
        buf
    };
    let mut a = embed(f, fnx, fny);
    let mut b = embed(kernel, knx, kny);
    fft2(&mut a, px, py, FftDirection::Forward);
    fft2(&mut b, px, py, FftDirection::Forward);
    a.par_iter_mut().zip(b.par_iter()).for_each(|(x, y)| *x *= y);
    fft2(&mut a, px, py, FftDirection::Inverse);
    let scale = 1.0 / (px * py) as f64;
    let (onx, ony) = (fnx + 1 - knx, fny + 1 - kny);
    let (ox, oy) = (knx - 1, kny - 1);
    let mut out = Vec::with_capacity(onx * ony);
    for i in 0..onx {
        for j in 0..ony {
            out.push(a[(i + ox) * py + j + oy].re * scale);
        }
    }
    out
}
