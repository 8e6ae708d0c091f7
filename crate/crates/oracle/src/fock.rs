//! Truncated Fock spaces and sparse operators on them.
//!
//! Basis states of an `m`-mode space with cutoff `n_max` are indexed with
//! mode 1 most significant: `|n1, n2, n3> -> (n1 (n_max + 1) + n2)(n_max + 1) + n3`.
//! Mode labels are 1-based.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Fock cutoff and the margin below it on which identities are asserted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TruncationSpec {
    pub n_max: usize,
    pub buffer: usize,
}

impl TruncationSpec {
    /// Requires `buffer >= 2` and `n_max >= 4 buffer`.
    pub fn new(n_max: usize, buffer: usize) -> Result<Self> {
        if buffer < 2 {
            return Err(Error::Domain(format!("buffer {buffer} < 2")));
        }
        if n_max < 4 * buffer {
            return Err(Error::Domain(format!("n_max {n_max} < 4 * buffer = {}", 4 * buffer)));
        }
        Ok(TruncationSpec { n_max, buffer })
    }

    /// Skips the invariants. Used to demonstrate how identities break at the
    /// cutoff; only `n_max >= 1` is required.
    pub fn diagnostic(n_max: usize, buffer: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::Domain("n_max must be at least 1".into()));
        }
        Ok(TruncationSpec { n_max, buffer })
    }

    /// Largest per-mode index inside the safe subspace.
    pub fn safe_max(&self) -> usize {
        self.n_max.saturating_sub(self.buffer)
    }
}

/// Sparse operator on an `m`-mode truncated Fock space, stored by rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    n_max: usize,
    modes: usize,
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl FockOperator {
    pub fn zeros(n_max: usize, modes: usize) -> Self {
        let dim = (n_max + 1).pow(modes as u32);
        FockOperator {
            n_max,
            modes,
            rows: vec![Vec::new(); dim],
        }
    }

    pub fn identity(n_max: usize, modes: usize) -> Self {
        let mut op = Self::zeros(n_max, modes);
        for (i, row) in op.rows.iter_mut().enumerate() {
            row.push((i, Complex64::new(1.0, 0.0)));
        }
        op
    }

    pub fn diagonal(n_max: usize, modes: usize, f: impl Fn(&[usize]) -> Complex64) -> Self {
        let mut op = Self::zeros(n_max, modes);
        for i in 0..op.dim() {
            let v = f(&op.occupations(i));
            if v != ZERO {
                op.rows[i].push((i, v));
            }
        }
        op
    }

    /// Builds from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(n_max: usize, modes: usize, triplets: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Self {
        let mut op = Self::zeros(n_max, modes);
        for (i, j, v) in triplets {
            op.rows[i].push((j, v));
        }
        for row in &mut op.rows {
            normalize_row(row);
        }
        op
    }

    /// Annihilation operator of `mode`, truncated at `n_max`.
    pub fn annihilation(n_max: usize, modes: usize, mode: usize) -> Result<Self> {
        check_mode(mode, modes)?;
        let mut op = Self::zeros(n_max, modes);
        let stride = op.stride(mode);
        for i in 0..op.dim() {
            let n = (i / stride) % (n_max + 1);
            if n < n_max {
                // <n| a |n + 1> = sqrt(n + 1)
                op.rows[i].push((i + stride, Complex64::new(((n + 1) as f64).sqrt(), 0.0)));
            }
        }
        Ok(op)
    }

    pub fn creation(n_max: usize, modes: usize, mode: usize) -> Result<Self> {
        Ok(Self::annihilation(n_max, modes, mode)?.adjoint())
    }

    pub fn number(n_max: usize, modes: usize, mode: usize) -> Result<Self> {
        check_mode(mode, modes)?;
        Ok(Self::diagonal(n_max, modes, |occ| Complex64::new(occ[mode - 1] as f64, 0.0)))
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row(&self, i: usize) -> &[(usize, Complex64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match self.rows[i].binary_search_by_key(&j, |e| e.0) {
            Ok(k) => self.rows[i][k].1,
            Err(_) => ZERO,
        }
    }

    fn stride(&self, mode: usize) -> usize {
        (self.n_max + 1).pow((self.modes - mode) as u32)
    }

    /// Basis index of an occupation tuple.
    pub fn index(&self, occ: &[usize]) -> usize {
        occ.iter().fold(0, |acc, &n| acc * (self.n_max + 1) + n)
    }

    /// Occupation tuple of a basis index.
    pub fn occupations(&self, mut i: usize) -> Vec<usize> {
        let mut occ = vec![0; self.modes];
        for slot in occ.iter_mut().rev() {
            *slot = i % (self.n_max + 1);
            i /= self.n_max + 1;
        }
        occ
    }

    fn check_shape(&self, other: &Self) {
        assert_eq!(
            (self.n_max, self.modes),
            (other.n_max, other.modes),
            "operators live on different spaces"
        );
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.n_max, self.modes);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                out.rows[j].push((i, v.conj()));
            }
        }
        // Rows were visited in increasing order, so columns are already sorted.
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for row in &mut out.rows {
            for e in row.iter_mut() {
                e.1 *= c;
            }
            row.retain(|e| e.1 != ZERO);
        }
        out
    }

    /// `self + c other`.
    pub fn add_scaled(&self, other: &Self, c: Complex64) -> Self {
        self.check_shape(other);
        let rows = self
            .rows
            .par_iter()
            .zip(other.rows.par_iter())
            .map(|(a, b)| {
                let mut row: Vec<(usize, Complex64)> = a.iter().copied().chain(b.iter().map(|&(j, v)| (j, c * v))).collect();
                normalize_row(&mut row);
                row
            })
            .collect();
        FockOperator {
            n_max: self.n_max,
            modes: self.modes,
            rows,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_scaled(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(other, Complex64::new(-1.0, 0.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_shape(other);
        let dim = self.dim();
        let rows = self
            .rows
            .par_iter()
            .map_init(
                || (vec![ZERO; dim], vec![false; dim], Vec::new()),
                |(acc, seen, touched), row| {
                    for &(k, a) in row {
                        for &(j, b) in &other.rows[k] {
                            if !seen[j] {
                                seen[j] = true;
                                touched.push(j);
                            }
                            acc[j] += a * b;
                        }
                    }
                    touched.sort_unstable();
                    let mut out = Vec::with_capacity(touched.len());
                    for &j in touched.iter() {
                        if acc[j] != ZERO {
                            out.push((j, acc[j]));
                        }
                        acc[j] = ZERO;
                        seen[j] = false;
                    }
                    touched.clear();
                    out
                },
            )
            .collect();
        FockOperator {
            n_max: self.n_max,
            modes: self.modes,
            rows,
        }
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_on(|_| true)
    }

    /// Largest `|<i|A|j>|` with both `i` and `j` kept by the predicate on
    /// occupation tuples.
    pub fn max_abs_on(&self, keep: impl Fn(&[usize]) -> bool + Sync) -> f64 {
        let kept: Vec<bool> = (0..self.dim()).map(|i| keep(&self.occupations(i))).collect();
        self.rows
            .par_iter()
            .enumerate()
            .filter(|(i, _)| kept[*i])
            .map(|(_, row)| row.iter().filter(|e| kept[e.0]).map(|e| e.1.norm()).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max)
    }

    /// Dense product `self . m` for a row-major `dim x ncols` matrix.
    pub fn apply_dense(&self, m: &[Complex64], ncols: usize) -> Vec<Complex64> {
        assert_eq!(m.len(), self.dim() * ncols, "dense operand has the wrong shape");
        let mut out = vec![ZERO; m.len()];
        out.par_chunks_mut(ncols).zip(self.rows.par_iter()).for_each(|(dst, row)| {
            for &(k, a) in row {
                let src = &m[k * ncols..(k + 1) * ncols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        });
        out
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let d = self.dim();
        let mut out = vec![ZERO; d * d];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                out[i * d + j] = v;
            }
        }
        out
    }
}

fn check_mode(mode: usize, modes: usize) -> Result<()> {
    if mode == 0 || mode > modes {
        return Err(Error::Domain(format!("mode {mode} outside 1..={modes}")));
    }
    Ok(())
}

/// Sorts by column, merges duplicates and drops exact zeros.
fn normalize_row(row: &mut Vec<(usize, Complex64)>) {
    row.sort_unstable_by_key(|e| e.0);
    let mut out: Vec<(usize, Complex64)> = Vec::with_capacity(row.len());
    for &(j, v) in row.iter() {
        match out.last_mut() {
            Some(last) if last.0 == j => last.1 += v,
            _ => out.push((j, v)),
        }
    }
    out.retain(|e| e.1 != ZERO);
    *row = out;
}

/// Every mode index at most `trunc.safe_max()`.
pub fn per_mode_safe(trunc: &TruncationSpec) -> impl Fn(&[usize]) -> bool + Sync {
    let top = trunc.safe_max();
    move |occ: &[usize]| occ.iter().all(|&n| n <= top)
}

/// Total photon number at most `trunc.safe_max()`.
pub fn total_number_safe(trunc: &TruncationSpec) -> impl Fn(&[usize]) -> bool + Sync {
    let top = trunc.safe_max();
    move |occ: &[usize]| occ.iter().sum::<usize>() <= top
}
