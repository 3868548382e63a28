//! Fixed-size complex linear algebra.
//!
//! Everything here works on stack arrays with const-generic shapes. The
//! decoders only ever touch 2- and 4-dimensional objects, so there is no
//! heap allocation on the hot path.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Relative threshold on singular values used by [`rank_numeric`].
pub const RANK_REL_TOL: f64 = 1e-9;

/// Deviation from Hermitian symmetry tolerated by [`eig_hermitian2`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Complex column vector of length `N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CVec<const N: usize>(pub [C64; N]);

/// Row-major complex `R x C` matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMat<const R: usize, const C: usize>(pub [[C64; C]; R]);

impl<const N: usize> CVec<N> {
    pub const fn zeros() -> Self {
        CVec([ZERO; N])
    }

    pub const fn new(entries: [C64; N]) -> Self {
        CVec(entries)
    }

    pub fn len(&self) -> usize {
        N
    }

    pub fn is_empty(&self) -> bool {
        N == 0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, C64> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn conj(&self) -> Self {
        CVec(self.0.map(|z| z.conj()))
    }

    pub fn scale(&self, a: f64) -> Self {
        CVec(self.0.map(|z| z * a))
    }

    /// Hermitian inner product `self^H other`.
    pub fn dot(&self, other: &Self) -> C64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl CVec<4> {
    /// Stacks two pairs into `[u; v]`.
    pub fn join(u: &CVec<2>, v: &CVec<2>) -> Self {
        CVec([u[0], u[1], v[0], v[1]])
    }

    /// Splits `[u; v]` into its two halves.
    pub fn split(&self) -> (CVec<2>, CVec<2>) {
        (CVec([self[0], self[1]]), CVec([self[2], self[3]]))
    }
}

impl<const N: usize> Default for CVec<N> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const N: usize> From<[C64; N]> for CVec<N> {
    fn from(entries: [C64; N]) -> Self {
        CVec(entries)
    }
}

impl<const N: usize> Index<usize> for CVec<N> {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl<const N: usize> IndexMut<usize> for CVec<N> {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.0[i]
    }
}

impl<const N: usize> Add for CVec<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        CVec(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl<const N: usize> Sub for CVec<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        CVec(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl<const N: usize> Neg for CVec<N> {
    type Output = Self;
    fn neg(self) -> Self {
        CVec(self.0.map(|z| -z))
    }
}

impl<const R: usize, const C: usize> CMat<R, C> {
    pub const fn zeros() -> Self {
        CMat([[ZERO; C]; R])
    }

    pub const fn from_rows(rows: [[C64; C]; R]) -> Self {
        CMat(rows)
    }

    pub const fn rows(&self) -> usize {
        R
    }

    pub const fn cols(&self) -> usize {
        C
    }

    pub fn hermitian(&self) -> CMat<C, R> {
        CMat(std::array::from_fn(|i| std::array::from_fn(|j| self.0[j][i].conj())))
    }

    pub fn transpose(&self) -> CMat<C, R> {
        CMat(std::array::from_fn(|i| std::array::from_fn(|j| self.0[j][i])))
    }

    pub fn conj(&self) -> Self {
        CMat(self.0.map(|row| row.map(|z| z.conj())))
    }

    pub fn scale(&self, a: f64) -> Self {
        CMat(self.0.map(|row| row.map(|z| z * a)))
    }

    pub fn scale_complex(&self, a: C64) -> Self {
        CMat(self.0.map(|row| row.map(|z| z * a)))
    }

    pub fn mul_vec(&self, x: &CVec<C>) -> CVec<R> {
        CVec(std::array::from_fn(|i| {
            self.0[i]
                .iter()
                .zip(x.0.iter())
                .fold(ZERO, |acc, (a, b)| acc + a * b)
        }))
    }

    pub fn mul_mat<const K: usize>(&self, other: &CMat<C, K>) -> CMat<R, K> {
        let mut out = CMat::<R, K>::zeros();
        for i in 0..R {
            for k in 0..C {
                let a = self.0[i][k];
                for j in 0..K {
                    out.0[i][j] += a * other.0[k][j];
                }
            }
        }
        out
    }

    /// Gram matrix `self^H self`.
    pub fn gram(&self) -> CMat<C, C> {
        let mut out = CMat::<C, C>::zeros();
        for i in 0..C {
            for j in i..C {
                let mut acc = ZERO;
                for r in 0..R {
                    acc += self.0[r][i].conj() * self.0[r][j];
                }
                out.0[i][j] = acc;
                out.0[j][i] = acc.conj();
            }
            out.0[i][i].im = 0.0;
        }
        out
    }

    pub fn col(&self, j: usize) -> CVec<R> {
        CVec(std::array::from_fn(|i| self.0[i][j]))
    }

    pub fn set_col(&mut self, j: usize, v: &CVec<R>) {
        for i in 0..R {
            self.0[i][j] = v[i];
        }
    }

    pub fn frobenius_sqr(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.is_finite())
    }

    /// Copies columns `start..start + K` into a new matrix.
    pub fn columns<const K: usize>(&self, start: usize) -> CMat<R, K> {
        CMat(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][start + j])
        }))
    }
}

impl<const N: usize> CMat<N, N> {
    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = ONE;
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..N).map(|i| self.0[i][i]).sum()
    }

    /// Largest absolute deviation from `self == self^H`.
    pub fn hermitian_deviation(&self) -> f64 {
        self.max_abs_diff(&self.hermitian())
    }
}

impl CMat<4, 4> {
    /// Block-diagonal matrix `diag(a, b)`.
    pub fn block_diag(a: &CMat<2, 2>, b: &CMat<2, 2>) -> Self {
        let mut m = Self::zeros();
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = a.0[i][j];
                m.0[i + 2][j + 2] = b.0[i][j];
            }
        }
        m
    }

    /// Horizontal concatenation `[a b]` of two 4x2 blocks.
    pub fn hcat(a: &CMat<4, 2>, b: &CMat<4, 2>) -> Self {
        CMat(std::array::from_fn(|i| {
            [a.0[i][0], a.0[i][1], b.0[i][0], b.0[i][1]]
        }))
    }
}

impl<const R: usize, const C: usize> Default for CMat<R, C> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const R: usize, const C: usize> Index<(usize, usize)> for CMat<R, C> {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl<const R: usize, const C: usize> IndexMut<(usize, usize)> for CMat<R, C> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl<const R: usize, const C: usize> Add for CMat<R, C> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        CMat(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j] + rhs.0[i][j])
        }))
    }
}

impl<const R: usize, const C: usize> Sub for CMat<R, C> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        CMat(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j] - rhs.0[i][j])
        }))
    }
}

impl<const R: usize, const C: usize> Neg for CMat<R, C> {
    type Output = Self;
    fn neg(self) -> Self {
        CMat(self.0.map(|row| row.map(|z| -z)))
    }
}

impl<const R: usize, const C: usize, const K: usize> Mul<CMat<C, K>> for CMat<R, C> {
    type Output = CMat<R, K>;
    fn mul(self, rhs: CMat<C, K>) -> CMat<R, K> {
        self.mul_mat(&rhs)
    }
}

impl<const R: usize, const C: usize> Mul<CVec<C>> for CMat<R, C> {
    type Output = CVec<R>;
    fn mul(self, rhs: CVec<C>) -> CVec<R> {
        self.mul_vec(&rhs)
    }
}

pub fn det2(m: &CMat<2, 2>) -> C64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// Inverse of a 2x2 matrix.
///
/// Fails with [`Error::SingularMatrix`] when `|det| <= 1e-12 * (|m|_F^2 + 1)`.
pub fn inv2(m: &CMat<2, 2>) -> Result<CMat<2, 2>> {
    let det = det2(m);
    let threshold = 1e-12 * (m.frobenius_sqr() + 1.0);
    if !(det.norm() > threshold) {
        return Err(Error::SingularMatrix {
            magnitude: det.norm(),
            threshold,
        });
    }
    let inv_det = det.inv();
    Ok(CMat([
        [m[(1, 1)] * inv_det, -m[(0, 1)] * inv_det],
        [-m[(1, 0)] * inv_det, m[(0, 0)] * inv_det],
    ]))
}

/// Both eigenvalues of a Hermitian 2x2 matrix, largest first.
pub fn eig_hermitian2(m: &CMat<2, 2>) -> Result<(f64, f64)> {
    let scale = m.max_abs().max(1.0);
    let deviation = m.hermitian_deviation();
    if !(deviation <= HERMITIAN_TOL * scale) {
        return Err(Error::NotHermitian { deviation });
    }
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let mean = 0.5 * (a + d);
    let half_gap = 0.5 * (a - d);
    let radius = half_gap.hypot(b.norm());
    Ok((mean + radius, mean - radius))
}

/// Singular values of `m`, largest first, by one-sided Jacobi rotations.
///
/// Works directly on the columns (no Gram matrix), so small singular values
/// keep full relative accuracy. The returned array has `min(R, C)` meaningful
/// entries, taken from whichever orientation has fewer columns.
pub fn singular_values<const R: usize, const C: usize>(m: &CMat<R, C>) -> Vec<f64> {
    if C <= R {
        let cols: Vec<Vec<C64>> = (0..C).map(|j| m.col(j).0.to_vec()).collect();
        hestenes(cols)
    } else {
        let h = m.hermitian();
        let cols: Vec<Vec<C64>> = (0..R).map(|j| h.col(j).0.to_vec()).collect();
        hestenes(cols)
    }
}

fn hestenes(mut cols: Vec<Vec<C64>>) -> Vec<f64> {
    let n = cols.len();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = cols[p]
                    .iter()
                    .zip(cols[q].iter())
                    .fold(ZERO, |acc, (a, b)| acc + a.conj() * b);
                let g = gamma.norm();
                if g <= f64::EPSILON * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                // Rotate column q so the cross term becomes real and positive.
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..cols[p].len() {
                    let ap = cols[p][r];
                    let aq = cols[q][r] * phase;
                    cols[p][r] = ap * c - aq * s;
                    cols[q][r] = ap * s + aq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Numerical rank: singular values above `1e-9 * sigma_max`.
pub fn rank_numeric<const R: usize, const C: usize>(m: &CMat<R, C>) -> usize {
    let sv = singular_values(m);
    let largest = sv.first().copied().unwrap_or(0.0);
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_REL_TOL * largest).count()
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve<const N: usize>(a: &CMat<N, N>, b: &CVec<N>) -> Result<CVec<N>> {
    let mut m = *a;
    let mut x = *b;
    let threshold = 1e-12 * a.max_abs().max(f64::MIN_POSITIVE);
    for k in 0..N {
        let (pivot_row, pivot_mag) = (k..N)
            .map(|r| (r, m[(r, k)].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(pivot_mag > threshold) {
            return Err(Error::SingularMatrix {
                magnitude: pivot_mag.max(0.0),
                threshold,
            });
        }
        if pivot_row != k {
            m.0.swap(k, pivot_row);
            x.0.swap(k, pivot_row);
        }
        let inv_pivot = m[(k, k)].inv();
        for r in (k + 1)..N {
            let factor = m[(r, k)] * inv_pivot;
            if factor == ZERO {
                continue;
            }
            for c in k..N {
                let delta = factor * m[(k, c)];
                m[(r, c)] -= delta;
            }
            let delta = factor * x[k];
            x[r] -= delta;
        }
    }
    for k in (0..N).rev() {
        let mut acc = x[k];
        for c in (k + 1)..N {
            acc -= m[(k, c)] * x[c];
        }
        x[k] = acc / m[(k, k)];
    }
    Ok(x)
}
