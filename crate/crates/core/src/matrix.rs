//! Symmetric cyclic tridiagonal matrices (the periodic second-difference
//! stencil plus a diagonal) and the solvers used on them.
//!
//! Eigenvalues come from Sturm bisection on an `O(n)` inertia count,
//! eigenvectors from inverse iteration. A dense route through `nalgebra` is
//! kept for cross-checks.

use std::ops::{Add, Div, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// `A[i][i] = diag[i]`, `A[i][i±1 mod n] = off`.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicTridiagonal {
    diag: Vec<f64>,
    off: f64,
}

impl CyclicTridiagonal {
    pub fn new(diag: Vec<f64>, off: f64) -> Result<Self> {
        if diag.len() < 3 {
            return Err(Error::Domain("cyclic tridiagonal needs n ≥ 3".into()));
        }
        Ok(CyclicTridiagonal { diag, off })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> f64 {
        self.off
    }

    /// Adds `v` to every diagonal entry.
    pub fn shifted(&self, v: f64) -> Self {
        CyclicTridiagonal { diag: self.diag.iter().map(|d| d + v).collect(), off: self.off }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| self.diag[i] * x[i] + self.off * (x[(i + n - 1) % n] + x[(i + 1) % n]))
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            m[(i, (i + 1) % n)] += self.off;
            m[((i + 1) % n, i)] += self.off;
        }
        m
    }

    /// Gershgorin interval containing the spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let r = 2.0 * self.off.abs();
        let lo = self.diag.iter().fold(f64::INFINITY, |a, &d| a.min(d - r));
        let hi = self.diag.iter().fold(f64::NEG_INFINITY, |a, &d| a.max(d + r));
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `sigma`, by Sylvester inertia of
    /// `A − σI` through an `LDLᵀ` sweep of the leading block and the Schur
    /// complement of the last row.
    pub fn count_below(&self, sigma: f64) -> usize {
        let n = self.n();
        let o = self.off;
        let tiny = f64::EPSILON * (self.spectral_bounds().1.abs() + sigma.abs() + 1.0) * 1e-3;
        let m = n - 1;
        let mut p = vec![0.0; m];
        let mut count = 0;
        for i in 0..m {
            let mut v = self.diag[i] - sigma;
            if i > 0 {
                v -= o * o / p[i - 1];
            }
            if v == 0.0 {
                v = -tiny;
            }
            if v < 0.0 {
                count += 1;
            }
            p[i] = v;
        }
        // T y = b with b = o e₀ + o e_{m−1}
        let mut z = vec![0.0; m];
        for i in 0..m {
            let mut b = 0.0;
            if i == 0 {
                b += o;
            }
            if i == m - 1 {
                b += o;
            }
            z[i] = if i == 0 { b } else { b - o / p[i - 1] * z[i - 1] };
        }
        let mut y = vec![0.0; m];
        for i in (0..m).rev() {
            y[i] = if i == m - 1 { z[i] / p[i] } else { z[i] / p[i] - o / p[i] * y[i + 1] };
        }
        let schur = self.diag[n - 1] - sigma - o * (y[0] + y[m - 1]);
        if schur < 0.0 {
            count += 1;
        }
        count
    }

    /// The `j`-th eigenvalue (ascending, 0-based) by bisection on the count.
    pub fn eigenvalue(&self, j: usize) -> f64 {
        let (mut lo, mut hi) = self.spectral_bounds();
        lo -= 1.0;
        hi += 1.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solves `(A − σI) x = rhs` with Sherman–Morrison on the cyclic corner.
    pub fn solve_shifted(&self, sigma: f64, rhs: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = self.diag.iter().map(|v| v - sigma).collect();
        let mut x = rhs.to_vec();
        solve_cyclic(&d, self.off, &mut x);
        x
    }

    /// The lowest `m` eigenpairs, vectors normalized in the Euclidean norm.
    /// Near-degenerate eigenvalues are resolved as a block.
    pub fn lowest_eigenpairs(&self, m: usize) -> Vec<(f64, Vec<f64>)> {
        let n = self.n();
        let m = m.min(n);
        let values: Vec<f64> = (0..m).map(|j| self.eigenvalue(j)).collect();
        let (lo, hi) = self.spectral_bounds();
        let scale = lo.abs().max(hi.abs()).max(1.0);
        let cluster_tol = 1e-9 * scale;
        let mut out: Vec<(f64, Vec<f64>)> = Vec::with_capacity(m);
        let mut start = 0;
        while start < m {
            let mut end = start + 1;
            while end < m && values[end] - values[end - 1] < cluster_tol {
                end += 1;
            }
            let mut block: Vec<Vec<f64>> = Vec::new();
            for j in start..end {
                let lam = values[j];
                let sigma = lam - 1e-11 * scale;
                let mut v = seed_vector(n, j);
                for _ in 0..4 {
                    orthogonalize(&mut v, &block);
                    orthogonalize(&mut v, out.iter().map(|p| &p.1));
                    normalize(&mut v);
                    v = self.solve_shifted(sigma, &v);
                    if v.iter().any(|x| !x.is_finite()) {
                        v = seed_vector(n, j + 17);
                    }
                }
                orthogonalize(&mut v, &block);
                orthogonalize(&mut v, out.iter().map(|p| &p.1));
                normalize(&mut v);
                block.push(v);
            }
            for (j, v) in (start..end).zip(block) {
                let av = self.apply(&v);
                let rq: f64 = av.iter().zip(&v).map(|(a, b)| a * b).sum();
                // Rayleigh quotient of a converged vector refines the bisection value
                let lam = if (rq - values[j]).abs() < 1e-6 * scale { rq } else { values[j] };
                out.push((lam, v));
            }
            start = end;
        }
        out
    }

    /// All eigenpairs through a dense symmetric solve, ascending.
    pub fn dense_eigen(&self) -> Vec<(f64, Vec<f64>)> {
        let eig = SymmetricEigen::new(self.to_dense());
        let mut pairs: Vec<(f64, Vec<f64>)> = (0..self.n())
            .map(|j| (eig.eigenvalues[j], eig.eigenvectors.column(j).iter().copied().collect()))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs
    }

    /// Residual `‖Av − λv‖∞`.
    pub fn residual(&self, lam: f64, v: &[f64]) -> f64 {
        self.apply(v).iter().zip(v).map(|(a, b)| (a - lam * b).abs()).fold(0.0, f64::max)
    }
}

fn seed_vector(n: usize, j: usize) -> Vec<f64> {
    let mut s: u64 = 0x9E37_79B9_7F4A_7C15 ^ (j as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    (0..n)
        .map(|_| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

fn orthogonalize<'a, I: IntoIterator<Item = &'a Vec<f64>>>(v: &mut [f64], basis: I) {
    for b in basis {
        let d: f64 = v.iter().zip(b.iter()).map(|(x, y)| x * y).sum();
        for (x, y) in v.iter_mut().zip(b.iter()) {
            *x -= d * y;
        }
    }
}

fn normalize(v: &mut [f64]) {
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
}

/// Scalars accepted by the tridiagonal solvers.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + From<f64>
{
}

impl<T> Scalar for T where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Div<Output = T> + From<f64>
{
}

/// Thomas algorithm for a general tridiagonal system; `sub[0]` and
/// `sup[n−1]` are ignored. Overwrites `rhs` with the solution.
pub fn solve_tridiagonal<T: Scalar>(sub: &[T], diag: &[T], sup: &[T], rhs: &mut [T]) {
    let n = diag.len();
    let mut c = Vec::with_capacity(n);
    let mut beta = diag[0];
    c.push(sup[0] / beta);
    rhs[0] = rhs[0] / beta;
    for i in 1..n {
        beta = diag[i] - sub[i] * c[i - 1];
        let ci = if i + 1 < n { sup[i] / beta } else { T::from(0.0) };
        c.push(ci);
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] = rhs[i] - c[i] * rhs[i + 1];
    }
}

/// Symmetric cyclic tridiagonal solve with constant off-diagonal `off`
/// (Sherman–Morrison on the corner entries).
pub fn solve_cyclic<T: Scalar>(diag: &[T], off: T, rhs: &mut [T]) {
    let n = diag.len();
    let gamma = T::from(0.0) - diag[0];
    let mut d = diag.to_vec();
    d[0] = d[0] - gamma;
    d[n - 1] = d[n - 1] - off * off / gamma;
    let sub = vec![off; n];
    let sup = vec![off; n];
    let mut u = vec![T::from(0.0); n];
    u[0] = gamma;
    u[n - 1] = off;
    solve_tridiagonal(&sub, &d, &sup, rhs);
    solve_tridiagonal(&sub, &d, &sup, &mut u);
    let fact = (rhs[0] + off * rhs[n - 1] / gamma) / (T::from(1.0) + u[0] + off * u[n - 1] / gamma);
    for i in 0..n {
        rhs[i] = rhs[i] - fact * u[i];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn laplacian(n: usize, l: f64) -> CyclicTridiagonal {
        let h = 2.0 * l / n as f64;
        CyclicTridiagonal::new(vec![2.0 / (h * h); n], -1.0 / (h * h)).unwrap()
    }

    #[test]
    fn circulant_eigenvalues_closed_form() {
        let n = 64;
        let a = laplacian(n, 1.0);
        let h = 2.0 / n as f64;
        let mut exact: Vec<f64> =
            (0..n).map(|j| 4.0 / (h * h) * (std::f64::consts::PI * j as f64 / n as f64).sin().powi(2)).collect();
        exact.sort_by(f64::total_cmp);
        let scale = 4.0 / (h * h);
        for (j, e) in exact.iter().enumerate() {
            assert!((a.eigenvalue(j) - e).abs() < 1e-9 * scale, "j={j}");
        }
        for (j, (v, _)) in a.lowest_eigenpairs(9).iter().enumerate() {
            assert!((v - exact[j]).abs() < 1e-12 * scale, "j={j} {v} {}", exact[j]);
        }
    }

    #[test]
    fn inertia_matches_dense() {
        let n = 40;
        let diag: Vec<f64> = (0..n).map(|i| 2.0 + 3.0 * (0.37 * i as f64).sin()).collect();
        let a = CyclicTridiagonal::new(diag, -1.1).unwrap();
        let dense = a.dense_eigen();
        for s in [-3.0, -1.0, 0.0, 0.5, 2.0, 4.0, 7.0] {
            let c = dense.iter().filter(|p| p.0 < s).count();
            assert_eq!(a.count_below(s), c, "sigma={s}");
        }
    }

    #[test]
    fn lowest_pairs_match_dense() {
        let n = 128;
        let h = 1.0 / n as f64;
        let diag: Vec<f64> = (0..n).map(|i| 2.0 / (h * h) - 40.0 * (6.28 * i as f64 / n as f64).cos()).collect();
        let a = CyclicTridiagonal::new(diag, -1.0 / (h * h)).unwrap();
        let dense = a.dense_eigen();
        let low = a.lowest_eigenpairs(6);
        for (j, (lam, v)) in low.iter().enumerate() {
            assert!((lam - dense[j].0).abs() < 1e-8, "j={j}: {lam} vs {}", dense[j].0);
            assert!(a.residual(*lam, v) < 1e-6);
        }
    }

    #[test]
    fn degenerate_block_is_orthonormal() {
        let a = laplacian(32, 1.0);
        let low = a.lowest_eigenpairs(5);
        for i in 0..5 {
            for j in 0..5 {
                let d: f64 = low[i].1.iter().zip(&low[j].1).map(|(x, y)| x * y).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((d - e).abs() < 1e-8, "({i},{j}) {d}");
            }
            assert!(a.residual(low[i].0, &low[i].1) < 1e-6 * low[4].0.max(1.0));
        }
    }

    #[test]
    fn complex_cyclic_solve() {
        let n = 9;
        let diag: Vec<Complex64> = (0..n).map(|i| Complex64::new(3.0 + i as f64 * 0.1, 0.4)).collect();
        let off = Complex64::new(-1.0, 0.2);
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let mut b: Vec<Complex64> =
            (0..n).map(|i| diag[i] * x[i] + off * (x[(i + n - 1) % n] + x[(i + 1) % n])).collect();
        solve_cyclic(&diag, off, &mut b);
        for i in 0..n {
            assert!((b[i] - x[i]).norm() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn count_is_monotone(seed in 0u64..1000, s1 in -5.0f64..5.0, s2 in -5.0f64..5.0) {
            let diag: Vec<f64> = (0..17).map(|i| ((seed as f64 + 1.0) * 0.13 * i as f64).sin() * 2.0).collect();
            let a = CyclicTridiagonal::new(diag, 0.7).unwrap();
            let (lo, hi) = if s1 < s2 { (s1, s2) } else { (s2, s1) };
            prop_assert!(a.count_below(lo) <= a.count_below(hi));
        }
    }
}
