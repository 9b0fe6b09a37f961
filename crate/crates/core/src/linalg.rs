//! Dense row-major matrices and least squares via Householder QR.
//!
//! `lstsq` factors `A P = Q R` with column pivoting. When `R` is numerically
//! full rank the solution comes from back substitution; otherwise the
//! trailing block is dropped and the minimum-norm solution is recovered
//! through a second QR of the leading `r x n` block (a complete orthogonal
//! decomposition).

#![allow(clippy::needless_range_loop)]

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::LengthMismatch {
                    left: r.len(),
                    right: cols,
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Rows selected by index (duplicates allowed).
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }
}

/// Householder QR in compact form: `R` in the upper triangle, reflector
/// tails below the diagonal (unit leading entry implied).
struct Qr {
    a: Matrix,
    taus: Vec<f64>,
    perm: Vec<usize>,
}

fn householder_qr(mut a: Matrix, pivot: bool) -> Qr {
    let (m, n) = (a.rows, a.cols);
    let steps = m.min(n);
    let mut taus = Vec::with_capacity(steps);
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..steps {
        if pivot {
            let norm2 = |a: &Matrix, j: usize| (k..m).map(|i| a.get(i, j) * a.get(i, j)).sum::<f64>();
            let mut best = k;
            let mut best_norm = norm2(&a, k);
            for j in k + 1..n {
                let nj = norm2(&a, j);
                if nj > best_norm {
                    best = j;
                    best_norm = nj;
                }
            }
            if best != k {
                for i in 0..m {
                    let t = a.get(i, k);
                    a.set(i, k, a.get(i, best));
                    a.set(i, best, t);
                }
                perm.swap(k, best);
            }
        }
        let x0 = a.get(k, k);
        let norm = libm::sqrt((k..m).map(|i| a.get(i, k) * a.get(i, k)).sum::<f64>());
        if norm == 0.0 {
            taus.push(0.0);
            continue;
        }
        let beta = if x0 >= 0.0 { -norm } else { norm };
        let scale = x0 - beta;
        for i in k + 1..m {
            a.set(i, k, a.get(i, k) / scale);
        }
        let tau = (beta - x0) / beta;
        a.set(k, k, beta);
        for j in k + 1..n {
            let mut w = a.get(k, j);
            for i in k + 1..m {
                w += a.get(i, k) * a.get(i, j);
            }
            w *= tau;
            a.set(k, j, a.get(k, j) - w);
            for i in k + 1..m {
                a.set(i, j, a.get(i, j) - w * a.get(i, k));
            }
        }
        taus.push(tau);
    }
    Qr { a, taus, perm }
}

impl Qr {
    /// b <- Q^T b
    fn apply_qt(&self, b: &mut [f64]) {
        let m = self.a.rows;
        for (k, &tau) in self.taus.iter().enumerate() {
            if tau == 0.0 {
                continue;
            }
            let mut w = b[k];
            for i in k + 1..m {
                w += self.a.get(i, k) * b[i];
            }
            w *= tau;
            b[k] -= w;
            for i in k + 1..m {
                b[i] -= w * self.a.get(i, k);
            }
        }
    }

    /// b <- Q b
    fn apply_q(&self, b: &mut [f64]) {
        let m = self.a.rows;
        for (k, &tau) in self.taus.iter().enumerate().rev() {
            if tau == 0.0 {
                continue;
            }
            let mut w = b[k];
            for i in k + 1..m {
                w += self.a.get(i, k) * b[i];
            }
            w *= tau;
            b[k] -= w;
            for i in k + 1..m {
                b[i] -= w * self.a.get(i, k);
            }
        }
    }

    fn rank(&self) -> usize {
        let n = self.taus.len();
        if n == 0 {
            return 0;
        }
        let r00 = libm::fabs(self.a.get(0, 0));
        if r00 == 0.0 {
            return 0;
        }
        let tol = r00 * f64::EPSILON * self.a.rows.max(self.a.cols) as f64 * 10.0;
        (0..n)
            .take_while(|&i| libm::fabs(self.a.get(i, i)) > tol)
            .count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstsqSolution {
    pub coefficients: Vec<f64>,
    pub rank: usize,
    /// Set when the design was rank deficient and the minimum-norm
    /// solution was returned.
    pub rank_deficient: bool,
}

/// Minimizes `||A x - b||`; rank-deficient systems get the minimum-norm
/// minimizer.
pub fn lstsq(a: &Matrix, b: &[f64]) -> Result<LstsqSolution> {
    let (m, n) = (a.rows, a.cols);
    if b.len() != m {
        return Err(Error::LengthMismatch { left: b.len(), right: m });
    }
    if m < n {
        return Err(Error::Underdetermined { rows: m, cols: n });
    }
    if n == 0 {
        return Ok(LstsqSolution {
            coefficients: Vec::new(),
            rank: 0,
            rank_deficient: false,
        });
    }
    let qr = householder_qr(a.clone(), true);
    let rank = qr.rank();
    let mut qtb = b.to_vec();
    qr.apply_qt(&mut qtb);

    let mut z = vec![0.0; n];
    if rank == n {
        for i in (0..n).rev() {
            let mut s = qtb[i];
            for j in i + 1..n {
                s -= qr.a.get(i, j) * z[j];
            }
            z[i] = s / qr.a.get(i, i);
        }
    } else if rank > 0 {
        // R1 = leading rank x n block of R; factor R1^T = Z T.
        let mut r1t = Matrix::zeros(n, rank);
        for i in 0..rank {
            for j in i..n {
                r1t.set(j, i, qr.a.get(i, j));
            }
        }
        let cod = householder_qr(r1t, false);
        // T^T u = c by forward substitution
        let mut u = vec![0.0; n];
        for i in 0..rank {
            let mut s = qtb[i];
            for j in 0..i {
                s -= cod.a.get(j, i) * u[j];
            }
            u[i] = s / cod.a.get(i, i);
        }
        cod.apply_q(&mut u);
        z = u;
    }
    let mut coefficients = vec![0.0; n];
    for (k, &col) in qr.perm.iter().enumerate() {
        coefficients[col] = z[k];
    }
    Ok(LstsqSolution {
        coefficients,
        rank,
        rank_deficient: rank < n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let a = Matrix::from_rows(&[[1.0, 0.0], [1.0, 1.0], [1.0, 2.0], [1.0, 3.0]]).unwrap();
        let b = [1.0, 3.0, 5.0, 7.0];
        let sol = lstsq(&a, &b).unwrap();
        assert!((sol.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((sol.coefficients[1] - 2.0).abs() < 1e-12);
        assert!(!sol.rank_deficient);
    }

    #[test]
    fn underdetermined() {
        let a = Matrix::zeros(2, 4);
        assert_eq!(
            lstsq(&a, &[0.0, 0.0]),
            Err(Error::Underdetermined { rows: 2, cols: 4 })
        );
    }

    #[test]
    fn duplicate_columns_min_norm() {
        // y = 2 x with x duplicated: min-norm splits the weight evenly.
        let rows: Vec<[f64; 3]> = (0..6).map(|i| [1.0, i as f64, i as f64]).collect();
        let a = Matrix::from_rows(&rows).unwrap();
        let b: Vec<f64> = (0..6).map(|i| 2.0 * i as f64 + 0.5).collect();
        let sol = lstsq(&a, &b).unwrap();
        assert!(sol.rank_deficient);
        assert_eq!(sol.rank, 2);
        assert!((sol.coefficients[0] - 0.5).abs() < 1e-10);
        assert!((sol.coefficients[1] - 1.0).abs() < 1e-10);
        assert!((sol.coefficients[2] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_matrix_gives_zero_solution() {
        let a = Matrix::zeros(3, 2);
        let sol = lstsq(&a, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(sol.coefficients, vec![0.0, 0.0]);
        assert_eq!(sol.rank, 0);
    }
}
