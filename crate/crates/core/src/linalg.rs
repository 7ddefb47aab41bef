//! Row-major dense matrices and LU factorization with partial pivoting.

use crate::error::{Error, Result};

/// Relative pivot size below which a matrix is treated as singular.
pub const PIVOT_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length must be rows·cols");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// `PA = LU` with unit lower `L` and upper `U` packed in one matrix; row
/// `i` of `PA` is row `perm[i]` of `A`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: DenseMatrix,
    perm: Vec<usize>,
    norm_inf: f64,
}

impl LuFactors {
    pub fn factor(mut a: DenseMatrix) -> Result<Self> {
        assert_eq!(a.rows, a.cols, "LU needs a square matrix");
        let n = a.rows;
        let norm_inf = a.norm_inf();
        let tol = PIVOT_TOLERANCE * norm_inf;
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, a[(i, k)].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pivot > tol) {
                return Err(Error::SingularMatrix { column: k, pivot });
            }
            if p != k {
                let (top, bottom) = a.data.split_at_mut(p * n);
                top[k * n..(k + 1) * n].swap_with_slice(&mut bottom[..n]);
                perm.swap(k, p);
            }
            let (head, tail) = a.data.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..];
            let inv = 1.0 / pivot_row[k];
            for row in tail.chunks_exact_mut(n) {
                let l = row[k] * inv;
                row[k] = l;
                if l != 0.0 {
                    for (r, u) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                        *r -= l * u;
                    }
                }
            }
        }
        Ok(Self {
            lu: a,
            perm,
            norm_inf,
        })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    /// `‖A‖_∞` of the factored matrix.
    pub fn matrix_norm_inf(&self) -> f64 {
        self.norm_inf
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s: f64 = row[..i].iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: f64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - s) / row[i];
        }
        x
    }

    /// Solves `Aᵀ x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        // Uᵀ z = b, forward, sweeping rows of U.
        let mut z = b.to_vec();
        for j in 0..n {
            let row = self.lu.row(j);
            z[j] /= row[j];
            let zj = z[j];
            if zj != 0.0 {
                for (zi, u) in z[j + 1..].iter_mut().zip(&row[j + 1..]) {
                    *zi -= u * zj;
                }
            }
        }
        // Lᵀ w = z, backward, sweeping rows of L.
        for j in (0..n).rev() {
            let row = self.lu.row(j);
            let wj = z[j];
            if wj != 0.0 {
                for (zi, l) in z[..j].iter_mut().zip(&row[..j]) {
                    *zi -= l * wj;
                }
            }
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        x
    }

    /// Exact `‖A⁻¹‖_∞`: row `i` of `A⁻¹` is `A⁻ᵀ e_i`.
    pub fn inverse_norm_inf(&self) -> f64 {
        let n = self.dim();
        let mut e = vec![0.0; n];
        let mut best: f64 = 0.0;
        for i in 0..n {
            e[i] = 1.0;
            let r = self.solve_transpose(&e);
            e[i] = 0.0;
            best = best.max(r.iter().map(|v| v.abs()).sum());
        }
        best
    }

    /// Hager–Higham estimate of `‖A⁻¹‖_∞ = ‖A⁻ᵀ‖₁`.
    pub fn inverse_norm_inf_estimate(&self) -> f64 {
        let n = self.dim();
        let mut x = vec![1.0 / n as f64; n];
        let mut est = 0.0;
        for _ in 0..5 {
            let y = self.solve_transpose(&x);
            est = y.iter().map(|v| v.abs()).sum();
            let xi: Vec<f64> = y.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect();
            let z = self.solve(&xi);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.abs()))
                .fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if zmax <= ztx {
                break;
            }
            x.fill(0.0);
            x[j] = 1.0;
        }
        est
    }

    /// `‖A‖_∞ ‖A⁻¹‖_∞`, exact up to `exact_limit` unknowns, estimated above.
    pub fn cond_inf(&self, exact_limit: usize) -> f64 {
        let inv = if self.dim() <= exact_limit {
            self.inverse_norm_inf()
        } else {
            self.inverse_norm_inf_estimate()
        };
        self.norm_inf * inv
    }
}
