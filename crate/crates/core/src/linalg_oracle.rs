//! Textbook dense linear algebra used as a reference for the ridge fast path.
//!
//! Nothing here is optimized. Each routine is written out directly so that
//! it can be audited against the fast path it certifies.

use crate::error::{Error, Result};

/// Symmetry tolerance for matrices claimed symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
            return Err(Error::Numeric("ragged or empty matrix".into()));
        }
        let entries: Vec<f64> = rows.iter().flatten().copied().collect();
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("non-finite matrix entry".into()));
        }
        Ok(Self { rows: r, cols: c, entries })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// `λI + Σ x xᵀ`.
    pub fn gram(dim: usize, regularizer: f64, vectors: &[Vec<f64>]) -> Self {
        let mut m = Self::identity(dim);
        for v in &mut m.entries {
            *v *= regularizer;
        }
        for x in vectors {
            for i in 0..dim {
                for j in 0..dim {
                    m[(i, j)] += x[i] * x[j];
                }
            }
        }
        m
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * x[j]).sum())
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows)
                .all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= SYMMETRY_TOL))
    }

    fn check_square(&self, b: &[f64]) -> Result<()> {
        if self.rows != self.cols || b.len() != self.rows {
            return Err(Error::Numeric(format!(
                "shape mismatch: {}x{} matrix, rhs of length {}",
                self.rows,
                self.cols,
                b.len()
            )));
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.entries[i * self.cols + j]
    }
}

/// Solves `A x = b` for symmetric positive-definite `A` by Cholesky
/// factorization `A = L Lᵀ` and two triangular solves.
pub fn spd_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    a.check_square(b)?;
    if !a.is_symmetric() {
        return Err(Error::Numeric("spd_solve needs a symmetric matrix".into()));
    }
    let n = a.rows;
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut diag = a[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if diag.is_nan() || diag <= 0.0 {
            return Err(Error::Numeric(format!("matrix not positive definite (pivot {j})")));
        }
        let diag = diag.sqrt();
        l[(j, j)] = diag;
        for i in j + 1..n {
            let mut v = a[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / diag;
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[(i, k)] * y[k]).sum();
        y[i] = (b[i] - s) / l[(i, i)];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[(k, i)] * x[k]).sum();
        x[i] = (y[i] - s) / l[(i, i)];
    }
    finite(x)
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn gaussian_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    a.check_square(b)?;
    let n = a.rows;
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|j| a[(i, j)]).collect();
            row.push(b[i]);
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap_or(col);
        if m[pivot][col].abs() < 1e-300 {
            return Err(Error::Numeric("singular matrix".into()));
        }
        m.swap(col, pivot);
        let pivot_row = m[col].clone();
        for row in &mut m[col + 1..] {
            let factor = row[col] / pivot_row[col];
            for (v, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *v -= factor * p;
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    finite(x)
}

/// Explicit inverse by Gauss–Jordan elimination with partial pivoting.
pub fn explicit_inverse(a: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.rows;
    a.check_square(&vec![0.0; n])?;
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..2 * n)
                .map(|j| if j < n { a[(i, j)] } else if j - n == i { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap_or(col);
        if m[pivot][col].abs() < 1e-300 {
            return Err(Error::Numeric("singular matrix".into()));
        }
        m.swap(col, pivot);
        let p = m[col][col];
        for v in &mut m[col] {
            *v /= p;
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            let factor = row[col];
            if r != col && factor != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
            }
        }
    }
    let mut inv = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            inv[(i, j)] = m[i][n + j];
        }
    }
    if inv.entries.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite inverse".into()));
    }
    Ok(inv)
}

/// `‖x‖_{A⁻¹} = sqrt(xᵀ A⁻¹ x)`, evaluated through [`spd_solve`].
pub fn quadratic_norm(a: &DenseMatrix, x: &[f64]) -> Result<f64> {
    let y = spd_solve(a, x)?;
    let q: f64 = x.iter().zip(&y).map(|(u, v)| u * v).sum();
    if q < -1e-12 {
        return Err(Error::Numeric(format!("negative quadratic form {q}")));
    }
    Ok(q.max(0.0).sqrt())
}

fn finite(x: Vec<f64>) -> Result<Vec<f64>> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(Error::Numeric("non-finite solution".into()))
    }
}

/// Residual bound met by [`spd_solve`]: `‖Ax − b‖∞ ≤ 1e-9 (1 + ‖b‖∞)`.
pub fn residual_ok(a: &DenseMatrix, x: &[f64], b: &[f64]) -> bool {
    let r = a.mul_vec(x);
    let worst = r.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
    let scale = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    worst <= 1e-9 * (1.0 + scale)
}
