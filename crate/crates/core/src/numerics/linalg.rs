use crate::error::{Error, Result};

/// Row-major dense matrix of `f64`.
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
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::Contract("ragged rows in matrix".into()));
            }
            data.extend_from_slice(row);
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Contract("matrix entries must be finite".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
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
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Max absolute asymmetry `|A - A^T|` (square matrices).
    pub fn asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn symmetrized(&self) -> Self {
        assert_eq!(self.rows, self.cols);
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, 0.5 * (self.get(i, j) + self.get(j, i)));
            }
        }
        out
    }
}

const MAX_SWEEPS: usize = 120;

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues ascending and the matching eigenvectors as columns,
/// with the residual guarantee `|M v - lambda v| <= 1e-9 |M|` per pair.
/// The input must be symmetric to 1e-10 relative.
pub fn sym_eigs(m: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    if m.rows != m.cols {
        return Err(Error::Contract(format!(
            "sym_eigs needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let n = m.rows;
    if n == 0 {
        return Ok((Vec::new(), DenseMatrix::zeros(0, 0)));
    }
    let scale = m.max_abs();
    if m.asymmetry() > 1e-10 * (1.0 + scale) {
        return Err(Error::Contract(format!(
            "sym_eigs input asymmetric: |A - A^T| = {:.3e} at scale {:.3e}",
            m.asymmetry(),
            scale
        )));
    }

    let mut a = m.symmetrized();
    let mut v = DenseMatrix::identity(n);

    let off = |a: &DenseMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a.get(i, j) * a.get(i, j);
            }
        }
        s.sqrt()
    };

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        if off(&a) <= 1e-15 * (1.0 + a.max_abs()) * (n as f64) {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // A <- J^T A J on rows/cols p, q.
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    if !converged && off(&a) > 1e-12 * (1.0 + a.max_abs()) * (n as f64) {
        return Err(Error::NoConvergence {
            kernel: "sym_eigs (cyclic Jacobi)",
            iterations: MAX_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).partial_cmp(&a.get(j, j)).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a.get(i, i)).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..n {
            vectors.set(i, new_j, v.get(i, old_j));
        }
    }
    Ok((values, vectors))
}

/// Thin SVD `M = U diag(s) V^T` by one-sided Jacobi orthogonalization.
///
/// `U` is rows x k and `V` is cols x k with `k = min(rows, cols)`, both with
/// orthonormal columns; singular values are returned descending. The
/// reconstruction error is bounded by `1e-10 * (1 + |M|)`.
pub fn svd_small(m: &DenseMatrix) -> Result<(DenseMatrix, Vec<f64>, DenseMatrix)> {
    if m.rows * m.cols > 1_000_000 {
        return Err(Error::Contract(format!(
            "svd_small is for the small dense regime, got {}x{}",
            m.rows, m.cols
        )));
    }
    if m.rows == 0 || m.cols == 0 {
        return Ok((
            DenseMatrix::zeros(m.rows, 0),
            Vec::new(),
            DenseMatrix::zeros(m.cols, 0),
        ));
    }
    if m.rows < m.cols {
        let (u, s, v) = svd_small(&m.transpose())?;
        return Ok((v, s, u));
    }

    let n = m.rows;
    let k = m.cols;
    let mut a = m.clone();
    let mut v = DenseMatrix::identity(k);

    let col_dot = |a: &DenseMatrix, p: usize, q: usize| -> f64 {
        (0..n).map(|i| a.get(i, p) * a.get(i, q)).sum()
    };

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in (p + 1)..k {
                let alpha = col_dot(&a, p, p);
                let beta = col_dot(&a, q, q);
                let gamma = col_dot(&a, p, q);
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() + 1e-300 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let aip = a.get(i, p);
                    let aiq = a.get(i, q);
                    a.set(i, p, c * aip - s * aiq);
                    a.set(i, q, s * aip + c * aiq);
                }
                for i in 0..k {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, c * vip - s * viq);
                    v.set(i, q, s * vip + c * viq);
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            kernel: "svd_small (one-sided Jacobi)",
            iterations: MAX_SWEEPS,
        });
    }

    let mut sigma: Vec<f64> = (0..k).map(|j| col_dot(&a, j, j).sqrt()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap());
    let mut u = DenseMatrix::zeros(n, k);
    let mut vout = DenseMatrix::zeros(k, k);
    let sigma_max = order.first().map_or(0.0, |&j| sigma[j]);
    let mut s_out = Vec::with_capacity(k);
    for (new_j, &old_j) in order.iter().enumerate() {
        let s = sigma[old_j];
        s_out.push(s);
        if s > 1e-14 * (1.0 + sigma_max) {
            for i in 0..n {
                u.set(i, new_j, a.get(i, old_j) / s);
            }
        }
        for i in 0..k {
            vout.set(i, new_j, v.get(i, old_j));
        }
    }
    sigma = s_out;

    // Orthonormal columns for the null directions: complete against the
    // nonzero ones and the already-completed ones via coordinate candidates
    // (deterministic).
    let is_null = |s: f64| s <= 1e-14 * (1.0 + sigma_max);
    for j in 0..k {
        if !is_null(sigma[j]) {
            continue;
        }
        'candidates: for cand in 0..n {
            let mut col = vec![0.0; n];
            col[cand] = 1.0;
            for _pass in 0..2 {
                for jj in 0..k {
                    let filled = !is_null(sigma[jj]) || jj < j;
                    if jj == j || !filled {
                        continue;
                    }
                    let proj: f64 = (0..n).map(|i| col[i] * u.get(i, jj)).sum();
                    for i in 0..n {
                        col[i] -= proj * u.get(i, jj);
                    }
                }
            }
            let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-3 {
                for i in 0..n {
                    u.set(i, j, col[i] / norm);
                }
                break 'candidates;
            }
        }
    }

    Ok((u, sigma, vout))
}

/// Solve a small dense linear system by Gaussian elimination with partial
/// pivoting. Errors on (numerically) singular systems.
pub fn solve_dense(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if a.rows != a.cols || a.rows != b.len() {
        return Err(Error::Contract(format!(
            "solve_dense shape mismatch: {}x{} with rhs {}",
            a.rows,
            a.cols,
            b.len()
        )));
    }
    let n = a.rows;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut m = a.clone();
    let mut x = b.to_vec();
    let scale = a.max_abs().max(1e-300);
    for col in 0..n {
        let (pivot_row, pivot) = (col..n)
            .map(|r| (r, m.get(r, col)))
            .max_by(|l, r| l.1.abs().partial_cmp(&r.1.abs()).unwrap())
            .unwrap();
        if pivot.abs() <= 1e-14 * scale {
            return Err(Error::ChartDegeneracy(format!(
                "singular linear system (pivot {:.3e} at column {col})",
                pivot
            )));
        }
        if pivot_row != col {
            for j in 0..n {
                let tmp = m.get(col, j);
                m.set(col, j, m.get(pivot_row, j));
                m.set(pivot_row, j, tmp);
            }
            x.swap(col, pivot_row);
        }
        for r in (col + 1)..n {
            let f = m.get(r, col) / m.get(col, col);
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                let v = m.get(r, j) - f * m.get(col, j);
                m.set(r, j, v);
            }
            x[r] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for j in (col + 1)..n {
            s -= m.get(col, j) * x[j];
        }
        x[col] = s / m.get(col, col);
    }
    Ok(x)
}
