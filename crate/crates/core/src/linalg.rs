//! Dense and banded linear algebra kernels.
//!
//! Everything here is sized for the desk-scale problems the solver runs:
//! banded SPD systems from uniform finite element meshes, small dense
//! systems for starting weights, and dense symmetric eigenproblems of order
//! at most [`MAX_EIGEN_ORDER`].

use crate::error::{Error, Result};

/// Largest order accepted by the dense symmetric eigensolver.
pub const MAX_EIGEN_ORDER: usize = 512;

/// Symmetric matrix stored as its diagonal plus `bandwidth` sub-diagonals.
///
/// Entry `(i, j)` with `j <= i` lives at `data[i * (bandwidth + 1) + (i - j)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSymMatrix {
    order: usize,
    bandwidth: usize,
    data: Vec<f64>,
}

impl BandedSymMatrix {
    pub fn zeros(order: usize, bandwidth: usize) -> Self {
        Self {
            order,
            bandwidth,
            data: vec![0.0; order * (bandwidth + 1)],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Self::zeros(order, 0);
        for i in 0..order {
            m.data[i] = 1.0;
        }
        m
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (r, c) = if j <= i { (i, j) } else { (j, i) };
        let off = r - c;
        (off <= self.bandwidth).then(|| r * (self.bandwidth + 1) + off)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Adds `v` to entry `(i, j)` (and, by symmetry, `(j, i)`).
    ///
    /// Panics if the entry lies outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside bandwidth {}", self.bandwidth));
        self.data[s] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside bandwidth {}", self.bandwidth));
        self.data[s] = v;
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.order];
        self.matvec_add(1.0, x, &mut y);
        y
    }

    /// `y += scale * A x`.
    pub fn matvec_add(&self, scale: f64, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.order);
        assert_eq!(y.len(), self.order);
        let w = self.bandwidth + 1;
        for i in 0..self.order {
            let row = &self.data[i * w..(i + 1) * w];
            let mut acc = row[0] * x[i];
            let kmax = self.bandwidth.min(i);
            for k in 1..=kmax {
                let a = row[k];
                if a != 0.0 {
                    acc += a * x[i - k];
                    y[i - k] += scale * a * x[i];
                }
            }
            y[i] += scale * acc;
        }
    }

    /// Linear combination `Σ c_i A_i` of matrices sharing an order; the
    /// result carries the largest bandwidth among the terms.
    pub fn combination(terms: &[(f64, &BandedSymMatrix)]) -> Self {
        assert!(!terms.is_empty());
        let order = terms[0].1.order;
        let bw = terms.iter().map(|(_, m)| m.bandwidth).max().unwrap_or(0);
        let mut out = Self::zeros(order, bw);
        for (c, m) in terms {
            assert_eq!(m.order, order, "order mismatch in combination");
            let w = m.bandwidth + 1;
            for i in 0..order {
                for k in 0..=m.bandwidth.min(i) {
                    out.data[i * (bw + 1) + k] += c * m.data[i * w + k];
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.order, self.order);
        for i in 0..self.order {
            for j in i.saturating_sub(self.bandwidth)..=i {
                let v = self.get(i, j);
                d[(i, j)] = v;
                d[(j, i)] = v;
            }
        }
        d
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Lower-triangular banded Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    factor: BandedSymMatrix,
}

/// Factorizes a banded SPD matrix.
pub fn cholesky_banded(a: &BandedSymMatrix) -> Result<BandedCholesky> {
    cholesky_banded_owned(a.clone())
}

/// Same as [`cholesky_banded`], overwriting the input storage with the factor.
pub fn cholesky_banded_owned(a: BandedSymMatrix) -> Result<BandedCholesky> {
    let n = a.order;
    let bw = a.bandwidth;
    let w = bw + 1;
    let mut l = a;
    for i in 0..n {
        let lo = i.saturating_sub(bw);
        for j in lo..=i {
            let mut s = l.data[i * w + (i - j)];
            let klo = lo.max(j.saturating_sub(bw));
            for k in klo..j {
                s -= l.data[i * w + (i - k)] * l.data[j * w + (j - k)];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return Err(Error::NotPositiveDefinite { row: i, pivot: s });
                }
                l.data[i * w] = s.sqrt();
            } else {
                l.data[i * w + (i - j)] = s / l.data[j * w];
            }
        }
    }
    Ok(BandedCholesky { factor: l })
}

impl BandedCholesky {
    pub fn order(&self) -> usize {
        self.factor.order
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.factor.order;
        let bw = self.factor.bandwidth;
        let w = bw + 1;
        let d = &self.factor.data;
        assert_eq!(x.len(), n);
        for i in 0..n {
            let mut s = x[i];
            for k in i.saturating_sub(bw)..i {
                s -= d[i * w + (i - k)] * x[k];
            }
            x[i] = s / d[i * w];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n.min(i + bw + 1) {
                s -= d[k * w + (k - i)] * x[k];
            }
            x[i] = s / d[i * w];
        }
    }

    /// `ln det A = 2 Σ ln L_ii`.
    pub fn log_det(&self) -> f64 {
        let w = self.factor.bandwidth + 1;
        (0..self.factor.order)
            .map(|i| 2.0 * self.factor.data[i * w].ln())
            .sum()
    }

    /// The factor itself, in the same band layout as the input matrix.
    pub fn lower(&self) -> &BandedSymMatrix {
        &self.factor
    }
}

/// General (non-symmetric) band matrix with `kl` sub- and `ku` super-diagonals.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    order: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(order: usize, kl: usize, ku: usize) -> Self {
        Self {
            order,
            kl,
            ku,
            data: vec![0.0; order * (kl + ku + 1)],
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let off = j as isize - i as isize;
        (off >= -(self.kl as isize) && off <= self.ku as isize)
            .then(|| i * (self.kl + self.ku + 1) + (off + self.kl as isize) as usize)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside band ({}, {})", self.kl, self.ku));
        self.data[s] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.order;
        (0..n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// LU factorization with partial pivoting restricted to the band.
    pub fn lu(&self) -> Result<BandedLu> {
        let n = self.order;
        let kl = self.kl;
        // pivoting widens the upper band to ku + kl
        let ku = self.ku + self.kl;
        let w = kl + ku + 1;
        let mut a = vec![0.0; n * w];
        let idx = |i: usize, j: usize| i * w + (j + kl - i);
        for i in 0..n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(n.saturating_sub(1));
            for j in lo..=hi {
                a[idx(i, j)] = self.get(i, j);
            }
        }
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = a[idx(k, k)].abs();
            for i in (k + 1)..=last {
                let v = a[idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular(k));
            }
            piv[k] = p;
            let jmax = (k + ku).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    a.swap(idx(k, j), idx(p, j));
                }
            }
            let pivot = a[idx(k, k)];
            for i in (k + 1)..=last {
                let l = a[idx(i, k)] / pivot;
                a[idx(i, k)] = l;
                if l != 0.0 {
                    for j in (k + 1)..=jmax {
                        a[idx(i, j)] -= l * a[idx(k, j)];
                    }
                }
            }
        }
        Ok(BandedLu {
            order: n,
            kl,
            ku,
            data: a,
            piv,
        })
    }
}

/// Packed LU factors from [`BandedMatrix::lu`].
#[derive(Debug, Clone)]
pub struct BandedLu {
    order: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
    piv: Vec<usize>,
}

impl BandedLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.order;
        let (kl, ku) = (self.kl, self.ku);
        let w = kl + ku + 1;
        let idx = |i: usize, j: usize| i * w + (j + kl - i);
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let xk = x[k];
            for i in (k + 1)..=(k + kl).min(n - 1) {
                x[i] -= self.data[idx(i, k)] * xk;
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..=(i + ku).min(n - 1) {
                s -= self.data[idx(i, j)] * x[j];
            }
            x[i] = s / self.data[idx(i, i)];
        }
        x
    }
}

/// Row-major dense matrix.
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

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Solves a square dense system by Gaussian elimination with partial pivoting.
pub fn dense_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows;
    if a.cols != n || b.len() != n {
        return Err(Error::Usage(format!(
            "dense_solve needs a square system, got {}x{} with rhs {}",
            a.rows,
            a.cols,
            b.len()
        )));
    }
    let mut m = a.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[(i, k)].abs().total_cmp(&m[(j, k)].abs()))
            .unwrap_or(k);
        if m[(p, k)] == 0.0 || !m[(p, k)].is_finite() {
            return Err(Error::Singular(k));
        }
        if p != k {
            for j in 0..n {
                m.data.swap(k * n + j, p * n + j);
            }
            x.swap(k, p);
        }
        for i in (k + 1)..n {
            let l = m[(i, k)] / m[(k, k)];
            if l != 0.0 {
                for j in k..n {
                    let v = m[(k, j)];
                    m[(i, j)] -= l * v;
                }
                x[i] -= l * x[k];
            }
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in (i + 1)..n {
            s -= m[(i, j)] * x[j];
        }
        x[i] = s / m[(i, i)];
    }
    Ok(x)
}

/// Inverse of a small square matrix, column by column.
pub fn dense_inverse(a: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.rows;
    let mut inv = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = dense_solve(a, &e)?;
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    Ok(inv)
}

/// Eigen-decomposition of a dense symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Column `k` (entries `vectors[(i, k)]`) is the eigenvector for `values[k]`.
    pub vectors: Option<DenseMatrix>,
}

/// Ascending eigenvalues of a dense symmetric matrix.
pub fn sym_eigen_dense(a: &DenseMatrix) -> Result<Vec<f64>> {
    Ok(sym_eigen(a, false)?.values)
}

/// Eigenvalues and eigenvectors of a dense symmetric matrix.
pub fn sym_eigen_dense_vectors(a: &DenseMatrix) -> Result<SymEigen> {
    sym_eigen(a, true)
}

// Householder tridiagonalization followed by implicit QL (EISPACK tred2/tql2).
fn sym_eigen(a: &DenseMatrix, want_vectors: bool) -> Result<SymEigen> {
    let n = a.rows;
    if a.cols != n {
        return Err(Error::Usage("eigensolver needs a square matrix".into()));
    }
    if n > MAX_EIGEN_ORDER {
        return Err(Error::Resource(format!(
            "dense eigensolve of order {n} exceeds the limit {MAX_EIGEN_ORDER}"
        )));
    }
    if n == 0 {
        return Ok(SymEigen {
            values: vec![],
            vectors: want_vectors.then(|| DenseMatrix::zeros(0, 0)),
        });
    }
    let mut v = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e, want_vectors);
    tql2(&mut v, &mut d, &mut e, want_vectors)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = want_vectors.then(|| DenseMatrix::from_fn(n, n, |i, k| v[(i, order[k])]));
    Ok(SymEigen { values, vectors })
}

fn tred2(v: &mut DenseMatrix, d: &mut [f64], e: &mut [f64], accumulate: bool) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    if accumulate {
        for i in 0..n - 1 {
            v[(n - 1, i)] = v[(i, i)];
            v[(i, i)] = 1.0;
            let h = d[i + 1];
            if h != 0.0 {
                for k in 0..=i {
                    d[k] = v[(k, i + 1)] / h;
                }
                for j in 0..=i {
                    let mut g = 0.0;
                    for k in 0..=i {
                        g += v[(k, i + 1)] * v[(k, j)];
                    }
                    for k in 0..=i {
                        v[(k, j)] -= g * d[k];
                    }
                }
            }
            for k in 0..=i {
                v[(k, i + 1)] = 0.0;
            }
        }
        for j in 0..n {
            d[j] = v[(n - 1, j)];
            v[(n - 1, j)] = 0.0;
        }
        v[(n - 1, n - 1)] = 1.0;
    } else {
        // d[i] currently holds h_i; the diagonal of the tridiagonal matrix is
        // recovered from the transformed diagonal entries.
        for i in 0..n - 1 {
            v[(n - 1, i)] = v[(i, i)];
        }
        for j in 0..n {
            d[j] = v[(n - 1, j)];
        }
    }
    e[0] = 0.0;
}

fn tql2(v: &mut DenseMatrix, d: &mut [f64], e: &mut [f64], vectors: bool) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::Resource(format!(
                        "QL iteration did not converge for eigenvalue {l}"
                    )));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if vectors {
                        for k in 0..n {
                            h = v[(k, i + 1)];
                            v[(k, i + 1)] = s * v[(k, i)] + c * h;
                            v[(k, i)] = c * v[(k, i)] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
