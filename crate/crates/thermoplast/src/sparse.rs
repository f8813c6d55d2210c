//! Compressed-row sparse matrices and the conjugate-gradient solve used by
//! all assembled operators. Assembly goes through a triplet buffer that is
//! compressed with a fixed ordering, so matrices are bitwise reproducible.

use crate::error::SimError;

/// Symmetric sparse matrix in CSR form plus the Dirichlet mask applied
/// during assembly (true = constrained row/column).
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    dirichlet: Vec<bool>,
}

/// Triplet accumulator; duplicate entries are summed on compression.
pub struct TripletBuffer {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuffer {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n && col < self.n);
        self.entries.push((row, col, value));
    }

    /// Compress to CSR. `dirichlet[i] = true` eliminates row/column i
    /// symmetrically and puts a unit diagonal in its place.
    pub fn compress(mut self, dirichlet: Vec<bool>) -> SparseMatrix {
        assert_eq!(dirichlet.len(), self.n);
        self.entries.retain(|&(r, c, _)| {
            if dirichlet[r] || dirichlet[c] {
                r == c
            } else {
                true
            }
        });
        for i in 0..self.n {
            if dirichlet[i] {
                self.entries.push((i, i, 0.0));
            }
        }
        // stable sort with a total key, so duplicates are summed in
        // insertion order: deterministic
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut col_idx = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut counts = vec![0usize; self.n];
        let mut iter = self.entries.iter().peekable();
        while let Some(&(r, c, v)) = iter.next() {
            let mut acc = v;
            while let Some(&&(r2, c2, v2)) = iter.peek() {
                if r2 == r && c2 == c {
                    acc += v2;
                    iter.next();
                } else {
                    break;
                }
            }
            let val = if dirichlet[r] && r == c { 1.0 } else { acc };
            col_idx.push(c);
            values.push(val);
            counts[r] += 1;
        }
        for i in 0..self.n {
            row_ptr[i + 1] = row_ptr[i] + counts[i];
        }
        SparseMatrix {
            n: self.n,
            row_ptr,
            col_idx,
            values,
            dirichlet,
        }
    }
}

impl SparseMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dirichlet_mask(&self) -> &[bool] {
        &self.dirichlet
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let mut acc = 0.0;
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[idx] * x[self.col_idx[idx]];
            }
            y[i] = acc;
        }
        y
    }

    /// Quadratic form x^T A x.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(&self.mul_vec(x), x)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for i in 0..self.n {
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col_idx[idx] == i {
                    d[i] = self.values[idx];
                }
            }
        }
        d
    }

    /// Largest |A - A^T| entry; assembled operators should report ~0.
    pub fn asymmetry(&self) -> f64 {
        let mut max = 0.0f64;
        for i in 0..self.n {
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[idx];
                let a_ij = self.values[idx];
                let a_ji = self.get(j, i);
                max = max.max((a_ij - a_ji).abs());
            }
        }
        max
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
            if self.col_idx[idx] == j {
                return self.values[idx];
            }
        }
        0.0
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        let mut acc = 0.0;
        for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
            acc += self.values[idx];
        }
        acc
    }

    pub fn total_sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// A + s * B with identical sparsity not required.
    pub fn add_scaled(&self, s: f64, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.n, other.n);
        let mut buf = TripletBuffer::new(self.n);
        for i in 0..self.n {
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                buf.push(i, self.col_idx[idx], self.values[idx]);
            }
            for idx in other.row_ptr[i]..other.row_ptr[i + 1] {
                buf.push(i, other.col_idx[idx], s * other.values[idx]);
            }
        }
        buf.compress(vec![false; self.n])
    }

    pub fn scale(&self, s: f64) -> SparseMatrix {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= s;
        }
        out
    }
}

/// Conjugate-gradient controls shared by every linear solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgParams {
    pub tol: f64,
    pub maxit: usize,
    pub jacobi: bool,
}

impl Default for CgParams {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            maxit: 50_000,
            jacobi: false,
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Conjugate gradients with optional Jacobi preconditioning.
///
/// Contract: returns x with |A x - b| <= tol * |b|; deterministic for fixed
/// inputs; nonconvergence after `maxit` iterations is an error carrying the
/// final residual.
pub fn solve_spd(
    a: &SparseMatrix,
    b: &[f64],
    tol: f64,
    maxit: usize,
    jacobi: bool,
) -> Result<Vec<f64>, SimError> {
    solve_spd_from(a, b, None, tol, maxit, jacobi)
}

/// Same contract as [`solve_spd`] but starting from `x0` when provided.
pub fn solve_spd_from(
    a: &SparseMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    maxit: usize,
    jacobi: bool,
) -> Result<Vec<f64>, SimError> {
    let n = a.n();
    assert_eq!(b.len(), n);
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let inv_diag: Option<Vec<f64>> = if jacobi {
        Some(
            a.diagonal()
                .iter()
                .map(|&d| if d.abs() > 0.0 { 1.0 / d } else { 1.0 })
                .collect(),
        )
    } else {
        None
    };

    let mut x = match x0 {
        Some(x0) => x0.to_vec(),
        None => vec![0.0; n],
    };
    let ax = a.mul_vec(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, axi)| bi - axi).collect();
    let target = tol * bnorm;
    let mut rnorm = norm2(&r);
    if rnorm <= target {
        return Ok(x);
    }
    let apply_prec = |r: &[f64]| -> Vec<f64> {
        match &inv_diag {
            Some(d) => r.iter().zip(d).map(|(ri, di)| ri * di).collect(),
            None => r.to_vec(),
        }
    };
    let mut z = apply_prec(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..maxit {
        let ap = a.mul_vec(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(SimError::Solve {
                context: "conjugate gradient: operator not positive definite".into(),
                residual: rnorm,
                iterations: 0,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rnorm = norm2(&r);
        if rnorm <= target {
            return Ok(x);
        }
        z = apply_prec(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(SimError::Solve {
        context: "conjugate gradient did not converge".into(),
        residual: rnorm / bnorm,
        iterations: maxit,
    })
}

/// Smallest and largest Ritz values of A from `iters` conjugate-gradient
/// iterations started at `b`, via the Lanczos tridiagonal built from the CG
/// coefficients. A positive smallest Ritz value certifies positive
/// definiteness on the explored subspace.
pub fn cg_ritz_bounds(a: &SparseMatrix, b: &[f64], iters: usize) -> (f64, f64) {
    let n = a.n();
    assert_eq!(b.len(), n);
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rz = dot(&r, &r);
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    for _ in 0..iters {
        if rz.sqrt() <= 1e-14 {
            break;
        }
        let ap = a.mul_vec(&p);
        let alpha = rz / dot(&p, &ap);
        alphas.push(alpha);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rz_new = dot(&r, &r);
        let beta = rz_new / rz;
        betas.push(beta);
        rz = rz_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    let m = alphas.len();
    if m == 0 {
        return (0.0, 0.0);
    }
    // Lanczos tridiagonal: diag_k = 1/alpha_k + beta_{k-1}/alpha_{k-1},
    // offdiag_k = sqrt(beta_k)/alpha_k
    let mut diag = vec![0.0; m];
    let mut off = vec![0.0; m.saturating_sub(1)];
    for k in 0..m {
        diag[k] = 1.0 / alphas[k]
            + if k > 0 { betas[k - 1] / alphas[k - 1] } else { 0.0 };
        if k + 1 < m {
            off[k] = betas[k].max(0.0).sqrt() / alphas[k];
        }
    }
    // eigenvalue count below x by the Sturm recurrence, then bisection
    let count_below = |x: f64| -> usize {
        let mut count = 0;
        let mut d = diag[0] - x;
        if d < 0.0 {
            count += 1;
        }
        for k in 1..m {
            let off2 = off[k - 1] * off[k - 1];
            d = diag[k] - x - off2 / if d.abs() > 1e-300 { d } else { 1e-300_f64.copysign(d) };
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    let radius = |k: usize| -> f64 {
        let mut r = 0.0;
        if k > 0 {
            r += off[k - 1].abs();
        }
        if k < m - 1 {
            r += off[k].abs();
        }
        r
    };
    let mut lo = (0..m).map(|k| diag[k] - radius(k)).fold(f64::MAX, f64::min);
    let mut hi = (0..m).map(|k| diag[k] + radius(k)).fold(f64::MIN, f64::max);
    let (glo, ghi) = (lo, hi);
    // smallest eigenvalue
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(mid) == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let smallest = lo;
    let (mut lo, mut hi) = (glo, ghi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(mid) == m {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (smallest, hi)
}
