//! Sparse symmetric matrices and an envelope Cholesky factorization.

use std::collections::{BTreeMap, VecDeque};

use crate::scalar::Real;

/// Symmetric matrix stored as its diagonal plus the strict upper triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    diag: Vec<T>,
    off: BTreeMap<(usize, usize), T>,
}

impl<T: Real> SymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, diag: vec![T::zero(); n], off: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Adds `x` to entries `(i, j)` and `(j, i)` (once when `i == j`).
    pub fn add(&mut self, i: usize, j: usize, x: T) {
        if i == j {
            self.diag[i] = self.diag[i] + x;
        } else {
            let key = (i.min(j), i.max(j));
            let slot = self.off.entry(key).or_insert_with(T::zero);
            *slot = *slot + x;
        }
    }

    /// Adds `w (e_i − e_j)(e_i − e_j)ᵀ`.
    pub fn add_edge(&mut self, i: usize, j: usize, w: T) {
        if i != j {
            self.add(i, i, w);
            self.add(j, j, w);
            self.add(i, j, -w);
        }
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if i == j {
            self.diag[i]
        } else {
            self.off.get(&(i.min(j), i.max(j))).copied().unwrap_or_else(T::zero)
        }
    }

    pub fn diagonal(&self) -> &[T] {
        &self.diag
    }

    /// Nonzero strictly upper entries `(i, j, a_ij)` with `i < j`.
    pub fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.off.iter().map(|(&(i, j), &x)| (i, j, x))
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y: Vec<T> = self.diag.iter().zip(x).map(|(&d, &v)| d * v).collect();
        for (&(i, j), &a) in &self.off {
            y[i] = y[i] + a * x[j];
            y[j] = y[j] + a * x[i];
        }
        y
    }

    pub fn trace(&self) -> T {
        self.diag.iter().fold(T::zero(), |a, &b| a + b)
    }

    pub fn add_diagonal(&mut self, shift: T) {
        for d in &mut self.diag {
            *d = *d + shift;
        }
    }

    /// The principal submatrix on `idx`, reindexed in the order given.
    pub fn principal(&self, idx: &[usize]) -> SymMatrix<T> {
        let mut pos = vec![usize::MAX; self.n];
        for (k, &i) in idx.iter().enumerate() {
            pos[i] = k;
        }
        let mut m = SymMatrix::zeros(idx.len());
        for (k, &i) in idx.iter().enumerate() {
            m.diag[k] = self.diag[i];
        }
        for (&(i, j), &a) in &self.off {
            if pos[i] != usize::MAX && pos[j] != usize::MAX {
                m.add(pos[i], pos[j], a);
            }
        }
        m
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.n]; self.n];
        for i in 0..self.n {
            d[i][i] = self.diag[i];
        }
        for (&(i, j), &a) in &self.off {
            d[i][j] = a;
            d[j][i] = a;
        }
        d
    }
}

/// Reverse Cuthill–McKee ordering of the sparsity graph.
pub fn rcm_order<T: Real>(a: &SymMatrix<T>) -> Vec<usize> {
    let n = a.dim();
    let mut adj = vec![Vec::new(); n];
    for (i, j, x) in a.off_diagonal() {
        if x != T::zero() {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for row in &mut adj {
        row.sort_unstable();
    }
    let deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (deg[v], v));
    for &s in &by_degree {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&w| !seen[w]).collect();
            nb.sort_by_key(|&w| (deg[w], w));
            for w in nb {
                seen[w] = true;
                q.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Cholesky factor `P A Pᵀ = L Lᵀ` stored row-wise in the envelope of `L`.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    perm: Vec<usize>,
    first: Vec<usize>,
    rows: Vec<Vec<T>>,
}

/// Raised when a pivot is not safely positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PivotFailure {
    pub row: usize,
}

impl<T: Real> Cholesky<T> {
    pub fn factor(a: &SymMatrix<T>) -> Result<Self, PivotFailure> {
        let n = a.dim();
        let perm = rcm_order(a);
        let mut inv = vec![0; n];
        for (k, &i) in perm.iter().enumerate() {
            inv[i] = k;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (i, j, x) in a.off_diagonal() {
            if x != T::zero() {
                let (p, q) = (inv[i].max(inv[j]), inv[i].min(inv[j]));
                first[p] = first[p].min(q);
            }
        }
        let mut rows: Vec<Vec<T>> = (0..n).map(|p| vec![T::zero(); p - first[p] + 1]).collect();
        for p in 0..n {
            rows[p][p - first[p]] = a.diagonal()[perm[p]];
        }
        for (i, j, x) in a.off_diagonal() {
            let (p, q) = (inv[i].max(inv[j]), inv[i].min(inv[j]));
            rows[p][q - first[p]] = x;
        }
        let max_diag = a.diagonal().iter().fold(T::zero(), |m, &d| m.max(d.abs()));
        let floor = T::lit(1e-12) * max_diag.max(T::min_positive_value());
        for p in 0..n {
            let fp = first[p];
            for q in fp..p {
                let fq = first[q];
                let lo = fp.max(fq);
                let mut s = rows[p][q - fp];
                for k in lo..q {
                    s = s - rows[p][k - fp] * rows[q][k - fq];
                }
                rows[p][q - fp] = s / rows[q][q - fq];
            }
            let mut d = rows[p][p - fp];
            for k in fp..p {
                let x = rows[p][k - fp];
                d = d - x * x;
            }
            if !(d > floor) {
                return Err(PivotFailure { row: perm[p] });
            }
            rows[p][p - fp] = d.sqrt();
        }
        Ok(Cholesky { perm, first, rows })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.perm.len();
        let mut y: Vec<T> = self.perm.iter().map(|&i| b[i]).collect();
        for p in 0..n {
            let fp = self.first[p];
            let mut s = y[p];
            for k in fp..p {
                s = s - self.rows[p][k - fp] * y[k];
            }
            y[p] = s / self.rows[p][p - fp];
        }
        for p in (0..n).rev() {
            let fp = self.first[p];
            y[p] = y[p] / self.rows[p][p - fp];
            let yp = y[p];
            for k in fp..p {
                y[k] = y[k] - self.rows[p][k - fp] * yp;
            }
        }
        let mut x = vec![T::zero(); n];
        for (p, &i) in self.perm.iter().enumerate() {
            x[i] = y[p];
        }
        x
    }
}

/// Solves `A x = b`. On pivot failure retries once with `A + 1e−10·tr(A)/n · I`;
/// the flag reports whether that shift was needed.
pub fn solve_spd<T: Real>(a: &SymMatrix<T>, b: &[T]) -> Option<(Vec<T>, bool)> {
    if a.dim() == 0 {
        return Some((Vec::new(), false));
    }
    if let Ok(c) = Cholesky::factor(a) {
        return Some((c.solve(b), false));
    }
    let mut shifted = a.clone();
    let tr = a.trace().abs() / T::count(a.dim());
    shifted.add_diagonal(T::lit(1e-10) * tr.max(T::one()));
    Cholesky::factor(&shifted).ok().map(|c| (c.solve(b), true))
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

pub(crate) fn norm_inf<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}
