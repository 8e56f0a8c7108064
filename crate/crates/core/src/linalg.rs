//! Dense and banded linear-algebra helpers shared by the solvers.

use nalgebra::{Complex, SymmetricEigen};

use crate::{CMatrix, Error, Result, StateVector, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Largest entry of `|M − M†|`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `‖M − M†‖_max ≤ rel·‖M‖_F`.
pub fn is_hermitian(m: &CMatrix, rel: f64) -> bool {
    m.is_square() && hermiticity_defect(m) <= rel * m.norm()
}

/// Hermitian eigendecomposition, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    // symmetrize exactly so the solver sees a Hermitian input
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    hermitian_eigen(m).0
}

/// Eigenpairs of a general complex matrix via the complex Schur form
/// `M = Q T Q†` and back-substitution on `T`. Sorted by real part.
pub fn general_eigen(m: &CMatrix) -> (Vec<C64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let (q, t) = m.clone().schur().unpack();
    let scale = t.camax().max(f64::MIN_POSITIVE);
    let tiny = scale * f64::EPSILON;
    let mut vecs = CMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut y = StateVector::zeros(n);
        y[k] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = ZERO;
            for j in i + 1..=k {
                s += t[(i, j)] * y[j];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < tiny {
                denom = C64::new(tiny, 0.0);
            }
            y[i] = -s / denom;
        }
        let mut v = &q * y;
        let norm = v.norm();
        v /= C64::new(norm, 0.0);
        vecs.set_column(k, &v);
    }
    let values: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[a].re.total_cmp(&values[b].re).then(values[a].im.total_cmp(&values[b].im))
    });
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let sorted_vecs = CMatrix::from_fn(n, n, |r, c| vecs[(r, order[c])]);
    (sorted_values, sorted_vecs)
}

/// `½ Σ |eig(ρ − σ)|` for Hermitian arguments.
pub fn trace_distance(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    0.5 * hermitian_eigenvalues(&(rho - sigma)).iter().map(|e| e.abs()).sum::<f64>()
}

/// Tensor product of two vectors in row-major (first factor slow) order.
pub fn kron_vec(a: &StateVector, b: &StateVector) -> StateVector {
    let mut out = StateVector::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

/// Coordinate-format sparse matrix used for operator-times-dense products.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub entries: Vec<(usize, usize, C64)>,
}

impl SparseMatrix {
    pub fn from_dense(m: &CMatrix) -> Self {
        let mut entries = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                if z != ZERO {
                    entries.push((i, j, z));
                }
            }
        }
        entries.sort_by_key(|&(i, j, _)| (i, j));
        Self { nrows: m.nrows(), ncols: m.ncols(), entries }
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.nrows, self.ncols);
        for &(i, j, z) in &self.entries {
            m[(i, j)] += z;
        }
        m
    }

    /// `self · X`
    pub fn mul_dense(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.nrows, x.ncols());
        self.mul_dense_acc(x, C64::new(1.0, 0.0), &mut out);
        out
    }

    /// `out += scale · self · X`
    pub fn mul_dense_acc(&self, x: &CMatrix, scale: C64, out: &mut CMatrix) {
        let cols = x.ncols();
        for &(i, k, z) in &self.entries {
            let f = z * scale;
            for j in 0..cols {
                out[(i, j)] += f * x[(k, j)];
            }
        }
    }

    pub fn mul_vec(&self, x: &StateVector) -> StateVector {
        let mut out = StateVector::zeros(self.nrows);
        for &(i, k, z) in &self.entries {
            out[i] += z * x[k];
        }
        out
    }

    /// `out += self · X · self†`
    pub fn sandwich_acc(&self, x: &CMatrix, out: &mut CMatrix) {
        for &(i, k, a) in &self.entries {
            for &(j, l, b) in &self.entries {
                out[(i, j)] += a * x[(k, l)] * b.conj();
            }
        }
    }
}

/// LU factorization with partial pivoting of a banded matrix
/// (`kl` sub-diagonals, `ku` super-diagonals).
///
/// Row `i` stores columns `i − kl ..= i + ku + kl`; the extra `kl`
/// super-diagonals hold pivoting fill-in.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<C64>,
    pivots: Vec<usize>,
}

/// Banded matrix under assembly.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<C64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![ZERO; n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    /// Add `z` at `(i, j)`; panics outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, z: C64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "({i},{j}) outside band");
        let s = self.slot(i, j);
        self.data[s] += z;
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        if j + self.kl < i || j > i + self.ku + self.kl || j >= self.n {
            return ZERO;
        }
        self.data[self.slot(i, j)]
    }

    pub fn mul_vec(&self, x: &StateVector) -> StateVector {
        let mut out = StateVector::zeros(self.n);
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let mut s = ZERO;
            for j in lo..=hi {
                s += self.get(i, j) * x[j];
            }
            out[i] = s;
        }
        out
    }

    pub fn factor(self) -> Result<BandedLu> {
        let BandedMatrix { n, kl, ku, width, mut data } = self;
        let slot = |i: usize, j: usize| i * width + (j + kl - i);
        let mut pivots = vec![0; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + ku + kl).min(n - 1);
            let mut p = k;
            let mut best = data[slot(k, k)].norm();
            for i in k + 1..=last_row {
                let v = data[slot(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            pivots[k] = p;
            if best == 0.0 {
                return Err(Error::Convergence { residual: f64::INFINITY, bound: 0.0 });
            }
            if p != k {
                for j in k..=last_col {
                    data.swap(slot(k, j), slot(p, j));
                }
            }
            let pivot = data[slot(k, k)];
            for i in k + 1..=last_row {
                let l = data[slot(i, k)] / pivot;
                data[slot(i, k)] = l;
                if l == ZERO {
                    continue;
                }
                for j in k + 1..=last_col {
                    let u = data[slot(k, j)];
                    data[slot(i, j)] -= l * u;
                }
            }
        }
        Ok(BandedLu { n, kl, ku, width, data, pivots })
    }
}

impl BandedLu {
    #[inline]
    fn at(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.width + (j + self.kl - i)]
    }

    pub fn solve(&self, b: &StateVector) -> StateVector {
        let n = self.n;
        let mut x = b.clone();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap_rows(k, p);
            }
            let xk = x[k];
            for i in k + 1..=(k + self.kl).min(n - 1) {
                x[i] -= self.at(i, k) * xk;
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..=(k + self.ku + self.kl).min(n - 1) {
                s -= self.at(k, j) * x[j];
            }
            x[k] = s / self.at(k, k);
        }
        x
    }
}

/// Reshape a length-`d²` row-major vector into a `d × d` matrix.
pub fn unvec_row_major(v: &StateVector, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| v[i * d + j])
}

pub fn vec_row_major(m: &CMatrix) -> StateVector {
    let d = m.nrows();
    StateVector::from_fn(d * m.ncols(), |idx, _| m[(idx / m.ncols(), idx % m.ncols())])
}

/// Pure-state projector `|ψ⟩⟨ψ|`.
pub fn projector(psi: &StateVector) -> CMatrix {
    psi * psi.adjoint()
}

pub(crate) fn real(x: f64) -> Complex<f64> {
    C64::new(x, 0.0)
}
