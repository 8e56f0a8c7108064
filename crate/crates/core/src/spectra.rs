//! Diagonalization, edge-state identification and geometric fits.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::hamiltonian::{bloch_bands, LadderSpec, LatticeHamiltonian};
use crate::linalg::{general_eigen, hermitian_eigen, real};
use crate::{site_a, site_b, CMatrix, Error, Result, StateVector, C64};

pub const DEFAULT_MAX_DIM: usize = 8192;
/// Eigen-residual bound relative to `‖H‖_F`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_LOC_THRESHOLD: f64 = 0.9;
pub const AMPLITUDE_FLOOR: f64 = 1e-12;
pub const MIN_FIT_POINTS: usize = 4;
/// Momentum samples for the periodic band-edge reference.
pub const BLOCH_SAMPLES: usize = 4096;
/// Band overlap below which the gap is treated as closed.
pub const GAP_CLOSURE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalizeOptions {
    pub max_dim: usize,
    /// Eigenvalues closer than this (relative to `‖H‖_F`) are rotated into
    /// position-localized combinations.
    pub cluster_tolerance: f64,
}

impl Default for DiagonalizeOptions {
    fn default() -> Self {
        Self { max_dim: DEFAULT_MAX_DIM, cluster_tolerance: 2e-10 }
    }
}

/// Bulk band edges from the periodic reference of the same parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GapReference {
    Open { lower: f64, upper: f64 },
    Closed { lower_band_top: f64, upper_band_bottom: f64 },
    /// No translation-invariant reference (site-dependent couplings or non-Hermitian H).
    Unavailable,
}

impl GapReference {
    pub fn window(&self) -> Option<(f64, f64)> {
        match *self {
            GapReference::Open { lower, upper } => Some((lower, upper)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// Ascending by real part.
    pub eigenvalues: Vec<C64>,
    /// Unit-norm eigenvectors as columns, same order as `eigenvalues`.
    pub eigenvectors: CMatrix,
    pub hermitian: bool,
    pub n_cells: usize,
    pub frobenius_norm: f64,
    pub max_residual: f64,
    pub gap: GapReference,
    pub in_gap_indices: Vec<usize>,
}

impl SpectrumResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|e| e.re).collect()
    }

    pub fn state(&self, index: usize) -> StateVector {
        self.eigenvectors.column(index).into_owned()
    }

    /// Indices with `|E| < tol`.
    pub fn near_zero(&self, tol: f64) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.eigenvalues[i].norm() < tol).collect()
    }

    /// Largest `|⟨v_i|v_j⟩ − δ_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.eigenvectors.adjoint() * &self.eigenvectors;
        (g - CMatrix::identity(self.len(), self.len())).camax()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n_cells": self.n_cells,
            "hermitian": self.hermitian,
            "frobenius_norm": self.frobenius_norm,
            "max_residual": self.max_residual,
            "gap": self.gap,
            "in_gap_indices": self.in_gap_indices,
            "eigenvalues": self.eigenvalues.iter().map(|e| [e.re, e.im]).collect::<Vec<_>>(),
        })
    }

    /// Rows `(index, re, im, in_gap)`.
    pub fn csv_rows(&self) -> Vec<(usize, f64, f64, bool)> {
        (0..self.len())
            .map(|i| {
                let e = self.eigenvalues[i];
                (i, e.re, e.im, self.in_gap_indices.contains(&i))
            })
            .collect()
    }
}

/// Band edges of the periodic reference, sampled on a dense momentum grid
/// together with the finite-size grid `2πj/n_cells`.
pub fn bulk_gap(spec: &LadderSpec) -> Result<GapReference> {
    if !spec.is_translation_invariant() {
        return Ok(GapReference::Unavailable);
    }
    let mut lower_top = f64::NEG_INFINITY;
    let mut upper_bottom = f64::INFINITY;
    let dense = (0..BLOCH_SAMPLES).map(|j| 2.0 * PI * j as f64 / BLOCH_SAMPLES as f64);
    let finite = (0..spec.n_cells).map(|j| 2.0 * PI * j as f64 / spec.n_cells as f64);
    for k in dense.chain(finite) {
        let (lo, hi) = bloch_bands(spec, k)?;
        lower_top = lower_top.max(lo);
        upper_bottom = upper_bottom.min(hi);
    }
    Ok(if upper_bottom - lower_top > GAP_CLOSURE_TOLERANCE {
        GapReference::Open { lower: lower_top, upper: upper_bottom }
    } else {
        GapReference::Closed { lower_band_top: lower_top, upper_band_bottom: upper_bottom }
    })
}

/// Split sorted energies into runs whose neighbours differ by at most `tol`.
fn clusters(energies: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=energies.len() {
        if i == energies.len() || energies[i] - energies[i - 1] > tol {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Within each near-degenerate cluster, rotate to eigenvectors of the cell
/// position operator so that edge partners separate onto opposite ends.
fn localize_clusters(h: &CMatrix, values: &mut [f64], vectors: &mut CMatrix, tol: f64) {
    let n = h.nrows();
    let x = StateVector::from_fn(n, |i, _| real((i / 2) as f64));
    for range in clusters(values, tol) {
        let k = range.len();
        if k < 2 {
            continue;
        }
        let v = vectors.columns(range.start, k).into_owned();
        let xv = CMatrix::from_fn(n, k, |r, c| x[r] * v[(r, c)]);
        let proj = v.adjoint() * xv;
        let (_, u) = hermitian_eigen(&proj);
        let rotated = &v * u;
        for c in 0..k {
            let col = rotated.column(c).into_owned();
            values[range.start + c] = col.dotc(&(h * &col)).re;
            vectors.set_column(range.start + c, &col);
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let sorted = CMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    values.copy_from_slice(&sorted_values);
    *vectors = sorted;
}

fn max_residual(h: &CMatrix, values: &[C64], vectors: &CMatrix) -> f64 {
    let hv = h * vectors;
    (0..values.len())
        .map(|i| (hv.column(i) - vectors.column(i) * values[i]).norm())
        .fold(0.0, f64::max)
}

/// Full spectrum of a dense matrix; Hermitian path if `hermitian`.
pub fn diagonalize_matrix(
    h: &CMatrix,
    hermitian: bool,
    opts: &DiagonalizeOptions,
) -> Result<(Vec<C64>, CMatrix, f64)> {
    let n = h.nrows();
    if n > opts.max_dim {
        return Err(Error::InvalidParameter(format!(
            "dimension {n} exceeds dense limit {}",
            opts.max_dim
        )));
    }
    let norm = h.norm();
    let (values, vectors) = if hermitian {
        let (mut values, mut vectors) = hermitian_eigen(h);
        localize_clusters(h, &mut values, &mut vectors, opts.cluster_tolerance * norm);
        (values.into_iter().map(real).collect::<Vec<_>>(), vectors)
    } else {
        general_eigen(h)
    };
    let residual = max_residual(h, &values, &vectors);
    let bound = RESIDUAL_TOLERANCE * norm.max(f64::MIN_POSITIVE);
    if residual > bound {
        return Err(Error::Convergence { residual, bound });
    }
    Ok((values, vectors, residual))
}

pub fn diagonalize(h: &LatticeHamiltonian) -> Result<SpectrumResult> {
    diagonalize_with(h, &DiagonalizeOptions::default())
}

pub fn diagonalize_with(h: &LatticeHamiltonian, opts: &DiagonalizeOptions) -> Result<SpectrumResult> {
    let (eigenvalues, eigenvectors, max_residual) = diagonalize_matrix(h.entries(), h.hermitian, opts)?;
    let gap = if h.hermitian { bulk_gap(&h.spec)? } else { GapReference::Unavailable };
    let in_gap_indices = match gap.window() {
        Some((lo, hi)) => (0..eigenvalues.len())
            .filter(|&i| eigenvalues[i].re > lo && eigenvalues[i].re < hi)
            .collect(),
        None => Vec::new(),
    };
    Ok(SpectrumResult {
        eigenvalues,
        eigenvectors,
        hermitian: h.hermitian,
        n_cells: h.n_cells(),
        frobenius_norm: h.frobenius_norm(),
        max_residual,
        gap,
        in_gap_indices,
    })
}

/// Probability weight of `psi` on the first `cells` cells.
pub fn left_weight(psi: &StateVector, cells: usize) -> f64 {
    (0..2 * cells.min(psi.len() / 2)).map(|i| psi[i].norm_sqr()).sum()
}

/// Total weight on the B sublattice.
pub fn sublattice_b_weight(psi: &StateVector) -> f64 {
    (0..psi.len() / 2).map(|m| psi[site_b(m)].norm_sqr()).sum()
}

/// In-gap states whose weight on the first `⌈n_cells/4⌉` cells exceeds
/// `loc_threshold`.
pub fn find_edge_states(spec: &SpectrumResult, loc_threshold: f64) -> Result<Vec<usize>> {
    match spec.gap {
        GapReference::Open { .. } => {}
        GapReference::Closed { lower_band_top, upper_band_bottom } => {
            return Err(Error::NoGap { lower: lower_band_top, upper: upper_band_bottom })
        }
        GapReference::Unavailable => {
            return Err(Error::InvalidParameter(
                "edge selection needs a periodic gap reference (uniform Hermitian ladder)".into(),
            ))
        }
    }
    let cells = spec.n_cells.div_ceil(4);
    Ok(spec
        .in_gap_indices
        .iter()
        .copied()
        .filter(|&i| left_weight(&spec.state(i), cells) > loc_threshold)
        .collect())
}

/// `E_ES = −2 (t_intra / t_inter) J₁`. Non-finite when `t_inter = 0`.
pub fn predicted_edge_energy(t_intra: f64, t_inter: f64, j1: f64) -> f64 {
    -2.0 * (t_intra / t_inter) * j1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SublatticeFit {
    pub ratio: C64,
    pub c0: C64,
    /// Root-mean-square residual of `ln|ψ_m|`.
    pub rms_residual: f64,
    pub points: usize,
}

impl SublatticeFit {
    pub fn model_abs(&self, m: usize) -> f64 {
        self.c0.norm() * self.ratio.norm().powi(m as i32)
    }
}

/// Per-sublattice geometric fit `ψ_{S,m} ≈ c₀ rᵐ`. A sublattice with fewer
/// than four usable amplitudes in the window is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeStateFit {
    pub a: Option<SublatticeFit>,
    pub b: Option<SublatticeFit>,
    /// Inclusive cell range.
    pub fit_window: (usize, usize),
    /// Pooled over both sublattices.
    pub rms_residual: f64,
}

impl EdgeStateFit {
    pub fn ratio_a(&self) -> Option<C64> {
        self.a.map(|f| f.ratio)
    }

    pub fn ratio_b(&self) -> Option<C64> {
        self.b.map(|f| f.ratio)
    }
}

/// Cells `1 ..= ⌈n_cells/2⌉`.
pub fn default_fit_window(n_cells: usize) -> (usize, usize) {
    (1, n_cells.div_ceil(2).min(n_cells - 1))
}

fn fit_sublattice(amps: &[(usize, C64)]) -> Option<(SublatticeFit, f64)> {
    let usable: Vec<(usize, C64)> =
        amps.iter().copied().filter(|(_, z)| z.norm() > AMPLITUDE_FLOOR).collect();
    if usable.len() < MIN_FIT_POINTS {
        return None;
    }
    let n = usable.len() as f64;
    let xs: Vec<f64> = usable.iter().map(|(m, _)| *m as f64).collect();
    let ys: Vec<f64> = usable.iter().map(|(_, z)| z.norm().ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sq: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();

    let mut acc = C64::new(0.0, 0.0);
    for w in usable.windows(2) {
        if w[1].0 == w[0].0 + 1 {
            acc += w[1].1 * w[0].1.conj();
        }
    }
    let theta = if acc.norm() > 0.0 { acc.arg() } else { 0.0 };
    let ratio = C64::from_polar(slope.exp(), theta);
    let phase_acc: C64 = usable.iter().map(|(m, z)| z * C64::from_polar(1.0, -theta * *m as f64)).sum();
    let c0 = C64::from_polar(intercept.exp(), phase_acc.arg());
    Some((SublatticeFit { ratio, c0, rms_residual: (sq / n).sqrt(), points: usable.len() }, sq))
}

/// Log-amplitude linear regression per sublattice over an inclusive cell window.
pub fn fit_geometric(state: &StateVector, window: (usize, usize)) -> Result<EdgeStateFit> {
    let n_cells = state.len() / 2;
    let (lo, hi) = window;
    if !state.len().is_multiple_of(2) || lo > hi || hi >= n_cells {
        return Err(Error::InvalidParameter(format!(
            "fit window {lo}..={hi} invalid for {n_cells} cells"
        )));
    }
    let collect = |b: bool| -> Vec<(usize, C64)> {
        (lo..=hi).map(|m| (m, state[if b { site_b(m) } else { site_a(m) }])).collect()
    };
    let fa = fit_sublattice(&collect(false));
    let fb = fit_sublattice(&collect(true));
    if fa.is_none() && fb.is_none() {
        let usable = (lo..=hi)
            .map(|m| state[site_a(m)].norm().max(state[site_b(m)].norm()))
            .filter(|&z| z > AMPLITUDE_FLOOR)
            .count();
        return Err(Error::InsufficientSupport { usable, required: MIN_FIT_POINTS });
    }
    let (sq, pts) = [fa, fb]
        .iter()
        .flatten()
        .fold((0.0, 0usize), |(s, p), (f, q)| (s + q, p + f.points));
    Ok(EdgeStateFit {
        a: fa.map(|x| x.0),
        b: fb.map(|x| x.0),
        fit_window: window,
        rms_residual: (sq / pts as f64).sqrt(),
    })
}

/// Winding of the Bloch off-diagonal element around the origin, oriented so
/// that the topological phase `|w| > |v|` gives `+1`.
pub fn winding_number(v: f64, w: f64, k_points: usize) -> Result<i32> {
    if k_points < 16 {
        return Err(Error::InvalidParameter(format!("k_points must be >= 16, got {k_points}")));
    }
    if (v.abs() - w.abs()).abs() < 1e-12 * v.abs().max(w.abs()).max(1.0) {
        return Err(Error::GapClosure { v, w });
    }
    // h(k) = v + w e^{−ik} traversed with k decreasing
    let h = |j: usize| real(v) + real(w) * C64::from_polar(1.0, 2.0 * PI * j as f64 / k_points as f64);
    let mut total = 0.0;
    for j in 0..k_points {
        total += (h(j + 1) / h(j)).arg();
    }
    Ok((total / (2.0 * PI)).round() as i32)
}

/// Per-bond couplings for the zero-energy recurrence on the A sublattice.
///
/// `intra[m]` couples `(A,m)–(B,m)`; `bonds[m]` couples `(B,m)–(A,m+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceCouplings {
    pub intra: Vec<f64>,
    pub bonds: Vec<f64>,
}

impl RecurrenceCouplings {
    /// Read off an open ladder: `bonds[m] = v_inter[m+1]`.
    pub fn from_ladder(spec: &LadderSpec) -> Self {
        let n = spec.n_cells;
        Self {
            intra: (0..n).map(|m| spec.v_intra.at(m)).collect(),
            bonds: (0..n - 1).map(|m| spec.v_inter.at(m + 1)).collect(),
        }
    }
}

/// Relative weight of the last cell above which the recurrence is rejected.
pub const RECURRENCE_TAIL_LIMIT: f64 = 1e-8;

/// A-sublattice solution of `v_intra[m] φ_m + bonds[m] φ_{m+1} = 0`, `φ₀ = 1`,
/// normalized and embedded in the ladder basis.
pub fn solve_recurrence(c: &RecurrenceCouplings) -> Result<StateVector> {
    let n = c.intra.len();
    if n < 2 {
        return Err(Error::InvalidParameter("recurrence needs at least 2 cells".into()));
    }
    if c.bonds.len() != n - 1 {
        return Err(Error::Dimension { expected: n - 1, found: c.bonds.len() });
    }
    if c.bonds.contains(&0.0) {
        return Err(Error::InvalidParameter("intercell couplings must be nonzero".into()));
    }
    let mut phi = vec![1.0; n];
    for m in 0..n - 1 {
        phi[m + 1] = -c.intra[m] / c.bonds[m] * phi[m];
    }
    let norm_sq: f64 = phi.iter().map(|p| p * p).sum();
    if !norm_sq.is_finite() {
        return Err(Error::Normalization { last_weight: 1.0 });
    }
    let last_weight = phi[n - 1] * phi[n - 1] / norm_sq;
    if last_weight > RECURRENCE_TAIL_LIMIT {
        return Err(Error::Normalization { last_weight });
    }
    let scale = norm_sq.sqrt();
    let mut out = StateVector::zeros(2 * n);
    for (m, p) in phi.iter().enumerate() {
        out[site_a(m)] = real(p / scale);
    }
    Ok(out)
}

/// `(k, E_lower, E_upper)` on `n_k` points of `[0, 2π)`.
pub fn band_structure(spec: &LadderSpec, n_k: usize) -> Result<Vec<(f64, f64, f64)>> {
    (0..n_k)
        .map(|j| {
            let k = 2.0 * PI * j as f64 / n_k as f64;
            bloch_bands(spec, k).map(|(lo, hi)| (k, lo, hi))
        })
        .collect()
}
