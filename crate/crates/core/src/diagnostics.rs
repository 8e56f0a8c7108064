//! Dark-state residuals, cell ⊗ sublattice Schmidt decomposition and
//! product-state fidelities.

use serde::{Deserialize, Serialize};

use crate::dynamics::JumpOperator;
use crate::fock::{coherent_state, TruncatedFockSpace};
use crate::linalg::real;
use crate::{CMatrix, Error, Result, StateVector, C64};

pub use crate::dynamics::purity;
pub use crate::linalg::trace_distance;

/// Inputs must be normalized to this accuracy.
pub const NORM_TOLERANCE: f64 = 1e-10;

fn check_normalized(psi: &StateVector) -> Result<()> {
    let n = psi.norm();
    if (n - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::InvalidParameter(format!("state norm {n} != 1")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DarkStateReport {
    /// `⟨ψ|H|ψ⟩`.
    pub energy: C64,
    /// `‖Hψ − ⟨H⟩ψ‖`.
    pub eigen_residual: f64,
    /// `max_k ‖L_k ψ‖`.
    pub jump_residual: f64,
    pub tolerance: f64,
    pub dark: bool,
}

pub fn dark_state_check(
    h: &CMatrix,
    jumps: &[JumpOperator],
    psi: &StateVector,
    tolerance: f64,
) -> Result<DarkStateReport> {
    if h.nrows() != psi.len() {
        return Err(Error::Dimension { expected: h.nrows(), found: psi.len() });
    }
    check_normalized(psi)?;
    let hpsi = h * psi;
    let energy = psi.dotc(&hpsi);
    let eigen_residual = (hpsi - psi * energy).norm();
    let mut jump_residual: f64 = 0.0;
    for j in jumps {
        if j.dim() != psi.len() {
            return Err(Error::Dimension { expected: psi.len(), found: j.dim() });
        }
        jump_residual = jump_residual.max((j.operator() * psi).norm());
    }
    Ok(DarkStateReport {
        energy,
        eigen_residual,
        jump_residual,
        tolerance,
        dark: eigen_residual <= tolerance && jump_residual <= tolerance,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductDecomposition {
    /// Descending, nonnegative.
    pub schmidt_values: Vec<f64>,
    /// Leading left singular vector over cells; its largest component is real positive.
    pub cell_factor: StateVector,
    /// Leading right factor `(c_A, c_B)`.
    pub sublattice_factor: [C64; 2],
    /// `−Σ s² ln s²` in nats.
    pub entropy: f64,
}

impl ProductDecomposition {
    pub fn second_schmidt_value(&self) -> f64 {
        self.schmidt_values.get(1).copied().unwrap_or(0.0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schmidt_values": self.schmidt_values,
            "entropy": self.entropy,
            "sublattice_factor": self.sublattice_factor.map(|z| [z.re, z.im]),
            "cell_factor": self.cell_factor.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        })
    }
}

/// Schmidt decomposition of a ladder state across cell ⊗ sublattice.
pub fn sublattice_schmidt(psi: &StateVector, n_cells: usize) -> Result<ProductDecomposition> {
    if psi.len() != 2 * n_cells || n_cells == 0 {
        return Err(Error::Dimension { expected: 2 * n_cells, found: psi.len() });
    }
    check_normalized(psi)?;
    // cell-major: row m holds (ψ_{A,m}, ψ_{B,m})
    let m = CMatrix::from_fn(n_cells, 2, |r, c| psi[2 * r + c]);
    let svd = m.svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let lead = order[0];
    let mut cell = u.column(lead).into_owned();
    let mut sub = [v_t[(lead, 0)], v_t[(lead, 1)]];
    let (imax, _) = cell.iter().enumerate().fold((0, 0.0), |acc, (i, z)| {
        if z.norm() > acc.1 {
            (i, z.norm())
        } else {
            acc
        }
    });
    let phase = C64::from_polar(1.0, -cell[imax].arg());
    cell *= phase;
    sub[0] /= phase;
    sub[1] /= phase;
    let schmidt_values: Vec<f64> = order.iter().map(|&i| sv[i]).collect();
    let entropy = schmidt_values
        .iter()
        .map(|s| s * s)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum();
    Ok(ProductDecomposition { schmidt_values, cell_factor: cell, sublattice_factor: sub, entropy })
}

/// Pure or mixed input for fidelity checks.
#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a> {
    Pure(&'a StateVector),
    Mixed(&'a CMatrix),
}

impl StateRef<'_> {
    fn dim(&self) -> usize {
        match self {
            StateRef::Pure(v) => v.len(),
            StateRef::Mixed(m) => m.nrows(),
        }
    }
}

/// `|⟨ref|ψ⟩|²` or `⟨ref|ρ|ref⟩` with `ref = |α⟩ ⊗ c/‖c‖` on the ladder basis.
///
/// For mixed states this is the overlap with a pure reference, not the
/// Uhlmann fidelity.
pub fn product_fidelity(state: StateRef<'_>, alpha: C64, c: [C64; 2]) -> Result<f64> {
    let d = state.dim();
    if d < 4 || !d.is_multiple_of(2) {
        return Err(Error::Dimension { expected: 2 * (d / 2).max(2), found: d });
    }
    let cn = (c[0].norm_sqr() + c[1].norm_sqr()).sqrt();
    if cn == 0.0 {
        return Err(Error::InvalidParameter("sublattice factor must be nonzero".into()));
    }
    let c = [c[0] / cn, c[1] / cn];
    let space = TruncatedFockSpace::new(d / 2 - 1)?;
    let reference = coherent_state(alpha, space)?.tensor_sublattice(c);
    let f = match state {
        StateRef::Pure(psi) => reference.dotc(psi).norm_sqr(),
        StateRef::Mixed(rho) => reference.dotc(&(rho * &reference)).re,
    };
    Ok(f.clamp(0.0, 1.0))
}

/// Fidelity with a coherent state on a bare Fock basis.
pub fn coherent_fidelity(state: StateRef<'_>, alpha: C64) -> Result<f64> {
    let d = state.dim();
    let space = TruncatedFockSpace::new(d.saturating_sub(1))?;
    let reference = coherent_state(alpha, space)?.amplitudes;
    let f = match state {
        StateRef::Pure(psi) => reference.dotc(psi).norm_sqr(),
        StateRef::Mixed(rho) => reference.dotc(&(rho * &reference)).re,
    };
    Ok(f.clamp(0.0, 1.0))
}

/// `⟨b⟩ = tr(ρ b)` for a ladder-basis density matrix, `b` acting on the cell index.
pub fn mean_amplitude(rho: &CMatrix) -> C64 {
    let n_cells = rho.nrows() / 2;
    let mut acc = C64::new(0.0, 0.0);
    // (b ⊗ 1)_{(m−1,s),(m,s)} = √m
    for m in 1..n_cells {
        for s in 0..2 {
            acc += real((m as f64).sqrt()) * rho[(2 * m + s, 2 * (m - 1) + s)];
        }
    }
    acc
}

/// Reduced 2×2 sublattice state obtained by tracing out the cell index.
pub fn reduced_sublattice(rho: &CMatrix) -> [[C64; 2]; 2] {
    let n_cells = rho.nrows() / 2;
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for m in 0..n_cells {
        for (s, row) in out.iter_mut().enumerate() {
            for (t, z) in row.iter_mut().enumerate() {
                *z += rho[(2 * m + s, 2 * m + t)];
            }
        }
    }
    out
}
