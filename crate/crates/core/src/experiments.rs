//! End-to-end studies shared by the command-line front end and the
//! acceptance suite.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    dark_state_check, product_fidelity, reduced_sublattice, sublattice_schmidt, DarkStateReport,
    ProductDecomposition, StateRef,
};
use crate::dynamics::{
    average_trajectories, coherent_decay_reference, effective_hamiltonian, lindblad_evolve, photon_loss_jump,
    steady_state, DensityMatrix, IntegratorOptions, SteadyState,
};
use crate::fock::{coherent_state, TruncatedFockSpace};
use crate::hamiltonian::{build_driven_jc, build_ssh, cavity_hamiltonian, Boundary, JcParams};
use crate::linalg::{hermitian_eigenvalues, projector, real, trace_distance};
use crate::par::{self, Exec};
use crate::spectra::{
    default_fit_window, diagonalize, find_edge_states, fit_geometric, left_weight, predicted_edge_energy,
    solve_recurrence, sublattice_b_weight, EdgeStateFit, GapReference, RecurrenceCouplings,
    DEFAULT_LOC_THRESHOLD,
};
use crate::{Error, Result, StateVector, C64};

/// Evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// `start, start+step, …` up to `stop` (inclusive within half a step).
pub fn arange(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if step == 0.0 || !step.is_finite() || (stop - start) * step < 0.0 {
        return Err(Error::InvalidParameter(format!("bad sweep {start}..{stop} step {step}")));
    }
    let n = ((stop - start) / step + 0.5).floor() as usize + 1;
    Ok((0..n).map(|i| start + step * i as f64).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SshParams {
    #[serde(default = "default_t_inter")]
    pub t_inter: f64,
    #[serde(default = "default_t_intra")]
    pub t_intra: f64,
    #[serde(default = "default_n_cells")]
    pub n_cells: usize,
}

fn default_t_inter() -> f64 {
    -2.0
}
fn default_t_intra() -> f64 {
    -1.0
}
fn default_n_cells() -> usize {
    80
}

impl Default for SshParams {
    fn default() -> Self {
        Self { t_inter: default_t_inter(), t_intra: default_t_intra(), n_cells: default_n_cells() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumPoint {
    pub j1: f64,
    pub j2: f64,
    pub energies: Vec<f64>,
    pub in_gap: Vec<bool>,
    pub gap: GapReference,
    /// Left-edge states inside the gap.
    pub edge_indices: Vec<usize>,
    pub predicted: f64,
}

impl SpectrumPoint {
    pub fn edge_energy(&self) -> Option<f64> {
        match self.edge_indices.as_slice() {
            [i] => Some(self.energies[*i]),
            _ => None,
        }
    }
}

/// Open-chain spectrum with same-sublattice hopping `(j1, j2)`.
pub fn spectrum_point(p: &SshParams, j1: f64, j2: f64) -> Result<SpectrumPoint> {
    let h = build_ssh(p.t_intra, p.t_inter, p.n_cells, real(j1), real(j2), Boundary::Open)?;
    let s = diagonalize(&h)?;
    let edge_indices = match find_edge_states(&s, DEFAULT_LOC_THRESHOLD) {
        Ok(e) => e,
        Err(Error::NoGap { .. }) => Vec::new(),
        Err(e) => return Err(e),
    };
    let in_gap = (0..s.len()).map(|i| s.in_gap_indices.contains(&i)).collect();
    Ok(SpectrumPoint {
        j1,
        j2,
        energies: s.energies(),
        in_gap,
        gap: s.gap,
        edge_indices,
        predicted: predicted_edge_energy(p.t_intra, p.t_inter, j1),
    })
}

pub fn spectrum_sweep(p: &SshParams, j1_values: &[f64], j2: f64, exec: Exec) -> Result<Vec<SpectrumPoint>> {
    par::try_map(exec, j1_values, |&j1| spectrum_point(p, j1, j2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFitResult {
    pub j1: f64,
    pub j2: f64,
    pub energy: f64,
    pub predicted: f64,
    pub state: StateVector,
    pub fit: EdgeStateFit,
    pub schmidt: ProductDecomposition,
    pub b_weight: f64,
    pub left_weight: f64,
}

/// Locate the left edge state and fit it per sublattice.
pub fn edge_fit(p: &SshParams, j1: f64, j2: f64) -> Result<EdgeFitResult> {
    let h = build_ssh(p.t_intra, p.t_inter, p.n_cells, real(j1), real(j2), Boundary::Open)?;
    let s = diagonalize(&h)?;
    let edges = find_edge_states(&s, DEFAULT_LOC_THRESHOLD)?;
    let cells = p.n_cells.div_ceil(4);
    let idx = edges
        .iter()
        .copied()
        .max_by(|&a, &b| left_weight(&s.state(a), cells).total_cmp(&left_weight(&s.state(b), cells)))
        .ok_or_else(|| Error::InvalidParameter(format!("no left edge state at j1={j1}, j2={j2}")))?;
    let state = s.state(idx);
    let fit = fit_geometric(&state, default_fit_window(p.n_cells))?;
    let schmidt = sublattice_schmidt(&state, p.n_cells)?;
    Ok(EdgeFitResult {
        j1,
        j2,
        energy: s.eigenvalues[idx].re,
        predicted: predicted_edge_energy(p.t_intra, p.t_inter, j1),
        b_weight: sublattice_b_weight(&state),
        left_weight: left_weight(&state, cells),
        state,
        fit,
        schmidt,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DarkStateConfig {
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default = "half")]
    pub mu: f64,
    #[serde(default = "forty")]
    pub n_max: usize,
    /// Atom-decay rate for the jump operators and the Liouvillian.
    #[serde(default = "one")]
    pub gamma: f64,
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn forty() -> usize {
    40
}

impl Default for DarkStateConfig {
    fn default() -> Self {
        Self { lambda: 1.0, mu: 0.5, n_max: 40, gamma: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DarkStateResult {
    pub alpha: C64,
    pub tail_error: f64,
    pub closed_form: StateVector,
    pub recurrence: StateVector,
    pub steady: SteadyState,
    pub report: DarkStateReport,
    /// `‖ψ_rec − e^{iθ} ψ_cf‖` with the optimal phase.
    pub recurrence_vs_closed: f64,
    pub steady_vs_closed: f64,
    pub steady_vs_recurrence: f64,
}

/// Phase-aligned distance `min_θ ‖a − e^{iθ} b‖`.
pub fn aligned_distance(a: &StateVector, b: &StateVector) -> f64 {
    let ov = b.dotc(a);
    let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { real(1.0) };
    (a - b * phase).norm()
}

/// Closed-form coherent state vs recurrence vs Liouvillian steady state.
pub fn dark_state_study(cfg: &DarkStateConfig) -> Result<DarkStateResult> {
    let params = JcParams { gamma: cfg.gamma, ..JcParams::new(cfg.lambda, cfg.mu, cfg.n_max) };
    let alpha = params.dark_alpha()?;
    let space = TruncatedFockSpace::new(cfg.n_max)?;
    let cs = coherent_state(alpha, space)?;
    let closed_form = cs.on_sublattice(false);
    let h = build_driven_jc(&params)?;
    let recurrence = solve_recurrence(&RecurrenceCouplings::from_ladder(&h.spec))?;
    let jumps = crate::dynamics::atom_decay_jumps(h.n_cells(), cfg.gamma)?;
    let report = dark_state_check(h.entries(), &jumps, &closed_form, 1e-10)?;
    let steady = steady_state(h.entries(), &jumps)?;
    Ok(DarkStateResult {
        alpha,
        tail_error: cs.tail_error,
        recurrence_vs_closed: aligned_distance(&recurrence, &closed_form),
        steady_vs_closed: trace_distance(&steady.rho.entries, &projector(&closed_form)),
        steady_vs_recurrence: trace_distance(&steady.rho.entries, &projector(&recurrence)),
        closed_form,
        recurrence,
        steady,
        report,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolveMode {
    #[default]
    Master,
    Trajectories,
}

/// Cavity mode on the ladder basis: `H = (ω n̂ + drives) ⊗ 1`, `L = √γ b ⊗ 1`,
/// started from `|α₀⟩ ⊗ c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointerConfig {
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_alpha0")]
    pub alpha0: C64,
    /// Sublattice factor `(c_A, c_B)`, normalized on use.
    #[serde(default = "default_c")]
    pub c: [C64; 2],
    #[serde(default)]
    pub f_drive: C64,
    #[serde(default)]
    pub g_drive: C64,
    #[serde(default = "default_pointer_cells")]
    pub n_cells: usize,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default = "default_n_times")]
    pub n_times: usize,
    #[serde(default)]
    pub mode: EvolveMode,
    #[serde(default = "default_n_traj")]
    pub n_traj: usize,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
}

fn default_gamma() -> f64 {
    0.2
}
fn default_alpha0() -> C64 {
    real(1.0)
}
fn default_c() -> [C64; 2] {
    [real(0.6), real(0.8)]
}
fn default_pointer_cells() -> usize {
    21
}
fn default_t_final() -> f64 {
    5.0
}
fn default_n_times() -> usize {
    51
}
fn default_n_traj() -> usize {
    500
}
fn default_rtol() -> f64 {
    1e-10
}

impl Default for PointerConfig {
    fn default() -> Self {
        Self {
            omega: 1.0,
            gamma: default_gamma(),
            alpha0: default_alpha0(),
            c: default_c(),
            f_drive: real(0.0),
            g_drive: real(0.0),
            n_cells: default_pointer_cells(),
            t_final: default_t_final(),
            n_times: default_n_times(),
            mode: EvolveMode::Master,
            n_traj: default_n_traj(),
            rtol: default_rtol(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointerRow {
    pub t: f64,
    pub trace: f64,
    pub purity: f64,
    pub alpha_ref: C64,
    pub product_fidelity: f64,
    /// Square roots of the reduced sublattice eigenvalues, descending; the
    /// Schmidt values when the state is pure.
    pub schmidt: [f64; 2],
    pub min_eigenvalue: f64,
}

fn pointer_row(cfg: &PointerConfig, t: f64, rho: &crate::CMatrix) -> Result<PointerRow> {
    let alpha_ref = coherent_decay_reference(cfg.alpha0, cfg.omega, cfg.gamma, t);
    let red = reduced_sublattice(rho);
    let red = crate::CMatrix::from_row_slice(2, 2, &[red[0][0], red[0][1], red[1][0], red[1][1]]);
    let ev = hermitian_eigenvalues(&red);
    let eig = hermitian_eigenvalues(rho);
    Ok(PointerRow {
        t,
        trace: rho.trace().re,
        purity: crate::dynamics::purity(rho),
        alpha_ref,
        product_fidelity: product_fidelity(StateRef::Mixed(rho), alpha_ref, cfg.c)?,
        schmidt: [ev[1].max(0.0).sqrt(), ev[0].max(0.0).sqrt()],
        min_eigenvalue: eig.first().copied().unwrap_or(0.0),
    })
}

/// Product-structure experiment for a single damped, optionally driven, mode.
pub fn pointer_run(cfg: &PointerConfig, seed: u64, exec: Exec) -> Result<Vec<PointerRow>> {
    if cfg.n_times < 2 || !(cfg.t_final > 0.0) {
        return Err(Error::InvalidParameter("need n_times >= 2 and t_final > 0".into()));
    }
    let space = TruncatedFockSpace::new(cfg.n_cells.saturating_sub(1))?;
    let h = cavity_hamiltonian(space, cfg.omega, cfg.f_drive, cfg.g_drive).to_ladder().entries;
    let jumps = vec![photon_loss_jump(cfg.n_cells, cfg.gamma)?];
    let cn = (cfg.c[0].norm_sqr() + cfg.c[1].norm_sqr()).sqrt();
    if cn == 0.0 {
        return Err(Error::InvalidParameter("sublattice factor must be nonzero".into()));
    }
    let psi0 = coherent_state(cfg.alpha0, space)?.tensor_sublattice([cfg.c[0] / cn, cfg.c[1] / cn]);
    let grid = linspace(0.0, cfg.t_final, cfg.n_times);
    let opts = IntegratorOptions::with_rtol(cfg.rtol);
    let states: Vec<crate::CMatrix> = match cfg.mode {
        EvolveMode::Master => lindblad_evolve(&h, &jumps, &DensityMatrix::from_pure(&psi0)?, &grid, opts)?
            .states
            .into_iter()
            .map(|s| s.entries)
            .collect(),
        EvolveMode::Trajectories => {
            let heff = effective_hamiltonian(&h, &jumps);
            average_trajectories(&heff, &jumps, &psi0, &grid, seed, cfg.n_traj, exec, opts)?
        }
    };
    grid.iter().zip(&states).map(|(&t, rho)| pointer_row(cfg, t, rho)).collect()
}
