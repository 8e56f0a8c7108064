//! Master-equation integration, vectorized Liouvillian and steady states.
//!
//! Vectorization is row-major: `vec(ρ)[i·d + j] = ρ_ij`.

use super::integrator::{integrate, IntegratorOptions};
use super::{
    check_jump_dims, effective_hamiltonian, DensityMatrix, EvolutionResult, JumpOperator, StateDiagnostics,
    TRACE_DRIFT_LIMIT,
};
use crate::linalg::{unvec_row_major, vec_row_major, BandedMatrix, SparseMatrix};
use crate::{CMatrix, Error, Result, StateVector, C64};

/// `dρ/dt = −i H_eff ρ + i ρ H_eff† + Σ L ρ L†` with sparse operators.
pub(crate) struct LindbladGenerator {
    heff: SparseMatrix,
    jumps: Vec<SparseMatrix>,
}

impl LindbladGenerator {
    pub(crate) fn new(h: &CMatrix, jumps: &[JumpOperator]) -> Result<Self> {
        if h.nrows() != h.ncols() {
            return Err(Error::Dimension { expected: h.nrows(), found: h.ncols() });
        }
        check_jump_dims(h.nrows(), jumps)?;
        Ok(Self {
            heff: SparseMatrix::from_dense(&effective_hamiltonian(h, jumps)),
            jumps: jumps.iter().filter(|j| j.rate > 0.0).map(|j| SparseMatrix::from_dense(&j.operator())).collect(),
        })
    }

    pub(crate) fn apply(&self, rho: &CMatrix) -> CMatrix {
        let d = rho.nrows();
        let mut m = CMatrix::zeros(d, d);
        self.heff.mul_dense_acc(rho, C64::new(0.0, -1.0), &mut m);
        let mut out = &m + m.adjoint();
        for l in &self.jumps {
            l.sandwich_acc(rho, &mut out);
        }
        out
    }
}

/// `dρ/dt` at `ρ`.
pub fn lindblad_rhs_at(h: &CMatrix, jumps: &[JumpOperator], rho: &CMatrix) -> Result<CMatrix> {
    if rho.nrows() != h.nrows() {
        return Err(Error::Dimension { expected: h.nrows(), found: rho.nrows() });
    }
    Ok(LindbladGenerator::new(h, jumps)?.apply(rho))
}

/// Integrate the master equation, recording states at every grid time.
///
/// Fails with `TraceDrift` if the trace moves by more than `1e−8`; the state
/// is never renormalized.
pub fn lindblad_evolve(
    h: &CMatrix,
    jumps: &[JumpOperator],
    rho0: &DensityMatrix,
    t_grid: &[f64],
    opts: IntegratorOptions,
) -> Result<EvolutionResult> {
    if rho0.dim() != h.nrows() {
        return Err(Error::Dimension { expected: h.nrows(), found: rho0.dim() });
    }
    let gen = LindbladGenerator::new(h, jumps)?;
    let f = |_t: f64, rho: &CMatrix| gen.apply(rho);
    let tr0 = rho0.trace();
    let mut times = Vec::with_capacity(t_grid.len());
    let mut states = Vec::with_capacity(t_grid.len());
    let mut diagnostics = Vec::with_capacity(t_grid.len());
    let stats = integrate(&f, rho0.entries.clone(), t_grid, opts, |_, t, rho| {
        let diag = StateDiagnostics::of(rho);
        let drift = (diag.trace - tr0).abs();
        if drift > TRACE_DRIFT_LIMIT {
            return Err(Error::TraceDrift { t, drift, limit: TRACE_DRIFT_LIMIT });
        }
        times.push(t);
        states.push(DensityMatrix { entries: rho.clone() });
        diagnostics.push(diag);
        Ok(())
    })?;
    Ok(EvolutionResult { times, states, diagnostics, stats })
}

/// Sparse `d² × d²` Liouvillian acting on row-major `vec(ρ)`.
pub fn liouvillian(h: &CMatrix, jumps: &[JumpOperator]) -> Result<SparseMatrix> {
    let gen = LindbladGenerator::new(h, jumps)?;
    let d = h.nrows();
    let mut entries = Vec::new();
    let i_unit = C64::new(0.0, 1.0);
    for &(i, k, z) in &gen.heff.entries {
        for j in 0..d {
            // −i H_eff ρ
            entries.push((i * d + j, k * d + j, -i_unit * z));
            // +i ρ H_eff†, with (ρ H_eff†)_{ji} = Σ_k ρ_jk conj(H_eff)_{ik}
            entries.push((j * d + i, j * d + k, i_unit * z.conj()));
        }
    }
    for l in &gen.jumps {
        for &(i, k, a) in &l.entries {
            for &(j, m, b) in &l.entries {
                entries.push((i * d + j, k * d + m, a * b.conj()));
            }
        }
    }
    Ok(SparseMatrix { nrows: d * d, ncols: d * d, entries })
}

pub fn liouvillian_dense(h: &CMatrix, jumps: &[JumpOperator]) -> Result<CMatrix> {
    Ok(liouvillian(h, jumps)?.to_dense())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// `‖𝓛 vec(ρ)‖₂`.
    pub residual: f64,
    pub iterations: usize,
}

/// Null vector of the Liouvillian by shifted inverse iteration on a banded LU
/// factorization, returned as a unit-trace density matrix.
pub fn steady_state(h: &CMatrix, jumps: &[JumpOperator]) -> Result<SteadyState> {
    let d = h.nrows();
    let l = liouvillian(h, jumps)?;
    let n = d * d;
    let (mut kl, mut ku) = (0usize, 0usize);
    let mut scale: f64 = 0.0;
    for &(r, c, z) in &l.entries {
        kl = kl.max(r.saturating_sub(c));
        ku = ku.max(c.saturating_sub(r));
        scale = scale.max(z.norm());
    }
    if scale == 0.0 {
        return Err(Error::InvalidParameter("Liouvillian is zero: every state is stationary".into()));
    }
    let shift = -1e-9 * scale;
    let mut band = BandedMatrix::zeros(n, kl, ku);
    for &(r, c, z) in &l.entries {
        band.add(r, c, z);
    }
    for i in 0..n {
        band.add(i, i, C64::new(-shift, 0.0));
    }
    let lu = band.factor()?;
    let mut x = vec_row_major(&CMatrix::identity(d, d));
    let target = 1e-12 * scale;
    let mut iterations = 0;
    for it in 1..=12 {
        iterations = it;
        x = lu.solve(&x);
        let norm = x.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Convergence { residual: f64::INFINITY, bound: target });
        }
        x /= C64::new(norm, 0.0);
        if l.mul_vec(&x).norm() <= target {
            break;
        }
    }
    let mut rho = unvec_row_major(&x, d);
    let tr = rho.trace();
    rho /= tr;
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let residual_rho = l.mul_vec(&vec_row_major(&rho)).norm();
    let bound = 1e-8 * scale;
    if residual_rho > bound {
        return Err(Error::Convergence { residual: residual_rho, bound });
    }
    Ok(SteadyState { rho: DensityMatrix::new(rho)?, residual: residual_rho, iterations })
}

/// `vec(ρ(t)) = exp(𝓛 t) vec(ρ₀)` by dense matrix exponential; small systems only.
pub fn exact_evolution(h: &CMatrix, jumps: &[JumpOperator], rho0: &CMatrix, t: f64) -> Result<CMatrix> {
    let l = liouvillian_dense(h, jumps)?;
    let prop = (l * C64::new(t, 0.0)).exp();
    let v: StateVector = prop * vec_row_major(rho0);
    Ok(unvec_row_major(&v, h.nrows()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{atom_decay_jumps, cavity_photon_loss, coherent_decay_reference, photon_loss_jump, purity};
    use crate::fock::{coherent_state, TruncatedFockSpace};
    use crate::hamiltonian::{build_driven_jc, build_ssh, cavity_hamiltonian, Boundary, JcParams};
    use crate::linalg::{projector, real, trace_distance};

    fn lcg_state(dim: usize, seed: u64) -> StateVector {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let v = StateVector::from_fn(dim, |_, _| C64::new(next(), next()));
        let n = v.norm();
        v / C64::new(n, 0.0)
    }

    #[test]
    fn frozen_without_hamiltonian_or_loss() {
        let psi = lcg_state(6, 3);
        let rho0 = DensityMatrix::from_pure(&psi).unwrap();
        let h = CMatrix::zeros(6, 6);
        let r = lindblad_evolve(&h, &[], &rho0, &[0.0, 1.0, 5.0], IntegratorOptions::default()).unwrap();
        for s in &r.states {
            assert_eq!(s.entries, rho0.entries);
        }
    }

    #[test]
    fn rhs_matches_commutator_form() {
        // −i[H,ρ] + Σ (LρL† − ½{L†L, ρ})
        let p = JcParams::new(0.8, 0.3, 4);
        let h = build_driven_jc(&p).unwrap().entries().clone();
        let jumps = atom_decay_jumps(5, 0.7).unwrap();
        let psi = lcg_state(10, 9);
        let rho = projector(&psi);
        let mut expected = (&h * &rho - &rho * &h) * C64::new(0.0, -1.0);
        for j in &jumps {
            let l = j.operator();
            let ll = l.adjoint() * &l;
            expected += &l * &rho * l.adjoint() - (&ll * &rho + &rho * &ll) * real(0.5);
        }
        let got = lindblad_rhs_at(&h, &jumps, &rho).unwrap();
        assert!((got - expected).camax() < 1e-14);
    }

    #[test]
    fn liouvillian_matches_rhs() {
        let h = build_ssh(-1.0, -2.0, 3, C64::new(0.2, 0.1), real(-0.1), Boundary::Open).unwrap();
        let mut jumps = atom_decay_jumps(3, 0.3).unwrap();
        jumps.push(photon_loss_jump(3, 0.2).unwrap());
        let rho = projector(&lcg_state(6, 1));
        let l = liouvillian(h.entries(), &jumps).unwrap();
        let via_l = unvec_row_major(&l.mul_vec(&vec_row_major(&rho)), 6);
        let direct = lindblad_rhs_at(h.entries(), &jumps, &rho).unwrap();
        assert!((via_l - direct).camax() < 1e-14);
    }

    #[test]
    fn damped_coherent_state_stays_coherent() {
        let sp = TruncatedFockSpace::new(20).unwrap();
        let omega = 1.0;
        let h = cavity_hamiltonian(sp, omega, C64::new(0.0, 0.0), C64::new(0.0, 0.0)).entries;
        let jumps = vec![cavity_photon_loss(sp, 0.2).unwrap()];
        let a0 = real(1.0);
        let rho0 = DensityMatrix::from_pure(&coherent_state(a0, sp).unwrap().amplitudes).unwrap();
        let r = lindblad_evolve(&h, &jumps, &rho0, &[0.0, 0.5, 1.0], IntegratorOptions::default()).unwrap();
        let rho1 = &r.states[2];
        let alpha = coherent_decay_reference(a0, omega, 0.2, 1.0);
        let reference = coherent_state(alpha, sp).unwrap().amplitudes;
        let fid = reference.dotc(&(&rho1.entries * &reference)).re;
        assert!(fid > 1.0 - 1e-6, "fidelity {fid}");
        assert!(rho1.purity() > 1.0 - 1e-6);
        for d in &r.diagnostics {
            assert!((d.trace - 1.0).abs() < 1e-8);
            assert!(d.min_eigenvalue > -1e-8);
            assert!(d.hermiticity_defect < 1e-12);
        }
    }

    #[test]
    fn integration_matches_matrix_exponential() {
        let sp = TruncatedFockSpace::new(11).unwrap();
        let h = cavity_hamiltonian(sp, 1.0, C64::new(0.1, 0.05), C64::new(0.1, 0.0)).entries;
        let jumps = vec![cavity_photon_loss(sp, 0.3).unwrap()];
        let rho0 = DensityMatrix::from_pure(&coherent_state(real(0.7), sp).unwrap().amplitudes).unwrap();
        let grid = [0.0, 0.7, 2.0];
        let r = lindblad_evolve(&h, &jumps, &rho0, &grid, IntegratorOptions::default()).unwrap();
        for (t, s) in grid.iter().zip(&r.states) {
            let exact = exact_evolution(&h, &jumps, &rho0.entries, *t).unwrap();
            assert!((&s.entries - exact).camax() < 1e-8);
        }
    }

    #[test]
    fn steady_state_of_driven_jc_is_coherent_dark_state() {
        let p = JcParams::new(1.0, 0.5, 20);
        let h = build_driven_jc(&p).unwrap().entries().clone();
        let jumps = atom_decay_jumps(21, 1.0).unwrap();
        let ss = steady_state(&h, &jumps).unwrap();
        let dark = coherent_state(real(-0.5), TruncatedFockSpace::new(20).unwrap()).unwrap().on_sublattice(false);
        assert!(trace_distance(&ss.rho.entries, &projector(&dark)) < 1e-8);
    }

    #[test]
    fn evolution_relaxes_to_dark_state() {
        let p = JcParams::new(1.0, 0.5, 12);
        let h = build_driven_jc(&p).unwrap().entries().clone();
        let jumps = atom_decay_jumps(13, 1.0).unwrap();
        let rho0 = DensityMatrix::mixed(26);
        let r = lindblad_evolve(&h, &jumps, &rho0, &[0.0, 80.0, 160.0], IntegratorOptions::default()).unwrap();
        let ss = steady_state(&h, &jumps).unwrap();
        let last = &r.states[2].entries;
        assert!(trace_distance(last, &ss.rho.entries) < 1e-6, "{}", trace_distance(last, &ss.rho.entries));
        for d in &r.diagnostics {
            assert!((d.trace - 1.0).abs() < 1e-8 && d.min_eigenvalue > -1e-8);
        }
    }

    #[test]
    fn two_photon_drive_reduces_purity() {
        let sp = TruncatedFockSpace::new(25).unwrap();
        let h = cavity_hamiltonian(sp, 1.0, C64::new(0.0, 0.0), real(0.3)).entries;
        let jumps = vec![cavity_photon_loss(sp, 0.2).unwrap()];
        let rho0 = DensityMatrix::from_pure(&coherent_state(real(1.0), sp).unwrap().amplitudes).unwrap();
        let r = lindblad_evolve(&h, &jumps, &rho0, &[0.0, 5.0], IntegratorOptions::default()).unwrap();
        assert!(purity(&r.states[1].entries) < 0.99);
    }

    #[test]
    fn dimension_errors() {
        let h = CMatrix::zeros(4, 4);
        let jumps = atom_decay_jumps(3, 1.0).unwrap();
        assert!(matches!(liouvillian(&h, &jumps), Err(Error::Dimension { .. })));
        let rho = DensityMatrix::mixed(3);
        assert!(lindblad_evolve(&h, &[], &rho, &[0.0, 1.0], IntegratorOptions::default()).is_err());
    }
}
