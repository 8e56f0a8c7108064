//! Open-system dynamics: Lindblad master equation, Liouvillian steady
//! states and quantum-jump trajectories.

pub mod integrator;
pub mod lindblad;
pub mod trajectory;

use serde::{Deserialize, Serialize};

pub use integrator::{IntegratorOptions, StepStats};
pub use lindblad::{
    lindblad_evolve, lindblad_rhs_at, liouvillian, liouvillian_dense, steady_state, SteadyState,
};
pub use trajectory::{average_trajectories, trajectory_evolve, TrajectoryResult};

use crate::fock::{annihilation_matrix, deformed_annihilation_matrix, BasisTag, OperatorMatrix, TruncatedFockSpace};
use crate::linalg::{hermitian_eigenvalues, hermiticity_defect, projector, real};
use crate::{site_a, site_b, CMatrix, Error, Result, StateVector, C64};

/// Validation tolerances for density matrices.
pub const HERMITICITY_LIMIT: f64 = 1e-12;
pub const TRACE_LIMIT: f64 = 1e-10;
pub const POSITIVITY_LIMIT: f64 = 1e-10;
/// Allowed trace drift over an evolution run.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub entries: CMatrix,
}

impl DensityMatrix {
    /// Checked constructor: Hermitian, unit trace and positive semidefinite.
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::Dimension { expected: entries.nrows(), found: entries.ncols() });
        }
        let rho = Self { entries };
        let herm = hermiticity_defect(&rho.entries);
        if herm > HERMITICITY_LIMIT {
            return Err(Error::InvalidParameter(format!("density matrix not Hermitian ({herm:.3e})")));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > TRACE_LIMIT {
            return Err(Error::InvalidParameter(format!("density matrix trace {tr} != 1")));
        }
        let min = rho.min_eigenvalue();
        if min < -POSITIVITY_LIMIT {
            return Err(Error::InvalidParameter(format!("density matrix eigenvalue {min:.3e} < 0")));
        }
        Ok(rho)
    }

    pub fn from_pure(psi: &StateVector) -> Result<Self> {
        let n = psi.norm();
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!("state norm {n} != 1")));
        }
        Ok(Self { entries: projector(psi) })
    }

    /// Maximally mixed state `1/d`.
    pub fn mixed(dim: usize) -> Self {
        Self { entries: CMatrix::identity(dim, dim) * real(1.0 / dim as f64) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        purity(&self.entries)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.entries).first().copied().unwrap_or(0.0)
    }

    pub fn expectation(&self, op: &CMatrix) -> C64 {
        (op * &self.entries).trace()
    }
}

/// `tr ρ²` for Hermitian `ρ`.
pub fn purity(rho: &CMatrix) -> f64 {
    rho.iter().map(|z| z.norm_sqr()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpLabel {
    AtomDecay,
    PhotonLoss,
    DeformedPhotonLoss,
}

/// Collapse operator `√rate · matrix`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpOperator {
    pub matrix: OperatorMatrix,
    pub rate: f64,
    pub label: JumpLabel,
}

impl JumpOperator {
    pub fn new(matrix: OperatorMatrix, rate: f64, label: JumpLabel) -> Result<Self> {
        if !(rate >= 0.0) {
            return Err(Error::InvalidParameter(format!("jump rate must be >= 0, got {rate}")));
        }
        Ok(Self { matrix, rate, label })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `√rate · matrix`.
    pub fn operator(&self) -> CMatrix {
        &self.matrix.entries * real(self.rate.sqrt())
    }
}

/// `L_m = √γ |A,m⟩⟨B,m|` for every cell.
pub fn atom_decay_jumps(n_cells: usize, gamma: f64) -> Result<Vec<JumpOperator>> {
    let d = 2 * n_cells;
    (0..n_cells)
        .map(|m| {
            let mut op = CMatrix::zeros(d, d);
            op[(site_a(m), site_b(m))] = real(1.0);
            JumpOperator::new(OperatorMatrix { entries: op, basis: BasisTag::Ladder }, gamma, JumpLabel::AtomDecay)
        })
        .collect()
}

/// `√γ b ⊗ 1` on the ladder basis.
pub fn photon_loss_jump(n_cells: usize, gamma: f64) -> Result<JumpOperator> {
    let space = TruncatedFockSpace::new(n_cells.saturating_sub(1))?;
    JumpOperator::new(annihilation_matrix(space).to_ladder(), gamma, JumpLabel::PhotonLoss)
}

/// `√γ A ⊗ 1` with the unit-element lowering operator.
pub fn deformed_photon_loss_jump(n_cells: usize, gamma: f64) -> Result<JumpOperator> {
    let space = TruncatedFockSpace::new(n_cells.saturating_sub(1))?;
    JumpOperator::new(deformed_annihilation_matrix(space).to_ladder(), gamma, JumpLabel::DeformedPhotonLoss)
}

/// `√γ b` on a bare cavity mode.
pub fn cavity_photon_loss(space: TruncatedFockSpace, gamma: f64) -> Result<JumpOperator> {
    JumpOperator::new(annihilation_matrix(space), gamma, JumpLabel::PhotonLoss)
}

/// `Σ_k L_k† L_k`.
pub fn jump_sum(jumps: &[JumpOperator], dim: usize) -> CMatrix {
    let mut acc = CMatrix::zeros(dim, dim);
    for j in jumps {
        let l = j.operator();
        acc += l.adjoint() * l;
    }
    acc
}

/// `H − (i/2) Σ L†L`.
pub fn effective_hamiltonian(h: &CMatrix, jumps: &[JumpOperator]) -> CMatrix {
    h - jump_sum(jumps, h.nrows()) * C64::new(0.0, 0.5)
}

pub(crate) fn check_jump_dims(dim: usize, jumps: &[JumpOperator]) -> Result<()> {
    for j in jumps {
        if j.dim() != dim {
            return Err(Error::Dimension { expected: dim, found: j.dim() });
        }
    }
    Ok(())
}

/// Scalars recorded at every output time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateDiagnostics {
    pub trace: f64,
    pub purity: f64,
    pub min_eigenvalue: f64,
    pub hermiticity_defect: f64,
}

impl StateDiagnostics {
    pub fn of(rho: &CMatrix) -> Self {
        Self {
            trace: rho.trace().re,
            purity: purity(rho),
            min_eigenvalue: hermitian_eigenvalues(rho).first().copied().unwrap_or(0.0),
            hermiticity_defect: hermiticity_defect(rho),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub diagnostics: Vec<StateDiagnostics>,
    pub stats: StepStats,
}

/// `α₀ e^{−(iω + γ/2) t}`: amplitude of a coherent state under damped free evolution.
pub fn coherent_decay_reference(alpha0: C64, omega: f64, gamma: f64, t: f64) -> C64 {
    alpha0 * (C64::new(-0.5 * gamma, -omega) * t).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decay_reference_examples() {
        let a = C64::new(0.3, -0.7);
        assert_eq!(coherent_decay_reference(a, 1.3, 0.2, 0.0), a);
        let z = coherent_decay_reference(real(1.0), 0.0, 0.2, 1.0);
        assert!((z.re - 0.904837418035960).abs() < 1e-14 && z.im == 0.0);
        let r = coherent_decay_reference(a, 2.0, 0.0, 5.0);
        assert!((r.norm() - a.norm()).abs() < 1e-15);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(CMatrix::identity(2, 2)).is_err());
        let mut m = CMatrix::identity(2, 2) * real(0.5);
        m[(0, 1)] = real(0.6);
        m[(1, 0)] = real(0.6);
        assert!(DensityMatrix::new(m).is_err());
        let ok = DensityMatrix::mixed(4);
        assert!((ok.purity() - 0.25).abs() < 1e-15);
        assert!(DensityMatrix::new(ok.entries.clone()).is_ok());
        let mut nh = CMatrix::identity(2, 2) * real(0.5);
        nh[(0, 1)] = C64::new(0.0, 0.1);
        nh[(1, 0)] = C64::new(0.0, 0.1);
        assert!(DensityMatrix::new(nh).is_err());
    }

    #[test]
    fn jump_helpers() {
        let atom = atom_decay_jumps(3, 0.4).unwrap();
        assert_eq!(atom.len(), 3);
        assert!((atom[1].operator()[(site_a(1), site_b(1))] - real(0.4f64.sqrt())).norm() < 1e-15);
        let sum = jump_sum(&atom, 6);
        for m in 0..3 {
            assert!((sum[(site_b(m), site_b(m))] - real(0.4)).norm() < 1e-15);
        }
        let pl = photon_loss_jump(4, 0.2).unwrap();
        let s = jump_sum(&[pl], 8);
        assert!((s[(site_a(3), site_a(3))] - real(0.6)).norm() < 1e-14);
        assert!(JumpOperator::new(atom[0].matrix.clone(), -1.0, JumpLabel::AtomDecay).is_err());
    }

    #[test]
    fn effective_hamiltonian_matches_builder() {
        use crate::hamiltonian::{build_driven_jc, build_heff, JcParams, LossChannel};
        let p = JcParams::new(1.0, 0.5, 6);
        let h = build_driven_jc(&p).unwrap();
        for (loss, jumps) in [
            (LossChannel::AtomDecay, atom_decay_jumps(7, 0.3).unwrap()),
            (LossChannel::PhotonLoss, vec![photon_loss_jump(7, 0.3).unwrap()]),
            (LossChannel::DeformedPhotonLoss, vec![deformed_photon_loss_jump(7, 0.3).unwrap()]),
        ] {
            let built = build_heff(&h, 0.3, loss).unwrap();
            let direct = effective_hamiltonian(h.entries(), &jumps);
            assert!((built.entries() - direct).camax() < 1e-15);
        }
    }
}
