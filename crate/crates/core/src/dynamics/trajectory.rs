//! Quantum-jump unraveling of the master equation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::integrator::{check_grid, dp_step, IntegratorOptions, Integrator};
use super::{check_jump_dims, jump_sum, JumpOperator};
use crate::linalg::{projector, SparseMatrix};
use crate::par::{self, Exec};
use crate::{CMatrix, Error, Result, StateVector, C64};

/// Relative accuracy of the norm at a located jump time.
pub const JUMP_TIME_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryResult {
    pub times: Vec<f64>,
    /// Normalized state at every grid time.
    pub states: Vec<StateVector>,
    /// `(time, jump index)` for every jump, in order.
    pub jumps: Vec<(f64, usize)>,
}

fn check_heff(heff: &CMatrix, jumps: &[JumpOperator]) -> Result<()> {
    let d = heff.nrows();
    if heff.ncols() != d {
        return Err(Error::Dimension { expected: d, found: heff.ncols() });
    }
    check_jump_dims(d, jumps)?;
    // anti-Hermitian part must be −(i/2) Σ L†L
    let anti = (heff - heff.adjoint()) * C64::new(0.5, 0.0);
    let expected = jump_sum(jumps, d) * C64::new(0.0, -0.5);
    let defect = (anti - expected).camax();
    if defect > 1e-12 * heff.camax().max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "H_eff does not match the jump operators (defect {defect:.3e})"
        )));
    }
    Ok(())
}

/// One trajectory: integrate `dψ/dt = −i H_eff ψ` until `‖ψ‖²` drops to a
/// uniform random threshold, locate that time by bisection, then apply a jump
/// chosen with weights `‖L_k ψ‖²`.
pub fn trajectory_evolve(
    heff: &CMatrix,
    jumps: &[JumpOperator],
    psi0: &StateVector,
    t_grid: &[f64],
    seed: u64,
    opts: IntegratorOptions,
) -> Result<TrajectoryResult> {
    check_heff(heff, jumps)?;
    check_grid(t_grid)?;
    if psi0.len() != heff.nrows() {
        return Err(Error::Dimension { expected: heff.nrows(), found: psi0.len() });
    }
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter("initial state must be normalized".into()));
    }
    let h = SparseMatrix::from_dense(heff);
    let ls: Vec<SparseMatrix> =
        jumps.iter().filter(|j| j.rate > 0.0).map(|j| SparseMatrix::from_dense(&j.operator())).collect();
    let f = |_t: f64, y: &StateVector| h.mul_vec(y) * C64::new(0.0, -1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut threshold: f64 = rng.random();

    let first = if t_grid.len() > 1 { t_grid[1] - t_grid[0] } else { 1.0 };
    let mut integ = Integrator::new(&f, t_grid[0], psi0.clone(), opts, first)?;
    let mut states = vec![psi0.clone()];
    let mut jump_log = Vec::new();

    for &target in &t_grid[1..] {
        while integ.t < target {
            let remaining = target - integ.t;
            if remaining <= 1e-13 * target.abs().max(1.0) {
                integ.t = target;
                break;
            }
            let t_start = integ.t;
            let (start, step) = integ.step(remaining)?;
            if step >= remaining {
                integ.t = target;
            }
            if integ.y.norm_squared() >= threshold {
                continue;
            }
            let (tau, psi_jump) = locate_jump(&f, t_start, &start, step, threshold);
            let weights: Vec<f64> = ls.iter().map(|l| l.mul_vec(&psi_jump).norm_squared()).collect();
            let total: f64 = weights.iter().sum();
            let next = if total > 0.0 {
                let mut u = rng.random::<f64>() * total;
                let mut k = weights.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    if u < *w {
                        k = i;
                        break;
                    }
                    u -= w;
                }
                jump_log.push((t_start + tau, k));
                ls[k].mul_vec(&psi_jump)
            } else {
                psi_jump
            };
            let n = next.norm();
            integ.y = next / C64::new(n, 0.0);
            integ.t = t_start + tau;
            threshold = rng.random();
        }
        let n = integ.y.norm();
        states.push(&integ.y / C64::new(n, 0.0));
    }
    Ok(TrajectoryResult { times: t_grid.to_vec(), states, jumps: jump_log })
}

/// Bisection for `τ ∈ (0, h]` with `‖ψ(t+τ)‖² = threshold`, using single steps
/// from the step start.
fn locate_jump<F>(f: &F, t: f64, start: &StateVector, h: f64, threshold: f64) -> (f64, StateVector)
where
    F: Fn(f64, &StateVector) -> StateVector,
{
    let (mut lo, mut hi) = (0.0, h);
    let mut best = dp_step(f, t, start, h).0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (y, _) = dp_step(f, t, start, mid);
        let n = y.norm_squared();
        if (n - threshold).abs() <= JUMP_TIME_TOLERANCE * threshold {
            return (mid, y);
        }
        if n < threshold {
            hi = mid;
            best = y;
        } else {
            lo = mid;
        }
        if hi - lo <= f64::EPSILON * h {
            break;
        }
    }
    (hi, best)
}

/// Average `|ψ⟩⟨ψ|` over `n_traj` trajectories; trajectory `i` uses seed `seed ⊕ i`.
#[allow(clippy::too_many_arguments)]
pub fn average_trajectories(
    heff: &CMatrix,
    jumps: &[JumpOperator],
    psi0: &StateVector,
    t_grid: &[f64],
    seed: u64,
    n_traj: usize,
    exec: Exec,
    opts: IntegratorOptions,
) -> Result<Vec<CMatrix>> {
    if n_traj == 0 {
        return Err(Error::InvalidParameter("n_traj must be >= 1".into()));
    }
    let runs = par::map_range(exec, n_traj, |i| {
        trajectory_evolve(heff, jumps, psi0, t_grid, seed ^ i as u64, opts)
    });
    let d = heff.nrows();
    let mut acc = vec![CMatrix::zeros(d, d); t_grid.len()];
    for run in runs {
        let run = run?;
        for (a, s) in acc.iter_mut().zip(&run.states) {
            *a += projector(s);
        }
    }
    let w = C64::new(1.0 / n_traj as f64, 0.0);
    Ok(acc.into_iter().map(|a| a * w).collect())
}
