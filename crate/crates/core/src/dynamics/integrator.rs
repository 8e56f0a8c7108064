//! Dormand–Prince 5(4) embedded Runge–Kutta with adaptive step control.

use crate::{CMatrix, Error, Result, StateVector, C64};

/// Vector-space operations needed by the stepper.
pub trait OdeState: Clone {
    /// `self += a · x`
    fn axpy(&mut self, a: f64, x: &Self);
    /// Scaled max-norm of `err` against the magnitudes of `y0` and `y1`.
    fn error_norm(err: &Self, y0: &Self, y1: &Self, rtol: f64, atol: f64) -> f64;
    fn is_finite(&self) -> bool;
}

macro_rules! impl_ode_state {
    ($t:ty) => {
        impl OdeState for $t {
            fn axpy(&mut self, a: f64, x: &Self) {
                self.zip_apply(x, |s, xi| *s += xi * a);
            }

            fn error_norm(err: &Self, y0: &Self, y1: &Self, rtol: f64, atol: f64) -> f64 {
                let mut worst: f64 = 0.0;
                for ((e, a), b) in err.iter().zip(y0.iter()).zip(y1.iter()) {
                    let scale = atol + rtol * a.norm().max(b.norm());
                    worst = worst.max(e.norm() / scale);
                }
                worst
            }

            fn is_finite(&self) -> bool {
                self.iter().all(|z: &C64| z.re.is_finite() && z.im.is_finite())
            }
        }
    };
}

impl_ode_state!(CMatrix);
impl_ode_state!(StateVector);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen from the first grid interval when `None`.
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, initial_step: None, max_steps: 5_000_000 }
    }
}

impl IntegratorOptions {
    pub fn with_rtol(rtol: f64) -> Self {
        Self { rtol, atol: (rtol * 1e-2).max(1e-15), ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0) || !(self.atol > 0.0) {
            return Err(Error::InvalidParameter("integrator tolerances must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order minus fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One Dormand–Prince step: fifth-order solution and embedded error vector.
pub fn dp_step<S, F>(f: &F, t: f64, y: &S, h: f64) -> (S, S)
where
    S: OdeState,
    F: Fn(f64, &S) -> S,
{
    let mut k: Vec<S> = Vec::with_capacity(7);
    k.push(f(t, y));
    for s in 1..7 {
        let mut ys = y.clone();
        for (j, kj) in k.iter().enumerate() {
            if A[s][j] != 0.0 {
                ys.axpy(h * A[s][j], kj);
            }
        }
        k.push(f(t + C[s] * h, &ys));
    }
    // stage 7 is evaluated at the fifth-order solution itself
    let mut y_new = y.clone();
    for (j, kj) in k.iter().take(6).enumerate() {
        if A[6][j] != 0.0 {
            y_new.axpy(h * A[6][j], kj);
        }
    }
    let mut err = k[0].clone();
    err.axpy(h * E[0] - 1.0, &k[0]);
    for (j, kj) in k.iter().enumerate().skip(1) {
        if E[j] != 0.0 {
            err.axpy(h * E[j], kj);
        }
    }
    (y_new, err)
}

fn next_step(h: f64, err: f64) -> f64 {
    let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
    h * factor
}

/// Adaptive integrator for `dy/dt = f(t, y)`.
pub struct Integrator<'a, S, F> {
    f: &'a F,
    opts: IntegratorOptions,
    pub t: f64,
    pub y: S,
    h: f64,
    pub stats: StepStats,
}

impl<'a, S, F> Integrator<'a, S, F>
where
    S: OdeState,
    F: Fn(f64, &S) -> S,
{
    pub fn new(f: &'a F, t0: f64, y0: S, opts: IntegratorOptions, first_interval: f64) -> Result<Self> {
        opts.validate()?;
        let h = opts.initial_step.unwrap_or((first_interval * 1e-2).max(1e-8));
        Ok(Self { f, opts, t: t0, y: y0, h, stats: StepStats::default() })
    }

    /// Take one accepted step of at most `max_h`, returning the step start
    /// state and the step size used.
    pub fn step(&mut self, max_h: f64) -> Result<(S, f64)> {
        let mut h = self.h.min(max_h);
        loop {
            if self.stats.accepted + self.stats.rejected >= self.opts.max_steps {
                return Err(Error::StepFailure { t: self.t, reason: "step budget exhausted".into() });
            }
            if h <= 1e-14 * self.t.abs().max(1.0) {
                return Err(Error::StepFailure { t: self.t, reason: format!("step size underflow ({h:.3e})") });
            }
            let (y_new, e) = dp_step(self.f, self.t, &self.y, h);
            if !y_new.is_finite() {
                self.stats.rejected += 1;
                h *= 0.2;
                continue;
            }
            let err = S::error_norm(&e, &self.y, &y_new, self.opts.rtol, self.opts.atol);
            if err <= 1.0 {
                self.stats.accepted += 1;
                let start = std::mem::replace(&mut self.y, y_new);
                self.t += h;
                // a step clipped to a grid point should not shrink the next one
                let proposal = next_step(h, err);
                self.h = if h < self.h { self.h.max(proposal) } else { proposal };
                return Ok((start, h));
            }
            self.stats.rejected += 1;
            h = next_step(h, err).min(h * 0.9);
        }
    }

    /// Advance exactly to `t_end`.
    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        while self.t < t_end {
            let remaining = t_end - self.t;
            if remaining <= 1e-13 * t_end.abs().max(1.0) {
                self.t = t_end;
                break;
            }
            let (_, h) = self.step(remaining)?;
            if h >= remaining {
                self.t = t_end;
            }
        }
        Ok(())
    }
}

/// Integrate over `t_grid`, calling `observe(index, t, y)` at every grid time
/// (including the first).
pub fn integrate<S, F, O>(f: &F, y0: S, t_grid: &[f64], opts: IntegratorOptions, mut observe: O) -> Result<StepStats>
where
    S: OdeState,
    F: Fn(f64, &S) -> S,
    O: FnMut(usize, f64, &S) -> Result<()>,
{
    check_grid(t_grid)?;
    let first = if t_grid.len() > 1 { t_grid[1] - t_grid[0] } else { 1.0 };
    let mut integ = Integrator::new(f, t_grid[0], y0, opts, first)?;
    observe(0, t_grid[0], &integ.y)?;
    for (i, &t) in t_grid.iter().enumerate().skip(1) {
        integ.advance_to(t)?;
        observe(i, t, &integ.y)?;
    }
    Ok(integ.stats)
}

pub fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidParameter("time grid is empty".into()));
    }
    if t_grid.iter().any(|t| !t.is_finite()) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("time grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(z: C64) -> StateVector {
        StateVector::from_element(1, z)
    }

    #[test]
    fn exponential_decay() {
        let f = |_t: f64, y: &StateVector| y * C64::new(-1.0, 2.0);
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 * 0.5).collect();
        let mut out = Vec::new();
        integrate(&f, scalar(C64::new(1.0, 0.0)), &grid, IntegratorOptions::default(), |_, t, y| {
            out.push((t, y[0]));
            Ok(())
        })
        .unwrap();
        for (t, y) in out {
            let exact = (C64::new(-1.0, 2.0) * t).exp();
            assert!((y - exact).norm() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn time_dependent_rhs() {
        // y' = cos t, y(0) = 0 → sin t
        let f = |t: f64, _y: &StateVector| scalar(C64::new(t.cos(), 0.0));
        let grid = [0.0, 1.0, 3.0];
        let mut last = C64::new(0.0, 0.0);
        integrate(&f, scalar(C64::new(0.0, 0.0)), &grid, IntegratorOptions::default(), |_, _, y| {
            last = y[0];
            Ok(())
        })
        .unwrap();
        assert!((last.re - 3f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn fifth_order_convergence() {
        let f = |_t: f64, y: &StateVector| y * C64::new(0.0, -1.0);
        let err = |h: f64| {
            let (y, _) = dp_step(&f, 0.0, &scalar(C64::new(1.0, 0.0)), h);
            (y[0] - C64::new(0.0, -h).exp()).norm()
        };
        // local error is O(h⁶)
        let ratio = err(0.2) / err(0.1);
        assert!(ratio > 40.0 && ratio < 90.0, "ratio {ratio}");
    }

    #[test]
    fn rejects_bad_grid_and_tolerance() {
        let f = |_t: f64, y: &StateVector| y.clone();
        let ok = |_: usize, _: f64, _: &StateVector| Ok(());
        assert!(integrate(&f, scalar(C64::new(1.0, 0.0)), &[0.0, 0.0], IntegratorOptions::default(), ok).is_err());
        let bad = IntegratorOptions { rtol: 0.0, ..Default::default() };
        assert!(integrate(&f, scalar(C64::new(1.0, 0.0)), &[0.0, 1.0], bad, ok).is_err());
    }

    #[test]
    fn step_budget_reports_failure() {
        let f = |_t: f64, y: &StateVector| y * C64::new(-1.0, 0.0);
        let opts = IntegratorOptions { max_steps: 3, ..Default::default() };
        let r = integrate(&f, scalar(C64::new(1.0, 0.0)), &[0.0, 100.0], opts, |_, _, _| Ok(()));
        assert!(matches!(r, Err(Error::StepFailure { .. })));
    }
}
