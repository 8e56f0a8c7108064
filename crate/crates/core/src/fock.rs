//! Truncated Fock-space operators and reference states.
//!
//! Every state constructor reports the probability mass its untruncated
//! series places beyond the cutoff (`tail_error`) and then renormalizes the
//! kept amplitudes. Truncated commutators carry a corner defect at the last
//! basis index; that defect is left in place.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{CMatrix, Error, Result, StateVector, C64};

/// Default tolerance on the discarded tail mass of a reference state.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-12;

/// Photon-number basis `{|0⟩, …, |n_max⟩}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedFockSpace {
    n_max: usize,
}

impl TruncatedFockSpace {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidParameter(format!("n_max must be >= 1, got {n_max}")));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisTag {
    /// Single bosonic mode, index = photon number.
    Fock,
    /// Cell-major `{cell ⊗ sublattice}` ladder basis.
    Ladder,
}

/// Square complex matrix tagged with the basis it acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub entries: CMatrix,
    pub basis: BasisTag,
}

impl OperatorMatrix {
    pub fn new(entries: CMatrix, basis: BasisTag) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Dimension { expected: entries.nrows(), found: entries.ncols() });
        }
        if basis == BasisTag::Ladder && !entries.nrows().is_multiple_of(2) {
            return Err(Error::Dimension { expected: entries.nrows() + 1, found: entries.nrows() });
        }
        Ok(Self { entries, basis })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self { entries: self.entries.adjoint(), basis: self.basis }
    }

    /// Lift a single-mode operator to the ladder basis as `op ⊗ 1₂`.
    pub fn to_ladder(&self) -> Self {
        if self.basis == BasisTag::Ladder {
            return self.clone();
        }
        Self {
            entries: self.entries.kronecker(&CMatrix::identity(2, 2)),
            basis: BasisTag::Ladder,
        }
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        &self.entries * v
    }
}

/// `b = Σ √(n+1) |n⟩⟨n+1|`.
pub fn annihilation_matrix(space: TruncatedFockSpace) -> OperatorMatrix {
    let d = space.dim();
    let entries = DMatrix::from_fn(d, d, |r, c| {
        if c == r + 1 {
            C64::new((c as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    OperatorMatrix { entries, basis: BasisTag::Fock }
}

/// Susskind–Glogower phase operator `A|n⟩ = |n−1⟩`, `A|0⟩ = 0`.
///
/// This is `b f(n̂)` with `f(n) = 1/√n`.
pub fn deformed_annihilation_matrix(space: TruncatedFockSpace) -> OperatorMatrix {
    let d = space.dim();
    let entries = DMatrix::from_fn(d, d, |r, c| {
        if c == r + 1 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    OperatorMatrix { entries, basis: BasisTag::Fock }
}

/// `n̂ = b†b`, diagonal in the Fock basis.
pub fn number_operator(space: TruncatedFockSpace) -> OperatorMatrix {
    let d = space.dim();
    let diag = StateVector::from_fn(d, |n, _| C64::new(n as f64, 0.0));
    OperatorMatrix { entries: CMatrix::from_diagonal(&diag), basis: BasisTag::Fock }
}

/// Deformation function of the Susskind–Glogower oscillator; `f(0)` is
/// irrelevant because `b|0⟩ = 0`, and is returned as 0.
pub fn sg_deformation(n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        1.0 / (n as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateKind {
    Coherent { alpha: C64 },
    Geometric { ratio: C64 },
    Fock { n: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceState {
    pub amplitudes: StateVector,
    pub kind: StateKind,
    /// Squared-amplitude mass of the untruncated series beyond the cutoff.
    pub tail_error: f64,
}

impl ReferenceState {
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Embed on one sublattice of the ladder basis: `Σ c_m |S,m⟩`.
    pub fn on_sublattice(&self, sublattice_b: bool) -> StateVector {
        let mut out = StateVector::zeros(2 * self.dim());
        for (m, c) in self.amplitudes.iter().enumerate() {
            out[2 * m + usize::from(sublattice_b)] = *c;
        }
        out
    }

    /// `|self⟩ ⊗ (c_A, c_B)` in the cell-major ladder basis.
    pub fn tensor_sublattice(&self, c: [C64; 2]) -> StateVector {
        let mut out = StateVector::zeros(2 * self.dim());
        for (m, amp) in self.amplitudes.iter().enumerate() {
            out[2 * m] = amp * c[0];
            out[2 * m + 1] = amp * c[1];
        }
        out
    }
}

/// Probability mass `Σ_{n > n_max} e^{−x} xⁿ/n!` of a Poisson law with mean
/// `x = |α|²`, summed directly (no `1 − Σ` cancellation).
pub fn poisson_tail(mean: f64, n_max: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let ln_mean = mean.ln();
    let mut ln_fact = 0.0;
    for k in 1..=n_max + 1 {
        ln_fact += (k as f64).ln();
    }
    let mut n = n_max + 1;
    let mut ln_term = -mean + n as f64 * ln_mean - ln_fact;
    let mut sum = 0.0;
    loop {
        let term = ln_term.exp();
        sum += term;
        // terms decrease monotonically once n exceeds the mean
        if (n as f64) > mean && (term <= sum * 1e-18 || term < 1e-300) {
            break;
        }
        n += 1;
        ln_term += ln_mean - (n as f64).ln();
        if n > n_max + 100_000 {
            break;
        }
    }
    sum
}

/// Glauber coherent state truncated to `space`, with the default tail tolerance.
pub fn coherent_state(alpha: C64, space: TruncatedFockSpace) -> Result<ReferenceState> {
    coherent_state_with_tolerance(alpha, space, DEFAULT_TAIL_TOLERANCE)
}

/// `c_n = e^{−|α|²/2} αⁿ / √(n!)`, renormalized after truncation.
///
/// Factorials are accumulated as log-sums so large cutoffs do not overflow.
pub fn coherent_state_with_tolerance(
    alpha: C64,
    space: TruncatedFockSpace,
    tolerance: f64,
) -> Result<ReferenceState> {
    let mean = alpha.norm_sqr();
    let tail = poisson_tail(mean, space.n_max());
    if tail > tolerance {
        return Err(Error::Truncation { tail, tolerance });
    }
    let d = space.dim();
    let mut amps = StateVector::zeros(d);
    if mean == 0.0 {
        amps[0] = C64::new(1.0, 0.0);
    } else {
        let ln_abs = alpha.norm().ln();
        let phase = alpha.arg();
        let mut ln_half_fact = 0.0;
        for n in 0..d {
            if n > 0 {
                ln_half_fact += 0.5 * (n as f64).ln();
            }
            let ln_mag = -0.5 * mean + n as f64 * ln_abs - ln_half_fact;
            amps[n] = C64::from_polar(ln_mag.exp(), n as f64 * phase);
        }
        let norm = amps.norm();
        amps /= C64::new(norm, 0.0);
    }
    Ok(ReferenceState { amplitudes: amps, kind: StateKind::Coherent { alpha }, tail_error: tail })
}

/// Normalized geometric series `c₀ rᵐ`, `m = 0..length`, with `|c₀|² = 1 − |r|²`
/// before truncation. Only normalizable for `|r| < 1`.
pub fn geometric_state(ratio: C64, length: usize) -> Result<ReferenceState> {
    let r = ratio.norm();
    if r >= 1.0 || !r.is_finite() {
        return Err(Error::Divergence { ratio_abs: r });
    }
    if length == 0 {
        return Err(Error::InvalidParameter("geometric state needs length >= 1".into()));
    }
    let c0 = (1.0 - r * r).sqrt();
    let mut amps = StateVector::zeros(length);
    let mut p = C64::new(c0, 0.0);
    for m in 0..length {
        amps[m] = p;
        p *= ratio;
    }
    let tail = r.powi(2 * length as i32);
    let norm = amps.norm();
    amps /= C64::new(norm, 0.0);
    Ok(ReferenceState { amplitudes: amps, kind: StateKind::Geometric { ratio }, tail_error: tail })
}

pub fn fock_state(n: usize, space: TruncatedFockSpace) -> Result<ReferenceState> {
    if n > space.n_max() {
        return Err(Error::InvalidParameter(format!("|{n}⟩ outside cutoff {}", space.n_max())));
    }
    let mut amps = StateVector::zeros(space.dim());
    amps[n] = C64::new(1.0, 0.0);
    Ok(ReferenceState { amplitudes: amps, kind: StateKind::Fock { n }, tail_error: 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn space(n: usize) -> TruncatedFockSpace {
        TruncatedFockSpace::new(n).unwrap()
    }

    #[test]
    fn space_rejects_zero_cutoff() {
        assert!(TruncatedFockSpace::new(0).is_err());
        assert_eq!(space(4).dim(), 5);
    }

    #[test]
    fn annihilation_small() {
        let b = annihilation_matrix(space(2)).entries;
        let s2 = 2f64.sqrt();
        let expected = [[0.0, 1.0, 0.0], [0.0, 0.0, s2], [0.0, 0.0, 0.0]];
        for r in 0..3 {
            for col in 0..3 {
                assert_eq!(b[(r, col)], c(expected[r][col]));
            }
        }
    }

    #[test]
    fn annihilation_kills_vacuum() {
        let sp = space(5);
        let vac = fock_state(0, sp).unwrap().amplitudes;
        assert_eq!(annihilation_matrix(sp).apply(&vac).norm(), 0.0);
    }

    #[test]
    fn commutator_corner_defect() {
        let sp = space(6);
        let b = annihilation_matrix(sp).entries;
        let comm = &b * b.adjoint() - b.adjoint() * &b;
        // oracle: 1 − (n_max+1)|n_max⟩⟨n_max|
        for r in 0..7 {
            for col in 0..7 {
                let expected = if r != col {
                    0.0
                } else if r < 6 {
                    1.0
                } else {
                    -6.0
                };
                assert_abs_diff_eq!(comm[(r, col)].re, expected, epsilon = 1e-13);
                assert_abs_diff_eq!(comm[(r, col)].im, 0.0);
            }
        }
    }

    #[test]
    fn deformed_small_and_vacuum() {
        let sp = space(2);
        let a = deformed_annihilation_matrix(sp).entries;
        let expected = [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]];
        for r in 0..3 {
            for col in 0..3 {
                assert_eq!(a[(r, col)], c(expected[r][col]));
            }
        }
        let vac = fock_state(0, sp).unwrap().amplitudes;
        assert_eq!((&a * vac).norm(), 0.0);
    }

    #[test]
    fn deformed_raises_by_one() {
        let sp = space(4);
        let ad = deformed_annihilation_matrix(sp).adjoint();
        for n in 0..4 {
            let out = ad.apply(&fock_state(n, sp).unwrap().amplitudes);
            assert_eq!(out, fock_state(n + 1, sp).unwrap().amplitudes);
        }
    }

    #[test]
    fn deformed_aad_identity_off_corner() {
        let a = deformed_annihilation_matrix(space(5)).entries;
        let prod = &a * a.adjoint();
        for n in 0..5 {
            assert_eq!(prod[(n, n)], c(1.0));
        }
        assert_eq!(prod[(5, 5)], c(0.0));
    }

    #[test]
    fn deformed_is_b_times_sg_function() {
        for n_max in [1, 3, 17] {
            let sp = space(n_max);
            let b = annihilation_matrix(sp).entries;
            let f = CMatrix::from_diagonal(&StateVector::from_fn(sp.dim(), |n, _| c(sg_deformation(n))));
            let a = deformed_annihilation_matrix(sp).entries;
            assert!((b * f - a).camax() < 1e-15);
        }
    }

    #[test]
    fn coherent_vacuum() {
        let s = coherent_state(C64::new(0.0, 0.0), space(8)).unwrap();
        assert_eq!(s.amplitudes, fock_state(0, space(8)).unwrap().amplitudes);
        assert_eq!(s.tail_error, 0.0);
    }

    #[test]
    fn coherent_expectation_of_b() {
        let sp = space(30);
        let s = coherent_state(c(-0.5), sp).unwrap();
        let b = annihilation_matrix(sp);
        let exp = s.amplitudes.dotc(&b.apply(&s.amplitudes));
        assert!((exp - c(-0.5)).norm() < 1e-10);
    }

    #[test]
    fn coherent_successive_ratios() {
        let s = coherent_state(c(-0.5), space(30)).unwrap();
        let a = &s.amplitudes;
        assert!((a[1] / a[0] - c(-0.5)).norm() < 1e-14);
        assert!((a[2] / a[1] - c(-0.5 / 2f64.sqrt())).norm() < 1e-14);
    }

    #[test]
    fn coherent_truncation_error() {
        match coherent_state(c(3.0), space(20)) {
            Err(Error::Truncation { tail, .. }) => assert!(tail > 1e-6),
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn coherent_large_cutoff_no_overflow() {
        let s = coherent_state(C64::new(12.0, 5.0), space(2000)).unwrap();
        assert!((s.amplitudes.norm() - 1.0).abs() < 1e-12);
        assert!(s.amplitudes.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
    }

    #[test]
    fn poisson_tail_matches_direct_sum() {
        // oracle: 1 - partial sum in extended form, fine for moderate values
        let mean: f64 = 2.25;
        let n_max = 6;
        let mut partial = 0.0;
        let mut term = (-mean).exp();
        for n in 0..=n_max {
            if n > 0 {
                term *= mean / n as f64;
            }
            partial += term;
        }
        assert!((poisson_tail(mean, n_max) - (1.0 - partial)).abs() < 1e-14);
    }

    #[test]
    fn geometric_examples() {
        let s = geometric_state(C64::new(0.0, 0.0), 5).unwrap();
        assert_eq!(s.amplitudes[0], c(1.0));
        assert_eq!(s.amplitudes.iter().skip(1).map(|z| z.norm()).sum::<f64>(), 0.0);

        let s = geometric_state(c(-0.5), 40).unwrap();
        assert!((s.amplitudes[0].norm_sqr() - 0.75).abs() < 1e-15);

        assert!(matches!(geometric_state(c(1.0), 10), Err(Error::Divergence { .. })));
        assert!(matches!(geometric_state(C64::new(0.0, -1.2), 10), Err(Error::Divergence { .. })));
    }

    #[test]
    fn lift_to_ladder_is_kron_identity() {
        let b = annihilation_matrix(space(3)).to_ladder();
        assert_eq!(b.dim(), 8);
        // ⟨A,0| b |A,1⟩ = 1, ⟨B,1| b |B,2⟩ = √2
        assert_eq!(b.entries[(0, 2)], c(1.0));
        assert_eq!(b.entries[(3, 5)], c(2f64.sqrt()));
        assert_eq!(b.entries[(0, 3)], c(0.0));
    }

    proptest! {
        #[test]
        fn annihilation_strictly_superdiagonal(n_max in 1usize..40) {
            let b = annihilation_matrix(space(n_max)).entries;
            for r in 0..=n_max {
                for col in 0..=n_max {
                    let z = b[(r, col)];
                    prop_assert_eq!(z.im, 0.0);
                    if col == r + 1 {
                        prop_assert!(z.re > 0.0);
                    } else {
                        prop_assert_eq!(z.re, 0.0);
                    }
                }
            }
        }

        #[test]
        fn deformed_is_unit_pattern_of_b(n_max in 1usize..40) {
            let b = annihilation_matrix(space(n_max)).entries;
            let a = deformed_annihilation_matrix(space(n_max)).entries;
            let pattern = b.map(|z| if z.norm() > 0.0 { c(1.0) } else { c(0.0) });
            prop_assert_eq!(pattern, a);
        }

        // b|α⟩ − α|α⟩ only has the cut-off component α c_{n_max}, whose square
        // is bounded by (n_max+1)·tail because tail ≥ p_{n_max+1}.
        #[test]
        fn coherent_eigen_relation(re in -2.5f64..2.5, im in -2.5f64..2.5, n_max in 25usize..60) {
            let alpha = C64::new(re, im);
            let sp = space(n_max);
            let s = coherent_state_with_tolerance(alpha, sp, 1e-3).unwrap();
            prop_assert!((s.amplitudes.norm() - 1.0).abs() < 1e-12);
            let b = annihilation_matrix(sp);
            let resid = (b.apply(&s.amplitudes) - &s.amplitudes * alpha).norm();
            let bound = ((n_max as f64 + 1.0) * s.tail_error / (1.0 - s.tail_error)).sqrt();
            prop_assert!(resid <= bound * (1.0 + 1e-9) + 1e-14, "resid {resid} bound {bound}");
        }

        #[test]
        fn geometric_deformed_eigen_relation(re in -0.95f64..0.95, im in -0.3f64..0.3, len in 2usize..80) {
            let r = C64::new(re, im);
            prop_assume!(r.norm() < 0.99);
            let s = geometric_state(r, len).unwrap();
            prop_assert!((s.amplitudes.norm() - 1.0).abs() < 1e-12);
            let a = deformed_annihilation_matrix(space(len - 1));
            let resid = (a.apply(&s.amplitudes) - &s.amplitudes * r).norm_squared();
            prop_assert!(resid <= s.tail_error * (1.0 + 1e-9) + 1e-28);
        }
    }
}
