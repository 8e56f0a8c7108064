//! Explicit matrix builders for the two-band ladder lattice and the models
//! that map onto it.
//!
//! All ladder matrices use the cell-major basis `(A,0),(B,0),(A,1),…`.
//! Intracell couplings `v_intra[m]` join `(A,m)–(B,m)`; intercell couplings
//! `v_inter[m]` join `(A,m)–(B,m−1)`, so `v_inter[0]` only matters for
//! periodic chains. Same-sublattice hoppings `J₁`, `J₂` join `(S,m)–(S,m+1)`
//! and `(S,m)–(S,m+2)` on both sublattices, with coefficient `J` on
//! `|S,m+j⟩⟨S,m|` and its conjugate on the reverse bond.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::fock::{
    annihilation_matrix, deformed_annihilation_matrix, number_operator, BasisTag, OperatorMatrix,
    TruncatedFockSpace,
};
use crate::linalg::{hermiticity_defect, real};
use crate::{site_a, site_b, CMatrix, Error, Result, C64};

/// Relative Hermiticity tolerance asserted on every Hermitian build.
pub const HERMITIAN_TOLERANCE: f64 = 1e-14;

/// A coupling that is either site-independent or given per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coupling {
    Uniform(f64),
    PerCell(Vec<f64>),
}

impl Coupling {
    pub fn at(&self, m: usize) -> f64 {
        match self {
            Coupling::Uniform(v) => *v,
            Coupling::PerCell(vs) => vs[m],
        }
    }

    pub fn uniform_value(&self) -> Option<f64> {
        match self {
            Coupling::Uniform(v) => Some(*v),
            Coupling::PerCell(_) => None,
        }
    }

    fn check_len(&self, n_cells: usize) -> Result<()> {
        match self {
            Coupling::PerCell(vs) if vs.len() != n_cells => {
                Err(Error::Dimension { expected: n_cells, found: vs.len() })
            }
            _ => Ok(()),
        }
    }
}

impl From<f64> for Coupling {
    fn from(v: f64) -> Self {
        Coupling::Uniform(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Open,
    Periodic,
}

/// Parameters of the general two-band ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderSpec {
    pub n_cells: usize,
    /// On-site energy of every B site.
    pub delta: f64,
    pub v_intra: Coupling,
    pub v_inter: Coupling,
    pub j1: C64,
    pub j2: C64,
    pub boundary: Boundary,
}

impl LadderSpec {
    /// Site-independent SSH chain with intracell `v` and intercell `w`.
    pub fn ssh(v: f64, w: f64, n_cells: usize) -> Self {
        Self {
            n_cells,
            delta: 0.0,
            v_intra: Coupling::Uniform(v),
            v_inter: Coupling::Uniform(w),
            j1: C64::new(0.0, 0.0),
            j2: C64::new(0.0, 0.0),
            boundary: Boundary::Open,
        }
    }

    pub fn with_hoppings(mut self, j1: C64, j2: C64) -> Self {
        self.j1 = j1;
        self.j2 = j2;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn is_translation_invariant(&self) -> bool {
        self.v_intra.uniform_value().is_some() && self.v_inter.uniform_value().is_some()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cells < 2 {
            return Err(Error::InvalidParameter(format!(
                "n_cells must be >= 2, got {}",
                self.n_cells
            )));
        }
        self.v_intra.check_len(self.n_cells)?;
        self.v_inter.check_len(self.n_cells)?;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        2 * self.n_cells
    }
}

/// Driven Jaynes–Cummings parameters (resonant, rotating frame).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JcParams {
    pub lambda: f64,
    pub mu: f64,
    pub gamma: f64,
    pub n_max: usize,
    #[serde(default)]
    pub f_drive: C64,
    #[serde(default)]
    pub g_drive: C64,
}

impl JcParams {
    pub fn new(lambda: f64, mu: f64, n_max: usize) -> Self {
        Self {
            lambda,
            mu,
            gamma: 0.0,
            n_max,
            f_drive: C64::new(0.0, 0.0),
            g_drive: C64::new(0.0, 0.0),
        }
    }

    /// Amplitude `−μ/λ` of the coherent dark state.
    pub fn dark_alpha(&self) -> Result<C64> {
        if self.lambda == 0.0 {
            return Err(Error::InvalidParameter("lambda must be nonzero for a dark state".into()));
        }
        Ok(C64::new(-self.mu / self.lambda, 0.0))
    }

    fn validate(&self) -> Result<()> {
        if self.n_max < 2 {
            return Err(Error::InvalidParameter(format!("n_max must be >= 2, got {}", self.n_max)));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidParameter("gamma must be >= 0".into()));
        }
        Ok(())
    }
}

/// How drive amplitudes become same-sublattice hoppings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveConvention {
    /// `J₁ = F`, `J₂ = G` (real drives give real hoppings).
    #[default]
    Hopping,
    /// Literal operator map of `i(F b† − F* b)` and `i(G b² − G* b†²)`:
    /// `J₁ = iF`, `J₂ = −iG*`.
    LiteralPhase,
}

impl DriveConvention {
    pub fn hoppings(self, f: C64, g: C64) -> (C64, C64) {
        match self {
            DriveConvention::Hopping => (f, g),
            DriveConvention::LiteralPhase => (C64::i() * f, -C64::i() * g.conj()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveMetadata {
    pub f: C64,
    pub g: C64,
    pub convention: DriveConvention,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossChannel {
    /// `−i(γ/2) n̂` on the cell index.
    PhotonLoss,
    /// `−i(γ/2) A†A = −i(γ/2)(1 − |0⟩⟨0|)` on the cell index.
    DeformedPhotonLoss,
    /// `−i(γ/2)` on every B site, from `L_m = √γ |A,m⟩⟨B,m|`.
    AtomDecay,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Ladder,
    Ssh,
    DrivenJc(JcParams),
    DrivenJcTensor(JcParams),
    Nljc(JcParams),
}

/// Matrix of a ladder-basis Hamiltonian with its generating parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeHamiltonian {
    pub matrix: OperatorMatrix,
    pub spec: LadderSpec,
    pub origin: Origin,
    pub hermitian: bool,
    pub drives: Option<DriveMetadata>,
    pub losses: Vec<(LossChannel, f64)>,
}

impl LatticeHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn n_cells(&self) -> usize {
        self.spec.n_cells
    }

    pub fn entries(&self) -> &CMatrix {
        &self.matrix.entries
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.entries.norm()
    }

    /// `‖H − H†‖_max ≤ 1e−14·‖H‖_F`.
    pub fn check_hermitian(&self) -> bool {
        hermiticity_defect(&self.matrix.entries) <= HERMITIAN_TOLERANCE * self.frobenius_norm()
    }

    /// JSON record: dimension, basis ordering tag and entries as `[re, im]`.
    pub fn to_json(&self) -> serde_json::Value {
        matrix_to_json(&self.matrix.entries, self.hermitian)
    }
}

pub const BASIS_ORDERING_TAG: &str = "cell_major_ab";

pub fn matrix_to_json(m: &CMatrix, hermitian: bool) -> serde_json::Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    json!({
        "schema": "fockedge.matrix/v1",
        "dimension": m.nrows(),
        "basis_ordering": BASIS_ORDERING_TAG,
        "hermitian": hermitian,
        "entries": rows,
    })
}

pub fn matrix_from_json(value: &serde_json::Value) -> Result<CMatrix> {
    let bad = |what: &str| Error::InvalidParameter(format!("matrix json: {what}"));
    let dim = value["dimension"].as_u64().ok_or_else(|| bad("missing dimension"))? as usize;
    let rows: Vec<Vec<[f64; 2]>> = serde_json::from_value(value["entries"].clone())?;
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(bad("entries shape does not match dimension"));
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

fn add_hermitian_pair(h: &mut CMatrix, to: usize, from: usize, coeff: C64) {
    // coeff · |to⟩⟨from| + h.c.
    h[(to, from)] += coeff;
    h[(from, to)] += coeff.conj();
}

fn ladder_matrix(spec: &LadderSpec) -> CMatrix {
    let n = spec.n_cells;
    let mut h = CMatrix::zeros(2 * n, 2 * n);
    let periodic = spec.boundary == Boundary::Periodic;
    for m in 0..n {
        h[(site_b(m), site_b(m))] += real(spec.delta);
        add_hermitian_pair(&mut h, site_b(m), site_a(m), real(spec.v_intra.at(m)));
        if m > 0 {
            add_hermitian_pair(&mut h, site_b(m - 1), site_a(m), real(spec.v_inter.at(m)));
        } else if periodic {
            add_hermitian_pair(&mut h, site_b(n - 1), site_a(0), real(spec.v_inter.at(0)));
        }
        for (j, amp) in [(1usize, spec.j1), (2usize, spec.j2)] {
            if amp == C64::new(0.0, 0.0) {
                continue;
            }
            let target = if m + j < n {
                Some(m + j)
            } else if periodic {
                Some((m + j) % n)
            } else {
                None
            };
            if let Some(t) = target {
                add_hermitian_pair(&mut h, site_a(t), site_a(m), amp);
                add_hermitian_pair(&mut h, site_b(t), site_b(m), amp);
            }
        }
    }
    h
}

/// General ladder Hamiltonian with optional same-sublattice hoppings.
pub fn build_ladder(spec: &LadderSpec) -> Result<LatticeHamiltonian> {
    spec.validate()?;
    Ok(LatticeHamiltonian {
        matrix: OperatorMatrix { entries: ladder_matrix(spec), basis: BasisTag::Ladder },
        spec: spec.clone(),
        origin: Origin::Ladder,
        hermitian: true,
        drives: None,
        losses: Vec::new(),
    })
}

/// SSH chain: intracell `v` (`t_intra`), intercell `w` (`t_inter`), plus `J₁`, `J₂`.
pub fn build_ssh(
    v: f64,
    w: f64,
    n_cells: usize,
    j1: C64,
    j2: C64,
    boundary: Boundary,
) -> Result<LatticeHamiltonian> {
    let spec = LadderSpec::ssh(v, w, n_cells).with_hoppings(j1, j2).with_boundary(boundary);
    let mut h = build_ladder(&spec)?;
    h.origin = Origin::Ssh;
    Ok(h)
}

/// Ladder couplings of the driven JC model: `v_{m,0} = μ`, `v_{m,−1} = λ√m`.
pub fn driven_jc_spec(params: &JcParams) -> LadderSpec {
    let n_cells = params.n_max + 1;
    LadderSpec {
        n_cells,
        delta: 0.0,
        v_intra: Coupling::Uniform(params.mu),
        v_inter: Coupling::PerCell((0..n_cells).map(|m| params.lambda * (m as f64).sqrt()).collect()),
        j1: C64::new(0.0, 0.0),
        j2: C64::new(0.0, 0.0),
        boundary: Boundary::Open,
    }
}

/// Driven JC Hamiltonian transcribed directly onto the ladder.
pub fn build_driven_jc(params: &JcParams) -> Result<LatticeHamiltonian> {
    params.validate()?;
    let spec = driven_jc_spec(params);
    let mut h = build_ladder(&spec)?;
    h.origin = Origin::DrivenJc(*params);
    Ok(h)
}

fn sigma_plus() -> CMatrix {
    // |B⟩⟨A| in the (A, B) = (ground, excited) basis
    CMatrix::from_row_slice(2, 2, &[real(0.0), real(0.0), real(1.0), real(0.0)])
}

/// `λσ⁺X + λσ⁻X† + μ(σ⁺ + σ⁻)` assembled as Kronecker products `Fock ⊗ atom`.
fn jc_from_operator(lowering: &CMatrix, lambda: f64, mu: f64) -> CMatrix {
    let sp = sigma_plus();
    let sm = sp.adjoint();
    let id = CMatrix::identity(lowering.nrows(), lowering.nrows());
    lowering.kronecker(&sp) * real(lambda)
        + lowering.adjoint().kronecker(&sm) * real(lambda)
        + id.kronecker(&(&sp + &sm)) * real(mu)
}

/// Driven JC Hamiltonian assembled from Fock-space operator products; must
/// agree entrywise with [`build_driven_jc`].
pub fn build_driven_jc_tensor(params: &JcParams) -> Result<LatticeHamiltonian> {
    params.validate()?;
    let space = TruncatedFockSpace::new(params.n_max)?;
    let b = annihilation_matrix(space).entries;
    Ok(LatticeHamiltonian {
        matrix: OperatorMatrix {
            entries: jc_from_operator(&b, params.lambda, params.mu),
            basis: BasisTag::Ladder,
        },
        spec: driven_jc_spec(params),
        origin: Origin::DrivenJcTensor(*params),
        hermitian: true,
        drives: None,
        losses: Vec::new(),
    })
}

/// Nonlinear JC model with the Susskind–Glogower operator in place of `b`.
///
/// Its matrix coincides with `build_ssh(μ, λ, n_max + 1)`.
pub fn build_nljc(params: &JcParams) -> Result<LatticeHamiltonian> {
    params.validate()?;
    let space = TruncatedFockSpace::new(params.n_max)?;
    let a = deformed_annihilation_matrix(space).entries;
    Ok(LatticeHamiltonian {
        matrix: OperatorMatrix {
            entries: jc_from_operator(&a, params.lambda, params.mu),
            basis: BasisTag::Ladder,
        },
        spec: LadderSpec::ssh(params.mu, params.lambda, params.n_max + 1),
        origin: Origin::Nljc(*params),
        hermitian: true,
        drives: None,
        losses: Vec::new(),
    })
}

/// Append single- and two-photon drives as same-sublattice hoppings.
///
/// `J₁`, `J₂` are set (not added) from `(F, G)` through `convention`.
/// Previously applied loss terms are re-applied.
pub fn add_drives(
    h: &LatticeHamiltonian,
    f: C64,
    g: C64,
    convention: DriveConvention,
) -> Result<LatticeHamiltonian> {
    if !matches!(h.origin, Origin::Ssh | Origin::Nljc(_) | Origin::Ladder)
        || !h.spec.is_translation_invariant()
    {
        return Err(Error::InvalidParameter(
            "drives map to hoppings only on translation-invariant (SSH / NLJC) lattices".into(),
        ));
    }
    let (j1, j2) = convention.hoppings(f, g);
    let spec = h.spec.clone().with_hoppings(j1, j2);
    let mut out = build_ladder(&spec)?;
    out.origin = h.origin;
    out.drives = Some(DriveMetadata { f, g, convention });
    for &(channel, gamma) in &h.losses {
        out = build_heff(&out, gamma, channel)?;
    }
    Ok(out)
}

/// Non-Hermitian effective Hamiltonian between quantum jumps.
pub fn build_heff(h: &LatticeHamiltonian, gamma: f64, loss: LossChannel) -> Result<LatticeHamiltonian> {
    if !(gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
    }
    let mut out = h.clone();
    if gamma == 0.0 {
        return Ok(out);
    }
    let half = 0.5 * gamma;
    let entries = &mut out.matrix.entries;
    for m in 0..h.n_cells() {
        match loss {
            LossChannel::PhotonLoss => {
                let d = C64::new(0.0, -half * m as f64);
                entries[(site_a(m), site_a(m))] += d;
                entries[(site_b(m), site_b(m))] += d;
            }
            LossChannel::DeformedPhotonLoss => {
                if m > 0 {
                    let d = C64::new(0.0, -half);
                    entries[(site_a(m), site_a(m))] += d;
                    entries[(site_b(m), site_b(m))] += d;
                }
            }
            LossChannel::AtomDecay => {
                entries[(site_b(m), site_b(m))] += C64::new(0.0, -half);
            }
        }
    }
    out.hermitian = false;
    out.losses.push((loss, gamma));
    Ok(out)
}

/// Sublattice operator `Σ = diag(+1 on A, −1 on B)`.
pub fn chiral_operator(n_cells: usize) -> CMatrix {
    CMatrix::from_diagonal(&crate::StateVector::from_fn(2 * n_cells, |i, _| {
        real(if i % 2 == 0 { 1.0 } else { -1.0 })
    }))
}

/// Largest entry of `ΣHΣ + H`; zero iff the matrix anticommutes with `Σ`.
pub fn chiral_defect(h: &LatticeHamiltonian) -> f64 {
    let s = chiral_operator(h.n_cells());
    (&s * h.entries() * &s + h.entries()).camax()
}

/// 2×2 Bloch Hamiltonian of a translation-invariant ladder at momentum `k`,
/// in the `(A, B)` basis with `|S,k⟩ = N^{-1/2} Σ_m e^{ikm} |S,m⟩`.
pub fn bloch_hamiltonian(spec: &LadderSpec, k: f64) -> Result<[[C64; 2]; 2]> {
    let (v, w) = match (spec.v_intra.uniform_value(), spec.v_inter.uniform_value()) {
        (Some(v), Some(w)) => (v, w),
        _ => return Err(Error::InvalidParameter("Bloch form needs uniform couplings".into())),
    };
    let e = |q: f64| C64::from_polar(1.0, q);
    let same = 2.0 * (spec.j1 * e(-k)).re + 2.0 * (spec.j2 * e(-2.0 * k)).re;
    let h_ba = real(v) + real(w) * e(k);
    Ok([[real(same), h_ba.conj()], [h_ba, real(same + spec.delta)]])
}

/// Eigenvalues `(lower, upper)` of the Bloch Hamiltonian at `k`.
pub fn bloch_bands(spec: &LadderSpec, k: f64) -> Result<(f64, f64)> {
    let h = bloch_hamiltonian(spec, k)?;
    let mean = 0.5 * (h[0][0].re + h[1][1].re);
    let half_diff = 0.5 * (h[0][0].re - h[1][1].re);
    let root = (half_diff * half_diff + h[1][0].norm_sqr()).sqrt();
    Ok((mean - root, mean + root))
}

/// Single-mode cavity Hamiltonian `ω n̂ + i(F b† − F* b) + i(G b² − G* b†²)`.
pub fn cavity_hamiltonian(space: TruncatedFockSpace, omega: f64, f: C64, g: C64) -> OperatorMatrix {
    let b = annihilation_matrix(space).entries;
    let bd = b.adjoint();
    let n = number_operator(space).entries;
    let i = C64::i();
    let entries = n * real(omega)
        + (&bd * (i * f) - &b * (i * f.conj()))
        + (&b * &b * (i * g) - &bd * &bd * (i * g.conj()));
    OperatorMatrix { entries, basis: BasisTag::Fock }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigenvalues;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const ZERO: C64 = C64::new(0.0, 0.0);

    #[test]
    fn ladder_two_cells_transcription() {
        let h = build_ssh(1.0, 2.0, 2, ZERO, ZERO, Boundary::Open).unwrap();
        let m = h.entries();
        let mut expected = CMatrix::zeros(4, 4);
        // ⟨B,0|H|A,0⟩ = 1, ⟨B,0|H|A,1⟩ = 2, ⟨B,1|H|A,1⟩ = 1
        for (r, c, v) in [(1, 0, 1.0), (1, 2, 2.0), (3, 2, 1.0)] {
            expected[(r, c)] = real(v);
            expected[(c, r)] = real(v);
        }
        assert_eq!(m, &expected);
    }

    #[test]
    fn j1_adds_same_sublattice_bonds() {
        let h = build_ssh(1.0, 2.0, 2, real(0.3), ZERO, Boundary::Open).unwrap();
        let m = h.entries();
        assert_eq!(m[(site_a(1), site_a(0))], real(0.3));
        assert_eq!(m[(site_b(1), site_b(0))], real(0.3));
        assert_eq!(m[(site_a(0), site_a(1))], real(0.3));
    }

    #[test]
    fn complex_hopping_gets_conjugate_on_reverse_bond() {
        let j = C64::new(0.1, 0.4);
        let h = build_ssh(1.0, 2.0, 4, ZERO, j, Boundary::Open).unwrap();
        assert_eq!(h.entries()[(site_a(2), site_a(0))], j);
        assert_eq!(h.entries()[(site_a(0), site_a(2))], j.conj());
        assert!(h.check_hermitian());
    }

    #[test]
    fn delta_on_b_diagonal() {
        let mut spec = LadderSpec::ssh(1.0, 1.0, 3);
        spec.delta = 0.7;
        let h = build_ladder(&spec).unwrap();
        for m in 0..3 {
            assert_eq!(h.entries()[(site_b(m), site_b(m))], real(0.7));
            assert_eq!(h.entries()[(site_a(m), site_a(m))], ZERO);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(matches!(
            build_ssh(1.0, 1.0, 1, ZERO, ZERO, Boundary::Open),
            Err(Error::InvalidParameter(_))
        ));
        let mut spec = LadderSpec::ssh(1.0, 1.0, 4);
        spec.v_inter = Coupling::PerCell(vec![1.0; 3]);
        assert!(matches!(build_ladder(&spec), Err(Error::Dimension { expected: 4, found: 3 })));
    }

    #[test]
    fn periodic_matches_closed_form_bands() {
        // oracle: E(k) = ±√(v² + w² + 2vw cos k), k = 2πj/N
        let (v, w, n) = (1.0, 2.0, 64);
        let h = build_ssh(v, w, n, ZERO, ZERO, Boundary::Periodic).unwrap();
        let numeric = hermitian_eigenvalues(h.entries());
        let mut analytic: Vec<f64> = (0..n)
            .flat_map(|j| {
                let k = 2.0 * PI * j as f64 / n as f64;
                let e = (v * v + w * w + 2.0 * v * w * k.cos()).sqrt();
                [-e, e]
            })
            .collect();
        analytic.sort_by(f64::total_cmp);
        for (a, b) in numeric.iter().zip(&analytic) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn bloch_form_matches_periodic_real_space() {
        let mut spec = LadderSpec::ssh(-1.0, -2.0, 12)
            .with_hoppings(C64::new(-0.4, 0.2), C64::new(0.3, -0.1))
            .with_boundary(Boundary::Periodic);
        spec.delta = 0.25;
        let numeric = hermitian_eigenvalues(build_ladder(&spec).unwrap().entries());
        let mut bloch: Vec<f64> = (0..spec.n_cells)
            .flat_map(|j| {
                let (lo, hi) = bloch_bands(&spec, 2.0 * PI * j as f64 / spec.n_cells as f64).unwrap();
                [lo, hi]
            })
            .collect();
        bloch.sort_by(f64::total_cmp);
        for (a, b) in numeric.iter().zip(&bloch) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn driven_jc_sqrt_coupling() {
        let p = JcParams::new(1.0, 0.5, 3);
        let h = build_driven_jc(&p).unwrap();
        assert!((h.entries()[(site_b(1), site_a(2))] - real(2f64.sqrt())).norm() < 1e-15);
        assert_eq!(h.entries()[(site_b(2), site_a(2))], real(0.5));
        assert_eq!(h.dim(), 8);
    }

    #[test]
    fn driven_jc_vacuum_a_decouples_without_drive() {
        let h = build_driven_jc(&JcParams::new(1.0, 0.0, 5)).unwrap();
        let col = h.entries().column(site_a(0));
        assert_eq!(col.norm(), 0.0);
    }

    #[test]
    fn driven_jc_dual_construction() {
        for (lambda, mu, n_max) in [(1.0, 0.5, 3), (0.7, -1.3, 20), (-2.0, 0.1, 45)] {
            let p = JcParams::new(lambda, mu, n_max);
            let a = build_driven_jc(&p).unwrap();
            let b = build_driven_jc_tensor(&p).unwrap();
            assert!((a.entries() - b.entries()).camax() <= 1e-15);
        }
    }

    #[test]
    fn nljc_equals_ssh() {
        let p = JcParams::new(-2.0, -1.0, 39);
        let nl = build_nljc(&p).unwrap();
        let ssh = build_ssh(-1.0, -2.0, 40, ZERO, ZERO, Boundary::Open).unwrap();
        assert!((nl.entries() - ssh.entries()).camax() <= 1e-15);
    }

    #[test]
    fn nljc_without_drive_is_pure_intercell_chain() {
        let h = build_nljc(&JcParams::new(1.5, 0.0, 6)).unwrap();
        for m in 0..7 {
            assert_eq!(h.entries()[(site_b(m), site_a(m))], ZERO);
        }
        for m in 1..7 {
            assert_eq!(h.entries()[(site_b(m - 1), site_a(m))], real(1.5));
        }
    }

    #[test]
    fn add_drives_zero_is_identity() {
        let h = build_ssh(-1.0, -2.0, 10, ZERO, ZERO, Boundary::Open).unwrap();
        let d = add_drives(&h, ZERO, ZERO, DriveConvention::Hopping).unwrap();
        assert_eq!(d.entries(), h.entries());
    }

    #[test]
    fn add_drives_literal_phase() {
        let h = build_ssh(-1.0, -2.0, 6, ZERO, ZERO, Boundary::Open).unwrap();
        let f = real(0.5);
        let g = real(0.2);
        let d = add_drives(&h, f, g, DriveConvention::LiteralPhase).unwrap();
        assert_eq!(d.spec.j1, C64::new(0.0, 0.5));
        assert_eq!(d.spec.j2, C64::new(0.0, -0.2));
        assert!(d.check_hermitian());
        // the literal map reproduces i(F b† − F* b) with b → unit lowering
        let a = deformed_annihilation_matrix(TruncatedFockSpace::new(5).unwrap()).entries;
        let drive = (a.adjoint() * (C64::i() * f) - &a * (C64::i() * f.conj()))
            + (&a * &a * (C64::i() * g) - a.adjoint() * a.adjoint() * (C64::i() * g.conj()));
        let lifted = drive.kronecker(&CMatrix::identity(2, 2));
        assert!((d.entries() - h.entries() - lifted).camax() < 1e-15);
        assert_eq!(d.drives.unwrap().convention, DriveConvention::LiteralPhase);
    }

    #[test]
    fn add_drives_rejects_jc_ladder() {
        let h = build_driven_jc(&JcParams::new(1.0, 0.5, 5)).unwrap();
        assert!(add_drives(&h, real(0.1), ZERO, DriveConvention::Hopping).is_err());
    }

    #[test]
    fn heff_examples() {
        let h = build_ssh(-1.0, -2.0, 5, ZERO, ZERO, Boundary::Open).unwrap();
        assert_eq!(build_heff(&h, 0.0, LossChannel::AtomDecay).unwrap().entries(), h.entries());

        let atom = build_heff(&h, 0.4, LossChannel::AtomDecay).unwrap();
        assert!(!atom.hermitian);
        for m in 0..5 {
            assert!((atom.entries()[(site_b(m), site_b(m))] - C64::new(0.0, -0.2)).norm() < 1e-15);
            assert_eq!(atom.entries()[(site_a(m), site_a(m))], ZERO);
        }

        let jc = build_driven_jc(&JcParams::new(1.0, 0.5, 6)).unwrap();
        let loss = build_heff(&jc, 0.2, LossChannel::PhotonLoss).unwrap();
        for m in 0..7 {
            assert!((loss.entries()[(site_a(m), site_a(m))] - C64::new(0.0, -0.1 * m as f64)).norm() < 1e-15);
        }

        let deformed = build_heff(&h, 0.2, LossChannel::DeformedPhotonLoss).unwrap();
        assert_eq!(deformed.entries()[(0, 0)], ZERO);
        assert!((deformed.entries()[(site_b(3), site_b(3))] - C64::new(0.0, -0.1)).norm() < 1e-15);
        assert!(build_heff(&h, -1.0, LossChannel::PhotonLoss).is_err());
    }

    #[test]
    fn heff_then_drive_keeps_losses() {
        let h = build_ssh(-1.0, -2.0, 5, ZERO, ZERO, Boundary::Open).unwrap();
        let lossy = build_heff(&h, 0.4, LossChannel::AtomDecay).unwrap();
        let driven = add_drives(&lossy, real(-0.5), ZERO, DriveConvention::Hopping).unwrap();
        assert!(!driven.hermitian);
        assert!((driven.entries()[(site_b(2), site_b(2))] - C64::new(0.0, -0.2)).norm() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let h = build_ssh(-1.0, -2.0, 3, C64::new(0.1, 0.2), ZERO, Boundary::Open).unwrap();
        let v = h.to_json();
        assert_eq!(v["dimension"], 6);
        assert_eq!(v["basis_ordering"], BASIS_ORDERING_TAG);
        assert_eq!(&matrix_from_json(&v).unwrap(), h.entries());
    }

    #[test]
    fn cavity_hamiltonian_is_hermitian() {
        let sp = TruncatedFockSpace::new(12).unwrap();
        let h = cavity_hamiltonian(sp, 1.0, C64::new(0.2, -0.1), C64::new(0.3, 0.05));
        assert!(hermiticity_defect(&h.entries) < 1e-14);
    }

    fn arb_spec() -> impl Strategy<Value = LadderSpec> {
        (2usize..12, -2.0f64..2.0, -2.0f64..2.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, any::<bool>())
            .prop_map(|(n, v, w, d, j1r, j1i, j2r, j2i, periodic)| {
                let mut s = LadderSpec::ssh(v, w, n)
                    .with_hoppings(C64::new(j1r, j1i), C64::new(j2r, j2i))
                    .with_boundary(if periodic { Boundary::Periodic } else { Boundary::Open });
                s.delta = d;
                s
            })
    }

    proptest! {
        #[test]
        fn every_ladder_is_hermitian(spec in arb_spec()) {
            prop_assert!(build_ladder(&spec).unwrap().check_hermitian());
        }

        #[test]
        fn jc_builders_are_hermitian(lambda in -3.0f64..3.0, mu in -3.0f64..3.0, n_max in 2usize..30) {
            let p = JcParams::new(lambda, mu, n_max);
            prop_assert!(build_driven_jc(&p).unwrap().check_hermitian());
            prop_assert!(build_driven_jc_tensor(&p).unwrap().check_hermitian());
            prop_assert!(build_nljc(&p).unwrap().check_hermitian());
        }

        #[test]
        fn chiral_symmetry_without_same_sublattice_terms(
            v in -3.0f64..3.0, w in -3.0f64..3.0, n in 2usize..30, periodic in any::<bool>()
        ) {
            let b = if periodic { Boundary::Periodic } else { Boundary::Open };
            let h = build_ssh(v, w, n, ZERO, ZERO, b).unwrap();
            prop_assert_eq!(chiral_defect(&h), 0.0);
        }

        #[test]
        fn same_sublattice_terms_break_chiral_symmetry(
            j1 in -1.0f64..1.0, j2 in -1.0f64..1.0, n in 3usize..20
        ) {
            prop_assume!(j1.abs() > 1e-6 || j2.abs() > 1e-6);
            let h = build_ssh(-1.0, -2.0, n, real(j1), real(j2), Boundary::Open).unwrap();
            prop_assert!(chiral_defect(&h) > 0.0);
        }

        #[test]
        fn jc_chiral_symmetry(lambda in -3.0f64..3.0, mu in -3.0f64..3.0, n_max in 2usize..25) {
            let h = build_driven_jc(&JcParams::new(lambda, mu, n_max)).unwrap();
            prop_assert_eq!(chiral_defect(&h), 0.0);
        }
    }
}
