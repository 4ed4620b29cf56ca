//! Time evolution, probe measurement and three-level diagnostics on full state vectors.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krylov::{expm_multiply, KrylovOptions};
use crate::model::Ec3Instance;
use crate::operator::StructuredHamiltonian;
use crate::state::{RegisterState, StateVector};

/// Above this total dimension `Auto` switches from eigendecomposition to Krylov.
pub const EIGEN_DIM_LIMIT: usize = 4096;

/// Probability below which a measurement outcome cannot be projected onto.
pub const MIN_OUTCOME_PROB: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactMethod {
    #[default]
    Auto,
    Eigen,
    Krylov,
}

/// Spectral decomposition of the structured Hamiltonian.
///
/// The coupling pairs `i` with `i ^ partner_mask` and nothing else, so the
/// eigenvectors live on those pairs. Each pair `[[a, c], [c, b]]` has
/// eigenvalues `m ± Ω` and a rotation angle `θ` with `tan 2θ = 2c / (a - b)`.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    n: usize,
    mask: usize,
    /// Per lower index of each pair: (λ_+, λ_-, cos θ, sin θ).
    pairs: Vec<(f64, f64, f64, f64)>,
}

impl Eigensystem {
    pub fn new(h: &StructuredHamiltonian) -> Self {
        let mask = h.partner_mask();
        let half = h.dim() / 2;
        let c = h.coupling();
        let pairs = (0..half)
            .map(|i| {
                let a = h.diag(i);
                let b = h.diag(i ^ mask);
                let mean = 0.5 * (a + b);
                let delta = 0.5 * (a - b);
                let omega = delta.hypot(c);
                let theta = 0.5 * (2.0 * c).atan2(a - b);
                (mean + omega, mean - omega, theta.cos(), theta.sin())
            })
            .collect();
        Eigensystem { n: h.n(), mask, pairs }
    }

    /// All eigenvalues (unordered).
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.pairs.iter().flat_map(|&(p, m, _, _)| [p, m]).collect()
    }

    pub fn propagate(&self, v: &StateVector, t: f64) -> Result<StateVector> {
        v.check_n(self.n)?;
        let mut out = v.clone();
        let amps = out.amplitudes_mut();
        for (i, &(lp, lm, cs, sn)) in self.pairs.iter().enumerate() {
            let k = i ^ self.mask;
            let (x, y) = (amps[i], amps[k]);
            // coordinates in the eigenbasis (cos θ, sin θ), (-sin θ, cos θ)
            let up = x * cs + y * sn;
            let dn = -x * sn + y * cs;
            let up = up * Complex64::from_polar(1.0, -lp * t);
            let dn = dn * Complex64::from_polar(1.0, -lm * t);
            amps[i] = up * cs - dn * sn;
            amps[k] = up * sn + dn * cs;
        }
        Ok(out)
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::param(format!("evolution time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// `exp(-iHt) v` with the default method selection.
pub fn evolve_exact(h: &StructuredHamiltonian, v: &StateVector, t: f64) -> Result<StateVector> {
    evolve_exact_with(h, v, t, ExactMethod::Auto)
}

pub fn evolve_exact_with(h: &StructuredHamiltonian, v: &StateVector, t: f64, method: ExactMethod) -> Result<StateVector> {
    check_time(t)?;
    v.check_n(h.n())?;
    let method = match method {
        ExactMethod::Auto if h.dim() <= EIGEN_DIM_LIMIT => ExactMethod::Eigen,
        ExactMethod::Auto => ExactMethod::Krylov,
        m => m,
    };
    match method {
        ExactMethod::Eigen => Eigensystem::new(h).propagate(v, t),
        _ => {
            let (amps, _) = expm_multiply(|x, out| h.apply_into(x, out), v.amplitudes(), t, &KrylovOptions::default())?;
            StateVector::from_amplitudes(h.n(), amps)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrotterOrder {
    First,
    Second,
}

impl TryFrom<u8> for TrotterOrder {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(TrotterOrder::First),
            2 => Ok(TrotterOrder::Second),
            o => Err(Error::param(format!("Trotter order must be 1 or 2, got {o}"))),
        }
    }
}

/// Split-operator evolution with `H = D + C`.
///
/// `D` is the full diagonal, applied as phases. `C = c σ_x ⊗ σ_x ⊗ I_N` is
/// applied exactly as a rotation on each coupled pair. Second order uses the
/// symmetric D/2 · C · D/2 sequence, with adjacent half steps merged.
pub fn evolve_trotter(
    h: &StructuredHamiltonian,
    v: &StateVector,
    t: f64,
    steps: usize,
    order: TrotterOrder,
) -> Result<StateVector> {
    check_time(t)?;
    v.check_n(h.n())?;
    if steps == 0 {
        return Err(Error::param("Trotter steps must be >= 1"));
    }
    let dt = t / steps as f64;
    let diag = h.diagonal();
    let phases = |tau: f64| -> Vec<Complex64> { diag.iter().map(|d| Complex64::from_polar(1.0, -d * tau)).collect() };
    let full = phases(dt);
    let (cs, sn) = ((h.coupling() * dt).cos(), (h.coupling() * dt).sin());
    let mask = h.partner_mask();
    let half_dim = h.dim() / 2;
    let minus_i_sin = Complex64::new(0.0, -sn);

    let mut out = v.clone();
    let amps = out.amplitudes_mut();
    let apply_phases = |a: &mut [Complex64], p: &[Complex64]| a.iter_mut().zip(p).for_each(|(x, y)| *x *= y);
    let apply_coupling = |a: &mut [Complex64]| {
        for i in 0..half_dim {
            let k = i ^ mask;
            let (x, y) = (a[i], a[k]);
            a[i] = x * cs + y * minus_i_sin;
            a[k] = x * minus_i_sin + y * cs;
        }
    };

    match order {
        TrotterOrder::First => {
            for _ in 0..steps {
                apply_phases(amps, &full);
                apply_coupling(amps);
            }
        }
        TrotterOrder::Second => {
            let half = phases(0.5 * dt);
            apply_phases(amps, &half);
            for s in 0..steps {
                apply_coupling(amps);
                apply_phases(amps, if s + 1 == steps { &half } else { &full });
            }
        }
    }
    Ok(out)
}

/// Total population with the probe in `|0⟩`.
pub fn probe_ground_population(v: &StateVector) -> f64 {
    let half = v.dim() / 2;
    v.amplitudes()[..half].iter().map(|a| a.norm_sqr()).sum::<f64>().clamp(0.0, 1.0)
}

#[derive(Debug, Clone)]
pub struct ProbeMeasurement {
    pub outcome: u8,
    pub collapsed: StateVector,
    pub prob_of_outcome: f64,
}

/// Projects onto a probe outcome and renormalizes.
pub fn collapse_probe(v: &StateVector, outcome: u8) -> Result<(StateVector, f64)> {
    let p0 = probe_ground_population(v);
    let prob = if outcome == 0 { p0 } else { 1.0 - p0 };
    if prob < MIN_OUTCOME_PROB {
        return Err(Error::DegenerateCollapse { outcome, prob });
    }
    let half = v.dim() / 2;
    let mut out = v.clone();
    let amps = out.amplitudes_mut();
    let (keep, drop) = if outcome == 0 { (0..half, half..amps.len()) } else { (half..amps.len(), 0..half) };
    amps[drop].iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
    let s = 1.0 / amps[keep.clone()].iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps[keep].iter_mut().for_each(|a| *a *= s);
    Ok((out, prob))
}

/// Single-shot computational-basis measurement of the probe qubit.
pub fn measure_probe<R: Rng + ?Sized>(v: &StateVector, rng: &mut R) -> Result<ProbeMeasurement> {
    let p0 = probe_ground_population(v);
    let u: f64 = rng.random();
    let outcome = if u < p0 { 0 } else { 1 };
    let (collapsed, prob_of_outcome) = collapse_probe(v, outcome)?;
    Ok(ProbeMeasurement { outcome, collapsed, prob_of_outcome })
}

/// Register states spanning a round's three-level picture:
/// `|Ψ0⟩ = |1,0,φ_prev⟩`, `|Ψ1⟩ = |0,1,φ_sol⟩`, `|Ψ2⟩ = |0,1,φ_nonsol⟩`.
///
/// `φ_sol` or `φ_nonsol` may be the zero vector when the corresponding set is empty.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    pub phi_prev: RegisterState,
    pub phi_sol: RegisterState,
    pub phi_nonsol: RegisterState,
}

impl SubspaceBasis {
    /// Uniform superpositions built from the brute-force oracle for round `k` (1-based).
    pub fn from_oracle(instance: &Ec3Instance, k: usize) -> Result<Self> {
        if k == 0 || k > instance.m() {
            return Err(Error::param(format!("round {k} outside 1..={}", instance.m())));
        }
        let n = instance.n();
        let prev = instance.satisfying_indices(k - 1)?;
        let clause = instance.clauses()[k - 1];
        let (sol, nonsol): (Vec<u64>, Vec<u64>) = prev.iter().partition(|&&j| clause.satisfied_by_index(n, j));
        Ok(SubspaceBasis {
            phi_prev: RegisterState::uniform_over(n, &prev),
            phi_sol: RegisterState::uniform_over(n, &sol),
            phi_nonsol: RegisterState::uniform_over(n, &nonsol),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubspaceDecomposition {
    pub c0: Complex64,
    pub c1: Complex64,
    pub c2: Complex64,
    /// Population outside span{Ψ0, Ψ1, Ψ2}.
    pub leakage: f64,
}

impl SubspaceDecomposition {
    pub fn c0_sq(&self) -> f64 {
        self.c0.norm_sqr()
    }
    pub fn c1_sq(&self) -> f64 {
        self.c1.norm_sqr()
    }
    pub fn c2_sq(&self) -> f64 {
        self.c2.norm_sqr()
    }
}

fn check_unit_or_zero(s: &RegisterState, name: &str) -> Result<()> {
    let nrm = s.norm_sqr();
    if nrm != 0.0 && (nrm - 1.0).abs() > 1e-9 {
        return Err(Error::param(format!("{name} has squared norm {nrm}, expected 1 or 0")));
    }
    Ok(())
}

pub fn subspace_decompose(v: &StateVector, basis: &SubspaceBasis) -> Result<SubspaceDecomposition> {
    let n = v.n();
    for (s, name) in [(&basis.phi_prev, "phi_prev"), (&basis.phi_sol, "phi_sol"), (&basis.phi_nonsol, "phi_nonsol")] {
        if s.n() != n {
            return Err(Error::DimensionMismatch { expected: 1 << n, got: 1 << s.n() });
        }
        check_unit_or_zero(s, name)?;
    }
    let overlap = basis.phi_sol.inner(&basis.phi_nonsol).norm();
    if overlap > 1e-9 {
        return Err(Error::NonOrthogonalBasis(overlap));
    }
    let project = |phi: &RegisterState, probe, anc| -> Complex64 {
        phi.amplitudes().iter().zip(v.block(probe, anc)).map(|(a, b)| a.conj() * b).sum()
    };
    let c0 = project(&basis.phi_prev, 1, 0);
    let c1 = project(&basis.phi_sol, 0, 1);
    let c2 = project(&basis.phi_nonsol, 0, 1);
    let leakage = (v.norm_sqr() - c0.norm_sqr() - c1.norm_sqr() - c2.norm_sqr()).max(0.0);
    Ok(SubspaceDecomposition { c0, c1, c2, leakage })
}

/// One row of the `t,c0_sq,c1_sq,c2_sq,leakage,probe_ground` time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesRow {
    pub t: f64,
    pub c0_sq: f64,
    pub c1_sq: f64,
    pub c2_sq: f64,
    pub leakage: f64,
    pub probe_ground: f64,
}

pub const TIME_SERIES_HEADER: &str = "t,c0_sq,c1_sq,c2_sq,leakage,probe_ground";

/// Evolves `v0` to each grid point independently and decomposes the result.
pub fn time_series(
    h: &StructuredHamiltonian,
    v0: &StateVector,
    basis: &SubspaceBasis,
    grid: &[f64],
    method: ExactMethod,
) -> Result<Vec<TimeSeriesRow>> {
    use rayon::prelude::*;
    grid.par_iter()
        .map(|&t| {
            let v = evolve_exact_with(h, v0, t, method)?;
            let d = subspace_decompose(&v, basis)?;
            Ok(TimeSeriesRow {
                t,
                c0_sq: d.c0_sq(),
                c1_sq: d.c1_sq(),
                c2_sq: d.c2_sq(),
                leakage: d.leakage,
                probe_ground: probe_ground_population(&v),
            })
        })
        .collect()
}

/// Register amplitudes of the `(probe = 0, ancilla = 1)` block, renormalized.
///
/// This is the problem-register state left behind by a probe decay.
pub fn decayed_register(v: &StateVector) -> Result<RegisterState> {
    RegisterState::new(v.n(), v.block(0, 1).to_vec())?.normalized()
}
