//! Clause, register and full probe-coupled Hamiltonians.
//!
//! The full operator on `probe ⊗ ancilla ⊗ register` is
//!
//! ```text
//! H = -(ω/2) σ_z ⊗ I ⊗ I_N  +  I ⊗ H_R  +  c σ_x ⊗ σ_x ⊗ I_N
//! H_R = -1 |0⟩⟨0| ⊗ I_N  +  |1⟩⟨1| ⊗ H_C
//! ```
//!
//! It is stored as a diagonal plus a scalar coupling. The coupling flips probe
//! and ancilla together and never touches the register, so `H` is a direct sum
//! of 2×2 blocks `{|q_p, q_a, j⟩, |1-q_p, 1-q_a, j⟩}`.

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::Clause;
use crate::state::StateVector;

pub const DEFAULT_OMEGA: f64 = 1.0;

/// Largest `n` for which a dense matrix may be produced.
pub const MAX_DENSE_BITS: usize = 4;

/// `h_C(z)` for every `n`-bit basis index.
pub fn clause_diagonal(clause: &Clause, n: usize) -> Result<Vec<f64>> {
    if clause.max_index() > n {
        return Err(Error::InvalidClause(format!("{clause} exceeds n = {n}")));
    }
    Ok((0..1u64 << n)
        .map(|j| if clause.satisfied_by_index(n, j) { 0.0 } else { 1.0 })
        .collect())
}

/// Diagonal of `H_R`: the ancilla-0 block at −1 followed by the clause diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct RegisterDiagonal {
    n: usize,
    entries: Vec<f64>,
}

impl RegisterDiagonal {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// The clause part (ancilla = 1 block).
    pub fn clause_part(&self) -> &[f64] {
        &self.entries[1 << self.n..]
    }
}

pub fn register_diagonal(clause_diag: &[f64]) -> Result<RegisterDiagonal> {
    let len = clause_diag.len();
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::param(format!("clause diagonal length {len} is not a power of two")));
    }
    let n = len.trailing_zeros() as usize;
    let mut entries = vec![-1.0; len];
    entries.extend_from_slice(clause_diag);
    Ok(RegisterDiagonal { n, entries })
}

/// Upper limit placed on `c / ω` by [`full_hamiltonian`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingGuard {
    /// `c <= ω / 10`.
    Default,
    /// `c <= ratio · ω`.
    Ratio(f64),
    /// No weak-coupling check.
    Off,
}

/// `H` in structured form: no dense matrix is ever allocated.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredHamiltonian {
    omega: f64,
    c: f64,
    register: RegisterDiagonal,
}

pub fn full_hamiltonian(
    register: RegisterDiagonal,
    omega: f64,
    c: f64,
    guard: CouplingGuard,
) -> Result<StructuredHamiltonian> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::param(format!("omega must be positive, got {omega}")));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::param(format!("coupling c must be positive, got {c}")));
    }
    let limit = match guard {
        CouplingGuard::Default => Some(0.1),
        CouplingGuard::Ratio(r) => Some(r),
        CouplingGuard::Off => None,
    };
    if let Some(r) = limit {
        if c > r * omega {
            return Err(Error::param(format!(
                "coupling c = {c} violates the weak-coupling guard c <= {r} * omega"
            )));
        }
    }
    Ok(StructuredHamiltonian { omega, c, register })
}

impl StructuredHamiltonian {
    /// Convenience: the round Hamiltonian for one clause.
    pub fn for_clause(clause: &Clause, n: usize, omega: f64, c: f64, guard: CouplingGuard) -> Result<Self> {
        full_hamiltonian(register_diagonal(&clause_diagonal(clause, n)?)?, omega, c, guard)
    }

    /// Uncoupled operator (c = 0). Only the diagonal part evolves.
    pub fn uncoupled(register: RegisterDiagonal, omega: f64) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::param(format!("omega must be positive, got {omega}")));
        }
        Ok(StructuredHamiltonian { omega, c: 0.0, register })
    }

    pub fn n(&self) -> usize {
        self.register.n
    }

    pub fn dim(&self) -> usize {
        4 << self.register.n
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn coupling(&self) -> f64 {
        self.c
    }

    pub fn register(&self) -> &RegisterDiagonal {
        &self.register
    }

    /// XOR mask taking an index to its coupling partner (flips probe and ancilla).
    #[inline]
    pub fn partner_mask(&self) -> usize {
        0b11 << self.register.n
    }

    /// Diagonal element at basis index `idx`.
    #[inline]
    pub fn diag(&self, idx: usize) -> f64 {
        let n = self.register.n;
        let probe = (idx >> (n + 1)) & 1;
        let probe_term = if probe == 1 { 0.5 * self.omega } else { -0.5 * self.omega };
        probe_term + self.register.entries[idx & ((2 << n) - 1)]
    }

    /// Full diagonal as a vector.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.diag(i)).collect()
    }

    /// `H v` in one pass over the amplitudes. The result is not normalized.
    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        v.check_n(self.n())?;
        let mut out = StateVector::zeros(self.n());
        self.apply_into(v.amplitudes(), out.amplitudes_mut());
        Ok(out)
    }

    pub(crate) fn apply_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        let mask = self.partner_mask();
        for (i, o) in out.iter_mut().enumerate() {
            *o = v[i] * self.diag(i) + v[i ^ mask] * self.c;
        }
    }

    /// `⟨v|H|v⟩`.
    pub fn expectation(&self, v: &StateVector) -> Result<f64> {
        Ok(v.inner(&self.apply(v)?).re)
    }

    /// Dense row-major matrix, for cross-checks at small `n` only.
    pub fn dense(&self) -> Result<Vec<Complex64>> {
        let n = self.n();
        if n > MAX_DENSE_BITS {
            return Err(Error::param(format!("dense form limited to n <= {MAX_DENSE_BITS}, got {n}")));
        }
        let dim = self.dim();
        let mask = self.partner_mask();
        let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            m[i * dim + i] = Complex64::new(self.diag(i), 0.0);
            m[i * dim + (i ^ mask)] += Complex64::new(self.c, 0.0);
        }
        Ok(m)
    }

    /// Writes the dense matrix as row-major `(re, im)` little-endian f64 pairs.
    pub fn write_dense_dump(&self, path: &Path) -> Result<()> {
        let m = self.dense()?;
        let mut buf = Vec::with_capacity(m.len() * 16);
        for z in &m {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        crate::report::write_atomic(path, &buf)
    }
}
