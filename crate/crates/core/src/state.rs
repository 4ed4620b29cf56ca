use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Amplitudes over `probe ⊗ ancilla ⊗ z_1..z_n`.
///
/// The probe is the most significant bit of the basis index, the ancilla the
/// next one, and the problem register occupies the low `n` bits with `z_1`
/// highest. Index of `|q_p, q_a, j⟩` is `q_p 2^(n+1) + q_a 2^n + j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

/// Index of `|probe, ancilla, j⟩` for an `n`-bit register.
#[inline]
pub fn basis_index(n: usize, probe: u8, ancilla: u8, j: usize) -> usize {
    ((probe as usize) << (n + 1)) | ((ancilla as usize) << n) | j
}

impl StateVector {
    pub fn zeros(n: usize) -> Self {
        StateVector { n, amps: vec![Complex64::new(0.0, 0.0); 4 << n] }
    }

    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 4 << n {
            return Err(Error::DimensionMismatch { expected: 4 << n, got: amps.len() });
        }
        Ok(StateVector { n, amps })
    }

    /// `|probe⟩ ⊗ |ancilla⟩ ⊗ register`.
    pub fn product(probe: u8, ancilla: u8, register: &RegisterState) -> Self {
        let n = register.n();
        let mut s = StateVector::zeros(n);
        let off = basis_index(n, probe, ancilla, 0);
        s.amps[off..off + (1 << n)].copy_from_slice(register.amplitudes());
        s
    }

    pub fn basis(n: usize, probe: u8, ancilla: u8, j: usize) -> Self {
        let mut s = StateVector::zeros(n);
        s.amps[basis_index(n, probe, ancilla, j)] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    /// The `2^n` register amplitudes in the `(probe, ancilla)` block.
    pub fn block(&self, probe: u8, ancilla: u8) -> &[Complex64] {
        let off = basis_index(self.n, probe, ancilla, 0);
        &self.amps[off..off + (1 << self.n)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scale(&mut self, k: Complex64) {
        self.amps.iter_mut().for_each(|a| *a *= k);
    }

    pub fn normalize(&mut self) -> Result<()> {
        let nrm = self.norm();
        if nrm < 1e-300 {
            return Err(Error::Numerical("cannot normalize the zero vector".into()));
        }
        self.scale(Complex64::new(1.0 / nrm, 0.0));
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub(crate) fn check_n(&self, n: usize) -> Result<()> {
        if self.n != n {
            return Err(Error::DimensionMismatch { expected: 4 << n, got: self.dim() });
        }
        Ok(())
    }
}

/// State of the `n` problem qubits alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisterState {
    n: usize,
    amps: Vec<Complex64>,
}

impl RegisterState {
    pub fn new(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, got: amps.len() });
        }
        Ok(RegisterState { n, amps })
    }

    /// `(1/√N) Σ_j |j⟩`.
    pub fn uniform(n: usize) -> Self {
        let a = Complex64::new(1.0 / ((1u64 << n) as f64).sqrt(), 0.0);
        RegisterState { n, amps: vec![a; 1 << n] }
    }

    /// Equal-weight superposition of the given basis indices; the zero vector if empty.
    pub fn uniform_over(n: usize, indices: &[u64]) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        if !indices.is_empty() {
            let a = Complex64::new(1.0 / (indices.len() as f64).sqrt(), 0.0);
            for &i in indices {
                amps[i as usize] = a;
            }
        }
        RegisterState { n, amps }
    }

    pub fn basis(n: usize, j: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[j] = Complex64::new(1.0, 0.0);
        RegisterState { n, amps }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &RegisterState) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// |⟨self|other⟩|² for normalized states.
    pub fn fidelity(&self, other: &RegisterState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub(crate) fn normalized(mut self) -> Result<Self> {
        let nrm = self.norm_sqr().sqrt();
        if nrm < 1e-300 {
            return Err(Error::Numerical("register block is empty".into()));
        }
        self.amps.iter_mut().for_each(|a| *a /= nrm);
        Ok(self)
    }
}
