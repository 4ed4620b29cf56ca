//! Closed-form few-level models of a single round.
//!
//! In the basis `{|1,0,φ_prev⟩, |0,1,φ_sol⟩, |0,1,φ_nonsol⟩}` the round
//! Hamiltonian is modelled as
//!
//! ```text
//!        ⎡ -1/2      c√p      c√(1-p) ⎤
//! H3 =   ⎢ c√p      -1/2      0       ⎥
//!        ⎣ c√(1-p)   0        1/2     ⎦
//! ```
//!
//! Eigendecomposition of the 3×3 is the ground truth here; the printed
//! closed-form amplitude is evaluated separately and checked against it.

use std::f64::consts::PI;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coupling strength and round transition weight; ω is fixed at 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    pub c: f64,
    pub p: f64,
}

impl ReducedParams {
    pub fn new(c: f64, p: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::param(format!("coupling c must be positive, got {c}")));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param(format!("p must lie in [0, 1], got {p}")));
        }
        Ok(ReducedParams { c, p })
    }

    /// `π / (2 c √p)`, the transfer time of the three-level model.
    pub fn resonance_time(&self) -> Option<f64> {
        (self.p > 0.0).then(|| PI / (2.0 * self.c * self.p.sqrt()))
    }
}

/// Amplitudes on `(Ψ0, Ψ1, Ψ2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub c0: Complex64,
    pub c1: Complex64,
    pub c2: Complex64,
}

impl ReducedState {
    pub fn norm_sqr(&self) -> f64 {
        self.c0.norm_sqr() + self.c1.norm_sqr() + self.c2.norm_sqr()
    }
}

pub fn h3(params: &ReducedParams) -> Matrix3<f64> {
    let ReducedParams { c, p } = *params;
    let a = c * p.sqrt();
    let b = c * (1.0 - p).sqrt();
    Matrix3::new(-0.5, a, b, a, -0.5, 0.0, b, 0.0, 0.5)
}

/// `exp(-i H t) (1, 0, 0)` for a real symmetric 3×3.
fn expm_first_column_real(h: Matrix3<f64>, t: f64) -> ReducedState {
    let eig = SymmetricEigen::new(h);
    let v = &eig.eigenvectors;
    let amp = |r: usize| -> Complex64 {
        (0..3)
            .map(|s| Complex64::from_polar(v[(r, s)] * v[(0, s)], -eig.eigenvalues[s] * t))
            .sum()
    };
    ReducedState { c0: amp(0), c1: amp(1), c2: amp(2) }
}

/// `exp(-i H t) (1, 0, 0)` for a complex Hermitian 3×3.
fn expm_first_column_hermitian(h: Matrix3<Complex64>, t: f64) -> ReducedState {
    let eig = SymmetricEigen::new(h);
    let v = &eig.eigenvectors;
    let amp = |r: usize| -> Complex64 {
        (0..3)
            .map(|s| v[(r, s)] * v[(0, s)].conj() * Complex64::from_polar(1.0, -eig.eigenvalues[s] * t))
            .sum()
    };
    ReducedState { c0: amp(0), c1: amp(1), c2: amp(2) }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::param(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// Three-level amplitudes at time `t` starting from `Ψ0`.
pub fn propagate3(params: &ReducedParams, t: f64) -> Result<ReducedState> {
    check_time(t)?;
    Ok(expm_first_column_real(h3(params), t))
}

/// Eigenvalues of `H3`, ascending.
pub fn h3_eigenvalues(params: &ReducedParams) -> Vector3<f64> {
    let mut e = SymmetricEigen::new(h3(params)).eigenvalues;
    e.as_mut_slice().sort_by(f64::total_cmp);
    e
}

/// Minimum eigenvalue spacing accepted by [`c1_analytic`].
pub const MIN_EIGEN_GAP: f64 = 1e-10;

/// The printed closed form
/// `c1(t) = 2c√p Σ_x (e^{-ixt} - 2x e^{-ixt}) / (-12x² - 4x + 4c² + 1)`
/// summed over the eigenvalues `x` of `H3`.
pub fn c1_analytic(params: &ReducedParams, t: f64) -> Result<Complex64> {
    check_time(t)?;
    let x = h3_eigenvalues(params);
    let gap = (x[1] - x[0]).min(x[2] - x[1]);
    if gap < MIN_EIGEN_GAP {
        return Err(Error::DegenerateSpectrum(gap));
    }
    let c = params.c;
    let sum: Complex64 = x
        .iter()
        .map(|&x| {
            let phase = Complex64::from_polar(1.0, -x * t);
            (phase - 2.0 * x * phase) / (-12.0 * x * x - 4.0 * x + 4.0 * c * c + 1.0)
        })
        .sum();
    Ok(sum * (2.0 * c * params.p.sqrt()))
}

/// Probe decay probability when no state satisfies the clause:
/// `4c² sin²(√(1/4 + c²) t) / (1 + 4c²)`.
pub fn offres_decay(c: f64, t: f64) -> f64 {
    let s = ((0.25 + c * c).sqrt() * t).sin();
    4.0 * c * c * s * s / (1.0 + 4.0 * c * c)
}

/// Supremum over `t` of [`offres_decay`].
pub fn offres_ceiling(c: f64) -> f64 {
    4.0 * c * c / (1.0 + 4.0 * c * c)
}

/// Purification Hamiltonian with the current `(c1, c2)` pair as couplings.
pub fn h3_purify(c: f64, c1_prev: Complex64, c2_prev: Complex64) -> Result<Matrix3<Complex64>> {
    let nrm = c1_prev.norm_sqr() + c2_prev.norm_sqr();
    if (nrm - 1.0).abs() > 1e-9 {
        return Err(Error::param(format!("|c1|² + |c2|² = {nrm}, expected 1")));
    }
    let z = Complex64::new(0.0, 0.0);
    let r = |x: f64| Complex64::new(x, 0.0);
    let a = c1_prev * c;
    let b = c2_prev * c;
    Ok(Matrix3::new(r(-0.5), a, b, a.conj(), r(-0.5), z, b.conj(), z, r(0.5)))
}

/// Error sequence of the success-conditioned purification map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurificationTrace {
    /// Evolution time of the first (resonance) step.
    pub t_first: f64,
    /// `epsilons[0]` is ε₀ = |c2|² after the first decay; `epsilons[m]` follows `m` purification successes.
    pub epsilons: Vec<f64>,
    /// Normalized `c1` after each success, aligned with `epsilons`.
    pub c1_track: Vec<Complex64>,
    /// Decay probability of each step, aligned with `epsilons`.
    pub decay_probs: Vec<f64>,
}

impl PurificationTrace {
    pub fn eps0(&self) -> f64 {
        self.epsilons[0]
    }
}

/// Floor on a step's decay probability in [`purification_trace`].
pub const MIN_TRACE_DECAY: f64 = 1e-12;

/// Iterates the purification map `successes` times after the first decay.
///
/// The first step evolves `Ψ0` under `H3` for `π/(2c√p)` and conditions on
/// decay. Each further step evolves under [`h3_purify`] built from the current
/// `(c1, c2)` for `t0`, conditions on decay, and records `|c2|²`.
pub fn purification_trace(params: &ReducedParams, t0: f64, successes: usize) -> Result<PurificationTrace> {
    if !(t0 > 0.0) {
        return Err(Error::param(format!("t0 must be positive, got {t0}")));
    }
    let t_first = params
        .resonance_time()
        .ok_or_else(|| Error::param("purification needs p > 0"))?;
    let condition = |s: ReducedState| -> Result<(Complex64, Complex64, f64)> {
        let decay = s.c1.norm_sqr() + s.c2.norm_sqr();
        if decay < MIN_TRACE_DECAY {
            return Err(Error::Numerical(format!("decay probability {decay:e} too small to condition on")));
        }
        let k = decay.sqrt();
        Ok((s.c1 / k, s.c2 / k, decay))
    };

    let (mut c1, mut c2, d) = condition(propagate3(params, t_first)?)?;
    let mut trace = PurificationTrace {
        t_first,
        epsilons: vec![c2.norm_sqr()],
        c1_track: vec![c1],
        decay_probs: vec![d],
    };
    for _ in 0..successes {
        let h = h3_purify(params.c, c1, c2)?;
        let (n1, n2, d) = condition(expm_first_column_hermitian(h, t0))?;
        c1 = n1;
        c2 = n2;
        trace.epsilons.push(c2.norm_sqr());
        trace.c1_track.push(c1);
        trace.decay_probs.push(d);
    }
    Ok(trace)
}

/// `(1 - ε₀^M)^M`.
pub fn success_prob(eps0: f64, m: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps0) {
        return Err(Error::param(format!("eps0 must lie in [0, 1], got {eps0}")));
    }
    if m == 0 {
        return Err(Error::param("M must be >= 1"));
    }
    Ok((1.0 - eps0.powi(m as i32)).powi(m as i32))
}

/// Which data table to produce.
#[derive(Debug, Clone, PartialEq)]
pub enum Figure {
    /// `(t, |c1|², |c2|²)` over a time grid.
    Amplitudes { params: ReducedParams, grid: Vec<f64> },
    /// `|c2|²` alone over a time grid.
    NonSolution { params: ReducedParams, grid: Vec<f64> },
    /// `(M, P_succ)` for `M = 1..=max_m`.
    SuccessCurve { eps0: f64, max_m: u32 },
}

impl Figure {
    /// Figure ids 2, 3, 4 with their default parameters.
    pub fn by_id(id: u8, c: f64, p: f64, grid: Vec<f64>, eps0: f64) -> Result<Self> {
        match id {
            2 => Ok(Figure::Amplitudes { params: ReducedParams::new(c, p)?, grid }),
            3 => Ok(Figure::NonSolution { params: ReducedParams::new(c, p)?, grid }),
            4 => Ok(Figure::SuccessCurve { eps0, max_m: 20 }),
            other => Err(Error::param(format!("unknown figure id {other}; expected 2, 3 or 4"))),
        }
    }
}

/// A small numeric table destined for CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_sig(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros trimmed.
pub fn format_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{:.*e}", (DIGITS - 1) as usize, x)
    }
}

pub fn emit_figure_data(figure: &Figure) -> Result<Table> {
    match figure {
        Figure::Amplitudes { params, grid } => {
            let rows = grid
                .iter()
                .map(|&t| propagate3(params, t).map(|s| vec![t, s.c1.norm_sqr(), s.c2.norm_sqr()]))
                .collect::<Result<_>>()?;
            Ok(Table { columns: vec!["t", "c1_sq", "c2_sq"], rows })
        }
        Figure::NonSolution { params, grid } => {
            let rows = grid
                .iter()
                .map(|&t| propagate3(params, t).map(|s| vec![t, s.c1.norm_sqr(), s.c2.norm_sqr()]))
                .collect::<Result<_>>()?;
            Ok(Table { columns: vec!["t", "c1_sq", "c2_sq"], rows })
        }
        Figure::SuccessCurve { eps0, max_m } => {
            let rows = (1..=*max_m)
                .map(|m| success_prob(*eps0, m).map(|p| vec![m as f64, p]))
                .collect::<Result<_>>()?;
            Ok(Table { columns: vec!["M", "P_succ"], rows })
        }
    }
}

/// `points` evenly spaced times on `[0, t_max]`.
pub fn linear_grid(t_max: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(t_max > 0.0) {
        return Err(Error::param(format!("grid needs t_max > 0 and >= 2 points, got {t_max}, {points}")));
    }
    Ok((0..points).map(|i| t_max * i as f64 / (points - 1) as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::Matrix2;
    use proptest::prelude::*;

    const C: f64 = 0.02;

    fn params(p: f64) -> ReducedParams {
        ReducedParams::new(C, p).unwrap()
    }

    /// Independent oracle: classical RK4 on i dc/dt = H c.
    fn rk4(h: &Matrix3<f64>, t: f64, steps: usize) -> [Complex64; 3] {
        let dt = t / steps as f64;
        let mi = Complex64::new(0.0, -1.0);
        let f = |y: &[Complex64; 3]| -> [Complex64; 3] {
            let mut out = [Complex64::new(0.0, 0.0); 3];
            for r in 0..3 {
                out[r] = mi * (0..3).map(|s| y[s] * h[(r, s)]).sum::<Complex64>();
            }
            out
        };
        let mut y = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
        let axpy = |y: &[Complex64; 3], k: &[Complex64; 3], a: f64| [y[0] + k[0] * a, y[1] + k[1] * a, y[2] + k[2] * a];
        for _ in 0..steps {
            let k1 = f(&y);
            let k2 = f(&axpy(&y, &k1, dt / 2.0));
            let k3 = f(&axpy(&y, &k2, dt / 2.0));
            let k4 = f(&axpy(&y, &k3, dt));
            for i in 0..3 {
                y[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
            }
        }
        y
    }

    #[test]
    fn h3_examples() {
        let m = h3(&ReducedParams::new(0.3, 1.0).unwrap());
        assert_eq!(m, Matrix3::new(-0.5, 0.3, 0.0, 0.3, -0.5, 0.0, 0.0, 0.0, 0.5));
        let m0 = h3(&ReducedParams::new(0.3, 0.0).unwrap());
        assert_eq!(m0[(0, 1)], 0.0);
        assert_eq!(m0[(0, 2)], 0.3);
        let m27 = h3(&params(1.0 / 27.0));
        assert_abs_diff_eq!(m27[(0, 1)], 3.849_001_794_597_505e-3, epsilon = 1e-15);
        assert_abs_diff_eq!(m27[(0, 2)], 1.962_613_525_850_632_7e-2, epsilon = 1e-15);
        assert_eq!(m27, m27.transpose());
        assert!(ReducedParams::new(0.0, 0.5).is_err());
        assert!(ReducedParams::new(0.1, 1.5).is_err());
    }

    #[test]
    fn propagate3_basics() {
        let s = propagate3(&params(0.3), 0.0).unwrap();
        assert_abs_diff_eq!(s.c0.re, 1.0, epsilon = 1e-14);
        assert!(s.c1.norm() < 1e-14 && s.c2.norm() < 1e-14);

        let full = propagate3(&params(1.0), PI / (2.0 * C)).unwrap();
        assert_abs_diff_eq!(full.c1.norm_sqr(), 1.0, epsilon = 1e-12);
        assert!(propagate3(&params(0.5), -1.0).is_err());
    }

    #[test]
    fn propagate3_matches_rk4() {
        for (p, t) in [(1.0 / 27.0, 408.07), (3.0 / 8.0, 128.25), (0.5, 50.0), (0.0, 300.0)] {
            let s = propagate3(&params(p), t).unwrap();
            let y = rk4(&h3(&params(p)), t, 160_000);
            for (a, b) in [s.c0, s.c1, s.c2].iter().zip(&y) {
                assert!((a - b).norm() < 1e-9, "p={p} t={t}: {}", (a - b).norm());
            }
        }
    }

    #[test]
    fn resonance_peak_for_smallest_nonzero_p() {
        let p = params(1.0 / 27.0);
        let t_res = p.resonance_time().unwrap();
        assert_abs_diff_eq!(t_res, 408.104_856_952_699, epsilon = 1e-6);
        let s = propagate3(&p, t_res).unwrap();
        assert!(s.c1.norm_sqr() > 0.9);
        assert!(s.c2.norm_sqr() < 0.01 * s.c1.norm_sqr());
    }

    #[test]
    fn closed_form_amplitude_matches_eigendecomposition() {
        for p in [1.0 / 27.0, 1.0 / 18.0, 0.25, 3.0 / 8.0, 0.9] {
            for t in [0.0, 1.0, 100.0, 408.07, 1000.0] {
                let a = c1_analytic(&params(p), t).unwrap();
                let b = propagate3(&params(p), t).unwrap().c1;
                assert!((a - b).norm() < 1e-10, "p={p} t={t}: {a} vs {b}");
            }
        }
        assert_eq!(c1_analytic(&params(0.0), 37.0).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn offres_decay_examples() {
        assert_eq!(offres_decay(C, 0.0), 0.0);
        assert_abs_diff_eq!(offres_ceiling(C), 1.597_444_089_456_869e-3, epsilon = 1e-15);
        let t_peak = PI / 2.0 / (0.25 + C * C).sqrt();
        assert_abs_diff_eq!(offres_decay(C, t_peak), offres_ceiling(C), epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn offres_matches_two_level_eigenpropagation(c in 0.001f64..0.1, t in 0.0f64..2000.0) {
            let h = Matrix2::new(-0.5, c, c, 0.5);
            let eig = SymmetricEigen::new(h);
            let v = eig.eigenvectors;
            let amp: Complex64 = (0..2)
                .map(|s| Complex64::from_polar(v[(1, s)] * v[(0, s)], -eig.eigenvalues[s] * t))
                .sum();
            prop_assert!((amp.norm_sqr() - offres_decay(c, t)).abs() < 1e-12);
            prop_assert!(offres_decay(c, t) <= offres_ceiling(c) + 1e-15);
        }

        #[test]
        fn propagate3_normalized_and_trace(c in 0.001f64..0.1, p in 0.0f64..=1.0, t in 0.0f64..3000.0) {
            let prm = ReducedParams::new(c, p).unwrap();
            prop_assert!((propagate3(&prm, t).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
            prop_assert!((h3_eigenvalues(&prm).sum() + 0.5).abs() < 1e-12);
            // purification form with real (√p, √(1-p)) reproduces H3 exactly
            let hp = h3_purify(c, Complex64::new(p.sqrt(), 0.0), Complex64::new((1.0 - p).sqrt(), 0.0)).unwrap();
            let h = h3(&prm);
            for r in 0..3 { for s in 0..3 {
                prop_assert_eq!(hp[(r, s)], Complex64::new(h[(r, s)], 0.0));
            }}
        }

        #[test]
        fn h3_purify_is_hermitian(re1 in -1.0f64..1.0, im1 in -1.0f64..1.0, re2 in -1.0f64..1.0, im2 in -1.0f64..1.0) {
            let a = Complex64::new(re1, im1);
            let b = Complex64::new(re2, im2);
            let k = (a.norm_sqr() + b.norm_sqr()).sqrt();
            prop_assume!(k > 1e-3);
            let m = h3_purify(C, a / k, b / k).unwrap();
            prop_assert!((m - m.adjoint()).norm() < 1e-15);
        }
    }

    #[test]
    fn h3_purify_rejects_unnormalized_and_reduces() {
        assert!(h3_purify(C, Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)).is_err());
        let m = h3_purify(C, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(m[(0, 2)], Complex64::new(0.0, 0.0));
        assert_eq!(m[(0, 1)], Complex64::new(C, 0.0));
    }

    #[test]
    fn purification_errors_shrink_geometrically() {
        let t0 = PI / (2.0 * C);
        for p in [1.0 / 27.0, 1.0 / 18.0, 0.25, 3.0 / 8.0] {
            let tr = purification_trace(&params(p), t0, 6).unwrap();
            let eps = &tr.epsilons;
            assert_eq!(eps.len(), 7);
            assert!(eps.windows(2).all(|w| w[1] < w[0]), "p={p}: {eps:?}");
            for m in 1..=6 {
                assert!(eps[m] <= tr.eps0().powi(m as i32), "p={p} m={m}");
            }
        }
    }

    #[test]
    fn purification_reproduces_reported_error_triple() {
        let tr = purification_trace(&params(1.0 / 27.0), PI / (2.0 * C), 2).unwrap();
        let reported = [3.85e-4, 1.54e-7, 6.18e-11];
        for (got, want) in tr.epsilons.iter().zip(reported) {
            assert!((got / want - 1.0).abs() < 5e-3, "{got} vs {want}");
        }
    }

    #[test]
    fn purification_trace_preconditions() {
        assert!(purification_trace(&params(0.0), 10.0, 1).is_err());
        assert!(purification_trace(&params(0.5), 0.0, 1).is_err());
    }

    #[test]
    fn success_prob_examples() {
        assert_eq!(success_prob(0.0, 7).unwrap(), 1.0);
        assert_abs_diff_eq!(success_prob(0.1, 1).unwrap(), 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(success_prob(0.1, 3).unwrap(), 0.997_002_999, epsilon = 1e-15);
        assert!(success_prob(1.5, 1).is_err());
        assert!(success_prob(0.1, 0).is_err());
    }

    #[test]
    fn figure_tables() {
        let f4 = emit_figure_data(&Figure::by_id(4, C, 1.0 / 27.0, vec![], 0.1).unwrap()).unwrap();
        assert_eq!(f4.rows.len(), 20);
        assert_eq!(f4.rows[0], vec![1.0, 0.9]);
        assert!(f4.to_csv().starts_with("M,P_succ\n1,0.9\n2,0.9801\n"));

        let grid = linear_grid(1200.0, 2001).unwrap();
        let f2 = emit_figure_data(&Figure::by_id(2, C, 1.0 / 27.0, grid.clone(), 0.1).unwrap()).unwrap();
        let c1 = f2.column("c1_sq").unwrap();
        let (i, peak) = c1.iter().enumerate().fold((0, 0.0), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
        assert!(peak > 0.9);
        assert!((grid[i] - 408.0).abs() < 20.0);
        let f3 = emit_figure_data(&Figure::by_id(3, C, 1.0 / 27.0, grid, 0.1).unwrap()).unwrap();
        let c2 = f3.column("c2_sq").unwrap();
        assert!(c2.iter().all(|&x| x < 0.01));
        assert!(c2[i] < c1[i]);
        assert!(Figure::by_id(5, C, 0.5, vec![], 0.1).is_err());
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(0.9), "0.9");
        assert_eq!(format_sig(408.0), "408");
        assert_eq!(format_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig(1.5e-7), "1.50000000000e-7");
        assert_eq!(format_sig(0.0), "0");
    }
}
