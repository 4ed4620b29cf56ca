//! Cross-checks between the full simulation and the reduced models, and
//! split-operator convergence tables.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{evolve_exact, evolve_trotter, probe_ground_population, subspace_decompose, TrotterOrder};
use crate::error::{Error, Result};
use crate::model::{Ec3Instance, Rational};
use crate::operator::{CouplingGuard, StructuredHamiltonian};
use crate::protocol::{prepare_round_input, RoundOracle};
use crate::reduced::{propagate3, ReducedParams};
use crate::state::StateVector;

/// Largest register accepted by [`cross_validate`].
pub const MAX_FULL_BITS: usize = 12;

pub const DEVIATION_TOL: f64 = 5e-2;
pub const LEAKAGE_TOL: f64 = 5e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossRow {
    pub t: f64,
    pub full: [Complex64; 3],
    pub reduced: [Complex64; 3],
    /// Largest `|full_i - reduced_i|` over the three amplitudes.
    pub deviation: f64,
    pub leakage: f64,
    pub full_decay: f64,
    pub reduced_decay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub k: usize,
    pub p_k: f64,
    pub c: f64,
    pub rows: Vec<CrossRow>,
}

impl CrossValidation {
    fn max_of(&self, f: impl Fn(&CrossRow) -> f64) -> f64 {
        self.rows.iter().map(f).fold(0.0, f64::max)
    }

    pub fn max_deviation(&self) -> f64 {
        self.max_of(|r| r.deviation)
    }

    pub fn max_leakage(&self) -> f64 {
        self.max_of(|r| r.leakage)
    }

    pub fn max_full_decay(&self) -> f64 {
        self.max_of(|r| r.full_decay)
    }

    pub fn max_reduced_decay(&self) -> f64 {
        self.max_of(|r| r.reduced_decay)
    }

    pub fn within_tolerance(&self) -> bool {
        self.max_deviation() < DEVIATION_TOL && self.max_leakage() < LEAKAGE_TOL
    }

    pub fn to_csv(&self) -> String {
        use crate::reduced::format_sig;
        let mut out = String::from("t,full_c0_sq,full_c1_sq,full_c2_sq,red_c0_sq,red_c1_sq,red_c2_sq,deviation,leakage\n");
        for r in &self.rows {
            let cells: Vec<String> = [r.t]
                .into_iter()
                .chain(r.full.iter().map(|a| a.norm_sqr()))
                .chain(r.reduced.iter().map(|a| a.norm_sqr()))
                .chain([r.deviation, r.leakage])
                .map(format_sig)
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn as_f64(p: Rational) -> f64 {
    *p.numer() as f64 / *p.denom() as f64
}

/// Evolves the oracle's `|1,0,φ_{k-1}⟩` under round `k`'s Hamiltonian (ω = 1)
/// and compares its three-level amplitudes with the reduced model at each grid time.
pub fn cross_validate(instance: &Ec3Instance, k: usize, c: f64, grid: &[f64]) -> Result<CrossValidation> {
    let n = instance.n();
    if n > MAX_FULL_BITS {
        return Err(Error::param(format!("full cross-validation limited to n <= {MAX_FULL_BITS}, got {n}")));
    }
    if grid.is_empty() {
        return Err(Error::param("time grid is empty"));
    }
    let oracle = RoundOracle::new(instance, k)?;
    let p_k = oracle
        .p_k
        .ok_or_else(|| Error::param(format!("round {k} follows an unsatisfiable prefix")))?;
    let reduced = ReducedParams::new(c, as_f64(p_k))?;
    let h = StructuredHamiltonian::for_clause(&instance.clauses()[k - 1], n, 1.0, c, CouplingGuard::Default)?;
    let v0 = prepare_round_input(&oracle.basis.phi_prev)?;
    let rows = grid
        .par_iter()
        .map(|&t| {
            let v = evolve_exact(&h, &v0, t)?;
            let d = subspace_decompose(&v, &oracle.basis)?;
            let r = propagate3(&reduced, t)?;
            let full = [d.c0, d.c1, d.c2];
            let red = [r.c0, r.c1, r.c2];
            let deviation = full.iter().zip(&red).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            Ok(CrossRow {
                t,
                full,
                reduced: red,
                deviation,
                leakage: d.leakage,
                full_decay: probe_ground_population(&v),
                reduced_decay: r.c1.norm_sqr() + r.c2.norm_sqr(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CrossValidation { k, p_k: as_f64(p_k), c, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrotterPoint {
    pub steps: usize,
    /// Euclidean distance to the exact propagation.
    pub error: f64,
}

pub fn trotter_convergence(
    h: &StructuredHamiltonian,
    v0: &StateVector,
    t: f64,
    steps: &[usize],
    order: TrotterOrder,
) -> Result<Vec<TrotterPoint>> {
    let exact = evolve_exact(h, v0, t)?;
    steps
        .par_iter()
        .map(|&s| Ok(TrotterPoint { steps: s, error: evolve_trotter(h, v0, t, s, order)?.distance(&exact) }))
        .collect()
}

/// Least-squares slope of `log(error)` against `log(steps)`.
pub fn loglog_slope(points: &[TrotterPoint]) -> Result<f64> {
    if points.len() < 2 || points.iter().any(|p| !(p.error > 0.0)) {
        return Err(Error::param("slope needs at least two points with positive error"));
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.steps as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.error.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::example_instance;
    use crate::reduced::offres_ceiling;
    use crate::state::RegisterState;

    #[test]
    fn zero_weight_round_agrees_under_the_ceiling() {
        let inst = Ec3Instance::from_triples(4, &[[1, 2, 3], [1, 2, 4], [1, 3, 4], [2, 3, 4]]).unwrap();
        let grid: Vec<f64> = (0..200).map(|i| i as f64 * 6.0).collect();
        let cv = cross_validate(&inst, 4, 0.02, &grid).unwrap();
        assert_eq!(cv.p_k, 0.0);
        assert!(cv.max_full_decay() <= offres_ceiling(0.02) + 1e-12);
        assert!(cv.max_reduced_decay() <= offres_ceiling(0.02) + 1e-12);
        // a single surviving basis state: the reduction is exact
        assert!(cv.max_deviation() < 1e-10);
    }

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<TrotterPoint> =
            [16, 32, 64].iter().map(|&s| TrotterPoint { steps: s, error: 3.0 / (s * s) as f64 }).collect();
        assert!((loglog_slope(&pts).unwrap() + 2.0).abs() < 1e-12);
        assert!(loglog_slope(&pts[..1]).is_err());
    }

    #[test]
    fn second_order_converges_quadratically_on_round_one() {
        let inst = example_instance();
        let h = StructuredHamiltonian::for_clause(&inst.clauses()[0], 8, 1.0, 0.02, CouplingGuard::Default).unwrap();
        let v0 = StateVector::product(1, 0, &RegisterState::uniform(8));
        let pts = trotter_convergence(&h, &v0, 128.25, &[64, 128, 256], TrotterOrder::Second).unwrap();
        let slope = loglog_slope(&pts).unwrap();
        assert!((slope + 2.0).abs() < 0.2, "{slope}");
    }

    #[test]
    fn guards() {
        let inst = example_instance();
        assert!(cross_validate(&inst, 1, 0.02, &[]).is_err());
        assert!(cross_validate(&inst, 7, 0.02, &[1.0]).is_err());
        let big = Ec3Instance::from_triples(13, &[[1, 2, 3]]).unwrap();
        assert!(cross_validate(&big, 1, 0.02, &[1.0]).is_err());
    }
}
