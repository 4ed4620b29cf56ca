//! Round-by-round driver: resonance time selection, single-shot probe
//! measurements, purification, zero-p_k detection and solution read-out.

use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{
    collapse_probe, decayed_register, evolve_exact_with, evolve_trotter, probe_ground_population, subspace_decompose,
    ExactMethod, SubspaceBasis, SubspaceDecomposition, TrotterOrder,
};
use crate::error::{Error, Result};
use crate::model::{eval_clause, Assignment, Clause, Ec3Instance, Rational, MAX_ENUMERATION_BITS};
use crate::operator::{CouplingGuard, StructuredHamiltonian, DEFAULT_OMEGA};
use crate::rng::{trial_rng, Phase};
use crate::state::{RegisterState, StateVector};

/// Smallest nonzero transition weight a clause can have.
pub const P_MIN: f64 = 1.0 / 27.0;

/// Consecutive no-decay trials that declare a round empty: `ceil(3 / P_MIN)`.
pub const ZERO_PK_STREAK: usize = 81;

/// Slack added to the off-resonant decay ceiling before a round counts as resonant.
pub const CEILING_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeMode {
    /// `t = π / (2c√p_k)` from the classical oracle.
    OracleInformed,
    /// Argmax of the simulated decay profile.
    #[default]
    TimeScan,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evolution {
    Exact { method: ExactMethod },
    Trotter { steps: usize, order: TrotterOrder },
}

impl Default for Evolution {
    fn default() -> Self {
        Evolution::Exact { method: ExactMethod::Auto }
    }
}

impl Evolution {
    pub fn apply(&self, h: &StructuredHamiltonian, v: &StateVector, t: f64) -> Result<StateVector> {
        match *self {
            Evolution::Exact { method } => evolve_exact_with(h, v, t, method),
            Evolution::Trotter { steps, order } => evolve_trotter(h, v, t, steps, order),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub omega: f64,
    pub c: f64,
    pub t_mode: TimeMode,
    /// Probe decays wanted per round, the first one included. `None` means the clause count.
    pub purify_successes: Option<usize>,
    pub max_trials_per_round: usize,
    pub seed: u64,
    pub evolution: Evolution,
    pub scan_points: usize,
    /// Upper end of the scan grid; `None` means `π / (c √P_MIN)`.
    pub scan_t_max: Option<f64>,
    /// Purification evolution time; `None` means `π / (2c)`.
    pub t0: Option<f64>,
    /// Relative weight cut for [`extract_assignments`].
    pub extract_threshold: f64,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        ProtocolParams {
            omega: DEFAULT_OMEGA,
            c: 0.02,
            t_mode: TimeMode::TimeScan,
            purify_successes: None,
            max_trials_per_round: 10_000,
            seed: 0,
            evolution: Evolution::default(),
            scan_points: 512,
            scan_t_max: None,
            t0: None,
            extract_threshold: 0.5,
        }
    }
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64, name: &str| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::param(format!("{name} must be positive and finite, got {x}")))
            }
        };
        positive(self.omega, "omega")?;
        positive(self.c, "c")?;
        if let Some(t) = self.scan_t_max {
            positive(t, "scan t_max")?;
        }
        if let Some(t) = self.t0 {
            positive(t, "t0")?;
        }
        if self.max_trials_per_round == 0 {
            return Err(Error::param("max_trials_per_round must be >= 1"));
        }
        if self.scan_points == 0 {
            return Err(Error::param("scan_points must be >= 1"));
        }
        if !(self.extract_threshold > 0.0 && self.extract_threshold < 1.0) {
            return Err(Error::param(format!("threshold must lie in (0, 1), got {}", self.extract_threshold)));
        }
        if let Evolution::Trotter { steps: 0, .. } = self.evolution {
            return Err(Error::param("Trotter steps must be >= 1"));
        }
        Ok(())
    }

    /// Copy with every defaulted field filled in for an instance of `m` clauses.
    pub fn resolved(&self, m: usize) -> ProtocolParams {
        ProtocolParams {
            purify_successes: Some(self.purify_successes.unwrap_or(m)),
            scan_t_max: Some(self.scan_t_max()),
            t0: Some(self.t0()),
            ..self.clone()
        }
    }

    pub fn scan_t_max(&self) -> f64 {
        self.scan_t_max.unwrap_or(PI / (self.c * P_MIN.sqrt()))
    }

    pub fn t0(&self) -> f64 {
        self.t0.unwrap_or(PI / (2.0 * self.c))
    }

    /// Largest probe decay probability when no register state is resonant.
    pub fn decay_ceiling(&self) -> f64 {
        let detuning = self.omega / 2.0 - 1.0;
        self.c * self.c / (detuning * detuning + self.c * self.c)
    }

    /// `scan_points` evenly spaced times on `(0, t_max]`.
    pub fn scan_grid(&self) -> Vec<f64> {
        let t_max = self.scan_t_max();
        let n = self.scan_points;
        (1..=n).map(|i| t_max * i as f64 / n as f64).collect()
    }
}

/// `|1⟩ ⊗ |0⟩ ⊗ problem_state`.
pub fn prepare_round_input(problem_state: &RegisterState) -> Result<StateVector> {
    let nrm = problem_state.norm_sqr();
    if (nrm - 1.0).abs() > 1e-9 {
        return Err(Error::param(format!("problem state has squared norm {nrm}, expected 1")));
    }
    Ok(StateVector::product(1, 0, problem_state))
}

/// `π / (2c√p)`.
pub fn resonance_evolution_time(p: Rational, c: f64) -> Result<f64> {
    if *p.numer() == 0 {
        return Err(Error::param("resonance time is undefined for p = 0"));
    }
    if !(c > 0.0) {
        return Err(Error::param(format!("coupling c must be positive, got {c}")));
    }
    let p = *p.numer() as f64 / *p.denom() as f64;
    Ok(PI / (2.0 * c * p.sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub grid: Vec<f64>,
    /// Probe ground-state population after evolving to each grid time.
    pub decay: Vec<f64>,
    pub t_best: f64,
    pub max_decay: f64,
}

/// Decay profile of `state` over an ascending time grid.
pub fn time_scan(state: &StateVector, h: &StructuredHamiltonian, grid: &[f64], evolution: &Evolution) -> Result<ScanResult> {
    if grid.is_empty() {
        return Err(Error::param("time grid is empty"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("time grid must be strictly ascending"));
    }
    let decay = grid
        .par_iter()
        .map(|&t| evolution.apply(h, state, t).map(|v| probe_ground_population(&v)))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, &d) in decay.iter().enumerate() {
        if d > decay[best] {
            best = i;
        }
    }
    Ok(ScanResult { grid: grid.to_vec(), t_best: grid[best], max_decay: decay[best], decay })
}

/// Classical knowledge about one round, used only for time selection and bookkeeping.
#[derive(Debug, Clone)]
pub struct RoundOracle {
    /// `None` once an earlier prefix is already unsatisfiable.
    pub p_k: Option<Rational>,
    pub basis: SubspaceBasis,
}

impl RoundOracle {
    /// Oracle for round `k` (1-based).
    pub fn new(instance: &Ec3Instance, k: usize) -> Result<Self> {
        if k == 0 || k > instance.m() {
            return Err(Error::param(format!("round {k} outside 1..={}", instance.m())));
        }
        let n = instance.n();
        let prev = instance.satisfying_indices(k - 1)?;
        let clause = instance.clauses()[k - 1];
        let (sol, nonsol): (Vec<u64>, Vec<u64>) = prev.iter().partition(|&&j| clause.satisfied_by_index(n, j));
        let p_k = (!prev.is_empty()).then(|| Rational::new(sol.len() as u64, prev.len() as u64));
        let basis = SubspaceBasis {
            phi_prev: RegisterState::uniform_over(n, &prev),
            phi_sol: RegisterState::uniform_over(n, &sol),
            phi_nonsol: RegisterState::uniform_over(n, &nonsol),
        };
        Ok(RoundOracle { p_k, basis })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Projected,
    ZeroPk,
    BudgetExhausted,
}

/// One purification trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PurificationStep {
    pub success: bool,
    /// Register weights on the round's solution and non-solution states after the trial.
    pub c1_sq: Option<f64>,
    pub c2_sq: Option<f64>,
}

mod opt_rational {
    use super::Rational;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(r) => s.serialize_str(&format!("{}/{}", r.numer(), r.denom())),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| s.parse::<Rational>().map_err(D::Error::custom))
            .transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub k: usize,
    pub clause: Clause,
    #[serde(with = "opt_rational")]
    pub p_k: Option<Rational>,
    /// Evolution time used for the search trials.
    pub t: f64,
    /// Peak of the decay profile when the time was scanned.
    pub scan_max_decay: Option<f64>,
    /// Probe decay probability at `t`.
    pub decay_probability: f64,
    pub resonant: bool,
    pub search_trials: usize,
    pub trials_to_first_decay: Option<usize>,
    pub purification: Vec<PurificationStep>,
    pub purification_successes: usize,
    pub purification_complete: bool,
    /// Decomposition right after the first decay, before purification.
    pub first_decay_decomposition: Option<SubspaceDecomposition>,
    pub final_decomposition: Option<SubspaceDecomposition>,
    pub verdict: Verdict,
    /// Whether the verdict agrees with the oracle's `p_k`.
    pub oracle_consistent: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct RoundOutcome {
    pub record: RoundRecord,
    /// Register state handed to the next round; present iff the verdict is `Projected`.
    pub next_state: Option<RegisterState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PurifySettings {
    pub t0: f64,
    pub successes_target: usize,
    pub max_trials: usize,
    pub evolution: Evolution,
    pub seed: u64,
    pub round: usize,
}

#[derive(Debug, Clone)]
pub struct PurifyOutcome {
    /// Collapsed full state after the last success (the input when none).
    pub state: StateVector,
    pub iterations: Vec<PurificationStep>,
    pub successes: usize,
    pub complete: bool,
}

fn draw_decay<R: Rng>(p0: f64, rng: &mut R) -> bool {
    let u: f64 = rng.random();
    u < p0
}

fn weights(v: &StateVector, basis: Option<&SubspaceBasis>) -> Result<(Option<f64>, Option<f64>)> {
    match basis {
        Some(b) => {
            let d = subspace_decompose(v, b)?;
            Ok((Some(d.c1_sq()), Some(d.c2_sq())))
        }
        None => Ok((None, None)),
    }
}

/// Repeated re-prepare / evolve / measure on a post-decay state.
///
/// Each trial starts from `|1,0,φ⟩` with `φ` the current register; a decay
/// replaces `φ`, a non-decay leaves it as it was.
pub fn purify(
    state: &StateVector,
    h: &StructuredHamiltonian,
    settings: &PurifySettings,
    basis: Option<&SubspaceBasis>,
) -> Result<PurifyOutcome> {
    if !(settings.t0 > 0.0) {
        return Err(Error::param(format!("t0 must be positive, got {}", settings.t0)));
    }
    let mut out = PurifyOutcome { state: state.clone(), iterations: Vec::new(), successes: 0, complete: true };
    if settings.successes_target == 0 {
        return Ok(out);
    }
    let mut register = decayed_register(state)?;
    let mut evolved: Option<(StateVector, f64)> = None;
    for trial in 0..settings.max_trials {
        if out.successes == settings.successes_target {
            break;
        }
        if evolved.is_none() {
            let psi = settings.evolution.apply(h, &StateVector::product(1, 0, &register), settings.t0)?;
            let p0 = probe_ground_population(&psi);
            evolved = Some((psi, p0));
        }
        let (psi, p0) = evolved.as_ref().expect("evolved state cached above");
        let mut rng = trial_rng(settings.seed, settings.round, Phase::Purify, trial);
        let success = draw_decay(*p0, &mut rng);
        if success {
            let (collapsed, _) = collapse_probe(psi, 0)?;
            register = decayed_register(&collapsed)?;
            out.state = collapsed;
            out.successes += 1;
            evolved = None;
        }
        let (c1_sq, c2_sq) = weights(&out.state, basis)?;
        out.iterations.push(PurificationStep { success, c1_sq, c2_sq });
    }
    out.complete = out.successes == settings.successes_target;
    Ok(out)
}

/// Runs round `k` (1-based) on `problem_state`.
///
/// `params.purify_successes` is taken as already resolved; `None` counts as 1.
pub fn run_round(
    problem_state: &RegisterState,
    clause: Clause,
    k: usize,
    params: &ProtocolParams,
    oracle: Option<&RoundOracle>,
) -> Result<RoundOutcome> {
    params.validate()?;
    let n = problem_state.n();
    let h = StructuredHamiltonian::for_clause(&clause, n, params.omega, params.c, CouplingGuard::Default)?;
    let input = prepare_round_input(problem_state)?;
    let p_k = oracle.and_then(|o| o.p_k);
    if params.t_mode == TimeMode::OracleInformed && oracle.is_none() {
        return Err(Error::param("oracle-informed timing needs the classical oracle"));
    }

    let (t, scan_max_decay, resonant) = match (params.t_mode, p_k) {
        (TimeMode::OracleInformed, Some(p)) if *p.numer() > 0 => (resonance_evolution_time(p, params.c)?, None, true),
        _ => {
            let scan = time_scan(&input, &h, &params.scan_grid(), &params.evolution)?;
            let resonant = scan.max_decay > params.decay_ceiling() + CEILING_SLACK;
            (scan.t_best, Some(scan.max_decay), resonant)
        }
    };
    let psi = params.evolution.apply(&h, &input, t)?;
    let p0 = probe_ground_population(&psi);

    let mut search_trials = 0;
    let mut streak = 0;
    let mut decayed = None;
    let mut zero_pk = false;
    for trial in 0..params.max_trials_per_round {
        search_trials = trial + 1;
        let mut rng = trial_rng(params.seed, k, Phase::Search, trial);
        if draw_decay(p0, &mut rng) {
            if resonant {
                decayed = Some(collapse_probe(&psi, 0)?.0);
                break;
            }
            streak = 0;
        } else {
            streak += 1;
            if !resonant && streak >= ZERO_PK_STREAK {
                zero_pk = true;
                break;
            }
        }
    }

    let basis = oracle.map(|o| &o.basis);
    let mut record = RoundRecord {
        k,
        clause,
        p_k,
        t,
        scan_max_decay,
        decay_probability: p0,
        resonant,
        search_trials,
        trials_to_first_decay: decayed.as_ref().map(|_| search_trials),
        purification: Vec::new(),
        purification_successes: 0,
        purification_complete: true,
        first_decay_decomposition: None,
        final_decomposition: None,
        verdict: Verdict::BudgetExhausted,
        oracle_consistent: None,
    };

    let mut next_state = None;
    if let Some(collapsed) = decayed {
        let settings = PurifySettings {
            t0: params.t0(),
            successes_target: params.purify_successes.unwrap_or(1).saturating_sub(1),
            max_trials: params.max_trials_per_round,
            evolution: params.evolution,
            seed: params.seed,
            round: k,
        };
        record.first_decay_decomposition = basis.map(|b| subspace_decompose(&collapsed, b)).transpose()?;
        let pur = purify(&collapsed, &h, &settings, basis)?;
        record.purification = pur.iterations;
        record.purification_successes = pur.successes;
        record.purification_complete = pur.complete;
        record.final_decomposition = basis.map(|b| subspace_decompose(&pur.state, b)).transpose()?;
        record.verdict = Verdict::Projected;
        next_state = Some(decayed_register(&pur.state)?);
    } else {
        record.final_decomposition = basis.map(|b| subspace_decompose(&psi, b)).transpose()?;
        if zero_pk {
            record.verdict = Verdict::ZeroPk;
        }
    }
    record.oracle_consistent = p_k.map(|p| match record.verdict {
        Verdict::Projected => *p.numer() > 0,
        Verdict::ZeroPk => *p.numer() == 0,
        Verdict::BudgetExhausted => true,
    });
    Ok(RoundOutcome { record, next_state })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedAssignment {
    pub assignment: Assignment,
    pub weight: f64,
}

/// Marginal distribution of the problem register, cut at `threshold · max`.
///
/// Sorted by weight descending, ties by index ascending.
pub fn extract_assignments(state: &StateVector, threshold: f64) -> Result<Vec<WeightedAssignment>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::param(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    let n = state.n();
    let size = 1usize << n;
    let mut marginal = vec![0.0; size];
    for (p, a) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        for (m, amp) in marginal.iter_mut().zip(state.block(p, a)) {
            *m += amp.norm_sqr();
        }
    }
    let max = marginal.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(Vec::new());
    }
    let mut out: Vec<(usize, f64)> =
        marginal.into_iter().enumerate().filter(|&(_, w)| w >= threshold * max).collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(out
        .into_iter()
        .map(|(j, weight)| WeightedAssignment { assignment: Assignment::from_index(j as u64, n), weight })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Sat,
    UnsatDetected,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    /// Parameters with every default resolved.
    pub params: ProtocolParams,
    pub records: Vec<RoundRecord>,
    /// Collapsed state after the last round; present iff every round projected.
    pub final_state: Option<StateVector>,
    /// Extracted assignments that satisfy every clause.
    pub solutions: Vec<WeightedAssignment>,
    /// Extracted assignments that failed the clause check.
    pub rejected: Vec<WeightedAssignment>,
    pub status: RunStatus,
    pub round_seconds: Vec<f64>,
    pub total_seconds: f64,
}

impl RunResult {
    /// Sum of trials to first decay over projected rounds.
    pub fn total_search_trials(&self) -> usize {
        self.records.iter().filter_map(|r| r.trials_to_first_decay).sum()
    }
}

pub fn satisfies_all(instance: &Ec3Instance, assignment: &Assignment) -> Result<bool> {
    for clause in instance.clauses() {
        if !eval_clause(clause, assignment)?.satisfied {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Runs every clause in order from the uniform superposition.
pub fn run_full(instance: &Ec3Instance, params: &ProtocolParams) -> Result<RunResult> {
    params.validate()?;
    let started = Instant::now();
    let params = params.resolved(instance.m());
    let n = instance.n();
    let oracle_available = n <= MAX_ENUMERATION_BITS;
    if params.t_mode == TimeMode::OracleInformed && !oracle_available {
        return Err(Error::EnumerationTooLarge { n, limit: MAX_ENUMERATION_BITS });
    }

    let mut state = RegisterState::uniform(n);
    let mut records = Vec::with_capacity(instance.m());
    let mut round_seconds = Vec::with_capacity(instance.m());
    let mut status = None;
    for (i, &clause) in instance.clauses().iter().enumerate() {
        let k = i + 1;
        let round_start = Instant::now();
        let oracle = oracle_available.then(|| RoundOracle::new(instance, k)).transpose()?;
        let out = run_round(&state, clause, k, &params, oracle.as_ref())?;
        round_seconds.push(round_start.elapsed().as_secs_f64());
        let verdict = out.record.verdict;
        records.push(out.record);
        match verdict {
            Verdict::Projected => state = out.next_state.expect("projected rounds carry a state"),
            Verdict::ZeroPk => {
                status = Some(RunStatus::UnsatDetected);
                break;
            }
            Verdict::BudgetExhausted => {
                status = Some(RunStatus::Inconclusive);
                break;
            }
        }
    }

    let mut result = RunResult {
        params,
        records,
        final_state: None,
        solutions: Vec::new(),
        rejected: Vec::new(),
        status: RunStatus::Inconclusive,
        round_seconds,
        total_seconds: 0.0,
    };
    match status {
        Some(s) => result.status = s,
        None => {
            let final_state = StateVector::product(0, 1, &state);
            for w in extract_assignments(&final_state, result.params.extract_threshold)? {
                if satisfies_all(instance, &w.assignment)? {
                    result.solutions.push(w);
                } else {
                    result.rejected.push(w);
                }
            }
            result.status = if result.solutions.is_empty() { RunStatus::Inconclusive } else { RunStatus::Sat };
            result.final_state = Some(final_state);
        }
    }
    result.total_seconds = started.elapsed().as_secs_f64();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{example_instance, example_instance_reordered};
    use crate::state::basis_index;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    const C: f64 = 0.02;

    fn oracle_params() -> ProtocolParams {
        ProtocolParams { t_mode: TimeMode::OracleInformed, ..ProtocolParams::default() }
    }

    fn unsat4() -> Ec3Instance {
        Ec3Instance::from_triples(4, &[[1, 2, 3], [1, 2, 4], [1, 3, 4], [2, 3, 4]]).unwrap()
    }

    #[test]
    fn prepared_input_layout() {
        let v = prepare_round_input(&RegisterState::uniform(3)).unwrap();
        let a = 1.0 / 8f64.sqrt();
        for j in 0..8 {
            assert_abs_diff_eq!(v.amplitudes()[basis_index(3, 1, 0, j)].re, a, epsilon = 1e-15);
        }
        let elsewhere: f64 = [(0, 0), (0, 1), (1, 1)].iter().map(|&(p, q)| v.block(p, q).iter().map(|x| x.norm_sqr()).sum::<f64>()).sum();
        assert_eq!(elsewhere, 0.0);
        assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-15);

        // register part sits in the ancilla-0 sector, where H_R is -1
        let h = StructuredHamiltonian::for_clause(&Clause::new(1, 2, 3).unwrap(), 3, 1.0, C, CouplingGuard::Default).unwrap();
        assert!(h.register().entries()[..8].iter().all(|&e| e == -1.0));

        let bad = RegisterState::new(3, vec![Complex64::new(1.0, 0.0); 8]).unwrap();
        assert!(prepare_round_input(&bad).is_err());
    }

    #[test]
    fn resonance_times() {
        assert_abs_diff_eq!(resonance_evolution_time(Rational::from_integer(1), C).unwrap(), PI / (2.0 * C), epsilon = 1e-12);
        assert!((resonance_evolution_time(Rational::new(1, 27), C).unwrap() - 408.07).abs() < 0.05);
        assert!((resonance_evolution_time(Rational::new(3, 8), C).unwrap() - 128.25).abs() < 0.01);
        assert!(resonance_evolution_time(Rational::from_integer(0), C).is_err());
    }

    #[test]
    fn scan_separates_resonant_from_empty_rounds() {
        let params = ProtocolParams::default();
        let ev = Evolution::default();
        let clause = Clause::new(1, 2, 3).unwrap();
        let h = StructuredHamiltonian::for_clause(&clause, 4, 1.0, C, CouplingGuard::Default).unwrap();

        // register already inside the clause's solution set: full transfer
        let sols: Vec<u64> = (0..16).filter(|&j| clause.satisfied_by_index(4, j)).collect();
        let v = prepare_round_input(&RegisterState::uniform_over(4, &sols)).unwrap();
        let scan = time_scan(&v, &h, &params.scan_grid(), &ev).unwrap();
        assert!(scan.max_decay > 0.9);

        // register entirely outside it: bounded by the off-resonant ceiling
        let nonsols: Vec<u64> = (0..16).filter(|&j| !clause.satisfied_by_index(4, j)).collect();
        let v = prepare_round_input(&RegisterState::uniform_over(4, &nonsols)).unwrap();
        let scan = time_scan(&v, &h, &params.scan_grid(), &ev).unwrap();
        assert!(scan.max_decay <= 4.0 * C * C / (1.0 + 4.0 * C * C) + 1e-6);
        assert_abs_diff_eq!(params.decay_ceiling(), 4.0 * C * C / (1.0 + 4.0 * C * C), epsilon = 1e-15);

        let zero = time_scan(&v, &h, &[0.0], &ev).unwrap();
        assert_eq!(zero.max_decay, 0.0);
        assert!(time_scan(&v, &h, &[], &ev).is_err());
        assert!(time_scan(&v, &h, &[2.0, 1.0], &ev).is_err());
    }

    #[test]
    fn uniform_round_one_peaks_at_its_transition_weight() {
        let inst = example_instance();
        let h = StructuredHamiltonian::for_clause(&inst.clauses()[0], 8, 1.0, C, CouplingGuard::Default).unwrap();
        let v = prepare_round_input(&RegisterState::uniform(8)).unwrap();
        let scan = time_scan(&v, &h, &ProtocolParams::default().scan_grid(), &Evolution::default()).unwrap();
        assert!((scan.max_decay - 0.375).abs() < 2e-3, "{}", scan.max_decay);
    }

    #[test]
    fn round_one_oracle_mode_projects_onto_satisfying_set() {
        let inst = example_instance();
        let oracle = RoundOracle::new(&inst, 1).unwrap();
        assert_eq!(oracle.p_k, Some(Rational::new(3, 8)));
        let params = ProtocolParams { purify_successes: Some(6), ..oracle_params() };
        let out = run_round(&RegisterState::uniform(8), inst.clauses()[0], 1, &params, Some(&oracle)).unwrap();
        assert_eq!(out.record.verdict, Verdict::Projected);
        assert_eq!(out.record.oracle_consistent, Some(true));
        assert!(out.record.purification_complete);
        let next = out.next_state.unwrap();
        assert!(next.fidelity(&oracle.basis.phi_sol) > 0.99);
        let d = out.record.final_decomposition.unwrap();
        assert!(d.c1_sq() + d.c2_sq() > 0.99);
    }

    #[test]
    fn duplicate_clause_decays_on_first_trial() {
        let inst = Ec3Instance::from_triples(5, &[[1, 2, 3], [1, 2, 3]]).unwrap();
        let oracle = RoundOracle::new(&inst, 2).unwrap();
        assert_eq!(oracle.p_k, Some(Rational::from_integer(1)));
        let phi1 = RoundOracle::new(&inst, 1).unwrap().basis.phi_sol;
        let out = run_round(&phi1, inst.clauses()[1], 2, &oracle_params(), Some(&oracle)).unwrap();
        assert_eq!(out.record.verdict, Verdict::Projected);
        assert_eq!(out.record.trials_to_first_decay, Some(1));
        assert_abs_diff_eq!(out.record.t, PI / (2.0 * C), epsilon = 1e-9);
    }

    #[test]
    fn purify_without_target_is_identity() {
        let inst = example_instance();
        let h = StructuredHamiltonian::for_clause(&inst.clauses()[0], 8, 1.0, C, CouplingGuard::Default).unwrap();
        let v = StateVector::product(0, 1, &RegisterState::uniform(8));
        let settings = PurifySettings {
            t0: PI / (2.0 * C),
            successes_target: 0,
            max_trials: 10,
            evolution: Evolution::default(),
            seed: 0,
            round: 1,
        };
        let out = purify(&v, &h, &settings, None).unwrap();
        assert_eq!(out.state, v);
        assert!(out.iterations.is_empty() && out.complete);
    }

    #[test]
    fn purification_errors_decrease_in_full_simulation() {
        for inst in [example_instance(), example_instance_reordered()] {
            let params = ProtocolParams { purify_successes: Some(5), ..ProtocolParams::default() };
            let res = run_full(&inst, &params).unwrap();
            for r in &res.records {
                let eps: Vec<f64> = r.purification.iter().filter(|s| s.success).map(|s| s.c2_sq.unwrap()).collect();
                let eps0 = r.first_decay_decomposition.unwrap().c2_sq();
                assert_eq!(eps.len(), 4);
                assert!(eps[0] < eps0);
                assert!(eps.windows(2).all(|w| w[1] < w[0]), "round {}: {eps:?}", r.k);
                for (m, e) in eps.iter().enumerate() {
                    assert!(*e <= eps0.powi(m as i32 + 1), "round {} m={}", r.k, m + 1);
                }
                // fidelity with the oracle's satisfying set after four purification successes
                let d = r.final_decomposition.unwrap();
                assert!(d.c1_sq() > 1.0 - 10.0 * eps0.powi(4), "round {}: {}", r.k, 1.0 - d.c1_sq());
            }
        }
    }

    #[test]
    fn extraction() {
        let target = 0b0001_0111;
        let v = StateVector::basis(8, 0, 1, target);
        let got = extract_assignments(&v, 0.5).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].assignment.to_string(), "00010111");
        assert_eq!(got[0].weight, 1.0);

        let three = StateVector::product(0, 1, &RegisterState::uniform_over(3, &[1, 2, 4]));
        let got = extract_assignments(&three, 0.5).unwrap();
        let names: Vec<String> = got.iter().map(|w| w.assignment.to_string()).collect();
        assert_eq!(names, ["001", "010", "100"]);
        assert!(got.iter().all(|w| (w.weight - 1.0 / 3.0).abs() < 1e-12));

        assert!(extract_assignments(&three, 0.0).is_err());
        assert!(extract_assignments(&StateVector::zeros(3), 0.5).unwrap().is_empty());
    }

    #[test]
    fn single_clause_run_returns_all_three() {
        let inst = Ec3Instance::from_triples(3, &[[1, 2, 3]]).unwrap();
        let res = run_full(&inst, &ProtocolParams::default()).unwrap();
        assert_eq!(res.status, RunStatus::Sat);
        let names: Vec<String> = res.solutions.iter().map(|w| w.assignment.to_string()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(sorted, ["001", "010", "100"]);
        assert!(res.solutions.iter().all(|w| (w.weight - 1.0 / 3.0).abs() < 1e-3));
    }

    #[test]
    fn example_instance_run_solves_in_both_orders() {
        for inst in [example_instance(), example_instance_reordered()] {
            let res = run_full(&inst, &ProtocolParams::default()).unwrap();
            assert_eq!(res.status, RunStatus::Sat);
            assert_eq!(res.solutions.len(), 1);
            assert_eq!(res.solutions[0].assignment.to_string(), "00010111");
            assert!(res.solutions[0].weight > 0.99);
            assert!(res.records.iter().all(|r| r.oracle_consistent == Some(true)));
        }
    }

    #[test]
    fn unsat_instance_stops_at_round_four() {
        let res = run_full(&unsat4(), &ProtocolParams::default()).unwrap();
        assert_eq!(res.status, RunStatus::UnsatDetected);
        assert_eq!(res.records.len(), 4);
        let last = res.records.last().unwrap();
        assert_eq!(last.verdict, Verdict::ZeroPk);
        assert_eq!(last.p_k, Some(Rational::from_integer(0)));
        assert!(last.scan_max_decay.unwrap() <= res.params.decay_ceiling() + 1e-6);
        assert!(res.solutions.is_empty());
    }

    #[test]
    fn runs_are_deterministic() {
        let inst = example_instance();
        let a = run_full(&inst, &ProtocolParams { seed: 11, ..ProtocolParams::default() }).unwrap();
        let b = run_full(&inst, &ProtocolParams { seed: 11, ..ProtocolParams::default() }).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.solutions, b.solutions);
    }

    #[test]
    fn params_validation_and_resolution() {
        assert!(ProtocolParams { c: 0.0, ..ProtocolParams::default() }.validate().is_err());
        assert!(ProtocolParams { max_trials_per_round: 0, ..ProtocolParams::default() }.validate().is_err());
        assert!(ProtocolParams { extract_threshold: 1.0, ..ProtocolParams::default() }.validate().is_err());
        let r = ProtocolParams::default().resolved(6);
        assert_eq!(r.purify_successes, Some(6));
        assert_abs_diff_eq!(r.t0.unwrap(), PI / (2.0 * C), epsilon = 1e-12);
        assert_abs_diff_eq!(r.scan_t_max.unwrap(), PI * 27f64.sqrt() / C, epsilon = 1e-9);
        let json = serde_json::to_string(&r).unwrap();
        let back: ProtocolParams = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
