//! EC3 instances and the classical oracle.
//!
//! A clause over three distinct bits is satisfied when exactly one of them is
//! set. Bit `z_1` is the leftmost character of an assignment string and the
//! most significant bit of its basis index, so for `n` bits the assignment
//! index of `z_1 z_2 ... z_n` is `sum z_i 2^(n-i)`.
//!
//! Everything that depends on enumerating all `2^n` assignments is guarded by
//! [`MAX_ENUMERATION_BITS`].

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational used for every p_k.
pub type Rational = Ratio<u64>;

/// Largest `n` the brute-force oracle will enumerate.
pub const MAX_ENUMERATION_BITS: usize = 30;

const CHUNK: u64 = 1 << 14;

/// Three distinct 1-based bit positions, stored ascending.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[usize; 3]", into = "[usize; 3]")]
pub struct Clause([usize; 3]);

impl Clause {
    pub fn new(a: usize, b: usize, c: usize) -> Result<Self> {
        let mut idx = [a, b, c];
        idx.sort_unstable();
        if idx[0] == 0 {
            return Err(Error::InvalidClause(format!(
                "bit indices are 1-based, got {a} {b} {c}"
            )));
        }
        if idx[0] == idx[1] || idx[1] == idx[2] {
            return Err(Error::InvalidClause(format!(
                "repeated index within clause {a} {b} {c}"
            )));
        }
        Ok(Clause(idx))
    }

    pub fn indices(&self) -> [usize; 3] {
        self.0
    }

    pub fn max_index(&self) -> usize {
        self.0[2]
    }

    /// Bit mask selecting this clause's bits in an `n`-bit basis index.
    pub fn mask(&self, n: usize) -> u64 {
        self.0.iter().fold(0, |m, &i| m | (1u64 << (n - i)))
    }

    /// Exactly-one-of-three test on a basis index; caller guarantees `max_index <= n`.
    #[inline]
    pub fn satisfied_by_index(&self, n: usize, index: u64) -> bool {
        (index & self.mask(n)).count_ones() == 1
    }
}

impl TryFrom<[usize; 3]> for Clause {
    type Error = Error;
    fn try_from(v: [usize; 3]) -> Result<Self> {
        Clause::new(v[0], v[1], v[2])
    }
}

impl From<Clause> for [usize; 3] {
    fn from(c: Clause) -> Self {
        c.0
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{},{}}}", self.0[0], self.0[1], self.0[2])
    }
}

/// An assignment `z_1 ... z_n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    bits: Vec<bool>,
}

impl Assignment {
    pub fn new(bits: Vec<bool>) -> Self {
        Assignment { bits }
    }

    pub fn from_index(index: u64, n: usize) -> Self {
        let bits = (1..=n).map(|i| (index >> (n - i)) & 1 == 1).collect();
        Assignment { bits }
    }

    pub fn to_index(&self) -> u64 {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Value of the 1-based bit `z_i`.
    pub fn bit(&self, i: usize) -> bool {
        self.bits[i - 1]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Assignment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::param(format!("assignment character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Assignment { bits })
    }
}

impl Serialize for Assignment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Assignment {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Outcome of checking one clause against one assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClauseEval {
    pub satisfied: bool,
    /// Penalty: 0 when satisfied, 1 when violated.
    pub h: u8,
}

pub fn eval_clause(clause: &Clause, assignment: &Assignment) -> Result<ClauseEval> {
    if clause.max_index() > assignment.len() {
        return Err(Error::InvalidInstance(format!(
            "clause {clause} addresses bit {} of a {}-bit assignment",
            clause.max_index(),
            assignment.len()
        )));
    }
    let ones = clause.indices().iter().filter(|&&i| assignment.bit(i)).count();
    let satisfied = ones == 1;
    Ok(ClauseEval {
        satisfied,
        h: u8::from(!satisfied),
    })
}

/// A conjunction of clauses over `n` bits, in application order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ec3Instance {
    n: usize,
    clauses: Vec<Clause>,
}

impl Ec3Instance {
    pub fn new(n: usize, clauses: Vec<Clause>) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInstance(format!("need at least 3 bits, got {n}")));
        }
        if n > 62 {
            return Err(Error::InvalidInstance(format!("{n} bits exceeds the 62-bit index space")));
        }
        if let Some(c) = clauses.iter().find(|c| c.max_index() > n) {
            return Err(Error::InvalidInstance(format!("clause {c} exceeds n = {n}")));
        }
        Ok(Ec3Instance { n, clauses })
    }

    /// Builds an instance from raw index triples.
    pub fn from_triples(n: usize, triples: &[[usize; 3]]) -> Result<Self> {
        let clauses = triples
            .iter()
            .map(|t| Clause::new(t[0], t[1], t[2]))
            .collect::<Result<Vec<_>>>()?;
        Ec3Instance::new(n, clauses)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Positions (0-based) of clauses that repeat an earlier clause exactly.
    ///
    /// Duplicates are legal; they produce a round with p_k = 1.
    pub fn duplicate_clauses(&self) -> Vec<usize> {
        let mut seen = HashSet::new();
        self.clauses
            .iter()
            .enumerate()
            .filter(|(_, c)| !seen.insert(**c))
            .map(|(i, _)| i)
            .collect()
    }

    /// Same instance with every bit index relabelled by `perm` (1-based, `perm[i-1]` is the image of `i`).
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: perm.len() });
        }
        let clauses = self
            .clauses
            .iter()
            .map(|c| {
                let [a, b, d] = c.indices();
                Clause::new(perm[a - 1], perm[b - 1], perm[d - 1])
            })
            .collect::<Result<Vec<_>>>()?;
        Ec3Instance::new(self.n, clauses)
    }

    fn check_enumerable(&self) -> Result<()> {
        if self.n > MAX_ENUMERATION_BITS {
            return Err(Error::EnumerationTooLarge { n: self.n, limit: MAX_ENUMERATION_BITS });
        }
        Ok(())
    }

    /// Index of the first clause the basis state violates, or `m` if none.
    #[inline]
    fn first_violation(&self, masks: &[u64], index: u64) -> usize {
        masks
            .iter()
            .position(|&m| (index & m).count_ones() != 1)
            .unwrap_or(masks.len())
    }

    fn masks(&self) -> Vec<u64> {
        self.clauses.iter().map(|c| c.mask(self.n)).collect()
    }

    /// Ascending basis indices that satisfy the first `k` clauses.
    pub fn satisfying_indices(&self, k: usize) -> Result<Vec<u64>> {
        self.check_enumerable()?;
        if k > self.m() {
            return Err(Error::param(format!("prefix length {k} exceeds M = {}", self.m())));
        }
        let masks = &self.masks()[..k];
        let total = 1u64 << self.n;
        let chunks = total.div_ceil(CHUNK);
        // Chunks are collected in order, so the result does not depend on scheduling.
        let parts: Vec<Vec<u64>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let lo = c * CHUNK;
                let hi = (lo + CHUNK).min(total);
                (lo..hi)
                    .filter(|&idx| self.first_violation(masks, idx) == k)
                    .collect()
            })
            .collect();
        Ok(parts.concat())
    }
}

/// All assignments satisfying every clause, ascending by index. Empty means UNSAT.
pub fn brute_force_solutions(instance: &Ec3Instance) -> Result<Vec<Assignment>> {
    Ok(instance
        .satisfying_indices(instance.m())?
        .into_iter()
        .map(|i| Assignment::from_index(i, instance.n()))
        .collect())
}

/// N_k: number of assignments satisfying clauses 1..=k. N_0 = 2^n.
pub fn count_satisfying_prefix(instance: &Ec3Instance, k: usize) -> Result<u64> {
    if k > instance.m() {
        return Err(Error::param(format!("prefix length {k} exceeds M = {}", instance.m())));
    }
    Ok(prefix_counts(instance)?[k])
}

/// N_0, N_1, ..., N_M in one pass over the assignment space.
pub fn prefix_counts(instance: &Ec3Instance) -> Result<Vec<u64>> {
    instance.check_enumerable()?;
    let masks = instance.masks();
    let m = masks.len();
    let total = 1u64 << instance.n();
    let chunks = total.div_ceil(CHUNK);
    let hist = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut h = vec![0u64; m + 1];
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(total);
            for idx in lo..hi {
                h[instance.first_violation(&masks, idx)] += 1;
            }
            h
        })
        .reduce(
            || vec![0u64; m + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    // N_k counts states whose first violation is at position >= k.
    let mut counts = vec![0u64; m + 1];
    let mut acc = 0;
    for k in (0..=m).rev() {
        acc += hist[k];
        counts[k] = acc;
    }
    Ok(counts)
}

/// Exact per-round transition fractions p_k = N_k / N_{k-1}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbabilitySequence {
    /// `N_0 = 2^n, N_1, ..., N_M`.
    pub counts: Vec<u64>,
    /// `p_1 ... p_M`; `None` once an earlier prefix is already unsatisfiable.
    pub values: Vec<Option<Rational>>,
}

impl ProbabilitySequence {
    pub fn p(&self, k: usize) -> Option<Rational> {
        self.values[k - 1]
    }

    /// First round whose p_k is zero, if any (1-based).
    pub fn first_zero_round(&self) -> Option<usize> {
        self.values
            .iter()
            .position(|v| matches!(v, Some(r) if *r.numer() == 0))
            .map(|i| i + 1)
    }

    /// Product of all defined p_k.
    pub fn product(&self) -> Rational {
        self.values
            .iter()
            .flatten()
            .fold(Rational::from_integer(1), |acc, &p| acc * p)
    }

    /// Σ 1/p_k over rounds with nonzero p_k.
    pub fn inverse_sum(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .filter(|p| *p.numer() > 0)
            .map(|p| *p.denom() as f64 / *p.numer() as f64)
            .sum()
    }
}

pub fn p_sequence(instance: &Ec3Instance) -> Result<ProbabilitySequence> {
    let counts = prefix_counts(instance)?;
    let values = counts
        .windows(2)
        .map(|w| (w[0] > 0).then(|| Rational::new(w[1], w[0])))
        .collect();
    Ok(ProbabilitySequence { counts, values })
}

/// Number of the clause's bits that already occur in some prior clause.
///
/// Returns 0 for an empty prior list.
pub fn shared_bits(clause: &Clause, priors: &[Clause]) -> u8 {
    let seen: HashSet<usize> = priors.iter().flat_map(|c| c.indices()).collect();
    clause.indices().iter().filter(|i| seen.contains(i)).count() as u8
}

/// What the overlap count S allows p_k to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PLowerBound {
    Exact(Rational),
    AtLeast(Rational),
    ZeroOrAtLeast(Rational),
}

impl PLowerBound {
    pub fn admits(&self, p: Rational) -> bool {
        match *self {
            PLowerBound::Exact(v) => p == v,
            PLowerBound::AtLeast(v) => p >= v,
            PLowerBound::ZeroOrAtLeast(v) => *p.numer() == 0 || p >= v,
        }
    }
}

pub fn p_lower_bound(shared: u8) -> Result<PLowerBound> {
    Ok(match shared {
        0 => PLowerBound::Exact(Rational::new(3, 8)),
        1 => PLowerBound::AtLeast(Rational::new(1, 4)),
        2 => PLowerBound::ZeroOrAtLeast(Rational::new(1, 18)),
        3 => PLowerBound::ZeroOrAtLeast(Rational::new(1, 27)),
        s => return Err(Error::param(format!("shared-bit count {s} outside 0..=3"))),
    })
}

/// Parses the line-oriented instance format:
///
/// ```text
/// c optional comment
/// p ec3 <n> <m>
/// <i> <j> <k>      (m lines)
/// ```
pub fn parse_instance(text: &str) -> Result<Ec3Instance> {
    let perr = |line: usize, msg: String| Error::Parse { line, msg };
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut last_line = 0;

    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        last_line = line_no;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line == "c" || line.starts_with("c ") {
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(perr(line_no, "duplicate header".into()));
            }
            let toks: Vec<&str> = line.split(' ').collect();
            if toks.len() != 4 || toks[0] != "p" || toks[1] != "ec3" {
                return Err(perr(line_no, format!("malformed header {line:?}, expected \"p ec3 <n> <m>\"")));
            }
            let n = toks[2]
                .parse::<usize>()
                .map_err(|_| perr(line_no, format!("non-numeric bit count {:?}", toks[2])))?;
            let m = toks[3]
                .parse::<usize>()
                .map_err(|_| perr(line_no, format!("non-numeric clause count {:?}", toks[3])))?;
            if n < 3 {
                return Err(perr(line_no, format!("need at least 3 bits, got {n}")));
            }
            if n > 62 {
                return Err(perr(line_no, format!("{n} bits exceeds the 62-bit index space")));
            }
            header = Some((n, m));
            continue;
        }
        let (n, m) = header.ok_or_else(|| perr(line_no, "clause line before header".into()))?;
        let toks: Vec<&str> = line.split(' ').collect();
        if toks.len() != 3 {
            return Err(perr(line_no, format!("expected 3 indices separated by single spaces, got {line:?}")));
        }
        let mut idx = [0usize; 3];
        for (slot, tok) in idx.iter_mut().zip(&toks) {
            *slot = tok
                .parse()
                .map_err(|_| perr(line_no, format!("non-numeric index {tok:?}")))?;
            if *slot == 0 || *slot > n {
                return Err(perr(line_no, format!("index {slot} outside 1..={n}")));
            }
        }
        let clause = Clause::new(idx[0], idx[1], idx[2]).map_err(|e| perr(line_no, e.to_string()))?;
        if clauses.len() == m {
            return Err(perr(line_no, format!("more than the declared {m} clauses")));
        }
        clauses.push(clause);
    }

    let (n, m) = header.ok_or_else(|| perr(last_line.max(1), "missing \"p ec3 <n> <m>\" header".into()))?;
    if clauses.len() != m {
        return Err(perr(
            last_line.max(1),
            format!("header declares {m} clauses, found {}", clauses.len()),
        ));
    }
    Ec3Instance::new(n, clauses)
}

pub fn serialize_instance(instance: &Ec3Instance) -> String {
    let mut out = format!("p ec3 {} {}\n", instance.n(), instance.m());
    for c in instance.clauses() {
        let [a, b, d] = c.indices();
        out.push_str(&format!("{a} {b} {d}\n"));
    }
    out
}

fn binom3(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) * n.saturating_sub(2) / 6
}

/// Draws `m` distinct clauses uniformly at random, optionally consistent with a planted solution.
///
/// Deterministic in `seed`.
pub fn random_instance(n: usize, m: usize, seed: u64, require_satisfiable: bool) -> Result<Ec3Instance> {
    if n < 3 {
        return Err(Error::param(format!("n must be >= 3, got {n}")));
    }
    if n > 62 {
        return Err(Error::param(format!("n must be <= 62, got {n}")));
    }
    if m == 0 {
        return Err(Error::param("m must be >= 1"));
    }
    if m as u64 > binom3(n) {
        return Err(Error::Generation(format!(
            "{m} distinct clauses requested but only {} exist for n = {n}",
            binom3(n)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let planted = if require_satisfiable {
        let ones = (n / 3).max(1);
        let mut bits: Vec<bool> = (0..n).map(|i| i < ones).collect();
        bits.shuffle(&mut rng);
        let planted = Assignment::new(bits);
        // clauses with exactly one planted 1: ones * C(zeros, 2)
        let zeros = (n - ones) as u64;
        let feasible = ones as u64 * zeros * zeros.saturating_sub(1) / 2;
        if (m as u64) > feasible {
            return Err(Error::Generation(format!(
                "planted assignment admits only {feasible} clauses, {m} requested"
            )));
        }
        Some(planted)
    } else {
        None
    };

    let budget = 10_000usize.saturating_mul(m).max(100_000);
    let mut seen = HashSet::new();
    let mut clauses = Vec::with_capacity(m);
    for _ in 0..budget {
        if clauses.len() == m {
            break;
        }
        let a = rng.random_range(1..=n);
        let b = rng.random_range(1..=n);
        let c = rng.random_range(1..=n);
        let Ok(clause) = Clause::new(a, b, c) else { continue };
        if let Some(p) = &planted {
            if !eval_clause(&clause, p)?.satisfied {
                continue;
            }
        }
        if seen.insert(clause) {
            clauses.push(clause);
        }
    }
    if clauses.len() < m {
        return Err(Error::Generation(format!(
            "rejection budget of {budget} draws exhausted with {} of {m} clauses",
            clauses.len()
        )));
    }
    Ec3Instance::new(n, clauses)
}

/// The 8-bit worked example with unique solution 00010111.
pub fn example_instance() -> Ec3Instance {
    Ec3Instance::from_triples(8, &[[1, 2, 8], [2, 3, 6], [2, 3, 7], [2, 4, 5], [2, 5, 6], [3, 5, 8]])
        .expect("static instance is valid")
}

/// The worked example with its clauses applied in the cheaper order.
pub fn example_instance_reordered() -> Ec3Instance {
    Ec3Instance::from_triples(8, &[[2, 3, 6], [2, 3, 7], [2, 5, 6], [2, 4, 5], [3, 5, 8], [1, 2, 8]])
        .expect("static instance is valid")
}
