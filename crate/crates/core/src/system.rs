//! Symbolic data of an affine graph directed Markov system and of a locally
//! constant potential family, plus the structural checks that gate every
//! downstream computation.
//!
//! Symbols are numbered `1..=N`; internally symbol `e` lives at index `e - 1`.
//! Infinite systems are represented by their first `N` symbols together with
//! a [`TailModel`] describing how the contraction ratios decay beyond `N`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Admissibility structure of the symbolic space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Incidence {
    /// Every word is admissible.
    Full,
    /// `rows[a][b]` is true iff the word `ab` is admissible.
    Matrix(Vec<Vec<bool>>),
}

/// Decay law of the contraction ratios past the truncation level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TailLaw {
    /// `r_n <= scale * exp(-rate * n)`.
    Geometric { scale: f64, rate: f64 },
    /// `r_n <= scale * n^(-exponent)`.
    PowerLaw { scale: f64, exponent: f64 },
}

impl TailLaw {
    /// Logarithm of the ratio bound at symbol `n`.
    pub fn log_bound(&self, n: usize) -> f64 {
        let n = n as f64;
        match *self {
            TailLaw::Geometric { scale, rate } => scale.ln() - rate * n,
            TailLaw::PowerLaw { scale, exponent } => scale.ln() - exponent * n.ln(),
        }
    }

    /// Smallest `s` for which `sum_n bound(n)^s` diverges.
    pub fn critical_exponent(&self) -> f64 {
        match *self {
            TailLaw::Geometric { .. } => 0.0,
            TailLaw::PowerLaw { exponent, .. } => 1.0 / exponent,
        }
    }
}

/// Tail description of an infinite system truncated to its first `N` symbols.
///
/// When `exact` is set the ratios past `N` are *equal* to the law (only
/// supported for the geometric law); evaluators then add the remainder series
/// in closed form instead of only bounding it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    pub law: TailLaw,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub ratios: Vec<f64>,
    pub incidence: Incidence,
    pub intervals: Option<Vec<(f64, f64)>>,
    pub tail: Option<TailModel>,
}

impl SystemSpec {
    pub fn full_shift(ratios: Vec<f64>) -> Self {
        SystemSpec {
            ratios,
            incidence: Incidence::Full,
            intervals: None,
            tail: None,
        }
    }

    pub fn markov(ratios: Vec<f64>, matrix: Vec<Vec<bool>>) -> Self {
        SystemSpec {
            ratios,
            incidence: Incidence::Matrix(matrix),
            intervals: None,
            tail: None,
        }
    }

    pub fn with_intervals(mut self, intervals: Vec<(f64, f64)>) -> Self {
        self.intervals = Some(intervals);
        self
    }

    pub fn with_tail(mut self, tail: TailModel) -> Self {
        self.tail = Some(tail);
        self
    }

    /// Number of symbols actually carried (the truncation level for infinite systems).
    pub fn alphabet_size(&self) -> usize {
        self.ratios.len()
    }

    pub fn is_infinite(&self) -> bool {
        self.tail.is_some()
    }

    pub fn is_full_shift(&self) -> bool {
        matches!(self.incidence, Incidence::Full)
    }

    pub fn log_ratios(&self) -> Vec<f64> {
        self.ratios.iter().map(|r| r.ln()).collect()
    }

    pub fn admissible(&self, a: usize, b: usize) -> bool {
        match &self.incidence {
            Incidence::Full => true,
            Incidence::Matrix(m) => m[a][b],
        }
    }

    /// Successor lists by index.
    pub(crate) fn successors(&self) -> Vec<Vec<usize>> {
        let n = self.alphabet_size();
        match &self.incidence {
            Incidence::Full => (0..n).map(|_| (0..n).collect()).collect(),
            Incidence::Matrix(m) => m
                .iter()
                .map(|row| row.iter().enumerate().filter_map(|(b, &ok)| ok.then_some(b)).collect())
                .collect(),
        }
    }
}

/// Two-sided comparison `-alpha log r_e + gamma <= f_e <= -alpha log r_e + beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparability {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Comparability {
    /// True when the family is an exact affine function of `log r`.
    pub fn is_exact(&self) -> bool {
        self.beta == self.gamma
    }
}

/// Locally constant potential family: `f~(w) = f_{w_1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialFamily {
    pub values: Vec<f64>,
    pub lower_bound: f64,
    pub comparability: Option<Comparability>,
    pub bounded: bool,
}

impl PotentialFamily {
    /// Family with the given values, bounded, lower bound set to the minimum.
    pub fn new(values: Vec<f64>) -> Self {
        let lower_bound = values.iter().copied().fold(f64::INFINITY, f64::min);
        PotentialFamily {
            values,
            lower_bound,
            comparability: None,
            bounded: true,
        }
    }

    /// `F = -log Phi'`, the family whose spectrum is the Lyapunov spectrum.
    pub fn lyapunov(spec: &SystemSpec) -> Self {
        let values: Vec<f64> = spec.ratios.iter().map(|r| -r.ln()).collect();
        let mut fam = PotentialFamily::new(values);
        fam.comparability = Some(Comparability {
            alpha: 1.0,
            beta: 0.0,
            gamma: 0.0,
        });
        fam.bounded = !spec.is_infinite();
        fam
    }

    /// `F = 0`; pressure at `q = 0` does not depend on the family, and this one
    /// is exactly comparable so infinite tails stay summable in closed form.
    pub fn zero(spec: &SystemSpec) -> Self {
        let mut fam = PotentialFamily::new(vec![0.0; spec.alphabet_size()]);
        fam.comparability = Some(Comparability {
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
        });
        fam
    }

    pub fn with_comparability(mut self, alpha: f64, beta: f64, gamma: f64) -> Self {
        self.comparability = Some(Comparability { alpha, beta, gamma });
        self
    }

    pub fn with_bounded(mut self, bounded: bool) -> Self {
        self.bounded = bounded;
        self
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Translate every value (and the metadata that depends on it) by `a`.
pub fn translate_family(fam: &PotentialFamily, a: f64) -> PotentialFamily {
    PotentialFamily {
        values: fam.values.iter().map(|v| v + a).collect(),
        lower_bound: fam.lower_bound + a,
        comparability: fam.comparability.map(|c| Comparability {
            alpha: c.alpha,
            beta: c.beta + a,
            gamma: c.gamma + a,
        }),
        bounded: fam.bounded,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyAlphabet,
    RatioNotPositive { symbol: usize, ratio: f64 },
    RatioNotBelowOne { symbol: usize, ratio: f64 },
    IncidenceShape,
    EmptyIncidenceRow { symbol: usize },
    IntervalCount,
    IntervalOutsideUnit { symbol: usize },
    IntervalOverlap { first: usize, second: usize },
    NoInterior,
    TailLawViolated { symbol: usize },
    TailParameters,
    ExactPowerLawTail,
    FamilyLength,
    LowerBoundViolated { symbol: usize },
    ComparabilityViolated { symbol: usize },
    NonFiniteValue { symbol: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyAlphabet => write!(f, "empty alphabet"),
            Violation::RatioNotPositive { symbol, ratio } => {
                write!(f, "ratio not > 0 at symbol {symbol} ({ratio})")
            }
            Violation::RatioNotBelowOne { symbol, ratio } => {
                write!(f, "ratio not < 1 at symbol {symbol} ({ratio})")
            }
            Violation::IncidenceShape => write!(f, "incidence matrix is not N x N"),
            Violation::EmptyIncidenceRow { symbol } => {
                write!(f, "incidence row of symbol {symbol} has no admissible successor")
            }
            Violation::IntervalCount => write!(f, "interval count differs from alphabet size"),
            Violation::IntervalOutsideUnit { symbol } => {
                write!(f, "interval of symbol {symbol} is not a subinterval of [0, 1]")
            }
            Violation::IntervalOverlap { first, second } => {
                write!(f, "interval interiors overlap (symbols {first} and {second})")
            }
            Violation::NoInterior => write!(f, "no interval has nonempty interior"),
            Violation::TailLawViolated { symbol } => {
                write!(f, "ratio of symbol {symbol} exceeds the tail law")
            }
            Violation::TailParameters => write!(f, "tail law parameters must be positive"),
            Violation::ExactPowerLawTail => {
                write!(f, "exact tails are only supported for the geometric law")
            }
            Violation::FamilyLength => write!(f, "family length differs from alphabet size"),
            Violation::LowerBoundViolated { symbol } => {
                write!(f, "value of symbol {symbol} is below the declared lower bound")
            }
            Violation::ComparabilityViolated { symbol } => {
                write!(f, "value of symbol {symbol} violates the comparability bounds")
            }
            Violation::NonFiniteValue { symbol } => {
                write!(f, "value of symbol {symbol} is not finite")
            }
        }
    }
}

/// Structural validation; violations are data, an empty list means valid.
pub fn validate_system(spec: &SystemSpec) -> Vec<Violation> {
    let n = spec.alphabet_size();
    let mut out = Vec::new();
    if n == 0 {
        out.push(Violation::EmptyAlphabet);
        return out;
    }
    for (i, &r) in spec.ratios.iter().enumerate() {
        if !(r > 0.0) {
            out.push(Violation::RatioNotPositive {
                symbol: i + 1,
                ratio: r,
            });
        } else if !(r < 1.0) {
            out.push(Violation::RatioNotBelowOne {
                symbol: i + 1,
                ratio: r,
            });
        }
    }
    if let Incidence::Matrix(m) = &spec.incidence {
        if m.len() != n || m.iter().any(|row| row.len() != n) {
            out.push(Violation::IncidenceShape);
        } else {
            for (a, row) in m.iter().enumerate() {
                if !row.iter().any(|&x| x) {
                    out.push(Violation::EmptyIncidenceRow { symbol: a + 1 });
                }
            }
        }
    }
    if let Some(iv) = &spec.intervals {
        if iv.len() != n {
            out.push(Violation::IntervalCount);
        } else {
            for (i, &(l, r)) in iv.iter().enumerate() {
                if !(0.0..=1.0).contains(&l) || !(0.0..=1.0).contains(&r) || l > r {
                    out.push(Violation::IntervalOutsideUnit { symbol: i + 1 });
                }
            }
            // Sort by left endpoint; interiors are disjoint iff each interval
            // starts no earlier than every previous one ends.
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| iv[a].0.total_cmp(&iv[b].0));
            let mut reach: Option<(usize, f64)> = None;
            for &i in &order {
                let (l, r) = iv[i];
                if r <= l {
                    continue;
                }
                if let Some((j, end)) = reach {
                    if l < end {
                        let (first, second) = if i < j { (i, j) } else { (j, i) };
                        out.push(Violation::IntervalOverlap {
                            first: first + 1,
                            second: second + 1,
                        });
                    }
                    if r > end {
                        reach = Some((i, r));
                    }
                } else {
                    reach = Some((i, r));
                }
            }
            if !iv.iter().any(|&(l, r)| r > l && l >= 0.0 && r <= 1.0) {
                out.push(Violation::NoInterior);
            }
        }
    }
    if let Some(tail) = &spec.tail {
        let params_ok = match tail.law {
            TailLaw::Geometric { scale, rate } => scale > 0.0 && rate > 0.0,
            TailLaw::PowerLaw { scale, exponent } => scale > 0.0 && exponent > 0.0,
        };
        if !params_ok {
            out.push(Violation::TailParameters);
        } else {
            if tail.exact && matches!(tail.law, TailLaw::PowerLaw { .. }) {
                out.push(Violation::ExactPowerLawTail);
            }
            for (i, &r) in spec.ratios.iter().enumerate() {
                if r > 0.0 && r.ln() > tail.law.log_bound(i + 1) + 1e-12 {
                    out.push(Violation::TailLawViolated { symbol: i + 1 });
                }
            }
        }
    }
    out
}

/// Checks the family metadata against its values on the carried alphabet.
pub fn validate_family(spec: &SystemSpec, fam: &PotentialFamily) -> Vec<Violation> {
    let mut out = Vec::new();
    if fam.values.len() != spec.alphabet_size() {
        out.push(Violation::FamilyLength);
        return out;
    }
    for (i, (&f, &r)) in fam.values.iter().zip(&spec.ratios).enumerate() {
        let symbol = i + 1;
        if !f.is_finite() {
            out.push(Violation::NonFiniteValue { symbol });
            continue;
        }
        if f < fam.lower_bound {
            out.push(Violation::LowerBoundViolated { symbol });
        }
        if let Some(c) = fam.comparability {
            let base = -c.alpha * r.ln();
            let slack = 1e-9 * (1.0 + base.abs());
            if f < base + c.gamma - slack || f > base + c.beta + slack {
                out.push(Violation::ComparabilityViolated { symbol });
            }
        }
    }
    out
}

/// Outcome of the finite irreducibility check. Symbols are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct Irreducibility {
    pub irreducible: bool,
    /// Connecting words `tau` such that every pair `e, f` has some `e tau f` admissible.
    pub witnesses: BTreeSet<Vec<usize>>,
    pub unreachable: Option<(usize, usize)>,
}

/// Breadth-first search for connecting words of length at most
/// `max_word_len` (default: alphabet size).
pub fn check_finite_irreducibility(spec: &SystemSpec, max_word_len: Option<usize>) -> Irreducibility {
    let n = spec.alphabet_size();
    let max_len = max_word_len.unwrap_or(n);
    if spec.is_full_shift() {
        return Irreducibility {
            irreducible: true,
            witnesses: BTreeSet::from([Vec::new()]),
            unreachable: None,
        };
    }
    let succ = spec.successors();
    let mut witnesses = BTreeSet::new();
    for e in 0..n {
        // depth[v] = number of edges from e to v along the first path found.
        let mut depth = vec![usize::MAX; n];
        let mut parent = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for &b in &succ[e] {
            if depth[b] == usize::MAX {
                depth[b] = 1;
                queue.push_back(b);
            }
        }
        while let Some(v) = queue.pop_front() {
            if depth[v] > max_len {
                continue;
            }
            for &w in &succ[v] {
                if depth[w] == usize::MAX {
                    depth[w] = depth[v] + 1;
                    parent[w] = v;
                    queue.push_back(w);
                }
            }
        }
        for f in 0..n {
            if depth[f] == usize::MAX || depth[f] > max_len + 1 {
                return Irreducibility {
                    irreducible: false,
                    witnesses: BTreeSet::new(),
                    unreachable: Some((e + 1, f + 1)),
                };
            }
            let mut tau = Vec::with_capacity(depth[f] - 1);
            let mut v = f;
            while parent[v] != usize::MAX {
                v = parent[v];
                tau.push(v + 1);
            }
            tau.reverse();
            witnesses.insert(tau);
        }
    }
    Irreducibility {
        irreducible: true,
        witnesses,
        unreachable: None,
    }
}
