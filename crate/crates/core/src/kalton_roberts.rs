//! The combinatorics that turn antichain bounds into positive intersection
//! numbers: families of three-point sets whose small subfamilies always have
//! more points than members, Hall's theorem for the resulting choice
//! functions, and a checker for the `1/(30K²)` bound on each level of a
//! graded fragmentation.
//!
//! # Deciding badness
//!
//! A family `{A_i}` of three-point subsets of `P` is *bad* for `k` when some
//! nonempty `I` with `|I| ≤ k` has `|⋃_{i∈I} A_i| ≤ |I|`. Equivalently, some
//! `J ⊆ P` with `|J| ≤ k` contains at least `|J|` of the `A_i`:
//!
//! * given a bad `I`, its union `J` has `|J| ≤ |I| ≤ k` and contains all
//!   `|I| ≥ |J|` members of `I`;
//! * given such a `J`, any `|J|` of the members inside it form a bad `I`
//!   (`J` contains a triple, so `|J| ≥ 3`, and their union lies in `J`).
//!
//! `J` may be shrunk to the union of the triples it contains without losing
//! the property, and a minimal such `J` has a connected family of triples
//! (otherwise one component would already be bad). So the search only
//! visits unions grown one intersecting triple at a time, never exceeding
//! `k` points, which stays exact while touching few states.

use std::collections::{BTreeSet, HashMap, HashSet};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::seq::index;
use rand::SeedableRng;
use rand_xoshiro::SplitMix64;
use thiserror::Error;

use crate::algebra::{AlgebraError, Element};
use crate::fragmentation::{self, Fragmentation, FragmentationError, GradedCheck};
use crate::kelley::{self, atom_coverage, KelleyError};
use crate::rational::{dyadic, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KrError {
    #[error("the antichain bound K must be at least 1")]
    ZeroAntichainBound,
    #[error("m = {m} is below 100K² = {minimum}")]
    FamilyTooSmall { m: u64, minimum: u64 },
    #[error("parameters must satisfy 3 ≤ k ≤ p ≤ m (m={m}, p={p}, k={k})")]
    ParameterOrder { m: u64, p: u64, k: u64 },
    #[error("parameter check failed: {0}")]
    ParameterCheck(String),
    #[error("three-point sets need p ≥ 3, got {0}")]
    TooFewPoints(u32),
    #[error("set {index} is not three distinct points of 1..={p}")]
    InvalidTriple { index: usize, p: u32 },
    #[error("index set has {size} members, more than k = {k}")]
    IndexSetTooLarge { size: usize, k: u64 },
    #[error("index {index} is out of range for a family of {m}")]
    IndexOutOfRange { index: usize, m: usize },
    #[error("the family is bad: the sets {0:?} violate the union property")]
    FamilyBad(Vec<usize>),
    #[error("no good family after {attempts} attempts (Π = {pi})")]
    AttemptsExhausted { attempts: u64, pi: Rational },
    #[error("the list of elements is empty")]
    EmptyList,
    #[error("{element} is not in C_{level}")]
    NotInLevel { element: Element, level: u32 },
    #[error("level {level} is outside 1..={depth}")]
    LevelOutOfRange { level: u32, depth: u32 },
    #[error("the fragmentation is not graded")]
    NotGraded,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Fragmentation(#[from] FragmentationError),
    #[error(transparent)]
    Kelley(#[from] KelleyError),
}

pub type Result<T> = std::result::Result<T, KrError>;

/// Parameters of the counting argument for `m` sets and antichain bound `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KrParams {
    pub m: u64,
    pub big_k: u64,
    /// Largest `k` with `k/m < 1/(30K²)`.
    pub k: u64,
    /// Largest `p ≥ k` with `p/m < 1/K`.
    pub p: u64,
}

impl KrParams {
    /// `p/k ≥ 15·m/p`, which makes `Π` small.
    pub fn hypothesis_holds(&self) -> bool {
        (self.p as u128).pow(2) >= 15 * self.m as u128 * self.k as u128
    }

    /// `p/k ≥ 20K`.
    pub fn ratio_bound_holds(&self) -> bool {
        self.p as u128 >= 20 * self.big_k as u128 * self.k as u128
    }

    /// `15·m/p ≤ 20K`.
    pub fn density_bound_holds(&self) -> bool {
        15 * self.m as u128 <= 20 * self.big_k as u128 * self.p as u128
    }

    /// Every defining and derived condition, in order, as `(name, holds)`.
    pub fn checks(&self) -> Vec<(&'static str, bool)> {
        let (m, kk, k, p) = (
            self.m as u128,
            self.big_k as u128,
            self.k as u128,
            self.p as u128,
        );
        let c = 30 * kk * kk;
        vec![
            ("k >= 3", k >= 3),
            ("k/m < 1/(30K^2)", c * k < m),
            ("(k+1)/m >= 1/(30K^2)", c * (k + 1) >= m),
            ("p >= k", p >= k),
            ("p/m < 1/K", p * kk < m),
            ("(p+1)/m >= 1/K", (p + 1) * kk >= m),
            ("p <= m", p <= m),
            ("p/(p+1) >= 3/4", 4 * p >= 3 * (p + 1)),
            ("p/k >= 20K", self.ratio_bound_holds()),
            ("15m/p <= 20K", self.density_bound_holds()),
            ("p/k >= 15m/p", self.hypothesis_holds()),
            ("pK < m", p * kk < m),
        ]
    }
}

/// Picks `(k, p)` for `m ≥ 100K²` and verifies every inequality the argument
/// relies on.
pub fn choose_params(m: u64, big_k: u64) -> Result<KrParams> {
    if big_k == 0 {
        return Err(KrError::ZeroAntichainBound);
    }
    let minimum = 100 * big_k * big_k;
    if m < minimum {
        return Err(KrError::FamilyTooSmall { m, minimum });
    }
    let k = (m - 1) / (30 * big_k * big_k);
    let p = (m - 1) / big_k;
    let params = KrParams { m, big_k, k, p };
    if let Some((name, _)) = params.checks().into_iter().find(|(_, ok)| !ok) {
        return Err(KrError::ParameterCheck(name.to_string()));
    }
    Ok(params)
}

fn binomial(n: u64, r: u64) -> BigInt {
    if r > n {
        return BigInt::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigInt::one();
    for i in 0..r {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Exact value of `Π = Σ_{n=3}^{k} C(m,n)·C(p,n)·n^{3n}/p^{3n}` with the
/// comparisons the counting argument makes.
#[derive(Debug, Clone, PartialEq)]
pub struct PiBound {
    pub value: Rational,
    /// `Σ_{n=3}^{k} 2^-n`, always below `1/4`.
    pub geometric: Rational,
    /// Whether `p/k ≥ 15·m/p`; the two comparisons below are guaranteed then.
    pub hypothesis: bool,
    pub below_geometric: bool,
    pub below_one: bool,
}

pub fn pi_term(m: u64, p: u64, n: u64) -> Rational {
    let n3 = BigInt::from(n).pow(3 * n as u32);
    let p3 = BigInt::from(p).pow(3 * n as u32);
    Rational::new(binomial(m, n) * binomial(p, n) * n3, p3)
}

pub fn pi_bound(m: u64, p: u64, k: u64) -> Result<PiBound> {
    if !(3 <= k && k <= p && p <= m) {
        return Err(KrError::ParameterOrder { m, p, k });
    }
    let value: Rational = (3..=k).map(|n| pi_term(m, p, n)).sum();
    let geometric: Rational = (3..=k).map(|n| dyadic(n as u32)).sum();
    Ok(PiBound {
        below_geometric: value < geometric,
        below_one: value < Rational::one(),
        hypothesis: (p as u128).pow(2) >= 15 * m as u128 * k as u128,
        value,
        geometric,
    })
}

/// A rational strictly above `e²`, from the series bound
/// `e < Σ_{j≤J} 1/j! + 1/(J!·J)`.
pub fn e_squared_upper_bound() -> Rational {
    const TERMS: u64 = 14;
    let mut factorial = BigInt::one();
    let mut e = Rational::zero();
    for j in 0..=TERMS {
        if j > 0 {
            factorial *= BigInt::from(j);
        }
        e += Rational::new(BigInt::one(), factorial.clone());
    }
    e += Rational::new(BigInt::one(), factorial * BigInt::from(TERMS));
    &e * &e
}

/// Indexed family of three-point subsets of `P = {1, .., p}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ThreeFamily {
    p: u32,
    sets: Vec<[u32; 3]>,
}

impl ThreeFamily {
    /// Each triple is sorted on entry.
    pub fn new(p: u32, sets: Vec<[u32; 3]>) -> Result<Self> {
        let mut sorted = Vec::with_capacity(sets.len());
        for (index, mut t) in sets.into_iter().enumerate() {
            t.sort_unstable();
            if t[0] == 0 || t[2] > p || t[0] == t[1] || t[1] == t[2] {
                return Err(KrError::InvalidTriple { index, p });
            }
            sorted.push(t);
        }
        Ok(Self { p, sets: sorted })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn m(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[[u32; 3]] {
        &self.sets
    }

    fn union_of(&self, indices: &[usize]) -> BTreeSet<u32> {
        indices.iter().flat_map(|&i| self.sets[i]).collect()
    }
}

fn sample_with(rng: &mut SplitMix64, m: u64, p: u32) -> ThreeFamily {
    let sets = (0..m)
        .map(|_| {
            let picked = index::sample(rng, p as usize, 3);
            let mut t = [0u32; 3];
            for (slot, i) in t.iter_mut().zip(picked.iter()) {
                *slot = i as u32 + 1;
            }
            t.sort_unstable();
            t
        })
        .collect();
    ThreeFamily { p, sets }
}

/// Draws `m` independent uniform three-subsets of `{1..p}` from a SplitMix64
/// stream seeded with `seed`.
pub fn sample_three_family(m: u64, p: u32, seed: u64) -> Result<ThreeFamily> {
    if p < 3 {
        return Err(KrError::TooFewPoints(p));
    }
    let mut rng = SplitMix64::seed_from_u64(seed);
    Ok(sample_with(&mut rng, m, p))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyVerdict {
    Good,
    /// `|⋃_{i∈indices} A_i| ≤ |indices| ≤ k`.
    Bad {
        indices: Vec<usize>,
        union: Vec<u32>,
    },
}

impl FamilyVerdict {
    pub fn is_good(&self) -> bool {
        matches!(self, FamilyVerdict::Good)
    }
}

/// Decides exactly whether some nonempty `I` with `|I| ≤ k` has
/// `|⋃_{i∈I} A_i| ≤ |I|`; see the module docs for the search.
pub fn verify_family(family: &ThreeFamily, k: u64) -> FamilyVerdict {
    if k < 3 || family.sets.is_empty() {
        return FamilyVerdict::Good;
    }
    let k = k as usize;
    let mut incident: HashMap<u32, Vec<usize>> = HashMap::new();
    for (i, t) in family.sets.iter().enumerate() {
        for &x in t {
            incident.entry(x).or_default().push(i);
        }
    }
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut stack: Vec<Vec<u32>> = Vec::new();
    for t in &family.sets {
        let start = t.to_vec();
        if seen.insert(start.clone()) {
            stack.push(start);
        }
        while let Some(j) = stack.pop() {
            let touching: BTreeSet<usize> =
                j.iter().flat_map(|x| incident[x].iter().copied()).collect();
            let inside: Vec<usize> = touching
                .iter()
                .copied()
                .filter(|&i| family.sets[i].iter().all(|x| j.binary_search(x).is_ok()))
                .collect();
            if inside.len() >= j.len() {
                let indices = inside[..j.len()].to_vec();
                let union: Vec<u32> = family.union_of(&indices).into_iter().collect();
                debug_assert!(union.len() <= indices.len());
                return FamilyVerdict::Bad { indices, union };
            }
            for &i in &touching {
                let grown: BTreeSet<u32> = j.iter().copied().chain(family.sets[i]).collect();
                if grown.len() > j.len() && grown.len() <= k {
                    let grown: Vec<u32> = grown.into_iter().collect();
                    if seen.insert(grown.clone()) {
                        stack.push(grown);
                    }
                }
            }
        }
    }
    FamilyVerdict::Good
}

/// Result of [`kr_search`].
#[derive(Debug, Clone, PartialEq)]
pub struct KrSearch {
    pub family: ThreeFamily,
    /// Number of families sampled, the good one included.
    pub attempts: u64,
    pub pi: Rational,
    pub seed: u64,
}

/// Samples families from one seeded stream until a good one turns up.
pub fn kr_search(params: &KrParams, seed: u64, max_attempts: u64) -> Result<KrSearch> {
    let pi = pi_bound(params.m, params.p, params.k)?.value;
    let p = u32::try_from(params.p).map_err(|_| KrError::ParameterCheck("p fits in u32".into()))?;
    if p < 3 {
        return Err(KrError::TooFewPoints(p));
    }
    let mut rng = SplitMix64::seed_from_u64(seed);
    for attempt in 1..=max_attempts {
        let family = sample_with(&mut rng, params.m, p);
        if verify_family(&family, params.k).is_good() {
            return Ok(KrSearch {
                family,
                attempts: attempt,
                pi,
                seed,
            });
        }
    }
    Err(KrError::AttemptsExhausted {
        attempts: max_attempts,
        pi,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SdrResult {
    /// `representatives[i] ∈ family[i]`, pairwise distinct.
    Representatives(Vec<u32>),
    /// `|⋃_{i∈indices} family[i]| = union.len() < indices.len()`.
    HallViolation {
        indices: Vec<usize>,
        union: Vec<u32>,
    },
}

impl SdrResult {
    pub fn representatives(&self) -> Option<&[u32]> {
        match self {
            SdrResult::Representatives(r) => Some(r),
            SdrResult::HallViolation { .. } => None,
        }
    }
}

struct Matcher<'a> {
    adjacency: &'a [Vec<usize>],
    owner: Vec<Option<usize>>,
    visited: Vec<bool>,
}

impl Matcher<'_> {
    fn augment(&mut self, left: usize) -> bool {
        for &right in &self.adjacency[left] {
            if self.visited[right] {
                continue;
            }
            self.visited[right] = true;
            let free = match self.owner[right] {
                None => true,
                Some(other) => self.augment(other),
            };
            if free {
                self.owner[right] = Some(left);
                return true;
            }
        }
        false
    }
}

/// Maximum matching of sets to points by augmenting paths. When some set
/// stays unmatched, the sets reachable from it by alternating paths form a
/// Hall violator: every point they reach is matched, to one of them other
/// than the start, so the union is one short.
pub fn hall_sdr(family: &[Vec<u32>]) -> SdrResult {
    let points: Vec<u32> = family
        .iter()
        .flatten()
        .copied()
        .collect::<BTreeSet<u32>>()
        .into_iter()
        .collect();
    let adjacency: Vec<Vec<usize>> = family
        .iter()
        .map(|s| {
            let mut idx: Vec<usize> = s.iter().map(|x| points.binary_search(x).unwrap()).collect();
            idx.sort_unstable();
            idx.dedup();
            idx
        })
        .collect();
    let mut matcher = Matcher {
        adjacency: &adjacency,
        owner: vec![None; points.len()],
        visited: vec![false; points.len()],
    };
    for left in 0..family.len() {
        matcher.visited.iter_mut().for_each(|v| *v = false);
        if !matcher.augment(left) {
            // alternating reachability from the stuck set
            let mut reached_sets = BTreeSet::from([left]);
            let mut reached_points = BTreeSet::new();
            let mut frontier = vec![left];
            while let Some(s) = frontier.pop() {
                for &r in &adjacency[s] {
                    if reached_points.insert(r) {
                        let owner = matcher.owner[r].expect("reachable point is matched");
                        if reached_sets.insert(owner) {
                            frontier.push(owner);
                        }
                    }
                }
            }
            let indices: Vec<usize> = reached_sets.into_iter().collect();
            let union: Vec<u32> = reached_points.into_iter().map(|r| points[r]).collect();
            assert!(
                union.len() < indices.len(),
                "alternating cut must violate Hall's condition"
            );
            return SdrResult::HallViolation { indices, union };
        }
    }
    let mut representatives = vec![0u32; family.len()];
    for (r, owner) in matcher.owner.iter().enumerate() {
        if let Some(s) = owner {
            representatives[*s] = points[r];
        }
    }
    SdrResult::Representatives(representatives)
}

/// First index set (in ascending bitmask order) with `|⋃ A_i| < |I|`, found
/// by enumerating all subsets. Exponential; meant for small families.
pub fn hall_condition_violation(family: &[Vec<u32>]) -> Option<Vec<usize>> {
    assert!(
        family.len() < 32,
        "hall_condition_violation enumerates 2^n subsets"
    );
    (1u32..(1 << family.len())).find_map(|pick| {
        let indices: Vec<usize> = (0..family.len()).filter(|i| pick >> i & 1 == 1).collect();
        let union: BTreeSet<u32> = indices
            .iter()
            .flat_map(|&i| family[i].iter().copied())
            .collect();
        (union.len() < indices.len()).then_some(indices)
    })
}

/// Distinct representatives by the classical induction: if every proper
/// subfamily has a surplus, fix any point of the last set and recurse on the
/// rest with that point removed; otherwise split off a critical subfamily
/// `S` with `|⋃S| = |S|`, solve it inside its union and solve the remainder
/// outside it. Returns `None` exactly when Hall's condition fails.
/// Exponential; meant for small families.
pub fn inductive_sdr(family: &[Vec<u32>]) -> Option<Vec<u32>> {
    if hall_condition_violation(family).is_some() {
        return None;
    }
    let indexed: Vec<(usize, BTreeSet<u32>)> = family
        .iter()
        .enumerate()
        .map(|(i, s)| (i, s.iter().copied().collect()))
        .collect();
    let mut out = vec![0u32; family.len()];
    for (i, x) in inductive_step(indexed) {
        out[i] = x;
    }
    Some(out)
}

fn inductive_step(sets: Vec<(usize, BTreeSet<u32>)>) -> Vec<(usize, u32)> {
    let n = sets.len();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        let x = *sets[0]
            .1
            .iter()
            .next()
            .expect("Hall's condition gives a point");
        return vec![(sets[0].0, x)];
    }
    let critical = (1u32..(1 << n) - 1).find(|pick| {
        let union: BTreeSet<u32> = (0..n)
            .filter(|i| pick >> i & 1 == 1)
            .flat_map(|i| sets[i].1.iter().copied())
            .collect();
        union.len() == pick.count_ones() as usize
    });
    match critical {
        None => {
            let (last, rest) = sets.split_last().expect("n >= 2");
            let x = *last
                .1
                .iter()
                .next()
                .expect("Hall's condition gives a point");
            let reduced = rest
                .iter()
                .map(|(i, s)| (*i, s.iter().copied().filter(|&y| y != x).collect()))
                .collect();
            let mut out = inductive_step(reduced);
            out.push((last.0, x));
            out
        }
        Some(pick) => {
            let (inside, outside): (Vec<_>, Vec<_>) = sets
                .into_iter()
                .enumerate()
                .partition(|(pos, _)| pick >> pos & 1 == 1);
            let inside: Vec<(usize, BTreeSet<u32>)> = inside.into_iter().map(|(_, s)| s).collect();
            let covered: BTreeSet<u32> =
                inside.iter().flat_map(|(_, s)| s.iter().copied()).collect();
            let outside = outside
                .into_iter()
                .map(|(_, (i, s))| (i, s.difference(&covered).copied().collect()))
                .collect();
            let mut out = inductive_step(inside);
            out.extend(inductive_step(outside));
            out
        }
    }
}

/// One-to-one choice `i ↦ f(i) ∈ A_i` on a subfamily of at most `k` members
/// of a good family, returned as `(index, point)` pairs in the order given.
pub fn partial_sdr_for_bounded_sets(
    family: &ThreeFamily,
    k: u64,
    indices: &[usize],
) -> Result<Vec<(usize, u32)>> {
    if indices.len() as u64 > k {
        return Err(KrError::IndexSetTooLarge {
            size: indices.len(),
            k,
        });
    }
    if let Some(&index) = indices.iter().find(|&&i| i >= family.m()) {
        return Err(KrError::IndexOutOfRange {
            index,
            m: family.m(),
        });
    }
    if let FamilyVerdict::Bad { indices, .. } = verify_family(family, k) {
        return Err(KrError::FamilyBad(indices));
    }
    choice_on(family, indices)
}

fn choice_on(family: &ThreeFamily, indices: &[usize]) -> Result<Vec<(usize, u32)>> {
    let sub: Vec<Vec<u32>> = indices.iter().map(|&i| family.sets[i].to_vec()).collect();
    match hall_sdr(&sub) {
        SdrResult::Representatives(reps) => Ok(indices.iter().copied().zip(reps).collect()),
        SdrResult::HallViolation { indices: bad, .. } => Err(KrError::FamilyBad(
            bad.into_iter().map(|j| indices[j]).collect(),
        )),
    }
}

/// An atom lying in the most members of a list, with the (0-based) indices
/// of those members. For that atom `x` and `J = {i : x ∈ c_i}`, the cell
/// `⋂_{i∈J} c_i ∩ ⋂_{i∉J} −c_i` contains `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageWitness {
    pub atom: u32,
    pub indices: Vec<usize>,
}

pub fn coverage_witness(list: &[Element]) -> Result<CoverageWitness> {
    let first = list.first().ok_or(KrError::EmptyList)?;
    let universe = first.universe();
    for c in list {
        if c.universe() != universe {
            return Err(AlgebraError::UniverseMismatch {
                left: universe.atom_count(),
                right: c.universe().atom_count(),
            }
            .into());
        }
        if c.is_zero() {
            return Err(KelleyError::ZeroMember.into());
        }
    }
    let counts = atom_coverage(universe, list);
    let best = counts.iter().copied().max().unwrap_or(0);
    // ties go to the lowest atom
    let atom = counts.iter().position(|&c| c == best).unwrap_or(0) as u32;
    let indices = list
        .iter()
        .enumerate()
        .filter(|(_, c)| c.contains_atom(atom))
        .map(|(i, _)| i)
        .collect();
    Ok(CoverageWitness { atom, indices })
}

/// Outcome of checking `κ(C) ≥ 1/(30K²)` for a list inside a level `C_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem41Report {
    pub level: u32,
    /// `min(n + 2, N)`.
    pub bound_level: u32,
    pub big_k: usize,
    pub kappa: Rational,
    pub bound: Rational,
    pub bound_holds: bool,
    /// Length of the repeated list, at least `100K²`.
    pub repeated_length: usize,
    pub repetitions: usize,
    /// Size of the coverage witness's index set on the repeated list.
    pub witness_size: usize,
    /// `witness_size ≥ repeated_length / (30K²)`.
    pub witness_holds: bool,
}

impl Theorem41Report {
    pub fn holds(&self) -> bool {
        self.bound_holds && self.witness_holds
    }
}

/// Checks the `1/(30K²)` lower bound for `list ⊆ C_n` on a valid graded
/// fragmentation, with `K` the largest antichain in `C_{min(n+2, N)}`
/// (levels past the depth equal `C_N`).
pub fn check_theorem41(frag: &Fragmentation, n: u32, list: &[Element]) -> Result<Theorem41Report> {
    if list.is_empty() {
        return Err(KrError::EmptyList);
    }
    let depth = frag.depth();
    if !(1..=depth).contains(&n) {
        return Err(KrError::LevelOutOfRange { level: n, depth });
    }
    if let GradedCheck::NotGraded(_) = fragmentation::is_graded(frag)? {
        return Err(KrError::NotGraded);
    }
    if let Some(c) = list.iter().find(|c| !frag.contains(n, c)) {
        return Err(KrError::NotInLevel {
            element: *c,
            level: n,
        });
    }
    let bound_level = (n + 2).min(depth);
    let big_k = fragmentation::antichain_bounds(frag)?[bound_level as usize - 1];
    let kappa = kelley::intersection_number(list)?.kappa;
    let denominator = 30 * big_k * big_k;
    let bound = Rational::new(BigInt::one(), BigInt::from(denominator));
    let target = 100 * big_k * big_k;
    let repetitions = target.div_ceil(list.len()).max(1);
    let repeated: Vec<Element> = std::iter::repeat_n(list, repetitions)
        .flatten()
        .copied()
        .collect();
    let witness_size = coverage_witness(&repeated)?.indices.len();
    Ok(Theorem41Report {
        level: n,
        bound_level,
        big_k,
        bound_holds: kappa >= bound,
        kappa,
        bound,
        repeated_length: repeated.len(),
        repetitions,
        witness_size,
        witness_holds: witness_size * denominator >= repeated.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AtomUniverse;
    use crate::kelley::Measure;
    use crate::rational::ratio;

    #[test]
    fn params_for_one_hundred_sets() {
        let p = choose_params(100, 1).unwrap();
        assert_eq!((p.k, p.p), (3, 99));
        assert!(ratio(3, 100) < ratio(1, 30));
        assert!(ratio(4, 100) >= ratio(1, 30));
        assert!(ratio(99, 100) < ratio(1, 1));
        assert!(p.checks().iter().all(|(_, ok)| *ok));
        // p/k = 33 against 15m/p = 1500/99
        assert!(ratio(99, 3) >= ratio(1500, 99));
    }

    #[test]
    fn params_by_integer_scan() {
        for (m, kk) in [(400u64, 2u64), (100, 1), (937, 3), (5000, 7)] {
            let got = choose_params(m, kk).unwrap();
            let k = (1..m).filter(|&k| 30 * kk * kk * k < m).max().unwrap();
            let p = (k..=m).filter(|&p| p * kk < m).max().unwrap();
            assert_eq!((got.k, got.p), (k, p), "m={m} K={kk}");
        }
        assert_eq!(choose_params(400, 2).map(|p| (p.k, p.p)).unwrap(), (3, 199));
    }

    #[test]
    fn params_refuse_small_m() {
        assert_eq!(
            choose_params(99, 1).unwrap_err(),
            KrError::FamilyTooSmall {
                m: 99,
                minimum: 100
            }
        );
        assert_eq!(
            choose_params(100, 0).unwrap_err(),
            KrError::ZeroAntichainBound
        );
    }

    #[test]
    fn pi_for_one_hundred_sets() {
        let b = pi_bound(100, 99, 3).unwrap();
        // independent evaluation of the single n = 3 term with plain integers
        let numerator =
            BigInt::from(161_700u64) * BigInt::from(156_849u64) * BigInt::from(19_683u64);
        let denominator = BigInt::from(99u64).pow(9);
        assert_eq!(b.value, Rational::new(numerator, denominator));
        assert!(b.value < ratio(1, 1000));
        assert!(b.hypothesis && b.below_geometric && b.below_one);
        assert_eq!(b.geometric, ratio(1, 8));
    }

    #[test]
    fn pi_single_term_and_errors() {
        let b = pi_bound(50, 20, 3).unwrap();
        assert_eq!(b.value, pi_term(50, 20, 3));
        assert!(pi_bound(10, 20, 3).is_err());
        assert!(pi_bound(10, 5, 2).is_err());
        assert!(pi_bound(10, 5, 6).is_err());
    }

    #[test]
    fn e_squared_bound_is_tight_enough() {
        let e2 = e_squared_upper_bound();
        assert!(e2 < ratio(739, 100));
        assert!(e2 > ratio(7389, 1000));
        assert!(ratio(2 * 739, 100) < ratio(15, 1));
    }

    #[test]
    fn sampling_is_deterministic() {
        let only = sample_three_family(1, 3, 99).unwrap();
        assert_eq!(only.sets(), &[[1, 2, 3]]);
        assert_eq!(
            sample_three_family(40, 12, 5).unwrap(),
            sample_three_family(40, 12, 5).unwrap()
        );
        assert_ne!(
            sample_three_family(40, 12, 5).unwrap(),
            sample_three_family(40, 12, 6).unwrap()
        );
        assert_eq!(
            sample_three_family(4, 2, 0).unwrap_err(),
            KrError::TooFewPoints(2)
        );
    }

    #[test]
    fn verify_family_examples() {
        let two = ThreeFamily::new(3, vec![[1, 2, 3]; 2]).unwrap();
        assert!(verify_family(&two, 3).is_good());
        let three = ThreeFamily::new(3, vec![[1, 2, 3]; 3]).unwrap();
        assert_eq!(
            verify_family(&three, 3),
            FamilyVerdict::Bad {
                indices: vec![0, 1, 2],
                union: vec![1, 2, 3]
            }
        );
        assert!(verify_family(&three, 2).is_good());
    }

    #[test]
    fn triple_validation() {
        assert!(ThreeFamily::new(3, vec![[1, 1, 2]]).is_err());
        assert!(ThreeFamily::new(3, vec![[0, 1, 2]]).is_err());
        assert!(ThreeFamily::new(3, vec![[1, 2, 4]]).is_err());
        assert_eq!(
            ThreeFamily::new(5, vec![[5, 1, 3]]).unwrap().sets(),
            &[[1, 3, 5]]
        );
    }

    #[test]
    fn search_examples() {
        let params = choose_params(100, 1).unwrap();
        let found = kr_search(&params, 1, 10).unwrap();
        assert_eq!(found.attempts, 1);
        assert!(verify_family(&found.family, params.k).is_good());
        assert!(matches!(
            kr_search(&params, 1, 0),
            Err(KrError::AttemptsExhausted { attempts: 0, .. })
        ));
    }

    #[test]
    fn hall_examples() {
        assert_eq!(
            hall_sdr(&[vec![1], vec![1, 2]]),
            SdrResult::Representatives(vec![1, 2])
        );
        assert_eq!(
            hall_sdr(&[vec![1, 2], vec![1], vec![2]]),
            SdrResult::HallViolation {
                indices: vec![0, 1, 2],
                union: vec![1, 2]
            }
        );
        assert_eq!(
            hall_sdr(&[vec![4], vec![]]),
            SdrResult::HallViolation {
                indices: vec![1],
                union: vec![]
            }
        );
        assert_eq!(hall_sdr(&[]), SdrResult::Representatives(vec![]));
        assert_eq!(inductive_sdr(&[vec![1, 2], vec![1], vec![2]]), None);
        assert_eq!(inductive_sdr(&[vec![1], vec![1, 2]]), Some(vec![1, 2]));
    }

    #[test]
    fn partial_choice_examples() {
        let fam = ThreeFamily::new(9, vec![[1, 2, 3], [4, 5, 6], [7, 8, 9]]).unwrap();
        let single = partial_sdr_for_bounded_sets(&fam, 3, &[1]).unwrap();
        assert!(fam.sets()[1].contains(&single[0].1));
        let all = partial_sdr_for_bounded_sets(&fam, 3, &[0, 1, 2]).unwrap();
        for (i, x) in &all {
            assert!(fam.sets()[*i].contains(x));
        }
        assert!(matches!(
            partial_sdr_for_bounded_sets(&fam, 2, &[0, 1, 2]),
            Err(KrError::IndexSetTooLarge { .. })
        ));
        let bad = ThreeFamily::new(3, vec![[1, 2, 3]; 3]).unwrap();
        assert!(matches!(
            partial_sdr_for_bounded_sets(&bad, 3, &[0]),
            Err(KrError::FamilyBad(_))
        ));
    }

    fn el(n: u32, atoms: &[u32]) -> Element {
        AtomUniverse::new(n)
            .unwrap()
            .from_atoms(atoms.iter().copied())
            .unwrap()
    }

    #[test]
    fn coverage_examples() {
        let u = AtomUniverse::new(3).unwrap();
        let w = coverage_witness(&[u.one(), u.one()]).unwrap();
        assert_eq!(w.indices, vec![0, 1]);
        let w = coverage_witness(&[el(3, &[0]), el(3, &[1]), el(3, &[2])]).unwrap();
        assert_eq!(w.indices.len(), 1);
        let w = coverage_witness(&[el(3, &[0, 1]), el(3, &[1, 2]), el(3, &[0, 2])]).unwrap();
        assert_eq!(
            w,
            CoverageWitness {
                atom: 0,
                indices: vec![0, 2]
            }
        );
        assert_eq!(coverage_witness(&[]).unwrap_err(), KrError::EmptyList);
    }

    #[test]
    fn level_bound_on_uniform_four() {
        let u = AtomUniverse::new(4).unwrap();
        let frag = Fragmentation::from_measure(&Measure::uniform(u)).unwrap();
        let level_one = frag.members(1).unwrap();
        let report = check_theorem41(&frag, 1, &level_one).unwrap();
        assert_eq!(report.kappa, ratio(1, 2));
        assert_eq!(report.bound_level, 2);
        assert_eq!(report.big_k, 4);
        assert_eq!(report.bound, ratio(1, 480));
        assert!(report.holds());
        assert!(report.repeated_length >= 1600);

        let report = check_theorem41(&frag, 1, &[u.one()]).unwrap();
        assert_eq!(report.kappa, ratio(1, 1));
        assert!(report.holds());

        assert!(matches!(
            check_theorem41(&frag, 1, &[el(4, &[0])]),
            Err(KrError::NotInLevel { .. })
        ));
        assert!(matches!(
            check_theorem41(&frag, 3, &[u.one()]),
            Err(KrError::LevelOutOfRange { .. })
        ));
    }
}
