//! Fragmentations `C_1 ⊆ C_2 ⊆ … ⊆ C_N = B⁺` of a finite algebra and the
//! submeasure built from a graded one.
//!
//! A fragmentation is stored as a level map: each nonzero element gets the
//! least `n` with `a ∈ C_n`. Upward closure of every `C_n` is then the
//! statement that levels never increase when an element grows.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use thiserror::Error;

use crate::algebra::{self, minimal_masks, AlgebraError, AtomUniverse, Element};
use crate::kelley::Measure;
use crate::rational::{dyadic, Rational};

/// Deepest fragmentation the submeasure table can represent exactly.
pub const MAX_SUBMEASURE_DEPTH: u32 = 127;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FragmentationError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("fragmentation depth must be at least 1")]
    ZeroDepth,
    #[error("dense level table has {found} entries, expected {expected}")]
    TableSize { expected: usize, found: usize },
    #[error("invalid fragmentation: {0}")]
    Invalid(Violation),
    #[error("level {0} is outside 1..=depth")]
    LevelOutOfRange(u32),
    #[error("fragmentation is not graded: {0}")]
    NotGraded(GradedWitness),
    #[error("measure is not strictly positive; atom {0} has weight zero")]
    NotStrictlyPositive(u32),
    #[error("depth {0} exceeds the exact submeasure limit of {MAX_SUBMEASURE_DEPTH}")]
    TooDeep(u32),
}

pub type Result<T> = std::result::Result<T, FragmentationError>;

#[derive(Debug, Clone, PartialEq, Eq)]
enum LevelMap {
    /// Level per mask; `0` means unassigned.
    Dense(Vec<u32>),
    /// Explicit `(mask, level)` assignments, ascending by mask. An unlisted
    /// element inherits the least level among its listed subsets.
    Sparse(Vec<(u64, u32)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fragmentation {
    universe: AtomUniverse,
    depth: u32,
    levels: LevelMap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A nonzero element belongs to no level.
    Uncovered(Element),
    LevelOutOfRange {
        element: Element,
        level: u32,
    },
    /// `lower ⊆ upper` but `upper` sits on a later level.
    NotUpwardClosed {
        lower: Element,
        lower_level: u32,
        upper: Element,
        upper_level: u32,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Uncovered(a) => write!(f, "{a} has no level"),
            Violation::LevelOutOfRange { element, level } => {
                write!(f, "{element} has level {level} outside 1..=depth")
            }
            Violation::NotUpwardClosed {
                lower,
                lower_level,
                upper,
                upper_level,
            } => write!(
                f,
                "{lower} has level {lower_level} but its superset {upper} has level {upper_level}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `c = a ∪ b` is in `C_n` while neither `a` nor `b` is in `C_{n+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GradedWitness {
    pub level: u32,
    pub a: Element,
    pub b: Element,
}

impl std::fmt::Display for GradedWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} is in C_{} but neither {} nor {} is in C_{}",
            self.a | self.b,
            self.level,
            self.a,
            self.b,
            self.level + 1
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradedCheck {
    Graded,
    NotGraded(GradedWitness),
}

impl GradedCheck {
    pub fn holds(&self) -> bool {
        matches!(self, GradedCheck::Graded)
    }
}

impl Fragmentation {
    /// Builds from a full level table indexed by mask (`0` = unassigned; the
    /// entry for the zero element is ignored). No validation happens here.
    pub fn from_dense(universe: AtomUniverse, depth: u32, mut table: Vec<u32>) -> Result<Self> {
        universe.ensure_enumerable()?;
        if depth == 0 {
            return Err(FragmentationError::ZeroDepth);
        }
        let expected = universe.element_count() as usize;
        if table.len() != expected {
            return Err(FragmentationError::TableSize {
                expected,
                found: table.len(),
            });
        }
        table[0] = 0;
        Ok(Self {
            universe,
            depth,
            levels: LevelMap::Dense(table),
        })
    }

    /// Builds from explicit `(element, level)` assignments. Listed elements
    /// keep their level; every other element takes the least level among its
    /// listed subsets. A complete listing and a listing of generators (the
    /// minimal elements of each level) therefore both work. Later duplicates
    /// override earlier ones.
    pub fn from_assignments(
        universe: AtomUniverse,
        depth: u32,
        assignments: &[(Element, u32)],
    ) -> Result<Self> {
        if depth == 0 {
            return Err(FragmentationError::ZeroDepth);
        }
        let mut listed: BTreeMap<u64, u32> = BTreeMap::new();
        for (e, level) in assignments {
            if e.universe() != universe {
                return Err(AlgebraError::UniverseMismatch {
                    left: universe.atom_count(),
                    right: e.universe().atom_count(),
                }
                .into());
            }
            if !e.is_zero() {
                listed.insert(e.bits(), *level);
            }
        }
        if !universe.is_enumerable() {
            return Ok(Self {
                universe,
                depth,
                levels: LevelMap::Sparse(listed.into_iter().collect()),
            });
        }
        let size = universe.element_count() as usize;
        let mut table = vec![0u32; size];
        // every mask is visited after all of its subsets, so a running
        // minimum over "drop one atom" predecessors is the minimum over all
        // listed proper subsets
        let mut inherited = vec![0u32; size];
        for mask in 1..size {
            let mut best = 0u32;
            let mut rest = mask;
            while rest != 0 {
                let bit = rest & rest.wrapping_neg();
                rest &= rest - 1;
                let sub = mask & !bit;
                if sub == 0 {
                    continue;
                }
                for candidate in [table[sub], inherited[sub]] {
                    if candidate != 0 && (best == 0 || candidate < best) {
                        best = candidate;
                    }
                }
            }
            inherited[mask] = best;
            table[mask] = listed.get(&(mask as u64)).copied().unwrap_or(best);
        }
        Ok(Self {
            universe,
            depth,
            levels: LevelMap::Dense(table),
        })
    }

    /// The fragmentation `C_n = {a : m(a) ≥ 2^-n}` of a strictly positive
    /// measure; its depth is the level of the lightest atom.
    pub fn from_measure(m: &Measure) -> Result<Self> {
        if let Some(i) = m.weights().iter().position(|w| !w.is_positive()) {
            return Err(FragmentationError::NotStrictlyPositive(i as u32));
        }
        let universe = m.universe();
        let values = m.value_table()?;
        let mut table = vec![0u32; values.len()];
        let mut depth = 1;
        for (mask, v) in values.iter().enumerate().skip(1) {
            let level = threshold_level(v);
            depth = depth.max(level);
            table[mask] = level;
        }
        Self::from_dense(universe, depth, table)
    }

    pub fn universe(&self) -> AtomUniverse {
        self.universe
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    fn level_of_mask(&self, mask: u64) -> Option<u32> {
        if mask == 0 {
            return None;
        }
        match &self.levels {
            LevelMap::Dense(table) => match table[mask as usize] {
                0 => None,
                l => Some(l),
            },
            LevelMap::Sparse(listed) => {
                if let Ok(i) = listed.binary_search_by_key(&mask, |&(m, _)| m) {
                    return Some(listed[i].1);
                }
                listed
                    .iter()
                    .filter(|&&(m, _)| m & !mask == 0)
                    .map(|&(_, l)| l)
                    .min()
            }
        }
    }

    /// Least `n` with `a ∈ C_n`; `None` for zero or an uncovered element.
    pub fn level(&self, a: &Element) -> Option<u32> {
        self.level_of_mask(a.bits())
    }

    /// Whether `a ∈ C_n`, with `C_n = C_N` beyond the depth.
    pub fn contains(&self, n: u32, a: &Element) -> bool {
        self.level(a).is_some_and(|l| l <= n.max(1))
    }

    /// Members of `C_n`, `1 ≤ n ≤ N`, in ascending mask order.
    pub fn members(&self, n: u32) -> Result<Vec<Element>> {
        if !(1..=self.depth).contains(&n) {
            return Err(FragmentationError::LevelOutOfRange(n));
        }
        Ok(self
            .universe
            .nonzero_elements()?
            .filter(|a| self.level(a).is_some_and(|l| l <= n))
            .collect())
    }

    /// Minimal members of `C_n` in ascending mask order.
    pub fn minimal_members(&self, n: u32) -> Result<Vec<Element>> {
        let masks: Vec<u64> = self.members(n)?.iter().map(|e| e.bits()).collect();
        Ok(minimal_masks(&masks)
            .into_iter()
            .map(|m| self.universe.element(m).expect("mask within universe"))
            .collect())
    }

    /// `(element, level)` for every nonzero element, ascending by mask.
    pub fn dense_assignments(&self) -> Result<Vec<(Element, u32)>> {
        Ok(self
            .universe
            .nonzero_elements()?
            .filter_map(|a| self.level(&a).map(|l| (a, l)))
            .collect())
    }

    /// Generators: for each level `n`, the minimal members of `C_n` that
    /// first appear at level `n`. For a valid fragmentation these determine
    /// every level through [`Fragmentation::from_assignments`].
    pub fn generators(&self) -> Result<Vec<(Element, u32)>> {
        if let LevelMap::Sparse(listed) = &self.levels {
            return Ok(listed
                .iter()
                .map(|&(m, l)| (self.universe.element(m).expect("mask within universe"), l))
                .collect());
        }
        let mut out = Vec::new();
        for n in 1..=self.depth {
            for a in self.minimal_members(n)? {
                if self.level(&a) == Some(n) {
                    out.push((a, n));
                }
            }
        }
        out.sort_unstable_by_key(|(a, l)| (*l, *a));
        Ok(out)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        match validate(self).violations.into_iter().next() {
            None => Ok(()),
            Some(v) => Err(FragmentationError::Invalid(v)),
        }
    }
}

fn threshold_level(v: &Rational) -> u32 {
    let mut n = 1;
    while *v < dyadic(n) {
        n += 1;
    }
    n
}

/// Lists every coverage, range and upward-closure violation.
///
/// Dense maps are checked over all elements, comparing each element with its
/// one-atom extensions (upward closure along covering pairs implies it along
/// all pairs). Sparse maps define unlisted levels as a minimum over listed
/// subsets, which is upward closed by construction, so only the singletons
/// (coverage), the listed levels (range) and pairs of listed elements
/// (closure) need checking; this is exact at any universe size.
pub fn validate(frag: &Fragmentation) -> ValidationReport {
    let universe = frag.universe;
    let el = |m: u64| universe.element(m).expect("mask within universe");
    let mut violations = Vec::new();
    let in_range = |l: u32| (1..=frag.depth).contains(&l);
    match &frag.levels {
        LevelMap::Dense(table) => {
            let full = universe.full_mask();
            for mask in 1..=full {
                match table[mask as usize] {
                    0 => violations.push(Violation::Uncovered(el(mask))),
                    l if !in_range(l) => violations.push(Violation::LevelOutOfRange {
                        element: el(mask),
                        level: l,
                    }),
                    _ => {}
                }
            }
            for mask in 1..=full {
                let lower_level = table[mask as usize];
                if lower_level == 0 {
                    continue;
                }
                let mut missing = full & !mask;
                while missing != 0 {
                    let bit = missing & missing.wrapping_neg();
                    missing &= missing - 1;
                    let upper = mask | bit;
                    let upper_level = table[upper as usize];
                    if upper_level == 0 || upper_level > lower_level {
                        violations.push(Violation::NotUpwardClosed {
                            lower: el(mask),
                            lower_level,
                            upper: el(upper),
                            upper_level,
                        });
                    }
                }
            }
        }
        LevelMap::Sparse(listed) => {
            for atom in 0..universe.atom_count() {
                let single = 1u64 << atom;
                if frag.level_of_mask(single).is_none() {
                    violations.push(Violation::Uncovered(el(single)));
                }
            }
            for &(m, l) in listed {
                if !in_range(l) {
                    violations.push(Violation::LevelOutOfRange {
                        element: el(m),
                        level: l,
                    });
                }
            }
            for &(lower, lower_level) in listed {
                for &(upper, upper_level) in listed {
                    if lower != upper && lower & !upper == 0 && upper_level > lower_level {
                        violations.push(Violation::NotUpwardClosed {
                            lower: el(lower),
                            lower_level,
                            upper: el(upper),
                            upper_level,
                        });
                    }
                }
            }
        }
    }
    ValidationReport { violations }
}

/// Checks that `a ∪ b ∈ C_n` forces `a ∈ C_{n+1}` or `b ∈ C_{n+1}`, taking
/// `C_{N+1} = C_N = B⁺`.
///
/// Only disjoint splits into two nonzero parts are examined: an overlapping
/// split `a ∪ b` can be replaced by `a ∪ (b − a)`, and `b − a ∈ C_{n+1}`
/// forces `b ∈ C_{n+1}` by upward closure. It also suffices to test each `c`
/// at its own level, the strongest of the conditions it is subject to.
pub fn is_graded(frag: &Fragmentation) -> Result<GradedCheck> {
    frag.ensure_valid()?;
    let universe = frag.universe;
    universe.ensure_enumerable()?;
    let levels: Vec<u32> = (0..universe.element_count())
        .map(|m| frag.level_of_mask(m).unwrap_or(0))
        .collect();
    for c in 1..=universe.full_mask() {
        let n = levels[c as usize];
        if n >= frag.depth {
            continue;
        }
        let mut a = (0u64.wrapping_sub(c)) & c;
        while a != c {
            let b = c & !a;
            if levels[a as usize] > n + 1 && levels[b as usize] > n + 1 {
                return Ok(GradedCheck::NotGraded(GradedWitness {
                    level: n,
                    a: universe.element(a)?,
                    b: universe.element(b)?,
                }));
            }
            a = a.wrapping_sub(c) & c;
        }
    }
    Ok(GradedCheck::Graded)
}

/// `K_n`, the exact largest antichain inside `C_n`, for `n = 1..=N`.
pub fn antichain_bounds(frag: &Fragmentation) -> Result<Vec<usize>> {
    frag.ensure_valid()?;
    (1..=frag.depth)
        .map(|n| {
            let level = frag.minimal_members(n)?;
            Ok(algebra::max_antichain_size(&level)?.size)
        })
        .collect()
}

/// Exact submeasure values, all dyadic, stored as numerators over `2^scale`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubmeasureTable {
    universe: AtomUniverse,
    scale: u32,
    numerators: Vec<u128>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubmeasureViolation {
    ZeroNotNull,
    NotPositive(Element),
    UnitAboveOne,
    NotMonotone { smaller: Element, larger: Element },
    NotSubadditive { left: Element, right: Element },
}

impl SubmeasureTable {
    pub fn universe(&self) -> AtomUniverse {
        self.universe
    }

    pub fn value(&self, a: &Element) -> Rational {
        Rational::new(
            BigInt::from(self.numerators[a.bits() as usize]),
            BigInt::one() << self.scale as usize,
        )
    }

    /// `(element, value)` for every element, ascending by mask.
    pub fn entries(&self) -> impl Iterator<Item = (Element, Rational)> + '_ {
        (0..self.numerators.len() as u64).map(move |m| {
            let e = self.universe.element(m).expect("mask within universe");
            (e, self.value(&e))
        })
    }

    /// Checks null zero, strict positivity, `m(1) ≤ 1`, monotonicity over all
    /// pairs `a ⊆ b` and subadditivity over all pairs. Returns the first
    /// violation.
    pub fn check_axioms(&self) -> Option<SubmeasureViolation> {
        let v = &self.numerators;
        let one = 1u128 << self.scale;
        let full = self.universe.full_mask();
        let el = |m: u64| self.universe.element(m).expect("mask within universe");
        if v[0] != 0 {
            return Some(SubmeasureViolation::ZeroNotNull);
        }
        if v[full as usize] > one {
            return Some(SubmeasureViolation::UnitAboveOne);
        }
        if let Some(m) = (1..=full).find(|&m| v[m as usize] == 0) {
            return Some(SubmeasureViolation::NotPositive(el(m)));
        }
        for b in 0..=full {
            let mut a = b;
            loop {
                if v[a as usize] > v[b as usize] {
                    return Some(SubmeasureViolation::NotMonotone {
                        smaller: el(a),
                        larger: el(b),
                    });
                }
                if a == 0 {
                    break;
                }
                a = (a - 1) & b;
            }
        }
        for a in 0..=full {
            for b in 0..=full {
                if v[(a | b) as usize] > v[a as usize] + v[b as usize] {
                    return Some(SubmeasureViolation::NotSubadditive {
                        left: el(a),
                        right: el(b),
                    });
                }
            }
        }
        None
    }
}

/// Submeasure of a graded fragmentation: with `U_n = B − C_n`, `U_0 = B`,
///
/// ```text
/// m(a) = min { r ∈ D ∪ {1} : a ∈ V_r },  V_r = U_{n_1} ∨ … ∨ U_{n_k}
/// ```
///
/// for `r = Σ 2^-n_i`, `0 < n_1 < … < n_k`, and `V_1 = B`.
///
/// Each `U_n` is closed downward, so decompositions can be taken disjoint
/// and without zero parts; since `U_n = {0}` for `n ≥ N`, only levels
/// `1..N-1` carry parts. The table is filled by dynamic programming over
/// (remaining element, least level still usable), sweeping levels from the
/// deepest up.
pub fn balcar_jech_submeasure(frag: &Fragmentation) -> Result<SubmeasureTable> {
    if let GradedCheck::NotGraded(w) = is_graded(frag)? {
        return Err(FragmentationError::NotGraded(w));
    }
    let depth = frag.depth;
    if depth > MAX_SUBMEASURE_DEPTH {
        return Err(FragmentationError::TooDeep(depth));
    }
    let universe = frag.universe;
    let size = universe.element_count() as usize;
    let levels: Vec<u32> = (0..size as u64)
        .map(|m| frag.level_of_mask(m).unwrap_or(0))
        .collect();
    const UNREACHABLE: u128 = u128::MAX;
    // best[s]: cheapest cover of s using levels > j, for the current j
    let mut best = vec![UNREACHABLE; size];
    best[0] = 0;
    for n in (1..depth).rev() {
        let part_cost = 1u128 << (depth - n);
        let mut next = best.clone();
        for s in 1..size {
            let mut x = s;
            while x != 0 {
                // x ∈ U_n  ⇔  x ∉ C_n
                if levels[x] > n {
                    let rest = best[s & !x];
                    if rest != UNREACHABLE && rest + part_cost < next[s] {
                        next[s] = rest + part_cost;
                    }
                }
                x = (x - 1) & s;
            }
        }
        best = next;
    }
    let one = 1u128 << depth;
    let numerators = best.into_iter().map(|v| v.min(one)).collect();
    Ok(SubmeasureTable {
        universe,
        scale: depth,
        numerators,
    })
}
