//! Intersection numbers and Kelley measures.
//!
//! The intersection number of a family `C` is the infimum over finite
//! sequences `s` from `C` of `κ_s = k/n`, where `k` is the largest number of
//! terms with a common point. On a finite algebra it equals the value of the
//! linear program
//!
//! ```text
//! maximize t  subject to  m(c) ≥ t for c ∈ C,  Σ w_i = 1,  w ≥ 0
//! ```
//!
//! whose optimal `w` is a Kelley measure, and whose dual multipliers (one per
//! member of `C`) rescale into a sequence attaining the infimum.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::algebra::{minimal_masks, AlgebraError, AtomUniverse, Element};
use crate::fragmentation::{Fragmentation, FragmentationError};
use crate::lp::{self, LinearProgram, LpError, LpStatus, Relation};
use crate::rational::{dyadic, Rational};

/// Longest witness sequence materialized by [`intersection_number`].
pub const WITNESS_LENGTH_CAP: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KelleyError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Fragmentation(#[from] FragmentationError),
    #[error("the family is empty")]
    EmptyFamily,
    #[error("the zero element cannot be a member")]
    ZeroMember,
    #[error("expected {expected} weights, found {found}")]
    WeightCount { expected: usize, found: usize },
    #[error("weight of atom {0} is negative")]
    NegativeWeight(usize),
    #[error("weights sum to {0}, not 1")]
    NotNormalized(Rational),
    #[error("intersection-number program ended with status {0:?}")]
    UnexpectedStatus(LpStatus),
    #[error("internal certificate check failed: {0}")]
    Certificate(String),
}

pub type Result<T> = std::result::Result<T, KelleyError>;

/// Finitely additive probability measure given by one weight per atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Measure {
    universe: AtomUniverse,
    weights: Vec<Rational>,
}

impl Measure {
    pub fn new(universe: AtomUniverse, weights: Vec<Rational>) -> Result<Self> {
        let expected = universe.atom_count() as usize;
        if weights.len() != expected {
            return Err(KelleyError::WeightCount {
                expected,
                found: weights.len(),
            });
        }
        if let Some(i) = weights.iter().position(|w| w.is_negative()) {
            return Err(KelleyError::NegativeWeight(i));
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return Err(KelleyError::NotNormalized(total));
        }
        Ok(Self { universe, weights })
    }

    pub fn uniform(universe: AtomUniverse) -> Self {
        let n = universe.atom_count() as usize;
        let w = Rational::new(BigInt::one(), BigInt::from(n));
        Self {
            universe,
            weights: vec![w; n],
        }
    }

    pub fn universe(&self) -> AtomUniverse {
        self.universe
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn value(&self, a: &Element) -> Rational {
        a.atoms()
            .map(|i| &self.weights[i as usize])
            .fold(Rational::zero(), |acc, w| acc + w)
    }

    /// `m(a) > 0` for every nonzero `a`, i.e. every atom has positive weight.
    pub fn is_strictly_positive(&self) -> bool {
        self.weights.iter().all(|w| w.is_positive())
    }

    /// `m(a)` for every mask `a`, indexed by mask.
    pub fn value_table(&self) -> std::result::Result<Vec<Rational>, AlgebraError> {
        self.universe.ensure_enumerable()?;
        let size = self.universe.element_count() as usize;
        let mut table = vec![Rational::zero(); size];
        for mask in 1..size {
            let low = mask.trailing_zeros() as usize;
            table[mask] = &table[mask & (mask - 1)] + &self.weights[low];
        }
        Ok(table)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeasureViolation {
    ZeroNotNull(Rational),
    NotPositive(Element),
    UnitNotOne(Rational),
    NotMonotone { smaller: Element, larger: Element },
    NotAdditive { left: Element, right: Element },
}

/// Checks a set function, given as a table indexed by mask, against the
/// finitely additive probability measure axioms: null zero, unit one,
/// monotone and additive on disjoint pairs; with `strict`, also positive off
/// zero. On a finite algebra countable additivity reduces to the finite case.
/// Every pair is examined. Returns the first violation.
pub fn check_measure_axioms(
    universe: AtomUniverse,
    table: &[Rational],
    strict: bool,
) -> std::result::Result<Option<MeasureViolation>, AlgebraError> {
    universe.ensure_enumerable()?;
    let full = universe.full_mask();
    let el = |bits: u64| universe.element(bits).expect("mask within universe");
    if !table[0].is_zero() {
        return Ok(Some(MeasureViolation::ZeroNotNull(table[0].clone())));
    }
    if !table[full as usize].is_one() {
        return Ok(Some(MeasureViolation::UnitNotOne(
            table[full as usize].clone(),
        )));
    }
    for a in 1..=full {
        if strict && !table[a as usize].is_positive() {
            return Ok(Some(MeasureViolation::NotPositive(el(a))));
        }
    }
    for b in 0..=full {
        let mut a = b;
        loop {
            // a ranges over subsets of b
            if table[a as usize] > table[b as usize] {
                return Ok(Some(MeasureViolation::NotMonotone {
                    smaller: el(a),
                    larger: el(b),
                }));
            }
            if a == 0 {
                break;
            }
            a = (a - 1) & b;
        }
    }
    for a in 0..=full {
        let rest = full & !a;
        let mut b = rest;
        loop {
            if table[(a | b) as usize] != &table[a as usize] + &table[b as usize] {
                return Ok(Some(MeasureViolation::NotAdditive {
                    left: el(a),
                    right: el(b),
                }));
            }
            if b == 0 {
                break;
            }
            b = (b - 1) & rest;
        }
    }
    Ok(None)
}

/// `κ_s` of one finite sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceKappa {
    pub sequence: Vec<Element>,
    pub n: usize,
    /// Largest number of terms sharing a point.
    pub k: usize,
    pub kappa_s: Rational,
}

fn check_members(family: &[Element]) -> Result<AtomUniverse> {
    let first = family.first().ok_or(KelleyError::EmptyFamily)?;
    let universe = first.universe();
    for c in family {
        if c.universe() != universe {
            return Err(AlgebraError::UniverseMismatch {
                left: universe.atom_count(),
                right: c.universe().atom_count(),
            }
            .into());
        }
        if c.is_zero() {
            return Err(KelleyError::ZeroMember);
        }
    }
    Ok(universe)
}

/// Per-atom count of the terms containing it.
pub(crate) fn atom_coverage(universe: AtomUniverse, sequence: &[Element]) -> Vec<usize> {
    let mut counts = vec![0usize; universe.atom_count() as usize];
    for c in sequence {
        for a in c.atoms() {
            counts[a as usize] += 1;
        }
    }
    counts
}

/// A subfamily has a common point iff some atom lies in all of its members,
/// so the largest intersecting subfamily has the size of the highest atom
/// coverage.
pub fn kappa_of_sequence(sequence: &[Element]) -> Result<SequenceKappa> {
    let universe = check_members(sequence)?;
    let k = atom_coverage(universe, sequence)
        .into_iter()
        .max()
        .unwrap_or(0);
    let n = sequence.len();
    Ok(SequenceKappa {
        sequence: sequence.to_vec(),
        n,
        k,
        kappa_s: Rational::new(BigInt::from(k), BigInt::from(n)),
    })
}

/// Intersection number of a family together with its certificates.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaResult {
    pub kappa: Rational,
    /// Satisfies `m(c) ≥ κ` for every member.
    pub kelley_measure: Measure,
    /// Deduplicated members in ascending order.
    pub family: Vec<Element>,
    /// Dual multiplier of each member of `family`; these sum to one.
    pub set_weights: Vec<Rational>,
    /// Sequence with `κ_s = κ`, or `None` when its length would exceed
    /// [`WITNESS_LENGTH_CAP`].
    pub witness_sequence: Option<Vec<Element>>,
    /// Length the witness has (or would have): the common denominator of the
    /// set weights.
    pub witness_length: BigInt,
}

impl KappaResult {
    pub fn witness_capped(&self) -> bool {
        self.witness_sequence.is_none()
    }
}

/// Exact intersection number of `family` via linear programming.
///
/// Supersets of members never change the value (replacing a term of a
/// sequence by a smaller member can only lower `κ_s`, and a measure bounded
/// below on a set is bounded below on its supersets), so the program is
/// posed over the minimal members only; the rest receive zero set weight.
pub fn intersection_number(family: &[Element]) -> Result<KappaResult> {
    let universe = check_members(family)?;
    let mut members: Vec<Element> = family.to_vec();
    members.sort_unstable();
    members.dedup();
    let masks: Vec<u64> = members.iter().map(|e| e.bits()).collect();
    let minimal = minimal_masks(&masks);

    let atoms = universe.atom_count() as usize;
    let t = atoms;
    let mut objective = vec![Rational::zero(); atoms + 1];
    objective[t] = Rational::one();
    let mut program = LinearProgram::maximize(objective);
    program.set_free(t)?;
    for &c in &minimal {
        let mut row = vec![Rational::zero(); atoms + 1];
        for (i, slot) in row.iter_mut().enumerate().take(atoms) {
            if c >> i & 1 == 1 {
                *slot = -Rational::one();
            }
        }
        row[t] = Rational::one();
        program.add_constraint(row, Relation::Le, Rational::zero())?;
    }
    let mut total = vec![Rational::one(); atoms + 1];
    total[t] = Rational::zero();
    program.add_constraint(total, Relation::Eq, Rational::one())?;

    let outcome = lp::solve(&program)?;
    if outcome.status != LpStatus::Optimal {
        return Err(KelleyError::UnexpectedStatus(outcome.status));
    }
    let kappa = outcome.value.clone();
    let kelley_measure = Measure::new(universe, outcome.primal[..atoms].to_vec())?;

    let set_weights: Vec<Rational> = masks
        .iter()
        .map(|m| match minimal.binary_search(m) {
            Ok(row) => outcome.dual[row].clone(),
            Err(_) => Rational::zero(),
        })
        .collect();

    let witness_length = set_weights
        .iter()
        .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
    let witness_sequence = match witness_length.to_u64() {
        Some(len) if len <= WITNESS_LENGTH_CAP => {
            let mut seq = Vec::with_capacity(len as usize);
            for (c, w) in members.iter().zip(&set_weights) {
                let copies = (w * Rational::from_integer(witness_length.clone()))
                    .to_integer()
                    .to_usize()
                    .expect("copy count fits in usize");
                seq.extend(std::iter::repeat_n(*c, copies));
            }
            Some(seq)
        }
        _ => None,
    };

    let result = KappaResult {
        kappa,
        kelley_measure,
        family: members,
        set_weights,
        witness_sequence,
        witness_length,
    };
    certify(&result)?;
    Ok(result)
}

fn certify(result: &KappaResult) -> Result<()> {
    for c in &result.family {
        if result.kelley_measure.value(c) < result.kappa {
            return Err(KelleyError::Certificate(format!(
                "Kelley measure of {c} is below kappa"
            )));
        }
    }
    if let Some(seq) = &result.witness_sequence {
        if kappa_of_sequence(seq)?.kappa_s != result.kappa {
            return Err(KelleyError::Certificate(
                "witness sequence does not attain kappa".into(),
            ));
        }
    }
    Ok(())
}

/// Strictly positive measure assembled from the Kelley measures `m_n` of the
/// levels `C_1 ⊆ … ⊆ C_N`:
///
/// ```text
/// m = (Σ_{n=1}^{N} m_n / 2^n) / (1 − 2^-N)
/// ```
///
/// The sum is truncated at the depth and renormalized so that `m(1) = 1`.
/// An empty level constrains nothing; it contributes the uniform measure.
pub fn measure_from_fragmentation(frag: &Fragmentation) -> Result<Measure> {
    frag.ensure_valid()?;
    let universe = frag.universe();
    let depth = frag.depth();
    let atoms = universe.atom_count() as usize;
    let mut combined = vec![Rational::zero(); atoms];
    for n in 1..=depth {
        let level = frag.members(n)?;
        let level_measure = if level.is_empty() {
            Measure::uniform(universe)
        } else {
            let result = intersection_number(&level)?;
            if !result.kappa.is_positive() {
                return Err(KelleyError::Certificate(format!(
                    "level {n} has intersection number zero"
                )));
            }
            result.kelley_measure
        };
        let scale = dyadic(n);
        for (slot, w) in combined.iter_mut().zip(level_measure.weights()) {
            *slot += w * &scale;
        }
    }
    let norm = Rational::one() - dyadic(depth);
    let weights = combined.into_iter().map(|w| w / &norm).collect();
    Measure::new(universe, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::enumerate_elements;
    use crate::rational::ratio;

    fn u(n: u32) -> AtomUniverse {
        AtomUniverse::new(n).unwrap()
    }

    fn el(n: u32, atoms: &[u32]) -> Element {
        u(n).from_atoms(atoms.iter().copied()).unwrap()
    }

    fn triangle() -> Vec<Element> {
        vec![el(3, &[0, 1]), el(3, &[1, 2]), el(3, &[0, 2])]
    }

    /// Largest intersecting subfamily by trying every index subset.
    fn brute_force_k(seq: &[Element]) -> usize {
        let mut best = 0;
        for pick in 1u32..(1 << seq.len()) {
            let common = seq
                .iter()
                .enumerate()
                .filter(|(i, _)| pick >> i & 1 == 1)
                .fold(u64::MAX, |acc, (_, c)| acc & c.bits());
            if common != 0 {
                best = best.max(pick.count_ones() as usize);
            }
        }
        best
    }

    #[test]
    fn sequence_kappa_examples() {
        let full = u(2).one();
        assert_eq!(kappa_of_sequence(&[full]).unwrap().kappa_s, ratio(1, 1));
        let pair = [el(2, &[0]), el(2, &[1])];
        assert_eq!(kappa_of_sequence(&pair).unwrap().kappa_s, ratio(1, 2));
        let tri = kappa_of_sequence(&triangle()).unwrap();
        assert_eq!(brute_force_k(&triangle()), 2);
        assert_eq!((tri.k, tri.n), (2, 3));
        assert_eq!(tri.kappa_s, ratio(2, 3));
    }

    #[test]
    fn sequence_kappa_errors() {
        assert_eq!(
            kappa_of_sequence(&[]).unwrap_err(),
            KelleyError::EmptyFamily
        );
        assert_eq!(
            kappa_of_sequence(&[u(2).zero()]).unwrap_err(),
            KelleyError::ZeroMember
        );
    }

    #[test]
    fn intersection_number_of_unit() {
        let r = intersection_number(&[u(3).one()]).unwrap();
        assert_eq!(r.kappa, ratio(1, 1));
        assert_eq!(r.witness_sequence.unwrap(), vec![u(3).one()]);
    }

    #[test]
    fn intersection_number_of_two_points() {
        let r = intersection_number(&[el(2, &[0]), el(2, &[1])]).unwrap();
        assert_eq!(r.kappa, ratio(1, 2));
        assert_eq!(r.kelley_measure.weights(), &[ratio(1, 2), ratio(1, 2)]);
        assert_eq!(r.witness_sequence.unwrap(), vec![el(2, &[0]), el(2, &[1])]);
        // sequences of length <= 4 over the two points never go below 1/2
        for len in 1..=4u32 {
            for pick in 0u32..(1 << len) {
                let seq: Vec<Element> = (0..len).map(|i| el(2, &[pick >> i & 1])).collect();
                assert!(kappa_of_sequence(&seq).unwrap().kappa_s >= ratio(1, 2));
            }
        }
    }

    #[test]
    fn intersection_number_of_triangle() {
        let r = intersection_number(&triangle()).unwrap();
        assert_eq!(r.kappa, ratio(2, 3));
        assert_eq!(
            r.kelley_measure.weights(),
            &[ratio(1, 3), ratio(1, 3), ratio(1, 3)]
        );
        let w = r.witness_sequence.unwrap();
        assert_eq!(w.len(), 3);
        assert_eq!(kappa_of_sequence(&w).unwrap().kappa_s, ratio(2, 3));
    }

    #[test]
    fn supersets_get_zero_weight() {
        let fam = vec![el(3, &[0]), el(3, &[0, 1]), el(3, &[1]), u(3).one()];
        let r = intersection_number(&fam).unwrap();
        assert_eq!(r.kappa, ratio(1, 2));
        for (c, w) in r.family.iter().zip(&r.set_weights) {
            if c.len() > 1 {
                assert!(w.is_zero());
            }
        }
    }

    #[test]
    fn intersection_number_errors() {
        assert_eq!(
            intersection_number(&[]).unwrap_err(),
            KelleyError::EmptyFamily
        );
        assert_eq!(
            intersection_number(&[el(2, &[0]), u(2).zero()]).unwrap_err(),
            KelleyError::ZeroMember
        );
    }

    #[test]
    fn measure_constructor_errors() {
        assert!(matches!(
            Measure::new(u(2), vec![ratio(1, 1)]),
            Err(KelleyError::WeightCount { .. })
        ));
        assert_eq!(
            Measure::new(u(2), vec![ratio(3, 2), ratio(-1, 2)]).unwrap_err(),
            KelleyError::NegativeWeight(1)
        );
        assert!(matches!(
            Measure::new(u(2), vec![ratio(1, 2), ratio(1, 3)]),
            Err(KelleyError::NotNormalized(_))
        ));
    }

    #[test]
    fn axiom_checker_accepts_measures_and_rejects_non_additive_functions() {
        let m = Measure::new(u(3), vec![ratio(1, 2), ratio(1, 3), ratio(1, 6)]).unwrap();
        let table = m.value_table().unwrap();
        assert_eq!(check_measure_axioms(u(3), &table, true).unwrap(), None);

        let point = Measure::new(u(2), vec![ratio(1, 1), ratio(0, 1)]).unwrap();
        let table = point.value_table().unwrap();
        assert_eq!(check_measure_axioms(u(2), &table, false).unwrap(), None);
        assert_eq!(
            check_measure_axioms(u(2), &table, true).unwrap(),
            Some(MeasureViolation::NotPositive(el(2, &[1])))
        );

        // the counting-style submeasure a -> min(1, |a|/2) is subadditive, not additive
        let capped: Vec<Rational> = (0u64..8)
            .map(|a| ratio(a.count_ones().min(2) as i64, 2))
            .collect();
        assert!(matches!(
            check_measure_axioms(u(3), &capped, true).unwrap(),
            Some(MeasureViolation::NotAdditive { .. })
        ));
    }

    #[test]
    fn lower_bound_argument_on_random_triples() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_xoshiro::SplitMix64::seed_from_u64(3);
        for _ in 0..200 {
            let atoms = rng.gen_range(1..=6u32);
            let universe = u(atoms);
            let weights: Vec<i64> = (0..atoms).map(|_| rng.gen_range(0..5)).collect();
            let total: i64 = weights.iter().sum();
            if total == 0 {
                continue;
            }
            let m =
                Measure::new(universe, weights.iter().map(|&w| ratio(w, total)).collect()).unwrap();
            let fam: Vec<Element> = (0..rng.gen_range(1..5))
                .map(|_| universe.element(rng.gen_range(1..(1u64 << atoms))).unwrap())
                .collect();
            let floor = fam.iter().map(|c| m.value(c)).min().unwrap();
            let seq: Vec<Element> = (0..rng.gen_range(1..8))
                .map(|_| fam[rng.gen_range(0..fam.len())])
                .collect();
            assert!(kappa_of_sequence(&seq).unwrap().kappa_s >= floor);
        }
    }

    #[test]
    fn monotone_under_enlarging_the_family() {
        let universe = u(4);
        let all: Vec<Element> = enumerate_elements(universe, |e| !e.is_zero())
            .unwrap()
            .collect();
        let small: Vec<Element> = all.iter().copied().filter(|e| e.len() >= 3).collect();
        let large: Vec<Element> = all.iter().copied().filter(|e| e.len() >= 2).collect();
        let ks = intersection_number(&small).unwrap().kappa;
        let kl = intersection_number(&large).unwrap().kappa;
        assert_eq!(ks, ratio(3, 4));
        assert_eq!(kl, ratio(1, 2));
        assert!(kl <= ks);
    }
}
