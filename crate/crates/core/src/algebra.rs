//! Finite Boolean set algebras over a universe of atoms.
//!
//! A finite Boolean algebra is the powerset of its atoms, so an element is a
//! bitmask: bit `i` is set when atom `i` belongs to the element. Elements
//! carry their universe so that mixing algebras is caught at the boundary.

use std::fmt;
use std::ops::{BitAnd, BitOr, Not, Sub};

use thiserror::Error;

/// Largest universe whose elements may be enumerated exhaustively.
pub const ENUMERATION_LIMIT: u32 = 24;

/// Largest universe representable at all (one bit per atom in a `u64`).
pub const MAX_ATOMS: u32 = 63;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("atom count {0} is outside 1..={MAX_ATOMS}")]
    InvalidAtomCount(u32),
    #[error("elements come from different universes ({left} vs {right} atoms)")]
    UniverseMismatch { left: u32, right: u32 },
    #[error("atom {atom} is out of range for a universe of {atom_count} atoms")]
    AtomOutOfRange { atom: u32, atom_count: u32 },
    #[error("mask {bits:#x} has bits outside a universe of {atom_count} atoms")]
    StrayBits { bits: u64, atom_count: u32 },
    #[error(
        "a universe of {atom_count} atoms exceeds the enumeration limit of {ENUMERATION_LIMIT}"
    )]
    TooLargeToEnumerate { atom_count: u32 },
    #[error("the zero element cannot belong to an antichain")]
    ZeroInAntichain,
    #[error("element {0} appears more than once")]
    DuplicateElement(Element),
}

pub type Result<T> = std::result::Result<T, AlgebraError>;

/// The set of atoms `{0, .., atom_count - 1}` underlying a finite algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomUniverse {
    atom_count: u32,
}

impl AtomUniverse {
    pub fn new(atom_count: u32) -> Result<Self> {
        if atom_count == 0 || atom_count > MAX_ATOMS {
            return Err(AlgebraError::InvalidAtomCount(atom_count));
        }
        Ok(Self { atom_count })
    }

    pub fn atom_count(&self) -> u32 {
        self.atom_count
    }

    pub fn full_mask(&self) -> u64 {
        (1u64 << self.atom_count) - 1
    }

    pub fn is_enumerable(&self) -> bool {
        self.atom_count <= ENUMERATION_LIMIT
    }

    pub fn ensure_enumerable(&self) -> Result<()> {
        if self.is_enumerable() {
            Ok(())
        } else {
            Err(AlgebraError::TooLargeToEnumerate {
                atom_count: self.atom_count,
            })
        }
    }

    /// Number of elements of the algebra, `2^atom_count`.
    pub fn element_count(&self) -> u64 {
        1u64 << self.atom_count
    }

    pub fn zero(&self) -> Element {
        Element {
            universe: *self,
            bits: 0,
        }
    }

    pub fn one(&self) -> Element {
        Element {
            universe: *self,
            bits: self.full_mask(),
        }
    }

    pub fn atom(&self, index: u32) -> Result<Element> {
        if index >= self.atom_count {
            return Err(AlgebraError::AtomOutOfRange {
                atom: index,
                atom_count: self.atom_count,
            });
        }
        Ok(Element {
            universe: *self,
            bits: 1 << index,
        })
    }

    pub fn element(&self, bits: u64) -> Result<Element> {
        if bits & !self.full_mask() != 0 {
            return Err(AlgebraError::StrayBits {
                bits,
                atom_count: self.atom_count,
            });
        }
        Ok(Element {
            universe: *self,
            bits,
        })
    }

    pub fn from_atoms<I: IntoIterator<Item = u32>>(&self, atoms: I) -> Result<Element> {
        let mut bits = 0u64;
        for a in atoms {
            bits |= self.atom(a)?.bits;
        }
        Ok(Element {
            universe: *self,
            bits,
        })
    }

    /// Every element in ascending mask order.
    pub fn elements(&self) -> Result<Elements> {
        self.ensure_enumerable()?;
        Ok(Elements {
            universe: *self,
            next: 0,
            end: self.element_count(),
        })
    }

    /// Every nonzero element (the set `B⁺`) in ascending mask order.
    pub fn nonzero_elements(&self) -> Result<Elements> {
        let mut it = self.elements()?;
        it.next = 1;
        Ok(it)
    }
}

/// Yields each element of the algebra filtered by `predicate`, in ascending
/// mask order.
pub fn enumerate_elements<F>(
    universe: AtomUniverse,
    predicate: F,
) -> Result<impl Iterator<Item = Element>>
where
    F: Fn(&Element) -> bool,
{
    Ok(universe.elements()?.filter(move |e| predicate(e)))
}

#[derive(Debug, Clone)]
pub struct Elements {
    universe: AtomUniverse,
    next: u64,
    end: u64,
}

impl Iterator for Elements {
    type Item = Element;

    fn next(&mut self) -> Option<Element> {
        if self.next >= self.end {
            return None;
        }
        let bits = self.next;
        self.next += 1;
        Some(Element {
            universe: self.universe,
            bits,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.end - self.next) as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Elements {}

/// A member of a finite Boolean set algebra.
///
/// Ordering is by universe, then by mask, which gives the ascending-mask
/// order used throughout for deterministic output.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    universe: AtomUniverse,
    bits: u64,
}

impl Element {
    pub fn universe(&self) -> AtomUniverse {
        self.universe
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn is_one(&self) -> bool {
        self.bits == self.universe.full_mask()
    }

    /// Number of atoms below this element.
    pub fn len(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn contains_atom(&self, atom: u32) -> bool {
        atom < 64 && self.bits >> atom & 1 == 1
    }

    pub fn atoms(&self) -> impl Iterator<Item = u32> + '_ {
        let bits = self.bits;
        (0..self.universe.atom_count).filter(move |&i| bits >> i & 1 == 1)
    }

    pub fn is_subset_of(&self, other: &Element) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn is_disjoint_from(&self, other: &Element) -> bool {
        self.bits & other.bits == 0
    }

    fn same_universe(&self, other: &Element) -> Result<()> {
        if self.universe != other.universe {
            return Err(AlgebraError::UniverseMismatch {
                left: self.universe.atom_count,
                right: other.universe.atom_count,
            });
        }
        Ok(())
    }

    fn with_bits(&self, bits: u64) -> Element {
        Element {
            universe: self.universe,
            bits,
        }
    }

    pub fn join(&self, other: &Element) -> Result<Element> {
        self.same_universe(other)?;
        Ok(self.with_bits(self.bits | other.bits))
    }

    pub fn meet(&self, other: &Element) -> Result<Element> {
        self.same_universe(other)?;
        Ok(self.with_bits(self.bits & other.bits))
    }

    pub fn difference(&self, other: &Element) -> Result<Element> {
        self.same_universe(other)?;
        Ok(self.with_bits(self.bits & !other.bits))
    }

    pub fn complement(&self) -> Element {
        self.with_bits(!self.bits & self.universe.full_mask())
    }

    /// Nonzero sub-elements in ascending mask order, including `self`.
    pub fn nonzero_subsets(&self) -> impl Iterator<Item = Element> {
        let this = *self;
        let full = self.bits;
        let mut sub = 0u64;
        let mut done = full == 0;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            sub = sub.wrapping_sub(full) & full;
            if sub == full {
                done = true;
            }
            Some(this.with_bits(sub))
        })
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.atoms().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

// Operator forms panic on a universe mismatch, like slice indexing does on a
// bad index; the named methods return the error instead.
impl BitOr for Element {
    type Output = Element;
    fn bitor(self, rhs: Element) -> Element {
        self.join(&rhs).expect("join across universes")
    }
}

impl BitAnd for Element {
    type Output = Element;
    fn bitand(self, rhs: Element) -> Element {
        self.meet(&rhs).expect("meet across universes")
    }
}

impl Sub for Element {
    type Output = Element;
    fn sub(self, rhs: Element) -> Element {
        self.difference(&rhs).expect("difference across universes")
    }
}

impl Not for Element {
    type Output = Element;
    fn not(self) -> Element {
        self.complement()
    }
}

/// Outcome of [`is_antichain`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AntichainCheck {
    Antichain,
    /// Two members that share an atom.
    Overlap(Element, Element),
}

impl AntichainCheck {
    pub fn holds(&self) -> bool {
        matches!(self, AntichainCheck::Antichain)
    }
}

fn check_family(sets: &[Element]) -> Result<()> {
    let Some(first) = sets.first() else {
        return Ok(());
    };
    for s in sets {
        first.same_universe(s)?;
        if s.is_zero() {
            return Err(AlgebraError::ZeroInAntichain);
        }
    }
    Ok(())
}

/// Decides whether `sets` are pairwise disjoint, returning the first
/// overlapping pair otherwise.
pub fn is_antichain(sets: &[Element]) -> Result<AntichainCheck> {
    check_family(sets)?;
    let mut seen = std::collections::HashSet::with_capacity(sets.len());
    for s in sets {
        if !seen.insert(*s) {
            return Err(AlgebraError::DuplicateElement(*s));
        }
    }
    for (i, a) in sets.iter().enumerate() {
        for b in &sets[i + 1..] {
            if !a.is_disjoint_from(b) {
                return Ok(AntichainCheck::Overlap(*a, *b));
            }
        }
    }
    Ok(AntichainCheck::Antichain)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxAntichain {
    pub size: usize,
    pub witness: Vec<Element>,
}

/// Minimal members of a family of nonzero masks, ascending by mask.
pub(crate) fn minimal_masks(masks: &[u64]) -> Vec<u64> {
    let mut sorted: Vec<u64> = masks.to_vec();
    sorted.sort_unstable_by_key(|m| (m.count_ones(), *m));
    sorted.dedup();
    let mut kept: Vec<u64> = Vec::new();
    for m in sorted {
        if !kept.iter().any(|&k| k & !m == 0) {
            kept.push(m);
        }
    }
    kept.sort_unstable();
    kept
}

/// Exact maximum number of pairwise-disjoint members of `within`.
///
/// A member strictly containing another member can always be swapped for the
/// smaller one, so the search runs on the minimal members only. It then
/// branches on the rarest still-available atom (either some candidate takes
/// it or nobody does) and prunes with an atom-counting bound against a greedy
/// incumbent.
pub fn max_antichain_size(within: &[Element]) -> Result<MaxAntichain> {
    check_family(within)?;
    let Some(first) = within.first() else {
        return Ok(MaxAntichain {
            size: 0,
            witness: Vec::new(),
        });
    };
    let universe = first.universe;
    let masks: Vec<u64> = within.iter().map(|e| e.bits).collect();
    let best = max_disjoint_masks(&masks);
    let witness = best
        .into_iter()
        .map(|b| universe.zero().with_bits(b))
        .collect::<Vec<_>>();
    Ok(MaxAntichain {
        size: witness.len(),
        witness,
    })
}

pub(crate) fn max_disjoint_masks(masks: &[u64]) -> Vec<u64> {
    let candidates = minimal_masks(masks);
    let mut incumbent = Vec::new();
    let mut used = 0u64;
    let mut by_size = candidates.clone();
    by_size.sort_unstable_by_key(|m| (m.count_ones(), *m));
    for m in by_size {
        if m & used == 0 {
            used |= m;
            incumbent.push(m);
        }
    }
    let available = candidates.iter().fold(0u64, |acc, m| acc | m);
    let mut search = PackingSearch {
        best: incumbent,
        current: Vec::new(),
    };
    search.branch(&candidates, available);
    let mut best = search.best;
    best.sort_unstable();
    best
}

struct PackingSearch {
    best: Vec<u64>,
    current: Vec<u64>,
}

impl PackingSearch {
    fn branch(&mut self, candidates: &[u64], available: u64) {
        let live: Vec<u64> = candidates
            .iter()
            .copied()
            .filter(|&c| c & !available == 0)
            .collect();
        if live.is_empty() {
            if self.current.len() > self.best.len() {
                self.best = self.current.clone();
            }
            return;
        }
        let covered = live.iter().fold(0u64, |acc, c| acc | c);
        let min_size = live.iter().map(|c| c.count_ones()).min().unwrap_or(1);
        let bound = live.len().min((covered.count_ones() / min_size) as usize);
        if self.current.len() + bound <= self.best.len() {
            return;
        }
        // rarest atom keeps the branching factor small
        let mut pivot = 0u32;
        let mut pivot_count = usize::MAX;
        let mut rest = covered;
        while rest != 0 {
            let atom = rest.trailing_zeros();
            rest &= rest - 1;
            let count = live.iter().filter(|&&c| c >> atom & 1 == 1).count();
            if count < pivot_count {
                pivot = atom;
                pivot_count = count;
            }
        }
        let bit = 1u64 << pivot;
        for &c in live.iter().filter(|&&c| c & bit != 0) {
            self.current.push(c);
            self.branch(&live, available & !c);
            self.current.pop();
        }
        self.branch(&live, available & !bit);
    }
}
