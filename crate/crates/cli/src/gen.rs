//! Seeded random instances. Every generator takes the stream it draws from,
//! so a campaign can derive one stream per instance seed.

use rand::Rng;
use rand::SeedableRng;
use rand_xoshiro::SplitMix64;

use setalg::algebra::{AtomUniverse, Element};
use setalg::fragmentation::Fragmentation;
use setalg::kelley::Measure;
use setalg::rational::ratio;

/// Largest raw weight of one atom. With at most 1024 atoms the common
/// denominator stays at or below `2^16`.
pub const MAX_RAW_WEIGHT: i64 = 64;

pub fn rng(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

/// `count` instance seeds derived from one master seed.
pub fn instance_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut r = rng(seed);
    (0..count).map(|_| r.gen()).collect()
}

/// Strictly positive measure: integer weights in `1..=64`, normalized.
pub fn random_measure(rng: &mut SplitMix64, universe: AtomUniverse) -> Measure {
    let n = universe.atom_count() as usize;
    let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=MAX_RAW_WEIGHT)).collect();
    let total: i64 = raw.iter().sum();
    Measure::new(universe, raw.iter().map(|&r| ratio(r, total)).collect())
        .expect("positive weights summing to one")
}

/// `sets` nonzero elements, drawn uniformly with repetition.
pub fn random_family(rng: &mut SplitMix64, universe: AtomUniverse, sets: usize) -> Vec<Element> {
    (0..sets)
        .map(|_| {
            let bits = rng.gen_range(1..=universe.full_mask());
            universe.element(bits).expect("mask within universe")
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FragmentationStyle {
    /// `C_n = {a : m(a) ≥ 2^-n}`.
    Measure,
    /// `C_n = {a : max(m₁(a), m₂(a)) ≥ 2^-n}`.
    MaxOfTwo,
    /// Every other level of a measure fragmentation.
    Coarsened,
}

impl FragmentationStyle {
    pub const ALL: [FragmentationStyle; 3] = [Self::Measure, Self::MaxOfTwo, Self::Coarsened];

    pub fn name(self) -> &'static str {
        match self {
            Self::Measure => "measure",
            Self::MaxOfTwo => "max-of-two",
            Self::Coarsened => "coarsened",
        }
    }
}

fn level_table(frag: &Fragmentation) -> Vec<u32> {
    let u = frag.universe();
    let mut table = vec![0u32; u.element_count() as usize];
    for a in u.nonzero_elements().expect("enumerable universe") {
        table[a.bits() as usize] = frag.level(&a).expect("measure fragmentations cover B⁺");
    }
    table
}

/// A valid graded fragmentation. Each style is graded for the same reason
/// the measure case is: if `a ∪ b` is heavy at scale `2^-n` under some
/// measure, one of the parts is heavy at scale `2^-(n+1)` under it.
pub fn random_graded_fragmentation(
    rng: &mut SplitMix64,
    universe: AtomUniverse,
    style: FragmentationStyle,
) -> Fragmentation {
    let first = Fragmentation::from_measure(&random_measure(rng, universe))
        .expect("generated measures are strictly positive");
    match style {
        FragmentationStyle::Measure => first,
        FragmentationStyle::MaxOfTwo => {
            let second = Fragmentation::from_measure(&random_measure(rng, universe))
                .expect("generated measures are strictly positive");
            let table: Vec<u32> = level_table(&first)
                .into_iter()
                .zip(level_table(&second))
                .map(|(x, y)| x.min(y))
                .collect();
            let depth = (0..universe.atom_count())
                .map(|i| table[1usize << i])
                .max()
                .unwrap_or(1);
            Fragmentation::from_dense(universe, depth, table).expect("table has full size")
        }
        FragmentationStyle::Coarsened => {
            let table: Vec<u32> = level_table(&first)
                .into_iter()
                .map(|l| l.div_ceil(2))
                .collect();
            Fragmentation::from_dense(universe, first.depth().div_ceil(2), table)
                .expect("table has full size")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use setalg::fragmentation::{is_graded, validate};
    use setalg::kelley::check_measure_axioms;

    #[test]
    fn generators_are_deterministic() {
        let u = AtomUniverse::new(4).unwrap();
        assert_eq!(
            random_measure(&mut rng(7), u),
            random_measure(&mut rng(7), u)
        );
        assert_eq!(instance_seeds(3, 5), instance_seeds(3, 5));
        assert_ne!(instance_seeds(3, 5), instance_seeds(4, 5));
    }

    #[test]
    fn generated_measures_pass_the_axioms() {
        let mut r = rng(11);
        for atoms in 1..=8 {
            let u = AtomUniverse::new(atoms).unwrap();
            let m = random_measure(&mut r, u);
            assert!(m.weights().iter().all(|w| *w.denom() <= (1 << 16).into()));
            let table = m.value_table().unwrap();
            assert_eq!(check_measure_axioms(u, &table, true).unwrap(), None);
        }
    }

    #[test]
    fn generated_fragmentations_are_valid_and_graded() {
        let mut r = rng(5);
        for atoms in 1..=7 {
            let u = AtomUniverse::new(atoms).unwrap();
            for style in FragmentationStyle::ALL {
                for _ in 0..5 {
                    let f = random_graded_fragmentation(&mut r, u, style);
                    assert!(validate(&f).is_valid(), "{style:?}");
                    assert!(is_graded(&f).unwrap().holds(), "{style:?}");
                }
            }
        }
    }
}
