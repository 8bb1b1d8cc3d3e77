//! Independent reference computations used by the verification campaigns.
//! Each one is slow and direct; none shares code paths with the routine it
//! checks beyond the exact LP solver.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use setalg::algebra::Element;
use setalg::fragmentation::Fragmentation;
use setalg::kalton_roberts::ThreeFamily;
use setalg::kelley::kappa_of_sequence;
use setalg::lp::{self, LinearProgram, LpStatus, Relation};
use setalg::rational::Rational;

/// `min over set weights w of max over atoms x of Σ_{c ∋ x} w_c`, the
/// covering side of the duality, solved as its own LP over every listed
/// member (duplicates and supersets included).
pub fn covering_lp_value(family: &[Element]) -> Rational {
    let universe = family[0].universe();
    let n = family.len();
    // variables: w_0..w_{n-1}, s; maximize -s
    let mut objective = vec![Rational::zero(); n + 1];
    objective[n] = -Rational::one();
    let mut program = LinearProgram::maximize(objective);
    for x in 0..universe.atom_count() {
        let mut row: Vec<Rational> = family
            .iter()
            .map(|c| {
                if c.contains_atom(x) {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect();
        row.push(-Rational::one());
        program
            .add_constraint(row, Relation::Le, Rational::zero())
            .expect("row width matches");
    }
    let mut total = vec![Rational::one(); n];
    total.push(Rational::zero());
    program
        .add_constraint(total, Relation::Eq, Rational::one())
        .expect("row width matches");
    let outcome = lp::solve(&program).expect("well-formed program");
    assert_eq!(
        outcome.status,
        LpStatus::Optimal,
        "covering LP is feasible and bounded"
    );
    -outcome.value
}

/// Smallest `κ_s` over all sequences of length `1..=max_len` drawn from
/// `family`. `κ_s` ignores order, so multisets suffice.
pub fn min_sequence_kappa(family: &[Element], max_len: usize) -> Rational {
    let distinct: Vec<Element> = family
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut best: Option<Rational> = None;
    let mut current = Vec::with_capacity(max_len);
    multisets(&distinct, 0, max_len, &mut current, &mut |seq| {
        let k = kappa_of_sequence(seq).expect("nonzero members").kappa_s;
        if best.as_ref().is_none_or(|b| k < *b) {
            best = Some(k);
        }
    });
    best.expect("at least one sequence")
}

fn multisets(
    items: &[Element],
    start: usize,
    max_len: usize,
    current: &mut Vec<Element>,
    visit: &mut dyn FnMut(&[Element]),
) {
    if !current.is_empty() {
        visit(current);
    }
    if current.len() == max_len {
        return;
    }
    for i in start..items.len() {
        current.push(items[i]);
        multisets(items, i, max_len, current, visit);
        current.pop();
    }
}

/// Distinct representatives by plain backtracking, or `None`.
pub fn brute_force_sdr(family: &[Vec<u32>]) -> Option<Vec<u32>> {
    fn go(family: &[Vec<u32>], used: &mut BTreeSet<u32>, out: &mut Vec<u32>) -> bool {
        let i = out.len();
        if i == family.len() {
            return true;
        }
        for &x in &family[i] {
            if used.insert(x) {
                out.push(x);
                if go(family, used, out) {
                    return true;
                }
                out.pop();
                used.remove(&x);
            }
        }
        false
    }
    let mut out = Vec::new();
    go(family, &mut BTreeSet::new(), &mut out).then_some(out)
}

/// Whether some nonempty `I` with `|I| ≤ k` has `|⋃_{i∈I} A_i| ≤ |I|`, by
/// enumerating every such `I`.
pub fn naive_is_bad(family: &ThreeFamily, k: u64) -> bool {
    fn go(sets: &[[u32; 3]], start: usize, k: usize, chosen: &mut Vec<usize>) -> bool {
        if !chosen.is_empty() {
            let union: BTreeSet<u32> = chosen.iter().flat_map(|&i| sets[i]).collect();
            if union.len() <= chosen.len() {
                return true;
            }
        }
        if chosen.len() == k {
            return false;
        }
        for i in start..sets.len() {
            chosen.push(i);
            if go(sets, i + 1, k, chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    go(family.sets(), 0, k as usize, &mut Vec::new())
}

/// `V_r` for every `r = q / 2^(N-1)`, `0 ≤ q < 2^(N-1)`, indexed by `q`:
/// writing `r = Σ_{n∈S} 2^-n`, `V_r` is every join of one element from each
/// `U_n = B − C_n`, `n ∈ S` (and `V_0 = {0}`). Digits at `N` or deeper only
/// add `U_n = {0}`, so these are all the distinct sets below `V_1 = B`.
/// Entry `[q][mask]` says whether `mask ∈ V_r`.
pub fn v_sets(frag: &Fragmentation) -> Vec<Vec<bool>> {
    let u = frag.universe();
    let size = u.element_count() as usize;
    let levels = frag.depth().saturating_sub(1) as usize;
    let below: Vec<Vec<usize>> = (1..=levels as u32)
        .map(|n| {
            (0..size)
                .filter(|&m| {
                    let e = u.element(m as u64).expect("mask within universe");
                    m == 0 || !frag.contains(n, &e)
                })
                .collect()
        })
        .collect();
    (0..1usize << levels)
        .map(|q| {
            let mut reach = vec![false; size];
            reach[0] = true;
            for (i, part) in below.iter().enumerate() {
                // level i + 1 is binary digit i of r
                if q >> (levels - 1 - i) & 1 == 0 {
                    continue;
                }
                let mut next = vec![false; size];
                for s in (0..size).filter(|&s| reach[s]) {
                    for &x in part {
                        next[s | x] = true;
                    }
                }
                reach = next;
            }
            reach
        })
        .collect()
}

/// The submeasure straight from its definition, `m(a) = min { r : a ∈ V_r }`
/// over `r ∈ D ∪ {1}` with `V_1 = B`, using [`v_sets`]. Returns the table by
/// mask.
pub fn submeasure_by_decomposition(frag: &Fragmentation) -> Vec<Rational> {
    let size = frag.universe().element_count() as usize;
    let levels = frag.depth().saturating_sub(1);
    let scale = Rational::from_integer((1u64 << levels).into());
    let v = v_sets(frag);
    (0..size)
        .map(|m| {
            v.iter()
                .position(|set| set[m])
                .map(|q| Rational::from_integer((q as u64).into()) / &scale)
                .unwrap_or_else(Rational::one)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use setalg::algebra::AtomUniverse;
    use setalg::kelley::Measure;
    use setalg::rational::ratio;

    #[test]
    fn covering_value_of_the_triangle() {
        let u = AtomUniverse::new(3).unwrap();
        let fam: Vec<Element> = [[0, 1], [1, 2], [0, 2]]
            .iter()
            .map(|s| u.from_atoms(s.iter().copied()).unwrap())
            .collect();
        assert_eq!(covering_lp_value(&fam), ratio(2, 3));
        assert_eq!(min_sequence_kappa(&fam, 3), ratio(2, 3));
        assert_eq!(min_sequence_kappa(&fam, 2), ratio(1, 1));
    }

    #[test]
    fn brute_sdr_examples() {
        assert_eq!(brute_force_sdr(&[vec![1], vec![1, 2]]), Some(vec![1, 2]));
        assert_eq!(brute_force_sdr(&[vec![1, 2], vec![1], vec![2]]), None);
    }

    #[test]
    fn naive_badness_examples() {
        let three = ThreeFamily::new(3, vec![[1, 2, 3]; 3]).unwrap();
        assert!(naive_is_bad(&three, 3));
        assert!(!naive_is_bad(&three, 2));
    }

    #[test]
    fn decomposition_on_uniform_four() {
        let u = AtomUniverse::new(4).unwrap();
        let frag = Fragmentation::from_measure(&Measure::uniform(u)).unwrap();
        let t = submeasure_by_decomposition(&frag);
        assert_eq!(t[0], ratio(0, 1));
        for a in 0..4 {
            assert_eq!(t[1 << a], ratio(1, 2));
        }
        assert_eq!(t[0b0101], ratio(1, 1));
        assert_eq!(t[0b1111], ratio(1, 1));
    }

    #[test]
    fn v_sets_are_monotone_and_add_up() {
        use crate::gen::{random_graded_fragmentation, rng, FragmentationStyle};
        let mut r = rng(17);
        for atoms in 1..=6 {
            let u = AtomUniverse::new(atoms).unwrap();
            for style in FragmentationStyle::ALL {
                let frag = random_graded_fragmentation(&mut r, u, style);
                if frag.depth() > 8 {
                    continue;
                }
                let v = v_sets(&frag);
                let size = v[0].len();
                let subset = |a: &[bool], b: &[bool]| a.iter().zip(b).all(|(x, y)| !x || *y);
                for q in 1..v.len() {
                    assert!(subset(&v[q - 1], &v[q]), "V not increasing at {q}");
                }
                for q in 0..v.len() {
                    for t in 0..v.len() - q {
                        let sum = &v[q + t];
                        for a in (0..size).filter(|&a| v[q][a]) {
                            for b in (0..size).filter(|&b| v[t][b]) {
                                assert!(sum[a | b], "V_r ∨ V_s not inside V_(r+s)");
                            }
                        }
                    }
                }
            }
        }
    }
}
