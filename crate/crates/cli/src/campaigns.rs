//! Seeded verification campaigns. Instances run in parallel, one derived
//! seed each, and are aggregated in seed-list order.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use setalg::algebra::AtomUniverse;
use setalg::fragmentation::{self, Fragmentation};
use setalg::kalton_roberts::{self, FamilyVerdict, KrParams, SdrResult};
use setalg::kelley::{self, check_measure_axioms};
use setalg::rational::{parse_rational, ratio, Rational};

use crate::gen::{self, FragmentationStyle};
use crate::oracles;
use crate::report::{element, elements, exact, exact_list};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckTally {
    pub name: &'static str,
    pub passed: u64,
    pub failed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignReport {
    pub campaign: &'static str,
    pub count: usize,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<CheckTally>,
    /// First failing instance in seed-list order.
    pub first_counterexample: Option<Value>,
    pub summary: Value,
}

impl CampaignReport {
    pub fn failures(&self) -> u64 {
        self.checks.iter().map(|c| c.failed).sum()
    }

    pub fn tally(&self, name: &str) -> Option<&CheckTally> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Outcome of one instance: pass/fail counts per named check, a
/// counterexample if anything failed, and campaign-specific numbers.
struct Outcome {
    counts: Vec<(u64, u64)>,
    counterexample: Option<Value>,
    extra: Value,
}

impl Outcome {
    fn new(checks: usize) -> Self {
        Self {
            counts: vec![(0, 0); checks],
            counterexample: None,
            extra: Value::Null,
        }
    }

    fn record(&mut self, check: usize, ok: bool, detail: impl FnOnce() -> Value) {
        if ok {
            self.counts[check].0 += 1;
        } else {
            self.counts[check].1 += 1;
            if self.counterexample.is_none() {
                self.counterexample = Some(detail());
            }
        }
    }
}

fn run<F>(
    name: &'static str,
    checks: &[&'static str],
    count: usize,
    seed: u64,
    one: F,
) -> (CampaignReport, Vec<Value>)
where
    F: Fn(usize, u64) -> Outcome + Sync,
{
    let seeds = gen::instance_seeds(seed, count);
    let outcomes: Vec<Outcome> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &s)| one(i, s))
        .collect();
    let mut tallies: Vec<CheckTally> = checks
        .iter()
        .map(|&name| CheckTally {
            name,
            passed: 0,
            failed: 0,
        })
        .collect();
    let mut first = None;
    let mut extras = Vec::with_capacity(count);
    for (o, s) in outcomes.into_iter().zip(&seeds) {
        for (t, (p, f)) in tallies.iter_mut().zip(o.counts) {
            t.passed += p;
            t.failed += f;
        }
        if first.is_none() {
            first = o
                .counterexample
                .map(|c| json!({"instance_seed": s, "detail": c}));
        }
        extras.push(o.extra);
    }
    let pass = tallies.iter().all(|t| t.failed == 0);
    (
        CampaignReport {
            campaign: name,
            count,
            seed,
            pass,
            checks: tallies,
            first_counterexample: first,
            summary: Value::Null,
        },
        extras,
    )
}

/// κ against the covering LP, the witness sequence, the Kelley measure and
/// every sequence of length at most 6.
pub fn duality(count: usize, seed: u64) -> CampaignReport {
    const CHECKS: [&str; 4] = [
        "lp_value",
        "witness_sequence",
        "measure_bound",
        "sequence_soundness",
    ];
    let (report, _) = run("duality", &CHECKS, count, seed, |_, s| {
        let mut r = gen::rng(s);
        let u = AtomUniverse::new(r.gen_range(1..=10)).expect("small universe");
        let sets = r.gen_range(1..=8);
        let family = gen::random_family(&mut r, u, sets);
        let mut o = Outcome::new(CHECKS.len());
        let k = kelley::intersection_number(&family).expect("nonzero family");
        let show = |extra: Value| json!({"family": elements(&family), "kappa": exact(&k.kappa), "got": extra});
        let primal = oracles::covering_lp_value(&family);
        o.record(0, primal == k.kappa, || show(exact(&primal)));
        let witness = k.witness_sequence.as_ref().map(|w| {
            kelley::kappa_of_sequence(w)
                .expect("nonzero members")
                .kappa_s
        });
        o.record(1, witness.as_ref() == Some(&k.kappa), || {
            show(witness.as_ref().map(exact).unwrap_or(Value::Null))
        });
        let low = family.iter().find(|c| k.kelley_measure.value(c) < k.kappa);
        o.record(2, low.is_none(), || {
            show(low.map(element).unwrap_or(Value::Null))
        });
        let best = oracles::min_sequence_kappa(&family, 6);
        o.record(3, best >= k.kappa, || show(exact(&best)));
        o
    });
    report
}

/// `κ(C_n) ≥ 1/(30K²)` on every level of random measure fragmentations.
pub fn thm41(count: usize, seed: u64) -> CampaignReport {
    const CHECKS: [&str; 2] = ["kappa_bound", "coverage_witness"];
    let (mut report, extras) = run("thm41", &CHECKS, count, seed, |_, s| {
        let mut r = gen::rng(s);
        let u = AtomUniverse::new(r.gen_range(1..=10)).expect("small universe");
        let m = gen::random_measure(&mut r, u);
        let frag = Fragmentation::from_measure(&m).expect("strictly positive");
        let mut o = Outcome::new(CHECKS.len());
        let mut tightest: Option<Rational> = None;
        for n in 1..=frag.depth() {
            let level = frag.members(n).expect("enumerable");
            let rep =
                kalton_roberts::check_theorem41(&frag, n, &level).expect("preconditions hold");
            let slack = &rep.kappa / &rep.bound;
            if tightest.as_ref().is_none_or(|t| slack < *t) {
                tightest = Some(slack);
            }
            let show = || {
                json!({"measure": exact_list(m.weights()), "level": n, "kappa": exact(&rep.kappa),
                       "K": rep.big_k, "bound": exact(&rep.bound), "witness_size": rep.witness_size})
            };
            o.record(0, rep.bound_holds, show);
            o.record(1, rep.witness_holds, show);
        }
        o.extra = json!({"levels": frag.depth(), "min_ratio": tightest.map(|t| exact(&t))});
        o
    });
    let levels: u64 = extras
        .iter()
        .map(|e| e["levels"].as_u64().unwrap_or(0))
        .sum();
    // smallest κ / (1/(30K²)) seen on any level
    let tightest = extras
        .iter()
        .filter_map(|e| e["min_ratio"].as_str())
        .filter_map(|t| parse_rational(t).ok())
        .min();
    report.summary = json!({
        "levels_checked": levels,
        "min_kappa_over_bound": tightest.as_ref().map(exact),
    });
    report
}

/// Submeasure axioms and the measure built back from each fragmentation.
pub fn submeasure_axioms(count: usize, seed: u64) -> CampaignReport {
    const CHECKS: [&str; 3] = [
        "submeasure_axioms",
        "pipeline_measure",
        "decomposition_oracle",
    ];
    let (mut report, _) = run("submeasure-axioms", &CHECKS, count, seed, |i, s| {
        let mut r = gen::rng(s);
        let u = AtomUniverse::new(r.gen_range(1..=10)).expect("small universe");
        let style = FragmentationStyle::ALL[i % FragmentationStyle::ALL.len()];
        let frag = gen::random_graded_fragmentation(&mut r, u, style);
        let mut o = Outcome::new(CHECKS.len());
        let describe =
            || json!({"atoms": u.atom_count(), "style": style.name(), "depth": frag.depth()});
        let table = fragmentation::balcar_jech_submeasure(&frag).expect("graded");
        let violation = table.check_axioms();
        o.record(
            0,
            violation.is_none(),
            || json!({"instance": describe(), "violation": format!("{violation:?}")}),
        );
        let m = kelley::measure_from_fragmentation(&frag).expect("valid fragmentation");
        let values = m.value_table().expect("enumerable");
        let bad = check_measure_axioms(u, &values, true).expect("enumerable");
        o.record(
            1,
            bad.is_none(),
            || json!({"instance": describe(), "violation": format!("{bad:?}")}),
        );
        if u.atom_count() <= 6 {
            let oracle = oracles::submeasure_by_decomposition(&frag);
            let mismatch = table
                .entries()
                .find(|(e, v)| oracle[e.bits() as usize] != *v);
            o.record(2, mismatch.is_none(), || {
                let (e, v) = mismatch.clone().expect("mismatch present");
                json!({"instance": describe(), "element": element(&e), "dp": exact(&v),
                       "oracle": exact(&oracle[e.bits() as usize])})
            });
        }
        o
    });
    report.summary =
        json!({"styles": FragmentationStyle::ALL.iter().map(|s| s.name()).collect::<Vec<_>>()});
    report
}

/// First-attempt success rate of the family search; passes at 99% or more.
pub fn kr_badrate(count: usize, seed: u64, params: KrParams, max_attempts: u64) -> CampaignReport {
    const CHECKS: [&str; 2] = ["search_succeeded", "returned_family_good"];
    let (mut report, extras) = run("kr-badrate", &CHECKS, count, seed, |_, s| {
        let mut o = Outcome::new(CHECKS.len());
        match kalton_roberts::kr_search(&params, s, max_attempts) {
            Ok(found) => {
                o.record(0, true, || Value::Null);
                let good = kalton_roberts::verify_family(&found.family, params.k).is_good();
                o.record(1, good, || json!({"sets": found.family.sets()}));
                o.extra = json!(found.attempts);
            }
            Err(e) => {
                o.record(0, false, || json!(e.to_string()));
                o.extra = json!(max_attempts);
            }
        }
        o
    });
    let attempts: Vec<u64> = extras.iter().map(|e| e.as_u64().unwrap_or(0)).collect();
    let first = attempts.iter().filter(|&&a| a == 1).count();
    let sampled: u64 = attempts.iter().sum();
    let succeeded = report.tally("search_succeeded").map_or(0, |t| t.passed);
    let bad = sampled - succeeded;
    let pi = kalton_roberts::pi_bound(params.m, params.p, params.k)
        .map(|b| exact(&b.value))
        .unwrap_or(Value::Null);
    let rate_ok = count > 0 && ratio(first as i64, count as i64) >= ratio(99, 100);
    report.pass &= rate_ok;
    report.summary = json!({
        "m": params.m, "K": params.big_k, "k": params.k, "p": params.p, "pi": pi,
        "first_attempt_successes": first, "families_sampled": sampled, "bad_families": bad,
        "first_attempt_rate": exact(&ratio(first as i64, count.max(1) as i64)),
        "required_rate": "99/100",
    });
    report
}

/// Matching-based SDR against backtracking and the inductive construction.
pub fn hall(count: usize, seed: u64) -> CampaignReport {
    const CHECKS: [&str; 4] = [
        "agrees_with_brute_force",
        "representatives_valid",
        "violator_exact",
        "inductive_agrees",
    ];
    let (mut report, extras) = run("hall", &CHECKS, count, seed, |_, s| {
        let mut r = gen::rng(s);
        let ground = r.gen_range(1..=7u32);
        let sets = r.gen_range(1..=7usize);
        let family: Vec<Vec<u32>> = (0..sets)
            .map(|_| (0..ground).filter(|_| r.gen_bool(0.35)).collect())
            .collect();
        let mut o = Outcome::new(CHECKS.len());
        let show = || json!({"family": family});
        let brute = oracles::brute_force_sdr(&family);
        let fast = kalton_roberts::hall_sdr(&family);
        o.record(0, brute.is_some() == fast.representatives().is_some(), show);
        match &fast {
            SdrResult::Representatives(reps) => {
                let distinct =
                    reps.iter().collect::<std::collections::BTreeSet<_>>().len() == reps.len();
                let member = family.iter().zip(reps).all(|(s, x)| s.contains(x));
                o.record(1, distinct && member, show);
            }
            SdrResult::HallViolation { indices, union } => {
                let real: std::collections::BTreeSet<u32> = indices
                    .iter()
                    .flat_map(|&i| family[i].iter().copied())
                    .collect();
                let exact_union = real.into_iter().collect::<Vec<_>>() == *union;
                o.record(2, exact_union && union.len() < indices.len(), show);
            }
        }
        let inductive = kalton_roberts::inductive_sdr(&family);
        o.record(3, inductive.is_some() == brute.is_some(), show);
        o.extra = json!(brute.is_some());
        o
    });
    let with_sdr = extras.iter().filter(|e| e.as_bool() == Some(true)).count();
    report.summary =
        json!({"families_with_sdr": with_sdr, "families_without_sdr": count - with_sdr});
    report
}

/// The union-search badness test against enumeration of every small index
/// set, on families of at most 15 triples with `k ≤ 4`.
pub fn verify_family(count: usize, seed: u64) -> CampaignReport {
    const CHECKS: [&str; 2] = ["agrees_with_enumeration", "witness_exact"];
    let (mut report, extras) = run("verify-family", &CHECKS, count, seed, |_, s| {
        let mut r = gen::rng(s);
        let m = r.gen_range(1..=15u64);
        let k = r.gen_range(1..=4u64);
        let p = r.gen_range(3..=9u32);
        let fam = kalton_roberts::sample_three_family(m, p, r.gen()).expect("p ≥ 3");
        let mut o = Outcome::new(CHECKS.len());
        let show = || json!({"p": p, "k": k, "sets": fam.sets()});
        let naive = oracles::naive_is_bad(&fam, k);
        let verdict = kalton_roberts::verify_family(&fam, k);
        o.record(0, naive == !verdict.is_good(), show);
        if let FamilyVerdict::Bad { indices, union } = &verdict {
            let real: std::collections::BTreeSet<u32> =
                indices.iter().flat_map(|&i| fam.sets()[i]).collect();
            let ok = !indices.is_empty()
                && indices.len() as u64 <= k
                && real.len() <= indices.len()
                && real.into_iter().collect::<Vec<_>>() == *union;
            o.record(1, ok, show);
        }
        o.extra = json!(naive);
        o
    });
    let bad = extras.iter().filter(|e| e.as_bool() == Some(true)).count();
    report.summary = json!({"bad_families": bad, "good_families": count - bad});
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_campaigns_pass_and_repeat() {
        let a = duality(6, 1);
        assert!(a.pass, "{a:?}");
        assert_eq!(a, duality(6, 1));
        assert!(thm41(3, 2).pass);
        assert!(submeasure_axioms(6, 3).pass);
        assert!(hall(40, 4).pass);
        assert!(verify_family(40, 5).pass);
        let params = kalton_roberts::choose_params(100, 1).unwrap();
        let kr = kr_badrate(20, 6, params, 50);
        assert!(kr.pass, "{kr:?}");
    }
}
