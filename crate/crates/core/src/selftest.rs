//! The acceptance criteria, runnable as a library so the CLI `selftest`
//! command and the acceptance test target share one implementation. All
//! checks are exact; the randomized criterion is seeded and reproducible.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::abel::{
    chain_correction, chain_degrees, classify_admissibility, limit_multidegree,
    matching_assignments_for, pushforward_descriptor, resolve_abel_map, DesingularizationChoice,
    Stratum,
};
use crate::corpus::{corpus, CorpusEntry};
use crate::curve::NodalCurve;
use crate::stability::{
    beta_unchecked, classify, enumerate_semistable, Polarization, SheafClass,
};
use crate::twister::{
    exhaustive_quasistable_twister, find_quasistable_twister, solve_twister_coefficients,
    spanning_tree_count, twister_difference, twister_multidegree,
};
use crate::{EngineOptions, Rational};

const MAX_RECORDED_FAILURES: usize = 8;
pub const DEFAULT_SEED: u64 = 1_905;
pub const RANDOM_INSTANCES: usize = 504;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub checks: u64,
    pub failures: Vec<String>,
}

impl CriterionOutcome {
    fn new(id: u8, name: &'static str) -> Self {
        CriterionOutcome {
            id,
            name,
            passed: true,
            checks: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.passed = false;
            if self.failures.len() < MAX_RECORDED_FAILURES {
                self.failures.push(detail());
            }
        }
    }

    fn fail(&mut self, detail: String) {
        self.check(false, || detail);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelftestReport {
    pub seed: u64,
    pub outcomes: Vec<CriterionOutcome>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }
}

fn opts() -> EngineOptions {
    EngineOptions::default()
}

/// Criteria 1 through 8.
pub fn run_once(seed: u64) -> Vec<CriterionOutcome> {
    vec![
        criterion_beta_additivity(),
        criterion_beta_shift(),
        criterion_banana_enumeration(),
        criterion_twister_uniqueness(seed),
        criterion_twister_difference(),
        criterion_abel_resolver(),
        criterion_choice_independence(),
        criterion_worked_limits(),
    ]
}

/// All nine criteria. The ninth reruns the first eight and demands an
/// identical report plus a total runtime under a minute.
pub fn run(seed: u64) -> SelftestReport {
    let started = Instant::now();
    let first = run_once(seed);
    let second = run_once(seed);
    let elapsed = started.elapsed();

    let mut det = CriterionOutcome::new(9, "determinism");
    det.check(
        format!("{first:?}") == format!("{second:?}"),
        || "rerunning the suite produced a different report".to_string(),
    );
    det.check(elapsed.as_secs() < 60, || {
        format!("suite took {:?}, budget is 60 s", elapsed)
    });

    let mut outcomes = first;
    outcomes.push(det);
    SelftestReport { seed, outcomes }
}

fn polarizations(entry: &CorpusEntry) -> Vec<Polarization> {
    let mut all = vec![entry.polarization.clone()];
    all.extend(entry.extra_polarizations.iter().cloned());
    all
}

/// Criterion 1: beta is additive over component-disjoint subcurves, with the
/// boundary node count subtracted.
pub fn criterion_beta_additivity() -> CriterionOutcome {
    let started = Instant::now();
    let mut outcome = CriterionOutcome::new(1, "beta-additivity");
    for entry in corpus() {
        let curve = &entry.curve;
        let p = curve.component_count();
        for e in polarizations(&entry) {
            let mut degrees = vec![-2i64; p];
            'window: loop {
                let d = SheafClass::new(curve, &degrees).expect("window class");
                let subcurves = curve.proper_subcurves();
                for y in &subcurves {
                    for z in &subcurves {
                        if y.mask() & z.mask() != 0 {
                            continue;
                        }
                        let union = y.union(z);
                        let lhs = beta_unchecked(&e, &d, union);
                        let rhs = beta_unchecked(&e, &d, *y) + beta_unchecked(&e, &d, *z)
                            - Rational::from_integer(y.delta(z).expect("disjoint") as i64);
                        outcome.check(lhs == rhs, || {
                            format!(
                                "{}: additivity fails for Y={y}, Z={z}, d={:?}",
                                entry.name,
                                d.degrees()
                            )
                        });
                    }
                }
                // advance the window odometer
                let mut k = p;
                while k > 0 {
                    k -= 1;
                    if degrees[k] < 2 {
                        degrees[k] += 1;
                        for x in degrees.iter_mut().skip(k + 1) {
                            *x = -2;
                        }
                        continue 'window;
                    }
                }
                break;
            }
        }
    }
    outcome.check(started.elapsed().as_secs() < 5, || {
        format!("additivity sweep took {:?}, budget is 5 s", started.elapsed())
    });
    outcome
}

/// Criterion 2: moving the subtracted point from component i to component j
/// shifts beta by -1, +1 or 0 according to which of the two components the
/// subcurve contains.
pub fn criterion_beta_shift() -> CriterionOutcome {
    let mut outcome = CriterionOutcome::new(2, "beta-shift");
    for entry in corpus() {
        let curve = &entry.curve;
        let e = &entry.polarization;
        let p = curve.component_count();
        let twists: Vec<Vec<i64>> = (0..p)
            .map(|i| {
                find_quasistable_twister(
                    curve,
                    e,
                    &entry.line_bundle.minus_point(i),
                    entry.marked,
                    &opts(),
                )
                .expect("corpus twist")
                .coefficients
            })
            .collect();
        for (i, coefficients) in twists.iter().enumerate() {
            for j in 0..p {
                if i == j || curve.delta_between(i, j) == 0 {
                    continue;
                }
                let twist_i = twister_multidegree(curve, coefficients);
                let m_i = entry.line_bundle.minus_point(i).plus(&twist_i);
                let m = entry.line_bundle.minus_point(j).plus(&twist_i);
                let mut all = curve.proper_subcurves();
                all.push(curve.full_subcurve());
                for y in all {
                    let shift = beta_unchecked(e, &m, y) - beta_unchecked(e, &m_i, y);
                    let expected = if y.contains(j) && !y.contains(i) {
                        -1
                    } else if y.contains(i) && !y.contains(j) {
                        1
                    } else {
                        0
                    };
                    outcome.check(shift == Rational::from_integer(expected), || {
                        format!("{}: shift fails for pair ({i},{j}) at Y={y}", entry.name)
                    });
                }
            }
        }
    }
    outcome
}

/// Criterion 3: the banana's semistable and quasistable multidegrees of
/// total degree zero are exactly the hand-enumerated sets.
pub fn criterion_banana_enumeration() -> CriterionOutcome {
    let mut outcome = CriterionOutcome::new(3, "banana-enumeration");
    let entry = &corpus()[0];
    let e = Polarization::trivial(&entry.curve);
    match enumerate_semistable(&entry.curve, &e, 0, &opts()) {
        Err(err) => outcome.fail(format!("enumeration failed: {err}")),
        Ok((semi, quasi)) => {
            let to_vecs =
                |set: &[SheafClass]| set.iter().map(|s| s.degrees().to_vec()).collect::<Vec<_>>();
            outcome.check(
                to_vecs(&semi) == vec![vec![-1, 1], vec![0, 0], vec![1, -1]],
                || format!("semistable set is {:?}", to_vecs(&semi)),
            );
            outcome.check(
                to_vecs(&quasi) == vec![vec![0, 0], vec![1, -1]],
                || format!("quasistable set is {:?}", to_vecs(&quasi)),
            );
        }
    }
    outcome
}

struct Instance {
    e: Polarization,
    d: SheafClass,
    marked: usize,
}

fn corpus_instances(entry: &CorpusEntry) -> Vec<Instance> {
    let p = entry.curve.component_count();
    (0..p)
        .map(|i| Instance {
            e: entry.polarization.clone(),
            d: entry.line_bundle.minus_point(i),
            marked: entry.marked,
        })
        .collect()
}

fn random_instance(rng: &mut ChaCha8Rng, curve: &NodalCurve) -> Instance {
    let p = curve.component_count();
    let rank = rng.gen_range(1..=3i64);
    let mut e_degrees: Vec<i64> = (0..p).map(|_| rng.gen_range(-2..=2i64)).collect();
    let remainder = e_degrees.iter().sum::<i64>().rem_euclid(rank);
    e_degrees[0] += (rank - remainder) % rank;
    let e = Polarization::new(curve, rank, &e_degrees).expect("adjusted to divisibility");

    let expected = curve.genus() - 1 - e.slope();
    let mut d_degrees: Vec<i64> = (0..p).map(|_| rng.gen_range(-2..=2i64)).collect();
    // spread the degree correction so instances stay near-balanced
    let delta = expected - d_degrees.iter().sum::<i64>();
    let share = delta.div_euclid(p as i64);
    let remainder = delta.rem_euclid(p as i64) as usize;
    for (k, entry) in d_degrees.iter_mut().enumerate() {
        *entry += share + i64::from(k < remainder);
    }
    let d = SheafClass::new(curve, &d_degrees).expect("adjusted to degree");

    Instance {
        e,
        d,
        marked: rng.gen_range(0..p),
    }
}

/// Criterion 4: completeness-backed uniqueness of the quasistable twist. For
/// each instance the enumerated quasistable multidegrees contain exactly one
/// representative per twister class (their count matches the spanning tree
/// count of the dual graph), the instance class has exactly one, and both
/// the greedy search and the exhaustive box oracle return it.
pub fn criterion_twister_uniqueness(seed: u64) -> CriterionOutcome {
    let mut outcome = CriterionOutcome::new(4, "twister-uniqueness");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = corpus();

    let mut instances: Vec<(usize, Instance)> = Vec::new();
    for (idx, entry) in entries.iter().enumerate() {
        for instance in corpus_instances(entry) {
            instances.push((idx, instance));
        }
    }
    let mut round = 0usize;
    while instances.len() < RANDOM_INSTANCES {
        let idx = round % entries.len();
        instances.push((idx, random_instance(&mut rng, &entries[idx].curve)));
        round += 1;
    }

    let trees: Vec<i128> = entries
        .iter()
        .map(|entry| spanning_tree_count(&entry.curve))
        .collect();

    for (idx, instance) in &instances {
        let entry = &entries[*idx];
        let curve = &entry.curve;
        let label = || {
            format!(
                "{}: E=(r{},{:?}), d={:?}, P={}",
                entry.name,
                instance.e.rank(),
                instance.e.degrees(),
                instance.d.degrees(),
                instance.marked
            )
        };

        let (_, quasi) = match enumerate_semistable(curve, &instance.e, instance.marked, &opts()) {
            Ok(sets) => sets,
            Err(err) => {
                outcome.fail(format!("{}: enumeration failed: {err}", label()));
                continue;
            }
        };

        outcome.check(quasi.len() as i128 == trees[*idx], || {
            format!(
                "{}: {} quasistable classes, expected {}",
                label(),
                quasi.len(),
                trees[*idx]
            )
        });

        let in_class: Vec<&SheafClass> = quasi
            .iter()
            .filter(|q| solve_twister_coefficients(curve, &q.minus(&instance.d)).is_some())
            .collect();
        outcome.check(in_class.len() == 1, || {
            format!(
                "{}: {} quasistable representatives in the class",
                label(),
                in_class.len()
            )
        });

        let fast = find_quasistable_twister(curve, &instance.e, &instance.d, instance.marked, &opts());
        match fast {
            Err(err) => outcome.fail(format!("{}: greedy search failed: {err}", label())),
            Ok(t) => {
                if let Some(unique) = in_class.first() {
                    outcome.check(&&t.twisted == unique, || {
                        format!(
                            "{}: greedy result {:?} differs from the class representative {:?}",
                            label(),
                            t.twisted.degrees(),
                            unique.degrees()
                        )
                    });
                }
                match exhaustive_quasistable_twister(
                    curve,
                    &instance.e,
                    &instance.d,
                    instance.marked,
                    &opts(),
                ) {
                    Err(err) => outcome.fail(format!("{}: box oracle failed: {err}", label())),
                    Ok(coefficients) => outcome.check(coefficients == t.coefficients, || {
                        format!(
                            "{}: box oracle {:?} disagrees with greedy {:?}",
                            label(),
                            coefficients,
                            t.coefficients
                        )
                    }),
                }
            }
        }
    }
    outcome
}

/// Criterion 5: for every adjacent ordered pair the corrected intermediate
/// class is quasistable and the two per-component twists differ by the
/// removal twist of the difference subcurve. Both verifications run inside
/// `twister_difference`; a failure surfaces as an error.
pub fn criterion_twister_difference() -> CriterionOutcome {
    let mut outcome = CriterionOutcome::new(5, "twister-difference");
    for entry in corpus() {
        let curve = &entry.curve;
        let p = curve.component_count();
        for i in 0..p {
            for j in 0..p {
                if i != j && curve.delta_between(i, j) == 0 {
                    continue;
                }
                let result = twister_difference(
                    curve,
                    &entry.polarization,
                    &entry.line_bundle,
                    entry.marked,
                    i,
                    j,
                    &opts(),
                );
                match result {
                    Err(err) => outcome.fail(format!("{}: pair ({i},{j}): {err}", entry.name)),
                    Ok(r) => {
                        outcome.check(i != j || r.subcurve.is_empty(), || {
                            format!("{}: Z_({i},{i}) should be empty", entry.name)
                        });
                        if !r.subcurve.is_empty() {
                            outcome.check(
                                r.subcurve.contains(&j) && !r.subcurve.contains(&i),
                                || format!("{}: pair ({i},{j}) shape rule", entry.name),
                            );
                        }
                    }
                }
            }
        }
    }
    outcome
}

fn beta_on_chain(
    fiber_pol: &Polarization,
    class: &SheafClass,
    fiber: &crate::curve::ModifiedCurve,
    node: usize,
) -> Rational {
    let members = fiber.chain(node).expect("chain exists").to_vec();
    let sub = fiber
        .curve()
        .subcurve(&members)
        .expect("chain is a subcurve");
    beta_unchecked(fiber_pol, class, sub)
}

/// Criterion 6: the full resolver sweep over every stratum and every
/// matching assignment.
pub fn criterion_abel_resolver() -> CriterionOutcome {
    let started = Instant::now();
    let mut outcome = CriterionOutcome::new(6, "abel-resolver");
    for entry in corpus() {
        let curve = &entry.curve;
        let e = &entry.polarization;
        let l = &entry.line_bundle;

        match resolve_abel_map(curve, e, l, entry.marked, &DesingularizationChoice::new(), &opts())
        {
            Err(err) => {
                outcome.fail(format!("{}: resolver failed: {err}", entry.name));
                continue;
            }
            Ok(records) => {
                outcome.check(
                    records.len() == curve.component_count() + curve.node_count(),
                    || format!("{}: {} records", entry.name, records.len()),
                );
                for record in &records {
                    if let Stratum::Smooth(i) = record.stratum {
                        let twist = find_quasistable_twister(
                            curve,
                            e,
                            &l.minus_point(i),
                            entry.marked,
                            &opts(),
                        )
                        .expect("corpus twist");
                        outcome.check(record.limit == twist.twisted, || {
                            format!(
                                "{}: smooth stratum {} limit differs from the twisted class",
                                entry.name,
                                record.stratum_name()
                            )
                        });
                    }
                }
            }
        }

        for r in 0..curve.node_count() {
            for choice in matching_assignments_for(curve, r) {
                let stratum = Stratum::Node(r);
                let (fiber, limit) =
                    match limit_multidegree(curve, e, l, entry.marked, &choice, stratum, &opts()) {
                        Ok(pair) => pair,
                        Err(err) => {
                            outcome.fail(format!(
                                "{}: node {r} limit failed under {:?}: {err}",
                                entry.name,
                                choice.entries()
                            ));
                            continue;
                        }
                    };
                let fiber_pol = e.pullback(&fiber);
                let node_name = |n: usize| curve.node(n).name.clone();

                for (node, degree) in chain_degrees(&fiber, &limit) {
                    outcome.check((-1..=1).contains(&degree), || {
                        format!(
                            "{}: node {} limit chain degree {degree} over {}",
                            entry.name,
                            node_name(r),
                            node_name(node)
                        )
                    });
                    let b = beta_on_chain(&fiber_pol, &limit, &fiber, node);
                    outcome.check(
                        (0..=2).map(Rational::from_integer).any(|x| x == b),
                        || {
                            format!(
                                "{}: node {} beta {b} on chain over {}",
                                entry.name,
                                node_name(r),
                                node_name(node)
                            )
                        },
                    );
                }

                let corrected = match chain_correction(&fiber, &limit) {
                    Ok(c) => c,
                    Err(err) => {
                        outcome.fail(format!(
                            "{}: node {} correction failed: {err}",
                            entry.name,
                            node_name(r)
                        ));
                        continue;
                    }
                };
                for (node, degree) in chain_degrees(&fiber, &corrected) {
                    outcome.check((-1..=0).contains(&degree), || {
                        format!(
                            "{}: node {} corrected chain degree {degree} over {}",
                            entry.name,
                            node_name(r),
                            node_name(node)
                        )
                    });
                }
                outcome.check(
                    classify_admissibility(&fiber, &corrected).is_negatively_admissible(),
                    || format!("{}: node {} not negatively admissible", entry.name, node_name(r)),
                );

                let report = classify(
                    fiber.curve(),
                    &fiber_pol,
                    &corrected,
                    fiber.strict_transform(entry.marked),
                    &opts(),
                );
                outcome.check(report.verdict.is_quasistable(), || {
                    format!(
                        "{}: node {} corrected class is {} under {:?}",
                        entry.name,
                        node_name(r),
                        report.verdict,
                        choice.entries()
                    )
                });

                match pushforward_descriptor(&fiber, &corrected) {
                    Err(err) => outcome.fail(format!(
                        "{}: node {} pushforward failed: {err}",
                        entry.name,
                        node_name(r)
                    )),
                    Ok(push) => outcome.check(push.total == l.total() - 1, || {
                        format!(
                            "{}: node {} pushforward total {}",
                            entry.name,
                            node_name(r),
                            push.total
                        )
                    }),
                }
            }
        }
    }
    outcome.check(started.elapsed().as_secs() < 30, || {
        format!("resolver sweep took {:?}, budget is 30 s", started.elapsed())
    });
    outcome
}

/// Criterion 7: the pushforward descriptor of every node record is identical
/// across all matching assignments.
pub fn criterion_choice_independence() -> CriterionOutcome {
    let mut outcome = CriterionOutcome::new(7, "choice-independence");
    for entry in corpus() {
        let curve = &entry.curve;
        if curve.reducible_nodes().len() > 3 {
            continue;
        }
        for r in 0..curve.node_count() {
            let mut reference = None;
            for choice in matching_assignments_for(curve, r) {
                let stratum = Stratum::Node(r);
                let computed = limit_multidegree(
                    curve,
                    &entry.polarization,
                    &entry.line_bundle,
                    entry.marked,
                    &choice,
                    stratum,
                    &opts(),
                )
                .and_then(|(fiber, limit)| {
                    let corrected = chain_correction(&fiber, &limit)?;
                    pushforward_descriptor(&fiber, &corrected)
                });
                match computed {
                    Err(err) => outcome.fail(format!(
                        "{}: node {} failed under a matching: {err}",
                        entry.name,
                        curve.node(r).name
                    )),
                    Ok(push) => match &reference {
                        None => reference = Some(push),
                        Some(expected) => outcome.check(expected == &push, || {
                            format!(
                                "{}: node {} pushforward differs across matchings",
                                entry.name,
                                curve.node(r).name
                            )
                        }),
                    },
                }
            }
        }
    }
    outcome
}

/// Criterion 8: the two hand-composed worked limits.
pub fn criterion_worked_limits() -> CriterionOutcome {
    let mut outcome = CriterionOutcome::new(8, "worked-limits");
    let entries = corpus();

    let banana = &entries[0];
    match resolve_abel_map(
        &banana.curve,
        &banana.polarization,
        &banana.line_bundle,
        banana.marked,
        &DesingularizationChoice::new(),
        &opts(),
    ) {
        Err(err) => outcome.fail(format!("banana resolver failed: {err}")),
        Ok(records) => {
            let n1 = &records[2];
            outcome.check(n1.stratum == Stratum::Node(0), || {
                "banana record order".to_string()
            });
            outcome.check(
                n1.pushforward.degrees == vec![1, 0]
                    && n1.pushforward.noninvertible_nodes == vec![0]
                    && n1.pushforward.total == 0,
                || format!("banana record(n1) pushforward is {:?}", n1.pushforward),
            );
        }
    }

    let loop_entry = &entries[2];
    match resolve_abel_map(
        &loop_entry.curve,
        &loop_entry.polarization,
        &loop_entry.line_bundle,
        loop_entry.marked,
        &DesingularizationChoice::new(),
        &opts(),
    ) {
        Err(err) => outcome.fail(format!("loop resolver failed: {err}")),
        Ok(records) => {
            let node = &records[1];
            outcome.check(
                node.pushforward.degrees == vec![2]
                    && node.pushforward.noninvertible_nodes == vec![0]
                    && node.pushforward.total == 1,
                || format!("loop record(R) pushforward is {:?}", node.pushforward),
            );
        }
    }

    outcome
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abel::fiber_over;

    #[test]
    fn fiber_over_rejects_unknown_strata() {
        let entry = &corpus()[0];
        assert!(fiber_over(&entry.curve, Stratum::Smooth(7)).is_err());
        assert!(fiber_over(&entry.curve, Stratum::Node(7)).is_err());
    }

    #[test]
    fn quick_criteria_pass() {
        assert!(criterion_banana_enumeration().passed);
        assert!(criterion_worked_limits().passed);
    }
}
