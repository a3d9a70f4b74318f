//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with the check count. Run with `cargo test -p jacobel-core --test
//! acceptance` (add `-- --nocapture` to see the lines for passing criteria).

use jacobel_core::selftest::{self as st, CriterionOutcome};

fn assert_criterion(outcome: CriterionOutcome) {
    println!(
        "criterion {} ({}): {} [{} checks]",
        outcome.id,
        outcome.name,
        if outcome.passed { "PASS" } else { "FAIL" },
        outcome.checks
    );
    for failure in &outcome.failures {
        println!("    {failure}");
    }
    assert!(
        outcome.passed,
        "criterion {} ({}) failed",
        outcome.id, outcome.name
    );
}

#[test]
fn acceptance_1_beta_additivity() {
    assert_criterion(st::criterion_beta_additivity());
}

#[test]
fn acceptance_2_beta_shift() {
    assert_criterion(st::criterion_beta_shift());
}

#[test]
fn acceptance_3_banana_enumeration() {
    assert_criterion(st::criterion_banana_enumeration());
}

#[test]
fn acceptance_4_twister_uniqueness() {
    assert_criterion(st::criterion_twister_uniqueness(st::DEFAULT_SEED));
}

#[test]
fn acceptance_5_twister_difference() {
    assert_criterion(st::criterion_twister_difference());
}

#[test]
fn acceptance_6_abel_resolver() {
    assert_criterion(st::criterion_abel_resolver());
}

#[test]
fn acceptance_7_choice_independence() {
    assert_criterion(st::criterion_choice_independence());
}

#[test]
fn acceptance_8_worked_limits() {
    assert_criterion(st::criterion_worked_limits());
}

#[test]
fn acceptance_9_determinism() {
    let report = st::run(st::DEFAULT_SEED);
    let ninth = report
        .outcomes
        .iter()
        .find(|o| o.id == 9)
        .expect("ninth outcome")
        .clone();
    // byte-level identity of the serialized report is what the CLI certifies;
    // here the full report must already be reproducible as a value
    let again = st::run(st::DEFAULT_SEED);
    assert_eq!(
        format!("{:?}", report.outcomes),
        format!("{:?}", again.outcomes),
        "selftest reports differ between runs"
    );
    assert_criterion(ninth);
    assert!(report.passed(), "embedded criteria failed");
}
