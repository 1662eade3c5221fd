//! The acceptance suite: one test per criterion, each printing its
//! pass/fail line. Criteria 6 and 9 encode asymptotic scaling windows that
//! desk-scale grids provably cannot reach; their measured values match
//! exact/independent oracles (see the check details in the failure
//! message), so they are expected to stay red until the windows move.

use dynaperc::acceptance as acc;

fn assert_criterion(result: acc::CriterionResult) {
    println!("{}", result.line());
    assert!(result.pass, "{}", result.line());
}

#[test]
fn c01_analytic_oracles() {
    assert_criterion(acc::criterion_1());
}

#[test]
fn c02_birth_death_oracle() {
    assert_criterion(acc::criterion_2());
}

#[test]
fn c03_reset_times() {
    assert_criterion(acc::criterion_3());
}

#[test]
fn c04_evolving_set_exact_suite() {
    assert_criterion(acc::criterion_4());
}

#[test]
fn c05_fast_refresh_anchor() {
    assert_criterion(acc::criterion_5());
}

#[test]
fn c06_subcritical_scaling() {
    // Known-red: the fitted exponent over mu in {0.01..0.1} is ~0.71 and
    // horizon-independent; an independent fixed-timestep simulator agrees.
    // The linear-in-mu prefactor has not converged in this decade.
    assert_criterion(acc::criterion_6());
}

#[test]
fn c07_supercritical_flatness() {
    assert_criterion(acc::criterion_7());
}

#[test]
fn c08_critical_scaling() {
    assert_criterion(acc::criterion_8());
}

#[test]
fn c09_one_arm_exponent() {
    // Known-red: the exact depth-survival recursion fitted over the same
    // window gives -0.775; the Monte Carlo matches it to four decimals.
    // The asymptotic exponent -1 emerges only for radii far beyond 128.
    assert_criterion(acc::criterion_9());
}

#[test]
fn c10_subcritical_tails() {
    assert_criterion(acc::criterion_10());
}

#[test]
fn c11_trifurcation_bound() {
    assert_criterion(acc::criterion_11());
}

#[test]
fn c12_initial_configuration_irrelevance() {
    assert_criterion(acc::criterion_12());
}

#[test]
fn c13_worker_count_determinism() {
    assert_criterion(acc::criterion_13());
}
