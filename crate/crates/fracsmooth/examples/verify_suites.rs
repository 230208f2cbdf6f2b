//! Programmatic access to the verification harness.
//!
//! Every identity, inequality and scaling prediction the crate knows about
//! is packaged as a named check; checks are grouped into suites.  This
//! example runs the algebraic-identity suite at a reduced sample size,
//! prints the aggregate verdict counts, and demonstrates that the forced
//! failure fixture is caught (the harness can prove a bound false, not just
//! true).
//!
//! Run with `cargo run --example verify_suites`.

use fracsmooth::harness::{run_suite, suite_checks, HarnessConfig, SUITE_NAMES};

fn main() -> fracsmooth::Result<()> {
    println!("available suites: {}", SUITE_NAMES.join(", "));
    println!("checks in 'identities': {}", suite_checks("identities")?.join(", "));

    let cfg = HarnessConfig {
        samples: 20_000,
        seed: 7,
    };
    let report = run_suite("identities", &cfg)?;
    println!("\nidentities @ 20k samples: {}", report.summary());
    assert!(report.all_ok(), "identity suite must pass at any sample size");

    // A report knows whether it is clean, and failures are inspectable rows.
    let forced = run_suite("forced-fail", &cfg)?;
    println!("forced-fail fixture:      {}", forced.summary());
    assert!(!forced.all_ok());
    assert_eq!(forced.failures(), 1);
    for row in forced.rows.iter().filter(|r| !r.verdict.is_ok()) {
        println!(
            "caught: {} / {} with lhs {:.3} > rhs {:.3}",
            row.check, row.case, row.lhs, row.rhs
        );
    }

    Ok(())
}
