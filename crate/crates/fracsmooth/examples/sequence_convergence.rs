//! Convergence of a map sequence in distribution, with rate and vacuity.
//!
//! Runs the packaged demo for a sequence of maps converging to a limit:
//! per-step TV and transport distances to the limit law, a composite rate
//! fitted on early indices and checked on late ones, and the vacuity
//! detector that refuses to certify anything when the degeneracy functional
//! saturates.  The healthy sequence passes; the designed-degenerate one is
//! flagged vacuous instead of passing.
//!
//! Run with `cargo run --example sequence_convergence` (release is faster).

use fracsmooth::harness::{demo_sequence, HarnessConfig};
use fracsmooth::report::{Report, Verdict};

fn main() -> fracsmooth::Result<()> {
    let cfg = HarnessConfig {
        samples: 40_000,
        seed: 7,
    };

    // A healthy sequence: f_m(x1, x2) = x1 + sin(m x2) / m converges to the
    // first-coordinate projection.
    let rows = demo_sequence("sin_perturb_1d", None, &cfg)?;
    let mut report = Report::new(cfg.seed, cfg.samples);
    report.extend(rows.clone());
    report.sort_rows();
    println!("sin_perturb_1d: {}", report.summary());
    println!("\n case                         lhs          rhs      verdict");
    for row in &rows {
        println!(
            " {:<26} {:>10.5}  {:>10.5}   {}",
            row.case,
            row.lhs,
            row.rhs,
            row.verdict.as_str()
        );
    }
    assert!(
        rows.iter().all(|r| r.verdict != Verdict::Fail),
        "healthy sequence should not fail"
    );
    let detector = rows
        .iter()
        .find(|r| r.case.contains("vacuity"))
        .expect("vacuity detector row");
    assert_eq!(detector.verdict, Verdict::Pass);

    // The designed-degenerate sequence: gradients vanish along the way, so
    // no step can be certified and the detector must fire.
    let rows = demo_sequence("vanishing_gradient_1d", None, &cfg)?;
    let detector = rows
        .iter()
        .find(|r| r.case.contains("vacuity"))
        .expect("vacuity detector row");
    println!(
        "\nvanishing_gradient_1d: detector verdict = {} (lhs {:.3} vs threshold {:.1})",
        detector.verdict.as_str(),
        detector.lhs,
        detector.rhs
    );
    assert_eq!(detector.verdict, Verdict::Vacuous);
    assert!(
        rows.iter().all(|r| r.verdict != Verdict::Pass || !r.case.contains("composite")),
        "no composite-rate step may pass for a degenerate sequence"
    );

    // The same rows render as the CSV schema all commands emit.
    let csv = report.to_csv();
    println!("\nfirst lines of the CSV report:");
    for line in csv.lines().take(4) {
        println!("  {line}");
    }

    Ok(())
}
