//! Total-variation and transport distances between empirical measures.
//!
//! Compares the histogram TV estimator against a closed-form shift oracle,
//! evaluates the capped-cost (Kantorovich–Rubinstein) and classical
//! Kantorovich norms on two-point measures where both are exact, and shows
//! the recorded-error contract of support coarsening.
//!
//! Run with `cargo run --example distances`.

use fracsmooth::densities::OracleDensity;
use fracsmooth::gaussian::GaussianSpace;
use fracsmooth::measures::{pushforward, tv_distance, BinningPolicy, EmpiricalMeasure};
use fracsmooth::transport::{kantorovich_norm, kr_norm, kr_norm_with, TransportOptions};
use fracsmooth::catalog;

fn two_point(h: f64) -> fracsmooth::Result<EmpiricalMeasure> {
    EmpiricalMeasure::new(1, vec![0.0, h], vec![1.0, -1.0])
}

fn main() -> fracsmooth::Result<()> {
    // Two-point signed measures delta_0 - delta_h: the capped norm is
    // min(h, 2) (teleporting both atoms costs 1 each) and the classical
    // Kantorovich norm is h.
    println!("   h    kr(delta_0-delta_h)  min(h,2)   kantorovich    h");
    for &h in &[0.5, 1.9, 2.5, 10.0] {
        let omega = two_point(h)?;
        let kr = kr_norm(&omega)?.value;
        let w1 = kantorovich_norm(&omega)?.value;
        println!("{h:>5.1}   {kr:>12.6}      {:>8.6}  {w1:>12.6}  {h:>5.1}", h.min(2.0));
        assert!((kr - h.min(2.0)).abs() < 1e-10);
        assert!((w1 - h).abs() < 1e-10);
    }

    // Histogram TV of a unit Gaussian shift against the closed form
    // 4 Phi(h/2) - 2 (total variation in the full-norm convention, range
    // [0, 2]).
    let map = catalog::builtin("x1")?;
    let batch = GaussianSpace::new(1).sample(200_000, 5, 0)?;
    let mu = pushforward(&map, &batch)?;
    println!("\n   h    tv(N(0,1), N(h,1))   oracle");
    for &h in &[0.5, 1.0, 2.0] {
        let nu = mu.shift(&[h])?;
        let tv = tv_distance(&mu, &nu, BinningPolicy::default())?;
        let oracle = OracleDensity::StdNormal.tv_shift(h);
        println!("{h:>5.1}   {:>12.6}    {oracle:>12.6}", tv.value);
        assert!(
            (tv.value - oracle).abs() < 0.02 * 2.0,
            "tv estimate off by more than 2% of the range"
        );
    }

    // The signed difference of the shift pair: its classical norm is exactly
    // h (translation cost), and the capped norm never exceeds either the
    // classical norm or the total mass.
    let nu = mu.shift(&[0.3])?;
    let omega = mu.difference(&nu)?;
    let exact = TransportOptions {
        support_limit: usize::MAX,
        coarsen: false,
    };
    let kr = kr_norm_with(&omega, &exact)?;
    let w1 = kantorovich_norm(&omega)?;
    println!(
        "\nshift 0.3 difference: kr = {:.6}, kantorovich = {:.6} (exact 0.3)",
        kr.value, w1.value
    );
    assert!((w1.value - 0.3).abs() < 1e-9);
    assert!(kr.value <= w1.value + 1e-12);

    // Coarsening to a bounded support records its worst-case effect in
    // `coarsening_error`; the exact value stays within it.
    let coarse = kr_norm_with(
        &omega,
        &TransportOptions {
            support_limit: 512,
            coarsen: true,
        },
    )?;
    println!(
        "coarsened kr = {:.6} with recorded error {:.2e} (exact {:.6})",
        coarse.value, coarse.coarsening_error, kr.value
    );
    assert!((coarse.value - kr.value).abs() <= coarse.coarsening_error);

    Ok(())
}
