//! Small-ball functionals, the negative-moment bound, and exponent formulas.
//!
//! The degeneracy of a map is summarized by `u(g, eps) = E[eps / (eps + g)]`
//! where `g` is the squared gradient length (scalar maps) or the Malliavin
//! determinant.  This example checks the closed forms of `u`, the moment
//! bound `E[(g + eps)^{-r}] <= r eps^{-r} u(g, eps)` including its equality
//! case, the divergence probe for negative moments, and prints the
//! smoothness exponents predicted from `(p, theta)` integrability data.
//!
//! Run with `cargo run --example scaling_bounds`.

use fracsmooth::catalog;
use fracsmooth::gaussian::GaussianSpace;
use fracsmooth::smoothness::{
    degeneracy_values, neg_moment_probe, small_ball_margin, u_gamma_values, GradientNorm,
};

fn main() -> fracsmooth::Result<()> {
    // Closed forms: for g = 0, u = 1 and the moment bound at r = 1 is an
    // equality (both sides are 1/eps); for g = 1, u = eps / (1 + eps).
    let eps = 0.1;
    let zeros = vec![0.0; 1000];
    let ones = vec![1.0; 1000];
    let u0 = u_gamma_values(&zeros, eps)?;
    let u1 = u_gamma_values(&ones, eps)?;
    println!("u(0, {eps})   = {:.12}  (exact 1)", u0.estimate.mean);
    println!("u(1, {eps})   = {:.12}  (exact {:.12})", u1.estimate.mean, eps / (1.0 + eps));
    assert!((u0.estimate.mean - 1.0).abs() < 1e-12);
    assert!((u1.estimate.mean - eps / (1.0 + eps)).abs() < 1e-12);

    let m0 = small_ball_margin(&zeros, 1.0, eps)?;
    println!(
        "equality case: lhs = {:.9}, rhs = {:.9}  (both 1/eps = {})",
        m0.lhs.mean,
        m0.rhs,
        1.0 / eps
    );
    assert!((m0.lhs.mean - m0.rhs).abs() < 1e-9);

    // The bound on a genuinely random degeneracy: g = |grad f|^2 for
    // f(x) = x^2, so g = 4 x^2.
    let map = catalog::builtin("x1sq")?;
    let batch = GaussianSpace::new(1).sample(100_000, 13, 0)?;
    let g = degeneracy_values(&map, GradientNorm::GradLength, &batch)?;
    println!("\n   r    eps     E[(g+eps)^-r]   r eps^-r u     margin");
    for &r in &[1.0, 2.0] {
        for &eps in &[0.5, 0.1] {
            let m = small_ball_margin(&g, r, eps)?;
            println!(
                "{r:>4.1} {eps:>6.2}   {:>12.5}   {:>12.5}  {:>9.5}",
                m.lhs.mean,
                m.rhs,
                m.rhs - m.lhs.mean
            );
            assert!(
                m.lhs.mean <= m.rhs + 4.0 * m.lhs.stderr,
                "moment bound violated at r={r}, eps={eps}"
            );
        }
    }

    // Negative moments E[g^-theta]: with g = 4 x^2 the moment is finite for
    // theta < 1/2 and diverges beyond; the probe watches growth under sample
    // doubling.
    println!("\n theta  growth(half)  growth(full)  verdict");
    for &theta in &[0.3, 0.8] {
        let probe = neg_moment_probe(&g, theta)?;
        let (g1, g2) = probe.growth();
        let verdict = if g1.min(g2) <= 1.5 { "stable" } else { "diverging" };
        println!(" {theta:>4.1}  {g1:>10.4}   {g2:>10.4}    {verdict}");
    }

    // Predicted shift-TV exponents from (p, theta) integrability data.
    let grad = |p: f64, theta: f64| p * theta / (2.0 * p + theta);
    let matrix = |p: f64, theta: f64, k: f64| p * theta / (2.0 * p + (4.0 * k - 1.0) * theta);
    println!("\nscalar route:  p=10, theta=0.9  ->  alpha = {:.4}", grad(10.0, 0.9));
    println!("matrix route:  p=16, theta=0.5, k=2  ->  alpha = {:.4}", matrix(16.0, 0.5, 2.0));
    let alpha = grad(10.0, 0.9);
    println!(
        "tv-vs-transport exponent along a family: alpha/(1+alpha) = {:.4}",
        alpha / (1.0 + alpha)
    );

    Ok(())
}
