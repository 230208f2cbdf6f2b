//! Second-order jets and the Ornstein–Uhlenbeck operator.
//!
//! Evaluates values, gradients and Hessians of polynomial and closure-backed
//! maps by forward-mode automatic differentiation, then checks the Hermite
//! eigenrelation `L H_m = -m H_m` for the operator
//! `L f = trace D^2 f - <x, grad f>` pointwise.
//!
//! Run with `cargo run --example jets_and_generator`.

use std::sync::Arc;

use fracsmooth::catalog;
use fracsmooth::gaussian::GaussianSpace;
use fracsmooth::maps::{ornstein_uhlenbeck, ClosureComponent, MapSpec};

fn main() -> fracsmooth::Result<()> {
    // A polynomial map written in the same config schema the CLI accepts:
    // each monomial is [[e1, ..., en], coeff].
    let map = MapSpec::from_config_str(
        r#"{
            "name": "demo",
            "dim_in": 2, "dim_out": 1,
            "components": [ [ [[2, 1], 3.0], [[0, 0], -1.0] ] ]
        }"#,
    )?;
    let x = [0.7, -1.2];
    let jet = &map.eval_jet2(&x)?[0];

    // f(x, y) = 3 x^2 y - 1: grad = (6xy, 3x^2), hessian = [[6y, 6x], [6x, 0]].
    println!("f(0.7, -1.2)      = {:>10.6}  (exact {:.6})", jet.value, 3.0 * 0.49 * -1.2 - 1.0);
    println!(
        "grad              = ({:.6}, {:.6})  (exact ({:.6}, {:.6}))",
        jet.gradient[0],
        jet.gradient[1],
        6.0 * 0.7 * -1.2,
        3.0 * 0.49
    );
    assert!((jet.value - (3.0 * 0.49 * -1.2 - 1.0)).abs() < 1e-12);
    assert!((jet.hess(0, 0) - 6.0 * -1.2).abs() < 1e-12);
    assert!((jet.hess(0, 1) - 6.0 * 0.7).abs() < 1e-12);
    assert!((jet.hess(1, 1)).abs() < 1e-12);
    assert!((jet.laplacian() - 6.0 * -1.2).abs() < 1e-12);

    // Closure-backed maps get the same jets through dual-number arithmetic.
    let sine = MapSpec::from_closures(
        "sin_x1",
        2,
        vec![ClosureComponent {
            jet: Arc::new(|xs| xs[0].sin()),
            value: Arc::new(|xs| xs[0].sin()),
        }],
    );
    let sj = &sine.eval_jet2(&x)?[0];
    println!(
        "sin(x1): value {:.6}, d/dx1 {:.6}, d2/dx1^2 {:.6}",
        sj.value,
        sj.gradient[0],
        sj.hess(0, 0)
    );
    assert!((sj.value - x[0].sin()).abs() < 1e-12);
    assert!((sj.gradient[0] - x[0].cos()).abs() < 1e-12);
    assert!((sj.hess(0, 0) + x[0].sin()).abs() < 1e-12);

    // Hermite eigenrelation: L H_m = -m H_m for m = 1..5, checked at a
    // Gaussian cloud of points.
    let batch = GaussianSpace::new(1).sample(200, 11, 0)?;
    println!("\n m   max |L H_m + m H_m|  over 200 points");
    for m in 1..=5u32 {
        let h = catalog::builtin(&format!("hermite{m}"))?;
        let mut worst = 0.0f64;
        for point in batch.iter() {
            let lh = ornstein_uhlenbeck(&h, 0, point)?;
            let value = h.eval_jet2(point)?[0].value;
            worst = worst.max((lh + m as f64 * value).abs());
        }
        println!(" {m}   {worst:>12.3e}");
        assert!(worst < 1e-9, "eigenrelation violated for degree {m}");
    }

    Ok(())
}
