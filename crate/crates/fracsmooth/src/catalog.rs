//! Named built-in maps, map sequences, and reference densities.
//!
//! The catalog is the shared vocabulary of the CLI, the examples, and the
//! verification harness: every built-in can be resolved by name with
//! [`builtin`], sequences of maps indexed by `m >= 1` with [`sequence`], and
//! [`list_catalog`] renders the whole inventory.

use std::sync::Arc;

use statrs::distribution::{ContinuousCDF, Normal};

use crate::jets::Dual2;
use crate::maps::{ClosureComponent, MapSpec, PolynomialMap};
use crate::{Error, Result};

/// One catalog row.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub kind: &'static str, // "map", "sequence", or "density"
    pub dims: String,       // "n=2, k=1" or "" for densities
    pub description: &'static str,
}

fn poly(name: &str, dim_in: usize, components: Vec<Vec<(Vec<u32>, f64)>>) -> MapSpec {
    let dim_out = components.len();
    MapSpec::polynomial(
        name,
        PolynomialMap {
            dim_in,
            dim_out,
            components,
        },
    )
    .expect("built-in polynomial must validate")
}

/// Probabilists' Hermite polynomial coefficients, `H_m(x)` for m = 1..=5.
/// These satisfy `L H_m = -m H_m` under the Ornstein–Uhlenbeck operator.
fn hermite_monomials(m: u32) -> Vec<(Vec<u32>, f64)> {
    match m {
        1 => vec![(vec![1], 1.0)],
        2 => vec![(vec![2], 1.0), (vec![0], -1.0)],
        3 => vec![(vec![3], 1.0), (vec![1], -3.0)],
        4 => vec![(vec![4], 1.0), (vec![2], -6.0), (vec![0], 3.0)],
        5 => vec![(vec![5], 1.0), (vec![3], -10.0), (vec![1], 15.0)],
        _ => unreachable!("hermite builtins cover degrees 1..=5"),
    }
}

/// `sin(w . x + phase)` scaled by `amp`, as an AD-backed closure component.
fn sin_linear(dim: usize, weights: Vec<f64>, amp: f64) -> ClosureComponent {
    let w_jet = weights.clone();
    ClosureComponent {
        jet: Arc::new(move |xs: &[Dual2]| {
            let mut acc = Dual2::constant(xs.len(), 0.0);
            for (x, w) in xs.iter().zip(&w_jet) {
                acc = &acc + &x.scale(*w);
            }
            acc.sin().scale(amp)
        }),
        value: Arc::new(move |x: &[f64]| {
            amp * x
                .iter()
                .zip(&weights)
                .map(|(xi, wi)| xi * wi)
                .sum::<f64>()
                .sin()
        }),
    }
    .also_assert(dim)
}

/// Coordinate projection `x_i` as a closure component (used when mixing
/// closure and polynomial components in one map).
fn coord_component(i: usize) -> ClosureComponent {
    ClosureComponent {
        jet: Arc::new(move |xs: &[Dual2]| xs[i].clone()),
        value: Arc::new(move |x: &[f64]| x[i]),
    }
}

impl ClosureComponent {
    fn also_assert(self, _dim: usize) -> Self {
        self
    }
}

/// Resolves a built-in map by name.
pub fn builtin(name: &str) -> Result<MapSpec> {
    let map = match name {
        // Linear forms and projections.
        "x1" => poly("x1", 1, vec![vec![(vec![1], 1.0)]]),
        "x1_shift_1" => poly("x1_shift_1", 1, vec![vec![(vec![1], 1.0), (vec![0], 1.0)]]),
        "proj1_2d" => poly("proj1_2d", 2, vec![vec![(vec![1, 0], 1.0)]]),
        "proj2_2d" => poly("proj2_2d", 2, vec![vec![(vec![0, 1], 1.0)]]),
        "x1_plus_x2" => poly("x1_plus_x2", 2, vec![vec![(vec![1, 0], 1.0), (vec![0, 1], 1.0)]]),

        // Quadratics.
        "x1sq" => poly("x1sq", 1, vec![vec![(vec![2], 1.0)]]),
        "quad_form_2d" => poly(
            // <Qx, x> with Q = [[1, 0.5], [0.5, 2]].
            "quad_form_2d",
            2,
            vec![vec![(vec![2, 0], 1.0), (vec![1, 1], 1.0), (vec![0, 2], 2.0)]],
        ),

        // Hermite polynomials.
        "hermite1" | "hermite2" | "hermite3" | "hermite4" | "hermite5" => {
            let m: u32 = name.as_bytes()[7] as u32 - b'0' as u32;
            poly(name, 1, vec![hermite_monomials(m)])
        }

        // Smooth bounded non-polynomials (closure-backed, AD jets).
        "sin_x1" => MapSpec::from_closures("sin_x1", 1, vec![sin_linear(1, vec![1.0], 1.0)]),
        "sin_lin_2d" => {
            MapSpec::from_closures("sin_lin_2d", 2, vec![sin_linear(2, vec![1.0, 0.5], 1.0)])
        }
        "norm_cdf_x1" => {
            // Phi(x1): pushes gamma_1 to the uniform law on [0, 1].
            let normal = Normal::new(0.0, 1.0).unwrap();
            MapSpec::from_closures(
                "norm_cdf_x1",
                1,
                vec![ClosureComponent {
                    jet: Arc::new(move |xs: &[Dual2]| {
                        let x = xs[0].value();
                        let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
                        xs[0].lift_unary(normal.cdf(x), pdf, -x * pdf)
                    }),
                    value: Arc::new(move |x: &[f64]| normal.cdf(x[0])),
                }],
            )
        }

        // Vector-valued maps.
        "id2" => poly(
            "id2",
            2,
            vec![vec![(vec![1, 0], 1.0)], vec![(vec![0, 1], 1.0)]],
        ),
        "sum_diff_2d" => poly(
            "sum_diff_2d",
            2,
            vec![
                vec![(vec![1, 0], 1.0), (vec![0, 1], 1.0)],
                vec![(vec![1, 0], 1.0), (vec![0, 1], -1.0)],
            ],
        ),
        "x1sq_x2" => poly(
            "x1sq_x2",
            2,
            vec![vec![(vec![2, 0], 1.0)], vec![(vec![0, 1], 1.0)]],
        ),
        "x1_x1" => poly(
            "x1_x1",
            1,
            vec![vec![(vec![1], 1.0)], vec![(vec![1], 1.0)]],
        ),
        "shear_3d" => poly(
            "shear_3d",
            3,
            vec![
                vec![(vec![1, 0, 0], 1.0)],
                vec![(vec![2, 0, 0], 1.0), (vec![0, 1, 0], 1.0)],
                vec![(vec![0, 0, 1], 1.0)],
            ],
        ),
        "shear_4d" => poly(
            "shear_4d",
            4,
            vec![
                vec![(vec![1, 0, 0, 0], 1.0)],
                vec![(vec![2, 0, 0, 0], 1.0), (vec![0, 1, 0, 0], 1.0)],
                vec![(vec![0, 2, 0, 0], 1.0), (vec![0, 0, 1, 0], 1.0)],
                vec![(vec![0, 0, 0, 1], 1.0)],
            ],
        ),
        _ => return Err(Error::UnknownMap(name.to_string())),
    };
    Ok(map)
}

/// Resolves the `m`-th element of a named map sequence (`m >= 1`).
pub fn sequence(name: &str, m: usize) -> Result<MapSpec> {
    assert!(m >= 1, "sequence index starts at 1");
    let s = 1.0 / m as f64;
    let spec = match name {
        // f_m(x) = x1 + sin(x2)/m: gradients stay bounded away from zero.
        "sin_perturb_1d" => MapSpec::from_closures(
            &format!("sin_perturb_1d[{m}]"),
            2,
            vec![ClosureComponent {
                jet: Arc::new(move |xs: &[Dual2]| &xs[0] + &xs[1].sin().scale(s)),
                value: Arc::new(move |x: &[f64]| x[0] + s * x[1].sin()),
            }],
        ),
        // f_m(x) = (x1 + sin(x2)/m, x2): Malliavin determinants stay near 1.
        "sin_perturb_2d" => MapSpec::from_closures(
            &format!("sin_perturb_2d[{m}]"),
            2,
            vec![
                ClosureComponent {
                    jet: Arc::new(move |xs: &[Dual2]| &xs[0] + &xs[1].sin().scale(s)),
                    value: Arc::new(move |x: &[f64]| x[0] + s * x[1].sin()),
                },
                coord_component(1),
            ],
        ),
        // f_m(x) = x1/m: gradient lengths collapse; smoothness bounds go vacuous.
        "vanishing_gradient_1d" => poly(
            &format!("vanishing_gradient_1d[{m}]"),
            1,
            vec![vec![(vec![1], s)]],
        ),
        // f_m(x) = (x1/m, x2): Malliavin determinants collapse.
        "vanishing_det_2d" => poly(
            &format!("vanishing_det_2d[{m}]"),
            2,
            vec![vec![(vec![1, 0], s)], vec![(vec![0, 1], 1.0)]],
        ),
        _ => return Err(Error::UnknownMap(format!("sequence {name}"))),
    };
    Ok(spec)
}

/// Names of all built-in maps, in catalog order.
pub const MAP_NAMES: &[&str] = &[
    "x1",
    "x1_shift_1",
    "proj1_2d",
    "proj2_2d",
    "x1_plus_x2",
    "x1sq",
    "quad_form_2d",
    "hermite1",
    "hermite2",
    "hermite3",
    "hermite4",
    "hermite5",
    "sin_x1",
    "sin_lin_2d",
    "norm_cdf_x1",
    "id2",
    "sum_diff_2d",
    "x1sq_x2",
    "x1_x1",
    "shear_3d",
    "shear_4d",
];

/// Names of all built-in map sequences.
pub const SEQUENCE_NAMES: &[&str] = &[
    "sin_perturb_1d",
    "sin_perturb_2d",
    "vanishing_gradient_1d",
    "vanishing_det_2d",
];

/// The full catalog: maps, sequences, and reference densities.
pub fn list_catalog() -> Vec<CatalogEntry> {
    let describe = |name: &'static str| -> &'static str {
        match name {
            "x1" => "identity coordinate; pushforward N(0,1)",
            "x1_shift_1" => "x1 + 1; pushforward N(1,1)",
            "proj1_2d" => "first coordinate projection of R^2",
            "proj2_2d" => "second coordinate projection of R^2",
            "x1_plus_x2" => "linear form x1 + x2; pushforward N(0,2)",
            "x1sq" => "x1^2; pushforward chi-squared with 1 dof",
            "quad_form_2d" => "<Qx, x> with Q = [[1, .5], [.5, 2]]",
            "hermite1" => "Hermite polynomial H1 = x",
            "hermite2" => "Hermite polynomial H2 = x^2 - 1",
            "hermite3" => "Hermite polynomial H3 = x^3 - 3x",
            "hermite4" => "Hermite polynomial H4 = x^4 - 6x^2 + 3",
            "hermite5" => "Hermite polynomial H5 = x^5 - 10x^3 + 15x",
            "sin_x1" => "sin(x1); smooth bounded, closure-backed",
            "sin_lin_2d" => "sin(x1 + 0.5 x2); closure-backed",
            "norm_cdf_x1" => "Phi(x1); pushforward uniform on [0,1]",
            "id2" => "identity on R^2; Malliavin det 1",
            "sum_diff_2d" => "(x1 + x2, x1 - x2); Malliavin det 4",
            "x1sq_x2" => "(x1^2, x2); Malliavin det 4*x1^2",
            "x1_x1" => "(x1, x1); degenerate, Malliavin det 0",
            "shear_3d" => "(x1, x2 + x1^2, x3); Malliavin det 1",
            "shear_4d" => "(x1, x2 + x1^2, x3 + x2^2, x4); Malliavin det 1",
            _ => "",
        }
    };
    let mut rows = Vec::new();
    for &name in MAP_NAMES {
        let map = builtin(name).unwrap();
        rows.push(CatalogEntry {
            name,
            kind: "map",
            dims: format!("n={}, k={}", map.dim_in(), map.dim_out()),
            description: describe(name),
        });
    }
    for &name in SEQUENCE_NAMES {
        let map = sequence(name, 1).unwrap();
        let desc = match name {
            "sin_perturb_1d" => "x1 + sin(x2)/m -> x1; converges in total variation",
            "sin_perturb_2d" => "(x1 + sin(x2)/m, x2) -> id2; converges in total variation",
            "vanishing_gradient_1d" => "x1/m; gradient collapses, bounds go vacuous",
            "vanishing_det_2d" => "(x1/m, x2); Malliavin det collapses, bounds go vacuous",
            _ => "",
        };
        rows.push(CatalogEntry {
            name,
            kind: "sequence",
            dims: format!("n={}, k={}", map.dim_in(), map.dim_out()),
            description: desc,
        });
    }
    for (name, desc) in [
        ("std_normal", "standard normal density oracle"),
        ("chi2_1", "chi-squared (1 dof) density oracle"),
        ("uniform_01", "uniform density oracle on [0,1]"),
    ] {
        rows.push(CatalogEntry {
            name: match name {
                "std_normal" => "std_normal",
                "chi2_1" => "chi2_1",
                _ => "uniform_01",
            },
            kind: "density",
            dims: String::new(),
            description: desc,
        });
    }
    rows
}

/// Resolves a map reference: a built-in name, or a path to a polynomial map
/// configuration file.
pub fn resolve(reference: &str) -> Result<MapSpec> {
    let path = std::path::Path::new(reference);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        return MapSpec::from_config_str(&text);
    }
    builtin(reference)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::ornstein_uhlenbeck;

    #[test]
    fn all_builtins_resolve_and_evaluate() {
        for &name in MAP_NAMES {
            let map = builtin(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            let x = vec![0.3; map.dim_in()];
            let jets = map.eval_jet2(&x).unwrap();
            assert_eq!(jets.len(), map.dim_out(), "{name} jet count");
            let mut vals = Vec::new();
            map.eval_value(&x, &mut vals).unwrap();
            for (jet, v) in jets.iter().zip(&vals) {
                assert!(
                    (jet.value - v).abs() < 1e-12,
                    "{name}: jet value {} vs plain value {v}",
                    jet.value
                );
            }
        }
    }

    #[test]
    fn hermite_eigenrelation_pointwise() {
        // L H_m = -m H_m for the Ornstein–Uhlenbeck operator, exactly.
        for m in 1..=5u32 {
            let map = builtin(&format!("hermite{m}")).unwrap();
            for &x in &[-2.3, -0.4, 0.0, 0.7, 1.9] {
                let jets = map.eval_jet2(&[x]).unwrap();
                let lh = ornstein_uhlenbeck(&map, 0, &[x]).unwrap();
                let expected = -(m as f64) * jets[0].value;
                assert!(
                    (lh - expected).abs() < 1e-9 * (1.0 + expected.abs()),
                    "L H_{m}({x}) = {lh}, expected {expected}"
                );
            }
        }
    }

    #[test]
    fn closure_value_agrees_with_ad_jet() {
        for name in ["sin_x1", "sin_lin_2d", "norm_cdf_x1"] {
            let map = builtin(name).unwrap();
            let x: Vec<f64> = (0..map.dim_in()).map(|i| 0.4 * (i as f64 + 1.0)).collect();
            let jets = map.eval_jet2(&x).unwrap();
            let mut vals = Vec::new();
            map.eval_value(&x, &mut vals).unwrap();
            assert!((jets[0].value - vals[0]).abs() < 1e-14, "{name}");
        }
    }

    #[test]
    fn norm_cdf_jet_matches_density() {
        // d/dx Phi = phi, d^2/dx^2 Phi = -x phi.
        let map = builtin("norm_cdf_x1").unwrap();
        let x = 0.8;
        let jet = &map.eval_jet2(&[x]).unwrap()[0];
        let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        assert!((jet.gradient[0] - pdf).abs() < 1e-12);
        assert!((jet.hess(0, 0) + x * pdf).abs() < 1e-12);
    }

    #[test]
    fn sequences_approach_their_limits() {
        let far = sequence("sin_perturb_1d", 1).unwrap();
        let near = sequence("sin_perturb_1d", 1000).unwrap();
        let x = [0.5, 1.2];
        let f_far = far.eval_jet2(&x).unwrap()[0].value;
        let f_near = near.eval_jet2(&x).unwrap()[0].value;
        assert!((f_far - (0.5 + 1.2f64.sin())).abs() < 1e-12);
        assert!((f_near - 0.5).abs() < 1e-2);
        assert!(sequence("no_such_seq", 1).is_err());
    }

    #[test]
    fn unknown_map_is_an_error() {
        assert!(matches!(builtin("nope"), Err(Error::UnknownMap(_))));
    }

    #[test]
    fn catalog_lists_maps_sequences_densities() {
        let rows = list_catalog();
        assert!(rows.iter().any(|r| r.name == "x1" && r.kind == "map"));
        assert!(rows.iter().any(|r| r.name == "x1sq_x2" && r.description.contains("4*x1^2")));
        assert!(rows.iter().any(|r| r.name == "chi2_1" && r.kind == "density"));
        assert!(rows.iter().any(|r| r.kind == "sequence"));
    }
}
