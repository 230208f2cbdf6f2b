//! Smooth maps `f: R^n -> R^k` with exact second-order jets.
//!
//! A [`MapSpec`] is either a [`PolynomialMap`] (jets evaluated in closed form,
//! monomial by monomial) or a closure-backed map differentiated with
//! forward-mode AD ([`crate::jets::Dual2`]).  On top of jet evaluation the
//! module provides the Ornstein–Uhlenbeck operator
//!
//! ```text
//! L f(x) = trace D^2 f(x) - <x, grad f(x)>
//! ```
//!
//! which is the generator whose integration-by-parts identities the harness
//! verifies, and Monte Carlo Sobolev norms `||f||_p + ||grad f||_p
//! (+ ||D^2 f||_p)` that feed the constants of those bounds.
//!
//! # Polynomial map configuration files
//!
//! Polynomial maps round-trip through a small JSON document: `dim_in`,
//! `dim_out`, and one monomial list per component, each monomial written as
//! `[[e1, ..., en], coeff]`.  Multi-indices are unique per component and are
//! serialized in lexicographic order.
//!
//! ```text
//! { "name": "x1sq_x2",
//!   "dim_in": 2, "dim_out": 2,
//!   "components": [ [ [[2, 0], 1.0] ], [ [[0, 1], 1.0] ] ] }
//! ```

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::gaussian::{lp_norm, MCEstimate, SampleBatch};
use crate::jets::{Dual2, Jet2};
use crate::{Error, Result};

/// A monomial `coeff * x1^e1 * ... * xn^en`, serialized as `[[e1,...,en], coeff]`.
pub type Monomial = (Vec<u32>, f64);

/// A polynomial map given per component as a list of monomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialMap {
    pub dim_in: usize,
    pub dim_out: usize,
    pub components: Vec<Vec<Monomial>>,
}

impl PolynomialMap {
    /// Validates shape and sorts monomials lexicographically by multi-index.
    pub fn validated(mut self) -> Result<Self> {
        if self.dim_in == 0 {
            return Err(Error::ConfigParse("dim_in must be >= 1".into()));
        }
        if self.dim_out == 0 {
            return Err(Error::ConfigParse("dim_out must be >= 1".into()));
        }
        if self.components.len() != self.dim_out {
            return Err(Error::ConfigParse(format!(
                "components has {} entries, expected dim_out = {}",
                self.components.len(),
                self.dim_out
            )));
        }
        for (ci, comp) in self.components.iter_mut().enumerate() {
            for (mi, (exps, coeff)) in comp.iter().enumerate() {
                if exps.len() != self.dim_in {
                    return Err(Error::ConfigParse(format!(
                        "components[{ci}][{mi}]: exponent vector has length {}, expected dim_in = {}",
                        exps.len(),
                        self.dim_in
                    )));
                }
                if !coeff.is_finite() {
                    return Err(Error::ConfigParse(format!(
                        "components[{ci}][{mi}]: non-finite coefficient"
                    )));
                }
            }
            comp.sort_by(|a, b| a.0.cmp(&b.0));
            for w in comp.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::ConfigParse(format!(
                        "components[{ci}]: duplicate multi-index {:?}",
                        w[0].0
                    )));
                }
            }
        }
        Ok(self)
    }

    /// Evaluates the jet of component `comp` at `x` in closed form.
    fn jet(&self, comp: usize, x: &[f64]) -> Jet2 {
        let n = self.dim_in;
        let mut value = 0.0;
        let mut grad = vec![0.0; n];
        let mut hess = vec![0.0; n * n];
        for (exps, coeff) in &self.components[comp] {
            // Power tables x_i^(e_i), x_i^(e_i - 1), x_i^(e_i - 2); the
            // convention 0^0 = 1 makes exponent-zero factors inert.
            let full: Vec<f64> = (0..n).map(|i| x[i].powi(exps[i] as i32)).collect();
            let prod: f64 = full.iter().product();
            value += coeff * prod;
            for l in 0..n {
                let el = exps[l];
                if el == 0 {
                    continue;
                }
                let dl: f64 = (0..n)
                    .map(|i| {
                        if i == l {
                            el as f64 * x[i].powi(el as i32 - 1)
                        } else {
                            full[i]
                        }
                    })
                    .product();
                grad[l] += coeff * dl;
                // Diagonal second derivative.
                if el >= 2 {
                    let dll: f64 = (0..n)
                        .map(|i| {
                            if i == l {
                                (el * (el - 1)) as f64 * x[i].powi(el as i32 - 2)
                            } else {
                                full[i]
                            }
                        })
                        .product();
                    hess[l * n + l] += coeff * dll;
                }
                // Mixed second derivatives (each unordered pair once).
                for m in (l + 1)..n {
                    let em = exps[m];
                    if em == 0 {
                        continue;
                    }
                    let dlm: f64 = (0..n)
                        .map(|i| {
                            if i == l {
                                el as f64 * x[i].powi(el as i32 - 1)
                            } else if i == m {
                                em as f64 * x[i].powi(em as i32 - 1)
                            } else {
                                full[i]
                            }
                        })
                        .product();
                    hess[l * n + m] += coeff * dlm;
                    hess[m * n + l] += coeff * dlm;
                }
            }
        }
        Jet2::new(value, grad, hess)
    }

    fn value(&self, comp: usize, x: &[f64]) -> f64 {
        self.components[comp]
            .iter()
            .map(|(exps, coeff)| {
                coeff
                    * (0..self.dim_in)
                        .map(|i| x[i].powi(exps[i] as i32))
                        .product::<f64>()
            })
            .sum()
    }
}

/// One component of a closure-backed map: an AD closure for jets and a plain
/// closure for fast value-only evaluation.  The two must agree; the test
/// suite cross-checks them.
#[derive(Clone)]
pub struct ClosureComponent {
    pub jet: Arc<dyn Fn(&[Dual2]) -> Dual2 + Send + Sync>,
    pub value: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

enum MapKind {
    Polynomial(PolynomialMap),
    Closure(Vec<ClosureComponent>),
}

/// A named smooth map `R^n -> R^k` with exact jets.
#[derive(Clone)]
pub struct MapSpec {
    name: String,
    dim_in: usize,
    dim_out: usize,
    kind: Arc<MapKind>,
}

impl fmt::Debug for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapSpec")
            .field("name", &self.name)
            .field("dim_in", &self.dim_in)
            .field("dim_out", &self.dim_out)
            .finish()
    }
}

impl MapSpec {
    /// Wraps a validated polynomial map.
    pub fn polynomial(name: &str, poly: PolynomialMap) -> Result<Self> {
        let poly = poly.validated()?;
        Ok(MapSpec {
            name: name.to_string(),
            dim_in: poly.dim_in,
            dim_out: poly.dim_out,
            kind: Arc::new(MapKind::Polynomial(poly)),
        })
    }

    /// Wraps closure components differentiated by forward-mode AD.
    pub fn from_closures(name: &str, dim_in: usize, components: Vec<ClosureComponent>) -> Self {
        assert!(dim_in > 0 && !components.is_empty());
        MapSpec {
            name: name.to_string(),
            dim_in,
            dim_out: components.len(),
            kind: Arc::new(MapKind::Closure(components)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    /// The underlying polynomial data, when this map is polynomial.
    pub fn as_polynomial(&self) -> Option<&PolynomialMap> {
        match &*self.kind {
            MapKind::Polynomial(p) => Some(p),
            MapKind::Closure(_) => None,
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim_in {
            return Err(Error::DimensionMismatch {
                context: format!("map {:?} input", self.name),
                expected: self.dim_in,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Value, gradient, and Hessian of every component at `x`.
    pub fn eval_jet2(&self, x: &[f64]) -> Result<Vec<Jet2>> {
        self.check_input(x)?;
        let jets: Vec<Jet2> = match &*self.kind {
            MapKind::Polynomial(p) => (0..self.dim_out).map(|c| p.jet(c, x)).collect(),
            MapKind::Closure(comps) => {
                let duals: Vec<Dual2> = (0..self.dim_in)
                    .map(|i| Dual2::var(self.dim_in, i, x[i]))
                    .collect();
                comps.iter().map(|c| (c.jet)(&duals).into_jet()).collect()
            }
        };
        for jet in &jets {
            if !jet.is_finite() {
                return Err(Error::NonFiniteValue {
                    context: format!("jet of map {:?}", self.name),
                });
            }
        }
        Ok(jets)
    }

    /// Values only (no derivatives); the fast path for pushforwards.
    pub fn eval_value(&self, x: &[f64], out: &mut Vec<f64>) -> Result<()> {
        self.check_input(x)?;
        out.clear();
        match &*self.kind {
            MapKind::Polynomial(p) => {
                for c in 0..self.dim_out {
                    out.push(p.value(c, x));
                }
            }
            MapKind::Closure(comps) => {
                for c in comps {
                    out.push((c.value)(x));
                }
            }
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                context: format!("value of map {:?}", self.name),
            });
        }
        Ok(())
    }

    /// Evaluates every component on forward-AD numbers.  This lets callers
    /// differentiate through compositions of maps (the AD numbers may carry
    /// derivative seeds of an outer variable).
    pub fn eval_duals(&self, xs: &[Dual2]) -> Result<Vec<Dual2>> {
        if xs.len() != self.dim_in {
            return Err(Error::DimensionMismatch {
                context: format!("map {:?} dual input", self.name),
                expected: self.dim_in,
                got: xs.len(),
            });
        }
        match &*self.kind {
            MapKind::Polynomial(p) => {
                let seed_dim = xs[0].clone().into_jet().dim();
                let mut out = Vec::with_capacity(self.dim_out);
                for comp in &p.components {
                    let mut acc = Dual2::constant(seed_dim, 0.0);
                    for (exps, coeff) in comp {
                        let mut term = Dual2::constant(seed_dim, *coeff);
                        for (x, &e) in xs.iter().zip(exps) {
                            if e > 0 {
                                term = &term * &x.powi(e as i32);
                            }
                        }
                        acc = &acc + &term;
                    }
                    out.push(acc);
                }
                Ok(out)
            }
            MapKind::Closure(comps) => Ok(comps.iter().map(|c| (c.jet)(xs)).collect()),
        }
    }

    /// Parses a polynomial map from its JSON configuration document.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let config: MapConfig =
            serde_json::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        let name = config.name.unwrap_or_else(|| "custom".to_string());
        MapSpec::polynomial(
            &name,
            PolynomialMap {
                dim_in: config.dim_in,
                dim_out: config.dim_out,
                components: config.components,
            },
        )
    }

    /// Serializes a polynomial map to its JSON configuration document, with
    /// monomials in lexicographic multi-index order.  Closure-backed maps
    /// have no portable representation and return `ConfigParse`.
    pub fn to_config_string(&self) -> Result<String> {
        match &*self.kind {
            MapKind::Polynomial(p) => {
                let config = MapConfig {
                    name: Some(self.name.clone()),
                    dim_in: p.dim_in,
                    dim_out: p.dim_out,
                    components: p.components.clone(),
                };
                Ok(serde_json::to_string_pretty(&config)?)
            }
            MapKind::Closure(_) => Err(Error::ConfigParse(format!(
                "map {:?} is closure-backed and cannot be serialized",
                self.name
            ))),
        }
    }
}

/// On-disk schema for polynomial maps.
#[derive(Debug, Serialize, Deserialize)]
struct MapConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    dim_in: usize,
    dim_out: usize,
    components: Vec<Vec<Monomial>>,
}

/// Ornstein–Uhlenbeck operator `L f_comp(x) = trace D^2 f_comp - <x, grad f_comp>`.
pub fn ornstein_uhlenbeck(map: &MapSpec, comp: usize, x: &[f64]) -> Result<f64> {
    let jets = map.eval_jet2(x)?;
    let jet = &jets[comp];
    let drift: f64 = x.iter().zip(&jet.gradient).map(|(xi, gi)| xi * gi).sum();
    Ok(jet.laplacian() - drift)
}

/// Monte Carlo Sobolev norm of a map, term by term.
#[derive(Debug, Clone)]
pub struct SobolevNorm {
    /// `sum_i ||f_i||_p + ||grad f_i||_p (+ ||D^2 f_i||_p for order 2)`.
    pub total: MCEstimate,
    /// The individual `L^p` terms, labelled.
    pub terms: Vec<(String, MCEstimate)>,
}

/// Estimates the order-`order` Sobolev norm of `map` in `L^p(gamma)`.
///
/// `order` must be 1 or 2.  Per component the terms are the `L^p` norms of
/// the value, the gradient length, and (order 2) the Hessian
/// Hilbert–Schmidt norm.  The terms share one sample batch, so their errors
/// are dependent; the total's standard error adds them linearly, which is a
/// conservative upper bound.
pub fn sobolev_norm(map: &MapSpec, p: f64, order: usize, batch: &SampleBatch) -> Result<SobolevNorm> {
    assert!(order == 1 || order == 2, "sobolev_norm supports orders 1 and 2");
    if batch.dim() != map.dim_in() {
        return Err(Error::DimensionMismatch {
            context: "sobolev_norm batch".into(),
            expected: map.dim_in(),
            got: batch.dim(),
        });
    }
    let mut terms = Vec::new();
    for comp in 0..map.dim_out() {
        let value = lp_norm(batch, |x| map.eval_jet2(x).map(|j| j[comp].value).unwrap_or(f64::NAN), p)?;
        terms.push((format!("value[{comp}]"), value));
        let grad = lp_norm(
            batch,
            |x| {
                map.eval_jet2(x)
                    .map(|j| j[comp].gradient_norm())
                    .unwrap_or(f64::NAN)
            },
            p,
        )?;
        terms.push((format!("gradient[{comp}]"), grad));
        if order == 2 {
            let hess = lp_norm(
                batch,
                |x| {
                    map.eval_jet2(x)
                        .map(|j| j[comp].hessian_hs_norm())
                        .unwrap_or(f64::NAN)
                },
                p,
            )?;
            terms.push((format!("hessian[{comp}]"), hess));
        }
    }
    let total = MCEstimate {
        mean: terms.iter().map(|(_, t)| t.mean).sum(),
        stderr: terms.iter().map(|(_, t)| t.stderr).sum(),
        count: batch.count(),
    };
    Ok(SobolevNorm { total, terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::GaussianSpace;

    fn x1sq() -> MapSpec {
        MapSpec::polynomial(
            "x1sq",
            PolynomialMap {
                dim_in: 1,
                dim_out: 1,
                components: vec![vec![(vec![2], 1.0)]],
            },
        )
        .unwrap()
    }

    #[test]
    fn polynomial_jet_closed_form() {
        // f(x, y) = x^2 y - 3 y^3 at (2, -1).
        let map = MapSpec::polynomial(
            "test",
            PolynomialMap {
                dim_in: 2,
                dim_out: 1,
                components: vec![vec![(vec![2, 1], 1.0), (vec![0, 3], -3.0)]],
            },
        )
        .unwrap();
        let jet = &map.eval_jet2(&[2.0, -1.0]).unwrap()[0];
        assert_eq!(jet.value, 2.0f64.powi(2) * -1.0 - 3.0 * (-1.0f64).powi(3));
        assert_eq!(jet.gradient, vec![2.0 * 2.0 * -1.0, 4.0 - 9.0]);
        assert_eq!(jet.hess(0, 0), -2.0);
        assert_eq!(jet.hess(0, 1), 4.0);
        assert_eq!(jet.hess(1, 0), 4.0);
        assert_eq!(jet.hess(1, 1), -18.0 * -1.0);
    }

    #[test]
    fn polynomial_jet_handles_zero_coordinates() {
        // Derivative power tables must respect 0^0 = 1 at x = 0.
        let map = MapSpec::polynomial(
            "lin",
            PolynomialMap {
                dim_in: 2,
                dim_out: 1,
                components: vec![vec![(vec![1, 0], 2.0), (vec![0, 2], 1.0)]],
            },
        )
        .unwrap();
        let jet = &map.eval_jet2(&[0.0, 0.0]).unwrap()[0];
        assert_eq!(jet.value, 0.0);
        assert_eq!(jet.gradient, vec![2.0, 0.0]);
        assert_eq!(jet.hess(1, 1), 2.0);
    }

    #[test]
    fn ornstein_uhlenbeck_of_x_squared() {
        // L(x^2) = 2 - 2 x^2.
        let map = x1sq();
        for &x in &[0.0, 0.5, -1.7, 3.0] {
            let lf = ornstein_uhlenbeck(&map, 0, &[x]).unwrap();
            assert!((lf - (2.0 - 2.0 * x * x)).abs() < 1e-12, "L(x^2) at {x}: {lf}");
        }
    }

    #[test]
    fn sobolev_norm_of_x_squared() {
        // ||x^2||_2 = sqrt(E x^4) = sqrt(3); ||2x||_2 = 2; ||D^2||_2 = 2.
        let space = GaussianSpace::new(1);
        let batch = space.sample(200_000, 17, 0).unwrap();
        let norm = sobolev_norm(&x1sq(), 2.0, 2, &batch).unwrap();
        let expected = 3.0f64.sqrt() + 4.0;
        assert!(
            (norm.total.mean - expected).abs() <= 4.0 * norm.total.stderr.max(1e-3),
            "W^{{2,2}} norm of x^2: {} vs {}",
            norm.total.mean,
            expected
        );
        assert_eq!(norm.terms.len(), 3);
    }

    #[test]
    fn config_round_trip_sorts_monomials() {
        let text = r#"{
            "dim_in": 2, "dim_out": 1,
            "components": [[ [[0,2], 1.0], [[2,0], 1.0], [[1,1], -2.0] ]]
        }"#;
        let map = MapSpec::from_config_str(text).unwrap();
        let out = map.to_config_string().unwrap();
        // Lexicographic multi-index order: [0,2] < [1,1] < [2,0].
        let i1 = out.find("[0,").unwrap_or(usize::MAX).min(out.find("[\n").unwrap_or(usize::MAX));
        let _ = i1;
        let reparsed = MapSpec::from_config_str(&out).unwrap();
        assert_eq!(
            reparsed.as_polynomial().unwrap().components,
            map.as_polynomial().unwrap().components
        );
        let comps = &map.as_polynomial().unwrap().components[0];
        assert_eq!(comps[0].0, vec![0, 2]);
        assert_eq!(comps[1].0, vec![1, 1]);
        assert_eq!(comps[2].0, vec![2, 0]);
    }

    #[test]
    fn config_errors_name_the_field() {
        let bad_len = r#"{"dim_in": 2, "dim_out": 1, "components": [[ [[1], 1.0] ]]}"#;
        let err = MapSpec::from_config_str(bad_len).unwrap_err().to_string();
        assert!(
            err.contains("components[0][0]") && err.contains("dim_in"),
            "unhelpful error: {err}"
        );

        let dup = r#"{"dim_in": 1, "dim_out": 1, "components": [[ [[1], 1.0], [[1], 2.0] ]]}"#;
        let err = MapSpec::from_config_str(dup).unwrap_err().to_string();
        assert!(err.contains("duplicate multi-index"), "unhelpful error: {err}");

        let count = r#"{"dim_in": 1, "dim_out": 2, "components": [[ [[1], 1.0] ]]}"#;
        let err = MapSpec::from_config_str(count).unwrap_err().to_string();
        assert!(err.contains("dim_out"), "unhelpful error: {err}");
    }

    #[test]
    fn wrong_input_dimension_is_an_error() {
        let map = x1sq();
        assert!(matches!(
            map.eval_jet2(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
