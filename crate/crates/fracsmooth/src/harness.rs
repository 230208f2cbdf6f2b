//! The verification harness: every identity, inequality, and scaling law in
//! the library's scope, evaluated numerically with explicit error budgets and
//! mechanical verdicts.
//!
//! Each check produces [`CheckRow`]s.  Asserted inequality rows pass when
//!
//! ```text
//! lhs <= rhs + 4 * (lhs_err + rhs_err)
//! ```
//!
//! (outright, without the error allowance, they pass as `pass` rather than
//! `pass-within-error`).  Scaling rows pass when the fitted log-log slope is
//! at least the predicted exponent minus 0.05 with fit `r^2 >= 0.9`.  Rows
//! whose hypotheses are trivially saturated — degeneracy mass at or above 0.9
//! across the probe grid — are marked `vacuous` and never count as passes.
//! Informational rows are marked `report` and never affect exit status.
//!
//! Checks are independent: each draws its own sample streams from the run
//! seed, so suites can run in parallel and produce byte-identical reports in
//! any order.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::catalog;
use crate::densities::OracleDensity;
use crate::gaussian::{mc_expect, wilson_halfwidth, GaussianSpace};
use crate::jets::Jet2;
use crate::malliavin::{
    chain_identity_residual, det_gradient_direction, grad_delta_bound_margin, malliavin_of_jets,
};
use crate::maps::{MapSpec, PolynomialMap};
use crate::measures::{pushforward, tv_distance, BinningPolicy, EmpiricalMeasure};
use crate::report::{CheckRow, Report, Verdict};
use crate::smoothness::{
    besov_fit_empirical, besov_fit_points, degeneracy_values, fit_log_log, neg_moment_probe,
    sigma_lower_profile, small_ball_margin, u_gamma_values, GradientNorm, SigmaEstimate,
    SigmaOptions,
};
use crate::transport::{kantorovich_norm, kr_norm_with, TransportOptions};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Configuration and check-row builders.
// ---------------------------------------------------------------------------

/// Sample budget and seed for a harness run.
#[derive(Debug, Clone)]
pub struct HarnessConfig {
    /// Monte Carlo sample count for the heavy checks.
    pub samples: usize,
    /// Master seed; every check derives its own fixed sub-streams.
    pub seed: u64,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            samples: 1_000_000,
            seed: 7,
        }
    }
}

/// An inequality comparison with error bars and a mechanical verdict.
#[derive(Debug, Clone)]
pub struct BoundCheck {
    pub name: String,
    pub case: String,
    pub params: BTreeMap<String, f64>,
    pub lhs: f64,
    pub lhs_err: f64,
    pub rhs: f64,
    pub rhs_err: f64,
    /// Report-only rows never affect exit status.
    pub asserted: bool,
    /// Trivially-saturated rows are reported as such, never as passes.
    pub vacuous: bool,
    pub note: String,
}

impl BoundCheck {
    pub fn verdict(&self) -> Verdict {
        if self.vacuous {
            Verdict::Vacuous
        } else if !self.asserted {
            Verdict::Report
        } else if self.lhs <= self.rhs {
            Verdict::Pass
        } else if self.lhs <= self.rhs + 4.0 * (self.lhs_err + self.rhs_err) {
            Verdict::PassWithinError
        } else {
            Verdict::Fail
        }
    }

    pub fn into_row(self) -> CheckRow {
        let verdict = self.verdict();
        CheckRow {
            margin: self.rhs - self.lhs,
            check: self.name,
            case: self.case,
            params: self.params,
            lhs: self.lhs,
            lhs_err: self.lhs_err,
            rhs: self.rhs,
            rhs_err: self.rhs_err,
            verdict,
            note: self.note,
        }
    }
}

/// A fitted scaling exponent compared against a predicted one.
#[derive(Debug, Clone)]
pub struct ScalingCheck {
    pub name: String,
    pub case: String,
    pub params: BTreeMap<String, f64>,
    pub fitted: f64,
    pub predicted: f64,
    pub r_squared: f64,
    pub vacuous: bool,
    pub note: String,
}

impl ScalingCheck {
    pub fn verdict(&self) -> Verdict {
        if self.vacuous {
            Verdict::Vacuous
        } else if self.fitted >= self.predicted - 0.05 && self.r_squared >= 0.9 {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn into_row(mut self) -> CheckRow {
        let verdict = self.verdict();
        self.params
            .insert("predicted_exponent".into(), self.predicted);
        self.params.insert("r_squared".into(), self.r_squared);
        CheckRow {
            check: self.name,
            case: self.case,
            params: self.params,
            lhs: self.predicted - 0.05,
            lhs_err: 0.0,
            rhs: self.fitted,
            rhs_err: 0.0,
            verdict,
            margin: self.fitted - (self.predicted - 0.05),
            note: self.note,
        }
    }
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

fn poly_map(name: &str, dim_in: usize, components: Vec<Vec<(Vec<u32>, f64)>>) -> MapSpec {
    let poly = PolynomialMap {
        dim_in,
        dim_out: components.len(),
        components,
    }
    .validated()
    .expect("static harness map");
    MapSpec::polynomial(name, poly).expect("static harness map")
}

fn coord_map(name: &str, n: usize, i: usize) -> MapSpec {
    let mut e = vec![0u32; n];
    e[i] = 1;
    poly_map(name, n, vec![vec![(e, 1.0)]])
}

fn const_one_map(name: &str, n: usize) -> MapSpec {
    poly_map(name, n, vec![vec![(vec![0u32; n], 1.0)]])
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// First `m` atoms reweighted to unit mass, so paired subsamples of two
/// measures built from the same batch stay balanced and comparable.
fn subsample(mu: &EmpiricalMeasure, m: usize) -> Result<EmpiricalMeasure> {
    let m = m.min(mu.len()).max(1);
    let mut coords = Vec::with_capacity(m * mu.dim());
    for i in 0..m {
        coords.extend_from_slice(mu.point(i));
    }
    EmpiricalMeasure::new(mu.dim(), coords, vec![1.0 / m as f64; m])
}

/// One coordinate of a measure as a 1-d measure with the same weights.
fn coordinate_marginal(mu: &EmpiricalMeasure, coord: usize) -> Result<EmpiricalMeasure> {
    let xs: Vec<f64> = (0..mu.len()).map(|i| mu.point(i)[coord]).collect();
    let ws: Vec<f64> = (0..mu.len()).map(|i| mu.weight(i)).collect();
    EmpiricalMeasure::new(1, xs, ws)
}

/// Exact transport options for one-dimensional differences, whose closed
/// form needs no support cap.
fn exact_1d() -> TransportOptions {
    TransportOptions {
        support_limit: usize::MAX,
        coarsen: false,
    }
}

/// `L f = trace D^2 f - <x, grad f>` from a jet.
fn generator(jet: &Jet2, x: &[f64]) -> f64 {
    jet.laplacian() - dot(x, &jet.gradient)
}

/// `<D^2 f . grad f, grad f>` from a jet.
fn hessian_quad(jet: &Jet2) -> f64 {
    (0..jet.dim())
        .map(|l| dot(jet.hess_row(l), &jet.gradient) * jet.gradient[l])
        .sum()
}

fn require_converged(est: &SigmaEstimate, what: &str) -> Result<()> {
    if est.converged {
        Ok(())
    } else {
        Err(Error::DegenerateFit(format!(
            "sigma lower estimate failed its grid-convergence diagnostic at t={} for {what}",
            est.t
        )))
    }
}

fn find_t(profile: &[SigmaEstimate], t: f64) -> &SigmaEstimate {
    profile
        .iter()
        .find(|e| (e.t - t).abs() <= 1e-12 * t.max(1.0))
        .expect("radius missing from sigma profile")
}

// Fixed sub-stream bases, one block per check, so checks never share samples.
const STREAM_IDENTITIES: u64 = 100;
const STREAM_IBP_GRAD: u64 = 110;
const STREAM_IBP_MALL: u64 = 120;
const STREAM_SMALL_BALL: u64 = 130;
const STREAM_EQUIVALENCE: u64 = 140;
const STREAM_LEMMA_KR: u64 = 150;
const STREAM_LEMMA_KANT: u64 = 155;
const STREAM_SCALING_GRAD: u64 = 160;
const STREAM_SCALING_MALL: u64 = 165;
const STREAM_BESOV_DENSITY: u64 = 170;
const STREAM_BESOV_GRAD: u64 = 175;
const STREAM_BESOV_MALL: u64 = 180;
const STREAM_EXP_GRAD: u64 = 185;
const STREAM_EXP_MALL: u64 = 190;
const STREAM_DEMO_GRAD: u64 = 200;
const STREAM_DEMO_MALL: u64 = 210;

// ---------------------------------------------------------------------------
// Algebraic identities of the Malliavin matrix.
// ---------------------------------------------------------------------------

/// Pointwise identities of the covariance matrix `M_f`, its determinant, and
/// its adjugate, checked in exact arithmetic terms (relative residuals around
/// 1e-10) on a fixed point cloud per catalog map:
///
/// * `M_f * adj(M_f) = det(M_f) * I` (adjugate identity),
/// * `M_f * grad phi(f) = (<grad(phi o f), grad f_i>)_i` (chain rule through
///   the matrix, with `phi o f` differentiated by an independent AD path),
/// * `<grad f_j, grad det M_f>` equals the column-replacement determinant
///   expansion (two independent routes to the same derivative),
/// * `|<grad f_j, grad det M_f>| <= 2 (sum_m |grad f_m|)^{2k} sum_i |D^2 f_i|`
///   (determinant-gradient bound, an exact algebraic inequality),
/// * the eigenrelation `L H_m = -m H_m` for the first five Hermite
///   polynomials under the Ornstein–Uhlenbeck generator.
fn identity_rows_for_map(
    check_name: &str,
    map: &MapSpec,
    points: usize,
    seed: u64,
) -> Result<Vec<CheckRow>> {
    let name = map.name();
    let n = map.dim_in();
    let k = map.dim_out();
    let batch = GaussianSpace::new(n).sample(points, seed, STREAM_IDENTITIES)?;

    // Test functions for the chain identity.
    let phis: Vec<MapSpec> = if k == 1 {
        vec![
            poly_map("phi_sq", 1, vec![vec![(vec![2], 1.0)]]),
            poly_map("phi_lin_sq", 1, vec![vec![(vec![1], 1.0), (vec![2], 1.0)]]),
        ]
    } else {
        let prod = vec![(vec![1u32; k], 1.0)];
        let sumsq: Vec<(Vec<u32>, f64)> = (0..k)
            .map(|i| {
                let mut e = vec![0u32; k];
                e[i] = 2;
                (e, 1.0)
            })
            .collect();
        vec![
            poly_map("phi_prod", k, vec![prod]),
            poly_map("phi_sumsq", k, vec![sumsq]),
        ]
    };

    let mut worst_adj: f64 = 0.0;
    let mut worst_chain: f64 = 0.0;
    let mut worst_col: f64 = 0.0;
    let mut worst_bound: f64 = 0.0;
    for x in batch.iter() {
        let jets = map.eval_jet2(x)?;
        let sample = malliavin_of_jets(&jets, n)?;
        let amax = sample
            .matrix
            .iter()
            .fold(1.0_f64, |acc, &v| acc.max(v.abs()));
        let adj_scale = amax.powi(k as i32);
        worst_adj = worst_adj.max(sample.adjugate_residual() / adj_scale);

        let fmax = jets
            .iter()
            .map(|j| j.value.abs())
            .fold(1.0_f64, f64::max);
        let chain_scale = amax * fmax.powi(k as i32);
        for phi in &phis {
            let resid = chain_identity_residual(map, phi, x)?;
            worst_chain = worst_chain.max(resid / chain_scale);
        }

        let gmax = sample.grad_norms.iter().fold(1.0_f64, |a, &b| a.max(b));
        let hmax = sample.hess_norms.iter().fold(1.0_f64, |a, &b| a.max(b));
        let col_scale = k as f64 * amax.powi(k as i32 - 1) * (2.0 * hmax * gmax * gmax) * gmax;
        for j in 0..k {
            let via_grad = dot(&jets[j].gradient, &sample.grad_delta);
            let via_columns = det_gradient_direction(&jets, j);
            worst_col = worst_col.max((via_grad - via_columns).abs() / col_scale);

            let margin = grad_delta_bound_margin(map, j, x)?;
            worst_bound = worst_bound.max(-margin.margin / (1.0 + margin.rhs));
        }
    }

    let p = params(&[("points", points as f64), ("n", n as f64), ("k", k as f64)]);
    let mut rows = Vec::new();
    for (case, lhs, tol) in [
        ("adjugate_identity", worst_adj, 1e-10),
        ("matrix_chain_rule", worst_chain, 1e-10),
        ("det_gradient_two_routes", worst_col, 1e-9),
        ("det_gradient_bound", worst_bound.max(0.0), 1e-9),
    ] {
        rows.push(
            BoundCheck {
                name: check_name.into(),
                case: format!("{name}:{case}"),
                params: p.clone(),
                lhs,
                lhs_err: 0.0,
                rhs: tol,
                rhs_err: 0.0,
                asserted: true,
                vacuous: false,
                note: "worst relative residual over the point cloud".into(),
            }
            .into_row(),
        );
    }
    Ok(rows)
}

pub fn malliavin_identities(cfg: &HarnessConfig) -> Result<Vec<CheckRow>> {
    let points = cfg.samples.clamp(100, 10_000);
    let mut rows = Vec::new();

    for &name in catalog::MAP_NAMES {
        let map = catalog::builtin(name)?;
        rows.extend(identity_rows_for_map(
            "malliavin_identities",
            &map,
            points,
            cfg.seed,
        )?);
    }

    // Hermite eigenrelation under the generator.
    let batch = GaussianSpace::new(1).sample(points, cfg.seed, STREAM_IDENTITIES + 1)?;
    for m in 1..=5u32 {
        let map = catalog::builtin(&format!("hermite{m}"))?;
        let mut worst: f64 = 0.0;
        for x in batch.iter() {
            let jet = &map.eval_jet2(x)?[0];
            let lhs = generator(jet, x);
            let rhs = -(m as f64) * jet.value;
            worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs() + rhs.abs()));
        }
        rows.push(
            BoundCheck {
                name: "malliavin_identities".into(),
                case: format!("hermite{m}:generator_eigenrelation"),
                params: params(&[("points", points as f64), ("eigenvalue", m as f64)]),
                lhs: worst,
                lhs_err: 0.0,
                rhs: 1e-9,
                rhs_err: 0.0,
                asserted: true,
                vacuous: false,
                note: "L H_m = -m H_m pointwise".into(),
            }
            .into_row(),
        );
    }

    Ok(rows)
}

/// Single-map analysis: the pointwise identity rows for this map plus
/// informational rows for the determinant moments, the degeneracy functional
/// over a radius grid, and second-order Sobolev norms.
pub fn analyze_map(map: &MapSpec, cfg: &HarnessConfig) -> Result<Vec<CheckRow>> {
    let points = cfg.samples.clamp(100, 10_000);
    let mut rows = identity_rows_for_map("analyze_map", map, points, cfg.seed)?;
    let name = map.name();
    let k = map.dim_out();

    let batch =
        GaussianSpace::new(map.dim_in()).sample(cfg.samples, cfg.seed, STREAM_IDENTITIES + 2)?;
    let mut norms: Vec<GradientNorm> = vec![GradientNorm::MalliavinDet];
    if k == 1 {
        norms.push(GradientNorm::GradLength);
    }
    for norm in norms {
        let route = match norm {
            GradientNorm::GradLength => "grad_length",
            GradientNorm::MalliavinDet => "malliavin_det",
        };
        let g = degeneracy_values(map, norm, &batch)?;
        let m1: f64 = g.iter().sum::<f64>() / g.len() as f64;
        let m2: f64 = g.iter().map(|v| v * v).sum::<f64>() / g.len() as f64;
        rows.push(
            BoundCheck {
                name: "analyze_map".into(),
                case: format!("{name}:{route}:moments"),
                params: params(&[("mean", m1), ("second_moment", m2)]),
                lhs: m1,
                lhs_err: (m2 - m1 * m1).max(0.0).sqrt() / (g.len() as f64).sqrt(),
                rhs: m1,
                rhs_err: 0.0,
                asserted: false,
                vacuous: false,
                note: "first two moments of the degeneracy observable".into(),
            }
            .into_row(),
        );
        for eps in [1.0, 0.1, 0.01] {
            let u = u_gamma_values(&g, eps)?;
            rows.push(
                BoundCheck {
                    name: "analyze_map".into(),
                    case: format!("{name}:{route}:u_gamma"),
                    params: params(&[("epsilon", eps)]),
                    lhs: u.estimate.mean,
                    lhs_err: u.estimate.stderr,
                    rhs: 1.0,
                    rhs_err: 0.0,
                    asserted: false,
                    vacuous: false,
                    note: "degeneracy functional; values near 1 signal a \
                           near-degenerate map"
                        .into(),
                }
                .into_row(),
            );
        }
    }

    let sob = crate::maps::sobolev_norm(map, 4.0, 2, &batch)?;
    rows.push(
        BoundCheck {
            name: "analyze_map".into(),
            case: format!("{name}:sobolev_p4_order2"),
            params: params(&[("p", 4.0), ("order", 2.0)]),
            lhs: sob.total.mean,
            lhs_err: sob.total.stderr,
            rhs: sob.total.mean,
            rhs_err: 0.0,
            asserted: false,
            vacuous: false,
            note: "p-norm of value, gradient, and Hessian magnitudes".into(),
        }
        .into_row(),
    );
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Integration by parts.
// ---------------------------------------------------------------------------

/// Gradient-route integration by parts for scalar `f` with regularizer
/// `|grad f|^2 + eps^2`:
///
/// ```text
/// E[ <grad g, grad f> / (|grad f|^2 + eps^2) ]
///   = -E[ g ( L f / (|grad f|^2 + eps^2)
///             - 2 <D^2 f grad f, grad f> / (|grad f|^2 + eps^2)^2 ) ]
/// ```
///
/// Both sides are evaluated on the same batch and compared through the mean
/// of their pointwise difference, so the check is `|mean| <= 4 stderr`.
pub fn ibp_gradient_1d(cfg: &HarnessConfig) -> Result<Vec<CheckRow>> {
    let pairs: Vec<(MapSpec, MapSpec)> = vec![
        (catalog::builtin("x1")?, catalog::builtin("x1")?),
        (catalog::builtin("x1sq")?, catalog::builtin("x1")?),
        (catalog::builtin("hermite3")?, catalog::builtin("x1sq")?),
        (catalog::builtin("x1")?, const_one_map("one", 1)),
        (
            poly_map("x1sq_on2", 2, vec![vec![(vec![2, 0], 1.0)]]),
            coord_map("x2", 2, 1),
        ),
        (
            catalog::builtin("quad_form_2d")?,
            poly_map("x1x2", 2, vec![vec![(vec![1, 1], 1.0)]]),
        ),
    ];

    let mut rows = Vec::new();
    for (f, g) in &pairs {
        let batch = GaussianSpace::new(f.dim_in()).sample(cfg.samples, cfg.seed, STREAM_IBP_GRAD)?;
        for &eps in &[1.0, 0.1, 0.01] {
            let est = mc_expect(&batch, |x| {
                let (fj, gj) = match (f.eval_jet2(x), g.eval_jet2(x)) {
                    (Ok(a), Ok(b)) => (a, b),
                    _ => return f64::NAN,
                };
                let fj = &fj[0];
                let gj = &gj[0];
                let w = fj.gradient_norm().powi(2) + eps * eps;
                let lhs = dot(&gj.gradient, &fj.gradient) / w;
                let rhs =
                    -gj.value * (generator(fj, x) / w - 2.0 * hessian_quad(fj) / (w * w));
                lhs - rhs
            })?;
            rows.push(
                BoundCheck {
                    name: "ibp_gradient_1d".into(),
                    case: format!("f={},g={}", f.name(), g.name()),
                    params: params(&[("epsilon", eps)]),
                    lhs: est.mean.abs(),
                    lhs_err: est.stderr,
                    rhs: 0.0,
                    rhs_err: 0.0,
                    asserted: true,
                    vacuous: false,
                    note: "same-sample difference of the two sides".into(),
                }
                .into_row(),
            );
        }
    }
    Ok(rows)
}

/// Vector-route integration by parts with regularizer `det M_f + eps`:
///
/// ```text
/// E[ <grad u, grad f_j> v / (Delta + eps) ]
///   = -E[ u ( v L f_j / (Delta + eps)
///             - v <grad f_j, grad Delta> / (Delta + eps)^2
///             + <grad f_j, grad v> / (Delta + eps) ) ]
/// ```
pub fn ibp_malliavin_kd(cfg: &HarnessConfig) -> Result<Vec<CheckRow>> {
    let quads: Vec<(MapSpec, MapSpec, MapSpec, usize)> = vec![
        (
            catalog::builtin("id2")?,
            coord_map("x1", 2, 0),
            coord_map("x1", 2, 0),
            0,
        ),
        (
            catalog::builtin("id2")?,
            coord_map("x2", 2, 1),
            const_one_map("one", 2),
            1,
        ),
        (
            catalog::builtin("x1sq_x2")?,
            catalog::builtin("sin_lin_2d")?,
            const_one_map("one", 2),
            0,
        ),
        (
            catalog::builtin("x1sq_x2")?,
            poly_map("x1x2", 2, vec![vec![(vec![1, 1], 1.0)]]),
            poly_map("x2sq", 2, vec![vec![(vec![0, 2], 1.0)]]),
            1,
        ),
        (
            catalog::builtin("shear_3d")?,
            coord_map("x3", 3, 2),
            coord_map("x1", 3, 0),
            1,
        ),
    ];

    let mut rows = Vec::new();
    for (f, u, v, j) in &quads {
        let n = f.dim_in();
        let j = *j;
        let batch = GaussianSpace::new(n).sample(cfg.samples, cfg.seed, STREAM_IBP_MALL)?;
        for &eps in &[1.0, 0.1, 0.01] {
            let est = mc_expect(&batch, |x| {
                let fj = match f.eval_jet2(x) {
                    Ok(a) => a,
                    _ => return f64::NAN,
                };
                let sample = match malliavin_of_jets(&fj, n) {
                    Ok(s) => s,
                    _ => return f64::NAN,
                };
                let (uj, vj) = match (u.eval_jet2(x), v.eval_jet2(x)) {
                    (Ok(a), Ok(b)) => (a, b),
                    _ => return f64::NAN,
                };
                let uj = &uj[0];
                let vj = &vj[0];
                let d = sample.delta + eps;
                let lhs = dot(&uj.gradient, &fj[j].gradient) * vj.value / d;
                let rhs = -uj.value
                    * (vj.value * generator(&fj[j], x) / d
                        - vj.value * dot(&fj[j].gradient, &sample.grad_delta) / (d * d)
                        + dot(&fj[j].gradient, &vj.gradient) / d);
                lhs - rhs
            })?;
            rows.push(
                BoundCheck {
                    name: "ibp_malliavin_kd".into(),
                    case: format!("f={},u={},v={}", f.name(), u.name(), v.name()),
                    params: params(&[("epsilon", eps), ("j", j as f64)]),
                    lhs: est.mean.abs(),
                    lhs_err: est.stderr,
                    rhs: 0.0,
                    rhs_err: 0.0,
                    asserted: true,
                    vacuous: false,
                    note: "same-sample difference of the two sides".into(),
                }
                .into_row(),
            );
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Small-ball moment bound.
// ---------------------------------------------------------------------------

/// The negative-moment bound `E[(g+eps)^{-r}] <= r eps^{-r} u(g, eps)` for
/// `r >= 1`, where `u(g, eps) = E[eps/(eps+g)]`, with its exact equality case
/// at `g = 0`, `r = 1`, deterministic constant-observable cases, and Monte
/// Carlo cases on catalog maps for both degeneracy observables.
pub fn small_ball_moment_bound(cfg: &HarnessConfig) -> Result<Vec<CheckRow>> {
    let eps_grid = [1.0, 0.1, 0.01];
    let mut rows = Vec::new();

    // Exact equality at g = 0, r = 1: both sides are 1/eps.
    for &eps in &eps_grid {
        let m = small_ball_margin(&vec![0.0; 64], 1.0, eps)?;
        rows.push(
            BoundCheck {
                name: "small_ball_moment_bound".into(),
                case: "equality_zero_g".into(),
                params: params(&[("r", 1.0), ("epsilon", eps)]),
                lhs: (m.lhs.mean - m.rhs).abs() * eps,
                lhs_err: 0.0,
                rhs: 1e-12,
                rhs_err: 0.0,
                asserted: true,
                vacuous: false,
                note: "exactness row: both sides equal 1/eps; the vacuity rule \
                       is about bound evidence and does not apply here"
                    .into(),
            }
            .into_row(),
        );
    }

    // Deterministic constant observable g = 1.
    for &r in &[1.0, 2.0] {
        for &eps in &eps_grid {
            let m = small_ball_margin(&vec![1.0; 64], r, eps)?;
            rows.push(
                BoundCheck {
                    name: "small_ball_moment_bound".into(),
                    case: "constant_g_1".into(),
                    params: params(&[("r", r), ("epsilon", eps)]),
                    lhs: m.lhs.mean,
                    lhs_err: 0.0,
                    rhs: m.rhs,
                    rhs_err: 0.0,
                    asserted: true,
                    vacuous: false,
                    note: "closed forms: lhs (1+eps)^-r, rhs r eps^-r eps/(1+eps)".into(),
                }
                .into_row(),
            );
        }
    }

    // Monte Carlo cases.
    let cases: Vec<(&str, GradientNorm)> = vec![
        ("x1sq", GradientNorm::GradLength),
        ("quad_form_2d", GradientNorm::GradLength),
        ("x1sq_x2", GradientNorm::MalliavinDet),
        ("shear_3d", GradientNorm::MalliavinDet),
    ];
    for (name, norm) in cases {
        let map = catalog::builtin(name)?;
        let batch =
            GaussianSpace::new(map.dim_in()).sample(cfg.samples, cfg.seed, STREAM_SMALL_BALL)?;
        let g = degeneracy_values(&map, norm, &batch)?;
        let route = match norm {
            GradientNorm::GradLength => "grad",
            GradientNorm::MalliavinDet => "det",
        };
        // Vacuity applies when the degeneracy functional is saturated across
        // the whole epsilon grid.
        let u_all: Vec<f64> = eps_grid
            .iter()
            .map(|&e| Ok(u_gamma_values(&g, e)?.estimate.mean))
            .collect::<Result<_>>()?;
        let vacuous = u_all.iter().all(|&u| u >= 0.9);
        for &r in &[1.0, 2.0] {
            for &eps in &eps_grid {
                let m = small_ball_margin(&g, r, eps)?;
                rows.push(
                    BoundCheck {
                        name: "small_ball_moment_bound".into(),
                        case: format!("{name}:{route}"),
                        params: params(&[("r", r), ("epsilon", eps), ("u", m.u.estimate.mean)]),
                        lhs: m.lhs.mean,
                        lhs_err: m.lhs.stderr,
                        rhs: m.rhs,
                        rhs_err: r * eps.powf(-r) * m.u.estimate.stderr,
                        asserted: true,
                        vacuous,
                        note: String::new(),
                    }
                    .into_row(),
                );
            }
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Shift TV versus the shift modulus sigma.
// ---------------------------------------------------------------------------

/// Two-sided equivalence between shift total variation and the shift modulus
/// on the reference densities:
///
/// ```text
/// tv(mu_h, mu) <= 2 sigma(mu, |h|/2)        (up to 5% estimator slack)
/// sigma(mu, t) <= 6 k sup_{|h|<=t} tv(mu_h, mu) * 1.05
/// ```
///
/// The left sides use exact quadrature oracles; sigma is estimated from below
/// by the held-out chain LP, whose 5% slack covers its downward deficiency.
/// On all three reference densities the first relation is an equality, which
/// an informational row records.
pub fn shift_tv_sigma_equivalence(cfg: &HarnessConfig) -> Result<Vec<CheckRow>> {
    let h_grid = [0.05, 0.1, 0.2, 0.5];
    let mut ts: Vec<f64> = h_grid.iter().flat_map(|&h| [h / 2.0, h]).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();

    let densities = [
        OracleDensity::StdNormal,
        OracleDensity::ChiSq1,
        OracleDensity::Uniform01,
    ];
    let groups: Vec<Result<Vec<CheckRow>>> = densities
        .par_iter()
        .enumerate()
        .map(|(di, density)| {
            let xs = density.sample(cfg.samples, cfg.seed, STREAM_EQUIVALENCE + di as u64)?;
            let mu = EmpiricalMeasure::from_points_1d(xs)?;
            let profile = sigma_lower_profile(&mu, &ts, &SigmaOptions::default())?;
            let mut rows = Vec::new();
            for &h in &h_grid {
                let tv = density.tv_shift(h);
                let sig_half = find_t(&profile, h / 2.0);
                let sig_full = find_t(&profile, h);
                require_converged(sig_half, density.name())?;
                require_converged(sig_full, density.name())?;

                rows.push(
                    BoundCheck {
                        name: "shift_tv_sigma_equivalence".into(),
                        case: format!("{}:tv_le_2sigma", density.name()),
                        params: params(&[("h", h), ("slack", 1.05)]),
                        lhs: tv,
                        lhs_err: 0.0,
                        rhs: 2.0 * 1.05 * sig_half.lower,
                        rhs_err: 2.0 * 1.05 * sig_half.lower_err,
                        asserted: true,
                        vacuous: false,
                        note: "tv by exact quadrature; sigma estimated from below".into(),
                    }
                    .into_row(),
                );
                rows.push(
                    BoundCheck {
                        name: "shift_tv_sigma_equivalence".into(),
                        case: format!("{}:sigma_le_6k_tv", density.name()),
                        params: params(&[("t", h), ("slack", 1.05)]),
                        lhs: sig_full.lower,
                        lhs_err: sig_full.lower_err,
                        rhs: 6.0 * 1.05 * tv,
                        rhs_err: 0.0,
                        asserted: true,
                        vacuous: false,
                        note: "shift tv is monotone in h for these densities, so the \
                               supremum over |h| <= t is tv at t"
                            .into(),
                    }
                    .into_row(),
                );
                rows.push(
                    BoundCheck {
                        name: "shift_tv_sigma_equivalence".into(),
                        case: format!("{}:equality_gap", density.name()),
                        params: params(&[("h", h)]),
                        lhs: (tv - 2.0 * sig_half.lower).abs(),
                        lhs_err: 2.0 * sig_half.lower_err,
                        rhs: 0.05 * tv,
                        rhs_err: 0.0,
                        asserted: false,
                        vacuous: false,
                        note: "tv = 2 sigma(h/2) holds with equality on these densities".into(),
                    }
                    .into_row(),
                );
            }
            Ok(rows)
        })
        .collect();

    let mut rows = Vec::new();
    for g in groups {
        rows.extend(g?);
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// TV bounded by sigma plus a transport term.
// ---------------------------------------------------------------------------

/// Shared body for the two transport-metric variants of the TV bound
///
/// ```text
/// tv(mu, nu) <= 3 sqrt(k) sigma(mu - nu, eps) + sqrt(k) eps^{-1} d(mu - nu)
/// ```
///
/// with `d` the bounded-Lipschitz (KR) norm restricted to `eps in (0,1)`, or
/// the Kantorovich norm for any `eps > 0`.
fn tv_sigma_transport_rows(
    cfg: &HarnessConfig,
    metric: &str,
    stream: u64,
) -> Result<Vec<CheckRow>> {
    let check_name = match metric {
        "kr" => "tv_from_sigma_and_kr",
        _ => "tv_from_sigma_and_kantorovich",
    };
    let h = 0.3;
    let eps_grid: &[f64] = match metric {
        "kr" => &[0.3, 0.5, 0.7, 0.9],
        _ => &[0.3, 0.5, 0.9, 1.5],
    };
    let mut rows = Vec::new();

    // Dimension 1, asserted: exact TV oracle for a normal shift pair.
    let xs = OracleDensity::StdNormal.sample(cfg.samples, cfg.seed, stream)?;
    let mu = EmpiricalMeasure::from_points_1d(xs)?;
    let nu = mu.shift(&[h])?;
    let omega = mu.difference(&nu)?;
    let tv = OracleDensity::StdNormal.tv_shift(h);
    let dist = match metric {
        "kr" => kr_norm_with(&omega, &exact_1d())?,
        _ => kantorovich_norm(&omega)?,
    };
    let profile = sigma_lower_profile(&omega, eps_grid, &SigmaOptions::default())?;
    for est in &profile {
        require_converged(est, "normal shift difference")?;
        let eps = est.t;
        rows.push(
            BoundCheck {
                name: check_name.into(),
                case: "normal_vs_shift_0.3:k1".into(),
                params: params(&[("eps", eps), ("h", h), ("transport", dist.value)]),
                lhs: tv,
                lhs_err: 0.0,
                rhs: 3.0 * est.lower + dist.value / eps,
                rhs_err: 3.0 * est.lower_err + dist.error / eps,
                asserted: true,
                vacuous: false,
                note: "tv by exact quadrature; sigma of the signed difference \
                       estimated from below"
                    .into(),
            }
            .into_row(),
        );
    }
    if metric == "kantorovich" {
        // The Kantorovich norm of a paired shift difference is exactly |h|.
        rows.push(
            BoundCheck {
                name: check_name.into(),
                case: "kantorovich_matches_shift_w1".into(),
                params: params(&[("h", h)]),
                lhs: (dist.value - h).abs(),
                lhs_err: 0.0,
                rhs: dist.error + 5e-3,
                rhs_err: 0.0,
                asserted: true,
                vacuous: false,
                note: "signed transport of a paired shift moves each atom by h".into(),
            }
            .into_row(),
        );
    }

    // Dimension 2, informational: the sigma term is only estimated from
    // below along cylindrical directions, so the bound is not asserted.
    let batch = GaussianSpace::new(2).sample(cfg.samples, cfg.seed, stream + 1)?;
    let mu2 = pushforward(&catalog::builtin("id2")?, &batch)?;
    let nu2 = mu2.shift(&[h, 0.0])?;
    let tv2 = OracleDensity::StdNormal.tv_shift(h); // product measure shifts in one axis
    let omega2 = subsample(&mu2, 600)?.difference(&subsample(&nu2, 600)?)?;
    let dist2 = match metric {
        "kr" => kr_norm_with(
            &omega2,
            &TransportOptions {
                support_limit: 2000,
                coarsen: false,
            },
        )?,
        _ => kantorovich_norm(&omega2)?,
    };
    let opts2 = SigmaOptions {
        random_directions: 4,
        ..SigmaOptions::default()
    };
    let omega2_full = mu2.difference(&nu2)?;
    let profile2 = sigma_lower_profile(&omega2_full, eps_grid, &opts2)?;
    let sqrt2 = 2.0_f64.sqrt();
    for est in &profile2 {
        let eps = est.t;
        rows.push(
            BoundCheck {
                name: check_name.into(),
                case: "normal2d_vs_shift_0.3:k2".into(),
                params: params(&[
                    ("eps", eps),
                    ("h", h),
                    ("transport", dist2.value),
                    ("converged", if est.converged { 1.0 } else { 0.0 }),
                ]),
                lhs: tv2,
                lhs_err: 0.0,
                rhs: 3.0 * sqrt2 * est.lower + sqrt2 * dist2.value / eps,
                rhs_err: 3.0 * sqrt2 * est.lower_err
                    + sqrt2 * (dist2.error + dist2.value / (600.0_f64).sqrt()) / eps,
                asserted: false,
                vacuous: false,
                note: "transport norm from a paired 600-atom subsample solved \
                       exactly; sigma along cylindrical directions only"
                    .into(),
            }
            .into_row(),
        );
    }
    Ok(rows)
}

/// TV bounded by the shift modulus of the difference plus a scaled
/// bounded-Lipschitz transport term, on shrinking regularization radii.
pub fn tv_from_sigma_and_kr(cfg: &HarnessConfig) -> Result<Vec<CheckRow>> {
    tv_sigma_transport_rows(cfg, "kr", STREAM_LEMMA_KR)
}

/// The same TV bound with the Kantorovich norm, valid for every radius.
pub fn tv_from_sigma_and_kantorovich(cfg: &HarnessConfig) -> Result<Vec<CheckRow>> {
    tv_sigma_transport_rows(cfg, "kantorovich", STREAM_LEMMA_KANT)
}

// ---------------------------------------------------------------------------
// Scaling of sigma in the degeneracy functional.
// ---------------------------------------------------------------------------

struct ScalingOutcome {
    rows: Vec<CheckRow>,
}

/// Shared scaling-fit body.  For radii `t` on a geometric grid with
/// `eps = sqrt(t)`, compares `y(t) = sigma(pushforward, t)` (held-out lower
/// estimates) against `x(t) = u(eps)^q`:
///
/// ```text
/// sigma(t) <= c * x(t) + coeff * u(eps),     q = 1 - 1/p   (gradient route)
///                                            q = 1 - (4k-1)/p (matrix route)
/// ```
///
/// Asserts the log-log slope of `y` against `x` is at least `1 - 0.05` with
/// `r^2 >= 0.9`, and that the fitted constants `c_t = (y - coeff*u)/x` vary by
/// at most a factor 5 where positive.
fn sigma_scaling_case(
    check_name: &str,
    map: &MapSpec,
    norm: GradientNorm,
    p: f64,
    coeff: f64,
    cfg: &HarnessConfig,
    stream: u64,
) -> Result<ScalingOutcome> {
    let q = match norm {
        GradientNorm::GradLength => 1.0 - 1.0 / p,
        GradientNorm::MalliavinDet => 1.0 - (4.0 * map.dim_out() as f64 - 1.0) / p,
    };
    let t_grid: Vec<f64> = (0..=6).map(|j| 0.05 * 10f64.powf(j as f64 / 8.0)).collect();
    let batch = GaussianSpace::new(map.dim_in()).sample(cfg.samples, cfg.seed, stream)?;
    let g = degeneracy_values(map, norm, &batch)?;
    let mu = pushforward(map, &batch)?;
    let opts = SigmaOptions {
        random_directions: if mu.dim() >= 2 { 4 } else { 0 },
        ..SigmaOptions::default()
    };
    let profile = sigma_lower_profile(&mu, &t_grid, &opts)?;

    let mut us = Vec::new();
    let mut u_errs = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut y_errs = Vec::new();
    for (&t, est) in t_grid.iter().zip(&profile) {
        let u = u_gamma_values(&g, t.sqrt())?;
        us.push(u.estimate.mean);
        u_errs.push(u.estimate.stderr);
        xs.push(u.estimate.mean.powf(q));
        ys.push(est.lower);
        y_errs.push(est.lower_err);
    }
    let vacuous = us.iter().all(|&u| u >= 0.9);
    let case = map.name().to_string();
    let mut rows = Vec::new();

    if vacuous {
        rows.push(
            ScalingCheck {
                name: check_name.into(),
                case: case.clone(),
                params: params(&[("p", p), ("q", q)]),
                fitted: 0.0,
                predicted: 1.0,
                r_squared: 0.0,
                vacuous: true,
                note: "degeneracy functional saturated (u >= 0.9) across the \
                       whole radius grid; no scaling information"
                    .into(),
            }
            .into_row(),
        );
        return Ok(ScalingOutcome { rows });
    }

    for est in &profile {
        require_converged(est, map.name())?;
    }

    let points: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    let (slope, _, r2) = fit_log_log(&points)?;
    rows.push(
        ScalingCheck {
            name: check_name.into(),
            case: case.clone(),
            params: params(&[("p", p), ("q", q)]),
            fitted: slope,
            predicted: 1.0,
            r_squared: r2,
            vacuous: false,
            note: "log sigma lower estimates against log u^q; a slope at or \
                   above 1 is consistent with the first-term scaling"
                .into(),
        }
        .into_row(),
    );

    // Normalize sigma against the whole two-term shape `u^q + coeff * u`
    // rather than subtracting the additive term: near the small-radius end
    // the two terms are comparable, and a subtraction-based constant is
    // ill-conditioned there (it collapses to zero on noise).
    let cs: Vec<f64> = (0..t_grid.len())
        .map(|i| (ys[i] / (xs[i] + coeff * us[i])).max(0.0))
        .collect();
    let c_hat = cs.iter().fold(0.0_f64, |a, &b| a.max(b));
    let positive: Vec<f64> = cs.iter().copied().filter(|&c| c > 0.0).collect();
    if positive.len() >= 2 {
        let cmax = positive.iter().fold(f64::MIN, |a, &b| a.max(b));
        let cmin = positive.iter().fold(f64::MAX, |a, &b| a.min(b));
        rows.push(
            BoundCheck {
                name: check_name.into(),
                case: format!("{case}:constant_stability"),
                params: params(&[("p", p), ("count", positive.len() as f64)]),
                lhs: cmax / cmin,
                lhs_err: 0.0,
                rhs: 5.0,
                rhs_err: 0.0,
                asserted: true,
                vacuous: false,
                note: "spread of the ratios of sigma lower estimates to the \
                       two-term shape across the radius grid"
                    .into(),
            }
            .into_row(),
        );
    } else {
        rows.push(
            BoundCheck {
                name: check_name.into(),
                case: format!("{case}:constant_stability"),
                params: params(&[("p", p), ("count", positive.len() as f64)]),
                lhs: 0.0,
                lhs_err: 0.0,
                rhs: 5.0,
                rhs_err: 0.0,
                asserted: false,
                vacuous: false,
                note: "fewer than two positive sigma lower estimates, so the \
                       constant spread cannot be measured"
                    .into(),
            }
            .into_row(),
        );
    }

    for (i, &t) in t_grid.iter().enumerate() {
        rows.push(
            BoundCheck {
                name: check_name.into(),
                case: format!("{case}:radius"),
                params: params(&[
                    ("t", t),
                    ("eps", t.sqrt()),
                    ("u", us[i]),
                    ("x", xs[i]),
                    ("c_t", cs[i]),
                ]),
                lhs: ys[i],
                lhs_err: y_errs[i],
                rhs: c_hat * (xs[i] + coeff * us[i]),
                rhs_err: c_hat * coeff * u_errs[i],
                asserted: false,
                vacuous: false,
                note: "sigma lower estimate against the fitted two-term bound".into(),
            }
            .into_row(),
        );
    }
    Ok(ScalingOutcome { rows })
}

/// Scaling of the shift modulus against `u(|grad f|, sqrt(t))^{1-1/p}` for
/// scalar maps (additive term `4u`).
pub fn sigma_scaling_gradient(cfg: &HarnessConfig) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for (name, p, offset) in [("x1", 2.0, 0), ("x1sq", 4.0, 1)] {
        let map = catalog::builtin(name)?;
        let out = sigma_scaling_case(
            "sigma_scaling_gradient",
            &map,
            GradientNorm::GradLength,
            p,
            4.0,
            cfg,
            STREAM_SCALING_GRAD + offset,
        )?;
        rows.extend(out.rows);
    }
    Ok(rows)
}

/// Scaling of the shift modulus against `u(det M_f, sqrt(t))^{1-(4k-1)/p}`
/// for vector maps (additive term `u`, coefficient one), including the
/// degenerate map whose saturated functional must be reported vacuous.
pub fn sigma_scaling_malliavin(cfg: &HarnessConfig) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for (name, p, offset) in [("id2", 10.0, 0), ("x1sq_x2", 16.0, 1), ("x1_x1", 10.0, 2)] {
        let map = catalog::builtin(name)?;
        let out = sigma_scaling_case(
            "sigma_scaling_malliavin",
            &map,
            GradientNorm::MalliavinDet,
            p,
            1.0,
            cfg,
            STREAM_SCALING_MALL + offset,
        )?;
        rows.extend(out.rows);
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Besov-type exponents from shift TV.
// ---------------------------------------------------------------------------

fn window_row(
    check: &str,
    case: &str,
    alpha: f64,
    r2: f64,
    lo: f64,
    hi: f64,
    extra: &[(&str, f64)],
    note: &str,
) -> CheckRow {
    let mut p = params(extra);
    p.insert("alpha_hat".into(), alpha);
    p.insert("r_squared".into(), r2);
    p.insert("window_lo".into(), lo);
    p.insert("window_hi".into(), hi);
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    BoundCheck {
        name: check.into(),
        case: case.into(),
        params: p,
        lhs: (alpha - mid).abs(),
        lhs_err: 0.0,
        rhs: half,
        rhs_err: 0.0,
        asserted: true,
        vacuous: false,
        note: note.into(),
    }
    .into_row()
}

fn default_h_grid() -> Vec<f64> {
    (0..=12).map(|j| 0.02 * 10f64.powf(j as f64 / 8.0)).collect()
}

/// Shift grid and histogram policy used to fit a reference density's
/// shift-TV exponent empirically.
///
/// Binning trades two error sources against each other: per-bin shift signal
/// scales with the bin width while per-bin sampling noise scales with its
/// square root, so wide bins keep the small-shift points out of the noise
/// floor; but a square-root singularity is only visible when bins resolve
/// scale `h`.  Smooth densities therefore get a few fixed bins (histogram
/// aggregation preserves their unit exponent exactly) and the singular one
/// keeps fine sample-size-driven bins.
pub fn density_fit_plan(density: OracleDensity) -> (Vec<f64>, BinningPolicy) {
    let policy = match density {
        OracleDensity::StdNormal | OracleDensity::Uniform01 => BinningPolicy::FixedCount(24),
        _ => BinningPolicy::default(),
    };
    (default_h_grid(), policy)
}

/// Shift-TV scaling exponents of the reference densities: oracle fits inside
/// closed-form windows (normal and uniform near 1, square-root singularity
/// near 1/2), empirical fits within 0.05 of the oracles, and `r^2 >= 0.9`
/// throughout.
pub fn besov_density_windows(cfg: &HarnessConfig) -> Result<Vec<CheckRow>> {
    let cases = [
        (OracleDensity::StdNormal, 0.95, 1.02),
        (OracleDensity::ChiSq1, 0.45, 0.55),
        (OracleDensity::Uniform01, 0.95, 1.02),
    ];
    let groups: Vec<Result<Vec<CheckRow>>> = cases
        .par_iter()
        .enumerate()
        .map(|(di, &(density, lo, hi))| {
            let (grid, policy) = density_fit_plan(density);
            let oracle_pts: Vec<(f64, f64, f64)> =
                grid.iter().map(|&h| (h, density.tv_shift(h), 0.0)).collect();
            let oracle = besov_fit_points(&oracle_pts)?;

            let xs = density.sample(cfg.samples, cfg.seed, STREAM_BESOV_DENSITY + di as u64)?;
            let mu = EmpiricalMeasure::from_points_1d(xs)?;
            let empirical = besov_fit_empirical(&mu, &grid, &[1.0], policy)?;

            Ok(vec![
                window_row(
                    "besov_density_windows",
                    &format!("{}:oracle", density.name()),
                    oracle.alpha_hat,
                    oracle.r_squared,
                    lo,
                    hi,
                    &[],
                    "fit of exact shift-tv quadrature values",
                ),
                window_row(
                    "besov_density_windows",
                    &format!("{}:empirical", density.name()),
                    empirical.alpha_hat,
                    empirical.r_squared,
                    oracle.alpha_hat - 0.05,
                    oracle.alpha_hat + 0.05,
                    &[("usable_points", empirical.h_values.len() as f64)],
                    "empirical same-sample shift fit against the oracle exponent",
                ),
                BoundCheck {
                    name: "besov_density_windows".into(),
                    case: format!("{}:fit_quality", density.name()),
                    params: params(&[("oracle_r2", oracle.r_squared)]),
                    lhs: 0.9,
                    lhs_err: 0.0,
                    rhs: empirical.r_squared,
                    rhs_err: 0.0,
                    asserted: true,
                    vacuous: false,
                    note: "empirical log-log fit must stay close to linear".into(),
                }
                .into_row(),
            ])
        })
        .collect();
    let mut rows = Vec::new();
    for g in groups {
        rows.extend(g?);
    }
    Ok(rows)
}

/// Fractional-smoothness prediction from a negative moment of the gradient
/// length: when `E[|grad f|^{-theta}]` is finite and `f` has `p`-integrable
/// second-order data, the pushforward's shift-TV exponent is at least
///
/// ```text
/// alpha = p * theta / (2p + theta)
/// ```
///
/// Checks the moment probe, then fits the empirical exponent and asserts it
/// is at least `alpha - 0.05`.
pub fn besov_from_gradient_moment(cfg: &HarnessConfig) -> Result<Vec<CheckRow>> {
    let cases: [(&str, f64, f64); 2] = [("x1sq", 10.0, 0.9), ("x1", 10.0, 0.5)];
    let mut rows = Vec::new();
    for (idx, &(name, p, theta)) in cases.iter().enumerate() {
        let map = catalog::builtin(name)?;
        let alpha = p * theta / (2.0 * p + theta);
        let batch = GaussianSpace::new(map.dim_in()).sample(
            cfg.samples,
            cfg.seed,
            STREAM_BESOV_GRAD + idx as u64,
        )?;
        let g = degeneracy_values(&map, GradientNorm::GradLength, &batch)?;
        let probe = neg_moment_probe(&g, theta)?;
        let (g1, g2) = probe.growth();
        rows.push(
            BoundCheck {
                name: "besov_from_gradient_moment".into(),
                case: format!("{name}:moment_probe"),
                params: params(&[
                    ("theta", theta),
                    ("growth_half", g1),
                    ("growth_full", g2),
                    ("moment", probe.full.mean),
                ]),
                lhs: g1.min(g2),
                lhs_err: 0.0,
                rhs: 1.5,
                rhs_err: 0.0,
                asserted: true,
                vacuous: false,
                note: "negative moment must stabilize under sample doubling".into(),
            }
            .into_row(),
        );

        let mu = pushforward(&map, &batch)?;
        let fit = besov_fit_empirical(&mu, &default_h_grid(), &[1.0], BinningPolicy::default())?;
        rows.push(
            BoundCheck {
                name: "besov_from_gradient_moment".into(),
                case: format!("{name}:exponent"),
                params: params(&[
                    ("p", p),
                    ("theta", theta),
                    ("alpha_pred", alpha),
                    ("alpha_hat", fit.alpha_hat),
                    ("r_squared", fit.r_squared),
                ]),
                lhs: alpha - 0.05,
                lhs_err: 0.0,
                rhs: fit.alpha_hat,
                rhs_err: 0.0,
                asserted: true,
                vacuous: false,
                note: "the prediction is a lower estimate of the true exponent".into(),
            }
            .into_row(),
        );
        rows.push(
            BoundCheck {
                name: "besov_from_gradient_moment".into(),
                case: format!("{name}:fit_quality"),
                params: params(&[("alpha_hat", fit.alpha_hat)]),
                lhs: 0.9,
                lhs_err: 0.0,
                rhs: fit.r_squared,
                rhs_err: 0.0,
                asserted: true,
                vacuous: false,
                note: String::new(),
            }
            .into_row(),
        );
    }
    Ok(rows)
}

/// The matrix-route analogue: with `E[(det M_f)^{-theta}]` finite (log-slow
/// growth tolerated by the probe) and `p`-integrable second-order data, each
/// coordinate direction of the pushforward has shift-TV exponent at least
///
/// ```text
/// alpha = p * theta / (2p + (4k - 1) * theta)
/// ```
pub fn besov_from_malliavin_moment(cfg: &HarnessConfig) -> Result<Vec<CheckRow>> {
    let cases: [(&str, f64, f64); 2] = [("x1sq_x2", 16.0, 0.5), ("id2", 10.0, 0.5)];
    let mut rows = Vec::new();
    for (idx, &(name, p, theta)) in cases.iter().enumerate() {
        let map = catalog::builtin(name)?;
        let k = map.dim_out() as f64;
        let alpha = p * theta / (2.0 * p + (4.0 * k - 1.0) * theta);
        let batch = GaussianSpace::new(map.dim_in()).sample(
            cfg.samples,
            cfg.seed,
            STREAM_BESOV_MALL + idx as u64,
        )?;
        let g = degeneracy_values(&map, GradientNorm::MalliavinDet, &batch)?;
        let probe = neg_moment_probe(&g, theta)?;
        let (g1, g2) = probe.growth();
        rows.push(
            BoundCheck {
                name: "besov_from_malliavin_moment".into(),
                case: format!("{name}:moment_probe"),
                params: params(&[
                    ("theta", theta),
                    ("growth_half", g1),
                    ("growth_full", g2),
                    ("moment", probe.full.mean),
                ]),
                lhs: g1.min(g2),
                lhs_err: 0.0,
                rhs: 1.5,
                rhs_err: 0.0,
                asserted: true,
                vacuous: false,
                note: "slow logarithmic growth is tolerated; only sustained \
                       doubling growth counts as divergence"
                    .into(),
            }
            .into_row(),
        );

        let mu = pushforward(&map, &batch)?;
        let mut worst_alpha = f64::INFINITY;
        let mut worst_r2: f64 = 1.0;
        for d in 0..map.dim_out() {
            let mut dir = vec![0.0; map.dim_out()];
            dir[d] = 1.0;
            let fit = besov_fit_empirical(&mu, &default_h_grid(), &dir, BinningPolicy::default())?;
            worst_alpha = worst_alpha.min(fit.alpha_hat);
            worst_r2 = worst_r2.min(fit.r_squared);
        }
        rows.push(
            BoundCheck {
                name: "besov_from_malliavin_moment".into(),
                case: format!("{name}:exponent"),
                params: params(&[
                    ("p", p),
                    ("theta", theta),
                    ("alpha_pred", alpha),
                    ("alpha_hat", worst_alpha),
                    ("r_squared", worst_r2),
                ]),
                lhs: alpha - 0.05,
                lhs_err: 0.0,
                rhs: worst_alpha,
                rhs_err: 0.0,
                asserted: true,
                vacuous: false,
                note: "worst coordinate-direction exponent".into(),
            }
            .into_row(),
        );
        rows.push(
            BoundCheck {
                name: "besov_from_malliavin_moment".into(),
                case: format!("{name}:fit_quality"),
                params: params(&[("alpha_hat", worst_alpha)]),
                lhs: 0.9,
                lhs_err: 0.0,
                rhs: worst_r2,
                rhs_err: 0.0,
                asserted: true,
                vacuous: false,
                note: String::new(),
            }
            .into_row(),
        );
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// TV-against-transport exponents along map families.
// ---------------------------------------------------------------------------

/// Along a one-parameter family `g_s -> f`, fits `log tv` against
/// `log kr` and asserts the slope is at least the predicted transport
/// exponent minus 0.05:
///
/// ```text
/// beta = p * theta / ((2 + theta) p + theta)     (gradient route)
/// ```
pub fn tv_kr_exponent_gradient(cfg: &HarnessConfig) -> Result<Vec<CheckRow>> {
    let p = 10.0;
    let theta = 0.9;
    let beta = p * theta / ((2.0 + theta) * p + theta);
    let s_grid: Vec<f64> = (0..=6).map(|j| 0.05 * 10f64.powf(j as f64 / 8.0)).collect();

    let mut rows = Vec::new();
    for (case, base_name) in [("x1sq_scale_family", "x1sq"), ("x1_shift_family", "x1")] {
        let base = catalog::builtin(base_name)?;
        let batch = GaussianSpace::new(1).sample(cfg.samples, cfg.seed, STREAM_EXP_GRAD)?;
        let mu = pushforward(&base, &batch)?;
        let mut points = Vec::new();
        for &s in &s_grid {
            let family = match case {
                "x1sq_scale_family" => {
                    poly_map(&format!("x1sq_scaled_{s}"), 1, vec![vec![(vec![2], 1.0 + s)]])
                }
                _ => poly_map(
                    &format!("x1_shifted_{s}"),
                    1,
                    vec![vec![(vec![1], 1.0), (vec![0], s)]],
                ),
            };
            let nu = pushforward(&family, &batch)?;
            let tv = tv_distance(&nu, &mu, BinningPolicy::default())?;
            let kr = kr_norm_with(&nu.difference(&mu)?, &exact_1d())?;
            points.push((kr.value, tv.value));
            rows.push(
                BoundCheck {
                    name: "tv_kr_exponent_gradient".into(),
                    case: format!("{case}:family_point"),
                    params: params(&[("s", s), ("kr", kr.value), ("kr_err", kr.error)]),
                    lhs: tv.value,
                    lhs_err: tv.error,
                    rhs: 2.0,
                    rhs_err: 0.0,
                    asserted: false,
                    vacuous: false,
                    note: "paired same-batch family member against the base map".into(),
                }
                .into_row(),
            );
        }
        let (slope, _, r2) = fit_log_log(&points)?;
        rows.push(
            ScalingCheck {
                name: "tv_kr_exponent_gradient".into(),
                case: case.into(),
                params: params(&[("p", p), ("theta", theta)]),
                fitted: slope,
                predicted: beta,
                r_squared: r2,
                vacuous: false,
                note: "tv against transport distance along the family; the \
                       predicted exponent is a guaranteed lower rate"
                    .into(),
            }
            .into_row(),
        );
    }
    Ok(rows)
}

/// The matrix-route analogue: predicted exponent `alpha / (1 + alpha)` with
/// `alpha = p theta / (2p + (4k-1) theta)`, checked along a shift family,
/// plus a saturation row far from the base point.
pub fn tv_kr_exponent_malliavin(cfg: &HarnessConfig) -> Result<Vec<CheckRow>> {
    let s_grid: Vec<f64> = (0..=6).map(|j| 0.05 * 10f64.powf(j as f64 / 8.0)).collect();
    let mut rows = Vec::new();
    for (idx, (case, base_name, p, theta)) in [
        ("x1sq_x2_shift_family", "x1sq_x2", 16.0, 0.5),
        ("id2_shift_family", "id2", 10.0, 0.5),
    ]
    .into_iter()
    .enumerate()
    {
        let base = catalog::builtin(base_name)?;
        let k = base.dim_out() as f64;
        let alpha = p * theta / (2.0 * p + (4.0 * k - 1.0) * theta);
        let predicted = alpha / (1.0 + alpha);
        let batch =
            GaussianSpace::new(2).sample(cfg.samples, cfg.seed, STREAM_EXP_MALL + idx as u64)?;
        let mu = pushforward(&base, &batch)?;
        let exact = TransportOptions {
            support_limit: 2000,
            coarsen: false,
        };
        // Both bases send independent inputs to the two output coordinates
        // and the family shifts only the first, so the two pushforwards are
        // product measures sharing the second factor: the joint TV equals
        // the marginal TV on the shifted coordinate, which the 1-d histogram
        // resolves far better than a 2-d grid near a density singularity.
        let m0 = coordinate_marginal(&mu, 0)?;
        let sub = subsample(&mu, 600)?;
        let mut points = Vec::new();
        for &s in &s_grid {
            let tv = tv_distance(&m0.shift(&[s])?, &m0, BinningPolicy::default())?;
            let omega = sub.difference(&sub.shift(&[s, 0.0])?)?;
            let kr = kr_norm_with(&omega, &exact)?;
            points.push((kr.value, tv.value));
            rows.push(
                BoundCheck {
                    name: "tv_kr_exponent_malliavin".into(),
                    case: format!("{case}:family_point"),
                    params: params(&[("s", s), ("kr", kr.value)]),
                    lhs: tv.value,
                    lhs_err: tv.error,
                    rhs: 2.0,
                    rhs_err: 0.0,
                    asserted: false,
                    vacuous: false,
                    note: "tv on the shifted coordinate's marginal; transport \
                           from a paired 600-atom subsample solved exactly"
                        .into(),
                }
                .into_row(),
            );
        }
        let (slope, _, r2) = fit_log_log(&points)?;
        rows.push(
            ScalingCheck {
                name: "tv_kr_exponent_malliavin".into(),
                case: case.into(),
                params: params(&[("p", p), ("theta", theta), ("alpha", alpha)]),
                fitted: slope,
                predicted,
                r_squared: r2,
                vacuous: false,
                note: "tv against transport distance along the shift family".into(),
            }
            .into_row(),
        );

        // Far separation: both distances saturate near their caps.
        let far = mu.shift(&[50.0, 0.0])?;
        let tv_far = tv_distance(&far, &mu, BinningPolicy::default())?;
        let omega_far = subsample(&mu, 600)?.difference(&subsample(&far, 600)?)?;
        let kr_far = kr_norm_with(&omega_far, &exact)?;
        rows.push(
            BoundCheck {
                name: "tv_kr_exponent_malliavin".into(),
                case: format!("{case}:saturation"),
                params: params(&[("s", 50.0), ("kr", kr_far.value)]),
                lhs: (tv_far.value - 2.0).abs().max((kr_far.value - 2.0).abs()),
                lhs_err: tv_far.error,
                rhs: 0.05,
                rhs_err: 0.0,
                asserted: false,
                vacuous: false,
                note: "disjoint supports: tv and the capped transport norm both \
                       saturate at 2"
                    .into(),
            }
            .into_row(),
        );
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Convergence demos for map sequences.
// ---------------------------------------------------------------------------

struct DemoSpec<'a> {
    check: &'a str,
    sequence: &'a str,
    limit: MapSpec,
    norm: GradientNorm,
    /// Exponent on the degeneracy tail in the composite rate.
    delta_exp: f64,
    /// Exponent on the transport distance in the composite rate.
    kr_exp: f64,
    tv_policy: BinningPolicy,
    /// Solve transport on a paired subsample of this size (0: full, 1-d).
    kr_subsample: usize,
    stream: u64,
}

/// A full sequence demo: paired TV and transport distances to the limit,
/// degeneracy tails, the composite fitted rate calibrated on the early
/// indices and verified on the late ones, monotonicity, the final TV
/// threshold, and the vacuity detector.
fn sequence_demo(cfg: &HarnessConfig, spec: &DemoSpec<'_>) -> Result<Vec<CheckRow>> {
    let n_grid: [usize; 9] = [1, 2, 3, 5, 8, 12, 20, 30, 50];
    let calibrate = 4; // fit the constant on the first four indices
    let dim_in = catalog::sequence(spec.sequence, 1)?.dim_in();
    let batch = GaussianSpace::new(dim_in).sample(cfg.samples, cfg.seed, spec.stream)?;
    let limit_mu = pushforward(&spec.limit, &batch)?;
    let exact = TransportOptions {
        support_limit: 2000,
        coarsen: false,
    };

    struct Step {
        n: usize,
        tv: f64,
        tv_err: f64,
        kr: f64,
        kr_err: f64,
        delta_tail: f64,
        tail_err: f64,
        eps: f64,
        g_sorted: Vec<f64>,
    }

    let steps: Vec<Result<Step>> = n_grid
        .par_iter()
        .map(|&m| {
            let f_m = catalog::sequence(spec.sequence, m)?;
            let mu_m = pushforward(&f_m, &batch)?;
            let tv = tv_distance(&mu_m, &limit_mu, spec.tv_policy)?;
            let (kr_value, kr_err) = if spec.kr_subsample > 0 {
                let omega = subsample(&mu_m, spec.kr_subsample)?
                    .difference(&subsample(&limit_mu, spec.kr_subsample)?)?;
                let kr = kr_norm_with(&omega, &exact)?;
                (
                    kr.value,
                    kr.error + kr.value / (spec.kr_subsample as f64).sqrt(),
                )
            } else {
                let kr = kr_norm_with(&mu_m.difference(&limit_mu)?, &exact_1d())?;
                (kr.value, kr.error)
            };
            let mut g = degeneracy_values(&f_m, spec.norm, &batch)?;
            g.sort_by(f64::total_cmp);
            let eps = kr_value.max(1e-300).powf(1.0 / 8.0);
            Ok(Step {
                n: m,
                tv: tv.value,
                tv_err: tv.error,
                kr: kr_value,
                kr_err,
                delta_tail: 0.0,
                tail_err: 0.0,
                eps,
                g_sorted: g,
            })
        })
        .collect();
    let mut steps: Vec<Step> = steps.into_iter().collect::<Result<_>>()?;

    // The degeneracy tail is a supremum over the whole sequence, evaluated at
    // each step's transport-derived radius.
    let count = batch.count();
    for i in 0..steps.len() {
        let eps = steps[i].eps;
        let mut worst_hits = 0usize;
        for other in &steps {
            let hits = other.g_sorted.partition_point(|&v| v <= eps);
            worst_hits = worst_hits.max(hits);
        }
        steps[i].delta_tail = worst_hits as f64 / count as f64;
        steps[i].tail_err = wilson_halfwidth(worst_hits, count);
    }

    let vacuous = steps.iter().all(|s| s.delta_tail >= 0.9);
    let shape = |s: &Step| s.delta_tail.powf(spec.delta_exp) + s.kr.powf(spec.kr_exp);
    let c_fit = steps[..calibrate]
        .iter()
        .map(|s| s.tv / shape(s))
        .fold(0.0_f64, f64::max);

    let mut rows = Vec::new();
    for (i, s) in steps.iter().enumerate() {
        let in_calibration = i < calibrate;
        rows.push(
            BoundCheck {
                name: spec.check.into(),
                case: format!("{}:composite_rate", spec.sequence),
                params: params(&[
                    ("n", s.n as f64),
                    ("kr", s.kr),
                    ("kr_err", s.kr_err),
                    ("delta_tail", s.delta_tail),
                    ("eps", s.eps),
                    ("shape", shape(s)),
                    ("calibration", if in_calibration { 1.0 } else { 0.0 }),
                ]),
                lhs: s.tv,
                lhs_err: s.tv_err,
                rhs: c_fit * shape(s),
                rhs_err: c_fit
                    * (spec.delta_exp * s.delta_tail.max(1e-12).powf(spec.delta_exp - 1.0)
                        * s.tail_err
                        + spec.kr_exp * s.kr.max(1e-12).powf(spec.kr_exp - 1.0) * s.kr_err),
                asserted: !in_calibration && !vacuous,
                vacuous,
                note: if in_calibration {
                    "calibration point for the composite-rate constant".into()
                } else {
                    "held-out point checked against the calibrated composite rate".into()
                },
            }
            .into_row(),
        );
    }
    for pair in steps.windows(2) {
        rows.push(
            BoundCheck {
                name: spec.check.into(),
                case: format!("{}:monotone_tv", spec.sequence),
                params: params(&[("n_from", pair[0].n as f64), ("n_to", pair[1].n as f64)]),
                lhs: pair[1].tv,
                lhs_err: pair[1].tv_err,
                rhs: pair[0].tv,
                rhs_err: pair[0].tv_err,
                asserted: !vacuous,
                vacuous,
                note: "tv to the limit decreases along the sequence".into(),
            }
            .into_row(),
        );
    }
    let last = steps.last().unwrap();
    rows.push(
        BoundCheck {
            name: spec.check.into(),
            case: format!("{}:final_tv_below_0.02", spec.sequence),
            params: params(&[("n", last.n as f64)]),
            lhs: last.tv,
            lhs_err: 0.0,
            rhs: 0.02,
            rhs_err: 0.0,
            asserted: !vacuous,
            vacuous,
            note: "strict value threshold, no error allowance".into(),
        }
        .into_row(),
    );
    let max_tail = steps.iter().map(|s| s.delta_tail).fold(0.0_f64, f64::max);
    rows.push(
        BoundCheck {
            name: spec.check.into(),
            case: format!("{}:vacuity_detector", spec.sequence),
            params: params(&[("max_delta_tail", max_tail)]),
            lhs: max_tail,
            lhs_err: 0.0,
            rhs: 0.9,
            rhs_err: 0.0,
            asserted: true,
            vacuous,
            note: if vacuous {
                "degeneracy tail mass at or above 0.9 across the radius grid; \
                 the composite bounds carry no information"
                    .into()
            } else {
                "degeneracy tails stay well below the saturation threshold".into()
            },
        }
        .into_row(),
    );
    Ok(rows)
}

/// Runs the convergence demo for one named catalog sequence.  The route
/// (gradient or matrix), the limit map, and the composite-rate exponents are
/// derived from the sequence and the integrability index `p` (defaulting to
/// 10 on the gradient route and 16 on the matrix route).
pub fn demo_sequence(
    sequence: &str,
    p: Option<f64>,
    cfg: &HarnessConfig,
) -> Result<Vec<CheckRow>> {
    let (check, limit, norm, k, tv_policy, kr_subsample, stream) = match sequence {
        "sin_perturb_1d" => (
            "convergence_demo_gradient",
            catalog::builtin("proj1_2d")?,
            GradientNorm::GradLength,
            1.0,
            BinningPolicy::FreedmanDiaconis { scale: 4.0 },
            0,
            STREAM_DEMO_GRAD,
        ),
        "vanishing_gradient_1d" => (
            "convergence_demo_gradient",
            poly_map("zero_1d", 1, vec![vec![]]),
            GradientNorm::GradLength,
            1.0,
            BinningPolicy::FreedmanDiaconis { scale: 4.0 },
            0,
            STREAM_DEMO_GRAD + 1,
        ),
        "sin_perturb_2d" => (
            "convergence_demo_malliavin",
            catalog::builtin("id2")?,
            GradientNorm::MalliavinDet,
            2.0,
            BinningPolicy::FixedCount(24),
            600,
            STREAM_DEMO_MALL,
        ),
        "vanishing_det_2d" => (
            "convergence_demo_malliavin",
            poly_map("zero_x2", 2, vec![vec![], vec![(vec![0, 1], 1.0)]]),
            GradientNorm::MalliavinDet,
            2.0,
            BinningPolicy::FixedCount(24),
            600,
            STREAM_DEMO_MALL + 1,
        ),
        _ => return Err(Error::UnknownMap(sequence.to_string())),
    };
    let q = match norm {
        GradientNorm::GradLength => {
            let p = p.unwrap_or(10.0);
            if !(p > 1.0) {
                return Err(Error::ConfigParse(format!(
                    "p: gradient-route demo requires p > 1, got {p}"
                )));
            }
            1.0 - 1.0 / p
        }
        GradientNorm::MalliavinDet => {
            let p = p.unwrap_or(16.0);
            if !(p > 4.0 * k - 1.0) {
                return Err(Error::ConfigParse(format!(
                    "p: matrix-route demo requires p > 4k-1 = {}, got {p}",
                    4.0 * k - 1.0
                )));
            }
            1.0 - (4.0 * k - 1.0) / p
        }
    };
    sequence_demo(
        cfg,
        &DemoSpec {
            check,
            sequence,
            limit,
            norm,
            delta_exp: q,
            kr_exp: q / 8.0,
            tv_policy,
            kr_subsample,
            stream,
        },
    )
}

/// Convergence demo along the gradient route: a perturbed-coordinate
/// sequence with nondegenerate gradients converging to a projection, plus a
/// designed vanishing-gradient sequence on which the vacuity detector must
/// fire.
pub fn convergence_demo_gradient(cfg: &HarnessConfig) -> Result<Vec<CheckRow>> {
    let mut rows = demo_sequence("sin_perturb_1d", None, cfg)?;
    rows.extend(demo_sequence("vanishing_gradient_1d", None, cfg)?);
    Ok(rows)
}

/// Convergence demo along the matrix route: a two-dimensional perturbed
/// sequence with unit determinants converging to the identity, plus a
/// designed vanishing-determinant sequence for the vacuity detector.
pub fn convergence_demo_malliavin(cfg: &HarnessConfig) -> Result<Vec<CheckRow>> {
    let mut rows = demo_sequence("sin_perturb_2d", None, cfg)?;
    rows.extend(demo_sequence("vanishing_det_2d", None, cfg)?);
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Suites.
// ---------------------------------------------------------------------------

fn forced_fail_fixture(_cfg: &HarnessConfig) -> Result<Vec<CheckRow>> {
    Ok(vec![BoundCheck {
        name: "forced_fail_fixture".into(),
        case: "intentional".into(),
        params: BTreeMap::new(),
        lhs: 1.0,
        lhs_err: 0.0,
        rhs: 0.0,
        rhs_err: 0.0,
        asserted: true,
        vacuous: false,
        note: "intentional failure fixture for exit-status tests".into(),
    }
    .into_row()])
}

/// All public check names, in suite order.
pub const CHECK_NAMES: &[&str] = &[
    "malliavin_identities",
    "ibp_gradient_1d",
    "ibp_malliavin_kd",
    "small_ball_moment_bound",
    "shift_tv_sigma_equivalence",
    "tv_from_sigma_and_kr",
    "tv_from_sigma_and_kantorovich",
    "sigma_scaling_gradient",
    "sigma_scaling_malliavin",
    "besov_density_windows",
    "besov_from_gradient_moment",
    "besov_from_malliavin_moment",
    "tv_kr_exponent_gradient",
    "tv_kr_exponent_malliavin",
    "convergence_demo_gradient",
    "convergence_demo_malliavin",
];

/// Suite names accepted by [`run_suite`].
pub const SUITE_NAMES: &[&str] = &[
    "identities",
    "ibp",
    "smallball",
    "metrics",
    "scaling",
    "besov",
    "exponents",
    "demos",
    "all",
    "forced-fail",
];

/// The checks belonging to a suite.
pub fn suite_checks(suite: &str) -> Result<Vec<&'static str>> {
    Ok(match suite {
        "identities" => vec!["malliavin_identities"],
        "ibp" => vec!["ibp_gradient_1d", "ibp_malliavin_kd"],
        "smallball" => vec!["small_ball_moment_bound"],
        "metrics" => vec![
            "shift_tv_sigma_equivalence",
            "tv_from_sigma_and_kr",
            "tv_from_sigma_and_kantorovich",
        ],
        "scaling" => vec!["sigma_scaling_gradient", "sigma_scaling_malliavin"],
        "besov" => vec![
            "besov_density_windows",
            "besov_from_gradient_moment",
            "besov_from_malliavin_moment",
        ],
        "exponents" => vec!["tv_kr_exponent_gradient", "tv_kr_exponent_malliavin"],
        "demos" => vec!["convergence_demo_gradient", "convergence_demo_malliavin"],
        "all" => CHECK_NAMES.to_vec(),
        "forced-fail" => vec!["forced_fail_fixture"],
        other => {
            return Err(Error::ConfigParse(format!(
                "unknown suite '{other}'; expected one of {}",
                SUITE_NAMES.join(", ")
            )))
        }
    })
}

fn run_check(name: &str, cfg: &HarnessConfig) -> Result<Vec<CheckRow>> {
    match name {
        "malliavin_identities" => malliavin_identities(cfg),
        "ibp_gradient_1d" => ibp_gradient_1d(cfg),
        "ibp_malliavin_kd" => ibp_malliavin_kd(cfg),
        "small_ball_moment_bound" => small_ball_moment_bound(cfg),
        "shift_tv_sigma_equivalence" => shift_tv_sigma_equivalence(cfg),
        "tv_from_sigma_and_kr" => tv_from_sigma_and_kr(cfg),
        "tv_from_sigma_and_kantorovich" => tv_from_sigma_and_kantorovich(cfg),
        "sigma_scaling_gradient" => sigma_scaling_gradient(cfg),
        "sigma_scaling_malliavin" => sigma_scaling_malliavin(cfg),
        "besov_density_windows" => besov_density_windows(cfg),
        "besov_from_gradient_moment" => besov_from_gradient_moment(cfg),
        "besov_from_malliavin_moment" => besov_from_malliavin_moment(cfg),
        "tv_kr_exponent_gradient" => tv_kr_exponent_gradient(cfg),
        "tv_kr_exponent_malliavin" => tv_kr_exponent_malliavin(cfg),
        "convergence_demo_gradient" => convergence_demo_gradient(cfg),
        "convergence_demo_malliavin" => convergence_demo_malliavin(cfg),
        "forced_fail_fixture" => forced_fail_fixture(cfg),
        other => Err(Error::ConfigParse(format!("unknown check '{other}'"))),
    }
}

/// Runs a suite and returns the sorted report.  A check that aborts with an
/// error contributes a single failing row naming the error, so one broken
/// check can never silently drop out of the report.
///
/// Set `FRACSMOOTH_TIMING=1` to print per-check wall times on stderr.
pub fn run_suite(suite: &str, cfg: &HarnessConfig) -> Result<Report> {
    let names = suite_checks(suite)?;
    let timing = std::env::var_os("FRACSMOOTH_TIMING").is_some();
    let groups: Vec<Vec<CheckRow>> = names
        .par_iter()
        .map(|&name| {
            let started = std::time::Instant::now();
            let rows = match run_check(name, cfg) {
                Ok(rows) => rows,
                Err(err) => vec![CheckRow {
                    check: name.into(),
                    case: "execution".into(),
                    params: BTreeMap::new(),
                    lhs: 1.0,
                    lhs_err: 0.0,
                    rhs: 0.0,
                    rhs_err: 0.0,
                    verdict: Verdict::Fail,
                    margin: -1.0,
                    note: format!("check aborted: {err}"),
                }],
            };
            if timing {
                eprintln!("[timing] {name}: {:.2}s", started.elapsed().as_secs_f64());
            }
            rows
        })
        .collect();
    let mut report = Report::new(cfg.seed, cfg.samples);
    for g in groups {
        report.extend(g);
    }
    report.sort_rows();
    Ok(report)
}
