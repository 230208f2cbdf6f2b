//! The Malliavin matrix of a map and its determinant calculus.
//!
//! For `f = (f_1, ..., f_k): R^n -> R^k` the Malliavin matrix at `x` is the
//! Gram matrix of the component gradients,
//!
//! ```text
//! M_f(x)[i][j] = <grad f_i(x), grad f_j(x)>,
//! ```
//!
//! with determinant `Delta_f = det M_f`, adjugate `A_f` (so that
//! `M_f * A_f = Delta_f * I` with no matrix inversion), and gradient of the
//! determinant via Jacobi's formula
//!
//! ```text
//! d Delta_f / dx_l = trace(A_f * dM_f/dx_l),
//! dm_ij/dx_l      = <D^2 f_i[l,.], grad f_j> + <grad f_i, D^2 f_j[l,.]>.
//! ```
//!
//! An independent route to directional determinant derivatives — replacing
//! one Gram column by its derivative, summed over columns — is also provided
//! and cross-checked in the tests.
//!
//! Determinants and adjugates use explicit cofactor expansion for `k <= 4`
//! (the sizes this crate actually sweeps); larger matrices fall back to a
//! pivoted elimination for the determinant and minor-based cofactors.

use crate::maps::MapSpec;
use crate::jets::Jet2;
use crate::{Error, Result};

/// Everything the determinant calculus of one map evaluation produces.
#[derive(Debug, Clone)]
pub struct MalliavinSample {
    /// `k x k` Gram matrix, row-major.
    pub matrix: Vec<f64>,
    /// `det` of the Gram matrix.
    pub delta: f64,
    /// Adjugate of the Gram matrix, row-major (`M * A = delta * I`).
    pub adjugate: Vec<f64>,
    /// Gradient of `delta` with respect to `x` (length `n`).
    pub grad_delta: Vec<f64>,
    /// Euclidean lengths of the component gradients (length `k`).
    pub grad_norms: Vec<f64>,
    /// Hilbert–Schmidt norms of the component Hessians (length `k`).
    pub hess_norms: Vec<f64>,
    k: usize,
}

impl MalliavinSample {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Max-entry residual of the identity `M * A = delta * I`.
    pub fn adjugate_residual(&self) -> f64 {
        let k = self.k;
        let mut worst: f64 = 0.0;
        for i in 0..k {
            for j in 0..k {
                let mut sum = 0.0;
                for l in 0..k {
                    sum += self.matrix[i * k + l] * self.adjugate[l * k + j];
                }
                let target = if i == j { self.delta } else { 0.0 };
                worst = worst.max((sum - target).abs());
            }
        }
        worst
    }

    /// True when the determinant vanishes at the scale of the matrix entries.
    pub fn is_degenerate(&self, rel_tol: f64) -> bool {
        let scale: f64 = self
            .grad_norms
            .iter()
            .map(|g| g * g)
            .fold(1e-300, f64::max)
            .powi(self.k as i32);
        self.delta.abs() <= rel_tol * scale
    }
}

/// Determinant of a `k x k` row-major matrix.
///
/// Cofactor expansion up to `k = 4`, partial-pivot elimination beyond.
pub fn det(m: &[f64], k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        3 => {
            m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
                + m[2] * (m[3] * m[7] - m[4] * m[6])
        }
        4 => {
            let mut acc = 0.0;
            for j in 0..4 {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * m[j] * det(&minor(m, 4, 0, j), 3);
            }
            acc
        }
        _ => det_lu(m, k),
    }
}

fn minor(m: &[f64], k: usize, row: usize, col: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity((k - 1) * (k - 1));
    for i in 0..k {
        if i == row {
            continue;
        }
        for j in 0..k {
            if j == col {
                continue;
            }
            out.push(m[i * k + j]);
        }
    }
    out
}

fn det_lu(m: &[f64], k: usize) -> f64 {
    let mut a = m.to_vec();
    let mut sign = 1.0;
    let mut detv = 1.0;
    for col in 0..k {
        // Partial pivoting keeps the elimination stable on near-singular Grams.
        let mut pivot = col;
        for r in (col + 1)..k {
            if a[r * k + col].abs() > a[pivot * k + col].abs() {
                pivot = r;
            }
        }
        if a[pivot * k + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for j in 0..k {
                a.swap(col * k + j, pivot * k + j);
            }
            sign = -sign;
        }
        let d = a[col * k + col];
        detv *= d;
        for r in (col + 1)..k {
            let factor = a[r * k + col] / d;
            for j in col..k {
                a[r * k + j] -= factor * a[col * k + j];
            }
        }
    }
    sign * detv
}

/// Adjugate (transposed cofactor matrix) of a `k x k` row-major matrix.
///
/// `adj[i][j] = (-1)^(i+j) * det(minor with row j, column i removed)`; this
/// is exact cofactor arithmetic for every `k`, with the minors expanded in
/// closed form for `k <= 4`.
pub fn adjugate(m: &[f64], k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![1.0];
    }
    let mut adj = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            adj[i * k + j] = sign * det(&minor(m, k, j, i), k - 1);
        }
    }
    adj
}

/// Evaluates the Malliavin matrix, determinant, adjugate, and determinant
/// gradient of `map` at `x`.
pub fn malliavin_at(map: &MapSpec, x: &[f64]) -> Result<MalliavinSample> {
    let jets = map.eval_jet2(x)?;
    malliavin_of_jets(&jets, map.dim_in())
}

/// Same as [`malliavin_at`] but starting from already evaluated jets.
pub fn malliavin_of_jets(jets: &[Jet2], n: usize) -> Result<MalliavinSample> {
    let k = jets.len();
    if k == 0 {
        return Err(Error::EmptyMeasure);
    }
    for jet in jets {
        if jet.dim() != n {
            return Err(Error::DimensionMismatch {
                context: "malliavin jets".into(),
                expected: n,
                got: jet.dim(),
            });
        }
    }
    let mut matrix = vec![0.0; k * k];
    for i in 0..k {
        for j in i..k {
            let dot: f64 = jets[i]
                .gradient
                .iter()
                .zip(&jets[j].gradient)
                .map(|(a, b)| a * b)
                .sum();
            matrix[i * k + j] = dot;
            matrix[j * k + i] = dot;
        }
    }
    let delta = det(&matrix, k);
    let adj = adjugate(&matrix, k);

    // Jacobi's formula: d(det)/dx_l = trace(adj * dM/dx_l), with
    // dm_ij/dx_l = <H_i[l,.], g_j> + <g_i, H_j[l,.]>.
    let mut grad_delta = vec![0.0; n];
    for l in 0..n {
        let mut trace = 0.0;
        for i in 0..k {
            for j in 0..k {
                let dm: f64 = jets[i]
                    .hess_row(l)
                    .iter()
                    .zip(&jets[j].gradient)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    + jets[j]
                        .hess_row(l)
                        .iter()
                        .zip(&jets[i].gradient)
                        .map(|(a, b)| a * b)
                        .sum::<f64>();
                // trace(A * B) = sum_ij A[j][i] B[i][j]; adj is symmetric here
                // because the Gram matrix is.
                trace += adj[j * k + i] * dm;
            }
        }
        grad_delta[l] = trace;
    }

    Ok(MalliavinSample {
        matrix,
        delta,
        adjugate: adj,
        grad_delta,
        grad_norms: jets.iter().map(|j| j.gradient_norm()).collect(),
        hess_norms: jets.iter().map(|j| j.hessian_hs_norm()).collect(),
        k,
    })
}

/// Directional derivative `<grad f_j, grad Delta_f>` by the column-replacement
/// route: the sum over `i` of determinants of the Gram matrix with column `i`
/// replaced by `<D^2 f_m . grad f_i, grad f_j> + <D^2 f_i . grad f_m, grad f_j>`.
///
/// Mathematically equal to dotting [`MalliavinSample::grad_delta`] with
/// `grad f_j`; kept as an independent implementation for cross-checking.
pub fn det_gradient_direction(jets: &[Jet2], j: usize) -> f64 {
    let k = jets.len();
    let n = jets[0].dim();
    let gram = |m: usize, r: usize| -> f64 {
        jets[m]
            .gradient
            .iter()
            .zip(&jets[r].gradient)
            .map(|(a, b)| a * b)
            .sum()
    };
    // <D^2 f_a . grad f_b, grad f_j>
    let hess_quad = |a: usize, b: usize| -> f64 {
        let mut acc = 0.0;
        for l in 0..n {
            let row_dot: f64 = jets[a]
                .hess_row(l)
                .iter()
                .zip(&jets[b].gradient)
                .map(|(u, v)| u * v)
                .sum();
            acc += row_dot * jets[j].gradient[l];
        }
        acc
    };
    let mut total = 0.0;
    for i in 0..k {
        let mut c = vec![0.0; k * k];
        for m in 0..k {
            for r in 0..k {
                c[m * k + r] = if r == i {
                    hess_quad(m, i) + hess_quad(i, m)
                } else {
                    gram(m, r)
                };
            }
        }
        total += det(&c, k);
    }
    total
}

/// Margin data for the determinant-gradient bound
/// `|<grad f_j, grad Delta_f>| <= 2 (sum_m |grad f_m|)^(2k) * sum_i ||D^2 f_i||_HS`.
#[derive(Debug, Clone, Copy)]
pub struct GradDeltaMargin {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; nonnegative when the bound holds.
    pub margin: f64,
}

/// Evaluates the determinant-gradient bound at `x` for component `j`.
pub fn grad_delta_bound_margin(map: &MapSpec, j: usize, x: &[f64]) -> Result<GradDeltaMargin> {
    let jets = map.eval_jet2(x)?;
    let sample = malliavin_of_jets(&jets, map.dim_in())?;
    let lhs: f64 = jets[j]
        .gradient
        .iter()
        .zip(&sample.grad_delta)
        .map(|(a, b)| a * b)
        .sum::<f64>()
        .abs();
    let grad_sum: f64 = sample.grad_norms.iter().sum();
    let hess_sum: f64 = sample.hess_norms.iter().sum();
    let rhs = 2.0 * grad_sum.powi(2 * sample.k() as i32) * hess_sum;
    Ok(GradDeltaMargin {
        lhs,
        rhs,
        margin: rhs - lhs,
    })
}

/// Max-abs residual between `M_f * grad phi(f(x))` and the vector of
/// `<grad (phi o f)(x), grad f_i(x)>`, where the composition gradient is
/// computed by forward AD through `phi o f` — an independent evaluation path.
pub fn chain_identity_residual(map: &MapSpec, phi: &MapSpec, x: &[f64]) -> Result<f64> {
    if phi.dim_in() != map.dim_out() || phi.dim_out() != 1 {
        return Err(Error::DimensionMismatch {
            context: "chain rule test function".into(),
            expected: map.dim_out(),
            got: phi.dim_in(),
        });
    }
    let jets = map.eval_jet2(x)?;
    let sample = malliavin_of_jets(&jets, map.dim_in())?;
    let k = map.dim_out();
    let n = map.dim_in();

    let f_x: Vec<f64> = jets.iter().map(|j| j.value).collect();
    let phi_jet = &phi.eval_jet2(&f_x)?[0];

    // Left side: M_f * grad phi evaluated at f(x).
    let mut lhs = vec![0.0; k];
    for i in 0..k {
        for j in 0..k {
            lhs[i] += sample.matrix[i * k + j] * phi_jet.gradient[j];
        }
    }

    // Right side: grad(phi o f) via AD through the composition, dotted with
    // each grad f_i.
    let duals: Vec<crate::jets::Dual2> = (0..n)
        .map(|i| crate::jets::Dual2::var(n, i, x[i]))
        .collect();
    let f_duals = map.eval_duals(&duals)?;
    let composed = phi.eval_duals(&f_duals)?;
    let comp_jet = composed.into_iter().next().unwrap().into_jet();
    let mut worst: f64 = 0.0;
    for i in 0..k {
        let rhs: f64 = comp_jet
            .gradient
            .iter()
            .zip(&jets[i].gradient)
            .map(|(a, b)| a * b)
            .sum();
        worst = worst.max((lhs[i] - rhs).abs());
    }
    Ok(worst)
}
