//! Second-order jets: value, gradient, and Hessian of scalar functions on R^n.
//!
//! Two representations live here:
//!
//! * [`Jet2`] — a plain container `(f(x), grad f(x), D^2 f(x))` produced by
//!   map evaluation; this is what the Malliavin-matrix algebra consumes.
//! * [`Dual2`] — a forward-mode AD scalar carrying value, gradient and
//!   Hessian through arithmetic.  Closure-backed maps are differentiated by
//!   evaluating the closure on `Dual2` inputs seeded with unit directions.
//!
//! The chain rules are the classical ones; for a unary `g(u)`:
//!
//! ```text
//! value    g(u)
//! gradient g'(u) * Du
//! hessian  g''(u) * Du (x) Du + g'(u) * D2u
//! ```

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value, gradient, and Hessian of a scalar function at a point of R^n.
///
/// The Hessian is stored dense row-major (`n * n` entries) and is kept exactly
/// symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub gradient: Vec<f64>,
    hessian: Vec<f64>,
}

impl Jet2 {
    pub fn new(value: f64, gradient: Vec<f64>, hessian: Vec<f64>) -> Self {
        assert_eq!(
            hessian.len(),
            gradient.len() * gradient.len(),
            "hessian must be dim x dim"
        );
        Jet2 {
            value,
            gradient,
            hessian,
        }
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    /// Hessian entry `d^2 f / dx_i dx_j`.
    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.hessian[i * self.dim() + j]
    }

    /// Row `l` of the Hessian, i.e. the gradient of `df/dx_l`.
    pub fn hess_row(&self, l: usize) -> &[f64] {
        let n = self.dim();
        &self.hessian[l * n..(l + 1) * n]
    }

    /// Trace of the Hessian (the Laplacian).
    pub fn laplacian(&self) -> f64 {
        (0..self.dim()).map(|i| self.hess(i, i)).sum()
    }

    /// Euclidean norm of the gradient.
    pub fn gradient_norm(&self) -> f64 {
        self.gradient.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    /// Frobenius (Hilbert–Schmidt) norm of the Hessian.
    pub fn hessian_hs_norm(&self) -> f64 {
        self.hessian.iter().map(|h| h * h).sum::<f64>().sqrt()
    }

    /// True when value, gradient, and Hessian are all finite.
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.gradient.iter().all(|g| g.is_finite())
            && self.hessian.iter().all(|h| h.is_finite())
    }
}

/// Forward-mode AD scalar of order two over `n` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual2 {
    v: f64,
    g: Vec<f64>,
    h: Vec<f64>, // n x n, row-major, symmetric
}

impl Dual2 {
    /// The constant `c` (zero derivatives) over `n` variables.
    pub fn constant(n: usize, c: f64) -> Self {
        Dual2 {
            v: c,
            g: vec![0.0; n],
            h: vec![0.0; n * n],
        }
    }

    /// The coordinate variable `x_i` seeded at value `x`.
    pub fn var(n: usize, i: usize, x: f64) -> Self {
        let mut d = Dual2::constant(n, x);
        d.g[i] = 1.0;
        d
    }

    pub fn value(&self) -> f64 {
        self.v
    }

    fn n(&self) -> usize {
        self.g.len()
    }

    /// Extracts the jet carried by this dual number.
    pub fn into_jet(self) -> Jet2 {
        Jet2 {
            value: self.v,
            gradient: self.g,
            hessian: self.h,
        }
    }

    /// Applies a unary function given `(g(u), g'(u), g''(u))` at `u = self.v`.
    /// This is the escape hatch for special functions (e.g. the normal CDF)
    /// whose derivatives the caller knows in closed form.
    pub fn lift_unary(&self, v: f64, d1: f64, d2: f64) -> Dual2 {
        self.chain(v, d1, d2)
    }

    fn chain(&self, v: f64, d1: f64, d2: f64) -> Dual2 {
        let n = self.n();
        let mut g = vec![0.0; n];
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            g[i] = d1 * self.g[i];
        }
        for i in 0..n {
            for j in 0..n {
                h[i * n + j] = d2 * self.g[i] * self.g[j] + d1 * self.h[i * n + j];
            }
        }
        Dual2 { v, g, h }
    }

    pub fn sin(&self) -> Dual2 {
        self.chain(self.v.sin(), self.v.cos(), -self.v.sin())
    }

    pub fn cos(&self) -> Dual2 {
        self.chain(self.v.cos(), -self.v.sin(), -self.v.cos())
    }

    pub fn exp(&self) -> Dual2 {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    /// Reciprocal; the caller must keep the value away from zero.
    pub fn recip(&self) -> Dual2 {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    /// Integer power for `k >= 0`.  Low exponents are special-cased so the
    /// derivative factors vanish identically instead of producing `0 * inf`
    /// at the origin.
    pub fn powi(&self, k: i32) -> Dual2 {
        assert!(k >= 0, "Dual2::powi supports nonnegative exponents");
        let kf = k as f64;
        let d1 = if k >= 1 { kf * self.v.powi(k - 1) } else { 0.0 };
        let d2 = if k >= 2 {
            kf * (kf - 1.0) * self.v.powi(k - 2)
        } else {
            0.0
        };
        self.chain(self.v.powi(k), d1, d2)
    }

    pub fn scale(&self, c: f64) -> Dual2 {
        self.chain(c * self.v, c, 0.0)
    }
}

impl Add for &Dual2 {
    type Output = Dual2;
    fn add(self, rhs: &Dual2) -> Dual2 {
        let n = self.n();
        Dual2 {
            v: self.v + rhs.v,
            g: (0..n).map(|i| self.g[i] + rhs.g[i]).collect(),
            h: (0..n * n).map(|i| self.h[i] + rhs.h[i]).collect(),
        }
    }
}

impl Sub for &Dual2 {
    type Output = Dual2;
    fn sub(self, rhs: &Dual2) -> Dual2 {
        let n = self.n();
        Dual2 {
            v: self.v - rhs.v,
            g: (0..n).map(|i| self.g[i] - rhs.g[i]).collect(),
            h: (0..n * n).map(|i| self.h[i] - rhs.h[i]).collect(),
        }
    }
}

impl Mul for &Dual2 {
    type Output = Dual2;
    // Product rule at order two: (fg)'' = f'' g + f' (x) g' + g' (x) f' + f g''.
    fn mul(self, rhs: &Dual2) -> Dual2 {
        let n = self.n();
        let mut g = vec![0.0; n];
        for i in 0..n {
            g[i] = self.g[i] * rhs.v + self.v * rhs.g[i];
        }
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                h[i * n + j] = self.h[i * n + j] * rhs.v
                    + self.g[i] * rhs.g[j]
                    + self.g[j] * rhs.g[i]
                    + self.v * rhs.h[i * n + j];
            }
        }
        Dual2 {
            v: self.v * rhs.v,
            g,
            h,
        }
    }
}

impl Div for &Dual2 {
    type Output = Dual2;
    fn div(self, rhs: &Dual2) -> Dual2 {
        self * &rhs.recip()
    }
}

impl Neg for &Dual2 {
    type Output = Dual2;
    fn neg(self) -> Dual2 {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Central finite differences on a scalar function, for cross-checking jets.
    fn fd_jet(f: &dyn Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Jet2 {
        let n = x.len();
        let mut grad = vec![0.0; n];
        let mut hess = vec![0.0; n * n];
        let mut xp = x.to_vec();
        for i in 0..n {
            xp[i] = x[i] + step;
            let fp = f(&xp);
            xp[i] = x[i] - step;
            let fm = f(&xp);
            xp[i] = x[i];
            grad[i] = (fp - fm) / (2.0 * step);
            hess[i * n + i] = (fp - 2.0 * f(x) + fm) / (step * step);
        }
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let mut eval = |si: f64, sj: f64| {
                    xp[i] = x[i] + si * step;
                    xp[j] = x[j] + sj * step;
                    let v = f(&xp);
                    xp[i] = x[i];
                    xp[j] = x[j];
                    v
                };
                hess[i * n + j] = (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0)
                    + eval(-1.0, -1.0))
                    / (4.0 * step * step);
            }
        }
        Jet2::new(f(x), grad, hess)
    }

    fn max_err(a: &Jet2, b: &Jet2) -> f64 {
        let mut m = (a.value - b.value).abs();
        for i in 0..a.dim() {
            m = m.max((a.gradient[i] - b.gradient[i]).abs());
            for j in 0..a.dim() {
                m = m.max((a.hess(i, j) - b.hess(i, j)).abs());
            }
        }
        m
    }

    #[test]
    fn dual_matches_polynomial_jet_exactly() {
        // f(x, y) = x^2 y + 3 x - y at (1.5, -2.0): all derivatives closed form.
        let x = 1.5;
        let y = -2.0;
        let dx = Dual2::var(2, 0, x);
        let dy = Dual2::var(2, 1, y);
        let f = &(&(&(&dx * &dx) * &dy) + &dx.scale(3.0)) - &dy;
        let jet = f.into_jet();
        assert!((jet.value - (x * x * y + 3.0 * x - y)).abs() < 1e-14);
        assert!((jet.gradient[0] - (2.0 * x * y + 3.0)).abs() < 1e-14);
        assert!((jet.gradient[1] - (x * x - 1.0)).abs() < 1e-14);
        assert!((jet.hess(0, 0) - 2.0 * y).abs() < 1e-14);
        assert!((jet.hess(0, 1) - 2.0 * x).abs() < 1e-14);
        assert!((jet.hess(1, 0) - 2.0 * x).abs() < 1e-14);
        assert!(jet.hess(1, 1).abs() < 1e-14);
    }

    #[test]
    fn dual_transcendental_matches_finite_differences_at_second_order() {
        // sin(x + 0.5 y) * exp(y): AD is exact; central differences converge
        // at O(step^2), so the error must shrink ~4x when the step halves.
        let eval = |x: &[f64]| (x[0] + 0.5 * x[1]).sin() * x[1].exp();
        let point = [0.7, -0.3];
        let dx = Dual2::var(2, 0, point[0]);
        let dy = Dual2::var(2, 1, point[1]);
        let ad = (&(&dx + &dy.scale(0.5)).sin() * &dy.exp()).into_jet();

        let e1 = max_err(&ad, &fd_jet(&eval, &point, 1e-3));
        let e2 = max_err(&ad, &fd_jet(&eval, &point, 5e-4));
        assert!(e1 < 1e-5, "fd error at step 1e-3: {e1}");
        let ratio = e1 / e2;
        assert!(
            (2.5..6.0).contains(&ratio),
            "expected ~4x error reduction, got {ratio} ({e1} -> {e2})"
        );
    }

    #[test]
    fn quotient_rule_matches_closed_form() {
        // f(x) = x / (1 + x^2): f' = (1 - x^2)/(1+x^2)^2, f'' closed form.
        let x = 0.8;
        let d = Dual2::var(1, 0, x);
        let jet = (&d / &(&Dual2::constant(1, 1.0) + &(&d * &d))).into_jet();
        let denom = 1.0 + x * x;
        assert!((jet.value - x / denom).abs() < 1e-14);
        assert!((jet.gradient[0] - (1.0 - x * x) / (denom * denom)).abs() < 1e-14);
        let d2 = 2.0 * x * (x * x - 3.0) / denom.powi(3);
        assert!((jet.hess(0, 0) - d2).abs() < 1e-13);
    }

    #[test]
    fn hessian_is_symmetric() {
        let dx = Dual2::var(3, 0, 0.3);
        let dy = Dual2::var(3, 1, -1.1);
        let dz = Dual2::var(3, 2, 2.2);
        let f = &(&(&dx * &dy).sin() * &dz) + &(&dz * &dz).exp();
        let jet = f.into_jet();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(jet.hess(i, j), jet.hess(j, i), "hessian symmetry at ({i},{j})");
            }
        }
    }
}
