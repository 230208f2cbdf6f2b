//! Exact 1-d reference densities and their shift total-variation oracles.
//!
//! Three laws cover the pushforwards the harness sweeps: the standard normal
//! (`x1`), chi-squared with one degree of freedom (`x1^2`), and the uniform
//! law on `[0, 1]` (`Phi(x1)`).  Each provides pdf/cdf/quantile in closed
//! form plus `tv_shift`, the total-variation distance between the law and its
//! translate by `h`,
//!
//! ```text
//! ||mu_h - mu||_TV = integral |rho(x - h) - rho(x)| dx,
//! ```
//!
//! computed by adaptive quadrature with singularity-removing substitutions
//! (the chi-squared density blows up like `x^(-1/2)` at the origin).  These
//! quadrature values are the ground truth that empirical histogram distances
//! are compared against.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::{Error, Result};

/// A reference density on the real line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleDensity {
    StdNormal,
    ChiSq1,
    Uniform01,
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).unwrap()
}

const INV_SQRT_2PI: f64 = 0.3989422804014327;

impl OracleDensity {
    /// Looks a density up by its catalog name.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "std_normal" => Ok(OracleDensity::StdNormal),
            "chi2_1" => Ok(OracleDensity::ChiSq1),
            "uniform_01" => Ok(OracleDensity::Uniform01),
            other => Err(Error::UnknownDensity(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OracleDensity::StdNormal => "std_normal",
            OracleDensity::ChiSq1 => "chi2_1",
            OracleDensity::Uniform01 => "uniform_01",
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            OracleDensity::StdNormal => INV_SQRT_2PI * (-0.5 * x * x).exp(),
            OracleDensity::ChiSq1 => {
                if x <= 0.0 {
                    0.0
                } else {
                    // Density of Z^2: x^(-1/2) * exp(-x/2) / sqrt(2 pi).
                    INV_SQRT_2PI * x.powf(-0.5) * (-0.5 * x).exp()
                }
            }
            OracleDensity::Uniform01 => {
                if (0.0..=1.0).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            OracleDensity::StdNormal => std_normal().cdf(x),
            OracleDensity::ChiSq1 => {
                if x <= 0.0 {
                    0.0
                } else {
                    // P(Z^2 <= x) = 2 Phi(sqrt(x)) - 1.
                    2.0 * std_normal().cdf(x.sqrt()) - 1.0
                }
            }
            OracleDensity::Uniform01 => x.clamp(0.0, 1.0),
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        assert!((0.0..=1.0).contains(&p), "quantile level out of range");
        match self {
            OracleDensity::StdNormal => std_normal().inverse_cdf(p),
            OracleDensity::ChiSq1 => {
                let z = std_normal().inverse_cdf(0.5 * (1.0 + p));
                z * z
            }
            OracleDensity::Uniform01 => p,
        }
    }

    /// Draws a reproducible sample, using the same generator family as
    /// [`crate::gaussian::GaussianSpace`].
    pub fn sample(&self, count: usize, seed: u64, stream: u64) -> Result<Vec<f64>> {
        if count == 0 {
            return Err(Error::EmptyMeasure);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let v = match self {
                OracleDensity::StdNormal => StandardNormal.sample(&mut rng),
                OracleDensity::ChiSq1 => {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z * z
                }
                OracleDensity::Uniform01 => rng.gen::<f64>(),
            };
            out.push(v);
        }
        Ok(out)
    }

    /// `||mu_h - mu||_TV` by adaptive quadrature (shift-symmetric in `h`).
    pub fn tv_shift(&self, h: f64) -> f64 {
        let h = h.abs();
        if h == 0.0 {
            return 0.0;
        }
        match self {
            OracleDensity::StdNormal => {
                // Smooth integrand except for a kink where the densities
                // cross at x = h/2; integrate the two sides separately.
                let diff = |x: f64| (self.pdf(x - h) - self.pdf(x)).abs();
                let lo = -9.0;
                let hi = 9.0 + h;
                adaptive_simpson(&diff, lo, 0.5 * h, 1e-11)
                    + adaptive_simpson(&diff, 0.5 * h, hi, 1e-11)
            }
            OracleDensity::ChiSq1 => {
                // On (0, h) only rho(x) is present; substitute x = u^2 to
                // remove the x^(-1/2) singularity at 0.  On (h, inf) the
                // shifted density rho(x - h) is singular at h; substitute
                // x = h + u^2.  The density is decreasing, so there is no
                // further sign change.
                let head = {
                    let f = |u: f64| 2.0 * u * self.pdf(u * u);
                    adaptive_simpson(&f, 0.0, h.sqrt(), 1e-11)
                };
                let hi = (self.quantile(1.0 - 1e-13) + h).sqrt();
                let tail = {
                    let f =
                        |u: f64| 2.0 * u * (self.pdf(u * u) - self.pdf(h + u * u)).abs();
                    adaptive_simpson(&f, 0.0, hi, 1e-11)
                };
                head + tail
            }
            OracleDensity::Uniform01 => {
                if h >= 1.0 {
                    return 2.0;
                }
                // Piecewise constant integrand; panel-wise quadrature is exact.
                let diff = |x: f64| (self.pdf(x - h) - self.pdf(x)).abs();
                adaptive_simpson(&diff, 0.0, h, 1e-12)
                    + adaptive_simpson(&diff, h, 1.0, 1e-12)
                    + adaptive_simpson(&diff, 1.0, 1.0 + h, 1e-12)
            }
        }
    }
}

/// Adaptive Simpson quadrature with an absolute error target.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 48)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_quantile_round_trip() {
        for d in [
            OracleDensity::StdNormal,
            OracleDensity::ChiSq1,
            OracleDensity::Uniform01,
        ] {
            for &p in &[0.001, 0.1, 0.5, 0.9, 0.999] {
                let x = d.quantile(p);
                assert!(
                    (d.cdf(x) - p).abs() < 1e-9,
                    "{}: cdf(quantile({p})) = {}",
                    d.name(),
                    d.cdf(x)
                );
            }
        }
    }

    #[test]
    fn pdf_integrates_to_one() {
        let n = adaptive_simpson(&|x| OracleDensity::StdNormal.pdf(x), -9.0, 9.0, 1e-11);
        assert!((n - 1.0).abs() < 1e-9, "normal mass {n}");
        // chi2 via the singularity-removing substitution.
        let c = adaptive_simpson(
            &|u| 2.0 * u * OracleDensity::ChiSq1.pdf(u * u),
            0.0,
            8.0,
            1e-11,
        );
        assert!((c - 1.0).abs() < 1e-9, "chi2 mass {c}");
    }

    #[test]
    fn normal_shift_tv_matches_closed_form() {
        // ||N(h,1) - N(0,1)||_TV = 4 Phi(h/2) - 2.
        let d = OracleDensity::StdNormal;
        for &h in &[0.05, 0.2, 1.0, 3.0] {
            let exact = 4.0 * std_normal().cdf(0.5 * h) - 2.0;
            let quad = d.tv_shift(h);
            assert!(
                (quad - exact).abs() < 1e-8,
                "normal tv_shift({h}): {quad} vs {exact}"
            );
        }
        // Frozen value at h = 1.
        assert!((d.tv_shift(1.0) - 0.7658498450960524).abs() < 1e-8);
    }

    #[test]
    fn chi2_shift_tv_matches_closed_form() {
        // For a decreasing density, ||mu_h - mu||_TV = 2 F(h).
        let d = OracleDensity::ChiSq1;
        for &h in &[0.02, 0.1, 0.5, 2.0] {
            let exact = 2.0 * d.cdf(h);
            let quad = d.tv_shift(h);
            assert!(
                (quad - exact).abs() < 1e-7,
                "chi2 tv_shift({h}): {quad} vs {exact}"
            );
        }
    }

    #[test]
    fn uniform_shift_tv_is_piecewise_linear() {
        let d = OracleDensity::Uniform01;
        assert!((d.tv_shift(0.25) - 0.5).abs() < 1e-10);
        assert!((d.tv_shift(0.9) - 1.8).abs() < 1e-10);
        assert_eq!(d.tv_shift(1.5), 2.0);
        assert_eq!(d.tv_shift(0.0), 0.0);
    }

    #[test]
    fn shift_tv_is_monotone_and_capped() {
        for d in [
            OracleDensity::StdNormal,
            OracleDensity::ChiSq1,
            OracleDensity::Uniform01,
        ] {
            let mut prev = 0.0;
            for &h in &[0.01, 0.05, 0.2, 0.8, 2.0, 5.0] {
                let tv = d.tv_shift(h);
                assert!(tv >= prev - 1e-9, "{}: tv not monotone at {h}", d.name());
                assert!(tv <= 2.0 + 1e-9, "{}: tv exceeds 2 at {h}", d.name());
                prev = tv;
            }
            assert!((d.tv_shift(0.3) - d.tv_shift(-0.3)).abs() < 1e-10, "symmetry");
        }
    }

    #[test]
    fn samples_follow_the_law() {
        for d in [
            OracleDensity::StdNormal,
            OracleDensity::ChiSq1,
            OracleDensity::Uniform01,
        ] {
            let xs = d.sample(100_000, 9, 0).unwrap();
            let repeat = d.sample(100_000, 9, 0).unwrap();
            assert_eq!(xs, repeat, "{}: sampling must be deterministic", d.name());
            // Kolmogorov–Smirnov style check at a few fixed thresholds.
            for &p in &[0.25, 0.5, 0.75] {
                let q = d.quantile(p);
                let freq = xs.iter().filter(|&&x| x <= q).count() as f64 / xs.len() as f64;
                assert!(
                    (freq - p).abs() < 0.01,
                    "{}: empirical cdf at q({p}) = {freq}",
                    d.name()
                );
            }
        }
    }

    #[test]
    fn unknown_density_is_an_error() {
        assert!(matches!(
            OracleDensity::from_name("cauchy"),
            Err(Error::UnknownDensity(_))
        ));
    }
}
