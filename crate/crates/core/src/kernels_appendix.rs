//! Approximation-identity kernels concentrating at `±p`.
//!
//! `(1/π) ∫ f_{p,n}(x) φ(x) dx → (φ(p) + φ(−p))/2` as `n → ∞`. The integral
//! is split into the inner region `|x| < p − 1/√n`, the windows
//! `p − 1/√n < |x| < p + 1/√n` and the outer region, so each part can be
//! checked separately.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fmt17;
use crate::numerics::{integrate, integrate_real, QuadratureConfig};

/// Evaluation point `p` and sharpness `n`, with `n ≥ 2` and `1/√n < p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub p: f64,
    pub n: f64,
}

impl KernelParams {
    pub fn new(p: f64, n: f64) -> Result<Self> {
        if !(n >= 2.0 && n.is_finite()) {
            return Err(Error::Domain(format!("n must be at least 2, got {n}")));
        }
        if !(p > 1.0 / n.sqrt() && p.is_finite()) {
            return Err(Error::Domain(format!("p must exceed 1/√n = {}, got {p}", 1.0 / n.sqrt())));
        }
        Ok(KernelParams { p, n })
    }

    fn window(&self) -> f64 {
        1.0 / self.n.sqrt()
    }
}

/// `g_n(x) = x²/(n(1/n² + x²)(1 + x²/n²))`.
pub fn eval_g(n: f64, x: f64) -> f64 {
    let x2 = x * x;
    x2 / (n * (1.0 / (n * n) + x2) * (1.0 + x2 / (n * n)))
}

fn shifted(p: f64, n: f64, x: f64) -> f64 {
    x * x - p * p - 1.0 / (n * n)
}

/// `d_{p,n}(x)`.
pub fn eval_d(p: f64, n: f64, x: f64) -> f64 {
    let x2 = x * x;
    let s = shifted(p, n, x);
    let num = s * (1.0 - x2) + 2.0 * x2 * (1.0 / (n * n) + 1.0);
    let den = s * s + 4.0 * x2 / (n * n);
    eval_g(n, x) * num / den
}

/// `f_{p,n}(x) = d_{p,n}(x) + g_n(x)·(1/p² on (−1, 1), 1 elsewhere)`.
pub fn eval_f(p: f64, n: f64, x: f64) -> f64 {
    let w = if x.abs() < 1.0 { 1.0 / (p * p) } else { 1.0 };
    eval_d(p, n, x) + eval_g(n, x) * w
}

/// `g̃_{p,n}(x) = px/(n(1/n² + p²)(1 + p²/n²))`.
pub fn eval_gtilde(p: f64, n: f64, x: f64) -> f64 {
    p * x / (n * (1.0 / (n * n) + p * p) * (1.0 + p * p / (n * n)))
}

/// `d̃_{p,n}(x) = g̃_{p,n}(x)·2p²(1/n² + 1)/((x² − p² − 1/n²)² + 4p²/n²)`.
pub fn eval_dtilde(p: f64, n: f64, x: f64) -> f64 {
    let s = shifted(p, n, x);
    eval_gtilde(p, n, x) * 2.0 * p * p * (1.0 / (n * n) + 1.0) / (s * s + 4.0 * p * p / (n * n))
}

/// Antiderivative `D_{p,n}` of `d̃_{p,n}`.
pub fn antiderivative_d(p: f64, n: f64, x: f64) -> f64 {
    let c = p * p * (1.0 + 1.0 / (n * n)) / (2.0 * (1.0 / (n * n) + p * p) * (1.0 + p * p / (n * n)));
    c * (shifted(p, n, x) / (2.0 * p / n)).atan()
}

/// `(1/π) ∫ d̃_{p,n}` over the window around `p`, in closed form.
pub fn halfmass(p: f64, n: f64) -> Result<f64> {
    let k = KernelParams::new(p, n)?;
    let h = k.window();
    Ok((antiderivative_d(p, n, p + h) - antiderivative_d(p, n, p - h)) / PI)
}

/// Bounds `b·d̃ ≤ d ≤ B·d̃` on the window around `p`, together with the
/// intermediate factors they are assembled from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichFactors {
    pub a_lower: f64,
    pub a_upper: f64,
    pub v_lower: f64,
    pub v_upper: f64,
    pub w: f64,
    pub u_lower: f64,
    pub u_upper: f64,
    pub b_lower: f64,
    pub b_upper: f64,
}

pub fn sandwich_factors(p: f64, n: f64) -> Result<SandwichFactors> {
    let k = KernelParams::new(p, n)?;
    let h = k.window();
    let n2 = n * n;
    let (pm, pp) = (p - h, p + h);
    let core = (1.0 / n2 + p * p) * (1.0 + p * p / n2);
    let a_upper = pp * core / (p * (1.0 / n2 + pm * pm) * (1.0 + pm * pm / n2));
    let a_lower = pm * core / (p * (1.0 / n2 + pp * pp) * (1.0 + pp * pp / n2));
    let tail = 3.0 / n2 + 3.0 + p * p;
    let v_lower = -pp.powi(4) + pm * pm * tail - (p * p + 1.0 / n2);
    let v_upper = -pm.powi(4) + pp * pp * tail - (p * p + 1.0 / n2);
    let w = 2.0 * p * p * (1.0 / n2 + 1.0);
    let u_lower = 1.0 + (1.0 / n - 2.0 * h) / (p * p);
    let u_upper = 1.0 + (1.0 / n + 2.0 * h) / (p * p);
    Ok(SandwichFactors {
        a_lower,
        a_upper,
        v_lower,
        v_upper,
        w,
        u_lower,
        u_upper,
        b_lower: a_lower * v_lower / w / u_upper,
        b_upper: a_upper * v_upper / w / u_lower,
    })
}

/// The three parts of `(1/π) ∫ f_{p,n} φ` and their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxIdentity {
    pub inner: Complex64,
    pub window: Complex64,
    pub outer: Complex64,
    pub total: Complex64,
}

fn inside(breaks: &[f64], a: f64, b: f64) -> Vec<f64> {
    breaks.iter().copied().filter(|x| *x > a && *x < b).collect()
}

/// `(1/π) ∫ f_{p,n}(x) φ(x) dx`, split by region.
pub fn approx_identity<F: Fn(f64) -> Complex64>(phi: F, p: f64, n: f64, cfg: &QuadratureConfig) -> Result<ApproxIdentity> {
    let k = KernelParams::new(p, n)?;
    let h = k.window();
    let integrand = |x: f64| phi(x) * eval_f(p, n, x);
    let mut marks = vec![0.0, 1.0 / n, 1.0, n, p, p - 1.0 / n, p + 1.0 / n, p - 10.0 / n, p + 10.0 / n];
    marks.extend(marks.clone().iter().map(|x| -x));
    let (lo, hi) = (p - h, p + h);
    let inner = integrate(integrand, -lo, lo, &inside(&marks, -lo, lo), cfg)?.value;
    let window = integrate(integrand, lo, hi, &inside(&marks, lo, hi), cfg)?.value
        + integrate(integrand, -hi, -lo, &inside(&marks, -hi, -lo), cfg)?.value;
    let outer = integrate(integrand, hi, f64::INFINITY, &inside(&marks, hi, f64::INFINITY), cfg)?.value
        + integrate(integrand, f64::NEG_INFINITY, -hi, &inside(&marks, f64::NEG_INFINITY, -hi), cfg)?.value;
    let (inner, window, outer) = (inner / PI, window / PI, outer / PI);
    Ok(ApproxIdentity { inner, window, outer, total: inner + window + outer })
}

/// `(1/π) ∫ d̃_{p,n}` over the window by quadrature, a cross-check of
/// [`halfmass`].
pub fn halfmass_quadrature(p: f64, n: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let k = KernelParams::new(p, n)?;
    let h = k.window();
    let (v, _) = integrate_real(|x| eval_dtilde(p, n, x), p - h, p + h, &[p, p - 1.0 / n, p + 1.0 / n], cfg)?;
    Ok(v / PI)
}

/// One row of the kernel sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelDemoRow {
    pub n: f64,
    pub halfmass_error: f64,
    pub approx_identity_error: f64,
}

/// Sweep over `ns` at point `p` with `φ ≡ 1`.
pub fn kernel_demo(p: f64, ns: &[f64], cfg: &QuadratureConfig) -> Result<Vec<KernelDemoRow>> {
    ns.iter()
        .map(|&n| {
            let hm = halfmass(p, n)?;
            let ai = approx_identity(|_| Complex64::new(1.0, 0.0), p, n, cfg)?;
            Ok(KernelDemoRow { n, halfmass_error: (hm - 0.5).abs(), approx_identity_error: (ai.total - 1.0).norm() })
        })
        .collect()
}

pub fn kernel_demo_csv(rows: &[KernelDemoRow]) -> String {
    let mut s = String::from("n,halfmass_error,approx_identity_error\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{}", fmt17(r.n), fmt17(r.halfmass_error), fmt17(r.approx_identity_error));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn pointwise_values() {
        assert_eq!(eval_g(5.0, 0.0), 0.0);
        assert!((eval_g(2.0, 1.0) - 0.32).abs() < 1e-15);
        for n in [2.0, 10.0, 1e3] {
            for x in [-50.0, -1.0, 0.01, 0.3, 7.0] {
                assert!(eval_g(n, x) <= 1.0 / n);
            }
        }
        for x in [0.1, 0.9, 1.01, 3.0] {
            assert_eq!(eval_d(1.0, 100.0, x), eval_d(1.0, 100.0, -x));
        }
    }

    #[test]
    fn antiderivative_matches() {
        let (p, n) = (1.3, 50.0);
        for x in [0.5, 1.29, 1.3, 1.4, 2.0] {
            let h = 1e-6;
            let fd = (antiderivative_d(p, n, x + h) - antiderivative_d(p, n, x - h)) / (2.0 * h);
            assert!((fd - eval_dtilde(p, n, x)).abs() <= 1e-6 * eval_dtilde(p, n, x).abs().max(1.0));
        }
    }

    #[test]
    fn halfmass_limit() {
        let errs: Vec<f64> = [1e2, 1e3, 1e4].iter().map(|&n| (halfmass(1.0, n).unwrap() - 0.5).abs()).collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2]);
        assert!(errs[2] <= 0.02);
        let cfg = QuadratureConfig::with_tol(1e-13, 1e-11);
        let (a, b) = (halfmass(2.0, 100.0).unwrap(), halfmass_quadrature(2.0, 100.0, &cfg).unwrap());
        assert!((a - b).abs() <= 1e-8 * a);
        assert!(halfmass(0.05, 100.0).is_err());
    }

    #[test]
    fn sandwich_holds_on_the_window() {
        let (p, n) = (1.0, 1e4);
        let s = sandwich_factors(p, n).unwrap();
        assert!((s.b_lower - 1.0).abs() < 0.15 && (s.b_upper - 1.0).abs() < 0.15);
        let far = sandwich_factors(p, 1e8).unwrap();
        assert!((far.b_lower - 1.0).abs() < 2e-3 && (far.b_upper - 1.0).abs() < 2e-3);
        let h = 1.0 / n.sqrt();
        for k in 0..100 {
            let x = p - h + 2.0 * h * (k as f64 + 0.5) / 100.0;
            let (d, dt) = (eval_d(p, n, x), eval_dtilde(p, n, x));
            assert!(s.b_lower * dt <= d && d <= s.b_upper * dt, "{x}");
        }
    }

    #[test]
    fn approximation_identity() {
        let cfg = QuadratureConfig::default();
        let one = approx_identity(|_| c(1.0), 1.0, 1e4, &cfg).unwrap();
        assert!((one.total - 1.0).norm() < 0.05);
        let odd = approx_identity(|x| c(x / (1.0 + x * x)), 1.0, 1e4, &cfg).unwrap();
        assert!(odd.total.norm() < 0.05);
        let sq = approx_identity(|x| c(x * x / (1.0 + x * x)), 2.0, 1e4, &cfg).unwrap();
        assert!((sq.total - 0.8).norm() < 0.05);
    }

    #[test]
    fn errors_shrink_with_n() {
        let cfg = QuadratureConfig::default();
        let tests: [(fn(f64) -> f64, f64, f64); 3] = [(|_| 1.0, 1.0, 1.0), (|x| x / (1.0 + x * x), 1.0, 0.0), (|x| x * x / (1.0 + x * x), 2.0, 0.8)];
        for (phi, p, want) in tests {
            let errs: Vec<f64> = [1e2, 1e3, 1e4]
                .iter()
                .map(|&n| (approx_identity(|x| c(phi(x)), p, n, &cfg).unwrap().total - want).norm())
                .collect();
            let noise = 1e-12;
            assert!(errs[0] + noise >= errs[1] && errs[1] + noise >= errs[2], "{errs:?}");
        }
        let tails: Vec<f64> = [1e2, 1e3, 1e4]
            .iter()
            .map(|&n| {
                let r = approx_identity(|_| c(1.0), 1.0, n, &cfg).unwrap();
                (r.inner + r.outer).norm()
            })
            .collect();
        assert!(tails[2] <= 0.05 && tails[0] > tails[1] && tails[1] > tails[2], "{tails:?}");
    }

    #[test]
    fn demo_csv() {
        let rows = kernel_demo(1.0, &[1e2, 1e3], &QuadratureConfig::default()).unwrap();
        let csv = kernel_demo_csv(&rows);
        assert_eq!(csv.lines().count(), 3);
        assert!(rows[0].halfmass_error > rows[1].halfmass_error);
    }
}
