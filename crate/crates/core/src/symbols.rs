//! Outer functions `Out(C, K)`, the functions F_ν and h_ν attached to a
//! boundary measure, the map 𝒯 and the auxiliary function Λ.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hardy::SymbolFunction;
use crate::measures::{BoundaryMeasure, DensityKind, DensityPiece};
use crate::numerics::{integrate, integrate_real, QuadratureConfig};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Smallest imaginary part accepted by [`out_eval`].
pub const MIN_IM: f64 = 1e-3;

pub type LogFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Nonnegative function `K` on ℝ, stored through `log K`.
#[derive(Clone)]
pub struct BoundaryModulus {
    pub label: String,
    /// Zeros and poles of `K` (log singularities) and other kinks.
    pub singular: Vec<f64>,
    pub symmetric: bool,
    log_k: LogFn,
}

impl fmt::Debug for BoundaryModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryModulus")
            .field("label", &self.label)
            .field("singular", &self.singular)
            .field("symmetric", &self.symmetric)
            .finish()
    }
}

impl BoundaryModulus {
    pub fn from_log(
        label: &str,
        singular: Vec<f64>,
        symmetric: bool,
        log_k: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        BoundaryModulus {
            label: label.to_string(),
            singular,
            symmetric,
            log_k: Arc::new(log_k),
        }
    }

    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!("constant modulus must be positive, got {c}")));
        }
        let l = c.ln();
        Ok(BoundaryModulus::from_log(&format!("{c}"), vec![], true, move |_| l))
    }

    /// `|p|^a`.
    pub fn power(a: f64) -> Self {
        BoundaryModulus::from_log(&format!("|p|^{a}"), vec![0.0, -1.0, 1.0], true, move |p| a * p.abs().ln())
    }

    /// `(1 + p²)^b`.
    pub fn one_plus_square(b: f64) -> Self {
        BoundaryModulus::from_log(&format!("(1+p^2)^{b}"), vec![], true, move |p| b * (p * p).ln_1p())
    }

    /// `Ψ_ν`.
    pub fn psi(nu: &BoundaryMeasure) -> Result<Self> {
        if nu.is_zero() {
            return Err(Error::Domain("Ψ_ν needs a nonzero measure".into()));
        }
        let nu = nu.clone();
        Ok(BoundaryModulus::from_log("Psi_nu", vec![0.0, -1.0, 1.0], true, move |p| {
            nu.psi_big(p).map(f64::ln).unwrap_or(f64::NAN)
        }))
    }

    /// `√Ψ_ν`, the modulus of F_ν.
    pub fn sqrt_psi(nu: &BoundaryMeasure) -> Result<Self> {
        Ok(BoundaryModulus::psi(nu)?.powf(0.5))
    }

    pub fn log(&self, p: f64) -> f64 {
        (self.log_k)(p)
    }

    pub fn eval(&self, p: f64) -> f64 {
        self.log(p).exp()
    }

    pub fn product(&self, other: &BoundaryModulus) -> Self {
        let (a, b) = (self.log_k.clone(), other.log_k.clone());
        let mut singular = self.singular.clone();
        singular.extend(&other.singular);
        BoundaryModulus::from_log(
            &format!("({})*({})", self.label, other.label),
            singular,
            self.symmetric && other.symmetric,
            move |p| a(p) + b(p),
        )
    }

    pub fn quotient(&self, other: &BoundaryModulus) -> Self {
        let (a, b) = (self.log_k.clone(), other.log_k.clone());
        let mut singular = self.singular.clone();
        singular.extend(&other.singular);
        BoundaryModulus::from_log(
            &format!("({})/({})", self.label, other.label),
            singular,
            self.symmetric && other.symmetric,
            move |p| a(p) - b(p),
        )
    }

    pub fn powf(&self, e: f64) -> Self {
        let a = self.log_k.clone();
        BoundaryModulus::from_log(&format!("({})^{e}", self.label), self.singular.clone(), self.symmetric, move |p| e * a(p))
    }

    fn require_symmetric(&self) -> Result<()> {
        if !self.symmetric {
            return Err(Error::Contract(format!("modulus `{}` is not declared symmetric", self.label)));
        }
        for p in [0.37, 1.3, 4.1, 17.0] {
            let (a, b) = (self.log(p), self.log(-p));
            if (a - b).abs() > 1e-10 * (1.0 + a.abs()) {
                return Err(Error::Contract(format!("modulus `{}` is not even: K({p}) ≠ K(-{p})", self.label)));
            }
        }
        Ok(())
    }
}

/// `I(K) = ∫ |log K(p)|/(1 + p²) dp`.
pub fn log_integral(k: &BoundaryModulus, cfg: &QuadratureConfig) -> Result<f64> {
    match integrate_real(|p| k.log(p).abs() / (1.0 + p * p), f64::NEG_INFINITY, f64::INFINITY, &k.singular, cfg) {
        Ok((v, _)) if v.is_finite() => Ok(v),
        Ok((v, _)) => Err(Error::NotLogIntegrable(format!("I(K) evaluated to {v}"))),
        Err(Error::NonConvergence { partial, .. }) => Err(Error::NotLogIntegrable(format!(
            "the log-integral of `{}` does not settle (partial {})",
            k.label, partial.re
        ))),
        Err(e) => Err(e),
    }
}

/// `Out(C, K)(z) = C·exp((1/πi) ∫ [1/(p−z) − p/(1+p²)] log K(p) dp)`.
pub fn out_eval(c: Complex64, k: &BoundaryModulus, z: Complex64, cfg: &QuadratureConfig) -> Result<Complex64> {
    if (c.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("outer constant {c} is not unimodular")));
    }
    if !(z.im >= MIN_IM) || !z.re.is_finite() {
        return Err(Error::Domain(format!(
            "out_eval needs Im z ≥ {MIN_IM}; use the boundary formulas closer to the real axis (z = {z})"
        )));
    }
    let mut breaks = k.singular.clone();
    breaks.push(z.re);
    let j = integrate(
        |p| {
            let kern = (1.0 + z * p) / ((Complex64::new(p, 0.0) - z) * (1.0 + p * p));
            kern * k.log(p)
        },
        f64::NEG_INFINITY,
        f64::INFINITY,
        &breaks,
        cfg,
    )?;
    Ok(c * (j.value / (PI * I)).exp())
}

/// `Out(K)(iλ) = exp((1/π) ∫ λ/(p²+λ²) log K(p) dp)` for even `K`.
pub fn out_on_axis(k: &BoundaryModulus, lambda: f64, cfg: &QuadratureConfig) -> Result<f64> {
    k.require_symmetric()?;
    Ok(axis_log(k, lambda, cfg)?.exp())
}

fn axis_log(k: &BoundaryModulus, lambda: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("axis point must be positive, got {lambda}")));
    }
    // p = λs keeps the kernel 1/(1+s²) at unit scale for every λ.
    let mut breaks: Vec<f64> = k.singular.iter().map(|p| p / lambda).collect();
    breaks.push(1.0);
    let (v, _) = integrate_real(|s| k.log(lambda * s) / (1.0 + s * s), 0.0, f64::INFINITY, &breaks, cfg)?;
    Ok(2.0 * v / PI)
}

/// Boundary phase `α(x)` of `Out(K)` for even `K`, so that the boundary
/// value is `K(x)·e^{iα(x)}`. Computed as
/// `α(x) = −(1/π) ∫_0^∞ 2x (log K(p) − log K(x))/(p² − x²) dp` for `x > 0`,
/// odd in `x`.
pub fn boundary_phase(k: &BoundaryModulus, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    k.require_symmetric()?;
    if x == 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("boundary phase needs x ≠ 0, got {x}")));
    }
    let ax = x.abs();
    let lx = k.log(ax);
    // p = |x|s, so the kernel 2/(s² − 1) is independent of x.
    let mut breaks: Vec<f64> = k.singular.iter().map(|p| p / ax).collect();
    breaks.push(1.0);
    let (v, _) = integrate_real(
        |s| {
            let d = s * s - 1.0;
            if d == 0.0 {
                0.0
            } else {
                2.0 * (k.log(ax * s) - lx) / d
            }
        },
        0.0,
        f64::INFINITY,
        &breaks,
        cfg,
    )?;
    Ok(-v * x.signum() / PI)
}

/// Outer function with cached modulus.
#[derive(Debug, Clone)]
pub struct OuterFunction {
    pub c: Complex64,
    pub k: BoundaryModulus,
    pub cfg: QuadratureConfig,
}

impl OuterFunction {
    pub fn new(c: Complex64, k: BoundaryModulus) -> Result<Self> {
        let cfg = QuadratureConfig::default();
        log_integral(&k, &QuadratureConfig::with_tol(1e-8, 1e-6))?;
        if (c.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("outer constant {c} is not unimodular")));
        }
        Ok(OuterFunction { c, k, cfg })
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        out_eval(self.c, &self.k, z, &self.cfg)
    }

    /// Boundary value `C·K(x)·e^{iα(x)}` (even `K` only).
    pub fn boundary_value(&self, x: f64) -> Result<Complex64> {
        let a = boundary_phase(&self.k, x, &self.cfg)?;
        Ok(self.c * Complex64::from_polar(self.k.eval(x), a))
    }
}

/// The six closed-form outer functions of the standard examples, tagged
/// `'a'..='f'`: modulus and exact `Out(K)`.
pub fn outer_example(tag: char) -> Result<(BoundaryModulus, fn(Complex64) -> Complex64)> {
    Ok(match tag {
        'a' => (BoundaryModulus::power(1.0), |z| -I * z),
        'b' => (BoundaryModulus::power(-1.0), |z| I / z),
        'c' => (BoundaryModulus::power(-0.5), |z| Complex64::new(1.0, 1.0) / (2.0 * z).sqrt()),
        'd' => (BoundaryModulus::one_plus_square(1.0), |z| -(z + I) * (z + I)),
        'e' => (
            BoundaryModulus::power(1.0).quotient(&BoundaryModulus::one_plus_square(1.0)),
            |z| I * z / ((z + I) * (z + I)),
        ),
        'f' => (BoundaryModulus::one_plus_square(-0.5), |z| I / (z + I)),
        other => return Err(Error::Domain(format!("unknown outer example `{other}`"))),
    })
}

/// `F_ν(z) = Out(√Ψ_ν)(z)`.
pub fn f_nu(nu: &BoundaryMeasure, z: Complex64, cfg: &QuadratureConfig) -> Result<Complex64> {
    out_eval(Complex64::new(1.0, 0.0), &BoundaryModulus::sqrt_psi(nu)?, z, cfg)
}

/// `F_ν(iλ)`, real and positive.
pub fn f_nu_axis(nu: &BoundaryMeasure, lambda: f64, cfg: &QuadratureConfig) -> Result<f64> {
    out_on_axis(&BoundaryModulus::sqrt_psi(nu)?, lambda, cfg)
}

/// `h_ν(x) = F_ν(x)/F_ν(−x) = e^{2iα(x)}`, unimodular and ♭-symmetric.
pub fn h_nu(nu: &BoundaryMeasure, x: f64, cfg: &QuadratureConfig) -> Result<Complex64> {
    if x == 0.0 {
        return Err(Error::Domain("h_ν is evaluated at x ≠ 0".into()));
    }
    let a = boundary_phase(&BoundaryModulus::sqrt_psi(nu)?, x, cfg)?;
    Ok(Complex64::from_polar(1.0, 2.0 * a))
}

/// h_ν as a symbol. Quadrature failures surface as NaN values.
pub fn h_nu_symbol(nu: &BoundaryMeasure, cfg: &QuadratureConfig) -> Result<SymbolFunction> {
    let k = BoundaryModulus::sqrt_psi(nu)?;
    let cfg = *cfg;
    Ok(SymbolFunction::new("h_nu", 1.0, true, vec![0.0], move |x| {
        if x == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        match boundary_phase(&k, x, &cfg) {
            Ok(a) => Complex64::from_polar(1.0, 2.0 * a),
            Err(_) => Complex64::new(f64::NAN, f64::NAN),
        }
    }))
}

/// `t_ν(λ) = (1+λ²)/(λ·F_ν(iλ)²)`.
pub fn t_factor(nu: &BoundaryMeasure, lambda: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let k = BoundaryModulus::psi(nu)?;
    t_factor_with(&k, lambda, cfg)
}

fn t_factor_with(psi: &BoundaryModulus, lambda: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let log_f2 = axis_log(psi, lambda, cfg)?;
    Ok((1.0 + lambda * lambda) / lambda * (-log_f2).exp())
}

/// `d(𝒯ν)(λ) = t_ν(λ) dν(λ)` on `(0, ∞)`; atoms at 0 and ∞ are dropped.
pub fn t_map(nu: &BoundaryMeasure, cfg: &QuadratureConfig) -> Result<BoundaryMeasure> {
    let psi = BoundaryModulus::psi(nu)?;
    let mut atoms = Vec::with_capacity(nu.atoms.len());
    for &(l, w) in &nu.atoms {
        atoms.push((l, w * t_factor_with(&psi, l, cfg)?));
    }
    let mut density = Vec::new();
    for d in &nu.density {
        let kind = d.kind.clone();
        let psi = psi.clone();
        let cfg = *cfg;
        let f = DensityKind::function(&format!("T[{:?}]", d.kind), move |l| {
            let rho = kind.eval(l);
            if rho == 0.0 {
                return 0.0;
            }
            t_factor_with(&psi, l, &cfg).map(|t| rho * t).unwrap_or(f64::NAN)
        });
        density.push(DensityPiece::new(d.a, d.b, f)?);
    }
    BoundaryMeasure::new(0.0, 0.0, atoms, density)
}

/// `Λ(z) = iz/(z + i)²`.
pub fn lambda_eval(z: Complex64) -> Result<Complex64> {
    let d = z + I;
    if d.norm() == 0.0 {
        return Err(Error::Pole(z));
    }
    Ok(I * z / (d * d))
}
