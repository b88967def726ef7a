//! Hankel operators on H²(ℂ₊) seen through their quadratic forms on finite
//! sets of Szegö kernels.
//!
//! A positive Hankel operator arises either from a Carleson measure μ on
//! `(0, ∞)` through `⟨f, H_μ g⟩ = ∫ f(iλ)‾ g(iλ) dμ(λ)` or from a bounded
//! symbol `h` through `⟨f, H_h g⟩ = ∫ f(x)‾ h(x) g(−x) dx`. Both are sampled
//! on anchors `z_j` as a Gram matrix `G_jk = ⟨Q_{z_j}, H Q_{z_k}⟩`, paired with
//! the mass matrix `M_jk = ⟨Q_{z_j}, Q_{z_k}⟩`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hardy::{szego_unchecked, KernelCombination, SymbolFunction};
use crate::measures::BoundaryMeasure;
use crate::numerics::{eig_hermitian, fourier_half_line, fourier_line, hermitian_part, integrate, integrate_vec, QuadratureConfig};
use crate::symbols::{h_nu_symbol, out_eval, out_on_axis, t_map, BoundaryModulus};
use crate::{fmt17, CMatrix};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Relative pivot threshold for the Cholesky factor of the mass matrix.
pub const PIVOT_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
pub const RP_TOL: f64 = 1e-8;
pub const HERMITIAN_TOL: f64 = 1e-8;

/// Gram and mass matrices of a Hankel form on a set of anchors.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelGram {
    pub anchors: Vec<Complex64>,
    pub g: CMatrix,
    pub m: CMatrix,
    /// `‖G − G*‖_F` before symmetrization.
    pub hermitian_defect: f64,
}

/// Outcome of [`certify_positive`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verdict {
    pub psd: bool,
    pub min_eig: f64,
    pub norm_lower_bound: f64,
}

impl Verdict {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain struct")
    }
}

/// Nine anchors `i·10^{−1 + k/4}` on the imaginary axis (including `i`)
/// plus three off-axis points.
pub fn default_anchors() -> Vec<Complex64> {
    let mut a: Vec<Complex64> = (0..9).map(|k| I * 10f64.powf(-1.0 + k as f64 / 4.0)).collect();
    a.extend([Complex64::new(1.0, 1.0), Complex64::new(-1.5, 0.5), Complex64::new(0.5, 2.5)]);
    a
}

fn check_anchors(anchors: &[Complex64]) -> Result<()> {
    if anchors.is_empty() {
        return Err(Error::Domain("at least one anchor is needed".into()));
    }
    for (j, z) in anchors.iter().enumerate() {
        if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::Domain(format!("anchor {j} = {z} is not in the open upper half-plane")));
        }
        if anchors[..j].contains(z) {
            return Err(Error::IllConditioned(format!("anchor {z} is repeated")));
        }
    }
    Ok(())
}

/// `M_jk = ⟨Q_{z_j}, Q_{z_k}⟩ = Q_{z_k}(z_j)`.
pub fn mass_matrix(anchors: &[Complex64]) -> Result<CMatrix> {
    check_anchors(anchors)?;
    let n = anchors.len();
    Ok(CMatrix::from_fn(n, n, |j, k| szego_unchecked(anchors[k], anchors[j])))
}

fn finish(anchors: &[Complex64], g: CMatrix, self_adjoint: bool) -> Result<HankelGram> {
    let m = mass_matrix(anchors)?;
    let defect = (&g - g.adjoint()).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let scale = g.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let g = if self_adjoint {
        if defect > HERMITIAN_TOL * scale.max(1.0) {
            return Err(Error::Contract(format!("Gram matrix of a self-adjoint form is not Hermitian (defect {defect:e})")));
        }
        hermitian_part(&g)
    } else {
        g
    };
    Ok(HankelGram { anchors: anchors.to_vec(), g, m, hermitian_defect: defect })
}

fn require_half_line(mu: &BoundaryMeasure) -> Result<()> {
    if mu.atom0 != 0.0 || mu.atom_inf != 0.0 {
        return Err(Error::Contract("a Hankel measure lives on (0, ∞); atoms at 0 or ∞ are not allowed".into()));
    }
    Ok(())
}

/// `∫ dμ/(1+λ)²`, the size of the form on Szegö kernels; fails when it
/// diverges at either end.
fn carleson_check(mu: &BoundaryMeasure) -> Result<()> {
    let w = |l: f64| 1.0 / ((1.0 + l) * (1.0 + l));
    if mu.decade_divergence(w, true) || mu.decade_divergence(w, false) {
        return Err(Error::NotCarleson("∫ dμ(λ)/(1+λ)² diverges".into()));
    }
    Ok(())
}

/// `G_jk = ∫ Q_{z_j}(iλ)‾ Q_{z_k}(iλ) dμ(λ)`.
pub fn gram_from_measure(mu: &BoundaryMeasure, anchors: &[Complex64]) -> Result<HankelGram> {
    check_anchors(anchors)?;
    require_half_line(mu)?;
    carleson_check(mu)?;
    let n = anchors.len();
    let mut g = CMatrix::zeros(n, n);
    let mut v = vec![ZERO; n];
    for &(l, w) in mu.points().iter() {
        for (vj, &a) in v.iter_mut().zip(anchors) {
            *vj = szego_unchecked(a, I * l);
        }
        for j in 0..n {
            let cj = v[j].conj() * w;
            for k in 0..n {
                g[(j, k)] += cj * v[k];
            }
        }
    }
    if g.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NotCarleson("Gram entries are not finite".into()));
    }
    finish(anchors, g, true)
}

/// `G_jk = ∫ Q_{z_j}(x)‾ h(x) Q_{z_k}(−x) dx`. The Gram is symmetrized when
/// `self_adjoint` is set, after checking it is Hermitian to 1e-8.
pub fn gram_from_symbol_with(h: &SymbolFunction, anchors: &[Complex64], self_adjoint: bool, cfg: &QuadratureConfig) -> Result<HankelGram> {
    check_anchors(anchors)?;
    let n = anchors.len();
    let mut left = vec![ZERO; n];
    let mut right = vec![ZERO; n];
    let r = integrate_vec(
        |x, out: &mut [Complex64]| {
            let hx = h.eval(x);
            for k in 0..n {
                left[k] = szego_unchecked(anchors[k], Complex64::new(x, 0.0)).conj() * hx;
                right[k] = szego_unchecked(anchors[k], Complex64::new(-x, 0.0));
            }
            for j in 0..n {
                for k in 0..n {
                    out[j * n + k] = left[j] * right[k];
                }
            }
        },
        n * n,
        f64::NEG_INFINITY,
        f64::INFINITY,
        &h.singular,
        cfg,
    )?;
    let g = CMatrix::from_fn(n, n, |j, k| r.values[j * n + k]);
    finish(anchors, g, self_adjoint)
}

/// Quadrature settings for symbol Grams. Finite-rank forms have many zero
/// pencil eigenvalues, so the noise floor must sit well below `PSD_TOL`.
pub fn gram_config() -> QuadratureConfig {
    QuadratureConfig::with_tol(1e-13, 1e-11)
}

/// [`gram_from_symbol_with`] for ♭-symmetric symbols, whose forms are
/// self-adjoint.
pub fn gram_from_symbol(h: &SymbolFunction, anchors: &[Complex64]) -> Result<HankelGram> {
    gram_from_symbol_with(h, anchors, true, &gram_config())
}

/// `h(p) = (i/π) ∫ p/(λ² + p²) dμ(λ)`.
pub fn symbol_from_measure(mu: &BoundaryMeasure, p: f64) -> Result<Complex64> {
    require_half_line(mu)?;
    if p == 0.0 || !p.is_finite() {
        return Err(Error::Domain(format!("symbol is evaluated at p ≠ 0, got {p}")));
    }
    Ok(I / PI * mu.integrate_interior_real(|l| p / (l * l + p * p)))
}

/// [`symbol_from_measure`] as a symbol function.
pub fn measure_symbol(mu: &BoundaryMeasure) -> Result<SymbolFunction> {
    require_half_line(mu)?;
    carleson_check(mu)?;
    let mu2 = mu.clone();
    let f = move |p: f64| if p == 0.0 { ZERO } else { I / PI * mu2.integrate_interior_real(|l| p / (l * l + p * p)) };
    let sup = (-30..=30).map(|k| f(10f64.powf(k as f64 / 3.0)).norm()).fold(0.0, f64::max);
    Ok(SymbolFunction::new("h_mu", sup, false, vec![0.0], f))
}

/// Cholesky factor `L` of a Hermitian positive definite `M = LL*`; pivots
/// below `PIVOT_TOL·max diag` are rejected.
fn cholesky(m: &CMatrix) -> Result<CMatrix> {
    let n = m.nrows();
    let dmax = (0..n).map(|i| m[(i, i)].re).fold(0.0, f64::max);
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > PIVOT_TOL * dmax) {
            return Err(Error::IllConditioned(format!(
                "mass matrix pivot {j} is {d:e} (threshold {:e}); choose better separated anchors",
                PIVOT_TOL * dmax
            )));
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex64::new(djj, 0.0);
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Eigenvalues of the pencil `(G, M)`, ascending.
pub fn generalized_eigenvalues(gram: &HankelGram) -> Result<Vec<f64>> {
    let l = cholesky(&gram.m)?;
    let x = l
        .solve_lower_triangular(&gram.g)
        .ok_or_else(|| Error::IllConditioned("singular Cholesky factor".into()))?;
    let a = l
        .solve_lower_triangular(&x.adjoint())
        .ok_or_else(|| Error::IllConditioned("singular Cholesky factor".into()))?;
    Ok(eig_hermitian(&hermitian_part(&a))?.0)
}

/// PSD verdict from the smallest pencil eigenvalue; the largest eigenvalue
/// modulus bounds `‖H‖` from below.
pub fn certify_positive(gram: &HankelGram) -> Result<Verdict> {
    let ev = generalized_eigenvalues(gram)?;
    let min_eig = ev.first().copied().unwrap_or(0.0);
    let norm_lower_bound = ev.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(Verdict { psd: min_eig >= -PSD_TOL, min_eig, norm_lower_bound })
}

impl HankelGram {
    /// Anchor header rows followed by one row per matrix entry.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("# anchor,re,im\n");
        for (j, z) in self.anchors.iter().enumerate() {
            let _ = writeln!(s, "# {j},{},{}", fmt17(z.re), fmt17(z.im));
        }
        s.push_str("row,col,g_re,g_im,m_re,m_im\n");
        let n = self.anchors.len();
        for j in 0..n {
            for k in 0..n {
                let (g, m) = (self.g[(j, k)], self.m[(j, k)]);
                let _ = writeln!(s, "{j},{k},{},{},{},{}", fmt17(g.re), fmt17(g.im), fmt17(m.re), fmt17(m.im));
            }
        }
        s
    }
}

/// True iff `∫ dμ(λ)/λ < ∞`.
pub fn compactness_check(mu: &BoundaryMeasure) -> bool {
    if mu.atom0 > 0.0 {
        return false;
    }
    let w = |l: f64| 1.0 / l;
    if mu.decade_divergence(w, true) || mu.decade_divergence(w, false) {
        return false;
    }
    mu.integrate_interior_real(w).is_finite()
}

/// How the reflection-positivity function is built from Ψ_ν.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RpMode {
    /// `φ(t) = ∫ e^{−itx} Ψ_ν(x) dx`, available when Ψ_ν is integrable.
    Direct,
    /// `φ(t) = −∫ e^{−itx} Ψ_ν(x) x²/(x − i)⁴ dx`, always defined.
    Regularized,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RpReport {
    pub psd: bool,
    pub min_eig: f64,
    pub mode: RpMode,
    pub times: Vec<f64>,
    pub matrix: Vec<Vec<f64>>,
}

/// Ψ_ν is integrable iff there are no boundary atoms and
/// `∫ (1+λ²)/λ dν < ∞`.
pub fn rp_mode(nu: &BoundaryMeasure) -> RpMode {
    let w = |l: f64| (1.0 + l * l) / l;
    if nu.has_boundary_atoms() || nu.decade_divergence(w, true) || nu.decade_divergence(w, false) {
        RpMode::Regularized
    } else {
        RpMode::Direct
    }
}

/// `φ(t)` for the given mode, by oscillatory quadrature of Ψ_ν.
pub fn rp_phi(nu: &BoundaryMeasure, t: f64, mode: RpMode, cfg: &QuadratureConfig) -> Result<f64> {
    if nu.is_zero() {
        return Err(Error::Domain("reflection positivity needs ν ≠ 0".into()));
    }
    let psi = |x: f64| nu.psi_big(x).unwrap_or(f64::NAN);
    match mode {
        RpMode::Direct => {
            let r = fourier_half_line(|x| Complex64::new(psi(x), 0.0), t, &[], cfg)?;
            Ok(2.0 * r.value.re)
        }
        RpMode::Regularized => {
            let f = |x: f64| {
                if x == 0.0 {
                    return Complex64::new(-nu.atom0 / PI, 0.0);
                }
                let xc = Complex64::new(x, 0.0) - I;
                -psi(x) * x * x / (xc * xc * xc * xc)
            };
            let r = fourier_line(f, t, &[0.0, -1.0, 1.0], cfg)?;
            Ok(r.value.re)
        }
    }
}

/// `[φ(t_j + t_k)]` and its smallest eigenvalue.
pub fn reflection_matrix<P: Fn(f64) -> Result<f64>>(phi: P, times: &[f64]) -> Result<(DMatrix<f64>, f64)> {
    if times.is_empty() || times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(Error::Domain("times must be a nonempty list of finite t ≥ 0".into()));
    }
    let n = times.len();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        for k in j..n {
            let v = phi(times[j] + times[k])?;
            m[(j, k)] = v;
            m[(k, j)] = v;
        }
    }
    let ev = SymmetricEigen::new(m.clone()).eigenvalues;
    let min = ev.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((m, min))
}

/// Reflection positivity of `t ↦ φ(t)` built from Ψ_ν on the given times.
pub fn rp_certify(nu: &BoundaryMeasure, times: &[f64], cfg: &QuadratureConfig) -> Result<RpReport> {
    let mode = rp_mode(nu);
    let (m, min_eig) = reflection_matrix(|t| rp_phi(nu, t, mode, cfg), times)?;
    let scale = m.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
    Ok(RpReport {
        psd: min_eig >= -RP_TOL * scale,
        min_eig,
        mode,
        times: times.to_vec(),
        matrix: m.row_iter().map(|r| r.iter().copied().collect()).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsometryReport {
    pub lhs: [f64; 2],
    pub rhs: [f64; 2],
    pub deviation: f64,
}

/// Compares `⟨f, θ_{h_ν} g⟩` on the boundary with `∫ f(iλ)‾ g(iλ) d(𝒯ν)`.
/// The deviation is relative to `|rhs|` (absolute when both sides vanish).
pub fn os_isometry_check(nu: &BoundaryMeasure, f: &KernelCombination, g: &KernelCombination, cfg: &QuadratureConfig) -> Result<IsometryReport> {
    if nu.is_zero() {
        return Err(Error::Domain("the isometry check needs ν ≠ 0".into()));
    }
    if f.terms.is_empty() || g.terms.is_empty() {
        return Ok(IsometryReport { lhs: [0.0; 2], rhs: [0.0; 2], deviation: 0.0 });
    }
    let h = h_nu_symbol(nu, cfg)?;
    let lhs = integrate(
        |x| f.eval(Complex64::new(x, 0.0)).conj() * h.eval(x) * g.eval(Complex64::new(-x, 0.0)),
        f64::NEG_INFINITY,
        f64::INFINITY,
        &[0.0],
        cfg,
    )?
    .value;
    let tnu = t_map(nu, cfg)?;
    let rhs = tnu.integrate_interior(|l| f.eval(I * l).conj() * g.eval(I * l));
    let diff = (lhs - rhs).norm();
    let deviation = if rhs.norm() > 0.0 { diff / rhs.norm() } else { diff };
    Ok(IsometryReport { lhs: [lhs.re, lhs.im], rhs: [rhs.re, rhs.im], deviation })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub anchors: Vec<[f64; 2]>,
    pub lhs: Vec<[f64; 2]>,
    pub rhs: Vec<[f64; 2]>,
    pub deviation: f64,
}

/// Checks `⟨Q_{z_j}, H F⟩ = F(z_j)` for `F = F_ν` and `H = H_{h_ν}`. The
/// left side is evaluated through the measure form of `H_{h_ν} = H_{𝒯ν}`
/// with `F(iλ)` from the axis formula, the right side by the outer
/// integral at `z_j`. Returns the largest absolute deviation.
pub fn fixed_point_check_nu(nu: &BoundaryMeasure, anchors: &[Complex64], cfg: &QuadratureConfig) -> Result<FixedPointReport> {
    check_anchors(anchors)?;
    let k = BoundaryModulus::sqrt_psi(nu)?;
    let tnu = t_map(nu, cfg)?;
    let pts = tnu.points();
    let mut f_axis = Vec::with_capacity(pts.len());
    for &(l, _) in pts.iter() {
        f_axis.push(out_on_axis(&k, l, cfg)?);
    }
    let one = Complex64::new(1.0, 0.0);
    let mut lhs = Vec::with_capacity(anchors.len());
    let mut rhs = Vec::with_capacity(anchors.len());
    let mut deviation: f64 = 0.0;
    for &z in anchors {
        let l: Complex64 = pts.iter().zip(&f_axis).map(|(&(lam, w), &fv)| szego_unchecked(z, I * lam).conj() * fv * w).sum();
        let r = out_eval(one, &k, z, cfg)?;
        deviation = deviation.max((l - r).norm());
        lhs.push([l.re, l.im]);
        rhs.push([r.re, r.im]);
    }
    Ok(FixedPointReport { anchors: anchors.iter().map(|z| [z.re, z.im]).collect(), lhs, rhs, deviation })
}

/// [`fixed_point_check_nu`] for `ν = W(μ)`; μ must be a nonzero finite
/// measure on `(0, ∞)`.
pub fn fixed_point_check(mu: &BoundaryMeasure, anchors: &[Complex64], cfg: &QuadratureConfig) -> Result<FixedPointReport> {
    require_half_line(mu)?;
    if mu.is_zero() || !mu.total_mass().is_finite() {
        return Err(Error::Domain("the fixed-point check needs a nonzero finite μ".into()));
    }
    fixed_point_check_nu(&mu.w_map()?, anchors, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{DensityKind, DensityPiece};
    use crate::symbols::h_nu_symbol;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn density(a: f64, b: f64, expr: &str) -> BoundaryMeasure {
        BoundaryMeasure::new(0.0, 0.0, vec![], vec![DensityPiece::new(a, b, DensityKind::closed_form(expr).unwrap()).unwrap()]).unwrap()
    }

    #[test]
    fn mass_matrix_properties() {
        let m = mass_matrix(&default_anchors()).unwrap();
        let ev = eig_hermitian(&m).unwrap().0;
        assert!(ev[0] > 0.0);
        assert!((m[(4, 4)].re - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!(matches!(mass_matrix(&[I, I]), Err(Error::IllConditioned(_))));
        assert!(mass_matrix(&[c(0.0, -1.0)]).is_err());
    }

    #[test]
    fn rank_one_measure() {
        let anchors = default_anchors();
        let mu = BoundaryMeasure::dirac(1.0, 4.0 * PI).unwrap();
        let gram = gram_from_measure(&mu, &anchors).unwrap();
        let ev = generalized_eigenvalues(&gram).unwrap();
        let top = ev[ev.len() - 1];
        assert!((top - 1.0).abs() < 1e-6, "{top}");
        assert!(ev[ev.len() - 2].abs() < 1e-8);
        let v = certify_positive(&gram).unwrap();
        assert!(v.psd && (v.norm_lower_bound - 1.0).abs() < 1e-6);
        let zero = gram_from_measure(&BoundaryMeasure::zero(), &anchors).unwrap();
        assert_eq!(zero.g, CMatrix::zeros(12, 12));
        let v = certify_positive(&zero).unwrap();
        assert!(v.psd && v.norm_lower_bound == 0.0);
    }

    #[test]
    fn lebesgue_measure_matches_i_sgn() {
        let anchors = &default_anchors()[..6];
        let mu = BoundaryMeasure::lebesgue(2.0).unwrap();
        let a = gram_from_measure(&mu, anchors).unwrap();
        let b = gram_from_symbol(&SymbolFunction::i_sgn(), anchors).unwrap();
        assert!(max_diff(&a.g, &b.g) < 1e-6, "{}", max_diff(&a.g, &b.g));
        assert!(certify_positive(&b).unwrap().psd);
        let neg = gram_from_symbol(&SymbolFunction::i_sgn().negated(), anchors).unwrap();
        assert!(!certify_positive(&neg).unwrap().psd);
    }

    #[test]
    fn lower_half_plane_symbol_vanishes() {
        let anchors = &default_anchors()[..6];
        let g = gram_from_symbol_with(&SymbolFunction::lower_half_plane_example(), anchors, false, &QuadratureConfig::default()).unwrap();
        assert!(g.g.iter().all(|z| z.norm() < 1e-8));
    }

    #[test]
    fn carleson_and_half_line_contracts() {
        let anchors = [I];
        let near0 = density(0.0, 1.0, "1/x");
        assert!(matches!(gram_from_measure(&near0, &anchors), Err(Error::NotCarleson(_))));
        let atom = BoundaryMeasure::dirac(0.0, 1.0).unwrap();
        assert!(matches!(gram_from_measure(&atom, &anchors), Err(Error::Contract(_))));
    }

    #[test]
    fn symbols_from_measures() {
        let two = BoundaryMeasure::lebesgue(2.0).unwrap();
        for p in [0.3, -2.0, 15.0] {
            assert!((symbol_from_measure(&two, p).unwrap() - I * p.signum()).norm() < 1e-9);
        }
        assert_eq!(symbol_from_measure(&BoundaryMeasure::zero(), 1.0).unwrap(), ZERO);
        let d1 = BoundaryMeasure::dirac(1.0, 1.0).unwrap();
        let p = 0.7;
        assert!((symbol_from_measure(&d1, p).unwrap() - I / PI * p / (1.0 + p * p)).norm() < 1e-15);
        assert!(symbol_from_measure(&d1, 0.0).is_err());
    }

    #[test]
    fn measure_and_symbol_grams_agree() {
        let anchors = &default_anchors()[2..8];
        let mu = BoundaryMeasure::atomic(vec![(0.5, 1.0), (3.0, 2.0)]).unwrap();
        let a = gram_from_measure(&mu, anchors).unwrap();
        let b = gram_from_symbol(&measure_symbol(&mu).unwrap(), anchors).unwrap();
        assert!(max_diff(&a.g, &b.g) < 1e-8);
    }

    #[test]
    fn compactness() {
        assert!(compactness_check(&BoundaryMeasure::dirac(1.0, 1.0).unwrap()));
        assert!(!compactness_check(&density(0.0, 1.0, "1")));
        assert!(compactness_check(&density(0.0, 1.0, "x")));
        assert!(!compactness_check(&BoundaryMeasure::lebesgue(2.0).unwrap()));
    }

    #[test]
    fn rp_direct_mode() {
        let cfg = QuadratureConfig::default();
        let nu = BoundaryMeasure::atomic(vec![(0.5, 1.0), (2.0, 0.5)]).unwrap();
        assert_eq!(rp_mode(&nu), RpMode::Direct);
        for t in [0.0, 0.5, 1.0, 3.0] {
            let want: f64 = nu.atoms.iter().map(|&(l, w)| w * (1.0 + l * l) / l * (-l * t).exp()).sum();
            let got = rp_phi(&nu, t, RpMode::Direct, &cfg).unwrap();
            assert!((got - want).abs() < 1e-7 * want.max(1.0), "{t} {got} {want}");
        }
        let r = rp_certify(&nu, &[0.0, 1.0, 2.0], &cfg).unwrap();
        assert!(r.psd);
    }

    #[test]
    fn rp_regularized_mode() {
        let cfg = QuadratureConfig::default();
        let leb = BoundaryMeasure::lebesgue_example();
        assert_eq!(rp_mode(&leb), RpMode::Regularized);
        assert!((rp_phi(&leb, 0.0, RpMode::Regularized, &cfg).unwrap() - 1.0 / 3.0).abs() < 1e-7);
        for t in [0.5, 2.0] {
            let want = leb.integrate_interior_real(|l| (-t * l).exp() * l * (1.0 + l * l) / (1.0 + l).powi(4));
            let got = rp_phi(&leb, t, RpMode::Regularized, &cfg).unwrap();
            assert!((got - want).abs() < 1e-7, "{t} {got} {want}");
        }
        assert!(rp_certify(&leb, &[0.5, 1.0, 2.0], &cfg).unwrap().psd);
        let inf = BoundaryMeasure::dirac(f64::INFINITY, 1.0).unwrap();
        assert!(rp_phi(&inf, 1.0, RpMode::Regularized, &cfg).unwrap().abs() < 1e-8);
    }

    #[test]
    fn rp_reference_functions() {
        let (_, m) = reflection_matrix(|t| Ok((-t).exp()), &[0.0, 1.0, 2.0]).unwrap();
        assert!(m >= -1e-12);
        let (mat, m) = reflection_matrix(|t| Ok(t.cos()), &[0.0, PI]).unwrap();
        assert!((mat[(0, 1)] + 1.0).abs() < 1e-15 && mat[(1, 1)] > 0.999);
        assert!(m.abs() < 1e-12);
        let (_, m) = reflection_matrix(|t| Ok(t.cos()), &[0.0, PI / 2.0, PI]).unwrap();
        assert!(m < -0.5);
    }

    #[test]
    fn os_isometry_lebesgue() {
        let cfg = QuadratureConfig::default();
        let leb = BoundaryMeasure::lebesgue_example();
        let q = KernelCombination::kernel(I).unwrap();
        let r = os_isometry_check(&leb, &q, &q, &cfg).unwrap();
        assert!((r.rhs[0] - 1.0 / (2.0 * PI * PI)).abs() < 1e-8);
        assert!(r.deviation < 1e-6, "{r:?}");
        let z = os_isometry_check(&leb, &KernelCombination::zero(), &q, &cfg).unwrap();
        assert_eq!(z.deviation, 0.0);
    }

    #[test]
    fn os_isometry_random_atoms() {
        let cfg = QuadratureConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..2 {
            let nu = BoundaryMeasure::atomic(vec![(rng.gen_range(0.2..1.0), rng.gen_range(0.5..2.0)), (rng.gen_range(1.5..5.0), rng.gen_range(0.5..2.0))]).unwrap();
            let mk = |rng: &mut ChaCha8Rng| {
                KernelCombination::new((0..2).map(|_| (c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), c(rng.gen_range(-2.0..2.0), rng.gen_range(0.3..2.0)))).collect()).unwrap()
            };
            let (f, g) = (mk(&mut rng), mk(&mut rng));
            let r = os_isometry_check(&nu, &f, &g, &cfg).unwrap();
            assert!(r.deviation < 1e-6, "{r:?}");
        }
    }

    #[test]
    fn fixed_points() {
        let cfg = QuadratureConfig::default();
        let anchors = [I, c(1.0, 0.5), c(-2.0, 2.0)];
        let d1 = BoundaryMeasure::dirac(1.0, 1.0).unwrap();
        let r = fixed_point_check(&d1, &anchors, &cfg).unwrap();
        assert!(r.deviation < 1e-5, "{r:?}");
        let f_i = 1.0 / (2.0 * PI.sqrt());
        assert!((r.rhs[0][0] - f_i).abs() < 1e-8);
        let two = BoundaryMeasure::atomic(vec![(1.0, 1.0), (2.0, 1.0)]).unwrap();
        assert!(fixed_point_check(&two, &anchors, &cfg).unwrap().deviation < 1e-5);
        let control = BoundaryMeasure::dirac(f64::INFINITY, PI).unwrap();
        let r = fixed_point_check_nu(&control, &anchors, &cfg).unwrap();
        assert!((r.deviation - 1.0).abs() < 1e-8);
    }

    #[test]
    fn h_nu_grams_are_positive_and_contractive() {
        let anchors = &default_anchors()[1..9];
        let cfg = gram_config();
        let nu = BoundaryMeasure::atomic(vec![(0.7, 1.0), (2.5, 0.4)]).unwrap();
        let h = h_nu_symbol(&nu, &cfg).unwrap();
        let g = gram_from_symbol(&h, anchors).unwrap();
        let v = certify_positive(&g).unwrap();
        assert!(v.psd && v.norm_lower_bound <= 1.0 + 1e-6, "{v:?}");
        let tm = gram_from_measure(&t_map(&nu, &cfg).unwrap(), anchors).unwrap();
        assert!(max_diff(&g.g, &tm.g) < 1e-6, "{}", max_diff(&g.g, &tm.g));
        assert!(!certify_positive(&gram_from_symbol(&h.negated(), anchors).unwrap()).unwrap().psd);
    }

    #[test]
    fn csv_and_json() {
        let g = gram_from_measure(&BoundaryMeasure::dirac(1.0, 1.0).unwrap(), &[I, c(1.0, 1.0)]).unwrap();
        let csv = g.to_csv();
        assert!(csv.starts_with("# anchor,re,im\n# 0,"));
        assert_eq!(csv.lines().count(), 3 + 1 + 4);
        let j = certify_positive(&g).unwrap().to_json();
        assert!(j.contains("\"psd\":true") && j.contains("norm_lower_bound"));
    }
}
