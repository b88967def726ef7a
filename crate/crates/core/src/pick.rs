//! Matrix-valued rational Pick functions, Blaschke–Potapov products and
//! degree computations.
//!
//! A rational Pick function is `F(z) = C + zD + Σ_j A_j/(λ_j − z)` with `C`
//! Hermitian and `D`, `A_j` positive semidefinite. Its degree is
//! `rk D + Σ rk A_j`; the winding routines recover it from contour integrals
//! over circles `|w| = r > 1` pulled back through the Cayley map.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::cayley_inv;
use crate::numerics::{eig_hermitian, eigenvalues_general, hermitian_function, hermitian_part, numerical_rank, winding_of};
use crate::CMatrix;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub const STRUCT_TOL: f64 = 1e-10;
pub const RANK_TOL: f64 = 1e-9;
pub const REGULAR_TOL: f64 = 1e-9;
/// Starting contour radius and number of halvings of `r − 1`.
pub const DEFAULT_RADIUS: f64 = 1.25;
pub const MAX_SHRINKS: u32 = 8;
const WINDING_SAMPLES: usize = 256;

/// Anything that can be evaluated as an `n×n` matrix function.
pub trait MatrixFunction {
    fn dim(&self) -> usize;
    fn eval(&self, z: Complex64) -> Result<CMatrix>;
}

fn frob(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn min_eig(a: &CMatrix) -> Result<f64> {
    Ok(eig_hermitian(&hermitian_part(a))?.0.first().copied().unwrap_or(0.0))
}

fn check_psd(name: &str, a: &CMatrix, n: usize) -> Result<()> {
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::Domain(format!("{name} must be {n}×{n}")));
    }
    if frob(&(a - a.adjoint())) > STRUCT_TOL {
        return Err(Error::Domain(format!("{name} is not Hermitian")));
    }
    let m = min_eig(a)?;
    if m < -STRUCT_TOL {
        return Err(Error::Domain(format!("{name} is not positive semidefinite (eigenvalue {m:e})")));
    }
    Ok(())
}

/// `F(z) = C + zD + Σ_j A_j/(λ_j − z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalPickFunction {
    pub n: usize,
    pub c: CMatrix,
    pub d: CMatrix,
    pub poles: Vec<(f64, CMatrix)>,
}

impl RationalPickFunction {
    pub fn new(c: CMatrix, d: CMatrix, mut poles: Vec<(f64, CMatrix)>) -> Result<Self> {
        let n = c.nrows();
        if n == 0 || c.ncols() != n {
            return Err(Error::Domain("C must be a nonempty square matrix".into()));
        }
        if frob(&(&c - c.adjoint())) > STRUCT_TOL {
            return Err(Error::Domain("C is not Hermitian".into()));
        }
        check_psd("D", &d, n)?;
        for (j, (l, a)) in poles.iter().enumerate() {
            if !l.is_finite() {
                return Err(Error::Domain(format!("pole {j} is not finite")));
            }
            check_psd(&format!("A_{j}"), a, n)?;
        }
        poles.sort_by(|a, b| a.0.total_cmp(&b.0));
        if poles.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Domain("pole locations must be distinct".into()));
        }
        Ok(RationalPickFunction { n, c, d, poles })
    }

    /// Scalar `c + dz + Σ a_j/(λ_j − z)`.
    pub fn scalar(c: f64, d: f64, atoms: &[(f64, f64)]) -> Result<Self> {
        let m = |x: f64| CMatrix::from_element(1, 1, Complex64::new(x, 0.0));
        RationalPickFunction::new(m(c), m(d), atoms.iter().map(|&(l, a)| (l, m(a))).collect())
    }

    /// `z ↦ z`.
    pub fn identity() -> Self {
        RationalPickFunction::scalar(0.0, 1.0, &[]).expect("valid")
    }

    /// `z ↦ [[1, 1], [1, z]]`.
    pub fn worked_example() -> Self {
        let c = CMatrix::from_row_slice(2, 2, &[ONE, ONE, ONE, ZERO]);
        let d = CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, ONE]);
        RationalPickFunction::new(c, d, vec![]).expect("valid")
    }

    pub fn is_scalar(&self) -> bool {
        self.n == 1
    }

    /// `rk D + Σ rk A_j`.
    pub fn degree_rank(&self) -> usize {
        numerical_rank(&self.d, RANK_TOL) + self.poles.iter().map(|(_, a)| numerical_rank(a, RANK_TOL)).sum::<usize>()
    }

    /// `−F`, which is not Pick unless `F` is constant.
    pub fn negated(&self) -> NegatedFunction<'_> {
        NegatedFunction(self)
    }

    /// Eigenvalues of the Hermitian boundary value `F_*(x)`, ascending.
    pub fn boundary_eigenvalues(&self, x: f64) -> Result<Vec<f64>> {
        Ok(eig_hermitian(&hermitian_part(&self.eval(Complex64::new(x, 0.0))?))?.0)
    }

    /// `e^{itF_*(x)}`.
    pub fn boundary_unitary(&self, t: f64, x: f64) -> Result<CMatrix> {
        let m = hermitian_part(&self.eval(Complex64::new(x, 0.0))?);
        hermitian_function(&m, |v| Complex64::from_polar(1.0, t * v))
    }

    /// Random regular function of dimension `n` with `n_poles` poles in
    /// `[−4, 4]`. Each `A_j` and `D` is a Gram matrix of bounded factors; the
    /// sum `D + Σ A_j` is kept positive definite, which makes `F` regular.
    pub fn random_regular<R: Rng>(rng: &mut R, n: usize, n_poles: usize) -> Self {
        loop {
            let c = random_hermitian(rng, n, 2.0);
            let d = if rng.gen_bool(0.5) {
                let r = rng.gen_range(1..=n);
                random_psd(rng, n, r)
            } else {
                CMatrix::zeros(n, n)
            };
            let mut poles: Vec<(f64, CMatrix)> = Vec::new();
            while poles.len() < n_poles {
                let l = rng.gen_range(-4.0..4.0);
                if poles.iter().all(|(m, _)| (m - l).abs() > 0.5) {
                    let r = rng.gen_range(1..=n);
                    poles.push((l, random_psd(rng, n, r)));
                }
            }
            let total = poles.iter().fold(d.clone(), |acc, (_, a)| acc + a);
            if min_eig(&total).map(|m| m > 1e-2).unwrap_or(false) {
                if let Ok(f) = RationalPickFunction::new(c, d, poles) {
                    return f;
                }
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let spec = PickSpec {
            dim: self.n,
            c: Some(to_rows(&self.c)),
            d: Some(to_rows(&self.d)),
            poles: self.poles.iter().map(|(l, a)| PoleSpec { lambda: *l, a: to_rows(a) }).collect(),
        };
        serde_json::to_string_pretty(&spec).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let spec: PickSpec = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let n = spec.dim;
        if n == 0 {
            return Err(Error::Parse("dim must be positive".into()));
        }
        let c = spec.c.map(|r| from_rows(&r, n)).transpose()?.unwrap_or_else(|| CMatrix::zeros(n, n));
        let d = spec.d.map(|r| from_rows(&r, n)).transpose()?.unwrap_or_else(|| CMatrix::zeros(n, n));
        let poles = spec
            .poles
            .into_iter()
            .map(|p| Ok((p.lambda, from_rows(&p.a, n)?)))
            .collect::<Result<Vec<_>>>()?;
        RationalPickFunction::new(c, d, poles)
    }
}

impl MatrixFunction for RationalPickFunction {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, z: Complex64) -> Result<CMatrix> {
        let mut m = &self.c + &self.d * z;
        for (l, a) in &self.poles {
            let den = Complex64::new(*l, 0.0) - z;
            if den.norm() == 0.0 {
                return Err(Error::Pole(z));
            }
            m += a * (ONE / den);
        }
        Ok(m)
    }
}

pub struct NegatedFunction<'a>(&'a RationalPickFunction);

impl MatrixFunction for NegatedFunction<'_> {
    fn dim(&self) -> usize {
        self.0.n
    }

    fn eval(&self, z: Complex64) -> Result<CMatrix> {
        Ok(-self.0.eval(z)?)
    }
}

fn random_hermitian<R: Rng>(rng: &mut R, n: usize, bound: f64) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = Complex64::new(rng.gen_range(-bound..bound), 0.0);
        for j in i + 1..n {
            let v = Complex64::new(rng.gen_range(-bound..bound), rng.gen_range(-bound..bound)) * 0.5;
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
    m
}

/// `G G*` with `G` of size `n×r` and entries of modulus at most 1.
fn random_psd<R: Rng>(rng: &mut R, n: usize, r: usize) -> CMatrix {
    loop {
        let g = CMatrix::from_fn(n, r, |_, _| Complex64::new(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7)));
        let a = &g * g.adjoint();
        // Keep nonzero eigenvalues away from 0 so the rank is unambiguous.
        let vals = eig_hermitian(&a).map(|e| e.0).unwrap_or_default();
        let top = vals.iter().copied().fold(0.0, f64::max);
        if vals.iter().rev().take(r).all(|&v| v > 0.25 * top) && top > 0.5 {
            return hermitian_part(&a);
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PickSpec {
    dim: usize,
    #[serde(rename = "C", default)]
    c: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(rename = "D", default)]
    d: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default)]
    poles: Vec<PoleSpec>,
}

#[derive(Serialize, Deserialize)]
struct PoleSpec {
    lambda: f64,
    #[serde(rename = "A")]
    a: Vec<Vec<[f64; 2]>>,
}

fn to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

fn from_rows(rows: &[Vec<[f64; 2]>], n: usize) -> Result<CMatrix> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!("expected a {n}×{n} matrix")));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

/// 200 probes: 20 real parts `±10^{[-2, 2]}` times 10 imaginary parts
/// `10^{[-2, 2]}`, all log-spaced.
pub fn default_probes() -> Vec<Complex64> {
    let logspace = |k: usize| 10f64.powf(-2.0 + 4.0 * k as f64 / 9.0);
    let mut out = Vec::with_capacity(200);
    for kx in 0..10 {
        for s in [-1.0, 1.0] {
            for ky in 0..10 {
                out.push(Complex64::new(s * logspace(kx), logspace(ky)));
            }
        }
    }
    out
}

/// True iff `Im F(z) ⪰ −1e-10` at every probe.
pub fn is_pick<F: MatrixFunction + ?Sized>(f: &F, probes: &[Complex64]) -> bool {
    probes.iter().all(|&z| {
        f.eval(z)
            .and_then(|m| {
                let im = (&m - m.adjoint()) * Complex64::new(0.0, -0.5);
                min_eig(&im)
            })
            .map(|v| v >= -STRUCT_TOL)
            .unwrap_or(false)
    })
}

/// True iff every eigenvalue of `F(z)` has imaginary part above 1e-9 at
/// every probe.
pub fn is_regular<F: MatrixFunction + ?Sized>(f: &F, probes: &[Complex64]) -> bool {
    probes.iter().all(|&z| {
        f.eval(z)
            .and_then(|m| eigenvalues_general(&m))
            .map(|ev| ev.iter().all(|e| e.im > REGULAR_TOL))
            .unwrap_or(false)
    })
}

/// `φ_λ(M) = (M − λ)(M − λ̄)^{−1}`, computed by solving `(M − λ̄)X = M − λ`.
pub fn phi_lambda(m: &CMatrix, lambda: Complex64) -> Result<CMatrix> {
    let n = m.nrows();
    let id = CMatrix::identity(n, n);
    let lhs = m - &id * lambda.conj();
    let rhs = m - &id * lambda;
    lhs.lu().solve(&rhs).ok_or_else(|| Error::RadiusRefinement("M − λ̄ is singular on the contour".into()))
}

fn contour_point(r: f64, t: f64) -> Result<Complex64> {
    cayley_inv(Complex64::from_polar(r, t))
}

/// Radii `1 + (r₀ − 1)·2^{−k}`, `k = 0..=MAX_SHRINKS`.
pub fn radius_schedule(r0: f64) -> Vec<f64> {
    (0..=MAX_SHRINKS).map(|k| 1.0 + (r0 - 1.0) * 0.5f64.powi(k as i32)).collect()
}

/// Base sample count on `|w| = r`: the curve passes within about `r − 1` of
/// boundary poles, so the spacing has to follow.
fn base_samples(r: f64) -> usize {
    ((32.0 / (r - 1.0)) as usize).clamp(WINDING_SAMPLES, 1 << 16)
}

fn scaled_winding<G: Fn(f64) -> Result<Complex64>>(g: G, samples: usize) -> Result<i64> {
    let mut scale = 0.0f64;
    for k in 0..32 {
        let v = g(2.0 * PI * k as f64 / 32.0)?;
        scale = scale.max(v.norm());
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::RadiusRefinement("contour values vanish or overflow".into()));
    }
    winding_of(g, 1e-12 * scale, samples)
}

/// Runs `count(r)` over the radius schedule and keeps the successful
/// results, largest radius first.
fn schedule_counts<C: Fn(f64) -> Result<i64>>(r0: f64, count: C) -> Result<(Vec<(f64, i64)>, Option<Error>)> {
    if !(r0 > 1.0 && r0.is_finite()) {
        return Err(Error::Domain(format!("contour radius must exceed 1, got {r0}")));
    }
    let mut results = Vec::new();
    let mut last_err = None;
    for r in radius_schedule(r0) {
        match count(r) {
            Ok(v) => results.push((r, v)),
            Err(e) => last_err = Some(e),
        }
    }
    Ok((results, last_err))
}

/// The count can only grow as `r` decreases towards 1 (mirror singularities
/// leave the annulus), so the value at the smallest successful radius is
/// returned, provided the next larger successful radius agrees with it.
fn over_radii<C: Fn(f64) -> Result<i64>>(r0: f64, count: C) -> Result<i64> {
    let (results, last_err) = schedule_counts(r0, count)?;
    match results.as_slice() {
        [.., (_, a), (_, b)] if a == b => Ok(*b),
        [.., (ra, a), (rb, b)] => Err(Error::RadiusRefinement(format!(
            "windings {a} at r = {ra} and {b} at r = {rb} disagree after {MAX_SHRINKS} shrinks"
        ))),
        _ => Err(Error::RadiusRefinement(format!(
            "fewer than two radii succeeded: {}",
            last_err.map(|e| e.to_string()).unwrap_or_default()
        ))),
    }
}

/// `t ↦ cayley⁻¹(e^{it})` written as a real point, rotated slightly so the
/// samples never hit `w = 1`.
fn unit_circle_point(t: f64) -> f64 {
    const OFFSET: f64 = 1e-3 * std::f64::consts::SQRT_2;
    -1.0 / ((t + OFFSET) / 2.0).tan()
}

fn check_winding_input<F: MatrixFunction + ?Sized>(f: &F, lambda: Complex64) -> Result<()> {
    if !(lambda.im > 0.0) {
        return Err(Error::Domain(format!("λ must lie in the upper half plane, got {lambda}")));
    }
    if !is_regular(f, &default_probes()) {
        return Err(Error::Contract("function is not regular at the probe set".into()));
    }
    Ok(())
}

/// Winding number of `t ↦ det φ_λ(F(cayley⁻¹(r e^{it})))`.
///
/// On `|w| = 1` the determinant is unimodular, so that circle is used as the
/// deciding contour; the radius schedule supplies lower bounds that it must
/// respect. Without a usable boundary count the schedule rule applies.
pub fn multiplicity_winding<F: MatrixFunction + ?Sized>(f: &F, lambda: Complex64, r: f64) -> Result<usize> {
    check_winding_input(f, lambda)?;
    let count = |r: f64| scaled_winding(|t| Ok(phi_lambda(&f.eval(contour_point(r, t)?)?, lambda)?.determinant()), base_samples(r));
    let boundary = scaled_winding(
        |t| Ok(phi_lambda(&f.eval(Complex64::new(unit_circle_point(t), 0.0))?, lambda)?.determinant()),
        1 << 16,
    );
    let w = match boundary {
        Ok(b) => {
            let (results, _) = schedule_counts(r, count)?;
            if let Some((rr, v)) = results.iter().find(|(_, v)| *v > b) {
                return Err(Error::RadiusRefinement(format!("winding {v} at r = {rr} exceeds the unit-circle count {b}")));
            }
            b
        }
        Err(_) => over_radii(r, count)?,
    };
    usize::try_from(w).map_err(|_| Error::RadiusRefinement(format!("negative multiplicity winding {w}")))
}

/// Negated winding number of `t ↦ det(F(cayley⁻¹(r e^{it})) − λ̄)`.
pub fn degree_winding<F: MatrixFunction + ?Sized>(f: &F, lambda: Complex64, r: f64) -> Result<usize> {
    check_winding_input(f, lambda)?;
    let n = f.dim();
    let w = over_radii(r, |r| {
        scaled_winding(|t| {
            let m = f.eval(contour_point(r, t)?)? - CMatrix::identity(n, n) * lambda.conj();
            Ok(m.determinant())
        }, base_samples(r))
        .map(|w| -w)
    })?;
    usize::try_from(w).map_err(|_| Error::RadiusRefinement(format!("negative degree winding {w}")))
}

/// `φ_ω(z) = (z − ω)/(z − ω̄)`.
pub fn blaschke_factor(omega: Complex64, z: Complex64) -> Result<Complex64> {
    let d = z - omega.conj();
    if d.norm() == 0.0 {
        return Err(Error::Pole(z));
    }
    Ok((z - omega) / d)
}

/// `u · Π_j (φ_{ω_j} P_j + (1 − P_j))`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlaschkePotapovProduct {
    pub n: usize,
    pub u: CMatrix,
    pub factors: Vec<(Complex64, CMatrix)>,
}

impl BlaschkePotapovProduct {
    pub fn new(u: CMatrix, factors: Vec<(Complex64, CMatrix)>) -> Result<Self> {
        let n = u.nrows();
        if n == 0 || u.ncols() != n {
            return Err(Error::Domain("u must be a nonempty square matrix".into()));
        }
        let id = CMatrix::identity(n, n);
        if frob(&(u.adjoint() * &u - &id)) > STRUCT_TOL {
            return Err(Error::Domain("u is not unitary".into()));
        }
        for (j, (w, p)) in factors.iter().enumerate() {
            if !(w.im > 0.0) {
                return Err(Error::Domain(format!("ω_{j} = {w} is not in the upper half plane")));
            }
            if p.nrows() != n || p.ncols() != n || frob(&(p * p - p)) > STRUCT_TOL || frob(&(p - p.adjoint())) > STRUCT_TOL {
                return Err(Error::Domain(format!("P_{j} is not an orthogonal projection")));
            }
        }
        Ok(BlaschkePotapovProduct { n, u, factors })
    }

    /// Rank-one projection onto `v`.
    pub fn projection(v: &[Complex64]) -> Result<CMatrix> {
        let n = v.len();
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if norm2 == 0.0 {
            return Err(Error::Domain("projection onto the zero vector".into()));
        }
        Ok(CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj() / norm2))
    }

    /// The factorization of `φ_λ ∘ F` for the worked 2×2 example.
    pub fn worked_example(lambda: Complex64) -> Result<Self> {
        let one_l = ONE - lambda;
        if one_l.norm() == 0.0 || !(lambda.im > 0.0) {
            return Err(Error::Domain(format!("λ = {lambda} must be in ℂ₊")));
        }
        let omega = lambda + ONE / one_l;
        let u = CMatrix::from_row_slice(2, 2, &[one_l / one_l.conj(), ZERO, ZERO, ONE]);
        let a = 1.0 / one_l.norm_sqr();
        let p = CMatrix::from_row_slice(2, 2, &[Complex64::new(a, 0.0), -ONE / one_l, -ONE / one_l.conj(), ONE]) * Complex64::new(1.0 / (1.0 + a), 0.0);
        BlaschkePotapovProduct::new(u, vec![(omega, hermitian_part(&p))])
    }

    /// `Σ rk P_j`.
    pub fn degree(&self) -> usize {
        self.factors.iter().map(|(_, p)| numerical_rank(p, RANK_TOL)).sum()
    }
}

impl MatrixFunction for BlaschkePotapovProduct {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, z: Complex64) -> Result<CMatrix> {
        let id = CMatrix::identity(self.n, self.n);
        let mut m = self.u.clone();
        for (w, p) in &self.factors {
            let b = blaschke_factor(*w, z)?;
            m *= p * b + (&id - p);
        }
        Ok(m)
    }
}

/// `z ↦ (az + b)/(cz + d)` with real entries and `ad − bc = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusTransform {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl MobiusTransform {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if (det - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("ad − bc = {det}, expected 1")));
        }
        Ok(MobiusTransform { a, b, c, d })
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let den = z * self.c + self.d;
        if den.norm() == 0.0 {
            return Err(Error::Pole(z));
        }
        Ok((z * self.a + self.b) / den)
    }

    /// The same map written as a scalar rational Pick function.
    pub fn to_pick(&self) -> RationalPickFunction {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        if c == 0.0 {
            RationalPickFunction::scalar(a * b, a * a, &[]).expect("valid")
        } else {
            RationalPickFunction::scalar(a / c, 0.0, &[(-d / c, 1.0 / (c * c))]).expect("valid")
        }
    }
}

/// `f(M) = c + dM + Σ a_j (λ_j − M)^{−1}` for a scalar rational Pick `f`.
pub fn scalar_apply(f: &RationalPickFunction, m: &CMatrix) -> Result<CMatrix> {
    if !f.is_scalar() {
        return Err(Error::Contract("scalar functional calculus needs a scalar function".into()));
    }
    let n = m.nrows();
    let id = CMatrix::identity(n, n);
    let mut out = &id * f.c[(0, 0)] + m * f.d[(0, 0)];
    for (l, a) in &f.poles {
        let res = (&id * Complex64::new(*l, 0.0) - m)
            .try_inverse()
            .ok_or_else(|| Error::Pole(Complex64::new(*l, 0.0)))?;
        out += res * a[(0, 0)];
    }
    Ok(out)
}

/// `z ↦ f(F(g(z)))`.
#[derive(Debug, Clone)]
pub struct Composition {
    pub f: RationalPickFunction,
    pub inner: RationalPickFunction,
    pub g: RationalPickFunction,
}

impl MatrixFunction for Composition {
    fn dim(&self) -> usize {
        self.inner.n
    }

    fn eval(&self, z: Complex64) -> Result<CMatrix> {
        let gz = self.g.eval(z)?[(0, 0)];
        scalar_apply(&self.f, &self.inner.eval(gz)?)
    }
}

/// Builds `f ∘ F ∘ g` for scalar `f`, `g`; all three must be regular.
pub fn compose_scalar(f: &RationalPickFunction, inner: &RationalPickFunction, g: &RationalPickFunction) -> Result<Composition> {
    if !f.is_scalar() || !g.is_scalar() {
        return Err(Error::Contract("outer and inner maps must be scalar".into()));
    }
    let probes = default_probes();
    for (name, h) in [("f", f), ("F", inner), ("g", g)] {
        if !is_regular(h, &probes) {
            return Err(Error::Contract(format!("{name} is not regular")));
        }
    }
    Ok(Composition { f: f.clone(), inner: inner.clone(), g: g.clone() })
}

/// Eigenvalue branches of `F_*` on `xs`; rows at poles are `None`.
pub fn eigencurves(f: &RationalPickFunction, xs: &[f64]) -> Vec<Option<Vec<f64>>> {
    xs.iter().map(|&x| f.boundary_eigenvalues(x).ok()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn evaluation_examples() {
        let f = RationalPickFunction::worked_example();
        let v = f.eval(I).unwrap();
        let want = CMatrix::from_row_slice(2, 2, &[ONE, ONE, ONE, I]);
        assert!(frob(&(v - want)) < 1e-15);
        let eta = RationalPickFunction::scalar(0.0, 0.0, &[(0.0, 1.0)]).unwrap();
        assert!((eta.eval(I).unwrap()[(0, 0)] - I).norm() < 1e-15);
        assert!(matches!(eta.eval(ZERO), Err(Error::Pole(_))));
        let k = RationalPickFunction::scalar(5.0, 0.0, &[]).unwrap();
        assert_eq!(k.eval(c(3.0, 2.0)).unwrap()[(0, 0)], c(5.0, 0.0));
    }

    #[test]
    fn validation() {
        let m = |x: f64| CMatrix::from_element(1, 1, c(x, 0.0));
        assert!(RationalPickFunction::new(m(0.0), m(-1.0), vec![]).is_err());
        assert!(RationalPickFunction::new(m(0.0), m(0.0), vec![(1.0, m(1.0)), (1.0, m(2.0))]).is_err());
        let skew = CMatrix::from_row_slice(2, 2, &[ZERO, I, I, ZERO]);
        assert!(RationalPickFunction::new(skew, CMatrix::zeros(2, 2), vec![]).is_err());
        assert!(MobiusTransform::new(1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn pick_and_regularity() {
        let probes = default_probes();
        assert_eq!(probes.len(), 200);
        let f = RationalPickFunction::worked_example();
        assert!(is_pick(&f, &probes) && is_regular(&f, &probes));
        let z = c(0.4, 1.7);
        let v = f.eval(z).unwrap();
        let im = (&v - v.adjoint()) * c(0.0, -0.5);
        assert!((im[(1, 1)].re - 1.7).abs() < 1e-15 && im[(0, 0)].norm() < 1e-15);
        assert!(!is_pick(&f.negated(), &probes));
        assert!(!is_regular(&RationalPickFunction::scalar(5.0, 0.0, &[]).unwrap(), &probes));
        assert!(is_regular(&RationalPickFunction::identity(), &probes));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let g = RationalPickFunction::random_regular(&mut rng, 3, 2);
            assert!(is_pick(&g, &probes) && is_regular(&g, &probes));
        }
    }

    #[test]
    fn degree_rank_examples() {
        assert_eq!(RationalPickFunction::worked_example().degree_rank(), 1);
        assert_eq!(MobiusTransform::new(2.0, 1.0, 3.0, 2.0).unwrap().to_pick().degree_rank(), 1);
        assert_eq!(MobiusTransform::new(2.0, 1.0, 0.0, 0.5).unwrap().to_pick().degree_rank(), 1);
        let f = RationalPickFunction::scalar(0.3, 0.5, &[(-1.0, 1.0), (0.5, 2.0), (3.0, 0.1)]).unwrap();
        assert_eq!(f.degree_rank(), 4);
        let f = RationalPickFunction::scalar(0.3, 0.0, &[(-1.0, 1.0), (0.5, 2.0)]).unwrap();
        assert_eq!(f.degree_rank(), 2);
    }

    #[test]
    fn windings_of_examples() {
        let f = RationalPickFunction::worked_example();
        assert_eq!(multiplicity_winding(&f, I, 1.5).unwrap(), 1);
        assert_eq!(degree_winding(&f, I, 1.5).unwrap(), 1);
        let id = RationalPickFunction::identity();
        assert_eq!(multiplicity_winding(&id, I, DEFAULT_RADIUS).unwrap(), 1);
        assert_eq!(degree_winding(&id, c(1.0, 2.0), DEFAULT_RADIUS).unwrap(), 1);
        let k = RationalPickFunction::scalar(5.0, 0.0, &[]).unwrap();
        assert!(matches!(multiplicity_winding(&k, I, 1.5), Err(Error::Contract(_))));
        assert!(degree_winding(&f, I, 0.9).is_err());
    }

    #[test]
    fn identity_curve_is_the_circle() {
        // φ_i(cayley⁻¹(w)) = w.
        for t in [0.1, 1.0, 2.5, 4.0] {
            let w = Complex64::from_polar(1.5, t);
            let z = contour_point(1.5, t).unwrap();
            let m = CMatrix::from_element(1, 1, z);
            assert!((phi_lambda(&m, I).unwrap()[(0, 0)] - w).norm() < 1e-13);
        }
    }

    #[test]
    fn random_degree_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..12 {
            let n = rng.gen_range(1..=3);
            let p = rng.gen_range(0..=3);
            let f = RationalPickFunction::random_regular(&mut rng, n, p);
            let d = f.degree_rank();
            for lambda in [I, c(1.0, 2.0)] {
                assert_eq!(multiplicity_winding(&f, lambda, DEFAULT_RADIUS).unwrap(), d);
                assert_eq!(degree_winding(&f, lambda, DEFAULT_RADIUS).unwrap(), d);
            }
        }
    }

    #[test]
    fn blaschke_products() {
        let v = [c(1.0, 0.0), c(0.5, -0.5)];
        let p = BlaschkePotapovProduct::projection(&v).unwrap();
        let omega = c(0.3, 1.2);
        let b = BlaschkePotapovProduct::new(CMatrix::identity(2, 2), vec![(omega, p)]).unwrap();
        assert_eq!(b.degree(), 1);
        let z = c(-0.7, 0.4);
        assert!((b.eval(z).unwrap().determinant() - blaschke_factor(omega, z).unwrap()).norm() < 1e-14);
        let m = b.eval(c(2.0, 0.0)).unwrap();
        assert!(frob(&(m.adjoint() * &m - CMatrix::identity(2, 2))) < 1e-13);
        assert!(matches!(b.eval(omega.conj()), Err(Error::Pole(_))));
        let empty = BlaschkePotapovProduct::new(CMatrix::identity(3, 3), vec![]).unwrap();
        assert_eq!(empty.degree(), 0);
    }

    #[test]
    fn worked_factorization() {
        let f = RationalPickFunction::worked_example();
        for lambda in [I, c(0.5, 2.0)] {
            let b = BlaschkePotapovProduct::worked_example(lambda).unwrap();
            assert_eq!(b.degree(), 1);
            for k in 0..10 {
                let z = c(-3.0 + 0.6 * k as f64, 0.2 + 0.3 * k as f64);
                let lhs = phi_lambda(&f.eval(z).unwrap(), lambda).unwrap();
                assert!(frob(&(lhs - b.eval(z).unwrap())) < 1e-8);
            }
        }
    }

    #[test]
    fn mobius_as_pick() {
        for m in [MobiusTransform::new(2.0, 1.0, 3.0, 2.0).unwrap(), MobiusTransform::new(2.0, -1.0, 0.0, 0.5).unwrap()] {
            let p = m.to_pick();
            for z in [c(0.3, 0.7), c(-4.0, 0.01)] {
                assert!((m.eval(z).unwrap() - p.eval(z).unwrap()[(0, 0)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn compositions() {
        let f = RationalPickFunction::worked_example();
        let id = RationalPickFunction::identity();
        let comp = compose_scalar(&id, &f, &id).unwrap();
        let z = c(0.2, 0.9);
        assert!(frob(&(comp.eval(z).unwrap() - f.eval(z).unwrap())) < 1e-14);
        let m1 = MobiusTransform::new(2.0, 1.0, 3.0, 2.0).unwrap().to_pick();
        let m2 = MobiusTransform::new(1.0, -2.0, 1.0, -1.0).unwrap().to_pick();
        let comp = compose_scalar(&m1, &f, &m2).unwrap();
        assert!(is_pick(&comp, &default_probes()));
        assert_eq!(multiplicity_winding(&comp, I, DEFAULT_RADIUS).unwrap(), 1);
        let k = RationalPickFunction::scalar(5.0, 0.0, &[]).unwrap();
        assert!(compose_scalar(&k, &f, &id).is_err());
    }

    #[test]
    fn boundary_unitaries() {
        let f = RationalPickFunction::worked_example();
        let id = CMatrix::identity(2, 2);
        assert!(frob(&(f.boundary_unitary(0.0, 1.3).unwrap() - &id)) < 1e-14);
        let us = f.boundary_unitary(0.4, 1.3).unwrap();
        let ut = f.boundary_unitary(1.1, 1.3).unwrap();
        let ust = f.boundary_unitary(1.5, 1.3).unwrap();
        assert!(frob(&(&us * &ut - ust)) < 1e-10);
        assert!(frob(&(us.adjoint() * &us - id)) < 1e-10);
        let u = RationalPickFunction::identity().boundary_unitary(PI, 2.0).unwrap();
        assert!((u[(0, 0)] - ONE).norm() < 1e-12);
    }

    #[test]
    fn eigencurve_branches() {
        let f = RationalPickFunction::worked_example();
        let xs: Vec<f64> = (0..15).map(|k| -7.0 + k as f64).collect();
        for (x, ev) in xs.iter().zip(eigencurves(&f, &xs)) {
            let ev = ev.unwrap();
            let s = (x * x - 2.0 * x + 5.0).sqrt();
            assert!((ev[0] - (x + 1.0 - s) / 2.0).abs() < 1e-12);
            assert!((ev[1] - (x + 1.0 + s) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = RationalPickFunction::random_regular(&mut rng, 2, 2);
        let g = RationalPickFunction::from_json_str(&f.to_json().unwrap()).unwrap();
        assert_eq!(f, g);
        let s = r#"{"dim": 2, "C": [[[1,0],[1,0]],[[1,0],[0,0]]], "D": [[[0,0],[0,0]],[[0,0],[1,0]]], "poles": []}"#;
        assert_eq!(RationalPickFunction::from_json_str(s).unwrap(), RationalPickFunction::worked_example());
        assert!(matches!(RationalPickFunction::from_json_str("{\"dim\": 2, \"C\": [[[1,0]]]}"), Err(Error::Parse(_))));
    }
}
