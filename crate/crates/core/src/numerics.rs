//! Quadrature on the real line, winding numbers of sampled closed curves and a
//! Jacobi eigensolver for small Hermitian matrices.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::CMatrix;

/// Environment variable capping the number of adaptive panels.
pub const MAX_PANELS_ENV: &str = "HARDYRP_MAX_PANELS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Compactification {
    Identity,
    Tangent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub map: Compactification,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        let mut max_subdivisions = 1 << 14;
        if let Some(cap) = std::env::var(MAX_PANELS_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
        {
            max_subdivisions = cap.max(8);
        }
        QuadratureConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions,
            map: Compactification::Tangent,
        }
    }
}

impl QuadratureConfig {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        QuadratureConfig {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::Contract("tolerances must be positive".into()));
        }
        if self.max_subdivisions < 8 {
            return Err(Error::Contract("max subdivisions must be at least 8".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VecQuadResult {
    pub values: Vec<Complex64>,
    pub error: f64,
    pub panels: usize,
}

// Gauss-Kronrod 7/15 abscissae and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    a: f64,
    b: f64,
    est: Vec<Complex64>,
    err: f64,
    frozen: bool,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // Frozen panels sink to the bottom of the heap.
        match (self.frozen, other.frozen) {
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => self.err.total_cmp(&other.err),
        }
    }
}

struct Mapped<'a, F: FnMut(f64, &mut [Complex64])> {
    f: &'a mut F,
    tangent: bool,
    buf: Vec<Complex64>,
}

impl<F: FnMut(f64, &mut [Complex64])> Mapped<'_, F> {
    fn eval(&mut self, s: f64, out: &mut [Complex64]) -> Result<()> {
        let (x, jac) = if self.tangent {
            let x = s.tan();
            (x, 1.0 + x * x)
        } else {
            (s, 1.0)
        };
        for v in self.buf.iter_mut() {
            *v = Complex64::new(0.0, 0.0);
        }
        (self.f)(x, &mut self.buf);
        for (o, v) in out.iter_mut().zip(self.buf.iter()) {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NanIntegrand { x });
            }
            *o = *v * jac;
        }
        Ok(())
    }
}

fn gk15<F: FnMut(f64, &mut [Complex64])>(
    m: &mut Mapped<'_, F>,
    a: f64,
    b: f64,
    dim: usize,
    tmp: &mut [Complex64],
) -> Result<(Vec<Complex64>, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = vec![Complex64::new(0.0, 0.0); dim];
    let mut g = vec![Complex64::new(0.0, 0.0); dim];
    m.eval(c, tmp)?;
    for i in 0..dim {
        k[i] += tmp[i] * WGK[7];
        g[i] += tmp[i] * WG[3];
    }
    for j in 0..7 {
        let dx = h * XGK[j];
        for &x in &[c - dx, c + dx] {
            m.eval(x, tmp)?;
            for i in 0..dim {
                k[i] += tmp[i] * WGK[j];
                if j % 2 == 1 {
                    g[i] += tmp[i] * WG[j / 2];
                }
            }
        }
    }
    let mut err: f64 = 0.0;
    for i in 0..dim {
        k[i] *= h;
        g[i] *= h;
        err = err.max((k[i] - g[i]).norm());
    }
    Ok((k, err))
}

/// Adaptive vector-valued integral of `f` over `[a, b]`. Either end may be
/// infinite, in which case the tangent substitution is forced. `breaks` lists
/// interior points where the integrand is singular or kinked.
pub fn integrate_vec<F>(
    mut f: F,
    dim: usize,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<VecQuadResult>
where
    F: FnMut(f64, &mut [Complex64]),
{
    cfg.validate()?;
    if a.is_nan() || b.is_nan() {
        return Err(Error::Domain("integration bounds are NaN".into()));
    }
    if a == b {
        return Ok(VecQuadResult {
            values: vec![Complex64::new(0.0, 0.0); dim],
            error: 0.0,
            panels: 0,
        });
    }
    if a > b {
        let mut r = integrate_vec(f, dim, b, a, breaks, cfg)?;
        for v in r.values.iter_mut() {
            *v = -*v;
        }
        return Ok(r);
    }
    let tangent = cfg.map == Compactification::Tangent || a.is_infinite() || b.is_infinite();
    let to_s = |x: f64| if tangent { x.atan() } else { x };
    let (sa, sb) = if tangent {
        (
            if a == f64::NEG_INFINITY { -FRAC_PI_2 } else { a.atan() },
            if b == f64::INFINITY { FRAC_PI_2 } else { b.atan() },
        )
    } else {
        (a, b)
    };
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > a && *x < b)
        .map(to_s)
        .collect();
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup();
    let mut nodes = vec![sa];
    nodes.extend(cuts);
    nodes.push(sb);

    let mut mapped = Mapped {
        f: &mut f,
        tangent,
        buf: vec![Complex64::new(0.0, 0.0); dim],
    };
    let mut tmp = vec![Complex64::new(0.0, 0.0); dim];
    let mut heap = BinaryHeap::new();
    let mut total = vec![Complex64::new(0.0, 0.0); dim];
    let mut total_err = 0.0;
    for w in nodes.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (est, err) = gk15(&mut mapped, w[0], w[1], dim, &mut tmp)?;
        for i in 0..dim {
            total[i] += est[i];
        }
        total_err += err;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            est,
            err,
            frozen: false,
        });
    }
    let mut panels = heap.len();
    loop {
        let scale = total.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let tol = cfg.abs_tol.max(cfg.rel_tol * scale);
        if total_err <= tol {
            break;
        }
        let worst = match heap.peek() {
            Some(p) if !p.frozen => heap.pop().unwrap(),
            _ => break,
        };
        if panels >= cfg.max_subdivisions {
            heap.push(worst);
            let partial = total.iter().copied().max_by(|x, y| x.norm().total_cmp(&y.norm()));
            return Err(Error::NonConvergence {
                partial: partial.unwrap_or_default(),
                error: total_err,
                panels,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        let width_floor = 64.0 * f64::EPSILON * (worst.a.abs() + worst.b.abs()).max(1e-300);
        if mid <= worst.a || mid >= worst.b || worst.b - worst.a < width_floor {
            heap.push(Panel {
                frozen: true,
                ..worst
            });
            continue;
        }
        let (l, el) = gk15(&mut mapped, worst.a, mid, dim, &mut tmp)?;
        let (r, er) = gk15(&mut mapped, mid, worst.b, dim, &mut tmp)?;
        for i in 0..dim {
            total[i] += l[i] + r[i] - worst.est[i];
        }
        total_err += el + er - worst.err;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            est: l,
            err: el,
            frozen: false,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            est: r,
            err: er,
            frozen: false,
        });
        panels += 1;
    }
    // Re-sum in a fixed order so the result does not depend on heap layout.
    let mut all: Vec<Panel> = heap.into_vec();
    all.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut values = vec![Complex64::new(0.0, 0.0); dim];
    let mut error = 0.0;
    for p in &all {
        for i in 0..dim {
            values[i] += p.est[i];
        }
        error += p.err;
    }
    Ok(VecQuadResult {
        values,
        error,
        panels,
    })
}

/// Complex integral of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    let r = integrate_vec(|x, out| out[0] = f(x), 1, a, b, breaks, cfg)?;
    Ok(QuadResult {
        value: r.values[0],
        error: r.error,
        panels: r.panels,
    })
}

/// Real integral of `f` over `[a, b]`; returns value and error estimate.
pub fn integrate_real<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let r = integrate(|x| Complex64::new(f(x), 0.0), a, b, breaks, cfg)?;
    Ok((r.value.re, r.error))
}

/// Integral of `f` over the whole real line, splitting panels at the
/// caller-declared singular points.
pub fn integrate_line<F: Fn(f64) -> Complex64>(
    f: F,
    singular: &[f64],
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    integrate(f, f64::NEG_INFINITY, f64::INFINITY, singular, cfg)
}

/// Wynn epsilon extrapolation of a sequence of partial sums.
pub fn wynn_epsilon(s: &[Complex64]) -> (Complex64, f64) {
    let n = s.len();
    if n < 3 {
        let last = s.last().copied().unwrap_or_default();
        let err = if n == 2 { (s[1] - s[0]).norm() } else { f64::INFINITY };
        return (last, err);
    }
    let mut prev = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut cur: Vec<Complex64> = s.to_vec();
    let mut best = s[n - 1];
    let mut best_err = (s[n - 1] - s[n - 2]).norm();
    let mut last_even = s[n - 1];
    let mut k = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for j in 0..cur.len() - 1 {
            let d = cur[j + 1] - cur[j];
            if d.norm() < 1e-300 {
                return (best, best_err);
            }
            next.push(prev[j + 1] + d.inv());
        }
        k += 1;
        prev = cur;
        cur = next;
        if k % 2 == 0 {
            let est = *cur.last().unwrap();
            let err = (est - last_even).norm();
            if err < best_err {
                best = est;
                best_err = err;
            }
            last_even = est;
        }
    }
    (best, best_err)
}

/// `∫_0^∞ e^{-itx} f(x) dx` for `f` decaying at least like `1/x`. The
/// oscillatory tail is integrated over half periods and the partial sums are
/// extrapolated with the epsilon algorithm.
pub fn fourier_half_line<F: Fn(f64) -> Complex64>(
    f: F,
    t: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    if t == 0.0 {
        return integrate(&f, 0.0, f64::INFINITY, breaks, cfg);
    }
    let half = PI / t.abs();
    let last_break = breaks.iter().copied().filter(|x| x.is_finite()).fold(0.0, f64::max);
    let head_end = half * ((last_break.max(4.0) / half).ceil() + 1.0);
    let g = |x: f64| Complex64::from_polar(1.0, -t * x) * f(x);
    let local = QuadratureConfig {
        map: Compactification::Identity,
        ..*cfg
    };
    let head = integrate(g, 0.0, head_end, breaks, &local)?;
    let mut panels = head.panels;
    let mut sums = Vec::new();
    let mut acc = head.value;
    let mut quad_err = head.error;
    let mut small_run = 0;
    for k in 0..64 {
        let lo = head_end + k as f64 * half;
        let piece = integrate(g, lo, lo + half, &[], &local)?;
        panels += piece.panels;
        quad_err += piece.error;
        acc += piece.value;
        sums.push(acc);
        if piece.value.norm() < 1e-3 * cfg.abs_tol {
            small_run += 1;
            if small_run >= 3 {
                return Ok(QuadResult {
                    value: acc,
                    error: quad_err,
                    panels,
                });
            }
        } else {
            small_run = 0;
        }
    }
    let (value, extrap_err) = wynn_epsilon(&sums);
    Ok(QuadResult {
        value,
        error: quad_err + extrap_err,
        panels,
    })
}

/// `∫_ℝ e^{-itx} f(x) dx`.
pub fn fourier_line<F: Fn(f64) -> Complex64>(
    f: F,
    t: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    let pos: Vec<f64> = breaks.iter().copied().filter(|x| *x > 0.0).collect();
    let neg: Vec<f64> = breaks.iter().copied().filter(|x| *x < 0.0).map(|x| -x).collect();
    let r = fourier_half_line(&f, t, &pos, cfg)?;
    let l = fourier_half_line(|x| f(-x), -t, &neg, cfg)?;
    Ok(QuadResult {
        value: r.value + l.value,
        error: r.error + l.error,
        panels: r.panels + l.panels,
    })
}

/// Samples of a closed curve in the plane, bounded away from the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSample {
    pub points: Vec<Complex64>,
    pub exclusion_radius: f64,
}

impl CurveSample {
    pub fn new(points: Vec<Complex64>, exclusion_radius: f64) -> Self {
        CurveSample {
            points,
            exclusion_radius,
        }
    }

    pub fn min_modulus(&self) -> f64 {
        self.points.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
    }

    /// The curve traversed backwards.
    pub fn reversed(&self) -> Self {
        let mut p = self.points.clone();
        p.reverse();
        CurveSample::new(p, self.exclusion_radius)
    }

    /// This curve followed by `other`; both must start at the same point.
    pub fn concat(&self, other: &CurveSample) -> Self {
        let mut p = self.points.clone();
        p.extend(other.points.iter().skip(1));
        CurveSample::new(p, self.exclusion_radius.min(other.exclusion_radius))
    }
}

/// Winding number around 0 by branch-tracked argument summation.
pub fn winding_number(curve: &CurveSample) -> Result<i64> {
    let pts = &curve.points;
    if pts.len() < 3 {
        return Err(Error::Contract("a closed curve needs at least 3 samples".into()));
    }
    for (i, z) in pts.iter().enumerate() {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Domain(format!("curve sample {i} is not finite")));
        }
        if z.norm() <= curve.exclusion_radius {
            return Err(Error::CurveTooClose {
                index: i,
                radius: curve.exclusion_radius,
            });
        }
    }
    let first = pts[0];
    let last = pts[pts.len() - 1];
    let scale = first.norm().max(last.norm());
    let gap = (first - last).norm();
    if gap > 1e-9 * scale {
        return Err(Error::CurveNotClosed { gap });
    }
    let mut total = 0.0;
    for i in 1..pts.len() {
        let step = (pts[i] / pts[i - 1]).arg();
        if step.abs() >= FRAC_PI_2 {
            return Err(Error::UnderSampled {
                index: i,
                jump: step.abs(),
            });
        }
        total += step;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

/// Samples `t ↦ f(t)` on `[0, 2π]` with local dyadic refinement until every
/// argument step is below π/4, then counts windings around 0.
pub fn winding_of<F>(f: F, exclusion_radius: f64, base_samples: usize) -> Result<i64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    const MAX_DEPTH: u32 = 40;
    let n = base_samples.max(8);
    let h = 2.0 * PI / n as f64;
    let mut pts = Vec::with_capacity(2 * n);
    let mut prev = f(0.0)?;
    let start = prev;
    pts.push(prev);
    for k in 1..=n {
        let t1 = k as f64 * h;
        let z1 = if k == n { start } else { f(t1)? };
        refine(&f, (k - 1) as f64 * h, t1, prev, z1, 0, MAX_DEPTH, &mut pts)?;
        prev = z1;
    }
    winding_number(&CurveSample::new(pts, exclusion_radius))
}

#[allow(clippy::too_many_arguments)]
fn refine<F>(
    f: &F,
    t0: f64,
    t1: f64,
    z0: Complex64,
    z1: Complex64,
    depth: u32,
    max_depth: u32,
    out: &mut Vec<Complex64>,
) -> Result<()>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let step = (z1 / z0).arg().abs();
    if step < PI / 4.0 || depth >= max_depth {
        out.push(z1);
        return Ok(());
    }
    let tm = 0.5 * (t0 + t1);
    let zm = f(tm)?;
    refine(f, t0, tm, z0, zm, depth + 1, max_depth, out)?;
    refine(f, tm, t1, zm, z1, depth + 1, max_depth, out)
}

fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian part `(A + A*)/2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Eigen-decomposition `A = U diag(λ) U*` of a Hermitian matrix by cyclic
/// complex Jacobi rotations. Eigenvalues are returned in ascending order.
pub fn eig_hermitian(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Contract("eig_hermitian needs a square matrix".into()));
    }
    let norm = frobenius(a);
    let skew = frobenius(&(a - a.adjoint()));
    if skew > 1e-10 * norm.max(1.0) {
        return Err(Error::Contract(format!(
            "matrix is not Hermitian (‖A − A*‖ = {skew:e})"
        )));
    }
    let mut m = hermitian_part(a);
    let mut v = CMatrix::identity(n, n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-16 * norm.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let g = apq.norm();
                if g <= 1e-300 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let zeta = (aqq - app) / (2.0 * g);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let e = apq / g;
                // J restricted to (p, q): [[c, s], [-s·ē, c·ē]].
                let jpp = Complex64::new(c, 0.0);
                let jpq = Complex64::new(s, 0.0);
                let jqp = -e.conj() * s;
                let jqq = e.conj() * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * jpp + mkq * jqp;
                    m[(k, q)] = mkp * jpq + mkq * jqq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = jpp.conj() * mpk + jqp.conj() * mqk;
                    m[(q, k)] = jpq.conj() * mpk + jqq.conj() * mqk;
                }
                m[(p, q)] = Complex64::new(0.0, 0.0);
                m[(q, p)] = Complex64::new(0.0, 0.0);
                m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let vals: Vec<f64> = order.iter().map(|&i| m[(i, i)].re).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok((vals, vecs))
}

/// Eigenvalues of a general complex matrix via the Schur form, sorted by
/// ascending real part then ascending imaginary part.
pub fn eigenvalues_general(a: &CMatrix) -> Result<Vec<Complex64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::Contract("eigenvalues need a square matrix".into()));
    }
    if a.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    let schur = nalgebra::Schur::try_new(a.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Contract("Schur iteration did not converge".into()))?;
    let ev = schur
        .eigenvalues()
        .ok_or_else(|| Error::Contract("Schur form is not triangular".into()))?;
    let mut out: Vec<Complex64> = ev.iter().copied().collect();
    out.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(out)
}

/// Numerical rank: singular values above `rel_tol` times the largest.
pub fn numerical_rank(a: &CMatrix, rel_tol: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Applies a real function to a Hermitian matrix through its eigenbasis.
pub fn hermitian_function<G: Fn(f64) -> Complex64>(a: &CMatrix, g: G) -> Result<CMatrix> {
    let (vals, u) = eig_hermitian(a)?;
    let n = vals.len();
    let d = CMatrix::from_fn(n, n, |i, j| if i == j { g(vals[i]) } else { Complex64::new(0.0, 0.0) });
    Ok(&u * d * u.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;

    const CATALAN: f64 = 0.915_965_594_177_219_0;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lorentzian_integrates_to_pi() {
        let r = integrate_line(|p| c(1.0 / (1.0 + p * p), 0.0), &[], &QuadratureConfig::default()).unwrap();
        assert!((r.value.re - PI).abs() < 1e-10);
    }

    #[test]
    fn log_weight_gives_four_catalan() {
        let f = |p: f64| c(p.abs().ln().abs() / (1.0 + p * p), 0.0);
        let cfg = QuadratureConfig::default();
        let r = integrate_line(f, &[0.0, -1.0, 1.0], &cfg).unwrap();
        let exact = 4.0 * CATALAN;
        assert!((r.value.re - exact).abs() <= cfg.abs_tol.max(cfg.rel_tol * exact));
        let tight = QuadratureConfig::with_tol(1e-14, 1e-13);
        let r = integrate_line(f, &[0.0, -1.0, 1.0], &tight).unwrap();
        assert!((r.value.re - exact).abs() < 1e-12, "{}", r.value.re);
    }

    #[test]
    fn odd_integrand_vanishes() {
        let r = integrate_line(|p| c(p / (1.0 + p * p).powi(2), 0.0), &[], &QuadratureConfig::default()).unwrap();
        assert!(r.value.norm() < 1e-10);
    }

    #[test]
    fn nan_is_reported() {
        let e = integrate_line(|_| c(f64::NAN, 0.0), &[], &QuadratureConfig::default()).unwrap_err();
        assert!(matches!(e, Error::NanIntegrand { .. }));
    }

    #[test]
    fn panel_cap_reports_partial_value() {
        let cfg = QuadratureConfig {
            max_subdivisions: 8,
            abs_tol: 1e-15,
            rel_tol: 1e-15,
            ..Default::default()
        };
        let e = integrate_line(|p| c(p.abs().sqrt().recip() / (1.0 + p * p), 0.0), &[0.0], &cfg).unwrap_err();
        match e {
            Error::NonConvergence { partial, .. } => assert!(partial.re > 3.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fourier_of_lorentzian() {
        // ∫ e^{-itx}/(1+x²) dx = π e^{-|t|}
        let cfg = QuadratureConfig::default();
        for &t in &[0.0, 0.5, 1.0, 3.0] {
            let r = fourier_line(|x| c(1.0 / (1.0 + x * x), 0.0), t, &[], &cfg).unwrap();
            assert!((r.value - c(PI * (-t).exp(), 0.0)).norm() < 1e-9, "t={t} {}", r.value);
        }
    }

    #[test]
    fn windings_of_circles() {
        let circle = |k: f64, centre: f64, rad: f64, n: usize| {
            let pts = (0..=n)
                .map(|j| {
                    let t = 2.0 * PI * j as f64 / n as f64;
                    if j == n {
                        c(centre + rad, 0.0)
                    } else {
                        c(centre, 0.0) + Complex64::from_polar(rad, k * t)
                    }
                })
                .collect();
            CurveSample::new(pts, 1e-6)
        };
        assert_eq!(winding_number(&circle(1.0, 0.0, 1.0, 256)).unwrap(), 1);
        assert_eq!(winding_number(&circle(1.0, 2.0, 0.5, 256)).unwrap(), 0);
        assert_eq!(winding_number(&circle(3.0, 0.0, 1.0, 256)).unwrap(), 3);
        assert!(matches!(
            winding_number(&circle(3.0, 0.0, 1.0, 8)),
            Err(Error::UnderSampled { .. })
        ));
    }

    #[test]
    fn adaptive_winding_refines() {
        let w = winding_of(|t| Ok(Complex64::from_polar(1.0, 5.0 * t)), 1e-9, 8).unwrap();
        assert_eq!(w, 5);
    }

    #[test]
    fn jacobi_small_cases() {
        let (v, _) = eig_hermitian(&CMatrix::identity(2, 2)).unwrap();
        assert_eq!(v, vec![1.0, 1.0]);
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let (v, _) = eig_hermitian(&a).unwrap();
        let s5 = 5f64.sqrt();
        assert!((v[0] - (1.0 - s5) / 2.0).abs() < 1e-14);
        assert!((v[1] - (1.0 + s5) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_rejects_non_hermitian() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(eig_hermitian(&a), Err(Error::Contract(_))));
    }

    #[test]
    fn wynn_accelerates_alternating_series() {
        // Σ (-1)^k/(k+1) = ln 2
        let mut s = Vec::new();
        let mut acc = c(0.0, 0.0);
        for k in 0..20 {
            acc += c(if k % 2 == 0 { 1.0 } else { -1.0 } / (k as f64 + 1.0), 0.0);
            s.push(acc);
        }
        let (v, _) = wynn_epsilon(&s);
        assert!((v.re - 2f64.ln()).abs() < 1e-12);
    }
}
