//! The Hardy space H²(ℂ₊) through two representations: finite combinations of
//! Szegö kernels with closed-form inner products, and sampled boundary values
//! on a symmetric tangent-spaced grid.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fmt17;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Szegö kernel `Q_w(z) = (1/2π)·i/(z − w̄)`, the reproducing kernel of H².
pub fn szego(w: Complex64, z: Complex64) -> Result<Complex64> {
    if !(w.im > 0.0) {
        return Err(Error::Domain(format!("Szegö anchor {w} is not in the upper half-plane")));
    }
    let d = z - w.conj();
    if d.norm() == 0.0 {
        return Err(Error::Pole(z));
    }
    Ok(I / d / (2.0 * PI))
}

#[inline]
pub(crate) fn szego_unchecked(w: Complex64, z: Complex64) -> Complex64 {
    I / (z - w.conj()) / (2.0 * PI)
}

/// Finite linear combination `Σ c_k Q_{z_k}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KernelCombination {
    pub terms: Vec<(Complex64, Complex64)>,
}

impl KernelCombination {
    pub fn new(terms: Vec<(Complex64, Complex64)>) -> Result<Self> {
        for &(_, z) in &terms {
            if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::Domain(format!("anchor {z} is not in the open upper half-plane")));
            }
        }
        Ok(KernelCombination { terms })
    }

    pub fn kernel(w: Complex64) -> Result<Self> {
        KernelCombination::new(vec![(Complex64::new(1.0, 0.0), w)])
    }

    pub fn zero() -> Self {
        KernelCombination::default()
    }

    /// Value at `z ∈ ℂ₊ ∪ ℝ`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.terms.iter().map(|&(c, w)| c * szego_unchecked(w, z)).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        inner(self, self).re
    }

    /// Boundary values on a grid.
    pub fn to_grid(&self, grid: &BoundaryGrid) -> BoundaryGrid {
        grid.map_values(|x, _| self.eval(Complex64::new(x, 0.0)))
    }
}

/// `⟨f, g⟩ = Σ c̄_j d_k Q_{w_k}(w_j)`, antilinear in the first slot.
pub fn inner(f: &KernelCombination, g: &KernelCombination) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for &(c, a) in &f.terms {
        for &(d, b) in &g.terms {
            s += c.conj() * d * szego_unchecked(b, a);
        }
    }
    s
}

/// Samples on the midpoints of a uniform partition of `θ ∈ (−π/2, π/2)`
/// mapped by `x = tan θ`. The grid is symmetric and never contains 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryGrid {
    pub x: Vec<f64>,
    pub weights: Vec<f64>,
    pub values: Vec<Complex64>,
}

pub const DEFAULT_GRID_SIZE: usize = 4096;

impl BoundaryGrid {
    pub fn standard(n: usize) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::Domain(format!("grid size must be even and at least 2, got {n}")));
        }
        let h = PI / n as f64;
        let mut x = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for k in 0..n {
            let theta = -FRAC_PI_2 + (k as f64 + 0.5) * h;
            let xk = theta.tan();
            x.push(xk);
            weights.push(h * (1.0 + xk * xk));
        }
        // Enforce exact mirror symmetry against rounding in tan.
        for k in 0..n / 2 {
            let v = 0.5 * (x[n - 1 - k] - x[k]);
            x[k] = -v;
            x[n - 1 - k] = v;
            let w = 0.5 * (weights[k] + weights[n - 1 - k]);
            weights[k] = w;
            weights[n - 1 - k] = w;
        }
        Ok(BoundaryGrid {
            values: vec![Complex64::new(0.0, 0.0); n],
            x,
            weights,
        })
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(n: usize, f: F) -> Result<Self> {
        Ok(BoundaryGrid::standard(n)?.map_values(|x, _| f(x)))
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn map_values<F: Fn(f64, Complex64) -> Complex64>(&self, f: F) -> Self {
        BoundaryGrid {
            x: self.x.clone(),
            weights: self.weights.clone(),
            values: self.x.iter().zip(&self.values).map(|(&x, &v)| f(x, v)).collect(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.len();
        n % 2 == 0 && (0..n).all(|k| self.x[k] == -self.x[n - 1 - k] && self.x[k] != 0.0)
    }

    fn compatible(&self, other: &BoundaryGrid) -> Result<()> {
        if self.x != other.x {
            return Err(Error::Contract("boundary grids have different nodes".into()));
        }
        Ok(())
    }

    /// `∫ conj(f) g dx` by the grid rule.
    pub fn dot(&self, other: &BoundaryGrid) -> Result<Complex64> {
        self.compatible(other)?;
        Ok(self
            .weights
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(&w, (a, b))| a.conj() * b * w)
            .sum())
    }

    pub fn norm(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.values)
            .map(|(&w, v)| v.norm_sqr() * w)
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &BoundaryGrid) -> Result<f64> {
        self.compatible(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// CSV with columns `x,re,im`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,re,im\n");
        for (x, v) in self.x.iter().zip(&self.values) {
            s.push_str(&format!("{},{},{}\n", fmt17(*x), fmt17(v.re), fmt17(v.im)));
        }
        s
    }
}

/// `(S_t f)(x) = e^{itx} f(x)`.
pub fn apply_s(t: f64, f: &BoundaryGrid) -> BoundaryGrid {
    f.map_values(|x, v| Complex64::from_polar(1.0, t * x) * v)
}

/// `(θ_h f)(x) = h(x)·f(−x)`.
pub fn apply_theta(h: &SymbolFunction, f: &BoundaryGrid) -> Result<BoundaryGrid> {
    if !f.is_symmetric() {
        return Err(Error::Contract("θ_h needs a grid symmetric about 0".into()));
    }
    let n = f.len();
    let mut out = f.clone();
    for k in 0..n {
        out.values[k] = h.eval(f.x[k]) * f.values[n - 1 - k];
    }
    Ok(out)
}

pub type SymbolFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Bounded measurable function on ℝ used as the symbol of θ_h.
#[derive(Clone)]
pub struct SymbolFunction {
    pub label: String,
    pub sup_norm: f64,
    pub unimodular: bool,
    /// Points where the symbol jumps or is otherwise non-smooth.
    pub singular: Vec<f64>,
    f: SymbolFn,
}

impl fmt::Debug for SymbolFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymbolFunction")
            .field("label", &self.label)
            .field("sup_norm", &self.sup_norm)
            .field("unimodular", &self.unimodular)
            .finish()
    }
}

impl SymbolFunction {
    pub fn new(
        label: &str,
        sup_norm: f64,
        unimodular: bool,
        singular: Vec<f64>,
        f: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        SymbolFunction {
            label: label.to_string(),
            sup_norm,
            unimodular,
            singular,
            f: Arc::new(f),
        }
    }

    /// `x ↦ i·sgn(x)`.
    pub fn i_sgn() -> Self {
        SymbolFunction::new("i*sgn", 1.0, true, vec![0.0], |x| {
            if x > 0.0 {
                I
            } else if x < 0.0 {
                -I
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn constant(c: Complex64) -> Self {
        let unimodular = (c.norm() - 1.0).abs() < 1e-12;
        SymbolFunction::new(&format!("const({c})"), c.norm(), unimodular, vec![], move |_| c)
    }

    /// `x ↦ 1/(x − i)`, bounded and holomorphic on the lower half-plane.
    pub fn lower_half_plane_example() -> Self {
        SymbolFunction::new("1/(x-i)", 1.0, false, vec![], |x| (Complex64::new(x, 0.0) - I).inv())
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        (self.f)(x)
    }

    pub fn negated(&self) -> Self {
        let f = self.f.clone();
        SymbolFunction {
            label: format!("-({})", self.label),
            f: Arc::new(move |x| -f(x)),
            ..self.clone()
        }
    }

    pub fn to_grid(&self, grid: &BoundaryGrid) -> BoundaryGrid {
        grid.map_values(|x, _| self.eval(x))
    }

    /// `max |h(−x)* − h(x)|` over the grid (♭-symmetry; for scalar symbols
    /// this coincides with ♯-symmetry).
    pub fn flat_deviation(&self, grid: &BoundaryGrid) -> f64 {
        grid.x
            .iter()
            .map(|&x| (self.eval(-x).conj() - self.eval(x)).norm())
            .fold(0.0, f64::max)
    }

    pub fn sharp_deviation(&self, grid: &BoundaryGrid) -> f64 {
        self.flat_deviation(grid)
    }

    /// Checks the declared sup-norm and, if flagged, unimodularity on a grid.
    pub fn check_bounds(&self, grid: &BoundaryGrid) -> Result<()> {
        for &x in &grid.x {
            let a = self.eval(x).norm();
            if a > self.sup_norm * (1.0 + 1e-12) + 1e-14 {
                return Err(Error::Contract(format!("|h({x})| = {a} exceeds the declared bound {}", self.sup_norm)));
            }
            if self.unimodular && (a - 1.0).abs() > 1e-8 {
                return Err(Error::Contract(format!("|h({x})| = {a} is not 1")));
            }
        }
        Ok(())
    }
}

/// Cayley map `h(z) = (z − i)/(z + i)` from ℂ₊ onto the unit disc.
pub fn cayley(z: Complex64) -> Result<Complex64> {
    let d = z + I;
    if d.norm() == 0.0 {
        return Err(Error::Pole(z));
    }
    Ok((z - I) / d)
}

/// Inverse Cayley map `w ↦ i(1 + w)/(1 − w)`.
pub fn cayley_inv(w: Complex64) -> Result<Complex64> {
    let d = Complex64::new(1.0, 0.0) - w;
    if d.norm() == 0.0 {
        return Err(Error::Pole(w));
    }
    Ok(I * (Complex64::new(1.0, 0.0) + w) / d)
}

/// `(Γf)(x) = f(h(x))/(√π (x + i))`, an isometry from L²(𝕋, dθ/2π) onto L²(ℝ).
pub fn cayley_gamma<F: Fn(Complex64) -> Complex64>(f: F, x: f64) -> Complex64 {
    let z = Complex64::new(x, 0.0);
    let w = (z - I) / (z + I);
    f(w) / (PI.sqrt() * (z + I))
}
