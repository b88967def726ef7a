//! Finite positive Borel measures on `[0, ∞]` and the transforms Ψ_ν, ψ_μ,
//! φ_μ and W.
//!
//! A measure is a list of atoms plus piecewise densities. Integrals against
//! densities are evaluated on a composite Gauss-Legendre rule in the variable
//! `u = ln λ`; every kernel used in this crate is analytic in a strip of
//! half-width π/2 around the real `u` axis, which makes that rule converge
//! geometrically. The node set is built once per measure and cached.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use exmex::prelude::*;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::numerics::{integrate_real, QuadratureConfig};

/// Range of `ln λ` covered when a density touches 0 or ∞.
const U_MIN: f64 = -37.0;
const U_MAX: f64 = 37.0;
const PANEL_WIDTH: f64 = 0.5;
const GL_ORDER: usize = 10;

fn gl_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let gl = gauss_quad::GaussLegendre::new(std::num::NonZero::new(GL_ORDER).unwrap());
        let mut pairs: Vec<(f64, f64)> = gl.nodes().copied().zip(gl.weights().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs.into_iter().unzip()
    })
}

pub type DensityFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum DensityKind {
    /// Expression in the variable `x`, e.g. `2/(1+x^2)`.
    ClosedForm {
        expr: String,
        compiled: Arc<exmex::FlatEx<f64>>,
    },
    /// Samples `(λ, ρ(λ))` joined by linear interpolation.
    Table { samples: Vec<(f64, f64)> },
    /// Programmatic density; not serializable.
    Function { label: String, f: DensityFn },
}

impl DensityKind {
    pub fn closed_form(expr: &str) -> Result<Self> {
        let compiled = exmex::parse::<f64>(expr)
            .map_err(|e| Error::Parse(format!("density expression `{expr}`: {e}")))?;
        match compiled.var_names() {
            [] => {}
            [v] if v == "x" => {}
            other => {
                return Err(Error::Parse(format!(
                    "density expression `{expr}` may only use the variable x, found {other:?}"
                )))
            }
        }
        Ok(DensityKind::ClosedForm {
            expr: expr.to_string(),
            compiled: Arc::new(compiled),
        })
    }

    pub fn table(mut samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Domain("a density table needs at least two samples".into()));
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        if samples.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Domain("density table abscissae must be distinct".into()));
        }
        if samples.iter().any(|s| !(s.0.is_finite() && s.1.is_finite() && s.1 >= 0.0)) {
            return Err(Error::Domain("density table values must be finite and nonnegative".into()));
        }
        Ok(DensityKind::Table { samples })
    }

    pub fn function(label: &str, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        DensityKind::Function {
            label: label.to_string(),
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            DensityKind::ClosedForm { compiled, .. } => {
                let r = if compiled.var_names().is_empty() {
                    compiled.eval(&[])
                } else {
                    compiled.eval(&[x])
                };
                r.unwrap_or(f64::NAN)
            }
            DensityKind::Table { samples } => {
                let n = samples.len();
                if x <= samples[0].0 {
                    return samples[0].1;
                }
                if x >= samples[n - 1].0 {
                    return samples[n - 1].1;
                }
                let k = samples.partition_point(|s| s.0 <= x);
                let (x0, y0) = samples[k - 1];
                let (x1, y1) = samples[k];
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
            DensityKind::Function { f, .. } => f(x),
        }
    }

    fn kinks(&self) -> Vec<f64> {
        match self {
            DensityKind::Table { samples } => samples.iter().map(|s| s.0).collect(),
            _ => Vec::new(),
        }
    }
}

impl PartialEq for DensityKind {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (DensityKind::ClosedForm { expr: a, .. }, DensityKind::ClosedForm { expr: b, .. }) => a == b,
            (DensityKind::Table { samples: a }, DensityKind::Table { samples: b }) => a == b,
            (DensityKind::Function { f: a, .. }, DensityKind::Function { f: b, .. }) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl fmt::Debug for DensityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityKind::ClosedForm { expr, .. } => write!(f, "ClosedForm({expr:?})"),
            DensityKind::Table { samples } => write!(f, "Table({} samples)", samples.len()),
            DensityKind::Function { label, .. } => write!(f, "Function({label:?})"),
        }
    }
}

/// Density on the interval `[a, b]` with `0 ≤ a < b ≤ ∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityPiece {
    pub a: f64,
    pub b: f64,
    pub kind: DensityKind,
}

impl DensityPiece {
    pub fn new(a: f64, b: f64, kind: DensityKind) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite() && b > a) {
            return Err(Error::Domain(format!("density interval [{a}, {b}] is invalid")));
        }
        let piece = DensityPiece { a, b, kind };
        for x in piece.probe_points() {
            let v = piece.kind.eval(x);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!("density is negative or not finite at {x}: {v}")));
            }
        }
        Ok(piece)
    }

    fn u_range(&self) -> (f64, f64) {
        let ua = if self.a > 0.0 { self.a.ln() } else { U_MIN };
        let ub = if self.b.is_finite() { self.b.ln() } else { U_MAX };
        (ua, ub.max(ua))
    }

    fn probe_points(&self) -> Vec<f64> {
        let (ua, ub) = self.u_range();
        (0..17).map(|k| (ua + (ub - ua) * (k as f64 + 0.5) / 17.0).exp()).collect()
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < self.a || x > self.b {
            0.0
        } else {
            self.kind.eval(x)
        }
    }

    fn push_nodes(&self, out: &mut Vec<(f64, f64)>) {
        let (ua, ub) = self.u_range();
        let mut cuts: Vec<f64> = self
            .kind
            .kinks()
            .into_iter()
            .filter(|&x| x > self.a && x < self.b)
            .map(f64::ln)
            .collect();
        cuts.push(ua);
        cuts.push(ub);
        cuts.sort_by(|a, b| a.total_cmp(b));
        cuts.dedup();
        let (xs, ws) = gl_rule();
        for w in cuts.windows(2) {
            let len = w[1] - w[0];
            if len <= 0.0 {
                continue;
            }
            let m = (len / PANEL_WIDTH).ceil().max(1.0) as usize;
            let h = len / m as f64;
            for k in 0..m {
                let c = w[0] + (k as f64 + 0.5) * h;
                for (xi, wi) in xs.iter().zip(ws) {
                    let lam = (c + 0.5 * h * xi).exp();
                    let rho = self.kind.eval(lam);
                    if rho != 0.0 {
                        out.push((lam, 0.5 * h * wi * lam * rho));
                    }
                }
            }
        }
    }
}

/// Finite positive Borel measure on `[0, ∞]`.
#[derive(Clone, Default)]
pub struct BoundaryMeasure {
    pub atom0: f64,
    pub atom_inf: f64,
    pub atoms: Vec<(f64, f64)>,
    pub density: Vec<DensityPiece>,
    nodes: OnceLock<Arc<Vec<(f64, f64)>>>,
}

impl PartialEq for BoundaryMeasure {
    fn eq(&self, other: &Self) -> bool {
        self.atom0 == other.atom0
            && self.atom_inf == other.atom_inf
            && self.atoms == other.atoms
            && self.density == other.density
    }
}

impl fmt::Debug for BoundaryMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryMeasure")
            .field("atom0", &self.atom0)
            .field("atom_inf", &self.atom_inf)
            .field("atoms", &self.atoms)
            .field("density", &self.density)
            .finish()
    }
}

impl BoundaryMeasure {
    pub fn new(
        atom0: f64,
        atom_inf: f64,
        mut atoms: Vec<(f64, f64)>,
        density: Vec<DensityPiece>,
    ) -> Result<Self> {
        if !(atom0 >= 0.0 && atom0.is_finite() && atom_inf >= 0.0 && atom_inf.is_finite()) {
            return Err(Error::Domain("atoms at 0 and ∞ need finite nonnegative weights".into()));
        }
        for &(l, w) in &atoms {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::Domain(format!("atom location {l} is not in (0, ∞)")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Domain(format!("atom weight {w} at {l} is not positive")));
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Domain("atom locations must be distinct".into()));
        }
        Ok(BoundaryMeasure {
            atom0,
            atom_inf,
            atoms,
            density,
            nodes: OnceLock::new(),
        })
    }

    pub fn zero() -> Self {
        BoundaryMeasure::default()
    }

    pub fn dirac(lambda: f64, weight: f64) -> Result<Self> {
        if lambda == 0.0 {
            BoundaryMeasure::new(weight, 0.0, vec![], vec![])
        } else if lambda == f64::INFINITY {
            BoundaryMeasure::new(0.0, weight, vec![], vec![])
        } else {
            BoundaryMeasure::new(0.0, 0.0, vec![(lambda, weight)], vec![])
        }
    }

    pub fn atomic(atoms: Vec<(f64, f64)>) -> Result<Self> {
        BoundaryMeasure::new(0.0, 0.0, atoms, vec![])
    }

    /// `dν = 2/(1+λ²) dλ` on `(0, ∞)`, total mass π, with Ψ_ν(p) = 1/|p|.
    pub fn lebesgue_example() -> Self {
        let piece = DensityPiece::new(0.0, f64::INFINITY, DensityKind::closed_form("2/(1+x^2)").unwrap()).unwrap();
        BoundaryMeasure::new(0.0, 0.0, vec![], vec![piece]).unwrap()
    }

    /// `c·dλ` on `(0, ∞)`.
    pub fn lebesgue(c: f64) -> Result<Self> {
        let piece = DensityPiece::new(0.0, f64::INFINITY, DensityKind::closed_form(&format!("{c:?}"))?)?;
        BoundaryMeasure::new(0.0, 0.0, vec![], vec![piece])
    }

    pub fn is_zero(&self) -> bool {
        self.atom0 == 0.0 && self.atom_inf == 0.0 && self.atoms.is_empty() && self.density.is_empty()
    }

    pub fn has_boundary_atoms(&self) -> bool {
        self.atom0 > 0.0 || self.atom_inf > 0.0
    }

    /// True when every density lives on a compact subinterval of `(0, ∞)`.
    pub fn densities_compact(&self) -> bool {
        self.density.iter().all(|d| d.a > 0.0 && d.b.is_finite())
    }

    /// Atoms in `(0, ∞)` together with the density quadrature nodes, as
    /// `(λ, weight)` pairs.
    pub fn points(&self) -> Arc<Vec<(f64, f64)>> {
        self.nodes
            .get_or_init(|| {
                let mut out = self.atoms.clone();
                for d in &self.density {
                    d.push_nodes(&mut out);
                }
                Arc::new(out)
            })
            .clone()
    }

    /// `∫ f dν` over `(0, ∞)`; atoms at 0 and ∞ are the caller's business.
    pub fn integrate_interior<F: Fn(f64) -> Complex64>(&self, f: F) -> Complex64 {
        self.points().iter().map(|&(l, w)| f(l) * w).sum()
    }

    pub fn integrate_interior_real<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.points().iter().map(|&(l, w)| f(l) * w).sum()
    }

    /// `ν([0, ∞])`; `+∞` when a density has infinite mass.
    pub fn total_mass(&self) -> f64 {
        let mut m = self.atom0 + self.atom_inf + self.atoms.iter().map(|a| a.1).sum::<f64>();
        let cfg = QuadratureConfig::with_tol(1e-12, 1e-11);
        for d in &self.density {
            let mut breaks = d.kind.kinks();
            breaks.push(1.0);
            match integrate_real(|x| d.kind.eval(x), d.a, d.b, &breaks, &cfg) {
                Ok((v, _)) if v.is_finite() && v < 1e300 => m += v,
                _ => return f64::INFINITY,
            }
        }
        m
    }

    /// Nonnegative combination `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &BoundaryMeasure, b: f64) -> Result<Self> {
        if a < 0.0 || b < 0.0 {
            return Err(Error::Domain("only nonnegative combinations stay positive".into()));
        }
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        for &(l, w) in self.atoms.iter().map(|x| (x, a)).chain(other.atoms.iter().map(|x| (x, b))).map(|(x, s)| (x.0, x.1 * s)).collect::<Vec<_>>().iter() {
            if w == 0.0 {
                continue;
            }
            match atoms.iter_mut().find(|x| x.0 == l) {
                Some(x) => x.1 += w,
                None => atoms.push((l, w)),
            }
        }
        let mut density = Vec::new();
        for (src, s) in [(self, a), (other, b)] {
            if s == 0.0 {
                continue;
            }
            for d in &src.density {
                density.push(d.scaled(s)?);
            }
        }
        BoundaryMeasure::new(a * self.atom0 + b * other.atom0, a * self.atom_inf + b * other.atom_inf, atoms, density)
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        self.combine(c, &BoundaryMeasure::zero(), 0.0)
    }

    /// Ψ_ν(p) = (1/π) ∫ (1+λ²)/(p²+λ²) dν(λ), with integrand 1 at λ = ∞.
    pub fn psi_big(&self, p: f64) -> Result<f64> {
        if p == 0.0 || !p.is_finite() {
            return Err(Error::Domain(format!("Ψ_ν is evaluated at p ≠ 0, got {p}")));
        }
        let p2 = p * p;
        let interior = self.integrate_interior_real(|l| (1.0 + l * l) / (p2 + l * l));
        Ok((self.atom0 / p2 + self.atom_inf + interior) / PI)
    }

    /// ψ_μ(p) = (1/π) ∫ λ/(λ²+p²) dμ(λ).
    pub fn psi_small(&self, p: f64) -> Result<f64> {
        if p == 0.0 || !p.is_finite() {
            return Err(Error::Domain(format!("ψ_μ is evaluated at p ≠ 0, got {p}")));
        }
        if self.atom_inf > 0.0 {
            return Err(Error::Contract("ψ_μ needs a measure without atom at ∞".into()));
        }
        let p2 = p * p;
        Ok(self.integrate_interior_real(|l| l / (l * l + p2)) / PI)
    }

    /// φ_μ(t) = ∫ e^{-λ|t|} dμ(λ).
    pub fn phi_mu(&self, t: f64) -> Result<f64> {
        if self.atom_inf > 0.0 {
            return Err(Error::Contract("φ_μ needs a measure without atom at ∞".into()));
        }
        let s = t.abs();
        Ok(self.atom0 + self.integrate_interior_real(|l| (-l * s).exp()))
    }

    /// W(μ) with density λ/(1+λ²) against μ.
    pub fn w_map(&self) -> Result<Self> {
        if self.has_boundary_atoms() {
            return Err(Error::Contract("W is defined for measures on (0, ∞)".into()));
        }
        let atoms = self.atoms.iter().map(|&(l, w)| (l, w * l / (1.0 + l * l))).collect();
        let mut density = Vec::new();
        for d in &self.density {
            let kind = match &d.kind {
                DensityKind::ClosedForm { expr, .. } => DensityKind::closed_form(&format!("({expr})*x/(1+x^2)"))?,
                other => {
                    let inner = other.clone();
                    DensityKind::function(&format!("W[{other:?}]"), move |x| inner.eval(x) * x / (1.0 + x * x))
                }
            };
            density.push(DensityPiece::new(d.a, d.b, kind)?);
        }
        BoundaryMeasure::new(0.0, 0.0, atoms, density)
    }

    /// Integral of `weight` against the densities over the decades
    /// `[10^k, 10^{k+1}]` for `k` in `ks`.
    pub fn decade_integrals<F: Fn(f64) -> f64>(&self, weight: F, ks: impl Iterator<Item = i32>) -> Vec<f64> {
        let (xs, ws) = gl_rule();
        let ln10 = 10f64.ln();
        ks.map(|k| {
            let (u0, u1) = (k as f64 * ln10, (k + 1) as f64 * ln10);
            let mut s = 0.0;
            for d in &self.density {
                let (ua, ub) = (d.a.max(1e-300).ln().max(u0), if d.b.is_finite() { d.b.ln().min(u1) } else { u1 });
                if ub <= ua {
                    continue;
                }
                let m = ((ub - ua) / PANEL_WIDTH).ceil() as usize;
                let h = (ub - ua) / m as f64;
                for j in 0..m {
                    let c = ua + (j as f64 + 0.5) * h;
                    for (xi, wi) in xs.iter().zip(ws) {
                        let l = (c + 0.5 * h * xi).exp();
                        s += 0.5 * h * wi * l * d.kind.eval(l) * weight(l);
                    }
                }
            }
            s
        })
        .collect()
    }

    /// Heuristic divergence test for `∫ weight dν` near 0 (`near_zero`) or
    /// near ∞: the decade contributions must eventually shrink.
    pub fn decade_divergence<F: Fn(f64) -> f64>(&self, weight: F, near_zero: bool) -> bool {
        let ks: Vec<i32> = if near_zero { (-20..-12).rev().collect() } else { (12..20).collect() };
        let s = self.decade_integrals(weight, ks.into_iter());
        let tail: f64 = s.iter().sum();
        if tail < 1e-12 {
            return false;
        }
        s.windows(2).all(|w| w[1] >= 0.5 * w[0])
    }

    /// Random measure with `n_atoms` atoms in `[0.2, 5]`, optional boundary
    /// atoms and an optional smooth density on a compact interval.
    pub fn random<R: Rng>(rng: &mut R, n_atoms: usize, boundary_atoms: bool, with_density: bool) -> Self {
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        while atoms.len() < n_atoms {
            let l = (rng.gen_range(0.2f64.ln()..5f64.ln())).exp();
            if atoms.iter().all(|a| (a.0 - l).abs() > 1e-3) {
                atoms.push((l, rng.gen_range(0.2..2.0)));
            }
        }
        let (a0, ai) = if boundary_atoms {
            (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0))
        } else {
            (0.0, 0.0)
        };
        let mut density = Vec::new();
        if with_density {
            let a = rng.gen_range(0.3..1.0);
            let b = a + rng.gen_range(0.5..3.0);
            let c = rng.gen_range(0.2..1.5);
            let piece = DensityPiece::new(a, b, DensityKind::closed_form(&format!("{c:?}*(1+x)/(1+x^2)")).unwrap()).unwrap();
            density.push(piece);
        }
        BoundaryMeasure::new(a0, ai, atoms, density).unwrap()
    }

    pub fn to_json(&self) -> Result<Value> {
        let spec = MeasureSpec::from_measure(self)?;
        serde_json::to_value(spec).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json_string(&self) -> Result<String> {
        let v = self.to_json()?;
        serde_json::to_string_pretty(&v).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let spec: MeasureSpec = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        spec.into_measure()
    }
}

impl DensityPiece {
    fn scaled(&self, s: f64) -> Result<Self> {
        if s == 1.0 {
            return Ok(self.clone());
        }
        let kind = match &self.kind {
            DensityKind::ClosedForm { expr, .. } => DensityKind::closed_form(&format!("{s:?}*({expr})"))?,
            DensityKind::Table { samples } => DensityKind::table(samples.iter().map(|&(x, y)| (x, s * y)).collect())?,
            DensityKind::Function { label, f } => {
                let f = f.clone();
                DensityKind::function(&format!("{s:?}*{label}"), move |x| s * f(x))
            }
        };
        DensityPiece::new(self.a, self.b, kind)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct PieceSpec {
    interval: [Value; 2],
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    samples: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct MeasureSpec {
    #[serde(default)]
    atom0: f64,
    #[serde(default, rename = "atomInf")]
    atom_inf: f64,
    #[serde(default)]
    atoms: Vec<[f64; 2]>,
    #[serde(default)]
    density: Vec<PieceSpec>,
}

fn bound_from_value(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| Error::Parse("bad interval bound".into())),
        Value::String(s) if matches!(s.as_str(), "inf" | "Infinity" | "+inf") => Ok(f64::INFINITY),
        _ => Err(Error::Parse(format!("bad interval bound {v}"))),
    }
}

fn bound_to_value(x: f64) -> Value {
    if x.is_infinite() {
        Value::String("inf".into())
    } else {
        serde_json::json!(x)
    }
}

impl MeasureSpec {
    fn from_measure(m: &BoundaryMeasure) -> Result<Self> {
        let mut density = Vec::new();
        for d in &m.density {
            let interval = [bound_to_value(d.a), bound_to_value(d.b)];
            let piece = match &d.kind {
                DensityKind::ClosedForm { expr, .. } => PieceSpec {
                    interval,
                    kind: "closed-form".into(),
                    expr: Some(expr.clone()),
                    samples: None,
                },
                DensityKind::Table { samples } => PieceSpec {
                    interval,
                    kind: "table".into(),
                    expr: None,
                    samples: Some(samples.iter().map(|&(x, y)| [x, y]).collect()),
                },
                DensityKind::Function { label, .. } => {
                    return Err(Error::Contract(format!("density `{label}` is programmatic and cannot be serialized")))
                }
            };
            density.push(piece);
        }
        Ok(MeasureSpec {
            atom0: m.atom0,
            atom_inf: m.atom_inf,
            atoms: m.atoms.iter().map(|&(l, w)| [l, w]).collect(),
            density,
        })
    }

    fn into_measure(self) -> Result<BoundaryMeasure> {
        let mut density = Vec::new();
        for p in self.density {
            let a = bound_from_value(&p.interval[0])?;
            let b = bound_from_value(&p.interval[1])?;
            let kind = match p.kind.as_str() {
                "closed-form" => DensityKind::closed_form(
                    p.expr.as_deref().ok_or_else(|| Error::Parse("closed-form density needs `expr`".into()))?,
                )?,
                "table" => DensityKind::table(
                    p.samples
                        .ok_or_else(|| Error::Parse("table density needs `samples`".into()))?
                        .into_iter()
                        .map(|s| (s[0], s[1]))
                        .collect(),
                )?,
                other => return Err(Error::Parse(format!("unknown density kind `{other}`"))),
            };
            density.push(DensityPiece::new(a, b, kind)?);
        }
        BoundaryMeasure::new(self.atom0, self.atom_inf, self.atoms.into_iter().map(|a| (a[0], a[1])).collect(), density)
    }
}

/// ϑ(p): 1 on |p| < 1, 1/p² outside.
pub fn envelope_lower(p: f64) -> f64 {
    if p.abs() < 1.0 {
        1.0
    } else {
        1.0 / (p * p)
    }
}

/// η(p): 1/p² on |p| < 1, 1 outside.
pub fn envelope_upper(p: f64) -> f64 {
    if p.abs() < 1.0 {
        1.0 / (p * p)
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{fourier_line, integrate_real};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn masses() {
        assert!(close(BoundaryMeasure::dirac(0.0, PI).unwrap().total_mass(), PI, 1e-15));
        assert!(close(BoundaryMeasure::lebesgue_example().total_mass(), PI, 1e-10));
        assert_eq!(BoundaryMeasure::zero().total_mass(), 0.0);
        assert_eq!(BoundaryMeasure::lebesgue(2.0).unwrap().total_mass(), f64::INFINITY);
    }

    #[test]
    fn psi_examples() {
        assert!(close(BoundaryMeasure::dirac(0.0, PI).unwrap().psi_big(2.0).unwrap(), 0.25, 1e-15));
        let inf = BoundaryMeasure::dirac(f64::INFINITY, PI).unwrap();
        for p in [0.1, 1.0, 7.0] {
            assert!(close(inf.psi_big(p).unwrap(), 1.0, 1e-15));
        }
        let leb = BoundaryMeasure::lebesgue_example();
        for p in [0.5, 1.0, 3.0, 40.0] {
            assert!(close(leb.psi_big(p).unwrap(), 1.0 / p, 1e-12), "p={p}");
        }
        assert!(matches!(leb.psi_big(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn w_map_examples() {
        let w = BoundaryMeasure::dirac(1.0, 2.0).unwrap().w_map().unwrap();
        assert_eq!(w.atoms, vec![(1.0, 1.0)]);
        let w = BoundaryMeasure::dirac(2.0, 5.0).unwrap().w_map().unwrap();
        assert!(close(w.atoms[0].1, 2.0, 1e-15));
        let mu = BoundaryMeasure::new(0.0, 0.0, vec![], vec![DensityPiece::new(1.0, 2.0, DensityKind::closed_form("1").unwrap()).unwrap()]).unwrap();
        let (oracle, _) = integrate_real(|l| l / (1.0 + l * l), 1.0, 2.0, &[], &QuadratureConfig::with_tol(1e-14, 1e-14)).unwrap();
        assert!(close(mu.w_map().unwrap().total_mass(), oracle, 1e-10));
        assert!(close(oracle, 0.5 * 2.5f64.ln(), 1e-12));
        assert!(matches!(BoundaryMeasure::dirac(0.0, 1.0).unwrap().w_map(), Err(Error::Contract(_))));
    }

    #[test]
    fn psi_small_and_w_agree() {
        assert!(close(BoundaryMeasure::dirac(1.0, 1.0).unwrap().psi_small(1.0).unwrap(), 0.5 / PI, 1e-15));
        let mu = BoundaryMeasure::atomic(vec![(1.0, 1.0), (3.0, 1.0)]).unwrap();
        let w = mu.w_map().unwrap();
        for p in [0.5, 2.0] {
            assert!((w.psi_big(p).unwrap() - mu.psi_small(p).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn psi_small_l1_norm_is_mass() {
        // density 2 on (0, 5]: ‖ψ_μ‖₁ = μ(ℝ₊) = 10
        let mu = BoundaryMeasure::new(0.0, 0.0, vec![], vec![DensityPiece::new(0.0, 5.0, DensityKind::closed_form("2").unwrap()).unwrap()]).unwrap();
        let cfg = QuadratureConfig::with_tol(1e-9, 1e-9);
        let (v, _) = integrate_real(|p| if p == 0.0 { 0.0 } else { mu.psi_small(p).unwrap() }, f64::NEG_INFINITY, f64::INFINITY, &[0.0], &cfg).unwrap();
        assert!(close(v, 10.0, 1e-6), "{v}");
    }

    #[test]
    fn phi_examples() {
        let c = BoundaryMeasure::dirac(0.0, 3.0).unwrap();
        assert_eq!(c.phi_mu(5.0).unwrap(), 3.0);
        let d = BoundaryMeasure::dirac(1.0, 1.0).unwrap();
        assert!(close(d.phi_mu(2.0).unwrap(), (-2f64).exp(), 1e-15));
        let cfg = QuadratureConfig::default();
        for t in [0.5, 1.0, 2.0] {
            let f = fourier_line(|p| Complex64::new(d.psi_small(p).unwrap(), 0.0), t, &[], &cfg).unwrap();
            assert!((f.value.re - d.phi_mu(t).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn json_round_trip() {
        let s = r#"{"atom0": 0.5, "atomInf": 1.0, "atoms": [[2.0, 0.25]],
            "density": [{"interval": [0, "inf"], "kind": "closed-form", "expr": "2/(1+x^2)"},
                        {"interval": [1, 2], "kind": "table", "samples": [[1, 0.0], [1.5, 1.0], [2, 0.0]]}]}"#;
        let m = BoundaryMeasure::from_json_str(s).unwrap();
        let back = BoundaryMeasure::from_json_str(&m.to_json_string().unwrap()).unwrap();
        assert_eq!(m, back);
        assert!(close(m.total_mass(), 1.5 + 0.25 + PI + 0.5, 1e-9));
        assert!(BoundaryMeasure::from_json_str(r#"{"atoms": [[-1, 1]]}"#).is_err());
        assert!(BoundaryMeasure::from_json_str(r#"{"density": [{"interval": [1,2], "kind": "closed-form", "expr": "y"}]}"#).is_err());
    }

    #[test]
    fn envelope_bounds_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let nu = BoundaryMeasure::random(&mut rng, 3, true, true);
            // Ψ_ν carries a factor 1/π, so the envelopes scale with ν-mass/π.
            let m = nu.total_mass() / PI;
            for p in [0.05, 0.3, 0.9, 1.0, 1.7, 12.0] {
                let v = nu.psi_big(p).unwrap();
                assert!(m * envelope_lower(p) <= v * (1.0 + 1e-12));
                assert!(v <= m * envelope_upper(p) * (1.0 + 1e-12));
                assert_eq!(v, nu.psi_big(-p).unwrap());
            }
        }
    }

    #[test]
    fn table_density_matches_adaptive_quadrature() {
        let kind = DensityKind::table(vec![(0.5, 1.0), (1.0, 3.0), (4.0, 0.5)]).unwrap();
        let piece = DensityPiece::new(0.5, 4.0, kind.clone()).unwrap();
        let nu = BoundaryMeasure::new(0.0, 0.0, vec![], vec![piece]).unwrap();
        let cfg = QuadratureConfig::with_tol(1e-13, 1e-13);
        for p in [0.3, 1.0, 2.5] {
            let (oracle, _) = integrate_real(|l| kind.eval(l) * (1.0 + l * l) / (p * p + l * l) / PI, 0.5, 4.0, &[1.0], &cfg).unwrap();
            assert!(close(nu.psi_big(p).unwrap(), oracle, 1e-12));
        }
    }

    #[test]
    fn decade_test_detects_divergence() {
        let near0 = BoundaryMeasure::new(0.0, 0.0, vec![], vec![DensityPiece::new(0.0, 1.0, DensityKind::closed_form("1").unwrap()).unwrap()]).unwrap();
        assert!(near0.decade_divergence(|l| 1.0 / l, true));
        let lin = BoundaryMeasure::new(0.0, 0.0, vec![], vec![DensityPiece::new(0.0, 1.0, DensityKind::closed_form("x").unwrap()).unwrap()]).unwrap();
        assert!(!lin.decade_divergence(|l| 1.0 / l, true));
    }
}
