//! Discrete signed measures on `R^p`, uniform segments, rectangle masses of
//! box-monotone functions, and the jump/continuous decomposition of
//! finite-variation functions.

mod fv;

pub use fv::{fv1_decompose, tensor_decompose, FV1Decomposition, FV1Function, Jump, TensorFVFunction};

use crate::error::{invalid, Error, EvalError, Result};
use crate::exprfn::{tpow_minus, tpow_plus, FunctionSpec};
use crate::geometry::Side;
use crate::quadrature;

/// Atoms closer than this (in every coordinate) are merged.
pub const LOCATION_TOL: f64 = 1e-12;

/// Which truncated power: `(x - u)_+` or `(x - u)_-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub x: Vec<f64>,
    pub w: f64,
}

/// A finite signed measure `sum_j w_j delta_{x_j}` on `R^dim`.
///
/// Canonical form: locations pairwise further apart than [`LOCATION_TOL`],
/// no zero weights, atoms sorted lexicographically by location.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSignedMeasure {
    dim: usize,
    atoms: Vec<Atom>,
}

fn lex(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
}

impl DiscreteSignedMeasure {
    pub fn new(dim: usize, atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("measure dimension must be at least 1"));
        }
        for (x, w) in &atoms {
            if x.len() != dim {
                return Err(Error::Dimension { expected: dim, got: x.len() });
            }
            if !w.is_finite() || x.iter().any(|v| !v.is_finite()) {
                return Err(invalid("atom locations and weights must be finite"));
            }
        }
        Ok(Self::canonical(dim, atoms.into_iter().map(|(x, w)| Atom { x, w }).collect()))
    }

    /// One-dimensional measure from `(location, weight)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(1, pairs.iter().map(|&(x, w)| (vec![x], w)).collect())
    }

    pub fn dirac(x: Vec<f64>) -> Self {
        let dim = x.len();
        Self { dim, atoms: vec![Atom { x, w: 1.0 }] }
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, atoms: Vec::new() }
    }

    /// Binomial distribution `B(n, p)` on `{0, ..., n}`.
    pub fn binomial(n: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid(format!("binomial probability {p} outside [0, 1]")));
        }
        let mut pairs = Vec::with_capacity(n + 1);
        let mut choose = 1.0;
        for k in 0..=n {
            if k > 0 {
                choose = choose * (n - k + 1) as f64 / k as f64;
            }
            pairs.push((k as f64, choose * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)));
        }
        Self::from_pairs(&pairs)
    }

    fn canonical(dim: usize, mut atoms: Vec<Atom>) -> Self {
        atoms.sort_by(|a, b| lex(&a.x, &b.x));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            let near = |m: &Atom| m.x.iter().zip(&a.x).all(|(p, q)| (p - q).abs() <= LOCATION_TOL);
            match merged.iter_mut().rev().find(|m| near(m)) {
                Some(m) => m.w += a.w,
                None => merged.push(a),
            }
        }
        merged.retain(|a| a.w != 0.0);
        Self { dim, atoms: merged }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).sum()
    }

    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.w.abs()).sum()
    }

    /// True for a probability measure: weights nonnegative, mass 1 within `tol`.
    pub fn is_probability(&self, tol: f64) -> bool {
        self.atoms.iter().all(|a| a.w >= 0.0) && (self.mass() - 1.0).abs() <= tol
    }

    /// `sum_j w_j prod_i x_{ji}^{k_i}` with `0^0 = 1`.
    pub fn moment(&self, k: &[u32]) -> Result<f64> {
        if k.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: k.len() });
        }
        Ok(self
            .atoms
            .iter()
            .map(|a| a.w * a.x.iter().zip(k).map(|(x, &e)| x.powi(e as i32)).product::<f64>())
            .sum())
    }

    /// `sum_j |w_j| prod_i |x_{ji}|^{k_i}`: the scale against which a
    /// vanishing moment is judged.
    pub fn moment_scale(&self, k: &[u32]) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.w.abs() * a.x.iter().zip(k).map(|(x, &e)| x.abs().powi(e as i32)).product::<f64>())
            .sum()
    }

    fn require_1d(&self) -> Result<()> {
        if self.dim != 1 {
            return Err(Error::Dimension { expected: 1, got: self.dim });
        }
        Ok(())
    }

    /// Sorted atom locations of a one-dimensional measure.
    pub fn support_1d(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.x[0]).collect()
    }

    /// `sum_j w_j (x_j - u)_{+/-}^q`.
    pub fn truncated_power_moment(&self, u: f64, q: u32, tail: Tail) -> Result<f64> {
        self.require_1d()?;
        Ok(self
            .atoms
            .iter()
            .map(|a| {
                let e = a.x[0] - u;
                a.w * match tail {
                    Tail::Plus => tpow_plus(e, q),
                    Tail::Minus => tpow_minus(e, q),
                }
            })
            .sum())
    }

    /// `m([x, inf))`.
    pub fn survival(&self, x: f64) -> Result<f64> {
        self.require_1d()?;
        Ok(self.atoms.iter().filter(|a| a.x[0] >= x).map(|a| a.w).sum())
    }

    /// Convolution: atoms at all sums `a + b` with weights `w_a w_b`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Dimension { expected: self.dim, got: other.dim });
        }
        let mut atoms = Vec::with_capacity(self.len() * other.len());
        for a in &self.atoms {
            for b in &other.atoms {
                atoms.push(Atom { x: a.x.iter().zip(&b.x).map(|(p, q)| p + q).collect(), w: a.w * b.w });
            }
        }
        Ok(Self::canonical(self.dim, atoms))
    }

    /// `m^{*q}` for `q >= 1`.
    pub fn convolution_power(&self, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(invalid("convolution power must be at least 1"));
        }
        let mut out = self.clone();
        for _ in 1..q {
            out = out.convolve(self)?;
        }
        Ok(out)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::canonical(self.dim, self.atoms.iter().map(|a| Atom { x: a.x.clone(), w: c * a.w }).collect())
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Dimension { expected: self.dim, got: other.dim });
        }
        Ok(Self::canonical(self.dim, self.atoms.iter().chain(&other.atoms).cloned().collect()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Product measure on `R^{p + q}`.
    pub fn product(&self, other: &Self) -> Self {
        let mut atoms = Vec::with_capacity(self.len() * other.len());
        for a in &self.atoms {
            for b in &other.atoms {
                atoms.push(Atom { x: a.x.iter().chain(&b.x).copied().collect(), w: a.w * b.w });
            }
        }
        Self::canonical(self.dim + other.dim, atoms)
    }

    /// Product of several measures, in order.
    pub fn product_all(factors: &[Self]) -> Result<Self> {
        let (first, rest) = factors.split_first().ok_or_else(|| invalid("product of no measures"))?;
        Ok(rest.iter().fold(first.clone(), |acc, m| acc.product(m)))
    }

    /// Image under the coordinate projection onto `axes` (0-based, in order).
    pub fn project(&self, axes: &[usize]) -> Result<Self> {
        if let Some(&a) = axes.iter().find(|&&a| a >= self.dim) {
            return Err(invalid(format!("projection axis {} exceeds dimension {}", a + 1, self.dim)));
        }
        if axes.is_empty() {
            return Err(invalid("projection onto no coordinates"));
        }
        Ok(Self::canonical(
            axes.len(),
            self.atoms.iter().map(|a| Atom { x: axes.iter().map(|&i| a.x[i]).collect(), w: a.w }).collect(),
        ))
    }

    /// `x -> g(x) dm(x)` for a weight function evaluated at each atom.
    pub fn reweight(&self, mut g: impl FnMut(&[f64]) -> f64) -> Self {
        Self::canonical(self.dim, self.atoms.iter().map(|a| Atom { x: a.x.clone(), w: a.w * g(&a.x) }).collect())
    }

    /// `int f dm` as an exact atom sum.
    pub fn expectation(&self, f: &FunctionSpec) -> Result<f64, EvalError> {
        let mut s = 0.0;
        for a in &self.atoms {
            s += a.w * f.eval(&a.x)?;
        }
        Ok(s)
    }
}

/// `(F_1 * F_2 * ... * F_q)(a)` for the survival functions
/// `F_i(x) = tau_i([x, inf))` of zero-mass one-dimensional measures,
/// computed by nested Gauss–Legendre quadrature split at every breakpoint.
///
/// Independent of the atom algebra: used to cross-check the truncated-power
/// form of the same quantity.
pub fn survival_convolution(taus: &[DiscreteSignedMeasure], a: f64) -> Result<f64> {
    let Some((last, rest)) = taus.split_last() else {
        return Err(invalid("survival convolution of no measures"));
    };
    for t in taus {
        t.require_1d()?;
        if t.mass().abs() > 1e-12 * t.total_variation().max(1.0) {
            return Err(invalid("survival convolution needs zero-mass measures"));
        }
    }
    Ok(conv_rec(rest, last, a))
}

/// `(F_rest * F_last)(a) = int F_last(t) (F_rest)(a - t) dt`; `F_last` is a
/// step function supported on the hull of `last`.
fn conv_rec(rest: &[DiscreteSignedMeasure], last: &DiscreteSignedMeasure, a: f64) -> f64 {
    let step_at = |m: &DiscreteSignedMeasure, y: f64| -> f64 { m.atoms.iter().filter(|at| at.x[0] >= y).map(|at| at.w).sum() };
    let Some((inner_last, inner_rest)) = rest.split_last() else {
        return step_at(last, a);
    };
    let inner = |y: f64| -> f64 { conv_rec(inner_rest, inner_last, y) };
    // Breakpoints in t: atoms of `last`, and a - s for every sum s of one
    // atom from each measure in `rest`.
    let locs = last.support_1d();
    if locs.is_empty() {
        return 0.0;
    }
    let mut sums = vec![0.0];
    for m in rest {
        sums = sums.iter().flat_map(|s| m.atoms.iter().map(move |at| s + at.x[0])).collect();
    }
    let (lo, hi) = (locs[0], locs[locs.len() - 1]);
    let mut cuts: Vec<f64> = locs.clone();
    cuts.extend(sums.iter().map(|s| a - s).filter(|&t| t > lo && t < hi));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() <= LOCATION_TOL);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (p, q) = (w[0], w[1]);
        if q - p <= LOCATION_TOL {
            continue;
        }
        let step = step_at(last, q);
        if step == 0.0 {
            continue;
        }
        total += step * quadrature::integrate_panel(p, q, |t| inner(a - t));
    }
    total
}

/// Uniform probability on `[a, b]`, integrated by a composite rule with `m`
/// panels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformSegment {
    pub a: f64,
    pub b: f64,
    pub m: usize,
}

impl UniformSegment {
    pub fn new(a: f64, b: f64, m: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(invalid(format!("uniform segment [{a}, {b}] is empty or unbounded")));
        }
        if m < 2 {
            return Err(invalid(format!("quadrature resolution {m} is below 2")));
        }
        Ok(Self { a, b, m })
    }

    /// Quadrature nodes with probability weights (summing to 1).
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let len = self.b - self.a;
        quadrature::composite(self.a, self.b, self.m).into_iter().map(|(x, w)| (x, w / len)).collect()
    }

    pub fn mean(&self) -> f64 {
        0.5 * (self.a + self.b)
    }
}

/// `sum_B (-1)^{|B|} f(y_B)` with `(y_B)_j = y_j` for `j in B` and `z_j`
/// otherwise: the mass that the representing measure of a box-monotone `f`
/// gives to the rectangle with sides `[y_j, z_j)` (`L`) or `(y_j, z_j]` (`r`).
pub fn rectangle_mass(f: &FunctionSpec, rect: &[(f64, f64)], sides: &[Side]) -> Result<f64> {
    let d = f.arity();
    if rect.len() != d {
        return Err(Error::Dimension { expected: d, got: rect.len() });
    }
    if sides.len() != d {
        return Err(Error::Dimension { expected: d, got: sides.len() });
    }
    if let Some((axis, &(y, z))) = rect.iter().enumerate().find(|(_, (y, z))| !(y < z)) {
        return Err(invalid(format!("degenerate rectangle on axis {}: [{y}, {z}]", axis + 1)));
    }
    let mut total = 0.0;
    let mut x = vec![0.0; d];
    for mask in 0..1usize << d {
        for (j, &(y, z)) in rect.iter().enumerate() {
            x[j] = if mask >> j & 1 == 1 { y } else { z };
        }
        let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * f.eval(&x)?;
    }
    Ok(total)
}
