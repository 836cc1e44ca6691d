//! Box-n-convex functions from representing data: an anchor `alpha`, a
//! box-n-affine part `W`, and nonnegative discrete measures `mu_b`, one per
//! side vector `b in {L, r}^d`:
//!
//! `f(x) = W(x) + sum_b int prod_j (x_j - u_j)^{n_j - 1} / (n_j - 1)! *
//!         chi^{b_j}_{alpha_j, x_j}(u_j) dmu_b(u)`.
//!
//! Also the spline kernels `f_{A,u}` and the rectangle-mass extraction of a
//! representing measure for `n = (1, ..., 1)`.

use std::collections::BTreeMap;

use crate::error::{invalid, Error, EvalError, Result};
use crate::exprfn::{Builtin, FunctionSpec, RealFunction};
use crate::geometry::{AxisSubset, MultiIndex, Side};
use crate::measures::{rectangle_mass, DiscreteSignedMeasure};

/// `chi^L_{x,y}(u)` is `1` on `[x, y)` and `-1` on `[y, x)`;
/// `chi^r_{x,y}(u)` is `1` on `(x, y]` and `-1` on `(y, x]`; zero otherwise.
pub fn chi(side: Side, x: f64, y: f64, u: f64) -> i8 {
    match side {
        Side::L if x <= u && u < y => 1,
        Side::L if y <= u && u < x => -1,
        Side::R if x < u && u <= y => 1,
        Side::R if y < u && u <= x => -1,
        _ => 0,
    }
}

/// Whether `L` sides are restricted to axes with `n_i = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Canonical,
    Permissive,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Canonical => "canonical",
            Mode::Permissive => "permissive",
        }
    }
}

/// Data of an integral representation.
#[derive(Debug, Clone)]
pub struct RepresentationSpec {
    pub n: MultiIndex,
    pub alpha: Vec<f64>,
    /// The box-n-affine part; `None` means `W = 0`.
    pub w: Option<FunctionSpec>,
    pub parts: BTreeMap<Vec<Side>, DiscreteSignedMeasure>,
    pub mode: Mode,
}

impl RepresentationSpec {
    pub fn new(
        n: MultiIndex,
        alpha: Vec<f64>,
        w: Option<FunctionSpec>,
        parts: BTreeMap<Vec<Side>, DiscreteSignedMeasure>,
        mode: Mode,
    ) -> Result<Self> {
        let spec = Self { n, alpha, w, parts, mode };
        spec.validate()?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.n.dim()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if let Some(i) = self.n.entries().iter().position(|&k| k == 0) {
            return Err(invalid(format!("order on axis {} must be at least 1", i + 1)));
        }
        if self.alpha.len() != d {
            return Err(Error::Dimension { expected: d, got: self.alpha.len() });
        }
        if self.alpha.iter().any(|a| !a.is_finite()) {
            return Err(invalid("anchor must be finite"));
        }
        if let Some(w) = &self.w {
            if w.arity() != d {
                return Err(Error::Dimension { expected: d, got: w.arity() });
            }
        }
        for (b, mu) in &self.parts {
            let label = Side::label(b);
            if b.len() != d {
                return Err(invalid(format!("part {label}: side vector must have {d} entries")));
            }
            if mu.dim() != d {
                return Err(invalid(format!("part {label}: measure has dimension {}, expected {d}", mu.dim())));
            }
            if let Some(a) = mu.atoms().iter().find(|a| a.w < 0.0) {
                return Err(invalid(format!("part {label}: negative weight {} at {:?}", a.w, a.x)));
            }
            if self.mode == Mode::Canonical {
                if let Some(i) = (0..d).find(|&i| b[i] == Side::L && self.n.get(i) >= 2) {
                    return Err(invalid(format!(
                        "part {label}: side L on axis {} needs order 1 in canonical mode (order is {})",
                        i + 1,
                        self.n.get(i)
                    )));
                }
            }
        }
        Ok(())
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Evaluator of a synthesized representation.
#[derive(Debug, Clone)]
pub struct Synthesized {
    spec: RepresentationSpec,
    norms: Vec<f64>,
}

impl Synthesized {
    pub fn spec(&self) -> &RepresentationSpec {
        &self.spec
    }

    /// The integral part alone (without `W`).
    pub fn spline_part(&self, x: &[f64]) -> f64 {
        self.spline_part_with_magnitude(x).0
    }

    /// The integral part and the sum of the absolute values of its terms.
    pub fn spline_part_with_magnitude(&self, x: &[f64]) -> (f64, f64) {
        let (mut total, mut mag) = (0.0, 0.0);
        for (b, mu) in &self.spec.parts {
            for atom in mu.atoms() {
                let mut p = atom.w;
                for j in 0..x.len() {
                    let c = chi(b[j], self.spec.alpha[j], x[j], atom.x[j]);
                    if c == 0 {
                        p = 0.0;
                        break;
                    }
                    let k = self.spec.n.get(j) as i32 - 1;
                    p *= c as f64 * (x[j] - atom.x[j]).powi(k) * self.norms[j];
                }
                total += p;
                mag += p.abs();
            }
        }
        (total, mag)
    }
}

impl RealFunction for Synthesized {
    fn arity(&self) -> usize {
        self.spec.dim()
    }

    fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        let w = match &self.spec.w {
            Some(w) => w.eval(x)?,
            None => 0.0,
        };
        Ok(w + self.spline_part(x))
    }

    fn eval_with_magnitude(&self, x: &[f64]) -> Result<(f64, f64), EvalError> {
        let (w, wm) = match &self.spec.w {
            Some(w) => w.eval_with_magnitude(x)?,
            None => (0.0, 0.0),
        };
        let (s, sm) = self.spline_part_with_magnitude(x);
        Ok((w + s, wm + sm))
    }

    fn to_json(&self) -> Option<serde_json::Value> {
        crate::io::representation_to_json(&self.spec).ok().map(|v| serde_json::json!({ "synthesize": v }))
    }
}

/// The function represented by `spec`.
pub fn synthesize(spec: &RepresentationSpec) -> Result<FunctionSpec> {
    spec.validate()?;
    let norms = spec.n.entries().iter().map(|&k| 1.0 / factorial(k - 1)).collect();
    Ok(FunctionSpec::custom(Synthesized { spec: spec.clone(), norms }))
}

/// `f_{A,u}(x) = prod_{j not in A} (x_j - u_j)_+^{n_j-1}/(n_j-1)!
///              * prod_{j in A} (-1)^{n_j} (x_j - u_j)_-^{n_j-1}/(n_j-1)!`.
pub fn spline_basis(subset: &AxisSubset, u: &[f64], n: &MultiIndex) -> Result<FunctionSpec> {
    let d = n.dim();
    if subset.dim() != d {
        return Err(Error::Dimension { expected: d, got: subset.dim() });
    }
    if u.len() != d {
        return Err(Error::Dimension { expected: d, got: u.len() });
    }
    if let Some(i) = n.entries().iter().position(|&k| k == 0) {
        return Err(invalid(format!("order on axis {} must be at least 1", i + 1)));
    }
    let factors = (0..d)
        .map(|j| {
            let k = (n.get(j) - 1) as u32;
            let scale = 1.0 / factorial(n.get(j) - 1);
            let (kernel, sign) = if subset.contains(j) {
                (Builtin::TpowMinus { arity: 1, axis: 0, u: u[j], k }, if n.get(j) % 2 == 0 { 1.0 } else { -1.0 })
            } else {
                (Builtin::TpowPlus { arity: 1, axis: 0, u: u[j], k }, 1.0)
            };
            FunctionSpec::sum(vec![(sign * scale, FunctionSpec::Builtin(kernel))])
        })
        .collect::<Result<Vec<_>>>()?;
    FunctionSpec::tensor(factors)
}

/// `f_{A,u}(x)` evaluated directly, as an independent cross-check.
#[cfg(test)]
fn spline_basis_value(subset_mask: usize, u: &[f64], n: &[usize], x: &[f64]) -> f64 {
    let mut p = 1.0;
    for j in 0..n.len() {
        let k = (n[j] - 1) as u32;
        let e = x[j] - u[j];
        let v = if subset_mask >> j & 1 == 1 {
            let s = if n[j] % 2 == 0 { 1.0 } else { -1.0 };
            s * crate::exprfn::tpow_minus(e, k)
        } else {
            crate::exprfn::tpow_plus(e, k)
        };
        if v == 0.0 {
            return 0.0;
        }
        p *= v / factorial(n[j] - 1);
    }
    p
}

/// Mass recovered on one probe rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMass {
    pub rect: Vec<(f64, f64)>,
    pub mass: f64,
}

/// Rectangle masses of the function synthesized from a single-part
/// `n = (1, ..., 1)` spec; the sides of each rectangle are half-open as the
/// part's side vector dictates.
pub fn roundtrip_extract(spec: &RepresentationSpec, probes: &[Vec<(f64, f64)>]) -> Result<Vec<CellMass>> {
    spec.validate()?;
    if spec.n.entries().iter().any(|&k| k != 1) {
        return Err(invalid(format!("extraction needs order (1,...,1), got {}", spec.n)));
    }
    if spec.parts.len() > 1 {
        return Err(invalid("extraction needs a single part"));
    }
    let d = spec.dim();
    let sides = spec.parts.keys().next().cloned().unwrap_or_else(|| vec![Side::R; d]);
    let f = synthesize(spec)?;
    probes
        .iter()
        .map(|rect| Ok(CellMass { rect: rect.clone(), mass: rectangle_mass(&f, rect, &sides)? }))
        .collect()
}

/// Total weight of `mu` inside the rectangle with sides `[y, z)` (`L`) or
/// `(y, z]` (`r`): the value [`roundtrip_extract`] should recover.
pub fn weight_in_cell(mu: &DiscreteSignedMeasure, rect: &[(f64, f64)], sides: &[Side]) -> f64 {
    mu.atoms()
        .iter()
        .filter(|a| {
            a.x.iter().zip(rect).zip(sides).all(|((&u, &(y, z)), s)| match s {
                Side::L => y <= u && u < z,
                Side::R => y < u && u <= z,
            })
        })
        .map(|a| a.w)
        .sum()
}

/// Regular grid of probe rectangles over `[lo, hi]^d` with `cells` cells per axis.
pub fn probe_grid(d: usize, lo: f64, hi: f64, cells: usize) -> Vec<Vec<(f64, f64)>> {
    let h = (hi - lo) / cells as f64;
    let edges: Vec<(f64, f64)> = (0..cells).map(|i| (lo + h * i as f64, lo + h * (i + 1) as f64)).collect();
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out.into_iter().flat_map(|r| edges.iter().map(move |e| [r.clone(), vec![*e]].concat())).collect();
    }
    out
}
