//! Function inputs: parsed expressions, a builtin catalog, tabulated grids,
//! weighted sums, tensor products and slices. Every other module consumes
//! functions through [`FunctionSpec`].

mod expr;

use std::fmt;
use std::sync::Arc;

pub use expr::{parse_expression, tpow_minus, tpow_plus, BinOp, Expr};

use crate::error::{invalid, Error, EvalError, Result};
use crate::geometry::{assemble, AxisSubset};

/// A real function of `arity` variables implemented outside the closed
/// set of [`FunctionSpec`] variants (pseudo-polynomials, synthesized
/// representations, spline kernels).
pub trait RealFunction: Send + Sync + fmt::Debug {
    fn arity(&self) -> usize;

    /// Evaluate at `x`; callers guarantee `x.len() == self.arity()`.
    fn eval(&self, x: &[f64]) -> Result<f64, EvalError>;

    /// Value together with the magnitude of the quantities summed to
    /// produce it; cancellation error is small relative to the magnitude.
    fn eval_with_magnitude(&self, x: &[f64]) -> Result<(f64, f64), EvalError> {
        let v = self.eval(x)?;
        Ok((v, v.abs()))
    }

    /// JSON description, when the function can be rebuilt from data.
    fn to_json(&self) -> Option<serde_json::Value> {
        None
    }
}

/// A parsed expression together with its declared arity.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    pub source: String,
    pub tree: Expr,
    pub arity: usize,
}

/// Named functions that need no parser.
#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    Const { arity: usize, value: f64 },
    /// `x_axis^k`
    Monomial { arity: usize, axis: usize, k: i32 },
    /// `(x_axis - u)_+^k`
    TpowPlus { arity: usize, axis: usize, u: f64, k: u32 },
    /// `(x_axis - u)_-^k`
    TpowMinus { arity: usize, axis: usize, u: f64, k: u32 },
    /// `exp(sum_i c_i x_i)`
    ExpSum { coeffs: Vec<f64> },
    /// `prod_i x_i^{k_i}`
    TensorMonomial { powers: Vec<i32> },
    /// `prod_i (x_i - u_i)_+^{k_i}`
    TensorTpow { shifts: Vec<f64>, powers: Vec<u32> },
}

impl Builtin {
    /// Looks up `name` in the catalog. Axis parameters are 1-based.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self> {
        let need = |n: usize| -> Result<()> {
            if params.len() != n {
                return Err(Error::ArityMismatch { name: name.into(), expected: n, got: params.len() });
            }
            Ok(())
        };
        let as_count = |v: f64, what: &str| -> Result<usize> {
            if v.fract() != 0.0 || v < 1.0 {
                return Err(invalid(format!("{name}: {what} must be a positive integer, got {v}")));
            }
            Ok(v as usize)
        };
        let as_power = |v: f64| -> Result<u32> {
            if v.fract() != 0.0 || v < 0.0 {
                return Err(invalid(format!("{name}: exponent must be a nonnegative integer, got {v}")));
            }
            Ok(v as u32)
        };
        let axis_of = |d: usize, v: f64| -> Result<usize> {
            let a = as_count(v, "axis")?;
            if a > d {
                return Err(invalid(format!("{name}: axis {a} exceeds arity {d}")));
            }
            Ok(a - 1)
        };
        Ok(match name {
            "const" => {
                need(2)?;
                Builtin::Const { arity: as_count(params[0], "arity")?, value: params[1] }
            }
            "monomial" => {
                need(3)?;
                let arity = as_count(params[0], "arity")?;
                if params[2].fract() != 0.0 {
                    return Err(invalid("monomial: exponent must be an integer"));
                }
                Builtin::Monomial { arity, axis: axis_of(arity, params[1])?, k: params[2] as i32 }
            }
            "tpow_plus" | "tpow_minus" | "hinge" => {
                let arity = as_count(*params.first().unwrap_or(&0.0), "arity")?;
                let (axis, u, k) = if name == "hinge" {
                    need(3)?;
                    (axis_of(arity, params[1])?, params[2], 1)
                } else {
                    need(4)?;
                    (axis_of(arity, params[1])?, params[2], as_power(params[3])?)
                };
                if name == "tpow_minus" {
                    Builtin::TpowMinus { arity, axis, u, k }
                } else {
                    Builtin::TpowPlus { arity, axis, u, k }
                }
            }
            "exp_sum" => {
                let d = as_count(*params.first().unwrap_or(&0.0), "arity")?;
                let coeffs = match params.len() {
                    1 => vec![1.0; d],
                    n if n == d + 1 => params[1..].to_vec(),
                    _ => return Err(Error::ArityMismatch { name: name.into(), expected: d + 1, got: params.len() }),
                };
                Builtin::ExpSum { coeffs }
            }
            "tensor_monomial" => {
                if params.is_empty() || params.iter().any(|p| p.fract() != 0.0) {
                    return Err(invalid("tensor_monomial: needs one integer power per axis"));
                }
                Builtin::TensorMonomial { powers: params.iter().map(|&p| p as i32).collect() }
            }
            "tensor_tpow" => {
                if params.is_empty() || params.len() % 2 != 0 {
                    return Err(invalid("tensor_tpow: expects shifts followed by powers"));
                }
                let d = params.len() / 2;
                let powers = params[d..].iter().map(|&p| as_power(p)).collect::<Result<_>>()?;
                Builtin::TensorTpow { shifts: params[..d].to_vec(), powers }
            }
            _ => return Err(Error::UnknownIdentifier { pos: 0, name: name.into() }),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Const { .. } => "const",
            Builtin::Monomial { .. } => "monomial",
            Builtin::TpowPlus { .. } => "tpow_plus",
            Builtin::TpowMinus { .. } => "tpow_minus",
            Builtin::ExpSum { .. } => "exp_sum",
            Builtin::TensorMonomial { .. } => "tensor_monomial",
            Builtin::TensorTpow { .. } => "tensor_tpow",
        }
    }

    /// Parameter list in the 1-based catalog convention.
    pub fn params(&self) -> Vec<f64> {
        match self {
            Builtin::Const { arity, value } => vec![*arity as f64, *value],
            Builtin::Monomial { arity, axis, k } => vec![*arity as f64, (*axis + 1) as f64, *k as f64],
            Builtin::TpowPlus { arity, axis, u, k } | Builtin::TpowMinus { arity, axis, u, k } => {
                vec![*arity as f64, (*axis + 1) as f64, *u, *k as f64]
            }
            Builtin::ExpSum { coeffs } => std::iter::once(coeffs.len() as f64).chain(coeffs.iter().copied()).collect(),
            Builtin::TensorMonomial { powers } => powers.iter().map(|&p| p as f64).collect(),
            Builtin::TensorTpow { shifts, powers } => {
                shifts.iter().copied().chain(powers.iter().map(|&p| p as f64)).collect()
            }
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Builtin::Const { arity, .. }
            | Builtin::Monomial { arity, .. }
            | Builtin::TpowPlus { arity, .. }
            | Builtin::TpowMinus { arity, .. } => *arity,
            Builtin::ExpSum { coeffs } => coeffs.len(),
            Builtin::TensorMonomial { powers } => powers.len(),
            Builtin::TensorTpow { powers, .. } => powers.len(),
        }
    }

    fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        Ok(match self {
            Builtin::Const { value, .. } => *value,
            Builtin::Monomial { axis, k, .. } => {
                if x[*axis] == 0.0 && *k < 0 {
                    return Err(EvalError::DivisionByZero);
                }
                x[*axis].powi(*k)
            }
            Builtin::TpowPlus { axis, u, k, .. } => tpow_plus(x[*axis] - u, *k),
            Builtin::TpowMinus { axis, u, k, .. } => tpow_minus(x[*axis] - u, *k),
            Builtin::ExpSum { coeffs } => coeffs.iter().zip(x).map(|(c, v)| c * v).sum::<f64>().exp(),
            Builtin::TensorMonomial { powers } => {
                let mut p = 1.0;
                for (&v, &k) in x.iter().zip(powers) {
                    if v == 0.0 && k < 0 {
                        return Err(EvalError::DivisionByZero);
                    }
                    p *= v.powi(k);
                }
                p
            }
            Builtin::TensorTpow { shifts, powers } => {
                x.iter().zip(shifts).zip(powers).map(|((&v, &u), &k)| tpow_plus(v - u, k)).product()
            }
        })
    }
}

/// Values on a tensor grid, exact only at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    nodes: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl Tabulated {
    /// `values` is row-major: the last axis varies fastest.
    pub fn new(nodes: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(invalid("tabulated function needs at least one axis"));
        }
        for (axis, t) in nodes.iter().enumerate() {
            if t.is_empty() {
                return Err(Error::WrongLength { axis, expected: 1, got: 0 });
            }
            crate::geometry::check_distinct(axis, t)?;
        }
        let expected: usize = nodes.iter().map(Vec::len).product();
        if values.len() != expected {
            return Err(invalid(format!(
                "tabulated values: expected {expected} entries (product of node counts), got {}",
                values.len()
            )));
        }
        Ok(Self { nodes, values })
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        let mut flat = 0;
        for (t, &v) in self.nodes.iter().zip(x) {
            let Some(j) = t.iter().position(|&u| u == v) else {
                return Err(EvalError::OffGrid { point: x.to_vec() });
            };
            flat = flat * t.len() + j;
        }
        Ok(self.values[flat])
    }
}

/// `f_A^z`: `f` with the coordinates outside `A` frozen.
#[derive(Debug, Clone)]
pub struct Slice {
    pub base: FunctionSpec,
    pub subset: AxisSubset,
    pub fixed: Vec<f64>,
}

/// A function of `arity` real variables.
#[derive(Clone)]
pub enum FunctionSpec {
    Expr(Arc<Expression>),
    Builtin(Builtin),
    Tabulated(Arc<Tabulated>),
    /// `sum_j w_j f_j`.
    Sum { arity: usize, terms: Vec<(f64, FunctionSpec)> },
    /// `prod_i g_i(x_i)` with every factor univariate.
    Tensor(Vec<FunctionSpec>),
    Slice(Arc<Slice>),
    Custom(Arc<dyn RealFunction>),
}

impl fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Expr(e) => write!(f, "Expr({:?}, d={})", e.source, e.arity),
            FunctionSpec::Builtin(b) => write!(f, "Builtin({b:?})"),
            FunctionSpec::Tabulated(t) => write!(f, "Tabulated({:?})", t.nodes),
            FunctionSpec::Sum { terms, .. } => f.debug_list().entries(terms.iter()).finish(),
            FunctionSpec::Tensor(fs) => f.debug_tuple("Tensor").field(fs).finish(),
            FunctionSpec::Slice(s) => write!(f, "Slice({:?}, {:?}, {:?})", s.base, s.subset.members(), s.fixed),
            FunctionSpec::Custom(c) => write!(f, "Custom({c:?})"),
        }
    }
}

impl FunctionSpec {
    pub fn parse(text: &str, arity: usize) -> Result<Self> {
        let tree = parse_expression(text, arity)?;
        Ok(FunctionSpec::Expr(Arc::new(Expression { source: text.to_string(), tree, arity })))
    }

    pub fn builtin(name: &str, params: &[f64]) -> Result<Self> {
        Ok(FunctionSpec::Builtin(Builtin::from_name(name, params)?))
    }

    pub fn constant(arity: usize, value: f64) -> Self {
        FunctionSpec::Builtin(Builtin::Const { arity, value })
    }

    /// `x_axis^k` in `arity` variables (0-based axis).
    pub fn monomial(arity: usize, axis: usize, k: i32) -> Self {
        FunctionSpec::Builtin(Builtin::Monomial { arity, axis, k })
    }

    pub fn tensor_monomial(powers: Vec<i32>) -> Self {
        FunctionSpec::Builtin(Builtin::TensorMonomial { powers })
    }

    pub fn tabulated(nodes: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        Ok(FunctionSpec::Tabulated(Arc::new(Tabulated::new(nodes, values)?)))
    }

    pub fn sum(terms: Vec<(f64, FunctionSpec)>) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(invalid("sum needs at least one term"));
        };
        let arity = first.1.arity();
        for (w, f) in &terms {
            if !w.is_finite() {
                return Err(invalid(format!("sum weight {w} is not finite")));
            }
            if f.arity() != arity {
                return Err(Error::Dimension { expected: arity, got: f.arity() });
            }
        }
        Ok(FunctionSpec::Sum { arity, terms })
    }

    /// `self - other`.
    pub fn minus(&self, other: &FunctionSpec) -> Result<Self> {
        Self::sum(vec![(1.0, self.clone()), (-1.0, other.clone())])
    }

    pub fn tensor(factors: Vec<FunctionSpec>) -> Result<Self> {
        if factors.is_empty() {
            return Err(invalid("tensor product needs at least one factor"));
        }
        if let Some(f) = factors.iter().find(|f| f.arity() != 1) {
            return Err(Error::Dimension { expected: 1, got: f.arity() });
        }
        Ok(FunctionSpec::Tensor(factors))
    }

    pub fn custom(f: impl RealFunction + 'static) -> Self {
        FunctionSpec::Custom(Arc::new(f))
    }

    pub(crate) fn slice(base: FunctionSpec, subset: AxisSubset, fixed: Vec<f64>) -> Self {
        FunctionSpec::Slice(Arc::new(Slice { base, subset, fixed }))
    }

    pub fn arity(&self) -> usize {
        match self {
            FunctionSpec::Expr(e) => e.arity,
            FunctionSpec::Builtin(b) => b.arity(),
            FunctionSpec::Tabulated(t) => t.nodes.len(),
            FunctionSpec::Sum { arity, .. } => *arity,
            FunctionSpec::Tensor(fs) => fs.len(),
            FunctionSpec::Slice(s) => s.subset.len(),
            FunctionSpec::Custom(c) => c.arity(),
        }
    }

    /// Evaluates at `x`, rejecting wrong arity and non-finite results.
    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        if x.len() != self.arity() {
            return Err(EvalError::Arity { expected: self.arity(), got: x.len() });
        }
        let v = self.eval_unchecked(x)?;
        if !v.is_finite() {
            return Err(EvalError::NonFinite { point: x.to_vec() });
        }
        Ok(v)
    }

    fn eval_unchecked(&self, x: &[f64]) -> Result<f64, EvalError> {
        match self {
            FunctionSpec::Expr(e) => e.tree.eval(x),
            FunctionSpec::Builtin(b) => b.eval(x),
            FunctionSpec::Tabulated(t) => t.eval(x),
            FunctionSpec::Sum { terms, .. } => {
                let mut s = 0.0;
                for (w, f) in terms {
                    s += w * f.eval_unchecked(x)?;
                }
                Ok(s)
            }
            FunctionSpec::Tensor(fs) => {
                let mut p = 1.0;
                for (f, v) in fs.iter().zip(x) {
                    p *= f.eval_unchecked(std::slice::from_ref(v))?;
                }
                Ok(p)
            }
            FunctionSpec::Slice(s) => s.base.eval_unchecked(&assemble(&s.subset, x, &s.fixed)),
            FunctionSpec::Custom(c) => c.eval(x),
        }
    }

    /// Evaluates at `x` and reports the magnitude of the summands that were
    /// combined: `sum |w| m` for sums, the product of factor magnitudes for
    /// tensors, and `|value|` for atomic functions.
    pub fn eval_with_magnitude(&self, x: &[f64]) -> Result<(f64, f64), EvalError> {
        if x.len() != self.arity() {
            return Err(EvalError::Arity { expected: self.arity(), got: x.len() });
        }
        let (v, m) = self.magnitude_unchecked(x)?;
        if !v.is_finite() {
            return Err(EvalError::NonFinite { point: x.to_vec() });
        }
        Ok((v, m))
    }

    fn magnitude_unchecked(&self, x: &[f64]) -> Result<(f64, f64), EvalError> {
        match self {
            FunctionSpec::Sum { terms, .. } => {
                let (mut s, mut m) = (0.0, 0.0);
                for (w, f) in terms {
                    let (v, mv) = f.magnitude_unchecked(x)?;
                    s += w * v;
                    m += w.abs() * mv;
                }
                Ok((s, m))
            }
            FunctionSpec::Tensor(fs) => {
                let (mut p, mut m) = (1.0, 1.0);
                for (f, v) in fs.iter().zip(x) {
                    let (fv, fm) = f.magnitude_unchecked(std::slice::from_ref(v))?;
                    p *= fv;
                    m *= fm;
                }
                Ok((p, m))
            }
            FunctionSpec::Slice(s) => s.base.magnitude_unchecked(&assemble(&s.subset, x, &s.fixed)),
            FunctionSpec::Custom(c) => c.eval_with_magnitude(x),
            _ => {
                let v = self.eval_unchecked(x)?;
                Ok((v, v.abs()))
            }
        }
    }

    /// Evaluates a univariate function.
    pub fn eval1(&self, x: f64) -> Result<f64, EvalError> {
        self.eval(&[x])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{slice_function, BoxDomain};

    #[test]
    fn builtin_catalog() {
        let m = FunctionSpec::builtin("monomial", &[2.0, 2.0, 3.0]).unwrap();
        assert_eq!(m.eval(&[5.0, 2.0]).unwrap(), 8.0);
        let h = FunctionSpec::builtin("hinge", &[1.0, 1.0, 0.5]).unwrap();
        assert_eq!(h.eval1(0.25).unwrap(), 0.0);
        assert_eq!(h.eval1(2.0).unwrap(), 1.5);
        let e = FunctionSpec::builtin("exp_sum", &[2.0]).unwrap();
        assert!((e.eval(&[1.0, -1.0]).unwrap() - 1.0).abs() < 1e-15);
        let t = FunctionSpec::builtin("tensor_monomial", &[2.0, 2.0]).unwrap();
        assert_eq!(t.eval(&[2.0, 3.0]).unwrap(), 36.0);
        let tt = FunctionSpec::builtin("tensor_tpow", &[0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(tt.eval(&[2.0, 3.0]).unwrap(), 6.0);
        assert_eq!(tt.eval(&[-2.0, 3.0]).unwrap(), 0.0);
        assert!(FunctionSpec::builtin("monomial", &[1.0, 2.0, 1.0]).is_err());
        assert!(FunctionSpec::builtin("nope", &[]).is_err());
    }

    #[test]
    fn builtin_params_round_trip() {
        for (name, params) in [
            ("const", vec![2.0, 7.5]),
            ("monomial", vec![3.0, 2.0, 4.0]),
            ("tpow_minus", vec![1.0, 1.0, 0.25, 2.0]),
            ("exp_sum", vec![2.0, 1.0, -0.5]),
            ("tensor_tpow", vec![0.1, 0.2, 2.0, 1.0]),
        ] {
            let b = Builtin::from_name(name, &params).unwrap();
            assert_eq!(b.name(), name);
            assert_eq!(Builtin::from_name(b.name(), &b.params()).unwrap(), b);
        }
    }

    #[test]
    fn tabulated_is_exact_on_nodes_only() {
        let t = FunctionSpec::tabulated(vec![vec![0.0, 1.0], vec![0.0, 1.0, 2.0]], vec![0., 1., 2., 3., 4., 5.]).unwrap();
        assert_eq!(t.eval(&[1.0, 2.0]).unwrap(), 5.0);
        assert_eq!(t.eval(&[0.0, 1.0]).unwrap(), 1.0);
        assert!(matches!(t.eval(&[0.5, 1.0]), Err(EvalError::OffGrid { .. })));
        assert!(FunctionSpec::tabulated(vec![vec![0.0, 1.0]], vec![1.0]).is_err());
    }

    #[test]
    fn sums_and_tensors() {
        let x = FunctionSpec::parse("x1", 2).unwrap();
        let y = FunctionSpec::parse("x2", 2).unwrap();
        let s = FunctionSpec::sum(vec![(2.0, x), (-1.0, y)]).unwrap();
        assert_eq!(s.eval(&[3.0, 1.0]).unwrap(), 5.0);
        let sq = FunctionSpec::parse("x1^2", 1).unwrap();
        let t = FunctionSpec::tensor(vec![sq.clone(), sq]).unwrap();
        assert_eq!(t.eval(&[2.0, 3.0]).unwrap(), 36.0);
        assert!(FunctionSpec::sum(vec![(f64::NAN, t.clone())]).is_err());
    }

    #[test]
    fn arity_is_checked() {
        let f = FunctionSpec::parse("x1*x2", 2).unwrap();
        assert_eq!(f.eval(&[1.0]), Err(EvalError::Arity { expected: 2, got: 1 }));
    }

    #[test]
    fn overflow_is_reported() {
        let f = FunctionSpec::parse("exp(x1)", 1).unwrap();
        assert!(matches!(f.eval1(1000.0), Err(EvalError::NonFinite { .. })));
    }

    #[test]
    fn slicing_examples() {
        let f = FunctionSpec::parse("x1*x2", 2).unwrap();
        let g = slice_function(&f, &AxisSubset::new(2, vec![0]).unwrap(), &[3.0], None).unwrap();
        assert_eq!(g.eval1(2.0).unwrap(), 6.0);

        let f = FunctionSpec::parse("x1+x2+x3", 3).unwrap();
        let g = slice_function(&f, &AxisSubset::new(3, vec![0, 2]).unwrap(), &[5.0], None).unwrap();
        assert_eq!(g.eval(&[0.0, 0.0]).unwrap(), 5.0);

        let g = slice_function(&f, &AxisSubset::full(3), &[], None).unwrap();
        assert_eq!(g.eval(&[1.0, 2.0, 4.0]).unwrap(), f.eval(&[1.0, 2.0, 4.0]).unwrap());
    }

    #[test]
    fn slicing_outside_box_is_a_domain_error() {
        let f = FunctionSpec::parse("x1*x2", 2).unwrap();
        let dom = BoxDomain::cube(2, 0.0, 1.0).unwrap();
        assert!(slice_function(&f, &AxisSubset::new(2, vec![0]).unwrap(), &[3.0], Some(&dom)).is_err());
    }
}
