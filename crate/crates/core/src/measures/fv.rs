//! Finite-variation functions with finitely many jumps, and their split
//! into a left-continuous jump part, a right-continuous jump part and a
//! continuous part, factorwise on finite tensor sums.

use std::collections::BTreeMap;

use crate::error::{invalid, Error, EvalError, Result};
use crate::exprfn::{Builtin, FunctionSpec};
use crate::geometry::Side;

/// A jump at `t`: `left = f(t) - f(t-)`, `right = f(t+) - f(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub t: f64,
    pub left: f64,
    pub right: f64,
}

/// `f(x) = offset + smooth(x) + sum_{t < x} (left_t + right_t) + sum_{t = x} left_t`.
#[derive(Debug, Clone)]
pub struct FV1Function {
    pub smooth: FunctionSpec,
    pub offset: f64,
    jumps: Vec<Jump>,
}

impl FV1Function {
    /// `smooth` must be a continuous univariate function; jump locations distinct.
    pub fn new(smooth: FunctionSpec, offset: f64, mut jumps: Vec<Jump>) -> Result<Self> {
        if smooth.arity() != 1 {
            return Err(Error::Dimension { expected: 1, got: smooth.arity() });
        }
        if !offset.is_finite() || jumps.iter().any(|j| !(j.t.is_finite() && j.left.is_finite() && j.right.is_finite())) {
            return Err(invalid("offsets and jumps must be finite"));
        }
        jumps.sort_by(|a, b| a.t.total_cmp(&b.t));
        if let Some(w) = jumps.windows(2).find(|w| w[0].t == w[1].t) {
            return Err(invalid(format!("two jumps at the same location {}", w[0].t)));
        }
        jumps.retain(|j| j.left != 0.0 || j.right != 0.0);
        Ok(Self { smooth, offset, jumps })
    }

    /// A pure jump function with no smooth part.
    pub fn jumps_only(offset: f64, jumps: Vec<Jump>) -> Result<Self> {
        Self::new(FunctionSpec::constant(1, 0.0), offset, jumps)
    }

    pub fn continuous(smooth: FunctionSpec) -> Result<Self> {
        Self::new(smooth, 0.0, Vec::new())
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    /// Structurally zero: no jumps, zero offset, zero constant smooth part.
    pub fn is_zero(&self) -> bool {
        self.offset == 0.0
            && self.jumps.is_empty()
            && matches!(self.smooth, FunctionSpec::Builtin(Builtin::Const { value, .. }) if value == 0.0)
    }

    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let mut v = self.offset + self.smooth.eval1(x)?;
        for j in &self.jumps {
            if j.t < x {
                v += j.left + j.right;
            } else if j.t == x {
                v += j.left;
            }
        }
        Ok(v)
    }
}

/// The three parts of a finite-variation function relative to an anchor.
#[derive(Debug, Clone)]
pub struct FV1Decomposition {
    /// Left-continuous jump function (right jumps only), zero at the anchor.
    pub left_continuous: FV1Function,
    /// Right-continuous jump function (left jumps only), zero at the anchor.
    pub right_continuous: FV1Function,
    /// Continuous remainder.
    pub continuous: FV1Function,
}

impl FV1Decomposition {
    /// `f_r = f_R + f_c`, the right-continuous part used by the tensor split.
    pub fn r_part(&self) -> FV1Function {
        FV1Function {
            smooth: self.continuous.smooth.clone(),
            offset: self.continuous.offset + self.right_continuous.offset,
            jumps: self.right_continuous.jumps.clone(),
        }
    }
}

/// `f = f_L + f_R + f_c` with `f_L(alpha) = f_R(alpha) = 0`.
pub fn fv1_decompose(f: &FV1Function, alpha: f64) -> Result<FV1Decomposition> {
    if !alpha.is_finite() {
        return Err(invalid("anchor must be finite"));
    }
    if f.jumps.iter().any(|j| j.t == alpha) {
        return Err(invalid(format!("anchor {alpha} coincides with a jump location")));
    }
    let below = f.jumps.iter().filter(|j| j.t < alpha);
    let c_left: f64 = below.clone().map(|j| j.right).sum();
    let c_right: f64 = below.map(|j| j.left).sum();
    let left_jumps = f.jumps.iter().map(|j| Jump { t: j.t, left: 0.0, right: j.right }).collect();
    let right_jumps = f.jumps.iter().map(|j| Jump { t: j.t, left: j.left, right: 0.0 }).collect();
    Ok(FV1Decomposition {
        left_continuous: FV1Function::jumps_only(-c_left, left_jumps)?,
        right_continuous: FV1Function::jumps_only(-c_right, right_jumps)?,
        continuous: FV1Function::new(f.smooth.clone(), f.offset + c_left + c_right, Vec::new())?,
    })
}

/// `sum_k c_k prod_j phi_{kj}(x_j)`.
#[derive(Debug, Clone)]
pub struct TensorFVFunction {
    dim: usize,
    terms: Vec<(f64, Vec<FV1Function>)>,
}

impl TensorFVFunction {
    pub fn new(dim: usize, terms: Vec<(f64, Vec<FV1Function>)>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        for (c, factors) in &terms {
            if !c.is_finite() {
                return Err(invalid("tensor coefficients must be finite"));
            }
            if factors.len() != dim {
                return Err(Error::Dimension { expected: dim, got: factors.len() });
            }
        }
        Ok(Self { dim, terms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(f64, Vec<FV1Function>)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        if x.len() != self.dim {
            return Err(EvalError::Arity { expected: self.dim, got: x.len() });
        }
        let mut total = 0.0;
        for (c, factors) in &self.terms {
            let mut p = *c;
            for (phi, &v) in factors.iter().zip(x) {
                p *= phi.eval(v)?;
            }
            total += p;
        }
        Ok(total)
    }
}

/// `f = sum_b f_b` over `b in {L, r}^d`: on each axis a factor is replaced by
/// its left-continuous jump part (`L`) or by the rest (`r`). Axes are
/// processed in `axis_order` (default `0..d`); the result does not depend on it.
/// Terms with a structurally zero factor are dropped.
pub fn tensor_decompose(
    f: &TensorFVFunction,
    alpha: &[f64],
    axis_order: Option<&[usize]>,
) -> Result<BTreeMap<Vec<Side>, TensorFVFunction>> {
    let d = f.dim;
    if alpha.len() != d {
        return Err(Error::Dimension { expected: d, got: alpha.len() });
    }
    let default: Vec<usize> = (0..d).collect();
    let order = axis_order.unwrap_or(&default);
    let mut seen = vec![false; d];
    if order.len() != d || order.iter().any(|&a| a >= d || std::mem::replace(&mut seen[a], true)) {
        return Err(invalid(format!("axis order {order:?} is not a permutation")));
    }
    // Partial parts keyed by the sides chosen so far (unset axes hold R).
    let mut parts: BTreeMap<Vec<Side>, Vec<(f64, Vec<FV1Function>)>> = BTreeMap::new();
    parts.insert(vec![Side::R; d], f.terms.clone());
    for &axis in order {
        let mut next: BTreeMap<Vec<Side>, Vec<(f64, Vec<FV1Function>)>> = BTreeMap::new();
        for (key, terms) in parts {
            for (c, factors) in terms {
                let split = fv1_decompose(&factors[axis], alpha[axis])?;
                for (side, phi) in [(Side::L, split.left_continuous.clone()), (Side::R, split.r_part())] {
                    let mut k = key.clone();
                    k[axis] = side;
                    let entry = next.entry(k).or_default();
                    if phi.is_zero() {
                        continue;
                    }
                    let mut fs = factors.clone();
                    fs[axis] = phi;
                    entry.push((c, fs));
                }
            }
        }
        parts = next;
    }
    for key in Side::all(d) {
        parts.entry(key).or_default();
    }
    parts.into_iter().map(|(k, terms)| Ok((k, TensorFVFunction::new(d, terms)?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_closed(t: f64) -> FV1Function {
        // 1_{x >= t}: jump of f(t) - f(t-) = 1 at t.
        FV1Function::jumps_only(0.0, vec![Jump { t, left: 1.0, right: 0.0 }]).unwrap()
    }

    fn step_open(t: f64) -> FV1Function {
        // 1_{x > t}: jump of f(t+) - f(t) = 1 at t.
        FV1Function::jumps_only(0.0, vec![Jump { t, left: 0.0, right: 1.0 }]).unwrap()
    }

    fn identity() -> FunctionSpec {
        FunctionSpec::parse("x1", 1).unwrap()
    }

    const PROBES: [f64; 7] = [-2.0, -0.5, -0.1, 0.0, 0.1, 1.0, 3.0];

    #[test]
    fn evaluation_matches_indicator_conventions() {
        assert_eq!(step_closed(0.0).eval(0.0).unwrap(), 1.0);
        assert_eq!(step_closed(0.0).eval(-1e-9).unwrap(), 0.0);
        assert_eq!(step_open(0.0).eval(0.0).unwrap(), 0.0);
        assert_eq!(step_open(0.0).eval(1e-9).unwrap(), 1.0);
    }

    #[test]
    fn closed_step_plus_identity() {
        let f = FV1Function::new(identity(), 0.0, step_closed(0.0).jumps().to_vec()).unwrap();
        let p = fv1_decompose(&f, -0.5).unwrap();
        for x in PROBES {
            assert_eq!(p.left_continuous.eval(x).unwrap(), 0.0);
            assert_eq!(p.right_continuous.eval(x).unwrap(), step_closed(0.0).eval(x).unwrap());
            assert_eq!(p.continuous.eval(x).unwrap(), x);
        }
    }

    #[test]
    fn continuous_function_is_its_own_continuous_part() {
        let f = FV1Function::continuous(FunctionSpec::parse("exp(x1)", 1).unwrap()).unwrap();
        let p = fv1_decompose(&f, 0.3).unwrap();
        assert!(p.left_continuous.is_zero());
        assert!(p.right_continuous.is_zero());
        for x in PROBES {
            assert_eq!(p.continuous.eval(x).unwrap(), x.exp());
        }
    }

    #[test]
    fn open_step_is_left_continuous() {
        let p = fv1_decompose(&step_open(0.0), -0.5).unwrap();
        for x in PROBES {
            assert_eq!(p.left_continuous.eval(x).unwrap(), step_open(0.0).eval(x).unwrap());
            assert_eq!(p.right_continuous.eval(x).unwrap(), 0.0);
            assert_eq!(p.continuous.eval(x).unwrap(), 0.0);
        }
    }

    #[test]
    fn parts_vanish_at_anchor_and_sum_back() {
        let jumps = vec![
            Jump { t: -1.0, left: 0.5, right: -0.25 },
            Jump { t: 0.2, left: -1.0, right: 2.0 },
            Jump { t: 1.5, left: 0.0, right: 0.75 },
        ];
        let f = FV1Function::new(FunctionSpec::parse("x1^2", 1).unwrap(), 0.3, jumps).unwrap();
        for alpha in [-2.0, -0.5, 1.0, 2.0] {
            let p = fv1_decompose(&f, alpha).unwrap();
            assert!(p.left_continuous.eval(alpha).unwrap().abs() < 1e-15);
            assert!(p.right_continuous.eval(alpha).unwrap().abs() < 1e-15);
            for x in [-1.0, -0.7, 0.2, 0.9, 1.5, 3.0] {
                let sum = p.left_continuous.eval(x).unwrap()
                    + p.right_continuous.eval(x).unwrap()
                    + p.continuous.eval(x).unwrap();
                assert!((sum - f.eval(x).unwrap()).abs() < 1e-12);
            }
        }
        assert!(fv1_decompose(&f, 0.2).is_err());
    }

    #[test]
    fn duplicate_jumps_rejected() {
        let j = Jump { t: 0.0, left: 1.0, right: 0.0 };
        assert!(FV1Function::jumps_only(0.0, vec![j, j]).is_err());
    }

    #[test]
    fn tensor_examples() {
        let f = TensorFVFunction::new(2, vec![(1.0, vec![step_open(0.0), step_closed(0.0)])]).unwrap();
        let parts = tensor_decompose(&f, &[-0.5, -0.5], None).unwrap();
        assert_eq!(parts.len(), 4);
        for (key, part) in &parts {
            if key == &vec![Side::L, Side::R] {
                for x in PROBES {
                    for y in PROBES {
                        assert_eq!(part.eval(&[x, y]).unwrap(), f.eval(&[x, y]).unwrap());
                    }
                }
            } else {
                assert!(part.is_zero(), "{key:?}");
            }
        }

        let y = FV1Function::continuous(identity()).unwrap();
        let g = TensorFVFunction::new(
            2,
            vec![(1.0, vec![step_closed(0.0), y.clone()]), (1.0, vec![step_open(0.0), y.clone()])],
        )
        .unwrap();
        let parts = tensor_decompose(&g, &[-0.5, -0.5], Some(&[1, 0])).unwrap();
        let rr = &parts[&vec![Side::R, Side::R]];
        let lr = &parts[&vec![Side::L, Side::R]];
        for x in PROBES {
            for v in PROBES {
                assert_eq!(rr.eval(&[x, v]).unwrap(), step_closed(0.0).eval(x).unwrap() * v);
                assert_eq!(lr.eval(&[x, v]).unwrap(), step_open(0.0).eval(x).unwrap() * v);
            }
        }
        assert!(parts[&vec![Side::R, Side::L]].is_zero());
        assert!(parts[&vec![Side::L, Side::L]].is_zero());
    }

    #[test]
    fn continuous_tensor_is_all_r() {
        let e = FV1Function::continuous(FunctionSpec::parse("exp(x1)", 1).unwrap()).unwrap();
        let f = TensorFVFunction::new(3, vec![(2.0, vec![e.clone(), e.clone(), e])]).unwrap();
        let parts = tensor_decompose(&f, &[0.0, 0.0, 0.0], None).unwrap();
        for (key, part) in &parts {
            assert_eq!(part.is_zero(), key != &vec![Side::R; 3]);
        }
    }
}
