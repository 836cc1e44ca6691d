//! Pseudo-polynomials (the box-n-affine functions): Lagrange slice
//! interpolants, the grid interpolant built axis by axis, regularization
//! `f - W`, and a sampling test for box-n-affinity.
//!
//! A pseudo-polynomial of degree `(m_1, ..., m_d)` is
//! `W(x) = sum_i sum_{k <= m_i} A_ik(x without x_i) x_i^k`. Here the
//! coefficient functions are never tabulated: they are evaluated on demand
//! from the defining function and the Lagrange basis of each axis.

use crate::divdiff::expanded_sum;
use crate::error::{invalid, Error, EvalError, Result};
use crate::exprfn::{FunctionSpec, RealFunction};
use crate::geometry::{check_distinct, BoxDomain, MultiIndex, PointSystem};
use crate::sampling::{Sampler, SystemStream, DEFAULT_SEPARATION};

/// Lagrange data of one axis: nodes, barycentric weights, and the monomial
/// coefficients of each basis polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeAxis {
    axis: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    basis: Vec<Vec<f64>>,
}

impl LagrangeAxis {
    fn new(axis: usize, nodes: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(invalid("Lagrange interpolation needs at least one node"));
        }
        check_distinct(axis, &nodes)?;
        let weights = crate::divdiff::expanded_weights(&nodes);
        let basis = (0..nodes.len())
            .map(|j| {
                // Expand w_j * prod_{l != j} (x - u_l), lowest power first.
                let mut c = vec![weights[j]];
                for (l, &u) in nodes.iter().enumerate() {
                    if l == j {
                        continue;
                    }
                    let mut next = vec![0.0; c.len() + 1];
                    for (k, &ck) in c.iter().enumerate() {
                        next[k + 1] += ck;
                        next[k] -= u * ck;
                    }
                    c = next;
                }
                c
            })
            .collect();
        Ok(Self { axis, nodes, weights, basis })
    }

    pub fn axis(&self) -> usize {
        self.axis
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Values of all basis polynomials at `x`; exactly a unit vector on nodes.
    fn basis_at(&self, x: f64) -> Vec<f64> {
        if let Some(j) = self.nodes.iter().position(|&u| u == x) {
            let mut e = vec![0.0; self.nodes.len()];
            e[j] = 1.0;
            return e;
        }
        (0..self.nodes.len())
            .map(|j| {
                self.nodes
                    .iter()
                    .enumerate()
                    .filter(|&(l, _)| l != j)
                    .fold(self.weights[j], |p, (_, &u)| p * (x - u))
            })
            .collect()
    }
}

/// How a pseudo-polynomial was built, enough to rebuild it from data.
#[derive(Debug, Clone, PartialEq)]
pub enum Origin {
    /// Lagrange interpolant of `f` through the hyperplanes `x_axis = u_j`.
    Slice { axis: usize },
    /// Grid interpolant through every node hyperplane of every axis.
    Grid,
}

/// A box-n-affine function built from a defining function by Lagrange
/// interpolation on axis-aligned hyperplanes.
#[derive(Debug, Clone)]
pub struct PseudoPolynomial {
    source: FunctionSpec,
    origin: Origin,
    /// One stage per axis with at least one node, in increasing axis order.
    stages: Vec<LagrangeAxis>,
    /// Degree per axis; `-1` for axes without terms.
    degree: Vec<isize>,
    /// Node tuples per axis as supplied (empty for axes without terms).
    nodes: Vec<Vec<f64>>,
}

impl PseudoPolynomial {
    pub fn source(&self) -> &FunctionSpec {
        &self.source
    }

    pub fn origin(&self) -> &Origin {
        &self.origin
    }

    pub fn degree(&self) -> &[isize] {
        &self.degree
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn arity(&self) -> usize {
        self.source.arity()
    }

    /// `g_s = f - sum_{t < s} W_t`.
    fn residual(&self, s: usize, x: &[f64]) -> Result<f64, EvalError> {
        let mut v = self.source.eval(x)?;
        for t in 0..s {
            v -= self.stage(t, x)?;
        }
        Ok(v)
    }

    /// `W_s(x) = sum_j l_j(x_i) g_s(x with x_i = u_j)`.
    fn stage(&self, s: usize, x: &[f64]) -> Result<f64, EvalError> {
        let st = &self.stages[s];
        let mut y = x.to_vec();
        let mut total = 0.0;
        for (j, b) in st.basis_at(x[st.axis]).into_iter().enumerate() {
            if b == 0.0 {
                continue;
            }
            y[st.axis] = st.nodes[j];
            total += b * self.residual(s, &y)?;
        }
        Ok(total)
    }

    /// `residual` with the magnitude of everything summed into it.
    fn residual_mag(&self, s: usize, x: &[f64]) -> Result<(f64, f64), EvalError> {
        let (mut v, mut m) = self.source.eval_with_magnitude(x)?;
        for t in 0..s {
            let (w, wm) = self.stage_mag(t, x)?;
            v -= w;
            m += wm;
        }
        Ok((v, m))
    }

    fn stage_mag(&self, s: usize, x: &[f64]) -> Result<(f64, f64), EvalError> {
        let st = &self.stages[s];
        let mut y = x.to_vec();
        let (mut total, mut mag) = (0.0, 0.0);
        for (j, b) in st.basis_at(x[st.axis]).into_iter().enumerate() {
            if b == 0.0 {
                continue;
            }
            y[st.axis] = st.nodes[j];
            let (r, rm) = self.residual_mag(s, &y)?;
            total += b * r;
            mag += b.abs() * rm;
        }
        Ok((total, mag))
    }

    /// The coefficient `A_ik` at the point `x` (the value of `x_i` is ignored).
    /// Returns 0 when `k` exceeds the degree on `axis`.
    pub fn coefficient(&self, axis: usize, k: usize, x: &[f64]) -> Result<f64, EvalError> {
        if x.len() != self.arity() {
            return Err(EvalError::Arity { expected: self.arity(), got: x.len() });
        }
        let Some(s) = self.stages.iter().position(|st| st.axis == axis) else {
            return Ok(0.0);
        };
        let st = &self.stages[s];
        let mut y = x.to_vec();
        let mut total = 0.0;
        for (j, &u) in st.nodes.iter().enumerate() {
            if let Some(&c) = st.basis[j].get(k) {
                y[axis] = u;
                total += c * self.residual(s, &y)?;
            }
        }
        Ok(total)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        if x.len() != self.arity() {
            return Err(EvalError::Arity { expected: self.arity(), got: x.len() });
        }
        let mut total = 0.0;
        for s in 0..self.stages.len() {
            total += self.stage(s, x)?;
        }
        Ok(total)
    }

    pub fn to_function(&self) -> FunctionSpec {
        FunctionSpec::custom(self.clone())
    }
}

impl RealFunction for PseudoPolynomial {
    fn arity(&self) -> usize {
        PseudoPolynomial::arity(self)
    }

    fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        PseudoPolynomial::eval(self, x)
    }

    fn eval_with_magnitude(&self, x: &[f64]) -> Result<(f64, f64), EvalError> {
        let (mut v, mut m) = (0.0, 0.0);
        for s in 0..self.stages.len() {
            let (w, wm) = self.stage_mag(s, x)?;
            v += w;
            m += wm;
        }
        Ok((v, m))
    }

    fn to_json(&self) -> Option<serde_json::Value> {
        crate::io::pseudopoly_to_json(self).ok()
    }
}

fn check_axis(f: &FunctionSpec, axis: usize) -> Result<()> {
    if axis >= f.arity() {
        return Err(invalid(format!("axis {} exceeds arity {}", axis + 1, f.arity())));
    }
    Ok(())
}

/// Pseudo-polynomial with terms on `axis` only, of degree `nodes.len() - 1`
/// there, agreeing with `f` on every hyperplane `x_axis = u_j`.
pub fn lagrange_slice_interpolant(f: &FunctionSpec, axis: usize, nodes: &[f64]) -> Result<PseudoPolynomial> {
    check_axis(f, axis)?;
    let stage = LagrangeAxis::new(axis, nodes.to_vec())?;
    let d = f.arity();
    let mut degree = vec![-1isize; d];
    degree[axis] = nodes.len() as isize - 1;
    let mut all_nodes = vec![Vec::new(); d];
    all_nodes[axis] = nodes.to_vec();
    Ok(PseudoPolynomial { source: f.clone(), origin: Origin::Slice { axis }, stages: vec![stage], degree, nodes: all_nodes })
}

/// Pseudo-polynomial of degree `(n_1 - 1, ..., n_d - 1)` agreeing with `f`
/// on all node hyperplanes, where `n_i = nodes[i].len()`. Axis `i` is
/// interpolated from `f - W_1 - ... - W_{i-1}`.
pub fn grid_interpolant(f: &FunctionSpec, nodes: &[Vec<f64>]) -> Result<PseudoPolynomial> {
    let d = f.arity();
    if nodes.len() != d {
        return Err(Error::Dimension { expected: d, got: nodes.len() });
    }
    let mut stages = Vec::new();
    for (axis, t) in nodes.iter().enumerate() {
        if !t.is_empty() {
            stages.push(LagrangeAxis::new(axis, t.clone())?);
        }
    }
    let degree = nodes.iter().map(|t| t.len() as isize - 1).collect();
    Ok(PseudoPolynomial { source: f.clone(), origin: Origin::Grid, stages, degree, nodes: nodes.to_vec() })
}

fn check_node_counts(n: &MultiIndex, nodes: &[Vec<f64>]) -> Result<()> {
    if nodes.len() != n.dim() {
        return Err(Error::Dimension { expected: n.dim(), got: nodes.len() });
    }
    for (axis, t) in nodes.iter().enumerate() {
        if t.len() != n.get(axis) {
            return Err(Error::WrongLength { axis, expected: n.get(axis), got: t.len() });
        }
    }
    Ok(())
}

/// `g = f - W` with `W` the grid interpolant on `n_i` nodes per axis; `g`
/// vanishes on all node hyperplanes.
pub fn regularize(f: &FunctionSpec, n: &MultiIndex, nodes: &[Vec<f64>]) -> Result<(FunctionSpec, PseudoPolynomial)> {
    if f.arity() != n.dim() {
        return Err(Error::Dimension { expected: n.dim(), got: f.arity() });
    }
    check_node_counts(n, nodes)?;
    let w = grid_interpolant(f, nodes)?;
    let g = f.minus(&w.to_function())?;
    Ok((g, w))
}

/// Sampling evidence for box-n-affinity.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityReport {
    pub affine: bool,
    pub trials: usize,
    /// Largest `|[x_1; ...; x_d; f]|` seen.
    pub max_abs_value: f64,
    /// System attaining it.
    pub worst: Option<PointSystem>,
    pub tolerance: f64,
}

/// True iff every sampled divided difference of order `n` satisfies
/// `|value| <= tol * max_term`, the same scaling the certifier uses.
pub fn check_box_affine(
    f: &FunctionSpec,
    n: &MultiIndex,
    domain: &BoxDomain,
    trials: usize,
    tol: f64,
    sampler: Sampler,
) -> Result<AffinityReport> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    if f.arity() != n.dim() {
        return Err(Error::Dimension { expected: n.dim(), got: f.arity() });
    }
    let mut stream = SystemStream::new(sampler, domain, n, DEFAULT_SEPARATION)?;
    let mut affine = true;
    let mut max_abs = 0.0f64;
    let mut worst = None;
    for _ in 0..trials {
        let system = stream.next_system()?;
        let (value, max_term) = expanded_sum(f, &system)?;
        if value.abs() > tol * max_term {
            affine = false;
        }
        if worst.is_none() || value.abs() > max_abs {
            max_abs = value.abs();
            worst = Some(system);
        }
    }
    Ok(AffinityReport { affine, trials, max_abs_value: max_abs, worst, tolerance: tol })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2(text: &str) -> FunctionSpec {
        FunctionSpec::parse(text, 2).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn single_node_slice_is_the_constant_slice() {
        let w = lagrange_slice_interpolant(&f2("x1*x2"), 0, &[0.0]).unwrap();
        for p in [[1.0, 2.0], [-3.0, 0.5], [0.0, 7.0]] {
            assert_eq!(w.eval(&p).unwrap(), 0.0);
        }
        let e = FunctionSpec::parse("exp(x1)", 1).unwrap();
        let w = lagrange_slice_interpolant(&e, 0, &[0.0]).unwrap();
        assert_eq!(w.eval(&[3.0]).unwrap(), 1.0);
        assert_eq!(w.degree(), &[0]);
    }

    #[test]
    fn two_node_slice_interpolant() {
        let w = lagrange_slice_interpolant(&f2("x1^2*x2"), 0, &[1.0, 2.0]).unwrap();
        assert_eq!(w.degree(), &[1, -1]);
        for (x, y) in [(0.0, 1.0), (3.0, -2.0), (1.5, 0.5)] {
            assert!(close(w.eval(&[x, y]).unwrap(), (3.0 * x - 2.0) * y, 1e-12));
        }
        assert_eq!(w.eval(&[1.0, 5.0]).unwrap(), 5.0);
        assert_eq!(w.eval(&[2.0, 5.0]).unwrap(), 20.0);
        // Monomial coefficients: A_{1,0}(y) = -2y, A_{1,1}(y) = 3y.
        assert!(close(w.coefficient(0, 0, &[9.0, 2.0]).unwrap(), -4.0, 1e-12));
        assert!(close(w.coefficient(0, 1, &[9.0, 2.0]).unwrap(), 6.0, 1e-12));
        assert_eq!(w.coefficient(0, 2, &[9.0, 2.0]).unwrap(), 0.0);
        assert_eq!(w.coefficient(1, 0, &[9.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn grid_interpolant_examples() {
        let w = grid_interpolant(&f2("x1 + x2"), &[vec![0.0], vec![0.0]]).unwrap();
        for p in [[1.0, 2.0], [-0.3, 0.9]] {
            assert!(close(w.eval(&p).unwrap(), p[0] + p[1], 1e-14));
        }
        let c = FunctionSpec::constant(2, 4.25);
        let w = grid_interpolant(&c, &[vec![0.0, 1.0], vec![2.0]]).unwrap();
        assert!(close(w.eval(&[0.3, 0.7]).unwrap(), 4.25, 1e-14));

        let e = f2("exp(x1)*exp(x2)");
        let w = grid_interpolant(&e, &[vec![0.0], vec![0.0]]).unwrap();
        for p in [[0.5f64, 0.25], [-1.0, 2.0]] {
            let expected = p[1].exp() + p[0].exp() - 1.0;
            assert!(close(w.eval(&p).unwrap(), expected, 1e-13));
        }
    }

    #[test]
    fn regularize_examples() {
        let n = MultiIndex::new(vec![1, 1]).unwrap();
        let (g, _) = regularize(&f2("exp(x1)*exp(x2)"), &n, &[vec![0.0], vec![0.0]]).unwrap();
        for p in [[0.5f64, 0.25], [-1.0, 2.0]] {
            let expected = (p[0].exp() - 1.0) * (p[1].exp() - 1.0);
            assert!(close(g.eval(&p).unwrap(), expected, 1e-12));
        }
        assert_eq!(g.eval(&[0.0, 1.7]).unwrap(), 0.0);
        assert_eq!(g.eval(&[1.7, 0.0]).unwrap(), 0.0);

        let (g, w) = regularize(&f2("x1*x2"), &n, &[vec![0.0], vec![0.0]]).unwrap();
        assert_eq!(w.eval(&[3.0, 4.0]).unwrap(), 0.0);
        assert_eq!(g.eval(&[3.0, 4.0]).unwrap(), 12.0);
    }

    #[test]
    fn regularize_checks_node_counts() {
        let n = MultiIndex::new(vec![2, 1]).unwrap();
        assert!(matches!(
            regularize(&f2("x1*x2"), &n, &[vec![0.0], vec![0.0]]),
            Err(Error::WrongLength { axis: 0, expected: 2, got: 1 })
        ));
        assert!(grid_interpolant(&f2("x1"), &[vec![0.0, 0.0], vec![]]).is_err());
    }

    #[test]
    fn zero_degree_axes_contribute_nothing() {
        let w = grid_interpolant(&f2("x1^2*x2 + 3"), &[vec![], vec![1.0, -1.0]]).unwrap();
        assert_eq!(w.degree(), &[-1, 1]);
        // f is linear in x2 so it equals its own interpolant in x2.
        assert!(close(w.eval(&[2.0, 5.0]).unwrap(), 23.0, 1e-12));
        let z = grid_interpolant(&f2("x1"), &[vec![], vec![]]).unwrap();
        assert_eq!(z.eval(&[2.0, 5.0]).unwrap(), 0.0);
    }

    #[test]
    fn affinity_examples() {
        let dom = BoxDomain::cube(2, 0.0, 3.0).unwrap();
        let n = MultiIndex::new(vec![2, 2]).unwrap();
        let run = |f: &FunctionSpec| check_box_affine(f, &n, &dom, 200, 1e-9, Sampler::Random { seed: 3 }).unwrap();
        assert!(run(&f2("x1*x2")).affine);
        assert!(run(&f2("x1^2*x2")).affine);
        let r = run(&f2("x1^2*x2^2"));
        assert!(!r.affine);
        assert!(close(r.max_abs_value, 1.0, 1e-9));
    }

    #[test]
    fn interpolant_of_anything_is_affine() {
        let dom = BoxDomain::cube(2, -1.0, 1.0).unwrap();
        let n = MultiIndex::new(vec![2, 3]).unwrap();
        let nodes = vec![vec![-0.5, 0.5], vec![-0.7, 0.1, 0.6]];
        for text in ["exp(x1 + 2*x2)", "abs(x1 - x2)^3", "tpow_plus(x1 + x2, 2)"] {
            let w = grid_interpolant(&f2(text), &nodes).unwrap().to_function();
            let r = check_box_affine(&w, &n, &dom, 100, 1e-9, Sampler::Random { seed: 11 }).unwrap();
            assert!(r.affine, "{text}: {}", r.max_abs_value);
        }
    }
}
