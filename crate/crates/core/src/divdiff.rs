//! One-dimensional and multiple divided differences, the right-limit
//! formula, and the sampling-based box-n-convexity certifier.
//!
//! Two independent routes are provided for every divided difference:
//!
//! * the recursive (nested) route applies the difference-quotient
//!   recursion axis by axis;
//! * the expanded route evaluates the closed sum
//!   `sum_j f(x_j) / prod_{l != j} (x_j - x_l)`, in `d` dimensions the
//!   `d`-fold tensor version of it.
//!
//! The expanded route also exposes the largest absolute summand, which is
//! the cancellation scale used to set tolerances.

use crate::error::{invalid, Error, Result};
use crate::exprfn::FunctionSpec;
use crate::geometry::{check_distinct, BoxDomain, MultiIndex, PointSystem};
use crate::sampling::{Sampler, SystemStream, DEFAULT_SEPARATION};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Recursive,
    Expanded,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Recursive => "recursive",
            Method::Expanded => "expanded",
        }
    }
}

/// Divided difference of already evaluated values by the recursion.
pub fn divdiff_values(points: &[f64], values: &[f64]) -> f64 {
    debug_assert_eq!(points.len(), values.len());
    let mut table = values.to_vec();
    let n = points.len();
    for level in 1..n {
        for i in 0..n - level {
            table[i] = (table[i + 1] - table[i]) / (points[i + level] - points[i]);
        }
    }
    table[0]
}

/// Weights `1 / prod_{l != j} (x_j - x_l)` of the expanded form.
pub fn expanded_weights(points: &[f64]) -> Vec<f64> {
    points
        .iter()
        .enumerate()
        .map(|(j, &xj)| {
            let denom: f64 = points
                .iter()
                .enumerate()
                .filter(|&(l, _)| l != j)
                .map(|(_, &xl)| xj - xl)
                .product();
            1.0 / denom
        })
        .collect()
}

/// `[x_0, ..., x_n; f]` for a univariate `f`.
pub fn divdiff_1d(points: &[f64], f: &FunctionSpec, method: Method) -> Result<f64> {
    if points.is_empty() {
        return Err(invalid("divided difference needs at least one point"));
    }
    if f.arity() != 1 {
        return Err(Error::Dimension { expected: 1, got: f.arity() });
    }
    check_distinct(0, points)?;
    let values = points.iter().map(|&x| f.eval1(x)).collect::<Result<Vec<_>, _>>()?;
    Ok(match method {
        Method::Recursive => divdiff_values(points, &values),
        Method::Expanded => expanded_weights(points).iter().zip(&values).map(|(w, v)| w * v).sum(),
    })
}

/// Value of a multiple divided difference with the route that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct DividedDifferenceReport {
    pub value: f64,
    pub system: PointSystem,
    pub method: Method,
    /// Largest absolute summand of the expanded form (0 for the recursive route).
    pub max_term: f64,
}

fn check_system(system: &PointSystem, f: &FunctionSpec) -> Result<()> {
    if system.dim() != f.arity() {
        return Err(Error::Dimension { expected: f.arity(), got: system.dim() });
    }
    Ok(())
}

fn check_order(order: &[usize], d: usize) -> Result<()> {
    let mut seen = vec![false; d];
    if order.len() != d {
        return Err(invalid(format!("axis order must list {d} axes")));
    }
    for &a in order {
        if a >= d || seen[a] {
            return Err(invalid(format!("axis order {order:?} is not a permutation")));
        }
        seen[a] = true;
    }
    Ok(())
}

fn nested(f: &FunctionSpec, system: &PointSystem, order: &[usize], point: &mut [f64]) -> Result<f64> {
    let Some((&outer, inner)) = order.split_last() else {
        return Ok(f.eval(point)?);
    };
    let nodes = system.axis(outer);
    let mut values = Vec::with_capacity(nodes.len());
    for &x in nodes {
        point[outer] = x;
        values.push(nested(f, system, inner, point)?);
    }
    Ok(divdiff_values(nodes, &values))
}

/// Expanded-form value and its largest absolute summand. A summand's size
/// is `|w_j|` times the magnitude reported by
/// [`FunctionSpec::eval_with_magnitude`], so cancellation inside `f` itself
/// (as in `f - W`) is accounted for.
pub fn expanded_sum(f: &FunctionSpec, system: &PointSystem) -> Result<(f64, f64)> {
    check_system(system, f)?;
    let d = system.dim();
    let weights: Vec<Vec<f64>> = system.axes().iter().map(|t| expanded_weights(t)).collect();
    let lens: Vec<usize> = system.axes().iter().map(Vec::len).collect();
    let mut idx = vec![0usize; d];
    let mut point: Vec<f64> = (0..d).map(|i| system.axis(i)[0]).collect();
    let (mut sum, mut max_term) = (0.0f64, 0.0f64);
    loop {
        let w: f64 = (0..d).map(|i| weights[i][idx[i]]).product();
        let (value, magnitude) = f.eval_with_magnitude(&point)?;
        sum += value * w;
        max_term = max_term.max(magnitude * w.abs());
        // Odometer increment, axis 0 fastest.
        let mut axis = 0;
        loop {
            if axis == d {
                return Ok((sum, max_term));
            }
            idx[axis] += 1;
            if idx[axis] < lens[axis] {
                point[axis] = system.axis(axis)[idx[axis]];
                break;
            }
            idx[axis] = 0;
            point[axis] = system.axis(axis)[0];
            axis += 1;
        }
    }
}

/// Multiple divided difference `[x_1; ...; x_d; f]`.
///
/// `axis_order` lists axes in the order the one-dimensional differences are
/// applied (first entry innermost); `None` means `0, 1, ..., d-1`.
pub fn divdiff_multi(
    system: &PointSystem,
    f: &FunctionSpec,
    method: Method,
    axis_order: Option<&[usize]>,
) -> Result<DividedDifferenceReport> {
    check_system(system, f)?;
    let d = system.dim();
    let (value, max_term) = match method {
        Method::Recursive => {
            let default: Vec<usize> = (0..d).collect();
            let order = axis_order.unwrap_or(&default);
            check_order(order, d)?;
            let mut point = vec![0.0; d];
            (nested(f, system, order, &mut point)?, 0.0)
        }
        Method::Expanded => {
            if let Some(order) = axis_order {
                check_order(order, d)?;
            }
            expanded_sum(f, system)?
        }
    };
    Ok(DividedDifferenceReport { value, system: system.clone(), method, max_term })
}

/// `lim_{x_0 -> x_k+} [x_0, x_1, ..., x_n; f]` in closed form, from the
/// values of `f` and of its right derivative at the nodes. `k` is 1-based.
pub fn divdiff_right_limit(
    points: &[f64],
    k: usize,
    f: &FunctionSpec,
    right_derivative: &FunctionSpec,
) -> Result<f64> {
    let n = points.len();
    if n < 2 {
        return Err(invalid("right-limit formula needs at least two points"));
    }
    if k == 0 || k > n {
        return Err(invalid(format!("index k = {k} outside 1..={n}")));
    }
    check_distinct(0, points)?;
    let w = expanded_weights(points);
    let kk = k - 1;
    let xk = points[kk];
    let fk = f.eval1(xk)?;
    let mut total = right_derivative.eval1(xk)? * w[kk];
    for (j, &xj) in points.iter().enumerate() {
        if j == kk {
            continue;
        }
        total += (f.eval1(xj)? * w[j] + fk * w[kk]) / (xj - xk);
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    CertifiedOnSamples,
    Refuted,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::CertifiedOnSamples => "certified-on-samples",
            Verdict::Refuted => "refuted",
        }
    }
}

/// Outcome of a sampling run. `certified-on-samples` is evidence, not proof.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityCertificate {
    pub verdict: Verdict,
    pub trials: usize,
    /// Smallest divided difference seen over all sampled systems.
    pub min_value: f64,
    /// Refuting system with the most negative divided difference.
    pub witness: Option<PointSystem>,
    pub witness_value: Option<f64>,
    /// The refutation threshold at the witness, `tol * max_term`.
    pub witness_threshold: Option<f64>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub trials: usize,
    /// Relative tolerance; scaled per system by the largest expanded summand.
    pub tol: f64,
    pub sampler: Sampler,
    /// Minimum node separation as a fraction of the axis width.
    pub separation: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { trials: 500, tol: 1e-9, sampler: Sampler::Random { seed: 0 }, separation: DEFAULT_SEPARATION }
    }
}

/// Samples `trials` point systems and looks for a negative divided
/// difference of order `n`. A system refutes when its value falls below
/// `-tol * max_term`.
pub fn certify_box_convexity(
    f: &FunctionSpec,
    n: &MultiIndex,
    domain: &BoxDomain,
    opts: &CertifyOptions,
) -> Result<ConvexityCertificate> {
    if opts.trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    if !(opts.tol >= 0.0) {
        return Err(invalid("tolerance must be nonnegative"));
    }
    if f.arity() != n.dim() {
        return Err(Error::Dimension { expected: n.dim(), got: f.arity() });
    }
    let mut stream = SystemStream::new(opts.sampler, domain, n, opts.separation)?;
    let mut min_value = f64::INFINITY;
    let mut witness: Option<(PointSystem, f64, f64)> = None;
    for _ in 0..opts.trials {
        let system = stream.next_system()?;
        let (value, max_term) = expanded_sum(f, &system)?;
        min_value = min_value.min(value);
        let threshold = opts.tol * max_term;
        if value < -threshold && witness.as_ref().map_or(true, |w| value < w.1) {
            witness = Some((system, value, threshold));
        }
    }
    let verdict = if witness.is_some() { Verdict::Refuted } else { Verdict::CertifiedOnSamples };
    let (witness, witness_value, witness_threshold) = match witness {
        Some((s, v, t)) => (Some(s), Some(v), Some(t)),
        None => (None, None, None),
    };
    Ok(ConvexityCertificate {
        verdict,
        trials: opts.trials,
        min_value,
        witness,
        witness_value,
        witness_threshold,
        tolerance: opts.tol,
    })
}
