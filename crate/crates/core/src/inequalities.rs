//! Hermite–Hadamard, Jensen and Raşa type inequalities for box-n-convex
//! functions, and the strongly box-n-convex check.
//!
//! All constructions use independent marginals `Z_{i,A}` distributed as
//! `X_i` for `i in A` and as `Y_i` otherwise; the inequalities state that
//! `sum_A (-1)^{|A|} E f(Z_{1,A}, ..., Z_{d,A}) >= 0`.

use crate::divdiff::{certify_box_convexity, ConvexityCertificate, CertifyOptions};
use crate::error::{invalid, Error, Result};
use crate::exprfn::FunctionSpec;
use crate::geometry::{AxisSubset, BoxDomain, MultiIndex};
use crate::measures::{survival_convolution, DiscreteSignedMeasure, Tail, UniformSegment};
use crate::orders::{classify_spline_sign, FailedCondition, OrderVerdict, SignClass, ORDER_TOL};

/// One-dimensional marginal of a mixture.
#[derive(Debug, Clone, PartialEq)]
pub enum Marginal {
    Discrete(DiscreteSignedMeasure),
    Uniform(UniformSegment),
    Point(f64),
}

impl Marginal {
    /// Nodes and probability weights; exact atoms or quadrature nodes.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        match self {
            Marginal::Discrete(m) => m.atoms().iter().map(|a| (a.x[0], a.w)).collect(),
            Marginal::Uniform(u) => u.nodes(),
            Marginal::Point(x) => vec![(*x, 1.0)],
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Marginal::Discrete(m) => m.atoms().iter().map(|a| a.w * a.x[0]).sum(),
            Marginal::Uniform(u) => u.mean(),
            Marginal::Point(x) => *x,
        }
    }

    fn validate(&self, axis: usize) -> Result<()> {
        if let Marginal::Discrete(m) = self {
            if m.dim() != 1 {
                return Err(Error::Dimension { expected: 1, got: m.dim() });
            }
            if !m.is_probability(1e-9) {
                return Err(invalid(format!("marginal on axis {} is not a probability measure", axis + 1)));
            }
        }
        Ok(())
    }

    fn resolution(&self) -> Option<usize> {
        match self {
            Marginal::Uniform(u) => Some(u.m),
            _ => None,
        }
    }
}

/// The alternating sum with its per-subset expectations.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub value: f64,
    /// `(A, E f(Z_A))` ordered by the bitmask of `A`.
    pub contributions: Vec<(AxisSubset, f64)>,
    /// Largest uniform-segment resolution used, if any.
    pub resolution: Option<usize>,
}

/// `E f` under independent marginals given by node lists.
fn tensor_expectation(f: &FunctionSpec, axes: &[Vec<(f64, f64)>]) -> Result<f64> {
    let d = axes.len();
    let mut idx = vec![0usize; d];
    let mut x: Vec<f64> = axes.iter().map(|a| a[0].0).collect();
    let mut total = 0.0;
    loop {
        let w: f64 = (0..d).map(|i| axes[i][idx[i]].1).product();
        if w != 0.0 {
            total += w * f.eval(&x)?;
        }
        let mut axis = 0;
        loop {
            if axis == d {
                return Ok(total);
            }
            idx[axis] += 1;
            if idx[axis] < axes[axis].len() {
                x[axis] = axes[axis][idx[axis]].0;
                break;
            }
            idx[axis] = 0;
            x[axis] = axes[axis][0].0;
            axis += 1;
        }
    }
}

/// `sum_A (-1)^{|A|} E f(Z_A)` with `Z_{i,A} ~ X_i` on `A`, `Y_i` off `A`.
pub fn alternating_gap(f: &FunctionSpec, xs: &[Marginal], ys: &[Marginal]) -> Result<GapReport> {
    let d = f.arity();
    if xs.len() != d || ys.len() != d {
        return Err(Error::Dimension { expected: d, got: xs.len().min(ys.len()) });
    }
    for (i, m) in xs.iter().chain(ys).enumerate() {
        m.validate(i % d)?;
    }
    let x_nodes: Vec<_> = xs.iter().map(Marginal::nodes).collect();
    let y_nodes: Vec<_> = ys.iter().map(Marginal::nodes).collect();
    if x_nodes.iter().chain(&y_nodes).any(Vec::is_empty) {
        return Err(invalid("every marginal needs at least one atom"));
    }
    let mut contributions = Vec::with_capacity(1 << d);
    let mut value = 0.0;
    for subset in AxisSubset::all(d) {
        let axes: Vec<Vec<(f64, f64)>> =
            (0..d).map(|i| if subset.contains(i) { x_nodes[i].clone() } else { y_nodes[i].clone() }).collect();
        let e = tensor_expectation(f, &axes)?;
        value += if subset.len() % 2 == 0 { e } else { -e };
        contributions.push((subset, e));
    }
    let resolution = xs.iter().chain(ys).filter_map(Marginal::resolution).max();
    Ok(GapReport { value, contributions, resolution })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HHKind {
    /// `X_i` at the midpoint, `Y_i` uniform.
    First,
    /// `X_i` uniform, `Y_i` the two endpoints with weight 1/2 each.
    Second,
}

impl HHKind {
    pub fn name(&self) -> &'static str {
        match self {
            HHKind::First => "first",
            HHKind::Second => "second",
        }
    }
}

/// Hermite–Hadamard gap on the box `prod [a_i, b_i]`.
pub fn hh_check(f: &FunctionSpec, corners: &[(f64, f64)], kind: HHKind, resolution: usize) -> Result<GapReport> {
    let d = f.arity();
    if corners.len() != d {
        return Err(Error::Dimension { expected: d, got: corners.len() });
    }
    let mut xs = Vec::with_capacity(d);
    let mut ys = Vec::with_capacity(d);
    for &(a, b) in corners {
        let uniform = Marginal::Uniform(UniformSegment::new(a, b, resolution)?);
        match kind {
            HHKind::First => {
                xs.push(Marginal::Point(0.5 * (a + b)));
                ys.push(uniform);
            }
            HHKind::Second => {
                xs.push(uniform);
                ys.push(Marginal::Discrete(DiscreteSignedMeasure::from_pairs(&[(a, 0.5), (b, 0.5)])?));
            }
        }
    }
    alternating_gap(f, &xs, &ys)
}

/// Jensen gap: `X_i` is the point mass at the mean of the discrete
/// marginal `Y_i`.
pub fn jensen_gap(f: &FunctionSpec, marginals: &[DiscreteSignedMeasure]) -> Result<GapReport> {
    let ys: Vec<Marginal> = marginals.iter().cloned().map(Marginal::Discrete).collect();
    for (i, m) in ys.iter().enumerate() {
        m.validate(i)?;
    }
    let xs: Vec<Marginal> = ys.iter().map(|m| Marginal::Point(m.mean())).collect();
    alternating_gap(f, &xs, &ys)
}

/// One axis of a Raşa check.
#[derive(Debug, Clone, PartialEq)]
pub struct RasaFactor {
    /// `tau^{*n}` with `tau = nu - mu`.
    pub power: DiscreteSignedMeasure,
    /// Mass and moments `0 < k < n` of the power vanish.
    pub moments_vanish: bool,
    /// `None` when the factor is identically zero.
    pub class: Option<SignClass>,
    /// `(A, truncated-power value, survival-convolution value)` on the grid.
    pub values: Vec<(f64, f64, f64)>,
    /// Largest disagreement between the two evaluations of the factor.
    pub bridge_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RasaReport {
    pub verdict: OrderVerdict,
    pub factors: Vec<RasaFactor>,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Default evaluation points: all support points of `gamma`, all pairwise
/// midpoints, and one probe beyond each end of the hull.
pub fn default_a_grid(gamma: &DiscreteSignedMeasure) -> Vec<f64> {
    let s = gamma.support_1d();
    let (Some(&first), Some(&last)) = (s.first(), s.last()) else {
        return vec![0.0];
    };
    let pad = (last - first).max(1.0);
    let mut g = vec![first - pad];
    for (i, &a) in s.iter().enumerate() {
        g.push(a);
        g.extend(s[i + 1..].iter().map(|&b| 0.5 * (a + b)));
    }
    g.push(last + pad);
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// `(nu_1 - mu_1)^{*n_1} x ... x (nu_d - mu_d)^{*n_d}` is nonnegative on
/// continuous box-n-convex functions iff the product of the factor
/// functions `A -> (F_{nu_i} - F_{mu_i})^{*n_i}(A_i)` is nonnegative.
pub fn rasa_check(
    mus: &[DiscreteSignedMeasure],
    nus: &[DiscreteSignedMeasure],
    n: &MultiIndex,
    a_grid: Option<&[Vec<f64>]>,
) -> Result<RasaReport> {
    let d = n.dim();
    if mus.len() != d || nus.len() != d {
        return Err(Error::Dimension { expected: d, got: mus.len().min(nus.len()) });
    }
    if let Some(g) = a_grid {
        if g.len() != d {
            return Err(Error::Dimension { expected: d, got: g.len() });
        }
    }
    let mut factors = Vec::with_capacity(d);
    for i in 0..d {
        let (mu, nu) = (&mus[i], &nus[i]);
        for (m, what) in [(mu, "mu"), (nu, "nu")] {
            if m.dim() != 1 {
                return Err(Error::Dimension { expected: 1, got: m.dim() });
            }
            if m.is_zero() || !m.is_probability(1e-9) {
                return Err(invalid(format!("{what} on axis {} must be a probability measure with finite support", i + 1)));
            }
        }
        let q = n.get(i);
        if q < 2 {
            return Err(invalid(format!("order on axis {} must be at least 2", i + 1)));
        }
        let tau = nu.sub(mu)?;
        let power = tau.convolution_power(q)?;
        let tv = tau.total_variation().powi(q as i32);
        let moments_vanish = (0..q as u32).all(|k| {
            let scale = tv * power.atoms().iter().map(|a| a.x[0].abs()).fold(1.0, f64::max).powi(k as i32);
            power.moment(&[k]).map_or(false, |v| v.abs() <= 1e-10 * scale.max(1.0))
        });
        let grid = match a_grid {
            Some(g) => g[i].clone(),
            None => default_a_grid(&power),
        };
        let taus = vec![tau.clone(); q];
        let fact = factorial(q - 1);
        let mut values = Vec::with_capacity(grid.len());
        let mut bridge_error = 0.0f64;
        for &a in &grid {
            let bridge = power.truncated_power_moment(a, q as u32 - 1, Tail::Plus)? / fact;
            let direct = if tau.is_zero() { 0.0 } else { survival_convolution(&taus, a)? };
            bridge_error = bridge_error.max((bridge - direct).abs());
            values.push((a, bridge, direct));
        }
        let class = if power.is_zero() { None } else { Some(classify_spline_sign(&power, q as u32)?) };
        // Grid values can only sharpen the class: a strictly signed value of the
        // other sign makes the factor mixed.
        let class = class.map(|c| {
            let tol = ORDER_TOL * power.total_variation().max(1.0);
            let neg = values.iter().filter(|v| v.1 < -tol).min_by(|a, b| a.1.total_cmp(&b.1));
            let pos = values.iter().filter(|v| v.1 > tol).max_by(|a, b| a.1.total_cmp(&b.1));
            match (c, neg, pos) {
                (SignClass::Nonneg { witness, value }, Some(n), _) => {
                    SignClass::Mixed { neg: n.0, neg_value: n.1, pos: witness, pos_value: value }
                }
                (SignClass::Nonpos { witness, value }, _, Some(p)) => {
                    SignClass::Mixed { neg: witness, neg_value: value, pos: p.0, pos_value: p.1 }
                }
                (c, _, _) => c,
            }
        });
        factors.push(RasaFactor { power, moments_vanish, class, values, bridge_error });
    }
    let verdict = if factors.iter().any(|f| f.class.is_none()) {
        // A zero factor makes the whole product vanish.
        OrderVerdict {
            holds: true,
            failed: FailedCondition::None,
            classes: Vec::new(),
            spline_min: None,
            minus_side_agrees: None,
        }
    } else {
        let classes: Vec<SignClass> = factors.iter().filter_map(|f| f.class).collect();
        let failed = if let Some(i) = classes.iter().position(|c| matches!(c, SignClass::Mixed { .. })) {
            FailedCondition::MixedFactor { factor: i }
        } else {
            let nonpos = classes.iter().filter(|c| matches!(c, SignClass::Nonpos { .. })).count();
            if nonpos % 2 == 1 { FailedCondition::Parity { nonpos } } else { FailedCondition::None }
        };
        OrderVerdict { holds: failed == FailedCondition::None, failed, classes, spline_min: None, minus_side_agrees: None }
    };
    Ok(RasaReport { verdict, factors })
}

/// Certifies `g = f - C prod_i x_i^{n_i}` box-n-convex.
pub fn strongly_convex_check(
    f: &FunctionSpec,
    c: f64,
    n: &MultiIndex,
    domain: &BoxDomain,
    opts: &CertifyOptions,
) -> Result<ConvexityCertificate> {
    if !(c >= 0.0) || !c.is_finite() {
        return Err(invalid(format!("modulus C = {c} must be a finite nonnegative number")));
    }
    if f.arity() != n.dim() {
        return Err(Error::Dimension { expected: n.dim(), got: f.arity() });
    }
    let g = if c == 0.0 {
        f.clone()
    } else {
        let powers = n.entries().iter().map(|&k| k as i32).collect();
        FunctionSpec::sum(vec![(1.0, f.clone()), (-c, FunctionSpec::tensor_monomial(powers))])?
    };
    certify_box_convexity(&g, n, domain, opts)
}
