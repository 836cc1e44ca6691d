//! Verdicts for the n-convex order between one-dimensional distributions,
//! for positivity of signed measures against the n-convex cone, and for the
//! box-n-convex order between product or joint discrete distributions.

pub mod piecewise;

use crate::error::{invalid, Error, Result};
use crate::geometry::{AxisSubset, MultiIndex};
use crate::measures::{DiscreteSignedMeasure, Tail};
use crate::exprfn::{tpow_minus, tpow_plus};

pub use piecewise::{Extremes, SplineProfile};

/// Relative tolerance for vanishing moments and sign decisions.
pub const ORDER_TOL: f64 = 1e-9;

/// Mass tolerance for probability inputs.
const PROBABILITY_TOL: f64 = 1e-9;

/// Global sign of a spline profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignClass {
    /// Never below zero; `witness` is where the largest value is attained.
    Nonneg { witness: f64, value: f64 },
    /// Never above zero; `witness` is where the smallest value is attained.
    Nonpos { witness: f64, value: f64 },
    /// Strictly negative at `neg` and strictly positive at `pos`.
    Mixed { neg: f64, neg_value: f64, pos: f64, pos_value: f64 },
}

impl SignClass {
    pub fn name(&self) -> &'static str {
        match self {
            SignClass::Nonneg { .. } => "nonneg",
            SignClass::Nonpos { .. } => "nonpos",
            SignClass::Mixed { .. } => "mixed",
        }
    }
}

/// Why an order check failed.
#[derive(Debug, Clone, PartialEq)]
pub enum FailedCondition {
    None,
    /// A moment that should vanish (or match) does not. `axis` is `None`
    /// for one-dimensional checks; `location` is the projected point of a
    /// joint check where the cancellation fails.
    Moment { axis: Option<usize>, k: u32, value: f64, location: Option<Vec<f64>> },
    /// A spline integral is negative at `u` (with the subset `A` for joint checks).
    Spline { subset: Option<AxisSubset>, u: Vec<f64>, value: f64 },
    /// A factor's spline profile takes both signs.
    MixedFactor { factor: usize },
    /// An odd number of factors is nonpositive.
    Parity { nonpos: usize },
}

impl FailedCondition {
    pub fn name(&self) -> &'static str {
        match self {
            FailedCondition::None => "none",
            FailedCondition::Moment { .. } => "moment",
            FailedCondition::Spline { .. } | FailedCondition::MixedFactor { .. } => "spline",
            FailedCondition::Parity { .. } => "parity",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderVerdict {
    pub holds: bool,
    pub failed: FailedCondition,
    /// Per-factor sign classes (product checks).
    pub classes: Vec<SignClass>,
    /// Smallest spline value examined and where (1-d checks).
    pub spline_min: Option<(f64, f64)>,
    /// Whether the minus-side formulation gave the same answer (signed positivity).
    pub minus_side_agrees: Option<bool>,
}

impl OrderVerdict {
    fn holds() -> Self {
        Self { holds: true, failed: FailedCondition::None, classes: Vec::new(), spline_min: None, minus_side_agrees: None }
    }

    fn fails(failed: FailedCondition) -> Self {
        Self { holds: false, failed, classes: Vec::new(), spline_min: None, minus_side_agrees: None }
    }
}

fn require_probability(m: &DiscreteSignedMeasure, what: &str) -> Result<()> {
    if !m.is_probability(PROBABILITY_TOL) {
        return Err(invalid(format!(
            "{what} must be a probability measure (nonnegative weights, mass 1; mass is {})",
            m.mass()
        )));
    }
    Ok(())
}

fn require_1d(m: &DiscreteSignedMeasure) -> Result<()> {
    if m.dim() != 1 {
        return Err(Error::Dimension { expected: 1, got: m.dim() });
    }
    Ok(())
}

fn pairs(m: &DiscreteSignedMeasure) -> Vec<(f64, f64)> {
    m.atoms().iter().map(|a| (a.x[0], a.w)).collect()
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// First `k` in `ks` whose moment of `gamma` is not negligible against the
/// matching moment scale of `reference`.
fn first_nonvanishing_moment(
    gamma: &DiscreteSignedMeasure,
    reference: &[&DiscreteSignedMeasure],
    ks: impl IntoIterator<Item = u32>,
) -> Option<(u32, f64)> {
    ks.into_iter().find_map(|k| {
        let value = gamma.moment(&[k]).ok()?;
        let scale: f64 = reference.iter().map(|m| m.moment_scale(&[k])).sum();
        (value.abs() > ORDER_TOL * scale).then_some((k, value))
    })
}

/// `X <=_{n-cx} Y` for one-dimensional probability measures: moments
/// `1..=n` agree and `t -> E(Y - t)_+^n - E(X - t)_+^n` is nonnegative.
pub fn check_nconvex_order(x: &DiscreteSignedMeasure, y: &DiscreteSignedMeasure, n: u32) -> Result<OrderVerdict> {
    if n == 0 {
        return Err(invalid("order n must be at least 1"));
    }
    require_1d(x)?;
    require_1d(y)?;
    require_probability(x, "X")?;
    require_probability(y, "Y")?;
    let gamma = y.sub(x)?;
    if let Some((k, value)) = first_nonvanishing_moment(&gamma, &[x, y], 1..=n) {
        return Ok(OrderVerdict::fails(FailedCondition::Moment { axis: None, k, value, location: None }));
    }
    let profile = SplineProfile::new(pairs(&gamma), n, Tail::Plus, 1.0);
    let e = profile.extremes();
    let scale = SplineProfile::new(pairs(&x.add(y)?), n, Tail::Plus, 1.0).scale();
    let mut v = if e.min < -ORDER_TOL * scale {
        OrderVerdict::fails(FailedCondition::Spline { subset: None, u: vec![e.argmin], value: e.min })
    } else {
        OrderVerdict::holds()
    };
    v.spline_min = Some((e.min, e.argmin));
    Ok(v)
}

/// `int f dgamma >= 0` for every n-convex `f`: `gamma` has zero mass,
/// moments `1..=n` vanish and `u -> int (x - u)_+^n dgamma` is nonnegative.
/// The minus-side form `(-1)^{n+1} int (x - u)_-^n dgamma` is checked too.
pub fn check_signed_positive(gamma: &DiscreteSignedMeasure, n: u32) -> Result<OrderVerdict> {
    require_1d(gamma)?;
    if gamma.mass().abs() > ORDER_TOL * gamma.total_variation() {
        return Err(invalid(format!("signed measure must have zero total mass (mass is {})", gamma.mass())));
    }
    if let Some((k, value)) = first_nonvanishing_moment(gamma, &[gamma], 1..=n) {
        return Ok(OrderVerdict::fails(FailedCondition::Moment { axis: None, k, value, location: None }));
    }
    let plus = SplineProfile::new(pairs(gamma), n, Tail::Plus, 1.0);
    let minus_sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let minus = SplineProfile::new(pairs(gamma), n, Tail::Minus, minus_sign);
    let tol = ORDER_TOL * plus.scale();
    let (ep, em) = (plus.extremes(), minus.extremes());
    let plus_ok = ep.min >= -tol;
    let minus_ok = em.min >= -tol;
    let mut v = if plus_ok {
        OrderVerdict::holds()
    } else {
        OrderVerdict::fails(FailedCondition::Spline { subset: None, u: vec![ep.argmin], value: ep.min })
    };
    v.spline_min = Some((ep.min, ep.argmin));
    v.minus_side_agrees = Some(plus_ok == minus_ok);
    Ok(v)
}

/// Sign of `u -> H(u) = int (x - u)_+^{q-1} / (q-1)! dgamma(x)`.
pub fn classify_spline_sign(gamma: &DiscreteSignedMeasure, q: u32) -> Result<SignClass> {
    require_1d(gamma)?;
    if q == 0 {
        return Err(invalid("q must be at least 1"));
    }
    let profile = SplineProfile::new(pairs(gamma), q - 1, Tail::Plus, 1.0 / factorial(q - 1));
    let e = profile.extremes();
    let tol = ORDER_TOL * profile.scale();
    Ok(if e.min >= -tol {
        SignClass::Nonneg { witness: e.argmax, value: e.max }
    } else if e.max <= tol {
        SignClass::Nonpos { witness: e.argmin, value: e.min }
    } else {
        SignClass::Mixed { neg: e.argmin, neg_value: e.min, pos: e.argmax, pos_value: e.max }
    })
}

/// Box-n-convex positivity of the product `gamma_1 x ... x gamma_d`: every
/// factor has vanishing moments `0..n_i`, none has a mixed spline sign, and
/// an even number of factors is nonpositive.
pub fn check_box_order_product(factors: &[DiscreteSignedMeasure], n: &MultiIndex) -> Result<OrderVerdict> {
    if factors.len() != n.dim() {
        return Err(Error::Dimension { expected: n.dim(), got: factors.len() });
    }
    for (i, g) in factors.iter().enumerate() {
        require_1d(g)?;
        if g.is_zero() {
            return Err(invalid(format!("factor {} is the zero measure", i + 1)));
        }
        if n.get(i) == 0 {
            return Err(invalid(format!("order on axis {} must be at least 1", i + 1)));
        }
    }
    for (i, g) in factors.iter().enumerate() {
        if let Some((k, value)) = first_nonvanishing_moment(g, &[g], 0..n.get(i) as u32) {
            return Ok(OrderVerdict::fails(FailedCondition::Moment { axis: Some(i), k, value, location: None }));
        }
    }
    let classes = factors
        .iter()
        .enumerate()
        .map(|(i, g)| classify_spline_sign(g, n.get(i) as u32))
        .collect::<Result<Vec<_>>>()?;
    let failed = if let Some(i) = classes.iter().position(|c| matches!(c, SignClass::Mixed { .. })) {
        FailedCondition::MixedFactor { factor: i }
    } else {
        let nonpos = classes.iter().filter(|c| matches!(c, SignClass::Nonpos { .. })).count();
        if nonpos % 2 == 1 {
            FailedCondition::Parity { nonpos }
        } else {
            FailedCondition::None
        }
    };
    let mut v = if failed == FailedCondition::None { OrderVerdict::holds() } else { OrderVerdict::fails(failed) };
    v.classes = classes;
    Ok(v)
}

/// Default probe grid per axis: support coordinates, seven interior points
/// per gap, and one probe beyond each end.
pub fn default_u_grid(measures: &[&DiscreteSignedMeasure], d: usize) -> Vec<Vec<f64>> {
    (0..d)
        .map(|i| {
            let mut s: Vec<f64> = measures.iter().flat_map(|m| m.atoms().iter().map(move |a| a.x[i])).collect();
            s.sort_by(f64::total_cmp);
            s.dedup();
            let mut grid = Vec::new();
            if let (Some(&first), Some(&last)) = (s.first(), s.last()) {
                let pad = (last - first).max(1.0);
                grid.push(first - pad);
                for w in s.windows(2) {
                    grid.push(w[0]);
                    grid.extend((1..8).map(|k| w[0] + (w[1] - w[0]) * k as f64 / 8.0));
                }
                grid.push(last);
                grid.push(last + pad);
            }
            grid
        })
        .collect()
}

/// `PX <=_{box-n-cx} PY` for d-dimensional probability measures with finite
/// support.
///
/// a) for each axis `i` and `k < n_i`, the image of `x_i^k d(PY - PX)` under
///    the projection forgetting `x_i` is the zero measure;
/// b) `E f_{A,u}(Y) >= E f_{A,u}(X)` for every subset `A` and every `u` on
///    the tensor grid `u_grid` (default [`default_u_grid`]).
pub fn check_box_order_joint(
    px: &DiscreteSignedMeasure,
    py: &DiscreteSignedMeasure,
    n: &MultiIndex,
    u_grid: Option<&[Vec<f64>]>,
) -> Result<OrderVerdict> {
    let d = n.dim();
    for (m, what) in [(px, "PX"), (py, "PY")] {
        if m.dim() != d {
            return Err(Error::Dimension { expected: d, got: m.dim() });
        }
        require_probability(m, what)?;
    }
    if let Some(i) = n.entries().iter().position(|&k| k == 0) {
        return Err(invalid(format!("order on axis {} must be at least 1", i + 1)));
    }
    let gamma = py.sub(px)?;
    let both = px.add(py)?;

    // a) projected cancellation.
    for i in 0..d {
        let rest: Vec<usize> = (0..d).filter(|&j| j != i).collect();
        for k in 0..n.get(i) as u32 {
            let weighted = gamma.reweight(|x| x[i].powi(k as i32));
            let scale = both.reweight(|x| x[i].abs().powi(k as i32)).total_variation();
            let tol = ORDER_TOL * scale;
            if rest.is_empty() {
                let value = weighted.mass();
                if value.abs() > tol {
                    return Ok(OrderVerdict::fails(FailedCondition::Moment {
                        axis: Some(i),
                        k,
                        value,
                        location: None,
                    }));
                }
                continue;
            }
            let projected = weighted.project(&rest)?;
            if let Some(a) = projected.atoms().iter().find(|a| a.w.abs() > tol) {
                return Ok(OrderVerdict::fails(FailedCondition::Moment {
                    axis: Some(i),
                    k,
                    value: a.w,
                    location: Some(a.x.clone()),
                }));
            }
        }
    }

    // b) spline-kernel dominance on the grid.
    let default;
    let grid = match u_grid {
        Some(g) => {
            if g.len() != d || g.iter().any(Vec::is_empty) {
                return Err(invalid(format!("u grid needs {d} nonempty axis lists")));
            }
            g
        }
        None => {
            default = default_u_grid(&[px, py], d);
            &default[..]
        }
    };
    let mut search = KernelSearch::new(&gamma, &both, n.entries(), grid);
    let active: Vec<(usize, f64, f64)> = search.weights.iter().enumerate().map(|(i, &(w, a))| (i, w, a)).collect();
    search.descend(0, &active, 0);
    let worst = search.worst;
    Ok(match worst {
        Some((value, mask, u)) => OrderVerdict::fails(FailedCondition::Spline {
            subset: Some(AxisSubset::from_mask(d, mask)),
            u,
            value,
        }),
        None => OrderVerdict::holds(),
    })
}

/// Exhaustive search of `sum_x gamma(x) f_{A,u}(x)` over the tensor grid,
/// one axis at a time. Kernel values are tabulated per axis, and atoms
/// whose partial product vanishes are dropped before descending further.
struct KernelSearch<'a> {
    grid: &'a [Vec<f64>],
    /// Per atom: signed weight in `gamma` and absolute weight for the scale.
    weights: Vec<(f64, f64)>,
    /// `kernels[j][g][tail][atom]`: factor of axis `j` at `u_j = grid[j][g]`.
    kernels: Vec<Vec<[Vec<f64>; 2]>>,
    u: Vec<f64>,
    worst: Option<(f64, usize, Vec<f64>)>,
}

impl<'a> KernelSearch<'a> {
    fn new(gamma: &DiscreteSignedMeasure, both: &DiscreteSignedMeasure, orders: &[usize], grid: &'a [Vec<f64>]) -> Self {
        let atoms: Vec<&[f64]> = gamma.atoms().iter().chain(both.atoms()).map(|a| &a.x[..]).collect();
        let weights = gamma.atoms().iter().map(|a| (a.w, a.w.abs())).chain(both.atoms().iter().map(|a| (0.0, a.w.abs()))).collect();
        let kernels = orders
            .iter()
            .enumerate()
            .map(|(j, &nj)| {
                let k = (nj - 1) as u32;
                let norm = 1.0 / factorial(k);
                let sign = if nj % 2 == 0 { 1.0 } else { -1.0 };
                grid[j]
                    .iter()
                    .map(|&u| {
                        [
                            atoms.iter().map(|x| norm * tpow_plus(x[j] - u, k)).collect(),
                            atoms.iter().map(|x| sign * norm * tpow_minus(x[j] - u, k)).collect(),
                        ]
                    })
                    .collect()
            })
            .collect();
        Self { grid, weights, kernels, u: vec![0.0; orders.len()], worst: None }
    }

    fn descend(&mut self, axis: usize, active: &[(usize, f64, f64)], mask: usize) {
        if axis == self.grid.len() {
            let (value, scale) = active.iter().fold((0.0, 0.0), |(v, s), &(_, pv, ps)| (v + pv, s + ps));
            if value < -ORDER_TOL * scale && self.worst.as_ref().map_or(true, |w| value < w.0) {
                self.worst = Some((value, mask, self.u.clone()));
            }
            return;
        }
        let mut next = Vec::with_capacity(active.len());
        for g in 0..self.grid[axis].len() {
            self.u[axis] = self.grid[axis][g];
            for tail in 0..2 {
                next.clear();
                let kern = &self.kernels[axis][g][tail];
                next.extend(active.iter().filter_map(|&(i, pv, ps)| {
                    let k = kern[i];
                    (k != 0.0).then(|| (i, pv * k, ps * k.abs()))
                }));
                // Every completion of an empty list evaluates to zero.
                if next.is_empty() {
                    continue;
                }
                let list = std::mem::take(&mut next);
                self.descend(axis + 1, &list, mask | tail << axis);
                next = list;
            }
        }
    }
}

/// `(PX, PY)` with `PY - PX = 2^{1-d} prod_j (gamma_j / c_j)`, where
/// `gamma_j = c_j (P_j - N_j)` splits each zero-mass factor into
/// probability measures: `PY` averages the products with an even number of
/// `N` factors and `PX` those with an odd number.
pub fn product_pair(factors: &[DiscreteSignedMeasure]) -> Result<(DiscreteSignedMeasure, DiscreteSignedMeasure)> {
    let d = factors.len();
    if d == 0 {
        return Err(invalid("need at least one factor"));
    }
    let mut split = Vec::with_capacity(d);
    for (i, g) in factors.iter().enumerate() {
        require_1d(g)?;
        let pos: Vec<(f64, f64)> = pairs(g).into_iter().filter(|p| p.1 > 0.0).collect();
        let neg: Vec<(f64, f64)> = pairs(g).into_iter().filter(|p| p.1 < 0.0).map(|(x, w)| (x, -w)).collect();
        let (cp, cn) = (pos.iter().map(|p| p.1).sum::<f64>(), neg.iter().map(|p| p.1).sum::<f64>());
        if cp == 0.0 || (cp - cn).abs() > ORDER_TOL * (cp + cn) {
            return Err(invalid(format!("factor {} must be a nonzero measure of zero mass", i + 1)));
        }
        let p = DiscreteSignedMeasure::from_pairs(&pos.iter().map(|&(x, w)| (x, w / cp)).collect::<Vec<_>>())?;
        let n = DiscreteSignedMeasure::from_pairs(&neg.iter().map(|&(x, w)| (x, w / cn)).collect::<Vec<_>>())?;
        split.push((p, n));
    }
    let share = 1.0 / (1usize << (d - 1)) as f64;
    let mut even = DiscreteSignedMeasure::zero(d);
    let mut odd = DiscreteSignedMeasure::zero(d);
    for mask in 0..1usize << d {
        let parts: Vec<DiscreteSignedMeasure> =
            (0..d).map(|j| if mask >> j & 1 == 1 { split[j].1.clone() } else { split[j].0.clone() }).collect();
        let prod = DiscreteSignedMeasure::product_all(&parts)?.scale(share);
        if mask.count_ones() % 2 == 0 {
            even = even.add(&prod)?;
        } else {
            odd = odd.add(&prod)?;
        }
    }
    Ok((odd, even))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m1(pairs: &[(f64, f64)]) -> DiscreteSignedMeasure {
        DiscreteSignedMeasure::from_pairs(pairs).unwrap()
    }

    fn gamma() -> DiscreteSignedMeasure {
        m1(&[(0.0, 0.5), (2.0, 0.5), (1.0, -1.0)])
    }

    #[test]
    fn nconvex_order_examples() {
        let v = check_nconvex_order(&m1(&[(0.5, 1.0)]), &m1(&[(0.0, 0.5), (1.0, 0.5)]), 1).unwrap();
        assert!(v.holds);
        let v = check_nconvex_order(&m1(&[(0.0, 1.0)]), &m1(&[(1.0, 1.0)]), 1).unwrap();
        assert!(!v.holds);
        assert!(matches!(v.failed, FailedCondition::Moment { k: 1, .. }));
        let third = 1.0 / 3.0;
        let x = m1(&[(0.0, third), (1.0, third), (2.0, third)]);
        let y = m1(&[(0.0, 0.5), (2.0, 0.5)]);
        assert!(check_nconvex_order(&x, &y, 1).unwrap().holds);
        // Reversed direction fails on the spline condition.
        let v = check_nconvex_order(&y, &x, 1).unwrap();
        assert_eq!(v.failed.name(), "spline");
        assert!(check_nconvex_order(&m1(&[(0.0, 0.5)]), &y, 1).is_err());
    }

    #[test]
    fn signed_positive_examples() {
        let v = check_signed_positive(&gamma(), 1).unwrap();
        assert!(v.holds);
        assert_eq!(v.minus_side_agrees, Some(true));
        let v = check_signed_positive(&m1(&[(0.0, 1.0), (1.0, -1.0)]), 1).unwrap();
        assert!(matches!(v.failed, FailedCondition::Moment { k: 1, value, .. } if value == -1.0));
        assert!(check_signed_positive(&DiscreteSignedMeasure::zero(1), 1).unwrap().holds);
        assert!(check_signed_positive(&m1(&[(0.0, 1.0)]), 1).is_err());
    }

    #[test]
    fn sign_classes() {
        match classify_spline_sign(&gamma(), 2).unwrap() {
            SignClass::Nonneg { value, .. } => assert!((value - 0.5).abs() < 1e-12),
            c => panic!("{c:?}"),
        }
        assert_eq!(classify_spline_sign(&gamma().neg(), 2).unwrap().name(), "nonpos");
        let mixed = m1(&[(0.0, 1.0), (0.5, -2.0), (0.6, 1.0)]);
        match classify_spline_sign(&mixed, 2).unwrap() {
            SignClass::Mixed { neg_value, pos_value, .. } => {
                assert!((neg_value + 0.4).abs() < 1e-12);
                assert!(pos_value >= 0.05 - 1e-12);
            }
            c => panic!("{c:?}"),
        }
        let h = |u: f64| mixed.truncated_power_moment(u, 1, Tail::Plus).unwrap();
        assert!((h(0.0) + 0.4).abs() < 1e-12);
        assert!((h(0.55) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn product_examples() {
        let n = MultiIndex::new(vec![2, 2]).unwrap();
        let g = gamma();
        assert!(check_box_order_product(&[g.clone(), g.clone()], &n).unwrap().holds);
        let v = check_box_order_product(&[g.clone(), g.neg()], &n).unwrap();
        assert_eq!(v.failed, FailedCondition::Parity { nonpos: 1 });
        assert!(check_box_order_product(&[g.neg(), g.neg()], &n).unwrap().holds);
        assert!(check_box_order_product(&[g.clone(), DiscreteSignedMeasure::zero(1)], &n).is_err());
        let shifted = m1(&[(0.0, 1.0), (1.0, -1.0)]);
        let v = check_box_order_product(&[g, shifted], &n).unwrap();
        assert!(matches!(v.failed, FailedCondition::Moment { axis: Some(1), k: 1, .. }));
    }

    #[test]
    fn joint_examples() {
        let n = MultiIndex::new(vec![2, 2]).unwrap();
        let g = gamma();
        let (px, py) = product_pair(&[g.clone(), g.clone()]).unwrap();
        let diff = py.sub(&px).unwrap();
        let expected = g.product(&g).scale(0.5);
        assert!(diff.sub(&expected).unwrap().atoms().iter().all(|a| a.w.abs() < 1e-15));
        assert!(check_box_order_joint(&px, &py, &n, None).unwrap().holds);
        let (px2, py2) = product_pair(&[g.clone(), g.neg()]).unwrap();
        let v = check_box_order_joint(&px2, &py2, &n, None).unwrap();
        assert_eq!(v.failed.name(), "spline");

        assert!(check_box_order_joint(&px, &px, &n, None).unwrap().holds);

        let a = DiscreteSignedMeasure::new(2, vec![(vec![0.0, 0.0], 1.0)]).unwrap();
        let b = DiscreteSignedMeasure::new(2, vec![(vec![1.0, 0.0], 1.0)]).unwrap();
        let v = check_box_order_joint(&a, &b, &n, None).unwrap();
        assert!(matches!(v.failed, FailedCondition::Moment { axis: Some(0), k: 1, .. }), "{v:?}");
    }
}
