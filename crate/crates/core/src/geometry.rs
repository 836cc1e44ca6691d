//! Boxes, order vectors, axis subsets and point systems.
//!
//! Axis indices are 0-based throughout the library; the JSON layer converts
//! from the 1-based numbering used in documents.

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::exprfn::FunctionSpec;

/// Order vector `n = (n_1, ..., n_d)` of a multiple divided difference.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("multi-index must have at least one entry"));
        }
        Ok(Self(entries))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn get(&self, axis: usize) -> usize {
        self.0[axis]
    }

    /// Same index with one entry raised by one.
    pub fn bumped(&self, axis: usize) -> Self {
        let mut e = self.0.clone();
        e[axis] += 1;
        Self(e)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Which side of an interval is closed: `L` for `[x, y)`, `r` for `(x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    L,
    R,
}

impl Side {
    pub fn name(&self) -> &'static str {
        match self {
            Side::L => "L",
            Side::R => "r",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "L" | "l" => Some(Side::L),
            "r" | "R" => Some(Side::R),
            _ => None,
        }
    }

    /// All `2^d` side vectors, the vector for mask bit `i` set having `L` on axis `i`.
    pub fn all(dim: usize) -> impl Iterator<Item = Vec<Side>> {
        (0..1usize << dim).map(move |m| (0..dim).map(|i| if m >> i & 1 == 1 { Side::L } else { Side::R }).collect())
    }

    /// Compact label such as `"Lr"`.
    pub fn label(sides: &[Side]) -> String {
        sides.iter().map(Side::name).collect()
    }

    pub fn parse_label(s: &str) -> Option<Vec<Side>> {
        s.chars().map(|c| Side::parse(&c.to_string())).collect()
    }
}

/// An open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(invalid(format!("interval ({lo}, {hi}) is empty")));
        }
        Ok(Self { lo, hi })
    }

    pub fn unbounded() -> Self {
        Self { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// A product of open intervals `I_1 x ... x I_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    axes: Vec<Interval>,
}

impl BoxDomain {
    pub fn new(axes: Vec<Interval>) -> Result<Self> {
        if axes.is_empty() {
            return Err(invalid("box must have at least one axis"));
        }
        Ok(Self { axes })
    }

    /// The cube `(lo, hi)^d`.
    pub fn cube(d: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![Interval::new(lo, hi)?; d])
    }

    pub fn unbounded(d: usize) -> Self {
        Self { axes: vec![Interval::unbounded(); d] }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Interval] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> Interval {
        self.axes[i]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.axes.len() && self.axes.iter().zip(x).all(|(iv, &v)| iv.contains(v))
    }

    /// Projection onto the axes listed in `subset`.
    pub fn project(&self, subset: &AxisSubset) -> Vec<Interval> {
        subset.members().iter().map(|&i| self.axes[i]).collect()
    }
}

/// A subset `A` of `{0, ..., d-1}` together with the ambient dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AxisSubset {
    dim: usize,
    members: Vec<usize>,
}

impl AxisSubset {
    pub fn new(dim: usize, mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if let Some(&bad) = members.iter().find(|&&m| m >= dim) {
            return Err(invalid(format!("axis {} exceeds dimension {dim}", bad + 1)));
        }
        Ok(Self { dim, members })
    }

    pub fn empty(dim: usize) -> Self {
        Self { dim, members: Vec::new() }
    }

    pub fn full(dim: usize) -> Self {
        Self { dim, members: (0..dim).collect() }
    }

    /// Subset whose members are the set bits of `mask`.
    pub fn from_mask(dim: usize, mask: usize) -> Self {
        Self { dim, members: (0..dim).filter(|i| mask >> i & 1 == 1).collect() }
    }

    pub fn mask(&self) -> usize {
        self.members.iter().fold(0, |m, &i| m | 1 << i)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, axis: usize) -> bool {
        self.members.binary_search(&axis).is_ok()
    }

    pub fn complement(&self) -> Self {
        complement(self)
    }

    /// Every subset of `{0, ..., d-1}`, ordered by bitmask.
    pub fn all(dim: usize) -> impl Iterator<Item = AxisSubset> {
        (0..1usize << dim).map(move |m| Self::from_mask(dim, m))
    }
}

/// `A' = {0, ..., d-1} \ A`.
pub fn complement(a: &AxisSubset) -> AxisSubset {
    AxisSubset {
        dim: a.dim,
        members: (0..a.dim).filter(|i| !a.contains(*i)).collect(),
    }
}

/// Assemble the full point `x` with `x_A = y` and `x_{A'} = z`.
pub fn assemble(subset: &AxisSubset, y: &[f64], z: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; subset.dim()];
    let (mut iy, mut iz) = (0, 0);
    for (i, slot) in x.iter_mut().enumerate() {
        if subset.contains(i) {
            *slot = y[iy];
            iy += 1;
        } else {
            *slot = z[iz];
            iz += 1;
        }
    }
    x
}

/// The slice `f_A^z`: a function of the coordinates in `A` with the
/// coordinates in `A'` frozen at `z`.
pub fn slice_function(
    f: &FunctionSpec,
    subset: &AxisSubset,
    z: &[f64],
    domain: Option<&BoxDomain>,
) -> Result<FunctionSpec> {
    if subset.dim() != f.arity() {
        return Err(Error::Dimension { expected: f.arity(), got: subset.dim() });
    }
    let rest = complement(subset);
    if z.len() != rest.len() {
        return Err(Error::Dimension { expected: rest.len(), got: z.len() });
    }
    if let Some(domain) = domain {
        for (&axis, &v) in rest.members().iter().zip(z) {
            let iv = domain.axis(axis);
            if !iv.contains(v) {
                return Err(Error::OutsideInterval { axis, value: v, lo: iv.lo, hi: iv.hi });
            }
        }
    }
    if rest.is_empty() {
        return Ok(f.clone());
    }
    Ok(FunctionSpec::slice(f.clone(), subset.clone(), z.to_vec()))
}

/// Per-axis node tuples `x_i = (x_{i0}, ..., x_{i n_i})`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSystem {
    nodes: Vec<Vec<f64>>,
}

impl PointSystem {
    /// Builds a system after checking pairwise distinctness on each axis.
    pub fn new(nodes: Vec<Vec<f64>>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(invalid("point system needs at least one axis"));
        }
        for (axis, tuple) in nodes.iter().enumerate() {
            if tuple.is_empty() {
                return Err(Error::WrongLength { axis, expected: 1, got: 0 });
            }
            check_distinct(axis, tuple)?;
        }
        Ok(Self { nodes })
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn axis(&self, i: usize) -> &[f64] {
        &self.nodes[i]
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    /// The order vector this system realizes: `n_i = len_i - 1`.
    pub fn order(&self) -> MultiIndex {
        MultiIndex(self.nodes.iter().map(|t| t.len() - 1).collect())
    }

    pub fn into_axes(self) -> Vec<Vec<f64>> {
        self.nodes
    }
}

pub(crate) fn check_distinct(axis: usize, tuple: &[f64]) -> Result<()> {
    for (i, &a) in tuple.iter().enumerate() {
        if !a.is_finite() {
            return Err(invalid(format!("axis {}: node {a} is not finite", axis + 1)));
        }
        for (j, &b) in tuple.iter().enumerate().skip(i + 1) {
            if a == b {
                return Err(Error::DuplicateNode { axis, first: i, second: j, value: a });
            }
        }
    }
    Ok(())
}

/// Checks that axis `i` carries exactly `n_i + 1` distinct nodes inside `I_i`.
pub fn validate_point_system(nodes: &[Vec<f64>], domain: &BoxDomain, n: &MultiIndex) -> Result<()> {
    if nodes.len() != n.dim() {
        return Err(Error::Dimension { expected: n.dim(), got: nodes.len() });
    }
    if domain.dim() != n.dim() {
        return Err(Error::Dimension { expected: n.dim(), got: domain.dim() });
    }
    for (axis, tuple) in nodes.iter().enumerate() {
        let expected = n.get(axis) + 1;
        if tuple.len() != expected {
            return Err(Error::WrongLength { axis, expected, got: tuple.len() });
        }
        check_distinct(axis, tuple)?;
        let iv = domain.axis(axis);
        if let Some(&v) = tuple.iter().find(|&&v| !iv.contains(v)) {
            return Err(Error::OutsideInterval { axis, value: v, lo: iv.lo, hi: iv.hi });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(d: usize, one_based: &[usize]) -> AxisSubset {
        AxisSubset::new(d, one_based.iter().map(|i| i - 1).collect()).unwrap()
    }

    #[test]
    fn complement_examples() {
        assert_eq!(complement(&set(3, &[1, 3])), set(3, &[2]));
        assert_eq!(complement(&set(2, &[])), set(2, &[1, 2]));
        assert!(complement(&set(4, &[1, 2, 3, 4])).is_empty());
    }

    #[test]
    fn complement_is_an_involution() {
        for d in 1..=5 {
            for a in AxisSubset::all(d) {
                assert_eq!(complement(&complement(&a)), a);
            }
        }
    }

    #[test]
    fn subset_rejects_out_of_range_axis() {
        assert!(AxisSubset::new(2, vec![2]).is_err());
    }

    #[test]
    fn assemble_interleaves_coordinates() {
        let a = set(3, &[1, 3]);
        assert_eq!(assemble(&a, &[1.0, 3.0], &[2.0]), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn point_system_validation() {
        let dom = BoxDomain::new(vec![Interval::new(-1.0, 3.0).unwrap()]).unwrap();
        let n = MultiIndex::new(vec![2]).unwrap();
        assert!(validate_point_system(&[vec![0.0, 1.0, 2.0]], &dom, &n).is_ok());
        assert!(matches!(
            validate_point_system(&[vec![0.0, 0.0, 1.0]], &dom, &n),
            Err(Error::DuplicateNode { axis: 0, first: 0, second: 1, .. })
        ));
        assert!(matches!(
            validate_point_system(&[vec![0.0, 1.0]], &dom, &n),
            Err(Error::WrongLength { expected: 3, got: 2, .. })
        ));
        assert!(matches!(
            validate_point_system(&[vec![0.0, 1.0, 3.0]], &dom, &n),
            Err(Error::OutsideInterval { .. })
        ));
    }

    #[test]
    fn empty_interval_rejected() {
        assert!(Interval::new(1.0, 1.0).is_err());
        assert!(Interval::new(f64::NEG_INFINITY, 0.0).is_ok());
    }
}
