//! Generators of functions and measures with known properties: random
//! box-n-convex functions synthesized from representing data, catalogs of
//! pseudo-polynomials, and measures that are nonnegative on the n-convex
//! cone by construction. Used by the property tests and the acceptance
//! suite; every generator is deterministic given its RNG.

use std::collections::BTreeMap;

use rand::Rng;

use crate::divdiff::expanded_weights;
use crate::error::Result;
use crate::exprfn::{Builtin, FunctionSpec};
use crate::geometry::{MultiIndex, Side};
use crate::measures::DiscreteSignedMeasure;
use crate::represent::{synthesize, Mode, RepresentationSpec};

fn univariate(b: Builtin) -> FunctionSpec {
    FunctionSpec::Builtin(b)
}

fn power(k: usize) -> FunctionSpec {
    univariate(Builtin::Monomial { arity: 1, axis: 0, k: k as i32 })
}

/// Pseudo-polynomials of degree `n - 1`: for every axis `i` and every
/// `k < n_i`, the products `x_i^k * g(x_j, j != i)` for a few nonpolynomial
/// tensor factors `g`, and one weighted sum of all of them.
pub fn pseudopoly_catalog(n: &MultiIndex) -> Vec<FunctionSpec> {
    let d = n.dim();
    let others: [fn(usize) -> FunctionSpec; 3] = [
        |j| univariate(Builtin::ExpSum { coeffs: vec![0.3 * (j + 1) as f64] }),
        |j| univariate(Builtin::TpowPlus { arity: 1, axis: 0, u: 0.25 * (j + 1) as f64, k: 1 }),
        |_| power(3),
    ];
    let mut out = Vec::new();
    for i in 0..d {
        for k in 0..n.get(i) {
            for other in &others {
                let factors = (0..d).map(|j| if j == i { power(k) } else { other(j) }).collect();
                out.push(FunctionSpec::tensor(factors).expect("univariate factors"));
            }
        }
    }
    let terms = out.iter().enumerate().map(|(t, f)| (1.0 - 0.37 * t as f64, f.clone())).collect();
    out.push(FunctionSpec::sum(terms).expect("same arity"));
    out
}

/// Side vectors allowed in canonical mode: `L` only on axes of order 1.
pub fn canonical_sides(n: &MultiIndex) -> Vec<Vec<Side>> {
    Side::all(n.dim()).filter(|b| b.iter().zip(n.entries()).all(|(s, &k)| *s == Side::R || k == 1)).collect()
}

/// Random canonical representation: anchor and atoms uniform in
/// `[lo, hi]^d`, weights in `(0, 1]`, between one and `max_atoms` atoms
/// on each of a random nonempty set of allowed parts, and (optionally) a
/// random multiple of a catalog pseudo-polynomial as `W`.
pub fn random_representation(
    rng: &mut impl Rng,
    n: &MultiIndex,
    lo: f64,
    hi: f64,
    max_atoms: usize,
    with_w: bool,
) -> Result<RepresentationSpec> {
    let d = n.dim();
    let alpha = (0..d).map(|_| rng.gen_range(lo..hi)).collect();
    let sides = canonical_sides(n);
    let mut parts = BTreeMap::new();
    while parts.is_empty() {
        for b in &sides {
            if rng.gen_bool(0.5) {
                let count = rng.gen_range(1..=max_atoms.max(1));
                let atoms =
                    (0..count).map(|_| ((0..d).map(|_| rng.gen_range(lo..hi)).collect(), rng.gen_range(0.05..1.0))).collect();
                parts.insert(b.clone(), DiscreteSignedMeasure::new(d, atoms)?);
            }
        }
    }
    let w = if with_w {
        let catalog = pseudopoly_catalog(n);
        let f = catalog[rng.gen_range(0..catalog.len())].clone();
        Some(FunctionSpec::sum(vec![(rng.gen_range(-2.0..2.0), f)])?)
    } else {
        None
    };
    RepresentationSpec::new(n.clone(), alpha, w, parts, Mode::Canonical)
}

/// `count` box-n-convex functions synthesized from random representations.
pub fn convex_catalog(rng: &mut impl Rng, n: &MultiIndex, count: usize, lo: f64, hi: f64) -> Result<Vec<FunctionSpec>> {
    (0..count).map(|t| synthesize(&random_representation(rng, n, lo, hi, 4, t % 2 == 1)?)).collect()
}

/// `sum_j w_j delta_{x_j}` with `w` the weights of the divided difference on
/// `nodes`: nonnegative on every `(nodes.len() - 1)`-convex function, with
/// vanishing moments of order below `nodes.len() - 1`.
pub fn divided_difference_measure(nodes: &[f64]) -> Result<DiscreteSignedMeasure> {
    let w = expanded_weights(nodes);
    DiscreteSignedMeasure::from_pairs(&nodes.iter().copied().zip(w).collect::<Vec<_>>())
}

/// A probability measure on `[lo, hi]^dim` with `atoms` random atoms.
pub fn random_probability(rng: &mut impl Rng, dim: usize, atoms: usize, lo: f64, hi: f64) -> Result<DiscreteSignedMeasure> {
    let raw: Vec<f64> = (0..atoms).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let atoms = raw.into_iter().map(|w| ((0..dim).map(|_| rng.gen_range(lo..hi)).collect(), w / total)).collect();
    DiscreteSignedMeasure::new(dim, atoms)
}

/// `nodes` distinct sorted values in `[lo, hi]` at least `sep` apart.
pub fn separated_nodes(rng: &mut impl Rng, count: usize, lo: f64, hi: f64, sep: f64) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..count).map(|_| rng.gen_range(lo..hi)).collect();
        v.sort_by(f64::total_cmp);
        if v.windows(2).all(|w| w[1] - w[0] >= sep) {
            return v;
        }
    }
}
