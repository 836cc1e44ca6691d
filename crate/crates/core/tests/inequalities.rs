use boxconvex::catalog::{convex_catalog, random_probability};
use boxconvex::inequalities::{alternating_gap, hh_check, jensen_gap, rasa_check, HHKind, Marginal};
use boxconvex::measures::{DiscreteSignedMeasure, UniformSegment};
use boxconvex::{FunctionSpec, MultiIndex};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn f(text: &str, d: usize) -> FunctionSpec {
    FunctionSpec::parse(text, d).unwrap()
}

fn mi(v: &[usize]) -> MultiIndex {
    MultiIndex::new(v.to_vec()).unwrap()
}

fn fair_coin() -> DiscreteSignedMeasure {
    DiscreteSignedMeasure::from_pairs(&[(0.0, 0.5), (1.0, 0.5)]).unwrap()
}

fn uniform01() -> Marginal {
    Marginal::Uniform(UniformSegment::new(0.0, 1.0, 16).unwrap())
}

#[test]
fn alternating_gap_examples() {
    let sq = f("x1^2", 1);
    let g = alternating_gap(&sq, &[Marginal::Point(0.5)], &[uniform01()]).unwrap();
    assert!((g.value - 1.0 / 12.0).abs() < 1e-12);
    let g = alternating_gap(&sq, &[uniform01()], &[Marginal::Discrete(fair_coin())]).unwrap();
    assert!((g.value - 1.0 / 6.0).abs() < 1e-12);
    let affine = f("x1*x2 + exp(x1) - 3*x2", 2);
    let xs = [uniform01(), Marginal::Point(0.3)];
    let ys = [Marginal::Discrete(fair_coin()), uniform01()];
    assert!(alternating_gap(&affine, &xs, &ys).unwrap().value.abs() < 1e-12);
}

#[test]
fn hh_examples() {
    let unit2 = [(0.0, 1.0), (0.0, 1.0)];
    let g = hh_check(&f("x1^2*x2^2", 2), &unit2, HHKind::First, 16).unwrap();
    assert!((g.value - 1.0 / 144.0).abs() < 1e-12);
    assert_eq!(g.contributions.len(), 4);
    let g = hh_check(&f("x1^2", 1), &[(0.0, 1.0)], HHKind::First, 16).unwrap();
    assert!((g.value - 1.0 / 12.0).abs() < 1e-12);
    let g = hh_check(&f("x1*x2", 2), &unit2, HHKind::Second, 16).unwrap();
    assert!(g.value.abs() < 1e-13);
}

#[test]
fn jensen_examples() {
    let coins = vec![fair_coin(); 3];
    let g = jensen_gap(&f("x1^2*x2^2*x3^2", 3), &coins).unwrap();
    assert!((g.value - 0.015625).abs() < 1e-15);
    assert_eq!(g.contributions.len(), 8);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let marginals: Vec<DiscreteSignedMeasure> = (0..3).map(|_| random_probability(&mut rng, 1, 4, -1.0, 2.0).unwrap()).collect();
    assert!(jensen_gap(&f("x1*x2*x3", 3), &marginals).unwrap().value.abs() < 1e-13);
}

#[test]
fn rasa_examples() {
    let mu = DiscreteSignedMeasure::binomial(1, 0.25).unwrap();
    let nu = DiscreteSignedMeasure::binomial(1, 0.75).unwrap();
    let r = rasa_check(&[mu.clone()], &[nu.clone()], &mi(&[2]), None).unwrap();
    assert!(r.verdict.holds);
    let at_half = r.factors[0].values.iter().find(|v| v.0 == 0.5).expect("0.5 on the default grid");
    assert!((at_half.1 - 0.125).abs() < 1e-15);
    assert!((at_half.2 - 0.125).abs() < 1e-12);

    let same = rasa_check(&[mu.clone(), nu.clone()], &[mu.clone(), nu.clone()], &mi(&[2, 3]), None).unwrap();
    assert!(same.verdict.holds);
    assert!(same.factors.iter().all(|fac| fac.values.iter().all(|v| v.1 == 0.0)));

    let b = DiscreteSignedMeasure::binomial(2, 0.4).unwrap();
    let c = DiscreteSignedMeasure::binomial(2, 0.6).unwrap();
    let n = mi(&[2, 2]);
    let forward = rasa_check(&[mu.clone(), b.clone()], &[nu.clone(), c.clone()], &n, None).unwrap();
    let swapped = rasa_check(&[nu, b], &[mu, c], &n, None).unwrap();
    assert_eq!(forward.verdict.holds, swapped.verdict.holds);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// For tensor functions the gap is the product of one-dimensional gaps.
    #[test]
    fn tensor_gap_factorizes(a in 1u32..5, b in 1u32..5, lo in -1.0f64..0.0, width in 0.5f64..2.0) {
        let corners = [(lo, lo + width), (lo, lo + width)];
        for kind in [HHKind::First, HHKind::Second] {
            let joint = hh_check(&f(&format!("x1^{a}*exp(x2*{b}/4)"), 2), &corners, kind, 8).unwrap().value;
            let g1 = hh_check(&f(&format!("x1^{a}"), 1), &corners[..1], kind, 8).unwrap().value;
            let g2 = hh_check(&f(&format!("exp(x1*{b}/4)"), 1), &corners[..1], kind, 8).unwrap().value;
            prop_assert!((joint - g1 * g2).abs() <= 1e-11 * (1.0 + (g1 * g2).abs()));
        }
    }

    /// Box-(2,...,2)-convex functions have nonnegative Hermite-Hadamard and
    /// Jensen gaps.
    #[test]
    fn convex_functions_have_nonnegative_gaps(seed in 0u64..100_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = rng.gen_range(1..=2);
        let n = MultiIndex::new(vec![2; d]).unwrap();
        let corners = vec![(0.0, 1.0); d];
        let marginals: Vec<DiscreteSignedMeasure> = (0..d).map(|_| random_probability(&mut rng, 1, 3, 0.0, 1.0).unwrap()).collect();
        for g in convex_catalog(&mut rng, &n, 3, 0.0, 1.0).unwrap() {
            prop_assert!(hh_check(&g, &corners, HHKind::First, 8).unwrap().value >= -1e-8);
            prop_assert!(hh_check(&g, &corners, HHKind::Second, 8).unwrap().value >= -1e-8);
            prop_assert!(jensen_gap(&g, &marginals).unwrap().value >= -1e-8);
        }
    }

    /// The truncated-power and survival-convolution evaluations of every
    /// Rasa factor agree.
    #[test]
    fn rasa_bridge_is_consistent(m in 1usize..4, x in 0.05f64..0.95, y in 0.05f64..0.95, k in 2usize..5) {
        let mu = DiscreteSignedMeasure::binomial(m, x).unwrap();
        let nu = DiscreteSignedMeasure::binomial(m, y).unwrap();
        let r = rasa_check(&[mu], &[nu], &MultiIndex::new(vec![k]).unwrap(), None).unwrap();
        prop_assert!(r.factors[0].bridge_error <= 1e-9, "bridge error {}", r.factors[0].bridge_error);
    }
}

#[test]
fn quadrature_converges_for_kinked_functions() {
    // Per axis: E (U - 0.3)_+^2 - (0.5 - 0.3)^2 for U uniform on [0, 1].
    let one_d = 0.7f64.powi(3) / 3.0 - 0.04;
    let exact = one_d * one_d;
    let g = f("tpow_plus(x1-0.3,2)*tpow_plus(x2-0.3,2)", 2);
    let errors: Vec<f64> = [2, 4, 8, 16, 32]
        .iter()
        .map(|&m| (hh_check(&g, &[(0.0, 1.0), (0.0, 1.0)], HHKind::First, m).unwrap().value - exact).abs())
        .collect();
    assert!(errors.windows(2).all(|w| w[1] <= w[0]), "{errors:?}");
    assert!(errors[4] < 1e-6, "{errors:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Whenever the Rasa check holds, the product of the convolution powers
    /// integrates every synthesized box-n-convex function to a nonnegative value.
    #[test]
    fn rasa_verdicts_are_sound(seed in 0u64..100_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = rng.gen_range(1..=2);
        let n = MultiIndex::new((0..d).map(|_| rng.gen_range(2..=3)).collect()).unwrap();
        let m = rng.gen_range(1..=3);
        let mus: Vec<DiscreteSignedMeasure> =
            (0..d).map(|_| DiscreteSignedMeasure::binomial(m, rng.gen_range(1..10) as f64 / 10.0).unwrap()).collect();
        let nus: Vec<DiscreteSignedMeasure> =
            (0..d).map(|_| DiscreteSignedMeasure::binomial(m, rng.gen_range(1..10) as f64 / 10.0).unwrap()).collect();
        let r = rasa_check(&mus, &nus, &n, None).unwrap();
        if r.verdict.holds {
            let powers: Vec<DiscreteSignedMeasure> = r.factors.iter().map(|fac| fac.power.clone()).collect();
            let product = DiscreteSignedMeasure::product_all(&powers).unwrap();
            let hi = (m * 3) as f64;
            for g in convex_catalog(&mut rng, &n, 4, 0.0, hi).unwrap() {
                let value = product.expectation(&g).unwrap();
                prop_assert!(value >= -1e-8, "integral {}", value);
            }
        }
    }
}
