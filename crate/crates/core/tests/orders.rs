use boxconvex::catalog::{convex_catalog, divided_difference_measure, random_probability};
use boxconvex::measures::{DiscreteSignedMeasure, Tail};
use boxconvex::orders::{
    check_box_order_joint, check_box_order_product, check_nconvex_order, check_signed_positive, classify_spline_sign,
    product_pair, FailedCondition, SignClass,
};
use boxconvex::MultiIndex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn m(pairs: &[(f64, f64)]) -> DiscreteSignedMeasure {
    DiscreteSignedMeasure::from_pairs(pairs).unwrap()
}

fn mi(v: &[usize]) -> MultiIndex {
    MultiIndex::new(v.to_vec()).unwrap()
}

fn second_difference() -> DiscreteSignedMeasure {
    m(&[(0.0, 0.5), (2.0, 0.5), (1.0, -1.0)])
}

#[test]
fn nconvex_order_examples() {
    let v = check_nconvex_order(&m(&[(0.5, 1.0)]), &m(&[(0.0, 0.5), (1.0, 0.5)]), 1).unwrap();
    assert!(v.holds);
    let v = check_nconvex_order(&m(&[(0.0, 1.0)]), &m(&[(1.0, 1.0)]), 1).unwrap();
    assert!(!v.holds);
    assert!(matches!(v.failed, FailedCondition::Moment { k: 1, .. }));
    let third = 1.0 / 3.0;
    let v = check_nconvex_order(&m(&[(0.0, third), (1.0, third), (2.0, third)]), &m(&[(0.0, 0.5), (2.0, 0.5)]), 1).unwrap();
    assert!(v.holds);
}

#[test]
fn signed_positive_examples() {
    assert!(check_signed_positive(&second_difference(), 1).unwrap().holds);
    let v = check_signed_positive(&m(&[(0.0, 1.0), (1.0, -1.0)]), 1).unwrap();
    assert!(matches!(v.failed, FailedCondition::Moment { k: 1, value, .. } if (value + 1.0).abs() < 1e-15));
    assert!(check_signed_positive(&DiscreteSignedMeasure::zero(1), 2).unwrap().holds);
}

#[test]
fn spline_sign_examples() {
    match classify_spline_sign(&second_difference(), 2).unwrap() {
        // The reported value is the largest one; H(0.5) = 0.25 lies below it.
        SignClass::Nonneg { value, .. } => assert!(value >= 0.25),
        other => panic!("expected nonneg, got {other:?}"),
    }
    let h = second_difference().truncated_power_moment(0.5, 1, Tail::Plus).unwrap();
    assert!((h - 0.25).abs() < 1e-15);
    assert!(matches!(classify_spline_sign(&second_difference().neg(), 2).unwrap(), SignClass::Nonpos { .. }));
    let mixed = m(&[(0.0, 1.0), (0.5, -2.0), (0.6, 1.0)]);
    assert!(matches!(classify_spline_sign(&mixed, 2).unwrap(), SignClass::Mixed { .. }));
}

#[test]
fn product_examples() {
    let g = second_difference();
    let n = mi(&[2, 2]);
    assert!(check_box_order_product(&[g.clone(), g.clone()], &n).unwrap().holds);
    let v = check_box_order_product(&[g.clone(), g.neg()], &n).unwrap();
    assert_eq!(v.failed, FailedCondition::Parity { nonpos: 1 });
    assert!(check_box_order_product(&[g.neg(), g.neg()], &n).unwrap().holds);
}

#[test]
fn joint_examples() {
    let g = second_difference();
    let n = mi(&[2, 2]);
    let (px, py) = product_pair(&[g.clone(), g.clone()]).unwrap();
    assert!(check_box_order_joint(&px, &py, &n, None).unwrap().holds);
    assert!(check_box_order_joint(&px, &px, &n, None).unwrap().holds);
    let (px, py) = product_pair(&[g.clone(), g.neg()]).unwrap();
    assert!(!check_box_order_joint(&px, &py, &n, None).unwrap().holds);

    let x = DiscreteSignedMeasure::new(2, vec![(vec![0.0, 0.0], 1.0)]).unwrap();
    let y = DiscreteSignedMeasure::new(2, vec![(vec![1.0, 0.0], 1.0)]).unwrap();
    let v = check_box_order_joint(&x, &y, &n, None).unwrap();
    assert!(matches!(v.failed, FailedCondition::Moment { axis: Some(0), k: 1, .. }), "{:?}", v.failed);
}

fn random_factor(rng: &mut impl Rng, order: usize) -> DiscreteSignedMeasure {
    // A nonzero multiple of a divided-difference measure on order + 1 nodes,
    // optionally negated.
    let mut nodes: Vec<f64> = (0..=order).map(|_| (rng.gen_range(0..12) as f64) * 0.125).collect();
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    while nodes.len() < order + 1 {
        nodes.push(nodes.last().unwrap() + 0.25);
    }
    let base = divided_difference_measure(&nodes).unwrap();
    let base = base.scale(1.0 / base.total_variation());
    if rng.gen_bool(0.3) {
        base.neg()
    } else {
        base
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The product and joint checkers agree on independent products.
    #[test]
    fn product_and_joint_agree(seed in 0u64..100_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = rng.gen_range(1..=2);
        let n = MultiIndex::new((0..d).map(|_| rng.gen_range(1..=2)).collect()).unwrap();
        let factors: Vec<DiscreteSignedMeasure> = n.entries().iter().map(|&k| random_factor(&mut rng, k)).collect();
        let product = check_box_order_product(&factors, &n).unwrap();
        let (px, py) = product_pair(&factors).unwrap();
        let joint = check_box_order_joint(&px, &py, &n, None).unwrap();
        prop_assert_eq!(product.holds, joint.holds);
    }

    /// Approved pairs never decrease the expectation of a box-n-convex function.
    #[test]
    fn approved_pairs_are_sound(seed in 0u64..100_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = mi(&[2, 2]);
        let factors = [random_factor(&mut rng, 2), random_factor(&mut rng, 2)];
        let (px, py) = product_pair(&factors).unwrap();
        let verdict = check_box_order_joint(&px, &py, &n, None).unwrap();
        let catalog = convex_catalog(&mut rng, &n, 5, 0.0, 1.5).unwrap();
        if verdict.holds {
            for f in &catalog {
                let gap = py.expectation(f).unwrap() - px.expectation(f).unwrap();
                prop_assert!(gap >= -1e-8, "gap {}", gap);
            }
        }
        // Identical laws are always comparable.
        let p = random_probability(&mut rng, 2, 4, 0.0, 1.0).unwrap();
        prop_assert!(check_box_order_joint(&p, &p, &n, None).unwrap().holds);
    }
}
