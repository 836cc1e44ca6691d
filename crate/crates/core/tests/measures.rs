use boxconvex::measures::{
    fv1_decompose, rectangle_mass, survival_convolution, tensor_decompose, DiscreteSignedMeasure, FV1Function, Jump, Tail,
    TensorFVFunction,
};
use boxconvex::{FunctionSpec, Side};
use proptest::prelude::*;

fn m(pairs: &[(f64, f64)]) -> DiscreteSignedMeasure {
    DiscreteSignedMeasure::from_pairs(pairs).unwrap()
}

fn pairs(m: &DiscreteSignedMeasure) -> Vec<(f64, f64)> {
    m.atoms().iter().map(|a| (a.x[0], a.w)).collect()
}

fn same(a: &DiscreteSignedMeasure, b: &DiscreteSignedMeasure) -> bool {
    let (pa, pb) = (pairs(a), pairs(b));
    pa.len() == pb.len() && pa.iter().zip(&pb).all(|(x, y)| (x.0 - y.0).abs() <= 1e-12 && (x.1 - y.1).abs() <= 1e-12)
}

#[test]
fn convolution_examples() {
    assert!(same(&m(&[(2.0, 1.0)]).convolve(&m(&[(3.0, 1.0)])).unwrap(), &m(&[(5.0, 1.0)])));
    let tau = m(&[(0.0, -0.5), (1.0, 0.5)]);
    assert!(same(&tau.convolve(&tau).unwrap(), &m(&[(0.0, 0.25), (1.0, -0.5), (2.0, 0.25)])));
    assert!(tau.convolve(&DiscreteSignedMeasure::zero(1)).unwrap().is_zero());
}

#[test]
fn moment_examples() {
    assert_eq!(m(&[(1.7, 1.0)]).moment(&[1]).unwrap(), 1.7);
    let g = m(&[(0.0, 0.5), (2.0, 0.5), (1.0, -1.0)]);
    assert!(g.moment(&[1]).unwrap().abs() < 1e-15);
    let h = m(&[(0.3, 2.0), (-1.0, -0.5)]);
    assert_eq!(h.moment(&[0]).unwrap(), h.mass());
}

#[test]
fn truncated_power_examples() {
    let half = m(&[(0.0, 0.5), (1.0, 0.5)]);
    assert!((half.truncated_power_moment(0.25, 1, Tail::Plus).unwrap() - 0.375).abs() < 1e-15);
    for q in 1..4 {
        assert_eq!(m(&[(0.2, 1.0)]).truncated_power_moment(0.9, q, Tail::Plus).unwrap(), 0.0);
    }
    let g = m(&[(0.0, 0.5), (2.0, 0.5), (1.0, -1.0)]);
    assert!((g.truncated_power_moment(0.5, 1, Tail::Plus).unwrap() - 0.25).abs() < 1e-15);
}

#[test]
fn survival_examples() {
    let tau = m(&[(0.0, -0.5), (1.0, 0.5)]);
    assert!((tau.survival(0.5).unwrap() - 0.5).abs() < 1e-15);
    assert_eq!(tau.survival(3.0).unwrap(), 0.0);
    assert_eq!(tau.survival(-1.0).unwrap(), 0.0);
    let g = m(&[(0.0, 1.0), (2.0, -3.0), (5.0, 2.0)]);
    assert!(g.survival(-0.5).unwrap().abs() < 1e-15);
}

#[test]
fn rectangle_mass_examples() {
    let rr = [Side::R, Side::R];
    let xy = FunctionSpec::parse("x1*x2", 2).unwrap();
    assert!((rectangle_mass(&xy, &[(0.0, 1.0), (0.0, 2.0)], &rr).unwrap() - 2.0).abs() < 1e-14);
    let affine = FunctionSpec::parse("3*x1 - x2 + 4", 2).unwrap();
    assert!(rectangle_mass(&affine, &[(0.0, 1.0), (-1.0, 2.0)], &rr).unwrap().abs() < 1e-14);
    let step = FunctionSpec::parse("tpow_plus(x1-0.5,0)*tpow_plus(x2-0.5,0)", 2).unwrap();
    assert_eq!(rectangle_mass(&step, &[(0.0, 1.0), (0.0, 1.0)], &rr).unwrap(), 1.0);
}

fn x_fn() -> FunctionSpec {
    FunctionSpec::parse("x1", 1).unwrap()
}

#[test]
fn fv1_examples() {
    // x + 1_{x >= 0}: the unit jump sits on the left of 0.
    let f = FV1Function::new(x_fn(), 0.0, vec![Jump { t: 0.0, left: 1.0, right: 0.0 }]).unwrap();
    let p = fv1_decompose(&f, -0.5).unwrap();
    for x in [-2.0, -0.5, 0.0, 0.3, 4.0] {
        assert_eq!(p.left_continuous.eval(x).unwrap(), 0.0);
        assert_eq!(p.right_continuous.eval(x).unwrap(), if x >= 0.0 { 1.0 } else { 0.0 });
        assert!((p.continuous.eval(x).unwrap() - x).abs() < 1e-15);
    }
    let smooth = FV1Function::continuous(FunctionSpec::parse("exp(x1)", 1).unwrap()).unwrap();
    let p = fv1_decompose(&smooth, 0.0).unwrap();
    assert!(p.left_continuous.is_zero() && p.right_continuous.is_zero());
    // 1_{x > 0}: the jump sits on the right of 0.
    let f = FV1Function::jumps_only(0.0, vec![Jump { t: 0.0, left: 0.0, right: 1.0 }]).unwrap();
    let p = fv1_decompose(&f, -0.5).unwrap();
    for x in [-1.0, 0.0, 0.1, 3.0] {
        assert_eq!(p.left_continuous.eval(x).unwrap(), if x > 0.0 { 1.0 } else { 0.0 });
        assert_eq!(p.right_continuous.eval(x).unwrap(), 0.0);
        assert_eq!(p.continuous.eval(x).unwrap(), 0.0);
    }
}

fn ge0() -> FV1Function {
    FV1Function::jumps_only(0.0, vec![Jump { t: 0.0, left: 1.0, right: 0.0 }]).unwrap()
}

fn gt0() -> FV1Function {
    FV1Function::jumps_only(0.0, vec![Jump { t: 0.0, left: 0.0, right: 1.0 }]).unwrap()
}

const GRID: [f64; 5] = [-1.0, -0.25, 0.0, 0.5, 2.0];

#[test]
fn tensor_examples() {
    let f = TensorFVFunction::new(2, vec![(1.0, vec![gt0(), ge0()])]).unwrap();
    let parts = tensor_decompose(&f, &[-0.5, -0.5], None).unwrap();
    let lr = &parts[&vec![Side::L, Side::R]];
    for x in GRID {
        for y in GRID {
            assert_eq!(lr.eval(&[x, y]).unwrap(), f.eval(&[x, y]).unwrap());
        }
    }
    for (key, part) in &parts {
        if key != &vec![Side::L, Side::R] {
            assert!(GRID.iter().all(|&x| GRID.iter().all(|&y| part.eval(&[x, y]).unwrap() == 0.0)));
        }
    }

    let y = FV1Function::continuous(x_fn()).unwrap();
    let f = TensorFVFunction::new(2, vec![(1.0, vec![ge0(), y.clone()]), (1.0, vec![gt0(), y])]).unwrap();
    let parts = tensor_decompose(&f, &[-0.5, -0.5], None).unwrap();
    for x in GRID {
        for v in GRID {
            let rr = parts.get(&vec![Side::R, Side::R]).map_or(0.0, |p| p.eval(&[x, v]).unwrap());
            let lr = parts.get(&vec![Side::L, Side::R]).map_or(0.0, |p| p.eval(&[x, v]).unwrap());
            assert_eq!(rr, if x >= 0.0 { v } else { 0.0 });
            assert_eq!(lr, if x > 0.0 { v } else { 0.0 });
        }
    }
}

fn arb_measure() -> impl Strategy<Value = DiscreteSignedMeasure> {
    prop::collection::vec((-8i32..8, -3.0f64..3.0), 1..5).prop_map(|v| {
        // Quarter-integer locations keep sums of locations exact.
        let pairs: Vec<(f64, f64)> = v.into_iter().map(|(k, w)| (k as f64 * 0.25, w)).collect();
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (x, w) in pairs {
            match merged.iter_mut().find(|p| p.0 == x) {
                Some(p) => p.1 += w,
                None => merged.push((x, w)),
            }
        }
        DiscreteSignedMeasure::from_pairs(&merged).unwrap()
    })
}

fn weights_close(a: &DiscreteSignedMeasure, b: &DiscreteSignedMeasure, tol: f64) -> bool {
    // Compare through the distribution functions on a fine grid covering all atoms.
    (-80..=80).all(|i| {
        let x = i as f64 * 0.125 - 0.0625;
        (a.survival(x).unwrap() - b.survival(x).unwrap()).abs() <= tol
    })
}

proptest! {
    #[test]
    fn convolution_is_commutative_and_associative(a in arb_measure(), b in arb_measure(), c in arb_measure()) {
        let ab = a.convolve(&b).unwrap();
        prop_assert!(weights_close(&ab, &b.convolve(&a).unwrap(), 1e-12));
        let left = ab.convolve(&c).unwrap();
        let right = a.convolve(&b.convolve(&c).unwrap()).unwrap();
        prop_assert!(weights_close(&left, &right, 1e-10));
    }

    /// The convolution of the tail functions of two zero-mass measures equals
    /// the first truncated-power moment of their measure convolution.
    #[test]
    fn survival_convolution_matches_bridge(a in arb_measure(), b in arb_measure(), t in -3.0f64..3.0) {
        let za = a.sub(&DiscreteSignedMeasure::from_pairs(&[(0.0, a.mass())]).unwrap()).unwrap();
        let zb = b.sub(&DiscreteSignedMeasure::from_pairs(&[(1.0, b.mass())]).unwrap()).unwrap();
        let direct = survival_convolution(&[za.clone(), zb.clone()], t).unwrap();
        let conv = za.convolve(&zb).unwrap();
        let bridge = conv.truncated_power_moment(t, 1, Tail::Plus).unwrap();
        let scale = conv.total_variation().max(1.0) * 8.0;
        prop_assert!((direct - bridge).abs() <= 1e-9 * scale, "{} vs {}", direct, bridge);
    }
}
