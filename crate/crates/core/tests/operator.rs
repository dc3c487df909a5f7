mod common;

use common::*;
use proptest::prelude::*;
use qbath::operator::{
    evolve, partial_trace, super_apply, tensor, HilbertSpace, Operator, SuperSign,
};

fn spaces() -> (HilbertSpace, HilbertSpace, HilbertSpace) {
    let a = HilbertSpace::new([("a", 2)]).unwrap();
    let b = HilbertSpace::new([("b", 3)]).unwrap();
    let joint = a.concat(&b).unwrap();
    (a, b, joint)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn keystone_identity(seed in any::<u64>()) {
        prop_assert!(keystone_residue(seed) <= 1e-10);
    }

    #[test]
    fn commutator_is_traceless_and_hermiticity_kept(seed in any::<u64>()) {
        let (_, _, joint) = spaces();
        let mut rng = Lcg(seed);
        let a = random_operator(&mut rng, &joint);
        let x = random_operator(&mut rng, &joint);
        let minus = super_apply(SuperSign::Minus, &a, &x).unwrap();
        let plus = super_apply(SuperSign::Plus, &a, &x).unwrap();
        prop_assert!(minus.trace().norm() <= 1e-12);
        prop_assert!(minus.hermitian_residue() <= 1e-12);
        prop_assert!(plus.hermitian_residue() <= 1e-12);
    }

    #[test]
    fn evolution_keeps_trace_and_spectrum(seed in any::<u64>(), t in -5.0f64..5.0) {
        let (_, _, joint) = spaces();
        let mut rng = Lcg(seed);
        let a = random_operator(&mut rng, &joint);
        let h = random_operator(&mut rng, &joint);
        let out = evolve(&a, &h, t).unwrap();
        prop_assert!((out.trace() - a.trace()).norm() <= 1e-10);
        let before = a.eigenvalues(1e-10).unwrap();
        let after = out.eigenvalues(1e-10).unwrap();
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn tensor_and_partial_trace_keep_traces(seed in any::<u64>()) {
        let (sa, sb, _) = spaces();
        let mut rng = Lcg(seed);
        let a = random_operator(&mut rng, &sa);
        let b = random_operator(&mut rng, &sb);
        let ab = tensor(&a, &b).unwrap();
        prop_assert!((ab.trace() - a.trace() * b.trace()).norm() <= 1e-12);
        let kept = partial_trace(&ab, &["b"]).unwrap();
        prop_assert!((kept.trace() - ab.trace()).norm() <= 1e-12);
        prop_assert!(kept.max_abs_diff(&b.scale(a.trace())).unwrap() <= 1e-12);
    }
}

#[test]
fn bell_state_reduces_to_maximally_mixed() {
    let space = HilbertSpace::qubits("q", 2);
    let mut m = M::zeros(4, 4);
    for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
        m[(i, j)] = c(0.5);
    }
    let bell = Operator::new(space, m).unwrap();
    let reduced = partial_trace(&bell, &["q0"]).unwrap();
    assert!(max_abs(&(reduced.matrix() - id(2) * c(0.5))) < 1e-15);
}

#[test]
fn traceless_system_factor_traces_to_zero() {
    let s = Operator::new(HilbertSpace::qubit("s"), sy()).unwrap();
    let mut rng = Lcg(3);
    let bath = random_operator(&mut rng, &HilbertSpace::new([("b", 3)]).unwrap());
    let out = partial_trace(&tensor(&s, &bath).unwrap(), &["b"]).unwrap();
    assert!(max_abs(out.matrix()) < 1e-15);
}

#[test]
fn precession_sign_convention() {
    // e^{iHt} σx e^{−iHt} with H = ωσz/2, expanded by hand with 2×2 products.
    let (omega, t) = (1.7, 0.45);
    let q = HilbertSpace::qubit("q");
    let h = Operator::new(q.clone(), sz() * c(omega / 2.0)).unwrap();
    let x = Operator::new(q, sx()).unwrap();
    let out = evolve(&x, &h, t).unwrap();
    let u = propagator(&(sz() * c(omega / 2.0)), t);
    let oracle = u.adjoint() * sx() * &u;
    assert!(max_abs(&(out.matrix() - &oracle)) < 1e-12);
    let closed = sx() * c((omega * t).cos()) - sy() * c((omega * t).sin());
    assert!(max_abs(&(oracle - closed)) < 1e-12);
}
