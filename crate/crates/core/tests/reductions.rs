//! Reductions preserve optima and map solutions both ways.

use rand::Rng as _;
use repcut::gen::{random_hitting_set, random_instance, random_steiner, InstanceShape};
use repcut::oracle::{exact_hitting_set, exact_solve, exact_steiner_multicut, OracleLimits, OracleOutcome};
use repcut::reductions::{
    fixed_to_single_to_some_to_all, fixed_to_single_to_some_to_single, hitting_set_to_fixed_to_single, some_to_some_to_steiner,
    steiner_cut_weight, steiner_to_some_to_some, HittingSetInstance, VariantReduction,
};
use repcut::rng::stream;
use repcut::variants::{validate_solution, Variant, VariantInstance};

fn oracle(inst: &VariantInstance) -> OracleOutcome {
    exact_solve(inst, &OracleLimits::default()).unwrap()
}

fn valid(inst: &VariantInstance, sol: &repcut::CutSolution) -> bool {
    validate_solution(inst, sol).unwrap().is_accept()
}

#[test]
fn hitting_set_becomes_a_star() {
    let h = HittingSetInstance::named(&["x", "y", "z"], &[&["x", "y"], &["y", "z"]]).unwrap();
    let red = hitting_set_to_fixed_to_single(&h).unwrap();
    let t = &red.target;
    assert_eq!(t.variant, Variant::FixedToSingle);
    assert_eq!(t.graph.names(), ["s", "x", "y", "z"]);
    assert_eq!(t.fixed, Some(0));
    assert_eq!(t.family.sets(), [vec![1, 2], vec![2, 3]]);
    assert!(t.graph.edges().iter().all(|e| e.u == 0 && e.w == 1.0));

    let best = exact_hitting_set(&h).unwrap();
    assert_eq!(best, vec![1]);
    let sol = red.forward(&best).unwrap();
    assert_eq!(sol.weight, 1.0);
    assert_eq!(oracle(t).weight(), Some(1.0));
    assert_eq!(red.backward(&sol).unwrap(), best);
}

#[test]
fn center_name_avoids_collisions() {
    let h = HittingSetInstance::named(&["s", "t"], &[&["s"], &["t"]]).unwrap();
    let red = hitting_set_to_fixed_to_single(&h).unwrap();
    assert_eq!(red.target.graph.name(0), "s'");
}

#[test]
fn hitting_set_optimum_is_preserved() {
    let mut r = stream(21, 0);
    for _ in 0..60 {
        let ground = r.random_range(2..=7);
        let sets = r.random_range(1..=4);
        let h = random_hitting_set(&mut r, ground, sets, 3);
        let red = hitting_set_to_fixed_to_single(&h).unwrap();
        let best = exact_hitting_set(&h).unwrap();
        let opt = oracle(&red.target);
        assert_eq!(opt.weight(), Some(best.len() as f64));
        let back = red.backward(opt.solution().unwrap()).unwrap();
        assert!(h.is_hitting_set(&back));
        assert_eq!(back.len(), best.len());
        assert!(valid(&red.target, &red.forward(&best).unwrap()));
    }
}

fn check_variant_reduction(red: &VariantReduction) {
    let (src, tgt) = (oracle(&red.source), oracle(&red.target));
    assert_eq!(src.weight(), tgt.weight());
    if let (Some(s), Some(t)) = (src.solution(), tgt.solution()) {
        let fwd = red.forward(s).unwrap();
        assert!(valid(&red.target, &fwd));
        assert_eq!(fwd.weight, s.weight);
        let back = red.backward(t).unwrap();
        assert!(valid(&red.source, &back));
        assert_eq!(back.weight, t.weight);
    }
}

#[test]
fn fixed_to_single_reductions_preserve_optima() {
    let mut r = stream(22, 0);
    let shape = InstanceShape {
        nodes: 5,
        edges: 7,
        q: 2,
        max_set_size: 2,
        max_weight: 10,
    };
    for _ in 0..40 {
        let inst = random_instance(&mut r, Variant::FixedToSingle, &shape);
        check_variant_reduction(&fixed_to_single_to_some_to_single(&inst).unwrap());
        check_variant_reduction(&fixed_to_single_to_some_to_all(&inst).unwrap());
    }
}

#[test]
fn some_to_all_reduction_needs_two_sets() {
    let shape = InstanceShape {
        q: 1,
        ..Default::default()
    };
    let inst = random_instance(&mut stream(23, 0), Variant::FixedToSingle, &shape);
    assert!(fixed_to_single_to_some_to_all(&inst).is_err());
}

#[test]
fn steiner_round_trip() {
    let mut r = stream(24, 0);
    let lim = OracleLimits::default();
    for _ in 0..40 {
        let sm = random_steiner(&mut r, 6, 8, 2, 3, 10);
        let red = steiner_to_some_to_some(&sm).unwrap();
        assert_eq!(red.target.q(), 4);
        let exact = exact_steiner_multicut(&sm, &lim).unwrap();
        let opt = oracle(&red.target);
        assert_eq!(exact.as_ref().map(|e| e.1), opt.weight());
        if let (Some((cut, w)), Some(sol)) = (exact, opt.solution()) {
            let fwd = red.forward(&cut).unwrap();
            assert!(valid(&red.target, &fwd));
            assert_eq!(fwd.weight, w);
            let back = red.backward(sol).unwrap();
            assert!(sm.is_valid_cut(&back).unwrap());
            assert_eq!(steiner_cut_weight(&sm, &back).unwrap(), sol.weight);
        }
    }
}

#[test]
fn some_to_some_round_trip() {
    let mut r = stream(25, 0);
    let lim = OracleLimits::default();
    let shape = InstanceShape {
        nodes: 6,
        edges: 8,
        q: 3,
        max_set_size: 3,
        max_weight: 10,
    };
    for _ in 0..40 {
        let inst = random_instance(&mut r, Variant::SomeToSome, &shape);
        let red = some_to_some_to_steiner(&inst).unwrap();
        assert_eq!(red.pairs, [(0, 1), (0, 2), (1, 2)]);
        let opt = oracle(&inst);
        let exact = exact_steiner_multicut(&red.target, &lim).unwrap();
        assert_eq!(opt.weight(), exact.as_ref().map(|e| e.1));
        if let (Some(sol), Some((cut, w))) = (opt.solution(), exact) {
            let fwd = red.forward(sol).unwrap();
            assert!(red.target.is_valid_cut(&fwd).unwrap());
            let back = red.backward(&cut).unwrap();
            assert!(valid(&inst, &back));
            assert_eq!(back.weight, w);
        }
    }
}
