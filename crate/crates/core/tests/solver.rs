use proptest::prelude::*;

use sib::bodies::{crude_radius_bound, ConvexBody};
use sib::io::{generate, GenKind, GenParams};
use sib::reference::{ref_distance, ref_sib, ref_soft_sib};
use sib::sib::{solve, SibInstance, SolverOptions};
use sib::soft::{solve_soft, SoftSibInstance};

const EPS: f64 = 0.05;

fn kind_strategy() -> impl Strategy<Value = GenKind> {
    prop_oneof![
        Just(GenKind::Polytope),
        Just(GenKind::ReducedPolytope),
        Just(GenKind::Aabb),
        Just(GenKind::Ball),
        Just(GenKind::Ellipsoid),
    ]
}

fn instance(kind: GenKind, n: usize, d: usize, m: usize, seed: u64) -> Vec<ConvexBody> {
    generate(&GenParams { kind, n, d, m, seed }).validate().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn hard_solution_brackets_the_optimum(kind in kind_strategy(), n in 2usize..6, d in 1usize..4, m in 1usize..5, seed in any::<u64>()) {
        let bodies = instance(kind, n, d, m, seed);
        let r_ref = ref_sib(&bodies, 1e-8).unwrap().value;
        let (e, _) = crude_radius_bound(&bodies);
        // Overlapping bodies drive the guess toward zero until the cap; covered elsewhere.
        prop_assume!(r_ref > 1e-3 * e);
        let sol = solve(&SibInstance::new(bodies.clone(), EPS).unwrap(), &SolverOptions::default()).unwrap();
        prop_assert!(sol.radius >= r_ref - 1e-7);
        prop_assert!(sol.radius <= (1.0 + EPS) * r_ref + 1e-6);
        // The certificate lower bound never exceeds the optimum.
        prop_assert!(sol.nu_y * std::f64::consts::SQRT_2 <= r_ref + 1e-7);
        prop_assert!(sol.feasibility_residual(&bodies) <= 1e-9);
        prop_assert!(f64::from(sol.radius_halvings) <= (e / r_ref).log2() + 2.0);
    }

    #[test]
    fn hard_solution_moves_with_translation(n in 2usize..5, d in 1usize..4, seed in any::<u64>(), shift in prop::collection::vec(-50.0f64..50.0, 3)) {
        let bodies = instance(GenKind::Ball, n, d, 1, seed);
        let moved: Vec<ConvexBody> = bodies.iter().map(|b| b.translated(&shift[..d])).collect();
        let r_ref = ref_sib(&bodies, 1e-8).unwrap().value;
        prop_assume!(r_ref > 1e-3 * crude_radius_bound(&bodies).0);
        let b = solve(&SibInstance::new(moved, EPS).unwrap(), &SolverOptions::default()).unwrap();
        // Shifting the center back gives an accurate center for the original bodies.
        let back: Vec<f64> = b.center.iter().zip(&shift).map(|(c, w)| c - w).collect();
        let reach = bodies.iter().map(|body| ref_distance(body, &back)).fold(0.0, f64::max);
        prop_assert!(reach <= (1.0 + EPS) * r_ref + 1e-6, "{reach} vs {r_ref}");
        prop_assert!(b.radius >= r_ref - 1e-7);
    }

    #[test]
    fn soft_solution_brackets_the_optimum(kind in kind_strategy(), n in 2usize..6, d in 1usize..3, m in 1usize..4, seed in any::<u64>(), c_scale in 0.3f64..1.0) {
        let bodies = instance(kind, n, d, m, seed);
        let (e, _) = crude_radius_bound(&bodies);
        prop_assume!(ref_sib(&bodies, 1e-8).unwrap().value > 1e-3 * e);
        let c = c_scale.max(1.0 / n as f64);
        let reference = ref_soft_sib(&bodies, c, 1e-8).unwrap().value;
        let sol = solve_soft(&SoftSibInstance::new(bodies.clone(), c, EPS).unwrap(), &SolverOptions::default()).unwrap();
        prop_assert!(sol.objective >= reference - 1e-7);
        prop_assert!(sol.objective <= (1.0 + EPS) * reference + 1e-6);
        prop_assert!(sol.lower_bound <= reference + 1e-7);
        let recomputed = sol.radius + c * sol.slacks.iter().sum::<f64>();
        prop_assert!((recomputed - sol.objective).abs() <= 1e-9 * sol.objective.max(1.0));
        prop_assert!(sol.feasibility_residual(&bodies) <= 1e-9);
    }
}

#[test]
fn threaded_oracle_matches_inline() {
    let bodies = instance(GenKind::ReducedPolytope, 7, 3, 5, 99);
    let inst = SibInstance::new(bodies, EPS).unwrap();
    let one = solve(&inst, &SolverOptions::default()).unwrap();
    let many = solve(&inst, &SolverOptions { threads: 4, ..SolverOptions::default() }).unwrap();
    assert_eq!(one, many);
}

#[test]
fn shared_point_is_degenerate() {
    let bodies = vec![
        ConvexBody::ball(vec![0.0, 0.0], 1.0).unwrap(),
        ConvexBody::ball(vec![0.0, 0.0], 1.0).unwrap(),
        ConvexBody::ball(vec![0.0, 0.0], 1.0).unwrap(),
    ];
    let err = solve(&SibInstance::new(bodies, EPS).unwrap(), &SolverOptions::default()).unwrap_err();
    assert!(matches!(err, sib::sib::SolveError::Degenerate { .. }), "{err}");
}

#[test]
fn overlapping_bodies_exhaust_a_small_cap() {
    let bodies = vec![ConvexBody::ball(vec![0.0, 0.0], 1.0).unwrap(), ConvexBody::ball(vec![1.0, 0.0], 1.0).unwrap()];
    let options = SolverOptions { max_iterations_cap: 100_000, ..SolverOptions::default() };
    match solve(&SibInstance::new(bodies.clone(), EPS).unwrap(), &options) {
        Err(sib::sib::SolveError::IterationCapExhausted { partial }) => {
            assert!(partial.capped);
            assert!(partial.feasibility_residual(&bodies) <= 1e-9);
            assert!(partial.radius < 1e-2, "{}", partial.radius);
        }
        other => panic!("unexpected {other:?}"),
    }
}
