use graphpot::exhaustion::{restrict, solve_resolvent, SolverConfig};
use graphpot::forms::{contract, energy, Contraction};
use graphpot::graph::{io, Graph, GraphFunction, Window};
use graphpot::heat::poisson_weights;
use graphpot::potential::equilibrium_potential;
use graphpot::verification::{random_finite_graph, random_window};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normal_contractions_do_not_raise_energy(seed: u64, values in prop::collection::vec(-3.0f64..3.0, 1..40)) {
        let g = random_finite_graph(&mut rng(seed), 40, false, false);
        let u: GraphFunction<usize> = values.iter().enumerate().filter(|(i, _)| *i < g.len()).map(|(i, v)| (i, *v)).collect();
        let e = energy(&g, &u).value;
        for kind in [Contraction::Abs, Contraction::Clamp { lo: -0.5, hi: 1.0 }] {
            let c = energy(&g, &contract(&u, kind).unwrap()).value;
            prop_assert!(c <= e + 1e-12 * e.max(1.0));
        }
    }

    #[test]
    fn capacity_shrinks_as_the_window_grows(seed: u64, small in 1usize..10) {
        let mut r = rng(seed);
        let g = random_finite_graph(&mut r, 60, false, false);
        let big = random_window(&g, &0, 30.min(g.len()), &mut r);
        let sub = Window::new(big.vertices()[..small.min(big.len())].iter().copied());
        let cfg = SolverConfig::default();
        let a = equilibrium_potential(&g, &sub, &0, &cfg).unwrap();
        let b = equilibrium_potential(&g, &big, &0, &cfg).unwrap();
        prop_assert!(b.capacity <= a.capacity * (1.0 + 1e-12));
        prop_assert!(b.max_principle_violation <= 1e-12);
    }

    #[test]
    fn green_function_is_symmetric_in_the_measure(seed: u64) {
        let mut r = rng(seed);
        let g = random_finite_graph(&mut r, 50, false, false);
        let w = random_window(&g, &0, g.len().saturating_sub(1).max(1), &mut r);
        let op = restrict(&g, &w).unwrap();
        let cfg = SolverConfig::default();
        let (x, y) = (0, op.len() - 1);
        let gx = solve_resolvent(&op, 0.0, &op.delta(x), &cfg).unwrap();
        let gy = solve_resolvent(&op, 0.0, &op.delta(y), &cfg).unwrap();
        let m = op.measure();
        let (lhs, rhs) = (gx[y] * m[y], gy[x] * m[x]);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()).max(1e-300));
    }

    #[test]
    fn edge_lists_round_trip(seed: u64) {
        let g = random_finite_graph(&mut rng(seed), 30, false, false);
        let all = Window::new(g.vertices());
        let back = io::parse_edge_list(&io::serialize(&g, &all)).unwrap();
        prop_assert!(back.same_as(&g));
        for x in g.vertices() {
            let y = back.vertex(g.key(x)).unwrap();
            prop_assert_eq!(back.measure(&y).to_bits(), g.measure(&x).to_bits());
            prop_assert_eq!(back.potential(&y).to_bits(), g.potential(&x).to_bits());
        }
    }

    #[test]
    fn poisson_weights_sum_to_one(lambda in 0.0f64..5000.0) {
        let w = poisson_weights(lambda, 1e-14);
        let total: f64 = w.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        prop_assert!(w.iter().all(|p| *p >= 0.0));
    }
}
