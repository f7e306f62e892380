mod common;

use frontier_core::linear::{analyze_germ, analyze_linear};
use frontier_core::rational::{ratio, Extended};
use frontier_core::{solve, PiecewiseLinear, ProblemInstance, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn linear_instance(rng: &mut ChaCha8Rng) -> ProblemInstance {
    let routes = rng.gen_range(1..=6);
    let resources = rng.gen_range(1..=5usize.min((1 << routes) - 1));
    let g = common::topology(rng, routes, resources);
    let costs = (0..routes)
        .map(|_| {
            let rho = ratio(rng.gen_range(1..=16), 4);
            // A few shared zero ends so that groups have several routes.
            let x = ratio(rng.gen_range(-10..=0), 2);
            PiecewiseLinear::linear(rho, x).unwrap()
        })
        .collect();
    ProblemInstance::new(costs, g).unwrap()
}

fn times_below(rng: &mut ChaCha8Rng, horizon: &Extended, n: usize) -> Vec<Rational> {
    let top = horizon.finite().cloned().unwrap_or_else(|| ratio(20, 1));
    let mut ts: Vec<Rational> = (0..n).map(|_| &top * ratio(rng.gen_range(0..1000), 1000)).collect();
    ts.sort();
    ts.dedup();
    ts
}

#[test]
fn plan_matches_the_stage_solver_below_the_horizon() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in 0..60 {
        let inst = linear_instance(&mut rng);
        let plan = analyze_linear(&inst).unwrap();
        let ts = times_below(&mut rng, plan.horizon(), 40);
        let mut prev: Option<Vec<Rational>> = None;
        for t in &ts {
            let exact = solve(&inst, t).unwrap();
            let closed = plan.eval(t).unwrap();
            assert_eq!(closed, exact.values(), "instance {n} t={t}\n{inst:?}\n{plan:?}");
            let sets: Vec<_> = plan.stages().iter().map(|s| s.active.clone()).collect();
            if *t > ratio(0, 1) {
                assert_eq!(exact.decomposition.partition(), sets, "instance {n} t={t}");
            }
            if let Some(p) = &prev {
                assert!(p.iter().zip(&closed).all(|(a, b)| a <= b), "instance {n} not monotone at {t}");
            }
            prev = Some(closed);
        }
    }
}

#[test]
fn germ_plan_matches_near_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for n in 0..60 {
        let inst = common::instance(&mut rng, 4, 4, -3, 3, false);
        let plan = analyze_germ(&inst).unwrap();
        for t in times_below(&mut rng, plan.horizon(), 10) {
            assert_eq!(plan.eval(&t).unwrap(), solve(&inst, &t).unwrap().values(), "instance {n} t={t}\n{inst:?}");
        }
    }
}
