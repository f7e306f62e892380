mod common;

use frontier_core::oracle::{dominance_check, nested_maxmin_grid, GridSpec};
use frontier_core::rational::{int, ratio};
use frontier_core::solve;
use num_traits::Signed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn lattice_search_agrees_with_the_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 0..40 {
        let inst = common::instance(&mut rng, 4, 4, -2, 3, true);
        for t in [ratio(1, 2), int(1), int(2)] {
            let f = solve(&inst, &t).unwrap();
            for step in [ratio(1, 4), ratio(1, 8)] {
                let g = nested_maxmin_grid(&inst, &t, &GridSpec::new(step.clone())).unwrap();
                let gap = g.iter().zip(f.values()).map(|(a, b)| (a - b).abs()).max().unwrap();
                assert!(gap <= step, "instance {n} t={t} step={step}: {g:?} vs {:?}\n{inst:?}", f.values());
            }
        }
    }
}

#[test]
fn solver_output_dominates_the_lattice() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in 0..40 {
        let inst = common::instance(&mut rng, 4, 4, -2, 3, true);
        for t in [ratio(1, 2), int(2)] {
            let f = solve(&inst, &t).unwrap();
            let v = dominance_check(&inst, &t, &GridSpec::new(ratio(1, 4)), f.values()).unwrap();
            assert!(v.holds, "instance {n} t={t}: {v:?}");
        }
    }
}

#[test]
fn lowering_one_coordinate_breaks_dominance() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let inst = common::instance(&mut rng, 3, 3, -2, 2, false);
        let t = int(1);
        let mut f = solve(&inst, &t).unwrap().values().to_vec();
        // F itself is admissible, so a vector lowered by more than a step is beaten by a lattice point.
        f[0] -= int(1);
        let v = dominance_check(&inst, &t, &GridSpec::new(ratio(1, 8)).with_lower(int(-4)), &f).unwrap();
        assert!(!v.holds);
    }
}
