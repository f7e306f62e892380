#![allow(dead_code)]

use frontier_core::rational::ratio;
use frontier_core::{PiecewiseLinear, ProblemInstance, Rational};
use rand::seq::SliceRandom;
use rand::Rng;

/// `p / q` with `p` uniform in `lo * q ..= hi * q`.
pub fn rational_in<R: Rng>(rng: &mut R, lo: i64, hi: i64, q: i64) -> Rational {
    ratio(rng.gen_range(lo * q..=hi * q), q)
}

/// Distinct nonempty resources whose union covers all routes.
pub fn topology<R: Rng>(rng: &mut R, routes: usize, resources: usize) -> Vec<Vec<usize>> {
    loop {
        let mut sets: Vec<Vec<usize>> = (0..resources)
            .map(|_| {
                let mut g: Vec<usize> = (0..routes).filter(|_| rng.gen_bool(0.5)).collect();
                if g.is_empty() {
                    g.push(rng.gen_range(0..routes));
                }
                g
            })
            .collect();
        // Make sure every route is used somewhere.
        for i in 0..routes {
            if !sets.iter().any(|g| g.contains(&i)) {
                let j = rng.gen_range(0..resources);
                sets[j].push(i);
                sets[j].sort_unstable();
            }
        }
        let mut dedup = sets.clone();
        dedup.sort();
        dedup.dedup();
        if dedup.len() == sets.len() {
            sets.shuffle(rng);
            return sets;
        }
    }
}

/// A cost with up to `pieces` pieces; slopes in `[1/4, 4]`, interior slopes may be zero when `flat` is set.
pub fn cost<R: Rng>(rng: &mut R, x_star: Rational, pieces: usize, flat: bool) -> PiecewiseLinear {
    let n = rng.gen_range(1..=pieces);
    let mut x = x_star.clone();
    let mut segments = Vec::new();
    for _ in 1..n {
        x += rational_in(rng, 0, 2, 4).max(ratio(1, 4));
        let slope = if flat && rng.gen_bool(0.3) { ratio(0, 1) } else { slope(rng) };
        segments.push((x.clone(), slope));
    }
    // The first piece must rise, otherwise the zero end moves.
    if let Some(first) = segments.first_mut() {
        if first.1 == ratio(0, 1) {
            first.1 = ratio(1, 2);
        }
    }
    PiecewiseLinear::new(x_star, segments, slope(rng)).unwrap()
}

pub fn slope<R: Rng>(rng: &mut R) -> Rational {
    ratio(rng.gen_range(1..=16), 4)
}

pub fn instance<R: Rng>(
    rng: &mut R,
    max_routes: usize,
    max_resources: usize,
    x_lo: i64,
    pieces: usize,
    flat: bool,
) -> ProblemInstance {
    let routes = rng.gen_range(1..=max_routes);
    let resources = rng.gen_range(1..=max_resources.min((1 << routes) - 1));
    let g = topology(rng, routes, resources);
    let costs = (0..routes)
        .map(|_| {
            let x = rational_in(rng, x_lo, 0, 8);
            cost(rng, x, pieces, flat)
        })
        .collect();
    ProblemInstance::new(costs, g).unwrap()
}
