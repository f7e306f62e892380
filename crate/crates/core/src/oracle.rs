//! Brute-force checks on a finite lattice, kept independent of the stage solver.
//!
//! Every coordinate ranges over `lower, lower + step, ...` up to `t`, plus the
//! exact points `x*_i` and `t`. [`dominance_check`] enumerates every admissible
//! lattice vector and tests it against a candidate frontier.
//! [`nested_maxmin_grid`] rebuilds the frontier greedily: raise the minimum as
//! far as possible, freeze the coordinates stuck at it, repeat.
//!
//! Freezing a coordinate below its exact level leaves slack on its resources,
//! and a later coordinate with a small slope turns that slack into a large
//! overshoot. On a single lattice the error is therefore not bounded by one
//! step. The greedy search runs on a dyadic refinement of the lattice
//! (`step / 2^refinement`), which keeps the frozen levels close enough for the
//! result to stay within one coarse step of `F(t)`.

use std::ops::Add;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::order::{self, OrderResult};
use crate::rational::Rational;

pub const DEFAULT_CAP: u128 = 2_000_000;
pub const DEFAULT_REFINEMENT: u32 = 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridSpec {
    pub step: Rational,
    /// Defaults to `min_i x*_i`.
    pub lower: Option<Rational>,
    /// Largest lattice the oracle agrees to enumerate.
    pub cap: u128,
    /// The greedy search uses step `step / 2^refinement`.
    pub refinement: u32,
}

impl GridSpec {
    pub fn new(step: Rational) -> Self {
        GridSpec { step, lower: None, cap: DEFAULT_CAP, refinement: DEFAULT_REFINEMENT }
    }

    pub fn with_refinement(mut self, refinement: u32) -> Self {
        self.refinement = refinement;
        self
    }

    pub fn with_lower(mut self, lower: Rational) -> Self {
        self.lower = Some(lower);
        self
    }

    pub fn with_cap(mut self, cap: u128) -> Self {
        self.cap = cap;
        self
    }

    /// Sorted lattice values for every route.
    pub fn lattice(&self, inst: &ProblemInstance, t: &Rational) -> Result<Vec<Vec<Rational>>> {
        let (lower, count) = self.base(inst, t)?;
        let base: Vec<Rational> =
            (0..count).map(|k| &lower + &self.step * Rational::from_integer(BigInt::from(k))).collect();
        Ok(inst
            .zero_ends()
            .into_iter()
            .map(|x| {
                let mut values = base.clone();
                values.push(t.clone());
                if x >= lower {
                    values.push(x);
                }
                values.sort();
                values.dedup();
                values
            })
            .collect())
    }

    /// Upper bound on the number of lattice vectors.
    pub fn vector_count(&self, inst: &ProblemInstance, t: &Rational) -> Result<u128> {
        let (_, count) = self.base(inst, t)?;
        let per_route = u128::from(count) + 2;
        Ok((0..inst.route_count()).fold(1u128, |acc, _| acc.saturating_mul(per_route)))
    }

    /// Upper bound on the total number of lattice points over all routes.
    pub fn point_count(&self, inst: &ProblemInstance, t: &Rational) -> Result<u128> {
        let (_, count) = self.base(inst, t)?;
        Ok((u128::from(count) + 2).saturating_mul(inst.route_count() as u128))
    }

    fn base(&self, inst: &ProblemInstance, t: &Rational) -> Result<(Rational, u64)> {
        if !self.step.is_positive() {
            return Err(Error::InvalidArgument(format!("grid step must be positive, got {}", self.step)));
        }
        let lower = match &self.lower {
            Some(l) => l.clone(),
            None => inst.zero_ends().into_iter().min().expect("instances have routes"),
        };
        if &lower > t {
            return Err(Error::InvalidArgument(format!("lattice lower bound {lower} exceeds t = {t}")));
        }
        let span = ((t - &lower) / &self.step).floor().to_integer();
        let count = span
            .to_u64()
            .and_then(|s| s.checked_add(1))
            .ok_or(Error::LatticeTooLarge { size: u128::MAX, cap: self.cap })?;
        Ok((lower, count))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DominanceVerdict {
    /// Every admissible lattice vector lies ⪕-below the candidate.
    pub holds: bool,
    /// First admissible lattice vector (in enumeration order) that does not.
    pub counterexample: Option<Vec<Rational>>,
    /// How the counterexample relates to the candidate.
    pub relation: Option<OrderResult>,
    pub lattice_size: u128,
    pub admissible: u64,
}

/// Checks that every admissible lattice vector `g` satisfies `g ⪕ candidate`.
pub fn dominance_check(
    inst: &ProblemInstance,
    t: &Rational,
    grid: &GridSpec,
    candidate: &[Rational],
) -> Result<DominanceVerdict> {
    order::check_dims(inst.route_count(), candidate.len())?;
    if t.is_negative() {
        return Err(Error::InvalidArgument(format!("t must be nonnegative, got {t}")));
    }
    let size = grid.vector_count(inst, t)?;
    if size > grid.cap {
        return Err(Error::LatticeTooLarge { size, cap: grid.cap });
    }
    let lattice = grid.lattice(inst, t)?;
    let costs: Vec<Vec<Rational>> =
        lattice.iter().enumerate().map(|(i, values)| values.iter().map(|v| inst.cost(i).eval(v)).collect()).collect();
    let membership = memberships(inst);

    let (admissible, witness) = match Scaled::new(&lattice, &costs, candidate, t) {
        Some(s) => {
            let problem = Enumeration {
                values: &s.values,
                costs: &s.costs,
                candidate: &s.candidate,
                limit: &s.limit,
                membership: &membership,
                zero: 0i128,
            };
            let (n, w) = problem.run();
            (n, w.map(|g| g.iter().enumerate().map(|(i, &k)| lattice[i][k].clone()).collect::<Vec<_>>()))
        }
        None => {
            let problem = Enumeration {
                values: &lattice,
                costs: &costs,
                candidate,
                limit: t,
                membership: &membership,
                zero: Rational::zero(),
            };
            let (n, w) = problem.run();
            (n, w.map(|g| g.iter().enumerate().map(|(i, &k)| lattice[i][k].clone()).collect::<Vec<_>>()))
        }
    };
    let relation = witness.as_ref().map(|g| order::compare(g, candidate).expect("dimensions checked"));
    Ok(DominanceVerdict { holds: witness.is_none(), counterexample: witness, relation, lattice_size: size, admissible })
}

/// Greedy lattice reconstruction of the frontier.
///
/// The cap applies to the total number of coarse lattice points, since the
/// search never enumerates vectors.
pub fn nested_maxmin_grid(inst: &ProblemInstance, t: &Rational, grid: &GridSpec) -> Result<Vec<Rational>> {
    if t.is_negative() {
        return Err(Error::InvalidArgument(format!("t must be nonnegative, got {t}")));
    }
    let size = grid.point_count(inst, t)?;
    if size > grid.cap {
        return Err(Error::LatticeTooLarge { size, cap: grid.cap });
    }
    let (lower, _) = grid.base(inst, t)?;
    let fine = &grid.step / Rational::from_integer(BigInt::one() << grid.refinement);
    let axes: Vec<Axis> = inst.zero_ends().into_iter().map(|x| Axis::new(lower.clone(), fine.clone(), t, x)).collect();
    let feasible = |a: &[Rational]| -> bool {
        inst.resources().iter().all(|g| g.iter().map(|&i| inst.cost(i).eval(&a[i])).sum::<Rational>() <= *t)
    };
    let mut current: Vec<Rational> = vec![lower.clone(); inst.route_count()];
    // Every coordinate at the lower bound is admissible: all costs vanish there.
    if !feasible(&current) {
        return Err(Error::Internal("lattice floor is not admissible".into()));
    }
    let mut free: Vec<usize> = (0..inst.route_count()).collect();

    while !free.is_empty() {
        let lift = |v: &Rational| -> Vec<Rational> {
            let mut a = current.clone();
            for &i in &free {
                a[i] = axes[i].ceil(v);
            }
            a
        };
        // Largest level whose lift is admissible; admissibility is monotone in the level.
        let top = axes[0].top.clone();
        let (mut lo, mut hi) = (BigInt::zero(), top + 1);
        while &hi - &lo > BigInt::one() {
            let mid: BigInt = (&lo + &hi) / 2;
            if feasible(&lift(&axes[0].at(&mid))) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut level = axes[0].at(&lo);
        let mut extras: Vec<&Rational> =
            free.iter().flat_map(|&i| axes[i].extras.iter()).filter(|e| **e > level).collect();
        extras.sort();
        if let Some(e) = extras.into_iter().rev().find(|e| feasible(&lift(e))) {
            level = e.clone();
        }
        current = lift(&level);
        let mut raised = Vec::new();
        for &i in &free {
            if current[i] != level {
                raised.push(i);
                continue;
            }
            if let Some(up) = axes[i].above(&level) {
                let old = std::mem::replace(&mut current[i], up);
                if feasible(&current) {
                    raised.push(i);
                    continue;
                }
                current[i] = old;
            }
        }
        if raised.len() == free.len() {
            return Err(Error::Internal(format!("no coordinate is stuck at level {level}")));
        }
        free = raised;
    }
    Ok(current)
}

/// One coordinate's lattice: `lower + k step` for `0 <= k <= top`, plus the extra points.
struct Axis {
    lower: Rational,
    step: Rational,
    top: BigInt,
    extras: Vec<Rational>,
}

impl Axis {
    fn new(lower: Rational, step: Rational, t: &Rational, zero_end: Rational) -> Self {
        let top = ((t - &lower) / &step).floor().to_integer();
        let mut extras = vec![t.clone()];
        if zero_end >= lower {
            extras.push(zero_end);
        }
        extras.sort();
        extras.dedup();
        Axis { lower, step, top, extras }
    }

    fn at(&self, k: &BigInt) -> Rational {
        &self.lower + &self.step * Rational::from_integer(k.clone())
    }

    /// Smallest lattice point `>= v`; `v` must not exceed `t`.
    fn ceil(&self, v: &Rational) -> Rational {
        if v <= &self.lower {
            return self.lower.clone();
        }
        let k = ((v - &self.lower) / &self.step).ceil().to_integer();
        self.pick(k, |e| e >= v).expect("t is on every axis")
    }

    /// Smallest lattice point `> v`.
    fn above(&self, v: &Rational) -> Option<Rational> {
        let k: BigInt = ((v - &self.lower) / &self.step).floor().to_integer() + 1;
        self.pick(k.max(BigInt::zero()), |e| e > v)
    }

    fn pick(&self, k: BigInt, keep: impl Fn(&Rational) -> bool) -> Option<Rational> {
        let base = (k <= self.top).then(|| self.at(&k));
        let extra = self.extras.iter().find(|e| keep(e)).cloned();
        match (base, extra) {
            (Some(b), Some(e)) => Some(if b < e { b } else { e }),
            (b, e) => b.or(e),
        }
    }
}

fn memberships(inst: &ProblemInstance) -> Vec<Vec<usize>> {
    let mut m = vec![Vec::new(); inst.route_count()];
    for (j, g) in inst.resources().iter().enumerate() {
        for &i in g {
            m[i].push(j);
        }
    }
    m
}

/// The lattice rescaled to integers; absent when the common denominators are too large.
struct Scaled {
    values: Vec<Vec<i128>>,
    costs: Vec<Vec<i128>>,
    candidate: Vec<i128>,
    limit: i128,
}

impl Scaled {
    const BOUND: i64 = 1 << 56;

    fn new(lattice: &[Vec<Rational>], costs: &[Vec<Rational>], candidate: &[Rational], t: &Rational) -> Option<Self> {
        let value_scale = common_denominator(lattice.iter().flatten().chain(candidate))?;
        let cost_scale = common_denominator(costs.iter().flatten().chain(std::iter::once(t)))?;
        let scale_all = |xs: &[Rational], d: &BigInt| xs.iter().map(|x| scale(x, d)).collect::<Option<Vec<_>>>();
        Some(Scaled {
            values: lattice.iter().map(|v| scale_all(v, &value_scale)).collect::<Option<_>>()?,
            costs: costs.iter().map(|c| scale_all(c, &cost_scale)).collect::<Option<_>>()?,
            candidate: scale_all(candidate, &value_scale)?,
            limit: scale(t, &cost_scale)?,
        })
    }
}

fn common_denominator<'a>(xs: impl Iterator<Item = &'a Rational>) -> Option<BigInt> {
    let mut d = BigInt::one();
    for x in xs {
        d = d.lcm(x.denom());
        if d > BigInt::from(Scaled::BOUND) {
            return None;
        }
    }
    Some(d)
}

fn scale(x: &Rational, d: &BigInt) -> Option<i128> {
    let v = (x.numer() * d / x.denom()).to_i128()?;
    (v.abs() < i128::from(Scaled::BOUND) << 8).then_some(v)
}

struct Enumeration<'a, T> {
    values: &'a [Vec<T>],
    costs: &'a [Vec<T>],
    candidate: &'a [T],
    limit: &'a T,
    membership: &'a [Vec<usize>],
    zero: T,
}

impl<T> Enumeration<'_, T>
where
    T: Ord + Clone + Send + Sync,
    for<'x> &'x T: Add<&'x T, Output = T>,
{
    /// Admissible count and the first witness, as lattice indices.
    fn run(&self) -> (u64, Option<Vec<usize>>) {
        let resources = self.membership.iter().flatten().max().map_or(0, |m| m + 1);
        let candidate_min = self.candidate.iter().min().expect("nonempty candidate");
        let branches: Vec<(u64, Option<Vec<usize>>)> = (0..self.values[0].len())
            .into_par_iter()
            .map(|k| {
                let mut loads = vec![self.zero.clone(); resources];
                let mut idx = vec![0; self.values.len()];
                let mut count = 0;
                let mut witness = None;
                if self.place(0, k, &mut loads) {
                    idx[0] = k;
                    self.descend(1, &mut idx, &mut loads, candidate_min, &mut count, &mut witness);
                }
                (count, witness)
            })
            .collect();
        let total = branches.iter().map(|b| b.0).sum();
        (total, branches.into_iter().find_map(|b| b.1))
    }

    /// Adds route `i` at lattice index `k` to the loads; false (loads untouched) if a limit breaks.
    fn place(&self, i: usize, k: usize, loads: &mut [T]) -> bool {
        let c = &self.costs[i][k];
        if self.membership[i].iter().any(|&j| &(&loads[j] + c) > self.limit) {
            return false;
        }
        for &j in &self.membership[i] {
            loads[j] = &loads[j] + c;
        }
        true
    }

    fn descend(
        &self,
        i: usize,
        idx: &mut [usize],
        loads: &mut [T],
        candidate_min: &T,
        count: &mut u64,
        witness: &mut Option<Vec<usize>>,
    ) {
        if witness.is_some() {
            return;
        }
        if i == self.values.len() {
            *count += 1;
            let g: Vec<T> = idx.iter().enumerate().map(|(r, &k)| self.values[r][k].clone()).collect();
            let below = g.iter().min().expect("nonempty") < candidate_min || order::leq_unchecked(&g, self.candidate);
            if !below {
                *witness = Some(idx.to_vec());
            }
            return;
        }
        let saved = loads.to_vec();
        for k in 0..self.values[i].len() {
            // Costs are nondecreasing along the lattice, so the first overflow ends the scan.
            if !self.place(i, k, loads) {
                break;
            }
            idx[i] = k;
            self.descend(i + 1, idx, loads, candidate_min, count, witness);
            loads.clone_from_slice(&saved);
            if witness.is_some() {
                return;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pwl::PiecewiseLinear;
    use crate::rational::{int, ratio};

    fn example() -> ProblemInstance {
        let pos = |x: i64, rho: i64| PiecewiseLinear::linear(int(rho), int(x)).unwrap();
        ProblemInstance::new(vec![pos(-2, 1), pos(-1, 1), pos(0, 5)], vec![vec![0, 1], vec![0, 2]]).unwrap()
    }

    #[test]
    fn dominance_holds_at_the_frontier() {
        let f = vec![ratio(-1, 2), ratio(-1, 2), ratio(1, 10)];
        let v = dominance_check(&example(), &int(2), &GridSpec::new(ratio(1, 4)), &f).unwrap();
        assert!(v.holds, "{v:?}");
        assert!(v.admissible > 0);
    }

    #[test]
    fn corrupted_candidate_is_caught() {
        let f = vec![ratio(-3, 2), ratio(-1, 2), ratio(1, 10)];
        let inst = example();
        let v = dominance_check(&inst, &int(2), &GridSpec::new(ratio(1, 4)), &f).unwrap();
        assert!(!v.holds);
        let g = v.counterexample.unwrap();
        assert!(crate::solver::verify_membership(&inst, &int(2), &g).unwrap());
        assert!(!order::min_sensitive_leq(&g, &f).unwrap());
    }

    #[test]
    fn single_route_top_point() {
        let inst = ProblemInstance::new(vec![PiecewiseLinear::linear(int(1), int(0)).unwrap()], vec![vec![0]]).unwrap();
        let grid = GridSpec::new(ratio(1, 3));
        assert!(dominance_check(&inst, &int(1), &grid, &[int(1)]).unwrap().holds);
        assert!(!dominance_check(&inst, &int(1), &grid, &[ratio(2, 3)]).unwrap().holds);
        assert_eq!(nested_maxmin_grid(&inst, &int(1), &grid).unwrap(), vec![int(1)]);
    }

    #[test]
    fn cap_refusal_reports_size() {
        let err = dominance_check(&example(), &int(2), &GridSpec::new(ratio(1, 4)).with_cap(10), &vec![int(0); 3]);
        match err {
            Err(Error::LatticeTooLarge { size, cap: 10 }) => assert!(size > 10),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nested_matches_known_points() {
        let inst = example();
        let g = nested_maxmin_grid(&inst, &int(6), &GridSpec::new(ratio(1, 12))).unwrap();
        let exact = [ratio(2, 3), ratio(7, 3), ratio(2, 3)];
        for (a, b) in g.iter().zip(&exact) {
            assert!((a - b).abs() <= ratio(1, 12), "{g:?}");
        }
        assert_eq!(nested_maxmin_grid(&inst, &int(0), &GridSpec::new(ratio(1, 2))).unwrap(), inst.zero_ends());
    }

    #[test]
    fn a_single_lattice_can_overshoot_by_more_than_a_step() {
        // G_1 = {2}, G_2 = {1,2}; route 1 binds resource 2 at -18/13, which is
        // off the lattice. Frozen at -3/2 instead, it leaves slack 3/8 that
        // route 2 (slope 1/4) turns into a rise of 3/2.
        let h1 = PiecewiseLinear::linear(ratio(13, 4), int(-2)).unwrap();
        let h2 = PiecewiseLinear::linear(ratio(1, 4), ratio(-5, 4)).unwrap();
        let inst = ProblemInstance::new(vec![h1, h2], vec![vec![1], vec![0, 1]]).unwrap();
        let coarse = GridSpec::new(ratio(1, 8)).with_refinement(0);
        assert_eq!(nested_maxmin_grid(&inst, &int(2), &coarse).unwrap(), vec![ratio(-3, 2), ratio(1, 4)]);
        let refined = nested_maxmin_grid(&inst, &int(2), &GridSpec::new(ratio(1, 8))).unwrap();
        let exact = [ratio(-18, 13), ratio(-5, 4)];
        assert!(refined.iter().zip(&exact).all(|(a, b)| (a - b).abs() <= ratio(1, 8)), "{refined:?}");
    }

    #[test]
    fn rational_fallback_agrees() {
        // A lower bound with a huge denominator forces the exact path.
        let inst = example();
        let f = vec![ratio(-1, 2), ratio(-1, 2), ratio(1, 10)];
        let tiny = Rational::new(BigInt::one(), (BigInt::one() << 70u32) + 1);
        let grid = GridSpec::new(ratio(1, 4)).with_lower(int(-2) - tiny);
        let v = dominance_check(&inst, &int(2), &grid, &f).unwrap();
        assert!(v.holds);
        let bad = vec![ratio(-3, 2), ratio(-1, 2), ratio(1, 10)];
        assert!(!dominance_check(&inst, &int(2), &grid, &bad).unwrap().holds);
    }
}
