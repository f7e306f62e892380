//! Sampled trajectories of `F` and regularity verdicts over them.
//!
//! Every verdict here is a statement about the sampled grid. An empty
//! violation list means no decrease was seen between adjacent samples, not that
//! `F` is nondecreasing. Jump candidates are refined by exact bisection, so a
//! reported bracket really contains a gap of the stated size.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::linear;
use crate::rational::{self, Extended, Rational};
use crate::solver::{solve, FrontierValue};

pub const DEFAULT_STEPS: usize = 255;
pub const DEFAULT_DEPTH: usize = 40;

#[derive(Clone, Debug)]
pub struct Trajectory<'a> {
    instance: &'a ProblemInstance,
    samples: Vec<FrontierValue>,
}

impl<'a> Trajectory<'a> {
    pub fn instance(&self) -> &'a ProblemInstance {
        self.instance
    }

    pub fn samples(&self) -> &[FrontierValue] {
        &self.samples
    }

    pub fn times(&self) -> Vec<Rational> {
        self.samples.iter().map(|s| s.t.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Solves at every grid point; points are evaluated in parallel.
pub fn sample_trajectory<'a>(inst: &'a ProblemInstance, grid: &[Rational]) -> Result<Trajectory<'a>> {
    if let Some(t) = grid.iter().find(|t| t.is_negative()) {
        return Err(Error::InvalidArgument(format!("grid point {t} is negative")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
    }
    let samples = grid.par_iter().map(|t| solve(inst, t)).collect::<Result<Vec<_>>>()?;
    Ok(Trajectory { instance: inst, samples })
}

/// `steps + 1` equally spaced points from `start` to `end`.
pub fn uniform_grid(start: &Rational, end: &Rational, steps: usize) -> Result<Vec<Rational>> {
    if steps == 0 {
        return Err(Error::InvalidArgument("at least one step is required".into()));
    }
    if start >= end {
        return Err(Error::InvalidArgument(format!("empty range [{start}, {end}]")));
    }
    let width = (end - start) / Rational::from_integer(steps.into());
    Ok((0..=steps).map(|k| start + &width * Rational::from_integer(k.into())).collect())
}

/// Inserts `factor - 1` equally spaced points inside every gap, keeping the old points.
pub fn refine_grid(grid: &[Rational], factor: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(grid.len() * factor.max(1));
    for w in grid.windows(2) {
        let width = (&w[1] - &w[0]) / Rational::from_integer(factor.max(1).into());
        for k in 0..factor.max(1) {
            out.push(&w[0] + &width * Rational::from_integer(k.into()));
        }
    }
    out.extend(grid.last().cloned());
    out
}

/// A uniform grid with [`DEFAULT_STEPS`] steps, plus every breakpoint of the
/// germ plan that falls inside the range.
pub fn default_grid(inst: &ProblemInstance, start: &Rational, end: &Rational) -> Result<Vec<Rational>> {
    let mut grid = uniform_grid(start, end, DEFAULT_STEPS)?;
    if let Ok(plan) = linear::analyze_germ(inst) {
        grid.extend(plan.breakpoints().into_iter().filter(|b| b > start && b < end));
        grid.sort();
        grid.dedup();
    }
    Ok(grid)
}

/// The ordered partition label `(J^(1), ..., J^(k_max))`, 0-based.
pub type PartitionLabel = Vec<Vec<usize>>;

/// A maximal run of consecutive samples sharing one label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionSegment {
    pub start: Rational,
    pub end: Rational,
    /// Sample indices, inclusive.
    pub first: usize,
    pub last: usize,
    pub label: PartitionLabel,
    /// Ordinal of the label's first appearance in the trajectory.
    pub id: usize,
}

pub fn detect_partitions(traj: &Trajectory) -> Vec<PartitionSegment> {
    let mut labels: Vec<PartitionLabel> = Vec::new();
    let mut segments: Vec<PartitionSegment> = Vec::new();
    for (k, s) in traj.samples.iter().enumerate() {
        let label = s.decomposition.partition();
        if let Some(seg) = segments.last_mut() {
            if seg.label == label {
                seg.last = k;
                seg.end = s.t.clone();
                continue;
            }
        }
        let id = match labels.iter().position(|l| *l == label) {
            Some(id) => id,
            None => {
                labels.push(label.clone());
                labels.len() - 1
            }
        };
        segments.push(PartitionSegment { start: s.t.clone(), end: s.t.clone(), first: k, last: k, label, id });
    }
    segments
}

/// Partition ordinal of every sample.
pub fn partition_ids(traj: &Trajectory) -> Vec<usize> {
    let mut ids = vec![0; traj.len()];
    for seg in detect_partitions(traj) {
        ids[seg.first..=seg.last].fill(seg.id);
    }
    ids
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotonicityViolation {
    pub route: usize,
    pub t: Rational,
    pub t_next: Rational,
    pub value: Rational,
    pub value_next: Rational,
}

/// Every exact decrease between adjacent samples.
pub fn check_monotonicity(traj: &Trajectory) -> Vec<MonotonicityViolation> {
    traj.samples
        .windows(2)
        .flat_map(|w| {
            let (a, b) = (&w[0], &w[1]);
            a.values()
                .iter()
                .zip(b.values())
                .enumerate()
                .filter(|(_, (x, y))| x > y)
                .map(|(route, (x, y))| MonotonicityViolation {
                    route,
                    t: a.t.clone(),
                    t_next: b.t.clone(),
                    value: x.clone(),
                    value_next: y.clone(),
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JumpCandidate {
    pub route: usize,
    pub lower: Rational,
    pub upper: Rational,
    /// `F_i(upper) - F_i(lower)`.
    pub gap: Rational,
    /// The gap with the surrounding slope removed; exact when `F_i` is affine
    /// with the same slope on both sides of the jump.
    pub jump_estimate: Rational,
}

/// Brackets apparent discontinuities.
///
/// An adjacent pair whose coordinate gap exceeds `threshold * dt` is bisected
/// `depth` times, keeping the half with the larger gap. The bracket is
/// reported if its gap still exceeds `threshold * dt` for the original spacing.
pub fn check_continuity(traj: &Trajectory, threshold: &Rational, depth: usize) -> Result<Vec<JumpCandidate>> {
    if !threshold.is_positive() {
        return Err(Error::InvalidArgument(format!("gap threshold must be positive, got {threshold}")));
    }
    let inst = traj.instance;
    let mut out = Vec::new();
    for w in traj.samples.windows(2) {
        let dt = &w[1].t - &w[0].t;
        let bound = threshold * &dt;
        for route in 0..inst.route_count() {
            let gap = &w[1].values()[route] - &w[0].values()[route];
            if gap.abs() <= bound {
                continue;
            }
            let (lo, hi) =
                bisect(inst, route, (&w[0].t, &w[0].values()[route]), (&w[1].t, &w[1].values()[route]), depth)?;
            let gap = &hi.1 - &lo.1;
            if gap.abs() > bound {
                let jump_estimate = remove_slope(inst, route, &lo, &hi, &gap)?;
                out.push(JumpCandidate { route, lower: lo.0, upper: hi.0, gap, jump_estimate });
            }
        }
    }
    Ok(out)
}

type Point = (Rational, Rational);

fn coordinate(inst: &ProblemInstance, route: usize, t: &Rational) -> Result<Rational> {
    Ok(solve(inst, t)?.values()[route].clone())
}

fn bisect(
    inst: &ProblemInstance,
    route: usize,
    lo: (&Rational, &Rational),
    hi: (&Rational, &Rational),
    depth: usize,
) -> Result<(Point, Point)> {
    let mut lo = (lo.0.clone(), lo.1.clone());
    let mut hi = (hi.0.clone(), hi.1.clone());
    for _ in 0..depth {
        let mid = (&lo.0 + &hi.0) / Rational::from_integer(2.into());
        let value = coordinate(inst, route, &mid)?;
        let left = (&value - &lo.1).abs();
        let right = (&hi.1 - &value).abs();
        if left >= right {
            hi = (mid, value);
        } else {
            lo = (mid, value);
        }
    }
    Ok((lo, hi))
}

/// Subtracts the slope seen just outside the bracket, when both sides agree.
fn remove_slope(inst: &ProblemInstance, route: usize, lo: &Point, hi: &Point, gap: &Rational) -> Result<Rational> {
    let width = &hi.0 - &lo.0;
    let mut slopes = Vec::new();
    if lo.0 >= width {
        let before = &lo.0 - &width;
        slopes.push((&lo.1 - coordinate(inst, route, &before)?) / &width);
    }
    let after = &hi.0 + &width;
    slopes.push((coordinate(inst, route, &after)? - &hi.1) / &width);
    let slope =
        if slopes.windows(2).all(|w| w[0] == w[1]) { slopes[0].clone() } else { rational::min(&slopes[0], &slopes[1]) };
    Ok(gap - slope * width)
}

/// Largest `|F_i(t') - F_i(t)| / (t' - t)` over adjacent samples; zero with fewer than two samples.
pub fn lipschitz_estimate(traj: &Trajectory) -> Rational {
    traj.samples
        .windows(2)
        .flat_map(|w| {
            let dt = &w[1].t - &w[0].t;
            w[0].values().iter().zip(w[1].values()).map(move |(x, y)| (y - x).abs() / &dt)
        })
        .max()
        .unwrap_or_else(Rational::zero)
}

/// Sanity envelope `max(1/c, 1) * (1 + C I / c)^J` for costs whose slopes lie in
/// `[c, C]` with `c > 0`. This is a conservative closure, not a sharp constant.
pub fn lipschitz_envelope(inst: &ProblemInstance) -> Option<Rational> {
    let (c, big_c) = inst.slope_bounds();
    if !c.is_positive() {
        return None;
    }
    let routes = Rational::from_integer(inst.route_count().into());
    let base = Rational::one() + big_c * routes / &c;
    let lead = rational::max(&c.recip(), &Rational::one());
    Some((0..inst.resource_count()).fold(lead, |acc, _| acc * &base))
}

/// True iff the segments tile the samples and no coordinate decreases between
/// adjacent samples of the same segment.
pub fn reduction_cover_check(traj: &Trajectory, segments: &[PartitionSegment]) -> bool {
    let mut next = 0;
    for seg in segments {
        if seg.first != next || seg.last < seg.first {
            return false;
        }
        next = seg.last + 1;
        let inside = &traj.samples[seg.first..=seg.last];
        let decreasing = inside.windows(2).any(|w| w[0].values().iter().zip(w[1].values()).any(|(x, y)| x > y));
        if decreasing {
            return false;
        }
    }
    next == traj.len()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrajectoryReport {
    pub grid: Vec<Rational>,
    pub partition_segments: Vec<PartitionSegment>,
    pub jump_candidates: Vec<JumpCandidate>,
    pub monotonicity_violations: Vec<MonotonicityViolation>,
    pub lipschitz_estimate: Rational,
    pub lipschitz_envelope: Option<Rational>,
    pub reduction_cover: bool,
}

impl TrajectoryReport {
    /// Anything a script should stop on.
    pub fn has_findings(&self) -> bool {
        !self.jump_candidates.is_empty() || !self.monotonicity_violations.is_empty()
    }

    pub fn envelope_respected(&self) -> Option<bool> {
        self.lipschitz_envelope.as_ref().map(|e| &self.lipschitz_estimate <= e)
    }
}

/// Samples on `grid` and runs every check.
pub fn analyze(
    inst: &ProblemInstance,
    grid: &[Rational],
    threshold: &Rational,
    depth: usize,
) -> Result<TrajectoryReport> {
    let traj = sample_trajectory(inst, grid)?;
    let partition_segments = detect_partitions(&traj);
    Ok(TrajectoryReport {
        grid: grid.to_vec(),
        jump_candidates: check_continuity(&traj, threshold, depth)?,
        monotonicity_violations: check_monotonicity(&traj),
        lipschitz_estimate: lipschitz_estimate(&traj),
        lipschitz_envelope: lipschitz_envelope(inst),
        reduction_cover: reduction_cover_check(&traj, &partition_segments),
        partition_segments,
    })
}

/// `10` times the ratio of the largest to the smallest slope, or `10` when
/// some cost has a flat piece.
pub fn default_threshold(inst: &ProblemInstance) -> Rational {
    let (c, big_c) = inst.slope_bounds();
    let ten = Rational::from_integer(10.into());
    if c.is_positive() {
        ten * big_c / c
    } else {
        ten
    }
}

/// Finite horizon of the germ plan, if any.
pub fn germ_horizon(inst: &ProblemInstance) -> Option<Rational> {
    match linear::analyze_germ(inst).ok()?.horizon() {
        Extended::Finite(h) => Some(h.clone()),
        Extended::Infinite => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pwl::PiecewiseLinear;
    use crate::rational::{int, ratio};

    fn lin(rho: i64, x_star: i64) -> PiecewiseLinear {
        PiecewiseLinear::linear(int(rho), int(x_star)).unwrap()
    }

    fn two_link() -> ProblemInstance {
        ProblemInstance::new(vec![lin(1, -2), lin(1, -1), lin(5, 0)], vec![vec![0, 1], vec![0, 2]]).unwrap()
    }

    fn jump() -> ProblemInstance {
        // 2 (x^+ ∧ 1) + 2 (x - 2)^+
        let h = PiecewiseLinear::new(int(0), vec![(int(1), int(2)), (int(2), int(0))], int(2)).unwrap();
        ProblemInstance::new(vec![h], vec![vec![0]]).unwrap()
    }

    #[test]
    fn grids() {
        assert_eq!(uniform_grid(&int(0), &int(1), 1).unwrap(), vec![int(0), int(1)]);
        assert!(uniform_grid(&int(1), &int(1), 4).is_err());
        let g = uniform_grid(&int(0), &int(2), 2).unwrap();
        assert_eq!(refine_grid(&g, 2), vec![int(0), ratio(1, 2), int(1), ratio(3, 2), int(2)]);
        let d = default_grid(&two_link(), &int(0), &int(6)).unwrap();
        let u = uniform_grid(&int(0), &int(6), DEFAULT_STEPS).unwrap();
        assert!(u.iter().all(|t| d.binary_search(t).is_ok()));
        // The germ plan adds t = 1, where the first stage level reaches -1.
        assert_eq!(d.len(), 257);
        assert!(d.binary_search(&int(1)).is_ok());
    }

    #[test]
    fn partitions_of_the_two_link_example() {
        let inst = two_link();
        let grid = [ratio(1, 2), int(2), ratio(7, 2), int(6)];
        let traj = sample_trajectory(&inst, &grid).unwrap();
        let segs = detect_partitions(&traj);
        let labels: Vec<_> = segs.iter().map(|s| s.label.clone()).collect();
        assert_eq!(labels, vec![vec![vec![0, 1]], vec![vec![0], vec![1]], vec![vec![0, 1]], vec![vec![1], vec![0]]]);
        assert_eq!(partition_ids(&traj), vec![0, 1, 0, 2]);
        assert!(reduction_cover_check(&traj, &segs));
        assert!(check_monotonicity(&traj).is_empty());
    }

    #[test]
    fn lipschitz_on_a_late_window() {
        let inst = two_link();
        let traj = sample_trajectory(&inst, &uniform_grid(&int(4), &int(10), 12).unwrap()).unwrap();
        assert_eq!(lipschitz_estimate(&traj), ratio(5, 6));
        let empty = sample_trajectory(&inst, &[]).unwrap();
        assert!(empty.is_empty());
        assert_eq!(lipschitz_estimate(&empty), int(0));
        assert!(reduction_cover_check(&empty, &detect_partitions(&empty)));
    }

    #[test]
    fn jump_is_bracketed() {
        let inst = jump();
        let traj = sample_trajectory(&inst, &uniform_grid(&int(0), &int(4), 7).unwrap()).unwrap();
        let jumps = check_continuity(&traj, &int(1), DEFAULT_DEPTH).unwrap();
        assert_eq!(jumps.len(), 1);
        let j = &jumps[0];
        assert!(j.lower < int(2) && j.upper >= int(2));
        assert_eq!(j.jump_estimate, int(1));
    }

    #[test]
    fn continuous_instance_has_no_candidates() {
        let inst = two_link();
        let traj = sample_trajectory(&inst, &uniform_grid(&int(0), &int(6), 24).unwrap()).unwrap();
        assert!(check_continuity(&traj, &int(1), DEFAULT_DEPTH).unwrap().is_empty());
    }

    #[test]
    fn rejects_bad_grids() {
        let inst = two_link();
        assert!(sample_trajectory(&inst, &[int(1), int(1)]).is_err());
        assert!(sample_trajectory(&inst, &[int(-1)]).is_err());
    }

    #[test]
    fn envelope() {
        assert_eq!(lipschitz_envelope(&jump()), None);
        // c = 1, C = 5, I = 3, J = 2: 1 * 16^2.
        assert_eq!(lipschitz_envelope(&two_link()), Some(int(256)));
    }
}
