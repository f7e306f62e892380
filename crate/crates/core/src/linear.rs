//! Closed-form stage plans for single-kink costs `h_i(x) = rho_i (x - x*_i)^+`.
//!
//! Routes are grouped by equal zero ends `y*_1 < ... < y*_m`. Near `t = 0` every
//! stage level is affine, `f^(k)(t) = y*_{m(k)} + t / a^(k)`, and the stage sets
//! do not move. The plan records the slopes `a^(k)`, the stage sets, and the
//! breakpoints past which the affine description stops being valid:
//!
//! - `t*_k`: the level reaches the next zero-end group,
//! - `t̄_k`: the level reaches the cap `t` (only when `a^(k) < 1`),
//! - `t̄̄_k`: the level leaves the first piece of a multi-piece cost (germ plans).
//!
//! The horizon is the smallest of them. Below it the frontier is nondecreasing
//! and [`LinearStagePlan::eval`] agrees exactly with [`crate::solver::solve`].

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::rational::{self, Extended, Rational};

/// Slopes and zero ends of the routes, with routes grouped by zero end.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSpec {
    rho: Vec<Rational>,
    x_star: Vec<Rational>,
    /// End of the first piece for each route (germ plans); `Infinite` for single-kink costs.
    validity: Vec<Extended>,
    /// Routes sorted by zero end (stable in the route index).
    order: Vec<usize>,
    /// Distinct zero ends `y*_1 < ... < y*_m`.
    levels: Vec<Rational>,
    group_of: Vec<usize>,
}

impl LinearSpec {
    /// Requires every cost to be single-kink.
    pub fn from_instance(inst: &ProblemInstance) -> Result<Self> {
        if let Some(i) = (0..inst.route_count()).find(|&i| !inst.cost(i).is_single_kink()) {
            return Err(Error::NotLinear { route: i + 1 });
        }
        Ok(Self::germ(inst))
    }

    /// Uses the first piece of every cost at its zero end.
    pub fn germ(inst: &ProblemInstance) -> Self {
        let (rho, validity): (Vec<_>, Vec<_>) = inst.costs().iter().map(|h| h.germ()).unzip();
        let x_star = inst.zero_ends();
        let mut order: Vec<usize> = (0..x_star.len()).collect();
        order.sort_by(|&a, &b| x_star[a].cmp(&x_star[b]));
        let mut levels: Vec<Rational> = order.iter().map(|&i| x_star[i].clone()).collect();
        levels.dedup();
        let group_of = x_star.iter().map(|x| levels.binary_search(x).expect("zero end is one of the levels")).collect();
        LinearSpec { rho, x_star, validity, order, levels, group_of }
    }

    pub fn rho(&self) -> &[Rational] {
        &self.rho
    }

    pub fn x_star(&self) -> &[Rational] {
        &self.x_star
    }

    pub fn validity(&self) -> &[Extended] {
        &self.validity
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// `y*_1 < ... < y*_m`.
    pub fn group_levels(&self) -> &[Rational] {
        &self.levels
    }

    /// Cumulative group sizes `n_1 < ... < n_m = I`.
    pub fn group_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.levels.len()];
        for &g in &self.group_of {
            counts[g] += 1;
        }
        counts
            .iter()
            .scan(0, |acc, c| {
                *acc += c;
                Some(*acc)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearStage {
    /// `i^(k)`: the first free route in zero-end order.
    pub lead_route: usize,
    /// `m^(k)`, an index into [`LinearSpec::group_levels`].
    pub group: usize,
    /// `y*_{m(k)}`.
    pub intercept: Rational,
    /// `a^(k)`.
    pub slope: Rational,
    /// `(j, b_j)` for every candidate resource.
    pub capacity_share: Vec<(usize, Rational)>,
    /// `(j, a_j)` for every candidate resource.
    pub resource_slopes: Vec<(usize, Rational)>,
    pub active: Vec<usize>,
    pub covered: Vec<usize>,
    pub idle: Vec<usize>,
    pub t_star: Extended,
    pub t_bar: Extended,
    pub t_bar_bar: Extended,
    /// The level equals `t` and every remaining route sits at `t`.
    pub saturated: bool,
}

impl LinearStage {
    /// `f^(k)(t)` inside the horizon.
    pub fn level_at(&self, t: &Rational) -> Rational {
        if self.saturated {
            t.clone()
        } else {
            &self.intercept + t / &self.slope
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearStagePlan {
    spec: LinearSpec,
    stages: Vec<LinearStage>,
    horizon: Extended,
}

impl LinearStagePlan {
    pub fn spec(&self) -> &LinearSpec {
        &self.spec
    }

    pub fn stages(&self) -> &[LinearStage] {
        &self.stages
    }

    pub fn horizon(&self) -> &Extended {
        &self.horizon
    }

    pub fn saturated_tail(&self) -> bool {
        self.stages.last().is_some_and(|s| s.saturated)
    }

    /// Finite `t*`, `t̄` and `t̄̄` values, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<Rational> {
        let mut out: Vec<Rational> = self
            .stages
            .iter()
            .flat_map(|s| [&s.t_star, &s.t_bar, &s.t_bar_bar])
            .filter_map(|b| b.finite().cloned())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// `F(t)` for `0 <= t < horizon`, in the original route order.
    pub fn eval(&self, t: &Rational) -> Result<Vec<Rational>> {
        if t.is_negative() {
            return Err(Error::InvalidArgument(format!("t must be nonnegative, got {t}")));
        }
        if let Extended::Finite(h) = &self.horizon {
            if t >= h {
                return Err(Error::OutsideHorizon { t: Box::new(t.clone()), horizon: Box::new(h.clone()) });
            }
        }
        let mut out = vec![Rational::zero(); self.spec.rho.len()];
        for stage in &self.stages {
            let level = stage.level_at(t);
            for &i in &stage.covered {
                out[i] = if stage.saturated { level.clone() } else { rational::max(&level, &self.spec.x_star[i]) };
            }
        }
        Ok(out)
    }

    /// One-sided derivatives of the stage levels at `0`: `1 / a^(k)`, or `1`
    /// for a saturated stage.
    pub fn derivatives_at_zero(&self) -> Vec<Rational> {
        self.stages.iter().map(|s| if s.saturated { Rational::one() } else { s.slope.recip() }).collect()
    }
}

pub fn analyze_linear(inst: &ProblemInstance) -> Result<LinearStagePlan> {
    build_plan(inst, LinearSpec::from_instance(inst)?)
}

/// Plan on the first pieces of arbitrary piecewise-linear costs; the horizon
/// also stops where a level leaves a first piece.
pub fn analyze_germ(inst: &ProblemInstance) -> Result<LinearStagePlan> {
    build_plan(inst, LinearSpec::germ(inst))
}

pub fn eval_linear_frontier(plan: &LinearStagePlan, t: &Rational) -> Result<Vec<Rational>> {
    plan.eval(t)
}

pub fn derivative_at_zero(plan: &LinearStagePlan) -> Vec<Rational> {
    plan.derivatives_at_zero()
}

pub fn monotonicity_horizon(plan: &LinearStagePlan) -> Extended {
    plan.horizon.clone()
}

fn build_plan(inst: &ProblemInstance, spec: LinearSpec) -> Result<LinearStagePlan> {
    let routes = inst.route_count();
    let resources = inst.resource_count();
    let mut free = vec![true; routes];
    let mut classified = vec![false; resources];
    let mut stages: Vec<LinearStage> = Vec::new();
    let mut horizon = Extended::Infinite;

    while let Some(&lead) = spec.order.iter().find(|&&i| free[i]) {
        if stages.len() >= resources {
            return Err(Error::Internal(format!("more than {resources} linear stages")));
        }
        let group = spec.group_of[lead];
        let intercept = spec.levels[group].clone();
        let candidates: Vec<usize> = (0..resources).filter(|&j| !classified[j]).collect();

        let mut capacity_share = Vec::with_capacity(candidates.len());
        let mut resource_slopes = Vec::with_capacity(candidates.len());
        for &j in &candidates {
            let mut b = Rational::one();
            for stage in stages.iter().filter(|s| !s.saturated) {
                let used: Rational = inst
                    .resource(j)
                    .iter()
                    .filter(|&&i| stage.covered.binary_search(&i).is_ok() && spec.group_of[i] == stage.group)
                    .map(|&i| spec.rho[i].clone())
                    .sum();
                b -= used / &stage.slope;
            }
            if !b.is_positive() {
                return Err(Error::Internal(format!("resource {} has no capacity share left (b = {b})", j + 1)));
            }
            let weight: Rational = inst
                .resource(j)
                .iter()
                .filter(|&&i| free[i] && spec.group_of[i] == group)
                .map(|&i| spec.rho[i].clone())
                .sum();
            resource_slopes.push((j, weight / &b));
            capacity_share.push((j, b));
        }
        let slope = resource_slopes
            .iter()
            .map(|(_, a)| a.clone())
            .max()
            .ok_or_else(|| Error::Internal("no candidate resources".into()))?;
        if !slope.is_positive() {
            return Err(Error::Internal(format!("route {} lies on no candidate resource", lead + 1)));
        }

        let saturated = intercept.is_zero() && slope <= Rational::one();
        let (active, covered, idle, t_star, t_bar, t_bar_bar);
        if saturated {
            active = candidates.clone();
            covered = (0..routes).filter(|&i| free[i]).collect::<Vec<_>>();
            idle = Vec::new();
            t_star = Extended::Infinite;
            t_bar = Extended::Infinite;
            // f(t) = t leaves the first piece at t = X*.
            let validity = covered.iter().map(|&i| spec.validity[i].clone()).min().unwrap_or(Extended::Infinite);
            t_bar_bar = cutoff(validity, &horizon);
        } else {
            active = resource_slopes.iter().filter(|(_, a)| *a == slope).map(|(j, _)| *j).collect::<Vec<_>>();
            let mut c: Vec<usize> =
                active.iter().flat_map(|&j| inst.resource(j).iter().copied()).filter(|&i| free[i]).collect();
            c.sort_unstable();
            c.dedup();
            covered = c;
            idle = candidates
                .iter()
                .copied()
                .filter(|j| active.binary_search(j).is_err())
                .filter(|&j| inst.resource(j).iter().all(|&i| !free[i] || covered.binary_search(&i).is_ok()))
                .collect::<Vec<_>>();
            t_star = match spec.levels.get(group + 1) {
                Some(next) => cutoff(Extended::Finite(&slope * (next - &intercept)), &horizon),
                None => Extended::Infinite,
            };
            t_bar = if slope >= Rational::one() {
                Extended::Infinite
            } else {
                Extended::Finite(&slope * &intercept / (&slope - Rational::one()))
            };
            let validity = (0..routes)
                .filter(|&i| spec.group_of[i] == group)
                .map(|i| spec.validity[i].clone())
                .min()
                .unwrap_or(Extended::Infinite);
            t_bar_bar = match validity {
                Extended::Finite(x) => cutoff(Extended::Finite(&slope * (x - &intercept)), &horizon),
                Extended::Infinite => Extended::Infinite,
            };
        }
        horizon = [t_star.clone(), t_bar.clone(), t_bar_bar.clone()].into_iter().fold(horizon, Extended::min);

        for &i in &covered {
            free[i] = false;
        }
        for &j in active.iter().chain(&idle) {
            classified[j] = true;
        }
        stages.push(LinearStage {
            lead_route: lead,
            group,
            intercept,
            slope,
            capacity_share,
            resource_slopes,
            active,
            covered,
            idle,
            t_star,
            t_bar,
            t_bar_bar,
            saturated,
        });
        if saturated {
            break;
        }
    }
    Ok(LinearStagePlan { spec, stages, horizon })
}

/// A breakpoint that lies at or beyond the current horizon never binds and is
/// reported as infinite.
fn cutoff(candidate: Extended, horizon: &Extended) -> Extended {
    if &candidate >= horizon {
        Extended::Infinite
    } else {
        candidate
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

    /// Seven routes on four resources; resource 4 goes idle after stage 1.
    fn seven_route() -> ProblemInstance {
        ProblemInstance::new(
            vec![lin(2, -11), lin(2, -11), lin(1, -11), lin(1, -11), lin(1, 0), lin(2, -10), lin(2, -10)],
            vec![vec![0, 2, 5], vec![1, 3, 6], vec![2, 3, 4, 5, 6], vec![5, 6]],
        )
        .unwrap()
    }

    #[test]
    fn seven_route_plan() {
        let plan = analyze_linear(&seven_route()).unwrap();
        let s = plan.stages();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].slope, int(3));
        assert_eq!(s[0].active, vec![0, 1]);
        assert_eq!(s[0].idle, vec![3]);
        assert_eq!(s[0].t_star, Extended::Finite(int(3)));
        assert_eq!(s[1].capacity_share, vec![(2, ratio(1, 3))]);
        assert_eq!(s[1].slope, int(3));
        assert_eq!(s[1].active, vec![2]);
        assert_eq!(s[1].covered, vec![4]);
        assert_eq!(plan.horizon(), &Extended::Finite(int(3)));
        assert_eq!(plan.derivatives_at_zero(), vec![ratio(1, 3), ratio(1, 3)]);
        assert_eq!(plan.breakpoints(), vec![int(3)]);
    }

    #[test]
    fn seven_route_eval() {
        let plan = analyze_linear(&seven_route()).unwrap();
        let f = plan.eval(&int(2)).unwrap();
        let m = ratio(-31, 3);
        assert_eq!(f, vec![m.clone(), m.clone(), m.clone(), m, ratio(2, 3), int(-10), int(-10)]);
        assert!(matches!(plan.eval(&int(3)), Err(Error::OutsideHorizon { .. })));
        assert_eq!(plan.eval(&int(0)).unwrap(), seven_route().zero_ends());
    }

    #[test]
    fn single_route() {
        let inst = ProblemInstance::new(vec![lin(2, 0)], vec![vec![0]]).unwrap();
        let plan = analyze_linear(&inst).unwrap();
        assert_eq!(plan.stages()[0].slope, int(2));
        assert_eq!(plan.stages()[0].t_bar, Extended::Infinite);
        assert_eq!(plan.horizon(), &Extended::Infinite);
        assert_eq!(plan.eval(&int(4)).unwrap(), vec![int(2)]);
        assert_eq!(plan.derivatives_at_zero(), vec![ratio(1, 2)]);
    }

    #[test]
    fn cap_breakpoint() {
        let inst =
            ProblemInstance::new(vec![PiecewiseLinear::linear(ratio(1, 2), int(-1)).unwrap()], vec![vec![0]]).unwrap();
        let plan = analyze_linear(&inst).unwrap();
        assert_eq!(plan.stages()[0].t_bar, Extended::Finite(int(1)));
        assert_eq!(monotonicity_horizon(&plan), Extended::Finite(int(1)));
    }

    #[test]
    fn unit_costs_use_the_largest_resource() {
        // h_i = x^+ on G_1 = {1,2}, G_2 = {1,3}: a^(1) = max |G_j| = 2.
        let inst = ProblemInstance::new(vec![lin(1, 0); 3], vec![vec![0, 1], vec![0, 2]]).unwrap();
        let plan = analyze_linear(&inst).unwrap();
        assert_eq!(plan.stages()[0].slope, int(2));
        assert_eq!(plan.spec().group_levels(), &[int(0)]);
        assert_eq!(derivative_at_zero(&plan)[0], ratio(1, 2));
    }

    #[test]
    fn everything_saturates_when_slopes_are_small() {
        let half = PiecewiseLinear::linear(ratio(1, 2), int(0)).unwrap();
        let inst = ProblemInstance::new(vec![half.clone(), half], vec![vec![0, 1]]).unwrap();
        let plan = analyze_linear(&inst).unwrap();
        assert!(plan.saturated_tail());
        assert_eq!(plan.stages().len(), 1);
        assert_eq!(plan.eval(&int(7)).unwrap(), vec![int(7), int(7)]);
        assert_eq!(plan.derivatives_at_zero(), vec![int(1)]);
    }

    #[test]
    fn rejects_multi_piece_costs_unless_germ() {
        let h3 = PiecewiseLinear::sum([&lin(1, -11), &lin(2, -10)]).unwrap();
        let inst = ProblemInstance::new(
            vec![lin(2, -11), lin(2, -11), h3.clone(), h3, lin(1, 0)],
            vec![vec![0, 2], vec![1, 3], vec![2, 3, 4]],
        )
        .unwrap();
        assert!(matches!(analyze_linear(&inst), Err(Error::NotLinear { route: 3 })));
        let plan = analyze_germ(&inst).unwrap();
        assert_eq!(plan.spec().rho()[2], int(1));
        assert_eq!(plan.spec().validity()[2], Extended::Finite(int(-10)));
        // The first piece of h_3 ends at -10, reached by t/3 - 11 at t = 3.
        assert_eq!(plan.horizon(), &Extended::Finite(int(3)));
        assert_eq!(plan.spec().group_counts(), vec![4, 5]);
    }
}
