//! Stage construction of the frontier `F(t)`.
//!
//! Stage `k + 1` raises every still-free route to a common level `f`, as high as
//! the constraints of the not yet classified resources allow with the earlier
//! stages frozen. The resources that are tight at `f` form `J^(k+1)`, the free
//! routes they touch form `I^(k+1)`, and resources left with no free route form
//! the idle set `N^(k+1)`. If the level reaches the cap `t`, every remaining
//! route is set to `t` and construction stops.
//!
//! Active sets are found by exact equality; each per-resource supremum is an
//! exact inversion of a piecewise-linear residual sum.

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::order::RVector;
use crate::pwl::PiecewiseLinear;
use crate::rational::{self, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stage {
    /// `f^(k)(t)`.
    pub level: Rational,
    /// `J^(k)`: resources tight at this stage.
    pub active: Vec<usize>,
    /// `I^(k)`: routes fixed at this stage.
    pub covered: Vec<usize>,
    /// `N^(k)`: resources with no free route left but strictly slack.
    pub idle: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageDecomposition {
    pub stages: Vec<Stage>,
    /// True iff the last stage hit the cap `f = t`.
    pub terminal_saturated: bool,
}

impl StageDecomposition {
    pub fn k_max(&self) -> usize {
        self.stages.len()
    }

    /// The ordered partition label `(J^(1), ..., J^(k_max))`.
    pub fn partition(&self) -> Vec<Vec<usize>> {
        self.stages.iter().map(|s| s.active.clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrontierValue {
    pub t: Rational,
    pub values: RVector,
    pub decomposition: StageDecomposition,
}

impl FrontierValue {
    pub fn values(&self) -> &[Rational] {
        self.values.coords()
    }
}

/// Result of one stage: the common level and the resources that bind it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageSup {
    pub level: Rational,
    pub active: Vec<usize>,
    /// The level equals `t`; `active` is then the whole candidate set.
    pub capped: bool,
}

/// Highest common level `x <= t` for the free routes such that every resource in
/// `candidates` stays within `t`, with fixed routes held at their values.
pub fn stage_sup(
    inst: &ProblemInstance,
    fixed: &[Option<Rational>],
    candidates: &[usize],
    t: &Rational,
) -> Result<StageSup> {
    if fixed.len() != inst.route_count() {
        return Err(Error::DimensionMismatch { left: fixed.len(), right: inst.route_count() });
    }
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("stage needs at least one candidate resource".into()));
    }
    let mut residual_sums = Vec::with_capacity(candidates.len());
    let mut level = t.clone();
    for &j in candidates {
        let mut residual = t.clone();
        let mut free = Vec::new();
        for &i in inst.resource(j) {
            match &fixed[i] {
                Some(v) => residual -= inst.cost(i).eval(v),
                None => free.push(inst.cost(i)),
            }
        }
        if free.is_empty() {
            return Err(Error::InvalidArgument(format!("resource {} has no free route left", j + 1)));
        }
        if residual.is_negative() {
            return Err(Error::Internal(format!("resource {} is already over capacity (residual {residual})", j + 1)));
        }
        let g = PiecewiseLinear::sum(free)?;
        let sup = g.right_inverse(&residual)?;
        if sup < level {
            level = sup;
        }
        residual_sums.push((j, g, residual));
    }
    if &level == t {
        return Ok(StageSup { level, active: candidates.to_vec(), capped: true });
    }
    let active =
        residual_sums.into_iter().filter(|(_, g, residual)| &g.eval(&level) == residual).map(|(j, _, _)| j).collect();
    Ok(StageSup { level, active, capped: false })
}

pub fn solve(inst: &ProblemInstance, t: &Rational) -> Result<FrontierValue> {
    if t.is_negative() {
        return Err(Error::InvalidArgument(format!("t must be nonnegative, got {t}")));
    }
    let routes = inst.route_count();
    let resources = inst.resource_count();
    let mut fixed: Vec<Option<Rational>> = vec![None; routes];
    let mut classified = vec![false; resources];
    let mut stages: Vec<Stage> = Vec::new();
    let mut terminal_saturated = false;

    while fixed.iter().any(Option::is_none) {
        if stages.len() >= resources {
            return Err(Error::Internal(format!("more than {resources} stages")));
        }
        let candidates: Vec<usize> = (0..resources).filter(|&j| !classified[j]).collect();
        if candidates.is_empty() {
            return Err(Error::Internal("free routes remain but every resource is classified".into()));
        }
        let sup = stage_sup(inst, &fixed, &candidates, t)?;
        if let Some(prev) = stages.last() {
            if sup.level <= prev.level {
                return Err(Error::Internal(format!("stage levels not increasing: {} then {}", prev.level, sup.level)));
            }
        }
        if sup.capped {
            let covered: Vec<usize> = (0..routes).filter(|&i| fixed[i].is_none()).collect();
            for &i in &covered {
                fixed[i] = Some(t.clone());
            }
            for &j in &sup.active {
                classified[j] = true;
            }
            stages.push(Stage { level: sup.level, active: sup.active, covered, idle: Vec::new() });
            terminal_saturated = true;
            break;
        }
        let mut covered: Vec<usize> =
            sup.active.iter().flat_map(|&j| inst.resource(j).iter().copied()).filter(|&i| fixed[i].is_none()).collect();
        covered.sort_unstable();
        covered.dedup();
        for &i in &covered {
            fixed[i] = Some(inst.cost(i).level_sup(t, &sup.level)?);
        }
        for &j in &sup.active {
            classified[j] = true;
        }
        let idle: Vec<usize> = (0..resources)
            .filter(|&j| !classified[j] && inst.resource(j).iter().all(|&i| fixed[i].is_some()))
            .collect();
        for &j in &idle {
            classified[j] = true;
        }
        stages.push(Stage { level: sup.level, active: sup.active, covered, idle });
    }

    let values = fixed.into_iter().map(|v| v.expect("all routes fixed")).collect();
    Ok(FrontierValue {
        t: t.clone(),
        values: RVector::new(values)?,
        decomposition: StageDecomposition { stages, terminal_saturated },
    })
}

/// `a_i <= t` for every route and every resource load is at most `t`.
pub fn verify_membership(inst: &ProblemInstance, t: &Rational, a: &[Rational]) -> Result<bool> {
    if a.len() != inst.route_count() {
        return Err(Error::DimensionMismatch { left: a.len(), right: inst.route_count() });
    }
    if a.iter().any(|x| x > t) {
        return Ok(false);
    }
    Ok((0..inst.resource_count()).all(|j| &inst.load(j, a) <= t))
}

/// An ordered sequence of disjoint nonempty resource blocks `(J_1, ..., J_k)`
/// together with the idle blocks `N_l` they induce.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedPartition {
    blocks: Vec<Vec<usize>>,
    idle: Vec<Vec<usize>>,
    routes: Vec<Vec<usize>>,
}

impl OrderedPartition {
    pub fn new(inst: &ProblemInstance, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let resources = inst.resource_count();
        let reject = |msg: String| Err(Error::PartitionInfeasible(msg));
        if blocks.is_empty() {
            return reject("no blocks".into());
        }
        let mut seen = vec![false; resources];
        let mut covered = vec![false; inst.route_count()];
        let mut idle_blocks = Vec::with_capacity(blocks.len());
        let mut route_blocks = Vec::with_capacity(blocks.len());
        let mut sorted_blocks = Vec::with_capacity(blocks.len());
        for (p, mut block) in blocks.into_iter().enumerate() {
            block.sort_unstable();
            block.dedup();
            if block.is_empty() {
                return reject(format!("block {} is empty", p + 1));
            }
            let mut block_routes = Vec::new();
            for &j in &block {
                if j >= resources {
                    return reject(format!("resource {} does not exist", j + 1));
                }
                if seen[j] {
                    return reject(format!("resource {} appears twice or is already idle", j + 1));
                }
                seen[j] = true;
                for &i in inst.resource(j) {
                    if !covered[i] {
                        covered[i] = true;
                        block_routes.push(i);
                    }
                }
            }
            block_routes.sort_unstable();
            let idle: Vec<usize> =
                (0..resources).filter(|&j| !seen[j] && inst.resource(j).iter().all(|&i| covered[i])).collect();
            for &j in &idle {
                seen[j] = true;
            }
            sorted_blocks.push(block);
            idle_blocks.push(idle);
            route_blocks.push(block_routes);
        }
        if let Some(j) = seen.iter().position(|s| !s) {
            return reject(format!("resource {} is neither in a block nor idle", j + 1));
        }
        Ok(OrderedPartition { blocks: sorted_blocks, idle: idle_blocks, routes: route_blocks })
    }

    pub fn from_decomposition(inst: &ProblemInstance, d: &StageDecomposition) -> Result<Self> {
        Self::new(inst, d.partition())
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn idle(&self) -> &[Vec<usize>] {
        &self.idle
    }

    /// `I_p`: routes first reached by block `p`.
    pub fn routes(&self) -> &[Vec<usize>] {
        &self.routes
    }
}

/// Stage levels from the inverse-function recursion for a fixed ordered
/// partition and one witness resource per block.
///
/// The levels match [`solve`] whenever `t` lies in the set of times labelled by
/// this partition; otherwise the recursion is rejected because the levels fail
/// to increase or a block's constraints are not tight.
pub fn closed_form_recursion(
    inst: &ProblemInstance,
    partition: &OrderedPartition,
    witnesses: &[usize],
    t: &Rational,
) -> Result<Vec<Rational>> {
    if t.is_negative() {
        return Err(Error::InvalidArgument(format!("t must be nonnegative, got {t}")));
    }
    let blocks = partition.blocks();
    if witnesses.len() != blocks.len() {
        return Err(Error::DimensionMismatch { left: witnesses.len(), right: blocks.len() });
    }
    let mut stage_of = vec![usize::MAX; inst.route_count()];
    for (p, routes) in partition.routes().iter().enumerate() {
        for &i in routes {
            stage_of[i] = p;
        }
    }
    let mut levels: Vec<Rational> = Vec::with_capacity(blocks.len());
    for (p, &j) in witnesses.iter().enumerate() {
        if blocks[p].binary_search(&j).is_err() {
            return Err(Error::InvalidArgument(format!("witness {} is not in block {}", j + 1, p + 1)));
        }
        let mut residual = t.clone();
        let mut free = Vec::new();
        for &i in inst.resource(j) {
            match stage_of[i] {
                s if s < p => residual -= inst.cost(i).eval(&levels[s]),
                s if s == p => free.push(inst.cost(i)),
                _ => unreachable!("routes of a block resource are covered by that block"),
            }
        }
        if residual.is_negative() {
            return Err(Error::PartitionInfeasible(format!(
                "resource {} is over capacity before block {}",
                j + 1,
                p + 1
            )));
        }
        let level = match PiecewiseLinear::sum(free) {
            Ok(g) => rational::min(&g.right_inverse(&residual)?, t),
            Err(_) => {
                return Err(Error::PartitionInfeasible(format!("witness {} has no route in block {}", j + 1, p + 1)))
            }
        };
        if let Some(prev) = levels.last() {
            if &level <= prev {
                return Err(Error::PartitionInfeasible(format!(
                    "levels do not increase: block {} gives {level} after {prev}",
                    p + 1
                )));
            }
        }
        levels.push(level);
    }

    // Every block constraint must be tight (the last block may be capped at t)
    // and no resource may be overloaded.
    let at_levels: Vec<Rational> = stage_of.iter().map(|&s| levels[s].clone()).collect();
    let last = blocks.len() - 1;
    for j in 0..inst.resource_count() {
        let load = inst.load(j, &at_levels);
        if &load > t {
            return Err(Error::PartitionInfeasible(format!("resource {} is overloaded", j + 1)));
        }
        let block = blocks.iter().position(|b| b.binary_search(&j).is_ok());
        if let Some(p) = block {
            let capped = p == last && &levels[p] == t;
            if !capped && &load != t {
                return Err(Error::PartitionInfeasible(format!("resource {} of block {} is not tight", j + 1, p + 1)));
            }
        }
    }
    Ok(levels)
}
