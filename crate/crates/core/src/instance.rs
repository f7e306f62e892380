//! Network topologies: routes with cost functions and the resources sharing them.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::pwl::PiecewiseLinear;
use crate::rational::Rational;

/// A validated topology. Indices are zero-based internally.
///
/// Invariants: every resource set is nonempty, sorted and distinct from the
/// others, their union is every route, and every cost vanishes at some
/// nonpositive point (`x*_i <= 0`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemInstance {
    costs: Vec<PiecewiseLinear>,
    resources: Vec<Vec<usize>>,
}

impl ProblemInstance {
    pub fn new(costs: Vec<PiecewiseLinear>, resources: Vec<Vec<usize>>) -> Result<Self> {
        let resources = validate_topology(costs.len(), resources)?;
        for (i, h) in costs.iter().enumerate() {
            if h.zero_end().is_positive() {
                return Err(Error::InvalidInstance(format!("route {} has zero end {} > 0", i + 1, h.zero_end())));
            }
        }
        Ok(ProblemInstance { costs, resources })
    }

    pub fn route_count(&self) -> usize {
        self.costs.len()
    }

    pub fn resource_count(&self) -> usize {
        self.resources.len()
    }

    pub fn cost(&self, route: usize) -> &PiecewiseLinear {
        &self.costs[route]
    }

    pub fn costs(&self) -> &[PiecewiseLinear] {
        &self.costs
    }

    /// Routes of resource `j`, sorted.
    pub fn resource(&self, j: usize) -> &[usize] {
        &self.resources[j]
    }

    pub fn resources(&self) -> &[Vec<usize>] {
        &self.resources
    }

    pub fn zero_ends(&self) -> Vec<Rational> {
        self.costs.iter().map(PiecewiseLinear::zero_end).collect()
    }

    /// `sum_{i in G_j} h_i(a_i)`.
    pub fn load(&self, j: usize, a: &[Rational]) -> Rational {
        self.resources[j].iter().map(|&i| self.costs[i].eval(&a[i])).sum()
    }

    /// True iff every resource has a route used by no other resource.
    pub fn has_local_traffic(&self) -> bool {
        (0..self.resource_count()).all(|j| {
            self.resources[j]
                .iter()
                .any(|i| self.resources.iter().enumerate().all(|(k, g)| k == j || g.binary_search(i).is_err()))
        })
    }

    /// Smallest and largest slope over all costs on their supports.
    pub fn slope_bounds(&self) -> (Rational, Rational) {
        let mut bounds = self.costs.iter().map(PiecewiseLinear::slope_bounds);
        let first = bounds.next().expect("at least one route");
        bounds.fold(first, |(lo, hi), (l, h)| (if l < lo { l } else { lo }, if h > hi { h } else { hi }))
    }
}

fn validate_topology(routes: usize, resources: Vec<Vec<usize>>) -> Result<Vec<Vec<usize>>> {
    if routes == 0 {
        return Err(Error::InvalidInstance("at least one route is required".into()));
    }
    if resources.is_empty() {
        return Err(Error::InvalidInstance("at least one resource is required".into()));
    }
    let mut covered = vec![false; routes];
    let mut sorted: Vec<Vec<usize>> = Vec::with_capacity(resources.len());
    for (j, mut g) in resources.into_iter().enumerate() {
        if g.is_empty() {
            return Err(Error::InvalidInstance(format!("resource {} has no routes", j + 1)));
        }
        g.sort_unstable();
        if g.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInstance(format!("resource {} lists a route twice", j + 1)));
        }
        for &i in &g {
            if i >= routes {
                return Err(Error::InvalidInstance(format!(
                    "resource {} references route {} but only {routes} routes exist",
                    j + 1,
                    i + 1
                )));
            }
            covered[i] = true;
        }
        if let Some(k) = sorted.iter().position(|other| *other == g) {
            return Err(Error::InvalidInstance(format!("resources {} and {} have the same route set", k + 1, j + 1)));
        }
        sorted.push(g);
    }
    if let Some(i) = covered.iter().position(|c| !c) {
        return Err(Error::InvalidInstance(format!("route {} belongs to no resource", i + 1)));
    }
    Ok(sorted)
}

/// An instance whose constraints are `sum h_i(a_i) <= t - t0` with `x*_i <= t0`.
#[derive(Clone, Debug)]
pub struct OffsetInstance {
    costs: Vec<PiecewiseLinear>,
    resources: Vec<Vec<usize>>,
    offset: Rational,
}

impl OffsetInstance {
    pub fn new(costs: Vec<PiecewiseLinear>, resources: Vec<Vec<usize>>, offset: Rational) -> Result<Self> {
        let resources = validate_topology(costs.len(), resources)?;
        for (i, h) in costs.iter().enumerate() {
            if h.zero_end() > offset {
                return Err(Error::InvalidInstance(format!(
                    "route {} has zero end {} above the offset {offset}",
                    i + 1,
                    h.zero_end()
                )));
            }
        }
        Ok(OffsetInstance { costs, resources, offset })
    }

    pub fn offset(&self) -> &Rational {
        &self.offset
    }

    /// The equivalent instance with zero offset, `h~_i(y) = h_i(y + t0)`.
    pub fn canonical(&self) -> ProblemInstance {
        let costs = self.costs.iter().map(|h| h.shifted(&self.offset)).collect();
        ProblemInstance::new(costs, self.resources.clone()).expect("validated on construction")
    }

    pub fn to_canonical_time(&self, t: &Rational) -> Result<Rational> {
        if t < &self.offset {
            return Err(Error::InvalidArgument(format!("t = {t} is below the offset {}", self.offset)));
        }
        Ok(t - &self.offset)
    }

    /// Maps a canonical-coordinate vector back to original coordinates.
    pub fn to_original(&self, values: &[Rational]) -> Vec<Rational> {
        values.iter().map(|v| v + &self.offset).collect()
    }

    pub fn from_original(&self, values: &[Rational]) -> Vec<Rational> {
        values.iter().map(|v| v - &self.offset).collect()
    }
}

impl From<ProblemInstance> for OffsetInstance {
    fn from(inst: ProblemInstance) -> Self {
        OffsetInstance { costs: inst.costs, resources: inst.resources, offset: Rational::zero() }
    }
}

/// Reduces an offset problem at time `t >= t0` to the canonical instance and
/// canonical time `s = t - t0`. Solving the canonical instance at `s` and adding
/// `t0` to every coordinate gives the offset problem's frontier.
pub fn shift_reduce(inst: &OffsetInstance, t: &Rational) -> Result<(ProblemInstance, Rational)> {
    let s = inst.to_canonical_time(t)?;
    Ok((inst.canonical(), s))
}
