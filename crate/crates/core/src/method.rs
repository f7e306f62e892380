//! Interchangeable ways of computing `F(t)`, selected by name at run time.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::linear;
use crate::oracle::{self, GridSpec};
use crate::rational::Rational;
use crate::solver;

pub trait FrontierMethod: Send + Sync {
    fn name(&self) -> &str;

    fn description(&self) -> &str;

    /// `F(t)` (or an approximation of it, for lattice methods).
    fn frontier(&self, inst: &ProblemInstance, t: &Rational) -> Result<Vec<Rational>>;

    /// True iff the result is exact whenever it is returned.
    fn exact(&self) -> bool {
        true
    }
}

/// The stage construction.
#[derive(Clone, Copy, Debug, Default)]
pub struct StageMethod;

impl FrontierMethod for StageMethod {
    fn name(&self) -> &str {
        "stage"
    }

    fn description(&self) -> &str {
        "stage construction with exact piecewise-linear inversion"
    }

    fn frontier(&self, inst: &ProblemInstance, t: &Rational) -> Result<Vec<Rational>> {
        Ok(solver::solve(inst, t)?.values.into_inner())
    }
}

/// Closed-form plan for single-kink costs, valid below its horizon.
#[derive(Clone, Copy, Debug, Default)]
pub struct LinearMethod;

impl FrontierMethod for LinearMethod {
    fn name(&self) -> &str {
        "linear"
    }

    fn description(&self) -> &str {
        "closed-form slopes for single-kink costs, below the monotonicity horizon"
    }

    fn frontier(&self, inst: &ProblemInstance, t: &Rational) -> Result<Vec<Rational>> {
        linear::analyze_linear(inst)?.eval(t)
    }
}

/// Greedy reconstruction on a lattice; within one step of `F(t)`.
#[derive(Clone, Debug)]
pub struct LatticeMethod {
    pub grid: GridSpec,
}

impl Default for LatticeMethod {
    fn default() -> Self {
        LatticeMethod { grid: GridSpec::new(Rational::new(1.into(), 8.into())) }
    }
}

impl FrontierMethod for LatticeMethod {
    fn name(&self) -> &str {
        "lattice"
    }

    fn description(&self) -> &str {
        "nested max-min search on a lattice (step 1/8), accurate to one step"
    }

    fn frontier(&self, inst: &ProblemInstance, t: &Rational) -> Result<Vec<Rational>> {
        oracle::nested_maxmin_grid(inst, t, &self.grid)
    }

    fn exact(&self) -> bool {
        false
    }
}

#[derive(Clone, Default)]
pub struct MethodRegistry {
    methods: BTreeMap<String, Arc<dyn FrontierMethod>>,
}

impl MethodRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// `stage`, `linear` and `lattice`.
    pub fn with_builtins() -> Self {
        let mut r = Self::new();
        r.register(Arc::new(StageMethod));
        r.register(Arc::new(LinearMethod));
        r.register(Arc::new(LatticeMethod::default()));
        r
    }

    /// Replaces any method with the same name.
    pub fn register(&mut self, method: Arc<dyn FrontierMethod>) {
        self.methods.insert(method.name().to_string(), method);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn FrontierMethod>> {
        self.methods.get(name).cloned().ok_or_else(|| {
            Error::InvalidArgument(format!("unknown method {name:?}; available: {}", self.names().join(", ")))
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.methods.keys().map(String::as_str).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<dyn FrontierMethod>> {
        self.methods.values()
    }
}
