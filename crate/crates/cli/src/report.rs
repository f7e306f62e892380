//! JSON and CSV renderings of solver, analysis, oracle and plan results.
//!
//! Every JSON report carries `"schema_version": 1`. Numbers are exact `"p/q"`
//! strings unless float output is requested; infinite breakpoints are `"inf"`.

use frontier_core::analysis::TrajectoryReport;
use frontier_core::linear::LinearStagePlan;
use frontier_core::oracle::DominanceVerdict;
use frontier_core::rational::{self, Extended, Rational};
use frontier_core::{FrontierValue, OrderResult};
use serde::Serialize;
use serde_json::Value;

use crate::input::Loaded;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Default)]
pub struct Format {
    pub float: bool,
}

impl Format {
    pub fn num(&self, x: &Rational) -> Value {
        if self.float {
            serde_json::Number::from_f64(rational::to_f64(x)).map_or(Value::Null, Value::Number)
        } else {
            Value::String(rational::format(x))
        }
    }

    pub fn nums(&self, xs: &[Rational]) -> Vec<Value> {
        xs.iter().map(|x| self.num(x)).collect()
    }

    pub fn ext(&self, x: &Extended) -> Value {
        match x {
            Extended::Finite(v) => self.num(v),
            Extended::Infinite => Value::String("inf".into()),
        }
    }

    /// CSV cell.
    pub fn cell(&self, x: &Rational) -> String {
        if self.float {
            rational::to_f64(x).to_string()
        } else {
            rational::format(x)
        }
    }
}

fn routes_1(routes: &[usize]) -> Vec<usize> {
    routes.iter().map(|i| i + 1).collect()
}

#[derive(Serialize)]
pub struct StageReport {
    pub f: Value,
    #[serde(rename = "J")]
    pub active: Vec<u64>,
    #[serde(rename = "I")]
    pub covered: Vec<usize>,
    #[serde(rename = "N")]
    pub idle: Vec<u64>,
}

#[derive(Serialize)]
pub struct SolveReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub method: String,
    pub exact: bool,
    pub t: Value,
    pub t0: Value,
    #[serde(rename = "F")]
    pub values: Vec<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub saturated: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stages: Option<Vec<StageReport>>,
}

impl SolveReport {
    pub fn new(fmt: Format, inst: &Loaded, method: &str, exact: bool, t: &Rational, values: &[Rational]) -> Self {
        SolveReport {
            schema_version: SCHEMA_VERSION,
            command: "solve",
            method: method.to_string(),
            exact,
            t: fmt.num(t),
            t0: fmt.num(inst.t0()),
            values: fmt.nums(&inst.to_original(values)),
            k_max: None,
            saturated: None,
            stages: None,
        }
    }

    pub fn with_decomposition(mut self, fmt: Format, inst: &Loaded, value: &FrontierValue) -> Self {
        let d = &value.decomposition;
        self.k_max = Some(d.k_max());
        self.saturated = Some(d.terminal_saturated);
        self.stages = Some(
            d.stages
                .iter()
                .map(|s| StageReport {
                    f: fmt.num(&inst.to_original_time(&s.level)),
                    active: inst.resource_ids(&s.active),
                    covered: routes_1(&s.covered),
                    idle: inst.resource_ids(&s.idle),
                })
                .collect(),
        );
        self
    }
}

/// `t,F_1,...,F_I,partition_id` rows.
pub fn trajectory_csv(fmt: Format, inst: &Loaded, samples: &[FrontierValue], ids: &[usize]) -> String {
    let n = inst.canonical.route_count();
    let mut out = String::from("t");
    for i in 1..=n {
        out.push_str(&format!(",F_{i}"));
    }
    out.push_str(",partition_id\n");
    for (s, id) in samples.iter().zip(ids) {
        out.push_str(&fmt.cell(&inst.to_original_time(&s.t)));
        for v in inst.to_original(s.values()) {
            out.push(',');
            out.push_str(&fmt.cell(&v));
        }
        out.push_str(&format!(",{id}\n"));
    }
    out
}

#[derive(Serialize)]
pub struct GridReport {
    pub start: Value,
    pub end: Value,
    pub points: usize,
    pub values: Vec<Value>,
}

#[derive(Serialize)]
pub struct SegmentReport {
    pub id: usize,
    pub start: Value,
    pub end: Value,
    pub samples: usize,
    /// `(J^(1), ..., J^(k_max))` as resource ids.
    pub label: Vec<Vec<u64>>,
}

#[derive(Serialize)]
pub struct JumpReport {
    pub route: usize,
    pub lower: Value,
    pub upper: Value,
    pub gap: Value,
    pub jump_estimate: Value,
}

#[derive(Serialize)]
pub struct ViolationReport {
    pub route: usize,
    pub t: Value,
    pub t_next: Value,
    pub value: Value,
    pub value_next: Value,
}

#[derive(Serialize)]
pub struct AnalyzeReport {
    pub schema_version: u32,
    pub command: &'static str,
    /// Verdicts hold at the sampled resolution only.
    pub scope: &'static str,
    pub grid: GridReport,
    pub gap_threshold: Value,
    pub bisection_depth: usize,
    pub partition_segments: Vec<SegmentReport>,
    pub jump_candidates: Vec<JumpReport>,
    pub monotonicity_violations: Vec<ViolationReport>,
    pub lipschitz_estimate: Value,
    pub lipschitz_envelope: Option<Value>,
    pub lipschitz_envelope_note: &'static str,
    pub envelope_respected: Option<bool>,
    pub reduction_cover: bool,
}

impl AnalyzeReport {
    pub fn new(fmt: Format, inst: &Loaded, r: &TrajectoryReport, threshold: &Rational, depth: usize) -> Self {
        let orig = |s: &Rational| fmt.num(&inst.to_original_time(s));
        let val = |s: &Rational| fmt.num(&(s + inst.t0()));
        let grid = &r.grid;
        AnalyzeReport {
            schema_version: SCHEMA_VERSION,
            command: "analyze",
            scope: "sampled grid",
            grid: GridReport {
                start: grid.first().map_or(Value::Null, orig),
                end: grid.last().map_or(Value::Null, orig),
                points: grid.len(),
                values: grid.iter().map(orig).collect(),
            },
            gap_threshold: fmt.num(threshold),
            bisection_depth: depth,
            partition_segments: r
                .partition_segments
                .iter()
                .map(|s| SegmentReport {
                    id: s.id,
                    start: orig(&s.start),
                    end: orig(&s.end),
                    samples: s.last - s.first + 1,
                    label: s.label.iter().map(|j| inst.resource_ids(j)).collect(),
                })
                .collect(),
            jump_candidates: r
                .jump_candidates
                .iter()
                .map(|j| JumpReport {
                    route: j.route + 1,
                    lower: orig(&j.lower),
                    upper: orig(&j.upper),
                    gap: fmt.num(&j.gap),
                    jump_estimate: fmt.num(&j.jump_estimate),
                })
                .collect(),
            monotonicity_violations: r
                .monotonicity_violations
                .iter()
                .map(|v| ViolationReport {
                    route: v.route + 1,
                    t: orig(&v.t),
                    t_next: orig(&v.t_next),
                    value: val(&v.value),
                    value_next: val(&v.value_next),
                })
                .collect(),
            lipschitz_estimate: fmt.num(&r.lipschitz_estimate),
            lipschitz_envelope: r.lipschitz_envelope.as_ref().map(|e| fmt.num(e)),
            lipschitz_envelope_note: "max(1/c,1)*(1+C*I/c)^J: a conservative sanity envelope, not a sharp constant",
            envelope_respected: r.envelope_respected(),
            reduction_cover: r.reduction_cover,
        }
    }
}

#[derive(Serialize)]
pub struct DominanceReport {
    pub holds: bool,
    pub lattice_size: String,
    pub admissible: u64,
    pub counterexample: Option<Vec<Value>>,
    pub relation: Option<&'static str>,
}

#[derive(Serialize)]
pub struct NestedReport {
    pub values: Vec<Value>,
    pub solver: Vec<Value>,
    pub max_gap: Value,
    pub within_step: bool,
}

#[derive(Serialize)]
pub struct OracleReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub t: Value,
    pub step: Value,
    pub lower: Value,
    pub cap: String,
    pub refinement: u32,
    pub candidate_source: &'static str,
    pub candidate: Vec<Value>,
    pub dominance: DominanceReport,
    pub nested: NestedReport,
}

pub fn relation_name(r: OrderResult) -> &'static str {
    match r {
        OrderResult::Equal => "equal",
        OrderResult::Less => "less",
        OrderResult::Greater => "greater",
        OrderResult::Incomparable => "incomparable",
    }
}

impl DominanceReport {
    pub fn new(fmt: Format, inst: &Loaded, v: &DominanceVerdict) -> Self {
        DominanceReport {
            holds: v.holds,
            lattice_size: v.lattice_size.to_string(),
            admissible: v.admissible,
            counterexample: v.counterexample.as_ref().map(|g| fmt.nums(&inst.to_original(g))),
            relation: v.relation.map(relation_name),
        }
    }
}

#[derive(Serialize)]
pub struct PlanStageReport {
    pub lead_route: usize,
    pub intercept: Value,
    pub a: Value,
    pub b: Vec<(u64, Value)>,
    pub a_j: Vec<(u64, Value)>,
    #[serde(rename = "J")]
    pub active: Vec<u64>,
    #[serde(rename = "I")]
    pub covered: Vec<usize>,
    #[serde(rename = "N")]
    pub idle: Vec<u64>,
    pub t_star: Value,
    pub t_bar: Value,
    pub t_bar_bar: Value,
    pub saturated: bool,
}

#[derive(Serialize)]
pub struct PlanReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub mode: &'static str,
    pub rho: Vec<Value>,
    pub x_star: Vec<Value>,
    pub group_levels: Vec<Value>,
    pub a: Vec<Value>,
    pub horizon: Value,
    pub saturated_tail: bool,
    pub derivatives_at_zero: Vec<Value>,
    pub breakpoints: Vec<Value>,
    pub stages: Vec<PlanStageReport>,
}

impl PlanReport {
    pub fn new(fmt: Format, inst: &Loaded, plan: &LinearStagePlan, germ: bool) -> Self {
        let t0 = inst.t0();
        let time = |e: &Extended| match e {
            Extended::Finite(v) => fmt.num(&(v + t0)),
            Extended::Infinite => Value::String("inf".into()),
        };
        let per_resource = |xs: &[(usize, Rational)]| -> Vec<(u64, Value)> {
            xs.iter().map(|(j, v)| (inst.resource_ids[*j], fmt.num(v))).collect()
        };
        let spec = plan.spec();
        PlanReport {
            schema_version: SCHEMA_VERSION,
            command: "linear-plan",
            mode: if germ { "germ" } else { "linear" },
            rho: fmt.nums(spec.rho()),
            x_star: fmt.nums(&inst.to_original(spec.x_star())),
            group_levels: fmt.nums(&inst.to_original(spec.group_levels())),
            a: plan.stages().iter().map(|s| fmt.num(&s.slope)).collect(),
            horizon: time(plan.horizon()),
            saturated_tail: plan.saturated_tail(),
            derivatives_at_zero: fmt.nums(&plan.derivatives_at_zero()),
            breakpoints: plan.breakpoints().iter().map(|b| fmt.num(&(b + t0))).collect(),
            stages: plan
                .stages()
                .iter()
                .map(|s| PlanStageReport {
                    lead_route: s.lead_route + 1,
                    intercept: fmt.num(&(&s.intercept + t0)),
                    a: fmt.num(&s.slope),
                    b: per_resource(&s.capacity_share),
                    a_j: per_resource(&s.resource_slopes),
                    active: inst.resource_ids(&s.active),
                    covered: routes_1(&s.covered),
                    idle: inst.resource_ids(&s.idle),
                    t_star: time(&s.t_star),
                    t_bar: time(&s.t_bar),
                    t_bar_bar: time(&s.t_bar_bar),
                    saturated: s.saturated,
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
pub struct MethodEntry {
    pub name: String,
    pub description: String,
    pub exact: bool,
}

#[derive(Serialize)]
pub struct MethodsReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub methods: Vec<MethodEntry>,
}
