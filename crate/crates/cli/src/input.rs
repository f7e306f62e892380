//! Instance files.
//!
//! ```json
//! {
//!   "routes": 3,
//!   "resources": [{"id": 1, "routes": [1, 2]}, {"id": 2, "routes": [1, 3]}],
//!   "h": [
//!     {"type": "linear", "rho": "1", "x_star": "-2"},
//!     {"type": "pwl", "anchor": "0", "segments": [["1", "2"], ["2", "0"]], "final_slope": "2"}
//!   ],
//!   "t0": "0"
//! }
//! ```
//!
//! Routes and resource ids are 1-based. A `pwl` segment `[x, s]` is the piece
//! that ends at `x` and has slope `s`; the first piece starts at the anchor.

use std::fs;
use std::path::Path;

use frontier_core::rational::{self, Rational};
use frontier_core::{Error, OffsetInstance, PiecewiseLinear, ProblemInstance, Result};
use serde::Deserialize;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub routes: usize,
    pub resources: Vec<ResourceEntry>,
    pub h: Vec<CostEntry>,
    #[serde(default)]
    pub t0: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceEntry {
    pub id: u64,
    pub routes: Vec<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum CostEntry {
    Linear { rho: String, x_star: String },
    Pwl { anchor: String, segments: Vec<(String, String)>, final_slope: String },
}

impl CostEntry {
    fn build(&self, route: usize) -> Result<PiecewiseLinear> {
        let ctx = |e: Error| Error::InvalidInstance(format!("h of route {route}: {e}"));
        match self {
            CostEntry::Linear { rho, x_star } => {
                PiecewiseLinear::linear(rational::parse(rho).map_err(ctx)?, rational::parse(x_star).map_err(ctx)?)
                    .map_err(ctx)
            }
            CostEntry::Pwl { anchor, segments, final_slope } => {
                let segments = segments
                    .iter()
                    .map(|(x, s)| Ok((rational::parse(x)?, rational::parse(s)?)))
                    .collect::<Result<Vec<_>>>()
                    .map_err(ctx)?;
                PiecewiseLinear::new(
                    rational::parse(anchor).map_err(ctx)?,
                    segments,
                    rational::parse(final_slope).map_err(ctx)?,
                )
                .map_err(ctx)
            }
        }
    }
}

/// A validated instance in both its original and its canonical (`t0 = 0`) form.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub offset: OffsetInstance,
    pub canonical: ProblemInstance,
    /// External id of every resource, in internal order.
    pub resource_ids: Vec<u64>,
}

impl Loaded {
    pub fn t0(&self) -> &Rational {
        self.offset.offset()
    }

    pub fn to_canonical_time(&self, t: &Rational) -> Result<Rational> {
        self.offset.to_canonical_time(t)
    }

    pub fn to_original_time(&self, s: &Rational) -> Rational {
        s + self.t0()
    }

    pub fn to_original(&self, values: &[Rational]) -> Vec<Rational> {
        self.offset.to_original(values)
    }

    pub fn resource_ids(&self, internal: &[usize]) -> Vec<u64> {
        let mut ids: Vec<u64> = internal.iter().map(|&j| self.resource_ids[j]).collect();
        ids.sort_unstable();
        ids
    }
}

pub fn load(path: &Path) -> Result<Loaded> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Loaded> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| Error::InvalidInstance(format!("malformed instance file: {e}")))?;
    file.validate()
}

impl InstanceFile {
    pub fn validate(&self) -> Result<Loaded> {
        if self.h.len() != self.routes {
            return Err(Error::InvalidInstance(format!(
                "\"routes\" is {} but \"h\" has {} entries",
                self.routes,
                self.h.len()
            )));
        }
        let mut ids: Vec<u64> = self.resources.iter().map(|r| r.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInstance("resource ids must be distinct".into()));
        }
        let mut entries: Vec<&ResourceEntry> = self.resources.iter().collect();
        entries.sort_by_key(|r| r.id);
        let mut sets = Vec::with_capacity(entries.len());
        for r in &entries {
            if r.routes.is_empty() {
                return Err(Error::InvalidInstance(format!("resource {} has an empty route set", r.id)));
            }
            let set = r
                .routes
                .iter()
                .map(|&i| {
                    if i == 0 || i > self.routes {
                        Err(Error::InvalidInstance(format!(
                            "resource {} lists route {i}, outside 1..={}",
                            r.id, self.routes
                        )))
                    } else {
                        Ok(i - 1)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            sets.push(set);
        }
        let costs = self.h.iter().enumerate().map(|(i, c)| c.build(i + 1)).collect::<Result<Vec<_>>>()?;
        let t0 = match &self.t0 {
            Some(s) => rational::parse(s).map_err(|e| Error::InvalidInstance(format!("t0: {e}")))?,
            None => Rational::from_integer(0.into()),
        };
        let offset = OffsetInstance::new(costs, sets, t0)?;
        let canonical = offset.canonical();
        Ok(Loaded { offset, canonical, resource_ids: entries.iter().map(|r| r.id).collect() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_LINK: &str = r#"{
        "routes": 3,
        "resources": [{"id": 2, "routes": [1, 3]}, {"id": 1, "routes": [1, 2]}],
        "h": [
            {"type": "linear", "rho": "1", "x_star": "-2"},
            {"type": "linear", "rho": "1", "x_star": "-1"},
            {"type": "pwl", "anchor": "0", "segments": [], "final_slope": "5"}
        ]
    }"#;

    #[test]
    fn parses_and_orders_resources_by_id() {
        let l = parse(TWO_LINK).unwrap();
        assert_eq!(l.canonical.resources(), &[vec![0, 1], vec![0, 2]]);
        assert_eq!(l.resource_ids, vec![1, 2]);
        assert_eq!(l.canonical.cost(2).eval(&Rational::from_integer(1.into())), Rational::from_integer(5.into()));
    }

    #[test]
    fn rejects_bad_files() {
        for bad in [
            r#"{"routes": 1, "resources": [{"id": 1, "routes": []}], "h": [{"type": "linear", "rho": "1", "x_star": "0"}]}"#,
            r#"{"routes": 1, "resources": [{"id": 1, "routes": [2]}], "h": [{"type": "linear", "rho": "1", "x_star": "0"}]}"#,
            r#"{"routes": 2, "resources": [{"id": 1, "routes": [1]}], "h": [{"type": "linear", "rho": "1", "x_star": "0"}]}"#,
            r#"{"routes": 1, "resources": [{"id": 1, "routes": [1]}], "h": [{"type": "linear", "rho": "1", "x_star": "1e3"}]}"#,
            r#"{"routes": 1, "resources": [{"id": 1, "routes": [1]}], "h": [{"type": "cubic"}]}"#,
            r#"{"routes": 1, "resources": [{"id": 1, "routes": [1]}, {"id": 1, "routes": [1]}], "h": [{"type": "linear", "rho": "1", "x_star": "0"}]}"#,
            "not json",
        ] {
            assert!(parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn offset() {
        let text = r#"{"routes": 1, "resources": [{"id": 1, "routes": [1]}],
            "h": [{"type": "linear", "rho": "2", "x_star": "0.5"}], "t0": "1/2"}"#;
        let l = parse(text).unwrap();
        assert_eq!(l.t0(), &rational::ratio(1, 2));
        assert_eq!(l.canonical.zero_ends(), vec![rational::ratio(0, 1)]);
        assert!(l.to_canonical_time(&rational::ratio(0, 1)).is_err());
    }
}
