//! JSON instance and solution files.
//!
//! Both carry `"format": "bss-planner/1"`; files with any other tag are
//! rejected. Capacity tables are stored as their inputs (GoS and timeslot
//! schedule) and rebuilt on load.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{
    evaluate, Assignment, BscCandidate, BscConfig, BscModel, BtsNode, CostBreakdown, CostRates,
    Instance, Site, SiteId, Solution,
};
use crate::scaling::Outcome;
use crate::traffic::{build_capacity_table, Gos, TimeslotSchedule};

pub const FORMAT: &str = "bss-planner/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SiteJson {
    id: u32,
    x: f64,
    y: f64,
}

impl From<&Site> for SiteJson {
    fn from(s: &Site) -> Self {
        Self {
            id: s.id,
            x: s.x,
            y: s.y,
        }
    }
}

impl From<&SiteJson> for Site {
    fn from(s: &SiteJson) -> Self {
        Site::new(s.id, s.x, s.y)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BtsJson {
    id: u32,
    x: f64,
    y: f64,
    traffic_erl: f64,
    #[serde(default = "one")]
    abis_lines: u32,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelJson {
    id: u32,
    name: String,
    capacity_erl: f64,
    acquisition_cost: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CapacityJson {
    gos: Gos,
    voice_ts_per_line: Vec<u8>,
    max_lines: usize,
    #[serde(default = "default_sub_timeslots")]
    sub_timeslots_per_ts: u32,
}

fn default_sub_timeslots() -> u32 {
    TimeslotSchedule::DEFAULT_SUB_TIMESLOTS
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RatesJson {
    abis_rate: f64,
    a_rate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceJson {
    format: String,
    msc: SiteJson,
    bts: Vec<BtsJson>,
    bsc_sites: Vec<SiteJson>,
    models: Vec<ModelJson>,
    capacity: CapacityJson,
    rates: RatesJson,
}

fn check_format(found: &str) -> Result<()> {
    if found == FORMAT {
        Ok(())
    } else {
        Err(Error::Format {
            found: found.to_string(),
            expected: FORMAT.to_string(),
        })
    }
}

impl From<&Instance> for InstanceJson {
    fn from(inst: &Instance) -> Self {
        let table = inst.capacity_table();
        Self {
            format: FORMAT.to_string(),
            msc: inst.msc().into(),
            bts: inst
                .bts()
                .iter()
                .map(|b| BtsJson {
                    id: b.id(),
                    x: b.site.x,
                    y: b.site.y,
                    traffic_erl: b.traffic_erl,
                    abis_lines: b.abis_lines,
                })
                .collect(),
            bsc_sites: inst.bsc().iter().map(|c| (&c.site).into()).collect(),
            models: inst
                .models()
                .iter()
                .map(|m| ModelJson {
                    id: m.id,
                    name: m.name.clone(),
                    capacity_erl: m.capacity_erl,
                    acquisition_cost: m.acquisition_cost,
                })
                .collect(),
            capacity: CapacityJson {
                gos: table.gos(),
                voice_ts_per_line: table.schedule().voice_ts_per_line().to_vec(),
                max_lines: table.max_lines(),
                sub_timeslots_per_ts: table.schedule().sub_timeslots_per_ts(),
            },
            rates: RatesJson {
                abis_rate: inst.rates().abis_rate,
                a_rate: inst.rates().a_rate,
            },
        }
    }
}

impl InstanceJson {
    fn into_instance(self) -> Result<Instance> {
        check_format(&self.format)?;
        let schedule = TimeslotSchedule::new(
            self.capacity.voice_ts_per_line,
            self.capacity.sub_timeslots_per_ts,
        )?;
        let table = build_capacity_table(self.capacity.max_lines, &schedule, self.capacity.gos)?;
        let bts = self
            .bts
            .iter()
            .map(|b| BtsNode {
                site: Site::new(b.id, b.x, b.y),
                traffic_erl: b.traffic_erl,
                abis_lines: b.abis_lines,
            })
            .collect();
        let bsc = self
            .bsc_sites
            .iter()
            .map(|s| BscCandidate::new(s.into()))
            .collect();
        let models = self
            .models
            .into_iter()
            .map(|m| BscModel::new(m.id, m.name, m.capacity_erl, m.acquisition_cost))
            .collect();
        let rates = CostRates {
            abis_rate: self.rates.abis_rate,
            a_rate: self.rates.a_rate,
        };
        Instance::new((&self.msc).into(), bts, bsc, models, table, rates)
    }
}

pub fn instance_to_json(instance: &Instance) -> String {
    serde_json::to_string_pretty(&InstanceJson::from(instance))
        .expect("instance serialization cannot fail")
}

pub fn instance_from_json(text: &str) -> Result<Instance> {
    serde_json::from_str::<InstanceJson>(text)?.into_instance()
}

pub fn write_instance(path: &Path, instance: &Instance) -> Result<()> {
    fs::write(path, instance_to_json(instance) + "\n")?;
    Ok(())
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    instance_from_json(&fs::read_to_string(path)?)
}

/// `{"bts id": bsc id, ...}`; repeated keys are kept rather than merged.
#[derive(Debug, Clone)]
struct AssignmentJson(Vec<(SiteId, SiteId)>);

impl Serialize for AssignmentJson {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (bts, bsc) in &self.0 {
            map.serialize_entry(&bts.to_string(), bsc)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for AssignmentJson {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct PairsVisitor;

        impl<'de> Visitor<'de> for PairsVisitor {
            type Value = AssignmentJson;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from BTS id to BSC id")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut pairs = Vec::new();
                while let Some((key, bsc)) = access.next_entry::<String, SiteId>()? {
                    let bts = key.parse::<SiteId>().map_err(|_| {
                        serde::de::Error::custom(format!("BTS id {key:?} is not an integer"))
                    })?;
                    pairs.push((bts, bsc));
                }
                Ok(AssignmentJson(pairs))
            }
        }

        deserializer.deserialize_map(PairsVisitor)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BscConfigJson {
    lines: usize,
    model: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BreakdownJson {
    abis_cost: f64,
    trunk_cost: f64,
    bsc_cost: f64,
    total: f64,
}

impl From<CostBreakdown> for BreakdownJson {
    fn from(b: CostBreakdown) -> Self {
        Self {
            abis_cost: b.abis_cost,
            trunk_cost: b.trunk_cost,
            bsc_cost: b.bsc_cost,
            total: b.total,
        }
    }
}

/// Solver statistics stored alongside a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub mode: String,
    pub lower_bound: f64,
    pub gap: f64,
    pub optimal: bool,
    pub limit_reached: bool,
    pub nodes_explored: u64,
    pub elapsed_s: f64,
}

impl From<&Outcome> for SolveSummary {
    fn from(o: &Outcome) -> Self {
        Self {
            mode: o.mode.to_string(),
            lower_bound: o.lower_bound,
            gap: o.gap(),
            optimal: o.optimal,
            limit_reached: o.limit_reached,
            nodes_explored: o.nodes_explored,
            elapsed_s: o.elapsed.as_secs_f64(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SolutionJson {
    format: String,
    assignment: AssignmentJson,
    bsc_config: BTreeMap<SiteId, BscConfigJson>,
    objective: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    breakdown: Option<BreakdownJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    report: Option<SolveSummary>,
}

/// A solution file: the design plus the solver report, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFile {
    pub solution: Solution,
    pub report: Option<SolveSummary>,
}

/// Serializes a solution with its cost breakdown recomputed from `instance`.
pub fn solution_to_json(
    instance: &Instance,
    solution: &Solution,
    report: Option<SolveSummary>,
) -> String {
    let dto = SolutionJson {
        format: FORMAT.to_string(),
        assignment: AssignmentJson(solution.assignment.pairs().to_vec()),
        bsc_config: solution
            .bsc_config
            .iter()
            .map(|(&id, c)| {
                (
                    id,
                    BscConfigJson {
                        lines: c.lines,
                        model: c.model,
                    },
                )
            })
            .collect(),
        objective: solution.objective,
        breakdown: Some(evaluate(instance, solution).into()),
        report,
    };
    serde_json::to_string_pretty(&dto).expect("solution serialization cannot fail")
}

pub fn solution_from_json(text: &str) -> Result<SolutionFile> {
    let dto: SolutionJson = serde_json::from_str(text)?;
    check_format(&dto.format)?;
    let solution = Solution {
        assignment: Assignment::new(dto.assignment.0),
        bsc_config: dto
            .bsc_config
            .into_iter()
            .map(|(id, c)| {
                (
                    id,
                    BscConfig {
                        lines: c.lines,
                        model: c.model,
                    },
                )
            })
            .collect(),
        objective: dto.objective,
    };
    Ok(SolutionFile {
        solution,
        report: dto.report,
    })
}

pub fn write_solution(
    path: &Path,
    instance: &Instance,
    solution: &Solution,
    report: Option<SolveSummary>,
) -> Result<()> {
    fs::write(path, solution_to_json(instance, solution, report) + "\n")?;
    Ok(())
}

pub fn read_solution(path: &Path) -> Result<SolutionFile> {
    solution_from_json(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{solve_exact, SolveLimits};
    use crate::generate::{generate, GenParams};

    #[test]
    fn instance_round_trip() {
        let inst = generate(&GenParams::new(9, 4).with_bsc_candidates(4)).unwrap();
        let text = instance_to_json(&inst);
        assert!(text.contains("\"format\": \"bss-planner/1\""));
        let back = instance_from_json(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(instance_to_json(&back), text);
    }

    #[test]
    fn solution_round_trip() {
        let inst = generate(&GenParams::new(5, 8)).unwrap();
        let sol = solve_exact(&inst, &SolveLimits::default())
            .unwrap()
            .solution;
        let file = solution_from_json(&solution_to_json(&inst, &sol, None)).unwrap();
        assert_eq!(file.solution, sol);
        assert!(file.report.is_none());
    }

    #[test]
    fn wrong_format_rejected() {
        let inst = generate(&GenParams::new(2, 1)).unwrap();
        let text = instance_to_json(&inst).replace("bss-planner/1", "bss-planner/0");
        assert!(matches!(
            instance_from_json(&text),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn duplicate_assignment_keys_survive() {
        let text = r#"{"format":"bss-planner/1","assignment":{"0":1,"0":2},
            "bsc_config":{},"objective":0.0}"#;
        let file = solution_from_json(text).unwrap();
        assert_eq!(file.solution.assignment.pairs(), &[(0, 1), (0, 2)]);
    }

    #[test]
    fn non_numeric_key_rejected() {
        let text = r#"{"format":"bss-planner/1","assignment":{"a":1},
            "bsc_config":{},"objective":0.0}"#;
        assert!(solution_from_json(text).is_err());
    }
}
