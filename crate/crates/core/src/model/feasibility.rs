use std::fmt;

use super::{Instance, ModelId, SiteId, Solution};

/// Which family of model constraints a violation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    /// Every BTS is served by exactly one BSC.
    Assignment,
    /// BSC load fits in its E1 trunk group to the MSC.
    TrunkCapacity,
    /// BSC load fits in its controller model.
    BscCapacity,
    /// Single trunk level and at most one model per BSC, known ids, idle sites unequipped.
    Structure,
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintKind::Assignment => "assignment",
            ConstraintKind::TrunkCapacity => "trunk-capacity",
            ConstraintKind::BscCapacity => "bsc-capacity",
            ConstraintKind::Structure => "structure",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Unassigned {
        bts: SiteId,
    },
    MultiplyAssigned {
        bts: SiteId,
        bscs: Vec<SiteId>,
    },
    UnknownBts {
        bts: SiteId,
    },
    UnknownBsc {
        bts: SiteId,
        bsc: SiteId,
    },
    TrunkOverload {
        bsc: SiteId,
        traffic_erl: f64,
        lines: usize,
        capacity_erl: f64,
    },
    BscOverload {
        bsc: SiteId,
        traffic_erl: f64,
        model: Option<ModelId>,
        capacity_erl: f64,
    },
    LinesOutOfRange {
        bsc: SiteId,
        lines: usize,
        max_lines: usize,
    },
    UnknownModel {
        bsc: SiteId,
        model: ModelId,
    },
    UnknownConfigSite {
        bsc: SiteId,
    },
    IdleEquipped {
        bsc: SiteId,
        lines: usize,
        model: Option<ModelId>,
    },
}

impl Violation {
    pub fn kind(&self) -> ConstraintKind {
        use Violation::*;
        match self {
            Unassigned { .. } | MultiplyAssigned { .. } | UnknownBts { .. } | UnknownBsc { .. } => {
                ConstraintKind::Assignment
            }
            TrunkOverload { .. } => ConstraintKind::TrunkCapacity,
            BscOverload { .. } => ConstraintKind::BscCapacity,
            LinesOutOfRange { .. }
            | UnknownModel { .. }
            | UnknownConfigSite { .. }
            | IdleEquipped { .. } => ConstraintKind::Structure,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        write!(f, "[{}] ", self.kind())?;
        match self {
            Unassigned { bts } => write!(f, "BTS {bts} is not assigned to any BSC"),
            MultiplyAssigned { bts, bscs } => {
                write!(f, "BTS {bts} is assigned to {} BSCs {bscs:?}", bscs.len())
            }
            UnknownBts { bts } => write!(f, "assignment names unknown BTS {bts}"),
            UnknownBsc { bts, bsc } => write!(f, "BTS {bts} is assigned to unknown BSC {bsc}"),
            TrunkOverload {
                bsc,
                traffic_erl,
                lines,
                capacity_erl,
            } => write!(
                f,
                "BSC {bsc} carries {traffic_erl:.3} Erl but {lines} E1 lines only take {capacity_erl:.3} Erl"
            ),
            BscOverload {
                bsc,
                traffic_erl,
                model: Some(model),
                capacity_erl,
            } => write!(
                f,
                "BSC {bsc} carries {traffic_erl:.3} Erl but model {model} only switches {capacity_erl:.3} Erl"
            ),
            BscOverload {
                bsc,
                traffic_erl,
                model: None,
                ..
            } => write!(f, "BSC {bsc} carries {traffic_erl:.3} Erl but has no model"),
            LinesOutOfRange {
                bsc,
                lines,
                max_lines,
            } => write!(
                f,
                "BSC {bsc} uses {lines} E1 lines, the capacity table stops at {max_lines}"
            ),
            UnknownModel { bsc, model } => write!(f, "BSC {bsc} uses unknown model {model}"),
            UnknownConfigSite { bsc } => write!(f, "configuration given for unknown BSC {bsc}"),
            IdleEquipped { bsc, lines, model } => write!(
                f,
                "BSC {bsc} carries no traffic but is equipped ({lines} lines, model {model:?})"
            ),
        }
    }
}

/// Lists every constraint the solution breaks; empty means feasible.
pub fn check_feasibility(instance: &Instance, solution: &Solution) -> Vec<Violation> {
    let mut violations = Vec::new();
    let n_bts = instance.bts().len();
    let mut served_by: Vec<Vec<SiteId>> = vec![Vec::new(); n_bts];
    let mut load = vec![0.0; instance.bsc().len()];

    for &(bts, bsc) in solution.assignment.pairs() {
        let Some(i) = instance.bts_index(bts) else {
            violations.push(Violation::UnknownBts { bts });
            continue;
        };
        let Some(j) = instance.bsc_index(bsc) else {
            violations.push(Violation::UnknownBsc { bts, bsc });
            continue;
        };
        served_by[i].push(bsc);
        load[j] += instance.bts()[i].traffic_erl;
    }
    for (node, bscs) in instance.bts().iter().zip(served_by) {
        match bscs.len() {
            0 => violations.push(Violation::Unassigned { bts: node.id() }),
            1 => {}
            _ => violations.push(Violation::MultiplyAssigned {
                bts: node.id(),
                bscs,
            }),
        }
    }

    for &bsc in solution.bsc_config.keys() {
        if instance.bsc_index(bsc).is_none() {
            violations.push(Violation::UnknownConfigSite { bsc });
        }
    }

    let table = instance.capacity_table();
    for (site, &traffic_erl) in instance.bsc().iter().zip(&load) {
        let bsc = site.id();
        let cfg = solution.bsc_config.get(&bsc).copied().unwrap_or_default();

        match table.capacity(cfg.lines) {
            None => violations.push(Violation::LinesOutOfRange {
                bsc,
                lines: cfg.lines,
                max_lines: table.max_lines(),
            }),
            Some(capacity_erl) if traffic_erl > capacity_erl => {
                violations.push(Violation::TrunkOverload {
                    bsc,
                    traffic_erl,
                    lines: cfg.lines,
                    capacity_erl,
                })
            }
            Some(_) => {}
        }

        let model_capacity = match cfg.model {
            None => Some(0.0),
            Some(id) => match instance.model_index(id) {
                Some(w) => Some(instance.models()[w].capacity_erl),
                None => {
                    violations.push(Violation::UnknownModel { bsc, model: id });
                    None
                }
            },
        };
        if let Some(capacity_erl) = model_capacity {
            if traffic_erl > capacity_erl {
                violations.push(Violation::BscOverload {
                    bsc,
                    traffic_erl,
                    model: cfg.model,
                    capacity_erl,
                });
            }
        }

        if traffic_erl == 0.0 && (cfg.lines > 0 || cfg.model.is_some()) {
            violations.push(Violation::IdleEquipped {
                bsc,
                lines: cfg.lines,
                model: cfg.model,
            });
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::instance;
    use super::*;
    use crate::model::{complete_assignment, Assignment, BscConfig, CostRates};

    fn feasible() -> (Instance, Solution) {
        let inst = instance(
            &[(1.0, 0.0, 70.0), (2.0, 0.0, 60.0), (9.0, 0.0, 0.0)],
            &[(0.0, 0.0), (10.0, 0.0)],
            CostRates::default(),
        );
        let sol =
            complete_assignment(&inst, &Assignment::new(vec![(0, 0), (1, 0), (2, 1)])).unwrap();
        (inst, sol)
    }

    fn kinds(v: &[Violation]) -> Vec<ConstraintKind> {
        v.iter().map(Violation::kind).collect()
    }

    #[test]
    fn completed_solution_is_feasible() {
        let (inst, sol) = feasible();
        assert!(check_feasibility(&inst, &sol).is_empty());
        // BSC 1 only serves a zero-traffic BTS
        assert_eq!(sol.bsc_config[&1], BscConfig::default());
    }

    #[test]
    fn double_and_missing_assignment() {
        let (inst, mut sol) = feasible();
        sol.assignment = Assignment::new(vec![(0, 0), (0, 1), (1, 0), (2, 1)]);
        let v = check_feasibility(&inst, &sol);
        assert!(v.contains(&Violation::MultiplyAssigned {
            bts: 0,
            bscs: vec![0, 1]
        }));

        sol.assignment = Assignment::new(vec![(0, 0), (1, 0)]);
        let v = check_feasibility(&inst, &sol);
        assert_eq!(v, vec![Violation::Unassigned { bts: 2 }]);
        assert_eq!(kinds(&v), vec![ConstraintKind::Assignment]);
    }

    #[test]
    fn one_line_short_breaks_trunk_capacity() {
        let (inst, mut sol) = feasible();
        // 130 Erl needs two lines under the default schedule
        assert_eq!(sol.bsc_config[&0].lines, 2);
        sol.bsc_config.get_mut(&0).unwrap().lines = 1;
        let v = check_feasibility(&inst, &sol);
        assert_eq!(kinds(&v), vec![ConstraintKind::TrunkCapacity]);
        assert!(v[0].to_string().starts_with("[trunk-capacity] BSC 0"));
    }

    #[test]
    fn model_and_structure_violations() {
        let (inst, mut sol) = feasible();
        sol.bsc_config.get_mut(&0).unwrap().model = None;
        assert_eq!(
            kinds(&check_feasibility(&inst, &sol)),
            vec![ConstraintKind::BscCapacity]
        );

        let (inst, mut sol) = feasible();
        sol.bsc_config.insert(
            1,
            BscConfig {
                lines: 1,
                model: Some(0),
            },
        );
        sol.bsc_config.get_mut(&0).unwrap().lines = 99;
        sol.bsc_config.insert(5, BscConfig::default());
        let v = check_feasibility(&inst, &sol);
        assert!(
            v.iter().all(|v| v.kind() == ConstraintKind::Structure),
            "{v:?}"
        );
        assert_eq!(v.len(), 3);

        let (inst, mut sol) = feasible();
        sol.bsc_config.get_mut(&0).unwrap().model = Some(42);
        let v = check_feasibility(&inst, &sol);
        assert_eq!(v, vec![Violation::UnknownModel { bsc: 0, model: 42 }]);
    }

    #[test]
    fn unknown_ids_in_assignment() {
        let (inst, mut sol) = feasible();
        sol.assignment = Assignment::new(vec![(0, 0), (1, 0), (2, 9), (8, 0)]);
        let v = check_feasibility(&inst, &sol);
        assert!(v.contains(&Violation::UnknownBsc { bts: 2, bsc: 9 }));
        assert!(v.contains(&Violation::UnknownBts { bts: 8 }));
        assert!(v.contains(&Violation::Unassigned { bts: 2 }));
    }
}
