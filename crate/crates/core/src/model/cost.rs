use std::collections::BTreeMap;

use super::{Assignment, BscCandidate, BscConfig, BtsNode, CostRates, Instance, Site, Solution};
use crate::error::{Error, Result};

/// The three terms of the objective, plus their sum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostBreakdown {
    pub abis_cost: f64,
    pub trunk_cost: f64,
    pub bsc_cost: f64,
    pub total: f64,
}

impl CostBreakdown {
    fn from_parts(abis_cost: f64, trunk_cost: f64, bsc_cost: f64) -> Self {
        Self {
            abis_cost,
            trunk_cost,
            bsc_cost,
            total: abis_cost + trunk_cost + bsc_cost,
        }
    }
}

/// Cost of the Abis link between a BTS and a BSC site.
#[inline]
pub fn link_cost(bts: &BtsNode, bsc: &BscCandidate, rates: CostRates) -> f64 {
    bts.site.distance(&bsc.site) * rates.abis_rate * bts.abis_lines as f64
}

/// Cost of `lines` E1 trunks between a BSC site and the MSC.
#[inline]
pub fn trunk_cost(bsc: &BscCandidate, msc: &Site, rates: CostRates, lines: usize) -> f64 {
    bsc.site.distance(msc) * rates.a_rate * lines as f64
}

/// One step of a BSC's equipment cost curve: the cheapest (trunk, model)
/// combination able to carry up to `capacity_erl`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub capacity_erl: f64,
    pub cost: f64,
}

/// Optimal equipment of one BSC for a given traffic load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteChoice {
    pub traffic_erl: f64,
    pub lines: usize,
    /// Model index into [`Instance::models`].
    pub model: Option<usize>,
    pub trunk_cost: f64,
    pub model_cost: f64,
}

impl SiteChoice {
    #[inline]
    pub fn cost(&self) -> f64 {
        self.trunk_cost + self.model_cost
    }
}

/// Precomputed cost data shared by all solvers.
///
/// Every objective value produced by the crate goes through
/// [`CostModel::complete`], which sums the Abis term in BTS order and the
/// trunk and model terms in BSC order, so two solvers that reach the same
/// assignment report bit-identical objectives.
#[derive(Debug, Clone)]
pub struct CostModel<'a> {
    instance: &'a Instance,
    n_bsc: usize,
    link: Vec<f64>,
    trunk: Vec<Vec<f64>>,
    steps: Vec<Vec<Step>>,
    cost_per_erl: Vec<f64>,
}

impl<'a> CostModel<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        let rates = instance.rates();
        let n_bsc = instance.bsc().len();
        let link = instance
            .bts()
            .iter()
            .flat_map(|b| instance.bsc().iter().map(move |c| link_cost(b, c, rates)))
            .collect();
        let table = instance.capacity_table();
        let trunk: Vec<Vec<f64>> = instance
            .bsc()
            .iter()
            .map(|c| {
                (0..=table.max_lines())
                    .map(|k| trunk_cost(c, instance.msc(), rates, k))
                    .collect()
            })
            .collect();

        let mut steps = Vec::with_capacity(n_bsc);
        let mut cost_per_erl = Vec::with_capacity(n_bsc);
        for trunk_j in &trunk {
            let mut options: Vec<Step> = table.entries()[1..]
                .iter()
                .flat_map(|e| {
                    instance.models().iter().map(move |m| Step {
                        capacity_erl: e.capacity_erl.min(m.capacity_erl),
                        cost: trunk_j[e.lines] + m.acquisition_cost,
                    })
                })
                .filter(|s| s.capacity_erl > 0.0)
                .collect();
            options.sort_by(|a, b| {
                a.capacity_erl
                    .total_cmp(&b.capacity_erl)
                    .then(a.cost.total_cmp(&b.cost))
            });
            // keep only options strictly cheaper than every larger one
            let mut staircase: Vec<Step> = Vec::new();
            let mut best = f64::INFINITY;
            for s in options.into_iter().rev() {
                if s.cost < best {
                    best = s.cost;
                    staircase.push(s);
                }
            }
            staircase.reverse();
            let ratio = staircase
                .iter()
                .map(|s| s.cost / s.capacity_erl)
                .fold(f64::INFINITY, f64::min);
            steps.push(staircase);
            cost_per_erl.push(ratio);
        }

        Self {
            instance,
            n_bsc,
            link,
            trunk,
            steps,
            cost_per_erl,
        }
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn n_bts(&self) -> usize {
        self.instance.bts().len()
    }

    pub fn n_bsc(&self) -> usize {
        self.n_bsc
    }

    #[inline]
    pub fn traffic(&self, bts: usize) -> f64 {
        self.instance.bts()[bts].traffic_erl
    }

    #[inline]
    pub fn link(&self, bts: usize, bsc: usize) -> f64 {
        self.link[bts * self.n_bsc + bsc]
    }

    /// Link costs of one BTS to every BSC.
    #[inline]
    pub fn link_row(&self, bts: usize) -> &[f64] {
        &self.link[bts * self.n_bsc..(bts + 1) * self.n_bsc]
    }

    /// Pareto staircase of (capacity, cost) options at a BSC, capacity ascending.
    pub fn steps(&self, bsc: usize) -> &[Step] {
        &self.steps[bsc]
    }

    /// Lowest equipment cost per Erlang over all options at a BSC; the
    /// equipment cost of any load `t` is at least `t` times this ratio.
    pub fn cost_per_erl(&self, bsc: usize) -> f64 {
        self.cost_per_erl[bsc]
    }

    /// Cheapest trunk and model for `traffic_erl` at BSC `bsc`: fewest lines
    /// covering the load, then the cheapest model covering it (lowest id on ties).
    pub fn site_choice(&self, bsc: usize, traffic_erl: f64) -> Result<SiteChoice> {
        if traffic_erl <= 0.0 {
            return Ok(SiteChoice {
                traffic_erl,
                lines: 0,
                model: None,
                trunk_cost: 0.0,
                model_cost: 0.0,
            });
        }
        let bsc_id = self.instance.bsc()[bsc].id();
        let table = self.instance.capacity_table();
        let lines = table
            .lines_for(traffic_erl)
            .ok_or_else(|| Error::InfeasibleAssignment {
                bsc: bsc_id,
                traffic_erl,
                limit: format!(
                    "the {:.3} Erl trunk capacity of {} lines",
                    table.max_capacity(),
                    table.max_lines()
                ),
            })?;
        let mut model: Option<usize> = None;
        for (w, m) in self.instance.models().iter().enumerate() {
            if m.capacity_erl >= traffic_erl
                && model.is_none_or(|best| {
                    m.acquisition_cost < self.instance.models()[best].acquisition_cost
                })
            {
                model = Some(w);
            }
        }
        let model = model.ok_or_else(|| Error::InfeasibleAssignment {
            bsc: bsc_id,
            traffic_erl,
            limit: "every BSC model capacity".into(),
        })?;
        Ok(SiteChoice {
            traffic_erl,
            lines,
            model: Some(model),
            trunk_cost: self.trunk[bsc][lines],
            model_cost: self.instance.models()[model].acquisition_cost,
        })
    }

    /// Equipment cost at a BSC for a load, infinite when no option covers it.
    #[inline]
    pub fn site_cost(&self, bsc: usize, traffic_erl: f64) -> f64 {
        if traffic_erl <= 0.0 {
            return 0.0;
        }
        let steps = &self.steps[bsc];
        let k = steps.partition_point(|s| s.capacity_erl < traffic_erl);
        steps.get(k).map_or(f64::INFINITY, |s| s.cost)
    }

    /// Per-BSC traffic of an index assignment, summed in BTS order.
    pub fn loads(&self, choice: &[usize]) -> Vec<f64> {
        let mut load = vec![0.0; self.n_bsc];
        for (i, &j) in choice.iter().enumerate() {
            load[j] += self.traffic(i);
        }
        load
    }

    /// Completes an index assignment with optimal trunks and models.
    pub fn complete(&self, choice: &[usize]) -> Result<(Vec<SiteChoice>, CostBreakdown)> {
        debug_assert_eq!(choice.len(), self.n_bts());
        let abis: f64 = choice
            .iter()
            .enumerate()
            .map(|(i, &j)| self.link(i, j))
            .sum();
        let sites = self
            .loads(choice)
            .into_iter()
            .enumerate()
            .map(|(j, t)| self.site_choice(j, t))
            .collect::<Result<Vec<_>>>()?;
        let trunk: f64 = sites.iter().map(|s| s.trunk_cost).sum();
        let bsc: f64 = sites.iter().map(|s| s.model_cost).sum();
        Ok((sites, CostBreakdown::from_parts(abis, trunk, bsc)))
    }

    /// Objective of an index assignment, `None` when it overloads some BSC.
    pub fn objective(&self, choice: &[usize]) -> Option<f64> {
        self.complete(choice).ok().map(|(_, b)| b.total)
    }

    /// Builds the full [`Solution`] for an index assignment.
    pub fn solution(&self, choice: &[usize]) -> Result<Solution> {
        let (sites, breakdown) = self.complete(choice)?;
        let models = self.instance.models();
        let bsc_config = self
            .instance
            .bsc()
            .iter()
            .zip(&sites)
            .map(|(c, s)| {
                (
                    c.id(),
                    BscConfig {
                        lines: s.lines,
                        model: s.model.map(|w| models[w].id),
                    },
                )
            })
            .collect::<BTreeMap<_, _>>();
        Ok(Solution {
            assignment: Assignment::from_indices(self.instance, choice),
            bsc_config,
            objective: breakdown.total,
        })
    }
}

/// Optimal trunk dimensioning and model choice for a fixed BTS assignment.
///
/// For a fixed assignment the remaining decisions separate per BSC: each site
/// takes the fewest E1 lines whose capacity covers its load and the cheapest
/// model that does. A BSC with no load gets neither.
pub fn complete_assignment(instance: &Instance, assignment: &Assignment) -> Result<Solution> {
    let choice = assignment.to_indices(instance)?;
    CostModel::new(instance).solution(&choice)
}

/// Recomputes the objective terms of a solution from scratch.
///
/// Entries naming unknown sites or models contribute nothing; judging
/// feasibility is left to [`super::check_feasibility`].
pub fn evaluate(instance: &Instance, solution: &Solution) -> CostBreakdown {
    let rates = instance.rates();
    let abis: f64 = solution
        .assignment
        .pairs()
        .iter()
        .filter_map(|&(bts, bsc)| {
            let i = instance.bts_index(bts)?;
            let j = instance.bsc_index(bsc)?;
            Some(link_cost(&instance.bts()[i], &instance.bsc()[j], rates))
        })
        .sum();
    let configs: Vec<BscConfig> = instance
        .bsc()
        .iter()
        .map(|c| {
            solution
                .bsc_config
                .get(&c.id())
                .copied()
                .unwrap_or_default()
        })
        .collect();
    let trunk: f64 = instance
        .bsc()
        .iter()
        .zip(&configs)
        .map(|(c, cfg)| trunk_cost(c, instance.msc(), rates, cfg.lines))
        .sum();
    let bsc: f64 = configs
        .iter()
        .map(|cfg| {
            cfg.model
                .and_then(|id| instance.model_index(id))
                .map_or(0.0, |w| instance.models()[w].acquisition_cost)
        })
        .sum();
    CostBreakdown::from_parts(abis, trunk, bsc)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::instance;
    use super::*;
    use crate::model::{BscModel, CostRates};

    fn site(x: f64, y: f64) -> Site {
        Site::new(0, x, y)
    }

    #[test]
    fn link_cost_rules() {
        let rates = CostRates {
            abis_rate: 2.0,
            a_rate: 3.0,
        };
        let bsc = BscCandidate::new(site(0.0, 0.0));
        let mut bts = BtsNode::new(site(0.0, 0.0), 5.0);
        assert_eq!(link_cost(&bts, &bsc, rates), 0.0);
        bts.site = site(6.0, 8.0);
        assert_eq!(link_cost(&bts, &bsc, rates), 20.0);
        bts.abis_lines = 3;
        assert_eq!(link_cost(&bts, &bsc, rates), 60.0);
    }

    #[test]
    fn trunk_cost_rules() {
        let rates = CostRates {
            abis_rate: 2.0,
            a_rate: 3.0,
        };
        let msc = site(0.0, 0.0);
        let far = BscCandidate::new(site(3.0, 4.0));
        assert_eq!(trunk_cost(&far, &msc, rates, 0), 0.0);
        assert_eq!(trunk_cost(&far, &msc, rates, 2), 30.0);
        let home = BscCandidate::new(site(0.0, 0.0));
        assert_eq!(trunk_cost(&home, &msc, rates, 7), 0.0);
    }

    #[test]
    fn zero_traffic_bts_pays_only_its_link() {
        let inst = instance(&[(3.0, 4.0, 0.0)], &[(0.0, 0.0)], CostRates::default());
        let sol = complete_assignment(&inst, &Assignment::new(vec![(0, 0)])).unwrap();
        let cfg = sol.bsc_config[&0];
        assert_eq!(
            cfg,
            BscConfig {
                lines: 0,
                model: None
            }
        );
        assert_eq!(sol.objective, 50.0);
        let b = evaluate(&inst, &sol);
        assert_eq!((b.abis_cost, b.trunk_cost, b.bsc_cost), (50.0, 0.0, 0.0));
    }

    #[test]
    fn model_follows_load() {
        let inst500 = instance(&[(0.0, 0.0, 500.0)], &[(0.0, 0.0)], CostRates::default());
        let sol = complete_assignment(&inst500, &Assignment::new(vec![(0, 0)])).unwrap();
        assert_eq!(sol.bsc_config[&0].model, Some(0));

        let inst600 = instance(&[(0.0, 0.0, 600.0)], &[(0.0, 0.0)], CostRates::default());
        let sol = complete_assignment(&inst600, &Assignment::new(vec![(0, 0)])).unwrap();
        assert_eq!(sol.bsc_config[&0].model, Some(1));
        // smallest k with f_k >= 600, found by scanning the table
        let table = inst600.capacity_table();
        let k = table
            .entries()
            .iter()
            .find(|e| e.capacity_erl >= 600.0)
            .unwrap()
            .lines;
        assert_eq!(sol.bsc_config[&0].lines, k);
        assert!(table.capacity(k - 1).unwrap() < 600.0);
    }

    #[test]
    fn hand_built_single_site_cost() {
        // BTS at (3,4) -> BSC at (6,8) -> MSC at origin, 50 Erl
        let rates = CostRates {
            abis_rate: 2.0,
            a_rate: 3.0,
        };
        let inst = instance(&[(3.0, 4.0, 50.0)], &[(6.0, 8.0)], rates);
        let sol = complete_assignment(&inst, &Assignment::new(vec![(0, 0)])).unwrap();
        // abis 5 km * 2, trunk 10 km * 3 * 1 line, small model 1000
        let b = evaluate(&inst, &sol);
        assert_eq!(b.abis_cost, 10.0);
        assert_eq!(b.trunk_cost, 30.0);
        assert_eq!(b.bsc_cost, 1000.0);
        assert_eq!(b.total, 1040.0);
        assert_eq!(sol.objective, b.total);
    }

    #[test]
    fn cheapest_model_ties_go_to_lowest_id() {
        let inst = instance(&[(0.0, 0.0, 100.0)], &[(0.0, 0.0)], CostRates::default());
        let models = vec![
            BscModel::new(4, "b", 600.0, 10.0),
            BscModel::new(2, "a", 700.0, 10.0),
            BscModel::new(1, "c", 4096.0, 50.0),
        ];
        let inst = inst.with_models(models).unwrap();
        let sol = complete_assignment(&inst, &Assignment::new(vec![(0, 0)])).unwrap();
        assert_eq!(sol.bsc_config[&0].model, Some(2));
    }

    #[test]
    fn overload_is_reported_with_bsc() {
        let inst = instance(
            &[(0.0, 0.0, 3000.0), (0.0, 0.0, 3000.0)],
            &[(0.0, 0.0), (1.0, 1.0)],
            CostRates::default(),
        );
        let err = complete_assignment(&inst, &Assignment::new(vec![(0, 1), (1, 1)])).unwrap_err();
        assert!(matches!(err, Error::InfeasibleAssignment { bsc: 1, .. }));
        assert!(complete_assignment(&inst, &Assignment::new(vec![(0, 0)])).is_err());
    }

    #[test]
    fn staircase_matches_rule_based_cost() {
        let inst = instance(
            &[(10.0, 10.0, 10.0)],
            &[(40.0, 30.0), (0.0, 0.0)],
            CostRates::default(),
        );
        let cm = CostModel::new(&inst);
        for j in 0..2 {
            for t in (1..=4200).step_by(7) {
                let t = t as f64 + 0.25;
                let rule = cm
                    .site_choice(j, t)
                    .map(|s| s.cost())
                    .unwrap_or(f64::INFINITY);
                assert_eq!(cm.site_cost(j, t), rule, "bsc {j} load {t}");
                assert!(rule >= cm.cost_per_erl(j) * t * (1.0 - 1e-12));
            }
        }
    }
}
