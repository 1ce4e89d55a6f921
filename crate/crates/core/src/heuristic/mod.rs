//! Approximate solving for instances beyond exact reach: greedy construction,
//! first-improvement local search and a Lagrangian lower bound.

pub(crate) mod dual;

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::model::{check_feasibility, CostModel, Instance, Solution};

use dual::{DualWorkspace, PartialState, UNASSIGNED};

/// Objective improvements below this are ignored.
const IMPROVEMENT_TOL: f64 = 1e-9;

/// Default number of subgradient iterations.
pub const DEFAULT_ITERATIONS: usize = 200;

/// Default local search round limit.
pub const DEFAULT_ROUNDS: usize = 1000;

/// Multipliers of the relaxed "served exactly once" rows, one per BTS (id order).
#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers {
    pub lambda: Vec<f64>,
}

impl Multipliers {
    pub fn zeros(n_bts: usize) -> Self {
        Self {
            lambda: vec![0.0; n_bts],
        }
    }
}

/// Subgradient step schedule: agility `mu_k = mu0 / k` scales the
/// target-normalized step `(UB - L_k) / |g|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRule {
    pub mu0: f64,
}

impl Default for StepRule {
    fn default() -> Self {
        Self { mu0: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct HeuristicReport {
    pub solution: Solution,
    pub lower_bound: Option<f64>,
    pub iterations: usize,
    pub elapsed: Duration,
}

/// Builds a design BTS by BTS, largest demand first, each time picking the
/// BSC with the smallest increase in link plus equipment cost.
pub fn greedy_construct(instance: &Instance) -> Result<Solution> {
    let cm = CostModel::new(instance);
    let choice = greedy_choice(&cm)?;
    cm.solution(&choice)
}

pub(crate) fn greedy_choice(cm: &CostModel<'_>) -> Result<Vec<usize>> {
    let n = cm.n_bts();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cm.traffic(b).total_cmp(&cm.traffic(a)).then(a.cmp(&b)));

    let mut load = vec![0.0; cm.n_bsc()];
    let mut choice = vec![UNASSIGNED; n];
    for i in order {
        let a = cm.traffic(i);
        let mut best: Option<(f64, usize)> = None;
        for (j, &l) in load.iter().enumerate() {
            let delta = cm.link(i, j) + cm.site_cost(j, l + a) - cm.site_cost(j, l);
            if delta.is_finite() && best.is_none_or(|(d, _)| delta < d) {
                best = Some((delta, j));
            }
        }
        let (_, j) = best.ok_or_else(|| {
            Error::Infeasible(format!(
                "no BSC has room for BTS {} ({a:.3} Erl) after greedy placement",
                cm.instance().bts()[i].id()
            ))
        })?;
        choice[i] = j;
        load[j] += a;
    }
    Ok(choice)
}

/// First-improvement descent over single-BTS reassignments and pairwise swaps.
///
/// Every accepted move strictly lowers the objective as computed by
/// [`CostModel::complete`]; the search stops at a local optimum or after
/// `max_rounds` full passes.
pub fn local_search(instance: &Instance, start: &Solution, max_rounds: usize) -> Result<Solution> {
    local_search_observed(instance, start, max_rounds, |_, _| {})
}

/// [`local_search`] calling `on_accept(choice, objective)` after every accepted move.
pub fn local_search_observed<F>(
    instance: &Instance,
    start: &Solution,
    max_rounds: usize,
    on_accept: F,
) -> Result<Solution>
where
    F: FnMut(&[usize], f64),
{
    let violations = check_feasibility(instance, start);
    if let Some(v) = violations.first() {
        return Err(Error::InfeasibleSolution(format!(
            "local search needs a feasible start ({} violations, first: {v})",
            violations.len()
        )));
    }
    let cm = CostModel::new(instance);
    let choice = start.assignment.to_indices(instance)?;
    let choice = descend(&cm, choice, max_rounds, on_accept);
    cm.solution(&choice)
}

pub(crate) fn descend<F>(
    cm: &CostModel<'_>,
    mut choice: Vec<usize>,
    max_rounds: usize,
    mut on_accept: F,
) -> Vec<usize>
where
    F: FnMut(&[usize], f64),
{
    let n = cm.n_bts();
    let Some(mut objective) = cm.objective(&choice) else {
        return choice;
    };
    let mut load = cm.loads(&choice);

    let mut try_accept =
        |choice: &mut Vec<usize>, candidate: Vec<usize>, objective: &mut f64| match cm
            .objective(&candidate)
        {
            Some(obj) if obj < *objective - IMPROVEMENT_TOL => {
                *choice = candidate;
                *objective = obj;
                on_accept(choice, obj);
                true
            }
            _ => false,
        };

    for _ in 0..max_rounds {
        let mut improved = false;

        for i in 0..n {
            let a = cm.traffic(i);
            for j in 0..cm.n_bsc() {
                let c = choice[i];
                if j == c {
                    continue;
                }
                let delta = cm.link(i, j) - cm.link(i, c) + cm.site_cost(c, load[c] - a)
                    - cm.site_cost(c, load[c])
                    + cm.site_cost(j, load[j] + a)
                    - cm.site_cost(j, load[j]);
                if delta < -IMPROVEMENT_TOL {
                    let mut candidate = choice.clone();
                    candidate[i] = j;
                    if try_accept(&mut choice, candidate, &mut objective) {
                        load = cm.loads(&choice);
                        improved = true;
                    }
                }
            }
        }

        for i in 0..n {
            for k in i + 1..n {
                let (ci, ck) = (choice[i], choice[k]);
                if ci == ck {
                    continue;
                }
                let shift = cm.traffic(k) - cm.traffic(i);
                let delta = cm.link(i, ck) + cm.link(k, ci) - cm.link(i, ci) - cm.link(k, ck)
                    + cm.site_cost(ci, load[ci] + shift)
                    - cm.site_cost(ci, load[ci])
                    + cm.site_cost(ck, load[ck] - shift)
                    - cm.site_cost(ck, load[ck]);
                if delta < -IMPROVEMENT_TOL {
                    let mut candidate = choice.clone();
                    candidate.swap(i, k);
                    if try_accept(&mut choice, candidate, &mut objective) {
                        load = cm.loads(&choice);
                        improved = true;
                    }
                }
            }
        }

        if !improved {
            break;
        }
    }
    choice
}

/// Value of the Lagrangian dual at fixed multipliers; a lower bound on the
/// optimum up to floating-point rounding.
pub fn dual_bound(instance: &Instance, multipliers: &Multipliers) -> Result<f64> {
    let cm = CostModel::new(instance);
    if multipliers.lambda.len() != cm.n_bts() {
        return Err(Error::Config(format!(
            "expected {} multipliers, got {}",
            cm.n_bts(),
            multipliers.lambda.len()
        )));
    }
    let choice = vec![UNASSIGNED; cm.n_bts()];
    let load = vec![0.0; cm.n_bsc()];
    let state = PartialState {
        choice: &choice,
        load: &load,
        committed: 0.0,
    };
    Ok(dual::evaluate(
        &cm,
        &state,
        &multipliers.lambda,
        &mut DualWorkspace::default(),
    ))
}

/// Best Lagrangian bound found by subgradient ascent, and its multipliers.
///
/// The step target is the greedy plus local search objective. Multipliers
/// start at `min_j (link_ij + a_i * r_j)`, with `r_j` the cheapest equipment
/// cost per Erlang at BSC `j`, where the dual already equals the simple
/// per-BTS bound. The returned bound is shaded down by a relative 1e-9 so
/// that rounding cannot lift a tight bound above the optimum.
pub fn lagrangian_lower_bound(
    instance: &Instance,
    iterations: usize,
    rule: StepRule,
) -> Result<(f64, Multipliers)> {
    let cm = CostModel::new(instance);
    let upper = greedy_choice(&cm)
        .ok()
        .map(|c| descend(&cm, c, DEFAULT_ROUNDS, |_, _| {}))
        .and_then(|c| cm.objective(&c));
    lagrangian_with_target(&cm, iterations, rule, upper)
}

pub(crate) fn initial_multipliers(cm: &CostModel<'_>) -> Vec<f64> {
    (0..cm.n_bts())
        .map(|i| {
            (0..cm.n_bsc())
                .map(|j| cm.link(i, j) + cm.traffic(i) * cm.cost_per_erl(j))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

pub(crate) fn lagrangian_with_target(
    cm: &CostModel<'_>,
    iterations: usize,
    rule: StepRule,
    upper: Option<f64>,
) -> Result<(f64, Multipliers)> {
    if iterations == 0 {
        return Err(Error::Config(
            "at least one subgradient iteration is required".into(),
        ));
    }
    if !rule.mu0.is_finite() || rule.mu0 <= 0.0 {
        return Err(Error::Config(format!(
            "step agility must be positive, got {}",
            rule.mu0
        )));
    }
    let choice = vec![UNASSIGNED; cm.n_bts()];
    let load = vec![0.0; cm.n_bsc()];
    let state = PartialState {
        choice: &choice,
        load: &load,
        committed: 0.0,
    };
    let mut lambda = initial_multipliers(cm);
    let mut ws = DualWorkspace::default();
    let target = match upper {
        Some(ub) => ub,
        None => {
            // no feasible design known: aim a little above the starting bound
            let start = dual::evaluate(cm, &state, &lambda, &mut ws);
            start.abs() * 1.1 + 1.0
        }
    };
    let (bound, _) = dual::ascend(
        cm,
        &state,
        &mut lambda,
        iterations,
        rule.mu0,
        target,
        f64::INFINITY,
        &mut ws,
    );
    Ok((dual::safe(bound), Multipliers { lambda }))
}

/// Greedy construction followed by local search, optionally with a Lagrangian bound.
pub fn solve_heuristic(
    instance: &Instance,
    local_rounds: usize,
    lagrange: Option<(usize, StepRule)>,
) -> Result<HeuristicReport> {
    let started = Instant::now();
    let cm = CostModel::new(instance);
    let mut choice = greedy_choice(&cm)?;
    if local_rounds > 0 {
        choice = descend(&cm, choice, local_rounds, |_, _| {});
    }
    let solution = cm.solution(&choice)?;
    let (lower_bound, iterations) = match lagrange {
        Some((iterations, rule)) => {
            let (bound, _) =
                lagrangian_with_target(&cm, iterations, rule, Some(solution.objective))?;
            (Some(bound.min(solution.objective)), iterations)
        }
        None => (None, 0),
    };
    Ok(HeuristicReport {
        solution,
        lower_bound,
        iterations,
        elapsed: started.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::instance;
    use crate::model::{check_feasibility, CostRates};

    fn line_instance() -> Instance {
        instance(
            &[
                (0.0, 0.0, 40.0),
                (5.0, 0.0, 70.0),
                (40.0, 0.0, 20.0),
                (45.0, 3.0, 55.0),
                (90.0, 0.0, 0.0),
            ],
            &[(0.0, 0.0), (45.0, 0.0), (90.0, 0.0)],
            CostRates::default(),
        )
    }

    #[test]
    fn single_bts_greedy_is_optimal() {
        let inst = instance(
            &[(3.0, 4.0, 30.0)],
            &[(0.0, 0.0), (6.0, 8.0)],
            CostRates::default(),
        );
        let g = greedy_construct(&inst).unwrap();
        let cm = CostModel::new(&inst);
        let best = [0usize, 1]
            .iter()
            .map(|&j| cm.objective(&[j]).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(g.objective, best);
    }

    #[test]
    fn greedy_and_local_are_feasible_and_monotone() {
        let inst = line_instance();
        let g = greedy_construct(&inst).unwrap();
        assert!(check_feasibility(&inst, &g).is_empty());
        let mut trace = Vec::new();
        let l = local_search_observed(&inst, &g, 100, |c, obj| {
            let sol = CostModel::new(&inst).solution(c).unwrap();
            assert!(check_feasibility(&inst, &sol).is_empty());
            trace.push(obj);
        })
        .unwrap();
        assert!(l.objective <= g.objective);
        assert!(trace.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn local_search_rejects_infeasible_start() {
        let inst = line_instance();
        let mut g = greedy_construct(&inst).unwrap();
        for cfg in g.bsc_config.values_mut() {
            cfg.lines = 0;
        }
        assert!(matches!(
            local_search(&inst, &g, 10),
            Err(Error::InfeasibleSolution(_))
        ));
    }

    #[test]
    fn zero_multipliers_give_zero_bound() {
        let inst = line_instance();
        let bound = dual_bound(&inst, &Multipliers::zeros(5)).unwrap();
        assert_eq!(bound, 0.0);
        assert!(dual_bound(&inst, &Multipliers::zeros(2)).is_err());
    }

    #[test]
    fn single_pair_bound_converges() {
        let inst = instance(&[(3.0, 4.0, 30.0)], &[(10.0, 20.0)], CostRates::default());
        let opt = greedy_construct(&inst).unwrap().objective;
        let (bound, _) = lagrangian_lower_bound(&inst, 200, StepRule::default()).unwrap();
        assert!(bound <= opt + 1e-9);
        assert!(bound >= 0.99 * opt, "bound {bound} vs optimum {opt}");
    }

    #[test]
    fn bound_below_local_optimum() {
        let inst = line_instance();
        let report = solve_heuristic(&inst, 100, Some((200, StepRule::default()))).unwrap();
        let lb = report.lower_bound.unwrap();
        assert!(lb <= report.solution.objective);
        assert!(lb > 0.0);
    }

    #[test]
    fn bad_configuration() {
        let inst = line_instance();
        assert!(lagrangian_lower_bound(&inst, 0, StepRule::default()).is_err());
        assert!(lagrangian_lower_bound(&inst, 5, StepRule { mu0: 0.0 }).is_err());
    }
}
