//! Exact solving by depth-first branch and bound over BTS assignments, and a
//! brute-force enumerator used as an independent oracle on tiny instances.
//!
//! Once every BTS is placed, trunk and model choices follow per BSC (see
//! [`crate::model::complete_assignment`]), so the search only branches on
//! the assignment. BTSs are branched in decreasing traffic order and each
//! one tries BSCs by increasing link cost.
//!
//! Node bounds, all valid for the whole subtree:
//!
//! * committed links, plus the equipment cost already forced by each BSC's
//!   partial load, plus the cheapest link of every unplaced BTS;
//! * the same with each unplaced BTS also charged its traffic at the
//!   cheapest equipment cost per Erlang of the BSC it would open;
//! * the Lagrangian dual of the node (see [`crate::heuristic`]), warm
//!   started from the parent's multipliers.
//!
//! Partial loads are summed in BTS order over the placed BTSs, which never
//! exceeds the final load of the completed design, so capacity steps in the
//! bound are never overcharged.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::heuristic::dual::{self, DualWorkspace, PartialState, UNASSIGNED};
use crate::heuristic::{descend, greedy_choice, initial_multipliers, DEFAULT_ROUNDS};
use crate::model::{CostModel, Instance, Solution};

/// Objectives closer than this are tied; ties go to the lexicographically
/// smallest assignment in BTS id order.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Largest `|B|^|T|` the brute-force oracle accepts by default.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

const ROOT_ITERATIONS: usize = 150;
const NODE_ITERATIONS: usize = 12;
const NODE_AGILITY: f64 = 0.5;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolveLimits {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
}

impl SolveLimits {
    pub fn with_time_limit(seconds: f64) -> Self {
        Self {
            time_limit: Some(Duration::from_secs_f64(seconds)),
            node_limit: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.time_limit.is_some_and(|t| t.is_zero()) {
            return Err(Error::Config("time limit must be positive".into()));
        }
        if self.node_limit == Some(0) {
            return Err(Error::Config("node limit must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Best design found.
    pub solution: Solution,
    /// Proven lower bound on the optimum.
    pub lower_bound: f64,
    /// Whether the solution is proven optimal.
    pub optimal: bool,
    pub nodes_explored: u64,
    pub elapsed: Duration,
}

impl SolveReport {
    /// Relative gap between the solution and the bound.
    pub fn gap(&self) -> f64 {
        let obj = self.solution.objective;
        if obj.abs() < f64::EPSILON {
            0.0
        } else {
            ((obj - self.lower_bound) / obj.abs()).max(0.0)
        }
    }
}

/// Sum over BTSs of their cheapest link; trunks and models are bounded by zero.
pub fn root_lower_bound(instance: &Instance) -> f64 {
    let cm = CostModel::new(instance);
    (0..cm.n_bts())
        .map(|i| cm.link_row(i).iter().copied().fold(f64::INFINITY, f64::min))
        .sum()
}

/// Enumerates every assignment and keeps the best (lexicographic tie-break).
pub fn solve_bruteforce(instance: &Instance) -> Result<SolveReport> {
    solve_bruteforce_capped(instance, DEFAULT_ENUMERATION_CAP)
}

pub fn solve_bruteforce_capped(instance: &Instance, cap: u64) -> Result<SolveReport> {
    let started = Instant::now();
    let cm = CostModel::new(instance);
    let (n, m) = (cm.n_bts(), cm.n_bsc());
    let total = (m as f64).powi(n as i32);
    if total > cap as f64 {
        return Err(Error::EnumerationTooLarge {
            assignments: total,
            cap,
        });
    }

    // odometer over choice vectors in lexicographic order
    let mut choice = vec![0usize; n];
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut count = 0u64;
    'enumerate: loop {
        count += 1;
        if let Some(obj) = cm.objective(&choice) {
            // enumeration is lexicographic, so an equal objective never replaces
            if best.as_ref().is_none_or(|(b, _)| obj < *b - TIE_TOLERANCE) {
                best = Some((obj, choice.clone()));
            }
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                break 'enumerate;
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < m {
                break;
            }
            choice[pos] = 0;
        }
    }

    let (obj, choice) = best.ok_or_else(|| {
        Error::Infeasible("no assignment satisfies the capacity constraints".into())
    })?;
    Ok(SolveReport {
        solution: cm.solution(&choice)?,
        lower_bound: obj,
        optimal: true,
        nodes_explored: count,
        elapsed: started.elapsed(),
    })
}

/// Solves to proven optimality unless a limit is hit first, in which case
/// the best design found and a valid lower bound are returned with
/// `optimal = false`.
pub fn solve_exact(instance: &Instance, limits: &SolveLimits) -> Result<SolveReport> {
    limits.validate()?;
    let started = Instant::now();
    let cm = CostModel::new(instance);
    let mut search = Search::new(&cm, *limits, started);

    if let Ok(choice) = greedy_choice(&cm) {
        let choice = descend(&cm, choice, DEFAULT_ROUNDS, |_, _| {});
        if let Some(obj) = cm.objective(&choice) {
            search.incumbent = Some((obj, choice));
        }
    }

    let root_bound = search.run();
    let nodes_explored = search.nodes;
    let aborted = search.aborted;
    let frontier = search.frontier_bound;

    let Some((obj, choice)) = search.incumbent else {
        return if aborted {
            Err(Error::NoSolutionWithinLimits)
        } else {
            Err(Error::Infeasible(
                "no assignment satisfies the capacity constraints".into(),
            ))
        };
    };
    let lower_bound = if aborted {
        dual::safe(frontier.max(root_bound)).min(obj)
    } else {
        obj
    };
    Ok(SolveReport {
        solution: cm.solution(&choice)?,
        lower_bound,
        optimal: !aborted,
        nodes_explored,
        elapsed: started.elapsed(),
    })
}

struct Search<'c, 'a> {
    cm: &'c CostModel<'a>,
    limits: SolveLimits,
    started: Instant,
    /// BTS indices in branching order.
    order: Vec<usize>,
    /// Per BTS, BSC indices by increasing link cost.
    children: Vec<Vec<usize>>,
    choice: Vec<usize>,
    load: Vec<f64>,
    incumbent: Option<(f64, Vec<usize>)>,
    nodes: u64,
    aborted: bool,
    /// Smallest bound among subtrees left unexplored by an abort.
    frontier_bound: f64,
    ws: DualWorkspace,
}

#[derive(Clone, Copy)]
struct Bounds {
    simple: f64,
    strong: f64,
}

impl<'c, 'a> Search<'c, 'a> {
    fn new(cm: &'c CostModel<'a>, limits: SolveLimits, started: Instant) -> Self {
        let n = cm.n_bts();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| cm.traffic(b).total_cmp(&cm.traffic(a)).then(a.cmp(&b)));
        let children = (0..n)
            .map(|i| {
                let row = cm.link_row(i);
                let mut js: Vec<usize> = (0..cm.n_bsc()).collect();
                js.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
                js
            })
            .collect();
        Self {
            cm,
            limits,
            started,
            order,
            children,
            choice: vec![UNASSIGNED; n],
            load: vec![0.0; cm.n_bsc()],
            incumbent: None,
            nodes: 0,
            aborted: false,
            frontier_bound: f64::INFINITY,
            ws: DualWorkspace::default(),
        }
    }

    fn prune_level(&self) -> f64 {
        match &self.incumbent {
            Some((obj, _)) => obj + TIE_TOLERANCE + 1e-9 * obj.abs().max(1.0),
            None => f64::INFINITY,
        }
    }

    fn limit_hit(&self) -> bool {
        self.limits.node_limit.is_some_and(|n| self.nodes >= n)
            || self
                .limits
                .time_limit
                .is_some_and(|t| self.started.elapsed() >= t)
    }

    /// Load of BSC `j` over placed BTSs, summed in BTS order.
    fn partial_load(&self, j: usize) -> f64 {
        let mut t = 0.0;
        for (i, &c) in self.choice.iter().enumerate() {
            if c == j {
                t += self.cm.traffic(i);
            }
        }
        t
    }

    fn committed(&self) -> f64 {
        self.choice
            .iter()
            .enumerate()
            .filter(|(_, &j)| j != UNASSIGNED)
            .map(|(i, &j)| self.cm.link(i, j))
            .sum()
    }

    fn combinatorial_bounds(&self) -> Bounds {
        let cm = self.cm;
        let mut base = self.committed();
        for (j, &t) in self.load.iter().enumerate() {
            base += cm.site_cost(j, t);
        }
        let mut simple = base;
        let mut strong = base;
        for (i, &c) in self.choice.iter().enumerate() {
            if c != UNASSIGNED {
                continue;
            }
            let a = cm.traffic(i);
            let row = cm.link_row(i);
            let mut cheapest = f64::INFINITY;
            let mut charged = f64::INFINITY;
            for (j, &link) in row.iter().enumerate() {
                cheapest = cheapest.min(link);
                let rate = if self.load[j] > 0.0 {
                    0.0
                } else {
                    cm.cost_per_erl(j)
                };
                charged = charged.min(link + a * rate);
            }
            simple += cheapest;
            strong += charged;
        }
        Bounds { simple, strong }
    }

    /// Runs the search; returns the root bound.
    fn run(&mut self) -> f64 {
        let root = self.combinatorial_bounds();
        let mut lambda = initial_multipliers(self.cm);
        let target = self
            .incumbent
            .as_ref()
            .map_or(root.strong.abs() * 1.1 + 1.0, |(o, _)| *o);
        let state = PartialState {
            choice: &self.choice,
            load: &self.load,
            committed: 0.0,
        };
        let (dual_bound, _) = dual::ascend(
            self.cm,
            &state,
            &mut lambda,
            ROOT_ITERATIONS,
            1.0,
            target,
            f64::INFINITY,
            &mut self.ws,
        );
        let bound = root.strong.max(dual_bound);
        self.visit(0, root, bound, &lambda);
        bound
    }

    fn visit(&mut self, depth: usize, parent: Bounds, bound: f64, lambda: &[f64]) {
        self.nodes += 1;
        if self.limit_hit() {
            self.aborted = true;
            self.frontier_bound = self.frontier_bound.min(bound);
            return;
        }
        if bound > self.prune_level() {
            return;
        }
        if depth == self.order.len() {
            self.leaf();
            return;
        }

        let i = self.order[depth];
        let mut kids: Vec<(usize, Bounds)> = Vec::with_capacity(self.cm.n_bsc());
        for &j in &self.children[i] {
            let old = self.load[j];
            self.choice[i] = j;
            self.load[j] = self.partial_load(j);
            if self.cm.site_cost(j, self.load[j]).is_finite() {
                let child = self.combinatorial_bounds();
                debug_assert!(
                    child.simple >= parent.simple - 1e-9 * parent.simple.abs().max(1.0),
                    "simple bound decreased from {} to {}",
                    parent.simple,
                    child.simple
                );
                kids.push((j, child));
            }
            self.load[j] = old;
            self.choice[i] = UNASSIGNED;
        }

        for k in 0..kids.len() {
            if self.aborted {
                let rest = kids[k..]
                    .iter()
                    .map(|(_, b)| b.strong.max(bound))
                    .fold(f64::INFINITY, f64::min);
                self.frontier_bound = self.frontier_bound.min(rest);
                return;
            }
            let (j, child) = kids[k];
            let child_bound = child.strong.max(bound);
            if child_bound > self.prune_level() {
                continue;
            }
            let old = self.load[j];
            self.choice[i] = j;
            self.load[j] = self.partial_load(j);

            let mut child_lambda = lambda.to_vec();
            let mut node_bound = child_bound;
            if depth + 2 < self.order.len() {
                let stop = self.prune_level();
                let state = PartialState {
                    choice: &self.choice,
                    load: &self.load,
                    committed: self.committed(),
                };
                let target = self.incumbent.as_ref().map_or(stop, |(o, _)| *o);
                let (d, _) = dual::ascend(
                    self.cm,
                    &state,
                    &mut child_lambda,
                    NODE_ITERATIONS,
                    NODE_AGILITY,
                    target,
                    stop,
                    &mut self.ws,
                );
                node_bound = node_bound.max(d);
            }
            self.visit(depth + 1, child, node_bound, &child_lambda);

            self.load[j] = old;
            self.choice[i] = UNASSIGNED;
        }
    }

    fn leaf(&mut self) {
        let Some(obj) = self.cm.objective(&self.choice) else {
            return;
        };
        let better = match &self.incumbent {
            None => true,
            Some((best, best_choice)) => {
                obj < best - TIE_TOLERANCE
                    || (obj <= best + TIE_TOLERANCE && self.choice < *best_choice)
            }
        };
        if better {
            self.incumbent = Some((obj, self.choice.clone()));
        }
    }
}
