//! Lagrangian dual of the design problem with the "served exactly once"
//! rows relaxed.
//!
//! For multipliers `lambda`, the relaxed problem splits per BSC: pick a
//! (trunk level, model) option, then the subset of BTSs with the most negative
//! reduced cost `link - lambda` that fits in the option's capacity. The
//! subset choice is solved as a fractional knapsack, which can only lower the
//! value, so every evaluation is a valid lower bound. A partially fixed
//! assignment (a branch-and-bound node) is handled by charging the committed
//! links up front and shrinking each BSC's residual capacity by its load.

use crate::model::CostModel;

pub(crate) const UNASSIGNED: usize = usize::MAX;

/// Relative allowance for rounding in a dual value.
const ROUNDING_MARGIN: f64 = 1e-9;

/// Lowers a computed dual value by a rounding allowance, so that a bound that
/// is tight in exact arithmetic never lands above the optimum.
pub(crate) fn safe(bound: f64) -> f64 {
    bound - ROUNDING_MARGIN * bound.abs().max(1.0)
}

/// A (possibly partial) assignment as seen by the dual.
pub(crate) struct PartialState<'s> {
    /// BSC index per BTS, or [`UNASSIGNED`].
    pub choice: &'s [usize],
    /// Load per BSC from assigned BTSs, summed in BTS order.
    pub load: &'s [f64],
    /// Link cost of the assigned BTSs.
    pub committed: f64,
}

#[derive(Debug, Clone, Copy)]
struct Item {
    bts: usize,
    ratio: f64,
    reduced: f64,
    traffic: f64,
}

/// Scratch buffers reused across evaluations.
#[derive(Debug, Default)]
pub(crate) struct DualWorkspace {
    items: Vec<Item>,
    cum_traffic: Vec<f64>,
    cum_reduced: Vec<f64>,
    free: Vec<usize>,
    /// Per BTS: total fraction selected across all BSC subproblems.
    pub selected: Vec<f64>,
}

impl DualWorkspace {
    fn knapsack(&self, capacity: f64) -> (f64, usize, f64) {
        // items taken whole, then a fraction of the next one
        let whole = self.cum_traffic.partition_point(|&c| c <= capacity);
        let value = if whole == 0 {
            0.0
        } else {
            self.cum_reduced[whole - 1]
        };
        if whole < self.items.len() {
            let used = if whole == 0 {
                0.0
            } else {
                self.cum_traffic[whole - 1]
            };
            let frac = ((capacity - used) / self.items[whole].traffic).clamp(0.0, 1.0);
            (value + frac * self.items[whole].reduced, whole, frac)
        } else {
            (value, whole, 0.0)
        }
    }
}

/// Evaluates `L(lambda)` at a node; fills `ws.selected` with the relaxed
/// selection of each free BTS. Returns infinity when some BSC's committed
/// load already exceeds every option.
pub(crate) fn evaluate(
    cm: &CostModel<'_>,
    state: &PartialState<'_>,
    lambda: &[f64],
    ws: &mut DualWorkspace,
) -> f64 {
    let n_bts = cm.n_bts();
    ws.selected.clear();
    ws.selected.resize(n_bts, 0.0);
    ws.free.clear();
    ws.free
        .extend((0..n_bts).filter(|&i| state.choice[i] == UNASSIGNED));

    let mut total = state.committed;
    for &i in &ws.free {
        total += lambda[i];
    }

    for j in 0..cm.n_bsc() {
        let load = state.load[j];
        let mut zero_traffic_gain = 0.0;
        ws.items.clear();
        for &i in &ws.free {
            let reduced = cm.link(i, j) - lambda[i];
            if reduced < 0.0 {
                let traffic = cm.traffic(i);
                if traffic > 0.0 {
                    ws.items.push(Item {
                        bts: i,
                        ratio: reduced / traffic,
                        reduced,
                        traffic,
                    });
                } else {
                    zero_traffic_gain += reduced;
                    ws.selected[i] += 1.0;
                }
            }
        }
        ws.items
            .sort_by(|a, b| a.ratio.total_cmp(&b.ratio).then(a.bts.cmp(&b.bts)));
        ws.cum_traffic.clear();
        ws.cum_reduced.clear();
        let (mut ct, mut cr) = (0.0, 0.0);
        for it in &ws.items {
            ct += it.traffic;
            cr += it.reduced;
            ws.cum_traffic.push(ct);
            ws.cum_reduced.push(cr);
        }

        // (value, whole items, fraction of next); zero option only for an unloaded site
        let mut best: Option<(f64, usize, f64)> = (load <= 0.0).then_some((0.0, 0, 0.0));
        let steps = cm.steps(j);
        let first = steps.partition_point(|s| s.capacity_erl < load);
        for s in &steps[first..] {
            let (gain, whole, frac) = ws.knapsack(s.capacity_erl - load);
            let value = s.cost + gain;
            if best.is_none_or(|(b, _, _)| value < b) {
                best = Some((value, whole, frac));
            }
            if whole == ws.items.len() {
                // larger options only cost more
                break;
            }
        }
        let Some((value, whole, frac)) = best else {
            return f64::INFINITY;
        };
        total += value + zero_traffic_gain;
        for it in &ws.items[..whole] {
            ws.selected[it.bts] += 1.0;
        }
        if frac > 0.0 {
            ws.selected[ws.items[whole].bts] += frac;
        }
    }
    total
}

/// Runs projected-free subgradient ascent from `lambda` (updated in place to
/// the best multipliers found). Steps are `mu_k (target - L_k) / |g|^2` with
/// `mu_k = mu0 / k`. Stops early once the bound exceeds `stop_above`.
/// Returns the best bound and the number of evaluations.
#[allow(clippy::too_many_arguments)]
pub(crate) fn ascend(
    cm: &CostModel<'_>,
    state: &PartialState<'_>,
    lambda: &mut [f64],
    iterations: usize,
    mu0: f64,
    target: f64,
    stop_above: f64,
    ws: &mut DualWorkspace,
) -> (f64, usize) {
    let mut current = lambda.to_vec();
    let mut best = f64::NEG_INFINITY;
    let mut evaluations = 0;
    for k in 1..=iterations {
        let value = evaluate(cm, state, &current, ws);
        evaluations += 1;
        if value > best {
            best = value;
            lambda.copy_from_slice(&current);
        }
        if value > stop_above || !value.is_finite() {
            break;
        }
        let mut norm2 = 0.0;
        for &i in &ws.free {
            let g = 1.0 - ws.selected[i];
            norm2 += g * g;
        }
        let gap = target - value;
        if norm2 <= 1e-12 || gap <= 0.0 {
            break;
        }
        let step = (mu0 / k as f64) * gap / norm2;
        for &i in &ws.free {
            current[i] += step * (1.0 - ws.selected[i]);
        }
    }
    (best, evaluations)
}
