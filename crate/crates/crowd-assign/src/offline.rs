//! Offline solvers: the exact optimum via min-cost flow, a brute-force
//! enumeration oracle for small instances, and the sort-by-bid greedy that
//! is optimal for homogeneous bids (and a counterexample magnet otherwise).
//!
//! The flow reduction puts a source in front of the workers, a sink behind
//! the tasks, a unit-capacity zero-cost arc from the source to each worker
//! and from each task to the sink, and a unit-capacity arc of cost `b_ij`
//! for every feasible (worker, task) pair. The minimum cost of routing `F`
//! units equals the minimum budget that buys `F` assignments, and the value
//! function is convex in `F`, so the optimum is found by augmenting one unit
//! at a time and stopping as soon as the next augmentation would overrun the
//! budget.

use crate::instance::{Assignment, Instance, BUDGET_EPS};
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use thiserror::Error;

/// Flow network of the offline reduction. Arc order is deterministic:
/// source->worker arcs by worker id, then each worker's task arcs by task
/// id, then task->sink arcs by task id.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    num_workers: usize,
    num_tasks: usize,
    /// Paired arcs: arc `2k` is forward, `2k ^ 1` its residual twin.
    arc_to: Vec<u32>,
    arc_cost: Vec<f64>,
    arc_residual: Vec<u8>,
    adjacency: Vec<Vec<u32>>,
}

impl FlowNetwork {
    const SOURCE: usize = 0;

    fn sink(&self) -> usize {
        self.num_workers + self.num_tasks + 1
    }

    fn worker_node(worker: usize) -> usize {
        1 + worker
    }

    fn task_node(&self, task: usize) -> usize {
        1 + self.num_workers + task
    }

    pub fn num_nodes(&self) -> usize {
        self.num_workers + self.num_tasks + 2
    }

    /// Number of forward arcs: `n + m + sum |J_i|`.
    pub fn num_arcs(&self) -> usize {
        self.arc_to.len() / 2
    }

    fn add_arc(&mut self, from: usize, to: usize, cost: f64) {
        let idx = self.arc_to.len() as u32;
        self.arc_to.push(to as u32);
        self.arc_cost.push(cost);
        self.arc_residual.push(1);
        self.adjacency[from].push(idx);
        self.arc_to.push(from as u32);
        self.arc_cost.push(-cost);
        self.arc_residual.push(0);
        self.adjacency[to].push(idx + 1);
    }
}

/// Builds the unit-capacity reduction graph for an instance.
pub fn build_flow_network(inst: &Instance) -> FlowNetwork {
    let n = inst.num_workers();
    let m = inst.num_tasks();
    let mut net = FlowNetwork {
        num_workers: n,
        num_tasks: m,
        arc_to: Vec::new(),
        arc_cost: Vec::new(),
        arc_residual: Vec::new(),
        adjacency: vec![Vec::new(); n + m + 2],
    };
    for worker in 0..n {
        net.add_arc(FlowNetwork::SOURCE, FlowNetwork::worker_node(worker), 0.0);
    }
    for worker in inst.workers() {
        for (task, bid) in worker.iter_bids(m) {
            net.add_arc(
                FlowNetwork::worker_node(worker.id),
                net.task_node(task),
                bid,
            );
        }
    }
    for task in 0..m {
        net.add_arc(net.task_node(task), net.sink(), 0.0);
    }
    net
}

/// One augmentation step of the min-cost flow value function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleEntry {
    pub flow_value: usize,
    pub marginal_cost: f64,
    pub cumulative_cost: f64,
}

/// Exact offline solution: largest assignable pair count within budget.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub flow_value: usize,
    pub total_cost: f64,
    pub assignment: Assignment,
}

#[derive(PartialEq)]
struct HeapEntry {
    dist: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.node.cmp(&other.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Successive-shortest-path state over a cloned residual graph.
struct SspSolver {
    net: FlowNetwork,
    potential: Vec<f64>,
    dist: Vec<f64>,
    parent_arc: Vec<u32>,
}

const NO_ARC: u32 = u32::MAX;

impl SspSolver {
    fn new(net: &FlowNetwork) -> Self {
        let nodes = net.num_nodes();
        Self {
            net: net.clone(),
            potential: vec![0.0; nodes],
            dist: vec![f64::INFINITY; nodes],
            parent_arc: vec![NO_ARC; nodes],
        }
    }

    /// Dijkstra with potentials on the residual graph. All original costs
    /// are nonnegative, so zero potentials are valid for the first run.
    /// Returns the actual (unreduced) cost of the shortest augmenting path,
    /// or `None` when the sink is unreachable.
    fn shortest_path(&mut self) -> Option<f64> {
        let sink = self.net.sink();
        self.dist.fill(f64::INFINITY);
        self.parent_arc.fill(NO_ARC);
        self.dist[FlowNetwork::SOURCE] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse(HeapEntry {
            dist: 0.0,
            node: FlowNetwork::SOURCE,
        }));
        while let Some(Reverse(HeapEntry { dist, node })) = heap.pop() {
            if dist > self.dist[node] {
                continue;
            }
            if node == sink {
                break;
            }
            for &arc in &self.net.adjacency[node] {
                if self.net.arc_residual[arc as usize] == 0 {
                    continue;
                }
                let to = self.net.arc_to[arc as usize] as usize;
                let mut reduced =
                    self.net.arc_cost[arc as usize] + self.potential[node] - self.potential[to];
                debug_assert!(reduced > -1e-6, "negative reduced cost {reduced}");
                if reduced < 0.0 {
                    reduced = 0.0;
                }
                let candidate = dist + reduced;
                if candidate < self.dist[to] {
                    self.dist[to] = candidate;
                    self.parent_arc[to] = arc;
                    heap.push(Reverse(HeapEntry {
                        dist: candidate,
                        node: to,
                    }));
                }
            }
        }
        if self.dist[sink].is_infinite() {
            return None;
        }
        let sink_dist = self.dist[sink];
        for node in 0..self.net.num_nodes() {
            self.potential[node] += self.dist[node].min(sink_dist);
        }
        let mut cost = 0.0;
        let mut node = sink;
        while node != FlowNetwork::SOURCE {
            let arc = self.parent_arc[node] as usize;
            cost += self.net.arc_cost[arc];
            node = self.net.arc_to[arc ^ 1] as usize;
        }
        Some(cost)
    }

    fn apply_augmentation(&mut self) {
        let mut node = self.net.sink();
        while node != FlowNetwork::SOURCE {
            let arc = self.parent_arc[node] as usize;
            self.net.arc_residual[arc] -= 1;
            self.net.arc_residual[arc ^ 1] += 1;
            node = self.net.arc_to[arc ^ 1] as usize;
        }
    }

    /// Saturated worker->task arcs as an assignment paying the bid.
    fn extract_assignment(&self) -> Assignment {
        let mut assignment = Assignment::empty();
        let first_pair_arc = 2 * self.net.num_workers;
        let pair_arcs = self.net.num_arcs() - self.net.num_workers - self.net.num_tasks;
        for k in 0..pair_arcs {
            let arc = first_pair_arc + 2 * k;
            if self.net.arc_residual[arc] == 0 {
                let worker = self.net.arc_to[arc ^ 1] as usize - 1;
                let task = self.net.arc_to[arc] as usize - 1 - self.net.num_workers;
                assignment.push(worker, task, self.net.arc_cost[arc]);
            }
        }
        assignment
    }
}

/// Minimum cost of routing `F` units, for `F = 1..F_max`. Marginal costs are
/// non-decreasing (convexity of the min-cost flow value function), which is
/// asserted on every run.
pub fn min_cost_flow_schedule(net: &FlowNetwork) -> Vec<ScheduleEntry> {
    let mut solver = SspSolver::new(net);
    let mut schedule = Vec::new();
    let mut cumulative = 0.0;
    let mut previous_marginal = 0.0;
    while let Some(marginal) = solver.shortest_path() {
        assert!(
            marginal >= previous_marginal - 1e-9,
            "min-cost flow marginals must be non-decreasing: {marginal} after {previous_marginal}"
        );
        solver.apply_augmentation();
        cumulative += marginal;
        schedule.push(ScheduleEntry {
            flow_value: schedule.len() + 1,
            marginal_cost: marginal,
            cumulative_cost: cumulative,
        });
        previous_marginal = marginal;
    }
    schedule
}

/// Exact offline optimum: the largest `F` whose minimum cost fits the
/// budget, with a realizing assignment paying each worker's bid. Relies on
/// marginal costs being non-decreasing to stop at the first overrun.
pub fn offline_optimal(inst: &Instance) -> FlowResult {
    let net = build_flow_network(inst);
    let mut solver = SspSolver::new(&net);
    let mut cumulative = 0.0;
    let mut flow_value = 0;
    while let Some(marginal) = solver.shortest_path() {
        if cumulative + marginal > inst.budget() + BUDGET_EPS {
            break;
        }
        solver.apply_augmentation();
        cumulative += marginal;
        flow_value += 1;
    }
    let assignment = solver.extract_assignment();
    debug_assert_eq!(assignment.len(), flow_value);
    FlowResult {
        flow_value,
        total_cost: cumulative,
        assignment,
    }
}

/// Guard for the enumeration oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OfflineError {
    #[error("brute force limited to 8 workers and 8 tasks, got {workers}x{tasks}")]
    EnumerationGuard { workers: usize, tasks: usize },
}

const BRUTE_FORCE_LIMIT: usize = 8;

struct BruteSearch {
    workers: Vec<Vec<(usize, f64)>>,
    budget: f64,
    chosen: Vec<(usize, usize, f64)>,
    best_count: usize,
    best_cost: f64,
    best_pairs: Vec<(usize, usize, f64)>,
}

impl BruteSearch {
    fn explore(&mut self, index: usize, used_tasks: u16, count: usize, cost: f64) {
        if count + (self.workers.len() - index) < self.best_count {
            return;
        }
        if index == self.workers.len() {
            if count > self.best_count || (count == self.best_count && cost < self.best_cost) {
                self.best_count = count;
                self.best_cost = cost;
                self.best_pairs = self.chosen.clone();
            }
            return;
        }
        for pair_index in 0..self.workers[index].len() {
            let (task, bid) = self.workers[index][pair_index];
            if used_tasks & (1 << task) != 0 || cost + bid > self.budget + BUDGET_EPS {
                continue;
            }
            self.chosen.push((index, task, bid));
            self.explore(index + 1, used_tasks | (1 << task), count + 1, cost + bid);
            self.chosen.pop();
        }
        self.explore(index + 1, used_tasks, count, cost);
    }
}

/// Exhaustive oracle: enumerates every worker->task matching and returns one
/// maximizing the pair count within budget, breaking ties by lower cost.
pub fn brute_force_optimal(inst: &Instance) -> Result<FlowResult, OfflineError> {
    if inst.num_workers() > BRUTE_FORCE_LIMIT || inst.num_tasks() > BRUTE_FORCE_LIMIT {
        return Err(OfflineError::EnumerationGuard {
            workers: inst.num_workers(),
            tasks: inst.num_tasks(),
        });
    }
    let mut search = BruteSearch {
        workers: inst
            .workers()
            .iter()
            .map(|w| w.iter_bids(inst.num_tasks()).collect())
            .collect(),
        budget: inst.budget(),
        chosen: Vec::new(),
        best_count: 0,
        best_cost: 0.0,
        best_pairs: Vec::new(),
    };
    search.explore(0, 0, 0, 0.0);
    let mut assignment = Assignment::empty();
    for (worker, task, bid) in &search.best_pairs {
        assignment.push(*worker, *task, *bid);
    }
    Ok(FlowResult {
        flow_value: search.best_count,
        total_cost: search.best_cost,
        assignment,
    })
}

/// Sort-by-bid greedy: workers in ascending order of their minimum bid
/// (ties by arrival), each taking its cheapest remaining feasible task if
/// the budget still covers it. Optimal when every worker bids one value on
/// all tasks; suboptimal in general.
pub fn greedy_homogeneous(inst: &Instance) -> Assignment {
    let m = inst.num_tasks();
    let mut order: Vec<(f64, usize)> = inst
        .workers()
        .iter()
        .filter_map(|w| w.min_bid(m).map(|bid| (bid, w.id)))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut available = inst.all_tasks();
    let mut spent = 0.0;
    let mut assignment = Assignment::empty();
    for (_, worker_id) in order {
        if available.is_empty() {
            break;
        }
        let worker = &inst.workers()[worker_id];
        if let Some((task, bid)) = worker.cheapest_available(&available, m, f64::INFINITY) {
            if spent + bid <= inst.budget() + BUDGET_EPS {
                available.remove(&task);
                spent += bid;
                assignment.push(worker_id, task, bid);
            }
        }
    }
    assignment.pairs.sort_by_key(|p| p.worker);
    assignment
}
