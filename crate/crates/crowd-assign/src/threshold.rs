//! Fixed threshold policy and the threshold-search offline approximation.
//!
//! FTP walks the worker sequence once with a posted price `p`: a worker is
//! assigned some remaining feasible task bid at or below `min(p, remaining
//! budget)`, until the budget runs out or the stream ends. Because the walk
//! is sequential, the same routine serves both as an offline subroutine and
//! as an online policy.
//!
//! OA runs FTP once per distinct bid value in the input (searching beyond
//! the bid values cannot help) and keeps the threshold maximizing the
//! number of assignments `Q`. Its output price is `p* = B / Q`, which the
//! random-permutation algorithm's guarantee relies on; `Q` is within a
//! factor 4 of the offline optimum.

use crate::instance::{Assignment, Worker};
use std::collections::BTreeSet;

/// Output of the threshold search: the best assignment found, its size `Q`,
/// and the price `p* = B / Q` (0 when nothing was assigned).
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    pub assignment: Assignment,
    pub q: usize,
    pub p_star: f64,
}

/// Sequential state of one FTP run. Feeding workers one at a time through
/// [`FtpState::step`] is exactly the batch [`ftp`] computation, which is
/// what allows the policy to run online.
#[derive(Debug, Clone)]
pub struct FtpState {
    price: f64,
    remaining_budget: f64,
    available: BTreeSet<usize>,
    num_tasks: usize,
}

impl FtpState {
    pub fn new(price: f64, budget: f64, tasks: &BTreeSet<usize>, num_tasks: usize) -> Self {
        Self {
            price,
            remaining_budget: budget,
            available: tasks.clone(),
            num_tasks,
        }
    }

    pub fn remaining_budget(&self) -> f64 {
        self.remaining_budget
    }

    pub fn is_halted(&self) -> bool {
        self.remaining_budget <= 0.0
    }

    /// Processes one arriving worker. Picks the cheapest remaining feasible
    /// task bid at or below `min(price, remaining budget)`, ties by lowest
    /// task id; returns the chosen `(task, bid)` or `None`.
    pub fn step(&mut self, worker: &Worker) -> Option<(usize, f64)> {
        if self.is_halted() {
            return None;
        }
        let limit = self.price.min(self.remaining_budget);
        let (task, bid) = worker.cheapest_available(&self.available, self.num_tasks, limit)?;
        self.available.remove(&task);
        self.remaining_budget -= bid;
        Some((task, bid))
    }
}

/// Fixed threshold policy over a worker sequence, paying each assigned
/// worker its bid.
pub fn ftp(
    price: f64,
    budget: f64,
    workers: &[Worker],
    tasks: &BTreeSet<usize>,
    num_tasks: usize,
) -> Assignment {
    let mut state = FtpState::new(price, budget, tasks, num_tasks);
    let mut assignment = Assignment::empty();
    for worker in workers {
        if state.is_halted() {
            break;
        }
        if let Some((task, bid)) = state.step(worker) {
            assignment.push(worker.id, task, bid);
        }
    }
    assignment
}

/// Distinct bid values appearing in the input, restricted to the given task
/// set, in ascending order.
fn candidate_thresholds(workers: &[Worker], tasks: &BTreeSet<usize>, num_tasks: usize) -> Vec<f64> {
    let mut values = Vec::new();
    for worker in workers {
        match worker.uniform_value(num_tasks) {
            Some(v) if !tasks.is_empty() => values.push(v),
            _ => {
                for (task, bid) in worker.iter_bids(num_tasks) {
                    if tasks.contains(&task) {
                        values.push(bid);
                    }
                }
            }
        }
    }
    values.sort_by(f64::total_cmp);
    values.dedup();
    values
}

/// Offline approximation: best FTP over all bid-valued thresholds. Among
/// equally good thresholds the smallest wins, making the search
/// deterministic.
pub fn oa(
    workers: &[Worker],
    tasks: &BTreeSet<usize>,
    budget: f64,
    num_tasks: usize,
) -> ThresholdResult {
    let mut best = ThresholdResult {
        assignment: Assignment::empty(),
        q: 0,
        p_star: 0.0,
    };
    for price in candidate_thresholds(workers, tasks, num_tasks) {
        let assignment = ftp(price, budget, workers, tasks, num_tasks);
        if assignment.len() > best.q {
            best.q = assignment.len();
            best.assignment = assignment;
        }
    }
    if best.q > 0 {
        best.p_star = budget / best.q as f64;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{validate_assignment, Instance};
    use crate::offline::brute_force_optimal;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn toy_workers() -> Vec<Worker> {
        vec![
            Worker::sparse(0, BTreeMap::from([(0, 1.0), (1, 1.25)])),
            Worker::sparse(1, BTreeMap::from([(0, 1.125), (1, 1.75)])),
        ]
    }

    fn all_tasks(m: usize) -> BTreeSet<usize> {
        (0..m).collect()
    }

    #[test]
    fn ftp_assigns_until_budget_is_gone() {
        let workers = vec![Worker::uniform(0, 1.0), Worker::uniform(1, 1.0)];
        let result = ftp(1.0, 2.0, &workers, &all_tasks(2), 2);
        assert_eq!(result.len(), 2);
        assert_eq!(result.total_payment(), 2.0);
    }

    #[test]
    fn ftp_on_toy_at_median_threshold_assigns_one() {
        let result = ftp(1.25, 2.5, &toy_workers(), &all_tasks(2), 2);
        assert_eq!(result.len(), 1);
        assert_eq!(result.pairs[0].worker, 0);
        assert_eq!(result.pairs[0].task, 0);
        assert_eq!(result.pairs[0].payment, 1.0);
    }

    #[test]
    fn ftp_below_bid_floor_assigns_nothing() {
        let result = ftp(0.5, 2.5, &toy_workers(), &all_tasks(2), 2);
        assert!(result.is_empty());
    }

    #[test]
    fn ftp_halts_once_budget_hits_zero() {
        let workers: Vec<Worker> = (0..4).map(|i| Worker::uniform(i, 1.0)).collect();
        let result = ftp(1.0, 2.0, &workers, &all_tasks(4), 4);
        assert_eq!(result.len(), 2);
        assert_eq!(
            result.pairs.iter().map(|p| p.worker).collect::<Vec<_>>(),
            vec![0, 1]
        );
    }

    #[test]
    fn ftp_batch_equals_streamed_steps() {
        let workers = toy_workers();
        let batch = ftp(1.25, 2.5, &workers, &all_tasks(2), 2);
        let mut state = FtpState::new(1.25, 2.5, &all_tasks(2), 2);
        let mut streamed = Assignment::empty();
        for worker in &workers {
            if let Some((task, bid)) = state.step(worker) {
                streamed.push(worker.id, task, bid);
            }
        }
        assert_eq!(batch, streamed);
    }

    #[test]
    fn oa_on_toy_settles_for_one_assignment() {
        let result = oa(&toy_workers(), &all_tasks(2), 2.5, 2);
        assert_eq!(result.q, 1);
        assert_eq!(result.p_star, 2.5);
        // The offline optimum is 2, within the factor-4 guarantee.
        let inst = Instance::new(toy_workers(), 2, 2.5, 2.5).unwrap();
        let opt = brute_force_optimal(&inst).unwrap().flow_value;
        assert_eq!(opt, 2);
        assert!(opt <= 4 * result.q);
    }

    #[test]
    fn oa_on_homogeneous_unit_bids_assigns_everyone() {
        let k = 4;
        let workers: Vec<Worker> = (0..k).map(|i| Worker::uniform(i, 1.0)).collect();
        let result = oa(&workers, &all_tasks(6), k as f64, 6);
        assert_eq!(result.q, k);
        assert_eq!(result.p_star, 1.0);
    }

    #[test]
    fn oa_with_no_workers_is_empty() {
        let result = oa(&[], &all_tasks(3), 5.0, 3);
        assert_eq!(result.q, 0);
        assert_eq!(result.p_star, 0.0);
        assert!(result.assignment.is_empty());
    }

    fn arbitrary_workers() -> impl Strategy<Value = (Vec<Worker>, usize)> {
        (1usize..=5).prop_flat_map(|m| {
            proptest::collection::vec(
                proptest::collection::vec(proptest::option::of(1u8..=5), m),
                0..=6,
            )
            .prop_map(move |rows| {
                let workers = rows
                    .into_iter()
                    .enumerate()
                    .map(|(id, row)| {
                        let bids = row
                            .into_iter()
                            .enumerate()
                            .filter_map(|(t, b)| b.map(|b| (t, b as f64)))
                            .collect::<BTreeMap<_, _>>();
                        Worker::sparse(id, bids)
                    })
                    .collect();
                (workers, m)
            })
        })
    }

    proptest! {
        /// FTP never pays above the threshold, never reuses a task, never
        /// assigns a worker twice, and never overspends.
        #[test]
        fn ftp_respects_its_contract(
            (workers, m) in arbitrary_workers(),
            price in 0.0f64..6.0,
            budget in 0.0f64..12.0,
        ) {
            let result = ftp(price, budget, &workers, &all_tasks(m), m);
            let mut tasks_seen = BTreeSet::new();
            let mut workers_seen = BTreeSet::new();
            for pair in &result.pairs {
                prop_assert!(pair.payment <= price);
                prop_assert!(tasks_seen.insert(pair.task));
                prop_assert!(workers_seen.insert(pair.worker));
                prop_assert_eq!(
                    workers[pair.worker].bid_for(pair.task, m),
                    Some(pair.payment)
                );
            }
            prop_assert!(result.total_payment() <= budget + 1e-9);
        }

        /// The threshold search is a 4-approximation of the offline optimum.
        #[test]
        fn oa_is_a_4_approximation(
            (workers, m) in arbitrary_workers(),
            budget in 1.0f64..12.0,
        ) {
            let workers: Vec<Worker> = workers
                .into_iter()
                .map(|w| {
                    let bids = w
                        .iter_bids(m)
                        .filter(|&(_, b)| b <= budget)
                        .collect::<BTreeMap<_, _>>();
                    Worker::sparse(w.id, bids)
                })
                .collect();
            let ceiling = workers
                .iter()
                .flat_map(|w| w.iter_bids(m).map(|(_, b)| b))
                .fold(1.0f64, f64::max);
            let inst = Instance::new(workers, m, budget, ceiling).unwrap();
            let result = oa(inst.workers(), &inst.all_tasks(), inst.budget(), m);
            let opt = brute_force_optimal(&inst).unwrap().flow_value;
            prop_assert!(opt <= 4 * result.q,
                "OPT {} > 4 * {}", opt, result.q);
            prop_assert!(validate_assignment(&inst, &result.assignment).is_ok());
        }
    }
}
