//! Core domain model: instances, workers, bids, assignments, and the
//! assignment validator every algorithm's output must pass.
//!
//! An instance is an ordered arrival sequence of workers over `m` tasks with
//! a total budget `B` and a bid ceiling `R`. Every bid lies in `[1, R]` and
//! `R <= B`. A worker's feasible set is exactly the key set of its bid map;
//! an absent task is infeasible, never a sentinel bid.

use serde::de::{MapAccess, Visitor};
use serde::ser::{SerializeMap, SerializeSeq, SerializeStruct};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// Additive tolerance for budget-feasibility checks. Generators emit exactly
/// representable money values; this only absorbs accumulation error in long
/// payment sums. All other comparisons (bid vs. threshold) are exact.
pub const BUDGET_EPS: f64 = 1e-9;

/// Bids of a single worker, keyed by task id.
///
/// `Uniform` is the compact form for a worker that bids one value on every
/// task of the instance; the hard-instance families are built entirely from
/// such workers and would not fit in memory as explicit maps at large `R`.
/// The two forms are semantically interchangeable and compare equal when
/// they denote the same task->bid mapping.
#[derive(Debug, Clone)]
pub enum WorkerBids {
    /// The same bid on all `num_tasks` tasks of the instance.
    Uniform(f64),
    /// Explicit per-task bids; absent keys are infeasible tasks.
    Sparse(BTreeMap<usize, f64>),
}

/// A worker in arrival order, identified by its position in the sequence.
#[derive(Debug, Clone)]
pub struct Worker {
    pub id: usize,
    pub bids: WorkerBids,
}

impl Worker {
    /// Worker bidding `bid` on every task.
    pub fn uniform(id: usize, bid: f64) -> Self {
        Self {
            id,
            bids: WorkerBids::Uniform(bid),
        }
    }

    /// Worker with explicit per-task bids.
    pub fn sparse(id: usize, bids: BTreeMap<usize, f64>) -> Self {
        Self {
            id,
            bids: WorkerBids::Sparse(bids),
        }
    }

    /// Builds a sparse worker from raw pairs, rejecting duplicate task keys.
    pub fn from_pairs(id: usize, pairs: Vec<(usize, f64)>) -> Result<Self, InstanceError> {
        let mut map = BTreeMap::new();
        for (task, bid) in pairs {
            if map.insert(task, bid).is_some() {
                return Err(InstanceError::DuplicateTaskKey { worker: id, task });
            }
        }
        Ok(Self::sparse(id, map))
    }

    /// Bid for `task`, or `None` if the task is infeasible for this worker.
    /// `num_tasks` bounds the uniform form.
    pub fn bid_for(&self, task: usize, num_tasks: usize) -> Option<f64> {
        match &self.bids {
            WorkerBids::Uniform(v) => (task < num_tasks).then_some(*v),
            WorkerBids::Sparse(map) => map.get(&task).copied(),
        }
    }

    /// Number of feasible tasks `|J_i|`.
    pub fn feasible_len(&self, num_tasks: usize) -> usize {
        match &self.bids {
            WorkerBids::Uniform(_) => num_tasks,
            WorkerBids::Sparse(map) => map.len(),
        }
    }

    /// Iterates `(task, bid)` in ascending task order.
    pub fn iter_bids(&self, num_tasks: usize) -> Box<dyn Iterator<Item = (usize, f64)> + '_> {
        match &self.bids {
            WorkerBids::Uniform(v) => {
                let v = *v;
                Box::new((0..num_tasks).map(move |t| (t, v)))
            }
            WorkerBids::Sparse(map) => Box::new(map.iter().map(|(&t, &b)| (t, b))),
        }
    }

    /// Minimum bid over the feasible set, if any.
    pub fn min_bid(&self, num_tasks: usize) -> Option<f64> {
        match &self.bids {
            WorkerBids::Uniform(v) => (num_tasks > 0).then_some(*v),
            WorkerBids::Sparse(map) => map.values().copied().reduce(f64::min),
        }
    }

    /// The single bid value if this worker bids identically on *every* task
    /// of the instance, in either representation.
    pub fn uniform_value(&self, num_tasks: usize) -> Option<f64> {
        match &self.bids {
            WorkerBids::Uniform(v) => Some(*v),
            WorkerBids::Sparse(map) => {
                if map.len() != num_tasks {
                    return None;
                }
                let mut values = map.values();
                let first = *values.next()?;
                values.all(|&v| v == first).then_some(first)
            }
        }
    }

    /// Cheapest still-available feasible task with bid at most `limit`,
    /// breaking bid ties by lowest task id.
    pub fn cheapest_available(
        &self,
        available: &BTreeSet<usize>,
        num_tasks: usize,
        limit: f64,
    ) -> Option<(usize, f64)> {
        match &self.bids {
            WorkerBids::Uniform(v) => {
                if *v <= limit {
                    available.first().map(|&t| (t, *v))
                } else {
                    None
                }
            }
            WorkerBids::Sparse(map) => {
                let _ = num_tasks;
                let mut best: Option<(usize, f64)> = None;
                for (&task, &bid) in map {
                    if bid > limit || !available.contains(&task) {
                        continue;
                    }
                    match best {
                        Some((_, b)) if b <= bid => {}
                        _ => best = Some((task, bid)),
                    }
                }
                best
            }
        }
    }

    fn bids_eq(&self, other: &Self, num_tasks: usize) -> bool {
        match (&self.bids, &other.bids) {
            (WorkerBids::Uniform(a), WorkerBids::Uniform(b)) => a == b,
            (WorkerBids::Sparse(a), WorkerBids::Sparse(b)) => a == b,
            _ => {
                self.feasible_len(num_tasks) == other.feasible_len(num_tasks)
                    && self
                        .iter_bids(num_tasks)
                        .zip(other.iter_bids(num_tasks))
                        .all(|(a, b)| a == b)
            }
        }
    }
}

/// A problem instance: arrival-ordered workers, task count, budget, ceiling.
#[derive(Debug, Clone)]
pub struct Instance {
    workers: Vec<Worker>,
    num_tasks: usize,
    budget: f64,
    bid_ceiling: f64,
}

impl Instance {
    /// Validates all type invariants and constructs the instance.
    pub fn new(
        workers: Vec<Worker>,
        num_tasks: usize,
        budget: f64,
        bid_ceiling: f64,
    ) -> Result<Self, InstanceError> {
        if num_tasks == 0 {
            return Err(InstanceError::NoTasks);
        }
        if !(budget.is_finite() && budget > 0.0) {
            return Err(InstanceError::NonPositiveBudget { budget });
        }
        if !(bid_ceiling.is_finite() && bid_ceiling > 0.0) {
            return Err(InstanceError::NonPositiveCeiling {
                ceiling: bid_ceiling,
            });
        }
        if bid_ceiling > budget {
            return Err(InstanceError::CeilingExceedsBudget {
                ceiling: bid_ceiling,
                budget,
            });
        }
        for (pos, worker) in workers.iter().enumerate() {
            if worker.id != pos {
                return Err(InstanceError::WorkerIdMismatch {
                    expected: pos,
                    found: worker.id,
                });
            }
            if let WorkerBids::Sparse(map) = &worker.bids {
                if let Some((&task, _)) = map.iter().find(|(&t, _)| t >= num_tasks) {
                    return Err(InstanceError::TaskOutOfRange {
                        worker: pos,
                        task,
                        num_tasks,
                    });
                }
            }
            for (task, bid) in worker.iter_bids(num_tasks) {
                if !bid.is_finite() || bid < 1.0 {
                    return Err(InstanceError::BidBelowFloor {
                        worker: pos,
                        task,
                        bid,
                    });
                }
                if bid > bid_ceiling {
                    return Err(InstanceError::BidAboveCeiling {
                        worker: pos,
                        task,
                        bid,
                        ceiling: bid_ceiling,
                    });
                }
                // A uniform worker has one bid; no need to scan all m copies.
                if matches!(worker.bids, WorkerBids::Uniform(_)) {
                    break;
                }
            }
        }
        Ok(Self {
            workers,
            num_tasks,
            budget,
            bid_ceiling,
        })
    }

    pub fn workers(&self) -> &[Worker] {
        &self.workers
    }

    pub fn num_workers(&self) -> usize {
        self.workers.len()
    }

    pub fn num_tasks(&self) -> usize {
        self.num_tasks
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn bid_ceiling(&self) -> f64 {
        self.bid_ceiling
    }

    /// The large-market parameter `R / B`.
    pub fn epsilon(&self) -> f64 {
        self.bid_ceiling / self.budget
    }

    /// All task ids as a set, for seeding the algorithms' available-task state.
    pub fn all_tasks(&self) -> BTreeSet<usize> {
        (0..self.num_tasks).collect()
    }

    /// True when every worker bids one value on every task. On such
    /// instances the sorted greedy is the exact offline optimum.
    pub fn is_homogeneous_complete(&self) -> bool {
        self.workers
            .iter()
            .all(|w| w.uniform_value(self.num_tasks).is_some())
    }

    /// Re-indexes the workers into a new arrival order. `order[k]` is the
    /// original position of the worker arriving k-th.
    pub fn permuted(&self, order: &[usize]) -> Result<Self, InstanceError> {
        if order.len() != self.workers.len() {
            return Err(InstanceError::BadPermutation {
                expected: self.workers.len(),
                found: order.len(),
            });
        }
        let mut seen = vec![false; self.workers.len()];
        let mut workers = Vec::with_capacity(self.workers.len());
        for (new_id, &orig) in order.iter().enumerate() {
            if orig >= self.workers.len() || seen[orig] {
                return Err(InstanceError::BadPermutation {
                    expected: self.workers.len(),
                    found: order.len(),
                });
            }
            seen[orig] = true;
            workers.push(Worker {
                id: new_id,
                bids: self.workers[orig].bids.clone(),
            });
        }
        Self::new(workers, self.num_tasks, self.budget, self.bid_ceiling)
    }
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.num_tasks == other.num_tasks
            && self.budget == other.budget
            && self.bid_ceiling == other.bid_ceiling
            && self.workers.len() == other.workers.len()
            && self
                .workers
                .iter()
                .zip(&other.workers)
                .all(|(a, b)| a.id == b.id && a.bids_eq(b, self.num_tasks))
    }
}

/// One (worker, task, payment) triple of a matching.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssignedPair {
    pub worker: usize,
    pub task: usize,
    pub payment: f64,
}

/// A budget-feasible matching with payments, in the order pairs were made.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Assignment {
    pub pairs: Vec<AssignedPair>,
}

impl Assignment {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn push(&mut self, worker: usize, task: usize, payment: f64) {
        self.pairs.push(AssignedPair {
            worker,
            task,
            payment,
        });
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn total_payment(&self) -> f64 {
        self.pairs.iter().map(|p| p.payment).sum()
    }
}

/// A single violated assignment invariant. Violations are data, not errors.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    WorkerOutOfRange {
        worker: usize,
    },
    TaskOutOfRange {
        task: usize,
    },
    DuplicateWorker {
        worker: usize,
    },
    DuplicateTask {
        task: usize,
    },
    InfeasiblePair {
        worker: usize,
        task: usize,
    },
    NonPositivePayment {
        worker: usize,
        task: usize,
        payment: f64,
    },
    PaymentBelowBid {
        worker: usize,
        task: usize,
        payment: f64,
        bid: f64,
    },
    BudgetExceeded {
        total: f64,
        budget: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::WorkerOutOfRange { worker } => {
                write!(f, "worker {worker} does not exist in the instance")
            }
            Violation::TaskOutOfRange { task } => {
                write!(f, "task {task} does not exist in the instance")
            }
            Violation::DuplicateWorker { worker } => {
                write!(f, "worker {worker} is assigned more than once")
            }
            Violation::DuplicateTask { task } => {
                write!(f, "task {task} is assigned more than once")
            }
            Violation::InfeasiblePair { worker, task } => {
                write!(f, "task {task} is not feasible for worker {worker}")
            }
            Violation::NonPositivePayment {
                worker,
                task,
                payment,
            } => write!(
                f,
                "payment {payment} for (worker {worker}, task {task}) is not positive"
            ),
            Violation::PaymentBelowBid {
                worker,
                task,
                payment,
                bid,
            } => write!(
                f,
                "payment {payment} below bid {bid} for (worker {worker}, task {task})"
            ),
            Violation::BudgetExceeded { total, budget } => {
                write!(f, "total payment {total} exceeds budget {budget}")
            }
        }
    }
}

/// Outcome of checking an assignment against an instance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every assignment invariant against the instance: each worker and
/// task at most once, pairs feasible, payments at least the bid, total
/// payment within `B + BUDGET_EPS`.
pub fn validate_assignment(inst: &Instance, assignment: &Assignment) -> ValidationReport {
    let mut violations = Vec::new();
    let mut seen_workers = BTreeSet::new();
    let mut seen_tasks = BTreeSet::new();
    for pair in &assignment.pairs {
        if pair.worker >= inst.num_workers() {
            violations.push(Violation::WorkerOutOfRange {
                worker: pair.worker,
            });
            continue;
        }
        if pair.task >= inst.num_tasks() {
            violations.push(Violation::TaskOutOfRange { task: pair.task });
            continue;
        }
        if !seen_workers.insert(pair.worker) {
            violations.push(Violation::DuplicateWorker {
                worker: pair.worker,
            });
        }
        if !seen_tasks.insert(pair.task) {
            violations.push(Violation::DuplicateTask { task: pair.task });
        }
        match inst.workers()[pair.worker].bid_for(pair.task, inst.num_tasks()) {
            None => violations.push(Violation::InfeasiblePair {
                worker: pair.worker,
                task: pair.task,
            }),
            Some(bid) => {
                if pair.payment.is_nan() || pair.payment <= 0.0 {
                    violations.push(Violation::NonPositivePayment {
                        worker: pair.worker,
                        task: pair.task,
                        payment: pair.payment,
                    });
                } else if pair.payment < bid {
                    violations.push(Violation::PaymentBelowBid {
                        worker: pair.worker,
                        task: pair.task,
                        payment: pair.payment,
                        bid,
                    });
                }
            }
        }
    }
    let total = assignment.total_payment();
    if total > inst.budget() + BUDGET_EPS {
        violations.push(Violation::BudgetExceeded {
            total,
            budget: inst.budget(),
        });
    }
    ValidationReport { violations }
}

/// Instance construction and validation failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("num_tasks must be positive")]
    NoTasks,
    #[error("budget {budget} is not a positive finite number")]
    NonPositiveBudget { budget: f64 },
    #[error("bid ceiling {ceiling} is not a positive finite number")]
    NonPositiveCeiling { ceiling: f64 },
    #[error("bid ceiling {ceiling} exceeds budget {budget}")]
    CeilingExceedsBudget { ceiling: f64, budget: f64 },
    #[error("worker at position {expected} has id {found}")]
    WorkerIdMismatch { expected: usize, found: usize },
    #[error("worker {worker} bids on task {task} but the instance has {num_tasks} tasks")]
    TaskOutOfRange {
        worker: usize,
        task: usize,
        num_tasks: usize,
    },
    #[error("worker {worker} bids {bid} for task {task}: bid below 1")]
    BidBelowFloor {
        worker: usize,
        task: usize,
        bid: f64,
    },
    #[error("worker {worker} bids {bid} for task {task}: above ceiling {ceiling}")]
    BidAboveCeiling {
        worker: usize,
        task: usize,
        bid: f64,
        ceiling: f64,
    },
    #[error("worker {worker} has a duplicate bid for task {task}")]
    DuplicateTaskKey { worker: usize, task: usize },
    #[error("permutation has length {found}, instance has {expected} workers")]
    BadPermutation { expected: usize, found: usize },
}

/// Failures of `parse_instance`.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed instance document: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] InstanceError),
}

// --- JSON wire format -----------------------------------------------------
//
// {"budget": <number>, "num_tasks": <int>, "bid_ceiling": <number>,
//  "workers": [{"id": <int>, "bids": {"<task-id>": <number>, ...}}, ...]}
//
// Workers appear in arrival order; bids are keyed by decimal task id and
// emitted in ascending numeric order; numbers use the shortest decimal
// representation that round-trips.

struct BidsSer<'a> {
    worker: &'a Worker,
    num_tasks: usize,
}

impl Serialize for BidsSer<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.worker.feasible_len(self.num_tasks)))?;
        for (task, bid) in self.worker.iter_bids(self.num_tasks) {
            map.serialize_entry(&task.to_string(), &bid)?;
        }
        map.end()
    }
}

struct WorkerSer<'a> {
    worker: &'a Worker,
    num_tasks: usize,
}

impl Serialize for WorkerSer<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Worker", 2)?;
        st.serialize_field("id", &self.worker.id)?;
        st.serialize_field(
            "bids",
            &BidsSer {
                worker: self.worker,
                num_tasks: self.num_tasks,
            },
        )?;
        st.end()
    }
}

struct WorkersSer<'a>(&'a Instance);

impl Serialize for WorkersSer<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.0.num_workers()))?;
        for worker in self.0.workers() {
            seq.serialize_element(&WorkerSer {
                worker,
                num_tasks: self.0.num_tasks(),
            })?;
        }
        seq.end()
    }
}

impl Serialize for Instance {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Instance", 4)?;
        st.serialize_field("budget", &self.budget)?;
        st.serialize_field("num_tasks", &self.num_tasks)?;
        st.serialize_field("bid_ceiling", &self.bid_ceiling)?;
        st.serialize_field("workers", &WorkersSer(self))?;
        st.end()
    }
}

/// Raw bid list preserving duplicates so validation can name the offender.
struct RawBids(Vec<(usize, f64)>);

impl<'de> Deserialize<'de> for RawBids {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct BidsVisitor;

        impl<'de> Visitor<'de> for BidsVisitor {
            type Value = RawBids;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map from decimal task id to bid")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut pairs = Vec::with_capacity(access.size_hint().unwrap_or(0));
                while let Some((key, bid)) = access.next_entry::<String, f64>()? {
                    let task: usize = key.parse().map_err(|_| {
                        serde::de::Error::custom(format!("invalid task id key {key:?}"))
                    })?;
                    pairs.push((task, bid));
                }
                Ok(RawBids(pairs))
            }
        }

        deserializer.deserialize_map(BidsVisitor)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWorker {
    id: usize,
    bids: RawBids,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    budget: f64,
    num_tasks: usize,
    bid_ceiling: f64,
    workers: Vec<RawWorker>,
}

/// Parses the instance JSON format, reporting malformed documents and
/// invariant violations with the offending worker/task id.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let raw: RawInstance = serde_json::from_str(text)?;
    let mut workers = Vec::with_capacity(raw.workers.len());
    for raw_worker in raw.workers {
        workers.push(Worker::from_pairs(raw_worker.id, raw_worker.bids.0)?);
    }
    Ok(Instance::new(
        workers,
        raw.num_tasks,
        raw.budget,
        raw.bid_ceiling,
    )?)
}

/// Renders the canonical JSON document; `parse_instance` reproduces the
/// instance exactly, bit-for-bit on every numeric field.
pub fn serialize_instance(inst: &Instance) -> String {
    serde_json::to_string(inst).expect("instance serialization cannot fail")
}
