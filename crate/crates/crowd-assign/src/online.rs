//! Online algorithms: the adversarial-order policy with a moving
//! potential-function price, and the sample-then-commit policy for randomly
//! permuted arrivals.
//!
//! The adversarial-order algorithm (OHA) prices admission by
//! `phi(x) = min((R*e)^(1-x), R)` where `x` is the fraction of budget spent:
//! a worker is assigned a remaining feasible task only if its bid is at most
//! `min(f, phi(x))` with `f` the remaining budget, so the policy gets
//! pickier as the budget drains. For bids in `[1, R]` with `R <= eps * B`
//! its competitive ratio is at most `(R*e)^eps * (ln R + 3)`.
//!
//! The random-permutation algorithm (RPA) observes the first half of the
//! sequence without assigning, estimates a threshold by running the offline
//! approximation on that half with half the budget, then runs the fixed
//! threshold policy at `(1 + alpha) * p_hat` on the second half.

use crate::instance::{Assignment, Instance, Worker};
use crate::threshold::{ftp, oa};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OnlineError {
    #[error("potential function domain requires 0 <= x <= 1, got {x}")]
    PhiDomain { x: f64 },
    #[error("potential function requires ceiling >= 1, got {ceiling}")]
    PhiCeiling { ceiling: f64 },
    #[error("worker {worker} bids {bid} for task {task}, outside [1, {ceiling}]")]
    BidOutOfRange {
        worker: usize,
        task: usize,
        bid: f64,
        ceiling: f64,
    },
    #[error("bid ceiling {ceiling} exceeds budget {budget}")]
    CeilingExceedsBudget { ceiling: f64, budget: f64 },
    #[error("alpha must lie strictly between 0 and 1, got {alpha}")]
    InvalidAlpha { alpha: f64 },
    #[error("random-permutation policy needs at least 2 workers, got {workers}")]
    TooFewWorkers { workers: usize },
}

/// Price threshold as a function of the consumed budget fraction:
/// `min((R*e)^(1-x), R)`. Non-increasing, `phi(0) = R`, `phi(1) = 1`, and
/// constant at `R` on `[0, 1/(1 + ln R)]`.
pub fn potential_phi(x: f64, ceiling: f64) -> Result<f64, OnlineError> {
    if !(0.0..=1.0).contains(&x) || x.is_nan() {
        return Err(OnlineError::PhiDomain { x });
    }
    if ceiling.is_nan() || ceiling < 1.0 {
        return Err(OnlineError::PhiCeiling { ceiling });
    }
    Ok(phi_unchecked(x, ceiling))
}

/// `(R*e)^(1-x) >= R` exactly when `x <= 1/(1 + ln R)`, so the plateau is
/// taken by branch rather than recomputed through `exp`, keeping it exact.
/// The exp form is monotone in `x`, which the min preserves.
fn phi_unchecked(x: f64, ceiling: f64) -> f64 {
    let plateau_end = 1.0 / (1.0 + ceiling.ln());
    if x <= plateau_end {
        ceiling
    } else {
        ceiling.min(((1.0 - x) * (ceiling * std::f64::consts::E).ln()).exp())
    }
}

/// How an assigned worker is paid and how the budget is charged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaymentMode {
    /// Pay the worker's bid; the budget is charged the bid. Default.
    Bid,
    /// Posted-price variant: offer `phi_i = min(f, phi(x))` at arrival, pay
    /// it, and charge the budget the full offer. Makes truthful bidding a
    /// dominant strategy at the cost of spending faster.
    Threshold,
}

/// Mutable state of one online run: consumed budget fraction, remaining
/// budget, and the unassigned task set. `x` is recomputed from `f` after
/// every assignment so the two never drift apart.
#[derive(Debug, Clone)]
pub struct OnlineState {
    initial_budget: f64,
    pub consumed_fraction: f64,
    pub remaining_budget: f64,
    pub remaining_tasks: BTreeSet<usize>,
}

impl OnlineState {
    pub fn new(budget: f64, tasks: BTreeSet<usize>) -> Self {
        Self {
            initial_budget: budget,
            consumed_fraction: 0.0,
            remaining_budget: budget,
            remaining_tasks: tasks,
        }
    }

    pub fn is_halted(&self) -> bool {
        self.remaining_budget <= 0.0
    }

    fn charge(&mut self, amount: f64) {
        self.remaining_budget -= amount;
        self.consumed_fraction =
            ((self.initial_budget - self.remaining_budget) / self.initial_budget).clamp(0.0, 1.0);
    }
}

fn check_worker_bids(worker: &Worker, num_tasks: usize, ceiling: f64) -> Result<(), OnlineError> {
    let check = |task: usize, bid: f64| {
        if !(1.0..=ceiling).contains(&bid) {
            Err(OnlineError::BidOutOfRange {
                worker: worker.id,
                task,
                bid,
                ceiling,
            })
        } else {
            Ok(())
        }
    };
    match worker.uniform_value(num_tasks) {
        Some(v) => check(0, v),
        None => worker
            .iter_bids(num_tasks)
            .try_for_each(|(task, bid)| check(task, bid)),
    }
}

/// Runs the potential-function online algorithm over a raw worker stream.
pub fn run_oha(
    workers: &[Worker],
    num_tasks: usize,
    budget: f64,
    ceiling: f64,
    mode: PaymentMode,
) -> Result<Assignment, OnlineError> {
    if ceiling > budget {
        return Err(OnlineError::CeilingExceedsBudget { ceiling, budget });
    }
    if ceiling < 1.0 {
        return Err(OnlineError::PhiCeiling { ceiling });
    }
    let mut state = OnlineState::new(budget, (0..num_tasks).collect());
    let mut assignment = Assignment::empty();
    for worker in workers {
        if state.is_halted() {
            break;
        }
        check_worker_bids(worker, num_tasks, ceiling)?;
        let offer = state
            .remaining_budget
            .min(phi_unchecked(state.consumed_fraction, ceiling));
        if let Some((task, bid)) =
            worker.cheapest_available(&state.remaining_tasks, num_tasks, offer)
        {
            state.remaining_tasks.remove(&task);
            match mode {
                PaymentMode::Bid => {
                    state.charge(bid);
                    assignment.push(worker.id, task, bid);
                }
                PaymentMode::Threshold => {
                    state.charge(offer);
                    assignment.push(worker.id, task, offer);
                }
            }
        }
    }
    Ok(assignment)
}

/// Potential-function online algorithm over an instance's arrival order.
pub fn oha(inst: &Instance, mode: PaymentMode) -> Result<Assignment, OnlineError> {
    run_oha(
        inst.workers(),
        inst.num_tasks(),
        inst.budget(),
        inst.bid_ceiling(),
        mode,
    )
}

/// Which budget the second-half threshold run receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetMode {
    /// `B / 2`, matching the analyzed algorithm. Default.
    Half,
    /// The whole budget; nothing was spent on the observed half, so this
    /// only helps. Used by the experiment sweeps.
    Full,
}

/// Parameters of the random-permutation algorithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RpaConfig {
    pub alpha: f64,
    pub budget_mode: BudgetMode,
}

impl RpaConfig {
    pub fn new(alpha: f64, budget_mode: BudgetMode) -> Result<Self, OnlineError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(OnlineError::InvalidAlpha { alpha });
        }
        Ok(Self { alpha, budget_mode })
    }
}

impl Default for RpaConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            budget_mode: BudgetMode::Half,
        }
    }
}

/// Sample-then-commit policy: observe the first `floor(n/2)` workers
/// assigning nothing, estimate `p_hat` by the offline approximation on that
/// half with budget `B/2`, then run the fixed threshold policy at
/// `(1 + alpha) * p_hat` on the rest.
pub fn rpa(inst: &Instance, cfg: &RpaConfig) -> Result<Assignment, OnlineError> {
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(OnlineError::InvalidAlpha { alpha: cfg.alpha });
    }
    let n = inst.num_workers();
    if n < 2 {
        return Err(OnlineError::TooFewWorkers { workers: n });
    }
    let tasks = inst.all_tasks();
    let half = n / 2;
    let observed = &inst.workers()[..half];
    let estimate = oa(observed, &tasks, inst.budget() / 2.0, inst.num_tasks());
    let price = (1.0 + cfg.alpha) * estimate.p_star;
    let second_budget = match cfg.budget_mode {
        BudgetMode::Half => inst.budget() / 2.0,
        BudgetMode::Full => inst.budget(),
    };
    Ok(ftp(
        price,
        second_budget,
        &inst.workers()[half..],
        &tasks,
        inst.num_tasks(),
    ))
}
