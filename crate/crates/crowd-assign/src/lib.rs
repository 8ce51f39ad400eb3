//! Budgeted online assignment of heterogeneous tasks.
//!
//! Workers arrive one by one, each with a feasible task set and per-task
//! bids; a requester with budget `B` assigns each arriving worker at most
//! one task (paying at least the bid) to maximize the number of assigned
//! tasks. This crate provides:
//!
//! * the instance/assignment data model and its JSON wire format
//!   ([`instance`]),
//! * the exact offline optimum via min-cost flow, a brute-force oracle, and
//!   the homogeneous greedy baseline ([`offline`]),
//! * the fixed threshold policy and the threshold-search offline
//!   approximation ([`threshold`]),
//! * the adversarial-order online algorithm with its potential-function
//!   price and the sample-then-commit random-permutation algorithm
//!   ([`online`]),
//! * seeded generators for the adversarial, uniform-heterogeneous, and
//!   nested hard-instance families ([`generate`]),
//! * an experiment harness computing competitive ratios over seeded sweeps
//!   with the proven performance bounds enforced on every trial
//!   ([`harness`]).

pub mod generate;
pub mod harness;
pub mod instance;
pub mod offline;
pub mod online;
pub mod rng;
pub mod threshold;

pub use harness::competitive_ratio;
pub use instance::{
    parse_instance, serialize_instance, validate_assignment, Assignment, Instance, Worker,
};
pub use offline::{brute_force_optimal, greedy_homogeneous, offline_optimal};
pub use online::{oha, potential_phi, rpa};
pub use threshold::{ftp, oa};
