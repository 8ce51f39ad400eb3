//! Seeded construction of the three instance families used by the
//! experiments and lower-bound machinery.
//!
//! All generators draw from the fixed portable stream in [`crate::rng`], so
//! equal parameters and seed reproduce byte-identical instances on every
//! platform. Draw order is part of the contract and documented per family.

use crate::instance::{Instance, Worker};
use crate::rng::Xoshiro256StarStar;
use std::collections::BTreeMap;
use thiserror::Error;

/// Base seed for a generator run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seed(pub u64);

impl From<u64> for Seed {
    fn from(base: u64) -> Self {
        Seed(base)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("ceiling must be a power of two in [2, 2^20], got {ceiling}")]
    CeilingNotPowerOfTwo { ceiling: u64 },
    #[error("uniform family needs 2 <= R <= 200 (budget is 200), got {ceiling}")]
    UniformCeilingOutOfRange { ceiling: u64 },
    #[error("eta must lie strictly between 0 and 1, got {eta}")]
    EtaOutOfRange { eta: f64 },
    #[error("lower-bound family needs ceiling >= 2, got {ceiling}")]
    CeilingTooSmall { ceiling: f64 },
    #[error("lower-bound family needs budget >= ceiling, got budget {budget} < {ceiling}")]
    BudgetBelowCeiling { budget: f64, ceiling: f64 },
    #[error(
        "floor bid {floor} of the lower-bound family falls below 1 for eta {eta}, R {ceiling}; \
         pick parameters with R*(1-eta)^k >= 1 (e.g. eta = 0.5 with a power-of-two R)"
    )]
    BidFloorBelowOne { eta: f64, ceiling: f64, floor: f64 },
}

/// Maximum ceiling for the adversarial family.
pub const ADVERSARIAL_MAX_CEILING: u64 = 1 << 20;

fn is_valid_adversarial_ceiling(r: u64) -> bool {
    r.is_power_of_two() && (2..=ADVERSARIAL_MAX_CEILING).contains(&r)
}

/// Adversarial staircase with an explicit depth `i`: groups of workers at
/// bids `R, R/2, ..., R/2^i`, the group at bid `R/2^j` holding
/// `B * 2^j / R = 2^(j+1)` workers (B = 2R), padded with bid-R workers to
/// `n = 8R`. Every worker bids its value on all `m = n` tasks.
pub fn adversarial_with_depth(r: u64, depth: u32) -> Result<Instance, GenError> {
    if !is_valid_adversarial_ceiling(r) {
        return Err(GenError::CeilingNotPowerOfTwo { ceiling: r });
    }
    debug_assert!(depth >= 1 && depth <= r.ilog2());
    let n = (8 * r) as usize;
    let mut workers = Vec::with_capacity(n);
    for j in 0..=depth {
        let bid = (r >> j) as f64;
        let group_size = 1usize << (j + 1);
        for _ in 0..group_size {
            workers.push(Worker::uniform(workers.len(), bid));
        }
    }
    while workers.len() < n {
        workers.push(Worker::uniform(workers.len(), r as f64));
    }
    Ok(Instance::new(workers, n, 2.0 * r as f64, r as f64).expect("staircase is valid"))
}

/// Adversarial family draw: the staircase depth `i` is chosen uniformly
/// from `{1, ..., log2 R}` (one `next_below` draw), then the instance is
/// fully determined.
pub fn gen_adversarial(r: u64, seed: Seed) -> Result<Instance, GenError> {
    if !is_valid_adversarial_ceiling(r) {
        return Err(GenError::CeilingNotPowerOfTwo { ceiling: r });
    }
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed.0);
    let depth = 1 + rng.next_below(r.ilog2() as u64) as u32;
    adversarial_with_depth(r, depth)
}

/// Uniform heterogeneous family: `n = m = 200`, `B = 200`, each
/// (worker, task) pair feasible independently with probability 0.05, each
/// realized edge bid uniform on integers `{1, ..., R}`. Pairs are visited
/// in row-major (worker, then task) order; one Bernoulli draw per pair and
/// one bounded draw per realized edge.
/// Worker count, task count, and budget of the uniform family.
pub const UNIFORM_SIZE: usize = 200;

pub fn gen_uniform_hetero(r: u64, seed: Seed) -> Result<Instance, GenError> {
    const SIZE: usize = UNIFORM_SIZE;
    if !(2..=SIZE as u64).contains(&r) {
        return Err(GenError::UniformCeilingOutOfRange { ceiling: r });
    }
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed.0);
    let mut workers = Vec::with_capacity(SIZE);
    for id in 0..SIZE {
        let mut bids = BTreeMap::new();
        for task in 0..SIZE {
            if rng.bernoulli(0.05) {
                let bid = 1 + rng.next_below(r);
                bids.insert(task, bid as f64);
            }
        }
        workers.push(Worker::sparse(id, bids));
    }
    Ok(Instance::new(workers, SIZE, SIZE as f64, r as f64).expect("uniform family is valid"))
}

/// The nested hard-instance family `I_0 .. I_k` with its distribution.
///
/// `k` is the smallest integer with `(1 - eta)^k <= 1/R`. Instance `I_u`
/// extends `I_{u-1}` with `round(B / (R (1-eta)^u))` workers (at least one)
/// bidding `R (1-eta)^u`; all instances are padded with bid-R workers to
/// the length of `I_k`. The distribution puts `eta / ((k+1) eta + 1)` on
/// each of `I_0 .. I_{k-1}` and `(1 + eta) / ((k+1) eta + 1)` on `I_k`.
#[derive(Debug, Clone)]
pub struct LowerBoundFamily {
    pub eta: f64,
    pub ceiling: f64,
    pub budget: f64,
    pub k: usize,
    /// Bid of level `u`: `R (1-eta)^u`, as computed by repeated
    /// multiplication (no re-quantization).
    pub level_bids: Vec<f64>,
    pub probs: Vec<f64>,
    pub instances: Vec<Instance>,
}

fn check_eta(eta: f64) -> Result<(), GenError> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(GenError::EtaOutOfRange { eta });
    }
    Ok(())
}

/// Smallest `k` with `(1 - eta)^k <= 1/R`, powers taken by repeated
/// multiplication exactly as the family construction does.
pub fn lower_bound_k(eta: f64, ceiling: f64) -> Result<usize, GenError> {
    check_eta(eta)?;
    if ceiling.is_nan() || ceiling < 2.0 {
        return Err(GenError::CeilingTooSmall { ceiling });
    }
    let threshold = 1.0 / ceiling;
    let mut power = 1.0;
    let mut k = 0usize;
    while power > threshold {
        power *= 1.0 - eta;
        k += 1;
    }
    Ok(k)
}

/// Probabilities `p_0 .. p_k` of the hard distribution.
pub fn lower_bound_probs(eta: f64, k: usize) -> Vec<f64> {
    let denom = (k as f64 + 1.0) * eta + 1.0;
    let mut probs = vec![eta / denom; k + 1];
    probs[k] = (1.0 + eta) / denom;
    probs
}

pub fn gen_lower_bound_family(
    eta: f64,
    ceiling: f64,
    budget: f64,
) -> Result<LowerBoundFamily, GenError> {
    let k = lower_bound_k(eta, ceiling)?;
    if budget < ceiling {
        return Err(GenError::BudgetBelowCeiling { budget, ceiling });
    }

    let mut level_bids = Vec::with_capacity(k + 1);
    let mut bid = ceiling;
    for _ in 0..=k {
        level_bids.push(bid);
        bid *= 1.0 - eta;
    }
    let floor = level_bids[k];
    if floor < 1.0 {
        return Err(GenError::BidFloorBelowOne {
            eta,
            ceiling,
            floor,
        });
    }

    let group_sizes: Vec<usize> = level_bids
        .iter()
        .map(|&level_bid| ((budget / level_bid).round() as usize).max(1))
        .collect();
    let total_len: usize = group_sizes.iter().sum();

    let mut instances = Vec::with_capacity(k + 1);
    let mut prefix: Vec<f64> = Vec::new();
    for u in 0..=k {
        prefix.extend(std::iter::repeat_n(level_bids[u], group_sizes[u]));
        let mut bids = prefix.clone();
        bids.extend(std::iter::repeat_n(ceiling, total_len - bids.len()));
        let workers = bids
            .into_iter()
            .enumerate()
            .map(|(id, b)| Worker::uniform(id, b))
            .collect();
        instances.push(
            Instance::new(workers, total_len, budget, ceiling)
                .expect("lower-bound family is valid"),
        );
    }

    Ok(LowerBoundFamily {
        eta,
        ceiling,
        budget,
        k,
        level_bids,
        probs: lower_bound_probs(eta, k),
        instances,
    })
}
