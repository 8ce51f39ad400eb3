//! Experiment driver: seeded multi-trial sweeps over the instance families,
//! competitive-ratio aggregation, CSV emission, and the lower-bound
//! arithmetic checks.
//!
//! Every trial's algorithm output is validated before its ratio is taken,
//! and the proven performance bounds are asserted on every single trial: a
//! violation fails the whole sweep rather than skewing a mean. Trials are
//! independently seeded with `mix_seed(base, [R, trial])` so any one of
//! them can be reproduced in isolation, and records are sorted before
//! aggregation so parallel and serial runs emit identical CSV.

use crate::generate::{
    gen_adversarial, gen_uniform_hetero, lower_bound_k, lower_bound_probs, GenError,
    LowerBoundFamily, Seed,
};
use crate::instance::{validate_assignment, Assignment, Instance, InstanceError};
use crate::offline::{greedy_homogeneous, offline_optimal};
use crate::online::{oha, rpa, BudgetMode, OnlineError, PaymentMode, RpaConfig};
use crate::rng::{mix_seed, Xoshiro256StarStar};
use crate::threshold::oa;
use rayon::prelude::*;
use std::fmt;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("assignment does not validate against the instance: {report}")]
    AssignmentInvalid { report: String },
    #[error("{algorithm} produced an invalid assignment (R={r}, trial={trial}): {report}")]
    InvalidAssignment {
        algorithm: Algorithm,
        r: u64,
        trial: u32,
        report: String,
    },
    #[error(
        "competitive bound violated by {algorithm} ({order}) at R={r}, trial={trial}: \
         OPT={opt} vs {pairs} pairs, bound {bound}"
    )]
    BoundViolation {
        algorithm: Algorithm,
        order: ArrivalOrder,
        r: u64,
        trial: u32,
        opt: usize,
        pairs: usize,
        bound: f64,
    },
    #[error(
        "threshold search lost its 4-approximation at R={r}, trial={trial}: OPT={opt} vs Q={q}"
    )]
    ApproxViolation {
        r: u64,
        trial: u32,
        opt: usize,
        q: usize,
    },
    #[error("strategy vector has dimension {found}, family needs {expected}")]
    StrategyDimension { expected: usize, found: usize },
    #[error("strategy vector is not a sub-distribution: {reason}")]
    BadStrategy { reason: String },
    #[error(
        "lower-bound inequality violated at eta={eta}, R={ceiling}: value {value} > bound {bound} \
         for strategy {strategy:?}"
    )]
    LowerBoundViolation {
        eta: f64,
        ceiling: f64,
        value: f64,
        bound: f64,
        strategy: Vec<f64>,
    },
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Online(#[from] OnlineError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Algorithm {
    Oha,
    Rpa,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Oha => write!(f, "oha"),
            Algorithm::Rpa => write!(f, "rpa"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ArrivalOrder {
    Arrival,
    Permuted,
}

impl fmt::Display for ArrivalOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArrivalOrder::Arrival => write!(f, "arrival"),
            ArrivalOrder::Permuted => write!(f, "permuted"),
        }
    }
}

/// One algorithm run on one trial instance. `opt_pairs` is `None` when the
/// offline optimum could not be computed at this scale; such trials are
/// flagged in the CSV instead of being silently wrong.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub r: u64,
    pub trial: u32,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub order: ArrivalOrder,
    pub alg_pairs: usize,
    pub opt_pairs: Option<usize>,
    /// `opt / alg`; 1 when both are zero, `+inf` when only `alg` is zero,
    /// NaN when the offline solve was skipped.
    pub ratio: f64,
}

/// OPT(sigma) / ALG(sigma) with the degenerate cases pinned down.
pub fn pair_ratio(opt: usize, alg: usize) -> f64 {
    match (opt, alg) {
        (0, 0) => 1.0,
        (_, 0) => f64::INFINITY,
        _ => opt as f64 / alg as f64,
    }
}

/// The adversarial-order competitive bound `(R e)^eps (ln R + 3)`.
pub fn oha_bound(ceiling: f64, epsilon: f64) -> f64 {
    (ceiling * std::f64::consts::E).powf(epsilon) * (ceiling.ln() + 3.0)
}

/// Competitive ratio of an assignment against the exact offline optimum.
/// The assignment must validate against the instance.
pub fn competitive_ratio(inst: &Instance, assignment: &Assignment) -> Result<f64, HarnessError> {
    let report = validate_assignment(inst, assignment);
    if !report.is_ok() {
        return Err(HarnessError::AssignmentInvalid {
            report: report.to_string(),
        });
    }
    let opt = offline_optimal(inst).flow_value;
    Ok(pair_ratio(opt, assignment.len()))
}

/// Arc budget above which the flow solve is considered infeasible for a
/// sweep trial and the record is flagged as skipped instead.
const FLOW_ARC_LIMIT: usize = 5_000_000;

/// Offline optimum pair count for a sweep trial. Homogeneous-complete
/// instances (every worker bids one value on all tasks) are solved exactly
/// by the sorted greedy; anything else goes through the flow reduction
/// unless its arc count is out of desk range.
fn sweep_opt_pairs(inst: &Instance) -> Option<usize> {
    if inst.is_homogeneous_complete() {
        return Some(greedy_homogeneous(inst).len());
    }
    let arcs: usize = inst.num_workers()
        + inst.num_tasks()
        + inst
            .workers()
            .iter()
            .map(|w| w.feasible_len(inst.num_tasks()))
            .sum::<usize>();
    if arcs > FLOW_ARC_LIMIT {
        return None;
    }
    Some(offline_optimal(inst).flow_value)
}

fn check_assignment(
    inst: &Instance,
    assignment: &Assignment,
    algorithm: Algorithm,
    r: u64,
    trial: u32,
) -> Result<(), HarnessError> {
    let report = validate_assignment(inst, assignment);
    if report.is_ok() {
        Ok(())
    } else {
        Err(HarnessError::InvalidAssignment {
            algorithm,
            r,
            trial,
            report: report.to_string(),
        })
    }
}

fn check_oha_bound(record: &TrialRecord, ceiling: f64, epsilon: f64) -> Result<(), HarnessError> {
    let Some(opt) = record.opt_pairs else {
        return Ok(());
    };
    let bound = oha_bound(ceiling, epsilon);
    if opt as f64 <= bound * record.alg_pairs as f64 {
        Ok(())
    } else {
        Err(HarnessError::BoundViolation {
            algorithm: record.algorithm,
            order: record.order,
            r: record.r,
            trial: record.trial,
            opt,
            pairs: record.alg_pairs,
            bound,
        })
    }
}

/// Aggregated row of a sweep: mean over the finite ratios, with infinite
/// and skipped trials counted separately rather than folded into the mean.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub r: u64,
    pub algorithm: Algorithm,
    pub order: ArrivalOrder,
    pub mean_ratio: f64,
    pub trials: u32,
    pub inf_trials: u32,
    pub skipped_trials: u32,
}

fn aggregate(records: &[TrialRecord]) -> Vec<SweepRow> {
    let mut rows: Vec<SweepRow> = Vec::new();
    for record in records {
        let key = (record.r, record.algorithm, record.order);
        if rows
            .last()
            .map(|row| (row.r, row.algorithm, row.order) != key)
            .unwrap_or(true)
        {
            rows.push(SweepRow {
                r: record.r,
                algorithm: record.algorithm,
                order: record.order,
                mean_ratio: 0.0,
                trials: 0,
                inf_trials: 0,
                skipped_trials: 0,
            });
        }
        let row = rows.last_mut().unwrap();
        row.trials += 1;
        if record.opt_pairs.is_none() {
            row.skipped_trials += 1;
        } else if record.ratio.is_infinite() {
            row.inf_trials += 1;
        } else {
            row.mean_ratio += record.ratio;
        }
    }
    for row in &mut rows {
        let finite = row.trials - row.inf_trials - row.skipped_trials;
        row.mean_ratio = if finite > 0 {
            row.mean_ratio / finite as f64
        } else {
            f64::NAN
        };
    }
    rows
}

fn sort_records(records: &mut [TrialRecord]) {
    records.sort_by(|a, b| {
        (a.r, a.algorithm, a.order, a.trial).cmp(&(b.r, b.algorithm, b.order, b.trial))
    });
}

fn fmt_mean(value: f64) -> String {
    if value.is_nan() {
        "nan".to_string()
    } else {
        format!("{value}")
    }
}

/// Adversarial sweep configuration. `R` runs over the powers of two in
/// `[min_ceiling, max_ceiling]` with `B = 2R`.
#[derive(Debug, Clone)]
pub struct AdversarialConfig {
    pub min_ceiling: u64,
    pub max_ceiling: u64,
    pub trials: u32,
    pub base_seed: u64,
    pub alpha: f64,
    pub parallel: bool,
}

impl Default for AdversarialConfig {
    fn default() -> Self {
        Self {
            min_ceiling: 2,
            max_ceiling: 1 << 12,
            trials: 200,
            base_seed: 0,
            alpha: 0.5,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdversarialOutput {
    pub records: Vec<TrialRecord>,
    pub rows: Vec<SweepRow>,
}

impl AdversarialOutput {
    /// Columns: R, algorithm, order, mean over finite ratios, trial count,
    /// infinite-ratio count, skipped-offline count, and the ln(R) reference.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("R,algorithm,order,mean_ratio,trials,inf_trials,skipped_trials,ln_R\n");
        for row in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                row.r,
                row.algorithm,
                row.order,
                fmt_mean(row.mean_ratio),
                row.trials,
                row.inf_trials,
                row.skipped_trials,
                (row.r as f64).ln()
            )
            .unwrap();
        }
        out
    }
}

const PERMUTATION_SALT: u64 = 0x70_65_72_6d; // "perm"

fn permutation_of(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    rng.shuffle(&mut order);
    order
}

/// One adversarial trial: OHA on the arrival order, OHA and RPA on a
/// uniformly permuted order, with the competitive bound and the factor-4
/// guarantee checked on the spot.
fn adversarial_trial(
    r: u64,
    trial: u32,
    cfg: &AdversarialConfig,
) -> Result<Vec<TrialRecord>, HarnessError> {
    let seed = mix_seed(cfg.base_seed, &[r, trial as u64]);
    let inst = gen_adversarial(r, Seed(seed))?;
    let epsilon = inst.epsilon();
    let opt = sweep_opt_pairs(&inst);

    let order = permutation_of(inst.num_workers(), mix_seed(seed, &[PERMUTATION_SALT]));
    let permuted = inst.permuted(&order)?;

    let rpa_cfg = RpaConfig::new(cfg.alpha, BudgetMode::Full)?;
    let runs = [
        (
            Algorithm::Oha,
            ArrivalOrder::Arrival,
            oha(&inst, PaymentMode::Bid)?,
        ),
        (
            Algorithm::Oha,
            ArrivalOrder::Permuted,
            oha(&permuted, PaymentMode::Bid)?,
        ),
        (
            Algorithm::Rpa,
            ArrivalOrder::Permuted,
            rpa(&permuted, &rpa_cfg)?,
        ),
    ];

    let mut records = Vec::with_capacity(runs.len());
    for (algorithm, order, assignment) in runs {
        let run_instance = match order {
            ArrivalOrder::Arrival => &inst,
            ArrivalOrder::Permuted => &permuted,
        };
        check_assignment(run_instance, &assignment, algorithm, r, trial)?;
        let record = TrialRecord {
            r,
            trial,
            seed,
            algorithm,
            order,
            alg_pairs: assignment.len(),
            opt_pairs: opt,
            ratio: opt.map_or(f64::NAN, |o| pair_ratio(o, assignment.len())),
        };
        if algorithm == Algorithm::Oha {
            check_oha_bound(&record, inst.bid_ceiling(), epsilon)?;
        }
        records.push(record);
    }

    // The threshold search must stay within a quarter of the optimum.
    if let Some(opt) = opt {
        let approx = oa(
            inst.workers(),
            &inst.all_tasks(),
            inst.budget(),
            inst.num_tasks(),
        );
        if opt > 4 * approx.q {
            return Err(HarnessError::ApproxViolation {
                r,
                trial,
                opt,
                q: approx.q,
            });
        }
    }
    Ok(records)
}

fn power_of_two_range(min: u64, max: u64) -> Vec<u64> {
    let mut values = Vec::new();
    let mut r = min.max(2).next_power_of_two();
    while r <= max {
        values.push(r);
        r *= 2;
    }
    values
}

fn run_trials<F>(
    combos: Vec<(u64, u32)>,
    parallel: bool,
    trial_fn: F,
) -> Result<Vec<TrialRecord>, HarnessError>
where
    F: Fn(u64, u32) -> Result<Vec<TrialRecord>, HarnessError> + Sync,
{
    let nested: Result<Vec<Vec<TrialRecord>>, HarnessError> = if parallel {
        combos
            .into_par_iter()
            .map(|(r, trial)| trial_fn(r, trial))
            .collect()
    } else {
        combos
            .into_iter()
            .map(|(r, trial)| trial_fn(r, trial))
            .collect()
    };
    let mut records: Vec<TrialRecord> = nested?.into_iter().flatten().collect();
    sort_records(&mut records);
    Ok(records)
}

/// Seeded sweep over the adversarial staircase family.
pub fn run_adversarial_experiment(
    cfg: &AdversarialConfig,
) -> Result<AdversarialOutput, HarnessError> {
    let combos: Vec<(u64, u32)> = power_of_two_range(cfg.min_ceiling, cfg.max_ceiling)
        .into_iter()
        .flat_map(|r| (0..cfg.trials).map(move |t| (r, t)))
        .collect();
    let records = run_trials(combos, cfg.parallel, |r, trial| {
        adversarial_trial(r, trial, cfg)
    })?;
    let rows = aggregate(&records);
    Ok(AdversarialOutput { records, rows })
}

/// Uniform-heterogeneous sweep configuration: `R = min..=max`, `n = m =
/// 200`, `B = 200`, edge probability 0.05.
#[derive(Debug, Clone)]
pub struct UniformConfig {
    pub min_ceiling: u64,
    pub max_ceiling: u64,
    pub trials: u32,
    pub alpha: f64,
    pub base_seed: u64,
    pub parallel: bool,
}

impl Default for UniformConfig {
    fn default() -> Self {
        Self {
            min_ceiling: 2,
            max_ceiling: 50,
            trials: 80,
            alpha: 0.5,
            base_seed: 0,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct UniformOutput {
    pub records: Vec<TrialRecord>,
    pub rows: Vec<SweepRow>,
}

impl UniformOutput {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("R,algorithm,mean_ratio,trials,inf_trials,skipped_trials\n");
        for row in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                row.r,
                row.algorithm,
                fmt_mean(row.mean_ratio),
                row.trials,
                row.inf_trials,
                row.skipped_trials
            )
            .unwrap();
        }
        out
    }
}

/// One uniform-family trial: OHA and RPA (full budget, per the experiment
/// protocol) on the generated arrival order, ratios against the exact flow
/// optimum, bounds asserted.
fn uniform_trial(
    r: u64,
    trial: u32,
    cfg: &UniformConfig,
) -> Result<Vec<TrialRecord>, HarnessError> {
    let seed = mix_seed(cfg.base_seed, &[r, trial as u64]);
    let inst = gen_uniform_hetero(r, Seed(seed))?;
    let epsilon = inst.epsilon();
    let opt = sweep_opt_pairs(&inst);

    let rpa_cfg = RpaConfig::new(cfg.alpha, BudgetMode::Full)?;
    let runs = [
        (Algorithm::Oha, oha(&inst, PaymentMode::Bid)?),
        (Algorithm::Rpa, rpa(&inst, &rpa_cfg)?),
    ];
    let mut records = Vec::with_capacity(runs.len());
    for (algorithm, assignment) in runs {
        check_assignment(&inst, &assignment, algorithm, r, trial)?;
        let record = TrialRecord {
            r,
            trial,
            seed,
            algorithm,
            order: ArrivalOrder::Arrival,
            alg_pairs: assignment.len(),
            opt_pairs: opt,
            ratio: opt.map_or(f64::NAN, |o| pair_ratio(o, assignment.len())),
        };
        if algorithm == Algorithm::Oha {
            check_oha_bound(&record, inst.bid_ceiling(), epsilon)?;
        }
        records.push(record);
    }

    if let Some(opt) = opt {
        let approx = oa(
            inst.workers(),
            &inst.all_tasks(),
            inst.budget(),
            inst.num_tasks(),
        );
        if opt > 4 * approx.q {
            return Err(HarnessError::ApproxViolation {
                r,
                trial,
                opt,
                q: approx.q,
            });
        }
    }
    Ok(records)
}

/// Seeded sweep over the uniform heterogeneous family.
pub fn run_uniform_experiment(cfg: &UniformConfig) -> Result<UniformOutput, HarnessError> {
    let combos: Vec<(u64, u32)> = (cfg.min_ceiling..=cfg.max_ceiling)
        .flat_map(|r| (0..cfg.trials).map(move |t| (r, t)))
        .collect();
    let records = run_trials(combos, cfg.parallel, |r, trial| {
        uniform_trial(r, trial, cfg)
    })?;
    let rows = aggregate(&records);
    Ok(UniformOutput { records, rows })
}

/// Fraction of budget spent per bid level of the hard family: nonnegative
/// entries summing to at most 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyVector(Vec<f64>);

impl StrategyVector {
    pub fn new(values: Vec<f64>) -> Result<Self, HarnessError> {
        if values.iter().any(|&v| v.is_nan() || v < 0.0) {
            return Err(HarnessError::BadStrategy {
                reason: format!("negative entry in {values:?}"),
            });
        }
        let sum: f64 = values.iter().sum();
        if sum > 1.0 + 1e-12 {
            return Err(HarnessError::BadStrategy {
                reason: format!("entries sum to {sum} > 1"),
            });
        }
        Ok(Self(values))
    }

    /// The whole budget on the last (cheapest) level.
    pub fn concentrated(dim: usize) -> Self {
        let mut values = vec![0.0; dim];
        if dim > 0 {
            values[dim - 1] = 1.0;
        }
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Inverse of the expected competitive ratio of the deterministic strategy
/// `f` against the hard distribution: `sum_u p_u sum_{v<=u} f_v
/// (1-eta)^(u-v)`.
pub fn expected_inverse_ratio(
    family: &LowerBoundFamily,
    strategy: &StrategyVector,
) -> Result<f64, HarnessError> {
    expected_inverse_ratio_parts(family.eta, &family.probs, strategy)
}

fn expected_inverse_ratio_parts(
    eta: f64,
    probs: &[f64],
    strategy: &StrategyVector,
) -> Result<f64, HarnessError> {
    let levels = probs.len();
    if strategy.values().len() != levels {
        return Err(HarnessError::StrategyDimension {
            expected: levels,
            found: strategy.values().len(),
        });
    }
    let mut decay = Vec::with_capacity(levels);
    let mut power = 1.0;
    for _ in 0..levels {
        decay.push(power);
        power *= 1.0 - eta;
    }
    let mut total = 0.0;
    for (u, &p) in probs.iter().enumerate() {
        let mut inner = 0.0;
        for (v, &f) in strategy.values().iter().enumerate().take(u + 1) {
            inner += f * decay[u - v];
        }
        total += p * inner;
    }
    Ok(total)
}

/// Result of one (eta, R) cell of the lower-bound verification.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundCase {
    pub eta: f64,
    pub ceiling: f64,
    pub k: usize,
    pub bound: f64,
    pub max_observed: f64,
    /// Value attained by the strategy concentrated on the cheapest level;
    /// meets the bound exactly.
    pub concentrated: f64,
    pub samples: u32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LowerBoundReport {
    pub cases: Vec<LowerBoundCase>,
}

/// Draws a strategy uniformly from the simplex (normalized exponentials)
/// scaled by a uniform total in [0, 1].
fn random_strategy(rng: &mut Xoshiro256StarStar, dim: usize) -> StrategyVector {
    let mut values: Vec<f64> = (0..dim).map(|_| -(1.0 - rng.next_f64()).ln()).collect();
    let sum: f64 = values.iter().sum();
    let total = rng.next_f64();
    if sum > 0.0 {
        for v in &mut values {
            *v = *v / sum * total;
        }
    }
    StrategyVector(values)
}

/// Checks the closed-form ceiling `(1 + eta) / ((k+1) eta + 1)` of the
/// expected inverse ratio over random budget-split strategies, for every
/// (eta, R) pair. Any single violation fails the run, naming the strategy.
pub fn verify_lower_bound(
    etas: &[f64],
    ceilings: &[f64],
    samples: u32,
    base_seed: u64,
) -> Result<LowerBoundReport, HarnessError> {
    if samples == 0 {
        return Ok(LowerBoundReport::default());
    }
    let mut cases = Vec::new();
    for &eta in etas {
        for &ceiling in ceilings {
            let k = lower_bound_k(eta, ceiling)?;
            let probs = lower_bound_probs(eta, k);
            let bound = (1.0 + eta) / ((k as f64 + 1.0) * eta + 1.0);
            let mut rng = Xoshiro256StarStar::seed_from_u64(mix_seed(
                base_seed,
                &[eta.to_bits(), ceiling.to_bits()],
            ));
            let mut max_observed = f64::NEG_INFINITY;
            for _ in 0..samples {
                let strategy = random_strategy(&mut rng, k + 1);
                let value = expected_inverse_ratio_parts(eta, &probs, &strategy)?;
                if value > bound + 1e-12 {
                    return Err(HarnessError::LowerBoundViolation {
                        eta,
                        ceiling,
                        value,
                        bound,
                        strategy: strategy.values().to_vec(),
                    });
                }
                max_observed = max_observed.max(value);
            }
            let concentrated =
                expected_inverse_ratio_parts(eta, &probs, &StrategyVector::concentrated(k + 1))?;
            if (concentrated - bound).abs() > 1e-12 {
                return Err(HarnessError::LowerBoundViolation {
                    eta,
                    ceiling,
                    value: concentrated,
                    bound,
                    strategy: StrategyVector::concentrated(k + 1).values().to_vec(),
                });
            }
            cases.push(LowerBoundCase {
                eta,
                ceiling,
                k,
                bound,
                max_observed,
                concentrated,
                samples,
            });
        }
    }
    Ok(LowerBoundReport { cases })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::gen_lower_bound_family;
    use crate::instance::Worker;
    use std::collections::BTreeMap;

    fn toy_instance() -> Instance {
        let w0 = Worker::sparse(0, BTreeMap::from([(0, 1.0), (1, 1.25)]));
        let w1 = Worker::sparse(1, BTreeMap::from([(0, 1.125), (1, 1.75)]));
        Instance::new(vec![w0, w1], 2, 2.5, 2.5).unwrap()
    }

    #[test]
    fn greedy_output_has_ratio_two_on_the_toy() {
        let inst = toy_instance();
        let greedy = greedy_homogeneous(&inst);
        assert_eq!(competitive_ratio(&inst, &greedy).unwrap(), 2.0);
    }

    #[test]
    fn optimum_has_ratio_one() {
        let inst = toy_instance();
        let opt = offline_optimal(&inst).assignment;
        assert_eq!(competitive_ratio(&inst, &opt).unwrap(), 1.0);
    }

    #[test]
    fn starved_algorithm_gets_the_infinity_sentinel() {
        let inst = toy_instance();
        assert_eq!(
            competitive_ratio(&inst, &Assignment::empty()).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn invalid_assignment_is_rejected_before_ratio() {
        let inst = toy_instance();
        let mut bogus = Assignment::empty();
        bogus.push(0, 0, 0.5); // below bid
        assert!(competitive_ratio(&inst, &bogus).is_err());
    }

    #[test]
    fn ratio_conventions() {
        assert_eq!(pair_ratio(0, 0), 1.0);
        assert_eq!(pair_ratio(3, 0), f64::INFINITY);
        assert_eq!(pair_ratio(6, 3), 2.0);
    }

    #[test]
    fn adversarial_sweep_smoke_run_is_deterministic() {
        let cfg = AdversarialConfig {
            min_ceiling: 2,
            max_ceiling: 8,
            trials: 3,
            base_seed: 11,
            alpha: 0.5,
            parallel: false,
        };
        let serial = run_adversarial_experiment(&cfg).unwrap();
        let parallel = run_adversarial_experiment(&AdversarialConfig {
            parallel: true,
            ..cfg.clone()
        })
        .unwrap();
        assert_eq!(serial.records, parallel.records);
        assert_eq!(serial.to_csv(), parallel.to_csv());
        // 3 R values x 3 trials x 3 runs each
        assert_eq!(serial.records.len(), 27);
        assert_eq!(serial.rows.len(), 9);
        for row in &serial.rows {
            assert_eq!(row.trials, 3);
            assert_eq!(row.skipped_trials, 0);
        }
    }

    #[test]
    fn adversarial_csv_has_the_documented_header() {
        let cfg = AdversarialConfig {
            min_ceiling: 2,
            max_ceiling: 2,
            trials: 1,
            base_seed: 0,
            alpha: 0.5,
            parallel: false,
        };
        let out = run_adversarial_experiment(&cfg).unwrap();
        let csv = out.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "R,algorithm,order,mean_ratio,trials,inf_trials,skipped_trials,ln_R"
        );
        assert_eq!(csv.lines().count(), 1 + 3);
        assert!(csv.ends_with('\n'));
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn permuted_oha_is_no_worse_than_arrival_on_average() {
        // Permuting the staircase makes life easier for the online policy;
        // checked at small R with enough trials to be stable.
        let cfg = AdversarialConfig {
            min_ceiling: 4,
            max_ceiling: 16,
            trials: 1000,
            base_seed: 7,
            alpha: 0.5,
            parallel: true,
        };
        let out = run_adversarial_experiment(&cfg).unwrap();
        for r in [4u64, 8, 16] {
            let mean_of = |order: ArrivalOrder| {
                out.rows
                    .iter()
                    .find(|row| row.r == r && row.algorithm == Algorithm::Oha && row.order == order)
                    .unwrap()
                    .mean_ratio
            };
            assert!(
                mean_of(ArrivalOrder::Permuted) <= mean_of(ArrivalOrder::Arrival),
                "R = {r}"
            );
        }
    }

    #[test]
    fn uniform_sweep_smoke_run() {
        let cfg = UniformConfig {
            min_ceiling: 2,
            max_ceiling: 3,
            trials: 2,
            alpha: 0.5,
            base_seed: 5,
            parallel: false,
        };
        let out = run_uniform_experiment(&cfg).unwrap();
        assert_eq!(out.records.len(), 2 * 2 * 2);
        assert_eq!(out.rows.len(), 4);
        let csv = out.to_csv();
        assert!(csv.starts_with("R,algorithm,mean_ratio,trials,inf_trials,skipped_trials\n"));
        for row in &out.rows {
            assert!(row.mean_ratio >= 1.0);
        }
        let again = run_uniform_experiment(&UniformConfig {
            parallel: true,
            ..cfg
        })
        .unwrap();
        assert_eq!(out.to_csv(), again.to_csv());
    }

    #[test]
    fn expected_inverse_ratio_hand_values() {
        let fam = gen_lower_bound_family(0.5, 4.0, 8.0).unwrap();
        let concentrated = StrategyVector::new(vec![0.0, 0.0, 1.0]).unwrap();
        let value = expected_inverse_ratio(&fam, &concentrated).unwrap();
        assert!((value - 0.6).abs() < 1e-15);

        let all_on_top = StrategyVector::new(vec![1.0, 0.0, 0.0]).unwrap();
        let value = expected_inverse_ratio(&fam, &all_on_top).unwrap();
        assert!((value - 0.45).abs() < 1e-15);

        let zeros = StrategyVector::new(vec![0.0; 3]).unwrap();
        assert_eq!(expected_inverse_ratio(&fam, &zeros).unwrap(), 0.0);
    }

    #[test]
    fn expected_inverse_ratio_checks_dimensions() {
        let fam = gen_lower_bound_family(0.5, 4.0, 8.0).unwrap();
        let wrong = StrategyVector::new(vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            expected_inverse_ratio(&fam, &wrong),
            Err(HarnessError::StrategyDimension { .. })
        ));
    }

    #[test]
    fn strategy_vector_rejects_bad_inputs() {
        assert!(StrategyVector::new(vec![0.5, 0.6]).is_err());
        assert!(StrategyVector::new(vec![-0.1, 0.2]).is_err());
        assert!(StrategyVector::new(vec![0.3, 0.3]).is_ok());
    }

    #[test]
    fn lower_bound_verification_passes_on_the_full_parameter_grid() {
        let report = verify_lower_bound(&[0.1, 0.25, 0.5], &[4.0, 16.0, 256.0], 200, 99).unwrap();
        assert_eq!(report.cases.len(), 9);
        for case in &report.cases {
            assert!(case.max_observed <= case.bound + 1e-12);
            assert!((case.concentrated - case.bound).abs() <= 1e-12);
        }
    }

    #[test]
    fn lower_bound_verification_with_zero_samples_is_empty() {
        let report = verify_lower_bound(&[0.5], &[4.0], 0, 0).unwrap();
        assert!(report.cases.is_empty());
    }

    /// The harness reuses one offline optimum for the arrival-order and
    /// permuted-order records of a trial; the optimum is a property of the
    /// bid multiset, not the order.
    #[test]
    fn offline_optimum_is_permutation_invariant() {
        use crate::offline::brute_force_optimal;
        use crate::rng::Xoshiro256StarStar;
        for seed in 0..20 {
            let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
            let n = 2 + rng.next_below(4) as usize;
            let m = 1 + rng.next_below(5) as usize;
            let budget = 1.0 + rng.next_below(10) as f64;
            let workers: Vec<Worker> = (0..n)
                .map(|id| {
                    let mut bids = BTreeMap::new();
                    for task in 0..m {
                        if rng.bernoulli(0.5) {
                            let bid = (1 + rng.next_below(4)) as f64;
                            if bid <= budget {
                                bids.insert(task, bid);
                            }
                        }
                    }
                    Worker::sparse(id, bids)
                })
                .collect();
            let ceiling = workers
                .iter()
                .flat_map(|w| w.iter_bids(m).map(|(_, b)| b))
                .fold(1.0f64, f64::max);
            let inst = Instance::new(workers, m, budget, ceiling).unwrap();
            let mut order: Vec<usize> = (0..n).collect();
            rng.shuffle(&mut order);
            let permuted = inst.permuted(&order).unwrap();
            assert_eq!(
                brute_force_optimal(&inst).unwrap().flow_value,
                brute_force_optimal(&permuted).unwrap().flow_value,
                "seed {seed}"
            );
        }
    }
}
