//! Golden-file tests: the PRNG, generators, algorithms, aggregation, and
//! number formatting are all pinned, so these bytes must never drift
//! across platforms or refactors. Regenerate the files deliberately (and
//! flag it in review) if the stream definition is ever changed on purpose.

use crowd_assign::generate::{gen_adversarial, Seed};
use crowd_assign::harness::{run_adversarial_experiment, AdversarialConfig};
use crowd_assign::instance::{parse_instance, serialize_instance};

#[test]
fn adversarial_instance_bytes_are_frozen() {
    let golden = include_str!("data/adversarial_r2_seed0.json");
    let inst = gen_adversarial(2, Seed(0)).unwrap();
    let mut text = serialize_instance(&inst);
    text.push('\n');
    assert_eq!(text, golden);
    // And the golden file itself parses back to the same instance.
    assert_eq!(parse_instance(golden).unwrap(), inst);
}

#[test]
fn adversarial_sweep_csv_bytes_are_frozen() {
    let golden = include_str!("data/adversarial_sweep_small.csv");
    let cfg = AdversarialConfig {
        min_ceiling: 2,
        max_ceiling: 4,
        trials: 2,
        base_seed: 0,
        alpha: 0.5,
        parallel: true,
    };
    let output = run_adversarial_experiment(&cfg).unwrap();
    assert_eq!(output.to_csv(), golden);
}
