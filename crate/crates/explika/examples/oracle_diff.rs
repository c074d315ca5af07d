//! Differential testing: the engine against the brute-force oracle on
//! seeded random theories. The oracle enumerates truth tables and every
//! proviso subset, so agreement on small theories is strong evidence
//! the optimized pipeline is right.
//!
//! Run with: cargo run --example oracle_diff

use explika::oracle::{diff_engine_oracle, random_theory, OracleLimits, RandomTheoryParams};
use explika::parser::render_theory;

fn main() {
    let params = RandomTheoryParams::default();
    let limits = OracleLimits::default();

    let mut agreed = 0;
    for seed in 0..50u64 {
        let theory = random_theory(seed, &params);
        let report = diff_engine_oracle(&theory, &limits).unwrap();
        if report.identical {
            agreed += 1;
        } else {
            println!("seed {seed} disagrees:");
            for f in &report.failures {
                println!("  failure: {f}");
            }
            for d in &report.incompleteness {
                println!("  incompleteness: {d}");
            }
            println!("theory:\n{}", render_theory(&theory));
        }
    }
    println!("{agreed}/50 random theories: engine and oracle agree");

    let one = random_theory(7, &params);
    println!("\nsample generated theory (seed 7):\n{}", render_theory(&one));
}
