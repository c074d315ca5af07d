//! The engine and the brute-force oracle must produce identical output
//! sets on every shipped scenario, with zero known-incompleteness
//! diagnostics: the exhaustive simplifier must find nothing the engine
//! missed.

use explika::engine::{derive_all, derive_unminimized, verify_derivations};
use explika::oracle::{diff_engine_oracle, random_theory, OracleLimits, RandomTheoryParams};
use explika::parser::parse_theory;

fn shipped_theories() -> Vec<std::path::PathBuf> {
    let dir = format!("{}/theories", env!("CARGO_MANIFEST_DIR"));
    let mut names: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "cet"))
        .collect();
    names.sort();
    names
}

#[test]
fn every_shipped_theory_matches_the_oracle_exactly() {
    let limits = OracleLimits {
        max_universe: 16,
        max_enumeration: 16,
    };
    let names = shipped_theories();
    assert!(names.len() >= 20, "scenario files missing");
    for path in names {
        let theory = parse_theory(&std::fs::read_to_string(&path).unwrap())
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let report = diff_engine_oracle(&theory, &limits)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(
            report.identical && report.incompleteness.is_empty(),
            "{}: failures {:?}, incompleteness {:?}",
            path.display(),
            report.failures,
            report.incompleteness
        );
    }
}

#[test]
fn derivation_traces_replay_everywhere() {
    for path in shipped_theories() {
        let theory = parse_theory(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let (ctx, set) = derive_all(&theory).unwrap();
        verify_derivations(&ctx, &set).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let (ctx, raw) = derive_unminimized(&theory).unwrap();
        verify_derivations(&ctx, &raw).unwrap_or_else(|e| panic!("{} raw: {e}", path.display()));
    }
    let params = RandomTheoryParams::default();
    for seed in 0..150u64 {
        let theory = random_theory(seed, &params);
        if let Ok((ctx, set)) = derive_all(&theory) {
            verify_derivations(&ctx, &set).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        }
        if let Ok((ctx, raw)) = derive_unminimized(&theory) {
            verify_derivations(&ctx, &raw).unwrap_or_else(|e| panic!("seed {seed} raw: {e}"));
        }
    }
}
