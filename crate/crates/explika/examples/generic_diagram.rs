//! A theory with several explaining paths between the same two atoms:
//! the raw derivation keeps every gathered proviso, the minimal filter
//! keeps only the ones not dominated by a subset.
//!
//! Run with: cargo run --example generic_diagram

use explika::engine::{derive_all, derive_unminimized};
use explika::parser::parse_theory;

fn main() {
    let path = format!("{}/theories/fig1.cet", env!("CARGO_MANIFEST_DIR"));
    let theory = parse_theory(&std::fs::read_to_string(path).unwrap()).unwrap();

    let alpha = theory.resolve_atom("alpha", &[]).unwrap();
    let delta = theory.resolve_atom("delta", &[]).unwrap();

    let (ctx, raw) = derive_unminimized(&theory).unwrap();
    let key = (
        ctx.universe().lookup(&alpha).unwrap(),
        ctx.universe().lookup(&delta).unwrap(),
    );
    println!("provisos for alpha explains delta, before minimization:");
    for entry in raw.provisos(key) {
        let names: Vec<&str> = entry.proviso.iter().map(|&i| ctx.universe().text(i)).collect();
        println!("  {{{}}}", names.join(", "));
    }

    let (ctx, minimal) = derive_all(&theory).unwrap();
    let key = (
        ctx.universe().lookup(&alpha).unwrap(),
        ctx.universe().lookup(&delta).unwrap(),
    );
    println!("\nafter minimization (the optimal paths):");
    for entry in minimal.provisos(key) {
        let names: Vec<&str> = entry.proviso.iter().map(|&i| ctx.universe().text(i)).collect();
        println!("  {{{}}}", names.join(", "));
    }
}
