//! Explanations compose: conditions gathered along a chain are checked
//! jointly, then simplified against the background theory. The printed
//! derivation trees show each rule application.
//!
//! Run with: cargo run --example transitivity

use explika::engine::explain_query;
use explika::model::{Derivation, DerivRule, Symbols, Theory};
use explika::parser::{parse_theory, render_explanation};

fn load(name: &str) -> Theory {
    let path = format!("{}/theories/{name}.cet", env!("CARGO_MANIFEST_DIR"));
    parse_theory(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn print_tree(sym: &Symbols, d: &Derivation, depth: usize) {
    let indent = "  ".repeat(depth + 1);
    let (ans, dum, proviso) = d.replay();
    let mut names: Vec<String> = proviso.iter().map(|a| sym.atom_text(a)).collect();
    names.sort();
    let label = match &d.rule {
        DerivRule::Base { causal, lower, .. } => format!(
            "base on `{} causes {}` via {}",
            sym.atom_text(&causal.cause),
            sym.atom_text(&causal.effect),
            sym.atom_text(lower)
        ),
        DerivRule::Trans => "transitivity".to_string(),
        DerivRule::Simplify { .. } => "simplification".to_string(),
    };
    println!(
        "{indent}{} explains {} bp {{{}}}   <- {label}",
        sym.atom_text(&ans),
        sym.atom_text(&dum),
        names.join(", ")
    );
    for p in &d.premises {
        print_tree(sym, p, depth + 1);
    }
}

fn main() {
    for (name, from, to) in [
        ("sunshine", "Sunshine", "I_am_singing"),
        ("disturbance", "On_alarm", "Disturbance"),
        ("deafening", "On_alarm", "Deafening"),
    ] {
        let theory = load(name);
        let from = theory.resolve_atom(from, &[]).unwrap();
        let to = theory.resolve_atom(to, &[]).unwrap();
        for atom in explain_query(&theory, Some(&from), Some(&to)).unwrap() {
            println!("{}", render_explanation(theory.symbols(), &atom));
            print_tree(theory.symbols(), &atom.trace, 0);
            println!();
        }
    }
}
