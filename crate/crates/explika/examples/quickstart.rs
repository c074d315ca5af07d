//! Smallest end-to-end use of the library: write a theory as text,
//! derive every explanation it supports, and show that ruling the cause
//! out defeats the explanation.
//!
//! Run with: cargo run --example quickstart

use explika::engine::explain_query;
use explika::parser::{parse_theory, render_explanation};

fn main() {
    let theory = parse_theory(
        "pred Flu/0. pred Fever_Temperature/0.
         cause Flu => Fever_Temperature.",
    )
    .unwrap();

    println!("Derived explanations:");
    for atom in explain_query(&theory, None, None).unwrap() {
        println!("  {}", render_explanation(theory.symbols(), &atom));
    }

    // Explanations are tentative: they stand only while the proviso is
    // possible. Add the fact that there is no flu and ask again.
    let defeated = parse_theory(
        "pred Flu/0. pred Fever_Temperature/0.
         cause Flu => Fever_Temperature.
         fact !Flu.",
    )
    .unwrap();
    let atoms = explain_query(&defeated, None, None).unwrap();
    println!("After adding `fact !Flu.`: {} explanations", atoms.len());
}
